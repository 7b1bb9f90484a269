//! Exact auditing of observed marginal play in finite normal-form games.
//!
//! Given a game and one action distribution per player, decide whether some
//! correlated equilibrium has those marginals ([`ce::test_ce_compatibility`])
//! or whether the independent product is a Nash equilibrium
//! ([`nash::test_nash_exploitability`]). Every answer comes with a certificate
//! that [`certificates`] checks without the LP engine: a witness joint
//! distribution, or a transfer scheme with strictly positive expected profit.

pub mod ce;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod lp;
pub mod nash;
pub mod oracle;
pub mod rational;

pub use error::{Error, Result};
pub use rational::Rational;
