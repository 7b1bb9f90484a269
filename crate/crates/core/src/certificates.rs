//! Stand-alone checks for every witness and transfer scheme the analyzers
//! emit. Nothing here touches the LP engine; all checks are direct exact
//! evaluations over the game's payoff tensors.

use num_traits::Zero;
use thiserror::Error;

use crate::ce::{is_correlated_equilibrium, ActionwiseScheme};
use crate::game::{
    marginal_of, product_distribution, surplus_at, ActionProfile, DeviationKernel, Game,
    JointDistribution, MarginalProfile,
};
use crate::nash::ProfilewiseScheme;
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeFailure {
    #[error("certificate shape does not match the game: {0}")]
    Shape(String),
    #[error("kernel row of player {player}, action {action} is not a distribution")]
    NotStochastic { player: usize, action: usize },
    #[error("transfer inequality violated at profile {labels:?} (short by {})", format_rational(.shortfall))]
    Violated {
        profile: ActionProfile,
        labels: Vec<String>,
        shortfall: Rational,
    },
}

pub fn verify_witness(game: &Game, p: &MarginalProfile, q: &JointDistribution) -> bool {
    if p.check_shape(game).is_err() || q.check_shape(game).is_err() {
        return false;
    }
    if JointDistribution::new(q.weights().to_vec()).is_err() {
        return false;
    }
    for i in 0..game.num_players() {
        match marginal_of(game, q, i) {
            Ok(m) if m == p.player(i) => {}
            _ => return false,
        }
    }
    is_correlated_equilibrium(game, q).unwrap_or(false)
}

fn check_kernel(game: &Game, kernel: &DeviationKernel) -> Result<(), SchemeFailure> {
    kernel
        .check_shape(game)
        .map_err(|e| SchemeFailure::Shape(e.to_string()))?;
    // Re-validate so hand-built kernels cannot slip through.
    DeviationKernel::new(kernel.rows().to_vec()).map_err(|e| match e {
        crate::Error::NotStochastic { player, action, .. } => {
            SchemeFailure::NotStochastic { player, action }
        }
        other => SchemeFailure::Shape(other.to_string()),
    })?;
    Ok(())
}

/// `S_eta(a) - sum_i f_i(a_i)` for every profile in row-major order.
/// Inequality (1) holds at `a` iff the entry is nonnegative; it is tight iff zero.
pub fn actionwise_slack(game: &Game, s: &ActionwiseScheme) -> Result<Vec<Rational>, SchemeFailure> {
    check_kernel(game, &s.kernel)?;
    if s.fees.iter().map(Vec::len).collect::<Vec<_>>() != game.shape() {
        return Err(SchemeFailure::Shape("fee table does not match action sets".into()));
    }
    Ok((0..game.num_profiles())
        .map(|k| {
            let fees: Rational = (0..game.num_players())
                .map(|i| &s.fees[i][game.action_in(k, i)])
                .sum();
            surplus_at(game, &s.kernel, k) - fees
        })
        .collect())
}

/// `S_eta(a) - f(a)` for every profile.
pub fn profilewise_slack(game: &Game, s: &ProfilewiseScheme) -> Result<Vec<Rational>, SchemeFailure> {
    check_kernel(game, &s.kernel)?;
    if s.fee.len() != game.num_profiles() {
        return Err(SchemeFailure::Shape("fee table does not cover every profile".into()));
    }
    Ok((0..game.num_profiles())
        .map(|k| surplus_at(game, &s.kernel, k) - &s.fee[k])
        .collect())
}

fn first_violation(game: &Game, slack: &[Rational]) -> Result<(), SchemeFailure> {
    match slack.iter().position(|x| x < &Rational::zero()) {
        None => Ok(()),
        Some(k) => Err(SchemeFailure::Violated {
            profile: game.profile(k),
            labels: game.profile_labels(k),
            shortfall: -slack[k].clone(),
        }),
    }
}

/// Checks inequality (1) at every profile and returns the expected profit
/// `sum_i sum_{a_i} p_i(a_i) f_i(a_i)`. The sign is the caller's concern.
pub fn verify_actionwise(
    game: &Game,
    p: &MarginalProfile,
    s: &ActionwiseScheme,
) -> Result<Rational, SchemeFailure> {
    p.check_shape(game)
        .map_err(|e| SchemeFailure::Shape(e.to_string()))?;
    let slack = actionwise_slack(game, s)?;
    first_violation(game, &slack)?;
    Ok(s.expected_profit(p))
}

/// Checks inequality (2) at every profile and returns the expected profit
/// under the independent product of `p`.
pub fn verify_profilewise(
    game: &Game,
    p: &MarginalProfile,
    s: &ProfilewiseScheme,
) -> Result<Rational, SchemeFailure> {
    p.check_shape(game)
        .map_err(|e| SchemeFailure::Shape(e.to_string()))?;
    let slack = profilewise_slack(game, s)?;
    first_violation(game, &slack)?;
    let q = product_distribution(p);
    Ok(q.weights()
        .iter()
        .zip(&s.fee)
        .filter(|(w, _)| !w.is_zero())
        .map(|(w, f)| w * f)
        .sum())
}
