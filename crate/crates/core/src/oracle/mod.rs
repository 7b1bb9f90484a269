//! Brute-force ground truth for small instances.
//!
//! None of this goes through [`crate::lp`]: the CE sampler carries its own
//! lexicographic simplex, and the scan and search are plain enumerations
//! checked with [`crate::certificates`]. Each is sound in one direction only.

mod scan;
mod search;
mod vertex;

pub use scan::{coupling_scan_2x2, ScanOutcome};
pub use search::{exhaustive_scheme_search, integer_grid, SearchHit};
pub use vertex::random_ce;

use crate::game::Game;

/// Number of (kernel, fee) combinations [`exhaustive_scheme_search`] would
/// enumerate, saturating.
pub fn search_size(game: &Game, grid_len: usize, kernel_resolution: u32) -> u128 {
    let n = game.num_players();
    let mut total: u128 = 1;
    for i in 0..n {
        let k = game.num_actions(i) as u128;
        // rows on the grid: C(res + k - 1, k - 1)
        let mut rows: u128 = 1;
        for j in 1..k {
            rows = rows * (kernel_resolution as u128 + j) / j;
        }
        total = total.saturating_mul(rows.saturating_pow(k as u32));
        if i + 1 < n {
            total = total.saturating_mul((grid_len as u128).saturating_pow(k as u32));
        }
    }
    total
}
