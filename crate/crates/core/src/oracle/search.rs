use num_traits::Zero;

use crate::ce::ActionwiseScheme;
use crate::certificates::verify_actionwise;
use crate::game::{surplus_table, DeviationKernel, Game, MarginalProfile};
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub profit: Rational,
    pub scheme: ActionwiseScheme,
}

/// `lo, lo + 1/den, ..., hi` (integers scaled by `1/den`).
pub fn integer_grid(lo: i64, hi: i64, den: i64) -> Vec<Rational> {
    (lo * den..=hi * den).map(|k| ratio(k, den)).collect()
}

/// All distributions over `n` points whose entries are multiples of `1/res`.
fn grid_rows(n: usize, res: u32) -> Vec<Vec<Rational>> {
    fn go(n: usize, left: u32, res: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<Rational>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| ratio(k as i64, res as i64)).collect());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            go(n, left - k, res, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, res, res, &mut Vec::new(), &mut out);
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect()
    })
}

/// Best strictly positive expected profit over action-wise schemes whose
/// kernel rows are multiples of `1/kernel_resolution` (1 = pure
/// recommendations) and whose fees lie on `fee_grid`.
///
/// Every fee vector of all but the last player is enumerated; the last
/// player's fees are set to the largest grid value that keeps inequality (1),
/// which is the maximizer for that player. The winning scheme is re-checked
/// with [`verify_actionwise`]. Returns `None` when no scheme has positive profit.
pub fn exhaustive_scheme_search(
    game: &Game,
    p: &MarginalProfile,
    fee_grid: &[Rational],
    kernel_resolution: u32,
) -> Option<SearchHit> {
    let mut grid = fee_grid.to_vec();
    grid.sort();
    grid.dedup();
    if grid.is_empty() || kernel_resolution == 0 {
        return None;
    }
    let n = game.num_players();
    let last = n - 1;

    let per_player_kernels: Vec<Vec<Vec<Vec<Rational>>>> = (0..n)
        .map(|i| {
            let rows = grid_rows(game.num_actions(i), kernel_resolution);
            cartesian(&vec![rows; game.num_actions(i)])
        })
        .collect();
    let per_player_fees: Vec<Vec<Vec<Rational>>> = (0..last)
        .map(|i| cartesian(&vec![grid.clone(); game.num_actions(i)]))
        .collect();
    let fee_choices = cartesian(&per_player_fees);

    let mut best: Option<(Rational, Vec<Vec<Rational>>, DeviationKernel)> = None;
    for kernel_rows in cartesian(&per_player_kernels) {
        let kernel = DeviationKernel::new(kernel_rows).expect("grid rows are stochastic");
        let surplus = surplus_table(game, &kernel).expect("shapes match");
        'fees: for head in &fee_choices {
            let mut fees = head.clone();
            let mut last_fees = Vec::with_capacity(game.num_actions(last));
            for a in 0..game.num_actions(last) {
                let bound = game
                    .profiles_with(last, a)
                    .map(|k| {
                        let paid: Rational = (0..last).map(|i| &fees[i][game.action_in(k, i)]).sum();
                        &surplus[k] - paid
                    })
                    .min()
                    .expect("every action appears in some profile");
                match grid.partition_point(|g| g <= &bound) {
                    0 => continue 'fees,
                    idx => last_fees.push(grid[idx - 1].clone()),
                }
            }
            fees.push(last_fees);
            let profit: Rational = fees
                .iter()
                .zip(p.dists())
                .flat_map(|(f, d)| f.iter().zip(d))
                .map(|(f, w)| f * w)
                .sum();
            let improves = match &best {
                None => profit > Rational::zero(),
                Some((b, _, _)) => &profit > b,
            };
            if improves {
                best = Some((profit, fees, kernel.clone()));
            }
        }
    }

    best.map(|(profit, fees, kernel)| {
        let scheme = ActionwiseScheme { fees, kernel };
        let verified = verify_actionwise(game, p, &scheme).expect("search keeps inequality (1)");
        assert_eq!(verified, profit);
        SearchHit { profit, scheme }
    })
}
