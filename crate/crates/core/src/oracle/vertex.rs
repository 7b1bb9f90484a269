use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::fixtures::rng;
use crate::game::{Game, JointDistribution};
use crate::rational::{int, Rational};

/// Lexicographic reduced cost: (artificial part, objective part).
fn lex_negative(primary: &Rational, secondary: &Rational) -> bool {
    primary.is_negative() || (primary.is_zero() && secondary.is_negative())
}

/// Minimizes `objective . q` over the CE polytope and returns the optimal
/// vertex. Infeasibility of `sum q = 1` is penalized lexicographically ahead
/// of the objective; entering and leaving choices follow Bland's rule.
fn optimal_ce_vertex(game: &Game, objective: &[Rational]) -> JointDistribution {
    let n = game.num_profiles();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for i in 0..game.num_players() {
        let k = game.num_actions(i);
        for from in 0..k {
            for to in (0..k).filter(|&t| t != from) {
                // -sum q(a)[u_i(a) - u_i(to, a_-i)] <= 0
                let mut row = vec![Rational::zero(); n];
                for idx in game.profiles_with(i, from) {
                    row[idx] = game.payoff_at(i, game.deviate(idx, i, to)) - game.payoff_at(i, idx);
                }
                rows.push(row);
            }
        }
    }
    let slacks = rows.len();
    // columns: q (n), slacks, one artificial, rhs
    let ncols = n + slacks + 1;
    let art = n + slacks;
    let mut tab: Vec<Vec<Rational>> = rows
        .into_iter()
        .enumerate()
        .map(|(r, mut row)| {
            row.resize(ncols + 1, Rational::zero());
            row[n + r] = Rational::one();
            row
        })
        .collect();
    let mut total = vec![Rational::one(); n];
    total.resize(ncols + 1, Rational::zero());
    total[art] = Rational::one();
    total[ncols] = Rational::one();
    tab.push(total);
    let mut basis: Vec<usize> = (n..n + slacks).chain(std::iter::once(art)).collect();

    let mut primary = vec![Rational::zero(); ncols + 1];
    for v in &mut primary[..n] {
        *v = -Rational::one();
    }
    primary[ncols] = -Rational::one();
    let mut secondary = vec![Rational::zero(); ncols + 1];
    secondary[..n].clone_from_slice(objective);

    while let Some(enter) = (0..ncols).find(|&j| lex_negative(&primary[j], &secondary[j])) {
        let mut leave: Option<(usize, Rational)> = None;
        for (r, row) in tab.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[ncols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*l]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.expect("the CE polytope is bounded");
        let inv = tab[r][enter].recip();
        tab[r].iter_mut().for_each(|v| *v *= &inv);
        let pivot = tab[r].clone();
        let reduce = |target: &mut Vec<Rational>| {
            let f = target[enter].clone();
            if !f.is_zero() {
                for (t, p) in target.iter_mut().zip(&pivot) {
                    if !p.is_zero() {
                        *t -= &f * p;
                    }
                }
            }
        };
        for (i, row) in tab.iter_mut().enumerate() {
            if i != r {
                reduce(row);
            }
        }
        reduce(&mut primary);
        reduce(&mut secondary);
        basis[r] = enter;
    }
    assert!(
        primary[ncols].is_zero(),
        "every finite game has a correlated equilibrium"
    );

    let mut q = vec![Rational::zero(); n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            q[b] = tab[r][ncols].clone();
        }
    }
    JointDistribution::for_game(game, q).expect("vertex of the CE polytope")
}

/// A vertex of the game's CE polytope, chosen by a seeded random objective.
pub fn random_ce(game: &Game, seed: u64) -> JointDistribution {
    let mut r = rng(seed);
    let objective: Vec<Rational> = (0..game.num_profiles())
        .map(|_| int(r.gen_range(-100..=100)))
        .collect();
    optimal_ce_vertex(game, &objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ce::is_correlated_equilibrium;
    use crate::fixtures::{coordination_game, matching_pennies, random_corpus, trivial_game};
    use crate::rational::ratio;

    #[test]
    fn coordination_game_never_uses_r() {
        let g = coordination_game();
        for seed in 0..20 {
            let q = random_ce(&g, seed);
            assert!(is_correlated_equilibrium(&g, &q).unwrap());
            assert!(q.weight(2).is_zero() && q.weight(5).is_zero());
        }
    }

    #[test]
    fn trivial_and_unique_cases() {
        let t = trivial_game();
        assert_eq!(random_ce(&t, 7).weights(), &[int(1)]);
        let g = matching_pennies();
        for seed in 0..5 {
            assert_eq!(random_ce(&g, seed).weights(), vec![ratio(1, 4); 4].as_slice());
        }
    }

    #[test]
    fn deterministic_and_valid_on_corpus() {
        for (k, g) in random_corpus(11, 24).iter().enumerate() {
            let q = random_ce(g, k as u64);
            assert!(is_correlated_equilibrium(g, &q).unwrap());
            assert_eq!(q, random_ce(g, k as u64));
        }
    }

    #[test]
    fn optimizes_the_objective() {
        // Minimizing -q(T,L) must put all mass on (T,L); minimizing -q(B,M) on (B,M).
        let g = coordination_game();
        let mut c = vec![int(0); 6];
        c[0] = int(-1);
        assert_eq!(optimal_ce_vertex(&g, &c).weight(0), &int(1));
        let mut c = vec![int(0); 6];
        c[4] = int(-1);
        assert_eq!(optimal_ce_vertex(&g, &c).weight(4), &int(1));
    }
}
