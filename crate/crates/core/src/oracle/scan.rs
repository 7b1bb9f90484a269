use num_traits::{Signed, Zero};

use crate::certificates::verify_witness;
use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution, MarginalProfile};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOutcome {
    Found(JointDistribution),
    Unresolved,
}

/// Walks a rational grid over the coupling polytope of a two-player marginal
/// profile and returns the first point that verifies as a compatible CE.
///
/// Only the supports matter: with supports of sizes `s1` and `s2` the
/// polytope has `(s1 - 1)(s2 - 1)` free cells, which must be at most two.
/// Each free cell `(a, b)` is gridded over `[max(0, p1(a) + p2(b) - 1),
/// min(p1(a), p2(b))]` with `resolution` steps; the remaining cells are
/// completed from the marginals and the point is kept if they are nonnegative.
pub fn coupling_scan_2x2(game: &Game, p: &MarginalProfile, resolution: u32) -> Result<ScanOutcome> {
    if game.num_players() != 2 {
        return Err(Error::Precondition("coupling scan needs exactly two players".into()));
    }
    if resolution == 0 {
        return Err(Error::Precondition("resolution must be positive".into()));
    }
    p.check_shape(game)?;
    let support = |i: usize| -> Vec<usize> {
        (0..game.num_actions(i))
            .filter(|&a| p.prob(i, a).is_positive())
            .collect()
    };
    let (rows, cols) = (support(0), support(1));
    let free: Vec<(usize, usize)> = rows[..rows.len() - 1]
        .iter()
        .flat_map(|&a| cols[..cols.len() - 1].iter().map(move |&b| (a, b)))
        .collect();
    if free.len() > 2 {
        return Err(Error::Precondition(format!(
            "coupling polytope has {} free dimensions, at most 2 supported",
            free.len()
        )));
    }

    let one = int(1);
    let steps = int(resolution as i64);
    let axes: Vec<Vec<Rational>> = free
        .iter()
        .map(|&(a, b)| {
            let (pa, pb) = (p.prob(0, a), p.prob(1, b));
            let hi = pa.min(pb).clone();
            let lo = (pa + pb - &one).max(Rational::zero());
            (0..=resolution)
                .map(|k| &lo + (&hi - &lo) * int(k as i64) / &steps)
                .collect()
        })
        .collect();

    let total: usize = axes.iter().map(Vec::len).product();
    let cols_n = game.num_actions(1);
    for mut code in 0..total {
        let mut cell = vec![Rational::zero(); game.num_profiles()];
        for (axis, &(a, b)) in axes.iter().zip(&free) {
            cell[a * cols_n + b] = axis[code % axis.len()].clone();
            code /= axis.len();
        }
        let (last_row, last_col) = (*rows.last().unwrap(), *cols.last().unwrap());
        for &a in &rows[..rows.len() - 1] {
            let used: Rational = cols[..cols.len() - 1].iter().map(|&b| &cell[a * cols_n + b]).sum();
            cell[a * cols_n + last_col] = p.prob(0, a) - used;
        }
        for &b in &cols {
            let used: Rational = rows[..rows.len() - 1].iter().map(|&a| &cell[a * cols_n + b]).sum();
            cell[last_row * cols_n + b] = p.prob(1, b) - used;
        }
        if cell.iter().any(Signed::is_negative) {
            continue;
        }
        let Ok(q) = JointDistribution::new(cell) else {
            continue;
        };
        if verify_witness(game, p, &q) {
            return Ok(ScanOutcome::Found(q));
        }
    }
    Ok(ScanOutcome::Unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{coordination_game, miscoordinated_marginals, pure_marginals, random_corpus};
    use crate::rational::ratio;

    #[test]
    fn finds_the_diagonal_coupling() {
        let g = coordination_game();
        let p = MarginalProfile::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 2), ratio(1, 2), int(0)],
        ])
        .unwrap();
        let ScanOutcome::Found(q) = coupling_scan_2x2(&g, &p, 8).unwrap() else {
            panic!("diagonal coupling is on the grid");
        };
        assert_eq!(q.weight(0), &ratio(1, 2));
        assert_eq!(q.weight(4), &ratio(1, 2));
    }

    #[test]
    fn miscoordination_never_resolves() {
        let g = coordination_game();
        for res in [1, 4, 64, 97] {
            assert_eq!(coupling_scan_2x2(&g, &miscoordinated_marginals(), res).unwrap(), ScanOutcome::Unresolved);
        }
    }

    #[test]
    fn pure_profile_at_resolution_one() {
        let g = coordination_game();
        let ScanOutcome::Found(q) = coupling_scan_2x2(&g, &pure_marginals(&g, &[0, 0]), 1).unwrap() else {
            panic!("point mass");
        };
        assert_eq!(q.weight(0), &int(1));
    }

    #[test]
    fn rejects_large_polytopes() {
        let g = random_corpus(3, 8).into_iter().find(|g| g.shape() == [3, 3]).unwrap();
        let p = MarginalProfile::new(vec![vec![ratio(1, 3); 3], vec![ratio(1, 3); 3]]).unwrap();
        assert!(matches!(coupling_scan_2x2(&g, &p, 4), Err(Error::Precondition(_))));
        let g3 = random_corpus(3, 8).into_iter().find(|g| g.num_players() == 3).unwrap();
        let p3 = crate::fixtures::random_marginals(&mut crate::fixtures::rng(1), &g3);
        assert!(matches!(coupling_scan_2x2(&g3, &p3, 4), Err(Error::Precondition(_))));
    }
}
