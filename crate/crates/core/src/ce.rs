//! Compatibility of observed marginals with some correlated equilibrium.
//!
//! The primal system has one variable `q(a)` per action profile:
//!
//! * incentive rows `sum_{a_-i} q(a_i, a_-i) [u_i(a_i, a_-i) - u_i(a_i', a_-i)] >= 0`
//!   for every player and ordered pair `a_i != a_i'`,
//! * marginal rows `sum_{a_-i} q(a_i, a_-i) = p_i(a_i)`,
//! * `q >= 0`.
//!
//! A Farkas certificate of this system carries nonnegative multipliers on
//! the incentive rows and free multipliers on the marginal rows. Read as
//! off-diagonal recommendation mass and per-action fees, they form an
//! action-wise transfer scheme with positive expected profit.

use num_traits::{One, Signed, Zero};

use crate::certificates::{verify_actionwise, verify_witness};
use crate::error::{Error, Result};
use crate::game::{DeviationKernel, Game, JointDistribution, MarginalProfile, Relabeling};
use crate::lp::{solve_feasibility, FeasibilityOutcome, LinearSystem, Sense};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionwiseScheme {
    /// `fees[i][a_i]`
    pub fees: Vec<Vec<Rational>>,
    pub kernel: DeviationKernel,
}

impl ActionwiseScheme {
    pub fn relabel(&self, perms: &Relabeling) -> ActionwiseScheme {
        ActionwiseScheme {
            fees: perms.per_player(&self.fees),
            kernel: perms.kernel(&self.kernel),
        }
    }

    /// Same kernel, fees multiplied by `factor`.
    pub fn scale_fees(&self, factor: &Rational) -> ActionwiseScheme {
        ActionwiseScheme {
            fees: self
                .fees
                .iter()
                .map(|f| f.iter().map(|x| x * factor).collect())
                .collect(),
            kernel: self.kernel.clone(),
        }
    }

    pub fn expected_profit(&self, p: &MarginalProfile) -> Rational {
        self.fees
            .iter()
            .zip(p.dists())
            .flat_map(|(f, d)| f.iter().zip(d))
            .filter(|(_, w)| !w.is_zero())
            .map(|(f, w)| f * w)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CeVerdict {
    Compatible(JointDistribution),
    Exploitable {
        scheme: ActionwiseScheme,
        expected_profit: Rational,
    },
}

impl CeVerdict {
    pub fn is_compatible(&self) -> bool {
        matches!(self, CeVerdict::Compatible(_))
    }
}

pub fn is_correlated_equilibrium(game: &Game, q: &JointDistribution) -> Result<bool> {
    q.check_shape(game)?;
    for i in 0..game.num_players() {
        for from in 0..game.num_actions(i) {
            for to in 0..game.num_actions(i) {
                if from == to {
                    continue;
                }
                let gain: Rational = game
                    .profiles_with(i, from)
                    .filter(|&k| !q.weight(k).is_zero())
                    .map(|k| {
                        q.weight(k) * (game.payoff_at(i, k) - game.payoff_at(i, game.deviate(k, i, to)))
                    })
                    .sum();
                if gain.is_negative() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeRow {
    Incentive { player: usize, from: usize, to: usize },
    Marginal { player: usize, action: usize },
}

/// Row order of [`build_ce_system`]: all incentive rows (player, recommended
/// action, deviation), then all marginal rows (player, action).
pub fn ce_row_layout(game: &Game) -> Vec<CeRow> {
    let mut rows = Vec::new();
    for player in 0..game.num_players() {
        let n = game.num_actions(player);
        for from in 0..n {
            for to in (0..n).filter(|&to| to != from) {
                rows.push(CeRow::Incentive { player, from, to });
            }
        }
    }
    for player in 0..game.num_players() {
        for action in 0..game.num_actions(player) {
            rows.push(CeRow::Marginal { player, action });
        }
    }
    rows
}

pub fn build_ce_system(game: &Game, p: &MarginalProfile) -> Result<LinearSystem> {
    p.check_shape(game)?;
    let n = game.num_profiles();
    let mut sys = LinearSystem::new(n, vec![true; n]);
    for row in ce_row_layout(game) {
        let mut coeffs = vec![Rational::zero(); n];
        match row {
            CeRow::Incentive { player, from, to } => {
                for k in game.profiles_with(player, from) {
                    coeffs[k] = game.payoff_at(player, k) - game.payoff_at(player, game.deviate(k, player, to));
                }
                sys.push(coeffs, Sense::Ge, Rational::zero());
            }
            CeRow::Marginal { player, action } => {
                for k in game.profiles_with(player, action) {
                    coeffs[k] = Rational::one();
                }
                sys.push(coeffs, Sense::Eq, p.prob(player, action).clone());
            }
        }
    }
    Ok(sys)
}

/// Rescales raw off-diagonal multipliers `raw[i][from][to]` by `t = 1/M`
/// when the largest off-diagonal row sum `M` exceeds one, then completes
/// each row on the diagonal. Returns the kernel and `t`.
pub(crate) fn complete_kernel(
    game: &Game,
    raw: &[Vec<Vec<Rational>>],
) -> Result<(DeviationKernel, Rational)> {
    let max_row = raw
        .iter()
        .flat_map(|m| m.iter().enumerate().map(|(from, row)| {
            row.iter()
                .enumerate()
                .filter(|&(to, _)| to != from)
                .map(|(_, v)| v)
                .sum::<Rational>()
        }))
        .max()
        .unwrap_or_else(Rational::zero);
    let t = if max_row > Rational::one() {
        max_row.recip()
    } else {
        Rational::one()
    };
    let rows = (0..game.num_players())
        .map(|i| {
            (0..game.num_actions(i))
                .map(|from| {
                    let mut row: Vec<Rational> = raw[i][from].iter().map(|v| v * &t).collect();
                    let off: Rational = row
                        .iter()
                        .enumerate()
                        .filter(|&(to, _)| to != from)
                        .map(|(_, v)| v)
                        .sum();
                    row[from] = Rational::one() - off;
                    row
                })
                .collect()
        })
        .collect();
    Ok((DeviationKernel::new(rows)?, t))
}

/// Turns a Farkas certificate of [`build_ce_system`] into an action-wise
/// scheme: incentive multipliers become off-diagonal recommendation mass,
/// marginal multipliers become fees, then the whole scheme is rescaled so
/// the kernel rows fit in the simplex.
pub fn normalize_dual(
    game: &Game,
    p: &MarginalProfile,
    farkas: &[Rational],
) -> Result<ActionwiseScheme> {
    let sys = build_ce_system(game, p)?;
    if !sys.is_farkas_certificate(farkas) {
        return Err(Error::InvalidCertificate);
    }
    let mut raw: Vec<Vec<Vec<Rational>>> = game
        .shape()
        .into_iter()
        .map(|n| vec![vec![Rational::zero(); n]; n])
        .collect();
    let mut fees: Vec<Vec<Rational>> = game
        .shape()
        .into_iter()
        .map(|n| vec![Rational::zero(); n])
        .collect();
    for (row, y) in ce_row_layout(game).into_iter().zip(farkas) {
        match row {
            CeRow::Incentive { player, from, to } => raw[player][from][to] = y.clone(),
            CeRow::Marginal { player, action } => fees[player][action] = y.clone(),
        }
    }
    let (kernel, t) = complete_kernel(game, &raw)?;
    for f in fees.iter_mut().flatten() {
        *f *= &t;
    }
    Ok(ActionwiseScheme { fees, kernel })
}

pub fn test_ce_compatibility(game: &Game, p: &MarginalProfile) -> Result<CeVerdict> {
    let sys = build_ce_system(game, p)?;
    match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible(x) => {
            let q = JointDistribution::new(x)?;
            if !verify_witness(game, p, &q) {
                return Err(Error::Disagreement("solver witness fails verification".into()));
            }
            Ok(CeVerdict::Compatible(q))
        }
        FeasibilityOutcome::Infeasible(y) => {
            let scheme = normalize_dual(game, p, &y)?;
            let expected_profit = verify_actionwise(game, p, &scheme)
                .map_err(|e| Error::Disagreement(format!("normalized scheme fails verification: {e}")))?;
            if !expected_profit.is_positive() {
                return Err(Error::Disagreement("normalized scheme has no positive profit".into()));
            }
            Ok(CeVerdict::Exploitable {
                scheme,
                expected_profit,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        arb_game_and_profile, coordination_game, miscoordinated_marginals, mixed_equilibrium,
        pure_marginals, trivial_game,
    };
    use crate::game::{marginal_of, product_distribution, ActionProfile};
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    /// Direct incentive sums, written out without the shared profile helpers.
    fn incentive_sums_by_hand(g: &Game, q: &JointDistribution) -> Vec<Rational> {
        let mut out = Vec::new();
        for i in 0..g.num_players() {
            for from in 0..g.num_actions(i) {
                for to in 0..g.num_actions(i) {
                    let mut s = Rational::zero();
                    for a in g.profiles() {
                        if a.action(i) == from {
                            let k = g.profile_index(&a).unwrap();
                            let dev = g.profile_index(&a.with(i, to)).unwrap();
                            s += q.weight(k) * (g.payoff_at(i, k) - g.payoff_at(i, dev));
                        }
                    }
                    out.push(s);
                }
            }
        }
        out
    }

    #[test]
    fn ce_check_examples() {
        let g = coordination_game();
        let tl = JointDistribution::point_mass(&g, &ActionProfile(vec![0, 0])).unwrap();
        assert!(is_correlated_equilibrium(&g, &tl).unwrap());

        let tm = JointDistribution::point_mass(&g, &ActionProfile(vec![0, 1])).unwrap();
        assert!(!is_correlated_equilibrium(&g, &tm).unwrap());
        // player 2 at M gains 9 by switching to L
        let sums = incentive_sums_by_hand(&g, &tm);
        assert_eq!(sums[4 + 3], int(-9));

        let q = product_distribution(&mixed_equilibrium());
        assert!(incentive_sums_by_hand(&g, &q).iter().all(|s| !s.is_negative()));
        assert!(is_correlated_equilibrium(&g, &q).unwrap());
    }

    #[test]
    fn system_dimensions() {
        let g = coordination_game();
        let sys = build_ce_system(&g, &miscoordinated_marginals()).unwrap();
        assert_eq!(sys.num_vars, 6);
        let layout = ce_row_layout(&g);
        let count = |pl: usize| {
            layout
                .iter()
                .filter(|r| matches!(r, CeRow::Incentive { player, .. } if *player == pl))
                .count()
        };
        assert_eq!((count(0), count(1)), (2, 6));
        assert_eq!(sys.rows.iter().filter(|r| r.sense == Sense::Eq).count(), 5);
        assert_eq!(sys.nonneg.iter().filter(|&&b| b).count(), 6);

        let t = trivial_game();
        let sys = build_ce_system(&t, &pure_marginals(&t, &[0])).unwrap();
        assert_eq!(sys.num_vars, 1);
        assert_eq!(sys.rows.len(), 1);
        assert_eq!(
            solve_feasibility(&sys).unwrap(),
            FeasibilityOutcome::Feasible(vec![int(1)])
        );
    }

    #[test]
    fn miscoordination_is_exploitable() {
        let g = coordination_game();
        let p = miscoordinated_marginals();
        let sys = build_ce_system(&g, &p).unwrap();
        assert!(matches!(solve_feasibility(&sys).unwrap(), FeasibilityOutcome::Infeasible(_)));
        match test_ce_compatibility(&g, &p).unwrap() {
            CeVerdict::Exploitable { scheme, expected_profit } => {
                assert!(expected_profit.is_positive());
                assert_eq!(verify_actionwise(&g, &p, &scheme), Ok(expected_profit));
            }
            v => panic!("expected exploitable, got {v:?}"),
        }
    }

    #[test]
    fn diagonal_mixtures_are_compatible() {
        let g = coordination_game();
        for num in 0..=6 {
            let l = ratio(num, 6);
            let mut w = vec![int(0); 6];
            w[0] = l.clone();
            w[4] = Rational::one() - &l;
            let q = JointDistribution::new(w).unwrap();
            assert!(is_correlated_equilibrium(&g, &q).unwrap());
            let p = MarginalProfile::new((0..2).map(|i| marginal_of(&g, &q, i).unwrap()).collect()).unwrap();
            match test_ce_compatibility(&g, &p).unwrap() {
                CeVerdict::Compatible(witness) => assert!(verify_witness(&g, &p, &witness)),
                v => panic!("λ = {l}: {v:?}"),
            }
        }
    }

    #[test]
    fn any_weight_on_r_is_exploitable() {
        let g = coordination_game();
        for (l, m, r) in [(0, 0, 4), (1, 1, 2), (3, 0, 1), (0, 3, 1)] {
            let p = MarginalProfile::new(vec![
                vec![ratio(1, 3), ratio(2, 3)],
                vec![ratio(l, 4), ratio(m, 4), ratio(r, 4)],
            ])
            .unwrap();
            assert!(!test_ce_compatibility(&g, &p).unwrap().is_compatible());
        }
    }

    #[test]
    fn normalize_dual_rejects_non_certificates() {
        let g = coordination_game();
        let p = pure_marginals(&g, &[0, 2]);
        let layout = ce_row_layout(&g);
        let mut y = vec![int(0); layout.len()];
        for (r, row) in layout.iter().enumerate() {
            if let CeRow::Marginal { player: 1, action: 2 } = row {
                y[r] = int(1);
            }
        }
        assert_eq!(normalize_dual(&g, &p, &y), Err(Error::InvalidCertificate));
        assert_eq!(normalize_dual(&g, &p, &[]), Err(Error::InvalidCertificate));
    }

    #[test]
    fn diagonal_completion() {
        // No incentive mass: identity kernel, fees untouched.
        let g = coordination_game();
        let raw: Vec<Vec<Vec<Rational>>> = g
            .shape()
            .into_iter()
            .map(|n| vec![vec![Rational::zero(); n]; n])
            .collect();
        let (k, t) = complete_kernel(&g, &raw).unwrap();
        assert_eq!(k, DeviationKernel::identity(&g));
        assert_eq!(t, int(1));

        let mut raw = raw;
        raw[1][2][0] = int(3);
        raw[1][2][1] = int(1);
        let (k, t) = complete_kernel(&g, &raw).unwrap();
        assert_eq!(t, ratio(1, 4));
        assert_eq!(k.row(1, 2), &[ratio(3, 4), ratio(1, 4), int(0)]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exactly_one_arm_and_it_verifies((g, p) in arb_game_and_profile()) {
            match test_ce_compatibility(&g, &p).unwrap() {
                CeVerdict::Compatible(q) => prop_assert!(verify_witness(&g, &p, &q)),
                CeVerdict::Exploitable { scheme, expected_profit } => {
                    prop_assert!(expected_profit.is_positive());
                    prop_assert_eq!(verify_actionwise(&g, &p, &scheme), Ok(expected_profit));
                }
            }
        }

        #[test]
        fn affine_payoff_change_keeps_the_arm(
            (g, p) in arb_game_and_profile(),
            alpha_num in 1i64..6,
            alpha_den in 1i64..4,
            shift_seed in any::<u64>(),
        ) {
            use rand::Rng;
            let alpha = ratio(alpha_num, alpha_den);
            let mut rng = crate::fixtures::rng(shift_seed);
            // beta_i(a_-i): one shift per player per opponent sub-profile
            let shifts: Vec<Vec<Rational>> = (0..g.num_players())
                .map(|_| (0..g.num_profiles()).map(|_| int(rng.gen_range(-5..=5))).collect())
                .collect();
            let h = g.map_payoffs(|i, k, u| {
                // indexed by a_-i only
                &alpha * u + &shifts[i][g.deviate(k, i, 0)]
            });
            let a = test_ce_compatibility(&g, &p).unwrap().is_compatible();
            let b = test_ce_compatibility(&h, &p).unwrap().is_compatible();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn relabeling_keeps_the_arm((g, p) in arb_game_and_profile(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut rng = crate::fixtures::rng(seed);
            let perms = Relabeling(
                g.shape().into_iter().map(|n| {
                    let mut v: Vec<usize> = (0..n).collect();
                    v.shuffle(&mut rng);
                    v
                }).collect(),
            );
            let h = g.relabel(&perms).unwrap();
            let hp = perms.marginals(&p);
            match test_ce_compatibility(&g, &p).unwrap() {
                CeVerdict::Compatible(q) => {
                    prop_assert!(test_ce_compatibility(&h, &hp).unwrap().is_compatible());
                    prop_assert!(verify_witness(&h, &hp, &perms.joint(&g, &q)));
                }
                CeVerdict::Exploitable { scheme, expected_profit } => {
                    prop_assert!(!test_ce_compatibility(&h, &hp).unwrap().is_compatible());
                    prop_assert_eq!(verify_actionwise(&h, &hp, &scheme.relabel(&perms)), Ok(expected_profit));
                }
            }
        }
    }
}
