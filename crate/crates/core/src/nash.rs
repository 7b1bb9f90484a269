//! Nash equilibrium: the direct support check and the profile-wise
//! exploitation certificate for profiles that fail it.
//!
//! With `q` the independent product of the marginals, the feasibility system
//! in `q~` (incentive rows, `q~(a) = q(a)`, `q~ >= 0`) is feasible exactly at
//! a Nash equilibrium. Its Farkas multipliers give recommendation mass on the
//! incentive rows and an aggregate fee `f(a)` per profile.

use num_traits::{One, Signed, Zero};

use crate::ce::{ce_row_layout, complete_kernel, CeRow};
use crate::certificates::verify_profilewise;
use crate::error::{Error, Result};
use crate::game::{product_distribution, DeviationKernel, Game, MarginalProfile, Relabeling};
use crate::lp::{solve_feasibility, FeasibilityOutcome, LinearSystem, Sense};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilewiseScheme {
    /// Aggregate fee per profile, row-major.
    pub fee: Vec<Rational>,
    pub kernel: DeviationKernel,
}

impl ProfilewiseScheme {
    pub fn relabel(&self, game: &Game, perms: &Relabeling) -> ProfilewiseScheme {
        ProfilewiseScheme {
            fee: perms.per_profile(game, &self.fee),
            kernel: perms.kernel(&self.kernel),
        }
    }

    pub fn scale_fees(&self, factor: &Rational) -> ProfilewiseScheme {
        ProfilewiseScheme {
            fee: self.fee.iter().map(|x| x * factor).collect(),
            kernel: self.kernel.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NashVerdict {
    IsNash,
    Exploitable {
        scheme: ProfilewiseScheme,
        expected_profit: Rational,
    },
}

impl NashVerdict {
    pub fn is_nash(&self) -> bool {
        matches!(self, NashVerdict::IsNash)
    }
}

/// Expected gain of `player` from switching `from -> to` against the others'
/// independent mixtures (negative means `from` is strictly better).
fn deviation_gain(game: &Game, p: &MarginalProfile, player: usize, from: usize, to: usize) -> Rational {
    game.profiles_with(player, from)
        .filter_map(|k| {
            let mut w = Rational::one();
            for j in (0..game.num_players()).filter(|&j| j != player) {
                let pj = p.prob(j, game.action_in(k, j));
                if pj.is_zero() {
                    return None;
                }
                w *= pj;
            }
            Some(w * (game.payoff_at(player, game.deviate(k, player, to)) - game.payoff_at(player, k)))
        })
        .sum()
}

pub fn is_nash(game: &Game, p: &MarginalProfile) -> Result<bool> {
    p.check_shape(game)?;
    for i in 0..game.num_players() {
        for from in (0..game.num_actions(i)).filter(|&a| p.prob(i, a).is_positive()) {
            for to in (0..game.num_actions(i)).filter(|&a| a != from) {
                if deviation_gain(game, p, i, from, to).is_positive() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Incentive rows in [`ce_row_layout`] order, then one equality per profile
/// pinning `q~(a)` to the product distribution.
pub fn build_nash_system(game: &Game, p: &MarginalProfile) -> Result<LinearSystem> {
    p.check_shape(game)?;
    let n = game.num_profiles();
    let q = product_distribution(p);
    let mut sys = LinearSystem::new(n, vec![true; n]);
    for row in ce_row_layout(game) {
        if let CeRow::Incentive { player, from, to } = row {
            let mut coeffs = vec![Rational::zero(); n];
            for k in game.profiles_with(player, from) {
                coeffs[k] = game.payoff_at(player, k) - game.payoff_at(player, game.deviate(k, player, to));
            }
            sys.push(coeffs, Sense::Ge, Rational::zero());
        }
    }
    for k in 0..n {
        let mut coeffs = vec![Rational::zero(); n];
        coeffs[k] = Rational::one();
        sys.push(coeffs, Sense::Eq, q.weight(k).clone());
    }
    Ok(sys)
}

/// Normalizes a Farkas certificate of [`build_nash_system`] into a
/// profile-wise scheme.
pub fn normalize_nash_dual(
    game: &Game,
    p: &MarginalProfile,
    farkas: &[Rational],
) -> Result<ProfilewiseScheme> {
    let sys = build_nash_system(game, p)?;
    if !sys.is_farkas_certificate(farkas) {
        return Err(Error::InvalidCertificate);
    }
    let mut raw: Vec<Vec<Vec<Rational>>> = game
        .shape()
        .into_iter()
        .map(|n| vec![vec![Rational::zero(); n]; n])
        .collect();
    let incentive: Vec<_> = ce_row_layout(game)
        .into_iter()
        .filter_map(|r| match r {
            CeRow::Incentive { player, from, to } => Some((player, from, to)),
            CeRow::Marginal { .. } => None,
        })
        .collect();
    for ((player, from, to), y) in incentive.iter().zip(farkas) {
        raw[*player][*from][*to] = y.clone();
    }
    let (kernel, t) = complete_kernel(game, &raw)?;
    let fee = farkas[incentive.len()..].iter().map(|y| y * &t).collect();
    Ok(ProfilewiseScheme { fee, kernel })
}

pub fn test_nash_exploitability(game: &Game, p: &MarginalProfile) -> Result<NashVerdict> {
    if is_nash(game, p)? {
        return Ok(NashVerdict::IsNash);
    }
    let sys = build_nash_system(game, p)?;
    match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible(_) => Err(Error::Disagreement(
            "direct check rejects a profile whose pinned system is feasible".into(),
        )),
        FeasibilityOutcome::Infeasible(y) => {
            let scheme = normalize_nash_dual(game, p, &y)?;
            let expected_profit = verify_profilewise(game, p, &scheme)
                .map_err(|e| Error::Disagreement(format!("normalized scheme fails verification: {e}")))?;
            if !expected_profit.is_positive() {
                return Err(Error::Disagreement("normalized scheme has no positive profit".into()));
            }
            Ok(NashVerdict::Exploitable {
                scheme,
                expected_profit,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ce::test_ce_compatibility;
    use crate::fixtures::{
        arb_game_and_profile, coordination_game, miscoordinated_marginals, mixed_equilibrium,
        pure_marginals,
    };
    use crate::rational::int;
    use proptest::prelude::*;

    #[test]
    fn direct_check_examples() {
        let g = coordination_game();
        assert!(is_nash(&g, &pure_marginals(&g, &[0, 0])).unwrap());
        assert!(is_nash(&g, &mixed_equilibrium()).unwrap());
        assert!(!is_nash(&g, &miscoordinated_marginals()).unwrap());
        assert!(!is_nash(&g, &pure_marginals(&g, &[0, 1])).unwrap());
    }

    #[test]
    fn expected_utilities_at_miscoordination() {
        // E u_2(M) = 1/2 and E u_2(L) = 9/2 against p_1 = (1/2, 1/2)
        let g = coordination_game();
        let p = miscoordinated_marginals();
        assert_eq!(deviation_gain(&g, &p, 1, 1, 0), int(4));
        assert_eq!(deviation_gain(&g, &p, 1, 0, 1), int(-4));
    }

    #[test]
    fn miscoordination_certificate() {
        let g = coordination_game();
        let p = miscoordinated_marginals();
        match test_nash_exploitability(&g, &p).unwrap() {
            NashVerdict::Exploitable { scheme, expected_profit } => {
                assert!(expected_profit.is_positive());
                assert_eq!(verify_profilewise(&g, &p, &scheme), Ok(expected_profit));
            }
            NashVerdict::IsNash => panic!("not an equilibrium"),
        }
    }

    #[test]
    fn pure_non_equilibrium_certificate() {
        let g = coordination_game();
        let p = pure_marginals(&g, &[0, 1]);
        let NashVerdict::Exploitable { scheme, expected_profit } = test_nash_exploitability(&g, &p).unwrap() else {
            panic!("(T, M) is not an equilibrium");
        };
        assert!(expected_profit.is_positive());
        assert_eq!(verify_profilewise(&g, &p, &scheme), Ok(expected_profit));
        // eta_2(M, L) = 1 with f(T, M) = 9 and f(B, M) = -1
        let kernel = DeviationKernel::identity_with(&g, &[(1, 1, vec![int(1), int(0), int(0)])]).unwrap();
        let mut fee = vec![int(0); 6];
        fee[1] = int(9);
        fee[4] = int(-1);
        assert_eq!(verify_profilewise(&g, &p, &ProfilewiseScheme { fee, kernel }), Ok(int(9)));
    }

    #[test]
    fn mixed_equilibrium_is_nash_and_compatible() {
        let g = coordination_game();
        let p = mixed_equilibrium();
        assert_eq!(test_nash_exploitability(&g, &p).unwrap(), NashVerdict::IsNash);
        assert!(test_ce_compatibility(&g, &p).unwrap().is_compatible());
        let sys = build_nash_system(&g, &p).unwrap();
        assert!(matches!(solve_feasibility(&sys).unwrap(), FeasibilityOutcome::Feasible(_)));
    }

    #[test]
    fn zero_probability_actions_are_not_checked() {
        // R is never a best response, but with p_2(R) = 0 it imposes nothing.
        let g = coordination_game();
        let p = MarginalProfile::new(vec![
            vec![int(1), int(0)],
            vec![int(1), int(0), int(0)],
        ])
        .unwrap();
        assert!(is_nash(&g, &p).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lp_alternative_agrees_with_direct_check((g, p) in arb_game_and_profile()) {
            let direct = is_nash(&g, &p).unwrap();
            let lp_feasible = matches!(
                solve_feasibility(&build_nash_system(&g, &p).unwrap()).unwrap(),
                FeasibilityOutcome::Feasible(_)
            );
            prop_assert_eq!(direct, lp_feasible);
            match test_nash_exploitability(&g, &p).unwrap() {
                NashVerdict::IsNash => {
                    prop_assert!(direct);
                    prop_assert!(test_ce_compatibility(&g, &p).unwrap().is_compatible());
                }
                NashVerdict::Exploitable { scheme, expected_profit } => {
                    prop_assert!(!direct);
                    prop_assert!(expected_profit.is_positive());
                    prop_assert_eq!(verify_profilewise(&g, &p, &scheme), Ok(expected_profit));
                }
            }
        }
    }
}
