//! Finite normal-form games and the distributions and kernels defined over them.
//!
//! Action profiles are laid out in row-major order: players in declaration
//! order, actions in declaration order, last player varying fastest.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    payoffs: Vec<Vec<Rational>>,
    strides: Vec<usize>,
}

impl Game {
    pub fn new(
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        payoffs: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if actions.len() != players.len() || payoffs.len() != players.len() {
            return Err(Error::Shape(format!(
                "{} players but {} action lists and {} payoff tensors",
                players.len(),
                actions.len(),
                payoffs.len()
            )));
        }
        let mut seen = HashSet::new();
        for p in &players {
            if !seen.insert(p) {
                return Err(Error::InvalidGame(format!("duplicate player `{p}`")));
            }
        }
        for (p, acts) in players.iter().zip(&actions) {
            if acts.is_empty() {
                return Err(Error::InvalidGame(format!("player `{p}` has no actions")));
            }
            let mut seen = HashSet::new();
            for a in acts {
                if !seen.insert(a) {
                    return Err(Error::InvalidGame(format!(
                        "duplicate action `{a}` for player `{p}`"
                    )));
                }
            }
        }
        let mut strides = vec![1; players.len()];
        for i in (0..players.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * actions[i + 1].len();
        }
        let size = strides[0] * actions[0].len();
        for (p, u) in players.iter().zip(&payoffs) {
            if u.len() != size {
                return Err(Error::Shape(format!(
                    "payoff tensor for player `{p}` has {} entries, expected {size}",
                    u.len()
                )));
            }
        }
        Ok(Game {
            players,
            actions,
            payoffs,
            strides,
        })
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.actions.iter().map(Vec::len).collect()
    }

    pub fn num_profiles(&self) -> usize {
        self.strides[0] * self.actions[0].len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn action_labels(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn player_index(&self, label: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownPlayerLabel(label.to_string()))
    }

    pub fn action_index(&self, player: usize, label: &str) -> Result<usize> {
        self.actions[player]
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAction {
                player: self.players[player].clone(),
                action: label.to_string(),
            })
    }

    /// Payoff tensor of one player, flat in row-major profile order.
    pub fn payoffs(&self, player: usize) -> &[Rational] {
        &self.payoffs[player]
    }

    pub fn payoff_at(&self, player: usize, profile: usize) -> &Rational {
        &self.payoffs[player][profile]
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.players.len() {
            Ok(())
        } else {
            Err(Error::UnknownPlayer(player))
        }
    }

    pub fn profile_index(&self, profile: &ActionProfile) -> Result<usize> {
        if profile.0.len() != self.players.len() {
            return Err(Error::Shape(format!(
                "profile has {} entries for {} players",
                profile.0.len(),
                self.players.len()
            )));
        }
        let mut idx = 0;
        for (i, &a) in profile.0.iter().enumerate() {
            if a >= self.actions[i].len() {
                return Err(Error::ActionOutOfRange {
                    player: i,
                    index: a,
                });
            }
            idx += a * self.strides[i];
        }
        Ok(idx)
    }

    pub fn profile(&self, index: usize) -> ActionProfile {
        ActionProfile(
            (0..self.num_players())
                .map(|i| self.action_in(index, i))
                .collect(),
        )
    }

    pub fn profiles(&self) -> impl Iterator<Item = ActionProfile> + '_ {
        (0..self.num_profiles()).map(|k| self.profile(k))
    }

    /// Player `player`'s action in the profile with flat index `index`.
    pub fn action_in(&self, index: usize, player: usize) -> usize {
        (index / self.strides[player]) % self.actions[player].len()
    }

    /// Flat index of the profile obtained by letting `player` switch to `to`.
    pub fn deviate(&self, index: usize, player: usize, to: usize) -> usize {
        let from = self.action_in(index, player);
        index + to * self.strides[player] - from * self.strides[player]
    }

    /// Flat indices of all profiles in which `player` plays `action`, in
    /// row-major order.
    pub fn profiles_with(&self, player: usize, action: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_profiles()).filter(move |&k| self.action_in(k, player) == action)
    }

    pub fn profile_labels(&self, index: usize) -> Vec<String> {
        (0..self.num_players())
            .map(|i| self.actions[i][self.action_in(index, i)].clone())
            .collect()
    }

    /// Same game with every payoff of every player mapped through `f(player, profile, u)`.
    pub fn map_payoffs(&self, mut f: impl FnMut(usize, usize, &Rational) -> Rational) -> Game {
        let payoffs = self
            .payoffs
            .iter()
            .enumerate()
            .map(|(i, u)| u.iter().enumerate().map(|(k, x)| f(i, k, x)).collect())
            .collect();
        Game {
            payoffs,
            ..self.clone()
        }
    }

    /// Reorders each player's actions. `perms[i][old] = new` moves action `old`
    /// of player `i` to position `new`.
    pub fn relabel(&self, perms: &Relabeling) -> Result<Game> {
        perms.check(self)?;
        let actions = self
            .actions
            .iter()
            .zip(&perms.0)
            .map(|(acts, perm)| {
                let mut out = acts.clone();
                for (old, &new) in perm.iter().enumerate() {
                    out[new] = acts[old].clone();
                }
                out
            })
            .collect();
        let mut payoffs = self.payoffs.clone();
        for old in 0..self.num_profiles() {
            let new = perms.map_profile(self, old);
            for (dst, src) in payoffs.iter_mut().zip(&self.payoffs) {
                dst[new] = src[old].clone();
            }
        }
        Game::new(self.players.clone(), actions, payoffs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(pub Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }

    pub fn action(&self, player: usize) -> usize {
        self.0[player]
    }

    /// `a_{-i}` as `(player, action)` pairs.
    pub fn others(&self, player: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(j, _)| j != player)
    }

    pub fn with(&self, player: usize, action: usize) -> ActionProfile {
        let mut out = self.0.clone();
        out[player] = action;
        ActionProfile(out)
    }
}

/// Per-player action permutations; `self.0[i][old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling(pub Vec<Vec<usize>>);

impl Relabeling {
    pub fn identity(game: &Game) -> Self {
        Relabeling(game.shape().into_iter().map(|n| (0..n).collect()).collect())
    }

    fn check(&self, game: &Game) -> Result<()> {
        if self.0.len() != game.num_players() {
            return Err(Error::Shape("relabeling must cover every player".into()));
        }
        for (i, perm) in self.0.iter().enumerate() {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..game.num_actions(i)).collect::<Vec<_>>() {
                return Err(Error::Shape(format!("not a permutation for player {i}")));
            }
        }
        Ok(())
    }

    pub fn map_action(&self, player: usize, action: usize) -> usize {
        self.0[player][action]
    }

    /// Flat index (in the relabeled game) of old profile `index`.
    pub fn map_profile(&self, game: &Game, index: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        for i in (0..game.num_players()).rev() {
            out += self.0[i][game.action_in(index, i)] * stride;
            stride *= game.num_actions(i);
        }
        out
    }

    /// Permutes any per-player, per-action table (marginals, fees).
    pub fn per_player(&self, table: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        table
            .iter()
            .zip(&self.0)
            .map(|(values, perm)| permute(values, perm))
            .collect()
    }

    pub fn marginals(&self, p: &MarginalProfile) -> MarginalProfile {
        MarginalProfile(self.per_player(&p.0))
    }

    /// Permutes any per-profile table (joint weights, profile-wise fees).
    pub fn per_profile(&self, game: &Game, table: &[Rational]) -> Vec<Rational> {
        let mut out = table.to_vec();
        for (old, w) in table.iter().enumerate() {
            out[self.map_profile(game, old)] = w.clone();
        }
        out
    }

    pub fn joint(&self, game: &Game, q: &JointDistribution) -> JointDistribution {
        JointDistribution(self.per_profile(game, &q.0))
    }

    pub fn kernel(&self, eta: &DeviationKernel) -> DeviationKernel {
        let rows = eta
            .0
            .iter()
            .zip(&self.0)
            .map(|(matrix, perm)| {
                let mut out = matrix.clone();
                for (from, row) in matrix.iter().enumerate() {
                    out[perm[from]] = permute(row, perm);
                }
                out
            })
            .collect();
        DeviationKernel(rows)
    }
}

fn permute(values: &[Rational], perm: &[usize]) -> Vec<Rational> {
    let mut out = values.to_vec();
    for (old, &new) in perm.iter().enumerate() {
        out[new] = values[old].clone();
    }
    out
}

fn check_distribution(values: &[Rational], what: impl Fn() -> String) -> Result<()> {
    if let Some(x) = values.iter().find(|x| x.is_negative()) {
        return Err(Error::NotDistribution(format!(
            "{} has negative entry {}",
            what(),
            format_rational(x)
        )));
    }
    let total: Rational = values.iter().sum();
    if !total.is_one() {
        return Err(Error::NotDistribution(format!(
            "{} sums to {}",
            what(),
            format_rational(&total)
        )));
    }
    Ok(())
}

/// One distribution per player over that player's own actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalProfile(Vec<Vec<Rational>>);

impl MarginalProfile {
    pub fn new(dists: Vec<Vec<Rational>>) -> Result<Self> {
        for (i, d) in dists.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::NotDistribution(format!("player {i} has an empty distribution")));
            }
            check_distribution(d, || format!("marginal of player {i}"))?;
        }
        Ok(MarginalProfile(dists))
    }

    pub fn for_game(game: &Game, dists: Vec<Vec<Rational>>) -> Result<Self> {
        let p = Self::new(dists)?;
        p.check_shape(game)?;
        Ok(p)
    }

    pub fn check_shape(&self, game: &Game) -> Result<()> {
        if self.0.iter().map(Vec::len).collect::<Vec<_>>() != game.shape() {
            return Err(Error::Shape("marginal profile does not match the game's action sets".into()));
        }
        Ok(())
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn player(&self, i: usize) -> &[Rational] {
        &self.0[i]
    }

    pub fn prob(&self, player: usize, action: usize) -> &Rational {
        &self.0[player][action]
    }

    pub fn dists(&self) -> &[Vec<Rational>] {
        &self.0
    }
}

/// Distribution over full action profiles, flat in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution(Vec<Rational>);

impl JointDistribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        check_distribution(&weights, || "joint distribution".to_string())?;
        Ok(JointDistribution(weights))
    }

    pub fn for_game(game: &Game, weights: Vec<Rational>) -> Result<Self> {
        let q = Self::new(weights)?;
        q.check_shape(game)?;
        Ok(q)
    }

    pub fn point_mass(game: &Game, profile: &ActionProfile) -> Result<Self> {
        let k = game.profile_index(profile)?;
        let mut w = vec![Rational::zero(); game.num_profiles()];
        w[k] = Rational::one();
        Ok(JointDistribution(w))
    }

    pub fn check_shape(&self, game: &Game) -> Result<()> {
        if self.0.len() != game.num_profiles() {
            return Err(Error::Shape(format!(
                "joint distribution has {} entries, game has {} profiles",
                self.0.len(),
                game.num_profiles()
            )));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[Rational] {
        &self.0
    }

    pub fn weight(&self, index: usize) -> &Rational {
        &self.0[index]
    }
}

/// Row-stochastic recommendation matrix per player: `eta[i][from][to]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationKernel(Vec<Vec<Vec<Rational>>>);

impl DeviationKernel {
    pub fn new(rows: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        for (i, matrix) in rows.iter().enumerate() {
            let n = matrix.len();
            for (from, row) in matrix.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Shape(format!(
                        "kernel of player {i} is not square"
                    )));
                }
                if let Some(x) = row.iter().find(|x| x.is_negative()) {
                    return Err(Error::NotStochastic {
                        player: i,
                        action: from,
                        reason: format!("negative entry {}", format_rational(x)),
                    });
                }
                let total: Rational = row.iter().sum();
                if !total.is_one() {
                    return Err(Error::NotStochastic {
                        player: i,
                        action: from,
                        reason: format!("row sums to {}", format_rational(&total)),
                    });
                }
            }
        }
        Ok(DeviationKernel(rows))
    }

    pub fn identity(game: &Game) -> Self {
        let rows = game
            .shape()
            .into_iter()
            .map(|n| {
                (0..n)
                    .map(|from| {
                        (0..n)
                            .map(|to| if from == to { Rational::one() } else { Rational::zero() })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        DeviationKernel(rows)
    }

    /// Identity kernel with the given rows replaced: `(player, from, row)`.
    pub fn identity_with(game: &Game, rows: &[(usize, usize, Vec<Rational>)]) -> Result<Self> {
        let mut k = Self::identity(game).0;
        for (i, from, row) in rows {
            game.check_player(*i)?;
            if *from >= game.num_actions(*i) {
                return Err(Error::ActionOutOfRange {
                    player: *i,
                    index: *from,
                });
            }
            k[*i][*from] = row.clone();
        }
        Self::new(k)
    }

    pub fn check_shape(&self, game: &Game) -> Result<()> {
        if self.0.iter().map(Vec::len).collect::<Vec<_>>() != game.shape() {
            return Err(Error::Shape("kernel does not match the game's action sets".into()));
        }
        Ok(())
    }

    pub fn weight(&self, player: usize, from: usize, to: usize) -> &Rational {
        &self.0[player][from][to]
    }

    pub fn row(&self, player: usize, from: usize) -> &[Rational] {
        &self.0[player][from]
    }

    pub fn rows(&self) -> &[Vec<Vec<Rational>>] {
        &self.0
    }
}

pub fn utility(game: &Game, player: usize, profile: &ActionProfile) -> Result<Rational> {
    game.check_player(player)?;
    let k = game.profile_index(profile)?;
    Ok(game.payoff_at(player, k).clone())
}

/// Marginal of `q` on player `player`'s actions.
pub fn marginal_of(game: &Game, q: &JointDistribution, player: usize) -> Result<Vec<Rational>> {
    game.check_player(player)?;
    q.check_shape(game)?;
    let mut out = vec![Rational::zero(); game.num_actions(player)];
    for (k, w) in q.weights().iter().enumerate() {
        out[game.action_in(k, player)] += w;
    }
    Ok(out)
}

/// Aggregate gain `S_eta(a)` when every player follows `eta` from profile `a`.
pub fn surplus(game: &Game, eta: &DeviationKernel, profile: &ActionProfile) -> Result<Rational> {
    eta.check_shape(game)?;
    let k = game.profile_index(profile)?;
    Ok(surplus_at(game, eta, k))
}

pub(crate) fn surplus_at(game: &Game, eta: &DeviationKernel, index: usize) -> Rational {
    let mut total = Rational::zero();
    for i in 0..game.num_players() {
        let from = game.action_in(index, i);
        for (to, w) in eta.row(i, from).iter().enumerate() {
            if !w.is_zero() {
                total += w * game.payoff_at(i, game.deviate(index, i, to));
            }
        }
        total -= game.payoff_at(i, index);
    }
    total
}

/// The full surplus tensor, flat in row-major order.
pub fn surplus_table(game: &Game, eta: &DeviationKernel) -> Result<Vec<Rational>> {
    eta.check_shape(game)?;
    Ok((0..game.num_profiles())
        .map(|k| surplus_at(game, eta, k))
        .collect())
}

/// Independent product `q(a) = prod_i p_i(a_i)`.
pub fn product_distribution(p: &MarginalProfile) -> JointDistribution {
    let mut weights = vec![Rational::one()];
    for dist in p.dists() {
        weights = weights
            .iter()
            .flat_map(|w| dist.iter().map(move |x| w * x))
            .collect();
    }
    JointDistribution(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::coordination_game;
    use crate::rational::{int, ratio};

    fn prof(a: &[usize]) -> ActionProfile {
        ActionProfile(a.to_vec())
    }

    #[test]
    fn utility_lookup_matches_matrix() {
        let g = coordination_game();
        assert_eq!(utility(&g, 0, &prof(&[0, 0])).unwrap(), int(9));
        assert_eq!(utility(&g, 1, &prof(&[1, 1])).unwrap(), int(1));
        assert_eq!(utility(&g, 0, &prof(&[1, 2])).unwrap(), int(0));
        assert_eq!(utility(&g, 2, &prof(&[0, 0])), Err(Error::UnknownPlayer(2)));
        assert!(matches!(
            utility(&g, 0, &prof(&[0, 3])),
            Err(Error::ActionOutOfRange { player: 1, index: 3 })
        ));
    }

    #[test]
    fn layout_is_row_major() {
        let g = coordination_game();
        let labels: Vec<_> = (0..6).map(|k| g.profile_labels(k).join("")).collect();
        assert_eq!(labels, ["TL", "TM", "TR", "BL", "BM", "BR"]);
        assert_eq!(g.deviate(4, 1, 0), 3);
        assert_eq!(g.deviate(4, 0, 0), 1);
        for k in 0..6 {
            assert_eq!(g.profile_index(&g.profile(k)).unwrap(), k);
        }
    }

    #[test]
    fn construction_errors() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(matches!(
            Game::new(s(&["1"]), vec![s(&["a", "a"])], vec![vec![int(0); 2]]),
            Err(Error::InvalidGame(_))
        ));
        assert!(matches!(
            Game::new(s(&["1"]), vec![vec![]], vec![vec![]]),
            Err(Error::InvalidGame(_))
        ));
        assert!(matches!(
            Game::new(s(&["1", "2"]), vec![s(&["a", "b"]), s(&["x"])], vec![vec![int(0); 2], vec![int(0); 3]]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn marginals_of_simple_joints() {
        let g = coordination_game();
        let q = JointDistribution::point_mass(&g, &prof(&[0, 0])).unwrap();
        assert_eq!(marginal_of(&g, &q, 1).unwrap(), vec![int(1), int(0), int(0)]);

        let mut w = vec![int(0); 6];
        w[0] = ratio(1, 2);
        w[4] = ratio(1, 2);
        let q = JointDistribution::new(w).unwrap();
        assert_eq!(marginal_of(&g, &q, 0).unwrap(), vec![ratio(1, 2), ratio(1, 2)]);

        let q = JointDistribution::new(vec![ratio(1, 6); 6]).unwrap();
        assert_eq!(marginal_of(&g, &q, 1).unwrap(), vec![ratio(1, 3); 3]);
    }

    #[test]
    fn surplus_tables_for_worked_kernels() {
        let g = coordination_game();
        let eta = DeviationKernel::identity_with(&g, &[(1, 2, vec![ratio(1, 2), ratio(1, 2), int(0)])]).unwrap();
        // 9/2 + 0 - 0 at (T,R)
        assert_eq!(surplus(&g, &eta, &prof(&[0, 2])).unwrap(), ratio(9, 2));
        assert_eq!(surplus(&g, &eta, &prof(&[1, 2])).unwrap(), ratio(1, 2));
        assert_eq!(surplus(&g, &eta, &prof(&[1, 0])).unwrap(), int(0));
        assert_eq!(
            surplus_table(&g, &eta).unwrap(),
            vec![int(0), int(0), ratio(9, 2), int(0), int(0), ratio(1, 2)]
        );

        let eta = DeviationKernel::identity_with(&g, &[(1, 1, vec![int(1), int(0), int(0)])]).unwrap();
        assert_eq!(surplus(&g, &eta, &prof(&[1, 1])).unwrap(), int(-1));
        assert_eq!(
            surplus_table(&g, &eta).unwrap(),
            vec![int(0), int(9), int(0), int(0), int(-1), int(0)]
        );
    }

    #[test]
    fn product_distribution_examples() {
        let g = coordination_game();
        let p = MarginalProfile::for_game(&g, vec![vec![int(1), int(0)], vec![int(1), int(0), int(0)]]).unwrap();
        assert_eq!(product_distribution(&p), JointDistribution::point_mass(&g, &prof(&[0, 0])).unwrap());

        let p = MarginalProfile::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 4), ratio(3, 4), int(0)],
        ])
        .unwrap();
        let q = product_distribution(&p);
        assert_eq!(q.weight(1), &ratio(3, 8));
        assert_eq!(q.weight(3), &ratio(1, 8));
        assert_eq!(q.weight(2), &int(0));
        assert_eq!(q.weight(5), &int(0));

        let p = MarginalProfile::new(vec![
            vec![ratio(1, 10), ratio(9, 10)],
            vec![ratio(1, 10), ratio(9, 10), int(0)],
        ])
        .unwrap();
        assert_eq!(product_distribution(&p).weight(4), &ratio(81, 100));
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(MarginalProfile::new(vec![vec![ratio(1, 2), ratio(1, 3)]]).is_err());
        assert!(MarginalProfile::new(vec![vec![int(2), int(-1)]]).is_err());
        assert!(JointDistribution::new(vec![ratio(9, 10)]).is_err());
        let g = coordination_game();
        assert!(DeviationKernel::identity_with(&g, &[(1, 0, vec![ratio(9, 10), int(0), int(0)])]).is_err());
    }

    #[test]
    fn relabeling_preserves_payoffs() {
        let g = coordination_game();
        let r = Relabeling(vec![vec![1, 0], vec![2, 0, 1]]);
        let h = g.relabel(&r).unwrap();
        assert_eq!(h.action_labels(1), ["M", "R", "L"]);
        for k in 0..g.num_profiles() {
            assert_eq!(g.profile_labels(k), {
                let mut l = h.profile_labels(r.map_profile(&g, k));
                l.truncate(2);
                l
            });
            for i in 0..2 {
                assert_eq!(g.payoff_at(i, k), h.payoff_at(i, r.map_profile(&g, k)));
            }
        }
    }

    mod props {
        use super::*;
        use crate::fixtures::arb_game_and_profile;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn product_has_the_given_marginals((g, p) in arb_game_and_profile()) {
                let q = product_distribution(&p);
                prop_assert!(JointDistribution::new(q.weights().to_vec()).is_ok());
                for i in 0..g.num_players() {
                    prop_assert_eq!(marginal_of(&g, &q, i).unwrap(), p.player(i).to_vec());
                }
            }

            #[test]
            fn identity_kernel_has_zero_surplus((g, _p) in arb_game_and_profile()) {
                let eta = DeviationKernel::identity(&g);
                prop_assert!(surplus_table(&g, &eta).unwrap().iter().all(Zero::is_zero));
            }

            #[test]
            fn surplus_is_linear_in_kernel(
                (g, p) in arb_game_and_profile(),
                lambda in 0i64..=8,
            ) {
                // Build two kernels from the marginal rows so they are stochastic.
                let ident = DeviationKernel::identity(&g);
                let mixed = DeviationKernel::new(
                    (0..g.num_players())
                        .map(|i| vec![p.player(i).to_vec(); g.num_actions(i)])
                        .collect(),
                ).unwrap();
                let l = ratio(lambda, 8);
                let one_minus = Rational::one() - &l;
                let blend = DeviationKernel::new(
                    ident.rows().iter().zip(mixed.rows()).map(|(a, b)| {
                        a.iter().zip(b).map(|(ra, rb)| {
                            ra.iter().zip(rb).map(|(x, y)| &one_minus * x + &l * y).collect()
                        }).collect()
                    }).collect(),
                ).unwrap();
                let s0 = surplus_table(&g, &ident).unwrap();
                let s1 = surplus_table(&g, &mixed).unwrap();
                let sb = surplus_table(&g, &blend).unwrap();
                for k in 0..g.num_profiles() {
                    prop_assert_eq!(&sb[k], &(&one_minus * &s0[k] + &l * &s1[k]));
                }
            }
        }
    }
}
