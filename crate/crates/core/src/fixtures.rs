//! Reference games and seeded random instances shared by tests, the oracle
//! cross-checks and the acceptance suite.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Game, MarginalProfile};
use crate::rational::{int, ratio, Rational};

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Two-player coordination game with a strictly dominated third column.
///
/// ```text
///       L     M     R
///  T   9,9   0,0   0,0
///  B   0,0   1,1   0,0
/// ```
pub fn coordination_game() -> Game {
    let u = vec![int(9), int(0), int(0), int(0), int(1), int(0)];
    Game::new(
        labels(&["1", "2"]),
        vec![labels(&["T", "B"]), labels(&["L", "M", "R"])],
        vec![u.clone(), u],
    )
    .expect("valid game")
}

pub fn matching_pennies() -> Game {
    Game::new(
        labels(&["1", "2"]),
        vec![labels(&["H", "T"]), labels(&["H", "T"])],
        vec![
            vec![int(1), int(-1), int(-1), int(1)],
            vec![int(-1), int(1), int(1), int(-1)],
        ],
    )
    .expect("valid game")
}

pub fn trivial_game() -> Game {
    Game::new(labels(&["1"]), vec![labels(&["a"])], vec![vec![int(0)]]).expect("valid game")
}

/// Marginals `(1/2, 1/2)` and `(1/4, 3/4, 0)` in the coordination game.
pub fn miscoordinated_marginals() -> MarginalProfile {
    MarginalProfile::new(vec![
        vec![ratio(1, 2), ratio(1, 2)],
        vec![ratio(1, 4), ratio(3, 4), int(0)],
    ])
    .expect("valid profile")
}

/// The mixed equilibrium `(1/10, 9/10) x (1/10, 9/10, 0)` of the coordination game.
pub fn mixed_equilibrium() -> MarginalProfile {
    MarginalProfile::new(vec![
        vec![ratio(1, 10), ratio(9, 10)],
        vec![ratio(1, 10), ratio(9, 10), int(0)],
    ])
    .expect("valid profile")
}

pub fn pure_marginals(game: &Game, actions: &[usize]) -> MarginalProfile {
    let dists = actions
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            (0..game.num_actions(i))
                .map(|k| if k == a { int(1) } else { int(0) })
                .collect()
        })
        .collect();
    MarginalProfile::new(dists).expect("valid profile")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational in `[-10, 10]` with denominator at most 10.
pub fn random_payoff(rng: &mut impl Rng) -> Rational {
    let d = rng.gen_range(1..=10);
    ratio(rng.gen_range(-10 * d..=10 * d), d)
}

pub fn random_game(rng: &mut impl Rng, shape: &[usize]) -> Game {
    let players = (1..=shape.len()).map(|i| i.to_string()).collect();
    let actions = shape
        .iter()
        .enumerate()
        .map(|(i, &n)| (0..n).map(|a| format!("a{}_{}", i + 1, a)).collect())
        .collect();
    let size: usize = shape.iter().product();
    let payoffs = shape
        .iter()
        .map(|_| (0..size).map(|_| random_payoff(rng)).collect())
        .collect();
    Game::new(players, actions, payoffs).expect("valid game")
}

/// Random distribution over `n` points with a common denominator up to 12.
/// About a third of draws put zero weight somewhere.
pub fn random_distribution(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    let d: i64 = rng.gen_range(1..=12);
    let mut cuts: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..=d)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(d)) {
        out.push(ratio(c - prev, d));
        prev = c;
    }
    out
}

pub fn random_marginals(rng: &mut impl Rng, game: &Game) -> MarginalProfile {
    let dists = game
        .shape()
        .into_iter()
        .map(|n| random_distribution(rng, n))
        .collect();
    MarginalProfile::new(dists).expect("valid profile")
}

/// Every shape with 2 or 3 players and 2 or 3 actions each.
pub fn corpus_shapes() -> Vec<Vec<usize>> {
    let mut shapes = Vec::new();
    for n in 2..=3 {
        for mask in 0..(1u32 << n) {
            shapes.push((0..n).map(|i| 2 + ((mask >> i) & 1) as usize).collect());
        }
    }
    shapes
}

/// `count` seeded random games cycling through [`corpus_shapes`].
pub fn random_corpus(seed: u64, count: usize) -> Vec<Game> {
    let shapes = corpus_shapes();
    let mut rng = rng(seed);
    (0..count)
        .map(|k| random_game(&mut rng, &shapes[k % shapes.len()]))
        .collect()
}

#[cfg(test)]
pub(crate) fn arb_game_and_profile(
) -> impl proptest::strategy::Strategy<Value = (Game, MarginalProfile)> {
    use proptest::prelude::*;
    any::<u64>().prop_map(|seed| {
        let mut r = rng(seed);
        let shape = corpus_shapes()[r.gen_range(0..corpus_shapes().len())].clone();
        let g = random_game(&mut r, &shape);
        let p = random_marginals(&mut r, &g);
        (g, p)
    })
}
