//! JSON documents for games, marginals, kernels, certificates and verdicts,
//! plus CSV play logs.
//!
//! Rationals are written as `"n/d"` strings (`"n"` for integers). On input
//! they may also be JSON numbers or decimal strings; both are read exactly.
//! Every per-player map is keyed by player id and every per-action map by
//! action label. Output follows declaration order, so it is byte-stable.

use indexmap::IndexMap;
use num_traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::ce::{ActionwiseScheme, CeVerdict};
use crate::error::{Error, Result};
use crate::game::{DeviationKernel, Game, JointDistribution, MarginalProfile};
use crate::nash::{NashVerdict, ProfilewiseScheme};
use crate::rational::{format_rational, parse_rational, Rational};

/// A rational as it appears in documents.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Q(Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::Number(n) => n.to_string(),
            Value::String(s) => s,
            other => {
                return Err(serde::de::Error::custom(format!(
                    "expected a number or rational string, found {other}"
                )))
            }
        };
        parse_rational(&text)
            .map(Q)
            .map_err(serde::de::Error::custom)
    }
}

type ActionMap = IndexMap<String, Q>;
type PlayerMap<T> = IndexMap<String, T>;
type KernelDoc = PlayerMap<IndexMap<String, ActionMap>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    players: Vec<String>,
    actions: PlayerMap<Vec<String>>,
    payoffs: PlayerMap<Vec<Q>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginalsDoc {
    marginals: PlayerMap<ActionMap>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightEntry {
    profile: Vec<String>,
    probability: Q,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeeEntry {
    profile: Vec<String>,
    fee: Q,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessDoc {
    kind: String,
    joint: Vec<WeightEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionwiseDoc {
    kind: String,
    fees: PlayerMap<ActionMap>,
    kernel: KernelDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfilewiseDoc {
    kind: String,
    fees: Vec<FeeEntry>,
    kernel: KernelDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFileDoc {
    kernel: KernelDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurplusDoc {
    surplus: Vec<SurplusEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurplusEntry {
    profile: Vec<String>,
    value: Q,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictDoc {
    test: String,
    verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected_profit: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<Value>,
}

/// Witness or transfer scheme, as stored in certificate files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Witness(JointDistribution),
    Actionwise(ActionwiseScheme),
    Profilewise(ProfilewiseScheme),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ce(CeVerdict),
    Nash(NashVerdict),
}

const CE_TEST: &str = "correlated-equilibrium";
const NASH_TEST: &str = "nash";

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

fn from_text<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_err)
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(parse_err)
}

fn to_text<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("documents serialize")
}

/// Looks up each of the game's players in `map`, rejecting unknown keys.
fn by_player<'a, T>(game: &Game, map: &'a PlayerMap<T>) -> Result<Vec<Option<&'a T>>> {
    for key in map.keys() {
        game.player_index(key)?;
    }
    Ok(game.players().iter().map(|p| map.get(p)).collect())
}

/// Dense per-action vector from a label map; missing labels are zero.
fn action_vector(game: &Game, player: usize, map: Option<&ActionMap>) -> Result<Vec<Rational>> {
    let mut out = vec![Rational::zero(); game.num_actions(player)];
    if let Some(map) = map {
        for (label, q) in map {
            out[game.action_index(player, label)?] = q.0.clone();
        }
    }
    Ok(out)
}

fn action_map(game: &Game, player: usize, values: &[Rational], skip_zero: bool) -> ActionMap {
    game.action_labels(player)
        .iter()
        .zip(values)
        .filter(|(_, v)| !(skip_zero && v.is_zero()))
        .map(|(l, v)| (l.clone(), Q(v.clone())))
        .collect()
}

fn profile_index(game: &Game, labels: &[String]) -> Result<usize> {
    if labels.len() != game.num_players() {
        return Err(Error::Shape(format!(
            "profile {labels:?} has {} entries for {} players",
            labels.len(),
            game.num_players()
        )));
    }
    let mut idx = 0;
    for (i, label) in labels.iter().enumerate() {
        idx = idx * game.num_actions(i) + game.action_index(i, label)?;
    }
    Ok(idx)
}

fn profile_table<'a>(
    game: &Game,
    entries: impl Iterator<Item = (&'a Vec<String>, &'a Q)>,
) -> Result<Vec<Rational>> {
    let mut out = vec![Rational::zero(); game.num_profiles()];
    let mut seen = vec![false; game.num_profiles()];
    for (labels, q) in entries {
        let k = profile_index(game, labels)?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::Parse(format!("profile {labels:?} listed twice")));
        }
        out[k] = q.0.clone();
    }
    Ok(out)
}

// ---------------------------------------------------------------- games

pub fn parse_game(text: &str) -> Result<Game> {
    let doc: GameDoc = from_text(text)?;
    for key in doc.actions.keys().chain(doc.payoffs.keys()) {
        if !doc.players.contains(key) {
            return Err(Error::UnknownPlayerLabel(key.clone()));
        }
    }
    let mut actions = Vec::new();
    let mut payoffs = Vec::new();
    for p in &doc.players {
        actions.push(
            doc.actions
                .get(p)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("no actions for player `{p}`")))?,
        );
        payoffs.push(
            doc.payoffs
                .get(p)
                .ok_or_else(|| Error::Parse(format!("no payoffs for player `{p}`")))?
                .iter()
                .map(|q| q.0.clone())
                .collect(),
        );
    }
    Game::new(doc.players, actions, payoffs)
}

pub fn emit_game(game: &Game) -> String {
    let doc = GameDoc {
        players: game.players().to_vec(),
        actions: game
            .players()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), game.action_labels(i).to_vec()))
            .collect(),
        payoffs: game
            .players()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), game.payoffs(i).iter().cloned().map(Q).collect()))
            .collect(),
    };
    to_text(&doc)
}

// ---------------------------------------------------------------- marginals

pub fn parse_marginals(game: &Game, text: &str) -> Result<MarginalProfile> {
    let doc: MarginalsDoc = from_text(text)?;
    let maps = by_player(game, &doc.marginals)?;
    let mut dists = Vec::new();
    for (i, map) in maps.into_iter().enumerate() {
        if map.is_none() {
            return Err(Error::Parse(format!(
                "no marginal for player `{}`",
                game.players()[i]
            )));
        }
        dists.push(action_vector(game, i, map)?);
    }
    MarginalProfile::for_game(game, dists)
}

pub fn emit_marginals(game: &Game, p: &MarginalProfile) -> String {
    let doc = MarginalsDoc {
        marginals: game
            .players()
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), action_map(game, i, p.player(i), false)))
            .collect(),
    };
    to_text(&doc)
}

// ---------------------------------------------------------------- kernels

/// Rows not listed are the identity; listed rows must be distributions.
fn kernel_from_doc(game: &Game, doc: &KernelDoc) -> Result<DeviationKernel> {
    let maps = by_player(game, doc)?;
    let mut replaced = Vec::new();
    for (i, rows) in maps.into_iter().enumerate() {
        let Some(rows) = rows else { continue };
        for (from, row) in rows {
            let from = game.action_index(i, from)?;
            replaced.push((i, from, action_vector(game, i, Some(row))?));
        }
    }
    DeviationKernel::identity_with(game, &replaced)
}

/// Every player is listed; only rows that differ from the identity, and only
/// their nonzero entries, are written.
fn kernel_to_doc(game: &Game, kernel: &DeviationKernel) -> KernelDoc {
    game.players()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let rows = (0..game.num_actions(i))
                .filter(|&from| {
                    kernel
                        .row(i, from)
                        .iter()
                        .enumerate()
                        .any(|(to, w)| if to == from { !w.is_one() } else { !w.is_zero() })
                })
                .map(|from| {
                    (
                        game.action_labels(i)[from].clone(),
                        action_map(game, i, kernel.row(i, from), true),
                    )
                })
                .collect();
            (name.clone(), rows)
        })
        .collect()
}

/// Reads a `{"kernel": ...}` document, or the kernel of any scheme document.
pub fn parse_kernel(game: &Game, text: &str) -> Result<DeviationKernel> {
    let value: Value = from_text(text)?;
    let kernel = value
        .get("kernel")
        .cloned()
        .or_else(|| value.get("certificate").and_then(|c| c.get("kernel")).cloned())
        .ok_or_else(|| Error::Parse("document has no `kernel` field".into()))?;
    kernel_from_doc(game, &from_value(kernel)?)
}

pub fn emit_kernel(game: &Game, kernel: &DeviationKernel) -> String {
    to_text(&KernelFileDoc {
        kernel: kernel_to_doc(game, kernel),
    })
}

pub fn emit_surplus(game: &Game, table: &[Rational]) -> String {
    let doc = SurplusDoc {
        surplus: table
            .iter()
            .enumerate()
            .map(|(k, v)| SurplusEntry {
                profile: game.profile_labels(k),
                value: Q(v.clone()),
            })
            .collect(),
    };
    to_text(&doc)
}

pub fn parse_surplus(game: &Game, text: &str) -> Result<Vec<Rational>> {
    let doc: SurplusDoc = from_text(text)?;
    profile_table(game, doc.surplus.iter().map(|e| (&e.profile, &e.value)))
}

// ---------------------------------------------------------------- certificates

fn certificate_to_value(game: &Game, cert: &Certificate) -> Value {
    match cert {
        Certificate::Witness(q) => to_value(&WitnessDoc {
            kind: "witness".into(),
            joint: q
                .weights()
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(k, w)| WeightEntry {
                    profile: game.profile_labels(k),
                    probability: Q(w.clone()),
                })
                .collect(),
        }),
        Certificate::Actionwise(s) => to_value(&ActionwiseDoc {
            kind: "actionwise".into(),
            fees: game
                .players()
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), action_map(game, i, &s.fees[i], false)))
                .collect(),
            kernel: kernel_to_doc(game, &s.kernel),
        }),
        Certificate::Profilewise(s) => to_value(&ProfilewiseDoc {
            kind: "profilewise".into(),
            fees: s
                .fee
                .iter()
                .enumerate()
                .filter(|(_, f)| !f.is_zero())
                .map(|(k, f)| FeeEntry {
                    profile: game.profile_labels(k),
                    fee: Q(f.clone()),
                })
                .collect(),
            kernel: kernel_to_doc(game, &s.kernel),
        }),
    }
}

fn certificate_from_value(game: &Game, value: Value) -> Result<Certificate> {
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("certificate has no `kind`".into()))?
        .to_string();
    match kind.as_str() {
        "witness" => {
            let doc: WitnessDoc = from_value(value)?;
            let weights = profile_table(game, doc.joint.iter().map(|e| (&e.profile, &e.probability)))?;
            Ok(Certificate::Witness(JointDistribution::for_game(game, weights)?))
        }
        "actionwise" => {
            let doc: ActionwiseDoc = from_value(value)?;
            let fee_maps = by_player(game, &doc.fees)?;
            let fees = fee_maps
                .into_iter()
                .enumerate()
                .map(|(i, m)| action_vector(game, i, m))
                .collect::<Result<_>>()?;
            Ok(Certificate::Actionwise(ActionwiseScheme {
                fees,
                kernel: kernel_from_doc(game, &doc.kernel)?,
            }))
        }
        "profilewise" => {
            let doc: ProfilewiseDoc = from_value(value)?;
            Ok(Certificate::Profilewise(ProfilewiseScheme {
                fee: profile_table(game, doc.fees.iter().map(|e| (&e.profile, &e.fee)))?,
                kernel: kernel_from_doc(game, &doc.kernel)?,
            }))
        }
        other => Err(Error::Parse(format!("unknown certificate kind `{other}`"))),
    }
}

pub fn emit_certificate(game: &Game, cert: &Certificate) -> String {
    to_text(&certificate_to_value(game, cert))
}

/// Reads a bare certificate, or the certificate embedded in a verdict.
pub fn parse_certificate(game: &Game, text: &str) -> Result<Certificate> {
    let value: Value = from_text(text)?;
    let value = match value.get("certificate") {
        Some(inner) if value.get("kind").is_none() => inner.clone(),
        _ => value,
    };
    certificate_from_value(game, value)
}

pub fn parse_scheme(game: &Game, text: &str) -> Result<Certificate> {
    match parse_certificate(game, text)? {
        Certificate::Witness(_) => Err(Error::Parse("expected a transfer scheme, found a witness".into())),
        scheme => Ok(scheme),
    }
}

// ---------------------------------------------------------------- verdicts

pub fn emit_verdict(game: &Game, verdict: &Verdict) -> String {
    let doc = match verdict {
        Verdict::Ce(CeVerdict::Compatible(q)) => VerdictDoc {
            test: CE_TEST.into(),
            verdict: "compatible".into(),
            expected_profit: None,
            certificate: Some(certificate_to_value(game, &Certificate::Witness(q.clone()))),
        },
        Verdict::Ce(CeVerdict::Exploitable { scheme, expected_profit }) => VerdictDoc {
            test: CE_TEST.into(),
            verdict: "exploitable".into(),
            expected_profit: Some(Q(expected_profit.clone())),
            certificate: Some(certificate_to_value(game, &Certificate::Actionwise(scheme.clone()))),
        },
        Verdict::Nash(NashVerdict::IsNash) => VerdictDoc {
            test: NASH_TEST.into(),
            verdict: "nash".into(),
            expected_profit: None,
            certificate: None,
        },
        Verdict::Nash(NashVerdict::Exploitable { scheme, expected_profit }) => VerdictDoc {
            test: NASH_TEST.into(),
            verdict: "exploitable".into(),
            expected_profit: Some(Q(expected_profit.clone())),
            certificate: Some(certificate_to_value(game, &Certificate::Profilewise(scheme.clone()))),
        },
    };
    to_text(&doc)
}

pub fn parse_verdict(game: &Game, text: &str) -> Result<Verdict> {
    let doc: VerdictDoc = from_text(text)?;
    let cert = doc
        .certificate
        .map(|v| certificate_from_value(game, v))
        .transpose()?;
    let profit = doc.expected_profit.map(|q| q.0);
    match (doc.test.as_str(), doc.verdict.as_str(), cert, profit) {
        (CE_TEST, "compatible", Some(Certificate::Witness(q)), None) => {
            Ok(Verdict::Ce(CeVerdict::Compatible(q)))
        }
        (CE_TEST, "exploitable", Some(Certificate::Actionwise(scheme)), Some(expected_profit)) => {
            Ok(Verdict::Ce(CeVerdict::Exploitable { scheme, expected_profit }))
        }
        (NASH_TEST, "nash", None, None) => Ok(Verdict::Nash(NashVerdict::IsNash)),
        (NASH_TEST, "exploitable", Some(Certificate::Profilewise(scheme)), Some(expected_profit)) => {
            Ok(Verdict::Nash(NashVerdict::Exploitable { scheme, expected_profit }))
        }
        (test, verdict, ..) => Err(Error::Parse(format!(
            "inconsistent verdict document (test `{test}`, verdict `{verdict}`)"
        ))),
    }
}

// ---------------------------------------------------------------- play logs

/// Independently observed action histories, one per player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayLog {
    pub columns: IndexMap<String, Vec<String>>,
}

/// CSV with a header row of player ids and one column per player. Columns
/// may have different lengths; blank cells are skipped.
pub fn parse_play_log(text: &str) -> Result<PlayLog> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(parse_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns: IndexMap<String, Vec<String>> = IndexMap::new();
    for h in &headers {
        if columns.insert(h.clone(), Vec::new()).is_some() {
            return Err(Error::Parse(format!("player `{h}` appears twice in the log header")));
        }
    }
    for record in reader.records() {
        let record = record.map_err(parse_err)?;
        if record.len() > headers.len() {
            return Err(Error::Parse("log row has more cells than the header".into()));
        }
        for (h, cell) in headers.iter().zip(record.iter()) {
            if !cell.is_empty() {
                columns[h].push(cell.to_string());
            }
        }
    }
    Ok(PlayLog { columns })
}

pub fn empirical_marginals(game: &Game, log: &PlayLog) -> Result<MarginalProfile> {
    for key in log.columns.keys() {
        game.player_index(key)?;
    }
    let mut dists = Vec::new();
    for (i, name) in game.players().iter().enumerate() {
        let seq = log
            .columns
            .get(name)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Parse(format!("no observations for player `{name}`")))?;
        let mut counts = vec![0i64; game.num_actions(i)];
        for label in seq {
            counts[game.action_index(i, label)?] += 1;
        }
        let n = seq.len() as i64;
        dists.push(counts.into_iter().map(|c| crate::rational::ratio(c, n)).collect());
    }
    MarginalProfile::for_game(game, dists)
}
