//! Command-line front end.
//!
//! Exit codes: 0 compatible / equilibrium / valid certificate, 1 exploitable
//! or invalid certificate, 2 malformed input, 3 oracle disagreement.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ce::{test_ce_compatibility, CeVerdict};
use crate::certificates::{verify_actionwise, verify_profilewise, verify_witness, SchemeFailure};
use crate::game::{marginal_of, surplus_table, Game, MarginalProfile};
use crate::io::{
    emit_marginals, emit_surplus, emit_verdict, empirical_marginals, parse_certificate, parse_game,
    parse_kernel, parse_marginals, parse_play_log, Certificate, Verdict,
};
use crate::lp::{solve_feasibility, FeasibilityOutcome};
use crate::nash::{build_nash_system, is_nash, test_nash_exploitability};
use crate::oracle::{coupling_scan_2x2, exhaustive_scheme_search, integer_grid, random_ce, ScanOutcome};
use crate::rational::format_rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPLOITABLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ceaudit", version, about = "Audit observed marginal play against correlated and Nash equilibrium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write the output document here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads when the marginals argument is a directory.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the observed marginal profile compatible with some correlated equilibrium?
    TestCe {
        game: PathBuf,
        /// Marginals file, or a directory of them for batch mode.
        #[arg(required_unless_present = "log", conflicts_with = "log")]
        marginals: Option<PathBuf>,
        /// Per-player play log (CSV, one column per player) instead of a marginals file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Cross-check the verdict with the brute-force oracles.
        #[arg(long)]
        oracle: bool,
        /// Seed for oracle sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Is the observed marginal profile a Nash equilibrium?
    TestNash {
        game: PathBuf,
        marginals: PathBuf,
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Check a witness or transfer scheme (or a verdict file) against marginals.
    Verify {
        game: PathBuf,
        marginals: PathBuf,
        certificate: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the aggregate deviation surplus of a kernel.
    Surplus {
        game: PathBuf,
        kernel: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Turn a per-player play log into a marginals file.
    Marginals {
        game: PathBuf,
        log: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(msg: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

struct Report {
    code: i32,
    doc: String,
}

enum Failure {
    Input(String),
    Oracle(String),
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    parse_game(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_marginals(game: &Game, path: &Path) -> Result<MarginalProfile, Failure> {
    parse_marginals(game, &read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    run_command(cli.command)
}

pub fn run_command(command: Command) -> Outcome {
    let common = match &command {
        Command::TestCe { common, .. }
        | Command::TestNash { common, .. }
        | Command::Verify { common, .. }
        | Command::Surplus { common, .. }
        | Command::Marginals { common, .. } => Common {
            out: common.out.clone(),
            jobs: common.jobs,
        },
    };
    let result = match command {
        Command::TestCe { game, marginals, log, oracle, seed, .. } => {
            cmd_test_ce(&game, marginals.as_deref(), log.as_deref(), oracle, seed, common.jobs)
        }
        Command::TestNash { game, marginals, oracle, .. } => {
            cmd_test_nash(&game, &marginals, oracle, common.jobs)
        }
        Command::Verify { game, marginals, certificate, .. } => cmd_verify(&game, &marginals, &certificate),
        Command::Surplus { game, kernel, .. } => cmd_surplus(&game, &kernel),
        Command::Marginals { game, log, .. } => cmd_marginals(&game, &log),
    };
    match result {
        Ok(report) => {
            let stdout = match &common.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &report.doc) {
                        return Outcome::input_error(format!("{}: {e}", path.display()));
                    }
                    String::new()
                }
                None => report.doc,
            };
            Outcome { code: report.code, stdout, stderr: String::new() }
        }
        Err(Failure::Input(msg)) => Outcome::input_error(msg),
        Err(Failure::Oracle(msg)) => Outcome {
            code: EXIT_ORACLE,
            stdout: String::new(),
            stderr: format!("oracle disagreement: {msg}\n"),
        },
    }
}

/// Sorted `*.json` files of a directory.
fn batch_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs `one` on every file of `dir` with `jobs` workers and collects a batch
/// document in file-name order.
fn run_batch(
    dir: &Path,
    jobs: usize,
    one: impl Fn(&Path) -> Result<(i32, Value), Failure> + Sync,
) -> Result<Report, Failure> {
    let files = batch_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(input)?;
    let results: Vec<Result<(i32, Value), Failure>> =
        pool.install(|| files.par_iter().map(|f| one(f)).collect());
    let mut code = EXIT_OK;
    let mut entries = Vec::new();
    for (file, result) in files.iter().zip(results) {
        let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match result {
            Ok((c, verdict)) => {
                code = code.max(c);
                entries.push(json!({"file": name, "verdict": verdict}));
            }
            Err(Failure::Input(msg)) => {
                code = code.max(EXIT_INPUT);
                entries.push(json!({"file": name, "error": msg}));
            }
            Err(Failure::Oracle(msg)) => return Err(Failure::Oracle(format!("{name}: {msg}"))),
        }
    }
    Ok(Report {
        code,
        doc: json_text(&json!({ "results": entries })),
    })
}

fn ce_oracle_check(game: &Game, p: &MarginalProfile, verdict: &CeVerdict, seed: u64) -> Result<(), Failure> {
    match verdict {
        CeVerdict::Exploitable { .. } => {
            if let Ok(ScanOutcome::Found(_)) = coupling_scan_2x2(game, p, 64) {
                return Err(Failure::Oracle("coupling scan found a witness for an exploitable profile".into()));
            }
        }
        CeVerdict::Compatible(_) => {
            let grid = integer_grid(-2, 2, 2);
            if crate::oracle::search_size(game, grid.len(), 1) <= 200_000 {
                if let Some(hit) = exhaustive_scheme_search(game, p, &grid, 1) {
                    return Err(Failure::Oracle(format!(
                        "grid search found profit {} against a compatible profile",
                        format_rational(&hit.profit)
                    )));
                }
            }
        }
    }
    let sample = random_ce(game, seed);
    let marginals = (0..game.num_players())
        .map(|i| marginal_of(game, &sample, i))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(input)?;
    let sampled = MarginalProfile::for_game(game, marginals).map_err(input)?;
    match test_ce_compatibility(game, &sampled) {
        Ok(CeVerdict::Compatible(_)) => Ok(()),
        _ => Err(Failure::Oracle("marginals of a sampled equilibrium were not found compatible".into())),
    }
}

fn cmd_test_ce(
    game_path: &Path,
    marginals: Option<&Path>,
    log: Option<&Path>,
    oracle: bool,
    seed: u64,
    jobs: usize,
) -> Result<Report, Failure> {
    let game = load_game(game_path)?;
    let analyze = |p: &MarginalProfile| -> Result<(i32, String), Failure> {
        let verdict = test_ce_compatibility(&game, p).map_err(input)?;
        if oracle {
            ce_oracle_check(&game, p, &verdict, seed)?;
        }
        let code = if verdict.is_compatible() { EXIT_OK } else { EXIT_EXPLOITABLE };
        Ok((code, emit_verdict(&game, &Verdict::Ce(verdict))))
    };
    let p = match (marginals, log) {
        (Some(dir), _) if dir.is_dir() => {
            return run_batch(dir, jobs, |f| {
                let p = load_marginals(&game, f)?;
                let (code, doc) = analyze(&p)?;
                Ok((code, serde_json::from_str(&doc).expect("emitted json")))
            });
        }
        (Some(path), _) => load_marginals(&game, path)?,
        (None, Some(log)) => {
            let parsed = parse_play_log(&read(log)?).map_err(input)?;
            empirical_marginals(&game, &parsed).map_err(|e| Failure::Input(format!("{}: {e}", log.display())))?
        }
        (None, None) => return Err(Failure::Input("need a marginals file or --log".into())),
    };
    let (code, doc) = analyze(&p)?;
    Ok(Report { code, doc })
}

fn cmd_test_nash(game_path: &Path, marginals: &Path, oracle: bool, jobs: usize) -> Result<Report, Failure> {
    let game = load_game(game_path)?;
    let analyze = |p: &MarginalProfile| -> Result<(i32, String), Failure> {
        let verdict = test_nash_exploitability(&game, p).map_err(input)?;
        if oracle {
            let sys = build_nash_system(&game, p).map_err(input)?;
            let feasible = matches!(solve_feasibility(&sys).map_err(input)?, FeasibilityOutcome::Feasible(_));
            if feasible != is_nash(&game, p).map_err(input)? {
                return Err(Failure::Oracle("pinned feasibility system disagrees with the direct check".into()));
            }
        }
        let code = if verdict.is_nash() { EXIT_OK } else { EXIT_EXPLOITABLE };
        Ok((code, emit_verdict(&game, &Verdict::Nash(verdict))))
    };
    if marginals.is_dir() {
        return run_batch(marginals, jobs, |f| {
            let p = load_marginals(&game, f)?;
            let (code, doc) = analyze(&p)?;
            Ok((code, serde_json::from_str(&doc).expect("emitted json")))
        });
    }
    let p = load_marginals(&game, marginals)?;
    let (code, doc) = analyze(&p)?;
    Ok(Report { code, doc })
}

fn failure_json(f: &SchemeFailure) -> Value {
    match f {
        SchemeFailure::Violated { labels, shortfall, .. } => json!({
            "valid": false,
            "violation": {"profile": labels, "shortfall": format_rational(shortfall)},
        }),
        other => json!({"valid": false, "error": other.to_string()}),
    }
}

fn cmd_verify(game_path: &Path, marginals: &Path, certificate: &Path) -> Result<Report, Failure> {
    let game = load_game(game_path)?;
    let p = load_marginals(&game, marginals)?;
    let cert = parse_certificate(&game, &read(certificate)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", certificate.display())))?;
    let (code, doc) = match cert {
        Certificate::Witness(q) => {
            let ok = verify_witness(&game, &p, &q);
            (
                if ok { EXIT_OK } else { EXIT_EXPLOITABLE },
                json!({"kind": "witness", "valid": ok}),
            )
        }
        Certificate::Actionwise(s) => scheme_report("actionwise", verify_actionwise(&game, &p, &s)),
        Certificate::Profilewise(s) => scheme_report("profilewise", verify_profilewise(&game, &p, &s)),
    };
    Ok(Report { code, doc: json_text(&doc) })
}

fn scheme_report(
    kind: &str,
    result: Result<crate::Rational, SchemeFailure>,
) -> (i32, Value) {
    match result {
        Ok(profit) => (
            EXIT_OK,
            json!({
                "kind": kind,
                "valid": true,
                "expected_profit": format_rational(&profit),
                "exploits": profit.is_positive(),
            }),
        ),
        Err(f) => {
            let mut v = failure_json(&f);
            v["kind"] = json!(kind);
            (EXIT_EXPLOITABLE, v)
        }
    }
}

fn cmd_surplus(game_path: &Path, kernel: &Path) -> Result<Report, Failure> {
    let game = load_game(game_path)?;
    let eta = parse_kernel(&game, &read(kernel)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", kernel.display())))?;
    let table = surplus_table(&game, &eta).map_err(input)?;
    Ok(Report { code: EXIT_OK, doc: emit_surplus(&game, &table) })
}

fn cmd_marginals(game_path: &Path, log: &Path) -> Result<Report, Failure> {
    let game = load_game(game_path)?;
    let parsed = parse_play_log(&read(log)?).map_err(input)?;
    let p = empirical_marginals(&game, &parsed).map_err(|e| Failure::Input(format!("{}: {e}", log.display())))?;
    Ok(Report { code: EXIT_OK, doc: emit_marginals(&game, &p) })
}
