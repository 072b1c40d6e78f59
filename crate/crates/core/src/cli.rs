//! The `rswlab` command line: `estimate`, `verify` and `report`.
//!
//! Exit codes: 0 on success, 1 when a run fails (domain or parameter
//! errors, unreadable inputs, violated inequalities), 2 on usage errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::events::parse_event;
use crate::models::ModelSpec;
use crate::verify::{self, CorridorOptions, Engine, Estimate, Quantity, Record, Report, Session};

pub const CSV_HEADER: [&str; 11] =
    ["model", "p", "q", "event", "n", "rho", "replicates", "successes", "phat", "wilson_lo", "wilson_hi"];

const DEFAULT_MODEL: &str = "bernoulli:p=0.5";
const DEFAULT_FK_NESTING_MODEL: &str = "fk:p=sd,q=2,domain=box:16,thin=1";
const DEFAULT_REPLICATES: u64 = 10_000;

#[derive(Parser, Debug)]
#[command(name = "rswlab", version, about = "Crossing-probability laboratory for planar percolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate event probabilities.
    Estimate(EstimateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Tabulate estimates from JSONL result files as CSV.
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Model, e.g. `bernoulli:p=0.5`, `fk:p=sd,q=2,domain=torus:32`, `diag`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "RSWLAB_WORKERS")]
    workers: Option<usize>,
    /// JSONL output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV summary of the estimates.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Event, e.g. `crossing:16x8`, `arm:8`, `quasi:16,4`; repeatable.
    #[arg(long = "event")]
    events: Vec<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// Scales (comma separated).
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    /// Aspect ratios for theorem1 (comma separated).
    #[arg(long, value_delimiter = ',')]
    rho: Vec<u32>,
    /// `m,l,k` for cascade; repeatable.
    #[arg(long = "triple")]
    triples: Vec<String>,
    /// `m,l` for closing; repeatable.
    #[arg(long = "pair")]
    pairs: Vec<String>,
    /// `MxN` rectangle to enumerate for the duality suite; repeatable.
    #[arg(long)]
    exhaustive: Vec<String>,
    /// Sampled witness triples per orientation for the corridor suite.
    #[arg(long)]
    corridor_triples: Option<u64>,
    /// Succeed only if a record flagged as an expected failure fails, and
    /// tolerate such failures.
    #[arg(long)]
    expect_failure: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// JSONL result file; repeatable.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// CSV output (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma31,
    Lemma42,
    Cascade,
    Closing,
    Theorem1,
    Star,
    FkNesting,
    UniformArm,
    Duality,
    Corridor,
    Homeo,
    Trace,
    Fkg,
    SqrtTrick,
}

/// Everything needed to reproduce a run. Worker count and output paths do
/// not affect results.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rho: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub triples: Vec<[u32; 3]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<[u32; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exhaustive: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corridor_triples: Option<u64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub expect_failure: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self, String> {
        toml::from_str(s).map_err(|e| format!("bad config: {e}"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    fn replicates(&self) -> u64 {
        self.replicates.unwrap_or(DEFAULT_REPLICATES)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Run(Error::Input(format!("cannot read config {}: {e}", path.display()))))?;
            RunConfig::from_toml(&text).map_err(Failure::Usage)?
        }
        None => RunConfig::default(),
    };
    if let Some(m) = &common.model {
        cfg.model = Some(m.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?);
    }
    if common.reps.is_some() {
        cfg.replicates = common.reps;
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if common.csv.is_some() {
        cfg.csv = common.csv.clone();
    }
    Ok(cfg)
}

fn engine_for(cfg: &RunConfig) -> Result<Engine, Failure> {
    let workers = cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    Ok(Engine::new(workers)?)
}

fn dump(cfg: &RunConfig) -> Result<i32, Failure> {
    print!("{}", cfg.to_toml());
    Ok(0)
}

fn cmd_estimate(a: EstimateArgs) -> Result<i32, Failure> {
    let mut cfg = load_config(&a.common)?;
    if !a.events.is_empty() {
        cfg.events = a.events;
    }
    if cfg.events.is_empty() {
        return Err(Failure::Usage("estimate needs at least one --event".into()));
    }
    let quantities = cfg
        .events
        .iter()
        .map(|s| {
            let spec = parse_event(s).map_err(|e| Failure::Usage(e.to_string()))?;
            let (n, rho) = describe_event(s);
            Ok(Quantity { label: s.clone(), spec, n, rho })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let model = match cfg.model {
        Some(m) => m,
        None => DEFAULT_MODEL.parse()?,
    };
    cfg.model = Some(model);
    cfg.replicates = Some(cfg.replicates());
    cfg.seed = Some(cfg.seed());
    if a.common.dump_config {
        return dump(&cfg);
    }
    let engine = engine_for(&cfg)?;
    let mut session = Session::new(&engine, model, cfg.replicates(), cfg.seed());
    for q in &quantities {
        session.estimate(q)?;
    }
    emit(&cfg, &session.report)?;
    Ok(0)
}

fn parse_list<const N: usize>(s: &str, what: &str) -> Result<[u32; N], Failure> {
    let parts: Vec<u32> = s
        .split([',', 'x'])
        .map(|t| t.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad {what} {s:?}")))?;
    parts.try_into().map_err(|_| Failure::Usage(format!("{what} needs {N} integers, got {s:?}")))
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, Failure> {
    let mut cfg = load_config(&a.common)?;
    if let Some(s) = a.suite {
        cfg.suite = Some(s.to_possible_value().expect("named suite").get_name().to_string());
    }
    let suite_name = cfg.suite.clone().ok_or_else(|| Failure::Usage("verify needs --suite".into()))?;
    let suite = Suite::from_str(&suite_name, true).map_err(|_| Failure::Usage(format!("unknown suite {suite_name:?}")))?;
    if !a.n.is_empty() {
        cfg.n = a.n;
    }
    if !a.rho.is_empty() {
        cfg.rho = a.rho;
    }
    if !a.triples.is_empty() {
        cfg.triples = a.triples.iter().map(|s| parse_list::<3>(s, "triple")).collect::<Result<_, _>>()?;
    }
    if !a.pairs.is_empty() {
        cfg.pairs = a.pairs.iter().map(|s| parse_list::<2>(s, "pair")).collect::<Result<_, _>>()?;
    }
    if !a.exhaustive.is_empty() {
        cfg.exhaustive = a.exhaustive;
    }
    if a.corridor_triples.is_some() {
        cfg.corridor_triples = a.corridor_triples;
    }
    cfg.expect_failure |= a.expect_failure;
    let model = match (cfg.model, suite) {
        (Some(m), _) => m,
        (None, Suite::FkNesting) => DEFAULT_FK_NESTING_MODEL.parse()?,
        (None, _) => DEFAULT_MODEL.parse()?,
    };
    cfg.model = Some(model);
    cfg.replicates = Some(cfg.replicates());
    cfg.seed = Some(cfg.seed());
    if a.common.dump_config {
        return dump(&cfg);
    }
    let engine = engine_for(&cfg)?;
    let mut s = Session::new(&engine, model, cfg.replicates(), cfg.seed());
    let scales = |default: &[u32]| if cfg.n.is_empty() { default.to_vec() } else { cfg.n.clone() };
    match suite {
        Suite::Lemma31 => {
            for n in scales(&[1, 4, 8]) {
                verify::lemma31(&mut s, n)?;
            }
        }
        Suite::Lemma42 => {
            for m in scales(&[1, 4]) {
                verify::lemma42(&mut s, m)?;
            }
        }
        Suite::Cascade => {
            let triples = if cfg.triples.is_empty() { vec![[16, 8, 4]] } else { cfg.triples.clone() };
            for [m, l, k] in triples {
                verify::cascade(&mut s, m, l, k)?;
            }
        }
        Suite::Closing => {
            let pairs = if cfg.pairs.is_empty() { vec![[16, 4]] } else { cfg.pairs.clone() };
            for [m, l] in pairs {
                verify::closing(&mut s, m, l)?;
            }
        }
        Suite::Theorem1 => {
            let rhos = if cfg.rho.is_empty() { vec![2] } else { cfg.rho.clone() };
            for n in scales(&[4, 16]) {
                for &rho in &rhos {
                    verify::theorem1(&mut s, n, rho)?;
                }
            }
        }
        Suite::Star => {
            for n in scales(&[1, 4, 16, 64]) {
                verify::reduced_star(&mut s, n)?;
            }
        }
        Suite::FkNesting => {
            for n in scales(&[8]) {
                verify::fk_nesting(&mut s, n)?;
            }
        }
        Suite::UniformArm => {
            for n in scales(&[16]) {
                verify::uniform_arm_bound(&mut s, n, &verify::default_arm_family)?;
            }
        }
        Suite::Trace => {
            for n in scales(&[16]) {
                verify::renormalization_trace(&mut s, n)?;
            }
        }
        Suite::Duality => {
            let rects = if cfg.exhaustive.is_empty() { vec!["1x1".to_string(), "2x1".to_string()] } else { cfg.exhaustive.clone() };
            for r in rects {
                let [m, n] = parse_list::<2>(&r, "rectangle")?;
                let rec = verify::duality_suite(m, n, None, cfg.seed())?;
                s.check(rec);
            }
        }
        Suite::Corridor => {
            let opts = CorridorOptions {
                triples: cfg.corridor_triples.unwrap_or(CorridorOptions::default().triples),
                seed: cfg.seed(),
                ..CorridorOptions::default()
            };
            for rec in verify::corridor_suite(&opts)? {
                s.check(rec);
            }
        }
        Suite::Homeo => {
            for rec in verify::homeo_suite(&[2, 4, 2000], 21, 50) {
                s.check(rec);
            }
        }
        Suite::Fkg => {
            if model == ModelSpec::MixedDiag {
                let (e, f) = verify::mixed_diag_fkg_pair(3)?;
                verify::fkg_check(&mut s, "diagonal-pair", &e, &f)?;
            } else {
                for (label, e, f) in verify::fkg_pairs()? {
                    verify::fkg_check(&mut s, &label, &e, &f)?;
                }
            }
        }
        Suite::SqrtTrick => {
            for k in [2, 5] {
                verify::sqrt_trick_check(&mut s, k)?;
            }
        }
    }
    emit(&cfg, &s.report)?;
    let report = &s.report;
    let bad = report.unexpected_failures(cfg.expect_failure);
    let ok = bad == 0 && (!cfg.expect_failure || report.observed_expected_failures() > 0);
    if cfg.expect_failure {
        eprintln!("expected failures observed: {}", report.observed_expected_failures());
    }
    Ok(if ok { 0 } else { 1 })
}

/// JSONL to the output file or standard output; the summary goes to
/// standard output when JSONL is written to a file, else to standard error.
fn emit(cfg: &RunConfig, report: &Report) -> Result<(), Failure> {
    let summary = report.summary() + &estimate_summary(&report.estimates);
    match &cfg.out {
        Some(path) => {
            write_file(path, report.to_jsonl().as_bytes())?;
            print!("{summary}");
        }
        None => {
            io::stdout().write_all(report.to_jsonl().as_bytes())?;
            eprint!("{summary}");
        }
    }
    if let Some(path) = &cfg.csv {
        write_file(path, &csv_table(&report.estimates)?)?;
    }
    Ok(())
}

fn estimate_summary(estimates: &[Estimate]) -> String {
    estimates
        .iter()
        .map(|e| format!("{:<24} {:<20} {:>8}/{:<8} phat {:.6} [{:.6}, {:.6}]\n", e.model, e.event, e.successes, e.replicates, e.phat, e.wilson_lo, e.wilson_hi))
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Run(Error::Input(format!("cannot write {}: {e}", path.display()))))
}

/// One CSV row per estimate under [`CSV_HEADER`].
pub fn csv_table(estimates: &[Estimate]) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for e in estimates {
        w.write_record([
            e.model.clone(),
            opt(e.p.map(|x| x.to_string())),
            opt(e.q.map(|x| x.to_string())),
            e.event.clone(),
            opt(e.n.map(|x| x.to_string())),
            opt(e.rho.map(|x| x.to_string())),
            e.replicates.to_string(),
            e.successes.to_string(),
            e.phat.to_string(),
            e.wilson_lo.to_string(),
            e.wilson_hi.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn cmd_report(a: ReportArgs) -> Result<i32, Failure> {
    let mut estimates = Vec::new();
    for path in &a.inputs {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Run(Error::Input(format!("cannot read {}: {e}", path.display()))))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec = Record::from_json(line)
                .map_err(|e| Failure::Run(Error::Format(format!("{}:{}: {e}", path.display(), i + 1))))?;
            if let Record::Estimate(e) = rec {
                estimates.push(e);
            }
        }
    }
    let table = csv_table(&estimates)?;
    match &a.out {
        Some(path) => write_file(path, &table)?,
        None => io::stdout().write_all(&table)?,
    }
    Ok(0)
}

/// Scale `n` and aspect ratio `ρ` read off the compact event syntax:
/// `crossing:MxN` has `n = N` and `ρ = M/N` when integral; single-scale
/// events have `n` only.
pub fn describe_event(s: &str) -> (Option<u32>, Option<u32>) {
    let Some((kind, args)) = s.split_once(':') else { return (None, None) };
    let nums: Vec<u32> = args.split(['x', ',']).filter_map(|t| t.trim().parse().ok()).collect();
    match (kind.trim(), nums.as_slice()) {
        (k, [m, n]) if k.ends_with("crossing") && *n > 0 => (Some(*n), (m % n == 0).then(|| m / n)),
        ("quasi", [n, _]) => (Some(*n), None),
        (_, [n]) => (Some(*n), None),
        _ => (None, None),
    }
}
