//! Command-line driver: parameter parsing, sweeps and artifact emission.
//!
//! Every subcommand writes its tables as CSV and one `summary.json` into the
//! output directory. Exit code 0 means every `--expect` matched, 1 means a
//! verdict mismatch, 2 means invalid parameters (an error JSON is printed).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bochner::{bochner_sweep, geometric_r_grid, BochnerReport, QuadratureSpec};
use crate::capacity::{capacity_sweep, point_capacity_sweep, CapacityReport, CapacityVerdict};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, Dimension, ModelParams};
use crate::heat::{be_check, default_candidates, BeCheck, Datum, Trend};
use crate::ricci::{n_beta, ricci_form};
use crate::sde::{collision_run, default_start, path_rng, CollisionStats, PathSummary, SdeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Ricci,
    Capacity,
    Bochner,
    Sde,
    Heat,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "dcl", about = "Dyson space experiments", allow_negative_numbers = true)]
pub struct Args {
    pub command: Subcommand,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Dimension parameter, a number or `inf`.
    #[arg(long = "N")]
    pub dim: Option<String>,
    #[arg(long = "K")]
    pub k: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub paths: Option<String>,
    #[arg(long = "T")]
    pub horizon: Option<String>,
    /// `geometric:start:count` (halving) or a comma list.
    #[arg(long = "r-grid")]
    pub r_grid: Option<String>,
    /// Comma list of cutoff parameters.
    #[arg(long = "s-grid")]
    pub s_grid: Option<String>,
    /// Heat grid cells (the check also uses twice this).
    #[arg(long)]
    pub grid: Option<String>,
    /// Random configurations for `ricci`.
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long = "heat-time")]
    pub heat_time: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Defaults to `DCL_WORKERS`, then to one thread per core.
    #[arg(long)]
    pub workers: Option<String>,
    /// `name` or `name=false`; repeatable.
    #[arg(long)]
    pub expect: Vec<String>,
    /// Flat `key = value` file keyed by flag names (dashes or underscores).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Verdict names understood by `--expect`.
pub const VERDICTS: [&str; 5] = ["ricci-nonneg", "capacity-vanishes", "wb-violation", "collisions", "be-holds"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Subcommand,
    pub beta: f64,
    pub n: usize,
    pub dim: Dimension,
    pub k: f64,
    pub seed: u64,
    pub paths: usize,
    pub horizon: f64,
    pub r_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub grid: usize,
    pub samples: usize,
    pub heat_time: f64,
    pub heat_half_length: f64,
    pub eps_grid: Vec<f64>,
    pub point_mesh: usize,
    pub expect: BTreeMap<String, bool>,
    #[serde(skip)]
    pub out: PathBuf,
    /// 0 selects the rayon default.
    #[serde(skip)]
    pub workers: usize,
}

impl RunConfig {
    pub fn new(command: Subcommand) -> Self {
        Self {
            command,
            beta: 0.5,
            n: 2,
            dim: Dimension::Infinite,
            k: -1.0,
            seed: 0,
            paths: 2000,
            horizon: 1.0,
            r_grid: geometric_r_grid(0.1, 4),
            s_grid: vec![1e-3, 1e-6, 1e-12],
            grid: 2048,
            samples: 10_000,
            heat_time: 0.02,
            heat_half_length: 2.0,
            eps_grid: (2..=6).map(|k| 10f64.powi(-k)).collect(),
            point_mesh: 512,
            expect: BTreeMap::new(),
            out: PathBuf::from("dcl-out"),
            workers: 0,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        // Flag spelling or the field spelling used in summary.json.
        match key.trim().replace('_', "-").as_str() {
            "beta" => self.beta = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "N" => self.dim = value.parse()?,
            "K" => self.k = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "paths" => self.paths = parse_num(key, value)?,
            "T" => self.horizon = parse_num(key, value)?,
            "r-grid" => self.r_grid = parse_grid(value)?,
            "s-grid" => self.s_grid = parse_grid(value)?,
            "grid" => self.grid = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "heat-time" => self.heat_time = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = parse_num(key, value)?,
            "expect" => {
                for item in value.split(',').filter(|s| !s.trim().is_empty()) {
                    let (name, want) = parse_expectation(item)?;
                    self.expect.insert(name, want);
                }
            }
            other => return Err(Error::InvalidParameter(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn from_args(args: Args) -> Result<Self> {
        let mut cfg = Self::new(args.command);
        if let Ok(w) = std::env::var("DCL_WORKERS") {
            cfg.set("workers", &w)?;
        }
        if let Some(path) = &args.config {
            for (lineno, line) in fs::read_to_string(path)?.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidParameter(format!("{}:{}: expected key = value", path.display(), lineno + 1)))?;
                cfg.set(key, value)?;
            }
        }
        let flags = [
            ("beta", &args.beta),
            ("n", &args.n),
            ("N", &args.dim),
            ("K", &args.k),
            ("seed", &args.seed),
            ("paths", &args.paths),
            ("T", &args.horizon),
            ("r-grid", &args.r_grid),
            ("s-grid", &args.s_grid),
            ("grid", &args.grid),
            ("samples", &args.samples),
            ("heat-time", &args.heat_time),
            ("out", &args.out),
            ("workers", &args.workers),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for e in &args.expect {
            cfg.set("expect", e)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every module precondition that the selected command reaches.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !self.k.is_finite() {
            return bad("K must be finite".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("T must be positive, got {}", self.horizon));
        }
        if !(self.heat_time > 0.0) {
            return bad(format!("heat-time must be positive, got {}", self.heat_time));
        }
        let all = self.command == Subcommand::All;
        let uses = |c: Subcommand| all || self.command == c;
        if uses(Subcommand::Ricci) {
            ModelParams::new(self.n, self.beta, self.dim)?;
            if self.samples == 0 {
                return bad("samples must be positive".into());
            }
        }
        if uses(Subcommand::Capacity) && (self.s_grid.len() < 2 || self.s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0))) {
            return bad("s-grid needs at least two values in (0, 1)".into());
        }
        if self.command == Subcommand::Bochner || (all && self.beta < 1.0) {
            if self.beta >= 1.0 {
                return bad(format!("bochner needs beta in (0, 1), got {}", self.beta));
            }
            if self.r_grid.is_empty() || self.r_grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
                return bad("r-grid values must lie in (0, 1)".into());
            }
        }
        if uses(Subcommand::Sde) && self.paths < 100 {
            return bad(format!("need at least 100 paths, got {}", self.paths));
        }
        if uses(Subcommand::Heat) && (self.grid < 64 || self.grid % 2 == 1) {
            return bad(format!("grid must be even and at least 64, got {}", self.grid));
        }
        for name in self.expect.keys() {
            if !self.produces(name) {
                return bad(format!("`{}` does not produce the verdict `{name}`", subcommand_name(self.command)));
            }
        }
        Ok(())
    }

    fn produces(&self, verdict: &str) -> bool {
        match self.command {
            Subcommand::Ricci => verdict == "ricci-nonneg",
            Subcommand::Capacity => verdict == "capacity-vanishes",
            Subcommand::Bochner => verdict == "wb-violation",
            Subcommand::Sde => verdict == "collisions",
            Subcommand::Heat => verdict == "be-holds",
            Subcommand::All => VERDICTS.contains(&verdict) && (verdict != "wb-violation" || self.beta < 1.0),
        }
    }
}

fn subcommand_name(c: Subcommand) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter(format!("cannot parse {key} = `{value}`")))
}

/// `geometric:start:count` halves from `start`; anything else is a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("geometric:") {
        let (start, count) =
            rest.split_once(':').ok_or_else(|| Error::InvalidParameter(format!("expected geometric:start:count, got `{spec}`")))?;
        return Ok(geometric_r_grid(parse_num("grid start", start)?, parse_num("grid count", count)?));
    }
    spec.split(',').map(|v| parse_num("grid value", v.trim())).collect()
}

fn parse_expectation(item: &str) -> Result<(String, bool)> {
    let (name, want) = match item.trim().split_once('=') {
        Some((name, v)) => (name.trim(), parse_num::<bool>("expect", v.trim())?),
        None => (item.trim(), true),
    };
    let name = name.to_ascii_lowercase();
    if !VERDICTS.contains(&name.as_str()) {
        return Err(Error::InvalidParameter(format!("unknown verdict `{name}`, expected one of {VERDICTS:?}")));
    }
    Ok((name, want))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub verdicts: BTreeMap<String, bool>,
    /// Expected verdicts that came out differently.
    pub mismatches: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.mismatches.is_empty() {
            0
        } else {
            1
        }
    }
}

struct Emitter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }
}

#[derive(Serialize)]
struct HistogramRow {
    bin_low: f64,
    bin_high: f64,
    count: usize,
}

#[derive(Serialize)]
struct CapacityRow {
    beta: f64,
    s_or_eps: f64,
    value: f64,
    err_est: f64,
}

#[derive(Serialize)]
struct BochnerRow {
    r: f64,
    lhs: f64,
    lhs_err: f64,
    rhs: f64,
    rhs_err: f64,
}

#[derive(Serialize)]
struct PathRow {
    path: usize,
    collided: bool,
    collision_time: Option<f64>,
    min_gap: f64,
    steps: u64,
    refinements: u64,
    smallest_dt: f64,
}

#[derive(Serialize)]
struct HeatRow {
    beta: f64,
    #[serde(rename = "N")]
    dim: String,
    t: f64,
    grid: usize,
    margin: f64,
    trend: Trend,
    datum: String,
}

const HISTOGRAM_BINS: usize = 20;

fn run_ricci(cfg: &RunConfig, out: &mut Emitter) -> Result<(Value, bool)> {
    use rayon::prelude::*;
    let params = ModelParams::new(cfg.n, cfg.beta, cfg.dim)?;
    let rel: Vec<Result<f64>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let x = Configuration::new((0..cfg.n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let form = ricci_form(&x, &params)?;
            Ok(form.min_eigenvalue() / form.norm_estimate())
        })
        .collect();
    let rel: Vec<f64> = rel.into_iter().collect::<Result<_>>()?;
    let lo = rel.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo).max(1e-9) / HISTOGRAM_BINS as f64;
    let mut counts = [0usize; HISTOGRAM_BINS];
    for &v in &rel {
        counts[(((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1)] += 1;
    }
    let rows: Vec<HistogramRow> = counts
        .iter()
        .enumerate()
        .map(|(b, &count)| HistogramRow { bin_low: lo + b as f64 * width, bin_high: lo + (b + 1) as f64 * width, count })
        .collect();
    out.csv("ricci_min_eig.csv", &rows)?;
    let nonneg = lo >= -1e-9;
    Ok((
        json!({
            "n": cfg.n,
            "beta": cfg.beta,
            "N": cfg.dim.to_string(),
            "n_beta": n_beta(cfg.n, cfg.beta),
            "samples": cfg.samples,
            "min_relative_eigenvalue": lo,
            "max_relative_eigenvalue": hi,
        }),
        nonneg,
    ))
}

fn capacity_rows(r: &CapacityReport) -> Vec<CapacityRow> {
    r.entries.iter().map(|e| CapacityRow { beta: r.beta, s_or_eps: e.s, value: e.value, err_est: e.err_est }).collect()
}

fn run_capacity(cfg: &RunConfig, out: &mut Emitter) -> Result<(Value, bool)> {
    let cutoff = capacity_sweep(cfg.beta, &cfg.s_grid)?;
    let point = point_capacity_sweep(cfg.beta, &cfg.eps_grid, cfg.point_mesh)?;
    out.csv("capacity_cutoff.csv", &capacity_rows(&cutoff))?;
    out.csv("capacity_point.csv", &capacity_rows(&point))?;
    let vanishes = point.verdict == CapacityVerdict::Decaying;
    Ok((json!({ "cutoff": cutoff, "point": point }), vanishes))
}

fn run_bochner(cfg: &RunConfig, out: &mut Emitter) -> Result<(Value, bool)> {
    let report: BochnerReport = bochner_sweep(cfg.n, cfg.beta, cfg.k, &cfg.r_grid, QuadratureSpec::default())?;
    let rows: Vec<BochnerRow> =
        report.rows.iter().map(|w| BochnerRow { r: w.r, lhs: w.lhs, lhs_err: w.lhs_err, rhs: w.rhs, rhs_err: w.rhs_err }).collect();
    out.csv("bochner.csv", &rows)?;
    let violated = report.violated_at.is_some();
    Ok((serde_json::to_value(&report)?, violated))
}

fn run_sde(cfg: &RunConfig, out: &mut Emitter) -> Result<(Value, bool)> {
    let x0 = Configuration::new(default_start(cfg.n))?;
    let (stats, paths): (CollisionStats, Vec<PathSummary>) = collision_run(&x0, cfg.beta, cfg.horizon, cfg.paths, cfg.seed, &SdeOptions::default())?;
    let rows: Vec<PathRow> = paths
        .iter()
        .enumerate()
        .map(|(path, p)| PathRow {
            path,
            collided: p.collided(),
            collision_time: p.collision_time,
            min_gap: p.min_gap,
            steps: p.steps,
            refinements: p.refinements,
            smallest_dt: p.smallest_dt,
        })
        .collect();
    out.csv("sde_paths.csv", &rows)?;
    let collisions = stats.ci_low > 0.01;
    Ok((serde_json::to_value(&stats)?, collisions))
}

/// Smooth data of both parities, followed by the odd-step candidates.
pub fn heat_suite() -> Vec<Datum> {
    let mut suite = vec![
        Datum::OddStep { width: 0.1 },
        Datum::OddStep { width: 0.2 },
        Datum::OddBump { width: 0.3 },
        Datum::EvenBump { width: 0.2 },
        Datum::EvenBump { width: 0.5 },
    ];
    for d in default_candidates() {
        if !suite.contains(&d) {
            suite.push(d);
        }
    }
    suite
}

fn run_heat(cfg: &RunConfig, out: &mut Emitter) -> Result<(Value, bool)> {
    use rayon::prelude::*;
    let checks: Vec<Result<BeCheck>> = heat_suite()
        .par_iter()
        .map(|&d| be_check(cfg.beta, cfg.heat_half_length, cfg.grid, d, cfg.heat_time, cfg.dim))
        .collect();
    let checks: Vec<BeCheck> = checks.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for c in &checks {
        for m in [&c.coarse, &c.fine] {
            rows.push(HeatRow {
                beta: cfg.beta,
                dim: cfg.dim.to_string(),
                t: cfg.heat_time,
                grid: m.cells,
                margin: m.margin,
                trend: c.trend,
                datum: c.datum.clone(),
            });
        }
    }
    out.csv("heat.csv", &rows)?;
    let holds = checks.iter().all(|c| c.holds && c.trend != Trend::Growing);
    Ok((json!({ "half_length": cfg.heat_half_length, "checks": checks }), holds))
}

/// Runs the configured command inside a pool of `cfg.workers` threads.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &RunConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&cfg.out)?;
    let mut out = Emitter { dir: cfg.out.clone(), files: Vec::new() };
    let mut sections = serde_json::Map::new();
    let mut verdicts = BTreeMap::new();
    let all = cfg.command == Subcommand::All;
    let mut record = |name: &str, verdict: &str, (v, ok): (Value, bool)| {
        sections.insert(name.to_string(), v);
        verdicts.insert(verdict.to_string(), ok);
    };
    if all || cfg.command == Subcommand::Ricci {
        record("ricci", "ricci-nonneg", run_ricci(cfg, &mut out)?);
    }
    if all || cfg.command == Subcommand::Capacity {
        record("capacity", "capacity-vanishes", run_capacity(cfg, &mut out)?);
    }
    if cfg.command == Subcommand::Bochner || (all && cfg.beta < 1.0) {
        record("bochner", "wb-violation", run_bochner(cfg, &mut out)?);
    }
    if all || cfg.command == Subcommand::Sde {
        record("sde", "collisions", run_sde(cfg, &mut out)?);
    }
    if all || cfg.command == Subcommand::Heat {
        record("heat", "be-holds", run_heat(cfg, &mut out)?);
    }
    if all {
        // The estimate needs both the sector semigroup to satisfy it and the
        // singular set to be invisible to the form.
        let holds = verdicts["be-holds"] && verdicts["capacity-vanishes"];
        verdicts.insert("be-holds".into(), holds);
    }
    let mismatches: Vec<String> = cfg
        .expect
        .iter()
        .filter(|(name, want)| verdicts.get(*name) != Some(want))
        .map(|(name, want)| format!("{name}: expected {want}, got {}", verdicts.get(name).map_or("nothing".into(), |v| v.to_string())))
        .collect();
    let summary = json!({
        "command": cfg.command,
        "config": cfg,
        "results": sections,
        "verdicts": verdicts,
        "mismatches": mismatches,
    });
    out.json("summary.json", &summary)?;
    Ok(RunOutcome { verdicts, mismatches, files: out.files })
}

fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::InvalidParameter(_) | Error::OnSingularSet { .. } | Error::NonIntegrable { .. } => "invalid-parameter",
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => "io",
        Error::NoConvergence { .. } | Error::Solver(_) => "numerical",
    };
    json!({ "error": kind, "message": e.to_string() }).to_string()
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            println!("{}", json!({ "error": "invalid-parameter", "message": e.to_string().trim() }));
            return 2;
        }
    };
    let cfg = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(e) => {
            println!("{}", error_json(&e));
            return 2;
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for m in &outcome.mismatches {
                eprintln!("verdict mismatch: {m}");
            }
            println!("{}", serde_json::to_string(&outcome.verdicts).unwrap_or_default());
            outcome.exit_code()
        }
        Err(e) => {
            println!("{}", error_json(&e));
            if matches!(e, Error::InvalidParameter(_)) {
                2
            } else {
                1
            }
        }
    }
}

/// Reads the output directory back, for comparisons between runs.
pub fn read_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            files.insert(entry.file_name().to_string_lossy().into_owned(), fs::read(entry.path())?);
        }
    }
    Ok(files)
}
