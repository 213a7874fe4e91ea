//! The `verifylab` command-line driver: rearrangement runs, norm tables,
//! verification sweeps over the corpus, constant scans, and report
//! emission.
//!
//! Exit codes: 0 pass, 1 check/regression failure, 2 usage or parse error,
//! 3 data-invariant error. Every output file carries the resolved
//! configuration (CSV/SVG as `#`/comment headers, JSON under `_config`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{self, CorpusEntry, FamilySpec, GeneratorId, ShapeSpec};
use crate::functionals::{self, LorentzExponents};
use crate::inequality::{
    admissible, CheckResult, Evaluator, InequalityId, InequalityParams,
};
use crate::mesh::{build_grid, Domain, MeasureSpec, SampledFunction};
use crate::rearrange;
use crate::search::{self, SearchBudget};
use crate::tgrid;
use crate::{Error, Result};

/// Resolved run configuration: defaults, then config file, then flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub tolerance: f64,
    pub budget_file: PathBuf,
    pub corpus_manifest: PathBuf,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_min: 1e-4,
            t_max: 1e4,
            t_points: 256,
            tolerance: 1e-3,
            budget_file: PathBuf::from("data/budgets.json"),
            corpus_manifest: PathBuf::from("data/corpus_manifest.json"),
            out_dir: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

impl RunConfig {
    /// Flat key=value config file; unknown keys rejected.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected key=value, got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse {
                line: lineno + 1,
                msg: format!("bad {what} value '{value}'"),
            };
            match key {
                "t_min" => self.t_min = value.parse().map_err(|_| bad("t_min"))?,
                "t_max" => self.t_max = value.parse().map_err(|_| bad("t_max"))?,
                "t_points" => self.t_points = value.parse().map_err(|_| bad("t_points"))?,
                "tolerance" => self.tolerance = value.parse().map_err(|_| bad("tolerance"))?,
                "budget_file" => self.budget_file = PathBuf::from(value),
                "corpus_manifest" => self.corpus_manifest = PathBuf::from(value),
                "out_dir" => self.out_dir = PathBuf::from(value),
                "jobs" => self.jobs = value.parse().map_err(|_| bad("jobs"))?,
                other => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("unknown config key '{other}'"),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Result<Vec<f64>> {
        tgrid::log_spaced(self.t_min, self.t_max, self.t_points)
    }

    /// Sorted key=value lines for reproducibility headers.
    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("t_min={}", self.t_min),
            format!("t_max={}", self.t_max),
            format!("t_points={}", self.t_points),
            format!("tolerance={}", self.tolerance),
            format!("budget_file={}", self.budget_file.display()),
            format!("corpus_manifest={}", self.corpus_manifest.display()),
            format!("jobs={}", self.jobs),
        ]
    }

    fn json_config(&self) -> String {
        let lines = self.header_lines();
        let parts: Vec<String> = lines
            .iter()
            .map(|l| {
                let (k, v) = l.split_once('=').unwrap();
                format!("\"{k}\":\"{v}\"")
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// Budgets for inequality checks plus golden constants for scans.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct BudgetFile {
    /// Frozen check budgets keyed by `id|param-key` (already the enforced
    /// limit: 10x the empirical corpus maximum at freeze time).
    #[serde(default)]
    pub budgets: BTreeMap<String, f64>,
    /// Frozen best ratios of constant scans, keyed the same way.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

impl BudgetFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{}", serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "verifylab",
    about = "Rearrangement, Lorentz/Besov functionals, and inequality verification over sampled functions",
    version
)]
struct Cli {
    /// Flat key=value config file (flags win over the file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate f*, f**, and the oscillation of a sampled function.
    Rearrange(RearrangeArgs),
    /// Norm table of a sampled function.
    Norm(NormArgs),
    /// Evaluate inequality checks over the corpus.
    Verify(VerifyArgs),
    /// Search a family for the empirical best constant of one inequality.
    Scan(ScanArgs),
    /// Summarize a checks.jsonl file into a report.
    Report(ReportArgs),
}

#[derive(Args)]
struct RearrangeArgs {
    /// Input function in the mesh CSV format.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    grid_flags: GridFlags,
}

#[derive(Args, Clone, Copy)]
struct GridFlags {
    /// Low end of the t grid.
    #[arg(long)]
    t_min: Option<f64>,
    /// High end of the t grid.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of log-spaced t points.
    #[arg(long)]
    t_points: Option<usize>,
    /// Identity tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl GridFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.t_min {
            cfg.t_min = v;
        }
        if let Some(v) = self.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.t_points {
            cfg.t_points = v;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
    }
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated p:q pairs, e.g. 2:1,inf:2,1:1.
    #[arg(long, default_value = "1:1,2:1,2:2,inf:1,inf:2,inf:inf")]
    pq: String,
    /// Domain measure for the Omega-relative functionals.
    #[arg(long)]
    omega: Option<f64>,
    #[command(flatten)]
    grid_flags: GridFlags,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated inequality ids (or 'all').
    #[arg(long, default_value = "all")]
    ids: String,
    /// Restrict the corpus to one dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Explicit exponents instead of the default lattice.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r: Option<String>,
    /// Fail (exit 2) when the budget file is missing instead of treating
    /// unbudgeted checks as informational.
    #[arg(long)]
    enforce: bool,
    /// Write the observed maxima (x10) back as the budget file.
    #[arg(long)]
    freeze: bool,
    #[command(flatten)]
    grid_flags: GridFlags,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    id: String,
    /// Generator name (cone, tent, smooth_bump, power_bump,
    /// random_fourier, mollified_indicator, gaussian_hermite_bump, zero).
    #[arg(long)]
    family: String,
    /// Ambient dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Radius range a:b (cone, bumps, fourier, hermite).
    #[arg(long, default_value = "0.3:1.5", allow_hyphen_values = true)]
    r_range: Option<String>,
    /// Alias for --r-range matching the field name R.
    #[arg(long = "R", value_name = "A:B")]
    r_range_alias: Option<String>,
    /// Height range a:b.
    #[arg(long = "H", default_value = "1:1")]
    h_range: String,
    /// Power-bump exponent range a:b.
    #[arg(long, default_value = "1:4")]
    beta: String,
    /// Mollifier radius range a:b.
    #[arg(long, default_value = "0.08:0.2")]
    eps: String,
    /// Fourier mode count range a:b.
    #[arg(long = "K", default_value = "2:3")]
    k_range: String,
    /// Hermite degree range a:b.
    #[arg(long, default_value = "1:2")]
    degree: String,
    /// Exponent p (inf allowed).
    #[arg(long, default_value = "1")]
    p: String,
    /// Exponent q (inf allowed).
    #[arg(long, default_value = "1")]
    q: String,
    /// Derivative order.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 40)]
    samples: usize,
    #[arg(long, default_value_t = 6)]
    refine: usize,
    #[arg(long, default_value_t = 0.5)]
    shrink: f64,
    /// Grid points per axis for the scan functions.
    #[arg(long)]
    m: Option<usize>,
    /// Grid half-width.
    #[arg(long)]
    l: Option<f64>,
    /// Freeze the estimate into the budget file's constants section.
    #[arg(long)]
    freeze: bool,
    #[command(flatten)]
    grid_flags: GridFlags,
}

#[derive(Args)]
struct ReportArgs {
    /// checks.jsonl produced by verify.
    #[arg(long)]
    checks: PathBuf,
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Run the CLI; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } | Error::UnknownId(_) | Error::InvalidParams(_)
                | Error::InvalidGrid(_) | Error::Json(_) => 2,
                Error::Invariant(_) | Error::InvalidFunction(_) => 3,
                Error::DegenerateFamily(_) => 1,
                Error::Io(_) => 2,
                Error::Inadmissible { .. } | Error::ZeroFunction => 1,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if cli.jobs > 0 {
        cfg.jobs = cli.jobs;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if cfg.jobs > 0 {
        // ignore failures when a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    match cli.command {
        Command::Rearrange(args) => run_rearrange(args, cfg),
        Command::Norm(args) => run_norm(args, cfg),
        Command::Verify(args) => run_verify(args, cfg),
        Command::Scan(args) => run_scan(args, cfg),
        Command::Report(args) => run_report(args, cfg),
    }
}

fn ensure_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    Ok(())
}

fn parse_exp(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "Inf" | "INF" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::InvalidParams(format!("bad exponent '{other}'"))),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    if let Some((a, b)) = s.split_once(':') {
        let lo: f64 = a.trim().parse().map_err(|_| Error::InvalidParams(format!("bad range '{s}'")))?;
        let hi: f64 = b.trim().parse().map_err(|_| Error::InvalidParams(format!("bad range '{s}'")))?;
        Ok((lo, hi))
    } else {
        let v: f64 = s.trim().parse().map_err(|_| Error::InvalidParams(format!("bad range '{s}'")))?;
        Ok((v, v))
    }
}

// ---------------------------------------------------------------------------
// rearrange
// ---------------------------------------------------------------------------

fn run_rearrange(args: RearrangeArgs, mut cfg: RunConfig) -> Result<i32> {
    args.grid_flags.apply(&mut cfg);
    let f = SampledFunction::load_csv(&args.input)?;
    ensure_out(&cfg)?;
    let t = cfg.t_grid()?;
    let profile = rearrange::rearrange(&f, &t)?;
    let residuals = rearrange::identity_residuals(&profile)?;

    // curve.csv
    let mut curve = String::new();
    for line in cfg.header_lines() {
        writeln!(curve, "# {line}").unwrap();
    }
    let mut body = Vec::new();
    profile.write_csv(&mut body)?;
    curve.push_str(&String::from_utf8(body).unwrap());
    std::fs::write(cfg.out_dir.join("curve.csv"), curve)?;

    // profile.json
    let json = format!(
        "{{\"_config\":{},\"mass\":{},\"supp\":{},\"sup_norm\":{},\"residuals\":{{\"tail_integral\":{},\"product_rule\":{},\"parts_formula\":{}}}}}",
        cfg.json_config(),
        profile.mass,
        profile.supp,
        profile.sup_norm,
        residuals.tail_integral,
        residuals.product_rule,
        residuals.parts_formula
    );
    std::fs::write(cfg.out_dir.join("profile.json"), json)?;

    // osc.svg
    let svg = svg_loglog(
        &profile.t_grid,
        &profile.osc,
        "t",
        "f** - f*",
        &cfg.header_lines(),
    );
    std::fs::write(cfg.out_dir.join("osc.svg"), svg)?;
    println!(
        "rearrange: mass={} supp={} sup={} residuals=({:.3e},{:.3e},{:.3e})",
        profile.mass,
        profile.supp,
        profile.sup_norm,
        residuals.tail_integral,
        residuals.product_rule,
        residuals.parts_formula
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// norm
// ---------------------------------------------------------------------------

fn run_norm(args: NormArgs, mut cfg: RunConfig) -> Result<i32> {
    args.grid_flags.apply(&mut cfg);
    let f = SampledFunction::load_csv(&args.input)?;
    ensure_out(&cfg)?;
    let t = cfg.t_grid()?;
    let profile = rearrange::rearrange(&f, &t)?;
    let omega = args.omega.unwrap_or_else(|| f.weights().iter().sum());

    let mut out = String::new();
    for line in cfg.header_lines() {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "kind,p,q,value").unwrap();
    writeln!(out, "mass,,,{}", profile.mass).unwrap();
    writeln!(out, "supp,,,{}", profile.supp).unwrap();
    writeln!(out, "sup_norm,,,{}", profile.sup_norm).unwrap();
    for pair in args.pq.split(',') {
        let (ps, qs) = pair
            .split_once(':')
            .ok_or_else(|| Error::InvalidParams(format!("bad pq pair '{pair}'")))?;
        let p = parse_exp(ps)?;
        let q = parse_exp(qs)?;
        let v = functionals::lorentz_norm(&profile, LorentzExponents::new(p, q)?)?;
        let fmt_p = if p.is_infinite() { "inf".into() } else { format!("{p}") };
        let fmt_q = if q.is_infinite() { "inf".into() } else { format!("{q}") };
        writeln!(out, "lorentz,{fmt_p},{fmt_q},{v}").unwrap();
    }
    writeln!(out, "llogl,,,{}", functionals::llogl_norm(&profile, omega)?).unwrap();
    if f.grid().dim >= 2 {
        writeln!(out, "hbw,,,{}", functionals::hbw_functional(&profile, omega, f.grid().dim)?)
            .unwrap();
    }
    writeln!(
        out,
        "normalized_linf_q,,{},{}",
        f.grid().dim,
        functionals::normalized_linf_q(&profile, omega, f.grid().dim as f64)?
    )
    .unwrap();
    let path = cfg.out_dir.join("norms.csv");
    std::fs::write(&path, &out)?;
    print!("{out}");
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Default (id, params) lattice for one corpus entry.
fn lattice_for(id: InequalityId, entry: &CorpusEntry) -> Vec<InequalityParams> {
    let n = entry.grid.dim;
    let nf = n as f64;
    let gaussian = entry.measure == MeasureSpec::Gaussian;
    let mut out = Vec::new();
    let mut push = |p: InequalityParams| {
        if admissible(id, &p) {
            out.push(p);
        }
    };
    // fractional ids are modulus-heavy on n = 2; keep the default lattice
    // to the smooth representatives there
    let frac_ok = n == 1 || matches!(entry.label.as_str(), "bump2d_r1" | "fourier2d_s7");
    match id {
        InequalityId::IdFrom | InequalityId::IdProduct | InequalityId::IdNumer => {
            push(InequalityParams::new(n, 1, 1.0, 1.0));
        }
        _ if gaussian => {
            if id == InequalityId::V6Gauss {
                push(InequalityParams::new(n, 1, 1.0, 1.0));
            }
        }
        InequalityId::V6Gauss => {}
        InequalityId::Sob1 => {
            for p in [1.0, 1.5, 2.0, nf] {
                for q in [1.0, 2.0, f64::INFINITY] {
                    push(InequalityParams::new(n, 1, p, q));
                }
            }
        }
        InequalityId::Sobk => {
            if entry.k_max >= 2 {
                for p in [1.0, nf / 2.0] {
                    for q in [1.0, 2.0, f64::INFINITY] {
                        push(InequalityParams::new(n, 2, p, q));
                    }
                }
            }
        }
        InequalityId::Sobsup => {
            for k in 1..=2usize.min(entry.k_max).min(n) {
                for p in [1.0, 1.5, nf / k as f64] {
                    push(InequalityParams::new(n, k, p, p));
                }
            }
        }
        InequalityId::Deacuerdo => {
            if entry.k_max >= n {
                push(InequalityParams::new(n, n, 1.0, 1.0));
            }
        }
        InequalityId::Hbr => {
            for q in [1.0, 2.0] {
                push(InequalityParams::new(n, 1, nf, q));
            }
        }
        InequalityId::Stein2 | InequalityId::Stein3 => {
            if entry.domain.is_some() {
                push(InequalityParams::new(n, 2, 1.0, 1.0));
            }
        }
        InequalityId::Iso => {
            if entry.generator == GeneratorId::MollifiedIndicator {
                push(InequalityParams::new(n, 1, 1.0, 1.0));
            }
        }
        InequalityId::FracNueva | InequalityId::FracThm => {
            if frac_ok {
                for alpha in [0.3, 0.5, 0.7] {
                    for p in [1.0, (nf / alpha).min(2.0)] {
                        let mut pr = InequalityParams::new(n, 1, p, 1.0);
                        pr.alpha = Some(alpha);
                        push(pr);
                    }
                }
            }
        }
        InequalityId::FracNueva2 => {
            if frac_ok {
                for alpha in [0.3, 0.5, 0.7] {
                    let mut pr = InequalityParams::new(n, 1, nf / alpha, 1.0);
                    pr.alpha = Some(alpha);
                    push(pr);
                }
            }
        }
        InequalityId::FracLorentz => {
            if n == 1 {
                for (p, r) in [(1.0, 1.0), (2.0, 1.0), (2.0, f64::INFINITY)] {
                    let mut pr = InequalityParams::new(n, 1, p, 1.0);
                    pr.alpha = Some(0.5);
                    pr.r = Some(r);
                    push(pr);
                }
            }
        }
        InequalityId::Steine => {
            push(InequalityParams::new(n, 2, nf / 2.0, 1.0));
        }
        _ => {
            push(InequalityParams::new(n, 1, 1.0, 1.0));
        }
    }
    out
}

struct VerifyOutcome {
    results: Vec<CheckResult>,
    skipped: Vec<String>,
}

fn verify_entry(
    entry: &CorpusEntry,
    ids: &[InequalityId],
    explicit: Option<&InequalityParams>,
    cfg: &RunConfig,
    budgets: Option<&BudgetFile>,
) -> Result<VerifyOutcome> {
    let f = entry.build()?;
    let t = cfg.t_grid()?;
    let domain = entry
        .domain
        .as_ref()
        .map(|shape| Domain::new(&entry.grid, entry.measure, *shape));
    let shape = match entry.generator {
        GeneratorId::MollifiedIndicator => {
            let size = entry.theta[0];
            Some(match entry.theta[2].round() as i64 {
                0 => ShapeSpec::ball(entry.grid.dim, size),
                _ => ShapeSpec::cube(entry.grid.dim, size),
            })
        }
        _ => None,
    };
    let mut ev = Evaluator::new(&f, &entry.label, t)?;
    if let Some(d) = domain.as_ref() {
        ev = ev.with_domain(d);
    }
    if let Some(s) = shape.as_ref() {
        ev = ev.with_shape(s);
    }

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for &id in ids {
        let identity = matches!(
            id,
            InequalityId::IdFrom | InequalityId::IdProduct | InequalityId::IdNumer
        );
        let param_sets = match explicit {
            Some(p) => {
                let mut p = *p;
                p.n = entry.grid.dim;
                vec![p]
            }
            None => lattice_for(id, entry),
        };
        for params in param_sets {
            if !admissible(id, &params) {
                skipped.push(format!(
                    "{}[{}] {}: inadmissible",
                    id.as_str(),
                    params.key(),
                    entry.label
                ));
                continue;
            }
            let budget = if identity {
                cfg.tolerance
            } else {
                let key = format!("{}|{}", id.as_str(), params.key());
                budgets
                    .and_then(|b| b.budgets.get(&key).copied())
                    .unwrap_or(f64::INFINITY)
            };
            match ev.check(id, &params, budget) {
                Ok(r) => results.push(r),
                Err(Error::ZeroFunction) => {
                    skipped.push(format!("{} {}: zero function", id.as_str(), entry.label));
                }
                Err(Error::Inadmissible { reason, .. }) => {
                    skipped.push(format!("{} {}: inadmissible ({reason})", id.as_str(), entry.label));
                }
                Err(Error::InvalidParams(msg)) => {
                    skipped.push(format!("{} {}: {msg}", id.as_str(), entry.label));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(VerifyOutcome { results, skipped })
}

fn load_corpus(cfg: &RunConfig) -> Vec<CorpusEntry> {
    if cfg.corpus_manifest.exists() {
        match corpus::load_manifest(&cfg.corpus_manifest) {
            Ok(list) => return list,
            Err(e) => eprintln!(
                "warning: could not read manifest {}: {e}; using the builtin corpus",
                cfg.corpus_manifest.display()
            ),
        }
    }
    corpus::standard_corpus()
}

fn run_verify(args: VerifyArgs, mut cfg: RunConfig) -> Result<i32> {
    use rayon::prelude::*;

    args.grid_flags.apply(&mut cfg);
    let ids: Vec<InequalityId> = if args.ids.trim() == "all" {
        InequalityId::ALL.to_vec()
    } else {
        args.ids
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<_>>>()?
    };

    let explicit = if args.p.is_some() || args.q.is_some() || args.alpha.is_some() || args.k.is_some()
    {
        let mut p = InequalityParams::new(
            args.n.unwrap_or(2),
            args.k.unwrap_or(1),
            parse_exp(args.p.as_deref().unwrap_or("1"))?,
            parse_exp(args.q.as_deref().unwrap_or("1"))?,
        );
        p.alpha = args.alpha;
        p.r = match &args.r {
            Some(r) => Some(parse_exp(r)?),
            None => None,
        };
        Some(p)
    } else {
        None
    };

    // explicit inadmissible parameters are reported up front and skipped
    if let Some(p) = &explicit {
        for &id in &ids {
            if !admissible(id, p) {
                println!(
                    "skip {}: inadmissible ({})",
                    id.as_str(),
                    crate::inequality::admissible_note(id, p)
                );
            }
        }
    }

    let budgets = match BudgetFile::load(&cfg.budget_file) {
        Ok(b) => Some(b),
        Err(_) if args.enforce => {
            return Err(Error::InvalidParams(format!(
                "--enforce set but budget file {} is missing",
                cfg.budget_file.display()
            )))
        }
        Err(_) => None,
    };

    let corpus: Vec<CorpusEntry> = load_corpus(&cfg)
        .into_iter()
        .filter(|e| args.n.map_or(true, |n| e.grid.dim == n))
        .collect();

    let outcomes: Vec<Result<VerifyOutcome>> = corpus
        .par_iter()
        .map(|entry| verify_entry(entry, &ids, explicit.as_ref(), &cfg, budgets.as_ref()))
        .collect();

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        let o = o?;
        results.extend(o.results);
        skipped.extend(o.skipped);
    }

    ensure_out(&cfg)?;
    // checks.jsonl
    let mut jsonl = String::new();
    for r in &results {
        writeln!(jsonl, "{}", r.to_json_line()).unwrap();
    }
    std::fs::write(cfg.out_dir.join("checks.jsonl"), jsonl)?;

    // summary.csv: per-id max ratio
    let mut per_id: BTreeMap<&str, (usize, f64, f64, bool)> = BTreeMap::new();
    for r in &results {
        let e = per_id.entry(r.id.as_str()).or_insert((0, 0.0, f64::INFINITY, true));
        e.0 += 1;
        if r.ratio > e.1 {
            e.1 = r.ratio;
        }
        e.2 = e.2.min(r.budget);
        e.3 &= r.pass;
    }
    let mut summary = String::new();
    for line in cfg.header_lines() {
        writeln!(summary, "# {line}").unwrap();
    }
    writeln!(summary, "id,count,max_ratio,min_budget,pass").unwrap();
    for (id, (count, maxr, minb, pass)) in &per_id {
        let minb = if minb.is_infinite() { "inf".into() } else { format!("{minb}") };
        writeln!(summary, "{id},{count},{maxr},{minb},{pass}").unwrap();
    }
    std::fs::write(cfg.out_dir.join("summary.csv"), summary)?;

    for s in &skipped {
        println!("skip {s}");
    }
    let failures: Vec<&CheckResult> = results.iter().filter(|r| !r.pass).collect();
    for f in &failures {
        println!(
            "FAIL {} {} [{}]: ratio {} > budget {}",
            f.id.as_str(),
            f.function_id,
            f.params.key(),
            f.ratio,
            f.budget
        );
    }
    println!("verify: {} checks, {} failures, {} skipped", results.len(), failures.len(), skipped.len());

    if args.freeze {
        let mut file = budgets.unwrap_or_default();
        let mut maxima: BTreeMap<String, f64> = BTreeMap::new();
        for r in &results {
            if matches!(
                r.id,
                InequalityId::IdFrom | InequalityId::IdProduct | InequalityId::IdNumer
            ) {
                continue;
            }
            let key = r.key();
            let slot = maxima.entry(key).or_insert(0.0);
            if r.ratio > *slot && r.ratio.is_finite() {
                *slot = r.ratio;
            }
        }
        file.budgets = maxima.into_iter().map(|(k, v)| (k, 10.0 * v)).collect();
        file.save(&cfg.budget_file)?;
        println!("froze {} budgets to {}", file.budgets.len(), cfg.budget_file.display());
    }

    Ok(if failures.is_empty() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

fn run_scan(args: ScanArgs, mut cfg: RunConfig) -> Result<i32> {
    args.grid_flags.apply(&mut cfg);
    let id: InequalityId = args.id.parse()?;
    let generator: GeneratorId = args.family.parse()?;
    let n = args.n;
    let r_range = args.r_range_alias.or(args.r_range).unwrap_or_else(|| "0.3:1.5".into());
    let r = parse_range(&r_range)?;
    let h = parse_range(&args.h_range)?;
    let bounds: Vec<(f64, f64)> = match generator {
        GeneratorId::Cone | GeneratorId::Tent | GeneratorId::SmoothBump => vec![r, h],
        GeneratorId::PowerBump => vec![r, parse_range(&args.beta)?, h],
        GeneratorId::RandomFourier => vec![r, parse_range(&args.k_range)?, h],
        GeneratorId::MollifiedIndicator => vec![r, parse_range(&args.eps)?, (0.0, 0.0)],
        GeneratorId::GaussianHermiteBump => vec![parse_range(&args.degree)?, r, h],
        GeneratorId::Zero => vec![(0.0, 1.0)],
    };
    let family = FamilySpec { generator, bounds, seed: args.seed.unwrap_or(0) };
    let mut params = InequalityParams::new(n, args.k, parse_exp(&args.p)?, parse_exp(&args.q)?);
    params.alpha = args.alpha;

    let measure = if id == InequalityId::V6Gauss {
        MeasureSpec::Gaussian
    } else {
        MeasureSpec::Lebesgue
    };
    let default_l = if measure == MeasureSpec::Gaussian { 8.0 } else { 2.0 };
    let default_m = if n == 1 { 2001 } else { 201 };
    let grid = build_grid(n, args.l.unwrap_or(default_l), args.m.unwrap_or(default_m))?;
    let budget = SearchBudget {
        random_samples: args.samples,
        refine_steps: args.refine,
        step_shrink: args.shrink,
        seed: args.seed.unwrap_or(0),
    };

    let est = search::estimate_constant(id, &family, &params, &budget, &grid, measure)?;
    ensure_out(&cfg)?;

    let json = format!("{{\"_config\":{},{}", cfg.json_config(), &est.to_json()[1..]);
    std::fs::write(cfg.out_dir.join("estimate.json"), &json)?;

    let mut trace = String::new();
    for line in cfg.header_lines() {
        writeln!(trace, "# {line}").unwrap();
    }
    writeln!(trace, "step,ratio,theta").unwrap();
    for (i, (theta, ratio)) in est.trace.iter().enumerate() {
        let th: Vec<String> = theta.iter().map(|v| format!("{v}")).collect();
        writeln!(trace, "{i},{ratio},{}", th.join(";")).unwrap();
    }
    std::fs::write(cfg.out_dir.join("trace.csv"), trace)?;

    println!(
        "scan {}: best ratio {} at theta {:?}",
        id.as_str(),
        est.best_ratio,
        est.argmax_theta
    );

    if args.freeze {
        let mut file = BudgetFile::load(&cfg.budget_file).unwrap_or_default();
        file.constants.insert(format!("{}|{}", id.as_str(), params.key()), est.best_ratio);
        file.save(&cfg.budget_file)?;
        println!("froze constant to {}", cfg.budget_file.display());
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn run_report(args: ReportArgs, cfg: RunConfig) -> Result<i32> {
    let text = std::fs::read_to_string(&args.checks)?;
    #[derive(serde::Deserialize)]
    struct Row {
        id: String,
        function_id: String,
        ratio: serde_json::Value,
        budget: serde_json::Value,
        pass: bool,
    }
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: format!("bad check line: {e}"),
        })?;
        rows.push(row);
    }
    let as_f64 = |v: &serde_json::Value| -> f64 {
        match v {
            serde_json::Value::Number(n) => n.as_f64().unwrap_or(f64::NAN),
            _ => f64::INFINITY,
        }
    };
    let mut per_id: BTreeMap<String, (usize, f64, String, bool)> = BTreeMap::new();
    for r in &rows {
        let e = per_id
            .entry(r.id.clone())
            .or_insert((0, -1.0, String::new(), true));
        e.0 += 1;
        let ratio = as_f64(&r.ratio);
        if ratio > e.1 {
            e.1 = ratio;
            e.2 = r.function_id.clone();
        }
        e.3 &= r.pass;
    }
    ensure_out(&cfg)?;
    let mut md = String::new();
    writeln!(md, "# Check report\n").unwrap();
    for line in cfg.header_lines() {
        writeln!(md, "<!-- {line} -->").unwrap();
    }
    writeln!(md, "\n| id | checks | max ratio | argmax function | pass |").unwrap();
    writeln!(md, "|----|--------|-----------|-----------------|------|").unwrap();
    for (id, (count, maxr, argf, pass)) in &per_id {
        writeln!(md, "| {id} | {count} | {maxr:.6} | {argf} | {pass} |").unwrap();
    }
    let _ = as_f64(&rows[0].budget);
    std::fs::write(cfg.out_dir.join("report.md"), md)?;

    // ratios.svg: one bar per id
    let labels: Vec<&String> = per_id.keys().collect();
    let values: Vec<f64> = per_id.values().map(|v| v.1.max(0.0)).collect();
    let svg = svg_bars(&labels, &values, &cfg.header_lines());
    std::fs::write(cfg.out_dir.join("ratios.svg"), svg)?;
    println!("report: {} ids over {} checks", per_id.len(), rows.len());
    Ok(0)
}

// ---------------------------------------------------------------------------
// SVG emission (no plotting dependency)
// ---------------------------------------------------------------------------

fn svg_loglog(x: &[f64], y: &[f64], xlabel: &str, ylabel: &str, header: &[String]) -> String {
    let (w, hgt, ml, mb) = (640.0, 420.0, 60.0, 40.0);
    let ymax = y.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    let ymin = (ymax * 1e-8).max(f64::MIN_POSITIVE);
    let lx0 = x[0].log10();
    let lx1 = x[x.len() - 1].log10();
    let ly0 = ymin.log10();
    let ly1 = ymax.log10();
    let sx = |v: f64| ml + (v.log10() - lx0) / (lx1 - lx0) * (w - ml - 20.0);
    let sy = |v: f64| {
        let clamped = v.max(ymin);
        hgt - mb - (clamped.log10() - ly0) / (ly1 - ly0) * (hgt - mb - 20.0)
    };
    let mut pts = String::new();
    for (xi, yi) in x.iter().zip(y) {
        if *yi > 0.0 {
            write!(pts, "{:.2},{:.2} ", sx(*xi), sy(*yi)).unwrap();
        }
    }
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{hgt}\" viewBox=\"0 0 {w} {hgt}\">"
    )
    .unwrap();
    for line in header {
        writeln!(s, "<!-- {line} -->").unwrap();
    }
    writeln!(s, "<rect width=\"{w}\" height=\"{hgt}\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        hgt - mb,
        w - 20.0,
        hgt - mb
    )
    .unwrap();
    writeln!(s, "<line x1=\"{ml}\" y1=\"20\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>", hgt - mb)
        .unwrap();
    // decade ticks
    let mut d = lx0.ceil() as i64;
    while (d as f64) <= lx1 {
        let xx = sx(10f64.powi(d as i32));
        writeln!(
            s,
            "<line x1=\"{xx:.2}\" y1=\"{}\" x2=\"{xx:.2}\" y2=\"{}\" stroke=\"gray\"/><text x=\"{xx:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>",
            hgt - mb,
            hgt - mb + 5.0,
            hgt - mb + 18.0
        )
        .unwrap();
        d += 2;
    }
    let mut e = ly0.ceil() as i64;
    while (e as f64) <= ly1 {
        let yy = sy(10f64.powi(e as i32));
        writeln!(
            s,
            "<line x1=\"{}\" y1=\"{yy:.2}\" x2=\"{ml}\" y2=\"{yy:.2}\" stroke=\"gray\"/><text x=\"{}\" y=\"{yy:.2}\" font-size=\"11\" text-anchor=\"end\">1e{e}</text>",
            ml - 5.0,
            ml - 8.0
        )
        .unwrap();
        e += 2;
    }
    writeln!(s, "<polyline points=\"{pts}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>")
        .unwrap();
    writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>",
        (w + ml) / 2.0,
        hgt - 5.0
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"15\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{ylabel}</text>",
        hgt / 2.0,
        hgt / 2.0
    )
    .unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}

fn svg_bars(labels: &[&String], values: &[f64], header: &[String]) -> String {
    let n = labels.len().max(1);
    let (w, hgt, ml, mb) = (640.0, 420.0, 60.0, 110.0);
    let vmax = values.iter().cloned().fold(1e-12, f64::max);
    let bw = (w - ml - 20.0) / n as f64;
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{hgt}\" viewBox=\"0 0 {w} {hgt}\">"
    )
    .unwrap();
    for line in header {
        writeln!(s, "<!-- {line} -->").unwrap();
    }
    writeln!(s, "<rect width=\"{w}\" height=\"{hgt}\" fill=\"white\"/>").unwrap();
    for (i, (lab, val)) in labels.iter().zip(values).enumerate() {
        let x = ml + i as f64 * bw;
        let bh = (val / vmax) * (hgt - mb - 20.0);
        let y = hgt - mb - bh;
        writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{bh:.2}\" fill=\"#1f77b4\"/>",
            x + 1.0,
            bw - 2.0
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-60 {:.2} {})\">{lab}</text>",
            x + bw / 2.0,
            hgt - mb + 12.0,
            x + bw / 2.0,
            hgt - mb + 12.0
        )
        .unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}
