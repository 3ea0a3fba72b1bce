//! The `discalg` command line: parse a `(h, R, C)` configuration, run one
//! pipeline stage, and emit a machine-readable JSON report (plus CSV for
//! density curves).
//!
//! Exit status contract: `0` when the stage's criteria pass, `1` when they
//! fail, `2` on configuration or parse errors. Reports are deterministic
//! for a fixed configuration and seed; wall-clock timings go to stderr
//! only.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{self, ApproxResult, FitMethod, WermerDiagnostic};
use crate::expr::{parse, Expr};
use crate::grid::{continuity_modulus, DiscGrid, ModulusEntry};
use crate::hull::{self, LatticeParams, SweepSummary};
use crate::hypotheses::{self, DiscFunction, HypothesisReport, CONDITION_A_DEFAULT_TAU};
use crate::levi::{certify_psh, verify_lemma_bound, CertificationGrid, LemmaCheck, LeviReport, PsiFunction};

/// Largest accepted fitting degree; beyond this the scaled generator basis
/// is too ill-conditioned to trust.
pub const MAX_DEGREE: usize = 16;

/// Exclusion fraction a hull sweep must reach for exit 0.
pub const HULL_PASS_FRACTION: f64 = 0.99;

/// Random samples drawn by the Levi-form inequality spot check.
pub const LEMMA_SAMPLES: usize = 1000;

#[derive(Parser, Debug)]
#[command(
    name = "discalg",
    version,
    about = "Hypothesis checks, plurisubharmonicity certificates, hull probes and \
             density curves for the uniform algebra generated by z and h+R on the \
             closed unit disc"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check harmonicity of h and the two smallness conditions on R.
    Check(CommonArgs),
    /// Certify plurisubharmonicity of |w - f(rz)|^2 over its polydisc.
    Psh(PshArgs),
    /// Probe the polynomial hull of the graph over a query lattice.
    Hull(CommonArgs),
    /// Fit targets by polynomials in z and f; track sup error per degree.
    Approx(ApproxArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Harmonic part, e.g. "conj(z)".
    #[arg(long = "h")]
    h: String,
    /// Perturbation, e.g. "0.05*z*conj(z)".
    #[arg(long = "R")]
    r: String,
    /// Target constant in (0, 1) for the Laplacian bound.
    #[arg(long = "C")]
    c: f64,
    /// Disc grid as NRxNT, e.g. 64x256.
    #[arg(long = "grid", default_value = "64x256")]
    grid: String,
    /// Near-critical tolerance for condition (a).
    #[arg(long = "tau", default_value_t = CONDITION_A_DEFAULT_TAU)]
    tau: f64,
    /// Seed for all random sampling.
    #[arg(long = "seed", default_value_t = 42)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long = "json")]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PshArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated dilation radii in (0, 1); empty for a vacuous run.
    #[arg(long = "r", default_value = "0.5,0.9,0.99")]
    radii: String,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Highest fitting degree.
    #[arg(long = "dmax", default_value_t = 8)]
    dmax: usize,
    /// Target expressions; may repeat.
    #[arg(long = "target")]
    targets: Vec<String>,
    /// Fitting method.
    #[arg(long = "method", value_enum, default_value_t = MethodArg::Lawson)]
    method: MethodArg,
    /// Write density curves as CSV (degree,sup_error,ls_error). With
    /// several targets, target N > 0 goes to PATH with ".N" before the
    /// extension.
    #[arg(long = "csv")]
    csv: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    LeastSquares,
    Lawson,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> FitMethod {
        match m {
            MethodArg::LeastSquares => FitMethod::LeastSquares,
            MethodArg::Lawson => FitMethod::Lawson,
        }
    }
}

/// Echo of the effective configuration, embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub h: String,
    #[serde(rename = "R")]
    pub r: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub grid_n_r: usize,
    pub grid_n_theta: usize,
    pub tau: f64,
    pub seed: u64,
    pub radii: Option<Vec<f64>>,
    pub dmax: Option<usize>,
    pub targets: Option<Vec<String>>,
    pub method: Option<FitMethod>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PshStageEntry {
    pub r: f64,
    pub lemma: LemmaCheck,
    pub certificate: LeviReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullStage {
    pub lattice: LatticeParams,
    pub modulus: Vec<ModulusEntry>,
    pub summary: SweepSummary,
    pub pass_fraction: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WermerStage {
    pub diagnostic: WermerDiagnostic,
    /// `1 - fraction`, to compare against the hypothesis report.
    pub complement_fraction: f64,
    pub near_critical_fraction: f64,
    /// Difference between the two; they are measured on slightly different
    /// point sets, so a small gap is expected.
    pub consistency_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxStage {
    pub curves: Vec<ApproxResult>,
    /// Per target: final sup error strictly below the first one.
    pub decay_observed: Vec<bool>,
    pub pass: bool,
}

/// Top-level machine-readable report. Serialization round-trips losslessly
/// and is byte-stable for a fixed configuration and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub hypotheses: Option<HypothesisReport>,
    pub psh: Option<Vec<PshStageEntry>>,
    pub hull: Option<HullStage>,
    pub approx: Option<ApproxStage>,
    pub wermer: Option<WermerStage>,
}

impl Report {
    fn new(command: &str, config: ConfigEcho) -> Report {
        Report {
            schema: 1,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            hypotheses: None,
            psh: None,
            hull: None,
            approx: None,
            wermer: None,
        }
    }
}

/// Anything that should terminate the run with exit status 2.
#[derive(Debug)]
struct ConfigError(String);

impl<E: std::error::Error> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

fn parse_grid(spec: &str) -> Result<(usize, usize), ConfigError> {
    let (a, b) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| ConfigError(format!("grid must look like 64x256, got `{spec}`")))?;
    let n_r = a.trim().parse::<usize>().map_err(|_| {
        ConfigError(format!("grid radial count `{a}` is not an integer"))
    })?;
    let n_theta = b.trim().parse::<usize>().map_err(|_| {
        ConfigError(format!("grid angular count `{b}` is not an integer"))
    })?;
    Ok((n_r, n_theta))
}

fn parse_radii(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let trimmed = spec.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|tok| {
            let r: f64 = tok
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("radius `{tok}` is not a number")))?;
            if r > 0.0 && r < 1.0 {
                Ok(r)
            } else {
                Err(ConfigError(format!("radius {r} must lie in (0, 1)")))
            }
        })
        .collect()
}

fn parse_expr_arg(name: &str, src: &str) -> Result<Expr, ConfigError> {
    parse(src).map_err(|e| ConfigError(format!("--{name} {e}")))
}

struct Prepared {
    d: DiscFunction,
    grid: DiscGrid,
    config: ConfigEcho,
}

fn prepare(common: &CommonArgs) -> Result<Prepared, ConfigError> {
    let h = parse_expr_arg("h", &common.h)?;
    let r = parse_expr_arg("R", &common.r)?;
    let (n_r, n_theta) = parse_grid(&common.grid)?;
    let grid = DiscGrid::new(n_r, n_theta)?;
    let d = hypotheses::build(&h, &r, common.c, &grid)?;
    Ok(Prepared {
        d,
        grid,
        config: ConfigEcho {
            h: common.h.clone(),
            r: common.r.clone(),
            c: common.c,
            grid_n_r: n_r,
            grid_n_theta: n_theta,
            tau: common.tau,
            seed: common.seed,
            radii: None,
            dmax: None,
            targets: None,
            method: None,
        },
    })
}

fn emit_report(report: &Report, path: Option<&Path>) -> Result<(), ConfigError> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| ConfigError(format!("report serialization failed: {e}")))?;
    match path {
        Some(p) => {
            std::fs::write(p, json.as_bytes())
                .map_err(|e| ConfigError(format!("cannot write {}: {e}", p.display())))?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(json.as_bytes());
            let _ = out.write_all(b"\n");
        }
    }
    Ok(())
}

fn log_stage(name: &str, start: Instant) {
    eprintln!("stage {name}: {:.3} s", start.elapsed().as_secs_f64());
}

fn run_check(args: &CommonArgs) -> Result<u8, ConfigError> {
    let start = Instant::now();
    let prep = prepare(args)?;
    let rep = hypotheses::report(&prep.d, &prep.grid, args.tau)?;
    log_stage("check", start);
    let pass = rep.all_pass();
    eprintln!(
        "harmonic: {}; condition (a): {}; condition (b): {} (minimal C {:?})",
        rep.harmonic, rep.condition_a.pass, rep.condition_b.pass, rep.condition_b.minimal_c
    );
    let mut report = Report::new("check", prep.config);
    report.hypotheses = Some(rep);
    emit_report(&report, args.json.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

fn run_psh(args: &PshArgs) -> Result<u8, ConfigError> {
    let start = Instant::now();
    let radii = parse_radii(&args.radii)?;
    let prep = prepare(&args.common)?;
    let hyp = hypotheses::report(&prep.d, &prep.grid, args.common.tau)?;
    let cert_grid = CertificationGrid {
        z_n_r: prep.grid.n_r(),
        z_n_theta: prep.grid.n_theta(),
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let mut entries = Vec::with_capacity(radii.len());
    for &r in &radii {
        let psi = PsiFunction::new(&prep.d, r)?;
        let lemma = verify_lemma_bound(&psi, LEMMA_SAMPLES, &mut rng)?;
        let certificate = certify_psh(&psi, &hyp.condition_b, cert_grid)?;
        eprintln!(
            "r = {r}: min eigenvalue {:.3e}, certificate {}",
            certificate.min_eigenvalue,
            if certificate.pass { "pass" } else { "FAIL" }
        );
        entries.push(PshStageEntry { r, lemma, certificate });
    }
    log_stage("psh", start);
    let pass = entries.iter().all(|e| e.certificate.pass);
    let mut config = prep.config;
    config.radii = Some(radii);
    let mut report = Report::new("psh", config);
    report.hypotheses = Some(hyp);
    report.psh = Some(entries);
    emit_report(&report, args.common.json.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

/// Epsilon table published in hull reports: dyadic from 4 down to 2^-12.
fn default_eps_table() -> Vec<f64> {
    (-2..=12).map(|k| 0.5f64.powi(k)).collect()
}

fn run_hull(args: &CommonArgs) -> Result<u8, ConfigError> {
    let start = Instant::now();
    let prep = prepare(args)?;
    let modulus = continuity_modulus(&prep.d.f, &prep.grid, &default_eps_table())?;
    let lattice = LatticeParams::default();
    let queries = hull::default_lattice(&prep.d, lattice)?;
    let summary = hull::sweep(&prep.d, &modulus, &queries, &prep.grid)?;
    log_stage("hull", start);
    let pass = summary.excluded_fraction.is_none_or(|f| f >= HULL_PASS_FRACTION);
    eprintln!(
        "hull sweep: {} queries, {} excluded ({} by box), {} on graph, {} inconclusive",
        summary.total, summary.excluded, summary.excluded_by_box, summary.on_graph,
        summary.inconclusive
    );
    let mut report = Report::new("hull", prep.config);
    report.hull = Some(HullStage {
        lattice,
        modulus: modulus.entries.clone(),
        summary,
        pass_fraction: HULL_PASS_FRACTION,
        pass,
    });
    emit_report(&report, args.json.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

fn csv_path_for(base: &Path, index: usize) -> PathBuf {
    if index == 0 {
        return base.to_path_buf();
    }
    match base.extension() {
        Some(ext) => {
            let stem = base.file_stem().unwrap_or_default().to_string_lossy();
            base.with_file_name(format!("{stem}.{index}.{}", ext.to_string_lossy()))
        }
        None => base.with_file_name(format!(
            "{}.{index}",
            base.file_name().unwrap_or_default().to_string_lossy()
        )),
    }
}

fn write_csv(path: &Path, curve: &ApproxResult) -> Result<(), ConfigError> {
    let mut body = String::from("degree,sup_error,ls_error\n");
    for e in &curve.entries {
        body.push_str(&format!("{},{},{}\n", e.degree, e.sup_error, e.ls_error));
    }
    std::fs::write(path, body)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))
}

fn run_approx(args: &ApproxArgs) -> Result<u8, ConfigError> {
    let start = Instant::now();
    if args.dmax > MAX_DEGREE {
        return Err(ConfigError(format!(
            "--dmax {} exceeds the conditioning guard {MAX_DEGREE}",
            args.dmax
        )));
    }
    if args.dmax < 1 {
        return Err(ConfigError("--dmax must be at least 1".to_string()));
    }
    let prep = prepare(&args.common)?;
    let target_sources: Vec<String> = if args.targets.is_empty() {
        vec!["conj(z)".to_string()]
    } else {
        args.targets.clone()
    };
    let method: FitMethod = args.method.into();
    let mut curves = Vec::with_capacity(target_sources.len());
    for src in &target_sources {
        let target = parse_expr_arg("target", src)?;
        let curve = approx::density_curve(&prep.d, &target, args.dmax, &prep.grid, method)?;
        eprintln!(
            "target {src}: sup error {} -> {}",
            curve.entries.first().map_or(0.0, |e| e.sup_error),
            curve.entries.last().map_or(0.0, |e| e.sup_error),
        );
        curves.push(curve);
    }
    let diagnostic = approx::wermer_set(&prep.d, &prep.grid, args.common.tau)?;
    let cond_a = hypotheses::check_condition_a(&prep.d, &prep.grid, args.common.tau)?;
    log_stage("approx", start);

    if let Some(base) = &args.csv {
        for (i, curve) in curves.iter().enumerate() {
            write_csv(&csv_path_for(base, i), curve)?;
        }
    }
    let decay_observed: Vec<bool> = curves
        .iter()
        .map(|c| match (c.entries.first(), c.entries.last()) {
            (Some(a), Some(b)) => b.sup_error < a.sup_error,
            _ => false,
        })
        .collect();
    let pass = decay_observed.iter().all(|&d| d);
    let mut config = prep.config;
    config.dmax = Some(args.dmax);
    config.targets = Some(target_sources);
    config.method = Some(method);
    let mut report = Report::new("approx", config);
    report.wermer = Some(WermerStage {
        diagnostic,
        complement_fraction: 1.0 - diagnostic.fraction,
        near_critical_fraction: cond_a.near_critical_fraction,
        consistency_gap: ((1.0 - diagnostic.fraction) - cond_a.near_critical_fraction).abs(),
    });
    report.approx = Some(ApproxStage { curves, decay_observed, pass });
    emit_report(&report, args.common.json.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

/// Entry point used by the binary; returns the process exit status.
pub fn run() -> u8 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check(args) => run_check(args),
        Command::Psh(args) => run_psh(args),
        Command::Hull(args) => run_hull(args),
        Command::Approx(args) => run_approx(args),
    };
    match outcome {
        Ok(code) => code,
        Err(ConfigError(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
