//! Batch front end: the five commands behind the `repulse` binary.
//!
//! Every command reads a [`RunConfig`], writes a JSON document (tool version,
//! full parameter echo, results; no timestamps) plus any CSV tables into the
//! output directory, and prints a one-line summary. In deterministic mode
//! (the default) restarts run sequentially; outputs are byte-identical for a
//! fixed config and seed either way, because results are merged in restart
//! order.
//!
//! Exit codes: 0 on success (including honest stagnation or failed checks),
//! 1 for config, CSV and unsupported-model errors, 2 for resource limits.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{ConfigError, ManifoldSpec, RunConfig};

use crate::diagnostics::{
    mean_energy_check, nearest_neighbor_statistics, weyl_report, MeanEnergyReport, NearestNeighborReport,
    WeylReport,
};
use crate::energy::{pretrace_residual, Configuration, EnergyReport, GeometricEvaluator, PretraceReport};
use crate::kernels::spectral_truncation;
use crate::manifolds::{GroupAudit, Manifold};
use crate::optimize::{multistart, uniform_random_configuration, MultistartResult, Objective, OptimizeResult};
use crate::spectrum::build_basis;
use crate::Error;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "repulse", version, about = "Repelling point configurations on tori and the Bolza surface")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multistart descent; writes the best configuration and its certificate.
    Minimize(CommonArgs),
    /// Check the geometric/spectral energy identity on random configurations.
    VerifyPretrace(CommonArgs),
    /// Weyl-sum bounds and equidistribution statistics for a points CSV.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        points: PathBuf,
    },
    /// Minimize for each N in `sweep.n_values` and tabulate the Weyl sums.
    Sweep(CommonArgs),
    /// Invariants of the Bolza group presentation.
    GroupAudit(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_deterministic: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Csv(String),
    Io(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::ResourceLimit { .. }) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Csv(m) => write!(f, "points CSV error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Minimize(a) => cmd_minimize(&load(a)?),
        Command::VerifyPretrace(a) => cmd_verify_pretrace(&load(a)?),
        Command::Diagnose { common, points } => cmd_diagnose(&load(common)?, points),
        Command::Sweep(a) => cmd_sweep(&load(a)?),
        Command::GroupAudit(a) => cmd_group_audit(&load(a)?),
    }
}

/// Read the config file and apply command-line overrides.
pub fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = RunConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        config.set_seed(seed);
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if args.no_deterministic {
        config.deterministic = false;
    }
    Ok(config)
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    result: T,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_document<T: Serialize>(config: &RunConfig, command: &str, result: T) -> Result<PathBuf, CliError> {
    let doc = Document {
        tool: TOOL,
        version: VERSION,
        command,
        config,
        result,
    };
    let mut json = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    write_file(&config.output_dir, &format!("{}.json", command.replace('-', "_")), &json)
}

/// Points as `index,coord_1,...,coord_d` with 17 significant digits.
pub fn points_csv(config: &Configuration) -> String {
    let dim = config.points().first().map_or(0, |p| p.0.len());
    let mut out = String::from("index");
    for k in 1..=dim {
        let _ = write!(out, ",coord_{k}");
    }
    out.push('\n');
    for (i, p) in config.points().iter().enumerate() {
        let _ = write!(out, "{i}");
        for x in &p.0 {
            let _ = write!(out, ",{x:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Parse a points CSV for `manifold`. A leading `index,...` header is
/// optional; rows must hold an index and `dim` reduced coordinates.
pub fn parse_points_csv(text: &str, manifold: &Manifold) -> Result<Configuration, CliError> {
    let dim = manifold.dim();
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() || (row == 1 && line.starts_with("index")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim + 1 {
            return Err(CliError::Csv(format!(
                "row {row}: expected {} fields, found {}",
                dim + 1,
                fields.len()
            )));
        }
        if fields[0].parse::<usize>().is_err() {
            return Err(CliError::Csv(format!("row {row}: invalid index `{}`", fields[0])));
        }
        let coords = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| CliError::Csv(format!("row {row}: invalid coordinate `{f}`"))))
            .collect::<Result<Vec<f64>, _>>()?;
        let point = crate::manifolds::Point(coords);
        if !manifold.is_reduced(&point) {
            return Err(CliError::Csv(format!(
                "row {row}: point {:?} is not in the {} domain",
                point.0,
                manifold.name()
            )));
        }
        points.push(point);
    }
    if points.is_empty() {
        return Err(CliError::Csv("no points found".into()));
    }
    Ok(Configuration::new(points)?)
}

fn min_separation(manifold: &Manifold, config: &Configuration) -> Result<Option<f64>, CliError> {
    let pts = config.points();
    let mut best: Option<f64> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = manifold.distance(&pts[i], &pts[j])?;
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    Ok(best)
}

fn optimize(config: &RunConfig, manifold: &Manifold, n: usize) -> Result<(Objective, MultistartResult), CliError> {
    let kernel = config.kernel(manifold.dim())?;
    let objective = Objective::for_model(manifold, &kernel, n, config.eps_geo, config.eps_spec)?;
    let result = multistart(&objective, n, &config.optimizer, !config.deterministic)?;
    Ok((objective, result))
}

#[derive(Serialize)]
struct TraceSummary {
    steps: usize,
    initial_energy: f64,
    final_energy: f64,
    strictly_decreasing: bool,
}

#[derive(Serialize)]
struct MinimizeOutput<'a> {
    manifold: &'a str,
    n: usize,
    volume: f64,
    energy: f64,
    residual_norm: f64,
    certified_below_mean: Option<bool>,
    mean_level: Option<f64>,
    min_separation: Option<f64>,
    best_restart: usize,
    final_energies: &'a [Option<f64>],
    failures: &'a [String],
    trace_summary: TraceSummary,
    best: &'a OptimizeResult,
}

pub fn cmd_minimize(config: &RunConfig) -> Result<Outcome, CliError> {
    let n = config.require_n()?;
    let manifold = config.manifold()?;
    let (_, ms) = optimize(config, &manifold, n)?;
    let best = &ms.best;
    let trace = &best.trace;
    let output = MinimizeOutput {
        manifold: manifold.name(),
        n,
        volume: manifold.volume(),
        energy: best.energy.value,
        residual_norm: best.residual_norm,
        certified_below_mean: best.certified_below_mean,
        mean_level: best.mean_level,
        min_separation: min_separation(&manifold, &best.config)?,
        best_restart: ms.best_restart,
        final_energies: &ms.final_energies,
        failures: &ms.failures,
        trace_summary: TraceSummary {
            steps: trace.len() - 1,
            initial_energy: trace[0].energy,
            final_energy: trace[trace.len() - 1].energy,
            strictly_decreasing: trace.windows(2).all(|w| w[1].energy < w[0].energy),
        },
        best,
    };
    let doc = write_document(config, "minimize", &output)?;
    let csv = write_file(&config.output_dir, "points.csv", &points_csv(&best.config))?;
    let cert = match best.certified_below_mean {
        Some(c) => format!(" certified_below_mean={c}"),
        None => String::new(),
    };
    Ok(Outcome {
        summary: format!(
            "minimize: N={n} energy={:.12e} residual={:.3e} termination={:?}{cert}",
            best.energy.value, best.residual_norm, best.termination
        ),
        files: vec![doc, csv],
    })
}

#[derive(Serialize)]
struct PretraceOutput {
    n: usize,
    lambda_max: f64,
    modes: usize,
    max_abs_residual: f64,
    max_budget: f64,
    pass: bool,
    samples: Vec<PretraceReport>,
}

pub fn cmd_verify_pretrace(config: &RunConfig) -> Result<Outcome, CliError> {
    let manifold = config.manifold()?;
    let Some(torus) = manifold.as_torus() else {
        return Err(Error::UnsupportedModel("verify-pretrace needs a flat torus".into()).into());
    };
    let n = config.require_n()?;
    let kernel = config.kernel(manifold.dim())?;
    let lambda_max = spectral_truncation(&kernel, torus.periods(), n, config.eps_spec)?;
    let basis = build_basis(&manifold, &kernel, lambda_max)?;
    let samples = (0..config.pretrace_samples)
        .map(|k| {
            let c = uniform_random_configuration(&manifold, n, config.seed.wrapping_add(k as u64))?;
            pretrace_residual(&c, &manifold, &kernel, &basis, config.eps_geo)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let max_abs_residual = samples.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let max_budget = samples.iter().map(|r| r.budget).fold(0.0, f64::max);
    let pass = samples.iter().all(PretraceReport::within_budget);
    let output = PretraceOutput {
        n,
        lambda_max,
        modes: basis.len(),
        max_abs_residual,
        max_budget,
        pass,
        samples,
    };
    let doc = write_document(config, "verify-pretrace", &output)?;
    Ok(Outcome {
        summary: format!(
            "verify-pretrace: {} samples max|residual|={max_abs_residual:.3e} budget={max_budget:.3e} {}",
            output.samples.len(),
            if pass { "PASS" } else { "FAIL" }
        ),
        files: vec![doc],
    })
}

#[derive(Serialize)]
struct DiagnoseOutput {
    manifold: String,
    n: usize,
    energy: EnergyReport,
    /// Torus only.
    weyl: Option<WeylReport>,
    mean_energy: Option<MeanEnergyReport>,
    /// Largest net force on a point; hyperbolic surface only.
    max_force: Option<f64>,
    nearest_neighbor: Option<NearestNeighborReport>,
}

pub fn cmd_diagnose(config: &RunConfig, points: &Path) -> Result<Outcome, CliError> {
    let manifold = config.manifold()?;
    let text = fs::read_to_string(points)
        .map_err(|e| CliError::Csv(format!("cannot read {}: {e}", points.display())))?;
    let cfg = parse_points_csv(&text, &manifold)?;
    let n = cfg.len();
    let kernel = config.kernel(manifold.dim())?;
    let nearest_neighbor = if n >= 2 {
        Some(nearest_neighbor_statistics(&manifold, &cfg)?)
    } else {
        None
    };
    let mut files = Vec::new();
    let output = match &manifold {
        Manifold::Torus(t) => {
            let lambda_max = spectral_truncation(&kernel, t.periods(), n, config.eps_spec)?;
            let basis = build_basis(&manifold, &kernel, lambda_max)?;
            let weyl = weyl_report(&cfg, &basis)?;
            files.push(write_file(&config.output_dir, "weyl_modes.csv", &weyl.to_csv())?);
            let mean_energy = if config.diagnostics_samples > 0 {
                Some(mean_energy_check(&basis, n, config.diagnostics_samples, config.seed)?)
            } else {
                None
            };
            DiagnoseOutput {
                manifold: manifold.name().to_string(),
                n,
                energy: crate::energy::energy_spectral(&cfg, &basis)?,
                weyl: Some(weyl),
                mean_energy,
                max_force: None,
                nearest_neighbor,
            }
        }
        Manifold::Hyperbolic(_) => {
            let eval = GeometricEvaluator::new(&manifold, &kernel, n, config.eps_geo)?;
            let max_force = eval
                .forces(&cfg)?
                .iter()
                .map(|f| f.iter().map(|x| x * x).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            DiagnoseOutput {
                manifold: manifold.name().to_string(),
                n,
                energy: eval.energy(&cfg)?,
                weyl: None,
                mean_energy: None,
                max_force: Some(max_force),
                nearest_neighbor,
            }
        }
    };
    files.insert(0, write_document(config, "diagnose", &output)?);
    let summary = match &output.weyl {
        Some(w) => format!(
            "diagnose: N={n} certified_below_mean={} modes={} failures={}",
            w.certified_below_mean,
            w.modes.len(),
            w.failures()
        ),
        None => format!(
            "diagnose: N={n} energy={:.12e} max_force={:.3e} (no spectral data on {})",
            output.energy.value,
            output.max_force.unwrap_or(0.0),
            output.manifold
        ),
    };
    Ok(Outcome { summary, files })
}

/// One row of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub best_energy: f64,
    pub mean_level: f64,
    pub certified: bool,
    /// Largest `w_m` over the lowest `diagnostics.modes` modes.
    pub max_w: f64,
    pub max_w_sqrt_n: f64,
    /// Largest `C(m)` over the same modes.
    pub max_c: f64,
    /// Every mode satisfies `w_m ≤ C(m)/√N`.
    pub bound_ok: bool,
    pub status: String,
}

pub const SWEEP_HEADER: &str = "n,best_energy,mean_level,certified,max_w,max_w_sqrt_n,max_c,bound_ok,status";

fn sweep_row(config: &RunConfig, manifold: &Manifold, n: usize) -> Result<SweepRow, CliError> {
    let (objective, ms) = optimize(config, manifold, n)?;
    let basis = objective.basis().expect("torus objective is spectral");
    let weyl = weyl_report(&ms.best.config, basis)?;
    let modes = config.diagnostics_modes;
    Ok(SweepRow {
        n,
        best_energy: ms.best.energy.value,
        mean_level: weyl.mean_level,
        certified: weyl.certified_below_mean,
        max_w: weyl.max_w(modes),
        max_w_sqrt_n: weyl.max_scaled_w(modes),
        max_c: weyl.max_constant(modes),
        bound_ok: weyl.all_pass,
        status: format!("{:?}", ms.best.termination).to_lowercase(),
    })
}

/// Run the sweep and return its rows; failures land in the `status` column.
pub fn sweep_rows(config: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let manifold = config.manifold()?;
    if manifold.as_torus().is_none() {
        return Err(Error::UnsupportedModel("sweep tabulates Weyl sums, which need a flat torus".into()).into());
    }
    let mut rows = Vec::new();
    for &n in &config.sweep_n_values {
        match sweep_row(config, &manifold, n) {
            Ok(row) => rows.push(row),
            Err(CliError::Core(e @ Error::ResourceLimit { .. })) => return Err(e.into()),
            Err(e) => rows.push(SweepRow {
                n,
                best_energy: f64::NAN,
                mean_level: f64::NAN,
                certified: false,
                max_w: f64::NAN,
                max_w_sqrt_n: f64::NAN,
                max_c: f64::NAN,
                bound_ok: false,
                status: format!("error: {e}").replace(',', ";"),
            }),
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{},{}",
            r.n, r.best_energy, r.mean_level, r.certified, r.max_w, r.max_w_sqrt_n, r.max_c, r.bound_ok, r.status
        );
    }
    out
}

pub fn cmd_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let rows = sweep_rows(config)?;
    let csv = write_file(&config.output_dir, "sweep.csv", &sweep_csv(&rows))?;
    let doc = write_document(config, "sweep", &rows)?;
    let certified = rows.iter().filter(|r| r.certified).count();
    Ok(Outcome {
        summary: format!("sweep: {} rows, {certified} certified", rows.len()),
        files: vec![doc, csv],
    })
}

#[derive(Serialize)]
struct AuditOutput {
    passes: bool,
    shells_even: bool,
    systole: f64,
    audit: GroupAudit,
}

pub fn cmd_group_audit(config: &RunConfig) -> Result<Outcome, CliError> {
    let manifold = config.manifold()?;
    let Manifold::Hyperbolic(surface) = &manifold else {
        return Err(Error::UnsupportedModel("group-audit needs a hyperbolic surface (`manifold = bolza`)".into()).into());
    };
    let audit = surface.audit(config.audit_radius)?;
    let output = AuditOutput {
        passes: audit.passes(),
        shells_even: audit.shells_even(),
        systole: surface.systole(),
        audit,
    };
    let doc = write_document(config, "group-audit", &output)?;
    Ok(Outcome {
        summary: format!(
            "group-audit: {} elements within {} relation={:.3e} area_error={:.3e} {}",
            output.audit.element_count,
            output.audit.radius,
            output.audit.relation_residual,
            output.audit.area_error,
            if output.passes { "PASS" } else { "FAIL" }
        ),
        files: vec![doc],
    })
}
