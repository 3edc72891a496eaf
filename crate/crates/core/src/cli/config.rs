//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, lists are comma separated.
//! Keys are dotted (`kernel.t`, `optimizer.restarts`). Unknown and repeated
//! keys are rejected with the line number.
//!
//! ```text
//! manifold = torus
//! manifold.periods = 1.0, 1.0
//! kernel.t = 0.05
//! n = 16
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::kernels::KernelPair;
use crate::manifolds::Manifold;
use crate::optimize::OptimizeParams;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldSpec {
    Torus { periods: Vec<f64> },
    Bolza,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    pub kernel_family: String,
    pub kernel_t: f64,
    pub n: Option<usize>,
    pub seed: u64,
    pub deterministic: bool,
    pub optimizer: OptimizeParams,
    pub eps_geo: f64,
    pub eps_spec: f64,
    pub pretrace_samples: usize,
    /// Monte Carlo samples for the mean-energy check in `diagnose`; 0 skips it.
    pub diagnostics_samples: usize,
    /// Number of lowest modes summarized by `sweep`.
    pub diagnostics_modes: usize,
    pub sweep_n_values: Vec<usize>,
    pub audit_radius: f64,
    /// Not echoed: where results go does not affect them.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

const KEYS: &[&str] = &[
    "manifold",
    "manifold.periods",
    "kernel.family",
    "kernel.t",
    "n",
    "seed",
    "deterministic",
    "optimizer.max_iters",
    "optimizer.grad_tol",
    "optimizer.armijo_c",
    "optimizer.backtrack_factor",
    "optimizer.initial_step",
    "optimizer.restarts",
    "tolerance.eps_geo",
    "tolerance.eps_spec",
    "pretrace.samples",
    "diagnostics.samples",
    "diagnostics.modes",
    "sweep.n_values",
    "audit.radius",
    "output.dir",
];

struct Entry {
    line: usize,
    value: String,
}

struct Table(BTreeMap<String, Entry>);

impl Table {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                ConfigError(format!("line {}: invalid value `{}` for `{key}`", e.line, e.value))
            }),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get(key)?
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.0.get(key) else { return Ok(None) };
        if e.value.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        e.value
            .split(',')
            .map(|item| {
                item.trim().parse().map_err(|_| {
                    ConfigError(format!("line {}: invalid list item `{}` for `{key}`", e.line, item.trim()))
                })
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.line)
    }
}

fn parse_table(text: &str) -> Result<Table, ConfigError> {
    let mut table = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError(format!("line {line}: expected `key = value`, got `{content}`")));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError(format!("line {line}: unknown key `{key}`")));
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = table.insert(key.to_string(), entry) {
            return Err(ConfigError(format!(
                "line {line}: key `{key}` already set on line {}",
                prev.line
            )));
        }
    }
    Ok(Table(table))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table = parse_table(text)?;
        let manifold = match table.required::<String>("manifold")?.as_str() {
            "torus" => {
                let periods: Vec<f64> = table
                    .list("manifold.periods")?
                    .ok_or_else(|| ConfigError("missing required key `manifold.periods`".into()))?;
                ManifoldSpec::Torus { periods }
            }
            "bolza" => {
                if table.0.contains_key("manifold.periods") {
                    return Err(ConfigError(format!(
                        "line {}: `manifold.periods` does not apply to `bolza`",
                        table.line("manifold.periods")
                    )));
                }
                ManifoldSpec::Bolza
            }
            other => {
                return Err(ConfigError(format!(
                    "line {}: unknown manifold `{other}` (expected `torus` or `bolza`)",
                    table.line("manifold")
                )))
            }
        };
        let kernel_family = table.or("kernel.family", "heat".to_string())?;
        if kernel_family != "heat" {
            return Err(ConfigError(format!(
                "line {}: unknown kernel family `{kernel_family}` (only `heat` is available)",
                table.line("kernel.family")
            )));
        }
        let defaults = OptimizeParams::default();
        let seed = table.or("seed", 0u64)?;
        let config = RunConfig {
            manifold,
            kernel_family,
            kernel_t: table.required("kernel.t")?,
            n: table.get("n")?,
            seed,
            deterministic: table.or("deterministic", true)?,
            optimizer: OptimizeParams {
                max_iters: table.or("optimizer.max_iters", defaults.max_iters)?,
                grad_tol: table.or("optimizer.grad_tol", defaults.grad_tol)?,
                armijo_c: table.or("optimizer.armijo_c", defaults.armijo_c)?,
                backtrack_factor: table.or("optimizer.backtrack_factor", defaults.backtrack_factor)?,
                initial_step: table.or("optimizer.initial_step", defaults.initial_step)?,
                seed,
                restarts: table.or("optimizer.restarts", defaults.restarts)?,
            },
            eps_geo: table.or("tolerance.eps_geo", 1e-10)?,
            eps_spec: table.or("tolerance.eps_spec", 1e-10)?,
            pretrace_samples: table.or("pretrace.samples", 20)?,
            diagnostics_samples: table.or("diagnostics.samples", 200)?,
            diagnostics_modes: table.or("diagnostics.modes", 10)?,
            sweep_n_values: table.list("sweep.n_values")?.unwrap_or_default(),
            audit_radius: table.or("audit.radius", 6.0)?,
            output_dir: table.or("output.dir", PathBuf::from("out"))?,
        };
        config.check(&table)?;
        Ok(config)
    }

    fn check(&self, table: &Table) -> Result<(), ConfigError> {
        let bad = |key: &str, why: &str| Err(ConfigError(format!("line {}: `{key}` {why}", table.line(key))));
        if !(self.kernel_t > 0.0 && self.kernel_t.is_finite()) {
            return bad("kernel.t", "must be positive");
        }
        if self.n == Some(0) {
            return bad("n", "must be at least 1");
        }
        for key in ["tolerance.eps_geo", "tolerance.eps_spec"] {
            let v = if key.ends_with("geo") { self.eps_geo } else { self.eps_spec };
            if !(v > 0.0) {
                return bad(key, "must be positive");
            }
        }
        if self.optimizer.restarts == 0 {
            return bad("optimizer.restarts", "must be at least 1");
        }
        if let Err(e) = self.optimizer.validate() {
            return Err(ConfigError(format!("optimizer: {e}")));
        }
        if self.sweep_n_values.contains(&0) {
            return bad("sweep.n_values", "entries must be at least 1");
        }
        if !(self.audit_radius > 0.0) {
            return bad("audit.radius", "must be positive");
        }
        if self.pretrace_samples == 0 {
            return bad("pretrace.samples", "must be at least 1");
        }
        if self.diagnostics_samples != 0 && self.diagnostics_samples < 100 {
            return bad("diagnostics.samples", "must be 0 or at least 100");
        }
        Ok(())
    }

    pub fn manifold(&self) -> crate::Result<Manifold> {
        match &self.manifold {
            ManifoldSpec::Torus { periods } => Manifold::torus(periods.clone()),
            ManifoldSpec::Bolza => Manifold::bolza(),
        }
    }

    pub fn kernel(&self, dim: usize) -> crate::Result<KernelPair> {
        KernelPair::heat(self.kernel_t, dim)
    }

    /// Point count for commands that need one.
    pub fn require_n(&self) -> Result<usize, ConfigError> {
        self.n.ok_or_else(|| ConfigError("missing required key `n`".into()))
    }

    /// Apply a `--seed` override to both the run seed and the optimizer.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.optimizer.seed = seed;
    }
}
