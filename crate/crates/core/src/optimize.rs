//! Riemannian gradient descent with Armijo backtracking, seeded multistart,
//! and the below-mean certificate.
//!
//! The objective is the spectral form on tori and the geometric form on the
//! hyperbolic surface. Steps move every point along the exact exponential map
//! and reduce it back to the canonical domain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{energy_spectral, gradient_spectral, Configuration, EnergyReport, GeometricEvaluator};
use crate::error::{domain, Error, Result};
use crate::kernels::{spectral_truncation, KernelPair};
use crate::manifolds::{Manifold, Point};
use crate::spectrum::{build_basis, SpectralBasis};

/// Smallest trial step before the line search gives up.
pub const MIN_STEP: f64 = 1e-16;
const MAX_STEP: f64 = 1e6;
/// Restarts whose final energies differ by less than this count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeParams {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-8,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            initial_step: 1.0,
            seed: 0,
            restarts: 16,
        }
    }
}

impl OptimizeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return domain("max_iters must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return domain(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return domain(format!("armijo_c must lie in (0, 1), got {}", self.armijo_c));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return domain(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            ));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return domain(format!("initial_step must be positive, got {}", self.initial_step));
        }
        Ok(())
    }
}

/// What the descent minimizes.
#[derive(Clone, Debug)]
pub enum Objective {
    Spectral(SpectralBasis),
    Geometric(GeometricEvaluator),
}

impl Objective {
    /// Spectral objective on a torus, geometric objective on the hyperbolic
    /// surface, each truncated to its tolerance for `n_points` points.
    pub fn for_model(
        manifold: &Manifold,
        kernel: &KernelPair,
        n_points: usize,
        eps_geo: f64,
        eps_spec: f64,
    ) -> Result<Self> {
        match manifold {
            Manifold::Torus(t) => {
                let lambda = spectral_truncation(kernel, t.periods(), n_points, eps_spec)?;
                Ok(Objective::Spectral(build_basis(manifold, kernel, lambda)?))
            }
            Manifold::Hyperbolic(_) => Ok(Objective::Geometric(GeometricEvaluator::new(
                manifold, kernel, n_points, eps_geo,
            )?)),
        }
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            Objective::Spectral(b) => Manifold::Torus(b.torus().clone()),
            Objective::Geometric(g) => g.manifold().clone(),
        }
    }

    pub fn basis(&self) -> Option<&SpectralBasis> {
        match self {
            Objective::Spectral(b) => Some(b),
            Objective::Geometric(_) => None,
        }
    }

    pub fn energy(&self, config: &Configuration) -> Result<EnergyReport> {
        match self {
            Objective::Spectral(b) => energy_spectral(config, b),
            Objective::Geometric(g) => g.energy(config),
        }
    }

    /// Riemannian gradient in the orthonormal frame at each point.
    pub fn gradient(&self, config: &Configuration) -> Result<Vec<Vec<f64>>> {
        match self {
            Objective::Spectral(b) => gradient_spectral(config, b),
            Objective::Geometric(g) => Ok(g
                .forces(config)?
                .into_iter()
                .map(|f| f.into_iter().map(|x| -2.0 * x).collect())
                .collect()),
        }
    }

    /// Stopping residual: the gradient sup-norm on tori, the force sup-norm on
    /// the hyperbolic surface.
    pub fn residual(&self, gradient: &[Vec<f64>]) -> f64 {
        let sup = gradient.iter().map(|g| norm(g)).fold(0.0, f64::max);
        match self {
            Objective::Spectral(_) => sup,
            Objective::Geometric(_) => sup / 2.0,
        }
    }

    /// `(N/V) Σ a_m`, the mean energy of uniformly random configurations.
    pub fn mean_level(&self, n_points: usize) -> Option<f64> {
        self.basis()
            .map(|b| n_points as f64 / b.volume() * b.weight_sum())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No step down to the minimum step length decreased the energy.
    Stagnated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub energy: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub config: Configuration,
    pub energy: EnergyReport,
    pub residual_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Energy at or below `(N/V) Σ a_m`; `None` for the geometric objective.
    pub certified_below_mean: Option<bool>,
    pub mean_level: Option<f64>,
    pub trace: Vec<TraceEntry>,
}

fn step_all(manifold: &Manifold, config: &Configuration, gradient: &[Vec<f64>], step: f64) -> Result<Configuration> {
    let points = config
        .points()
        .iter()
        .zip(gradient)
        .map(|(p, g)| {
            let v: Vec<f64> = g.iter().map(|x| -step * x).collect();
            manifold.retract(p, &v)
        })
        .collect::<Result<Vec<Point>>>()?;
    Configuration::new(points)
}

/// Gradient descent from `start` with Armijo backtracking.
///
/// Each iteration first tries the last accepted step enlarged by
/// `1/backtrack_factor`, starting from `initial_step`.
pub fn minimize(objective: &Objective, start: &Configuration, params: &OptimizeParams) -> Result<OptimizeResult> {
    params.validate()?;
    let manifold = objective.manifold();
    start.validate(&manifold)?;
    let mut config = start.clone();
    let mut energy = objective.energy(&config)?;
    let mut gradient = objective.gradient(&config)?;
    let mut residual = objective.residual(&gradient);
    let mut trace = vec![TraceEntry {
        energy: energy.value,
        residual,
    }];
    let mut step = params.initial_step;
    let mut iterations = 0;
    let termination = loop {
        if residual <= params.grad_tol {
            break Termination::Converged;
        }
        if iterations >= params.max_iters {
            break Termination::MaxIterations;
        }
        let slope: f64 = gradient.iter().flatten().map(|x| x * x).sum();
        let mut trial_step = step;
        let accepted = loop {
            let trial = step_all(&manifold, &config, &gradient, trial_step)?;
            let trial_energy = objective.energy(&trial)?;
            if energy.value - trial_energy.value >= params.armijo_c * trial_step * slope {
                break Some((trial, trial_energy));
            }
            trial_step *= params.backtrack_factor;
            if trial_step < MIN_STEP {
                break None;
            }
        };
        let Some((next, next_energy)) = accepted else {
            break Termination::Stagnated;
        };
        config = next;
        energy = next_energy;
        gradient = objective.gradient(&config)?;
        residual = objective.residual(&gradient);
        iterations += 1;
        trace.push(TraceEntry {
            energy: energy.value,
            residual,
        });
        step = (trial_step / params.backtrack_factor).min(MAX_STEP);
    };
    let mean_level = objective.mean_level(config.len());
    Ok(OptimizeResult {
        certified_below_mean: mean_level.map(|m| energy.value <= m),
        mean_level,
        config,
        energy,
        residual_norm: residual,
        iterations,
        termination,
        trace,
    })
}

/// `n` i.i.d. points from the normalized volume measure, seeded.
pub fn uniform_random_configuration(manifold: &Manifold, n: usize, seed: u64) -> Result<Configuration> {
    if n == 0 {
        return domain("point count must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Configuration::new((0..n).map(|_| manifold.sample_uniform(&mut rng)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultistartResult {
    pub best: OptimizeResult,
    pub best_restart: usize,
    /// Final energy of every restart, `None` where the run failed.
    pub final_energies: Vec<Option<f64>>,
    pub failures: Vec<String>,
}

/// Run `params.restarts` descents from uniform random starts seeded
/// `seed, seed+1, …` and keep the lowest final energy (ties go to the lowest
/// restart index). With `parallel` set the restarts run on the rayon pool;
/// results are merged in restart order either way.
pub fn multistart(objective: &Objective, n: usize, params: &OptimizeParams, parallel: bool) -> Result<MultistartResult> {
    params.validate()?;
    if params.restarts == 0 {
        return domain("multistart needs at least one restart");
    }
    let manifold = objective.manifold();
    let run = |k: usize| -> Result<OptimizeResult> {
        let seed = params.seed.wrapping_add(k as u64);
        let start = uniform_random_configuration(&manifold, n, seed)?;
        minimize(objective, &start, params)
    };
    let runs: Vec<Result<OptimizeResult>> = if parallel {
        (0..params.restarts).into_par_iter().map(run).collect()
    } else {
        (0..params.restarts).map(run).collect()
    };
    let mut best: Option<(usize, OptimizeResult)> = None;
    let mut final_energies = Vec::with_capacity(runs.len());
    let mut failures = Vec::new();
    let mut first_error = None;
    for (k, outcome) in runs.into_iter().enumerate() {
        match outcome {
            Ok(result) => {
                final_energies.push(Some(result.energy.value));
                let better = best
                    .as_ref()
                    .map_or(true, |(_, b)| result.energy.value < b.energy.value - TIE_TOLERANCE);
                if better {
                    best = Some((k, result));
                }
            }
            Err(e) => {
                final_energies.push(None);
                failures.push(format!("restart {k}: {e}"));
                first_error.get_or_insert(e);
            }
        }
    }
    match best {
        Some((best_restart, best)) => Ok(MultistartResult {
            best,
            best_restart,
            final_energies,
            failures,
        }),
        None => Err(first_error.unwrap_or_else(|| Error::Domain("no restart completed".into()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_objective(n: usize, t: f64) -> Objective {
        let m = Manifold::torus(vec![1.0]).unwrap();
        let k = KernelPair::heat(t, 1).unwrap();
        Objective::for_model(&m, &k, n, 1e-12, 1e-12).unwrap()
    }

    fn circular_gap(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(1.0);
        d.min(1.0 - d)
    }

    #[test]
    fn pair_on_circle_becomes_antipodal() {
        let obj = circle_objective(2, 0.05);
        let m = obj.manifold();
        let start = Configuration::from_coords(&m, &[vec![0.0], vec![0.3]]).unwrap();
        let params = OptimizeParams::default();
        let r = minimize(&obj, &start, &params).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        let pts = r.config.points();
        assert!((circular_gap(pts[0].0[0], pts[1].0[0]) - 0.5).abs() < 1e-6);
        assert!(r.residual_norm <= params.grad_tol);
        assert_eq!(r.certified_below_mean, Some(true));
        for w in r.trace.windows(2) {
            assert!(w[1].energy < w[0].energy);
        }
    }

    #[test]
    fn symmetric_start_stops_immediately() {
        let obj = circle_objective(4, 0.05);
        let m = obj.manifold();
        let coords: Vec<Vec<f64>> = (0..4).map(|i| vec![0.1 + i as f64 / 4.0]).collect();
        let start = Configuration::from_coords(&m, &coords).unwrap();
        let r = minimize(&obj, &start, &OptimizeParams::default()).unwrap();
        assert!(r.iterations <= 1);
        assert_eq!(r.termination, Termination::Converged);
    }

    #[test]
    fn coincident_start_stagnates_honestly() {
        let obj = circle_objective(2, 0.05);
        let m = obj.manifold();
        let start = Configuration::from_coords(&m, &[vec![0.2], vec![0.2]]).unwrap();
        let params = OptimizeParams {
            grad_tol: 1e-300,
            ..OptimizeParams::default()
        };
        let r = minimize(&obj, &start, &params).unwrap();
        // the gradient vanishes by symmetry, so no descent direction exists
        assert_ne!(r.termination, Termination::MaxIterations);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let obj = circle_objective(2, 0.05);
        let start = uniform_random_configuration(&obj.manifold(), 2, 1).unwrap();
        for bad in [
            OptimizeParams { armijo_c: 1.0, ..Default::default() },
            OptimizeParams { backtrack_factor: 0.0, ..Default::default() },
            OptimizeParams { initial_step: -1.0, ..Default::default() },
            OptimizeParams { grad_tol: 0.0, ..Default::default() },
            OptimizeParams { max_iters: 0, ..Default::default() },
        ] {
            assert!(minimize(&obj, &start, &bad).is_err());
        }
        let no_restarts = OptimizeParams { restarts: 0, ..Default::default() };
        assert!(multistart(&obj, 2, &no_restarts, false).is_err());
    }

    #[test]
    fn single_restart_matches_direct_minimize() {
        let obj = circle_objective(3, 0.05);
        let params = OptimizeParams {
            restarts: 1,
            seed: 42,
            ..Default::default()
        };
        let ms = multistart(&obj, 3, &params, false).unwrap();
        let start = uniform_random_configuration(&obj.manifold(), 3, 42).unwrap();
        let direct = minimize(&obj, &start, &params).unwrap();
        assert_eq!(ms.best, direct);
    }

    #[test]
    fn parallel_and_sequential_restarts_agree() {
        let obj = circle_objective(3, 0.05);
        let params = OptimizeParams {
            restarts: 6,
            seed: 7,
            ..Default::default()
        };
        let a = multistart(&obj, 3, &params, false).unwrap();
        let b = multistart(&obj, 3, &params, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_torus_samples_have_centred_means() {
        let m = Manifold::torus(vec![1.0, 1.0]).unwrap();
        let c = uniform_random_configuration(&m, 100_000, 3).unwrap();
        for axis in 0..2 {
            let mean = c.points().iter().map(|p| p.0[axis]).sum::<f64>() / 1e5;
            assert!((mean - 0.5).abs() < 0.01);
        }
        assert_eq!(c, uniform_random_configuration(&m, 100_000, 3).unwrap());
    }
}
