//! Energies of point configurations and the repelling force field.
//!
//! Two evaluators are provided:
//!
//! * the spectral form `Σ_m a_m |S_m|²` over the nonconstant torus modes;
//! * the geometric form, summing `k(L)` over every connecting geodesic between
//!   ordered pairs of points, including the nontrivial loops at each point.
//!
//! The geometric sum leaves out the zero-length identity loop at each point.
//! That term contributes the constant `N·k(0)` and has no direction, so it
//! never affects forces. On a torus the two forms then satisfy
//!
//! ```text
//! E_geo + N·k(0) = N²·h(0)/V + E_spec
//! ```
//!
//! up to the certified truncation tails, which [`pretrace_residual`] checks.
//!
//! Summing over ordered pairs means the gradient of `E_geo` with respect to a
//! point is `-2` times the net force on it.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{geometric_tail_bound, geometric_truncation_radius, KernelPair};
use crate::manifolds::{Manifold, Point};
use crate::spectrum::SpectralBasis;
use crate::sum::{CompensatedSum, CompensatedVector};

/// Ordered list of points on one manifold.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Configuration {
    points: Vec<Point>,
}

impl Configuration {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return domain("a configuration needs at least one point");
        }
        Ok(Self { points })
    }

    /// Reduce raw chart coordinates onto `manifold`.
    pub fn from_coords(manifold: &Manifold, coords: &[Vec<f64>]) -> Result<Self> {
        let points = coords
            .iter()
            .map(|c| manifold.reduce(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self, manifold: &Manifold) -> Result<()> {
        self.points.iter().try_for_each(|p| manifold.check_reduced(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Conventions {
    /// The zero-length loop of each point at itself is left out.
    pub identity_loops_excluded: bool,
    /// The constant eigenfunction is left out of the spectral sum.
    pub constant_mode_excluded: bool,
}

impl Conventions {
    pub const STANDARD: Conventions = Conventions {
        identity_loops_excluded: true,
        constant_mode_excluded: true,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    pub tail_bound: f64,
    pub conventions: Conventions,
}

/// `Σ_m a_m |S_m|²` over the modes of `basis`.
pub fn energy_spectral(config: &Configuration, basis: &SpectralBasis) -> Result<EnergyReport> {
    check_torus_points(config, basis)?;
    let mut acc = CompensatedSum::new();
    for mode in basis.modes() {
        acc.add(mode.weight * basis.weyl_amplitude(mode, config.points()).norm_sqr());
    }
    let n = config.len() as f64;
    Ok(EnergyReport {
        value: acc.value(),
        tail_bound: n * n / basis.volume() * basis.weight_tail(),
        conventions: Conventions::STANDARD,
    })
}

/// Chart gradient of the spectral energy with respect to each point:
/// `Σ_m a_m · 2 Re(conj(S_m) ∇φ_m(x_i))`.
pub fn gradient_spectral(config: &Configuration, basis: &SpectralBasis) -> Result<Vec<Vec<f64>>> {
    check_torus_points(config, basis)?;
    let amplitudes = basis.weyl_amplitudes(config.points());
    let periods = basis.torus().periods();
    let dim = periods.len();
    let norm = basis.volume().powf(-0.5);
    // ∇φ_m = 2πi (m/ℓ) φ_m, so each term is -4π (m/ℓ) a_m Im(conj(S_m) φ_m)
    let frequencies: Vec<Vec<f64>> = basis
        .modes()
        .iter()
        .map(|m| {
            m.index
                .iter()
                .zip(periods)
                .map(|(&mk, l)| -4.0 * std::f64::consts::PI * mk as f64 / l * m.weight)
                .collect()
        })
        .collect();
    let mut term = vec![0.0; dim];
    Ok(config
        .points()
        .iter()
        .map(|p| {
            let mut grad = CompensatedVector::zeros(dim);
            for ((mode, s), freq) in basis.modes().iter().zip(&amplitudes).zip(&frequencies) {
                let (sin, cos) = basis.phase(mode, &p.0).sin_cos();
                let im = norm * (s.re * sin - s.im * cos);
                for (slot, f) in term.iter_mut().zip(freq) {
                    *slot = f * im;
                }
                grad.add_scaled(1.0, &term);
            }
            grad.value()
        })
        .collect())
}

pub(crate) fn check_torus_points(config: &Configuration, basis: &SpectralBasis) -> Result<()> {
    let torus = basis.torus();
    for p in config.points() {
        if !torus.is_reduced(&p.0) {
            return domain(format!("point {:?} is not reduced on the basis torus", p.0));
        }
    }
    Ok(())
}

/// Geometric energy and force evaluation at a fixed truncation radius.
///
/// The radius is chosen once so that the combined tail over all `N²` ordered
/// pair sums stays below `eps`; keeping it fixed makes the truncated energy a
/// single smooth function for the optimizer.
#[derive(Clone, Debug)]
pub struct GeometricEvaluator {
    manifold: Manifold,
    kernel: KernelPair,
    n_points: usize,
    radius: f64,
    per_sum_tail: f64,
}

impl GeometricEvaluator {
    pub fn new(manifold: &Manifold, kernel: &KernelPair, n_points: usize, eps: f64) -> Result<Self> {
        if n_points == 0 {
            return domain("point count must be at least 1");
        }
        if kernel.dim != manifold.dim() {
            return domain(format!(
                "kernel dimension {} does not match manifold dimension {}",
                kernel.dim,
                manifold.dim()
            ));
        }
        let growth = manifold.growth();
        let pairs = (n_points * n_points) as f64;
        let radius = geometric_truncation_radius(kernel, &growth, eps / pairs)?;
        Ok(Self {
            manifold: manifold.clone(),
            kernel: *kernel,
            n_points,
            radius,
            per_sum_tail: geometric_tail_bound(kernel, &growth, radius),
        })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn kernel(&self) -> &KernelPair {
        &self.kernel
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn check(&self, config: &Configuration) -> Result<()> {
        if config.len() != self.n_points {
            return domain(format!(
                "evaluator prepared for {} points, configuration has {}",
                self.n_points,
                config.len()
            ));
        }
        config.validate(&self.manifold)
    }

    pub fn energy(&self, config: &Configuration) -> Result<EnergyReport> {
        self.check(config)?;
        let mut acc = CompensatedSum::new();
        let pts = config.points();
        for (i, p) in pts.iter().enumerate() {
            for (j, q) in pts.iter().enumerate() {
                self.manifold.visit_geodesics(p, q, self.radius, i == j, |len, _| {
                    acc.add(self.kernel.potential_unchecked(len))
                })?;
            }
        }
        let n = pts.len() as f64;
        Ok(EnergyReport {
            value: acc.value(),
            tail_bound: n * n * self.per_sum_tail,
            conventions: Conventions::STANDARD,
        })
    }

    /// Net repelling vector `Σ H(L) V` at point `i`, in the orthonormal frame.
    pub fn force_at(&self, config: &Configuration, i: usize) -> Result<Vec<f64>> {
        self.check(config)?;
        if i >= config.len() {
            return domain(format!("point index {i} out of range for {} points", config.len()));
        }
        self.force_unchecked(config, i)
    }

    fn force_unchecked(&self, config: &Configuration, i: usize) -> Result<Vec<f64>> {
        let pts = config.points();
        let mut acc = CompensatedVector::zeros(self.manifold.dim());
        for (j, q) in pts.iter().enumerate() {
            self.manifold
                .visit_geodesics(&pts[i], q, self.radius, i == j, |len, dir| {
                    acc.add_scaled(self.kernel.force_magnitude_unchecked(len), dir)
                })?;
        }
        Ok(acc.value())
    }

    pub fn forces(&self, config: &Configuration) -> Result<Vec<Vec<f64>>> {
        self.check(config)?;
        (0..config.len()).map(|i| self.force_unchecked(config, i)).collect()
    }

    /// Bound on the truncation error of each force vector.
    pub fn force_tail_bound(&self) -> f64 {
        self.n_points as f64 * self.per_sum_tail
    }
}

pub fn energy_geometric(
    config: &Configuration,
    manifold: &Manifold,
    kernel: &KernelPair,
    eps: f64,
) -> Result<EnergyReport> {
    GeometricEvaluator::new(manifold, kernel, config.len(), eps)?.energy(config)
}

pub fn force_at(
    config: &Configuration,
    i: usize,
    manifold: &Manifold,
    kernel: &KernelPair,
    eps: f64,
) -> Result<Vec<f64>> {
    GeometricEvaluator::new(manifold, kernel, config.len(), eps)?.force_at(config, i)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PretraceReport {
    pub geometric: EnergyReport,
    pub spectral: EnergyReport,
    /// `N·k(0)`, the identity loops left out of the geometric sum.
    pub identity_term: f64,
    /// `N²·h(0)/V`, the constant mode left out of the spectral sum.
    pub constant_mode_term: f64,
    pub residual: f64,
    pub budget: f64,
}

impl PretraceReport {
    pub fn within_budget(&self) -> bool {
        self.residual.abs() <= self.budget
    }
}

/// `(E_geo + N·k(0)) − (N²·h(0)/V + E_spec)` on a torus, with the combined
/// certified tail of both sides as the budget.
pub fn pretrace_residual(
    config: &Configuration,
    manifold: &Manifold,
    kernel: &KernelPair,
    basis: &SpectralBasis,
    eps_geo: f64,
) -> Result<PretraceReport> {
    if manifold.as_torus().is_none() {
        return Err(Error::UnsupportedModel(
            "the pretrace identity is checked on flat tori only".into(),
        ));
    }
    basis.check_manifold(manifold)?;
    if basis.kernel() != kernel {
        return domain("spectral basis was built for a different kernel");
    }
    let geometric = energy_geometric(config, manifold, kernel, eps_geo)?;
    let spectral = energy_spectral(config, basis)?;
    let n = config.len() as f64;
    let identity_term = n * kernel.peak();
    let constant_mode_term = n * n * kernel.spectral_weight_unchecked(0.0) / manifold.volume();
    let lhs = geometric.value + identity_term;
    let rhs = constant_mode_term + spectral.value;
    Ok(PretraceReport {
        geometric,
        spectral,
        identity_term,
        constant_mode_term,
        residual: lhs - rhs,
        budget: geometric.tail_bound + spectral.tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::spectral_truncation;
    use crate::spectrum::build_basis;

    fn circle() -> Manifold {
        Manifold::torus(vec![1.0]).unwrap()
    }

    fn config(m: &Manifold, coords: &[&[f64]]) -> Configuration {
        let c: Vec<Vec<f64>> = coords.iter().map(|x| x.to_vec()).collect();
        Configuration::from_coords(m, &c).unwrap()
    }

    fn basis_for(m: &Manifold, k: &KernelPair, n: usize, eps: f64) -> SpectralBasis {
        let lambda = spectral_truncation(k, m.as_torus().unwrap().periods(), n, eps).unwrap();
        build_basis(m, k, lambda).unwrap()
    }

    #[test]
    fn single_point_spectral_energy_is_position_free() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let b = basis_for(&m, &k, 1, 1e-14);
        for x in [0.0, 0.123, 0.5, 0.999] {
            let e = energy_spectral(&config(&m, &[&[x]]), &b).unwrap();
            assert!((e.value - b.weight_sum()).abs() < 1e-14);
        }
    }

    #[test]
    fn antipodal_and_coincident_pairs() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let b = basis_for(&m, &k, 2, 1e-14);
        let even: f64 = b
            .modes()
            .iter()
            .filter(|mode| mode.index[0] % 2 == 0)
            .map(|mode| mode.weight)
            .sum();
        let anti = energy_spectral(&config(&m, &[&[0.1], &[0.6]]), &b).unwrap();
        assert!((anti.value - 4.0 * even).abs() < 1e-14);
        let same = energy_spectral(&config(&m, &[&[0.3], &[0.3]]), &b).unwrap();
        assert!((same.value - 4.0 * b.weight_sum()).abs() < 1e-13);
    }

    #[test]
    fn single_point_geometric_energy_by_lattice_sum() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let direct: f64 = (1..50).map(|j| 2.0 * k.potential(j as f64).unwrap()).sum();
        for x in [0.0, 0.41, 0.77] {
            let e = energy_geometric(&config(&m, &[&[x]]), &m, &k, 1e-13).unwrap();
            assert!((e.value - direct).abs() < 1e-13);
            assert!((e.value - 2.0 * k.potential(1.0).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn pair_geometric_energy_by_lattice_sum() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let e = energy_geometric(&config(&m, &[&[0.2], &[0.7]]), &m, &k, 1e-13).unwrap();
        let mut direct = 0.0;
        for j in -40i64..=40 {
            direct += 2.0 * k.potential((0.5 + j as f64).abs()).unwrap();
            if j != 0 {
                direct += 2.0 * k.potential(j.unsigned_abs() as f64).unwrap();
            }
        }
        assert!((e.value - direct).abs() < 1e-13);
    }

    #[test]
    fn symmetric_forces_vanish() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let one = config(&m, &[&[0.3]]);
        assert!(force_at(&one, 0, &m, &k, 1e-12).unwrap()[0].abs() < 1e-14);
        let two = config(&m, &[&[0.1], &[0.6]]);
        for i in 0..2 {
            assert!(force_at(&two, i, &m, &k, 1e-12).unwrap()[0].abs() < 1e-12);
        }
    }

    #[test]
    fn pair_force_points_away() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let c = config(&m, &[&[0.0], &[0.3]]);
        let f0 = force_at(&c, 0, &m, &k, 1e-13).unwrap()[0];
        let f1 = force_at(&c, 1, &m, &k, 1e-13).unwrap()[0];
        // the nearer neighbour sits at +0.3 from point 0, so it pushes it negative
        let mut expected = 0.0;
        for j in -40i64..=40 {
            let v = 0.3 + j as f64;
            expected -= v.signum() * k.force_magnitude(v.abs()).unwrap();
        }
        assert!(f0 < 0.0 && f1 > 0.0);
        assert!((f0 - expected).abs() < 1e-13);
        assert!((f0 + f1).abs() < 1e-13);
    }

    #[test]
    fn pretrace_single_point_circle() {
        let m = circle();
        let k = KernelPair::heat(0.05, 1).unwrap();
        let b = basis_for(&m, &k, 1, 1e-12);
        let r = pretrace_residual(&config(&m, &[&[0.25]]), &m, &k, &b, 1e-12).unwrap();
        assert!(r.residual.abs() < 2e-12, "{r:?}");
        assert!(r.within_budget());
    }

    #[test]
    fn heavy_smoothing_approaches_uniform() {
        let m = Manifold::torus(vec![1.0, 1.0]).unwrap();
        let k = KernelPair::heat(5.0, 2).unwrap();
        let b = basis_for(&m, &k, 3, 1e-12);
        let c = config(&m, &[&[0.1, 0.2], &[0.5, 0.9], &[0.3, 0.3]]);
        let r = pretrace_residual(&c, &m, &k, &b, 1e-12).unwrap();
        assert!(r.within_budget(), "{r:?}");
        assert!((r.geometric.value + r.identity_term - 9.0).abs() < 1e-10);
    }

    #[test]
    fn pretrace_rejects_hyperbolic() {
        let m = Manifold::bolza().unwrap();
        let t = Manifold::torus(vec![1.0, 1.0]).unwrap();
        let k = KernelPair::heat(0.1, 2).unwrap();
        let b = basis_for(&t, &k, 1, 1e-10);
        let c = Configuration::new(vec![Point(vec![0.0, 0.0])]).unwrap();
        assert!(matches!(
            pretrace_residual(&c, &m, &k, &b, 1e-10),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
