//! Radial kernels, the force law derived from them, their spectral weights,
//! and certified truncation bounds for the lattice/orbit and mode sums.
//!
//! A [`KernelPair`] bundles three functions of one bandwidth `t`:
//!
//! * the potential `k(ρ) = (4πt)^{-d/2} exp(-ρ²/4t)`,
//! * the repulsion magnitude `H(ρ) = -k'(ρ) = ρ/(2t) · k(ρ)`,
//! * the spectral weight `h(λ) = exp(-λt)` of a Laplace eigenvalue `λ`.
//!
//! On a flat torus `k` periodized over the lattice is exactly the spectral
//! expansion `Σ h(λ) φ(x) φ̄(y)` (Poisson summation), which is what the
//! pretrace checks in [`crate::energy`] rely on.
//!
//! Public interfaces speak in eigenvalues `λ` only. Readers used to the
//! spectral parameter `r` can translate with `λ = r² + ((n-1)/2)²`; nothing
//! in the crate depends on that convention.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Heat,
}

/// A potential / force / spectral-weight triple with bandwidth `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelPair {
    pub family: KernelFamily,
    pub t: f64,
    pub dim: usize,
}

impl KernelPair {
    pub fn heat(t: f64, dim: usize) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return domain(format!("kernel bandwidth must be positive, got {t}"));
        }
        if dim == 0 {
            return domain("kernel dimension must be at least 1");
        }
        Ok(Self {
            family: KernelFamily::Heat,
            t,
            dim,
        })
    }

    /// `k(0)`, the normalization of the potential.
    pub fn peak(&self) -> f64 {
        match self.family {
            KernelFamily::Heat => (4.0 * PI * self.t).powf(-(self.dim as f64) / 2.0),
        }
    }

    /// Potential `k(ρ)` at geodesic length `rho ≥ 0`.
    pub fn potential(&self, rho: f64) -> Result<f64> {
        check_length(rho)?;
        Ok(self.potential_unchecked(rho))
    }

    /// Repulsion magnitude `H(ρ) = -k'(ρ)`.
    pub fn force_magnitude(&self, rho: f64) -> Result<f64> {
        check_length(rho)?;
        Ok(self.force_magnitude_unchecked(rho))
    }

    /// Spectral weight `h(λ)` of the eigenvalue `lambda ≥ 0`.
    pub fn spectral_weight(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return domain(format!("eigenvalue must be nonnegative, got {lambda}"));
        }
        Ok(self.spectral_weight_unchecked(lambda))
    }

    #[inline]
    pub(crate) fn potential_unchecked(&self, rho: f64) -> f64 {
        match self.family {
            KernelFamily::Heat => self.peak() * (-rho * rho / (4.0 * self.t)).exp(),
        }
    }

    #[inline]
    pub(crate) fn force_magnitude_unchecked(&self, rho: f64) -> f64 {
        match self.family {
            KernelFamily::Heat => rho / (2.0 * self.t) * self.potential_unchecked(rho),
        }
    }

    #[inline]
    pub(crate) fn spectral_weight_unchecked(&self, lambda: f64) -> f64 {
        match self.family {
            KernelFamily::Heat => (-lambda * self.t).exp(),
        }
    }
}

fn check_length(rho: f64) -> Result<()> {
    if rho >= 0.0 {
        Ok(())
    } else {
        domain(format!("geodesic length must be nonnegative, got {rho}"))
    }
}

/// Upper bound `n(ρ) ≤ constant · e^{exponent·ρ} · (ρ+1)^degree` on the number of
/// lattice or orbit points within distance `ρ` of an arbitrary point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitGrowth {
    pub constant: f64,
    pub exponent: f64,
    pub degree: u32,
}

impl OrbitGrowth {
    /// Lattice `Π ℓ_k Z` in `R^d`: each coordinate contributes `2ρ/ℓ_k + 1`.
    pub fn lattice(periods: &[f64]) -> Self {
        Self {
            constant: periods.iter().map(|l| (2.0 / l).max(1.0)).product(),
            exponent: 0.0,
            degree: periods.len() as u32,
        }
    }
}

/// Bound on `∫_a^∞ e^{φ}` for concave `φ`, given `φ` and `φ'`.
///
/// Past a point `b` where `φ'(b) ≤ -1` the tangent line at `b` dominates `φ`;
/// on `[a, b]` the integrand is bounded by its maximum.
fn log_concave_tail(phi: impl Fn(f64) -> f64, dphi: impl Fn(f64) -> f64, a: f64) -> f64 {
    let mut b = a;
    let mut step = 0.125;
    while dphi(b) > -1.0 {
        b += step;
        step *= 1.5;
    }
    let peak = if dphi(a) <= 0.0 {
        phi(a)
    } else {
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dphi(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // concave: the maximum lies between the two bracket ends
        phi(lo).max(phi(hi)) + (hi - lo) * dphi(lo).max(0.0)
    };
    (b - a) * peak.exp() + phi(b).exp() / -dphi(b)
}

/// Certified bound on the tail `Σ_{ρ_n > R} max(k(ρ_n), H(ρ_n))` of one
/// lattice/orbit sum, where `ρ_n` ranges over points counted by `growth`.
///
/// Summation by parts turns the tail into `∫_R^∞ n(ρ) |f'(ρ)| dρ`; for both
/// `f = k` and `f = H` the derivative is dominated by
/// `max(1, 1/2t) · (1 + ρ/2t)² · k(ρ)`, whose product with the growth bound
/// is log-concave.
pub fn geometric_tail_bound(kernel: &KernelPair, growth: &OrbitGrowth, radius: f64) -> f64 {
    let t = kernel.t;
    let scale = (1.0f64).max(1.0 / (2.0 * t));
    let log_c = growth.constant.ln() + scale.ln() + kernel.peak().ln();
    let deg = growth.degree as f64;
    let g = growth.exponent;
    let phi = |rho: f64| {
        log_c + g * rho + deg * (rho + 1.0).ln() + 2.0 * (1.0 + rho / (2.0 * t)).ln()
            - rho * rho / (4.0 * t)
    };
    let dphi = |rho: f64| {
        g + deg / (rho + 1.0) + 2.0 / (2.0 * t + rho) - rho / (2.0 * t)
    };
    log_concave_tail(phi, dphi, radius)
}

const MAX_RADIUS: f64 = 1.0e4;

/// Smallest radius `R ≥ 1` on the half-integer grid whose geometric tail
/// bound is below `eps`.
pub fn geometric_truncation_radius(
    kernel: &KernelPair,
    growth: &OrbitGrowth,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return domain(format!("tail tolerance must be positive, got {eps}"));
    }
    let mut radius = 1.0;
    while radius <= MAX_RADIUS {
        if geometric_tail_bound(kernel, growth, radius) < eps {
            return Ok(radius);
        }
        radius += 0.5;
    }
    domain(format!("no truncation radius below {MAX_RADIUS} reaches tolerance {eps}"))
}

/// Certified bound on `Σ_{λ_m > λ_max} h(λ_m)` over the nonzero dual-lattice
/// modes of the torus with the given periods.
pub fn spectral_tail_bound(kernel: &KernelPair, periods: &[f64], lambda_max: f64) -> f64 {
    // modes m with |m/ℓ| ≤ u number at most Π max(2ℓ_k, 1) · (u+1)^d
    let log_c: f64 = periods.iter().map(|l| (2.0 * l).max(1.0).ln()).sum();
    let d = periods.len() as f64;
    let alpha = 4.0 * PI * PI * kernel.t;
    let phi = |u: f64| log_c + d * (u + 1.0).ln() + (2.0 * alpha * u).ln() - alpha * u * u;
    let dphi = |u: f64| d / (u + 1.0) + 1.0 / u - 2.0 * alpha * u;
    let u0 = lambda_max.max(0.0).sqrt() / (2.0 * PI);
    log_concave_tail(phi, dphi, u0)
}

/// Eigenvalue cutoff `λ_max` such that `(N²/V) Σ_{λ > λ_max} h(λ) < eps` on a
/// torus. The frequency `|m/ℓ|` is scanned on a grid of step 1/8.
pub fn spectral_truncation(
    kernel: &KernelPair,
    periods: &[f64],
    n_points: usize,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return domain(format!("tail tolerance must be positive, got {eps}"));
    }
    if n_points == 0 {
        return domain("point count must be at least 1");
    }
    if periods.is_empty() || periods.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return domain("torus periods must be positive");
    }
    let volume: f64 = periods.iter().product();
    let prefactor = (n_points * n_points) as f64 / volume;
    let mut step = 0u32;
    loop {
        let u = step as f64 / 8.0;
        let lambda = 4.0 * PI * PI * u * u;
        if prefactor * spectral_tail_bound(kernel, periods, lambda) < eps {
            return Ok(lambda);
        }
        if u > MAX_RADIUS {
            return domain(format!("no spectral cutoff reaches tolerance {eps}"));
        }
        step += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat(t: f64, d: usize) -> KernelPair {
        KernelPair::heat(t, d).unwrap()
    }

    #[test]
    fn potential_reference_values() {
        let k = heat(0.05, 1);
        // 30-digit reference: (4π·0.05)^{-1/2}
        let k0 = 1.261_566_261_010_080_024;
        assert!((k.potential(0.0).unwrap() - k0).abs() < 1e-15);
        assert!(k.potential(10.0).unwrap() < 1e-80);
        let ratio = k.potential(0.3).unwrap() / k.potential(0.0).unwrap();
        assert!((ratio - (-0.09f64 / 0.2).exp()).abs() < 1e-15);
    }

    #[test]
    fn force_matches_finite_difference() {
        let k = heat(0.05, 1);
        let h = 1e-6;
        let fd = -(k.potential(0.3 + h).unwrap() - k.potential(0.3 - h).unwrap()) / (2.0 * h);
        let exact = k.force_magnitude(0.3).unwrap();
        assert!((exact - 3.0 * k.potential(0.3).unwrap()).abs() < 1e-15);
        assert!(((fd - exact) / exact).abs() < 1e-8);
        assert_eq!(k.force_magnitude(0.0).unwrap(), 0.0);
    }

    #[test]
    fn spectral_weight_reference_values() {
        let k = heat(0.05, 1);
        assert_eq!(k.spectral_weight(0.0).unwrap(), 1.0);
        let w = k.spectral_weight(4.0 * PI * PI).unwrap();
        assert!((w - 0.138_911_133_142_800_244).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 0..=100_000 {
            let w = k.spectral_weight(i as f64 * 0.1).unwrap();
            assert!(w > 0.0 && w < prev);
            prev = w;
        }
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        let k = heat(0.05, 1);
        assert!(k.potential(-1e-3).is_err());
        assert!(k.force_magnitude(-1.0).is_err());
        assert!(k.spectral_weight(-0.5).is_err());
        assert!(k.potential(f64::NAN).is_err());
        assert!(KernelPair::heat(0.0, 1).is_err());
        assert!(KernelPair::heat(-1.0, 2).is_err());
    }

    #[test]
    fn lattice_radius_is_certified_by_brute_force() {
        let k = heat(0.05, 1);
        let growth = OrbitGrowth::lattice(&[1.0]);
        let eps = 1e-12;
        let r = geometric_truncation_radius(&k, &growth, eps).unwrap();
        for x in [0.0, 0.13, 0.5, 0.77] {
            let mut tail = 0.0;
            for m in -10 * r as i64 - 2..=10 * r as i64 + 2 {
                let rho = (x + m as f64).abs();
                if rho > r && rho <= 10.0 * r {
                    tail += k.potential(rho).unwrap().max(k.force_magnitude(rho).unwrap());
                }
            }
            assert!(tail < eps, "tail {tail} at x = {x}");
        }
    }

    #[test]
    fn radius_is_finite_under_exponential_growth() {
        let k = heat(0.05, 2);
        let growth = OrbitGrowth {
            constant: 1.0,
            exponent: 1.0,
            degree: 0,
        };
        let r = geometric_truncation_radius(&k, &growth, 1e-10).unwrap();
        assert!(r.is_finite() && r >= 1.0);
    }

    #[test]
    fn radius_nondecreasing_as_eps_shrinks() {
        let k = heat(0.1, 2);
        let growth = OrbitGrowth::lattice(&[1.0, 1.0]);
        let mut prev = 0.0;
        for e in 1..16 {
            let r = geometric_truncation_radius(&k, &growth, 10f64.powi(-e)).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn spectral_cutoff_is_certified_by_brute_force() {
        let k = heat(0.05, 1);
        let (n, eps) = (8usize, 1e-12);
        let lambda_max = spectral_truncation(&k, &[1.0], n, eps).unwrap();
        let mut tail = 0.0;
        let m_max = (4.0 * lambda_max).sqrt() / (2.0 * PI) + 1.0;
        for m in 1..=m_max as i64 {
            let lambda = 4.0 * PI * PI * (m * m) as f64;
            if lambda > lambda_max && lambda <= 4.0 * lambda_max {
                tail += 2.0 * k.spectral_weight(lambda).unwrap();
            }
        }
        assert!((n * n) as f64 * tail < eps);
    }

    #[test]
    fn spectral_cutoff_monotone_and_degenerate() {
        let k = heat(0.05, 2);
        let periods = [1.0, 1.0];
        let mut prev = 0.0;
        for n in [1, 2, 8, 32, 128] {
            let l = spectral_truncation(&k, &periods, n, 1e-10).unwrap();
            assert!(l >= prev);
            prev = l;
        }
        assert_eq!(spectral_truncation(&k, &periods, 1, 1e6).unwrap(), 0.0);
    }
}
