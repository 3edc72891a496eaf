//! Laplace eigendata of flat tori.
//!
//! The basis is the complex exponential system
//! `φ_m(x) = V^{-1/2} exp(2πi Σ_k m_k x_k / ℓ_k)` over nonzero integer vectors
//! `m`, with eigenvalue `λ_m = 4π² Σ_k (m_k/ℓ_k)²` and weight `a_m = h(λ_m)`.
//! Both `m` and `-m` are stored, so Weyl amplitudes come in conjugate pairs and
//! every quadratic form built from them is real. The constant mode is left out
//! and handled analytically by callers. Trigonometric polynomials are dense in
//! `C(T^d)`, so this system satisfies the density hypothesis of the
//! equidistribution argument.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::kernels::{spectral_tail_bound, KernelPair};
use crate::manifolds::{Manifold, Point, Torus};
use crate::sum::{compensated_sum, CompensatedComplexSum};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralMode {
    pub index: Vec<i64>,
    pub eigenvalue: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralBasis {
    torus: Torus,
    kernel: KernelPair,
    lambda_max: f64,
    modes: Vec<SpectralMode>,
    weight_sum: f64,
    weight_tail: f64,
}

/// Torus eigenvalue of the integer frequency vector `m`.
pub fn eigenvalue(periods: &[f64], m: &[i64]) -> f64 {
    let s: f64 = m
        .iter()
        .zip(periods)
        .map(|(&mk, l)| {
            let f = mk as f64 / l;
            f * f
        })
        .sum();
    4.0 * PI * PI * s
}

impl SpectralBasis {
    /// All nonzero modes with `λ ≤ lambda_max`, ordered by eigenvalue and then
    /// lexicographically by index.
    pub fn build(torus: &Torus, kernel: &KernelPair, lambda_max: f64) -> Result<Self> {
        if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
            return domain(format!("eigenvalue cutoff must be finite and nonnegative, got {lambda_max}"));
        }
        let periods = torus.periods();
        let d = periods.len();
        let bounds: Vec<i64> = periods
            .iter()
            .map(|l| (l * lambda_max.sqrt() / (2.0 * PI)).floor() as i64)
            .collect();
        let mut modes = Vec::new();
        let mut m: Vec<i64> = bounds.iter().map(|b| -b).collect();
        'odometer: loop {
            if m.iter().any(|&x| x != 0) {
                let lambda = eigenvalue(periods, &m);
                if lambda <= lambda_max {
                    modes.push(SpectralMode {
                        index: m.clone(),
                        eigenvalue: lambda,
                        weight: kernel.spectral_weight_unchecked(lambda),
                    });
                }
            }
            let mut k = d;
            loop {
                if k == 0 {
                    break 'odometer;
                }
                k -= 1;
                if m[k] < bounds[k] {
                    m[k] += 1;
                    break;
                }
                m[k] = -bounds[k];
            }
        }
        modes.sort_by(|a, b| {
            a.eigenvalue
                .total_cmp(&b.eigenvalue)
                .then_with(|| a.index.cmp(&b.index))
        });
        let weight_sum = compensated_sum(modes.iter().map(|m| m.weight));
        let weight_tail = spectral_tail_bound(kernel, periods, lambda_max);
        Ok(Self {
            torus: torus.clone(),
            kernel: *kernel,
            lambda_max,
            modes,
            weight_sum,
            weight_tail,
        })
    }

    pub fn modes(&self) -> &[SpectralMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn kernel(&self) -> &KernelPair {
        &self.kernel
    }

    pub fn volume(&self) -> f64 {
        self.torus.volume()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `Σ a_m` over the stored modes.
    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    /// Certified bound on `Σ a_m` over the modes beyond the cutoff.
    pub fn weight_tail(&self) -> f64 {
        self.weight_tail
    }

    /// Phase `2π Σ m_k x_k / ℓ_k` of mode `m` at `x`.
    #[inline]
    pub(crate) fn phase(&self, mode: &SpectralMode, x: &[f64]) -> f64 {
        let s: f64 = mode
            .index
            .iter()
            .zip(x)
            .zip(self.torus.periods())
            .map(|((&m, xk), l)| m as f64 * xk / l)
            .sum();
        2.0 * PI * s
    }

    pub fn eigenfunction(&self, mode: &SpectralMode, x: &[f64]) -> Complex64 {
        Complex64::from_polar(self.volume().powf(-0.5), self.phase(mode, x))
    }

    /// Chart gradient of `φ_m`: `2πi (m/ℓ) φ_m(x)`, one complex entry per axis.
    pub fn eigenfunction_gradient(&self, mode: &SpectralMode, x: &[f64]) -> Vec<Complex64> {
        let phi = self.eigenfunction(mode, x);
        mode.index
            .iter()
            .zip(self.torus.periods())
            .map(|(&m, l)| Complex64::new(0.0, 2.0 * PI * m as f64 / l) * phi)
            .collect()
    }

    /// Weyl amplitude `S_m = Σ_i φ_m(x_i)`.
    pub fn weyl_amplitude(&self, mode: &SpectralMode, points: &[Point]) -> Complex64 {
        let mut acc = CompensatedComplexSum::new();
        for p in points {
            acc.add(Complex64::from_polar(1.0, self.phase(mode, &p.0)));
        }
        acc.value() * self.volume().powf(-0.5)
    }

    pub fn weyl_amplitudes(&self, points: &[Point]) -> Vec<Complex64> {
        self.modes
            .iter()
            .map(|m| self.weyl_amplitude(m, points))
            .collect()
    }

    /// Check that `manifold` is the torus this basis was built on.
    pub(crate) fn check_manifold(&self, manifold: &Manifold) -> Result<()> {
        match manifold {
            Manifold::Torus(t) if t == &self.torus => Ok(()),
            Manifold::Torus(_) => domain("spectral basis was built on a different torus"),
            Manifold::Hyperbolic(_) => Err(crate::Error::UnsupportedModel(
                "no closed-form eigenfunctions on hyperbolic surfaces".into(),
            )),
        }
    }
}

/// Spectral basis for `manifold`; hyperbolic models are rejected.
pub fn build_basis(manifold: &Manifold, kernel: &KernelPair, lambda_max: f64) -> Result<SpectralBasis> {
    match manifold {
        Manifold::Torus(t) => SpectralBasis::build(t, kernel, lambda_max),
        Manifold::Hyperbolic(_) => Err(crate::Error::UnsupportedModel(
            "spectral data is only available on flat tori".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(periods: Vec<f64>, lambda_max: f64) -> SpectralBasis {
        let t = Torus::new(periods).unwrap();
        let k = KernelPair::heat(0.05, t.dim()).unwrap();
        SpectralBasis::build(&t, &k, lambda_max).unwrap()
    }

    fn indices(b: &SpectralBasis) -> Vec<Vec<i64>> {
        b.modes().iter().map(|m| m.index.clone()).collect()
    }

    #[test]
    fn circle_cutoff_by_hand() {
        let b = basis(vec![1.0], 50.0);
        assert_eq!(indices(&b), vec![vec![-1], vec![1]]);
        assert!(basis(vec![1.0], 0.0).is_empty());
        assert!(basis(vec![1.0, 1.0], 0.0).is_empty());
    }

    #[test]
    fn square_torus_lowest_shell() {
        let b = basis(vec![1.0, 1.0], 40.0);
        assert_eq!(
            indices(&b),
            vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]
        );
        for m in b.modes() {
            assert!(m.eigenvalue > 0.0 && m.weight > 0.0);
        }
    }

    #[test]
    fn lattice_count_matches_brute_force() {
        let b = basis(vec![1.0, 2.0], 900.0);
        let mut count = 0;
        for m0 in -10i64..=10 {
            for m1 in -20i64..=20 {
                if (m0, m1) != (0, 0) && eigenvalue(&[1.0, 2.0], &[m0, m1]) <= 900.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(b.len(), count);
    }

    #[test]
    fn antipodal_and_single_point_amplitudes() {
        let b = basis(vec![1.0], 50.0);
        let one = &b.modes()[1];
        let pair = [Point(vec![0.0]), Point(vec![0.5])];
        assert!(b.weyl_amplitude(one, &pair).norm() < 1e-15);
        let single = [Point(vec![0.37])];
        assert!((b.weyl_amplitude(one, &single).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn roots_of_unity_amplitudes() {
        let b = basis(vec![1.0], 4.0 * PI * PI * 16.5);
        let pts: Vec<Point> = (0..4).map(|i| Point(vec![i as f64 / 4.0])).collect();
        for mode in b.modes() {
            let s = b.weyl_amplitude(mode, &pts);
            if mode.index[0] % 4 == 0 {
                assert!((s - Complex64::new(4.0, 0.0)).norm() < 1e-14);
            } else {
                assert!(s.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn quadrature_orthonormality_and_zero_mean() {
        let b = basis(vec![1.0, 2.0], 4.0 * PI * PI * 2.0);
        let n = 32;
        let periods = b.torus().periods().to_vec();
        let cell = periods[0] * periods[1] / (n * n) as f64;
        let grid: Vec<Vec<f64>> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| vec![i as f64 * periods[0] / n as f64, j as f64 * periods[1] / n as f64])
            .collect();
        let low = &b.modes()[..5];
        for m in low {
            let mean: Complex64 = grid.iter().map(|x| b.eigenfunction(m, x)).sum::<Complex64>() * cell;
            assert!(mean.norm() < 1e-12);
            for m2 in low {
                let ip: Complex64 = grid
                    .iter()
                    .map(|x| b.eigenfunction(m, x) * b.eigenfunction(m2, x).conj())
                    .sum::<Complex64>()
                    * cell;
                let expected = if m.index == m2.index { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn hyperbolic_models_are_rejected() {
        let m = Manifold::bolza().unwrap();
        let k = KernelPair::heat(0.1, 2).unwrap();
        assert!(matches!(
            build_basis(&m, &k, 10.0),
            Err(crate::Error::UnsupportedModel(_))
        ));
    }
}
