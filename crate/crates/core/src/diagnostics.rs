//! Equidistribution checks for point configurations.
//!
//! On a torus, a configuration whose spectral energy is at most the uniform
//! mean `(N/V) Σ a_n` has every normalized Weyl sum bounded:
//!
//! ```text
//! a_m |S_m|² ≤ E ≤ (N/V) Σ a_n   ⇒   |S_m| / N ≤ C(m) / √N,
//! C(m) = sqrt(Σ a_n / (V a_m)).
//! ```
//!
//! Only the sub-mean inequality is used, so the bound applies to any
//! certified configuration, not just global minimizers. The reported `C(m)`
//! uses the truncated weight sum plus its certified tail, which keeps it valid
//! for the full series.
//!
//! There are no closed-form eigenfunctions on the hyperbolic surface, so there
//! the only check offered is a nearest-neighbour comparison against a uniform
//! random baseline. It is a heuristic, not a bound.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::energy::{energy_spectral, Configuration};
use crate::error::{domain, Result};
use crate::kernels::KernelPair;
use crate::manifolds::{Manifold, Point, Torus};
use crate::optimize::uniform_random_configuration;
use crate::spectrum::SpectralBasis;
use crate::sum::{compensated_sum, CompensatedComplexSum, CompensatedSum};

/// Slack on the per-mode comparison `w_m ≤ b_m`.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeBound {
    pub index: Vec<i64>,
    pub eigenvalue: f64,
    pub weight: f64,
    /// `|S_m| / N`
    pub w: f64,
    /// `C(m)`
    pub constant: f64,
    /// `C(m) / √N`
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylReport {
    pub n_points: usize,
    pub volume: f64,
    /// Truncated `Σ a_n`; the same sum the certification compares against.
    pub weight_sum: f64,
    /// Certified tail added to `weight_sum` inside `C(m)`.
    pub weight_tail: f64,
    pub energy: f64,
    pub mean_level: f64,
    /// Whether the bound is guaranteed for this configuration.
    pub certified_below_mean: bool,
    pub all_pass: bool,
    pub modes: Vec<ModeBound>,
}

impl WeylReport {
    /// Largest `w_m` over the `lowest` first modes (all modes if fewer).
    pub fn max_w(&self, lowest: usize) -> f64 {
        self.modes.iter().take(lowest).map(|m| m.w).fold(0.0, f64::max)
    }

    /// Largest `w_m √N` over the `lowest` first modes.
    pub fn max_scaled_w(&self, lowest: usize) -> f64 {
        self.max_w(lowest) * (self.n_points as f64).sqrt()
    }

    /// Largest `C(m)` over the `lowest` first modes.
    pub fn max_constant(&self, lowest: usize) -> f64 {
        self.modes.iter().take(lowest).map(|m| m.constant).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.modes.iter().filter(|m| !m.pass).count()
    }

    /// Per-mode table. Multi-axis indices are joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode_index,w_m,bound,pass\n");
        for m in &self.modes {
            let index: Vec<String> = m.index.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(out, "{},{:.16e},{:.16e},{}", index.join(";"), m.w, m.bound, m.pass);
        }
        out
    }
}

/// Normalized Weyl sums of `config` against every mode of `basis`, with the
/// sub-mean bound for each.
pub fn weyl_report(config: &Configuration, basis: &SpectralBasis) -> Result<WeylReport> {
    let energy = energy_spectral(config, basis)?.value;
    let n = config.len() as f64;
    let volume = basis.volume();
    let weight_sum = basis.weight_sum();
    let weight_tail = basis.weight_tail();
    let mean_level = n / volume * weight_sum;
    let modes: Vec<ModeBound> = basis
        .modes()
        .iter()
        .map(|mode| {
            let w = basis.weyl_amplitude(mode, config.points()).norm() / n;
            let constant = ((weight_sum + weight_tail) / (volume * mode.weight)).sqrt();
            let bound = constant / n.sqrt();
            ModeBound {
                index: mode.index.clone(),
                eigenvalue: mode.eigenvalue,
                weight: mode.weight,
                w,
                constant,
                bound,
                pass: w <= bound + BOUND_SLACK,
            }
        })
        .collect();
    Ok(WeylReport {
        n_points: config.len(),
        volume,
        weight_sum,
        weight_tail,
        energy,
        mean_level,
        certified_below_mean: energy <= mean_level,
        all_pass: modes.iter().all(|m| m.pass),
        modes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanEnergyReport {
    pub n_points: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub standard_error: f64,
    /// `(N/V) Σ a_n` over the basis modes.
    pub target: f64,
    pub deviation: f64,
    /// `|mean - target| ≤ 4 SE`, with a roundoff floor for zero variance.
    pub agree: bool,
}

/// Monte Carlo mean of the spectral energy over uniform configurations.
/// Sample `k` uses seed `seed + k`.
pub fn mean_energy_check(basis: &SpectralBasis, n_points: usize, samples: usize, seed: u64) -> Result<MeanEnergyReport> {
    if samples < 100 {
        return domain(format!("mean-energy check needs at least 100 samples, got {samples}"));
    }
    let manifold = Manifold::Torus(basis.torus().clone());
    let mut energies = Vec::with_capacity(samples);
    for k in 0..samples {
        let config = uniform_random_configuration(&manifold, n_points, seed.wrapping_add(k as u64))?;
        energies.push(energy_spectral(&config, basis)?.value);
    }
    let count = samples as f64;
    let mean = compensated_sum(energies.iter().copied()) / count;
    let variance = compensated_sum(energies.iter().map(|e| (e - mean).powi(2))) / (count - 1.0);
    let standard_error = (variance / count).sqrt();
    let target = n_points as f64 / basis.volume() * basis.weight_sum();
    let deviation = mean - target;
    let floor = 1e-12 * target.abs().max(f64::MIN_POSITIVE);
    Ok(MeanEnergyReport {
        n_points,
        samples,
        seed,
        mean,
        standard_error,
        target,
        deviation,
        agree: deviation.abs() <= 4.0 * standard_error + floor,
    })
}

/// Real trigonometric polynomial `f(x) = Re Σ c_m e^{2πi m·x/ℓ}` on a torus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigPolynomial {
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

impl TrigPolynomial {
    pub fn new(terms: Vec<(Vec<i64>, Complex64)>) -> Self {
        Self { terms }
    }

    pub fn evaluate(&self, torus: &Torus, x: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for (m, c) in &self.terms {
            acc.add((c * Complex64::from_polar(1.0, phase(torus, m, x))).re);
        }
        acc.value()
    }

    /// `V⁻¹ ∫ f`, the real part of the zero-frequency coefficient.
    pub fn mean(&self) -> f64 {
        compensated_sum(
            self.terms
                .iter()
                .filter(|(m, _)| m.iter().all(|&k| k == 0))
                .map(|(_, c)| c.re),
        )
    }
}

fn phase(torus: &Torus, m: &[i64], x: &[f64]) -> f64 {
    let s: f64 = m
        .iter()
        .zip(x)
        .zip(torus.periods())
        .map(|((&mk, xk), l)| mk as f64 * xk / l)
        .sum();
    2.0 * PI * s
}

/// `S_m = Σ_i φ_m(x_i)` for an arbitrary frequency vector.
pub fn weyl_sum(torus: &Torus, m: &[i64], points: &[Point]) -> Complex64 {
    let mut acc = CompensatedComplexSum::new();
    for p in points {
        acc.add(Complex64::from_polar(1.0, phase(torus, m, &p.0)));
    }
    acc.value() * torus.volume().powf(-0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrationReport {
    /// `N⁻¹ Σ f(x_i)` by direct evaluation.
    pub sample_mean: f64,
    pub exact_mean: f64,
    pub difference: f64,
    /// The same difference rebuilt from Weyl sums:
    /// `Re Σ_{m≠0} c_m V^{1/2} S_m / N`.
    pub weyl_difference: f64,
}

/// Compare the sample average of `f` over `config` with its true mean.
pub fn integrate_against(torus: &Torus, config: &Configuration, f: &TrigPolynomial) -> Result<IntegrationReport> {
    for p in config.points() {
        if !torus.is_reduced(&p.0) {
            return domain(format!("point {:?} is not reduced on the torus", p.0));
        }
    }
    for (m, _) in &f.terms {
        if m.len() != torus.dim() {
            return domain(format!("frequency {m:?} does not match torus dimension {}", torus.dim()));
        }
    }
    let n = config.len() as f64;
    let sample_mean = compensated_sum(config.points().iter().map(|p| f.evaluate(torus, &p.0))) / n;
    let exact_mean = f.mean();
    let root_volume = torus.volume().sqrt();
    let weyl_difference = compensated_sum(
        f.terms
            .iter()
            .filter(|(m, _)| m.iter().any(|&k| k != 0))
            .map(|(m, c)| (c * weyl_sum(torus, m, config.points())).re * root_volume / n),
    );
    Ok(IntegrationReport {
        sample_mean,
        exact_mean,
        difference: sample_mean - exact_mean,
        weyl_difference,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    /// Certified bound on the omitted shells `k > terms`.
    pub tail_bound: f64,
    pub terms: usize,
}

/// Spectral energy of `n` equally spaced points on a circle of length
/// `circumference`: only the modes `m = ±kN` survive, each with
/// `|S_m|² = N²/V`, giving `Σ_{k≥1} 2 a_{kN} N²/V`.
pub fn symmetric_minimizer_oracle(n: usize, circumference: f64, kernel: &KernelPair) -> Result<OracleValue> {
    if n == 0 {
        return domain("point count must be at least 1");
    }
    if !(circumference > 0.0) || !circumference.is_finite() {
        return domain(format!("circumference must be positive, got {circumference}"));
    }
    if kernel.dim != 1 {
        return domain(format!("oracle is for circles, kernel dimension is {}", kernel.dim));
    }
    let nf = n as f64;
    let scale = 2.0 * nf * nf / circumference;
    // a_{kN} = exp(-α k²)
    let alpha = kernel.t * (2.0 * PI * nf / circumference).powi(2);
    let tail = |k: usize| {
        let next = (k + 1) as f64;
        scale * (-alpha * next * next).exp() / (1.0 - (-alpha * (2.0 * next + 1.0)).exp())
    };
    let mut acc = CompensatedSum::new();
    let mut k = 0;
    loop {
        let bound = tail(k);
        if bound == 0.0 || bound <= 1e-18 * acc.value() {
            return Ok(OracleValue {
                value: acc.value(),
                tail_bound: bound,
                terms: k,
            });
        }
        k += 1;
        acc.add(scale * (-alpha * (k * k) as f64).exp());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearestNeighborReport {
    /// Always true: this is a qualitative proxy, not a certified bound.
    pub heuristic: bool,
    pub n_points: usize,
    pub distances: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    /// Expected nearest-neighbour distance for `N` independent uniform points,
    /// treating balls as embedded.
    pub uniform_baseline: f64,
    /// `mean / uniform_baseline`; well above 1 means more regular than random.
    pub regularity: f64,
}

/// Volume of a geodesic ball of radius `r` as if it were embedded.
fn ball_volume(manifold: &Manifold, r: f64) -> f64 {
    match manifold {
        Manifold::Torus(t) => match t.dim() {
            1 => 2.0 * r,
            2 => PI * r * r,
            _ => 4.0 / 3.0 * PI * r * r * r,
        },
        Manifold::Hyperbolic(_) => 2.0 * PI * (r.cosh() - 1.0),
    }
}

/// `E[min distance]` to `n - 1` other uniform points, `∫ (1 - F(r))^{n-1} dr`
/// with `F(r) = min(1, |B_r| / V)`.
fn uniform_nearest_neighbor_mean(manifold: &Manifold, n: usize) -> f64 {
    let volume = manifold.volume();
    let fraction = |r: f64| (ball_volume(manifold, r) / volume).min(1.0);
    let mut hi = 1.0;
    while fraction(hi) < 1.0 {
        hi *= 2.0;
    }
    let (mut lo, mut top) = (0.0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + top);
        if fraction(mid) < 1.0 {
            lo = mid;
        } else {
            top = mid;
        }
    }
    let survival = |r: f64| (1.0 - fraction(r)).powi(n as i32 - 1);
    // Simpson on [0, top]
    let steps = 4000;
    let h = top / steps as f64;
    let mut acc = CompensatedSum::new();
    for i in 0..=steps {
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(w * survival(i as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Nearest-neighbour distances of `config` against the uniform random
/// baseline. Works on any model; it is the only equidistribution proxy on the
/// hyperbolic surface.
pub fn nearest_neighbor_statistics(manifold: &Manifold, config: &Configuration) -> Result<NearestNeighborReport> {
    config.validate(manifold)?;
    let n = config.len();
    if n < 2 {
        return domain("nearest-neighbour statistics need at least 2 points");
    }
    let pts = config.points();
    let mut distances = Vec::with_capacity(n);
    for (i, p) in pts.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, q) in pts.iter().enumerate() {
            if i != j {
                best = best.min(manifold.distance(p, q)?);
            }
        }
        distances.push(best);
    }
    let mean = compensated_sum(distances.iter().copied()) / n as f64;
    let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let uniform_baseline = uniform_nearest_neighbor_mean(manifold, n);
    Ok(NearestNeighborReport {
        heuristic: true,
        n_points: n,
        distances,
        mean,
        min,
        uniform_baseline,
        regularity: mean / uniform_baseline,
    })
}
