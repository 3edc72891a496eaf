use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::OrbitGrowth;

/// Flat torus `R^d / Π ℓ_k Z` with `d ∈ {1, 2, 3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Torus {
    periods: Vec<f64>,
}

pub(crate) const MAX_TORUS_DIM: usize = 3;

impl Torus {
    pub fn new(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.len() > MAX_TORUS_DIM {
            return domain(format!(
                "torus dimension must be between 1 and {MAX_TORUS_DIM}, got {}",
                periods.len()
            ));
        }
        if let Some(bad) = periods.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return domain(format!("torus periods must be positive, got {bad}"));
        }
        Ok(Self { periods })
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn growth(&self) -> OrbitGrowth {
        OrbitGrowth::lattice(&self.periods)
    }

    pub fn is_reduced(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim()
            && coords
                .iter()
                .zip(&self.periods)
                .all(|(x, l)| *x >= 0.0 && x < l)
    }

    pub fn reduce(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.dim() {
            return domain(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            ));
        }
        coords
            .iter()
            .zip(&self.periods)
            .map(|(&x, &l)| {
                if !x.is_finite() {
                    return domain(format!("non-finite coordinate {x}"));
                }
                let r = x.rem_euclid(l);
                // rem_euclid can round up to exactly l for tiny negative x
                Ok(if r >= l { 0.0 } else { r })
            })
            .collect()
    }

    /// Shortest distance; the metric is a product so each axis wraps independently.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .zip(&self.periods)
            .map(|((a, b), l)| {
                let d = (a - b).abs().rem_euclid(*l);
                let d = d.min(l - d);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Visit every lattice translate `q + mℓ` within `radius` of `p`, passing the
    /// length and the unit direction at `p` pointing away from the translate.
    ///
    /// When `skip_identity` is set the `m = 0` term is not visited. A
    /// zero-length term (coincident points) is visited with a zero direction.
    pub(crate) fn visit_geodesics(
        &self,
        p: &[f64],
        q: &[f64],
        radius: f64,
        skip_identity: bool,
        mut visit: impl FnMut(f64, &[f64]),
    ) {
        let d = self.dim();
        let mut delta = [0.0; MAX_TORUS_DIM];
        let mut lo = [0i64; MAX_TORUS_DIM];
        let mut hi = [0i64; MAX_TORUS_DIM];
        for k in 0..d {
            delta[k] = q[k] - p[k];
            let l = self.periods[k];
            lo[k] = ((-radius - delta[k]) / l).ceil() as i64;
            hi[k] = ((radius - delta[k]) / l).floor() as i64;
            if lo[k] > hi[k] {
                return;
            }
        }
        let mut m = lo;
        loop {
            let identity = m[..d].iter().all(|&x| x == 0);
            if !(skip_identity && identity) {
                let mut v = [0.0; MAX_TORUS_DIM];
                let mut len2 = 0.0;
                for k in 0..d {
                    v[k] = delta[k] + m[k] as f64 * self.periods[k];
                    len2 += v[k] * v[k];
                }
                let len = len2.sqrt();
                if len <= radius {
                    let mut dir = [0.0; MAX_TORUS_DIM];
                    if len > 0.0 {
                        for k in 0..d {
                            dir[k] = -v[k] / len;
                        }
                    }
                    visit(len, &dir[..d]);
                }
            }
            // odometer increment, last axis fastest
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if m[k] < hi[k] {
                    m[k] += 1;
                    break;
                }
                m[k] = lo[k];
            }
        }
    }
}
