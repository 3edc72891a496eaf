//! Model manifolds: flat tori and the Bolza surface.
//!
//! Points are stored as chart coordinates: per-period reals on a torus, and
//! `[re, im]` of a disk point on the hyperbolic surface. Tangent vectors are
//! components in an orthonormal frame at their base point (on the torus this
//! is just the coordinate frame).

pub mod disk;
pub mod hyperbolic;
pub mod torus;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use hyperbolic::{GroupAudit, GroupElement, HyperbolicSurface};
pub use torus::Torus;

use crate::error::{domain, Result};
use crate::kernels::OrbitGrowth;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_complex(&self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    pub(crate) fn from_complex(z: Complex64) -> Self {
        Point(vec![z.re, z.im])
    }
}

/// One connecting geodesic: its length and the unit tangent at the source
/// pointing away from the target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSegment {
    pub length: f64,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum Manifold {
    Torus(Torus),
    Hyperbolic(Arc<HyperbolicSurface>),
}

impl Manifold {
    pub fn torus(periods: Vec<f64>) -> Result<Self> {
        Ok(Manifold::Torus(Torus::new(periods)?))
    }

    pub fn bolza() -> Result<Self> {
        Ok(Manifold::Hyperbolic(Arc::new(HyperbolicSurface::bolza()?)))
    }

    pub fn name(&self) -> &str {
        match self {
            Manifold::Torus(_) => "torus",
            Manifold::Hyperbolic(s) => s.name(),
        }
    }

    /// Number of chart coordinates per point.
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Torus(t) => t.dim(),
            Manifold::Hyperbolic(_) => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Manifold::Torus(t) => t.volume(),
            Manifold::Hyperbolic(s) => s.volume(),
        }
    }

    pub fn growth(&self) -> OrbitGrowth {
        match self {
            Manifold::Torus(t) => t.growth(),
            Manifold::Hyperbolic(s) => s.growth(),
        }
    }

    pub fn as_torus(&self) -> Option<&Torus> {
        match self {
            Manifold::Torus(t) => Some(t),
            Manifold::Hyperbolic(_) => None,
        }
    }

    pub fn is_reduced(&self, p: &Point) -> bool {
        if p.0.len() != self.dim() {
            return false;
        }
        match self {
            Manifold::Torus(t) => t.is_reduced(&p.0),
            Manifold::Hyperbolic(s) => {
                let z = p.as_complex();
                z.norm_sqr() < 1.0 && s.contains(z)
            }
        }
    }

    pub(crate) fn check_reduced(&self, p: &Point) -> Result<()> {
        if self.is_reduced(p) {
            Ok(())
        } else {
            domain(format!("point {:?} is not reduced to the {} domain", p.0, self.name()))
        }
    }

    /// Canonical representative of a raw chart point.
    pub fn reduce(&self, raw: &[f64]) -> Result<Point> {
        match self {
            Manifold::Torus(t) => Ok(Point(t.reduce(raw)?)),
            Manifold::Hyperbolic(s) => {
                if raw.len() != 2 {
                    return domain(format!("expected 2 disk coordinates, got {}", raw.len()));
                }
                Ok(Point::from_complex(s.reduce(Complex64::new(raw[0], raw[1]))?))
            }
        }
    }

    /// Exact exponential map followed by reduction.
    pub fn retract(&self, p: &Point, v: &[f64]) -> Result<Point> {
        if v.len() != self.dim() || v.iter().any(|x| !x.is_finite()) {
            return domain(format!("invalid tangent vector {v:?}"));
        }
        if v.iter().all(|x| *x == 0.0) {
            return Ok(p.clone());
        }
        match self {
            Manifold::Torus(t) => {
                let moved: Vec<f64> = p.0.iter().zip(v).map(|(x, dx)| x + dx).collect();
                Ok(Point(t.reduce(&moved)?))
            }
            Manifold::Hyperbolic(s) => {
                let z = disk::exp_map(p.as_complex(), Complex64::new(v[0], v[1]));
                Ok(Point::from_complex(s.reduce(z)?))
            }
        }
    }

    /// Shortest distance between two reduced points.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_reduced(p)?;
        self.check_reduced(q)?;
        match self {
            Manifold::Torus(t) => Ok(t.distance(&p.0, &q.0)),
            Manifold::Hyperbolic(s) => {
                // both points lie within the circumradius of 0
                let reach = 2.0 * s.geometry().circumradius + 1e-9;
                let mut best = f64::INFINITY;
                s.visit_geodesics(p.as_complex(), q.as_complex(), reach, false, |len, _| {
                    best = best.min(len)
                })?;
                Ok(best)
            }
        }
    }

    /// Every geodesic class from `p` to `q` of length at most `radius`, once
    /// each. The zero-length class of coincident points is omitted.
    pub fn geodesics_between(&self, p: &Point, q: &Point, radius: f64) -> Result<Vec<GeodesicSegment>> {
        if !(radius > 0.0) {
            return domain(format!("cutoff length must be positive, got {radius}"));
        }
        self.check_reduced(p)?;
        self.check_reduced(q)?;
        let mut out = Vec::new();
        self.visit_geodesics(p, q, radius, false, |length, dir| {
            if length > 0.0 {
                out.push(GeodesicSegment {
                    length,
                    direction: dir.to_vec(),
                });
            }
        })?;
        Ok(out)
    }

    pub(crate) fn visit_geodesics(
        &self,
        p: &Point,
        q: &Point,
        radius: f64,
        skip_identity: bool,
        visit: impl FnMut(f64, &[f64]),
    ) -> Result<()> {
        match self {
            Manifold::Torus(t) => {
                t.visit_geodesics(&p.0, &q.0, radius, skip_identity, visit);
                Ok(())
            }
            Manifold::Hyperbolic(s) => {
                s.visit_geodesics(p.as_complex(), q.as_complex(), radius, skip_identity, visit)
            }
        }
    }

    /// A point drawn from the normalized Riemannian volume.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Manifold::Torus(t) => Point(
                t.periods()
                    .iter()
                    .map(|l| {
                        let x = rng.gen::<f64>() * l;
                        if x >= *l {
                            0.0
                        } else {
                            x
                        }
                    })
                    .collect(),
            ),
            Manifold::Hyperbolic(s) => Point::from_complex(s.sample_uniform(rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(segments: &[GeodesicSegment]) -> Vec<f64> {
        let mut l: Vec<f64> = segments.iter().map(|s| s.length).collect();
        l.sort_by(f64::total_cmp);
        l
    }

    #[test]
    fn circle_geodesics_by_hand() {
        let m = Manifold::torus(vec![1.0]).unwrap();
        let segs = m
            .geodesics_between(&Point(vec![0.0]), &Point(vec![0.3]), 2.5)
            .unwrap();
        let expected = [0.3, 0.7, 1.3, 1.7, 2.3];
        let got = lengths(&segs);
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12);
        }
        for s in &segs {
            // winding forward (q + m, m ≥ 0) pushes p backwards
            let winding = s.length - 0.3;
            let forward = (winding - winding.round()).abs() < 1e-9;
            assert_eq!(s.direction[0], if forward { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn self_loops_exclude_identity() {
        let m = Manifold::torus(vec![1.0]).unwrap();
        let p = Point(vec![0.4]);
        let got = lengths(&m.geodesics_between(&p, &p, 2.5).unwrap());
        assert_eq!(got, vec![1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn hyperbolic_loops_at_basepoint_have_trace_lengths() {
        let m = Manifold::bolza().unwrap();
        let Manifold::Hyperbolic(s) = &m else { unreachable!() };
        let o = Point(vec![0.0, 0.0]);
        let segs = m.geodesics_between(&o, &o, s.systole() + 1e-6).unwrap();
        assert!(segs.len() >= 2);
        let g = s.generators()[0];
        let trace_length = 2.0 * (g.trace().abs() / 2.0).acosh();
        for seg in &segs {
            assert!((seg.length - trace_length).abs() < 1e-10);
            let n: f64 = seg.direction.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn retract_wraps_and_fixes_zero() {
        let m = Manifold::torus(vec![1.0]).unwrap();
        let q = m.retract(&Point(vec![0.9]), &[0.2]).unwrap();
        assert!((q.0[0] - 0.1).abs() < 1e-12);
        let p = Point(vec![0.25]);
        assert_eq!(m.retract(&p, &[0.0]).unwrap(), p);
        assert!(m.retract(&p, &[f64::NAN]).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = Manifold::torus(vec![1.0]).unwrap();
        assert!(m.geodesics_between(&Point(vec![0.0]), &Point(vec![0.3]), 0.0).is_err());
        assert!(m.geodesics_between(&Point(vec![1.5]), &Point(vec![0.3]), 1.0).is_err());
        let h = Manifold::bolza().unwrap();
        assert!(h.reduce(&[0.8, 0.8]).is_err());
        assert!(h.distance(&Point(vec![0.0, 0.0]), &Point(vec![0.95, 0.0])).is_err());
    }
}
