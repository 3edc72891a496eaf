//! Poincaré disk with the curvature −1 metric `4|dz|² / (1 − |z|²)²`.
//!
//! Tangent vectors at `z` are expressed in the orthonormal frame obtained by
//! scaling the chart basis by `(1 − |z|²)/2`, so a unit vector has Euclidean
//! norm one regardless of where it is attached.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Orientation-preserving disk isometry `z ↦ (a z + b) / (b̄ z + ā)` with
/// `|a|² − |b|² = 1`, i.e. an element of SU(1,1).
///
/// The matrices `±[[a, b], [b̄, ā]]` act identically; [`Isometry::normalized`]
/// picks the representative with `Re a ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub a: Complex64,
    pub b: Complex64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    /// Hyperbolic translation of length `length` along the diameter at angle `angle`.
    pub fn translation(length: f64, angle: f64) -> Self {
        Self {
            a: Complex64::new((length / 2.0).cosh(), 0.0),
            b: Complex64::from_polar((length / 2.0).sinh(), angle),
        }
    }

    /// Isometry sending 0 to `p` with real positive derivative at 0.
    pub fn transport_from_origin(p: Complex64) -> Self {
        let s = 1.0 / (1.0 - p.norm_sqr()).sqrt();
        Self {
            a: Complex64::new(s, 0.0),
            b: p * s,
        }
    }

    pub fn compose(&self, rhs: &Isometry) -> Isometry {
        Isometry {
            a: self.a * rhs.a + self.b * rhs.b.conj(),
            b: self.a * rhs.b + self.b * rhs.a.conj(),
        }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn normalized(self) -> Isometry {
        if self.a.re < 0.0 {
            Isometry {
                a: -self.a,
                b: -self.b,
            }
        } else {
            self
        }
    }

    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// `1 − |g z|²` computed without cancellation from `1 − |z|²`.
    #[inline]
    pub fn image_defect(&self, z: Complex64, defect: f64) -> f64 {
        defect / (self.b.conj() * z + self.a.conj()).norm_sqr()
    }

    /// Trace of the normalized SU(1,1) matrix, `2 Re a`.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    /// `d(0, g·0)`.
    pub fn displacement(&self) -> f64 {
        2.0 * self.b.norm().asinh()
    }

    /// Length of the closed geodesic represented by a hyperbolic element.
    pub fn translation_length(&self) -> f64 {
        let half = (self.trace().abs() / 2.0).max(1.0);
        2.0 * half.acosh()
    }

    /// `|a|² − |b|²`, equal to one for a valid isometry.
    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Max-norm distance between the matrices, up to the overall sign.
    pub fn distance_up_to_sign(&self, other: &Isometry) -> f64 {
        let plus = (self.a - other.a).norm().max((self.b - other.b).norm());
        let minus = (self.a + other.a).norm().max((self.b + other.b).norm());
        plus.min(minus)
    }
}

/// Hyperbolic distance from `p` to `q`, given their defects `1 − |·|²`.
#[inline]
pub(crate) fn distance_with_defects(p: Complex64, dp: f64, q: Complex64, dq: f64) -> f64 {
    2.0 * ((p - q).norm() / (dp * dq).sqrt()).asinh()
}

pub fn distance(p: Complex64, q: Complex64) -> f64 {
    distance_with_defects(p, 1.0 - p.norm_sqr(), q, 1.0 - q.norm_sqr())
}

pub fn distance_from_origin(z: Complex64) -> f64 {
    distance(Complex64::new(0.0, 0.0), z)
}

/// Unit direction at `p`, in the orthonormal frame, of the geodesic towards `q`.
/// Returns `None` when the points coincide.
#[inline]
pub(crate) fn direction_towards(p: Complex64, q: Complex64) -> Option<Complex64> {
    // (q − p) / (1 − p̄ q) is the image of q after transporting p to 0; only its
    // phase matters, so multiply by the conjugate denominator instead of dividing.
    let u = (q - p) * (Complex64::new(1.0, 0.0) - p.conj() * q).conj();
    let n = u.norm();
    (n > 0.0).then(|| u / n)
}

/// Exponential map at `p` applied to the orthonormal-frame vector `v`.
pub fn exp_map(p: Complex64, v: Complex64) -> Complex64 {
    let len = v.norm();
    if len == 0.0 {
        return p;
    }
    let local = v / len * (len / 2.0).tanh();
    Isometry::transport_from_origin(p).apply(local)
}
