//! Quaternion rotations.
//!
//! `q = a + b i + c j + d k`. Rotations returned by this module are in the
//! canonical half-space `a >= 0`; `q` and `-q` describe the same rotation.

use std::ops::Mul;

use nalgebra::{Matrix2x3, Matrix3, Vector3};

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-6;

/// Below this `|from + to|` the two vectors are treated as antiparallel.
const ANTIPARALLEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_array(q: [f64; 4]) -> Self {
        Self::new(q[0], q[1], q[2], q[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn vector(self) -> Vector3<f64> {
        Vector3::new(self.b, self.c, self.d)
    }

    pub fn norm(self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NonUnitQuaternion(n));
        }
        Ok(Self::new(self.a / n, self.b / n, self.c / n, self.d / n))
    }

    /// Flips the sign if needed so that `a >= 0`.
    pub fn canonical(self) -> Self {
        if self.a < 0.0 {
            Self::new(-self.a, -self.b, -self.c, -self.d)
        } else {
            self
        }
    }

    /// Rotation by `angle` about `axis`; the axis is renormalised.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroAxis);
        }
        let u = axis / n;
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Self::new(c, u.x * s, u.y * s, u.z * s).canonical())
    }

    /// Shortest rotation taking unit vector `from` onto unit vector `to`.
    ///
    /// `a = sqrt((1 + from.to) / 2)`, `(b, c, d) = (from x to) / (2a)`.
    /// For unit vectors `sqrt((1 + from.to) / 2) = |from + to| / 2`, which is
    /// the form evaluated here since it keeps full precision near `a = 0`.
    /// Antiparallel inputs rotate by pi about `from x e_x`, or `from x e_y`
    /// when `from` is parallel to `e_x`.
    pub fn between(from: &Vector3<f64>, to: &Vector3<f64>) -> Self {
        let from = from.normalize();
        let to = to.normalize();
        let a = 0.5 * (from + to).norm();
        if a * 2.0 <= ANTIPARALLEL_TOL {
            let mut axis = from.cross(&Vector3::x());
            if axis.norm() < 1e-6 {
                axis = from.cross(&Vector3::y());
            }
            let u = axis.normalize();
            return Self::new(0.0, u.x, u.y, u.z);
        }
        let v = from.cross(&to) / (2.0 * a);
        Self::new(a, v.x, v.y, v.z)
            .normalize()
            .expect("non-zero by construction")
    }

    /// Rotation matrix; errors unless `|q| = 1` within 1e-6.
    #[rustfmt::skip]
    pub fn to_matrix(self) -> Result<Rot3> {
        let n = self.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitQuaternion(n));
        }
        let Quat { a, b, c, d } = self;
        Ok(Rot3(Matrix3::new(
            a * a + b * b - c * c - d * d, 2.0 * b * c - 2.0 * a * d,     2.0 * a * c + 2.0 * b * d,
            2.0 * a * d + 2.0 * b * c,     a * a - b * b + c * c - d * d, 2.0 * c * d - 2.0 * a * b,
            2.0 * b * d - 2.0 * a * c,     2.0 * a * b + 2.0 * c * d,     a * a - b * b - c * c + d * d,
        )))
    }

    /// `self` applied after `first`: the Hamilton product `self * first`,
    /// returned in canonical sign.
    pub fn compose(self, first: Quat) -> Self {
        (self * first).canonical()
    }

    /// Largest per-component difference, minimised over the sign of `other`.
    pub fn component_distance(self, other: Quat) -> f64 {
        let p = self.to_array();
        let q = other.to_array();
        let plus = p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let minus = p.iter().zip(&q).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
        plus.min(minus)
    }
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, r: Quat) -> Quat {
        let l = self;
        Quat::new(
            l.a * r.a - l.b * r.b - l.c * r.c - l.d * r.d,
            l.a * r.b + l.b * r.a + l.c * r.d - l.d * r.c,
            l.a * r.c - l.b * r.d + l.c * r.a + l.d * r.b,
            l.a * r.d + l.b * r.c - l.c * r.b + l.d * r.a,
        )
    }
}

/// Proper rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(Matrix3<f64>);

impl Rot3 {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// The orthographic part: first two rows.
    pub fn top_rows(&self) -> Matrix2x3<f64> {
        self.0.fixed_rows::<2>(0).into_owned()
    }

    /// Largest deviation of `M^T M` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).abs().max()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }
}

impl Mul for Rot3 {
    type Output = Rot3;

    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}
