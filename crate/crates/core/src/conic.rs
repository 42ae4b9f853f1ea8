//! Ellipse geometry in covariance form.
//!
//! A solid ellipse is the set `{p : (p - mu)^T C^-1 (p - mu) <= 4}`. With that
//! scaling `C` is exactly the covariance of the uniform distribution over the
//! ellipse, so blob moments can be used directly. The semi-axes are
//! `a_i = 2 sqrt(lambda_i)`.
//!
//! An orthogonally projected circle of radius `r` and unit normal `phi` has
//! covariance `(r^2 / 4) (I - phi_xy phi_xy^T)`; [`circle_normal_from_cov`]
//! inverts that map up to the two-fold sign ambiguity.

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{Error, Result};

/// Centre and covariance of a solid ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseCov {
    pub mu: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl EllipseCov {
    /// Fails with [`Error::DegenerateEllipse`] unless `cov` is symmetric
    /// positive definite.
    pub fn new(mu: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self> {
        let scale = cov.abs().max();
        let finite = cov.iter().chain(mu.iter()).all(|v| v.is_finite());
        if !finite || (cov[(0, 1)] - cov[(1, 0)]).abs() > 1e-9 * scale {
            return Err(Error::DegenerateEllipse);
        }
        if cov.trace() <= 0.0 || cov.determinant() <= 0.0 {
            return Err(Error::DegenerateEllipse);
        }
        Ok(Self { mu, cov })
    }

    /// Quadratic form `(p - mu)^T C^-1 (p - mu)`, evaluated through the
    /// adjugate so boundary points of round-number ellipses land exactly on 4.
    pub fn mahalanobis_sq(&self, p: Vector2<f64>) -> f64 {
        let d = p - self.mu;
        let (cxx, cxy, cyy) = (self.cov[(0, 0)], self.cov[(0, 1)], self.cov[(1, 1)]);
        (cyy * d.x * d.x - 2.0 * cxy * d.x * d.y + cxx * d.y * d.y) / self.cov.determinant()
    }

    pub fn contains(&self, p: Vector2<f64>) -> bool {
        self.mahalanobis_sq(p) <= 4.0
    }

    pub fn axes(&self) -> AxesSpec {
        eigen2(&self.cov).expect("EllipseCov is positive definite by construction")
    }

    /// Half extents of the axis-aligned bounding box.
    pub fn half_extents(&self) -> Vector2<f64> {
        Vector2::new(2.0 * self.cov[(0, 0)].sqrt(), 2.0 * self.cov[(1, 1)].sqrt())
    }

    pub fn area(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.cov.determinant().sqrt()
    }
}

/// Eigen-structure of a 2x2 covariance.
///
/// `major_dir` is expressed in `(x, y)` image order; for a diagonal matrix
/// with `C_xx > C_yy` it is `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxesSpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub a1: f64,
    pub a2: f64,
    pub major_dir: Vector2<f64>,
}

impl AxesSpec {
    /// Angle of the major axis in `(-pi, pi]`.
    pub fn orientation(&self) -> f64 {
        self.major_dir.y.atan2(self.major_dir.x)
    }
}

/// Closed-form eigen-decomposition of a symmetric positive-definite 2x2.
///
/// Repeated eigenvalues give `major_dir = (1, 0)`.
pub fn eigen2(c: &Matrix2<f64>) -> Result<AxesSpec> {
    let (cxx, cyy) = (c[(0, 0)], c[(1, 1)]);
    let cxy = 0.5 * (c[(0, 1)] + c[(1, 0)]);
    let half_tr = 0.5 * (cxx + cyy);
    let det = cxx * cyy - cxy * cxy;
    if !(half_tr > 0.0 && det > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let (lambda1, lambda2) = if cxy == 0.0 {
        (cxx.max(cyy), cxx.min(cyy))
    } else {
        let l1 = half_tr + (0.5 * (cxx - cyy)).hypot(cxy);
        // product form avoids cancellation in the small root
        (l1, det / l1)
    };
    if lambda2 <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }

    let major_dir = if cxy == 0.0 {
        if cyy > cxx {
            Vector2::new(0.0, 1.0)
        } else {
            Vector2::new(1.0, 0.0)
        }
    } else {
        // Two algebraically equivalent eigenvectors; take the better
        // conditioned one.
        let u = Vector2::new(cxy, lambda1 - cxx);
        let v = Vector2::new(lambda1 - cyy, cxy);
        let w = if u.norm_squared() >= v.norm_squared() { u } else { v };
        w.normalize()
    };

    Ok(AxesSpec {
        lambda1,
        lambda2,
        a1: 2.0 * lambda1.sqrt(),
        a2: 2.0 * lambda2.sqrt(),
        major_dir,
    })
}

/// Unit normal of a 3d circle, oriented with `phi.z < 0`, and its radius in
/// projected units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleNormal {
    pub phi: Vector3<f64>,
    pub r: f64,
}

/// Recovers the two circles whose orthogonal projections have covariance `c`.
///
/// Both candidates have `r = a1` and `phi.z = -a2 / a1`; they differ in the
/// sign pattern of `(phi.x, phi.y)`, which must satisfy
/// `sign(phi.x * phi.y) = -sign(C_xy)`. When `C_xy == 0` the patterns
/// `(+, -)` and `(-, +)` are returned. A frontal circle yields the same
/// normal twice.
pub fn circle_normal_from_cov(c: &Matrix2<f64>) -> Result<[CircleNormal; 2]> {
    let axes = eigen2(c)?;
    let (cxx, cyy) = (c[(0, 0)], c[(1, 1)]);
    let cxy = 0.5 * (c[(0, 1)] + c[(1, 0)]);
    // a1^2 - 4 C_xx = 4 (lambda1 - C_xx), and likewise for y. Written so that
    // neither gap is a difference of nearly equal numbers.
    let d = 0.5 * (cxx - cyy);
    let s = d.hypot(cxy);
    let (gap_x, gap_y) = if s == 0.0 {
        (0.0, 0.0)
    } else if d > 0.0 {
        (cxy * cxy / (s + d), s + d)
    } else {
        (s - d, cxy * cxy / (s - d))
    };
    let px = (gap_x / axes.lambda1).sqrt();
    let py = (gap_y / axes.lambda1).sqrt();
    let pz = -(axes.lambda2 / axes.lambda1).sqrt();

    let patterns: [(f64, f64); 2] = if cxy < 0.0 {
        [(1.0, 1.0), (-1.0, -1.0)]
    } else {
        [(1.0, -1.0), (-1.0, 1.0)]
    };
    Ok(patterns.map(|(sx, sy)| CircleNormal {
        phi: Vector3::new(sx * px, sy * py, pz).normalize(),
        r: axes.a1,
    }))
}

/// Covariance of the orthogonal projection of a circle with unit normal `phi`
/// and radius `r`.
pub fn cov_from_normal(phi: &Vector3<f64>, r: f64) -> Result<Matrix2<f64>> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if (phi.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("normal {phi:?} is not unit length")));
    }
    if phi.z.abs() < 1e-12 {
        return Err(Error::DegenerateProjection);
    }
    let k = 0.25 * r * r;
    Ok(Matrix2::new(
        k * (1.0 - phi.x * phi.x),
        -k * phi.x * phi.y,
        -k * phi.x * phi.y,
        k * (1.0 - phi.y * phi.y),
    ))
}

/// Rough angular accuracy of a recovered normal.
///
/// `theta` is the tilt out of the image plane (`acos |phi_z|`), `delta_a2`
/// the uncertainty of the minor semi-axis and `r` the circle radius, all in
/// pixels. Tilted views give `|da2| / (r sin theta)`, near-frontal views
/// `sqrt(2 |da2| / r)`; the two are spliced where they are equal.
pub fn normal_accuracy(theta: f64, delta_a2: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let da = delta_a2.abs();
    if da == 0.0 {
        return Ok(0.0);
    }
    let frontal = (2.0 * da / r).sqrt();
    let s = (da / (2.0 * r)).sqrt();
    if s >= 1.0 {
        return Ok(frontal);
    }
    if theta >= splice_angle(da, r) {
        Ok(da / (r * theta.sin()))
    } else {
        Ok(frontal)
    }
}

/// Tilt at which the tilted and frontal accuracy estimates coincide.
pub fn splice_angle(delta_a2: f64, r: f64) -> f64 {
    (delta_a2.abs() / (2.0 * r)).sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ellipse(mu: (f64, f64), cov: [[f64; 2]; 2]) -> EllipseCov {
        EllipseCov::new(
            Vector2::new(mu.0, mu.1),
            Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]),
        )
        .unwrap()
    }

    fn random_normal(rng: &mut impl Rng, max_z: f64) -> Vector3<f64> {
        loop {
            let v: Vector3<f64> = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n < 1e-3 || n > 1.0 {
                continue;
            }
            let mut u = v / n;
            if u.z > 0.0 {
                u = -u;
            }
            if u.z <= max_z {
                return u;
            }
        }
    }

    #[test]
    fn center_is_inside() {
        let e = ellipse((3.0, -2.0), [[5.0, 1.0], [1.0, 2.0]]);
        assert!(e.contains(e.mu));
    }

    #[test]
    fn circle_boundary() {
        let r: f64 = 10.0;
        let e = ellipse((0.0, 0.0), [[r * r / 4.0, 0.0], [0.0, r * r / 4.0]]);
        assert!(e.contains(Vector2::new(r, 0.0)));
        assert!(e.contains(Vector2::new(0.0, -r)));
        assert!(!e.contains(Vector2::new(r + 1e-9, 0.0)));
    }

    #[test]
    fn axis_aligned_boundary() {
        let e = ellipse((1.0, 1.0), [[100.0, 0.0], [0.0, 25.0]]);
        assert_eq!(e.mahalanobis_sq(Vector2::new(21.0, 1.0)), 4.0);
        assert!(e.contains(Vector2::new(21.0, 1.0)));
        assert!(e.contains(Vector2::new(1.0, 11.0)));
        assert!(!e.contains(Vector2::new(1.0, 11.01)));
    }

    #[test]
    fn singular_cov_is_degenerate() {
        let r = EllipseCov::new(Vector2::zeros(), Matrix2::new(4.0, 2.0, 2.0, 1.0));
        assert!(matches!(r, Err(Error::DegenerateEllipse)));
        let r = EllipseCov::new(Vector2::zeros(), Matrix2::new(1.0, 0.5, 0.0, 1.0));
        assert!(matches!(r, Err(Error::DegenerateEllipse)));
    }

    #[test]
    fn eigen_diagonal() {
        let ax = eigen2(&Matrix2::new(25.0, 0.0, 0.0, 16.0)).unwrap();
        assert_eq!((ax.lambda1, ax.lambda2, ax.a1, ax.a2), (25.0, 16.0, 10.0, 8.0));
        assert_eq!(ax.major_dir, Vector2::new(1.0, 0.0));
        let ax = eigen2(&Matrix2::new(16.0, 0.0, 0.0, 25.0)).unwrap();
        assert_eq!(ax.major_dir, Vector2::new(0.0, 1.0));
    }

    #[test]
    fn eigen_coupled() {
        // det([[2,1],[1,2]] - l I) = l^2 - 4l + 3 = (l - 3)(l - 1)
        let ax = eigen2(&Matrix2::new(2.0, 1.0, 1.0, 2.0)).unwrap();
        assert!((ax.lambda1 - 3.0).abs() < 1e-15);
        assert!((ax.lambda2 - 1.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!((ax.major_dir - Vector2::new(s, s)).norm() < 1e-15);
        assert!((ax.orientation() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_identity_convention() {
        let ax = eigen2(&Matrix2::identity()).unwrap();
        assert_eq!((ax.lambda1, ax.lambda2), (1.0, 1.0));
        assert_eq!(ax.major_dir, Vector2::new(1.0, 0.0));
    }

    #[test]
    fn eigen_rejects_indefinite() {
        assert!(eigen2(&Matrix2::new(1.0, 2.0, 2.0, 1.0)).is_err());
        assert!(eigen2(&Matrix2::new(-1.0, 0.0, 0.0, -1.0)).is_err());
        assert!(eigen2(&Matrix2::zeros()).is_err());
    }

    #[test]
    fn eigen_trace_det_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let l1: f64 = rng.random_range(0.01..1e4);
            let l2: f64 = rng.random_range(0.01..1e4);
            let t: f64 = rng.random_range(-PI..PI);
            let r = nalgebra::Rotation2::new(t).into_inner();
            let c = r * Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
            let c = 0.5 * (c + c.transpose());
            let ax = eigen2(&c).unwrap();
            assert!(ax.a1 >= ax.a2);
            let det = c.determinant();
            assert!((ax.lambda1 * ax.lambda2 - det).abs() <= 1e-9 * det);
            assert!((ax.lambda1 + ax.lambda2 - c.trace()).abs() <= 1e-9 * c.trace());
            let v = ax.major_dir;
            assert!((c * v - ax.lambda1 * v).norm() <= 1e-9 * c.norm());
        }
    }

    #[test]
    fn frontal_circle_normal() {
        let r: f64 = 7.0;
        let c = Matrix2::identity() * (r * r / 4.0);
        for cand in circle_normal_from_cov(&c).unwrap() {
            assert!((cand.phi - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
            assert!((cand.r - r).abs() < 1e-12);
        }
    }

    #[test]
    fn tilted_about_y() {
        let [p, q] = circle_normal_from_cov(&Matrix2::new(16.0, 0.0, 0.0, 25.0)).unwrap();
        assert!((p.phi - Vector3::new(0.6, 0.0, -0.8)).norm() < 1e-12);
        assert!((q.phi - Vector3::new(-0.6, 0.0, -0.8)).norm() < 1e-12);
        assert_eq!(p.r, 10.0);
    }

    #[test]
    fn sign_constraint_follows_cxy() {
        let phi = Vector3::new(0.3, 0.4, -(1.0f64 - 0.25).sqrt());
        let c = cov_from_normal(&phi, 5.0).unwrap();
        assert!(c[(0, 1)] < 0.0);
        for cand in circle_normal_from_cov(&c).unwrap() {
            assert!(cand.phi.x * cand.phi.y > 0.0);
            assert!(cand.phi.z < 0.0);
        }
    }

    #[test]
    fn forward_covariance_examples() {
        let c = cov_from_normal(&Vector3::new(0.0, 0.0, -1.0), 2.0).unwrap();
        assert_eq!(c, Matrix2::identity());
        let c = cov_from_normal(&Vector3::new(0.6, 0.0, -0.8), 10.0).unwrap();
        assert!((c - Matrix2::new(16.0, 0.0, 0.0, 25.0)).norm() < 1e-12);
    }

    #[test]
    fn forward_rejects_edge_on() {
        let r = cov_from_normal(&Vector3::new(1.0, 0.0, 0.0), 3.0);
        assert!(matches!(r, Err(Error::DegenerateProjection)));
        assert!(cov_from_normal(&Vector3::new(0.0, 0.0, -1.0), 0.0).is_err());
    }

    #[test]
    fn forward_det_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let phi = random_normal(&mut rng, -1e-3);
            let r: f64 = rng.random_range(0.1..200.0);
            let c = cov_from_normal(&phi, r).unwrap();
            let det = r.powi(4) / 16.0 * phi.z * phi.z;
            let tr = r * r / 4.0 * (1.0 + phi.z * phi.z);
            assert!((c.determinant() - det).abs() <= 1e-9 * (r.powi(4) / 16.0));
            assert!((c.trace() - tr).abs() <= 1e-12 * tr);
        }
    }

    #[test]
    fn round_trip_recovers_one_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let phi = random_normal(&mut rng, -0.05);
            let r: f64 = rng.random_range(0.5..500.0);
            let c = cov_from_normal(&phi, r).unwrap();
            let cands = circle_normal_from_cov(&c).unwrap();
            let best = cands.iter().map(|k| (k.phi - phi).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "phi {phi:?} best {best}");
            for k in cands {
                assert!((k.r - r).abs() < 1e-9 * r);
                // a2/a1 = |phi_z|
                assert!((k.phi.z - phi.z).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn accuracy_branches() {
        assert!((normal_accuracy(FRAC_PI_2, 1.0, 100.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((normal_accuracy(0.0, 1.0, 50.0).unwrap() - 0.2).abs() < 1e-15);
        assert!(normal_accuracy(0.3, 1.0, 0.0).is_err());
        assert_eq!(normal_accuracy(0.3, 0.0, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_is_continuous_at_splice() {
        for &(da, r) in &[(1.0, 50.0), (0.1, 20.0), (2.0, 400.0)] {
            let frontal = (2.0f64 * da / r).sqrt();
            let ts = splice_angle(da, r);
            let tilted_at_splice = da / (r * ts.sin());
            assert!((tilted_at_splice - frontal).abs() < 1e-12);
            // Past the splice the tilted estimate never exceeds the frontal one.
            for i in 1..=200 {
                let theta = i as f64 / 200.0 * FRAC_PI_2;
                let est = normal_accuracy(theta, da, r).unwrap();
                assert!(est <= frontal + 1e-12);
                if theta >= ts {
                    assert!((est - da / (r * theta.sin())).abs() < 1e-15);
                } else {
                    assert_eq!(est, frontal);
                }
            }
        }
    }


    fn away_normal() -> impl proptest::strategy::Strategy<Value = Vector3<f64>> {
        use proptest::prelude::*;
        (0.0..2.0 * PI, 0.05f64..1.0).prop_map(|(az, down)| {
            let side = (1.0 - down * down).sqrt();
            Vector3::new(side * az.cos(), side * az.sin(), -down)
        })
    }

    proptest::proptest! {
        #[test]
        fn prop_normal_round_trip(phi in away_normal(), r in 0.5f64..200.0) {
            let c = cov_from_normal(&phi, r).unwrap();
            let found = circle_normal_from_cov(&c).unwrap();
            let best = found.iter().map(|n| (n.phi - phi).norm()).fold(f64::INFINITY, f64::min);
            proptest::prop_assert!(best < 1e-9, "best {best}");
            for n in found {
                proptest::prop_assert!((n.r - r).abs() < 1e-9 * r);
                proptest::prop_assert!(n.phi.z < 0.0);
                // both candidates project to the same ellipse
                let back = cov_from_normal(&n.phi, n.r).unwrap();
                proptest::prop_assert!((back - c).amax() < 1e-9 * r * r);
            }
        }

        #[test]
        fn prop_eigen2_reconstructs(cxx in 0.1f64..100.0, cyy in 0.1f64..100.0, t in -0.99f64..0.99) {
            let cxy = t * (cxx * cyy).sqrt();
            let c = Matrix2::new(cxx, cxy, cxy, cyy);
            let e = eigen2(&c).unwrap();
            proptest::prop_assert!(e.lambda1 >= e.lambda2 && e.lambda2 > 0.0);
            let u = e.major_dir;
            let v = Vector2::new(-u.y, u.x);
            let rebuilt = e.lambda1 * u * u.transpose() + e.lambda2 * v * v.transpose();
            proptest::prop_assert!((rebuilt - c).amax() < 1e-12 * e.lambda1);
        }
    }
}
