//! Pose from circles: a similarity transform `x' = sigma Q x + q` taking model
//! points to pixels, where `Q` is the top two rows of a rotation.
//!
//! One circle fixes everything but a spin `beta` about the circle normal. Two
//! wheels with parallel axles fix `beta` as well, up to a discrete ambiguity
//! (normal sign, which image ellipse is the back wheel, which side of the car
//! is visible).

use nalgebra::{Matrix2x3, Vector2, Vector3};

use crate::conic::{circle_normal_from_cov, cov_from_normal, eigen2, EllipseCov};
use crate::detect::WheelPair;
use crate::error::{Error, Result};
use crate::rot::Quat;

/// `|phi_z|` below which a wheel is treated as seen edge-on.
pub const EDGE_ON_EPS: f64 = 1e-6;

/// Same-side axles must agree this closely.
pub const PARALLEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WheelRole {
    BackLeft,
    FrontLeft,
    BackRight,
    FrontRight,
    Generic,
}

impl WheelRole {
    pub const ALL: [WheelRole; 5] = [
        WheelRole::BackLeft,
        WheelRole::FrontLeft,
        WheelRole::BackRight,
        WheelRole::FrontRight,
        WheelRole::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WheelRole::BackLeft => "back-left",
            WheelRole::FrontLeft => "front-left",
            WheelRole::BackRight => "back-right",
            WheelRole::FrontRight => "front-right",
            WheelRole::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// A 3d circle: centre, unit axle and radius, in model units.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSpec {
    pub id: String,
    pub role: WheelRole,
    pub center: Vector3<f64>,
    pub axle: Vector3<f64>,
    pub radius: f64,
}

impl CircleSpec {
    pub fn new(id: impl Into<String>, role: WheelRole, center: Vector3<f64>, axle: Vector3<f64>, radius: f64) -> Result<Self> {
        let id = id.into();
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidModel(format!("circle {id}: radius must be positive")));
        }
        if !center.iter().all(|v| v.is_finite()) || (axle.norm() - 1.0).abs() > PARALLEL_TOL {
            return Err(Error::InvalidModel(format!("circle {id}: axle must be a finite unit vector")));
        }
        Ok(Self { id, role, center, axle, radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Box dimensions of a generic four-wheeled vehicle, model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleDims {
    pub wheelbase: f64,
    pub track: f64,
    /// How far the wheel centres sit below the model origin.
    pub wheel_drop: f64,
    pub wheel_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleModel {
    pub name: String,
    /// Model units per metre, informational.
    pub unit_scale: f64,
    pub circles: Vec<CircleSpec>,
}

impl CircleModel {
    /// Validates ids and, when any wheel role is present, that all four wheels
    /// appear once with parallel same-side axles.
    pub fn new(name: impl Into<String>, unit_scale: f64, circles: Vec<CircleSpec>) -> Result<Self> {
        let model = Self { name: name.into(), unit_scale, circles };
        if model.circles.is_empty() {
            return Err(Error::InvalidModel("no circles".into()));
        }
        for (i, c) in model.circles.iter().enumerate() {
            if model.circles[..i].iter().any(|d| d.id == c.id) {
                return Err(Error::InvalidModel(format!("duplicate circle id {}", c.id)));
            }
        }
        let wheels = model.circles.iter().filter(|c| c.role != WheelRole::Generic).count();
        if wheels > 0 {
            for role in &WheelRole::ALL[..4] {
                let n = model.circles.iter().filter(|c| c.role == *role).count();
                if n != 1 {
                    return Err(Error::InvalidModel(format!("expected one {} wheel, found {n}", role.as_str())));
                }
            }
            for side in [Side::Left, Side::Right] {
                let (b, f) = model.wheels(side)?;
                if b.axle.cross(&f.axle).norm() > PARALLEL_TOL || b.axle.dot(&f.axle) <= 0.0 {
                    return Err(Error::InvalidModel(format!("{} axles are not parallel", side.as_str())));
                }
            }
        }
        Ok(model)
    }

    /// Four wheels on a right-handed body frame with `left = up x fwd`.
    /// Axles point inwards.
    pub fn vehicle(name: impl Into<String>, up: Vector3<f64>, fwd: Vector3<f64>, dims: VehicleDims) -> Result<Self> {
        let (up, fwd) = (up.normalize(), fwd.normalize());
        if up.dot(&fwd).abs() > 1e-9 {
            return Err(Error::InvalidModel("up and forward must be orthogonal".into()));
        }
        let left = up.cross(&fwd);
        let drop = -dims.wheel_drop * up;
        let (hl, ht) = (dims.wheelbase / 2.0, dims.track / 2.0);
        let wheel = |role, id: &str, along: f64, across: f64| {
            let axle = if across > 0.0 { -left } else { left };
            CircleSpec::new(id, role, along * fwd + across * left + drop, axle, dims.wheel_radius)
        };
        let circles = vec![
            wheel(WheelRole::BackLeft, "back-left", -hl, ht)?,
            wheel(WheelRole::FrontLeft, "front-left", hl, ht)?,
            wheel(WheelRole::BackRight, "back-right", -hl, -ht)?,
            wheel(WheelRole::FrontRight, "front-right", hl, -ht)?,
        ];
        Self::new(name, 1.0, circles)
    }

    pub fn circle(&self, role: WheelRole) -> Option<&CircleSpec> {
        self.circles.iter().find(|c| c.role == role)
    }

    /// `(back, front)` wheels of one side.
    pub fn wheels(&self, side: Side) -> Result<(&CircleSpec, &CircleSpec)> {
        let (b, f) = match side {
            Side::Left => (WheelRole::BackLeft, WheelRole::FrontLeft),
            Side::Right => (WheelRole::BackRight, WheelRole::FrontRight),
        };
        match (self.circle(b), self.circle(f)) {
            (Some(b), Some(f)) => Ok((b, f)),
            _ => Err(Error::InvalidModel(format!("model {} has no {} wheels", self.name, side.as_str()))),
        }
    }
}

/// Similarity transform `x' = sigma Q x + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Quat,
    pub sigma: f64,
    pub shift: Vector2<f64>,
}

impl Pose {
    pub fn new(rotation: Quat, sigma: f64, shift: Vector2<f64>) -> Result<Self> {
        let rotation = rotation.normalize()?;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {sigma}")));
        }
        Ok(Self { rotation, sigma, shift })
    }

    /// `Q`, the top two rows of the rotation matrix.
    pub fn projection(&self) -> Matrix2x3<f64> {
        self.rotation.to_matrix().expect("pose rotation is unit").top_rows()
    }

    /// Rotates a model direction into the camera frame.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.to_matrix().expect("pose rotation is unit").apply(v)
    }
}

pub fn project_point(pose: &Pose, x: &Vector3<f64>) -> Vector2<f64> {
    pose.sigma * (pose.projection() * x) + pose.shift
}

/// Image of a model circle: the ellipse and the rotated axle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedCircle {
    pub ellipse: EllipseCov,
    pub normal: Vector3<f64>,
}

impl ProjectedCircle {
    /// The axle faces away from the viewer.
    pub fn facing_away(&self) -> bool {
        self.normal.z < 0.0
    }
}

pub fn project_circle(pose: &Pose, circle: &CircleSpec) -> Result<ProjectedCircle> {
    let normal = pose.rotate(&circle.axle);
    let cov = cov_from_normal(&normal, pose.sigma * circle.radius)?;
    let mu = project_point(pose, &circle.center);
    Ok(ProjectedCircle { ellipse: EllipseCov::new(mu, cov)?, normal })
}

fn select_normal(cov: &nalgebra::Matrix2<f64>, branch: usize) -> Result<Vector3<f64>> {
    if branch > 1 {
        return Err(Error::InvalidArgument(format!("normal branch must be 0 or 1, got {branch}")));
    }
    Ok(circle_normal_from_cov(cov)?[branch].phi)
}

fn finish(circle: &CircleSpec, mu: Vector2<f64>, q1: Quat, phi: &Vector3<f64>, beta: f64, sigma: f64) -> Result<Pose> {
    let q2 = Quat::from_axis_angle(phi, beta)?;
    let rotation = q2.compose(q1);
    let q = rotation.to_matrix()?.top_rows();
    Pose::new(rotation, sigma, mu - sigma * (q * circle.center))
}

/// Aligns one circle to one ellipse. `branch` picks the normal candidate and
/// `beta` the spin about it.
pub fn align_single(circle: &CircleSpec, e: &EllipseCov, branch: usize, beta: f64) -> Result<Pose> {
    let phi = select_normal(&e.cov, branch)?;
    let a1 = eigen2(&e.cov)?.a1;
    let q1 = Quat::between(&circle.axle, &phi);
    finish(circle, e.mu, q1, &phi, beta, a1 / circle.radius)
}

/// Result of fitting a back wheel ellipse plus the front wheel centre.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoWheelFit {
    pub pose: Pose,
    pub beta: f64,
    /// `|cos^2 + sin^2 - 1|` of the unnormalised spin estimate.
    pub beta_defect: f64,
    /// Back wheel normal in the camera frame.
    pub phi: Vector3<f64>,
    /// Lifted image displacement from back to front wheel centre.
    pub delta: Vector3<f64>,
}

/// Uses the back wheel ellipse for the normal and only the front wheel centre
/// for the spin and scale, since the front wheel may be steered.
pub fn align_two_wheels(
    back: &CircleSpec,
    front: &CircleSpec,
    e_back: &EllipseCov,
    mu_front: Vector2<f64>,
    branch: usize,
) -> Result<TwoWheelFit> {
    let phi = select_normal(&e_back.cov, branch)?;
    if phi.z.abs() <= EDGE_ON_EPS {
        return Err(Error::EdgeOnWheel);
    }
    let d = mu_front - e_back.mu;
    let delta = Vector3::new(d.x, d.y, -(d.x * phi.x + d.y * phi.y) / phi.z);
    let q1 = Quat::between(&back.axle, &phi);
    let big_delta = q1.to_matrix()?.apply(&(front.center - back.center));
    let (nd, nb) = (delta.norm(), big_delta.norm());
    if nd == 0.0 || nb == 0.0 {
        return Err(Error::CoincidentCenters);
    }
    let cos = delta.dot(&big_delta) / (nd * nb);
    let sin = phi.cross(&big_delta).dot(&delta) / (nd * nb);
    let beta_defect = (cos * cos + sin * sin - 1.0).abs();
    let beta = sin.atan2(cos);
    let pose = finish(back, e_back.mu, q1, &phi, beta, nd / nb)?;
    Ok(TwoWheelFit { pose, beta, beta_defect, phi, delta })
}

/// Leaf of the discrete ambiguity tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    /// Index into the two normal candidates; 0 has `phi_x >= 0`.
    pub normal: usize,
    /// The image ellipse on the right is the back wheel.
    pub swapped: bool,
    pub side: Side,
}

impl Branch {
    /// `+1` or `-1`, the sign of `phi_x` of the chosen normal.
    pub fn normal_sign(&self) -> i8 {
        if self.normal == 0 { 1 } else { -1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConsistencyReport {
    pub radius_ratio_error: f64,
    pub coplanarity_residual: f64,
    pub beta_defect: f64,
}

impl ConsistencyReport {
    /// Lower is more plausible.
    pub fn score(&self) -> f64 {
        self.radius_ratio_error + self.coplanarity_residual
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseCandidate {
    pub pose: Pose,
    pub branch: Branch,
    pub beta: f64,
    pub consistency: ConsistencyReport,
}

/// Two wheel ellipses, `left` being the one with smaller image x.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePair {
    pub left: EllipseCov,
    pub right: EllipseCov,
}

impl ImagePair {
    pub fn new(a: EllipseCov, b: EllipseCov) -> Self {
        if (a.mu.x, a.mu.y) <= (b.mu.x, b.mu.y) {
            Self { left: a, right: b }
        } else {
            Self { left: b, right: a }
        }
    }

    /// `(back, front)` image ellipses for a branch.
    pub fn ordered(&self, swapped: bool) -> (&EllipseCov, &EllipseCov) {
        if swapped { (&self.right, &self.left) } else { (&self.left, &self.right) }
    }
}

impl From<&WheelPair> for ImagePair {
    fn from(p: &WheelPair) -> Self {
        Self::new(p.back.ellipse(), p.front.ellipse())
    }
}

/// Scale and coplanarity checks against the front wheel, whose ellipse plays
/// no part in the fit.
pub fn consistency_checks(fit: &TwoWheelFit, e_front: &EllipseCov, front: &CircleSpec) -> Result<ConsistencyReport> {
    let a1 = eigen2(&e_front.cov)?.a1;
    let radius_ratio_error = (a1 / (fit.pose.sigma * front.radius) - 1.0).abs();
    let cands = circle_normal_from_cov(&e_front.cov)?;
    let phi_front = if cands[0].phi.dot(&fit.phi) >= cands[1].phi.dot(&fit.phi) {
        cands[0].phi
    } else {
        cands[1].phi
    };
    let coplanarity_residual = fit.delta.dot(&fit.phi.cross(&phi_front)).abs() / fit.delta.norm();
    Ok(ConsistencyReport { radius_ratio_error, coplanarity_residual, beta_defect: fit.beta_defect })
}

/// Side whose wheels are seen when the car is upright: the left side when the
/// front wheel is further right in the image.
pub fn upright_side(e_back: &EllipseCov, e_front: &EllipseCov) -> Side {
    if e_front.mu.x > e_back.mu.x { Side::Left } else { Side::Right }
}

/// All pose candidates for a wheel pair, in lexicographic branch order.
/// Eight in general, four when the car is assumed upright.
pub fn enumerate_candidates(model: &CircleModel, pair: &ImagePair, upright: bool) -> Result<Vec<PoseCandidate>> {
    let mut out = Vec::with_capacity(8);
    for normal in 0..2 {
        for swapped in [false, true] {
            let (e_back, e_front) = pair.ordered(swapped);
            for side in [Side::Left, Side::Right] {
                if upright && side != upright_side(e_back, e_front) {
                    continue;
                }
                let (back, front) = model.wheels(side)?;
                let fit = align_two_wheels(back, front, e_back, e_front.mu, normal)?;
                let consistency = consistency_checks(&fit, e_front, front)?;
                out.push(PoseCandidate {
                    pose: fit.pose,
                    branch: Branch { normal, swapped, side },
                    beta: fit.beta,
                    consistency,
                });
            }
        }
    }
    Ok(out)
}

/// Candidates sorted by consistency score, stable on ties.
pub fn rank_candidates(mut cands: Vec<PoseCandidate>) -> Vec<PoseCandidate> {
    cands.sort_by(|a, b| a.consistency.score().total_cmp(&b.consistency.score()));
    cands
}
