//! Synthetic scenes with exact ground truth: a circle model under a known
//! pose, rasterised as bright filled ellipses on a dark background.
//!
//! Only circles whose axle faces away from the viewer are drawn. For a car
//! model with inward axles that is the near side. Noise is i.i.d. Gaussian
//! from a ChaCha8 stream seeded with `seed`, drawn in raster order.

use nalgebra::{Matrix2, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::conic::{circle_normal_from_cov, eigen2, EllipseCov};
use crate::error::{Error, Result};
use crate::pose::{project_circle, CircleModel, CircleSpec, Pose, VehicleDims, WheelRole};
use crate::raster::GrayImage;
use crate::rot::Quat;

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occluder {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub model: CircleModel,
    pub pose: Pose,
    pub width: usize,
    pub height: usize,
    pub foreground: f64,
    pub background: f64,
    pub noise_std: f64,
    pub occluders: Vec<Occluder>,
    pub seed: u64,
    /// Samples per pixel side; 1 samples pixel centres only.
    pub supersample: usize,
}

impl SceneSpec {
    /// Noise-free 800x600 scene, white on black.
    pub fn new(model: CircleModel, pose: Pose) -> Self {
        Self {
            model,
            pose,
            width: 800,
            height: 600,
            foreground: 1.0,
            background: 0.0,
            noise_std: 0.0,
            occluders: Vec::new(),
            seed: 0,
            supersample: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::EmptyImage);
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.foreground) || !unit(self.background) || self.foreground <= self.background {
            return Err(Error::InvalidArgument("need 0 <= background < foreground <= 1".into()));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidArgument("noise_std must be finite and non-negative".into()));
        }
        if self.supersample == 0 {
            return Err(Error::InvalidArgument("supersample must be at least 1".into()));
        }
        Ok(())
    }
}

/// Exact image of one model circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleTruth {
    pub id: String,
    pub role: WheelRole,
    pub mu: Vector2<f64>,
    pub cov: Matrix2<f64>,
    pub a1: f64,
    pub a2: f64,
    /// Rotated axle.
    pub normal: Vector3<f64>,
    /// Both normals consistent with `cov`, as recovered from the image.
    pub normal_candidates: [Vector3<f64>; 2],
    /// Faces away from the viewer and lies fully inside the image.
    pub visible: bool,
}

impl CircleTruth {
    pub fn ellipse(&self) -> EllipseCov {
        EllipseCov { mu: self.mu, cov: self.cov }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub pose: Pose,
    pub circles: Vec<CircleTruth>,
}

impl GroundTruth {
    pub fn visible(&self) -> impl Iterator<Item = &CircleTruth> {
        self.circles.iter().filter(|c| c.visible)
    }

    pub fn circle(&self, role: WheelRole) -> Option<&CircleTruth> {
        self.circles.iter().find(|c| c.role == role)
    }
}

fn circle_truth(pose: &Pose, c: &CircleSpec, width: usize, height: usize) -> Result<CircleTruth> {
    let proj = project_circle(pose, c)?;
    let e = &proj.ellipse;
    let axes = eigen2(&e.cov)?;
    let ext = e.half_extents();
    let inside = e.mu.x - ext.x >= 0.0
        && e.mu.y - ext.y >= 0.0
        && e.mu.x + ext.x <= (width - 1) as f64
        && e.mu.y + ext.y <= (height - 1) as f64;
    let cands = circle_normal_from_cov(&e.cov)?;
    Ok(CircleTruth {
        id: c.id.clone(),
        role: c.role,
        mu: e.mu,
        cov: e.cov,
        a1: axes.a1,
        a2: axes.a2,
        normal: proj.normal,
        normal_candidates: [cands[0].phi, cands[1].phi],
        visible: proj.facing_away() && inside,
    })
}

/// Ground truth for every model circle under the scene pose.
pub fn ground_truth(scene: &SceneSpec) -> Result<GroundTruth> {
    let circles = scene
        .model
        .circles
        .iter()
        .map(|c| circle_truth(&scene.pose, c, scene.width, scene.height))
        .collect::<Result<_>>()?;
    Ok(GroundTruth { pose: scene.pose, circles })
}

pub fn render(scene: &SceneSpec) -> Result<(GrayImage, GroundTruth)> {
    scene.validate()?;
    let truth = ground_truth(scene)?;
    let shapes: Vec<EllipseCov> = truth.visible().map(CircleTruth::ellipse).collect();

    let k = scene.supersample;
    let offsets: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64 - 0.5).collect();
    let (fg, bg) = (scene.foreground, scene.background);
    let mut data = Vec::with_capacity(scene.width * scene.height);
    for y in 0..scene.height {
        for x in 0..scene.width {
            let mut hits = 0usize;
            for oy in &offsets {
                for ox in &offsets {
                    let p = Vector2::new(x as f64 + ox, y as f64 + oy);
                    if shapes.iter().any(|e| e.contains(p)) {
                        hits += 1;
                    }
                }
            }
            let f = hits as f64 / (k * k) as f64;
            data.push(bg + f * (fg - bg));
        }
    }

    if scene.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        let normal = Normal::new(0.0, scene.noise_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for v in &mut data {
            *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    for o in &scene.occluders {
        for y in o.y0.min(scene.height)..o.y1.min(scene.height) {
            for x in o.x0.min(scene.width)..o.x1.min(scene.width) {
                data[y * scene.width + x] = bg;
            }
        }
    }
    Ok((GrayImage::new(scene.width, scene.height, data)?, truth))
}

/// Axle of the table top in the table fixture, as cited.
pub const TABLE_AXLE: [f64; 3] = [0.7568, 0.3243, -0.5676];
pub const TABLE_SIGMA: f64 = 6.0;
pub const TABLE_SHIFT: [f64; 2] = [400.0, 340.0];
/// Table-top radius in model units. Scaled so that `TABLE_SIGMA` gives a
/// 60 px semi-major axis.
pub const TABLE_RADIUS: f64 = 10.0;

/// A flat round table top centred on the model origin, axle `-z`.
pub fn table_model() -> CircleModel {
    let top = CircleSpec::new("top", WheelRole::Generic, Vector3::zeros(), -Vector3::z(), TABLE_RADIUS)
        .expect("valid table top");
    CircleModel::new("table", 1.0, vec![top]).expect("valid table model")
}

/// The table top turned onto the cited axle, no spin, at the cited scale and
/// shift.
pub fn table_fixture() -> SceneSpec {
    let target = Vector3::from(TABLE_AXLE).normalize();
    let rotation = Quat::between(&-Vector3::z(), &target);
    let pose = Pose::new(rotation, TABLE_SIGMA, Vector2::from(TABLE_SHIFT)).expect("valid table pose");
    SceneSpec { foreground: 0.9, background: 0.1, ..SceneSpec::new(table_model(), pose) }
}

/// A cited vehicle pose. `up` and `fwd` give the body frame of the model the
/// quaternion refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarFixture {
    pub name: &'static str,
    pub quat: [f64; 4],
    pub sigma: f64,
    pub shift: [f64; 2],
    pub up: [f64; 3],
    pub fwd: [f64; 3],
}

pub const CAR_DIMS: VehicleDims = VehicleDims { wheelbase: 2.6, track: 1.5, wheel_drop: 0.3, wheel_radius: 0.4 };

pub const CAR_FIXTURES: [CarFixture; 6] = [
    CarFixture { name: "golf-1", quat: [-0.2162, -0.2162, -0.6053, 0.7350], sigma: 60.0, shift: [400.0, 300.0], up: [0.0, 0.0, 1.0], fwd: [0.0, 1.0, 0.0] },
    CarFixture { name: "golf-2", quat: [-0.4417, -0.5522, 0.5522, -0.4417], sigma: 50.0, shift: [380.0, 330.0], up: [0.0, 0.0, 1.0], fwd: [0.0, 1.0, 0.0] },
    CarFixture { name: "audi-1", quat: [0.9701, 0.0, 0.2425, 0.0], sigma: 150.0, shift: [400.0, 300.0], up: [0.0, -1.0, 0.0], fwd: [1.0, 0.0, 0.0] },
    CarFixture { name: "audi-2", quat: [0.9701, 0.0, -0.2425, 0.0], sigma: 150.0, shift: [400.0, 300.0], up: [0.0, -1.0, 0.0], fwd: [1.0, 0.0, 0.0] },
    CarFixture { name: "bmw-1", quat: [0.0948, 0.1896, -0.9481, 0.2370], sigma: 100.0, shift: [400.0, 300.0], up: [0.0, -1.0, 0.0], fwd: [1.0, 0.0, 0.0] },
    CarFixture { name: "bmw-2", quat: [0.8729, -0.2182, 0.4364, 0.0], sigma: 100.0, shift: [400.0, 300.0], up: [0.0, -1.0, 0.0], fwd: [1.0, 0.0, 0.0] },
];

pub fn fixture_names() -> Vec<&'static str> {
    std::iter::once("table").chain(CAR_FIXTURES.iter().map(|f| f.name)).collect()
}

impl CarFixture {
    pub fn find(name: &str) -> Result<&'static CarFixture> {
        CAR_FIXTURES
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownFixture(name.to_owned()))
    }

    pub fn model(&self) -> CircleModel {
        let model_name = self.name.split('-').next().unwrap_or(self.name);
        CircleModel::vehicle(model_name, Vector3::from(self.up), Vector3::from(self.fwd), CAR_DIMS)
            .expect("valid vehicle frame")
    }

    /// The cited quaternion is rounded to four places, so it is renormalised.
    pub fn pose(&self) -> Pose {
        Pose::new(Quat::from_array(self.quat), self.sigma, Vector2::from(self.shift)).expect("valid cited pose")
    }

    pub fn scene(&self) -> SceneSpec {
        SceneSpec { foreground: 0.9, background: 0.1, ..SceneSpec::new(self.model(), self.pose()) }
    }
}

pub fn car_fixture(name: &str) -> Result<SceneSpec> {
    Ok(CarFixture::find(name)?.scene())
}

/// Any fixture by name, `"table"` included.
pub fn fixture(name: &str) -> Result<SceneSpec> {
    if name == "table" {
        Ok(table_fixture())
    } else {
        car_fixture(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::cov_from_normal;
    use crate::detect::{blob_moments, detect_ellipses, label_components, DetectConfig};
    use crate::pose::Side;
    use crate::raster::BinaryImage;

    fn disk_scene(axle: Vector3<f64>, r: f64) -> SceneSpec {
        let c = CircleSpec::new("c", WheelRole::Generic, Vector3::zeros(), -Vector3::z(), r).unwrap();
        let model = CircleModel::new("disk", 1.0, vec![c]).unwrap();
        let pose = Pose::new(Quat::between(&-Vector3::z(), &axle), 1.0, Vector2::new(200.0, 150.0)).unwrap();
        SceneSpec { width: 400, height: 300, ..SceneSpec::new(model, pose) }
    }

    fn bright_moments(img: &GrayImage) -> crate::detect::Moments {
        let bin = BinaryImage::from_fn(img.width(), img.height(), |x, y| img.get(x, y) > 0.5);
        let blobs = label_components(&bin, 1);
        assert_eq!(blobs.len(), 1);
        blob_moments(&blobs[0].pixels).unwrap()
    }

    #[test]
    fn frontal_disk_area() {
        let (img, truth) = render(&disk_scene(-Vector3::z(), 50.0)).unwrap();
        let area = img.data().iter().filter(|&&v| v > 0.5).count() as f64;
        let expect = std::f64::consts::PI * 2500.0;
        assert!((area - expect).abs() < 0.01 * expect, "{area}");
        assert!(truth.circles[0].visible);
    }

    #[test]
    fn tilted_disk_axes() {
        let (img, truth) = render(&disk_scene(Vector3::new(0.6, 0.0, -0.8), 50.0)).unwrap();
        let t = &truth.circles[0];
        assert!((t.a1 - 50.0).abs() < 1e-9 && (t.a2 - 40.0).abs() < 1e-9);
        let m = bright_moments(&img);
        let ax = eigen2(&m.cov).unwrap();
        assert!((ax.a1 - 50.0).abs() < 0.02 * 50.0, "{}", ax.a1);
        assert!((ax.a2 - 40.0).abs() < 0.02 * 40.0, "{}", ax.a2);
    }

    #[test]
    fn analytic_covariance_matches_raster() {
        for (axle, r) in [
            (Vector3::new(0.6, 0.0, -0.8), 50.0),
            (Vector3::new(0.3, -0.5, -0.7), 30.0),
            (Vector3::new(-0.2, 0.8, -0.4), 60.0),
        ] {
            let axle = axle.normalize();
            let (img, truth) = render(&disk_scene(axle, r)).unwrap();
            let t = &truth.circles[0];
            assert!(t.a2 >= 10.0);
            assert!((t.cov - cov_from_normal(&t.normal, r).unwrap()).norm() < 1e-12);
            let m = bright_moments(&img);
            assert!((m.cov - t.cov).norm() < 0.02 * t.cov.norm(), "{:?}", axle);
            assert!((m.mean - t.mu).norm() < 0.5);
        }
    }

    #[test]
    fn supersampling_blends_edges() {
        let mut scene = disk_scene(-Vector3::z(), 20.0);
        scene.supersample = 4;
        let (img, _) = render(&scene).unwrap();
        assert!(img.data().iter().any(|&v| v > 0.0 && v < 1.0));
        let area: f64 = img.data().iter().sum();
        let expect = std::f64::consts::PI * 400.0;
        assert!((area - expect).abs() < 0.01 * expect, "{area}");
    }

    #[test]
    fn same_seed_same_image() {
        let mut scene = car_fixture("bmw-1").unwrap();
        scene.noise_std = 0.05;
        scene.seed = 7;
        let (a, _) = render(&scene).unwrap();
        let (b, _) = render(&scene).unwrap();
        assert_eq!(crate::raster::encode_pgm(&a), crate::raster::encode_pgm(&b));
        scene.seed = 8;
        let (c, _) = render(&scene).unwrap();
        assert_ne!(a, c);
        assert!(c.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn occluders_paint_background() {
        let mut scene = disk_scene(-Vector3::z(), 50.0);
        scene.occluders.push(Occluder { x0: 190, y0: 100, x1: 260, y1: 200 });
        scene.noise_std = 0.1;
        let (img, _) = render(&scene).unwrap();
        for y in 100..200 {
            for x in 190..260 {
                assert_eq!(img.get(x, y), scene.background);
            }
        }
    }

    #[test]
    fn occlusion_never_improves_the_fit() {
        let cfg = DetectConfig::default();
        let scene = car_fixture("audi-1").unwrap();
        let (img, truth) = render(&scene).unwrap();
        let base = detect_ellipses(&img, &cfg).unwrap();
        let wheel = truth.visible().next().unwrap();
        let nearest = |found: &[crate::detect::DetectedEllipse]| {
            found.iter().find(|e| (e.mu - wheel.mu).norm() < wheel.a2).map(|e| e.mismatch_ratio)
        };
        let clean = nearest(&base).unwrap();
        let ext = wheel.ellipse().half_extents();
        for frac in [0.1, 0.2, 0.3, 0.5] {
            let mut s = scene.clone();
            let cut = (wheel.mu.x + ext.x - 2.0 * ext.x * frac).round() as usize;
            s.occluders.push(Occluder { x0: cut, y0: 0, x1: 800, y1: 600 });
            let (img, _) = render(&s).unwrap();
            if let Some(m) = nearest(&detect_ellipses(&img, &cfg).unwrap()) {
                // a clipped ellipse is still an ellipse-like blob, but never a better one
                assert!(m >= clean, "{frac}: {m} < {clean}");
            }
        }
    }

    #[test]
    fn bad_scenes_are_rejected() {
        let mut s = table_fixture();
        s.foreground = 0.0;
        assert!(render(&s).is_err());
        let mut s = table_fixture();
        s.supersample = 0;
        assert!(render(&s).is_err());
        let mut s = table_fixture();
        s.noise_std = -1.0;
        assert!(render(&s).is_err());
    }

    #[test]
    fn table_fixture_matches_cited_pose() {
        let s = table_fixture();
        assert_eq!(s.pose.sigma, 6.0);
        assert_eq!(s.pose.shift, Vector2::new(400.0, 340.0));
        let axle = s.pose.rotate(&s.model.circles[0].axle);
        for (got, want) in axle.iter().zip(TABLE_AXLE) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
        let (_, truth) = render(&s).unwrap();
        let t = &truth.circles[0];
        assert!(t.visible);
        assert!((t.a1 - 60.0).abs() < 1e-9);
        assert_eq!(t.mu, Vector2::new(400.0, 340.0));
    }

    #[test]
    fn car_fixtures_match_cited_poses() {
        let golf = car_fixture("golf-1").unwrap();
        let q = golf.pose.rotation;
        let cited = Quat::from_array([-0.2162, -0.2162, -0.6053, 0.7350]);
        assert!(q.component_distance(cited) < 1e-4);
        assert_eq!(golf.pose.sigma, 60.0);
        assert_eq!(golf.pose.shift, Vector2::new(400.0, 300.0));
        assert!(matches!(car_fixture("beetle"), Err(Error::UnknownFixture(_))));
        assert_eq!(fixture_names().len(), 7);
        assert!(fixture("table").is_ok());
    }

    #[test]
    fn every_car_fixture_shows_one_side() {
        for f in &CAR_FIXTURES {
            let (_, truth) = render(&f.scene()).unwrap();
            let vis: Vec<_> = truth.visible().map(|c| c.role).collect();
            assert_eq!(vis.len(), 2, "{}", f.name);
            let left = vis.contains(&WheelRole::BackLeft) && vis.contains(&WheelRole::FrontLeft);
            let right = vis.contains(&WheelRole::BackRight) && vis.contains(&WheelRole::FrontRight);
            assert!(left || right, "{}: {vis:?}", f.name);
            // the wheels stand well clear of the minimum pairing size
            for c in truth.visible() {
                assert!(std::f64::consts::PI * c.a1 * c.a2 > 720.0, "{}", f.name);
            }
            let side = if left { Side::Left } else { Side::Right };
            assert!(f.model().wheels(side).is_ok());
        }
    }
}
