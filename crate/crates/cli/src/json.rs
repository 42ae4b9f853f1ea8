//! JSON documents. Every top-level document carries `"format": 1`; numbers
//! are rounded to 9 significant digits so outputs diff cleanly.

use anyhow::{bail, Context, Result};
use conicpose::detect::{DetectedEllipse, WheelPair};
use conicpose::pose::{CircleModel, CircleSpec, Pose, PoseCandidate, WheelRole};
use conicpose::rot::Quat;
use conicpose::synth::{GroundTruth, Occluder, SceneSpec};
use conicpose::{Matrix2, Vector2, Vector3};
use serde::Deserialize;
use serde_json::{json, Value};

pub const FORMAT: u32 = 1;

pub fn sig9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(sig9(v))
    } else {
        Value::Null
    }
}

pub fn nums(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}

fn v2(v: &Vector2<f64>) -> Value {
    nums(&[v.x, v.y])
}

fn v3(v: &Vector3<f64>) -> Value {
    nums(&[v.x, v.y, v.z])
}

fn m2(m: &Matrix2<f64>) -> Value {
    json!([nums(&[m[(0, 0)], m[(0, 1)]]), nums(&[m[(1, 0)], m[(1, 1)]])])
}

pub fn document(key: &str, payload: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("format".into(), json!(FORMAT));
    map.insert(key.into(), payload);
    Value::Object(map)
}

pub fn ellipse(e: &DetectedEllipse) -> Value {
    json!({
        "label": e.label,
        "mu": v2(&e.mu),
        "cov": m2(&e.cov),
        "a1": num(e.a1),
        "a2": num(e.a2),
        "orientation": num(e.orientation),
        "mismatch": num(e.mismatch_ratio),
        "area": e.area,
    })
}

pub fn wheel_pair(p: Option<&WheelPair>) -> Value {
    match p {
        None => Value::Null,
        Some(p) => json!({ "back": ellipse(&p.back), "front": ellipse(&p.front), "score": num(p.score) }),
    }
}

pub fn pose(p: &Pose) -> Value {
    json!({
        "quat": nums(&p.rotation.canonical().to_array()),
        "sigma": num(p.sigma),
        "shift": v2(&p.shift),
    })
}

pub fn candidate(rank: usize, c: &PoseCandidate) -> Value {
    let mut v = pose(&c.pose);
    let obj = v.as_object_mut().expect("pose is an object");
    obj.insert("rank".into(), json!(rank));
    obj.insert("beta".into(), num(c.beta));
    obj.insert(
        "flags".into(),
        json!({
            "normal_sign": c.branch.normal_sign(),
            "wheel_order": if c.branch.swapped { "right-is-back" } else { "left-is-back" },
            "side": c.branch.side.as_str(),
        }),
    );
    obj.insert(
        "consistency".into(),
        json!({
            "radius_ratio_error": num(c.consistency.radius_ratio_error),
            "coplanarity_residual": num(c.consistency.coplanarity_residual),
        }),
    );
    v
}

pub fn ground_truth(name: &str, scene: &SceneSpec, t: &GroundTruth) -> Value {
    let circles: Vec<Value> = t
        .circles
        .iter()
        .map(|c| {
            json!({
                "id": c.id,
                "role": c.role.as_str(),
                "mu": v2(&c.mu),
                "cov": m2(&c.cov),
                "a1": num(c.a1),
                "a2": num(c.a2),
                "normal": v3(&c.normal),
                "normal_candidates": [v3(&c.normal_candidates[0]), v3(&c.normal_candidates[1])],
                "visible": c.visible,
            })
        })
        .collect();
    json!({
        "format": FORMAT,
        "scene": name,
        "width": scene.width,
        "height": scene.height,
        "seed": scene.seed,
        "pose": pose(&t.pose),
        "circles": circles,
    })
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialise");
    s.push('\n');
    s
}

fn check_format(format: Option<u32>, what: &str) -> Result<()> {
    match format {
        Some(v) if v != FORMAT => bail!("{what} has format {v}, this build reads format {FORMAT}"),
        _ => Ok(()),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleJson {
    pub id: String,
    #[serde(default = "generic_role")]
    pub role: String,
    pub center: [f64; 3],
    pub axle: [f64; 3],
    pub radius: f64,
}

fn generic_role() -> String {
    "generic".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub format: Option<u32>,
    pub name: String,
    #[serde(default = "unit")]
    pub unit_scale: f64,
    pub circles: Vec<CircleJson>,
}

fn unit() -> f64 {
    1.0
}

impl ModelJson {
    pub fn into_model(self) -> Result<CircleModel> {
        check_format(self.format, "model")?;
        let circles = self
            .circles
            .into_iter()
            .map(|c| {
                let role = WheelRole::parse(&c.role).with_context(|| format!("circle {}: unknown role {:?}", c.id, c.role))?;
                Ok(CircleSpec::new(c.id, role, Vector3::from(c.center), Vector3::from(c.axle), c.radius)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircleModel::new(self.name, self.unit_scale, circles)?)
    }
}

pub fn parse_model(text: &str) -> Result<CircleModel> {
    serde_json::from_str::<ModelJson>(text).context("parsing model JSON")?.into_model()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseJson {
    pub quat: [f64; 4],
    pub sigma: f64,
    pub shift: [f64; 2],
}

/// A scene to render. Optional fields default to an 800x600 noise-free
/// render with intensities 0.9 on 0.1.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneJson {
    pub format: Option<u32>,
    pub model: ModelJson,
    pub pose: PoseJson,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub foreground: Option<f64>,
    pub background: Option<f64>,
    pub noise_std: Option<f64>,
    pub occluders: Option<Vec<[usize; 4]>>,
    pub seed: Option<u64>,
    pub supersample: Option<usize>,
}

pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let s: SceneJson = serde_json::from_str(text).context("parsing scene JSON")?;
    check_format(s.format, "scene")?;
    let model = s.model.into_model()?;
    let pose = Pose::new(Quat::from_array(s.pose.quat), s.pose.sigma, Vector2::from(s.pose.shift))?;
    let base = SceneSpec::new(model, pose);
    Ok(SceneSpec {
        width: s.width.unwrap_or(base.width),
        height: s.height.unwrap_or(base.height),
        foreground: s.foreground.unwrap_or(0.9),
        background: s.background.unwrap_or(0.1),
        noise_std: s.noise_std.unwrap_or(0.0),
        occluders: s
            .occluders
            .unwrap_or_default()
            .into_iter()
            .map(|[x0, y0, x1, y1]| Occluder { x0, y0, x1, y1 })
            .collect(),
        seed: s.seed.unwrap_or(0),
        supersample: s.supersample.unwrap_or(1),
        ..base
    })
}
