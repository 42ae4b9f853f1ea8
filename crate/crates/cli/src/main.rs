mod args;
mod config;
mod json;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::Parser;
use conicpose::detect::{detect_ellipses, select_wheel_pair, DetectConfig};
use conicpose::pose::{align_single, enumerate_candidates, rank_candidates, CircleModel, ImagePair};
use conicpose::raster::{read_pnm, write_pnm, GrayImage};
use conicpose::synth::{self, CarFixture, SceneSpec};
use serde_json::{json, Value};

use args::{Cli, Command, DetectFlags};
use config::{ConfigFile, Tolerances};

const EXIT_SELF_TEST: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_PAIR: u8 = 3;

/// An error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: Option<anyhow::Error>,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: EXIT_INPUT, error: Some(e.into()) }
    }
}

type Outcome = Result<(), Failure>;

fn load_image(path: &Path) -> anyhow::Result<GrayImage> {
    let img = read_pnm(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(img.into_gray()?)
}

/// Writes only once the whole document exists, so a failed run leaves no file.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn detect_all(image: &Path, cfg: &DetectConfig) -> anyhow::Result<(GrayImage, Vec<conicpose::detect::DetectedEllipse>)> {
    let img = load_image(image)?;
    let found = detect_ellipses(&img, cfg)?;
    Ok((img, found))
}

/// A model file, or a built-in vehicle by name.
fn resolve_model(arg: &str) -> anyhow::Result<CircleModel> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading model {arg}"))?;
        return json::parse_model(&text).with_context(|| format!("model {arg}"));
    }
    synth::CAR_FIXTURES
        .iter()
        .find(|f| f.name.split('-').next() == Some(arg))
        .map(CarFixture::model)
        .ok_or_else(|| anyhow!("model {arg:?} is neither a file nor a built-in (golf, audi, bmw)"))
}

fn out_path(flag: Option<PathBuf>, file: &ConfigFile) -> Option<PathBuf> {
    flag.or_else(|| file.out.clone())
}

fn cmd_detect(file: &ConfigFile, image: &Path, flags: &DetectFlags, out: Option<PathBuf>) -> Outcome {
    let cfg = file.detect_config(flags)?;
    let (_, found) = detect_all(image, &cfg)?;
    let list = Value::Array(found.iter().map(json::ellipse).collect());
    emit(out_path(out, file).as_deref(), &json::to_text(&json::document("ellipses", list)))?;
    Ok(())
}

fn cmd_wheels(file: &ConfigFile, image: &Path, flags: &DetectFlags, out: Option<PathBuf>) -> Outcome {
    let cfg = file.detect_config(flags)?;
    let (img, found) = detect_all(image, &cfg)?;
    let pair = select_wheel_pair(&found, img.width(), img.height(), &cfg);
    emit(out_path(out, file).as_deref(), &json::to_text(&json::document("pair", json::wheel_pair(pair.as_ref()))))?;
    Ok(())
}

struct PoseArgs<'a> {
    image: &'a Path,
    model: Option<String>,
    detect: &'a DetectFlags,
    upright: Option<bool>,
    select: Option<usize>,
    out: Option<PathBuf>,
}

fn cmd_pose(file: &ConfigFile, a: PoseArgs) -> Outcome {
    let cfg = file.detect_config(a.detect)?;
    let arg = a.model.or_else(|| file.model.clone()).context("no model given, use --model")?;
    let model = resolve_model(&arg)?;
    let (img, found) = detect_all(a.image, &cfg)?;
    let Some(pair) = select_wheel_pair(&found, img.width(), img.height(), &cfg) else {
        return Err(Failure { code: EXIT_NO_PAIR, error: Some(anyhow!("no wheel pair found in {}", a.image.display())) });
    };
    let upright = a.upright.or(file.upright).unwrap_or(true);
    let ranked = rank_candidates(enumerate_candidates(&model, &ImagePair::from(&pair), upright)?);
    let mut list: Vec<Value> = ranked.iter().enumerate().map(|(i, c)| json::candidate(i, c)).collect();
    if let Some(n) = a.select.or(file.select) {
        if n >= list.len() {
            return Err(anyhow!("--select {n} out of range, {} candidates", list.len()).into());
        }
        list = vec![list.swap_remove(n)];
    }
    emit(out_path(a.out, file).as_deref(), &json::to_text(&json::document("candidates", Value::Array(list))))?;
    Ok(())
}

fn scene_from(arg: &str) -> anyhow::Result<(String, SceneSpec)> {
    if synth::fixture_names().contains(&arg) {
        return Ok((arg.to_owned(), synth::fixture(arg)?));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(anyhow!(
            "{arg:?} is neither a scene file nor a fixture ({})",
            synth::fixture_names().join(", ")
        ));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scene {arg}"))?;
    let scene = json::parse_scene(&text).with_context(|| format!("scene {arg}"))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((name, scene))
}

fn cmd_synth(file: &ConfigFile, arg: &str, out: &Path, truth: Option<PathBuf>, seed: Option<u64>, noise: Option<f64>) -> Outcome {
    let (name, mut scene) = scene_from(arg)?;
    if let Some(s) = seed.or(file.seed) {
        scene.seed = s;
    }
    if let Some(n) = noise.or(file.noise_std) {
        scene.noise_std = n;
    }
    let (img, gt) = synth::render(&scene)?;
    let text = json::to_text(&json::ground_truth(&name, &scene, &gt));
    write_pnm(&img, out).with_context(|| format!("writing {}", out.display()))?;
    emit(truth.as_deref(), &text)?;
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

struct RoundtripArgs<'a> {
    fixture: &'a str,
    detect: &'a DetectFlags,
    upright: Option<bool>,
    seed: Option<u64>,
    noise: Option<f64>,
    out: Option<PathBuf>,
}

fn table_checks(scene: &SceneSpec, img: &GrayImage, cfg: &DetectConfig, tol: Tolerances) -> Result<Vec<Check>, Failure> {
    let found = detect_ellipses(img, cfg)?;
    let Some(top) = found.first() else {
        return Err(Failure { code: EXIT_NO_PAIR, error: Some(anyhow!("no ellipse detected")) });
    };
    let circle = &scene.model.circles[0];
    let want = scene.pose.rotate(&circle.axle);
    // of the two mirror poses keep the one a viewer would pick
    let (axle_err, pose) = (0..2)
        .map(|b| align_single(circle, &top.ellipse(), b, 0.0))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|p| ((p.rotate(&circle.axle) - want).amax(), p))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("two branches");
    Ok(vec![
        Check { name: "axle", value: axle_err, tol: tol.axle },
        Check { name: "sigma", value: (pose.sigma - scene.pose.sigma).abs() / scene.pose.sigma, tol: tol.sigma_rel },
        Check { name: "shift", value: (pose.shift - scene.pose.shift).norm(), tol: tol.shift_px },
    ])
}

fn car_checks(scene: &SceneSpec, img: &GrayImage, cfg: &DetectConfig, upright: bool, tol: Tolerances) -> Result<Vec<Check>, Failure> {
    let found = detect_ellipses(img, cfg)?;
    let Some(pair) = select_wheel_pair(&found, img.width(), img.height(), cfg) else {
        return Err(Failure { code: EXIT_NO_PAIR, error: Some(anyhow!("no wheel pair found")) });
    };
    let truth = scene.pose;
    let cands = enumerate_candidates(&scene.model, &ImagePair::from(&pair), upright)?;
    let best = cands
        .iter()
        .min_by(|a, b| {
            let (da, db) = (a.pose.rotation.component_distance(truth.rotation), b.pose.rotation.component_distance(truth.rotation));
            da.total_cmp(&db)
        })
        .expect("candidates are never empty");
    Ok(vec![
        Check { name: "rotation", value: best.pose.rotation.component_distance(truth.rotation), tol: tol.quat },
        Check { name: "sigma", value: (best.pose.sigma - truth.sigma).abs() / truth.sigma, tol: tol.sigma_rel },
        Check { name: "shift", value: (best.pose.shift - truth.shift).norm(), tol: tol.shift_px },
    ])
}

fn cmd_roundtrip(file: &ConfigFile, a: RoundtripArgs) -> Outcome {
    let cfg = file.detect_config(a.detect)?;
    let mut scene = synth::fixture(a.fixture)?;
    scene.seed = a.seed.or(file.seed).unwrap_or(0);
    scene.noise_std = a.noise.or(file.noise_std).unwrap_or(0.0);
    let (img, _) = synth::render(&scene)?;
    let checks = if a.fixture == "table" {
        table_checks(&scene, &img, &cfg, Tolerances::TABLE.with_overrides(file))?
    } else {
        let upright = a.upright.or(file.upright).unwrap_or(true);
        car_checks(&scene, &img, &cfg, upright, Tolerances::CAR.with_overrides(file))?
    };
    let pass = checks.iter().all(Check::pass);

    let mut text = format!("roundtrip {}\n", a.fixture);
    for c in &checks {
        let verdict = if c.pass() { "pass" } else { "FAIL" };
        text += &format!("  {:<9} {:>12.6} <= {:<10} {verdict}\n", c.name, c.value, json::sig9(c.tol));
    }
    text += &format!("result: {}\n", if pass { "pass" } else { "FAIL" });
    print!("{text}");
    if let Some(out) = out_path(a.out, file) {
        let report = json!({
            "format": json::FORMAT,
            "fixture": a.fixture,
            "pass": pass,
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "value": json::num(c.value),
                "tolerance": json::num(c.tol),
                "pass": c.pass(),
            })).collect::<Vec<_>>(),
        });
        emit(Some(&out), &json::to_text(&report))?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_SELF_TEST, error: None })
    }
}

fn run(cli: Cli) -> Outcome {
    let file = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Detect { image, detect, out } => cmd_detect(&file, &image, &detect, out),
        Command::Wheels { image, detect, out } => cmd_wheels(&file, &image, &detect, out),
        Command::Pose { image, model, detect, upright, select, out } => cmd_pose(
            &file,
            PoseArgs { image: &image, model, detect: &detect, upright: upright.resolve(), select, out },
        ),
        Command::Synth { scene, out, truth, seed, noise_std } => cmd_synth(&file, &scene, &out, truth, seed, noise_std),
        Command::Roundtrip { fixture, detect, upright, seed, noise_std, out } => cmd_roundtrip(
            &file,
            RoundtripArgs { fixture: &fixture, detect: &detect, upright: upright.resolve(), seed, noise: noise_std, out },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(e) = f.error {
                eprintln!("conicpose: {e:#}");
            }
            ExitCode::from(f.code)
        }
    }
}
