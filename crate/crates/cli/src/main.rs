#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use vlp_core::calibration::{calibrate, calibrate_median, CalibrationScene};
use vlp_core::camera_model::{AccelSample, Attitude, CameraParams, ProjectionModel, WorldPoint};
use vlp_core::codebook::{count_by_enumeration, count_identifiers, enumerate_identifiers, write_codebook, DEFAULT_ENUMERATION_CAP};
use vlp_core::detection::{render_frame, DevicePose, Frame, RenderOptions, DEFAULT_LED_RADIUS_CM};
use vlp_core::global_positioning::{locate_frame, LandmarkRegistry};
use vlp_core::harness::{model_gap_report, run_scenario, LandmarkSpec, ModelGapConfig, ScenarioConfig};
use vlp_core::localization::{locate, ReferenceObservation};
use vlp_core::Error;

/// Visible-light positioning from color-coded LED landmarks.
#[derive(Parser)]
#[command(name = "vlp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the device from a scene file (reference points or a frame).
    Locate { scene: PathBuf },
    /// Recover U and Zc from one calibration scene or a list of them.
    Calibrate { scene: PathBuf },
    /// Count, list or export the valid codes of a grid shape.
    #[command(subcommand)]
    Codebook(CodebookCmd),
    /// Landmark registry tools.
    #[command(subcommand)]
    Registry(RegistryCmd),
    /// Run a Monte-Carlo sweep and write its CSV.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare the per-axis tilt model against a rigid rotation.
    ModelGap {
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a synthetic frame to a binary PPM.
    Render {
        scene: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Shape {
    rows: usize,
    cols: usize,
}

#[derive(Subcommand)]
enum CodebookCmd {
    /// Number of valid codes for a grid shape.
    Count {
        #[command(flatten)]
        shape: Shape,
        /// Also count by exhaustive enumeration and compare.
        #[arg(long)]
        enumerate: bool,
        /// Also report the count with left-right mirror pairs merged.
        #[arg(long)]
        exclude_mirrors: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Print every valid code, one per line.
    Enumerate {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Write the codebook as `id,rows,cols,code` lines.
    Export {
        #[command(flatten)]
        shape: Shape,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
}

#[derive(Subcommand)]
enum RegistryCmd {
    /// Check a registry file's invariants.
    Validate { path: PathBuf },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let res = match output {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout().lock().write_all(bytes).map_err(|e| e.to_string()),
    };
    res.map_err(Failure::Runtime)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// `locate` input: either measured reference points or a frame to detect in.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocateScene {
    #[serde(default)]
    camera: CameraParams,
    /// Known camera-to-ceiling height; switches to the 2-D solve.
    z_cm: Option<f64>,
    observation: Option<ReferenceObservation>,
    /// PPM path, relative to the scene file.
    frame: Option<PathBuf>,
    registry: Option<PathBuf>,
    #[serde(default)]
    accel: AccelSample,
}

fn cmd_locate(path: &Path) -> CliResult<String> {
    let scene: LocateScene = parse_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    match (scene.observation, scene.frame, scene.registry) {
        (Some(obs), None, None) => Ok(to_json(&locate(&obs, &scene.camera, scene.z_cm)?)),
        (None, Some(frame), Some(reg)) => {
            if scene.z_cm.is_some() {
                return Err(Failure::Config("z_cm applies only to observation scenes".into()));
            }
            let frame_path = base.join(frame);
            let bytes = fs::read(&frame_path).map_err(|e| Failure::Config(format!("{}: {e}", frame_path.display())))?;
            let frame = Frame::from_ppm(&bytes)?;
            let reg = LandmarkRegistry::load(&base.join(reg))?;
            let fix = locate_frame(&frame, &reg, scene.accel, &scene.camera)?;
            let out = serde_json::json!({
                "code": fix.code.grid().row_strings(),
                "rotation_deg": fix.rotation_deg,
                "local": fix.local,
                "world": fix.world,
            });
            Ok(to_json(&out))
        }
        _ => Err(Failure::Config(
            "scene needs either `observation`, or both `frame` and `registry`".into(),
        )),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CalibrationInput {
    One(CalibrationScene),
    Many { scenes: Vec<CalibrationScene> },
}

fn cmd_calibrate(path: &Path) -> CliResult<String> {
    let fit = match parse_json::<CalibrationInput>(path)? {
        CalibrationInput::One(s) => calibrate(&s)?,
        CalibrationInput::Many { scenes } => calibrate_median(&scenes)?,
    };
    Ok(to_json(&fit))
}

fn cmd_codebook(cmd: CodebookCmd) -> CliResult<()> {
    match cmd {
        CodebookCmd::Count {
            shape,
            enumerate,
            exclude_mirrors,
            cap,
        } => {
            let formula = count_identifiers(shape.rows, shape.cols)?;
            let mut out = format!("count {formula}\n");
            if enumerate || exclude_mirrors {
                let counts = count_by_enumeration(shape.rows, shape.cols, cap)?;
                if enumerate {
                    let agree = formula == counts.total.into();
                    out += &format!("enumerated {}\nagree {agree}\n", counts.total);
                    out += &format!("with_interior_red_row {}\n", counts.with_interior_red_row);
                }
                if exclude_mirrors {
                    out += &format!("excluding_mirrors {}\n", counts.excluding_mirrors);
                }
            }
            emit(None, out.as_bytes())
        }
        CodebookCmd::Enumerate { shape, cap } => {
            let mut out = String::new();
            for code in enumerate_identifiers(shape.rows, shape.cols, cap)? {
                out += &code.to_string();
                out.push('\n');
            }
            emit(None, out.as_bytes())
        }
        CodebookCmd::Export { shape, output, cap } => {
            let mut buf = Vec::new();
            write_codebook(shape.rows, shape.cols, cap, &mut buf)?;
            emit(output.as_deref(), &buf)
        }
    }
}

fn cmd_registry_validate(path: &Path) -> CliResult<String> {
    let reg = LandmarkRegistry::from_json(&read_text(path)?)?;
    let shapes: Vec<String> = reg.shapes().iter().map(|(m, n)| format!("{m}x{n}")).collect();
    Ok(format!("ok: {} landmarks, shapes {}\n", reg.len(), shapes.join(" ")))
}

/// `render` input.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderScene {
    #[serde(default)]
    camera: CameraParams,
    #[serde(default)]
    landmark: LandmarkSpec,
    /// Camera position relative to LED `A`; z is the distance up to the ceiling.
    position_cm: [f64; 3],
    #[serde(default)]
    roll_deg: f64,
    #[serde(default)]
    pitch_deg: f64,
    #[serde(default)]
    azimuth_deg: f64,
    #[serde(default)]
    model: ProjectionModel,
    #[serde(default = "default_led_radius")]
    led_radius_cm: f64,
    #[serde(default)]
    pixel_sigma: f64,
    #[serde(default)]
    channel_sigma: f64,
    #[serde(default)]
    seed: u64,
}

fn default_led_radius() -> f64 {
    DEFAULT_LED_RADIUS_CM
}

fn cmd_render(path: &Path) -> CliResult<Vec<u8>> {
    let s: RenderScene = parse_json(path)?;
    s.camera.validate()?;
    let [x, y, z] = s.position_cm;
    if !(z > 0.0) {
        return Err(Failure::Config("position z must be positive".into()));
    }
    let lm = s.landmark.build(z)?;
    let att = Attitude::new(s.roll_deg, s.pitch_deg, s.azimuth_deg)?;
    let opts = RenderOptions {
        model: s.model,
        led_radius_cm: s.led_radius_cm,
        pixel_sigma: s.pixel_sigma,
        channel_sigma: s.channel_sigma,
        seed: s.seed,
    };
    if !(opts.led_radius_cm > 0.0 && opts.pixel_sigma >= 0.0 && opts.channel_sigma >= 0.0) {
        return Err(Failure::Config("LED radius must be positive and sigmas non-negative".into()));
    }
    let pose = DevicePose::new(WorldPoint::new(x, y, z), att);
    Ok(render_frame(&lm, &pose, &s.camera, &opts).to_ppm())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Locate { scene } => emit(None, cmd_locate(&scene)?.as_bytes()),
        Command::Calibrate { scene } => emit(None, cmd_calibrate(&scene)?.as_bytes()),
        Command::Codebook(cmd) => cmd_codebook(cmd),
        Command::Registry(RegistryCmd::Validate { path }) => emit(None, cmd_registry_validate(&path)?.as_bytes()),
        Command::Simulate { scenario, output } => {
            let cfg = ScenarioConfig::from_json(&read_text(&scenario)?)?;
            let csv = run_scenario(&cfg)?.to_csv();
            emit(output.as_deref(), csv.as_bytes())
        }
        Command::ModelGap { config, output } => {
            let cfg = match config {
                Some(p) => parse_json(&p)?,
                None => ModelGapConfig::default(),
            };
            emit(output.as_deref(), model_gap_report(&cfg)?.as_bytes())
        }
        Command::Render { scene, output } => emit(Some(&output), &cmd_render(&scene)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
