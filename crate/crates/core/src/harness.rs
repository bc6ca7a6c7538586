//! Monte-Carlo experiment driver.
//!
//! Every trial draws from its own ChaCha8 stream seeded with
//! `trial_seed(seed, point, trial)` (a SplitMix64 mix, see [`trial_seed`]),
//! so results do not depend on trial execution order and any
//! reimplementation using the same generator reproduces the CSV exactly.
//!
//! Per-trial draw order: six uniforms in `[-1, 1)` scaled by the jitter
//! half-widths (x, y, z, azimuth, roll, pitch), four normals for pixel noise
//! (A.x, A.y, B.x, B.y), two normals for accelerometer noise (ax, ay).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::camera_model::{
    quantize, required_tilt_for_radius, wrap_deg, AccelSample, Attitude, CameraParams, ImagePoint,
    ProjectionModel, WorldPoint,
};
use crate::codebook::{CodeEnumerator, ColorCode};
use crate::error::{Error, Result};
use crate::global_positioning::Landmark;
use crate::localization::{locate, tilt_compensate, PositionFix, ReferenceObservation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Round reference points to whole pixels.
    pub quantize: bool,
    /// Gaussian centroid jitter, px.
    pub pixel_sigma: f64,
    /// Gaussian accelerometer noise per axis, m/s².
    pub accel_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    /// Artifact defaults: plausible phone figures, not measured ones.
    fn default() -> Self {
        NoiseSpec {
            quantize: true,
            pixel_sigma: 0.3,
            accel_sigma: 0.05,
            seed: 1,
        }
    }
}

impl NoiseSpec {
    /// No quantization and no noise.
    pub fn none() -> Self {
        NoiseSpec {
            quantize: false,
            pixel_sigma: 0.0,
            accel_sigma: 0.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    X,
    Y,
    Z,
    Azimuth,
    Roll,
    Pitch,
    /// Horizontal distance to the landmark along -x, with the roll needed to
    /// keep it in view added to the configured roll.
    Radius,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::X => "x",
            SweepAxis::Y => "y",
            SweepAxis::Z => "z",
            SweepAxis::Azimuth => "azimuth",
            SweepAxis::Roll => "roll",
            SweepAxis::Pitch => "pitch",
            SweepAxis::Radius => "radius",
        }
    }
}

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn new(axis: SweepAxis, start: f64, stop: f64, step: f64) -> Self {
        Sweep { axis, start, stop, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config("sweep bounds must be finite".into()));
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!("sweep step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(Error::Config(format!(
                "empty sweep: stop {} < start {}",
                self.stop, self.start
            )));
        }
        if (self.stop - self.start) / self.step > 1e6 {
            return Err(Error::Config("sweep has more than a million points".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LocateMode {
    /// Known height, single midpoint source.
    #[serde(rename = "2d")]
    TwoD,
    #[default]
    #[serde(rename = "3d")]
    ThreeD,
}

/// Where scenario x/y coordinates are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Center,
    LedA,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseSpec {
    pub x_cm: f64,
    pub y_cm: f64,
    /// Vertical distance from the camera up to the ceiling.
    pub z_cm: f64,
    pub azimuth_deg: f64,
    pub roll_deg: f64,
    pub pitch_deg: f64,
}

impl Default for PoseSpec {
    fn default() -> Self {
        PoseSpec {
            x_cm: 0.0,
            y_cm: 0.0,
            z_cm: 220.0,
            azimuth_deg: 0.0,
            roll_deg: 0.0,
            pitch_deg: 0.0,
        }
    }
}

/// Uniform half-widths added to the pose on every trial.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Jitter {
    pub x_cm: f64,
    pub y_cm: f64,
    pub z_cm: f64,
    pub azimuth_deg: f64,
    pub roll_deg: f64,
    pub pitch_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandmarkSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing_cm: f64,
    /// Explicit code rows; the first code of the shape otherwise.
    pub code: Option<Vec<String>>,
}

impl Default for LandmarkSpec {
    fn default() -> Self {
        LandmarkSpec {
            rows: 6,
            cols: 3,
            spacing_cm: 4.0,
            code: None,
        }
    }
}

impl LandmarkSpec {
    pub fn build(&self, ceiling_cm: f64) -> Result<Landmark> {
        let code = match &self.code {
            Some(rows) => {
                let code = ColorCode::parse(rows)?;
                if code.shape() != (self.rows, self.cols) {
                    return Err(Error::Config(format!(
                        "landmark code is {:?} but rows/cols say {:?}",
                        code.shape(),
                        (self.rows, self.cols)
                    )));
                }
                code
            }
            None => CodeEnumerator::new(self.rows, self.cols)?
                .next()
                .map(|e| e.code)
                .ok_or_else(|| Error::Config(format!("no valid code of shape {}x{}", self.rows, self.cols)))?,
        };
        Landmark::at_origin(code, ceiling_cm, self.spacing_cm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub sweep: Sweep,
    /// Optional second axis averaged into each point of `sweep`.
    #[serde(default)]
    pub cross: Option<Sweep>,
    #[serde(default)]
    pub pose: PoseSpec,
    #[serde(default)]
    pub jitter: Jitter,
    /// Place the device so the reference midpoint images at `aim_px`
    /// (principal point by default); pose x/y are then ignored.
    #[serde(default)]
    pub aim: bool,
    #[serde(default)]
    pub aim_px: Option<[f64; 2]>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub mode: LocateMode,
    #[serde(default)]
    pub model: ProjectionModel,
    #[serde(default)]
    pub camera: CameraParams,
    #[serde(default)]
    pub landmark: LandmarkSpec,
    #[serde(default)]
    pub origin: Origin,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Reuse the same per-trial streams at every sweep point.
    #[serde(default)]
    pub common_random_numbers: bool,
}

fn default_trials() -> u32 {
    100
}

impl ScenarioConfig {
    pub fn new(sweep: Sweep) -> Self {
        ScenarioConfig {
            sweep,
            cross: None,
            pose: PoseSpec::default(),
            jitter: Jitter::default(),
            aim: false,
            aim_px: None,
            trials: default_trials(),
            mode: LocateMode::default(),
            model: ProjectionModel::default(),
            camera: CameraParams::default(),
            landmark: LandmarkSpec::default(),
            origin: Origin::default(),
            noise: NoiseSpec::default(),
            common_random_numbers: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        if let Some(c) = &self.cross {
            c.validate()?;
            if c.axis == self.sweep.axis {
                return Err(Error::Config("cross sweep repeats the main axis".into()));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let n = &self.noise;
        if !(n.pixel_sigma >= 0.0 && n.accel_sigma >= 0.0) {
            return Err(Error::Config("noise sigmas must be non-negative".into()));
        }
        let j = &self.jitter;
        if ![j.x_cm, j.y_cm, j.z_cm, j.azimuth_deg, j.roll_deg, j.pitch_deg]
            .iter()
            .all(|v| *v >= 0.0)
        {
            return Err(Error::Config("jitter half-widths must be non-negative".into()));
        }
        self.camera.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.landmark.build(1.0).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Statistics at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointStats {
    pub sweep_value: f64,
    /// NaN when every trial failed.
    pub mean_err_cm: f64,
    pub max_err_cm: f64,
    pub azimuth_err_deg: f64,
    pub failures: u32,
    pub trials: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub axis: SweepAxis,
    pub points: Vec<PointStats>,
}

pub const CSV_HEADER: &str = "sweep_value,mean_err_cm,max_err_cm,azimuth_err_deg,failures";

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_g(p.sweep_value),
                fmt_g(p.mean_err_cm),
                fmt_g(p.max_err_cm),
                fmt_g(p.azimuth_err_deg),
                p.failures
            );
        }
        out
    }

    /// Mean over points of the per-point mean error, ignoring all-failed points.
    pub fn overall_mean_cm(&self) -> f64 {
        let v: Vec<f64> = self.points.iter().map(|p| p.mean_err_cm).filter(|v| !v.is_nan()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    pub fn total_failures(&self) -> u32 {
        self.points.iter().map(|p| p.failures).sum()
    }
}

/// `printf("%.6g")` formatting; NaN prints as `nan`.
pub fn fmt_g(v: f64) -> String {
    const SIG: i32 = 6;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (SIG - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for one trial: `sm(sm(sm(seed) ^ point) ^ trial)` with
/// `sm` the SplitMix64 step.
pub fn trial_seed(seed: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ point) ^ trial)
}

/// Inverse of the per-axis tilt projection for one source at known height: the
/// horizontal displacement from the camera to whatever images at `p`.
pub fn unproject_per_axis(p: ImagePoint, att: &Attitude, z_cm: f64, cam: &CameraParams) -> Result<(f64, f64)> {
    let v = tilt_compensate(p, att.roll_deg, att.pitch_deg, cam)?;
    let (hx, hy) = cam.principal_point;
    let (xr, yr) = (v.px - hx, v.py - hy);
    let (s, c) = att.azimuth_deg.to_radians().sin_cos();
    let (x0, y0) = (c * xr - s * yr, s * xr + c * yr);
    let k = z_cm / cam.focal_px();
    Ok((x0 * k, y0 * k))
}

/// Result of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialOutcome {
    Fix { err_cm: f64, azimuth_err_deg: f64 },
    Failed,
}

/// Everything fixed for a scenario.
struct Setup {
    lm: Landmark,
    xs: Vec<f64>,
    cross: Vec<f64>,
}

impl Setup {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Setup {
            lm: cfg.landmark.build(cfg.pose.z_cm.max(1.0))?,
            xs: cfg.sweep.values(),
            cross: cfg.cross.map(|c| c.values()).unwrap_or_else(|| vec![f64::NAN]),
        })
    }

    fn trials_per_point(&self, cfg: &ScenarioConfig) -> u32 {
        cfg.trials * self.cross.len() as u32
    }
}

fn apply_axis(pose: &mut PoseSpec, axis: SweepAxis, v: f64) {
    match axis {
        SweepAxis::X => pose.x_cm = v,
        SweepAxis::Y => pose.y_cm = v,
        SweepAxis::Z => pose.z_cm = v,
        SweepAxis::Azimuth => pose.azimuth_deg = v,
        SweepAxis::Roll => pose.roll_deg = v,
        SweepAxis::Pitch => pose.pitch_deg = v,
        SweepAxis::Radius => pose.x_cm = -v,
    }
}

/// Run one trial of the scenario. `point` indexes the main sweep and
/// `trial` runs over `trials x cross values`.
pub fn run_trial(cfg: &ScenarioConfig, point: usize, trial: u32) -> Result<TrialOutcome> {
    let setup = Setup::new(cfg)?;
    Ok(trial_in(cfg, &setup, point, trial))
}

fn trial_in(cfg: &ScenarioConfig, setup: &Setup, point: usize, trial: u32) -> TrialOutcome {
    let stream_point = if cfg.common_random_numbers { 0 } else { point as u64 };
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.noise.seed, stream_point, trial as u64));
    let mut uniform = |half: f64| half * (2.0 * rng.random::<f64>() - 1.0);
    let j = &cfg.jitter;
    let jit = [
        uniform(j.x_cm),
        uniform(j.y_cm),
        uniform(j.z_cm),
        uniform(j.azimuth_deg),
        uniform(j.roll_deg),
        uniform(j.pitch_deg),
    ];
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let pix = [normal(), normal(), normal(), normal()];
    let acc = [normal(), normal()];

    let mut pose = cfg.pose;
    let value = setup.xs[point];
    apply_axis(&mut pose, cfg.sweep.axis, value);
    let cross_value = setup.cross[trial as usize / cfg.trials as usize];
    if let Some(c) = &cfg.cross {
        apply_axis(&mut pose, c.axis, cross_value);
    }
    if cfg.sweep.axis == SweepAxis::Radius || cfg.cross.is_some_and(|c| c.axis == SweepAxis::Radius) {
        match required_tilt_for_radius(-pose.x_cm, pose.z_cm, &cfg.camera) {
            Ok(t) => pose.roll_deg += t,
            Err(_) => return TrialOutcome::Failed,
        }
    }
    let z = pose.z_cm + jit[2];
    let Ok(att) = Attitude::new(pose.roll_deg + jit[4], pose.pitch_deg + jit[5], pose.azimuth_deg + jit[3]) else {
        return TrialOutcome::Failed;
    };
    if !(z > 0.0) {
        return TrialOutcome::Failed;
    }

    let lm = &setup.lm;
    let l = lm.baseline_l_cm();
    let (cx, cy) = match cfg.origin {
        Origin::Center => lm.center_offset(),
        Origin::LedA => (0.0, 0.0),
    };
    let (dx, dy) = if cfg.aim {
        let (hx, hy) = cfg.camera.principal_point;
        let [ax, ay] = cfg.aim_px.unwrap_or([hx, hy]);
        match unproject_per_axis(ImagePoint::new(ax, ay), &att, z, &cfg.camera) {
            // device = reference midpoint - displacement
            Ok((ux, uy)) => (-0.5 * l - ux, -uy),
            Err(_) => return TrialOutcome::Failed,
        }
    } else {
        (cx + pose.x_cm, cy + pose.y_cm)
    };
    let device = WorldPoint::new(dx + jit[0], dy + jit[1], z);

    let cam = &cfg.camera;
    let noise = &cfg.noise;
    let mut refs = [ImagePoint::default(); 2];
    for (i, (ox, oy)) in [(0.0, 0.0), (-l, 0.0)].into_iter().enumerate() {
        let d = WorldPoint::new(ox - device.x_cm, oy - device.y_cm, z);
        let Ok(mut p) = cfg.model.project(&d, &att, cam) else {
            return TrialOutcome::Failed;
        };
        p.px += noise.pixel_sigma * pix[2 * i];
        p.py += noise.pixel_sigma * pix[2 * i + 1];
        let q = quantize(p, cam);
        if !q.in_frame {
            return TrialOutcome::Failed;
        }
        refs[i] = if noise.quantize { q.to_image_point() } else { p };
    }

    let mut accel = AccelSample::at_rest(att.roll_deg, att.pitch_deg);
    accel.ax_mps2 += noise.accel_sigma * acc[0];
    accel.ay_mps2 += noise.accel_sigma * acc[1];
    let obs = ReferenceObservation {
        a_px: refs[0],
        b_px: refs[1],
        baseline_l_cm: l,
        accel,
    };
    let z_hint = match cfg.mode {
        LocateMode::TwoD => Some(z),
        LocateMode::ThreeD => None,
    };
    let Ok(fix) = locate(&obs, cam, z_hint) else {
        return TrialOutcome::Failed;
    };
    TrialOutcome::Fix {
        err_cm: position_error(&fix, &device, cfg.mode),
        azimuth_err_deg: wrap_deg(fix.azimuth_deg - att.azimuth_deg).abs(),
    }
}

/// Euclidean distance between fix and truth; 2-D mode ignores height.
pub fn position_error(fix: &PositionFix, truth: &WorldPoint, mode: LocateMode) -> f64 {
    let (dx, dy) = (fix.x_cm - truth.x_cm, fix.y_cm - truth.y_cm);
    match mode {
        LocateMode::TwoD => dx.hypot(dy),
        LocateMode::ThreeD => {
            let dz = fix.z_cm - truth.z_cm;
            (dx * dx + dy * dy + dz * dz).sqrt()
        }
    }
}

/// Fold trial outcomes, given in trial-index order.
pub fn aggregate(sweep_value: f64, outcomes: &[TrialOutcome]) -> PointStats {
    let (mut sum, mut max, mut az, mut ok) = (0.0, 0.0f64, 0.0, 0u32);
    let mut failures = 0;
    for o in outcomes {
        match *o {
            TrialOutcome::Fix { err_cm, azimuth_err_deg } => {
                sum += err_cm;
                max = max.max(err_cm);
                az += azimuth_err_deg;
                ok += 1;
            }
            TrialOutcome::Failed => failures += 1,
        }
    }
    let (mean, max, az) = if ok == 0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (sum / ok as f64, max, az / ok as f64)
    };
    PointStats {
        sweep_value,
        mean_err_cm: mean,
        max_err_cm: max,
        azimuth_err_deg: az,
        failures,
        trials: outcomes.len() as u32,
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ErrorReport> {
    let setup = Setup::new(cfg)?;
    let per_point = setup.trials_per_point(cfg);
    let points = setup
        .xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let outcomes: Vec<TrialOutcome> = (0..per_point).map(|t| trial_in(cfg, &setup, i, t)).collect();
            aggregate(x, &outcomes)
        })
        .collect();
    Ok(ErrorReport {
        axis: cfg.sweep.axis,
        points,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = 0.5 * (i + j) as f64 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    cov / (va * vb).sqrt()
}

/// Inclusive range without an axis, for the model-gap grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    fn values(&self) -> Result<Vec<f64>> {
        let s = Sweep::new(SweepAxis::Roll, self.start, self.stop, self.step);
        s.validate()?;
        Ok(s.values())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelGapConfig {
    pub roll_deg: Range,
    pub pitch_deg: Range,
    pub azimuth_deg: f64,
    /// Displacement from the camera to the probed source. The default lies
    /// across the roll axis, where the gap grows monotonically with |roll|;
    /// off-axis sources can see the two per-axis errors partly cancel.
    pub point_cm: [f64; 3],
    pub camera: CameraParams,
}

impl Default for ModelGapConfig {
    fn default() -> Self {
        ModelGapConfig {
            roll_deg: Range { start: -35.0, stop: 35.0, step: 5.0 },
            pitch_deg: Range { start: -35.0, stop: 35.0, step: 5.0 },
            azimuth_deg: 0.0,
            point_cm: [0.0, 100.0, 220.0],
            camera: CameraParams::default(),
        }
    }
}

pub const MODEL_GAP_HEADER: &str = "roll_deg,pitch_deg,gap_px,gap_cm";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelGap {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    /// Image distance between the two models' projections.
    pub gap_px: f64,
    /// Position error from running the true-rotation image through the
    /// localization chain at known height.
    pub gap_cm: f64,
}

pub fn model_gaps(cfg: &ModelGapConfig) -> Result<Vec<ModelGap>> {
    cfg.camera.validate().map_err(|e| Error::Config(e.to_string()))?;
    let [x, y, z] = cfg.point_cm;
    if !(z > 0.0) {
        return Err(Error::Config("probe point must lie above the camera".into()));
    }
    let p = WorldPoint::new(x, y, z);
    let mut out = Vec::new();
    for roll in cfg.roll_deg.values()? {
        for pitch in cfg.pitch_deg.values()? {
            let att = Attitude::new(roll, pitch, cfg.azimuth_deg).map_err(|e| Error::Config(e.to_string()))?;
            let per_axis = ProjectionModel::PerAxis.project(&p, &att, &cfg.camera);
            let truth = ProjectionModel::TrueRotation.project(&p, &att, &cfg.camera);
            let (gap_px, gap_cm) = match (per_axis, truth) {
                (Ok(a), Ok(b)) => {
                    let cm = unproject_per_axis(b, &att, z, &cfg.camera)
                        .map(|(ux, uy)| (ux - x).hypot(uy - y))
                        .unwrap_or(f64::NAN);
                    (a.distance(&b), cm)
                }
                _ => (f64::NAN, f64::NAN),
            };
            out.push(ModelGap {
                roll_deg: roll,
                pitch_deg: pitch,
                gap_px,
                gap_cm,
            });
        }
    }
    Ok(out)
}

pub fn model_gap_report(cfg: &ModelGapConfig) -> Result<String> {
    let mut out = String::from(MODEL_GAP_HEADER);
    out.push('\n');
    for g in model_gaps(cfg)? {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_g(g.roll_deg),
            fmt_g(g.pitch_deg),
            fmt_g(g.gap_px),
            fmt_g(g.gap_cm)
        );
    }
    Ok(out)
}
