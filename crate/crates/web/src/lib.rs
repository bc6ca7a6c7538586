//! Browser bindings: render a synthetic frame, run the positioning pipeline
//! on it, and evaluate the tilt needed to reach distant landmarks.
//!
//! The exported functions are thin wrappers; the plain Rust functions below
//! them carry the logic so they can be tested natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use vlp_core::camera_model::{required_tilt_for_radius, AccelSample, Attitude, CameraParams, WorldPoint};
use vlp_core::codebook::ColorCode;
use vlp_core::detection::{render_frame, DevicePose, Frame, RenderOptions};
use vlp_core::global_positioning::{locate_frame, Landmark, LandmarkRegistry};
use vlp_core::Error;

pub const DEMO_CODE: [&str; 6] = ["RRR", "GBG", "BGR", "GBR", "BGB", "RGB"];
pub const DEMO_SPACING_CM: f64 = 10.0;
pub const DEMO_LED_RADIUS_CM: f64 = 1.5;
pub const DEMO_CEILING_CM: f64 = 300.0;
/// Room position of the landmark's reference LED.
pub const DEMO_ORIGIN_CM: (f64, f64) = (150.0, 100.0);

/// Device pose in room coordinates, as the page's sliders set it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoPose {
    pub x_cm: f64,
    pub y_cm: f64,
    /// Height of the camera above the floor.
    pub height_cm: f64,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub azimuth_deg: f64,
    pub noise: f64,
    pub seed: u64,
}

fn landmark() -> Landmark {
    let code = ColorCode::parse(&DEMO_CODE).expect("demo code is valid");
    let (ox, oy) = DEMO_ORIGIN_CM;
    Landmark::new(code, WorldPoint::new(ox, oy, 0.0), DEMO_CEILING_CM, DEMO_SPACING_CM, 0.0)
        .expect("demo landmark is valid")
}

fn device_pose(p: &DemoPose) -> Result<DevicePose, Error> {
    let (ox, oy) = DEMO_ORIGIN_CM;
    let z = DEMO_CEILING_CM - p.height_cm;
    if !(z > 0.0) {
        return Err(Error::InvalidArgument("the camera must be below the ceiling".into()));
    }
    let att = Attitude::new(p.roll_deg, p.pitch_deg, p.azimuth_deg)?;
    Ok(DevicePose::new(WorldPoint::new(p.x_cm - ox, p.y_cm - oy, z), att))
}

pub fn render(p: &DemoPose) -> Result<Frame, Error> {
    let opts = RenderOptions {
        led_radius_cm: DEMO_LED_RADIUS_CM,
        channel_sigma: p.noise,
        pixel_sigma: p.noise / 40.0,
        seed: p.seed,
        ..RenderOptions::default()
    };
    Ok(render_frame(&landmark(), &device_pose(p)?, &CameraParams::default(), &opts))
}

/// Render, then recover the pose from the frame alone. Returns JSON with the
/// decoded code, the room fix, and its error against the true pose.
pub fn locate_json(p: &DemoPose) -> Result<String, Error> {
    let frame = render(p)?;
    let reg = LandmarkRegistry::new(vec![landmark()])?;
    let accel = AccelSample::at_rest(p.roll_deg, p.pitch_deg);
    let fix = locate_frame(&frame, &reg, accel, &CameraParams::default())?;
    let w = fix.world;
    let err = ((w.x_cm - p.x_cm).powi(2) + (w.y_cm - p.y_cm).powi(2) + (w.z_cm - p.height_cm).powi(2)).sqrt();
    let out = serde_json::json!({
        "code": fix.code.to_string(),
        "rotation_deg": fix.rotation_deg,
        "x_cm": w.x_cm,
        "y_cm": w.y_cm,
        "height_cm": w.z_cm,
        "azimuth_deg": w.azimuth_deg,
        "error_cm": err,
    });
    Ok(out.to_string())
}

/// `(radius, tilt)` pairs from 0 to `max_radius_cm` for a ceiling `z_cm` up.
pub fn tilt_curve_points(z_cm: f64, max_radius_cm: f64, step_cm: f64) -> Result<Vec<f64>, Error> {
    if !(step_cm > 0.0 && max_radius_cm >= 0.0) {
        return Err(Error::InvalidArgument("need a positive step and non-negative range".into()));
    }
    let cam = CameraParams::default();
    let n = (max_radius_cm / step_cm).floor() as usize;
    let mut out = Vec::with_capacity(2 * (n + 1));
    for i in 0..=n {
        let r = i as f64 * step_cm;
        out.push(r);
        out.push(required_tilt_for_radius(r, z_cm, &cam)?);
    }
    Ok(out)
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn pose(x: f64, y: f64, height: f64, roll: f64, pitch: f64, azimuth: f64, noise: f64, seed: u32) -> DemoPose {
    DemoPose {
        x_cm: x,
        y_cm: y,
        height_cm: height,
        roll_deg: roll,
        pitch_deg: pitch,
        azimuth_deg: azimuth,
        noise,
        seed: seed as u64,
    }
}

#[wasm_bindgen]
pub fn frame_width() -> u32 {
    CameraParams::default().width_px
}

#[wasm_bindgen]
pub fn frame_height() -> u32 {
    CameraParams::default().height_px
}

/// RGBA pixels of the camera frame for the given pose.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn render_rgba(
    x: f64,
    y: f64,
    height: f64,
    roll: f64,
    pitch: f64,
    azimuth: f64,
    noise: f64,
    seed: u32,
) -> Result<Vec<u8>, JsError> {
    render(&pose(x, y, height, roll, pitch, azimuth, noise, seed))
        .map(|f| f.to_rgba())
        .map_err(js_err)
}

/// JSON fix recovered from the rendered frame.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn locate_scene(
    x: f64,
    y: f64,
    height: f64,
    roll: f64,
    pitch: f64,
    azimuth: f64,
    noise: f64,
    seed: u32,
) -> Result<String, JsError> {
    locate_json(&pose(x, y, height, roll, pitch, azimuth, noise, seed)).map_err(js_err)
}

/// Flattened `(radius, tilt)` pairs.
#[wasm_bindgen]
pub fn tilt_curve(z_cm: f64, max_radius_cm: f64, step_cm: f64) -> Result<Vec<f64>, JsError> {
    tilt_curve_points(z_cm, max_radius_cm, step_cm).map_err(js_err)
}
