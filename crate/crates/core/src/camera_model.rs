//! Camera intrinsics, device attitude and the two forward projection models.
//!
//! # Conventions
//!
//! - Image coordinates are pixels with the origin at the sensor corner. The
//!   principal point `H` defaults to the sensor center.
//! - At zero attitude the camera frame coincides with the landmark (cell)
//!   frame: `px` grows with room `+x`, `py` grows with room `+y`, and the
//!   optical axis points up at the luminary plane.
//! - A [`WorldPoint`] handed to the projection functions is the displacement
//!   from the camera to the light source, with `z_cm` the (positive) vertical
//!   distance from the camera up to the luminary plane.
//! - Angles cross the public API in degrees and are converted to radians
//!   internally.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gravity constant used to turn accelerometer readings into tilt angles.
pub const GRAVITY_MPS2: f64 = 9.8;

/// Angles closer than this to +-90 degrees are treated as singular.
const SINGULAR_MARGIN_RAD: f64 = 1e-9;

/// Wrap an angle in degrees into `(-180, 180]`.
pub fn wrap_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

#[derive(Debug, Deserialize)]
struct RawCameraParams {
    u_cm_per_px: f64,
    zc_cm: f64,
    width_px: u32,
    height_px: u32,
    #[serde(default)]
    principal_point: Option<(f64, f64)>,
}

/// Camera intrinsics.
///
/// `u_cm_per_px` converts image-plane pixel offsets to centimeters and
/// `zc_cm` is the lens-to-image-plane distance. Only their ratio, the focal
/// length in pixels, matters for projection; both are kept because the
/// calibration procedure recovers them separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCameraParams")]
pub struct CameraParams {
    pub u_cm_per_px: f64,
    pub zc_cm: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub principal_point: (f64, f64),
}

impl TryFrom<RawCameraParams> for CameraParams {
    type Error = Error;

    fn try_from(raw: RawCameraParams) -> Result<Self> {
        let cam = CameraParams::new(raw.u_cm_per_px, raw.zc_cm, raw.width_px, raw.height_px)?;
        match raw.principal_point {
            Some((hx, hy)) => cam.with_principal_point(hx, hy),
            None => Ok(cam),
        }
    }
}

impl CameraParams {
    pub const DEFAULT_WIDTH_PX: u32 = 640;
    pub const DEFAULT_HEIGHT_PX: u32 = 480;
    pub const DEFAULT_ZC_CM: f64 = 0.4;
    /// Field-of-view anchor for the default intrinsics: a 35 degree tilt
    /// brings a point 275 cm away (horizontally) into view from 220 cm below.
    pub const ANCHOR_RADIUS_CM: f64 = 275.0;
    pub const ANCHOR_HEIGHT_CM: f64 = 220.0;
    pub const ANCHOR_TILT_DEG: f64 = 35.0;

    pub fn new(u_cm_per_px: f64, zc_cm: f64, width_px: u32, height_px: u32) -> Result<Self> {
        let cam = CameraParams {
            u_cm_per_px,
            zc_cm,
            width_px,
            height_px,
            principal_point: (width_px as f64 / 2.0, height_px as f64 / 2.0),
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn with_principal_point(mut self, hx: f64, hy: f64) -> Result<Self> {
        self.principal_point = (hx, hy);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_cm_per_px.is_finite() && self.u_cm_per_px > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "u_cm_per_px must be positive, got {}",
                self.u_cm_per_px
            )));
        }
        if !(self.zc_cm.is_finite() && self.zc_cm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zc_cm must be positive, got {}",
                self.zc_cm
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidArgument("sensor size must be non-zero".into()));
        }
        let (hx, hy) = self.principal_point;
        if !(0.0..=self.width_px as f64).contains(&hx) || !(0.0..=self.height_px as f64).contains(&hy)
        {
            return Err(Error::InvalidArgument(format!(
                "principal point ({hx}, {hy}) lies outside the sensor"
            )));
        }
        Ok(())
    }

    /// Focal length expressed in pixels, `Zc / U`.
    pub fn focal_px(&self) -> f64 {
        self.zc_cm / self.u_cm_per_px
    }

    /// Distance in pixels from the principal point to the nearest sensor edge.
    pub fn half_extent_px(&self) -> f64 {
        let (hx, hy) = self.principal_point;
        let w = self.width_px as f64;
        let h = self.height_px as f64;
        hx.min(w - hx).min(hy).min(h - hy)
    }

    /// Half field of view, in degrees, along the narrowest sensor direction.
    pub fn half_fov_deg(&self) -> f64 {
        (self.half_extent_px() / self.focal_px()).atan().to_degrees()
    }

    /// Intrinsics whose field of view satisfies
    /// `required_tilt_for_radius(radius_cm, z_cm) == tilt_deg`.
    ///
    /// `zc_cm` is kept as given and `U` is solved for.
    pub fn anchored(
        width_px: u32,
        height_px: u32,
        zc_cm: f64,
        radius_cm: f64,
        z_cm: f64,
        tilt_deg: f64,
    ) -> Result<Self> {
        if !(radius_cm > 0.0 && z_cm > 0.0) {
            return Err(Error::InvalidArgument(
                "anchor radius and height must be positive".into(),
            ));
        }
        let half_fov = (radius_cm / z_cm).atan() - tilt_deg.to_radians();
        if !(half_fov > 0.0 && half_fov < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!(
                "anchor implies a non-physical half field of view of {} deg",
                half_fov.to_degrees()
            )));
        }
        let mut cam = CameraParams::new(1.0, zc_cm, width_px, height_px)?;
        cam.u_cm_per_px = zc_cm * half_fov.tan() / cam.half_extent_px();
        cam.validate()?;
        Ok(cam)
    }
}

impl Default for CameraParams {
    /// A 640x480 sensor anchored on the 275 cm / 220 cm / 35 degree
    /// field-of-view extension point.
    fn default() -> Self {
        CameraParams::anchored(
            Self::DEFAULT_WIDTH_PX,
            Self::DEFAULT_HEIGHT_PX,
            Self::DEFAULT_ZC_CM,
            Self::ANCHOR_RADIUS_CM,
            Self::ANCHOR_HEIGHT_CM,
            Self::ANCHOR_TILT_DEG,
        )
        .expect("default anchor is physical")
    }
}

/// Device attitude: roll about the camera y axis, pitch about the camera x
/// axis and azimuth about the vertical.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub azimuth_deg: f64,
}

impl Attitude {
    pub fn new(roll_deg: f64, pitch_deg: f64, azimuth_deg: f64) -> Result<Self> {
        if !(roll_deg.abs() < 90.0) || !(pitch_deg.abs() < 90.0) {
            return Err(Error::InvalidArgument(format!(
                "roll {roll_deg} and pitch {pitch_deg} must lie strictly within +-90 deg"
            )));
        }
        if !azimuth_deg.is_finite() {
            return Err(Error::InvalidArgument("azimuth must be finite".into()));
        }
        Ok(Attitude {
            roll_deg,
            pitch_deg,
            azimuth_deg: wrap_deg(azimuth_deg),
        })
    }

    pub fn level() -> Self {
        Attitude::default()
    }
}

/// Accelerometer reading along the device x and y axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccelSample {
    pub ax_mps2: f64,
    pub ay_mps2: f64,
}

impl AccelSample {
    pub fn new(ax_mps2: f64, ay_mps2: f64) -> Self {
        AccelSample { ax_mps2, ay_mps2 }
    }

    /// Reading a device at rest reports for the given roll and pitch.
    pub fn at_rest(roll_deg: f64, pitch_deg: f64) -> Self {
        AccelSample {
            ax_mps2: GRAVITY_MPS2 * pitch_deg.to_radians().sin(),
            ay_mps2: GRAVITY_MPS2 * roll_deg.to_radians().sin(),
        }
    }
}

/// Roll and pitch, in degrees, of a device at rest.
pub fn attitude_from_accel(s: AccelSample) -> Result<(f64, f64)> {
    for reading in [s.ax_mps2, s.ay_mps2] {
        if !(reading.abs() <= GRAVITY_MPS2) {
            return Err(Error::OutOfRange(reading));
        }
    }
    let roll = (s.ay_mps2 / GRAVITY_MPS2).asin().to_degrees();
    let pitch = (s.ax_mps2 / GRAVITY_MPS2).asin().to_degrees();
    Ok((roll, pitch))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x_cm: f64,
    pub y_cm: f64,
    pub z_cm: f64,
}

impl WorldPoint {
    pub fn new(x_cm: f64, y_cm: f64, z_cm: f64) -> Self {
        WorldPoint { x_cm, y_cm, z_cm }
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        let dx = self.x_cm - other.x_cm;
        let dy = self.y_cm - other.y_cm;
        let dz = self.z_cm - other.z_cm;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Continuous image-plane point, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImagePoint {
    pub px: f64,
    pub py: f64,
}

impl ImagePoint {
    pub fn new(px: f64, py: f64) -> Self {
        ImagePoint { px, py }
    }

    pub fn distance(&self, other: &ImagePoint) -> f64 {
        (self.px - other.px).hypot(self.py - other.py)
    }

    pub fn midpoint(&self, other: &ImagePoint) -> ImagePoint {
        ImagePoint::new(0.5 * (self.px + other.px), 0.5 * (self.py + other.py))
    }
}

/// Quantized pixel position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelPoint {
    pub px: i64,
    pub py: i64,
    pub in_frame: bool,
}

impl PixelPoint {
    pub fn to_image_point(self) -> ImagePoint {
        ImagePoint::new(self.px as f64, self.py as f64)
    }
}

fn check_angle(angle: f64, what: &str) -> Result<()> {
    if angle.abs() >= std::f64::consts::FRAC_PI_2 - SINGULAR_MARGIN_RAD || !angle.is_finite() {
        return Err(Error::Unprojectable(format!(
            "{what} angle {:.6} deg reaches the tangent singularity",
            angle.to_degrees()
        )));
    }
    Ok(())
}

/// Forward projection that is the exact inverse of the localization chain.
///
/// Projects at zero attitude, rotates the image by `-azimuth` about `H`, then
/// undoes the per-axis virtual-plane tilt map.
pub fn project_per_axis(p: &WorldPoint, att: &Attitude, cam: &CameraParams) -> Result<ImagePoint> {
    if !(p.z_cm > 0.0) {
        return Err(Error::Unprojectable(format!(
            "source must lie above the camera, z = {}",
            p.z_cm
        )));
    }
    let f = cam.focal_px();
    let (hx, hy) = cam.principal_point;

    let x0 = p.x_cm / p.z_cm * f;
    let y0 = p.y_cm / p.z_cm * f;

    let (s, c) = att.azimuth_deg.to_radians().sin_cos();
    let xr = c * x0 + s * y0;
    let yr = -s * x0 + c * y0;

    let beta = (xr / f).atan() - att.roll_deg.to_radians();
    let alpha = (yr / f).atan() - att.pitch_deg.to_radians();
    check_angle(beta, "horizontal")?;
    check_angle(alpha, "vertical")?;

    Ok(ImagePoint::new(f * beta.tan() + hx, f * alpha.tan() + hy))
}

/// Camera-to-room rotation: yaw about z, then pitch about x, then roll about y.
///
/// Pitch enters with a negative sign so that, to first order, a positive pitch
/// moves image points the same way as in [`project_per_axis`].
pub fn camera_rotation(att: &Attitude) -> Rotation3<f64> {
    let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), att.azimuth_deg.to_radians());
    let pitch = Rotation3::from_axis_angle(&Vector3::x_axis(), -att.pitch_deg.to_radians());
    let roll = Rotation3::from_axis_angle(&Vector3::y_axis(), att.roll_deg.to_radians());
    yaw * pitch * roll
}

/// Rigid-body pinhole projection with the full rotation matrix.
pub fn project_true_rotation(
    p: &WorldPoint,
    att: &Attitude,
    cam: &CameraParams,
) -> Result<ImagePoint> {
    let d = camera_rotation(att).inverse() * Vector3::new(p.x_cm, p.y_cm, p.z_cm);
    if !(d.z > 0.0) {
        return Err(Error::BehindCamera(d.z));
    }
    let f = cam.focal_px();
    let (hx, hy) = cam.principal_point;
    Ok(ImagePoint::new(f * d.x / d.z + hx, f * d.y / d.z + hy))
}

/// Which forward model synthesizes observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionModel {
    /// Per-axis tangent model, exactly inverted by localization.
    #[default]
    PerAxis,
    /// Rigid rotation followed by a pinhole.
    TrueRotation,
}

impl ProjectionModel {
    pub fn project(self, p: &WorldPoint, att: &Attitude, cam: &CameraParams) -> Result<ImagePoint> {
        match self {
            ProjectionModel::PerAxis => project_per_axis(p, att, cam),
            ProjectionModel::TrueRotation => project_true_rotation(p, att, cam),
        }
    }
}

/// Round to the nearest pixel, halves away from zero.
pub fn quantize(p: ImagePoint, cam: &CameraParams) -> PixelPoint {
    let px = p.px.round() as i64;
    let py = p.py.round() as i64;
    let in_frame =
        px >= 0 && py >= 0 && px < cam.width_px as i64 && py < cam.height_px as i64;
    PixelPoint { px, py, in_frame }
}

/// Smallest tilt, in degrees, that brings a source at horizontal radius `r_cm`
/// and height `z_cm` into view.
///
/// The tilt is applied toward the source, and the narrowest half field of view
/// of the sensor is used so the answer holds for any device azimuth.
pub fn required_tilt_for_radius(r_cm: f64, z_cm: f64, cam: &CameraParams) -> Result<f64> {
    if !(r_cm >= 0.0) || !(z_cm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be >= 0 and height > 0, got r = {r_cm}, z = {z_cm}"
        )));
    }
    let off_axis = (r_cm / z_cm).atan().to_degrees();
    let tilt = (off_axis - cam.half_fov_deg()).max(0.0);
    if !r_cm.is_finite() || !(tilt < 90.0) {
        return Err(Error::Unreachable(r_cm));
    }
    Ok(tilt)
}
