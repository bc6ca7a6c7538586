//! Closed-form position recovery from two reference light sources.
//!
//! The pipeline runs tilt compensation first, then azimuth derotation, then
//! the 2-D or 3-D similar-triangle solve:
//!
//! ```text
//! accel -> (roll, pitch) -> virtual-plane map of A', B' -> derotate by azimuth -> X, Y, Z
//! ```
//!
//! Fixes are reported as the device position relative to reference LED `A`
//! in the landmark frame, whose x axis runs from `B` to `A`.

use serde::{Deserialize, Serialize};

use crate::camera_model::{attitude_from_accel, wrap_deg, AccelSample, CameraParams, ImagePoint, WorldPoint};
use crate::error::{Error, Result};

/// Below this horizontal separation (half a pixel step) depth is not trusted.
pub const MIN_BASELINE_PX: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceObservation {
    /// Image of reference LED `A`, the header-row end at larger landmark x.
    pub a_px: ImagePoint,
    /// Image of reference LED `B`, the other header-row end.
    pub b_px: ImagePoint,
    pub baseline_l_cm: f64,
    pub accel: AccelSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthSolution {
    pub psi_deg: f64,
    pub omega_deg: f64,
    pub r1_px: f64,
    pub r2_px: f64,
    pub a_pp: ImagePoint,
    pub b_pp: ImagePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixFrame {
    CellLocal,
    World,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionFix {
    pub x_cm: f64,
    pub y_cm: f64,
    pub z_cm: f64,
    pub azimuth_deg: f64,
    pub frame: FixFrame,
}

impl PositionFix {
    pub fn position(&self) -> WorldPoint {
        WorldPoint::new(self.x_cm, self.y_cm, self.z_cm)
    }
}

/// Horizontal offset of a single source from the camera, given its height.
pub fn locate_2d(p: ImagePoint, z_cm: f64, cam: &CameraParams) -> (f64, f64) {
    let (hx, hy) = cam.principal_point;
    let scale = z_cm / cam.zc_cm * cam.u_cm_per_px;
    (scale * (p.px - hx), scale * (p.py - hy))
}

/// Offset of source `A` from the camera, from the derotated images of two
/// sources `L` apart along the x axis.
pub fn locate_3d(
    obs_a: ImagePoint,
    obs_b: ImagePoint,
    l_cm: f64,
    cam: &CameraParams,
) -> Result<WorldPoint> {
    if !(l_cm > 0.0) {
        return Err(Error::InvalidArgument(format!("baseline must be positive, got {l_cm}")));
    }
    let (hx, hy) = cam.principal_point;
    let p_xa = obs_a.px - hx;
    let p_xb = obs_b.px - hx;
    let p_y = obs_a.py - hy;
    let diff = p_xa - p_xb;
    if !(diff >= MIN_BASELINE_PX) {
        return Err(Error::DegenerateBaseline(diff));
    }
    Ok(WorldPoint::new(
        l_cm * p_xa / diff,
        l_cm * p_y / diff,
        l_cm * cam.zc_cm / (cam.u_cm_per_px * diff),
    ))
}

/// Device azimuth from the image of the `B -> A` baseline, in `(-180, 180]`.
pub fn estimate_azimuth(a_px: ImagePoint, b_px: ImagePoint) -> Result<f64> {
    if a_px == b_px {
        return Err(Error::CoincidentPoints);
    }
    let psi = (b_px.py - a_px.py).atan2(a_px.px - b_px.px).to_degrees();
    Ok(wrap_deg(psi))
}

/// Rotate the reference images about `H` so the baseline lies along +x.
pub fn derotate(a_px: ImagePoint, b_px: ImagePoint, cam: &CameraParams) -> Result<AzimuthSolution> {
    let psi_deg = estimate_azimuth(a_px, b_px)?;
    let (hx, hy) = cam.principal_point;

    let r1 = (b_px.px - hx).hypot(b_px.py - hy);
    let omega = (b_px.py - hy).atan2(b_px.px - hx);
    let turned = psi_deg.to_radians() + omega;
    let b_pp = ImagePoint::new(hx + r1 * turned.cos(), hy + r1 * turned.sin());

    let r2 = (b_px.py - a_px.py).hypot(a_px.px - b_px.px);
    let a_pp = ImagePoint::new(b_pp.px + r2, b_pp.py);

    Ok(AzimuthSolution {
        psi_deg,
        omega_deg: omega.to_degrees(),
        r1_px: r1,
        r2_px: r2,
        a_pp,
        b_pp,
    })
}

/// Map an image point seen under roll/pitch onto the level virtual plane.
pub fn tilt_compensate(
    p: ImagePoint,
    roll_deg: f64,
    pitch_deg: f64,
    cam: &CameraParams,
) -> Result<ImagePoint> {
    let (hx, hy) = cam.principal_point;
    let f = cam.focal_px();
    let alpha = ((p.py - hy) / f).atan() + pitch_deg.to_radians();
    let beta = ((p.px - hx) / f).atan() + roll_deg.to_radians();
    for angle in [alpha, beta] {
        if !(angle.abs() < std::f64::consts::FRAC_PI_2 - 1e-9) {
            return Err(Error::TangentSingularity(angle.to_degrees()));
        }
    }
    Ok(ImagePoint::new(f * beta.tan() + hx, f * alpha.tan() + hy))
}

/// Full local pipeline. With `z_hint` the midpoint of the compensated pair is
/// used as a single source at known height, otherwise depth comes from the
/// baseline.
pub fn locate(obs: &ReferenceObservation, cam: &CameraParams, z_hint: Option<f64>) -> Result<PositionFix> {
    if !(obs.baseline_l_cm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "baseline must be positive, got {}",
            obs.baseline_l_cm
        )));
    }
    let (roll, pitch) = attitude_from_accel(obs.accel)?;
    let a = tilt_compensate(obs.a_px, roll, pitch, cam)?;
    let b = tilt_compensate(obs.b_px, roll, pitch, cam)?;
    let sol = derotate(a, b, cam)?;
    let l = obs.baseline_l_cm;

    let (x, y, z) = match z_hint {
        Some(z) => {
            if !(z > 0.0) {
                return Err(Error::InvalidArgument(format!("height hint must be positive, got {z}")));
            }
            let (mx, my) = locate_2d(sol.a_pp.midpoint(&sol.b_pp), z, cam);
            // the midpoint sits L/2 behind A along the baseline
            (-mx - 0.5 * l, -my, z)
        }
        None => {
            let a_off = locate_3d(sol.a_pp, sol.b_pp, l, cam)?;
            (-a_off.x_cm, -a_off.y_cm, a_off.z_cm)
        }
    };

    Ok(PositionFix {
        x_cm: x,
        y_cm: y,
        z_cm: z,
        azimuth_deg: sol.psi_deg,
        frame: FixFrame::CellLocal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera_model::{project_per_axis, Attitude};

    fn desk_cam() -> CameraParams {
        CameraParams::new(0.01, 5.0, 640, 480).unwrap()
    }

    fn origin_cam() -> CameraParams {
        desk_cam().with_principal_point(0.0, 0.0).unwrap()
    }

    #[test]
    fn locate_2d_at_nadir_is_zero() {
        let cam = desk_cam();
        assert_eq!(locate_2d(ImagePoint::new(320.0, 240.0), 250.0, &cam), (0.0, 0.0));
    }

    #[test]
    fn locate_2d_worked_offsets() {
        let cam = desk_cam();
        let (x, y) = locate_2d(ImagePoint::new(420.0, 290.0), 200.0, &cam);
        assert!((x - 40.0).abs() < 1e-12 && (y - 20.0).abs() < 1e-12);
        let (x2, y2) = locate_2d(ImagePoint::new(420.0, 290.0), 400.0, &cam);
        assert!((x2 - 2.0 * x).abs() < 1e-12 && (y2 - 2.0 * y).abs() < 1e-12);
    }

    #[test]
    fn locate_3d_worked_example() {
        let cam = desk_cam();
        let h = cam.principal_point;
        let p = locate_3d(
            ImagePoint::new(h.0 + 200.0, h.1 + 50.0),
            ImagePoint::new(h.0 + 100.0, h.1 + 50.0),
            10.0,
            &cam,
        )
        .unwrap();
        assert!((p.x_cm - 20.0).abs() < 1e-12);
        assert!((p.y_cm - 5.0).abs() < 1e-12);
        assert!((p.z_cm - 50.0).abs() < 1e-12);
    }

    #[test]
    fn locate_3d_degenerate() {
        let cam = desk_cam();
        let a = ImagePoint::new(400.0, 100.0);
        assert!(matches!(locate_3d(a, a, 10.0, &cam), Err(Error::DegenerateBaseline(_))));
        let b = ImagePoint::new(399.9, 90.0);
        assert!(matches!(locate_3d(a, b, 10.0, &cam), Err(Error::DegenerateBaseline(_))));
    }

    #[test]
    fn locate_3d_round_trip_through_projection() {
        let cam = desk_cam();
        let level = Attitude::level();
        // A at (60, 40) from the camera, B 10 cm toward -x, 220 cm up
        let a = project_per_axis(&WorldPoint::new(60.0, 40.0, 220.0), &level, &cam).unwrap();
        let b = project_per_axis(&WorldPoint::new(50.0, 40.0, 220.0), &level, &cam).unwrap();
        let p = locate_3d(a, b, 10.0, &cam).unwrap();
        assert!(p.distance(&WorldPoint::new(60.0, 40.0, 220.0)) < 1e-6);
    }

    #[test]
    fn azimuth_examples() {
        let psi = estimate_azimuth(ImagePoint::new(10.0, 5.0), ImagePoint::new(0.0, 5.0)).unwrap();
        assert_eq!(psi, 0.0);
        let psi = estimate_azimuth(ImagePoint::new(10.0, 0.0), ImagePoint::new(0.0, 10.0)).unwrap();
        assert!((psi - 45.0).abs() < 1e-12);
        // reversed baseline is the half turn, never -180
        let psi = estimate_azimuth(ImagePoint::new(0.0, 5.0), ImagePoint::new(10.0, 5.0)).unwrap();
        assert_eq!(psi, 180.0);
        assert_eq!(
            estimate_azimuth(ImagePoint::new(1.0, 1.0), ImagePoint::new(1.0, 1.0)),
            Err(Error::CoincidentPoints)
        );
    }

    #[test]
    fn azimuth_recovered_from_projection() {
        let cam = CameraParams::default();
        let att = Attitude::new(0.0, 0.0, 30.0).unwrap();
        let a = project_per_axis(&WorldPoint::new(12.0, -7.0, 200.0), &att, &cam).unwrap();
        let b = project_per_axis(&WorldPoint::new(4.0, -7.0, 200.0), &att, &cam).unwrap();
        assert!((estimate_azimuth(a, b).unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn derotate_hand_evaluated() {
        let sol = derotate(ImagePoint::new(10.0, 0.0), ImagePoint::new(0.0, 10.0), &origin_cam()).unwrap();
        let s = 50f64.sqrt();
        assert!((sol.psi_deg - 45.0).abs() < 1e-12);
        assert!((sol.r1_px - 10.0).abs() < 1e-12);
        assert!((sol.omega_deg - 90.0).abs() < 1e-12);
        assert!((sol.b_pp.px + s).abs() < 1e-12 && (sol.b_pp.py - s).abs() < 1e-12);
        assert!((sol.r2_px - 200f64.sqrt()).abs() < 1e-12);
        assert!((sol.a_pp.px - s).abs() < 1e-12 && (sol.a_pp.py - s).abs() < 1e-12);
        assert!((sol.a_pp.px - 7.0711).abs() < 1e-4);
    }

    #[test]
    fn derotate_identity_at_zero_azimuth() {
        let cam = desk_cam();
        let a = ImagePoint::new(400.0, 130.0);
        let b = ImagePoint::new(350.0, 130.0);
        let sol = derotate(a, b, &cam).unwrap();
        assert_eq!(sol.psi_deg, 0.0);
        assert!(sol.a_pp.distance(&a) < 1e-12 && sol.b_pp.distance(&b) < 1e-12);
    }

    #[test]
    fn tilt_examples() {
        let cam = desk_cam();
        let p = ImagePoint::new(123.0, 321.0);
        assert_eq!(tilt_compensate(p, 0.0, 0.0, &cam).unwrap(), p);

        let q = tilt_compensate(ImagePoint::new(320.0, 240.0), 0.0, 30.0, &cam).unwrap();
        assert_eq!(q.px, 320.0);
        assert!((q.py - (240.0 + 500.0 * 30f64.to_radians().tan())).abs() < 1e-9);
        assert!((q.py - 528.68).abs() < 5e-3);

        // alpha = 60 deg, pitch 35 deg
        let y = 240.0 + 500.0 * 60f64.to_radians().tan();
        let r = tilt_compensate(ImagePoint::new(320.0, y), 0.0, 35.0, &cam);
        assert!(matches!(r, Err(Error::TangentSingularity(_))));
    }

    #[test]
    fn nadir_in_2d_mode() {
        let cam = CameraParams::default();
        // A and B straddle the principal point, so their midpoint is at nadir
        let (hx, hy) = cam.principal_point;
        let obs = ReferenceObservation {
            a_px: ImagePoint::new(hx + 15.0, hy),
            b_px: ImagePoint::new(hx - 15.0, hy),
            baseline_l_cm: 8.0,
            accel: AccelSample::default(),
        };
        let fix = locate(&obs, &cam, Some(180.0)).unwrap();
        // camera sits under the midpoint, i.e. L/2 behind A
        assert!((fix.x_cm + 4.0).abs() < 1e-12 && fix.y_cm.abs() < 1e-12);
        assert_eq!(fix.z_cm, 180.0);
        assert_eq!(fix.frame, FixFrame::CellLocal);
    }

    #[test]
    fn full_pose_round_trip() {
        let cam = CameraParams::default();
        let att = Attitude::new(10.0, -15.0, 120.0).unwrap();
        let l = 8.0;
        // device at (80, -30) relative to A, 180 cm below the ceiling
        let (dx, dy, z) = (80.0, -30.0, 180.0);
        let a = project_per_axis(&WorldPoint::new(-dx, -dy, z), &att, &cam).unwrap();
        let b = project_per_axis(&WorldPoint::new(-l - dx, -dy, z), &att, &cam).unwrap();
        let obs = ReferenceObservation {
            a_px: a,
            b_px: b,
            baseline_l_cm: l,
            accel: AccelSample::at_rest(att.roll_deg, att.pitch_deg),
        };
        let fix = locate(&obs, &cam, None).unwrap();
        assert!(fix.position().distance(&WorldPoint::new(dx, dy, z)) < 1e-6, "{fix:?}");
        assert!((fix.azimuth_deg - 120.0).abs() < 1e-9);

        let fix2 = locate(&obs, &cam, Some(fix.z_cm)).unwrap();
        assert!((fix2.x_cm - fix.x_cm).abs() < 1e-9 && (fix2.y_cm - fix.y_cm).abs() < 1e-9);
    }

    #[test]
    fn locate_propagates_accel_errors() {
        let cam = CameraParams::default();
        let obs = ReferenceObservation {
            a_px: ImagePoint::new(330.0, 240.0),
            b_px: ImagePoint::new(300.0, 240.0),
            baseline_l_cm: 8.0,
            accel: AccelSample::new(12.0, 0.0),
        };
        assert_eq!(locate(&obs, &cam, None), Err(Error::OutOfRange(12.0)));
    }
}
