//! One-shot recovery of `U` and `Zc` from a two-source scene at known geometry.

use serde::{Deserialize, Serialize};

use crate::camera_model::{project_per_axis, Attitude, CameraParams, WorldPoint};
use crate::error::{Error, Result};

/// Known geometry and measured pixel distances of a calibration shot.
///
/// Offsets are in centimeters, pixel distances are measured from the
/// principal point. `x1_off_cm` is the lateral offset of source `A` less the
/// image-plane length of `B'` (`x2_px * U`), which is the quantity the similar
/// triangles of the setup relate to `x1_px`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationScene {
    pub z_cm: f64,
    pub x1_off_cm: f64,
    pub x2_off_cm: f64,
    pub x1_px: f64,
    pub x2_px: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub u_cm_per_px: f64,
    pub zc_cm: f64,
}

impl Intrinsics {
    /// Copy the recovered constants into a full camera description.
    pub fn apply_to(&self, cam: &CameraParams) -> Result<CameraParams> {
        let out = CameraParams {
            u_cm_per_px: self.u_cm_per_px,
            zc_cm: self.zc_cm,
            ..*cam
        };
        out.validate()?;
        Ok(out)
    }
}

impl CalibrationScene {
    /// Scene a level camera with intrinsics `cam` would measure with source
    /// `A` at lateral offset `a_off_cm` and `B` at `b_off_cm`, both `z_cm` up.
    pub fn synthesize(cam: &CameraParams, z_cm: f64, a_off_cm: f64, b_off_cm: f64) -> Result<Self> {
        let level = Attitude::level();
        let hx = cam.principal_point.0;
        let a = project_per_axis(&WorldPoint::new(a_off_cm, 0.0, z_cm), &level, cam)?;
        let b = project_per_axis(&WorldPoint::new(b_off_cm, 0.0, z_cm), &level, cam)?;
        let x1_px = a.px - hx;
        let x2_px = b.px - hx;
        Ok(CalibrationScene {
            z_cm,
            x1_off_cm: a_off_cm - x2_px * cam.u_cm_per_px,
            x2_off_cm: b_off_cm,
            x1_px,
            x2_px,
        })
    }

    fn numerator(&self) -> f64 {
        self.x2_off_cm * self.x1_px - self.x1_off_cm * self.x2_px
    }
}

pub fn calibrate(scene: &CalibrationScene) -> Result<Intrinsics> {
    let s = scene;
    if !(s.z_cm > 0.0) {
        return Err(Error::DegenerateScene(format!("height must be positive, got {}", s.z_cm)));
    }
    if !(s.x2_px > 0.0) || !(s.x2_off_cm > 0.0) {
        return Err(Error::DegenerateScene(format!(
            "x2 must be positive (x2_px = {}, X2 = {})",
            s.x2_px, s.x2_off_cm
        )));
    }
    let num = s.numerator();
    if !(num > 0.0) {
        return Err(Error::DegenerateScene(format!(
            "X2*x1 - X1*x2 = {num} is not positive"
        )));
    }
    Ok(Intrinsics {
        u_cm_per_px: num / (s.x2_px * s.x2_px),
        zc_cm: s.z_cm * num / (s.x2_off_cm * s.x2_px),
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-constant median over repeated calibration shots.
pub fn calibrate_median(scenes: &[CalibrationScene]) -> Result<Intrinsics> {
    if scenes.is_empty() {
        return Err(Error::DegenerateScene("no scenes given".into()));
    }
    let fits = scenes.iter().map(calibrate).collect::<Result<Vec<_>>>()?;
    let mut u: Vec<f64> = fits.iter().map(|f| f.u_cm_per_px).collect();
    let mut zc: Vec<f64> = fits.iter().map(|f| f.zc_cm).collect();
    Ok(Intrinsics {
        u_cm_per_px: median(&mut u),
        zc_cm: median(&mut zc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera_model::ImagePoint;
    use crate::localization::locate_2d;

    #[test]
    fn worked_example() {
        let s = CalibrationScene {
            z_cm: 200.0,
            x1_off_cm: 0.0,
            x2_off_cm: 25.0,
            x1_px: 100.0,
            x2_px: 50.0,
        };
        let k = calibrate(&s).unwrap();
        assert!((k.u_cm_per_px - 1.0).abs() < 1e-12);
        assert!((k.zc_cm - 400.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_scenes() {
        let mut s = CalibrationScene {
            z_cm: 200.0,
            x1_off_cm: 0.0,
            x2_off_cm: 25.0,
            x1_px: 100.0,
            x2_px: 0.0,
        };
        assert!(matches!(calibrate(&s), Err(Error::DegenerateScene(_))));
        s.x2_px = 50.0;
        s.x1_off_cm = 60.0; // 25*100 - 60*50 < 0
        assert!(matches!(calibrate(&s), Err(Error::DegenerateScene(_))));
        assert!(calibrate_median(&[]).is_err());
    }

    #[test]
    fn synthetic_scene_round_trip() {
        let cam = CameraParams::new(0.01, 5.0, 640, 480).unwrap();
        let s = CalibrationScene::synthesize(&cam, 200.0, 30.0, 20.0).unwrap();
        let k = calibrate(&s).unwrap();
        assert!((k.u_cm_per_px / 0.01 - 1.0).abs() < 1e-9);
        assert!((k.zc_cm / 5.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pixel_scale_leaves_localization_invariant() {
        let cam = CameraParams::default();
        let s = CalibrationScene::synthesize(&cam, 180.0, 40.0, 25.0).unwrap();
        let base = calibrate(&s).unwrap();
        let k = 2.5;
        let scaled = CalibrationScene {
            x1_px: s.x1_px * k,
            x2_px: s.x2_px * k,
            ..s
        };
        let fit = calibrate(&scaled).unwrap();
        assert!((fit.u_cm_per_px * k / base.u_cm_per_px - 1.0).abs() < 1e-12);
        assert!((fit.zc_cm / base.zc_cm - 1.0).abs() < 1e-12);

        let cam_a = base.apply_to(&cam.with_principal_point(0.0, 0.0).unwrap()).unwrap();
        let cam_b = fit.apply_to(&cam_a).unwrap();
        let (xa, ya) = locate_2d(ImagePoint::new(37.0, -12.0), 220.0, &cam_a);
        let (xb, yb) = locate_2d(ImagePoint::new(37.0 * k, -12.0 * k), 220.0, &cam_b);
        assert!((xa - xb).abs() < 1e-9 && (ya - yb).abs() < 1e-9);
    }

    #[test]
    fn median_of_repeated_shots() {
        let cam = CameraParams::default();
        let good = CalibrationScene::synthesize(&cam, 200.0, 30.0, 20.0).unwrap();
        let noisy = CalibrationScene { x1_px: good.x1_px + 3.0, ..good };
        let fit = calibrate_median(&[good, noisy, good]).unwrap();
        assert_eq!(fit, calibrate(&good).unwrap());
    }
}
