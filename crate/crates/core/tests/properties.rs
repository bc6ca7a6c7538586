use std::sync::OnceLock;

use proptest::prelude::*;

use vlp_core::camera_model::{project_per_axis, AccelSample, Attitude, CameraParams, ImagePoint, WorldPoint};
use vlp_core::codebook::{enumerate_identifiers, ColorCode};
use vlp_core::detection::Frame;
use vlp_core::global_positioning::{to_world, Landmark, LandmarkRegistry};
use vlp_core::harness::fmt_g;
use vlp_core::localization::{derotate, locate, tilt_compensate, FixFrame, PositionFix, ReferenceObservation};

fn codes_43() -> &'static [ColorCode] {
    static CODES: OnceLock<Vec<ColorCode>> = OnceLock::new();
    CODES.get_or_init(|| enumerate_identifiers(4, 3, u64::MAX).unwrap())
}

fn attitude() -> impl Strategy<Value = Attitude> {
    (-35.0..35.0f64, -35.0..35.0f64, -180.0..180.0f64).prop_map(|(r, p, a)| Attitude::new(r, p, a).unwrap())
}

fn local_fix() -> impl Strategy<Value = PositionFix> {
    (-500.0..500.0f64, -500.0..500.0f64, 50.0..300.0f64, -180.0..180.0f64).prop_map(|(x, y, z, a)| PositionFix {
        x_cm: x,
        y_cm: y,
        z_cm: z,
        azimuth_deg: a,
        frame: FixFrame::CellLocal,
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn locate_inverts_projection(
        x in -60.0..60.0f64, y in -60.0..60.0f64, z in 110.0..300.0f64,
        l in 4.0..40.0f64, att in attitude(),
    ) {
        let cam = CameraParams::default();
        let a_px = project_per_axis(&WorldPoint::new(-x, -y, z), &att, &cam).unwrap();
        let b_px = project_per_axis(&WorldPoint::new(-l - x, -y, z), &att, &cam).unwrap();
        let obs = ReferenceObservation { a_px, b_px, baseline_l_cm: l, accel: AccelSample::at_rest(att.roll_deg, att.pitch_deg) };
        let fix = locate(&obs, &cam, None).unwrap();
        prop_assert!(fix.position().distance(&WorldPoint::new(x, y, z)) < 1e-7);
        let fix2 = locate(&obs, &cam, Some(z)).unwrap();
        prop_assert!((fix2.x_cm - x).hypot(fix2.y_cm - y) < 1e-7);
    }

    #[test]
    fn derotation_levels_the_pair_and_keeps_length(
        ax in 0.0..640.0f64, ay in 0.0..480.0f64, bx in 0.0..640.0f64, by in 0.0..480.0f64,
    ) {
        let cam = CameraParams::default();
        let (a, b) = (ImagePoint::new(ax, ay), ImagePoint::new(bx, by));
        prop_assume!(a.distance(&b) > 1.0);
        let s = derotate(a, b, &cam).unwrap();
        prop_assert!((s.a_pp.py - s.b_pp.py).abs() < 1e-9);
        prop_assert!(s.a_pp.px > s.b_pp.px);
        prop_assert!((s.a_pp.distance(&s.b_pp) - a.distance(&b)).abs() < 1e-9);
    }

    #[test]
    fn tilt_compensation_undoes_tilt(
        x in -80.0..80.0f64, y in -80.0..80.0f64, z in 110.0..300.0f64,
        roll in -35.0..35.0f64, pitch in -35.0..35.0f64,
    ) {
        let cam = CameraParams::default();
        let p = WorldPoint::new(x, y, z);
        let level = project_per_axis(&p, &Attitude::level(), &cam).unwrap();
        let tilted = project_per_axis(&p, &Attitude::new(roll, pitch, 0.0).unwrap(), &cam).unwrap();
        let back = tilt_compensate(tilted, roll, pitch, &cam).unwrap();
        prop_assert!(back.distance(&level) < 1e-8);
    }

    #[test]
    fn to_world_is_an_isometry(
        f1 in local_fix(), f2 in local_fix(),
        ox in -1000.0..1000.0f64, oy in -1000.0..1000.0f64, bearing in -180.0..180.0f64, rot in 0u32..4,
    ) {
        let code = codes_43()[0].clone();
        let lm = Landmark::new(code, WorldPoint::new(ox, oy, 0.0), 300.0, 4.0, bearing).unwrap();
        let (w1, w2) = (to_world(&f1, &lm, 90.0 * rot as f64).unwrap(), to_world(&f2, &lm, 90.0 * rot as f64).unwrap());
        let local = (f1.x_cm - f2.x_cm).hypot(f1.y_cm - f2.y_cm);
        let world = (w1.x_cm - w2.x_cm).hypot(w1.y_cm - w2.y_cm);
        prop_assert!((local - world).abs() < 1e-9);
        prop_assert!((w1.z_cm - (300.0 - f1.z_cm)).abs() < 1e-12);
    }

    #[test]
    fn lookup_inverts_any_rotation(i in 0usize..630, j in 0usize..630, k in 0u32..4) {
        let codes = codes_43();
        let (ci, cj) = (codes[i].clone(), codes[j].clone());
        prop_assume!(ci != cj);
        let lms = vec![
            Landmark::at_origin(ci.clone(), 300.0, 4.0).unwrap(),
            Landmark::at_origin(cj, 300.0, 4.0).unwrap(),
        ];
        let reg = LandmarkRegistry::new(lms).unwrap();
        let observed = ci.grid().rotate_cw(k);
        let (lm, rotation) = reg.lookup(&observed).unwrap();
        prop_assert_eq!(&lm.code, &ci);
        prop_assert_eq!(rotation, ((4 - k) % 4) * 90);
    }

    #[test]
    fn ppm_round_trips(w in 1u32..16, h in 1u32..16, seed in any::<u64>()) {
        let n = (w * h) as usize;
        let pixels: Vec<[u8; 3]> = (0..n)
            .map(|i| {
                let v = seed.wrapping_mul(6364136223846793005).wrapping_add((i as u64).wrapping_mul(1442695040888963407));
                [(v >> 8) as u8, (v >> 16) as u8, (v >> 24) as u8]
            })
            .collect();
        let f = Frame::from_pixels(w, h, pixels).unwrap();
        prop_assert_eq!(Frame::from_ppm(&f.to_ppm()).unwrap(), f);
    }

    #[test]
    fn formatted_floats_keep_six_digits(v in -1e9..1e9f64) {
        let s = fmt_g(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-6 * v.abs().max(1e-300));
        prop_assert!(s.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit()).count() <= 6 + 3);
    }
}
