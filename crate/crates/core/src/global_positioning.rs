//! Landmark registry and conversion of cell-local fixes into room coordinates.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camera_model::{wrap_deg, AccelSample, CameraParams, WorldPoint};
use crate::codebook::{decode_orientation, ColorCode, ColorGrid, Shape};
use crate::detection::{detect, Frame};
use crate::error::{Error, Result};
use crate::localization::{locate, FixFrame, PositionFix, ReferenceObservation};

pub const REGISTRY_FORMAT: u32 = 1;

/// A ceiling landmark and its placement.
///
/// The cell frame has its origin at reference LED `A` (last column of the
/// header row), x running from `B` to `A` and rows advancing along +y.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub code: ColorCode,
    /// Room position of LED `A`'s ground projection.
    pub cell_origin_world: WorldPoint,
    pub ceiling_height_cm: f64,
    pub led_spacing_cm: f64,
    /// Room bearing of the cell frame's x axis.
    pub header_bearing_deg: f64,
}

impl Landmark {
    pub fn new(
        code: ColorCode,
        cell_origin_world: WorldPoint,
        ceiling_height_cm: f64,
        led_spacing_cm: f64,
        header_bearing_deg: f64,
    ) -> Result<Self> {
        let lm = Landmark {
            code,
            cell_origin_world,
            ceiling_height_cm,
            led_spacing_cm,
            header_bearing_deg,
        };
        lm.validate()?;
        Ok(lm)
    }

    /// A landmark at the room origin with zero bearing.
    pub fn at_origin(code: ColorCode, ceiling_height_cm: f64, led_spacing_cm: f64) -> Result<Self> {
        Landmark::new(code, WorldPoint::default(), ceiling_height_cm, led_spacing_cm, 0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.ceiling_height_cm > 0.0 && self.led_spacing_cm > 0.0) {
            return Err(Error::Config(format!(
                "landmark {}: ceiling height and LED spacing must be positive",
                self.code
            )));
        }
        if self.code.grid().cols() < 2 {
            return Err(Error::Config(format!(
                "landmark {}: header row needs two LEDs for a baseline",
                self.code
            )));
        }
        let p = &self.cell_origin_world;
        if ![p.x_cm, p.y_cm, p.z_cm, self.header_bearing_deg].iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!("landmark {}: non-finite placement", self.code)));
        }
        Ok(())
    }

    /// Distance between the two header-row endpoints.
    pub fn baseline_l_cm(&self) -> f64 {
        self.led_spacing_cm * (self.code.grid().cols() - 1) as f64
    }

    /// Cell-frame position of the LED at `(row, col)` relative to `A`.
    pub fn led_offset(&self, row: usize, col: usize) -> (f64, f64) {
        let n = self.code.grid().cols();
        let s = self.led_spacing_cm;
        ((col as f64 - (n - 1) as f64) * s, row as f64 * s)
    }

    /// Cell-frame position of the grid's geometric center relative to `A`.
    pub fn center_offset(&self) -> (f64, f64) {
        let (m, n) = self.code.shape();
        let s = self.led_spacing_cm;
        (-0.5 * (n - 1) as f64 * s, 0.5 * (m - 1) as f64 * s)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    format: u32,
    entries: Vec<LandmarkRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LandmarkRecord {
    code: Vec<String>,
    origin_cm: [f64; 3],
    ceiling_cm: f64,
    spacing_cm: f64,
    bearing_deg: f64,
}

impl LandmarkRecord {
    fn from_landmark(lm: &Landmark) -> Self {
        let o = lm.cell_origin_world;
        LandmarkRecord {
            code: lm.code.grid().row_strings(),
            origin_cm: [o.x_cm, o.y_cm, o.z_cm],
            ceiling_cm: lm.ceiling_height_cm,
            spacing_cm: lm.led_spacing_cm,
            bearing_deg: lm.header_bearing_deg,
        }
    }

    fn into_landmark(self) -> Result<Landmark> {
        let code = ColorCode::parse(&self.code)?;
        let [x, y, z] = self.origin_cm;
        Landmark::new(
            code,
            WorldPoint::new(x, y, z),
            self.ceiling_cm,
            self.spacing_cm,
            self.bearing_deg,
        )
    }
}

/// Immutable lookup table from canonical code to landmark.
#[derive(Debug, Clone)]
pub struct LandmarkRegistry {
    landmarks: Vec<Landmark>,
    index: HashMap<ColorCode, usize>,
    shapes: Vec<Shape>,
}

impl LandmarkRegistry {
    pub fn new(landmarks: Vec<Landmark>) -> Result<Self> {
        if landmarks.is_empty() {
            return Err(Error::Config("registry has no landmarks".into()));
        }
        let mut shapes: Vec<Shape> = landmarks.iter().map(|lm| lm.code.shape()).collect();
        shapes.sort_unstable();
        shapes.dedup();

        let mut index = HashMap::with_capacity(landmarks.len());
        for (i, lm) in landmarks.iter().enumerate() {
            if index.insert(lm.code.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate landmark code {}", lm.code)));
            }
        }
        let reg = LandmarkRegistry {
            landmarks,
            index,
            shapes,
        };
        reg.check_rotations()?;
        Ok(reg)
    }

    fn check_rotations(&self) -> Result<()> {
        for lm in &self.landmarks {
            for k in 1..4 {
                let turned = lm.code.grid().rotate_cw(k);
                if let Some(other) = self.landmarks.iter().find(|o| o.code.grid() == &turned) {
                    return Err(Error::Config(format!(
                        "code {} is a {} degree rotation of {}",
                        other.code,
                        k * 90,
                        lm.code
                    )));
                }
            }
            match decode_orientation(lm.code.grid(), &self.shapes) {
                Ok((_, 0)) => {}
                Ok((_, deg)) => {
                    return Err(Error::Config(format!(
                        "code {} decodes at {deg} degrees",
                        lm.code
                    )))
                }
                Err(e) => return Err(Error::Config(format!("code {} does not decode: {e}", lm.code))),
            }
        }
        Ok(())
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn get(&self, code: &ColorCode) -> Option<&Landmark> {
        self.index.get(code).map(|&i| &self.landmarks[i])
    }

    /// Decode the orientation of an observed grid and find its landmark.
    pub fn lookup(&self, observed: &ColorGrid) -> Result<(&Landmark, u32)> {
        let (code, rotation) = decode_orientation(observed, &self.shapes)?;
        match self.get(&code) {
            Some(lm) => Ok((lm, rotation)),
            None => Err(Error::UnknownLandmark(code.to_string())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RegistryFile = serde_json::from_str(text)?;
        if file.format != REGISTRY_FORMAT {
            return Err(Error::Config(format!(
                "unsupported registry format {}, expected {REGISTRY_FORMAT}",
                file.format
            )));
        }
        let landmarks = file
            .entries
            .into_iter()
            .map(LandmarkRecord::into_landmark)
            .collect::<Result<Vec<_>>>()?;
        LandmarkRegistry::new(landmarks)
    }

    pub fn to_json(&self) -> String {
        let file = RegistryFile {
            format: REGISTRY_FORMAT,
            entries: self.landmarks.iter().map(LandmarkRecord::from_landmark).collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("registry serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        LandmarkRegistry::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Express a cell-local fix in room coordinates.
///
/// `rotation_deg` is any extra rotation between the frame the fix was solved
/// in and the canonical code frame. It is zero when the reference LEDs were
/// labeled from the decoded header, which is what the detection pipeline does.
pub fn to_world(fix: &PositionFix, lm: &Landmark, rotation_deg: f64) -> Result<PositionFix> {
    if fix.frame != FixFrame::CellLocal {
        return Err(Error::FrameError);
    }
    let theta = lm.header_bearing_deg + rotation_deg;
    let (s, c) = theta.to_radians().sin_cos();
    let o = lm.cell_origin_world;
    Ok(PositionFix {
        x_cm: o.x_cm + c * fix.x_cm - s * fix.y_cm,
        y_cm: o.y_cm + s * fix.x_cm + c * fix.y_cm,
        z_cm: o.z_cm + lm.ceiling_height_cm - fix.z_cm,
        azimuth_deg: wrap_deg(fix.azimuth_deg + theta),
        frame: FixFrame::World,
    })
}

/// Outcome of the whole pipeline on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomFix {
    pub code: ColorCode,
    /// Rotation the observed grid needed to read canonically.
    pub rotation_deg: u32,
    pub local: PositionFix,
    pub world: PositionFix,
}

/// Detect, identify, locate in 3-D and map into the room.
///
/// The reference LEDs are labeled from the decoded header, so the local fix
/// is already in the canonical cell frame and no extra rotation applies.
pub fn locate_frame(
    frame: &Frame,
    reg: &LandmarkRegistry,
    accel: AccelSample,
    cam: &CameraParams,
) -> Result<RoomFix> {
    let obs = detect(frame, reg.shapes())?;
    let lm = reg
        .get(&obs.code)
        .ok_or_else(|| Error::UnknownLandmark(obs.code.to_string()))?;
    let ro = ReferenceObservation {
        a_px: obs.a_px,
        b_px: obs.b_px,
        baseline_l_cm: lm.baseline_l_cm(),
        accel,
    };
    let local = locate(&ro, cam, None)?;
    let world = to_world(&local, lm, 0.0)?;
    Ok(RoomFix {
        code: obs.code,
        rotation_deg: obs.rotation_deg,
        local,
        world,
    })
}
