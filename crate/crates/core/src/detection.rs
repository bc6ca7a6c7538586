//! Synthetic frame rendering and landmark extraction.
//!
//! Pixel centers sit at integer coordinates, matching [`quantize`]: pixel
//! `(i, j)` covers `[i - 0.5, i + 0.5] x [j - 0.5, j + 0.5]`.
//!
//! [`quantize`]: crate::camera_model::quantize

use std::io::{Read, Write};

use nalgebra::{SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::camera_model::{Attitude, CameraParams, ImagePoint, ProjectionModel, WorldPoint};
use crate::codebook::{decode_orientation, source_cell, ColorCode, ColorGrid, LedColor, Shape};
use crate::error::{Error, Result};
use crate::global_positioning::Landmark;

pub const DEFAULT_LED_RADIUS_CM: f64 = 0.5;
pub const MIN_DISC_RADIUS_PX: f64 = 2.0;
const SUPERSAMPLE: usize = 4;
/// Largest grid-coordinate distance from a lattice site a blob may sit at.
const MAX_GRID_RESIDUAL: f64 = 0.3;

/// An 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl Frame {
    /// All-black frame.
    pub fn new(width: u32, height: u32) -> Self {
        Frame {
            width,
            height,
            pixels: vec![[0; 3]; width as usize * height as usize],
        }
    }

    pub fn for_camera(cam: &CameraParams) -> Self {
        Frame::new(cam.width_px, cam.height_px)
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "{} pixels do not fill a {width}x{height} frame",
                pixels.len()
            )));
        }
        Ok(Frame { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn is_black(&self) -> bool {
        self.pixels.iter().all(|p| *p == [0, 0, 0])
    }

    /// RGBA bytes with opaque alpha, as canvas APIs expect.
    pub fn to_rgba(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 4);
        for p in &self.pixels {
            out.extend_from_slice(&[p[0], p[1], p[2], 255]);
        }
        out
    }

    /// Binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_ppm()).map_err(|e| Error::Ppm(e.to_string()))
    }

    pub fn read_ppm<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf).map_err(|e| Error::Ppm(e.to_string()))?;
        Frame::from_ppm(&buf)
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = ppm_token(bytes, &mut pos)?;
        if magic != b"P6" {
            return Err(Error::Ppm("not a binary PPM (expected P6)".into()));
        }
        let mut fields = [0u32; 3];
        for f in fields.iter_mut() {
            let tok = ppm_token(bytes, &mut pos)?;
            *f = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Ppm(format!("bad header field {:?}", String::from_utf8_lossy(tok))))?;
        }
        let [width, height, maxval] = fields;
        if maxval != 255 {
            return Err(Error::Ppm(format!("unsupported maxval {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let n = width as usize * height as usize;
        let raster = bytes.get(pos..).unwrap_or_default();
        if raster.len() != n * 3 {
            return Err(Error::Ppm(format!(
                "raster has {} bytes, expected {}",
                raster.len(),
                n * 3
            )));
        }
        let pixels = raster.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Frame { width, height, pixels })
    }
}

fn ppm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Ppm("truncated header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

/// Device pose in a landmark's cell frame.
///
/// `position_cm` is the camera relative to LED `A`; its `z_cm` is the
/// vertical distance from the camera up to the ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DevicePose {
    pub position_cm: WorldPoint,
    pub attitude: Attitude,
}

impl DevicePose {
    pub fn new(position_cm: WorldPoint, attitude: Attitude) -> Self {
        DevicePose { position_cm, attitude }
    }

    /// Displacement from the camera to the LED at `(row, col)`.
    pub fn led_displacement(&self, lm: &Landmark, row: usize, col: usize) -> WorldPoint {
        let (x, y) = lm.led_offset(row, col);
        let p = self.position_cm;
        WorldPoint::new(x - p.x_cm, y - p.y_cm, p.z_cm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub model: ProjectionModel,
    pub led_radius_cm: f64,
    /// Gaussian jitter of each disc center, px.
    pub pixel_sigma: f64,
    /// Additive Gaussian noise on every channel of every pixel, 8-bit units.
    pub channel_sigma: f64,
    pub seed: u64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            model: ProjectionModel::PerAxis,
            led_radius_cm: DEFAULT_LED_RADIUS_CM,
            pixel_sigma: 0.0,
            channel_sigma: 0.0,
            seed: 0,
        }
    }
}

/// A filled disc to rasterize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: ImagePoint,
    pub radius_px: f64,
    pub color: LedColor,
}

/// Analytic image position of every LED, row-major; `None` where the model
/// cannot project the LED.
pub fn project_landmark(
    lm: &Landmark,
    pose: &DevicePose,
    cam: &CameraParams,
    model: ProjectionModel,
) -> Vec<Option<ImagePoint>> {
    let (m, n) = lm.code.shape();
    let mut out = Vec::with_capacity(m * n);
    for r in 0..m {
        for c in 0..n {
            let d = pose.led_displacement(lm, r, c);
            out.push(model.project(&d, &pose.attitude, cam).ok());
        }
    }
    out
}

/// Rendered disc radius for a source at `range_cm`.
pub fn disc_radius_px(led_radius_cm: f64, range_cm: f64, cam: &CameraParams) -> f64 {
    (led_radius_cm * cam.focal_px() / range_cm).max(MIN_DISC_RADIUS_PX)
}

pub fn render_frame(lm: &Landmark, pose: &DevicePose, cam: &CameraParams, opts: &RenderOptions) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let jitter = Normal::new(0.0, opts.pixel_sigma.max(0.0)).expect("finite sigma");
    let (m, n) = lm.code.shape();
    let mut discs = Vec::with_capacity(m * n);
    for r in 0..m {
        for c in 0..n {
            let d = pose.led_displacement(lm, r, c);
            let Ok(mut center) = opts.model.project(&d, &pose.attitude, cam) else {
                continue;
            };
            if opts.pixel_sigma > 0.0 {
                center.px += jitter.sample(&mut rng);
                center.py += jitter.sample(&mut rng);
            }
            let range = (d.x_cm * d.x_cm + d.y_cm * d.y_cm + d.z_cm * d.z_cm).sqrt();
            discs.push(Disc {
                center,
                radius_px: disc_radius_px(opts.led_radius_cm, range, cam),
                color: lm.code.grid().get(r, c),
            });
        }
    }
    let mut acc = rasterize(cam.width_px, cam.height_px, &discs);
    if opts.channel_sigma > 0.0 {
        let noise = Normal::new(0.0, opts.channel_sigma).expect("finite sigma");
        for px in acc.iter_mut() {
            for v in px.iter_mut() {
                *v += noise.sample(&mut rng);
            }
        }
    }
    to_frame(cam.width_px, cam.height_px, &acc)
}

/// Rasterize discs over black without noise.
pub fn render_discs(width: u32, height: u32, discs: &[Disc]) -> Frame {
    to_frame(width, height, &rasterize(width, height, discs))
}

fn to_frame(width: u32, height: u32, acc: &[[f64; 3]]) -> Frame {
    let pixels = acc
        .iter()
        .map(|p| p.map(|v| v.round().clamp(0.0, 255.0) as u8))
        .collect();
    Frame { width, height, pixels }
}

/// Accumulate supersampled disc coverage, scaled to 255 per fully covered pixel.
fn rasterize(width: u32, height: u32, discs: &[Disc]) -> Vec<[f64; 3]> {
    let (w, h) = (width as i64, height as i64);
    let mut acc = vec![[0.0; 3]; (w * h) as usize];
    let step = 1.0 / SUPERSAMPLE as f64;
    let half_diag = std::f64::consts::FRAC_1_SQRT_2;
    for disc in discs {
        let (cx, cy, rad) = (disc.center.px, disc.center.py, disc.radius_px);
        let x0 = ((cx - rad).floor() as i64).max(0);
        let x1 = ((cx + rad).ceil() as i64).min(w - 1);
        let y0 = ((cy - rad).floor() as i64).max(0);
        let y1 = ((cy + rad).ceil() as i64).min(h - 1);
        let ch = disc.color as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let dist = (dx * dx + dy * dy).sqrt();
                let coverage = if dist <= rad - half_diag {
                    1.0
                } else if dist >= rad + half_diag {
                    0.0
                } else {
                    let mut hits = 0;
                    for i in 0..SUPERSAMPLE {
                        for j in 0..SUPERSAMPLE {
                            let sx = dx + (i as f64 + 0.5) * step - 0.5;
                            let sy = dy + (j as f64 + 0.5) * step - 0.5;
                            if sx * sx + sy * sy <= rad * rad {
                                hits += 1;
                            }
                        }
                    }
                    hits as f64 / (SUPERSAMPLE * SUPERSAMPLE) as f64
                };
                if coverage > 0.0 {
                    acc[(y * w + x) as usize][ch] += 255.0 * coverage;
                }
            }
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub centroid: ImagePoint,
    pub color: LedColor,
    pub pixel_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// A pixel belongs to a blob when its brightest channel reaches this.
    pub threshold: u8,
    pub min_blob_px: usize,
    /// Required lead of the dominant channel mean over the runner-up.
    pub dominance_margin: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            threshold: 40,
            min_blob_px: 4,
            dominance_margin: 30.0,
        }
    }
}

pub fn extract_blobs(f: &Frame) -> Vec<Blob> {
    extract_blobs_with(f, &ExtractOptions::default())
}

/// 4-connected components of bright pixels, in scanline order of discovery.
pub fn extract_blobs_with(f: &Frame, opts: &ExtractOptions) -> Vec<Blob> {
    let (w, h) = (f.width as usize, f.height as usize);
    let bright = |i: usize| f.pixels[i].iter().copied().max().unwrap_or(0) >= opts.threshold;
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut blobs = Vec::new();

    for start in 0..w * h {
        if seen[start] || !bright(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut count = 0usize;
        let mut sums = [0u64; 3];
        let (mut wx, mut wy, mut wsum) = (0.0, 0.0, 0.0);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let p = f.pixels[i];
            count += 1;
            for k in 0..3 {
                sums[k] += p[k] as u64;
            }
            let weight = *p.iter().max().unwrap() as f64;
            wx += weight * x as f64;
            wy += weight * y as f64;
            wsum += weight;

            let mut visit = |j: usize| {
                if !seen[j] && bright(j) {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if count < opts.min_blob_px {
            continue;
        }
        let Some(color) = classify(sums, count, opts.dominance_margin) else {
            continue;
        };
        blobs.push(Blob {
            centroid: ImagePoint::new(wx / wsum, wy / wsum),
            color,
            pixel_count: count,
        });
    }
    blobs
}

fn classify(sums: [u64; 3], count: usize, margin: f64) -> Option<LedColor> {
    let means = sums.map(|s| s as f64 / count as f64);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
    if means[order[0]] - means[order[1]] < margin {
        return None;
    }
    Some(LedColor::ALL[order[0]])
}

/// A decoded landmark sighting.
#[derive(Debug, Clone, PartialEq)]
pub struct GridObservation {
    /// Grid as laid out in the image, rows along image y.
    pub observed: ColorGrid,
    pub code: ColorCode,
    /// Clockwise rotation mapping `observed` onto `code`.
    pub rotation_deg: u32,
    /// Centroid of reference LED `A` (header row, last column).
    pub a_px: ImagePoint,
    /// Centroid of reference LED `B` (header row, first column).
    pub b_px: ImagePoint,
    /// Worst distance of a blob from its lattice site, in grid units.
    pub residual: f64,
}

/// Arrange blobs into a grid of one of `shapes` and decode its orientation.
///
/// The four outermost blobs fix a homography onto the lattice; every blob
/// must then land within a third of a cell of a distinct site.
pub fn blobs_to_code(blobs: &[Blob], shapes: &[Shape]) -> Result<GridObservation> {
    let mut dims: Vec<Shape> = Vec::new();
    for &(m, n) in shapes {
        for d in [(m, n), (n, m)] {
            if d.0 * d.1 == blobs.len() && d.0 >= 2 && d.1 >= 2 && !dims.contains(&d) {
                dims.push(d);
            }
        }
    }
    if dims.is_empty() {
        return Err(Error::GridMismatch(format!(
            "{} blobs fit no registered shape",
            blobs.len()
        )));
    }
    let points: Vec<ImagePoint> = blobs.iter().map(|b| b.centroid).collect();
    let corners = grid_corners(&points)?;

    #[allow(clippy::type_complexity)]
    let mut best: Option<(f64, Shape, Vec<(usize, usize)>)> = None;
    for start in 0..4 {
        let src: [ImagePoint; 4] = std::array::from_fn(|i| corners[(start + i) % 4]);
        for &(rows, cols) in &dims {
            let Some(fit) = fit_lattice(&points, &src, rows, cols) else {
                continue;
            };
            if best.as_ref().is_none_or(|b| fit.0 < b.0) {
                best = Some((fit.0, (rows, cols), fit.1));
            }
        }
    }
    let Some((residual, (rows, cols), sites)) = best else {
        return Err(Error::GridMismatch("blobs do not form a regular grid".into()));
    };

    let mut cells = vec![LedColor::Red; rows * cols];
    let mut owner = vec![0usize; rows * cols];
    for (i, &(r, c)) in sites.iter().enumerate() {
        cells[r * cols + c] = blobs[i].color;
        owner[r * cols + c] = i;
    }
    let observed = ColorGrid::new(rows, cols, cells)?;
    let (code, rotation_deg) = decode_orientation(&observed, shapes)?;
    let k = rotation_deg / 90;
    let n = code.grid().cols();
    let at = |cell| {
        let (r, c) = source_cell(observed.shape(), k, cell);
        blobs[owner[r * cols + c]].centroid
    };
    Ok(GridObservation {
        a_px: at((0, n - 1)),
        b_px: at((0, 0)),
        observed,
        code,
        rotation_deg,
        residual,
    })
}

/// Extract blobs and decode the landmark in one step.
pub fn detect(f: &Frame, shapes: &[Shape]) -> Result<GridObservation> {
    blobs_to_code(&extract_blobs(f), shapes)
}

fn cross(o: ImagePoint, a: ImagePoint, b: ImagePoint) -> f64 {
    (a.px - o.px) * (b.py - o.py) - (a.py - o.py) * (b.px - o.px)
}

/// Convex hull without collinear points, positively oriented.
fn convex_hull(points: &[ImagePoint]) -> Vec<ImagePoint> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.px.total_cmp(&b.px).then(a.py.total_cmp(&b.py)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<ImagePoint> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let base = hull.len();
        let iter: Box<dyn Iterator<Item = &ImagePoint>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= base + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// The four hull vertices with the sharpest turns, in hull order.
fn grid_corners(points: &[ImagePoint]) -> Result<[ImagePoint; 4]> {
    let hull = convex_hull(points);
    let k = hull.len();
    if k < 4 {
        return Err(Error::GridMismatch("blob layout is degenerate".into()));
    }
    let turn = |i: usize| {
        let (p, q, r) = (hull[(i + k - 1) % k], hull[i], hull[(i + 1) % k]);
        let (ux, uy) = (q.px - p.px, q.py - p.py);
        let (vx, vy) = (r.px - q.px, r.py - q.py);
        (ux * vy - uy * vx).atan2(ux * vx + uy * vy).abs()
    };
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| turn(b).total_cmp(&turn(a)));
    let mut pick = idx[..4].to_vec();
    pick.sort_unstable();
    Ok(std::array::from_fn(|i| hull[pick[i]]))
}

/// Map blobs through the homography taking `src` onto the lattice corners.
/// Returns the worst residual and each blob's (row, col) on success.
fn fit_lattice(
    points: &[ImagePoint],
    src: &[ImagePoint; 4],
    rows: usize,
    cols: usize,
) -> Option<(f64, Vec<(usize, usize)>)> {
    let (cm, rm) = ((cols - 1) as f64, (rows - 1) as f64);
    let dst = [(0.0, 0.0), (cm, 0.0), (cm, rm), (0.0, rm)];
    let h = homography(src, &dst)?;
    let mut taken = vec![false; rows * cols];
    let mut sites = Vec::with_capacity(points.len());
    let mut worst: f64 = 0.0;
    for p in points {
        let (u, v) = h(*p);
        let (c, r) = (u.round(), v.round());
        if !(0.0..=cm).contains(&c) || !(0.0..=rm).contains(&r) {
            return None;
        }
        worst = worst.max(((u - c).powi(2) + (v - r).powi(2)).sqrt());
        let (r, c) = (r as usize, c as usize);
        if std::mem::replace(&mut taken[r * cols + c], true) {
            return None;
        }
        sites.push((r, c));
    }
    (worst < MAX_GRID_RESIDUAL).then_some((worst, sites))
}

#[allow(clippy::type_complexity)]
fn homography(src: &[ImagePoint; 4], dst: &[(f64, f64); 4]) -> Option<impl Fn(ImagePoint) -> (f64, f64)> {
    // normalize the image side for conditioning
    let mx = src.iter().map(|p| p.px).sum::<f64>() / 4.0;
    let my = src.iter().map(|p| p.py).sum::<f64>() / 4.0;
    let scale = src
        .iter()
        .map(|p| ((p.px - mx).powi(2) + (p.py - my).powi(2)).sqrt())
        .sum::<f64>()
        / 4.0;
    if !(scale > 0.0) {
        return None;
    }
    let norm = move |p: ImagePoint| ((p.px - mx) / scale, (p.py - my) / scale);

    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let (x, y) = norm(src[i]);
        let (u, v) = dst[i];
        let r = 2 * i;
        a.row_mut(r).copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
        a.row_mut(r + 1).copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
        b[r] = u;
        b[r + 1] = v;
    }
    let hv = a.lu().solve(&b)?;
    Some(move |p: ImagePoint| {
        let (x, y) = norm(p);
        let w = hv[6] * x + hv[7] * y + 1.0;
        ((hv[0] * x + hv[1] * y + hv[2]) / w, (hv[3] * x + hv[4] * y + hv[5]) / w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn code_63() -> ColorCode {
        ColorCode::parse(&["RRR", "GBG", "BGR", "GBR", "BGB", "RGB"]).unwrap()
    }

    fn landmark() -> Landmark {
        Landmark::at_origin(code_63(), 300.0, 4.0).unwrap()
    }

    /// Camera directly below the landmark center.
    fn nadir_pose(lm: &Landmark, z: f64, azimuth: f64) -> DevicePose {
        let (cx, cy) = lm.center_offset();
        DevicePose::new(
            WorldPoint::new(cx, cy, z),
            Attitude::new(0.0, 0.0, azimuth).unwrap(),
        )
    }

    #[test]
    fn nadir_discs_land_on_projections() {
        let lm = landmark();
        let cam = CameraParams::default();
        let pose = nadir_pose(&lm, 220.0, 0.0);
        let frame = render_frame(&lm, &pose, &cam, &RenderOptions::default());
        let blobs = extract_blobs(&frame);
        assert_eq!(blobs.len(), 18);
        let truth = project_landmark(&lm, &pose, &cam, ProjectionModel::PerAxis);
        for b in &blobs {
            let nearest = truth
                .iter()
                .map(|t| t.unwrap().distance(&b.centroid))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 0.5, "{nearest}");
        }
    }

    #[test]
    fn out_of_view_frame_is_black() {
        let lm = landmark();
        let cam = CameraParams::default();
        let pose = DevicePose::new(WorldPoint::new(5000.0, 0.0, 220.0), Attitude::level());
        let frame = render_frame(&lm, &pose, &cam, &RenderOptions::default());
        assert!(frame.is_black());
        assert!(extract_blobs(&frame).is_empty());
    }

    #[test]
    fn single_disc_centroid() {
        let disc = Disc {
            center: ImagePoint::new(100.0, 100.0),
            radius_px: 3.0,
            color: LedColor::Red,
        };
        let blobs = extract_blobs(&render_discs(200, 200, &[disc]));
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].color, LedColor::Red);
        assert!(blobs[0].centroid.distance(&disc.center) <= 0.5);
    }

    #[test]
    fn subpixel_centroid_is_tight() {
        let disc = Disc {
            center: ImagePoint::new(50.37, 61.81),
            radius_px: 2.0,
            color: LedColor::Blue,
        };
        let blobs = extract_blobs(&render_discs(100, 100, &[disc]));
        assert!(blobs[0].centroid.distance(&disc.center) < 0.1);
    }

    #[test]
    fn gap_separates_blobs() {
        let discs = [
            Disc {
                center: ImagePoint::new(40.0, 40.0),
                radius_px: 3.0,
                color: LedColor::Green,
            },
            // edges 2 px apart
            Disc {
                center: ImagePoint::new(48.0, 40.0),
                radius_px: 3.0,
                color: LedColor::Green,
            },
        ];
        assert_eq!(extract_blobs(&render_discs(100, 100, &discs)).len(), 2);
    }

    #[test]
    fn nadir_grid_decodes_canonically() {
        let lm = landmark();
        let cam = CameraParams::default();
        let frame = render_frame(&lm, &nadir_pose(&lm, 220.0, 0.0), &cam, &RenderOptions::default());
        let obs = detect(&frame, &[(6, 3)]).unwrap();
        assert_eq!(obs.rotation_deg, 0);
        assert_eq!(&obs.observed, code_63().grid());
        assert_eq!(obs.code, code_63());
    }

    #[test]
    fn azimuth_quarter_turn_rotates_the_grid() {
        let lm = landmark();
        let cam = CameraParams::default();
        let frame = render_frame(&lm, &nadir_pose(&lm, 220.0, 90.0), &cam, &RenderOptions::default());
        let obs = detect(&frame, &[(6, 3)]).unwrap();
        assert_eq!(obs.observed.shape(), (3, 6));
        assert_eq!(obs.code, code_63());
        assert_eq!(&obs.observed.rotate_cw(obs.rotation_deg / 90), code_63().grid());
    }

    #[test]
    fn reference_centroids_match_leds() {
        let lm = landmark();
        let cam = CameraParams::default();
        let pose = DevicePose::new(
            WorldPoint::new(-30.0, 25.0, 200.0),
            Attitude::new(8.0, -5.0, 140.0).unwrap(),
        );
        let frame = render_frame(&lm, &pose, &cam, &RenderOptions::default());
        let obs = detect(&frame, &[(6, 3)]).unwrap();
        let truth = project_landmark(&lm, &pose, &cam, ProjectionModel::PerAxis);
        assert!(obs.a_px.distance(&truth[2].unwrap()) <= 0.5);
        assert!(obs.b_px.distance(&truth[0].unwrap()) <= 0.5);
    }

    #[test]
    fn missing_blob_is_a_mismatch() {
        let lm = landmark();
        let cam = CameraParams::default();
        let frame = render_frame(&lm, &nadir_pose(&lm, 220.0, 0.0), &cam, &RenderOptions::default());
        let mut blobs = extract_blobs(&frame);
        blobs.pop();
        assert!(matches!(blobs_to_code(&blobs, &[(6, 3)]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn ppm_round_trip_is_bit_exact() {
        let lm = landmark();
        let cam = CameraParams::default();
        let opts = RenderOptions {
            channel_sigma: 12.0,
            seed: 5,
            ..RenderOptions::default()
        };
        let frame = render_frame(&lm, &nadir_pose(&lm, 220.0, 30.0), &cam, &opts);
        let bytes = frame.to_ppm();
        let back = Frame::from_ppm(&bytes).unwrap();
        assert_eq!(back, frame);
        assert_eq!(back.to_ppm(), bytes);

        let commented = [b"P6\n# made by hand\n2 1\n255\n".as_slice(), &[1, 2, 3, 4, 5, 6]].concat();
        assert_eq!(Frame::from_ppm(&commented).unwrap().get(1, 0), [4, 5, 6]);
        assert!(Frame::from_ppm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(Frame::from_ppm(b"P6\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn success_rate_degrades_with_noise() {
        let lm = landmark();
        let cam = CameraParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let poses: Vec<DevicePose> = (0..25)
            .map(|_| {
                let (cx, cy) = lm.center_offset();
                DevicePose::new(
                    WorldPoint::new(cx + rng.random_range(-40.0..40.0), cy + rng.random_range(-30.0..30.0), 220.0),
                    Attitude::new(0.0, 0.0, rng.random_range(-180.0..180.0)).unwrap(),
                )
            })
            .collect();
        let mut last = usize::MAX;
        for sigma in [0.0, 15.0, 40.0, 80.0] {
            let ok = poses
                .iter()
                .enumerate()
                .filter(|(i, pose)| {
                    let opts = RenderOptions {
                        channel_sigma: sigma,
                        pixel_sigma: sigma / 20.0,
                        seed: *i as u64,
                        ..RenderOptions::default()
                    };
                    detect(&render_frame(&lm, pose, &cam, &opts), &[(6, 3)])
                        .is_ok_and(|o| o.code == code_63())
                })
                .count();
            assert!(ok <= last, "sigma {sigma}: {ok} > {last}");
            last = ok;
        }
        assert!(last < 25);
    }
}
