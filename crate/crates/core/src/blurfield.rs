//! Per-block linear blur estimated from the orientation trajectory, and
//! rolling-shutter rectification of keypoints.
//!
//! Image points are mapped across an interval `[t_from, t_to]` with the
//! infinite homography `K · Rᵀ(t_to) · R(t_from) · K⁻¹`, where `R(t)` is the
//! trajectory's camera-to-reference rotation at `t` expressed in the camera
//! frame (`P · q(t) · Pᵀ`, `P` = gyro-to-camera axis permutation).

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Keypoint;
use crate::imu::{OrientationTrajectory, Timestamp};

pub const DEFAULT_BLOCK: usize = 64;
pub const MIN_BLOCK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

impl ImagePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// JSON shape of the camera config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct CameraConfig {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    readout_ns: i64,
    exposure_ns: i64,
    frame_ts_ns: i64,
    #[serde(default = "identity_rows")]
    gyro_to_camera: [f64; 9],
}

fn identity_rows() -> [f64; 9] {
    [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
}

/// Pinhole intrinsics plus rolling-shutter timing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraConfig", into = "CameraConfig")]
pub struct CameraRig {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    /// Row count `N`.
    pub height: usize,
    pub readout_ns: i64,
    pub exposure_ns: i64,
    /// Start of the first row's exposure.
    pub frame_ts_ns: Timestamp,
    pub gyro_to_camera: Matrix3<f64>,
}

impl TryFrom<CameraConfig> for CameraRig {
    type Error = Error;

    fn try_from(c: CameraConfig) -> Result<Self> {
        let rig = CameraRig {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            readout_ns: c.readout_ns,
            exposure_ns: c.exposure_ns,
            frame_ts_ns: c.frame_ts_ns,
            gyro_to_camera: Matrix3::from_row_slice(&c.gyro_to_camera),
        };
        rig.validate()?;
        Ok(rig)
    }
}

impl From<CameraRig> for CameraConfig {
    fn from(r: CameraRig) -> Self {
        let m = r.gyro_to_camera;
        CameraConfig {
            fx: r.fx,
            fy: r.fy,
            cx: r.cx,
            cy: r.cy,
            width: r.width,
            height: r.height,
            readout_ns: r.readout_ns,
            exposure_ns: r.exposure_ns,
            frame_ts_ns: r.frame_ts_ns,
            gyro_to_camera: [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        }
    }
}

impl CameraRig {
    /// Global-shutter-free defaults: principal point at the image center,
    /// identity axis permutation.
    pub fn new(width: usize, height: usize, focal: f64, readout_ns: i64, exposure_ns: i64, frame_ts_ns: Timestamp) -> Result<Self> {
        let rig = Self {
            fx: focal,
            fy: focal,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
            width,
            height,
            readout_ns,
            exposure_ns,
            frame_ts_ns,
            gyro_to_camera: Matrix3::identity(),
        };
        rig.validate()?;
        Ok(rig)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Camera(m.to_string()));
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return bad("focal lengths must be positive");
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return bad("principal point must be finite");
        }
        if self.width < 1 || self.height < 1 {
            return bad("image dimensions must be at least 1");
        }
        if self.exposure_ns <= 0 {
            return bad("exposure must be positive");
        }
        if self.readout_ns < 0 {
            return bad("readout must be non-negative");
        }
        let p = &self.gyro_to_camera;
        if p.iter().any(|&v| v != 0.0 && v != 1.0 && v != -1.0) {
            return bad("gyro_to_camera entries must be -1, 0 or 1");
        }
        if (p.transpose() * p - Matrix3::identity()).abs().max() > 0.0 {
            return bad("gyro_to_camera must be orthogonal");
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn intrinsics_inv(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Exposure start of row `y`: `t_f + t_r · y / N`, rounded to the nearest ns.
    pub fn row_start_time(&self, y: f64) -> Result<Timestamp> {
        if !(0.0..=self.height as f64).contains(&y) {
            return Err(Error::RowOutOfRange { y, rows: self.height });
        }
        let offset = (self.readout_ns as f64 * y / self.height as f64).round() as i64;
        Ok(self.frame_ts_ns + offset)
    }

    /// Time span the trajectory must cover for a whole frame.
    pub fn frame_span(&self) -> (Timestamp, Timestamp) {
        (self.frame_ts_ns, self.frame_ts_ns + self.readout_ns + self.exposure_ns)
    }

    fn camera_rotation(&self, traj: &OrientationTrajectory, t: Timestamp) -> Result<Matrix3<f64>> {
        let q = traj.orientation_at(t)?;
        let p = &self.gyro_to_camera;
        Ok(p * q.to_rotation_matrix().matrix() * p.transpose())
    }

    /// Homography taking image points seen at `t_from` to where the same scene
    /// directions project at `t_to`.
    pub fn interframe_homography(&self, traj: &OrientationTrajectory, t_from: Timestamp, t_to: Timestamp) -> Result<Matrix3<f64>> {
        let r_from = self.camera_rotation(traj, t_from)?;
        let r_to = self.camera_rotation(traj, t_to)?;
        Ok(self.intrinsics() * r_to.transpose() * r_from * self.intrinsics_inv())
    }
}

fn apply_homography(h: &Matrix3<f64>, p: ImagePoint) -> Result<ImagePoint> {
    let v = h * Vector3::new(p.x, p.y, 1.0);
    if v.z.abs() < 1e-12 {
        return Err(Error::PointAtInfinity);
    }
    Ok(ImagePoint::new(v.x / v.z, v.y / v.z))
}

/// Where `p` (seen at its row's exposure start) lands at that row's exposure end.
pub fn map_point_across_exposure(rig: &CameraRig, traj: &OrientationTrajectory, p: ImagePoint) -> Result<ImagePoint> {
    if !p.is_finite() {
        return Err(Error::NonFinite("image point"));
    }
    let t1 = rig.row_start_time(p.y)?;
    let t2 = t1 + rig.exposure_ns;
    if !traj.covers(t1, t2) {
        let t = if t1 < traj.start() { t1 } else { t2 };
        return Err(Error::OutsideSpan {
            t,
            start: traj.start(),
            end: traj.end(),
        });
    }
    apply_homography(&rig.interframe_homography(traj, t1, t2)?, p)
}

/// Linear blur as an undirected orientation in `[0, 180)` degrees and an extent in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct BlurVector {
    pub theta_deg: f64,
    pub extent_px: f64,
}

impl BlurVector {
    pub fn new(theta_deg: f64, extent_px: f64) -> Self {
        Self { theta_deg, extent_px }
    }
}

pub fn fold_angle(deg: f64) -> f64 {
    let t = deg.rem_euclid(180.0);
    if t >= 180.0 {
        0.0
    } else {
        t
    }
}

pub fn blur_vector_from_displacement(p: ImagePoint, p2: ImagePoint) -> Result<BlurVector> {
    if !p.is_finite() || !p2.is_finite() {
        return Err(Error::NonFinite("image point"));
    }
    let dx = p2.x - p.x;
    let dy = p2.y - p.y;
    let r = dx.hypot(dy);
    if r < 1e-9 {
        return Ok(BlurVector::new(0.0, r));
    }
    Ok(BlurVector::new(fold_angle(dy.atan2(dx).to_degrees()), r))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlurCell {
    pub blur: BlurVector,
    pub valid: bool,
}

/// Row-major grid of blur vectors covering the whole image; the last row and
/// column of blocks may be smaller than the nominal block size.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurField {
    width: usize,
    height: usize,
    block_w: usize,
    block_h: usize,
    grid_cols: usize,
    grid_rows: usize,
    cells: Vec<BlurCell>,
}

impl BlurField {
    pub fn from_cells(width: usize, height: usize, block_w: usize, block_h: usize, cells: Vec<BlurCell>) -> Result<Self> {
        if block_w == 0 || block_h == 0 || width == 0 || height == 0 {
            return Err(Error::InvalidArgument("zero block or image size".into()));
        }
        let grid_cols = width.div_ceil(block_w);
        let grid_rows = height.div_ceil(block_h);
        if cells.len() != grid_cols * grid_rows {
            return Err(Error::InvalidArgument(format!(
                "{} cells for a {grid_cols}x{grid_rows} grid",
                cells.len()
            )));
        }
        Ok(Self {
            width,
            height,
            block_w,
            block_h,
            grid_cols,
            grid_rows,
            cells,
        })
    }

    /// The same blur vector in every cell.
    pub fn uniform(width: usize, height: usize, block_w: usize, block_h: usize, blur: BlurVector) -> Result<Self> {
        let n = width.div_ceil(block_w.max(1)) * height.div_ceil(block_h.max(1));
        Self::from_cells(width, height, block_w, block_h, vec![BlurCell { blur, valid: true }; n])
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn block_w(&self) -> usize {
        self.block_w
    }

    pub fn block_h(&self) -> usize {
        self.block_h
    }

    pub fn grid_cols(&self) -> usize {
        self.grid_cols
    }

    pub fn grid_rows(&self) -> usize {
        self.grid_rows
    }

    pub fn cells(&self) -> &[BlurCell] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [BlurCell] {
        &mut self.cells
    }

    pub fn cell(&self, col: usize, row: usize) -> &BlurCell {
        &self.cells[row * self.grid_cols + col]
    }

    /// `(x0, y0, w, h)` of a block in pixels.
    pub fn block_rect(&self, col: usize, row: usize) -> (usize, usize, usize, usize) {
        let x0 = col * self.block_w;
        let y0 = row * self.block_h;
        (x0, y0, self.block_w.min(self.width - x0), self.block_h.min(self.height - y0))
    }

    pub fn block_center(&self, col: usize, row: usize) -> ImagePoint {
        let (x0, y0, w, h) = self.block_rect(col, row);
        ImagePoint::new(x0 as f64 + (w as f64 - 1.0) / 2.0, y0 as f64 + (h as f64 - 1.0) / 2.0)
    }

    /// Cell containing pixel coordinate `(x, y)`, clamped to the grid.
    pub fn cell_index_at(&self, x: f64, y: f64) -> usize {
        let col = ((x.round().max(0.0) as usize) / self.block_w).min(self.grid_cols - 1);
        let row = ((y.round().max(0.0) as usize) / self.block_h).min(self.grid_rows - 1);
        row * self.grid_cols + col
    }

    pub fn valid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.valid).count()
    }

    pub fn mean_extent(&self) -> f64 {
        self.cells.iter().map(|c| c.blur.extent_px).sum::<f64>() / self.cells.len() as f64
    }

    /// CSV `col,row,theta_deg,extent_px,valid`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["col", "row", "theta_deg", "extent_px", "valid"])?;
        for row in 0..self.grid_rows {
            for col in 0..self.grid_cols {
                let c = self.cell(col, row);
                w.write_record(&[
                    col.to_string(),
                    row.to_string(),
                    format!("{:.6}", c.blur.theta_deg),
                    format!("{:.6}", c.blur.extent_px),
                    (c.valid as u8).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(Error::file(path))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads a field CSV back for an image of the given geometry.
    pub fn read_csv<R: Read>(reader: R, width: usize, height: usize, block_w: usize, block_h: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            col: usize,
            row: usize,
            theta_deg: f64,
            extent_px: f64,
            valid: u8,
        }
        let mut field = Self::uniform(width, height, block_w, block_h, BlurVector::default())?;
        let mut seen = vec![false; field.cells.len()];
        for rec in csv::Reader::from_reader(reader).deserialize() {
            let r: Row = rec?;
            if r.col >= field.grid_cols || r.row >= field.grid_rows {
                return Err(Error::InvalidArgument(format!("cell ({}, {}) outside grid", r.col, r.row)));
            }
            let i = r.row * field.grid_cols + r.col;
            field.cells[i] = BlurCell {
                blur: BlurVector::new(r.theta_deg, r.extent_px),
                valid: r.valid != 0,
            };
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("field CSV does not cover every cell".into()));
        }
        Ok(field)
    }
}

/// Blur vector at every block center. All cells start out valid.
pub fn estimate_blur_field(rig: &CameraRig, traj: &OrientationTrajectory, block_w: usize, block_h: usize) -> Result<BlurField> {
    if block_w < MIN_BLOCK || block_h < MIN_BLOCK {
        return Err(Error::InvalidArgument(format!(
            "block size {block_w}x{block_h} below {MIN_BLOCK}px"
        )));
    }
    let mut field = BlurField::uniform(rig.width, rig.height, block_w, block_h, BlurVector::default())?;
    let cols = field.grid_cols;
    let cells = (0..field.cells.len())
        .into_par_iter()
        .map(|i| {
            let p = field.block_center(i % cols, i / cols);
            let p2 = map_point_across_exposure(rig, traj, p)?;
            Ok(BlurCell {
                blur: blur_vector_from_displacement(p, p2)?,
                valid: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    field.cells = cells;
    Ok(field)
}

/// Moves each keypoint to where it would appear had every row been exposed at
/// `t_f`. Keypoints falling in an invalid cell of `field` are left alone.
pub fn rectify_keypoints(rig: &CameraRig, traj: &OrientationTrajectory, kps: &[Keypoint], field: Option<&BlurField>) -> Result<Vec<Keypoint>> {
    kps.iter()
        .map(|kp| {
            if let Some(f) = field {
                if !f.cells[f.cell_index_at(kp.x, kp.y)].valid {
                    return Ok(*kp);
                }
            }
            let y = kp.y.clamp(0.0, rig.height as f64);
            let t1 = rig.row_start_time(y)?;
            let h = rig.interframe_homography(traj, t1, rig.frame_ts_ns)?;
            let p = apply_homography(&h, ImagePoint::new(kp.x, kp.y))?;
            Ok(Keypoint { x: p.x, y: p.y, ..*kp })
        })
        .collect()
}

pub fn load_camera(path: impl AsRef<Path>) -> Result<CameraRig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(Error::file(path))?;
    serde_json::from_str(&text).map_err(|e| {
        // try_from failures surface as serde custom errors; keep the message.
        Error::Camera(e.to_string())
    })
}

pub fn save_camera(rig: &CameraRig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(rig)?;
    std::fs::write(path, text).map_err(Error::file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imu::{integrate_gyro, GyroSample};
    use nalgebra::UnitQuaternion;

    fn rig(readout_ns: i64) -> CameraRig {
        CameraRig::new(640, 480, 500.0, readout_ns, 20_000_000, 0).unwrap()
    }

    fn still() -> OrientationTrajectory {
        OrientationTrajectory::from_knots(vec![(-1_000_000_000, UnitQuaternion::identity()), (1_000_000_000, UnitQuaternion::identity())]).unwrap()
    }

    fn spin(omega: [f64; 3]) -> OrientationTrajectory {
        let samples: Vec<_> = (-10..=100)
            .map(|i| GyroSample::new(i * 1_000_000, omega[0], omega[1], omega[2]))
            .collect();
        integrate_gyro(&samples).unwrap()
    }

    #[test]
    fn row_start_times() {
        let mut r = CameraRig::new(1920, 1080, 1000.0, 30_000_000, 10_000_000, 0).unwrap();
        assert_eq!(r.row_start_time(0.0).unwrap(), 0);
        assert_eq!(r.row_start_time(1080.0).unwrap(), 30_000_000);
        assert_eq!(r.row_start_time(540.0).unwrap(), 15_000_000);
        r.frame_ts_ns = 77;
        assert_eq!(r.row_start_time(0.0).unwrap(), 77);
        assert_eq!(r.row_start_time(1080.0).unwrap(), 30_000_077);
        assert!(matches!(r.row_start_time(-0.5), Err(Error::RowOutOfRange { .. })));
        assert!(matches!(r.row_start_time(1080.5), Err(Error::RowOutOfRange { .. })));
    }

    #[test]
    fn still_camera_does_not_move_points() {
        let p = ImagePoint::new(123.4, 56.7);
        assert_eq!(map_point_across_exposure(&rig(30_000_000), &still(), p).unwrap(), p);
    }

    #[test]
    fn optical_axis_rotation_fixes_principal_point() {
        let r = rig(0);
        let p = ImagePoint::new(r.cx, r.cy);
        let q = map_point_across_exposure(&r, &spin([0.0, 0.0, 2.0]), p).unwrap();
        assert!((q.x - p.x).abs() < 1e-9 && (q.y - p.y).abs() < 1e-9);
    }

    #[test]
    fn y_axis_rotation_shifts_principal_point_by_tan() {
        let r = rig(0);
        let omega = 0.5;
        let traj = spin([0.0, omega, 0.0]);
        let p = ImagePoint::new(r.cx, r.cy);
        let q = map_point_across_exposure(&r, &traj, p).unwrap();
        // Camera turning by δ about +y sees the scene slide towards −x.
        let delta = omega * r.exposure_ns as f64 * 1e-9;
        assert!((q.x - (r.cx - r.fx * delta.tan())).abs() < 1e-6);
        assert!((q.y - r.cy).abs() < 1e-9);
    }

    #[test]
    fn mapping_outside_trajectory_fails() {
        let r = rig(0);
        let short = OrientationTrajectory::from_knots(vec![(0, UnitQuaternion::identity()), (1_000, UnitQuaternion::identity())]).unwrap();
        assert!(matches!(map_point_across_exposure(&r, &short, ImagePoint::new(1.0, 1.0)), Err(Error::OutsideSpan { .. })));
    }

    #[test]
    fn displacement_examples() {
        let p = ImagePoint::new(100.0, 100.0);
        assert_eq!(blur_vector_from_displacement(p, p).unwrap(), BlurVector::new(0.0, 0.0));
        let b = blur_vector_from_displacement(p, ImagePoint::new(130.0, 100.0)).unwrap();
        assert_eq!(b, BlurVector::new(0.0, 30.0));
        let b = blur_vector_from_displacement(p, ImagePoint::new(90.0, 90.0)).unwrap();
        assert!((b.extent_px - 200f64.sqrt()).abs() < 1e-12);
        assert!((b.theta_deg - 45.0).abs() < 1e-12);
        assert!(blur_vector_from_displacement(p, ImagePoint::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn fold_stays_in_range() {
        for a in [-180.0, -1e-15, 0.0, 179.999_999_999_999_99, 180.0, 359.0, 540.0] {
            let f = fold_angle(a);
            assert!((0.0..180.0).contains(&f), "{a} -> {f}");
        }
    }

    #[test]
    fn still_field_is_zero() {
        let f = estimate_blur_field(&rig(30_000_000), &still(), 64, 64).unwrap();
        assert_eq!((f.grid_cols(), f.grid_rows()), (10, 8));
        assert!(f.cells().iter().all(|c| c.blur == BlurVector::default() && c.valid));
    }

    #[test]
    fn partial_blocks_cover_image() {
        let r = CameraRig::new(100, 70, 100.0, 0, 1_000_000, 0).unwrap();
        let f = estimate_blur_field(&r, &still(), 32, 32).unwrap();
        assert_eq!((f.grid_cols(), f.grid_rows()), (4, 3));
        assert_eq!(f.block_rect(3, 2), (96, 64, 4, 6));
        assert!(estimate_blur_field(&r, &still(), 4, 32).is_err());
    }

    #[test]
    fn optical_axis_rotation_field_is_minimal_at_center() {
        let r = CameraRig::new(640, 480, 500.0, 0, 20_000_000, 0).unwrap();
        let f = estimate_blur_field(&r, &spin([0.0, 0.0, 1.0]), 32, 32).unwrap();
        let center = f.cell_index_at(r.cx, r.cy);
        let min = f.cells().iter().map(|c| c.blur.extent_px).fold(f64::INFINITY, f64::min);
        assert_eq!(f.cells()[center].blur.extent_px, min);
    }

    #[test]
    fn field_csv_round_trip() {
        let r = CameraRig::new(100, 70, 100.0, 0, 10_000_000, 0).unwrap();
        let mut f = estimate_blur_field(&r, &spin([0.3, -0.2, 0.1]), 32, 32).unwrap();
        f.cells_mut()[2].valid = false;
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("col,row,theta_deg,extent_px,valid"));
        let back = BlurField::read_csv(buf.as_slice(), 100, 70, 32, 32).unwrap();
        for (a, b) in back.cells().iter().zip(f.cells()) {
            assert_eq!(a.valid, b.valid);
            assert!((a.blur.extent_px - b.blur.extent_px).abs() < 1e-5);
        }
    }

    #[test]
    fn camera_json_validation() {
        let good = r#"{"fx":500,"fy":500,"cx":319.5,"cy":239.5,"width":640,"height":480,
            "readout_ns":30000000,"exposure_ns":20000000,"frame_ts_ns":0,
            "gyro_to_camera":[0,1,0,-1,0,0,0,0,1]}"#;
        let rig: CameraRig = serde_json::from_str(good).unwrap();
        assert_eq!(rig.gyro_to_camera[(0, 1)], 1.0);
        let back: CameraRig = serde_json::from_str(&serde_json::to_string(&rig).unwrap()).unwrap();
        assert_eq!(back, rig);

        let scaled = good.replace("[0,1,0,-1,0,0,0,0,1]", "[0,2,0,-1,0,0,0,0,1]");
        assert!(serde_json::from_str::<CameraRig>(&scaled).is_err());
        let singular = good.replace("[0,1,0,-1,0,0,0,0,1]", "[1,0,0,1,0,0,0,0,1]");
        assert!(serde_json::from_str::<CameraRig>(&singular).is_err());
        let neg_exposure = good.replace("\"exposure_ns\":20000000", "\"exposure_ns\":0");
        assert!(serde_json::from_str::<CameraRig>(&neg_exposure).is_err());
    }
}
