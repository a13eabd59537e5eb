//! C ABI over `imudeblur`.
//!
//! Objects are opaque heap handles created by `imd_*_new`/`_load`/`_build`
//! functions and released with the matching `_free`. Fallible calls return an
//! [`ImdStatus`]; the message of the most recent failure on the calling thread
//! is available from [`imd_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use imudeblur::blurfield::{self, BlurField, CameraRig};
use imudeblur::deconv::{build_bank, deblur_image, KernelBank};
use imudeblur::imaging::{self, Image};
use imudeblur::imu::{self, GyroSample, OrientationTrajectory};
use imudeblur::validation::{validate_field, Granularity, ValidationConfig};
use imudeblur::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    OutOfRange = 5,
    Numeric = 6,
    Geometry = 7,
    Panic = 99,
}

impl From<&Error> for ImdStatus {
    fn from(e: &Error) -> Self {
        match e.kind() {
            "io" => ImdStatus::Io,
            "bank_format" | "image_format" | "csv" | "json" | "camera" => ImdStatus::Format,
            "outside_span" | "row_out_of_range" | "extent_out_of_range" | "dimension_mismatch" | "block_too_small" => {
                ImdStatus::OutOfRange
            }
            "non_finite" | "non_unit_quaternion" => ImdStatus::Numeric,
            "point_at_infinity" | "singular_homography" | "degenerate" => ImdStatus::Geometry,
            _ => ImdStatus::InvalidArgument,
        }
    }
}

/// Validation granularity for [`imd_field_validate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImdGranularity {
    Block = 0,
    Image = 1,
    Off = 2,
}

pub struct ImdImage(Image);
pub struct ImdCamera(CameraRig);
pub struct ImdTrajectory(OrientationTrajectory);
pub struct ImdField(BlurField);
pub struct ImdBank(KernelBank);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ImdStatus, String)>) -> ImdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ImdStatus::Panic
        }
    }
}

fn lib<T>(r: imudeblur::Result<T>) -> Result<T, (ImdStatus, String)> {
    r.map_err(|e| (ImdStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (ImdStatus, String) {
    (ImdStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (ImdStatus, String) {
    (ImdStatus::InvalidArgument, msg.into())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, (ImdStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| invalid("path is not UTF-8"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (ImdStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (ImdStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn imd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn imd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// --- images -----------------------------------------------------------------

/// Wraps `width × height` 8-bit gray pixels, rows `stride` bytes apart.
///
/// # Safety
/// `pixels` must point to at least `stride × (height − 1) + width` bytes.
#[no_mangle]
pub unsafe extern "C" fn imd_image_from_gray8(
    pixels: *const u8,
    width: usize,
    height: usize,
    stride: usize,
    out: *mut *mut ImdImage,
) -> ImdStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(null("pixels"));
        }
        if width == 0 || height == 0 || stride < width {
            return Err(invalid(format!("bad geometry {width}x{height} stride {stride}")));
        }
        let bytes = std::slice::from_raw_parts(pixels, stride * (height - 1) + width);
        let img = Image::from_fn(width, height, |x, y| bytes[y * stride + x] as f32 / 255.0);
        put(out, ImdImage(img))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_image_load(path: *const c_char, out: *mut *mut ImdImage) -> ImdStatus {
    guard(|| {
        let img = lib(imaging::load_image(path_arg(path)?))?;
        put(out, ImdImage(img))
    })
}

/// Writes a binary PGM.
///
/// # Safety
/// `image` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn imd_image_save(image: *const ImdImage, path: *const c_char) -> ImdStatus {
    guard(|| {
        let img = deref(image, "image")?;
        lib(imaging::save_image(&img.0, path_arg(path)?))
    })
}

/// # Safety
/// `image` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_image_width(image: *const ImdImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `image` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_image_height(image: *const ImdImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.height())
}

/// Row-major `[0, 1]` intensities, valid while the handle lives.
///
/// # Safety
/// `image` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_image_data(image: *const ImdImage) -> *const f32 {
    image.as_ref().map_or(ptr::null(), |i| i.0.data().as_ptr())
}

/// # Safety
/// `image` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imd_image_free(image: *mut ImdImage) {
    free(image)
}

// --- camera and motion --------------------------------------------------------

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_camera_load(path: *const c_char, out: *mut *mut ImdCamera) -> ImdStatus {
    guard(|| {
        let rig = lib(blurfield::load_camera(path_arg(path)?))?;
        put(out, ImdCamera(rig))
    })
}

/// Camera with square pixels and the principal point at the image center.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_camera_new(
    width: usize,
    height: usize,
    focal_px: f64,
    readout_ns: i64,
    exposure_ns: i64,
    frame_ts_ns: i64,
    out: *mut *mut ImdCamera,
) -> ImdStatus {
    guard(|| {
        let rig = lib(CameraRig::new(width, height, focal_px, readout_ns, exposure_ns, frame_ts_ns))?;
        put(out, ImdCamera(rig))
    })
}

/// # Safety
/// `camera` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imd_camera_free(camera: *mut ImdCamera) {
    free(camera)
}

/// Integrates `count` gyro samples: timestamps in ns, rates as interleaved
/// `wx, wy, wz` triples in rad/s.
///
/// # Safety
/// `t_ns` must hold `count` values and `omega` `3 × count` values.
#[no_mangle]
pub unsafe extern "C" fn imd_trajectory_from_gyro(
    t_ns: *const i64,
    omega: *const f64,
    count: usize,
    out: *mut *mut ImdTrajectory,
) -> ImdStatus {
    guard(|| {
        if t_ns.is_null() || omega.is_null() {
            return Err(null("gyro arrays"));
        }
        let t = std::slice::from_raw_parts(t_ns, count);
        let w = std::slice::from_raw_parts(omega, 3 * count);
        let samples: Vec<GyroSample> = t
            .iter()
            .zip(w.chunks_exact(3))
            .map(|(&t, w)| GyroSample::new(t, w[0], w[1], w[2]))
            .collect();
        let traj = lib(imu::integrate_gyro(&samples))?;
        put(out, ImdTrajectory(traj))
    })
}

/// Reads and integrates a `t_ns,wx,wy,wz` CSV trace.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_trajectory_load(path: *const c_char, out: *mut *mut ImdTrajectory) -> ImdStatus {
    guard(|| {
        let samples = lib(imu::load_trace(path_arg(path)?))?;
        let traj = lib(imu::integrate_gyro(&samples))?;
        put(out, ImdTrajectory(traj))
    })
}

/// Orientation at `t_ns` as a unit quaternion `w, x, y, z`.
///
/// # Safety
/// `traj` must be a live handle and `wxyz` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn imd_trajectory_orientation(traj: *const ImdTrajectory, t_ns: i64, wxyz: *mut f64) -> ImdStatus {
    guard(|| {
        let traj = deref(traj, "trajectory")?;
        if wxyz.is_null() {
            return Err(null("wxyz"));
        }
        let q = lib(traj.0.orientation_at(t_ns))?;
        let out = std::slice::from_raw_parts_mut(wxyz, 4);
        out.copy_from_slice(&[q.w, q.i, q.j, q.k]);
        Ok(())
    })
}

/// # Safety
/// `traj` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imd_trajectory_free(traj: *mut ImdTrajectory) {
    free(traj)
}

// --- blur field -------------------------------------------------------------

/// Predicts the blur of every `block × block` cell.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_field_estimate(
    camera: *const ImdCamera,
    traj: *const ImdTrajectory,
    block: usize,
    out: *mut *mut ImdField,
) -> ImdStatus {
    guard(|| {
        let cam = deref(camera, "camera")?;
        let traj = deref(traj, "trajectory")?;
        let field = lib(blurfield::estimate_blur_field(&cam.0, &traj.0, block, block))?;
        put(out, ImdField(field))
    })
}

/// Marks cells whose prediction the image contradicts as invalid, in place.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn imd_field_validate(
    field: *mut ImdField,
    image: *const ImdImage,
    tau: f64,
    granularity: ImdGranularity,
) -> ImdStatus {
    guard(|| {
        let field = field.as_mut().ok_or_else(|| null("field"))?;
        let img = deref(image, "image")?;
        let g = match granularity {
            ImdGranularity::Block => Granularity::Block,
            ImdGranularity::Image => Granularity::Image,
            ImdGranularity::Off => Granularity::Off,
        };
        let cfg = lib(ValidationConfig::new(tau, g))?;
        field.0 = lib(validate_field(&img.0, &field.0, &cfg))?;
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_field_cell_count(field: *const ImdField) -> usize {
    field.as_ref().map_or(0, |f| f.0.cells().len())
}

/// # Safety
/// `field` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_field_valid_count(field: *const ImdField) -> usize {
    field.as_ref().map_or(0, |f| f.0.valid_count())
}

/// Blur of cell `index` (row-major): direction in degrees, extent in pixels,
/// validity flag.
///
/// # Safety
/// `field` must be live; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_field_cell(
    field: *const ImdField,
    index: usize,
    theta_deg: *mut f64,
    extent_px: *mut f64,
    valid: *mut bool,
) -> ImdStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if theta_deg.is_null() || extent_px.is_null() || valid.is_null() {
            return Err(null("output pointer"));
        }
        let c = f
            .0
            .cells()
            .get(index)
            .ok_or_else(|| (ImdStatus::OutOfRange, format!("cell {index} out of range")))?;
        *theta_deg = c.blur.theta_deg;
        *extent_px = c.blur.extent_px;
        *valid = c.valid;
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imd_field_free(field: *mut ImdField) {
    free(field)
}

// --- kernel bank and deblurring ---------------------------------------------

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_bank_build(r_max: usize, gamma: f64, out: *mut *mut ImdBank) -> ImdStatus {
    guard(|| {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("gamma must be positive, got {gamma}")));
        }
        let bank = lib(build_bank(r_max, gamma))?;
        put(out, ImdBank(bank))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_bank_load(path: *const c_char, out: *mut *mut ImdBank) -> ImdStatus {
    guard(|| {
        let bank = lib(KernelBank::load(path_arg(path)?))?;
        put(out, ImdBank(bank))
    })
}

/// # Safety
/// `bank` must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn imd_bank_save(bank: *const ImdBank, path: *const c_char) -> ImdStatus {
    guard(|| {
        let bank = deref(bank, "bank")?;
        lib(bank.0.save(path_arg(path)?))
    })
}

/// # Safety
/// `bank` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_bank_len(bank: *const ImdBank) -> usize {
    bank.as_ref().map_or(0, |b| b.0.len())
}

/// # Safety
/// `bank` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn imd_bank_r_max(bank: *const ImdBank) -> usize {
    bank.as_ref().map_or(0, |b| b.0.r_max())
}

/// # Safety
/// `bank` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imd_bank_free(bank: *mut ImdBank) {
    free(bank)
}

/// Deconvolves every valid cell; invalid cells are copied through.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imd_deblur(
    image: *const ImdImage,
    field: *const ImdField,
    bank: *const ImdBank,
    out: *mut *mut ImdImage,
) -> ImdStatus {
    guard(|| {
        let img = deref(image, "image")?;
        let field = deref(field, "field")?;
        let bank = deref(bank, "bank")?;
        let res = lib(deblur_image(&img.0, &field.0, &bank.0))?;
        put(out, ImdImage(res.image))
    })
}
