//! Command implementations behind the `imudeblur` binary.
//!
//! Every command reads its inputs from files, writes its outputs to files and
//! reports diagnostics through `log` on stderr. Parsing lives here rather than
//! in `main.rs` so tests can drive commands with argument vectors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;

use crate::blurfield::{self, estimate_blur_field, BlurField, CameraRig, DEFAULT_BLOCK};
use crate::deconv::{build_bank, deblur_image, KernelBank, DEFAULT_GAMMA, MIN_EXTENT};
use crate::error::{Error, Result};
use crate::eval::{self, Homography, DEFAULT_COUNT, DEFAULT_OVERLAP};
use crate::imaging::{self, Image};
use crate::imu::{self, integrate_gyro, GyroSample, OrientationTrajectory, Timestamp};
use crate::validation::{validate_field, Granularity, ValidationConfig, DEFAULT_TAU};

/// Directory searched for cached kernel banks when `--bank` is not given.
pub const BANK_DIR_ENV: &str = "IMUDEBLUR_BANK_DIR";

#[derive(Debug, Parser)]
#[command(name = "imudeblur", version, about = "Gyro-guided deblurring for rolling-shutter cameras")]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate, validate and remove gyro-predicted blur from one frame.
    Deblur(DeblurArgs),
    /// Blur a sharp image and emit a matching gyro trace and camera file.
    Synth(SynthArgs),
    /// Score keypoint pairs: repeatability and localization error.
    Eval(EvalArgs),
    /// Write the predicted blur field and a line-segment preview.
    Field(FieldArgs),
    /// Move keypoints onto the first row's exposure time.
    Rectify(RectifyArgs),
    /// Precompute and save a kernel bank.
    Bank(BankArgs),
}

#[derive(Debug, Args)]
pub struct MotionArgs {
    /// Camera config (JSON).
    #[arg(long)]
    pub camera: PathBuf,
    /// Gyro trace (CSV `t_ns,wx,wy,wz`).
    #[arg(long)]
    pub trace: PathBuf,
    /// Block edge length in pixels.
    #[arg(long, default_value_t = DEFAULT_BLOCK)]
    pub block: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Directional-gradient threshold on [0, 1] intensities.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Validation granularity: block, image or off.
    #[arg(long = "validate", default_value = "block")]
    pub granularity: Granularity,
}

impl ValidateArgs {
    fn config(&self) -> Result<ValidationConfig> {
        ValidationConfig::new(self.tau, self.granularity)
    }
}

#[derive(Debug, Args)]
pub struct DeblurArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub motion: MotionArgs,
    #[command(flatten)]
    pub validate: ValidateArgs,
    /// Wiener regularization.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Largest kernel extent; defaults to the largest valid extent in the field.
    #[arg(long)]
    pub r_max: Option<usize>,
    /// Prebuilt kernel bank; overrides the cache directory.
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Also write the validated blur field as CSV.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Sharp input image (PGM/PPM).
    #[arg(long)]
    pub input: PathBuf,
    /// Blurred output image (PGM).
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub trace_out: PathBuf,
    #[arg(long)]
    pub camera_out: PathBuf,
    /// Blur direction in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Blur extent in pixels.
    #[arg(long)]
    pub r: usize,
    /// Add Gaussian noise at this SNR; omit for a noise-free frame.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Focal length in pixels (default: image width).
    #[arg(long)]
    pub focal: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    pub readout_ms: f64,
    #[arg(long, default_value_t = 30.0)]
    pub exposure_ms: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Keypoints in the reference image; repeat once per pair.
    #[arg(long = "a", required = true)]
    pub a: Vec<PathBuf>,
    /// Keypoints in the second image; repeat once per pair.
    #[arg(long = "b", required = true)]
    pub b: Vec<PathBuf>,
    /// Homography from A to B; repeat once per pair.
    #[arg(long = "homography", required = true)]
    pub homography: Vec<PathBuf>,
    /// Keep this many strongest keypoints per image.
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    pub count: usize,
    /// Minimum circle overlap for a match.
    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    pub overlap: f64,
    /// Report CSV; rows are appended when the file exists.
    #[arg(long)]
    pub report: PathBuf,
    /// Pair labels; defaults to the A file stem.
    #[arg(long = "label")]
    pub label: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub motion: MotionArgs,
    /// Field CSV output.
    #[arg(long)]
    pub output: PathBuf,
    /// Preview image drawing each cell's blur as a segment.
    #[arg(long)]
    pub preview: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RectifyArgs {
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub motion: MotionArgs,
    /// Frame the keypoints came from; enables validation so keypoints in
    /// rejected cells stay put.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[command(flatten)]
    pub validate: ValidateArgs,
}

#[derive(Debug, Args)]
pub struct BankArgs {
    #[arg(long)]
    pub r_max: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long)]
    pub output: PathBuf,
}

/// Runs a parsed command line on a pool sized by `--threads`.
pub fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Deblur(a) => cmd_deblur(&a).map(|s| {
            eprintln!(
                "stats: cells_valid={} cells_invalid={} deblurred={} mean_extent={:.3} wall_ms={:.1}",
                s.field.valid_count(),
                s.field.cells().len() - s.field.valid_count(),
                s.deblurred_cells,
                s.field.mean_extent(),
                s.wall_ms
            )
        }),
        Command::Synth(a) => cmd_synth(&a),
        Command::Eval(a) => cmd_eval(&a).map(|_| ()),
        Command::Field(a) => cmd_field(&a).map(|_| ()),
        Command::Rectify(a) => cmd_rectify(&a),
        Command::Bank(a) => cmd_bank(&a).map(|_| ()),
    })
}

fn load_motion(m: &MotionArgs) -> Result<(CameraRig, OrientationTrajectory)> {
    for p in [&m.camera, &m.trace] {
        if !p.exists() {
            return Err(Error::File {
                path: p.clone(),
                source: std::io::Error::from(std::io::ErrorKind::NotFound),
            });
        }
    }
    let rig = blurfield::load_camera(&m.camera)?;
    let traj = integrate_gyro(&imu::load_trace(&m.trace)?)?;
    let (t0, t1) = rig.frame_span();
    if !traj.covers(t0, t1) {
        return Err(Error::OutsideSpan {
            t: if t0 < traj.start() { t0 } else { t1 },
            start: traj.start(),
            end: traj.end(),
        });
    }
    Ok((rig, traj))
}

fn bank_file_name(r_max: usize, gamma: f64) -> String {
    format!("bank_r{r_max}_g{:016x}.idbk", gamma.to_bits())
}

/// Loads `--bank`, else a cached bank from [`BANK_DIR_ENV`], else builds one
/// (and caches it when the directory is set).
fn obtain_bank(explicit: Option<&Path>, r_max: usize, gamma: f64) -> Result<KernelBank> {
    if let Some(path) = explicit {
        let bank = KernelBank::load(path)?;
        if bank.gamma() != gamma {
            log::warn!("bank {} was built with gamma {}; using it instead of {gamma}", path.display(), bank.gamma());
        }
        return Ok(bank);
    }
    let cache = std::env::var_os(BANK_DIR_ENV).map(PathBuf::from);
    if let Some(dir) = &cache {
        let path = dir.join(bank_file_name(r_max, gamma));
        if path.exists() {
            match KernelBank::load(&path) {
                Ok(bank) => return Ok(bank),
                Err(e) => log::warn!("ignoring cached bank {}: {e}", path.display()),
            }
        }
    }
    let bank = build_bank(r_max, gamma)?;
    if let Some(dir) = cache {
        std::fs::create_dir_all(&dir).map_err(Error::file(&dir))?;
        bank.save(dir.join(bank_file_name(r_max, gamma)))?;
    }
    Ok(bank)
}

#[derive(Clone, Debug)]
pub struct DeblurStats {
    pub field: BlurField,
    pub deblurred_cells: usize,
    pub passthrough_cells: usize,
    pub wall_ms: f64,
}

pub fn cmd_deblur(a: &DeblurArgs) -> Result<DeblurStats> {
    let start = Instant::now();
    if !(a.gamma > 0.0) || !a.gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", a.gamma)));
    }
    let cfg = a.validate.config()?;
    if !a.input.exists() {
        return Err(Error::File {
            path: a.input.clone(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        });
    }
    let (rig, traj) = load_motion(&a.motion)?;
    let img = imaging::load_image(&a.input)?;
    if img.dims() != (rig.width, rig.height) {
        return Err(Error::DimensionMismatch {
            expected: (rig.width, rig.height),
            got: img.dims(),
        });
    }
    let field = estimate_blur_field(&rig, &traj, a.motion.block, a.motion.block)?;
    let field = validate_field(&img, &field, &cfg)?;

    let r_max = match a.r_max {
        Some(r) => r,
        None => field
            .cells()
            .iter()
            .filter(|c| c.valid)
            .map(|c| c.blur.extent_px.round() as usize)
            .max()
            .unwrap_or(MIN_EXTENT)
            .max(MIN_EXTENT),
    };
    let (image, deblurred_cells, passthrough_cells) = if field.valid_count() == 0 {
        (img, 0, field.cells().len())
    } else {
        let bank = obtain_bank(a.bank.as_deref(), r_max, a.gamma)?;
        let out = deblur_image(&img, &field, &bank)?;
        (out.image, out.deblurred_cells, out.passthrough_cells)
    };
    imaging::save_image(&image, &a.output)?;
    if let Some(p) = &a.field_out {
        field.save_csv(p)?;
    }
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(DeblurStats {
        field,
        deblurred_cells,
        passthrough_cells,
        wall_ms,
    })
}

/// Constant body rate (gyro frame, rad/s) whose rotation over one exposure
/// moves the principal point by `r` pixels along `theta_deg`.
pub fn rate_for_center_blur(rig: &CameraRig, theta_deg: f64, r: f64) -> Vector3<f64> {
    let (s, c) = theta_deg.to_radians().sin_cos();
    // The ray through the displaced pixel is (r c / fx, r s / fy, 1); the
    // rotation taking the optical axis there is about ez × ray.
    let axis = Vector3::new(-s / rig.fy, c / rig.fx, 0.0);
    let norm = axis.norm();
    let angle = (r * norm).atan();
    let t_e = rig.exposure_ns as f64 * 1e-9;
    // The image moves opposite to the camera.
    let omega_cam = -(angle / t_e) * axis / norm;
    rig.gyro_to_camera.transpose() * omega_cam
}

/// Gyro samples at 100 Hz covering the frame with a margin on both sides.
pub fn constant_rate_trace(rig: &CameraRig, omega: Vector3<f64>) -> Vec<GyroSample> {
    const STEP_NS: Timestamp = 10_000_000;
    let (t0, t1) = rig.frame_span();
    let first = t0 - 2 * STEP_NS;
    let n = ((t1 - first) / STEP_NS + 3) as usize;
    (0..n)
        .map(|i| GyroSample {
            t_ns: first + i as Timestamp * STEP_NS,
            omega,
        })
        .collect()
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    if a.r < 1 {
        return Err(Error::ExtentOutOfRange { r: a.r, min: 1, max: usize::MAX });
    }
    for (name, v) in [("readout_ms", a.readout_ms), ("exposure_ms", a.exposure_ms)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
        }
    }
    let sharp = imaging::load_image(&a.input)?;
    let (w, h) = sharp.dims();
    let focal = a.focal.unwrap_or(w as f64);
    let rig = CameraRig::new(
        w,
        h,
        focal,
        (a.readout_ms * 1e6).round() as i64,
        (a.exposure_ms * 1e6).round() as i64,
        1_000_000_000,
    )?;
    let omega = rate_for_center_blur(&rig, a.theta, a.r as f64);
    let blurred = imaging::synth_blur(&sharp, a.theta, a.r, a.seed, a.snr_db)?;
    imaging::save_image(&blurred, &a.output)?;
    imu::save_trace(&a.trace_out, &constant_rate_trace(&rig, omega))?;
    blurfield::save_camera(&rig, &a.camera_out)?;
    log::info!("synth: omega = ({:.6}, {:.6}, {:.6}) rad/s", omega.x, omega.y, omega.z);
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub pair: String,
    pub rep: f64,
    pub loc_err: Option<f64>,
    pub matches: usize,
    pub count: usize,
}

fn format_row(r: &ReportRow) -> [String; 5] {
    [
        r.pair.clone(),
        format!("{:.6}", r.rep),
        r.loc_err.map(|e| format!("{e:.6}")).unwrap_or_default(),
        r.matches.to_string(),
        r.count.to_string(),
    ]
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Vec<ReportRow>> {
    let n = a.a.len();
    if a.b.len() != n || a.homography.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need as many --b and --homography as --a ({n}), got {} and {}",
            a.b.len(),
            a.homography.len()
        )));
    }
    if !a.label.is_empty() && a.label.len() != n {
        return Err(Error::InvalidArgument(format!("got {} labels for {n} pairs", a.label.len())));
    }
    if a.count == 0 {
        return Err(Error::InvalidArgument("--count must be positive".into()));
    }
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..n {
        let ka = eval::load_keypoints(&a.a[i])?;
        let kb = eval::load_keypoints(&a.b[i])?;
        let h: Homography = eval::load_homography(&a.homography[i])?;
        if ka.len() < a.count || kb.len() < a.count {
            log::warn!(
                "pair {i}: only {} / {} keypoints available, fewer than --count {}",
                ka.len(),
                kb.len(),
                a.count
            );
        }
        let s = eval::score_pair(ka, kb, &h, a.count, a.overlap)?;
        let pair = a.label.get(i).cloned().unwrap_or_else(|| {
            a.a[i]
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| i.to_string())
        });
        rows.push(ReportRow {
            pair,
            rep: s.repeatability,
            loc_err: s.localization_error,
            matches: s.matches,
            count: s.count,
        });
    }
    if n > 1 {
        let errs: Vec<f64> = rows.iter().filter_map(|r| r.loc_err).collect();
        rows.push(ReportRow {
            pair: "avg".into(),
            rep: rows.iter().map(|r| r.rep).sum::<f64>() / n as f64,
            loc_err: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
            matches: (rows.iter().map(|r| r.matches).sum::<usize>() as f64 / n as f64).round() as usize,
            count: (rows.iter().map(|r| r.count).sum::<usize>() as f64 / n as f64).round() as usize,
        });
    }

    let fresh = !a.report.exists();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&a.report)
        .map_err(Error::file(&a.report))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(["pair", "rep", "loc_err", "matches", "count"])?;
    }
    for r in &rows {
        w.write_record(format_row(r))?;
    }
    w.flush()?;
    Ok(rows)
}

/// Draws each cell's blur as a white segment centered on its block, on black.
pub fn render_field_preview(field: &BlurField) -> Image {
    let (w, h) = field.image_dims();
    let mut img = Image::new(w, h);
    for row in 0..field.grid_rows() {
        for col in 0..field.grid_cols() {
            let cell = field.cell(col, row);
            let c = field.block_center(col, row);
            let (s, co) = cell.blur.theta_deg.to_radians().sin_cos();
            let half = 0.5 * cell.blur.extent_px;
            let steps = (2.0 * cell.blur.extent_px).ceil().max(1.0) as usize;
            let level = if cell.valid { 1.0 } else { 0.5 };
            for k in 0..=steps {
                let t = if steps == 0 { 0.0 } else { -half + cell.blur.extent_px * k as f64 / steps as f64 };
                let x = (c.x + t * co).round();
                let y = (c.y + t * s).round();
                if x >= 0.0 && y >= 0.0 && (x as usize) < w && (y as usize) < h {
                    img.set(x as usize, y as usize, level);
                }
            }
        }
    }
    img
}

pub fn cmd_field(a: &FieldArgs) -> Result<BlurField> {
    let (rig, traj) = load_motion(&a.motion)?;
    let field = estimate_blur_field(&rig, &traj, a.motion.block, a.motion.block)?;
    field.save_csv(&a.output)?;
    if let Some(p) = &a.preview {
        imaging::save_image(&render_field_preview(&field), p)?;
    }
    Ok(field)
}

pub fn cmd_rectify(a: &RectifyArgs) -> Result<()> {
    let (rig, traj) = load_motion(&a.motion)?;
    let kps = eval::load_keypoints(&a.keypoints)?;
    let field = match &a.image {
        Some(p) => {
            let img = imaging::load_image(p)?;
            let field = estimate_blur_field(&rig, &traj, a.motion.block, a.motion.block)?;
            Some(validate_field(&img, &field, &a.validate.config()?)?)
        }
        None => None,
    };
    let out = blurfield::rectify_keypoints(&rig, &traj, &kps, field.as_ref())?;
    eval::save_keypoints(&a.output, &out)
}

pub fn cmd_bank(a: &BankArgs) -> Result<KernelBank> {
    if !(a.gamma > 0.0) || !a.gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", a.gamma)));
    }
    let bank = build_bank(a.r_max, a.gamma)?;
    bank.save(&a.output)?;
    eprintln!("bank: kernels={} max_elements={}", bank.len(), bank.max_elements());
    Ok(bank)
}
