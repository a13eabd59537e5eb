//! Spatial-domain Wiener deconvolution with a precomputed kernel bank.
//!
//! A 1D box PSF of extent `r` is zero-padded to `4r + 1` taps, inverted with
//! the Wiener filter `W = H* / (|H|² + γ)` in the DFT domain, brought back to
//! the spatial domain, and rasterized along the blur direction. The resulting
//! sparse kernels are applied per block of the blur field.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::blurfield::BlurField;
use crate::error::{Error, Result};
use crate::imaging::{Image, PaddedImage, SparseKernel, Tap};

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const MIN_EXTENT: usize = 2;
pub const THETA_STEPS: usize = 180;

const BANK_MAGIC: &[u8; 5] = b"IDBK1";
const DROP_REL: f64 = 1e-6;

/// Zero-padded 1D box PSF. The array has odd length and its center index is
/// the kernel anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct Psf1D {
    taps: Vec<f64>,
}

impl Psf1D {
    /// `r` equal taps of `1/r` centered in an array of length `4r + 1`. For
    /// even `r` the extra pad goes to the right.
    pub fn boxcar(r: usize) -> Result<Self> {
        if r < 1 {
            return Err(Error::ExtentOutOfRange { r, min: 1, max: usize::MAX });
        }
        let len = 4 * r + 1;
        let left = (len - r) / 2;
        let mut taps = vec![0.0; len];
        taps[left..left + r].fill(1.0 / r as f64);
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn center(&self) -> usize {
        self.taps.len() / 2
    }
}

pub fn build_psf_1d(r: usize, r_max: usize) -> Result<Psf1D> {
    if r < MIN_EXTENT || r > r_max {
        return Err(Error::ExtentOutOfRange {
            r,
            min: MIN_EXTENT,
            max: r_max,
        });
    }
    Psf1D::boxcar(r)
}

/// Spatial Wiener inverse of `psf`, same length, anchored at the array center.
pub fn wiener_inverse_1d(psf: &Psf1D, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let n = psf.len();
    let c = psf.center();
    // Rotate so the anchor sits at index 0 (zero-phase for symmetric PSFs).
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::new(psf.taps[(k + c) % n], 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for h in buf.iter_mut() {
        *h = h.conj() / (h.norm_sqr() + gamma);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let max_imag = buf.iter().map(|v| (v.im * scale).abs()).fold(0.0, f64::max);
    if max_imag > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "inverse kernel has imaginary residue {max_imag:e}"
        )));
    }
    Ok((0..n).map(|k| buf[(k + n - c) % n].re * scale).collect())
}

/// Unit direction for an angle in degrees with exact zeros on the axes.
fn direction(theta_deg: f64) -> (f64, f64) {
    let (s, c) = theta_deg.to_radians().sin_cos();
    let snap = |v: f64| {
        if v.abs() < 1e-12 {
            0.0
        } else if (v.abs() - 1.0).abs() < 1e-12 {
            v.signum()
        } else {
            v
        }
    };
    (snap(c), snap(s))
}

/// Splits coordinate `v` between `floor(v)` and `floor(v) + 1`.
fn split(v: f64) -> (i32, f64) {
    let base = v.floor();
    let mut f = v - base;
    let mut i = base as i32;
    if f < 1e-12 {
        f = 0.0;
    } else if f > 1.0 - 1e-12 {
        f = 0.0;
        i += 1;
    }
    (i, f)
}

/// Lays 1D `weights` (anchor at the array center) along the line through the
/// origin at `theta_deg`.
///
/// Each tap is split linearly between the two nearest integer positions on
/// the line's major axis; each major position then splits its mass between
/// the two pixels straddling the line on the minor axis. Elements below
/// `drop_rel × max|w|` are discarded and the discarded mass is folded into the
/// largest tap, so the kernel sum equals the 1D sum.
pub fn rasterize_line(weights: &[f64], theta_deg: f64, drop_rel: f64) -> SparseKernel {
    let n = weights.len();
    if n == 0 {
        return SparseKernel::default();
    }
    let c = (n / 2) as f64;
    let (cs, sn) = direction(theta_deg);
    let x_major = cs.abs() >= sn.abs();
    let (major_step, slope) = if x_major { (cs, sn / cs) } else { (sn, cs / sn) };

    let reach = n / 2 + 2;
    let side = 2 * reach + 1;
    let mut grid = vec![0.0f64; side * side];
    let mut touched = vec![false; side * side];
    let mut deposit = |major: i32, minor: i32, w: f64| {
        let (dx, dy) = if x_major { (major, minor) } else { (minor, major) };
        let idx = (dy + reach as i32) as usize * side + (dx + reach as i32) as usize;
        grid[idx] += w;
        touched[idx] = true;
    };
    let spread_minor = |major: i32, w: f64, deposit: &mut dyn FnMut(i32, i32, f64)| {
        let (m0, g) = split(major as f64 * slope);
        deposit(major, m0, w * (1.0 - g));
        if g > 0.0 {
            deposit(major, m0 + 1, w * g);
        }
    };
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (u0, f) = split((k as f64 - c) * major_step);
        spread_minor(u0, w * (1.0 - f), &mut deposit);
        if f > 0.0 {
            spread_minor(u0 + 1, w * f, &mut deposit);
        }
    }

    let max_abs = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = drop_rel * max_abs;
    let mut taps = Vec::new();
    for dy in 0..side {
        for dx in 0..side {
            let idx = dy * side + dx;
            let w = grid[idx];
            if touched[idx] && w != 0.0 && w.abs() >= cutoff {
                taps.push(Tap {
                    dx: dx as i32 - reach as i32,
                    dy: dy as i32 - reach as i32,
                    weight: w,
                });
            }
        }
    }
    fold_residual(&mut taps, weights.iter().sum());
    SparseKernel { taps }
}

/// Adds `target − Σw` to the largest-magnitude tap.
fn fold_residual(taps: &mut [Tap], target: f64) {
    if taps.is_empty() {
        return;
    }
    let sum: f64 = taps.iter().map(|t| t.weight).sum();
    let peak = taps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.weight.abs().total_cmp(&b.1.weight.abs()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    taps[peak].weight += target - sum;
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseKernel {
    pub kernel: SparseKernel,
    pub theta_deg: f64,
    pub r: usize,
    pub gamma: f64,
}

/// Rasterizes a 1D inverse kernel at `theta_deg`, keeping only nonzeros.
pub fn rasterize_kernel_2d(weights: &[f64], theta_deg: f64) -> SparseKernel {
    rasterize_line(weights, theta_deg, DROP_REL)
}

/// Single-precision weights for the bank file, with the rounding residual
/// folded into the largest tap so the stored sum stays on `target`.
fn stored_weights(taps: &[Tap], target: f64) -> Vec<f32> {
    let mut out: Vec<f32> = taps.iter().map(|t| t.weight as f32).collect();
    if let Some(peak) = (0..out.len()).max_by(|&a, &b| out[a].abs().total_cmp(&out[b].abs()).then(b.cmp(&a))) {
        let sum: f64 = out.iter().map(|&v| v as f64).sum();
        out[peak] = (out[peak] as f64 + (target - sum)) as f32;
    }
    out
}

/// Offline table of inverse kernels over `theta = 0..179`, `r = 2..=r_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBank {
    r_max: usize,
    gamma: f64,
    kernels: Vec<InverseKernel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BankIndex {
    pub theta: usize,
    pub r: usize,
    pub clamped: bool,
}

impl KernelBank {
    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernels(&self) -> &[InverseKernel] {
        &self.kernels
    }

    pub fn max_elements(&self) -> usize {
        self.kernels.iter().map(|k| k.kernel.len()).max().unwrap_or(0)
    }

    /// Rounds a blur vector onto the bank grid. `None` when the rounded extent
    /// is below the smallest kernel.
    pub fn index(&self, theta_deg: f64, r: f64) -> Option<BankIndex> {
        let ri = r.round();
        if !(ri >= MIN_EXTENT as f64) {
            return None;
        }
        let theta = (theta_deg.round() as i64).rem_euclid(THETA_STEPS as i64) as usize;
        let clamped = ri > self.r_max as f64;
        let r = if clamped { self.r_max } else { ri as usize };
        Some(BankIndex { theta, r, clamped })
    }

    pub fn get(&self, idx: BankIndex) -> &InverseKernel {
        &self.kernels[idx.theta * (self.r_max - 1) + (idx.r - MIN_EXTENT)]
    }

    pub fn lookup(&self, theta_deg: f64, r: f64) -> Option<(&InverseKernel, bool)> {
        self.index(theta_deg, r).map(|i| (self.get(i), i.clamped))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BANK_MAGIC)?;
        w.write_all(&(self.r_max as u32).to_le_bytes())?;
        w.write_all(&self.gamma.to_le_bytes())?;
        let target = 1.0 / (1.0 + self.gamma);
        for k in &self.kernels {
            let taps = &k.kernel.taps;
            let stored = stored_weights(taps, target);
            w.write_all(&(taps.len() as u32).to_le_bytes())?;
            for (t, weight) in taps.iter().zip(stored) {
                let dx = i16::try_from(t.dx).map_err(|_| Error::BankFormat("offset exceeds int16".into()))?;
                let dy = i16::try_from(t.dy).map_err(|_| Error::BankFormat("offset exceeds int16".into()))?;
                w.write_all(&dx.to_le_bytes())?;
                w.write_all(&dy.to_le_bytes())?;
                w.write_all(&weight.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Parses a bank blob and checks every kernel's DC gain.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(5)? != BANK_MAGIC {
            return Err(Error::BankFormat("bad magic".into()));
        }
        let r_max = u32::from_le_bytes(cur.array()?) as usize;
        let gamma = f64::from_le_bytes(cur.array()?);
        if r_max < MIN_EXTENT || r_max > i16::MAX as usize / 2 {
            return Err(Error::BankFormat(format!("r_max {r_max} out of range")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::BankFormat(format!("gamma {gamma} invalid")));
        }
        let dc = 1.0 / (1.0 + gamma);
        let mut kernels = Vec::with_capacity(THETA_STEPS * (r_max - 1));
        for theta in 0..THETA_STEPS {
            for r in MIN_EXTENT..=r_max {
                let count = u32::from_le_bytes(cur.array()?) as usize;
                if count > 2 * (4 * r + 1) {
                    return Err(Error::BankFormat(format!("kernel ({theta}, {r}) has {count} elements")));
                }
                let mut taps = Vec::with_capacity(count);
                for _ in 0..count {
                    let dx = i16::from_le_bytes(cur.array()?) as i32;
                    let dy = i16::from_le_bytes(cur.array()?) as i32;
                    let weight = f32::from_le_bytes(cur.array()?);
                    if !weight.is_finite() {
                        return Err(Error::BankFormat(format!("kernel ({theta}, {r}) has a non-finite weight")));
                    }
                    taps.push(Tap { dx, dy, weight: weight as f64 });
                }
                let kernel = SparseKernel { taps };
                let sum = kernel.weight_sum();
                if (sum - dc).abs() > 1e-6 {
                    return Err(Error::BankFormat(format!(
                        "kernel ({theta}, {r}) DC gain {sum} != {dc}"
                    )));
                }
                kernels.push(InverseKernel {
                    kernel,
                    theta_deg: theta as f64,
                    r,
                    gamma,
                });
            }
        }
        if cur.pos != bytes.len() {
            return Err(Error::BankFormat(format!("{} trailing bytes", bytes.len() - cur.pos)));
        }
        Ok(Self { r_max, gamma, kernels })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(Error::file(path))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(Error::file(path))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::BankFormat(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

/// Builds all `180 × (r_max − 1)` kernels. Output is bit-identical across runs
/// and thread counts.
pub fn build_bank(r_max: usize, gamma: f64) -> Result<KernelBank> {
    if r_max < MIN_EXTENT {
        return Err(Error::ExtentOutOfRange {
            r: r_max,
            min: MIN_EXTENT,
            max: usize::MAX,
        });
    }
    let inverses = (MIN_EXTENT..=r_max)
        .into_par_iter()
        .map(|r| wiener_inverse_1d(&build_psf_1d(r, r_max)?, gamma))
        .collect::<Result<Vec<_>>>()?;
    let kernels = (0..THETA_STEPS * (r_max - 1))
        .into_par_iter()
        .map(|i| {
            let theta = i / (r_max - 1);
            let r = i % (r_max - 1) + MIN_EXTENT;
            InverseKernel {
                kernel: rasterize_kernel_2d(&inverses[r - MIN_EXTENT], theta as f64),
                theta_deg: theta as f64,
                r,
                gamma,
            }
        })
        .collect();
    Ok(KernelBank { r_max, gamma, kernels })
}

#[derive(Clone, Debug)]
pub struct DeblurOutput {
    pub image: Image,
    pub deblurred_cells: usize,
    pub passthrough_cells: usize,
    /// Cells whose extent exceeded the bank and were deblurred with `r_max`.
    pub clamped_cells: usize,
}

/// Deconvolves every valid cell of `field` with its bank kernel.
///
/// Each output pixel in a valid block reads from the whole source image
/// (edge-replicated outside it); invalid blocks are copied through. Blocks
/// write disjoint regions, so the result does not depend on thread count.
pub fn deblur_image(img: &Image, field: &BlurField, bank: &KernelBank) -> Result<DeblurOutput> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    if field.image_dims() != img.dims() {
        return Err(Error::DimensionMismatch {
            expected: field.image_dims(),
            got: img.dims(),
        });
    }
    let choices: Vec<Option<BankIndex>> = field
        .cells()
        .iter()
        .map(|c| if c.valid { bank.index(c.blur.theta_deg, c.blur.extent_px) } else { None })
        .collect();
    let pad = choices
        .iter()
        .flatten()
        .map(|&i| bank.get(i).kernel.reach())
        .max()
        .unwrap_or(0);
    let deblurred_cells = choices.iter().filter(|c| c.is_some()).count();
    let clamped_cells = choices.iter().flatten().filter(|c| c.clamped).count();
    if clamped_cells > 0 {
        log::warn!("{clamped_cells} cells exceed r_max = {} and were clamped", bank.r_max());
    }

    let padded = if deblurred_cells > 0 { Some(PaddedImage::new(img, pad)) } else { None };
    let (width, _) = img.dims();
    let strip = width * field.block_h();
    let mut data = img.data().to_vec();
    data.par_chunks_mut(strip).enumerate().for_each(|(grid_row, rows)| {
        let mut scratch = Vec::new();
        for grid_col in 0..field.grid_cols() {
            let Some(idx) = choices[grid_row * field.grid_cols() + grid_col] else {
                continue;
            };
            let padded = padded.as_ref().unwrap();
            let (x0, y0, w, h) = field.block_rect(grid_col, grid_row);
            scratch.resize(w * h, 0.0);
            padded.correlate_rect(&bank.get(idx).kernel, x0, y0, w, h, &mut scratch);
            for (j, src) in scratch.chunks_exact(w).enumerate() {
                let dst = &mut rows[j * width + x0..j * width + x0 + w];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = s.clamp(0.0, 1.0);
                }
            }
        }
    });
    Ok(DeblurOutput {
        image: Image::from_vec(img.width(), img.height(), data)?,
        deblurred_cells,
        passthrough_cells: field.cells().len() - deblurred_cells,
        clamped_cells,
    })
}
