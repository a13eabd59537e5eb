//! Grayscale image container and the image-level utilities shared by the
//! pipeline and its tests: PGM/PPM I/O, sparse-kernel correlation, synthetic
//! blur and noise, PSNR, a frequency-domain Wiener reference, and procedural
//! test images.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::deconv::{rasterize_line, Psf1D};
use crate::error::{Error, Result};

/// Single-channel image with intensities normalized to `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "image data length {} != {width}x{height}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data"));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Edge-replicated read.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Bilinear sample with edge replication; pixel centers at integer coordinates.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f32 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = (x - x0) as f32;
        let fy = (y - y0) as f32;
        let (xi, yi) = (x0 as isize, y0 as isize);
        let a = self.get_clamped(xi, yi);
        let b = self.get_clamped(xi + 1, yi);
        let c = self.get_clamped(xi, yi + 1);
        let d = self.get_clamped(xi + 1, yi + 1);
        (a * (1.0 - fx) + b * fx) * (1.0 - fy) + (c * (1.0 - fx) + d * fx) * fy
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y))
    }

    pub fn clamp01(mut self) -> Self {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len().max(1) as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let var = self.data.iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / self.data.len().max(1) as f64;
        var.sqrt()
    }
}

// ---------------------------------------------------------------------------
// PGM / PPM
// ---------------------------------------------------------------------------

fn read_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::ImageFormat("truncated header".into()));
            }
            break;
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut line = Vec::new();
            r.read_until(b'\n', &mut line)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(c);
    }
    String::from_utf8(tok).map_err(|_| Error::ImageFormat("non-ASCII header".into()))
}

fn read_dim<R: BufRead>(r: &mut R, what: &str) -> Result<usize> {
    let tok = read_token(r)?;
    tok.parse::<usize>()
        .map_err(|_| Error::ImageFormat(format!("bad {what} `{tok}`")))
}

/// Decodes binary PGM (P5) or PPM (P6, converted to luma), 8-bit only.
pub fn decode_pnm<R: Read>(reader: R) -> Result<Image> {
    let mut r = BufReader::new(reader);
    let magic = read_token(&mut r)?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(Error::ImageFormat(format!("unsupported magic `{other}`"))),
    };
    let width = read_dim(&mut r, "width")?;
    let height = read_dim(&mut r, "height")?;
    let maxval = read_dim(&mut r, "maxval")?;
    if maxval != 255 {
        return Err(Error::ImageFormat(format!("unsupported maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::ImageFormat("zero image dimension".into()));
    }
    let mut raw = vec![0u8; width * height * channels];
    r.read_exact(&mut raw)
        .map_err(|_| Error::ImageFormat("truncated payload".into()))?;
    let data = if channels == 1 {
        raw.iter().map(|&v| v as f32 / 255.0).collect()
    } else {
        raw.chunks_exact(3)
            .map(|p| (0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32) / 255.0)
            .collect()
    };
    Ok(Image { width, height, data })
}

/// Encodes as binary PGM with round-to-nearest 8-bit quantization.
pub fn encode_pgm<W: Write>(img: &Image, mut w: W) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    let bytes: Vec<u8> = img.data.iter().map(|&v| quantize(v)).collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

#[inline]
pub fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(Error::file(path))?;
    decode_pnm(f)
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(Error::file(path))?;
    encode_pgm(img, std::io::BufWriter::new(f))
}

// ---------------------------------------------------------------------------
// Sparse correlation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub dx: i32,
    pub dy: i32,
    pub weight: f64,
}

/// Nonzero kernel elements, applied as a correlation: `out(p) = Σ w · in(p + d)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseKernel {
    pub taps: Vec<Tap>,
}

impl SparseKernel {
    pub fn identity() -> Self {
        Self {
            taps: vec![Tap { dx: 0, dy: 0, weight: 1.0 }],
        }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.taps.iter().map(|t| t.weight).sum()
    }

    /// Largest |dx| or |dy| over all taps.
    pub fn reach(&self) -> usize {
        self.taps
            .iter()
            .map(|t| t.dx.unsigned_abs().max(t.dy.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Edge-replicated copy of an image with a uniform border, so kernel reads
/// never need bounds checks.
pub struct PaddedImage {
    pad: usize,
    stride: usize,
    data: Vec<f32>,
}

impl PaddedImage {
    pub fn new(img: &Image, pad: usize) -> Self {
        let stride = img.width + 2 * pad;
        let rows = img.height + 2 * pad;
        let mut data = vec![0.0f32; stride * rows];
        data.par_chunks_mut(stride).enumerate().for_each(|(py, row)| {
            let sy = (py as isize - pad as isize).clamp(0, img.height as isize - 1) as usize;
            let src = img.row(sy);
            let left = src[0];
            let right = src[img.width - 1];
            row[..pad].fill(left);
            row[pad..pad + img.width].copy_from_slice(src);
            row[pad + img.width..].fill(right);
        });
        Self { pad, stride, data }
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    /// Correlates the rectangle `[x0, x0+w) × [y0, y0+h)` of the original image
    /// with `kernel`, writing `w × h` values row-major into `out`.
    pub fn correlate_rect(&self, kernel: &SparseKernel, x0: usize, y0: usize, w: usize, h: usize, out: &mut [f32]) {
        debug_assert!(kernel.reach() <= self.pad);
        debug_assert_eq!(out.len(), w * h);
        for row in 0..h {
            let acc = &mut out[row * w..(row + 1) * w];
            acc.fill(0.0);
            let base_y = (y0 + row + self.pad) as isize;
            let base_x = (x0 + self.pad) as isize;
            for tap in &kernel.taps {
                let start = (base_y + tap.dy as isize) as usize * self.stride + (base_x + tap.dx as isize) as usize;
                let src = &self.data[start..start + w];
                let wgt = tap.weight as f32;
                for (a, &s) in acc.iter_mut().zip(src) {
                    *a += wgt * s;
                }
            }
        }
    }
}

/// Correlates the whole image with one kernel, edge-replicated borders.
pub fn correlate(img: &Image, kernel: &SparseKernel) -> Image {
    let padded = PaddedImage::new(img, kernel.reach());
    let w = img.width;
    let mut data = vec![0.0f32; w * img.height];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        padded.correlate_rect(kernel, 0, y, w, 1, row);
    });
    Image {
        width: w,
        height: img.height,
        data,
    }
}

/// Linear box PSF of integer extent `r`, rasterized at `theta_deg` with the
/// same line rasterizer the kernel bank uses.
pub fn forward_psf(theta_deg: f64, r: usize) -> Result<SparseKernel> {
    let psf = Psf1D::boxcar(r)?;
    Ok(rasterize_line(psf.taps(), theta_deg, 0.0))
}

/// Blurs with a centered linear box PSF, then adds zero-mean Gaussian noise at
/// `snr_db` relative to the blurred image's mean-square power, and clamps.
///
/// Noise is drawn from a ChaCha stream keyed on `(seed, row)`, so the output is
/// identical regardless of how rows are scheduled across threads.
pub fn synth_blur(img: &Image, theta_deg: f64, r: usize, seed: u64, snr_db: Option<f64>) -> Result<Image> {
    if r < 1 {
        return Err(Error::ExtentOutOfRange { r, min: 1, max: usize::MAX });
    }
    if !theta_deg.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    let kernel = forward_psf(theta_deg, r)?;
    let mut out = correlate(img, &kernel);
    if let Some(snr) = snr_db {
        if !snr.is_finite() {
            return Err(Error::NonFinite("snr_db"));
        }
        let power = out.data.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>() / out.data.len() as f64;
        let sigma = (power / 10f64.powf(snr / 10.0)).sqrt();
        let w = out.width;
        out.data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(y as u64);
            for v in row.iter_mut() {
                let n: f64 = rng.sample(StandardNormal);
                *v = (*v as f64 + sigma * n) as f32;
            }
        });
    }
    Ok(out.clamp01())
}

/// Peak signal-to-noise ratio for unit peak; `+∞` for identical images.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    let mse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.data.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

// ---------------------------------------------------------------------------
// Frequency-domain Wiener reference
// ---------------------------------------------------------------------------

fn fft2(buf: &mut [Complex<f64>], w: usize, h: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
    } else {
        (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
    };
    buf.par_chunks_mut(w).for_each(|row| row_fft.process(row));
    let mut cols: Vec<Complex<f64>> = vec![Complex::default(); w * h];
    for y in 0..h {
        for x in 0..w {
            cols[x * h + y] = buf[y * w + x];
        }
    }
    cols.par_chunks_mut(h).for_each(|col| col_fft.process(col));
    for x in 0..w {
        for y in 0..h {
            buf[y * w + x] = cols[x * h + y];
        }
    }
}

/// Whole-image Wiener deconvolution through the 2D DFT, using the same
/// rasterized linear PSF as [`synth_blur`]. Circular boundary handling is
/// inherent, so the result carries wrap-around artifacts near the borders.
pub fn frequency_wiener_reference(img: &Image, theta_deg: f64, r: usize, gamma: f64) -> Result<Image> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let (w, h) = img.dims();
    let kernel = forward_psf(theta_deg, r)?;
    let mut psf = vec![Complex::<f64>::default(); w * h];
    for t in &kernel.taps {
        let x = (t.dx as isize).rem_euclid(w as isize) as usize;
        let y = (t.dy as isize).rem_euclid(h as isize) as usize;
        psf[y * w + x] += Complex::new(t.weight, 0.0);
    }
    fft2(&mut psf, w, h, false);
    let mut spec: Vec<Complex<f64>> = img.data.iter().map(|&v| Complex::new(v as f64, 0.0)).collect();
    fft2(&mut spec, w, h, false);
    // Correlation with h has transfer conj(H); its Wiener inverse is H / (|H|² + γ).
    for (s, hk) in spec.iter_mut().zip(&psf) {
        *s *= hk / (hk.norm_sqr() + gamma);
    }
    fft2(&mut spec, w, h, true);
    let scale = 1.0 / (w * h) as f64;
    let data = spec.iter().map(|c| (c.re * scale) as f32).collect();
    Ok(Image { width: w, height: h, data })
}

// ---------------------------------------------------------------------------
// Geometry and procedural images
// ---------------------------------------------------------------------------

/// Resamples `img` so that output pixel `p` takes the source value at `H⁻¹ p`.
pub fn warp_homography(img: &Image, h: &Matrix3<f64>, out_w: usize, out_h: usize) -> Result<Image> {
    let inv = h.try_inverse().ok_or(Error::SingularHomography)?;
    let mut data = vec![0.0f32; out_w * out_h];
    data.par_chunks_mut(out_w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let p = inv * Vector3::new(x as f64, y as f64, 1.0);
            *v = img.sample_bilinear(p.x / p.z, p.y / p.z);
        }
    });
    Ok(Image {
        width: out_w,
        height: out_h,
        data,
    })
}

pub fn checkerboard(width: usize, height: usize, square: usize) -> Image {
    Image::from_fn(width, height, |x, y| if (x / square + y / square) % 2 == 0 { 0.0 } else { 1.0 })
}

/// Dead-leaves test image: occluding disks and rotated rectangles with
/// power-law sizes and antialiased edges. Its statistics approximate natural
/// images (scale invariance, sharp occlusion edges, corners at junctions).
pub fn dead_leaves(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = Image::filled(width, height, 0.5);
    let r_min = 3.0f64;
    let r_max = (width.min(height) as f64 / 5.0).max(r_min + 1.0);
    let count = (width * height) / 250;
    for _ in 0..count {
        // Inverse-CDF sample of p(r) ∝ r⁻³ on [r_min, r_max].
        let u: f64 = rng.random();
        let a = r_min.powi(-2);
        let b = r_max.powi(-2);
        let radius = (a - u * (a - b)).powf(-0.5);
        let cx = rng.random_range(-radius..width as f64 + radius);
        let cy = rng.random_range(-radius..height as f64 + radius);
        let value = rng.random_range(0.05f32..0.95);
        let rect = rng.random_bool(0.5);
        let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let aspect: f64 = rng.random_range(0.4..1.0);
        let (s, c) = angle.sin_cos();
        let x_lo = ((cx - radius - 1.0).floor().max(0.0)) as usize;
        let x_hi = ((cx + radius + 1.0).ceil().min(width as f64 - 1.0)).max(0.0) as usize;
        let y_lo = ((cy - radius - 1.0).floor().max(0.0)) as usize;
        let y_hi = ((cy + radius + 1.0).ceil().min(height as f64 - 1.0)).max(0.0) as usize;
        if x_lo > x_hi || y_lo > y_hi {
            continue;
        }
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                // Signed distance inside the shape, in pixels.
                let inside = if rect {
                    let u = (dx * c + dy * s).abs();
                    let v = (-dx * s + dy * c).abs();
                    (radius - u).min(radius * aspect - v)
                } else {
                    radius - (dx * dx + dy * dy).sqrt()
                };
                let cover = (inside + 0.5).clamp(0.0, 1.0) as f32;
                if cover > 0.0 {
                    let p = img.get(x, y);
                    img.set(x, y, p * (1.0 - cover) + value * cover);
                }
            }
        }
    }
    img
}
