//! Image-based check of gyro blur estimates.
//!
//! A correct estimate leaves no strong gradients along the motion direction:
//! the box blur bounds the along-motion derivative by `1/r`. Blocks whose
//! directional gradient exceeds `tau` are marked invalid and later passed
//! through without deblurring or rectification.

use std::str::FromStr;

use rayon::prelude::*;

use crate::blurfield::BlurField;
use crate::deconv::MIN_EXTENT;
use crate::error::{Error, Result};
use crate::imaging::Image;

pub const DEFAULT_TAU: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Granularity {
    #[default]
    Block,
    Image,
    /// No gradient test; only the minimum-extent rule applies.
    Off,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(Self::Block),
            "image" => Ok(Self::Image),
            "off" => Ok(Self::Off),
            other => Err(Error::InvalidArgument(format!("unknown validation mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    /// Threshold on the normalized directional gradient of `[0, 1]` intensities.
    pub tau: f64,
    pub granularity: Granularity,
    /// Cells with a smaller extent have nothing to deblur.
    pub min_extent: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            granularity: Granularity::Block,
            min_extent: MIN_EXTENT as f64,
        }
    }
}

impl ValidationConfig {
    pub fn new(tau: f64, granularity: Granularity) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        Ok(Self {
            tau,
            granularity,
            ..Self::default()
        })
    }
}

/// 3×3 derivative kernel along `theta_deg` (image axes, y down).
///
/// Steered from the Sobel pair as `(cos θ · Sx + sin θ · Sy) / 4`. At the axis
/// angles this is the Sobel kernel with positive and negative taps summing to
/// ±1; in between, the fixed gain keeps the response a cosine of the angle to
/// the edge normal, so a unit step reads ~1 across and near 0 along.
pub fn directional_sobel(theta_deg: f64) -> [[f64; 3]; 3] {
    const SX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let (s, c) = theta_deg.to_radians().sin_cos();
    let (s, c) = (snap(s), snap(c));
    let mut k = [[0.0; 3]; 3];
    for (j, row) in k.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            // Sy is the transpose of Sx.
            *v = (c * SX[j][i] + s * SX[i][j]) / 4.0;
            if v.abs() < 1e-12 {
                *v = 0.0;
            }
        }
    }
    k
}

/// Maximum absolute directional-derivative response over the interior of the
/// rectangle `(x0, y0, w, h)` of `img` (valid region only, no padding).
pub fn directional_gradient_max_in(img: &Image, rect: (usize, usize, usize, usize), theta_deg: f64) -> Result<f64> {
    let (x0, y0, w, h) = rect;
    if w < 3 || h < 3 {
        return Err(Error::BlockTooSmall { w, h });
    }
    let k = directional_sobel(theta_deg);
    let mut best = 0.0f64;
    for y in y0 + 1..y0 + h - 1 {
        let rows = [img.row(y - 1), img.row(y), img.row(y + 1)];
        for x in x0 + 1..x0 + w - 1 {
            // The kernel is antisymmetric about its center, so pair opposite taps.
            let px = |j: usize, i: usize| rows[j][x + i - 1] as f64;
            let acc = k[0][0] * (px(0, 0) - px(2, 2))
                + k[0][1] * (px(0, 1) - px(2, 1))
                + k[0][2] * (px(0, 2) - px(2, 0))
                + k[1][0] * (px(1, 0) - px(1, 2));
            best = best.max(acc.abs());
        }
    }
    Ok(best)
}

pub fn directional_gradient_max(img: &Image, theta_deg: f64) -> Result<f64> {
    directional_gradient_max_in(img, (0, 0, img.width(), img.height()), theta_deg)
}

/// Marks cells invalid when their extent is below `min_extent` or when the
/// image still has gradients above `tau` along the cell's blur direction.
pub fn validate_field(img: &Image, field: &BlurField, cfg: &ValidationConfig) -> Result<BlurField> {
    if field.image_dims() != img.dims() {
        return Err(Error::DimensionMismatch {
            expected: field.image_dims(),
            got: img.dims(),
        });
    }
    let mut out = field.clone();
    let cols = field.grid_cols();
    let eligible: Vec<bool> = field
        .cells()
        .iter()
        .map(|c| c.valid && c.blur.extent_px >= cfg.min_extent)
        .collect();

    let verdicts: Vec<bool> = match cfg.granularity {
        Granularity::Off => eligible.clone(),
        Granularity::Block => (0..eligible.len())
            .into_par_iter()
            .map(|i| {
                if !eligible[i] {
                    return Ok(false);
                }
                let rect = field.block_rect(i % cols, i / cols);
                if rect.2 < 3 || rect.3 < 3 {
                    // Slivers at the image edge cannot be tested; trust the gyro.
                    return Ok(true);
                }
                let g = directional_gradient_max_in(img, rect, field.cells()[i].blur.theta_deg)?;
                Ok(g <= cfg.tau)
            })
            .collect::<Result<Vec<_>>>()?,
        Granularity::Image => {
            let mut thetas: Vec<f64> = field
                .cells()
                .iter()
                .zip(&eligible)
                .filter(|(_, e)| **e)
                .map(|(c, _)| c.blur.theta_deg)
                .collect();
            if thetas.is_empty() {
                eligible.clone()
            } else {
                thetas.sort_by(f64::total_cmp);
                let median = thetas[thetas.len() / 2];
                let ok = directional_gradient_max(img, median)? <= cfg.tau;
                eligible.iter().map(|&e| e && ok).collect()
            }
        }
    };
    for (cell, v) in out.cells_mut().iter_mut().zip(verdicts) {
        cell.valid = v;
    }
    Ok(out)
}
