//! Detector-agnostic evaluation: repeatability and localization error under a
//! circle-overlap criterion, robust homography estimation, burst track
//! interpolation, and a small Harris detector so the harness can run without
//! an external feature detector.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;

pub const DEFAULT_OVERLAP: f64 = 0.4;
pub const DEFAULT_COUNT: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Detection radius in pixels.
    pub scale: f64,
    pub response: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, scale: f64, response: f64) -> Self {
        Self { x, y, scale, response }
    }
}

/// Sorts by descending response (ties by `(y, x)`) and keeps the first `count`.
pub fn truncate_by_response(kps: &mut Vec<Keypoint>, count: usize) {
    kps.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    kps.truncate(count);
}

/// 3×3 plane mapping, stored with `h[2][2] = 1` whenever that entry is nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("homography"));
        }
        let m = if m[(2, 2)].abs() > 1e-15 {
            m / m[(2, 2)]
        } else {
            m / m.norm()
        };
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-12 * m.norm().powi(3) {
            return Err(Error::SingularHomography);
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        // Non-singularity is checked on construction.
        Self::new(self.0.try_inverse().expect("homography is invertible")).expect("inverse of a valid homography")
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let v = self.0 * Vector3::new(x, y, 1.0);
        (v.x / v.z, v.y / v.z)
    }

    /// `√|det J|` of the mapping at `(x, y)`; how much a small circle grows.
    pub fn local_scale(&self, x: f64, y: f64) -> f64 {
        let w = self.0[(2, 0)] * x + self.0[(2, 1)] * y + self.0[(2, 2)];
        (self.0.determinant() / (w * w * w)).abs().sqrt()
    }

    pub fn project_keypoint(&self, kp: &Keypoint) -> Keypoint {
        let (x, y) = self.apply(kp.x, kp.y);
        Keypoint {
            x,
            y,
            scale: kp.scale * self.local_scale(kp.x, kp.y),
            response: kp.response,
        }
    }

    /// Nine whitespace-separated numbers, row-major.
    pub fn parse(text: &str) -> Result<Self> {
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad homography entry `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != 9 {
            return Err(Error::InvalidArgument(format!("homography needs 9 numbers, got {}", vals.len())));
        }
        Self::new(Matrix3::from_row_slice(&vals))
    }

    pub fn to_text(&self) -> String {
        let m = &self.0;
        (0..3)
            .map(|r| format!("{:.17e} {:.17e} {:.17e}", m[(r, 0)], m[(r, 1)], m[(r, 2)]))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }
}

/// Intersection-over-union of two discs.
pub fn circle_iou(x1: f64, y1: f64, r1: f64, x2: f64, y2: f64, r2: f64) -> f64 {
    use std::f64::consts::PI;
    let d = (x2 - x1).hypot(y2 - y1);
    let a1 = PI * r1 * r1;
    let a2 = PI * r2 * r2;
    let inter = if d >= r1 + r2 {
        return 0.0;
    } else if d <= (r1 - r2).abs() {
        PI * r1.min(r2).powi(2)
    } else {
        let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
        let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
        let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
        r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - 0.5 * k.sqrt()
    };
    inter / (a1 + a2 - inter)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub a: usize,
    pub b: usize,
    pub overlap: f64,
}

/// Greedy best-overlap one-to-one matching of `ka` (projected into B by `h`)
/// against `kb`, keeping pairs with IoU ≥ `overlap_min`.
pub fn match_keypoints(ka: &[Keypoint], kb: &[Keypoint], h: &Homography, overlap_min: f64) -> Result<Vec<Match>> {
    if ka.is_empty() || kb.is_empty() {
        return Err(Error::EmptyKeypoints);
    }
    if !(overlap_min > 0.0 && overlap_min < 1.0) {
        return Err(Error::InvalidArgument(format!("overlap must be in (0, 1), got {overlap_min}")));
    }
    let projected: Vec<Keypoint> = ka.iter().map(|k| h.project_keypoint(k)).collect();
    let mut candidates: Vec<Match> = projected
        .par_iter()
        .enumerate()
        .flat_map_iter(|(a, pa)| {
            kb.iter().enumerate().filter_map(move |(b, pb)| {
                let iou = circle_iou(pa.x, pa.y, pa.scale, pb.x, pb.y, pb.scale);
                (iou >= overlap_min).then_some(Match { a, b, overlap: iou })
            })
        })
        .collect();
    candidates.sort_by(|p, q| q.overlap.total_cmp(&p.overlap).then(p.a.cmp(&q.a)).then(p.b.cmp(&q.b)));
    let mut used_a = vec![false; ka.len()];
    let mut used_b = vec![false; kb.len()];
    let mut out = Vec::new();
    for m in candidates {
        if !used_a[m.a] && !used_b[m.b] {
            used_a[m.a] = true;
            used_b[m.b] = true;
            out.push(m);
        }
    }
    Ok(out)
}

pub fn repeatability(ka: &[Keypoint], kb: &[Keypoint], h: &Homography, overlap_min: f64) -> Result<f64> {
    let matches = match_keypoints(ka, kb, h, overlap_min)?;
    Ok(matches.len() as f64 / ka.len().min(kb.len()) as f64)
}

/// Mean distance in A's frame between matched pairs, B reprojected through
/// `h⁻¹`. `None` when nothing matches.
pub fn localization_error(ka: &[Keypoint], kb: &[Keypoint], h: &Homography, overlap_min: f64) -> Result<Option<f64>> {
    let matches = match_keypoints(ka, kb, h, overlap_min)?;
    Ok(mean_match_distance(ka, kb, h, &matches))
}

fn mean_match_distance(ka: &[Keypoint], kb: &[Keypoint], h: &Homography, matches: &[Match]) -> Option<f64> {
    if matches.is_empty() {
        return None;
    }
    let inv = h.inverse();
    let total: f64 = matches
        .iter()
        .map(|m| {
            let (x, y) = inv.apply(kb[m.b].x, kb[m.b].y);
            (x - ka[m.a].x).hypot(y - ka[m.a].y)
        })
        .sum();
    Some(total / matches.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairScore {
    pub repeatability: f64,
    pub localization_error: Option<f64>,
    pub matches: usize,
    pub count: usize,
}

/// Truncates both lists to `count` by response and scores them.
pub fn score_pair(mut ka: Vec<Keypoint>, mut kb: Vec<Keypoint>, h: &Homography, count: usize, overlap_min: f64) -> Result<PairScore> {
    truncate_by_response(&mut ka, count);
    truncate_by_response(&mut kb, count);
    let matches = match_keypoints(&ka, &kb, h, overlap_min)?;
    Ok(PairScore {
        repeatability: matches.len() as f64 / ka.len().min(kb.len()) as f64,
        localization_error: mean_match_distance(&ka, &kb, h, &matches),
        matches: matches.len(),
        count: ka.len().min(kb.len()),
    })
}

// ---------------------------------------------------------------------------
// Homography estimation
// ---------------------------------------------------------------------------

pub type Point = [f64; 2];

/// Similarity moving the centroid to the origin with mean distance √2.
fn hartley(points: &[Point]) -> Option<Matrix3<f64>> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean = points.iter().map(|p| (p[0] - cx).hypot(p[1] - cy)).sum::<f64>() / n;
    if !(mean > 0.0) || !mean.is_finite() {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

/// Normalized DLT over all correspondences (least squares for more than 4).
pub fn dlt_homography(src: &[Point], dst: &[Point]) -> Option<Matrix3<f64>> {
    let n = src.len();
    if n < 4 || dst.len() != n {
        return None;
    }
    let ts = hartley(src)?;
    let td = hartley(dst)?;
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for i in 0..n {
        let s = ts * Vector3::new(src[i][0], src[i][1], 1.0);
        let d = td * Vector3::new(dst[i][0], dst[i][1], 1.0);
        let (x, y) = (s.x, s.y);
        let (u, v) = (d.x, d.y);
        let r = 2 * i;
        a[(r, 3)] = -x;
        a[(r, 4)] = -y;
        a[(r, 5)] = -1.0;
        a[(r, 6)] = v * x;
        a[(r, 7)] = v * y;
        a[(r, 8)] = v;
        a[(r + 1, 0)] = x;
        a[(r + 1, 1)] = y;
        a[(r + 1, 2)] = 1.0;
        a[(r + 1, 6)] = -u * x;
        a[(r + 1, 7)] = -u * y;
        a[(r + 1, 8)] = -u;
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let (min_idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))?;
    let h = vt.row(min_idx);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let m = td.try_inverse()? * hn * ts;
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(if m[(2, 2)].abs() > 1e-15 { m / m[(2, 2)] } else { m / m.norm() })
}

fn collinear(a: Point, b: Point, c: Point) -> bool {
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let (vx, vy) = (c[0] - a[0], c[1] - a[1]);
    let cross = (ux * vy - uy * vx).abs();
    cross <= 1e-9 * ux.hypot(uy) * vx.hypot(vy) + f64::MIN_POSITIVE
}

fn degenerate_sample(pts: &[Point; 4]) -> bool {
    (0..4).any(|skip| {
        let t: Vec<Point> = (0..4).filter(|&i| i != skip).map(|i| pts[i]).collect();
        collinear(t[0], t[1], t[2])
    })
}

/// Squared forward plus squared backward transfer distance.
fn symmetric_transfer_sq(h: &Matrix3<f64>, h_inv: &Matrix3<f64>, s: Point, d: Point) -> f64 {
    let f = h * Vector3::new(s[0], s[1], 1.0);
    let b = h_inv * Vector3::new(d[0], d[1], 1.0);
    let df = (f.x / f.z - d[0]).powi(2) + (f.y / f.z - d[1]).powi(2);
    let db = (b.x / b.z - s[0]).powi(2) + (b.y / b.z - s[1]).powi(2);
    let e = df + db;
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RansacConfig {
    /// Inlier bound on the symmetric transfer error, in pixels.
    pub inlier_px: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            inlier_px: 2.0,
            iterations: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RansacResult {
    pub homography: Homography,
    pub inliers: Vec<bool>,
}

impl RansacResult {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|v| **v).count()
    }
}

fn inlier_mask(h: &Matrix3<f64>, src: &[Point], dst: &[Point], thresh_sq: f64) -> Option<Vec<bool>> {
    let h_inv = h.try_inverse()?;
    Some(
        src.iter()
            .zip(dst)
            .map(|(s, d)| symmetric_transfer_sq(h, &h_inv, *s, *d) < thresh_sq)
            .collect(),
    )
}

/// 4-point RANSAC with normalized DLT, then a least-squares refit on the
/// inliers. Samples are drawn up front from a seeded stream and scored in
/// parallel; the winner is the highest inlier count, earliest sample on ties.
pub fn estimate_homography_ransac(src: &[Point], dst: &[Point], cfg: &RansacConfig) -> Result<RansacResult> {
    let n = src.len();
    if n != dst.len() {
        return Err(Error::InvalidArgument(format!("{} source vs {} destination points", n, dst.len())));
    }
    if n < 4 {
        return Err(Error::TooFewCorrespondences { needed: 4, got: n });
    }
    if !(cfg.inlier_px > 0.0) {
        return Err(Error::InvalidArgument("inlier threshold must be positive".into()));
    }
    let thresh_sq = cfg.inlier_px * cfg.inlier_px;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<[usize; 4]> = (0..cfg.iterations.max(1))
        .map(|_| {
            let idx = sample(&mut rng, n, 4);
            [idx.index(0), idx.index(1), idx.index(2), idx.index(3)]
        })
        .collect();

    let best = samples
        .par_iter()
        .enumerate()
        .filter_map(|(it, s)| {
            let ps = s.map(|i| src[i]);
            let pd = s.map(|i| dst[i]);
            if degenerate_sample(&ps) || degenerate_sample(&pd) {
                return None;
            }
            let h = dlt_homography(&ps, &pd)?;
            let mask = inlier_mask(&h, src, dst, thresh_sq)?;
            let count = mask.iter().filter(|v| **v).count();
            Some((count, it, mask))
        })
        .reduce_with(|a, b| if (b.0, std::cmp::Reverse(b.1)) > (a.0, std::cmp::Reverse(a.1)) { b } else { a });
    let Some((_, _, mut mask)) = best else {
        return Err(Error::Degenerate);
    };

    // Refit on the consensus set, then re-derive the consensus once.
    let mut model = None;
    for _ in 0..2 {
        let (s, d): (Vec<Point>, Vec<Point>) = src
            .iter()
            .zip(dst)
            .zip(&mask)
            .filter(|(_, m)| **m)
            .map(|((s, d), _)| (*s, *d))
            .unzip();
        let Some(h) = dlt_homography(&s, &d) else { break };
        let Some(next) = inlier_mask(&h, src, dst, thresh_sq) else { break };
        model = Some(h);
        if next.iter().filter(|v| **v).count() < 4 || next == mask {
            break;
        }
        mask = next;
    }
    let h = model.ok_or(Error::Degenerate)?;
    let inliers = inlier_mask(&h, src, dst, thresh_sq).ok_or(Error::SingularHomography)?;
    Ok(RansacResult {
        homography: Homography::new(h)?,
        inliers,
    })
}

/// Middle-frame keypoints of a three-frame burst: midpoint positions,
/// geometric-mean scale, mean response.
pub fn interpolate_tracks(first: &[Keypoint], last: &[Keypoint]) -> Result<Vec<Keypoint>> {
    if first.len() != last.len() {
        return Err(Error::InvalidArgument(format!(
            "track endpoints differ in length: {} vs {}",
            first.len(),
            last.len()
        )));
    }
    Ok(first
        .iter()
        .zip(last)
        .map(|(a, b)| Keypoint {
            x: 0.5 * (a.x + b.x),
            y: 0.5 * (a.y + b.y),
            scale: (a.scale * b.scale).sqrt(),
            response: 0.5 * (a.response + b.response),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Toy detector
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarrisConfig {
    pub k: f64,
    pub sigma: f64,
    /// Minimum corner response kept.
    pub threshold: f64,
    /// Radius assigned to every detection.
    pub scale: f64,
}

impl Default for HarrisConfig {
    fn default() -> Self {
        Self {
            k: 0.04,
            sigma: 1.5,
            threshold: 1e-6,
            scale: 4.0,
        }
    }
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

fn smooth(data: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    tmp.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * data[y * w + clampi(x as isize + k as isize - r, w)])
                .sum();
        }
    });
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[clampi(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    });
    out
}

/// Harris corner response map (structure tensor with Gaussian window).
pub fn harris_response(img: &Image, cfg: &HarrisConfig) -> Vec<f64> {
    let (w, h) = img.dims();
    let mut ixx = vec![0.0; w * h];
    let mut iyy = vec![0.0; w * h];
    let mut ixy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xi, yi) = (x as isize, y as isize);
            let gx = 0.5 * (img.get_clamped(xi + 1, yi) - img.get_clamped(xi - 1, yi)) as f64;
            let gy = 0.5 * (img.get_clamped(xi, yi + 1) - img.get_clamped(xi, yi - 1)) as f64;
            let i = y * w + x;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let taps = gaussian_taps(cfg.sigma);
    let sxx = smooth(&ixx, w, h, &taps);
    let syy = smooth(&iyy, w, h, &taps);
    let sxy = smooth(&ixy, w, h, &taps);
    (0..w * h)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let tr = sxx[i] + syy[i];
            det - cfg.k * tr * tr
        })
        .collect()
}

/// Harris corners with 3×3 non-maximum suppression and quadratic sub-pixel
/// refinement, strongest first, at most `max_count`.
pub fn detect_harris(img: &Image, cfg: &HarrisConfig, max_count: usize) -> Vec<Keypoint> {
    let (w, h) = img.dims();
    let margin = (3.0 * cfg.sigma).ceil() as usize + 2;
    if w <= 2 * margin || h <= 2 * margin {
        return Vec::new();
    }
    let resp = harris_response(img, cfg);
    let at = |x: usize, y: usize| resp[y * w + x];
    let mut kps: Vec<Keypoint> = (margin..h - margin)
        .into_par_iter()
        .flat_map_iter(|y| {
            let resp = &resp;
            (margin..w - margin).filter_map(move |x| {
                let r = resp[y * w + x];
                if !(r > cfg.threshold) {
                    return None;
                }
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let q = resp[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
                        // Plateaus resolve to the first pixel in (y, x) order.
                        let later = (dy, dx) > (0, 0);
                        if q > r || (q == r && !later) {
                            return None;
                        }
                    }
                }
                Some((x, y, r))
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(x, y, r)| {
            let offset = |m: f64, c: f64, p: f64| {
                let denom = m - 2.0 * c + p;
                if denom.abs() < 1e-300 {
                    0.0
                } else {
                    (0.5 * (m - p) / denom).clamp(-0.5, 0.5)
                }
            };
            let ox = offset(at(x - 1, y), r, at(x + 1, y));
            let oy = offset(at(x, y - 1), r, at(x, y + 1));
            Keypoint::new(x as f64 + ox, y as f64 + oy, cfg.scale, r)
        })
        .collect();
    truncate_by_response(&mut kps, max_count);
    kps
}

pub fn toy_detect(img: &Image, max_count: usize) -> Vec<Keypoint> {
    detect_harris(img, &HarrisConfig::default(), max_count)
}

// ---------------------------------------------------------------------------
// Interchange files
// ---------------------------------------------------------------------------

pub fn read_keypoints<R: Read>(reader: R) -> Result<Vec<Keypoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let kp: Keypoint = rec?;
        if !(kp.x.is_finite() && kp.y.is_finite() && kp.response.is_finite()) {
            return Err(Error::NonFinite("keypoint"));
        }
        if !(kp.scale > 0.0) || !kp.scale.is_finite() {
            return Err(Error::InvalidArgument(format!("keypoint scale must be positive, got {}", kp.scale)));
        }
        out.push(kp);
    }
    Ok(out)
}

pub fn write_keypoints<W: Write>(writer: W, kps: &[Keypoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if kps.is_empty() {
        w.write_record(["x", "y", "scale", "response"])?;
    }
    for k in kps {
        w.serialize(k)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_keypoints(path: impl AsRef<Path>) -> Result<Vec<Keypoint>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(Error::file(path))?;
    read_keypoints(std::io::BufReader::new(f))
}

pub fn save_keypoints(path: impl AsRef<Path>, kps: &[Keypoint]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(Error::file(path))?;
    write_keypoints(std::io::BufWriter::new(f), kps)
}

pub fn load_homography(path: impl AsRef<Path>) -> Result<Homography> {
    let path = path.as_ref();
    Homography::parse(&std::fs::read_to_string(path).map_err(Error::file(path))?)
}

pub fn save_homography(path: impl AsRef<Path>, h: &Homography) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, h.to_text()).map_err(Error::file(path))
}
