//! Dense-CRF segmentation through the same relaxation: pairwise Gaussian
//! kernels between every pair of pixels, unary terms from rough
//! annotations, simultaneous normalized ascent and randomized rounding.
//!
//! ```text
//! max_{‖v_i‖ = 1}  Σ_{i<j} K̄(f_i, f_j) v_iᵀv_j + θ Σ_i Σ_l log p_{i,l} v_iᵀr_l
//! ```

pub mod kernel;
pub mod pnm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, sphere_point, stream_rng};
use crate::rounding::round_once;
use crate::simplex::{axpy, dot, norm, SimplexFrame};

pub use kernel::{kernel, Feature, KernelParams};
use kernel::{PairTables, LANES};
pub use pnm::{GrayImage, RgbImage};

/// Largest image handled by the exact quadratic kernel sums.
pub const DEFAULT_PIXEL_CAP: usize = 16384;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelFeatures {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[u8; 3]>,
}

impl PixelFeatures {
    pub fn from_image(img: &RgbImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            rgb: img.pixels.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.rgb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rgb.is_empty()
    }

    /// `(x, y, r, g, b)` of pixel `i`.
    pub fn feature(&self, i: usize) -> Feature {
        let c = self.rgb[i];
        [(i % self.width) as f64, (i / self.width) as f64, c[0] as f64, c[1] as f64, c[2] as f64]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnaryPrior {
    pub k: usize,
    /// Row-major `n × k` probabilities.
    pub p: Vec<f64>,
    pub theta: f64,
}

/// Unary weight used by [`build_unary`].
pub const DEFAULT_THETA: f64 = 300.0;

impl UnaryPrior {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.k..(i + 1) * self.k]
    }
}

/// Annotated pixels (label `l ∈ 1..=k`) get `confidence` on `l` and share
/// the rest evenly; unannotated pixels (`0`) are uniform. `θ` starts at
/// [`DEFAULT_THETA`].
pub fn build_unary(annotation: &[u8], k: usize, confidence: f64) -> Result<UnaryPrior> {
    if k < 2 {
        return Err(Error::ClassCount(k));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let other = (1.0 - confidence) / (k - 1) as f64;
    let mut p = Vec::with_capacity(annotation.len() * k);
    for &a in annotation {
        let a = a as usize;
        if a > k {
            return Err(Error::LabelOutOfRange { label: a, k });
        }
        if a == 0 {
            p.extend(std::iter::repeat_n(1.0 / k as f64, k));
        } else {
            p.extend((1..=k).map(|l| if l == a { confidence } else { other }));
        }
    }
    Ok(UnaryPrior { k, p, theta: DEFAULT_THETA })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    /// Working dimension; `k` when absent.
    pub d: Option<usize>,
    pub alpha: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub rounding_iters: usize,
    pub pixel_cap: usize,
    pub seed: u64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            d: None,
            alpha: 0.1,
            max_iters: 20,
            rel_tol: 1e-6,
            rounding_iters: 16,
            pixel_cap: DEFAULT_PIXEL_CAP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub width: usize,
    pub height: usize,
    /// Zero-based labels, row-major.
    pub labels: Vec<u16>,
    /// Relaxed objective after every accepted step, starting at the
    /// initialization.
    pub objective_trace: Vec<f64>,
    /// Discrete objective of the returned labelling.
    pub discrete_value: f64,
    pub iterations: usize,
    pub final_alpha: f64,
    pub converged: bool,
    pub v: Vec<f64>,
    pub d: usize,
}

impl Segmentation {
    /// Label map with one-based labels.
    pub fn label_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.labels.iter().map(|&l| (l + 1) as u8).collect(),
        }
    }
}

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [145, 30, 180],
    [70, 240, 240],
    [245, 130, 48],
    [240, 50, 230],
];

/// Half-and-half blend of the image with a per-label color.
pub fn overlay(img: &RgbImage, labels: &[u16]) -> RgbImage {
    let pixels = img
        .pixels
        .iter()
        .zip(labels)
        .map(|(px, &l)| {
            let c = PALETTE[l as usize % PALETTE.len()];
            std::array::from_fn(|t| ((px[t] as u16 + c[t] as u16) / 2) as u8)
        })
        .collect();
    RgbImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// `θ Σ_l log p_{i,l} r_l` for every pixel.
fn unary_bias(prior: &UnaryPrior, frame: &SimplexFrame) -> Result<Vec<f64>> {
    let d = frame.d();
    let n = prior.p.len() / prior.k;
    let mut b = vec![0.0; n * d];
    for i in 0..n {
        for (l, &p) in prior.row(i).iter().enumerate() {
            let lp = p.ln();
            if !lp.is_finite() {
                return Err(Error::NonFinite { what: "log prior", index: i });
            }
            axpy(prior.theta * lp, frame.vector(l), &mut b[i * d..(i + 1) * d]);
        }
    }
    Ok(b)
}

/// `P = K V` (diagonal excluded) and the pairwise energy `½ Σ v_iᵀP_i`.
fn pairwise(tables: &PairTables, rgb: &[[u8; 3]], v: &[f64], d: usize, out: &mut [f64]) -> f64 {
    tables.accumulate_dyn(rgb, v, d, out);
    0.5 * dot(v, out)
}

/// Discrete objective of each labelling, scoring 16 per kernel pass.
///
/// `Σ_{i<j} K_ij r_{x_i}ᵀr_{x_j} = (k·same - total)/(k - 1)` where `same`
/// is the kernel mass of equally labelled pairs.
fn discrete_values(tables: &PairTables, rgb: &[[u8; 3]], labellings: &[Vec<u16>], k: usize, unary: &[f64]) -> Vec<f64> {
    let n = rgb.len();
    let kf = k as f64;
    let mut out = Vec::with_capacity(labellings.len());
    for group in labellings.chunks(LANES) {
        let mut codes = vec![0u128; n];
        for (lane, x) in group.iter().enumerate() {
            for (c, &l) in codes.iter_mut().zip(x) {
                *c |= (l as u128) << (8 * lane);
            }
        }
        // unused lanes hold all-zero labellings and are ignored
        let (same, total) = tables.same_label_mass(rgb, &codes);
        for (lane, x) in group.iter().enumerate() {
            let un: f64 = x.iter().enumerate().map(|(i, &l)| unary[i * k + l as usize]).sum();
            out.push((kf * same[lane] - total) / (kf - 1.0) + un);
        }
    }
    out
}

/// Exhaustive search over label permutations up to this `k`.
const EXHAUSTIVE_RELABEL: usize = 8;

/// Renames the labels of `x` to maximize the unary term. The pairwise term
/// only sees label equality, so this never lowers the discrete objective.
fn relabel_for_unary(x: &mut [u16], unary: &[f64], k: usize) {
    // u[a][l]: unary mass of the pixels labelled a if they were called l
    let mut u = vec![0.0; k * k];
    for (i, &a) in x.iter().enumerate() {
        let a = a as usize;
        for l in 0..k {
            u[a * k + l] += unary[i * k + l];
        }
    }
    let score = |perm: &[usize]| perm.iter().enumerate().map(|(a, &l)| u[a * k + l]).sum::<f64>();
    let mut best: Vec<usize> = (0..k).collect();
    if k <= EXHAUSTIVE_RELABEL {
        let mut best_score = score(&best);
        let mut perm = best.clone();
        let mut c = vec![0usize; k];
        let mut i = 0;
        // Heap's algorithm; the identity wins ties
        while i < k {
            if c[i] < i {
                perm.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
                let s = score(&perm);
                if s > best_score {
                    best_score = s;
                    best.copy_from_slice(&perm);
                }
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
    } else {
        let mut pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..k).map(move |l| (a, l))).collect();
        pairs.sort_by(|p, q| u[q.0 * k + q.1].total_cmp(&u[p.0 * k + p.1]).then(p.cmp(q)));
        let (mut used_a, mut used_l) = (vec![false; k], vec![false; k]);
        for (a, l) in pairs {
            if !used_a[a] && !used_l[l] {
                best[a] = l;
                used_a[a] = true;
                used_l[l] = true;
            }
        }
    }
    for l in x.iter_mut() {
        *l = best[*l as usize] as u16;
    }
}

pub fn segment(features: &PixelFeatures, prior: &UnaryPrior, params: &KernelParams, cfg: &SegmentConfig) -> Result<Segmentation> {
    let n = features.len();
    if n > cfg.pixel_cap {
        return Err(Error::PixelCap { pixels: n, cap: cfg.pixel_cap });
    }
    if n == 0 || n != features.width * features.height {
        return Err(Error::Dimension(format!("{} pixels for a {}x{} image", n, features.width, features.height)));
    }
    if prior.p.len() != n * prior.k {
        return Err(Error::Dimension(format!("prior has {} entries for {n} pixels and k = {}", prior.p.len(), prior.k)));
    }
    if !(cfg.alpha > 0.0) || cfg.max_iters == 0 || cfg.rounding_iters == 0 || !(cfg.rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid segmentation settings: {cfg:?}")));
    }
    params.validate()?;
    let k = prior.k;
    if k > 255 {
        return Err(Error::ClassCount(k));
    }
    let d = cfg.d.unwrap_or(k);
    let frame = SimplexFrame::new(k, d)?;
    let bias = unary_bias(prior, &frame)?;
    let tables = PairTables::new(features.width, features.height, params);
    let rgb = &features.rgb;

    let mut rng = stream_rng(cfg.seed, 0);
    let mut v = vec![0.0; n * d];
    for vi in v.chunks_mut(d) {
        sphere_point(&mut rng, vi);
    }
    let mut p = vec![0.0; n * d];
    let mut energy = pairwise(&tables, rgb, &v, d, &mut p) + dot(&bias, &v);
    let mut trace = vec![energy];
    let mut alpha = cfg.alpha;
    let mut cand = vec![0.0; n * d];
    let mut cand_p = vec![0.0; n * d];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        for i in 0..n {
            let span = i * d..(i + 1) * d;
            let c = &mut cand[span.clone()];
            for ((c, &vi), (&pi, &bi)) in c.iter_mut().zip(&v[span.clone()]).zip(p[span.clone()].iter().zip(&bias[span.clone()])) {
                *c = vi + alpha * (pi + bi);
            }
            let nc = norm(c);
            if nc > 0.0 {
                c.iter_mut().for_each(|x| *x /= nc);
            } else {
                c.copy_from_slice(&v[span]);
            }
        }
        let cand_energy = pairwise(&tables, rgb, &cand, d, &mut cand_p) + dot(&bias, &cand);
        if cand_energy < energy {
            alpha *= 0.5;
            continue;
        }
        let change = (cand_energy - energy).abs() / energy.abs().max(1.0);
        std::mem::swap(&mut v, &mut cand);
        std::mem::swap(&mut p, &mut cand_p);
        energy = cand_energy;
        trace.push(energy);
        if change < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let round_seed = derive_seed(cfg.seed, 1);
    let mut labellings = Vec::with_capacity(cfg.rounding_iters);
    for t in 0..cfg.rounding_iters {
        let mut rng = stream_rng(round_seed, t as u64);
        labellings.push(round_once(&v, &frame, &mut rng)?.labels().to_vec());
    }
    let mut unary = vec![0.0; n * k];
    for i in 0..n {
        let bi = &bias[i * d..(i + 1) * d];
        for l in 0..k {
            unary[i * k + l] = dot(bi, frame.vector(l));
        }
    }
    let mut distinct: Vec<Vec<u16>> = Vec::new();
    for mut x in labellings {
        relabel_for_unary(&mut x, &unary, k);
        if !distinct.contains(&x) {
            distinct.push(x);
        }
    }
    let values = discrete_values(&tables, rgb, &distinct, k, &unary);
    let mut best = 0;
    for (t, &val) in values.iter().enumerate() {
        if val > values[best] {
            best = t;
        }
    }
    Ok(Segmentation {
        width: features.width,
        height: features.height,
        labels: distinct.swap_remove(best),
        objective_trace: trace,
        discrete_value: values[best],
        iterations,
        final_alpha: alpha,
        converged,
        v,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_image(w: usize, h: usize, rgb: [u8; 3]) -> PixelFeatures {
        PixelFeatures {
            width: w,
            height: h,
            rgb: vec![rgb; w * h],
        }
    }

    #[test]
    fn unary_rows() {
        let prior = build_unary(&[2, 0], 3, 0.95).unwrap();
        let r = prior.row(0);
        assert!((r[0] - 0.025).abs() < 1e-15 && (r[1] - 0.95).abs() < 1e-15 && (r[2] - 0.025).abs() < 1e-15);
        assert!(prior.row(1).iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        for i in 0..2 {
            assert!((prior.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(build_unary(&[4], 3, 0.95).is_err());
        assert!(build_unary(&[1], 3, 1.0).is_err());
    }

    #[test]
    fn pair_follows_the_confident_pixel() {
        let feats = flat_image(2, 1, [100, 100, 100]);
        let prior = build_unary(&[1, 0], 3, 0.95).unwrap();
        for seed in 0..10 {
            let cfg = SegmentConfig { seed, ..SegmentConfig::default() };
            let seg = segment(&feats, &prior, &KernelParams::default(), &cfg).unwrap();
            assert_eq!(seg.labels, vec![0, 0]);
        }
    }

    #[test]
    fn unbiased_single_pixel_is_symmetric() {
        let feats = flat_image(1, 1, [0, 0, 0]);
        let mut prior = build_unary(&[0], 3, 0.9).unwrap();
        prior.theta = 0.0;
        let mut counts = [0usize; 3];
        for seed in 0..600 {
            let cfg = SegmentConfig {
                seed,
                rounding_iters: 1,
                ..SegmentConfig::default()
            };
            let seg = segment(&feats, &prior, &KernelParams::default(), &cfg).unwrap();
            counts[seg.labels[0] as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 200.0).abs() < 4.0 * (600.0f64 * 2.0 / 9.0).sqrt(), "{counts:?}");
        }
    }

    #[test]
    fn trace_is_monotone_and_norms_hold() {
        let mut feats = flat_image(6, 5, [0, 0, 0]);
        for (i, px) in feats.rgb.iter_mut().enumerate() {
            if i % 6 >= 3 {
                *px = [200, 40, 40];
            }
        }
        let ann: Vec<u8> = (0..30).map(|i| if i == 0 { 1 } else if i == 5 { 2 } else { 0 }).collect();
        let prior = build_unary(&ann, 2, 0.95).unwrap();
        let seg = segment(&feats, &prior, &KernelParams::default(), &SegmentConfig::default()).unwrap();
        assert!(seg.objective_trace.windows(2).all(|w| w[1] >= w[0]));
        for vi in seg.v.chunks(seg.d) {
            assert!((norm(vi) - 1.0).abs() < 1e-9);
        }
        assert_eq!(seg.labels.len(), 30);
        assert!(seg.labels.iter().all(|&l| l < 2));
        assert_eq!(seg.label_image().pixels.len(), 30);
    }

    #[test]
    fn discrete_values_match_direct_sum() {
        let mut feats = flat_image(4, 3, [0, 0, 0]);
        for (i, px) in feats.rgb.iter_mut().enumerate() {
            *px = [(i * 20) as u8, 50, (255 - i * 10) as u8];
        }
        let params = KernelParams::default();
        let tables = PairTables::new(4, 3, &params);
        let x: Vec<u16> = (0..12).map(|i| (i % 3) as u16).collect();
        let unary: Vec<f64> = (0..36).map(|t| t as f64 * 0.01).collect();
        let got = discrete_values(&tables, &feats.rgb, &[x.clone()], 3, &unary)[0];
        let mut want = 0.0;
        for i in 0..12 {
            want += unary[i * 3 + x[i] as usize];
            for j in i + 1..12 {
                let ip = if x[i] == x[j] { 1.0 } else { -0.5 };
                want += kernel(&feats.feature(i), &feats.feature(j), &params) * ip;
            }
        }
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn cap_is_enforced() {
        let feats = flat_image(5, 5, [0, 0, 0]);
        let prior = build_unary(&[0; 25], 2, 0.9).unwrap();
        let cfg = SegmentConfig { pixel_cap: 24, ..SegmentConfig::default() };
        assert!(matches!(segment(&feats, &prior, &KernelParams::default(), &cfg), Err(Error::PixelCap { .. })));
    }
}
