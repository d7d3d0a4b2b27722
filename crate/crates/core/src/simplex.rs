//! Unit vectors on the vertices of a regular simplex, one per class.

use crate::error::{Error, Result};
use crate::mrf::{Configuration, MrfInstance};

/// Gram tolerance for frames built from closed-form constructions.
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// `k` unit vectors in `ℝ^d` with pairwise inner product `-1/(k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFrame {
    k: usize,
    d: usize,
    r: Vec<f64>,
}

impl SimplexFrame {
    /// Deterministic recursive construction, nonzero only in the first
    /// `k - 1` coordinates.
    ///
    /// Two classes sit at `±e_1`. For `k > 2` the first vertex is `e_1` and
    /// the remaining `k - 1` vertices are a scaled `(k-1)`-vertex frame in
    /// coordinates `2..k`, shifted by `-1/(k-1)` along `e_1`.
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::ClassCount(k));
        }
        if d + 1 < k {
            return Err(Error::InvalidParameter(format!("simplex frame for k = {k} needs d >= {}, got {d}", k - 1)));
        }
        let mut r = vec![0.0; k * d];
        fill_simplex(&mut r, d, 0, k, 0);
        Ok(Self { k, d, r })
    }

    /// Wraps explicit vectors (row `l` of `vectors` is `r_l`), checking the
    /// Gram condition to `tol`.
    pub fn from_vectors(k: usize, d: usize, vectors: Vec<f64>, tol: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::ClassCount(k));
        }
        if vectors.len() != k * d {
            return Err(Error::Dimension(format!("{} entries for {k} vectors of dimension {d}", vectors.len())));
        }
        let frame = Self { k, d, r: vectors };
        let err = frame.gram_error();
        if err > tol {
            return Err(Error::InvalidParameter(format!("vectors violate the simplex Gram condition by {err:e}")));
        }
        Ok(frame)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn vector(&self, l: usize) -> &[f64] {
        &self.r[l * self.d..(l + 1) * self.d]
    }

    pub fn vectors(&self) -> &[f64] {
        &self.r
    }

    pub fn gram(&self) -> Vec<f64> {
        let k = self.k;
        let mut g = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                g[a * k + b] = dot(self.vector(a), self.vector(b));
            }
        }
        g
    }

    /// Largest deviation of the Gram matrix from `(k/(k-1)) I - J/(k-1)`.
    pub fn gram_error(&self) -> f64 {
        let k = self.k;
        let off = -1.0 / (k as f64 - 1.0);
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let want = if a == b { 1.0 } else { off };
                worst = worst.max((g[a * k + b] - want).abs());
            }
        }
        worst
    }

    /// `Σ_l H_il r_l`, the bias direction of variable `i`.
    pub fn bias_vector(&self, inst: &MrfInstance, i: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (l, &w) in inst.h_row(i).iter().enumerate() {
            axpy(w, self.vector(l), out);
        }
    }

    /// Bias directions for every variable, n×d row-major.
    pub fn bias_vectors(&self, inst: &MrfInstance) -> Vec<f64> {
        let mut out = vec![0.0; inst.n() * self.d];
        for (i, row) in out.chunks_mut(self.d).enumerate() {
            self.bias_vector(inst, i, row);
        }
        out
    }
}

fn fill_simplex(r: &mut [f64], d: usize, first: usize, k: usize, offset: usize) {
    // writes k vertices (rows first..first+k) into coordinates offset..offset+k-1
    if k == 2 {
        r[first * d + offset] = 1.0;
        r[(first + 1) * d + offset] = -1.0;
        return;
    }
    let shift = 1.0 / (k as f64 - 1.0);
    let scale = (1.0 - shift * shift).sqrt();
    r[first * d + offset] = 1.0;
    fill_simplex(r, d, first + 1, k - 1, offset + 1);
    for row in (first + 1)..(first + k) {
        for c in (offset + 1)..(offset + k - 1) {
            r[row * d + c] *= scale;
        }
        r[row * d + offset] = -shift;
    }
}

/// `simplex_frame(k, d)`.
pub fn simplex_frame(k: usize, d: usize) -> Result<SimplexFrame> {
    SimplexFrame::new(k, d)
}

/// `(2/k)((k-1) r_aᵀr_b + 1) - 1`, which reproduces `δ̂(a, b)`.
pub fn bijection_check(k: usize, frame: &SimplexFrame, a: usize, b: usize) -> f64 {
    let kf = k as f64;
    (2.0 / kf) * ((kf - 1.0) * dot(frame.vector(a), frame.vector(b)) + 1.0) - 1.0
}

/// The simplex-embedded objective of a labelling:
/// `Σ_ij A_ij r_{x_i}ᵀr_{x_j} + Σ_i Σ_l H_il r_{x_i}ᵀr_l`.
pub fn embedded_objective(inst: &MrfInstance, frame: &SimplexFrame, x: &Configuration) -> f64 {
    let g = frame.gram();
    let k = frame.k();
    let n = inst.n();
    let mut total = 0.0;
    for i in 0..n {
        let xi = x.label(i);
        for j in 0..n {
            total += inst.a(i, j) * g[xi * k + x.label(j)];
        }
        for l in 0..k {
            total += inst.h(i, l) * g[xi * k + l];
        }
    }
    total
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
