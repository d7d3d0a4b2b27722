//! Gaussian appearance and smoothness kernels over pixel features, with
//! exact lookup tables for integer position and color offsets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation radius in units of the larger position bandwidth.
pub const TRUNCATION_BANDWIDTHS: f64 = 6.0;

/// Table factors below this are stored as zero so that products of up to
/// five factors stay out of the subnormal range.
pub const TABLE_FLUSH: f64 = 1e-60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelParams {
    pub w_app: f64,
    pub theta_alpha: f64,
    pub theta_beta: f64,
    pub w_smooth: f64,
    pub theta_gamma: f64,
    /// Zero the kernel beyond `6 · max(θ_α, θ_γ)` pixels.
    pub truncate: bool,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            w_app: 1.0,
            theta_alpha: 40.0,
            theta_beta: 13.0,
            w_smooth: 1.0,
            theta_gamma: 3.0,
            truncate: true,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_app, self.theta_alpha, self.theta_beta, self.w_smooth, self.theta_gamma];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParameter(format!("kernel parameters must be positive: {self:?}")));
        }
        Ok(())
    }

    pub fn radius(&self) -> Option<f64> {
        self.truncate.then(|| TRUNCATION_BANDWIDTHS * self.theta_alpha.max(self.theta_gamma))
    }
}

/// Feature layout `(x, y, r, g, b)` in pixels and 8-bit intensities.
pub type Feature = [f64; 5];

/// `w_app·exp(-|Δp|²/2θ_α² - |Δc|²/2θ_β²) + w_smooth·exp(-|Δp|²/2θ_γ²)`.
pub fn kernel(fi: &Feature, fj: &Feature, params: &KernelParams) -> f64 {
    let dp = (fi[0] - fj[0]).powi(2) + (fi[1] - fj[1]).powi(2);
    if let Some(r) = params.radius() {
        if dp > r * r {
            return 0.0;
        }
    }
    let dc = (2..5).map(|c| (fi[c] - fj[c]).powi(2)).sum::<f64>();
    let app = params.w_app * (-dp / (2.0 * params.theta_alpha.powi(2)) - dc / (2.0 * params.theta_beta.powi(2))).exp();
    let smooth = params.w_smooth * (-dp / (2.0 * params.theta_gamma.powi(2))).exp();
    app + smooth
}

/// Kernel factors for every integer offset on a `width × height` grid.
pub(crate) struct PairTables {
    width: usize,
    height: usize,
    app: Vec<f64>,
    smooth: Vec<f64>,
    color: [f64; 256],
    w_app: f64,
    w_smooth: f64,
    radius_sq: Option<usize>,
}

impl PairTables {
    pub(crate) fn new(width: usize, height: usize, params: &KernelParams) -> Self {
        let span = width.max(height);
        let gauss = |t: usize, theta: f64| {
            let g = (-((t * t) as f64) / (2.0 * theta * theta)).exp();
            if g < TABLE_FLUSH {
                0.0
            } else {
                g
            }
        };
        let mut color = [0.0; 256];
        for (t, c) in color.iter_mut().enumerate() {
            *c = gauss(t, params.theta_beta);
        }
        Self {
            width,
            height,
            app: (0..span).map(|t| gauss(t, params.theta_alpha)).collect(),
            smooth: (0..span).map(|t| gauss(t, params.theta_gamma)).collect(),
            color,
            w_app: params.w_app,
            w_smooth: params.w_smooth,
            radius_sq: params.radius().map(|r| (r * r).floor() as usize),
        }
    }

    /// Calls `visit(i, j, K_ij)` for every pair `i < j` inside the radius.
    #[cfg(test)]
    pub(crate) fn for_each_pair<F: FnMut(usize, usize, f64)>(&self, rgb: &[[u8; 3]], mut visit: F) {
        let (w, h) = (self.width, self.height);
        for yi in 0..h {
            for xi in 0..w {
                let i = yi * w + xi;
                let ci = rgb[i];
                for yj in yi..h {
                    let dy = yj - yi;
                    let dx_max = match self.radius_sq {
                        Some(r2) if dy * dy > r2 => break,
                        Some(r2) => (((r2 - dy * dy) as f64).sqrt().floor() as usize).min(w),
                        None => w,
                    };
                    let wa = self.w_app * self.app[dy];
                    let ws = self.w_smooth * self.smooth[dy];
                    let lo = if yj == yi { xi + 1 } else { xi.saturating_sub(dx_max) };
                    let hi = (xi + dx_max + 1).min(w);
                    let row = yj * w;
                    for xj in lo..hi {
                        let dx = xi.abs_diff(xj);
                        let j = row + xj;
                        let cj = rgb[j];
                        let c = self.color[ci[0].abs_diff(cj[0]) as usize]
                            * self.color[ci[1].abs_diff(cj[1]) as usize]
                            * self.color[ci[2].abs_diff(cj[2]) as usize];
                        visit(i, j, wa * self.app[dx] * c + ws * self.smooth[dx]);
                    }
                }
            }
        }
    }
}

impl PairTables {
    /// `out_i = Σ_{j≠i} K_ij v_j` for row-major `v` with `D` columns.
    pub(crate) fn accumulate<const D: usize>(&self, rgb: &[[u8; 3]], v: &[f64], out: &mut [f64]) {
        let (w, h) = (self.width, self.height);
        out.iter_mut().for_each(|x| *x = 0.0);
        let color = &self.color;
        for yi in 0..h {
            for xi in 0..w {
                let i = yi * w + xi;
                let ci = rgb[i];
                let vi: [f64; D] = std::array::from_fn(|t| v[i * D + t]);
                let mut gi = [0.0; D];
                for yj in yi..h {
                    let dy = yj - yi;
                    let dx_max = match self.radius_sq {
                        Some(r2) if dy * dy > r2 => break,
                        Some(r2) => (((r2 - dy * dy) as f64).sqrt().floor() as usize).min(w),
                        None => w,
                    };
                    let wa = self.w_app * self.app[dy];
                    let ws = self.w_smooth * self.smooth[dy];
                    let lo = if yj == yi { xi + 1 } else { xi.saturating_sub(dx_max) };
                    let hi = (xi + dx_max + 1).min(w);
                    if lo >= hi {
                        continue;
                    }
                    let row = yj * w;
                    let crow = &rgb[row + lo..row + hi];
                    let vrow = &v[(row + lo) * D..(row + hi) * D];
                    let orow = &mut out[(row + lo) * D..(row + hi) * D];
                    for (t, ((cj, vj), oj)) in crow.iter().zip(vrow.chunks_exact(D)).zip(orow.chunks_exact_mut(D)).enumerate() {
                        let dx = xi.abs_diff(lo + t);
                        let c = color[ci[0].abs_diff(cj[0]) as usize] * color[ci[1].abs_diff(cj[1]) as usize] * color[ci[2].abs_diff(cj[2]) as usize];
                        let k = wa * self.app[dx] * c + ws * self.smooth[dx];
                        for s in 0..D {
                            gi[s] += k * vj[s];
                            oj[s] += k * vi[s];
                        }
                    }
                }
                for s in 0..D {
                    out[i * D + s] += gi[s];
                }
            }
        }
    }
}

impl PairTables {
    /// [`PairTables::accumulate`] with a run-time column count.
    pub(crate) fn accumulate_dyn(&self, rgb: &[[u8; 3]], v: &[f64], d: usize, out: &mut [f64]) {
        match d {
            1 => return self.accumulate::<1>(rgb, v, out),
            2 => return self.accumulate::<2>(rgb, v, out),
            3 => return self.accumulate::<3>(rgb, v, out),
            4 => return self.accumulate::<4>(rgb, v, out),
            5 => return self.accumulate::<5>(rgb, v, out),
            _ => {}
        }
        let (w, h) = (self.width, self.height);
        out.iter_mut().for_each(|x| *x = 0.0);
        let color = &self.color;
        let mut gi = vec![0.0; d];
        for yi in 0..h {
            for xi in 0..w {
                let i = yi * w + xi;
                let ci = rgb[i];
                gi.iter_mut().for_each(|x| *x = 0.0);
                for yj in yi..h {
                    let dy = yj - yi;
                    let dx_max = match self.radius_sq {
                        Some(r2) if dy * dy > r2 => break,
                        Some(r2) => (((r2 - dy * dy) as f64).sqrt().floor() as usize).min(w),
                        None => w,
                    };
                    let wa = self.w_app * self.app[dy];
                    let ws = self.w_smooth * self.smooth[dy];
                    let lo = if yj == yi { xi + 1 } else { xi.saturating_sub(dx_max) };
                    let hi = (xi + dx_max + 1).min(w);
                    if lo >= hi {
                        continue;
                    }
                    let row = yj * w;
                    let vi = &v[i * d..(i + 1) * d];
                    let orow = &mut out[(row + lo) * d..(row + hi) * d];
                    let vrow = &v[(row + lo) * d..(row + hi) * d];
                    for (t, ((cj, vj), oj)) in rgb[row + lo..row + hi].iter().zip(vrow.chunks_exact(d)).zip(orow.chunks_exact_mut(d)).enumerate() {
                        let dx = xi.abs_diff(lo + t);
                        let c = color[ci[0].abs_diff(cj[0]) as usize] * color[ci[1].abs_diff(cj[1]) as usize] * color[ci[2].abs_diff(cj[2]) as usize];
                        let k = wa * self.app[dx] * c + ws * self.smooth[dx];
                        for s in 0..d {
                            gi[s] += k * vj[s];
                            oj[s] += k * vi[s];
                        }
                    }
                }
                for s in 0..d {
                    out[i * d + s] += gi[s];
                }
            }
        }
    }
}

/// Labellings scored together by [`PairTables::same_label_mass`].
pub(crate) const LANES: usize = 16;

impl PairTables {
    /// For up to 16 labellings packed one byte per lane into `codes`,
    /// returns `Σ_{i<j} K_ij [x_i = x_j]` per lane and `Σ_{i<j} K_ij`.
    pub(crate) fn same_label_mass(&self, rgb: &[[u8; 3]], codes: &[u128]) -> ([f64; LANES], f64) {
        let (w, h) = (self.width, self.height);
        let color = &self.color;
        let mut same = [0.0; LANES];
        let mut total = 0.0;
        for yi in 0..h {
            for xi in 0..w {
                let i = yi * w + xi;
                let ci = rgb[i];
                let code_i = codes[i];
                for yj in yi..h {
                    let dy = yj - yi;
                    let dx_max = match self.radius_sq {
                        Some(r2) if dy * dy > r2 => break,
                        Some(r2) => (((r2 - dy * dy) as f64).sqrt().floor() as usize).min(w),
                        None => w,
                    };
                    let wa = self.w_app * self.app[dy];
                    let ws = self.w_smooth * self.smooth[dy];
                    let lo = if yj == yi { xi + 1 } else { xi.saturating_sub(dx_max) };
                    let hi = (xi + dx_max + 1).min(w);
                    if lo >= hi {
                        continue;
                    }
                    let row = yj * w;
                    for (t, (cj, &code_j)) in rgb[row + lo..row + hi].iter().zip(&codes[row + lo..row + hi]).enumerate() {
                        let dx = xi.abs_diff(lo + t);
                        let c = color[ci[0].abs_diff(cj[0]) as usize] * color[ci[1].abs_diff(cj[1]) as usize] * color[ci[2].abs_diff(cj[2]) as usize];
                        let k = wa * self.app[dx] * c + ws * self.smooth[dx];
                        total += k;
                        let diff = (code_i ^ code_j).to_le_bytes();
                        for (s, &b) in same.iter_mut().zip(&diff) {
                            *s += if b == 0 { k } else { 0.0 };
                        }
                    }
                }
            }
        }
        (same, total)
    }
}
