//! Block-nonnegative variant of the relaxation.
//!
//! Each `v_i = S z_i` where `z_i ∈ ℝ^{mk}_{≥0}` is split into `k` blocks of
//! length `m`, `SᵀS = C = (k/(k-1))(I - (1/k)(J_k ⊗ I_m))`, and
//! `‖Σ_b z_iᵇ‖ = 1`. These constraints force `v_iᵀv_j ≥ -1/(k-1)`.
//!
//! `S` is the scaled orthogonal projector `√(k/(k-1)) P`, so both `S` and
//! `C` act in `O(d)` through within-index block sums.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixing::{rank_bound, relaxed_objective_unchecked, SolverConfig};
use crate::mrf::MrfInstance;
use crate::rng::{below, stream_rng, unit_f64};
use crate::simplex::{dot, SimplexFrame, FRAME_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockProjector {
    k: usize,
    m: usize,
    scale: f64,
    frame: SimplexFrame,
}

/// Builds the projector square root for `k` blocks of length `m`.
pub fn build_projector(k: usize, m: usize) -> Result<BlockProjector> {
    if k < 2 {
        return Err(Error::ClassCount(k));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("block size m must be at least 1".into()));
    }
    let d = m * k;
    let mut r = vec![0.0; k * d];
    let mut e = vec![0.0; d];
    let mut out = vec![0.0; d];
    for l in 0..k {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[l * m] = 1.0;
        apply_projector(k, m, (k as f64 / (k - 1) as f64).sqrt(), &e, &mut out);
        r[l * d..(l + 1) * d].copy_from_slice(&out);
    }
    let frame = SimplexFrame::from_vectors(k, d, r, FRAME_TOLERANCE)?;
    Ok(BlockProjector {
        k,
        m,
        scale: k as f64 / (k - 1) as f64,
        frame,
    })
}

fn apply_projector(k: usize, m: usize, factor: f64, x: &[f64], out: &mut [f64]) {
    let inv_k = 1.0 / k as f64;
    for j in 0..m {
        let mean = (0..k).map(|b| x[b * m + j]).sum::<f64>() * inv_k;
        for b in 0..k {
            out[b * m + j] = factor * (x[b * m + j] - mean);
        }
    }
}

impl BlockProjector {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.m * self.k
    }

    /// `k/(k-1)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `r_l = S e_{(l-1)m+1}`.
    pub fn frame(&self) -> &SimplexFrame {
        &self.frame
    }

    /// `out = S x`.
    pub fn apply_s(&self, x: &[f64], out: &mut [f64]) {
        apply_projector(self.k, self.m, self.scale.sqrt(), x, out);
    }

    /// `out = C x`.
    pub fn apply_c(&self, x: &[f64], out: &mut [f64]) {
        apply_projector(self.k, self.m, self.scale, x, out);
    }

    fn dense(&self, factor: f64) -> Vec<f64> {
        let d = self.d();
        let inv_k = 1.0 / self.k as f64;
        let mut a = vec![0.0; d * d];
        for p in 0..d {
            for q in 0..d {
                let same_index = p % self.m == q % self.m;
                let ident = if p == q { 1.0 } else { 0.0 };
                let kron = if same_index { inv_k } else { 0.0 };
                a[p * d + q] = factor * (ident - kron);
            }
        }
        a
    }

    /// Dense `S`, row-major.
    pub fn s_matrix(&self) -> Vec<f64> {
        self.dense(self.scale.sqrt())
    }

    /// Dense `C`, row-major.
    pub fn c_matrix(&self) -> Vec<f64> {
        self.dense(self.scale)
    }
}

/// Maximizer of `gᵀz` over `z ≥ 0`, `‖Σ_b zᵇ‖ = 1`.
///
/// Returns `None` when no entry of `g` is positive (`λ = 0`).
pub fn block_update(g: &[f64], k: usize, m: usize) -> Result<Option<(Vec<f64>, f64)>> {
    let mut z = vec![0.0; g.len()];
    block_update_into(g, k, m, &mut z).map(|lam| lam.map(|l| (z, l)))
}

pub(crate) fn block_update_into(g: &[f64], k: usize, m: usize, z: &mut [f64]) -> Result<Option<f64>> {
    if g.len() != k * m || z.len() != k * m {
        return Err(Error::Dimension(format!("gradient of length {} for k = {k}, m = {m}", g.len())));
    }
    if let Some(i) = g.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "block gradient", index: i });
    }
    let mut sq = 0.0;
    for j in 0..m {
        let mut best = 0;
        for b in 1..k {
            if g[b * m + j] > g[best * m + j] {
                best = b;
            }
        }
        let top = g[best * m + j].max(0.0);
        sq += top * top;
    }
    if !(sq > 0.0) {
        return Ok(None);
    }
    let lambda = sq.sqrt();
    z.iter_mut().for_each(|x| *x = 0.0);
    for j in 0..m {
        let mut best = 0;
        for b in 1..k {
            if g[b * m + j] > g[best * m + j] {
                best = b;
            }
        }
        z[best * m + j] = g[best * m + j].max(0.0) / lambda;
    }
    Ok(Some(lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    pub objective_value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Serialize)]
struct BlockJson<'a> {
    d: usize,
    m: usize,
    objective: f64,
    iterations: usize,
    converged: bool,
    z: Vec<&'a [f64]>,
    v: Vec<&'a [f64]>,
}

impl BlockSolution {
    pub fn d(&self) -> usize {
        self.m * self.k
    }

    pub fn z_vector(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.z[i * d..(i + 1) * d]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.v[i * d..(i + 1) * d]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.d();
        serde_json::to_value(BlockJson {
            d,
            m: self.m,
            objective: self.objective_value,
            iterations: self.iterations_used,
            converged: self.converged,
            z: self.z.chunks(d).collect(),
            v: self.v.chunks(d).collect(),
        })
        .expect("solution serialization cannot fail")
    }
}

/// `⌈rank_bound(n, k) / k⌉`.
pub fn default_block_size(n: usize, k: usize) -> usize {
    rank_bound(n, k).div_ceil(k)
}

#[derive(Debug)]
pub enum BlockEvent<'a> {
    Update { sweep: usize, index: usize, z: &'a [f64], v: &'a [f64], gain: f64 },
    SweepEnd { sweep: usize, z: &'a [f64], v: &'a [f64], objective: f64 },
}

pub fn solve_m4_plus(inst: &MrfInstance, cfg: &SolverConfig, m: usize) -> Result<(BlockSolution, BlockProjector)> {
    solve_m4_plus_observed(inst, cfg, m, |_| {})
}

pub fn solve_m4_plus_observed<F>(inst: &MrfInstance, cfg: &SolverConfig, m: usize, mut observe: F) -> Result<(BlockSolution, BlockProjector)>
where
    F: FnMut(BlockEvent<'_>),
{
    cfg.validate()?;
    let (n, k) = (inst.n(), inst.k());
    let proj = build_projector(k, m)?;
    let d = proj.d();

    let mut rng = stream_rng(cfg.seed, 0);
    let mut z = vec![0.0; n * d];
    let mut v = vec![0.0; n * d];
    for i in 0..n {
        let b = below(&mut rng, k as u64) as usize;
        let block = &mut z[i * d + b * m..i * d + (b + 1) * m];
        let mut sq = 0.0;
        while !(sq > 0.0) {
            sq = 0.0;
            for x in block.iter_mut() {
                *x = unit_f64(&mut rng);
                sq += *x * *x;
            }
        }
        let inv = 1.0 / sq.sqrt();
        block.iter_mut().for_each(|x| *x *= inv);
        proj.apply_s(&z[i * d..(i + 1) * d], &mut v[i * d..(i + 1) * d]);
    }

    let mut f = relaxed_objective_unchecked(inst, proj.frame(), &v);
    let mut p = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut z_new = vec![0.0; d];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iters {
        sweeps += 1;
        let f_start = f;
        for i in 0..n {
            p.iter_mut().for_each(|x| *x = 0.0);
            for l in 0..k {
                p[l * m] = inst.h(i, l);
            }
            let row = inst.a_row(i);
            for j in 0..n {
                let a = row[j];
                if j != i && a != 0.0 {
                    for (pq, zq) in p.iter_mut().zip(&z[j * d..(j + 1) * d]) {
                        *pq += 2.0 * a * zq;
                    }
                }
            }
            proj.apply_c(&p, &mut g);
            let Some(_) = block_update_into(&g, k, m, &mut z_new)? else {
                continue;
            };
            let zi = &mut z[i * d..(i + 1) * d];
            let gain = dot(&g, &z_new) - dot(&g, zi);
            zi.copy_from_slice(&z_new);
            proj.apply_s(&z_new, &mut v[i * d..(i + 1) * d]);
            observe(BlockEvent::Update {
                sweep: sweeps,
                index: i,
                z: &z,
                v: &v,
                gain,
            });
        }
        f = relaxed_objective_unchecked(inst, proj.frame(), &v);
        observe(BlockEvent::SweepEnd {
            sweep: sweeps,
            z: &z,
            v: &v,
            objective: f,
        });
        if (f - f_start).abs() / f.abs().max(1.0) < cfg.rel_tol {
            converged = true;
            break;
        }
    }
    Ok((
        BlockSolution {
            n,
            k,
            m,
            z,
            v,
            objective_value: f,
            iterations_used: sweeps,
            converged,
        },
        proj,
    ))
}
