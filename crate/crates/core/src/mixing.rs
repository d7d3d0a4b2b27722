//! Coordinate-ascent solver for the low-rank relaxation
//!
//! ```text
//! max_{‖v_i‖ = 1, v_i ∈ ℝ^d}  Σ_ij A_ij v_iᵀv_j + Σ_i v_iᵀ Σ_l H_il r_l
//! ```
//!
//! Each coordinate step replaces `v_i` by the normalized gradient
//! `g_i = 2 Σ_{j≠i} A_ij v_j + Σ_l H_il r_l`, which maximizes the objective
//! over `v_i` with the rest held fixed. The objective therefore never
//! decreases; the gain of a step is `‖g_i‖ - g_iᵀv_i^old`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrf::MrfInstance;
use crate::rng::{sphere_point, stream_rng};
use crate::simplex::{axpy, dot, norm, SimplexFrame};

/// Unit-norm tolerance accepted by [`relaxed_objective`].
pub const UNIT_NORM_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub d_override: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            rel_tol: 1e-8,
            seed: 0,
            d_override: None,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// `n` unit vectors in `ℝ^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSolution {
    pub n: usize,
    pub d: usize,
    pub v: Vec<f64>,
    pub objective_value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    d: usize,
    objective: f64,
    iterations: usize,
    converged: bool,
    v: Vec<&'a [f64]>,
}

impl VectorSolution {
    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.v[i * self.d..(i + 1) * self.d]
    }

    /// `{ "d", "objective", "iterations", "converged", "v" }`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SolutionJson {
            d: self.d,
            objective: self.objective_value,
            iterations: self.iterations_used,
            converged: self.converged,
            v: self.v.chunks(self.d).collect(),
        })
        .expect("solution serialization cannot fail")
    }
}

/// Working dimension: `max(k - 1, ⌈√(2(n + k(k+1)/2))⌉)`.
pub fn rank_bound(n: usize, k: usize) -> usize {
    let constraints = n + k * (k + 1) / 2;
    let mut d = ((2 * constraints) as f64).sqrt().ceil() as usize;
    // guard the float ceiling against off-by-one at perfect squares
    while d * d < 2 * constraints {
        d += 1;
    }
    while d > 0 && (d - 1) * (d - 1) >= 2 * constraints {
        d -= 1;
    }
    d.max(k - 1)
}

/// `Σ_ij A_ij v_iᵀv_j + Σ_i v_iᵀ Σ_l H_il r_l` for row-major `v` (n×d).
pub fn relaxed_objective(inst: &MrfInstance, frame: &SimplexFrame, v: &[f64]) -> Result<f64> {
    let d = frame.d();
    if frame.k() != inst.k() {
        return Err(Error::Dimension(format!("frame has {} classes, instance {}", frame.k(), inst.k())));
    }
    if v.len() != inst.n() * d {
        return Err(Error::Dimension(format!("{} entries for {} vectors of dimension {d}", v.len(), inst.n())));
    }
    for (i, vi) in v.chunks(d).enumerate() {
        let nv = norm(vi);
        if (nv - 1.0).abs() > UNIT_NORM_INPUT_TOL {
            return Err(Error::InvalidParameter(format!("v_{i} has norm {nv}")));
        }
    }
    Ok(relaxed_objective_unchecked(inst, frame, v))
}

pub(crate) fn relaxed_objective_unchecked(inst: &MrfInstance, frame: &SimplexFrame, v: &[f64]) -> f64 {
    let d = frame.d();
    let n = inst.n();
    let mut bias = vec![0.0; d];
    let mut total = 0.0;
    for i in 0..n {
        let vi = &v[i * d..(i + 1) * d];
        let row = inst.a_row(i);
        total += row[i] * dot(vi, vi);
        let mut off = 0.0;
        for j in (i + 1)..n {
            off += row[j] * dot(vi, &v[j * d..(j + 1) * d]);
        }
        total += 2.0 * off;
        frame.bias_vector(inst, i, &mut bias);
        total += dot(vi, &bias);
    }
    total
}

/// Progress reported to a solver observer.
#[derive(Debug)]
pub enum M4Event<'a> {
    /// `v_index` was just replaced; `gain` is the objective increase.
    Update { sweep: usize, index: usize, vectors: &'a [f64], gain: f64 },
    /// A full sweep finished; `objective` is recomputed from scratch.
    SweepEnd { sweep: usize, vectors: &'a [f64], objective: f64 },
}

/// Solves the relaxation from a seeded random start.
pub fn solve_m4(inst: &MrfInstance, cfg: &SolverConfig) -> Result<(VectorSolution, SimplexFrame)> {
    solve_m4_observed(inst, cfg, |_| {})
}

/// [`solve_m4`] with a callback after every coordinate update and sweep.
pub fn solve_m4_observed<F>(inst: &MrfInstance, cfg: &SolverConfig, mut observe: F) -> Result<(VectorSolution, SimplexFrame)>
where
    F: FnMut(M4Event<'_>),
{
    cfg.validate()?;
    let (n, k) = (inst.n(), inst.k());
    let d = cfg.d_override.unwrap_or_else(|| rank_bound(n, k));
    let frame = SimplexFrame::new(k, d)?;
    let bias = frame.bias_vectors(inst);

    let mut rng = stream_rng(cfg.seed, 0);
    let mut v = vec![0.0; n * d];
    for vi in v.chunks_mut(d) {
        sphere_point(&mut rng, vi);
    }

    let mut f = relaxed_objective_unchecked(inst, &frame, &v);
    let mut g = vec![0.0; d];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iters {
        sweeps += 1;
        let f_start = f;
        for i in 0..n {
            g.copy_from_slice(&bias[i * d..(i + 1) * d]);
            let row = inst.a_row(i);
            for j in 0..n {
                if j != i && row[j] != 0.0 {
                    axpy(2.0 * row[j], &v[j * d..(j + 1) * d], &mut g);
                }
            }
            let gn = norm(&g);
            if !(gn > 0.0) {
                continue;
            }
            let vi = &mut v[i * d..(i + 1) * d];
            let gain = gn - dot(&g, vi);
            for (x, gx) in vi.iter_mut().zip(&g) {
                *x = gx / gn;
            }
            observe(M4Event::Update {
                sweep: sweeps,
                index: i,
                vectors: &v,
                gain,
            });
        }
        f = relaxed_objective_unchecked(inst, &frame, &v);
        observe(M4Event::SweepEnd {
            sweep: sweeps,
            vectors: &v,
            objective: f,
        });
        if (f - f_start).abs() / f.abs().max(1.0) < cfg.rel_tol {
            converged = true;
            break;
        }
    }
    Ok((
        VectorSolution {
            n,
            d,
            v,
            objective_value: f,
            iterations_used: sweeps,
            converged,
        },
        frame,
    ))
}

/// The `(k+n)×(k+n)` cost matrix `[[0, Hᵀ/2], [H/2, A]]` of the lifted
/// semidefinite program, row-major.
pub fn block_cost_matrix(inst: &MrfInstance) -> Vec<f64> {
    let (n, k) = (inst.n(), inst.k());
    let m = n + k;
    let mut c = vec![0.0; m * m];
    for i in 0..n {
        for l in 0..k {
            let half = 0.5 * inst.h(i, l);
            c[(k + i) * m + l] = half;
            c[l * m + k + i] = half;
        }
        for j in 0..n {
            c[(k + i) * m + k + j] = inst.a(i, j);
        }
    }
    c
}

/// Gram matrix `Y = UᵀU` of the columns `(r_1, …, r_k, v_1, …, v_n)`.
pub fn lifted_gram(frame: &SimplexFrame, v: &[f64]) -> Vec<f64> {
    let d = frame.d();
    let k = frame.k();
    let n = v.len() / d;
    let cols: Vec<&[f64]> = (0..k).map(|l| frame.vector(l)).chain(v.chunks(d)).collect();
    let m = n + k;
    let mut y = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let val = dot(cols[a], cols[b]);
            y[a * m + b] = val;
            y[b * m + a] = val;
        }
    }
    y
}

/// Frobenius inner product `Y · C`.
pub fn frobenius(y: &[f64], c: &[f64]) -> f64 {
    y.iter().zip(c).map(|(a, b)| a * b).sum()
}
