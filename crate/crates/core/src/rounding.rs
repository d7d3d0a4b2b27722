//! Randomized rounding of unit vectors to labels.
//!
//! Draw `k` directions `m_l` on the sphere, give each variable the label of
//! the direction it is most aligned with, then relabel direction `a` as the
//! simplex vertex `r_l` it is most aligned with. Ties go to the lowest label.

use std::collections::HashSet;
use std::time::Instant;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mrf::{Configuration, MrfInstance};
use crate::rng::{sphere_point, stream_rng};
use crate::simplex::{dot, SimplexFrame};

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (l, x) in values.enumerate() {
        if x > best_val {
            best = l;
            best_val = x;
        }
    }
    best
}

/// One rounding of `v` (row-major, `n × d`) against `frame`.
pub fn round_once<R: RngCore + ?Sized>(v: &[f64], frame: &SimplexFrame, rng: &mut R) -> Result<Configuration> {
    let (k, d) = (frame.k(), frame.d());
    if v.len() % d != 0 {
        return Err(Error::Dimension(format!("{} entries are not a multiple of d = {d}", v.len())));
    }
    let mut dirs = vec![0.0; k * d];
    for m in dirs.chunks_mut(d) {
        sphere_point(rng, m);
    }
    Ok(round_with_directions(v, frame, &dirs))
}

/// Both passes with given directions (row `l` of `dirs` is `m_l`).
pub fn round_with_directions(v: &[f64], frame: &SimplexFrame, dirs: &[f64]) -> Configuration {
    let d = frame.d();
    let k = frame.k();
    let remap: Vec<u16> = dirs
        .chunks(d)
        .map(|m| argmax((0..k).map(|l| dot(m, frame.vector(l)))) as u16)
        .collect();
    let labels = v
        .chunks(d)
        .map(|vi| remap[argmax(dirs.chunks(d).map(|m| dot(vi, m)))])
        .collect();
    Configuration::from_raw(labels)
}

/// First pass only: index of the direction each `v_i` is most aligned with.
pub fn nearest_direction(v: &[f64], d: usize, dirs: &[f64]) -> Vec<usize> {
    v.chunks(d).map(|vi| argmax(dirs.chunks(d).map(|m| dot(vi, m)))).collect()
}

#[derive(Debug, Clone)]
pub struct RoundingBatch {
    pub samples: Vec<Configuration>,
    pub values: Vec<f64>,
    pub best: Configuration,
    pub best_value: f64,
    /// Distinct samples in order of first appearance.
    pub unique_set: Vec<Configuration>,
    /// `(seconds since the batch started, best value so far)` at each
    /// improvement.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct BatchJson {
    samples: Vec<String>,
    best: String,
    best_value: f64,
    unique: usize,
}

impl RoundingBatch {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(BatchJson {
            samples: self.samples.iter().map(|x| x.to_string()).collect(),
            best: self.best.to_string(),
            best_value: self.best_value,
            unique: self.unique_set.len(),
        })
        .expect("batch serialization cannot fail")
    }
}

/// `iters` roundings; iteration `t` draws from stream `t` of `seed`.
pub fn round_batch(v: &[f64], frame: &SimplexFrame, inst: &MrfInstance, iters: usize, seed: u64) -> Result<RoundingBatch> {
    if iters == 0 {
        return Err(Error::InvalidParameter("at least one rounding iteration is required".into()));
    }
    if v.len() != inst.n() * frame.d() || frame.k() != inst.k() {
        return Err(Error::Dimension(format!(
            "{} entries for n = {}, d = {} (frame k = {}, instance k = {})",
            v.len(),
            inst.n(),
            frame.d(),
            frame.k(),
            inst.k()
        )));
    }
    let start = Instant::now();
    let mut samples = Vec::with_capacity(iters);
    let mut values = Vec::with_capacity(iters);
    let mut seen = HashSet::new();
    let mut unique_set = Vec::new();
    let mut best_idx = 0;
    let mut trace = Vec::new();
    for t in 0..iters {
        let mut rng = stream_rng(seed, t as u64);
        let x = round_once(v, frame, &mut rng)?;
        let f = inst.objective(&x);
        if t == 0 || f > values[best_idx] {
            best_idx = t;
            trace.push((start.elapsed().as_secs_f64(), f));
        }
        if seen.insert(x.clone()) {
            unique_set.push(x.clone());
        }
        samples.push(x);
        values.push(f);
    }
    Ok(RoundingBatch {
        best: samples[best_idx].clone(),
        best_value: values[best_idx],
        samples,
        values,
        unique_set,
        trace,
    })
}
