//! Seeded synthetic instances at a prescribed coupling strength.
//!
//! Random stream layout, for seed `s` (stream 0 of [`crate::rng::stream_rng`]):
//!
//! 1. pairs `(i, j)`, `i < j`, in row-major order: for Erdős–Rényi graphs one
//!    uniform draw decides the edge (`u < p`); every selected edge then draws
//!    its weight uniformly from `[-1, 1)`;
//! 2. biases `H[i][l]` in row-major order, uniform on `[-1, 1)`.
//!
//! The couplings are then rescaled so that the coupling strength equals the
//! target exactly. The diagonal of `A` is zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrf::{coupling_strength, MrfInstance};
use crate::rng::{stream_rng, uniform_f64, unit_f64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    ErdosRenyi(f64),
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Complete => f.write_str("complete"),
            GraphKind::ErdosRenyi(p) => write!(f, "er:{p}"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    /// `complete` or `er:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "complete" {
            return Ok(GraphKind::Complete);
        }
        if let Some(p) = s.strip_prefix("er:") {
            let p: f64 = p
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad edge probability in {s:?}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
            }
            return Ok(GraphKind::ErdosRenyi(p));
        }
        Err(Error::InvalidParameter(format!("unknown graph kind {s:?} (expected complete or er:<p>)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub k: usize,
    pub graph: GraphKind,
    pub target_cs: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn complete(n: usize, k: usize, target_cs: f64, seed: u64) -> Self {
        Self {
            n,
            k,
            graph: GraphKind::Complete,
            target_cs,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("generator needs n >= 2, got {}", self.n)));
        }
        if self.k < 2 {
            return Err(Error::ClassCount(self.k));
        }
        if !(self.target_cs >= 0.0 && self.target_cs.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling strength {} must be finite and >= 0", self.target_cs)));
        }
        if let GraphKind::ErdosRenyi(p) = self.graph {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Draws an instance; a pure function of `spec`.
pub fn generate(spec: &GenSpec) -> Result<MrfInstance> {
    spec.validate()?;
    let GenSpec { n, k, graph, target_cs, seed } = *spec;
    let mut rng = stream_rng(seed, 0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let selected = match graph {
                GraphKind::Complete => true,
                GraphKind::ErdosRenyi(p) => unit_f64(&mut rng) < p,
            };
            if selected {
                let w = uniform_f64(&mut rng, -1.0, 1.0);
                a[i * n + j] = w;
                a[j * n + i] = w;
            }
        }
    }
    let h: Vec<f64> = (0..n * k).map(|_| uniform_f64(&mut rng, -1.0, 1.0)).collect();

    let sampled = coupling_strength(&a, n)?;
    if target_cs > 0.0 {
        if sampled == 0.0 {
            return Err(Error::EmptyGraph(target_cs));
        }
        let factor = target_cs / sampled;
        a.iter_mut().for_each(|w| *w *= factor);
    } else {
        a.iter_mut().for_each(|w| *w = 0.0);
    }
    MrfInstance::from_flat(n, k, a, h)
}
