//! Unbiased estimate of the partition function from a rounded mode cluster
//! plus uniform importance sampling on its complement.
//!
//! ```text
//! Ẑ = Σ_{x ∈ X_pv} e^{f(x)} + (1/R) Σ_{x ∈ X_Ω} e^{f(x)} / q,   q = 1/(kⁿ - |X_pv|)
//! ```

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{logaddexp, LogSumExp};
use crate::mrf::{Configuration, MrfInstance};
use crate::rng::{below, derive_seed, stream_rng};
use crate::rounding::round_once;
use crate::simplex::SimplexFrame;

/// Rejection attempts allowed per requested complement draw.
pub const REJECTION_FACTOR: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEstimate {
    pub log_z_hat: f64,
    pub cluster_size: usize,
    pub cluster_log_mass: f64,
    pub uniform_phase_log_mass: f64,
    pub rounding_iters: usize,
    pub uniform_draws: usize,
    /// `log q`; absent when the cluster covers every configuration.
    pub q_log: Option<f64>,
}

#[derive(Serialize)]
struct EstimateJson {
    log_z_hat: f64,
    cluster_size: usize,
    #[serde(rename = "R")]
    r: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_log_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_log_error: Option<f64>,
}

impl PartitionEstimate {
    pub fn is_exact(&self) -> bool {
        self.q_log.is_none()
    }

    pub fn to_json(&self, exact_log_z: Option<f64>) -> serde_json::Value {
        serde_json::to_value(EstimateJson {
            log_z_hat: self.log_z_hat,
            cluster_size: self.cluster_size,
            r: self.rounding_iters,
            exact_log_z,
            abs_log_error: exact_log_z.map(|z| (z - self.log_z_hat).abs()),
        })
        .expect("estimate serialization cannot fail")
    }
}

/// `R` roundings followed by `R` complement draws.
pub fn estimate_z(inst: &MrfInstance, v: &[f64], frame: &SimplexFrame, r: usize, seed: u64) -> Result<PartitionEstimate> {
    if r == 0 {
        return Err(Error::InvalidParameter("R must be at least 1".into()));
    }
    estimate_z_split(inst, v, frame, r, r, seed)
}

/// Separate counts for the rounding and uniform phases. Either may be zero;
/// with no uniform draws the result is only a lower bound.
pub fn estimate_z_split(
    inst: &MrfInstance,
    v: &[f64],
    frame: &SimplexFrame,
    rounding_iters: usize,
    uniform_draws: usize,
    seed: u64,
) -> Result<PartitionEstimate> {
    let total = inst.configuration_count().ok_or(Error::ConfigurationSpaceOverflow { k: inst.k(), n: inst.n() })?;
    if v.len() != inst.n() * frame.d() || frame.k() != inst.k() {
        return Err(Error::Dimension(format!("{} entries for n = {}, d = {}", v.len(), inst.n(), frame.d())));
    }

    let mut cluster = HashSet::new();
    let mut cluster_mass = LogSumExp::new();
    for t in 0..rounding_iters {
        let mut rng = stream_rng(seed, t as u64);
        let x = round_once(v, frame, &mut rng)?;
        if !cluster.contains(&x) {
            cluster_mass.push(inst.objective(&x));
            cluster.insert(x);
        }
    }
    let cluster_log_mass = cluster_mass.value();
    let remaining = total - cluster.len() as u128;
    if remaining == 0 {
        return Ok(PartitionEstimate {
            log_z_hat: cluster_log_mass,
            cluster_size: cluster.len(),
            cluster_log_mass,
            uniform_phase_log_mass: f64::NEG_INFINITY,
            rounding_iters,
            uniform_draws: 0,
            q_log: None,
        });
    }
    let q_log = -(remaining as f64).ln();

    let (n, k) = (inst.n(), inst.k());
    let mut rng = stream_rng(derive_seed(seed, 1), 0);
    let budget = REJECTION_FACTOR.saturating_mul(uniform_draws as u64);
    let mut attempts = 0u64;
    let mut uniform_mass = LogSumExp::new();
    let mut x = Configuration::uniform(n);
    for _ in 0..uniform_draws {
        loop {
            if attempts == budget {
                return Err(Error::RejectionExhausted(attempts));
            }
            attempts += 1;
            for l in x.labels_mut() {
                *l = below(&mut rng, k as u64) as u16;
            }
            if !cluster.contains(&x) {
                break;
            }
        }
        uniform_mass.push(inst.objective(&x));
    }
    let uniform_phase_log_mass = if uniform_draws == 0 {
        f64::NEG_INFINITY
    } else {
        uniform_mass.value() - (uniform_draws as f64).ln() - q_log
    };
    Ok(PartitionEstimate {
        log_z_hat: logaddexp(cluster_log_mass, uniform_phase_log_mass),
        cluster_size: cluster.len(),
        cluster_log_mass,
        uniform_phase_log_mass,
        rounding_iters,
        uniform_draws,
        q_log: Some(q_log),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnessResult {
    /// `log` of the sample mean of `Ẑ`.
    pub log_mean_z_hat: f64,
    pub exact_log_z: f64,
    /// `(mean(Ẑ/Z) - 1) / (sd(Ẑ/Z) / √trials)`, zero when the spread is
    /// negligible.
    pub z_score: f64,
    pub trials: usize,
}

/// Repeats [`estimate_z`] with `trials` derived seeds and standardizes the
/// deviation of the mean from `exact_log_z`.
pub fn unbiasedness_harness(
    inst: &MrfInstance,
    v: &[f64],
    frame: &SimplexFrame,
    r: usize,
    trials: usize,
    exact_log_z: f64,
    seed: u64,
) -> Result<HarnessResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut ratios = Vec::with_capacity(trials);
    for t in 0..trials {
        let est = estimate_z(inst, v, frame, r, derive_seed(seed, t as u64))?;
        ratios.push((est.log_z_hat - exact_log_z).exp());
    }
    let count = trials as f64;
    let mean = ratios.iter().sum::<f64>() / count;
    let z_score = if trials < 2 {
        0.0
    } else {
        let var = ratios.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0);
        let se = (var / count).sqrt();
        // spread at the level of summation-order rounding counts as none
        if se > 1e-12 * mean.abs().max(1.0) {
            (mean - 1.0) / se
        } else {
            0.0
        }
    };
    Ok(HarnessResult {
        log_mean_z_hat: exact_log_z + mean.ln(),
        exact_log_z,
        z_score,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{enumerate_exact, DEFAULT_CAP};
    use crate::generate::{generate, GenSpec};
    use crate::mixing::{solve_m4, SolverConfig};

    #[test]
    fn full_coverage_is_exact() {
        let inst = generate(&GenSpec::complete(3, 2, 0.3, 4)).unwrap();
        let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        // vectors orthogonal to each other and to the frame reach every labelling
        let frame = crate::simplex::simplex_frame(2, 4).unwrap();
        let v = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let est = estimate_z(&inst, &v, &frame, 500, 1).unwrap();
        assert!(est.is_exact());
        assert_eq!(est.cluster_size, 8);
        assert!((est.log_z_hat - exact.log_z).abs() < 1e-10);
        let h = unbiasedness_harness(&inst, &v, &frame, 500, 3, exact.log_z, 2).unwrap();
        assert_eq!(h.z_score, 0.0);
    }

    #[test]
    fn uniform_target_with_no_roundings() {
        let inst = MrfInstance::symmetrize_and_validate(&vec![vec![0.0; 4]; 4], &vec![vec![0.0; 3]; 4], 3).unwrap();
        let frame = crate::simplex::simplex_frame(3, 3).unwrap();
        let v = vec![1.0, 0.0, 0.0].repeat(4);
        let est = estimate_z_split(&inst, &v, &frame, 0, 10, 3).unwrap();
        assert_eq!(est.cluster_size, 0);
        assert!((est.log_z_hat - 81f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cluster_mass_grows_with_r() {
        let inst = generate(&GenSpec::complete(8, 3, 1.0, 5)).unwrap();
        let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(5)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for r in [1, 10, 100, 400] {
            let est = estimate_z(&inst, &sol.v, &frame, r, 9).unwrap();
            assert!(est.cluster_log_mass >= prev);
            prev = est.cluster_log_mass;
        }
    }

    #[test]
    fn single_trial_mean_is_the_estimate() {
        let inst = generate(&GenSpec::complete(6, 2, 1.0, 6)).unwrap();
        let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(6)).unwrap();
        let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        let h = unbiasedness_harness(&inst, &sol.v, &frame, 20, 1, exact.log_z, 8).unwrap();
        let est = estimate_z(&inst, &sol.v, &frame, 20, derive_seed(8, 0)).unwrap();
        assert!((h.log_mean_z_hat - est.log_z_hat).abs() < 1e-12);
        assert_eq!(h.z_score, 0.0);
    }

    #[test]
    fn large_values_stay_finite() {
        let inst = generate(&GenSpec::complete(20, 2, 10.0, 1)).unwrap();
        let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(1)).unwrap();
        let est = estimate_z(&inst, &sol.v, &frame, 50, 1).unwrap();
        assert!(est.log_z_hat.is_finite());
        assert!(est.log_z_hat > 500.0);
    }

    #[test]
    fn overflow_is_reported() {
        let inst = MrfInstance::symmetrize_and_validate(&vec![vec![0.0; 60]; 60], &vec![vec![0.0; 5]; 60], 5).unwrap();
        let frame = crate::simplex::simplex_frame(5, 4).unwrap();
        let v = vec![1.0, 0.0, 0.0, 0.0].repeat(60);
        assert!(matches!(estimate_z(&inst, &v, &frame, 1, 0), Err(Error::ConfigurationSpaceOverflow { .. })));
    }
}
