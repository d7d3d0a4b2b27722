//! Annealed importance sampling over `p_β(x) ∝ (1/kⁿ)^{1-β} e^{β f(x)}`
//! with Gibbs transitions, tracking the best configuration it visits.

use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::LogSumExp;
use crate::mrf::{Configuration, MrfInstance};
use crate::rng::{below, stream_rng, unit_f64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AisConfig {
    /// Number of temperatures `K`.
    #[serde(rename = "K")]
    pub temperatures: usize,
    pub num_cycles: usize,
    pub num_samples: usize,
    pub seed: u64,
}

impl AisConfig {
    /// `(K, cycles, samples) = (25, 1, 100)`.
    pub fn binary_default(seed: u64) -> Self {
        Self {
            temperatures: 25,
            num_cycles: 1,
            num_samples: 100,
            seed,
        }
    }

    /// `(K, cycles, samples) = (3, 1, 100)`.
    pub fn multiclass_default(seed: u64) -> Self {
        Self {
            temperatures: 3,
            ..Self::binary_default(seed)
        }
    }

    /// Picks the binary or multi-class defaults by `k`.
    pub fn default_for(k: usize, seed: u64) -> Self {
        if k == 2 {
            Self::binary_default(seed)
        } else {
            Self::multiclass_default(seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.temperatures == 0 || self.num_samples == 0 {
            return Err(Error::InvalidParameter(format!(
                "AIS needs K >= 1 and num_samples >= 1, got K = {}, num_samples = {}",
                self.temperatures, self.num_samples
            )));
        }
        Ok(())
    }
}

/// One Gibbs update of every coordinate in order, `cycles` times, at
/// inverse temperature `beta`. `f` is kept equal to `f(x)` up to rounding.
pub(crate) fn gibbs_in_place<R, V>(inst: &MrfInstance, x: &mut [u16], f: &mut f64, beta: f64, cycles: usize, rng: &mut R, mut visit: V)
where
    R: RngCore + ?Sized,
    V: FnMut(&[u16], f64),
{
    let k = inst.k();
    let mut scores = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for _ in 0..cycles {
        for i in 0..x.len() {
            let old = x[i] as usize;
            let new = if beta == 0.0 {
                below(rng, k as u64) as usize
            } else {
                inst.conditional_scores(x, i, &mut scores);
                let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for (w, s) in weights.iter_mut().zip(&scores) {
                    *w = (beta * (s - top)).exp();
                    total += *w;
                }
                let mut u = unit_f64(rng) * total;
                let mut pick = k - 1;
                for (l, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = l;
                        break;
                    }
                    u -= w;
                }
                *f += scores[pick] - scores[old];
                pick
            };
            if beta == 0.0 && new != old {
                *f += inst.flip_delta(x, i, new as u16);
            }
            x[i] = new as u16;
            visit(x, *f);
        }
    }
}

/// `cycles` Gibbs sweeps at inverse temperature `beta` starting from `x`.
pub fn gibbs_sweep<R: RngCore + ?Sized>(inst: &MrfInstance, x: &Configuration, beta: f64, cycles: usize, rng: &mut R) -> Result<Configuration> {
    inst.check_configuration(x)?;
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
    }
    let mut labels = x.labels().to_vec();
    let mut f = 0.0;
    gibbs_in_place(inst, &mut labels, &mut f, beta, cycles, rng, |_, _| {});
    Ok(Configuration::from_raw(labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub time: f64,
    pub best_f: f64,
    pub log_z_partial: f64,
}

#[derive(Debug, Clone)]
pub struct AisResult {
    pub log_z_hat: f64,
    pub best_config: Configuration,
    pub best_value: f64,
    pub wall_time: f64,
    /// `(seconds, best f)` at every improvement of the best configuration.
    pub trace: Vec<(f64, f64)>,
    /// One record after each completed sample.
    pub checkpoints: Vec<Checkpoint>,
    pub log_weights: Vec<f64>,
}

impl AisResult {
    pub fn checkpoints_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checkpoints {
            w.serialize(c)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Runs `num_samples` independent annealing chains on a linear schedule
/// `β_j = j/K`. Chain `s` draws from stream `s` of the seed.
pub fn ais_estimate(inst: &MrfInstance, cfg: &AisConfig) -> Result<AisResult> {
    cfg.validate()?;
    let start = Instant::now();
    let n = inst.n();
    let k = inst.k();
    let log_count = inst.log_configuration_count();
    let kk = cfg.temperatures as f64;

    let mut best = vec![0u16; n];
    let mut best_f = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut checkpoints = Vec::with_capacity(cfg.num_samples);
    let mut log_weights = Vec::with_capacity(cfg.num_samples);
    let mut acc = LogSumExp::new();
    let mut x = vec![0u16; n];

    for s in 0..cfg.num_samples {
        let mut rng = stream_rng(cfg.seed, s as u64);
        for l in x.iter_mut() {
            *l = below(&mut rng, k as u64) as u16;
        }
        let mut f = inst.objective_labels(&x);
        let mut track = |x: &[u16], f: f64| {
            if f > best_f {
                best_f = f;
                best.copy_from_slice(x);
                trace.push((start.elapsed().as_secs_f64(), f));
            }
        };
        track(&x, f);
        let mut log_w = 0.0;
        for j in 1..=cfg.temperatures {
            let delta = (j as f64 - (j - 1) as f64) / kk;
            log_w += delta * (f + log_count);
            gibbs_in_place(inst, &mut x, &mut f, j as f64 / kk, cfg.num_cycles, &mut rng, &mut track);
        }
        log_weights.push(log_w);
        acc.push(log_w);
        checkpoints.push(Checkpoint {
            time: start.elapsed().as_secs_f64(),
            best_f,
            log_z_partial: acc.value() - ((s + 1) as f64).ln(),
        });
    }
    let best_config = Configuration::from_raw(best);
    let best_value = inst.objective(&best_config);
    Ok(AisResult {
        log_z_hat: acc.value() - (cfg.num_samples as f64).ln(),
        best_config,
        best_value,
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        checkpoints,
        log_weights,
    })
}
