//! Brute-force ground truth for small instances.
//!
//! Configurations are visited in mixed-radix order with `x_1` varying
//! fastest. The objective is carried incrementally across single-coordinate
//! changes and recomputed from scratch whenever a carry reaches coordinate
//! [`RESYNC_DEPTH`], which bounds the accumulated rounding drift.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::LogSumExp;
use crate::mrf::{Configuration, MrfInstance};

/// Default enumeration cap, `2^24` configurations.
pub const DEFAULT_CAP: u128 = 1 << 24;

/// Largest configuration space for which a full table may be requested.
pub const TABLE_CAP: u128 = 1 << 20;

const RESYNC_DEPTH: usize = 3;

/// Exact `log Z`, the mode, and optionally the full `(x, f(x))` table.
#[derive(Debug, Clone)]
pub struct ExactSummary {
    pub log_z: f64,
    pub mode_config: Configuration,
    pub mode_value: f64,
    pub min_value: f64,
    pub configurations: u128,
    pub table: Option<Vec<(Configuration, f64)>>,
}

#[derive(Serialize)]
struct SummaryJson {
    n: usize,
    k: usize,
    configurations: String,
    log_z: f64,
    mode: Vec<usize>,
    mode_value: f64,
    min_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    table_rows: Option<usize>,
}

impl ExactSummary {
    pub fn to_json(&self, inst: &MrfInstance) -> serde_json::Value {
        serde_json::to_value(SummaryJson {
            n: inst.n(),
            k: inst.k(),
            configurations: self.configurations.to_string(),
            log_z: self.log_z,
            mode: self.mode_config.one_based(),
            mode_value: self.mode_value,
            min_value: self.min_value,
            table_rows: self.table.as_ref().map(Vec::len),
        })
        .expect("summary serialization cannot fail")
    }

    /// `configuration,f` rows with one-based labels separated by spaces.
    pub fn table_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["configuration", "f"])?;
        if let Some(table) = &self.table {
            for (x, f) in table {
                let labels: Vec<String> = x.one_based().iter().map(ToString::to_string).collect();
                w.write_record([labels.join(" "), format!("{f:?}")])?;
            }
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn check_cap(inst: &MrfInstance, cap: u128) -> Result<u128> {
    match inst.configuration_count() {
        Some(total) if total <= cap => Ok(total),
        _ => Err(Error::EnumerationCap {
            k: inst.k(),
            n: inst.n(),
            cap,
        }),
    }
}

/// Calls `visit(x, f(x))` for every configuration in enumeration order.
pub fn for_each_configuration<F: FnMut(&[u16], f64)>(inst: &MrfInstance, cap: u128, mut visit: F) -> Result<u128> {
    let total = check_cap(inst, cap)?;
    let n = inst.n();
    let k = inst.k() as u16;
    let mut x = vec![0u16; n];
    let mut f = inst.objective_labels(&x);
    visit(&x, f);
    loop {
        // increment with carry
        let mut pos = 0;
        while pos < n && x[pos] + 1 == k {
            pos += 1;
        }
        if pos == n {
            break;
        }
        if pos >= RESYNC_DEPTH {
            for xi in &mut x[..pos] {
                *xi = 0;
            }
            x[pos] += 1;
            f = inst.objective_labels(&x);
        } else {
            for i in 0..pos {
                f += inst.flip_delta(&x, i, 0);
                x[i] = 0;
            }
            f += inst.flip_delta(&x, pos, x[pos] + 1);
            x[pos] += 1;
        }
        visit(&x, f);
    }
    Ok(total)
}

/// Exact `log Z` and mode by enumeration. Ties for the mode resolve to the
/// lexicographically smallest labelling.
pub fn enumerate_exact(inst: &MrfInstance, cap: u128) -> Result<ExactSummary> {
    enumerate_inner(inst, cap, false)
}

/// As [`enumerate_exact`], also keeping the full table (requires
/// `k^n <= TABLE_CAP`).
pub fn enumerate_exact_with_table(inst: &MrfInstance, cap: u128) -> Result<ExactSummary> {
    enumerate_inner(inst, cap.min(TABLE_CAP), true)
}

fn enumerate_inner(inst: &MrfInstance, cap: u128, keep_table: bool) -> Result<ExactSummary> {
    let mut lse = LogSumExp::new();
    let mut best_x: Vec<u16> = Vec::new();
    let mut best_f = f64::NEG_INFINITY;
    let mut min_f = f64::INFINITY;
    let mut table = keep_table.then(Vec::new);
    let total = for_each_configuration(inst, cap, |x, f| {
        lse.push(f);
        min_f = min_f.min(f);
        let window = 1e-9 * best_f.abs().max(1.0);
        if f > best_f - window {
            let exact = inst.objective_labels(x);
            if exact > best_f || (exact == best_f && x < best_x.as_slice()) {
                best_f = exact;
                best_x.clear();
                best_x.extend_from_slice(x);
            }
        }
        if let Some(t) = table.as_mut() {
            t.push((Configuration::from_raw(x.to_vec()), inst.objective_labels(x)));
        }
    })?;
    Ok(ExactSummary {
        log_z: lse.value(),
        mode_config: Configuration::from_raw(best_x),
        mode_value: best_f,
        min_value: min_f,
        configurations: total,
        table,
    })
}

/// Exact single-variable marginals `p(x_i = l)`, n×k.
pub fn exact_marginals(inst: &MrfInstance, cap: u128) -> Result<Vec<Vec<f64>>> {
    let (n, k) = (inst.n(), inst.k());
    let mut acc = vec![LogSumExp::new(); n * k];
    let mut all = LogSumExp::new();
    for_each_configuration(inst, cap, |x, f| {
        all.push(f);
        for (i, &l) in x.iter().enumerate() {
            acc[i * k + l as usize].push(f);
        }
    })?;
    let log_z = all.value();
    Ok(acc
        .chunks(k)
        .map(|row| row.iter().map(|a| (a.value() - log_z).exp()).collect())
        .collect())
}

/// Probability mass within one `f`-range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBucket {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

/// Splits `[min f, max f]` into `bucket_count` equal-width buckets and
/// returns the normalized probability mass of each, sorted by increasing
/// mass (ties keep `f` order).
pub fn mass_buckets(inst: &MrfInstance, bucket_count: usize, cap: u128) -> Result<Vec<MassBucket>> {
    if bucket_count == 0 {
        return Err(Error::InvalidParameter("bucket count must be positive".into()));
    }
    let summary = enumerate_exact(inst, cap)?;
    let (lo, hi) = (summary.min_value, summary.mode_value);
    let width = (hi - lo) / bucket_count as f64;
    let mut acc = vec![LogSumExp::new(); bucket_count];
    for_each_configuration(inst, cap, |_, f| {
        acc[bucket_index(f, lo, hi, bucket_count)].push(f);
    })?;
    let mut buckets: Vec<MassBucket> = acc
        .iter()
        .enumerate()
        .map(|(b, a)| MassBucket {
            lo: lo + width * b as f64,
            hi: if b + 1 == bucket_count { hi } else { lo + width * (b + 1) as f64 },
            mass: (a.value() - summary.log_z).exp(),
        })
        .collect();
    buckets.sort_by(|a, b| a.mass.total_cmp(&b.mass));
    Ok(buckets)
}

/// A [`MassBucket`] together with the mass of sampled configurations in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveredBucket {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub covered: f64,
}

/// [`mass_buckets`] plus, per bucket, the mass of the distinct `samples`
/// whose `f` falls in it.
pub fn covered_buckets<'a, I>(inst: &MrfInstance, bucket_count: usize, samples: I, cap: u128) -> Result<Vec<CoveredBucket>>
where
    I: IntoIterator<Item = &'a Configuration>,
{
    let buckets = mass_buckets(inst, bucket_count, cap)?;
    let summary = enumerate_exact(inst, cap)?;
    let (lo, hi) = (summary.min_value, summary.mode_value);
    let mut covered = vec![0.0; bucket_count];
    let mut seen = HashSet::new();
    for x in samples {
        if seen.insert(x) {
            let f = inst.objective(x);
            covered[bucket_index(f, lo, hi, bucket_count)] += (f - summary.log_z).exp();
        }
    }
    // buckets are sorted by mass; recover each one's position in f order
    let width = (hi - lo) / bucket_count as f64;
    Ok(buckets
        .into_iter()
        .map(|b| {
            let idx = if width > 0.0 { (((b.lo - lo) / width).round() as usize).min(bucket_count - 1) } else { 0 };
            CoveredBucket {
                lo: b.lo,
                hi: b.hi,
                mass: b.mass,
                covered: covered[idx],
            }
        })
        .collect())
}

fn bucket_index(f: f64, lo: f64, hi: f64, count: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let t = ((f - lo) / (hi - lo) * count as f64).floor();
    (t.max(0.0) as usize).min(count - 1)
}

/// `Σ_{x ∈ samples} p(x)` given the exact `log Z`; duplicates count once.
pub fn mass_covered_with<'a, I>(inst: &MrfInstance, log_z: f64, samples: I) -> f64
where
    I: IntoIterator<Item = &'a Configuration>,
{
    let mut seen = HashSet::new();
    let mut lse = LogSumExp::new();
    for x in samples {
        if seen.insert(x) {
            lse.push(inst.objective(x));
        }
    }
    (lse.value() - log_z).exp().min(1.0)
}

/// Probability mass of a set of configurations under the exact distribution.
pub fn mass_covered<'a, I>(inst: &MrfInstance, samples: I, cap: u128) -> Result<f64>
where
    I: IntoIterator<Item = &'a Configuration>,
{
    let summary = enumerate_exact(inst, cap)?;
    Ok(mass_covered_with(inst, summary.log_z, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GenSpec};
    use crate::logspace::logsumexp;

    fn pair() -> MrfInstance {
        MrfInstance::symmetrize_and_validate(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[vec![0.0; 2], vec![0.0; 2]], 2).unwrap()
    }

    #[test]
    fn single_variable_three_classes() {
        let inst = MrfInstance::symmetrize_and_validate(&[vec![0.0]], &[vec![2.0, -1.0, 0.0]], 3).unwrap();
        let s = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        let want = (3f64.exp() + (-3f64).exp() + (-1f64).exp()).ln();
        assert!((s.log_z - want).abs() < 1e-12);
        assert_eq!(s.mode_config.one_based(), vec![1]);
        assert_eq!(s.mode_value, 3.0);
    }

    #[test]
    fn uniform_instance() {
        let n = 4;
        let inst = MrfInstance::symmetrize_and_validate(&vec![vec![0.0; n]; n], &vec![vec![0.0; 3]; n], 3).unwrap();
        let s = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        assert!((s.log_z - n as f64 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(s.mode_config.one_based(), vec![1; n]);
        let buckets = mass_buckets(&inst, 5, DEFAULT_CAP).unwrap();
        assert_eq!(buckets.iter().filter(|b| b.mass > 0.0).count(), 1);
        assert!((buckets.last().unwrap().mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupled_pair_ties_break_low() {
        let s = enumerate_exact(&pair(), DEFAULT_CAP).unwrap();
        assert_eq!(s.mode_config.one_based(), vec![1, 1]);
        assert_eq!(s.mode_value, 2.0);
        let want = (2.0 * 2f64.exp() + 2.0 * (-2f64).exp()).ln();
        assert!((s.log_z - want).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = generate(&GenSpec::complete(10, 3, 1.0, 0)).unwrap();
        assert!(matches!(enumerate_exact(&inst, 1000), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn streaming_matches_table_and_dominates() {
        let inst = generate(&GenSpec::complete(6, 3, 2.0, 5)).unwrap();
        let s = enumerate_exact_with_table(&inst, DEFAULT_CAP).unwrap();
        let table = s.table.as_ref().unwrap();
        assert_eq!(table.len(), 729);
        let fs: Vec<f64> = table.iter().map(|(_, f)| *f).collect();
        assert!((logsumexp(&fs) - s.log_z).abs() < 1e-10);
        let max = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, s.mode_value);
        for (x, f) in table {
            assert!((inst.objective(x) - f).abs() < 1e-12);
        }
        let csv = String::from_utf8(s.table_csv().unwrap()).unwrap();
        assert_eq!(csv.lines().count(), 730);
    }

    #[test]
    fn mass_accounting() {
        let inst = generate(&GenSpec::complete(5, 3, 1.5, 9)).unwrap();
        let s = enumerate_exact_with_table(&inst, DEFAULT_CAP).unwrap();
        let table = s.table.unwrap();
        let all: Vec<Configuration> = table.iter().map(|(x, _)| x.clone()).collect();
        assert!((mass_covered_with(&inst, s.log_z, &all) - 1.0).abs() < 1e-12);
        assert_eq!(mass_covered_with(&inst, s.log_z, &[]), 0.0);
        let mode = mass_covered_with(&inst, s.log_z, [&s.mode_config]);
        assert!((mode - (s.mode_value - s.log_z).exp()).abs() < 1e-15);
        let buckets = mass_buckets(&inst, 10, DEFAULT_CAP).unwrap();
        assert!((buckets.iter().map(|b| b.mass).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(buckets.windows(2).all(|w| w[0].mass <= w[1].mass));
        let marg = exact_marginals(&inst, DEFAULT_CAP).unwrap();
        for row in &marg {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
