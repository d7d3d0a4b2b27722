//! Pairwise k-class MRF instances and the discrete objective.
//!
//! An instance carries a symmetric coupling matrix `A` (n×n) and a per-class
//! bias matrix `H` (n×k, `H[i][l]` is the bias of variable `i` towards class
//! `l`). The unnormalized log-density of a labelling `x ∈ [k]^n` is
//!
//! ```text
//! f(x) = Σ_i Σ_j A_ij δ̂(x_i, x_j) + Σ_i Σ_l H_il δ̂(x_i, l)
//! ```
//!
//! where `δ̂(a, b)` is `+1` when the labels agree and `-1` otherwise. The
//! double sum runs over all ordered pairs, so the diagonal of `A`
//! contributes the constant `Σ_i A_ii`.
//!
//! Labels are stored zero-based (`0..k`); text output uses one-based labels.

use std::fmt;

use crate::error::{Error, Result};

/// `+1` if the two labels agree, `-1` otherwise.
#[inline]
pub fn delta_hat(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        -1.0
    }
}

/// A labelling of the `n` variables of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<u16>);

impl Configuration {
    /// Builds a configuration from zero-based labels, checking the range.
    pub fn new(labels: Vec<u16>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= k) {
            return Err(Error::LabelOutOfRange {
                label: bad as usize + 1,
                k,
            });
        }
        Ok(Self(labels))
    }

    /// Builds a configuration from one-based labels.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            if l == 0 || l > k {
                return Err(Error::LabelOutOfRange { label: l, k });
            }
            out.push((l - 1) as u16);
        }
        Ok(Self(out))
    }

    pub(crate) fn from_raw(labels: Vec<u16>) -> Self {
        Self(labels)
    }

    /// All-zeros labelling (every variable in class 1).
    pub fn uniform(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn labels(&self) -> &[u16] {
        &self.0
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [u16] {
        &mut self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&l| l as usize + 1).collect()
    }
}

impl fmt::Display for Configuration {
    /// One-based labels joined by commas, e.g. `1,3,2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

/// Pairwise k-class MRF: symmetric couplings `A` and class biases `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfInstance {
    n: usize,
    k: usize,
    a: Vec<f64>,
    h: Vec<f64>,
}

impl MrfInstance {
    /// Validates the raw inputs and stores `A = (raw + rawᵀ) / 2`.
    ///
    /// `raw` is n×n row-major, `h` is n×k row-major.
    pub fn symmetrize_and_validate(raw: &[Vec<f64>], h: &[Vec<f64>], k: usize) -> Result<Self> {
        let n = raw.len();
        if n == 0 {
            return Err(Error::Dimension("instance needs at least one variable".into()));
        }
        if let Some(row) = raw.iter().position(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "coupling row {row} has length {} (expected {n})",
                raw[row].len()
            )));
        }
        if h.len() != n {
            return Err(Error::Dimension(format!("bias matrix has {} rows (expected {n})", h.len())));
        }
        let flat_a: Vec<f64> = raw.iter().flatten().copied().collect();
        let mut flat_h = Vec::with_capacity(n * k);
        for (i, row) in h.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension(format!(
                    "bias row {i} has length {} (expected k = {k})",
                    row.len()
                )));
            }
            flat_h.extend_from_slice(row);
        }
        Self::from_flat(n, k, flat_a, flat_h)
    }

    /// Same as [`symmetrize_and_validate`](Self::symmetrize_and_validate) on
    /// row-major flat buffers.
    pub fn from_flat(n: usize, k: usize, raw: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::ClassCount(k));
        }
        if n == 0 {
            return Err(Error::Dimension("instance needs at least one variable".into()));
        }
        if raw.len() != n * n {
            return Err(Error::Dimension(format!("coupling buffer has {} entries, expected {}", raw.len(), n * n)));
        }
        if h.len() != n * k {
            return Err(Error::Dimension(format!("bias buffer has {} entries, expected {}", h.len(), n * k)));
        }
        if let Some(index) = raw.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "A", index });
        }
        if let Some(index) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "H", index });
        }
        let mut a = raw;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        Ok(Self { n, k, a, h })
    }

    /// Converts a binary model `p(s) ∝ exp(sᵀAs + hᵀs)`, `s ∈ {-1,1}^n`, to
    /// a two-class instance. Class 1 is spin `+1`, class 2 is spin `-1`, and
    /// the bias is split symmetrically as `(h/2, -h/2)`.
    pub fn binary_to_multiclass(a: &[Vec<f64>], h: &[f64]) -> Result<Self> {
        if h.len() != a.len() {
            return Err(Error::Dimension(format!("bias length {} vs {} variables", h.len(), a.len())));
        }
        let split: Vec<Vec<f64>> = h.iter().map(|&hi| vec![0.5 * hi, -0.5 * hi]).collect();
        Self::symmetrize_and_validate(a, &split, 2)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn h(&self, i: usize, l: usize) -> f64 {
        self.h[i * self.k + l]
    }

    /// Row `i` of `A`.
    #[inline]
    pub fn a_row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// Row `i` of `H`.
    #[inline]
    pub fn h_row(&self, i: usize) -> &[f64] {
        &self.h[i * self.k..(i + 1) * self.k]
    }

    pub fn a_flat(&self) -> &[f64] {
        &self.a
    }

    pub fn h_flat(&self) -> &[f64] {
        &self.h
    }

    pub fn a_rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn h_rows(&self) -> Vec<Vec<f64>> {
        self.h.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    /// Number of configurations `k^n`, if it fits in 128 bits.
    pub fn configuration_count(&self) -> Option<u128> {
        (self.k as u128).checked_pow(u32::try_from(self.n).ok()?)
    }

    /// `n · ln k`, the log-size of the configuration space.
    pub fn log_configuration_count(&self) -> f64 {
        self.n as f64 * (self.k as f64).ln()
    }

    /// Checks that `x` labels every variable with a class below `k`.
    pub fn check_configuration(&self, x: &Configuration) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("configuration has {} labels, instance has {} variables", x.len(), self.n)));
        }
        if let Some(&bad) = x.labels().iter().find(|&&l| l as usize >= self.k) {
            return Err(Error::LabelOutOfRange {
                label: bad as usize + 1,
                k: self.k,
            });
        }
        Ok(())
    }

    /// The discrete objective `f(x)`.
    pub fn objective(&self, x: &Configuration) -> f64 {
        self.objective_labels(x.labels())
    }

    pub(crate) fn objective_labels(&self, x: &[u16]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let n = self.n;
        let mut pair = 0.0;
        for i in 0..n {
            let row = self.a_row(i);
            let xi = x[i];
            let mut acc = 0.0;
            for j in (i + 1)..n {
                let w = row[j];
                if x[j] == xi {
                    acc += w;
                } else {
                    acc -= w;
                }
            }
            pair += row[i] + 2.0 * acc;
        }
        let mut bias = 0.0;
        for i in 0..n {
            let hr = self.h_row(i);
            let total: f64 = hr.iter().sum();
            bias += 2.0 * hr[x[i] as usize] - total;
        }
        pair + bias
    }

    /// Scores `s_l` such that `f(x | x_i = l) = s_l + c` for a constant `c`
    /// independent of the label at `i`.
    ///
    /// `s_l = 2 Σ_{j≠i} A_ij δ̂(l, x_j) + Σ_l' H_il' δ̂(l, l') + A_ii`.
    pub fn conditional_scores(&self, x: &[u16], i: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.k);
        out.iter_mut().for_each(|s| *s = 0.0);
        let row = self.a_row(i);
        let mut total = 0.0;
        for (j, (&w, &xj)) in row.iter().zip(x).enumerate() {
            if j != i {
                total += w;
                out[xj as usize] += w;
            }
        }
        let hr = self.h_row(i);
        let hsum: f64 = hr.iter().sum();
        let aii = row[i];
        for (l, s) in out.iter_mut().enumerate() {
            *s = 2.0 * (2.0 * *s - total) + 2.0 * hr[l] - hsum + aii;
        }
    }

    /// `f(x')- f(x)` where `x'` equals `x` except `x'_i = new`.
    pub(crate) fn flip_delta(&self, x: &[u16], i: usize, new: u16) -> f64 {
        let old = x[i];
        if old == new {
            return 0.0;
        }
        let row = self.a_row(i);
        let mut acc = 0.0;
        for (j, (&w, &xj)) in row.iter().zip(x).enumerate() {
            if j == i {
                continue;
            }
            if xj == new {
                acc += w;
            } else if xj == old {
                acc -= w;
            }
        }
        4.0 * acc + 2.0 * (self.h(i, new as usize) - self.h(i, old as usize))
    }

    /// Affine map between the discrete objective and the simplex-embedded
    /// objective `Σ A_ij r_{x_i}ᵀr_{x_j} + Σ_i Σ_l H_il r_{x_i}ᵀr_l`.
    pub fn embedding_map(&self) -> EmbeddingMap {
        let k = self.k as f64;
        let total: f64 = self.a.iter().sum::<f64>() + self.h.iter().sum::<f64>();
        EmbeddingMap {
            scale: 2.0 * (k - 1.0) / k,
            offset: (2.0 / k - 1.0) * total,
        }
    }
}

/// `f(x) = scale · embedded(x) + offset`.
///
/// Follows from `δ̂(a,b) = (2/k)((k-1) r_aᵀr_b + 1) - 1`. For `k = 2` the map
/// is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingMap {
    pub scale: f64,
    pub offset: f64,
}

impl EmbeddingMap {
    pub fn to_discrete(&self, embedded: f64) -> f64 {
        self.scale * embedded + self.offset
    }

    pub fn to_embedded(&self, discrete: f64) -> f64 {
        (discrete - self.offset) / self.scale
    }
}

/// Mean absolute off-diagonal coupling, `(1/(n(n-1))) Σ_{i≠j} |A_ij|`.
pub fn coupling_strength(a: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("coupling strength needs n >= 2, got {n}")));
    }
    if a.len() != n * n {
        return Err(Error::Dimension(format!("{} entries for an {n}x{n} matrix", a.len())));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j].abs();
            }
        }
    }
    Ok(sum / (n * (n - 1)) as f64)
}

impl MrfInstance {
    /// Coupling strength of this instance's `A`.
    pub fn coupling_strength(&self) -> Result<f64> {
        coupling_strength(&self.a, self.n)
    }
}

/// `sᵀAs + hᵀs` for a spin vector `s ∈ {-1, 1}^n`.
pub fn spin_objective(a: &[Vec<f64>], h: &[f64], s: &[i8]) -> f64 {
    let mut total = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            total += w * f64::from(s[i]) * f64::from(s[j]);
        }
        total += h[i] * f64::from(s[i]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_instance() -> MrfInstance {
        MrfInstance::symmetrize_and_validate(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[vec![0.0; 2], vec![0.0; 2]], 2).unwrap()
    }

    #[test]
    fn symmetrizes_raw_couplings() {
        let inst = MrfInstance::symmetrize_and_validate(&[vec![0.0, 2.0], vec![0.0, 0.0]], &[vec![0.0; 2], vec![0.0; 2]], 2).unwrap();
        assert_eq!(inst.a_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let again = MrfInstance::symmetrize_and_validate(&inst.a_rows(), &inst.h_rows(), 2).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn rejects_bad_input() {
        let h = vec![vec![0.0; 2]; 2];
        let nan = MrfInstance::symmetrize_and_validate(&[vec![0.0, f64::NAN], vec![0.0, 0.0]], &h, 2);
        assert!(matches!(nan, Err(Error::NonFinite { what: "A", .. })));
        let ragged = MrfInstance::symmetrize_and_validate(&[vec![0.0, 1.0], vec![0.0]], &h, 2);
        assert!(matches!(ragged, Err(Error::Dimension(_))));
        let k1 = MrfInstance::symmetrize_and_validate(&[vec![0.0]], &[vec![0.0]], 1);
        assert!(matches!(k1, Err(Error::ClassCount(1))));
        let hinf = MrfInstance::symmetrize_and_validate(&[vec![0.0]], &[vec![f64::INFINITY, 0.0]], 2);
        assert!(matches!(hinf, Err(Error::NonFinite { what: "H", .. })));
    }

    #[test]
    fn delta_hat_cases() {
        assert_eq!(delta_hat(3, 3), 1.0);
        assert_eq!(delta_hat(1, 2), -1.0);
        for &a in &[-1i8, 1] {
            for &b in &[-1i8, 1] {
                assert_eq!(delta_hat(a as usize, b as usize), f64::from(a * b));
            }
        }
    }

    #[test]
    fn objective_small_cases() {
        let inst = pair_instance();
        let x11 = Configuration::from_one_based(&[1, 1], 2).unwrap();
        let x12 = Configuration::from_one_based(&[1, 2], 2).unwrap();
        assert_eq!(inst.objective(&x11), 2.0);
        assert_eq!(inst.objective(&x12), -2.0);

        let single = MrfInstance::symmetrize_and_validate(&[vec![0.0]], &[vec![2.0, -1.0, 0.0]], 3).unwrap();
        let f: Vec<f64> = (1..=3)
            .map(|l| single.objective(&Configuration::from_one_based(&[l], 3).unwrap()))
            .collect();
        assert_eq!(f, vec![3.0, -3.0, -1.0]);
    }

    #[test]
    fn binary_conversion_splits_bias() {
        let inst = MrfInstance::binary_to_multiclass(&[vec![0.0]], &[4.0]).unwrap();
        assert_eq!(inst.h_rows(), vec![vec![2.0, -2.0]]);
        let zero = MrfInstance::binary_to_multiclass(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 0.0]).unwrap();
        assert!(zero.h_flat().iter().all(|&v| v == 0.0));

        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let h = [1.0, -1.0];
        let inst = MrfInstance::binary_to_multiclass(&a, &h).unwrap();
        let both_up = Configuration::from_one_based(&[1, 1], 2).unwrap();
        assert_eq!(spin_objective(&a, &h, &[1, 1]), 2.0);
        assert_eq!(inst.objective(&both_up), 2.0);
        assert!(MrfInstance::binary_to_multiclass(&a, &[1.0]).is_err());
    }

    #[test]
    fn coupling_strength_cases() {
        assert_eq!(coupling_strength(&[0.0, 2.0, -2.0, 0.0], 2).unwrap(), 2.0);
        assert_eq!(coupling_strength(&[0.0; 9], 3).unwrap(), 0.0);
        let scaled: Vec<f64> = [0.0, 2.0, -2.0, 0.0].iter().map(|v| -3.0 * v).collect();
        assert_eq!(coupling_strength(&scaled, 2).unwrap(), 6.0);
        assert!(coupling_strength(&[1.0], 1).is_err());
    }

    #[test]
    fn conditional_scores_match_objective_differences() {
        let inst = MrfInstance::symmetrize_and_validate(
            &[vec![0.3, 1.0, -0.5], vec![0.2, -0.1, 0.7], vec![-0.5, 0.4, 0.0]],
            &[vec![0.1, -0.2, 0.3], vec![0.0, 0.5, -0.5], vec![1.0, 0.0, 0.2]],
            3,
        )
        .unwrap();
        let x = vec![0u16, 2, 1];
        let mut scores = vec![0.0; 3];
        for i in 0..3 {
            inst.conditional_scores(&x, i, &mut scores);
            for l in 0..3u16 {
                let mut y = x.clone();
                y[i] = l;
                let lhs = inst.objective_labels(&y) - inst.objective_labels(&x);
                let rhs = scores[l as usize] - scores[x[i] as usize];
                assert!((lhs - rhs).abs() < 1e-12);
                assert!((inst.flip_delta(&x, i, l) - lhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn configuration_display_and_range() {
        let x = Configuration::from_one_based(&[1, 3, 2], 3).unwrap();
        assert_eq!(x.to_string(), "1,3,2");
        assert!(Configuration::from_one_based(&[0], 3).is_err());
        assert!(Configuration::new(vec![3], 3).is_err());
    }
}
