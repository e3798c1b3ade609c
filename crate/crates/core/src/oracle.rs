//! Exhaustive verifiers for small instances.
//!
//! Nothing here shares arithmetic with the selectors: pairings and norms are
//! plain left-to-right sums, and every enumeration is counted against a hard
//! cap before it starts.

use alloc::vec::Vec;

use crate::diagnostics::tail_window_start;
use crate::gallery::FunctionSequence;
use crate::selectors::{truncation_split, DiagonalSelection, PairRecord, SelectionRule, SubsequenceSelection};
use crate::{Error, Result};

/// Size limits for the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Atoms accepted by [`exact_ui_modulus`].
    pub max_knapsack_atoms: usize,
    /// Atoms accepted by [`exhaustive_weak_test`].
    pub max_subset_atoms: usize,
    /// Longest prefix `M` enumerated by [`brute_force_sup_theta`].
    pub max_horizon: usize,
    pub max_j: usize,
    /// Hard cap on enumerated subsets or DP cells.
    pub max_evaluations: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_knapsack_atoms: 20, max_subset_atoms: 12, max_horizon: 16, max_j: 8, max_evaluations: 1_000_000 }
    }
}

impl OracleBudget {
    fn charge(&self, needed: u128) -> Result<()> {
        if needed > self.max_evaluations {
            Err(Error::BudgetExceeded { needed, cap: self.max_evaluations })
        } else {
            Ok(())
        }
    }
}

fn choose(m: usize, j: usize) -> u128 {
    (0..j as u128).fold(1u128, |acc, i| acc * (m as u128 - i) / (i + 1))
}

fn plain_pairing(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..w.len() {
        s += w[i] * a[i] * b[i];
    }
    s
}

fn plain_norm(w: &[f64], a: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..w.len() {
        s += w[i] * libm::pow(libm::fabs(a[i]), p);
    }
    libm::pow(s, 1.0 / p)
}

fn centered(seq: &FunctionSequence, n: usize) -> Vec<f64> {
    seq.term(n).values().iter().zip(seq.limit().values()).map(|(a, b)| a - b).collect()
}

/// Largest Cesàro norm over all `j`-element increasing maps into a prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSup {
    /// `max_θ ‖(1/j) Σ_k (u_{idx[θ(k)]} − u)‖_p`.
    pub value: f64,
    /// Positions into the prefix attaining the value (first in
    /// lexicographic order).
    pub witness: Vec<usize>,
    pub evaluated: u128,
}

/// Enumerates every `j`-subset of the positions of `prefix` (term indices,
/// used as given, repeats allowed) and returns the largest centered Cesàro
/// norm in `L^p`.
pub fn brute_force_sup_theta(
    seq: &FunctionSequence,
    prefix: &[usize],
    j: usize,
    p: f64,
    budget: &OracleBudget,
) -> Result<ThetaSup> {
    let m = prefix.len();
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(Error::InvalidExponent(p));
    }
    if m > budget.max_horizon {
        return Err(Error::OutOfRange { what: "oracle prefix length M", value: m, max: budget.max_horizon });
    }
    if j == 0 || j > m.min(budget.max_j) {
        return Err(Error::OutOfRange { what: "oracle Cesàro length j", value: j, max: m.min(budget.max_j) });
    }
    if let Some(&n) = prefix.iter().find(|&&n| n >= seq.len()) {
        return Err(Error::OutOfRange { what: "term index", value: n, max: seq.len() - 1 });
    }
    let evaluated = choose(m, j);
    budget.charge(evaluated)?;

    let w = seq.space().weights();
    let vectors: Vec<Vec<f64>> = prefix.iter().map(|&n| centered(seq, n)).collect();
    let mut theta: Vec<usize> = (0..j).collect();
    let mut best = (-1.0f64, theta.clone());
    let mut mean = alloc::vec![0.0; w.len()];
    loop {
        for (i, slot) in mean.iter_mut().enumerate() {
            let mut s = 0.0;
            for &t in &theta {
                s += vectors[t][i];
            }
            *slot = s / j as f64;
        }
        let v = plain_norm(w, &mean, p);
        if v > best.0 {
            best = (v, theta.clone());
        }
        // next combination in lexicographic order
        let mut i = j;
        while i > 0 && theta[i - 1] == m - j + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        theta[i - 1] += 1;
        for k in i..j {
            theta[k] = theta[k - 1] + 1;
        }
    }
    Ok(ThetaSup { value: best.0, witness: best.1, evaluated })
}

/// Exact `sup_n max_{μ(E) ≤ δ} ∫_E |u_n|` over atom subsets `E`.
///
/// Runs a 0/1 knapsack over integer capacities when every weight is a whole
/// multiple of the smallest one, and full subset enumeration otherwise.
pub fn exact_ui_modulus(seq: &FunctionSequence, delta: f64, budget: &OracleBudget) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NonPositive { what: "δ", value: delta });
    }
    let space = seq.space();
    let atoms = space.atom_count();
    if atoms > budget.max_knapsack_atoms {
        return Err(Error::OutOfRange { what: "oracle atom count", value: atoms, max: budget.max_knapsack_atoms });
    }
    let w = space.weights();
    let unit = space.min_weight();
    let units: Option<Vec<usize>> = w
        .iter()
        .map(|&x| {
            let k = libm::round(x / unit);
            (libm::fabs(k * unit - x) <= 1e-12 * x).then_some(k as usize)
        })
        .collect();

    if let Some(units) = units {
        let capacity = libm::floor(delta / unit * (1.0 + 1e-12));
        let total: usize = units.iter().sum();
        let capacity = if capacity >= total as f64 { total } else { capacity as usize };
        budget.charge(atoms as u128 * (capacity as u128 + 1))?;
        let mut best = 0.0f64;
        for t in seq.terms() {
            let mut dp = alloc::vec![0.0f64; capacity + 1];
            for (i, &k) in units.iter().enumerate() {
                let value = w[i] * libm::fabs(t.values()[i]);
                if k > capacity {
                    continue;
                }
                for c in (k..=capacity).rev() {
                    let with = dp[c - k] + value;
                    if with > dp[c] {
                        dp[c] = with;
                    }
                }
            }
            best = best.max(dp[capacity]);
        }
        return Ok(best);
    }

    budget.charge(1u128 << atoms)?;
    let mut best = 0.0f64;
    for t in seq.terms() {
        for mask in 0u64..(1u64 << atoms) {
            let (mut mass, mut value) = (0.0, 0.0);
            for (i, (wi, v)) in w.iter().zip(t.values()).enumerate() {
                if mask >> i & 1 == 1 {
                    mass += wi;
                    value += wi * libm::fabs(*v);
                }
            }
            if mass <= delta * (1.0 + 1e-12) && value > best {
                best = value;
            }
        }
    }
    Ok(best)
}

/// Set test against every subset of a small space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveWeakReport {
    pub passed: bool,
    pub tol: f64,
    /// Tail maximum of `|∫_A (u_n − u)|` for every `A`, indexed by the
    /// bitmask of its atoms.
    pub tail_max: Vec<f64>,
    /// Bitmask of the first set with the largest tail maximum.
    pub worst_mask: u64,
}

/// Checks `|∫_A (u_n − u)| ≤ tol` over the last quarter of the terms for all
/// `2^d` sets `A`.
pub fn exhaustive_weak_test(seq: &FunctionSequence, tol: f64, budget: &OracleBudget) -> Result<ExhaustiveWeakReport> {
    if !(tol > 0.0) {
        return Err(Error::NonPositive { what: "tolerance", value: tol });
    }
    let atoms = seq.space().atom_count();
    if atoms > budget.max_subset_atoms {
        return Err(Error::OutOfRange { what: "oracle atom count", value: atoms, max: budget.max_subset_atoms });
    }
    budget.charge(1u128 << atoms)?;
    let w = seq.space().weights();
    let start = tail_window_start(seq.len());
    let window: Vec<Vec<f64>> = (start..seq.len()).map(|n| centered(seq, n)).collect();
    let mut tail_max = Vec::with_capacity(1 << atoms);
    let mut worst_mask = 0u64;
    for mask in 0u64..(1u64 << atoms) {
        let mut worst = 0.0f64;
        for y in &window {
            let mut s = 0.0;
            for i in 0..atoms {
                if mask >> i & 1 == 1 {
                    s += w[i] * y[i];
                }
            }
            worst = worst.max(libm::fabs(s));
        }
        if worst > tail_max.get(worst_mask as usize).copied().unwrap_or(f64::NEG_INFINITY) {
            worst_mask = mask;
        }
        tail_max.push(worst);
    }
    let passed = tail_max.iter().all(|&t| t <= tol);
    Ok(ExhaustiveWeakReport { passed, tol, tail_max, worst_mask })
}

/// Result of recomputing a selection's pair log.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub steps: usize,
    /// Largest `|logged − recomputed| / max(1, |recomputed|)` over values and
    /// thresholds.
    pub max_deviation: f64,
    /// Every recomputed value meets its recomputed threshold.
    pub thresholds_hold: bool,
    pub strictly_increasing: bool,
}

impl ReplayReport {
    pub fn within(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.thresholds_hold && self.strictly_increasing
    }

    fn merge(self, other: ReplayReport) -> ReplayReport {
        ReplayReport {
            steps: self.steps + other.steps,
            max_deviation: self.max_deviation.max(other.max_deviation),
            thresholds_hold: self.thresholds_hold && other.thresholds_hold,
            strictly_increasing: self.strictly_increasing && other.strictly_increasing,
        }
    }
}

fn deviation(logged: f64, recomputed: f64) -> f64 {
    libm::fabs(logged - recomputed) / libm::fabs(recomputed).max(1.0)
}

fn signed_pow(s: f64, p: f64) -> f64 {
    let a = libm::pow(libm::fabs(s), p - 1.0);
    if s < 0.0 {
        -a
    } else {
        a
    }
}

fn replay_vectors(
    vectors: &[Vec<f64>],
    log: &[PairRecord],
    recompute: impl Fn(usize) -> PairRecord,
) -> Result<ReplayReport> {
    if log.len() != vectors.len() {
        return Err(Error::LengthMismatch { expected: vectors.len(), found: log.len() });
    }
    let mut report = ReplayReport { steps: log.len(), max_deviation: 0.0, thresholds_hold: true, strictly_increasing: true };
    for (j, logged) in log.iter().enumerate() {
        let fresh = recompute(j);
        report.max_deviation =
            report.max_deviation.max(deviation(logged.value, fresh.value)).max(deviation(logged.threshold, fresh.threshold));
        report.thresholds_hold &= fresh.value <= fresh.threshold;
    }
    Ok(report)
}

/// Recomputes every logged statistic of a selection from the sequence alone.
/// Szlenk selections recompute their truncation first. Diagonal selections
/// go through [`replay_diagonal`].
pub fn replay_pair_log(seq: &FunctionSequence, sel: &SubsequenceSelection) -> Result<ReplayReport> {
    if let Some(&n) = sel.indices.iter().find(|&&n| n >= seq.len()) {
        return Err(Error::OutOfRange { what: "term index", value: n, max: seq.len() - 1 });
    }
    let w = seq.space().weights();
    let vectors: Vec<Vec<f64>> = match sel.rule {
        SelectionRule::SzlenkEpsilon { epsilon } => {
            let split = truncation_split(seq, epsilon)?;
            let wl = split.w.values();
            sel.indices
                .iter()
                .map(|&n| {
                    let y = centered(seq, n);
                    let a = split.truncation_sets[n].mask();
                    let x0 = split.x0.mask();
                    (0..w.len()).map(|i| if x0[i] && !a[i] { y[i] - wl[i] } else { -wl[i] }).collect()
                })
                .collect()
        }
        SelectionRule::DiagonalExtract => return Err(Error::NotReplayable("diagonal selections replay per stage")),
        _ => sel.indices.iter().map(|&n| centered(seq, n)).collect(),
    };
    let partial = |j: usize| {
        let mut s = alloc::vec![0.0; w.len()];
        for x in &vectors[..j] {
            for (a, b) in s.iter_mut().zip(x) {
                *a += b;
            }
        }
        s
    };
    let mut report = match sel.rule {
        SelectionRule::HilbertGreedy | SelectionRule::SzlenkEpsilon { .. } => {
            replay_vectors(&vectors, &sel.pair_log, |j| {
                if j == 0 {
                    return PairRecord { value: 0.0, threshold: 0.5 };
                }
                let value = (0..j).map(|k| libm::fabs(plain_pairing(w, &vectors[k], &vectors[j]))).fold(0.0, f64::max);
                PairRecord { value, threshold: 1.0 / (j as f64 + 2.0) }
            })?
        }
        SelectionRule::BanachSaksLp { p } => replay_vectors(&vectors, &sel.pair_log, |j| {
            if j == 0 {
                return PairRecord { value: 0.0, threshold: 1.0 };
            }
            let g: Vec<f64> = partial(j).iter().map(|&s| signed_pow(s, p)).collect();
            PairRecord { value: plain_pairing(w, &g, &vectors[j]), threshold: 1.0 }
        })?,
        SelectionRule::Okada { p } => replay_vectors(&vectors, &sel.pair_log, |j| {
            if j == 0 {
                return PairRecord { value: 0.0, threshold: 1.0 };
            }
            let s = partial(j);
            let norm = plain_norm(w, &s, p);
            let value = if norm == 0.0 {
                0.0
            } else {
                let scale = libm::pow(norm, 2.0 - p);
                let phi: Vec<f64> = s.iter().map(|&x| scale * signed_pow(x, p)).collect();
                libm::fabs(plain_pairing(w, &phi, &vectors[j]))
            };
            PairRecord { value, threshold: 1.0 }
        })?,
        SelectionRule::DiagonalExtract => unreachable!(),
    };
    report.strictly_increasing = sel.indices.windows(2).all(|p| p[0] < p[1]);
    Ok(report)
}

/// Replays every stage of a diagonal extraction on its own candidate
/// subsequence and checks that the diagonal log copies the stage logs.
pub fn replay_diagonal(seq: &FunctionSequence, diag: &DiagonalSelection) -> Result<ReplayReport> {
    let sel = &diag.selection.selection;
    let mut report = ReplayReport {
        steps: 0,
        max_deviation: 0.0,
        thresholds_hold: true,
        strictly_increasing: sel.indices.windows(2).all(|p| p[0] < p[1]),
    };
    for (j, level) in diag.levels.iter().enumerate() {
        let sub = seq.subsequence(&level.members)?;
        let stage = replay_pair_log(&sub, &level.stage.selection.selection)?;
        report = report.merge(stage);
        let logged = sel.pair_log[j];
        let own = level.stage.selection.selection.pair_log[j];
        report.max_deviation =
            report.max_deviation.max(deviation(logged.value, own.value)).max(deviation(logged.threshold, own.threshold));
        report.strictly_increasing &= sel.indices[j] == level.indices[j];
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_orthonormal_counting, make_rademacher, make_spike};
    use crate::measure::{Density, MeasureSpace};
    use crate::selectors::{hilbert_greedy_select, okada_select};
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn orthonormal_subsets_all_agree() {
        let seq = make_orthonormal_counting(6).unwrap();
        let prefix: Vec<usize> = (0..6).collect();
        let s = brute_force_sup_theta(&seq, &prefix, 3, 2.0, &OracleBudget::default()).unwrap();
        assert!((s.value * s.value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.evaluated, 20);
    }

    #[test]
    fn repeated_vector_dominates() {
        let seq = make_orthonormal_counting(6).unwrap();
        let prefix = [0, 1, 2, 2, 3, 2];
        let s = brute_force_sup_theta(&seq, &prefix, 3, 2.0, &OracleBudget::default()).unwrap();
        assert_eq!(s.witness, vec![2, 3, 5]);
        assert!(s.value > 1.0 / libm::sqrt(3.0));
    }

    #[test]
    fn budget_is_enforced() {
        let seq = make_orthonormal_counting(16).unwrap();
        let prefix: Vec<usize> = (0..16).collect();
        let tight = OracleBudget { max_evaluations: 100, ..OracleBudget::default() };
        assert!(matches!(
            brute_force_sup_theta(&seq, &prefix, 8, 2.0, &tight),
            Err(Error::BudgetExceeded { needed: 12870, cap: 100 })
        ));
    }

    #[test]
    fn spike_modulus_is_one() {
        let seq = make_spike(4, 4).unwrap();
        assert_eq!(exact_ui_modulus(&seq, 0.125, &OracleBudget::default()).unwrap(), 1.0);
    }

    #[test]
    fn knapsack_and_enumeration() {
        let vals = vec![4.0, -1.0, 2.0, 3.0, -5.0];
        let grid = vec![0.3, 0.2, 0.2, 0.2, 0.1];
        let uneven = vec![0.3, 0.2, 0.25, 0.15, 0.1 * core::f64::consts::SQRT_2];
        // best sets: {0, 4} in both cases
        for (weights, expected) in [(grid, 1.7), (uneven, 1.2 + 0.5 * core::f64::consts::SQRT_2)] {
            let s = Arc::new(MeasureSpace::new(weights).unwrap());
            let u = Density::new(s.clone(), vals.clone()).unwrap();
            let seq = FunctionSequence::new("k", vec![u], Density::zeros(s), 1.0, 10.0).unwrap();
            let v = exact_ui_modulus(&seq, 0.45, &OracleBudget::default()).unwrap();
            assert!((v - expected).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn constant_one_fails_on_full_set() {
        let s = Arc::new(MeasureSpace::new(vec![0.25; 4]).unwrap());
        let one = Density::constant(s.clone(), 1.0).unwrap();
        let seq = FunctionSequence::new("one", vec![one; 4], Density::zeros(s), 1.0, 1.0).unwrap();
        let r = exhaustive_weak_test(&seq, 0.5, &OracleBudget::default()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_mask, 0b1111);
        assert_eq!(r.tail_max[0b1111], 1.0);
    }

    #[test]
    fn logs_replay() {
        let seq = make_rademacher(8, 8).unwrap();
        let h = hilbert_greedy_select(&seq, seq.limit(), 8).unwrap();
        assert!(replay_pair_log(&seq, &h.selection).unwrap().within(1e-12));
        let o = okada_select(&seq, 3.0, 8).unwrap();
        assert!(replay_pair_log(&seq, &o.selection).unwrap().within(1e-12));
    }
}
