//! Dunford-Pettis diagnostics: the uniform-integrability modulus, the
//! tightness tail along the exhaustion, and the indicator-set test for weak
//! convergence.
//!
//! All verdicts are finite-horizon evidence. "Convergence" of a profile means
//! its maximum over the last quarter of the horizon is below tolerance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::gallery::FunctionSequence;
use crate::measure::{neumaier_sum, AtomSet, MeasureSpace};
use crate::{Error, FailedCondition, Result};

/// Outcome of a [`dunford_pettis_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    WeaklyCompatible,
    UiFailure,
    TightnessFailure,
    SetTestFailure,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::WeaklyCompatible => "weakly-compatible",
            Verdict::UiFailure => "UI-failure",
            Verdict::TightnessFailure => "tightness-failure",
            Verdict::SetTestFailure => "set-test-failure",
        }
    }

    /// The Dunford-Pettis condition a failing verdict refutes.
    pub fn failed_condition(&self) -> Option<FailedCondition> {
        match self {
            Verdict::WeaklyCompatible => None,
            Verdict::UiFailure => Some(FailedCondition::UniformIntegrability),
            Verdict::TightnessFailure => Some(FailedCondition::Tightness),
            Verdict::SetTestFailure => Some(FailedCondition::SetTest),
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A labelled indicator set used by the weak-convergence test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub label: String,
    pub atoms: AtomSet,
}

impl TestSet {
    pub fn new(label: impl Into<String>, atoms: AtomSet) -> Self {
        Self { label: label.into(), atoms }
    }
}

/// Dyadic intervals `[a 2^-l, (a+1) 2^-l)` for `l = 0..=max_level` on a
/// dyadic grid of `2^grid` atoms.
pub fn dyadic_test_sets(space: &MeasureSpace, grid: u32, max_level: u32) -> Result<Vec<TestSet>> {
    if space.atom_count() != 1usize << grid {
        return Err(Error::LengthMismatch { expected: 1usize << grid, found: space.atom_count() });
    }
    if max_level > grid {
        return Err(Error::OutOfRange { what: "dyadic test level", value: max_level as usize, max: grid as usize });
    }
    let mut sets = Vec::new();
    for level in 0..=max_level {
        let width = 1usize << (grid - level);
        for a in 0..(1usize << level) {
            let atoms = AtomSet::range(space, a * width, (a + 1) * width)?;
            sets.push(TestSet::new(format!("dyadic[{a}/2^{level},{}/2^{level})", a + 1), atoms));
        }
    }
    Ok(sets)
}

/// Exhaustion prefixes `E_1, …, E_n`.
pub fn prefix_test_sets(space: &MeasureSpace) -> Vec<TestSet> {
    (1..=space.atom_count())
        .map(|k| TestSet::new(format!("prefix[{k}]"), AtomSet::exhaustion_prefix(space, k).expect("k in range")))
        .collect()
}

pub fn singleton_test_sets(space: &MeasureSpace) -> Vec<TestSet> {
    (0..space.atom_count())
        .map(|i| TestSet::new(format!("atom[{i}]"), AtomSet::new(space, [i]).expect("atom in range")))
        .collect()
}

/// First index of the last quarter of a horizon of `len` terms.
pub fn tail_window_start(len: usize) -> usize {
    len - len.div_ceil(4).max(1).min(len)
}

/// Fractional knapsack bound on `sup_{μ(E) ≤ δ} ∫_E |u|` for one term.
pub(crate) fn fractional_ui_term(weights: &[f64], values: &[f64], delta: f64) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
    order.sort_by(|&a, &b| libm::fabs(values[b]).total_cmp(&libm::fabs(values[a])).then(a.cmp(&b)));
    let mut budget = delta;
    let mut parts = Vec::with_capacity(order.len());
    for i in order {
        if budget <= 0.0 {
            break;
        }
        let w = weights[i];
        let a = libm::fabs(values[i]);
        if w <= budget {
            parts.push(w * a);
            budget -= w;
        } else {
            parts.push(budget * a);
            budget = 0.0;
        }
    }
    neumaier_sum(parts)
}

/// Upper bound `ω(δ)` on `sup_n sup_{μ(E) ≤ δ} ∫_E |u_n|`, from the
/// fractional relaxation: atoms sorted by `|u_n|` fill the budget, the
/// boundary atom prorated. Exact when the budget is consumed by whole atoms.
pub fn ui_modulus(seq: &FunctionSequence, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NonPositive { what: "δ", value: delta });
    }
    let w = seq.space().weights();
    Ok(seq.terms().iter().map(|t| fractional_ui_term(w, t.values(), delta)).fold(0.0, f64::max))
}

/// `∫_{X∖E_k} |u|` for every `k = 0..=atoms`, accumulated backwards along
/// the exhaustion. May differ from [`tightness_tail`] in the last ulp.
pub(crate) fn tail_profile(space: &MeasureSpace, values: &[f64]) -> Vec<f64> {
    let order = space.exhaustion_order();
    let n = order.len();
    let mut tails = alloc::vec![0.0; n + 1];
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in (0..n).rev() {
        let atom = order[k];
        let x = space.weight(atom) * libm::fabs(values[atom]);
        let t = sum + x;
        if libm::fabs(sum) >= x {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        tails[k] = sum + comp;
    }
    tails
}

/// `τ(k) = sup_n ∫_{X∖E_k} |u_n|` with `E_k` the first `k` atoms of the
/// exhaustion.
pub fn tightness_tail(seq: &FunctionSequence, k: usize) -> Result<f64> {
    let space = seq.space();
    let atoms = space.atom_count();
    if k > atoms {
        return Err(Error::OutOfRange { what: "exhaustion size k", value: k, max: atoms });
    }
    let tail = &space.exhaustion_order()[k..];
    Ok(seq
        .terms()
        .iter()
        .map(|t| neumaier_sum(tail.iter().map(|&i| space.weight(i) * libm::fabs(t.values()[i]))))
        .fold(0.0, f64::max))
}

/// Deviation profile of one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetDeviation {
    pub label: String,
    /// `d_n(A) = |∫_A (u_n − u)|` for every term.
    pub profile: Vec<f64>,
    /// Maximum of the profile over the last quarter of the horizon.
    pub tail_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakTestReport {
    pub passed: bool,
    pub tol: f64,
    pub sets: Vec<SetDeviation>,
    /// Index into `sets` with the largest tail deviation (first on ties).
    pub worst: usize,
}

impl WeakTestReport {
    pub fn worst_set(&self) -> &SetDeviation {
        &self.sets[self.worst]
    }
}

pub(crate) fn set_profile(seq: &FunctionSequence, set: &AtomSet) -> Vec<f64> {
    let w = seq.space().weights();
    let limit = seq.limit().values();
    seq.terms()
        .iter()
        .map(|t| {
            let v = t.values();
            libm::fabs(neumaier_sum(set.members().iter().map(|&i| w[i] * (v[i] - limit[i]))))
        })
        .collect()
}

/// Checks `∫_A u_n → ∫_A u` on each set of the family against the declared
/// limit.
pub fn weak_null_test(seq: &FunctionSequence, sets: &[TestSet], tol: f64) -> Result<WeakTestReport> {
    if sets.is_empty() {
        return Err(Error::EmptyFamily("test set family"));
    }
    if !(tol > 0.0) {
        return Err(Error::NonPositive { what: "tolerance", value: tol });
    }
    let atoms = seq.space().atom_count();
    let start = tail_window_start(seq.len());
    let mut out = Vec::with_capacity(sets.len());
    for s in sets {
        if let Some(&index) = s.atoms.members().last() {
            if index >= atoms {
                return Err(Error::InvalidAtom { index, atom_count: atoms });
            }
        }
        let profile = set_profile(seq, &s.atoms);
        let tail_max = profile[start..].iter().copied().fold(0.0, f64::max);
        out.push(SetDeviation { label: s.label.clone(), profile, tail_max });
    }
    let mut worst = 0;
    for (i, s) in out.iter().enumerate() {
        if s.tail_max > out[worst].tail_max {
            worst = i;
        }
    }
    let passed = out.iter().all(|s| s.tail_max <= tol);
    Ok(WeakTestReport { passed, tol, sets: out, worst })
}

/// Collected diagnostics for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DPReport {
    pub label: String,
    /// `sup_n ‖u_n‖_1`.
    pub norm_bound: f64,
    /// `(δ, ω(δ))`, δ ascending.
    pub ui_samples: Vec<(f64, f64)>,
    /// `(k, τ(k))`, k ascending.
    pub tight_samples: Vec<(usize, f64)>,
    pub set_test: WeakTestReport,
    pub tol: f64,
    pub verdict: Verdict,
}

impl DPReport {
    /// Verdicts reflect the finite data only; they never prove weak
    /// compactness.
    pub const ADVISORY: &'static str =
        "finite-horizon evidence: consistency with bounded + uniformly integrable + tight, not a proof of weak compactness";
}

/// Runs all three diagnostics. The verdict checks, in order: UI failure
/// (`min ω` over the δ-grid above `tol`), tightness failure (`τ` at the
/// largest `k` above `tol`), set-test failure.
pub fn dunford_pettis_report(
    seq: &FunctionSequence,
    deltas: &[f64],
    ks: &[usize],
    sets: &[TestSet],
    tol: f64,
) -> Result<DPReport> {
    if deltas.is_empty() {
        return Err(Error::EmptyFamily("δ grid"));
    }
    if ks.is_empty() {
        return Err(Error::EmptyFamily("k grid"));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();

    let set_test = weak_null_test(seq, sets, tol)?;
    let ui_samples = deltas.iter().map(|&d| ui_modulus(seq, d).map(|w| (d, w))).collect::<Result<Vec<_>>>()?;
    let tight_samples = ks.iter().map(|&k| tightness_tail(seq, k).map(|t| (k, t))).collect::<Result<Vec<_>>>()?;
    let w = seq.space().weights();
    let norm_bound = seq
        .terms()
        .iter()
        .map(|t| neumaier_sum(t.values().iter().zip(w).map(|(v, w)| w * libm::fabs(*v))))
        .fold(0.0, f64::max);

    let min_ui = ui_samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let last_tail = tight_samples.last().map(|s| s.1).unwrap_or(0.0);
    let verdict = if min_ui > tol {
        Verdict::UiFailure
    } else if last_tail > tol {
        Verdict::TightnessFailure
    } else if !set_test.passed {
        Verdict::SetTestFailure
    } else {
        Verdict::WeaklyCompatible
    };
    Ok(DPReport { label: seq.label().into(), norm_bound, ui_samples, tight_samples, set_test, tol, verdict })
}
