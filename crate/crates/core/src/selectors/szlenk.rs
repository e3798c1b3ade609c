use alloc::format;
use alloc::vec::Vec;

use super::hilbert::{hilbert_bound, hilbert_from_vectors};
use super::{CesaroTrace, PairRecord, Selection, SelectionRule, SubsequenceSelection, TraceQuantity};
use crate::diagnostics::{fractional_ui_term, tail_profile, tail_window_start};
use crate::gallery::FunctionSequence;
use crate::measure::{lp_norm_slice, lp_power_slice, neumaier_sum, AtomSet, Density};
use crate::{Error, FailedCondition, Result};

/// Truncation of a weakly convergent `L^1` family into a small part `v_n`
/// and an `L^2`-bounded remainder supported on `X_0`.
///
/// All parts refer to the centered terms `y_n = u_n − u`. On `X_0`, `v_n`
/// keeps `y_n` where `|y_n| ≥ m0` (the set `A_n`) and vanishes elsewhere;
/// outside `X_0` it equals `y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSplit {
    pub eps: f64,
    pub x0: AtomSet,
    pub x0_measure: f64,
    pub delta: f64,
    /// Fractional bound on `sup_n sup_{μ(E) ≤ δ} ∫_E |y_n|` over `E ⊂ X_0`.
    pub omega: f64,
    /// `sup_n ∫_{X∖X_0} |y_n|`.
    pub outside_tail: f64,
    /// `sup_n ‖y_n‖_1`.
    pub r: f64,
    pub m0: f64,
    pub truncation_sets: Vec<AtomSet>,
    pub truncated: Vec<Density>,
    pub remainders: Vec<Density>,
    /// Estimate of the weak limit of the remainders: minus the mean of
    /// `y_n 1_{A_n}` over the last quarter of the terms.
    pub w: Density,
    pub sup_v_l1: f64,
    pub w_l1: f64,
    /// `sup_n ‖y_n − v_n‖_2²`.
    pub sup_remainder_l2_sq: f64,
    /// `μ(X_0) m0²`.
    pub l2_bound: f64,
}

/// Chooses `X_0`, `δ` and `m0` and splits the centered terms.
///
/// `X_0` is the shortest exhaustion prefix whose complement carries less
/// than `ε/6` of every `|y_n|`; `δ` is the largest dyadic value, not below
/// the smallest atom weight, with fractional modulus on `X_0` below `ε/6`;
/// `m0 = r/δ`, so that `μ(A_n) ≤ r/m0 = δ`.
pub fn truncation_split(seq: &FunctionSequence, eps: f64) -> Result<TruncationSplit> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositive { what: "ε", value: eps });
    }
    if seq.exponent() != 1.0 {
        return Err(Error::InvalidExponent(seq.exponent()));
    }
    let space = seq.space();
    let weights = space.weights();
    let atoms = space.atom_count();
    let limit = seq.limit().values();
    let budget = eps / 6.0;
    let y: Vec<Vec<f64>> =
        seq.terms().iter().map(|t| t.values().iter().zip(limit).map(|(a, b)| a - b).collect()).collect();

    let mut sup_tail = alloc::vec![0.0f64; atoms + 1];
    for v in &y {
        for (s, t) in sup_tail.iter_mut().zip(tail_profile(space, v)) {
            *s = s.max(t);
        }
    }
    let k = (0..=atoms).find(|&k| sup_tail[k] < budget).unwrap_or(atoms);
    let x0 = AtomSet::exhaustion_prefix(space, k)?;
    let x0_measure = x0.measure(space);
    let inside = x0.mask();
    let outside_tail = sup_tail[k];

    let restricted: Vec<Vec<f64>> =
        y.iter().map(|v| v.iter().zip(&inside).map(|(&x, &m)| if m { x } else { 0.0 }).collect()).collect();
    let omega_at = |d: f64| restricted.iter().map(|v| fractional_ui_term(weights, v, d)).fold(0.0, f64::max);
    let floor = space.min_weight();
    let mut delta = 1.0;
    let mut best = f64::INFINITY;
    let omega = loop {
        if delta < floor {
            return Err(Error::DiagnosticsFailed {
                condition: FailedCondition::UniformIntegrability,
                detail: format!(
                    "smallest ω(δ) over dyadic δ ≥ {floor:e} is {best:e}, not below ε/6 = {budget:e}"
                ),
            });
        }
        let om = omega_at(delta);
        if om < budget {
            break om;
        }
        best = best.min(om);
        delta *= 0.5;
    };

    let r = y.iter().map(|v| lp_norm_slice(weights, v, 1.0)).fold(0.0, f64::max);
    let m0 = if r > 0.0 { r / delta } else { 1.0 };

    let mut truncation_sets = Vec::with_capacity(y.len());
    let mut truncated = Vec::with_capacity(y.len());
    let mut remainders = Vec::with_capacity(y.len());
    for (n, v) in y.iter().enumerate() {
        let a = AtomSet::new(space, x0.members().iter().copied().filter(|&i| libm::fabs(v[i]) >= m0))?;
        let mu_a = a.measure(space);
        if mu_a > delta * (1.0 + 1e-12) {
            return Err(Error::DiagnosticsFailed {
                condition: FailedCondition::TruncationBound,
                detail: format!("μ(A_{n}) = {mu_a:e} exceeds δ = {delta:e}"),
            });
        }
        let in_a = a.mask();
        let mut small = alloc::vec![0.0; atoms];
        let mut rest = alloc::vec![0.0; atoms];
        for i in 0..atoms {
            if in_a[i] || !inside[i] {
                small[i] = v[i];
            } else {
                rest[i] = v[i];
            }
        }
        truncation_sets.push(a);
        truncated.push(Density::from_parts(space.clone(), small));
        remainders.push(Density::from_parts(space.clone(), rest));
    }

    let start = tail_window_start(y.len());
    let window = &truncated[start..];
    let inv = 1.0 / window.len() as f64;
    let w_values: Vec<f64> = (0..atoms)
        .map(|i| if inside[i] { -neumaier_sum(window.iter().map(|v| v.values()[i])) * inv } else { 0.0 })
        .collect();
    let w = Density::from_parts(space.clone(), w_values);
    let w_l1 = lp_norm_slice(weights, w.values(), 1.0);

    let sup_v_l1 = truncated.iter().map(|v| lp_norm_slice(weights, v.values(), 1.0)).fold(0.0, f64::max);
    if !(sup_v_l1 < eps / 3.0) {
        return Err(Error::DiagnosticsFailed {
            condition: FailedCondition::TruncationBound,
            detail: format!("sup ‖v_n‖_1 = {sup_v_l1:e} is not below ε/3 = {:e}", eps / 3.0),
        });
    }
    let sup_remainder_l2_sq =
        remainders.iter().map(|v| lp_power_slice(weights, v.values(), 2.0)).fold(0.0, f64::max);
    let l2_bound = x0_measure * m0 * m0;
    if sup_remainder_l2_sq > l2_bound * (1.0 + 1e-12) {
        return Err(Error::DiagnosticsFailed {
            condition: FailedCondition::TruncationBound,
            detail: format!("sup ‖u_n − v_n‖_2² = {sup_remainder_l2_sq:e} exceeds μ(X_0)·m0² = {l2_bound:e}"),
        });
    }

    Ok(TruncationSplit {
        eps,
        x0,
        x0_measure,
        delta,
        omega,
        outside_tail,
        r,
        m0,
        truncation_sets,
        truncated,
        remainders,
        w,
        sup_v_l1,
        w_l1,
        sup_remainder_l2_sq,
        l2_bound,
    })
}

/// Closed-form bound on `‖(1/j) Σ_k (u_{n_θ(k)} − u)‖_1` for every
/// increasing `θ` into a Szlenk selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzlenkCertificate {
    pub eps: f64,
    pub x0_measure: f64,
    /// Largest `‖y_n − v_n − w‖_2` over the candidates.
    pub r2: f64,
    pub sup_v: f64,
    pub w_l1: f64,
    /// Smallest `j` with `μ(X_0)^{1/2} ((r2² + 2)/j)^{1/2} ≤ ε/3`.
    pub j0: usize,
}

impl SzlenkCertificate {
    fn new(eps: f64, x0_measure: f64, r2: f64, sup_v: f64, w_l1: f64) -> Self {
        let mut c = Self { eps, x0_measure, r2, sup_v, w_l1, j0: 1 };
        let target = eps / 3.0;
        let guess = libm::ceil(9.0 * x0_measure * (r2 * r2 + 2.0) / (eps * eps));
        let mut j0 = if guess >= 1.0 { guess as usize } else { 1 };
        while j0 > 1 && c.hilbert_part(j0 - 1) <= target {
            j0 -= 1;
        }
        while c.hilbert_part(j0) > target {
            j0 += 1;
        }
        c.j0 = j0;
        c
    }

    /// `μ(X_0)^{1/2} ((r2² + 2)/j)^{1/2}`.
    pub fn hilbert_part(&self, j: usize) -> f64 {
        libm::sqrt(self.x0_measure) * libm::sqrt(hilbert_bound(self.r2, j))
    }

    /// The full bound at length `j`; below `ε` once `j ≥ j0`.
    pub fn envelope(&self, j: usize) -> f64 {
        self.hilbert_part(j) + self.sup_v + self.w_l1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SzlenkSelection {
    /// Indices into the input sequence; the trace measures
    /// `‖mean_j(u − limit)‖_1` against the certificate envelope.
    pub selection: Selection,
    /// `‖mean_j(y − v − w)‖_2²` against `(r2² + 2)/j`.
    pub remainder_trace: CesaroTrace,
    pub split: TruncationSplit,
    pub certificate: SzlenkCertificate,
}

pub(crate) fn remainder_vectors(split: &TruncationSplit, horizon: usize) -> Vec<Vec<f64>> {
    let w = split.w.values();
    split.remainders[..horizon].iter().map(|x| x.values().iter().zip(w).map(|(a, b)| a - b).collect()).collect()
}

fn l1_trace(seq: &FunctionSequence, indices: &[usize], bound: impl Fn(usize) -> Option<f64>) -> CesaroTrace {
    let limit = seq.limit().values();
    let centered: Vec<Vec<f64>> = indices
        .iter()
        .map(|&n| seq.term(n).values().iter().zip(limit).map(|(a, b)| a - b).collect())
        .collect();
    let refs: Vec<&[f64]> = centered.iter().map(Vec::as_slice).collect();
    CesaroTrace::build(TraceQuantity::L1, seq.space().weights(), &refs, bound)
}

/// Szlenk ε-selection in `L^1`: truncate with [`truncation_split`], then run
/// the greedy Hilbert rule on the remainders minus `w` among the first
/// `horizon` terms.
pub fn szlenk_epsilon_select(seq: &FunctionSequence, eps: f64, horizon: usize) -> Result<SzlenkSelection> {
    if horizon == 0 || horizon > seq.len() {
        return Err(Error::OutOfRange { what: "horizon", value: horizon, max: seq.len() });
    }
    let split = truncation_split(seq, eps)?;
    let vectors = remainder_vectors(&split, horizon);
    let ids: Vec<usize> = (0..horizon).collect();
    let weights = seq.space().weights();
    let rule = SelectionRule::SzlenkEpsilon { epsilon: eps };
    let (hilbert, r2) = hilbert_from_vectors(weights, &vectors, &ids, rule)?;
    let certificate = SzlenkCertificate::new(eps, split.x0_measure, r2, split.sup_v_l1, split.w_l1);
    let mut selection = hilbert.selection;
    selection.j0 = certificate.j0;
    let trace = l1_trace(seq, &selection.indices, |j| Some(certificate.envelope(j)));
    Ok(SzlenkSelection { selection: Selection { selection, trace }, remainder_trace: hilbert.trace, split, certificate })
}

/// The bound `1/ℓ + ℓ r / j` on diagonal Cesàro means past stage `ℓ`, with
/// the `ℓ` burn-in terms each bounded by `r`. It presumes the stage-`ℓ`
/// estimate `1/ℓ` is already in force.
pub fn diagonal_stage_bound(level: usize, r: f64, j: usize) -> f64 {
    1.0 / level as f64 + level as f64 * r / j as f64
}

/// One nested stage of the diagonal construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalLevel {
    pub epsilon: f64,
    /// Original indices of the candidates this stage selected from.
    pub members: Vec<usize>,
    /// Original indices of the stage's selection.
    pub indices: Vec<usize>,
    /// The stage run on `members`, in its own numbering.
    pub stage: SzlenkSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSelection {
    /// Diagonal `n_{j,j}`; its trace bound is the smallest finite bound
    /// assembled from the stage certificates.
    pub selection: Selection,
    pub levels: Vec<DiagonalLevel>,
    pub max_level: usize,
    /// `sup_n ‖u_n − u‖_1` over the horizon.
    pub r: f64,
}

impl DiagonalSelection {
    /// Bound at length `j` from stage `ℓ`: the first `ℓ − 1` diagonal terms
    /// contribute at most `r` each and the rest form a subsequence of stage
    /// `ℓ`, covered by its envelope.
    pub fn finite_bound(&self, level: usize, j: usize) -> f64 {
        finite_stage_bound(&self.levels, self.r, level, j)
    }
}

fn finite_stage_bound(levels: &[DiagonalLevel], r: f64, level: usize, j: usize) -> f64 {
    let m = j + 1 - level;
    let head = (level - 1) as f64 * r / j as f64;
    head + (m as f64 / j as f64) * levels[level - 1].stage.certificate.envelope(m)
}

/// Nested Szlenk selections with `ε = 1/i`, each run on the previous stage's
/// selection, and their diagonal. Stops when a stage returns fewer than `i`
/// indices or exhausts; `max_level` is the number of stages kept.
pub fn diagonal_extract(seq: &FunctionSequence, horizon: usize) -> Result<DiagonalSelection> {
    if horizon == 0 || horizon > seq.len() {
        return Err(Error::OutOfRange { what: "horizon", value: horizon, max: seq.len() });
    }
    let mut levels: Vec<DiagonalLevel> = Vec::new();
    let mut members: Vec<usize> = (0..horizon).collect();
    for i in 1..=horizon {
        let sub = seq.subsequence(&members)?;
        let eps = 1.0 / i as f64;
        let stage = match szlenk_epsilon_select(&sub, eps, sub.len()) {
            Ok(s) => s,
            Err(Error::SelectionExhausted { .. }) if i > 1 => break,
            Err(e) => return Err(e),
        };
        let indices: Vec<usize> = stage.selection.selection.indices.iter().map(|&k| members[k]).collect();
        if indices.len() < i {
            break;
        }
        let next = indices.clone();
        levels.push(DiagonalLevel { epsilon: eps, members, indices, stage });
        members = next;
    }
    let max_level = levels.len();
    let indices: Vec<usize> = levels.iter().enumerate().map(|(j, l)| l.indices[j]).collect();
    let pair_log: Vec<PairRecord> =
        levels.iter().enumerate().map(|(j, l)| l.stage.selection.selection.pair_log[j]).collect();

    let weights = seq.space().weights();
    let limit = seq.limit().values();
    let r = seq.terms()[..horizon]
        .iter()
        .map(|t| neumaier_sum(t.values().iter().zip(limit).zip(weights).map(|((a, b), w)| w * libm::fabs(a - b))))
        .fold(0.0, f64::max);
    let trace = l1_trace(seq, &indices, |j| {
        (1..=j.min(max_level)).map(|l| finite_stage_bound(&levels, r, l, j)).reduce(f64::min)
    });
    let selection = SubsequenceSelection { indices, rule: SelectionRule::DiagonalExtract, pair_log, j0: 1 };
    Ok(DiagonalSelection { selection: Selection { selection, trace }, levels, max_level, r })
}
