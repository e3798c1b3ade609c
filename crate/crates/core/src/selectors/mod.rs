//! Greedy subsequence selection with checkable certificates.
//!
//! Every selector subtracts a weak limit first, then walks the candidate
//! terms in order and takes the smallest admissible index at each step. The
//! pairing value that made each index admissible is logged so the choice can
//! be replayed from scratch, and a [`CesaroTrace`] pairs the measured Cesàro
//! quantity with the closed-form bound of the corresponding argument.

use alloc::vec::Vec;

use crate::measure::{lp_norm_slice, lp_power_slice, neumaier_sum};

mod duality;
mod hilbert;
mod lp;
mod szlenk;

pub use duality::{duality_map, okada_select, Decay, DualityVector};
pub use hilbert::{hilbert_bound, hilbert_greedy_select};
pub use lp::{banach_saks_lp_select, binomial, lp_bound, zeta, zeta_constant, LpConstants, ZetaEvidence};
pub use szlenk::{
    diagonal_extract, diagonal_stage_bound, szlenk_epsilon_select, truncation_split, DiagonalLevel,
    DiagonalSelection, SzlenkCertificate, SzlenkSelection, TruncationSplit,
};

/// Which procedure produced a selection, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// `|(x_{n_k}, x_{n_j})| ≤ 1/(j+1)` for every earlier `k`.
    HilbertGreedy,
    /// Hilbert rule applied to truncated remainders, tolerance `epsilon`.
    SzlenkEpsilon { epsilon: f64 },
    /// Diagonal of nested ε = 1/i selections.
    DiagonalExtract,
    /// One-sided `∫ |S_{j-1}|^{p-2} S_{j-1} u_{n_j} ≤ 1`.
    BanachSaksLp { p: f64 },
    /// Two-sided `|⟨φ(S_{j-1}), x_{n_j}⟩| ≤ 1` with the duality map φ.
    Okada { p: f64 },
}

impl SelectionRule {
    pub fn tag(&self) -> &'static str {
        match self {
            SelectionRule::HilbertGreedy => "hilbert",
            SelectionRule::SzlenkEpsilon { .. } => "szlenk",
            SelectionRule::DiagonalExtract => "diagonal",
            SelectionRule::BanachSaksLp { .. } => "lp",
            SelectionRule::Okada { .. } => "okada",
        }
    }

    /// Name of the result whose proof the selector follows.
    pub fn theorem(&self) -> &'static str {
        match self {
            SelectionRule::HilbertGreedy => "uniform Banach-Saks property of Hilbert spaces",
            SelectionRule::SzlenkEpsilon { .. } => "Szlenk epsilon-uniform Cesaro estimate in L^1",
            SelectionRule::DiagonalExtract => "uniform weak Banach-Saks property of L^1 (diagonal extraction)",
            SelectionRule::BanachSaksLp { .. } => "Banach-Saks theorem for L^p, 1<p<inf",
            SelectionRule::Okada { .. } => "Okada: uniformly convex dual implies Banach-Saks",
        }
    }
}

/// Logged admissibility statistic of one step and the threshold it met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub value: f64,
    pub threshold: f64,
}

impl PairRecord {
    pub fn holds(&self) -> bool {
        self.value <= self.threshold
    }
}

/// Strictly increasing term indices `n_1 < n_2 < …` (0-based) and the
/// per-step log.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsequenceSelection {
    pub indices: Vec<usize>,
    pub rule: SelectionRule,
    pub pair_log: Vec<PairRecord>,
    /// First `j` (1-based) from which the certificate guarantee applies.
    pub j0: usize,
}

impl SubsequenceSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.indices.windows(2).all(|w| w[0] < w[1])
    }
}

/// The Cesàro quantity a trace measures; each selector uses the quantity its
/// bound is stated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceQuantity {
    /// `‖S_j / j‖_2^2`.
    SquaredL2,
    /// `‖S_j / j‖_1`.
    L1,
    /// `‖S_j / j‖_p^p`.
    LpPower(f64),
    /// `‖S_j / j‖_p`.
    LpNorm(f64),
}

impl TraceQuantity {
    pub fn describe(&self) -> &'static str {
        match self {
            TraceQuantity::SquaredL2 => "squared L2 norm of the Cesaro mean",
            TraceQuantity::L1 => "L1 norm of the Cesaro mean",
            TraceQuantity::LpPower(_) => "p-th power of the Lp norm of the Cesaro mean",
            TraceQuantity::LpNorm(_) => "Lp norm of the Cesaro mean",
        }
    }

    /// Applies this quantity to a Cesàro mean given by its values.
    pub fn measure(&self, weights: &[f64], mean: &[f64]) -> f64 {
        match *self {
            TraceQuantity::SquaredL2 => lp_power_slice(weights, mean, 2.0),
            TraceQuantity::L1 => lp_norm_slice(weights, mean, 1.0),
            TraceQuantity::LpPower(p) => lp_power_slice(weights, mean, p),
            TraceQuantity::LpNorm(p) => lp_norm_slice(weights, mean, p),
        }
    }

    /// Norm exponent used for the partial-sum column.
    fn exponent(&self) -> f64 {
        match *self {
            TraceQuantity::SquaredL2 => 2.0,
            TraceQuantity::L1 => 1.0,
            TraceQuantity::LpPower(p) | TraceQuantity::LpNorm(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// 1-based Cesàro length.
    pub j: usize,
    pub cesaro_value: f64,
    pub analytic_bound: Option<f64>,
    /// `‖S_j‖` in the selector's exponent.
    pub partial_sum_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CesaroTrace {
    pub quantity: TraceQuantity,
    pub points: Vec<TracePoint>,
}

impl CesaroTrace {
    /// Measures the running Cesàro means of `centered` (already selected,
    /// in order) and attaches `bound(j)`.
    pub(crate) fn build(
        quantity: TraceQuantity,
        weights: &[f64],
        centered: &[&[f64]],
        bound: impl Fn(usize) -> Option<f64>,
    ) -> Self {
        let atoms = weights.len();
        let mut points = Vec::with_capacity(centered.len());
        let mut mean = alloc::vec![0.0; atoms];
        for j in 1..=centered.len() {
            let sum: Vec<f64> =
                (0..atoms).map(|i| neumaier_sum(centered[..j].iter().map(|x| x[i]))).collect();
            let inv = 1.0 / j as f64;
            for (m, s) in mean.iter_mut().zip(&sum) {
                *m = s * inv;
            }
            points.push(TracePoint {
                j,
                cesaro_value: quantity.measure(weights, &mean),
                analytic_bound: bound(j),
                partial_sum_norm: lp_norm_slice(weights, &sum, quantity.exponent()),
            });
        }
        Self { quantity, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every point with a bound satisfies `value ≤ bound`.
    pub fn respects_bound(&self) -> bool {
        self.points.iter().all(|p| p.analytic_bound.is_none_or(|b| p.cesaro_value <= b))
    }

    /// Every point with a bound satisfies `value < bound`.
    pub fn respects_bound_strictly(&self) -> bool {
        self.points.iter().all(|p| p.analytic_bound.is_none_or(|b| p.cesaro_value < b))
    }

    /// First `j` with `value < tol`.
    pub fn first_below(&self, tol: f64) -> Option<usize> {
        self.points.iter().find(|p| p.cesaro_value < tol).map(|p| p.j)
    }

    /// First `j ≥ 2` where the value fails to decrease.
    pub fn first_stall(&self) -> Option<usize> {
        self.points.windows(2).find(|w| w[1].cesaro_value >= w[0].cesaro_value).map(|w| w[1].j)
    }
}

/// A selection together with its measured trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub selection: SubsequenceSelection,
    pub trace: CesaroTrace,
}

/// Centered candidate vectors `u_n − c` for `n < horizon`.
pub(crate) fn centered_candidates(
    seq: &crate::gallery::FunctionSequence,
    center: &[f64],
    horizon: usize,
) -> crate::Result<Vec<Vec<f64>>> {
    if horizon == 0 || horizon > seq.len() {
        return Err(crate::Error::OutOfRange { what: "horizon", value: horizon, max: seq.len() });
    }
    Ok(seq.terms()[..horizon]
        .iter()
        .map(|t| t.values().iter().zip(center).map(|(a, b)| a - b).collect())
        .collect())
}
