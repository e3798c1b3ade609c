use alloc::boxed::Box;
use alloc::vec::Vec;

use super::lp::{greedy_partial_sums, signed_power};
use super::{centered_candidates, CesaroTrace, PairRecord, Selection, SelectionRule, SubsequenceSelection, TraceQuantity};
use crate::gallery::FunctionSequence;
use crate::measure::{lp_norm_slice, pairing_slice, Density};
use crate::{Error, Result};

/// `φ(u)` in `L^{p'}` together with `‖u‖_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityVector {
    pub vector: Density,
    pub source_norm: f64,
    pub p: f64,
}

fn check_open_exponent(p: f64) -> Result<f64> {
    if p > 1.0 && p < f64::INFINITY {
        Ok(p)
    } else {
        Err(Error::InvalidExponent(p))
    }
}

pub(crate) fn duality_slice(weights: &[f64], u: &[f64], p: f64) -> Vec<f64> {
    let norm = lp_norm_slice(weights, u, p);
    if norm == 0.0 {
        return alloc::vec![0.0; u.len()];
    }
    let scale = libm::pow(norm, 2.0 - p);
    u.iter().map(|&x| scale * signed_power(x, p)).collect()
}

/// Duality map of `L^p`, `φ(u) = ‖u‖_p^{2-p} |u|^{p-2} u` (zero where `u` is).
/// Satisfies `⟨φ(u), u⟩ = ‖u‖_p²` and `‖φ(u)‖_{p'} = ‖u‖_p`.
pub fn duality_map(u: &Density, p: f64) -> Result<DualityVector> {
    let p = check_open_exponent(p)?;
    let w = u.space().weights();
    let vector = Density::from_parts(u.space().clone(), duality_slice(w, u.values(), p));
    Ok(DualityVector { vector, source_norm: lp_norm_slice(w, u.values(), p), p })
}

/// Outcome of checking an Okada trace against a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    /// The trace fell below the tolerance at this `j`.
    Below { j: usize },
    /// Not below tolerance; the trace first failed to decrease at this `j`.
    Stalled { j: usize },
    /// Not below tolerance and decreasing throughout the available horizon.
    NotReached { last_j: usize },
}

impl Decay {
    pub fn of(trace: &CesaroTrace, tol: f64) -> Self {
        if let Some(j) = trace.first_below(tol) {
            Decay::Below { j }
        } else if let Some(j) = trace.first_stall() {
            Decay::Stalled { j }
        } else {
            Decay::NotReached { last_j: trace.len() }
        }
    }
}

pub(crate) fn okada_statistic(weights: &[f64], p: f64, sum: &[f64], x: &[f64]) -> f64 {
    libm::fabs(pairing_slice(weights, &duality_slice(weights, sum, p), x))
}

/// Greedy selection with the duality map: `n_j` is the smallest index
/// after `n_{j-1}` with `|⟨φ(S_{j-1}), x_{n_j}⟩| ≤ 1`, terms centered at the
/// declared limit. The trace records `‖S_j/j‖_p` with no closed-form bound;
/// use [`Decay::of`] to judge it.
pub fn okada_select(seq: &FunctionSequence, p: f64, horizon: usize) -> Result<Selection> {
    let p = check_open_exponent(p)?;
    let weights = seq.space().weights();
    let vectors = centered_candidates(seq, seq.limit().values(), horizon)?;
    let rule = SelectionRule::Okada { p };
    let finish = |positions: Vec<usize>, log: Vec<PairRecord>| {
        let selected: Vec<&[f64]> = positions.iter().map(|&i| vectors[i].as_slice()).collect();
        let trace = CesaroTrace::build(TraceQuantity::LpNorm(p), weights, &selected, |_| None);
        Selection { selection: SubsequenceSelection { indices: positions, rule, pair_log: log, j0: 1 }, trace }
    };
    match greedy_partial_sums(&vectors, |s, x| okada_statistic(weights, p, s, x)) {
        Ok((pos, log)) => Ok(finish(pos, log)),
        Err((j, pos, log)) => Err(Error::SelectionExhausted { j, partial: Box::new(finish(pos, log)) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_orthonormal_counting, make_rademacher};
    use crate::measure::{dual_pairing, lp_norm, MeasureSpace};
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn constant_one_is_fixed() {
        let s = Arc::new(MeasureSpace::new(vec![0.25; 4]).unwrap());
        let u = Density::constant(s, 1.0).unwrap();
        let phi = duality_map(&u, 3.0).unwrap();
        assert!(phi.vector.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn identities_and_homogeneity() {
        let s = Arc::new(MeasureSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap());
        let u = Density::new(s, vec![1.5, -0.25, 0.0, 3.0]).unwrap();
        for p in [1.5, 2.0, 3.0, 4.0] {
            let phi = duality_map(&u, p).unwrap();
            let n = lp_norm(&u, p).unwrap();
            let pd = p / (p - 1.0);
            assert!((dual_pairing(&phi.vector, &u).unwrap() - n * n).abs() <= 1e-12 * n * n);
            assert!((lp_norm(&phi.vector, pd).unwrap() - n).abs() <= 1e-12 * n);
            let neg = duality_map(&u.scale(-2.0), p).unwrap();
            let expected = phi.vector.scale(-2.0);
            for (a, b) in neg.vector.values().iter().zip(expected.values()) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let s = Arc::new(MeasureSpace::new(vec![1.0; 3]).unwrap());
        let phi = duality_map(&Density::zeros(s), 1.5).unwrap();
        assert!(phi.vector.is_zero());
        assert_eq!(phi.source_norm, 0.0);
    }

    #[test]
    fn identity_at_two_gives_consecutive_basis() {
        let seq = make_orthonormal_counting(12).unwrap();
        let sel = okada_select(&seq, 2.0, 12).unwrap();
        assert_eq!(sel.selection.indices, (0..12).collect::<Vec<_>>());
        for p in &sel.trace.points {
            assert!((p.cesaro_value - 1.0 / libm::sqrt(p.j as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn rademacher_trace_decreases() {
        let seq = make_rademacher(12, 12).unwrap();
        let sel = okada_select(&seq, 3.0, 12).unwrap();
        let v: Vec<f64> = sel.trace.points.iter().map(|p| p.cesaro_value).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    }

    #[test]
    fn bad_exponent() {
        let seq = make_orthonormal_counting(2).unwrap();
        assert!(okada_select(&seq, 1.0, 2).is_err());
        assert!(duality_map(seq.term(0), f64::INFINITY).is_err());
    }
}
