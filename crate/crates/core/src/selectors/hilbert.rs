use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{centered_candidates, CesaroTrace, PairRecord, Selection, SelectionRule, SubsequenceSelection, TraceQuantity};
use crate::gallery::FunctionSequence;
use crate::measure::{lp_norm_slice, pairing_slice, Density};
use crate::{Error, Result};

/// `(r² + 2) / j`, the bound on `sup_θ ‖(1/j) Σ x_{n_θ(k)}‖²`.
pub fn hilbert_bound(r: f64, j: usize) -> f64 {
    (r * r + 2.0) / j as f64
}

pub(crate) struct Greedy {
    /// Positions into the candidate list.
    pub positions: Vec<usize>,
    pub log: Vec<PairRecord>,
}

/// Greedy orthogonality rule over `vectors` in order. `Err((j, partial))`
/// when step `j` finds no admissible candidate although candidates remain.
pub(crate) fn greedy_hilbert(weights: &[f64], vectors: &[Vec<f64>]) -> core::result::Result<Greedy, (usize, Greedy)> {
    let mut out = Greedy { positions: Vec::new(), log: Vec::new() };
    if vectors.is_empty() {
        return Ok(out);
    }
    out.positions.push(0);
    out.log.push(PairRecord { value: 0.0, threshold: 0.5 });
    loop {
        let j = out.positions.len() + 1;
        let start = out.positions[out.positions.len() - 1] + 1;
        if start >= vectors.len() {
            return Ok(out);
        }
        let threshold = 1.0 / (j as f64 + 1.0);
        let mut chosen = None;
        for cand in start..vectors.len() {
            let mut worst = 0.0f64;
            let mut admissible = true;
            for &k in &out.positions {
                let v = libm::fabs(pairing_slice(weights, &vectors[k], &vectors[cand]));
                worst = worst.max(v);
                if v > threshold {
                    admissible = false;
                    break;
                }
            }
            if admissible {
                chosen = Some((cand, worst));
                break;
            }
        }
        match chosen {
            Some((cand, value)) => {
                out.positions.push(cand);
                out.log.push(PairRecord { value, threshold });
            }
            None => return Err((j, out)),
        }
    }
}

pub(crate) fn hilbert_from_vectors(
    weights: &[f64],
    vectors: &[Vec<f64>],
    ids: &[usize],
    rule: SelectionRule,
) -> Result<(Selection, f64)> {
    let r = vectors.iter().map(|x| lp_norm_slice(weights, x, 2.0)).fold(0.0, f64::max);
    let finish = |g: Greedy| {
        let selected: Vec<&[f64]> = g.positions.iter().map(|&p| vectors[p].as_slice()).collect();
        let trace = CesaroTrace::build(TraceQuantity::SquaredL2, weights, &selected, |j| Some(hilbert_bound(r, j)));
        let selection = SubsequenceSelection {
            indices: g.positions.iter().map(|&p| ids[p]).collect(),
            rule,
            pair_log: g.log,
            j0: 1,
        };
        Selection { selection, trace }
    };
    match greedy_hilbert(weights, vectors) {
        Ok(g) => Ok((finish(g), r)),
        Err((j, g)) => Err(Error::SelectionExhausted { j, partial: Box::new(finish(g)) }),
    }
}

/// Greedy selection in `L^2`: `n_1` is the first index and `n_j` the
/// smallest later index with `|(x_{n_k}, x_{n_j})| ≤ 1/(j+1)` for all
/// `k < j`, where `x_n = u_n − center`. The trace measures `‖mean_j‖²`
/// against `(r² + 2)/j` with `r = max_{n < horizon} ‖x_n‖_2`.
pub fn hilbert_greedy_select(seq: &FunctionSequence, center: &Density, horizon: usize) -> Result<Selection> {
    if !center.same_space_as(seq.limit()) {
        return Err(Error::SpaceMismatch);
    }
    let vectors = centered_candidates(seq, center.values(), horizon)?;
    let ids: Vec<usize> = (0..horizon).collect();
    hilbert_from_vectors(seq.space().weights(), &vectors, &ids, SelectionRule::HilbertGreedy).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_orthonormal_counting, make_rademacher};
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn orthonormal_input_is_taken_consecutively() {
        let seq = make_orthonormal_counting(16).unwrap();
        let sel = hilbert_greedy_select(&seq, seq.limit(), 16).unwrap();
        assert_eq!(sel.selection.indices, (0..16).collect::<Vec<_>>());
        for p in &sel.trace.points {
            assert!((p.cesaro_value - 1.0 / p.j as f64).abs() < 1e-15);
            assert_eq!(p.analytic_bound, Some(3.0 / p.j as f64));
        }
    }

    #[test]
    fn constant_sequence_exhausts_at_two() {
        let space = Arc::new(crate::measure::MeasureSpace::new(vec![1.0]).unwrap());
        let v = Density::new(space.clone(), vec![1.0]).unwrap();
        let seq = FunctionSequence::new("const", vec![v; 5], Density::zeros(space), 2.0, 1.0).unwrap();
        match hilbert_greedy_select(&seq, seq.limit(), 5) {
            Err(Error::SelectionExhausted { j, partial }) => {
                assert_eq!(j, 2);
                assert_eq!(partial.selection.indices, vec![0]);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn rademacher_trace_strictly_below_bound() {
        let seq = make_rademacher(12, 12).unwrap();
        let sel = hilbert_greedy_select(&seq, seq.limit(), 12).unwrap();
        assert!(sel.selection.is_strictly_increasing());
        assert!(sel.trace.respects_bound_strictly());
    }

    #[test]
    fn horizon_is_checked() {
        let seq = make_orthonormal_counting(4).unwrap();
        assert!(hilbert_greedy_select(&seq, seq.limit(), 0).is_err());
        assert!(hilbert_greedy_select(&seq, seq.limit(), 5).is_err());
    }
}
