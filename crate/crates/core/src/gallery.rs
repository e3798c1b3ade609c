//! Test sequences with known weak-convergence behaviour.
//!
//! Every generator samples its defining formula at atom centres of a grid
//! fine enough that the sampled values are exact, so pairings and norms of
//! the generated terms are exact dyadic rationals.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::Verdict;
use crate::measure::{check_exponent, lp_norm_slice, same_space, Density, MeasureSpace};
use crate::{Error, Result};

/// Largest dyadic level accepted by the grid-based generators.
pub const MAX_GRID_LEVEL: u32 = 24;

/// What a generator claims about its own output. Tests recompute every claim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceMeta {
    /// Whether the family converges weakly to its declared limit.
    pub weakly_convergent: bool,
    /// Verdict the Dunford-Pettis report is expected to reach, when known.
    pub expected_verdict: Option<Verdict>,
}

impl SequenceMeta {
    pub fn unknown() -> Self {
        Self { weakly_convergent: false, expected_verdict: None }
    }
}

/// A finite family `u_0, …, u_{N-1}` of densities on one space together with
/// its declared weak limit and a norm bound `r` for the declared exponent.
#[derive(Debug, Clone)]
pub struct FunctionSequence {
    label: String,
    terms: Vec<Density>,
    limit: Density,
    exponent: f64,
    norm_bound: f64,
    meta: SequenceMeta,
}

/// Relative slack when checking a declared norm bound.
const BOUND_SLACK: f64 = 1e-12;

impl FunctionSequence {
    pub fn new(
        label: impl Into<String>,
        terms: Vec<Density>,
        limit: Density,
        exponent: f64,
        norm_bound: f64,
    ) -> Result<Self> {
        let exponent = check_exponent(exponent)?;
        let first = terms.first().ok_or(Error::EmptySequence)?;
        let space = first.space().clone();
        if terms.iter().any(|t| !same_space(t.space(), &space)) || !same_space(limit.space(), &space) {
            return Err(Error::SpaceMismatch);
        }
        if !(norm_bound >= 0.0 && norm_bound.is_finite()) {
            return Err(Error::NonPositive { what: "norm bound", value: norm_bound });
        }
        for (term, t) in terms.iter().enumerate() {
            let norm = lp_norm_slice(space.weights(), t.values(), exponent);
            if norm > norm_bound * (1.0 + BOUND_SLACK) {
                return Err(Error::NormBoundViolated { term, norm, bound: norm_bound });
            }
        }
        // share one allocation of the space
        let terms = terms
            .into_iter()
            .map(|t| Density::from_parts(space.clone(), t.into_values()))
            .collect();
        let limit = Density::from_parts(space, limit.into_values());
        Ok(Self { label: label.into(), terms, limit, exponent, norm_bound, meta: SequenceMeta::unknown() })
    }

    /// Build with `r` set to the largest term norm.
    pub fn with_measured_bound(
        label: impl Into<String>,
        terms: Vec<Density>,
        limit: Density,
        exponent: f64,
    ) -> Result<Self> {
        let exponent = check_exponent(exponent)?;
        let r = terms
            .iter()
            .map(|t| lp_norm_slice(t.space().weights(), t.values(), exponent))
            .fold(0.0, f64::max);
        Self::new(label, terms, limit, exponent, r)
    }

    pub fn with_meta(mut self, meta: SequenceMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Same terms, declared limit replaced.
    pub fn with_limit(mut self, limit: Density) -> Result<Self> {
        if !same_space(limit.space(), self.space()) {
            return Err(Error::SpaceMismatch);
        }
        self.limit = limit;
        Ok(self)
    }

    /// Re-declare the exponent; `r` becomes the largest term norm in `L^p`.
    pub fn with_exponent(self, p: f64) -> Result<Self> {
        let meta = self.meta.clone();
        Ok(Self::with_measured_bound(self.label, self.terms, self.limit, p)?.with_meta(meta))
    }

    /// The terms at `indices`, in that order, with the same limit.
    pub fn subsequence(&self, indices: &[usize]) -> Result<Self> {
        let mut terms = Vec::with_capacity(indices.len());
        for &n in indices {
            let t = self.terms.get(n).ok_or(Error::OutOfRange {
                what: "term index",
                value: n,
                max: self.len().saturating_sub(1),
            })?;
            terms.push(t.clone());
        }
        if terms.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self {
            label: self.label.clone(),
            terms,
            limit: self.limit.clone(),
            exponent: self.exponent,
            norm_bound: self.norm_bound,
            meta: self.meta.clone(),
        })
    }

    /// `u_n - u` for every term, declared limit zero.
    pub fn centered(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let v = t.values().iter().zip(self.limit.values()).map(|(a, b)| a - b).collect();
                Density::from_parts(self.space().clone(), v)
            })
            .collect::<Vec<_>>();
        let w = self.space().weights();
        let r = terms.iter().map(|t| lp_norm_slice(w, t.values(), self.exponent)).fold(0.0, f64::max);
        Self {
            label: self.label.clone(),
            terms,
            limit: Density::zeros(self.space().clone()),
            exponent: self.exponent,
            norm_bound: r,
            meta: self.meta.clone(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        self.limit.space()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, n: usize) -> &Density {
        &self.terms[n]
    }

    pub fn terms(&self) -> &[Density] {
        &self.terms
    }

    pub fn limit(&self) -> &Density {
        &self.limit
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }
}

fn check_grid(k: u32, n: usize) -> Result<()> {
    if k == 0 || k > MAX_GRID_LEVEL {
        return Err(Error::OutOfRange { what: "grid level K", value: k as usize, max: MAX_GRID_LEVEL as usize });
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if n > k as usize {
        return Err(Error::ResolutionExceeded { grid: k, terms: n });
    }
    Ok(())
}

/// Rademacher functions `r_1, …, r_N`, `r_n(x) = sign(sin(2^n π x))`, on the
/// dyadic grid of `2^K` atoms. Declared limit 0, `r = 1`.
pub fn make_rademacher(k: u32, n: usize) -> Result<FunctionSequence> {
    make_rademacher_with(k, n, false)
}

/// Rademacher functions, optionally shifted to `1 + r_n` (declared limit 1).
pub fn make_rademacher_with(k: u32, n: usize, shifted: bool) -> Result<FunctionSequence> {
    check_grid(k, n)?;
    let space = Arc::new(MeasureSpace::dyadic(k)?);
    let atoms = space.atom_count();
    let shift = if shifted { 1.0 } else { 0.0 };
    let terms = (1..=n)
        .map(|m| {
            // at the centre of atom i, floor(2^m x) = i >> (K - m)
            let values = (0..atoms)
                .map(|i| shift + if (i >> (k as usize - m)) & 1 == 0 { 1.0 } else { -1.0 })
                .collect();
            Density::from_parts(space.clone(), values)
        })
        .collect();
    let limit = Density::constant(space, shift)?;
    let label = if shifted { format!("shifted-rademacher(K={k},N={n})") } else { format!("rademacher(K={k},N={n})") };
    Ok(FunctionSequence::new(label, terms, limit, 1.0, 1.0)?.with_meta(SequenceMeta {
        weakly_convergent: true,
        expected_verdict: Some(Verdict::WeaklyCompatible),
    }))
}

/// Spikes `2^m · 1_{(0, 2^-m]}`, `m = 1..=N`, on `2^K` atoms. Each has unit
/// mass; the family is bounded in `L^1` but not uniformly integrable.
pub fn make_spike(k: u32, n: usize) -> Result<FunctionSequence> {
    check_grid(k, n)?;
    let space = Arc::new(MeasureSpace::dyadic(k)?);
    let atoms = space.atom_count();
    let terms = (1..=n)
        .map(|m| {
            let support = atoms >> m;
            let height = libm::ldexp(1.0, m as i32);
            let values = (0..atoms).map(|i| if i < support { height } else { 0.0 }).collect();
            Density::from_parts(space.clone(), values)
        })
        .collect();
    let limit = Density::zeros(space);
    Ok(FunctionSequence::new(format!("spike(K={k},N={n})"), terms, limit, 1.0, 1.0)?.with_meta(
        SequenceMeta { weakly_convergent: false, expected_verdict: Some(Verdict::UiFailure) },
    ))
}

/// Unit bumps `1_{[n, n+1)}`, `n = 0..N`, on `L` unit cells of two atoms each,
/// exhausted left to right. Mass escapes along the exhaustion.
pub fn make_moving_bump(l: usize, n: usize) -> Result<FunctionSequence> {
    if l == 0 {
        return Err(Error::EmptyFamily("cell list"));
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if n > l {
        return Err(Error::OutOfRange { what: "bump count N", value: n, max: l });
    }
    let space = Arc::new(MeasureSpace::new(vec![0.5; 2 * l])?);
    let terms = (0..n)
        .map(|b| {
            let values = (0..2 * l).map(|i| if i / 2 == b { 1.0 } else { 0.0 }).collect();
            Density::from_parts(space.clone(), values)
        })
        .collect();
    let limit = Density::zeros(space);
    Ok(FunctionSequence::new(format!("moving-bump(L={l},N={n})"), terms, limit, 1.0, 1.0)?.with_meta(
        SequenceMeta { weakly_convergent: false, expected_verdict: Some(Verdict::TightnessFailure) },
    ))
}

/// Standard basis `e_1, …, e_d` of `R^d` with counting measure.
pub fn make_orthonormal_counting(d: usize) -> Result<FunctionSequence> {
    if d == 0 {
        return Err(Error::EmptySequence);
    }
    let space = Arc::new(MeasureSpace::new(vec![1.0; d])?);
    let terms = (0..d)
        .map(|i| {
            let mut values = vec![0.0; d];
            values[i] = 1.0;
            Density::from_parts(space.clone(), values)
        })
        .collect();
    let limit = Density::zeros(space);
    Ok(FunctionSequence::new(format!("orthonormal(d={d})"), terms, limit, 1.0, 1.0)?
        .with_meta(SequenceMeta { weakly_convergent: true, expected_verdict: None }))
}

/// Row-oriented sequence table: one row per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTable {
    pub label: String,
    pub weights: Vec<f64>,
    /// Exhaustion rank per atom; row order when absent.
    pub ranks: Option<Vec<usize>>,
    /// Declared weak limit per atom; zero when absent.
    pub limit: Option<Vec<f64>>,
    /// `rows[i][n]` is the value of term `n` on atom `i`.
    pub rows: Vec<Vec<f64>>,
}

impl SequenceTable {
    pub fn from_sequence(seq: &FunctionSequence) -> Self {
        let space = seq.space();
        let atoms = space.atom_count();
        let rows = (0..atoms).map(|i| seq.terms().iter().map(|t| t.values()[i]).collect()).collect();
        Self {
            label: seq.label().into(),
            weights: space.weights().to_vec(),
            ranks: Some(space.exhaustion_rank().to_vec()),
            limit: Some(seq.limit().values().to_vec()),
            rows,
        }
    }
}

/// Build a sequence from a [`SequenceTable`]. The declared exponent is 1 and
/// `r` is the largest `L^1` norm of a term.
pub fn load_sequence(table: &SequenceTable) -> Result<FunctionSequence> {
    let atoms = table.weights.len();
    if table.rows.len() != atoms {
        return Err(Error::LengthMismatch { expected: atoms, found: table.rows.len() });
    }
    let width = table.rows.first().map_or(0, Vec::len);
    for (row, values) in table.rows.iter().enumerate() {
        if values.len() != width {
            return Err(Error::RaggedRows { row, expected: width, found: values.len() });
        }
        if let Some(column) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { atom: row, column });
        }
    }
    if width == 0 {
        return Err(Error::EmptySequence);
    }
    let space = match &table.ranks {
        Some(r) => MeasureSpace::with_rank(table.weights.clone(), r.clone())?,
        None => MeasureSpace::new(table.weights.clone())?,
    };
    let space = Arc::new(space);
    let limit = match &table.limit {
        Some(l) => Density::new(space.clone(), l.clone())?,
        None => Density::zeros(space.clone()),
    };
    let terms = (0..width)
        .map(|n| Density::from_parts(space.clone(), table.rows.iter().map(|row| row[n]).collect()))
        .collect();
    FunctionSequence::with_measured_bound(table.label.clone(), terms, limit, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{dual_pairing, lp_norm};

    #[test]
    fn rademacher_matches_sine_sampling() {
        let k = 8;
        let seq = make_rademacher(k, 8).unwrap();
        let atoms = 1usize << k;
        for (idx, t) in seq.terms().iter().enumerate() {
            let m = idx as i32 + 1;
            for i in 0..atoms {
                let x = (i as f64 + 0.5) / atoms as f64;
                let s = libm::sin(libm::ldexp(core::f64::consts::PI, m) * x);
                assert_eq!(t.values()[i], s.signum(), "term {m} atom {i}");
            }
        }
    }

    #[test]
    fn rademacher_pairwise_orthogonal_and_unit() {
        let seq = make_rademacher(10, 8).unwrap();
        for i in 0..8 {
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                assert_eq!(lp_norm(seq.term(i), p).unwrap(), 1.0);
            }
            for j in 0..8 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(dual_pairing(seq.term(i), seq.term(j)).unwrap(), expected);
            }
        }
        assert!(seq.limit().is_zero());
        assert_eq!(seq.norm_bound(), 1.0);
    }

    #[test]
    fn rademacher_rejects_unresolvable_terms() {
        assert!(matches!(make_rademacher(4, 5), Err(Error::ResolutionExceeded { grid: 4, terms: 5 })));
        assert!(make_rademacher(4, 4).is_ok());
    }

    #[test]
    fn shifted_rademacher_limit_is_one() {
        let seq = make_rademacher_with(6, 3, true).unwrap();
        assert!(seq.limit().values().iter().all(|&v| v == 1.0));
        let c = seq.centered();
        let plain = make_rademacher(6, 3).unwrap();
        for n in 0..3 {
            assert_eq!(c.term(n).values(), plain.term(n).values());
        }
    }

    #[test]
    fn spikes_have_unit_mass() {
        let seq = make_spike(10, 8).unwrap();
        let one = Density::constant(seq.space().clone(), 1.0).unwrap();
        for t in seq.terms() {
            assert_eq!(lp_norm(t, 1.0).unwrap(), 1.0);
            assert_eq!(dual_pairing(t, &one).unwrap(), 1.0);
        }
        assert!(make_spike(3, 4).is_err());
    }

    #[test]
    fn bumps_and_basis() {
        let bump = make_moving_bump(16, 12).unwrap();
        for t in bump.terms() {
            assert_eq!(lp_norm(t, 1.0).unwrap(), 1.0);
        }
        assert!(make_moving_bump(4, 5).is_err());
        let e = make_orthonormal_counting(5).unwrap();
        for t in e.terms() {
            assert_eq!(lp_norm(t, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn table_round_trip_is_exact() {
        let seq = make_rademacher(6, 4).unwrap();
        let back = load_sequence(&SequenceTable::from_sequence(&seq)).unwrap();
        assert_eq!(back.len(), seq.len());
        for n in 0..seq.len() {
            assert_eq!(back.term(n), seq.term(n));
        }
        assert_eq!(back.limit(), seq.limit());
    }

    #[test]
    fn table_errors_are_distinct() {
        let good = SequenceTable {
            label: "t".into(),
            weights: vec![0.5, 0.5],
            ranks: None,
            limit: None,
            rows: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        };
        assert!(load_sequence(&good).is_ok());

        let mut zero_weight = good.clone();
        zero_weight.weights[1] = 0.0;
        assert!(matches!(load_sequence(&zero_weight), Err(Error::NonPositiveWeight { atom: 1, .. })));

        let mut ragged = good.clone();
        ragged.rows[1].pop();
        assert!(matches!(load_sequence(&ragged), Err(Error::RaggedRows { row: 1, .. })));

        let mut nan = good.clone();
        nan.rows[0][1] = f64::NAN;
        assert!(matches!(load_sequence(&nan), Err(Error::NonFinite { atom: 0, column: 1 })));
    }

    #[test]
    fn declared_bound_is_enforced() {
        let space = Arc::new(MeasureSpace::new(vec![1.0]).unwrap());
        let t = Density::new(space.clone(), vec![2.0]).unwrap();
        let r = FunctionSequence::new("x", vec![t], Density::zeros(space), 1.0, 1.5);
        assert!(matches!(r, Err(Error::NormBoundViolated { term: 0, .. })));
    }
}
