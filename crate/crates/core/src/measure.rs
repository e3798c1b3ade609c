//! Finite atomic measure spaces and the functions living on them.
//!
//! A [`MeasureSpace`] is a list of positive atom weights plus an exhaustion
//! order. A [`Density`] stores one real value per atom; integrals, norms and
//! pairings are weighted sums over atoms, always accumulated in ascending
//! atom order with Neumaier compensation so results are reproducible bit for
//! bit.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::gallery::FunctionSequence;
use crate::{Error, Result};

/// Compensated (Neumaier) summation in iteration order.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in items {
        let t = sum + x;
        if libm::fabs(sum) >= libm::fabs(x) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Vec<f64>,
    /// `rank[atom]` is the position of `atom` in the exhaustion.
    rank: Vec<usize>,
    /// `order[k]` is the atom at exhaustion position `k`.
    order: Vec<usize>,
}

impl MeasureSpace {
    /// Space with the identity exhaustion (atoms enter in index order).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let rank = (0..weights.len()).collect();
        Self::with_rank(weights, rank)
    }

    /// `rank[i]` gives the exhaustion position of atom `i`.
    pub fn with_rank(weights: Vec<f64>, rank: Vec<usize>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (atom, &weight) in weights.iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::NonPositiveWeight { atom, weight });
            }
        }
        let n = weights.len();
        if rank.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: rank.len() });
        }
        let mut order = vec![usize::MAX; n];
        for (atom, &r) in rank.iter().enumerate() {
            if r >= n || order[r] != usize::MAX {
                return Err(Error::NotAPermutation { atom_count: n });
            }
            order[r] = atom;
        }
        Ok(Self { weights, rank, order })
    }

    /// `2^k` atoms of weight `2^-k`: the dyadic grid of `[0, 1]`.
    pub fn dyadic(k: u32) -> Result<Self> {
        if k > 26 {
            return Err(Error::OutOfRange { what: "dyadic level", value: k as usize, max: 26 });
        }
        let n = 1usize << k;
        Self::new(vec![libm::ldexp(1.0, -(k as i32)); n])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn exhaustion_rank(&self) -> &[usize] {
        &self.rank
    }

    /// Atoms in exhaustion order.
    pub fn exhaustion_order(&self) -> &[usize] {
        &self.order
    }

    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A set of atoms, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomSet {
    universe: usize,
    members: Vec<usize>,
}

impl AtomSet {
    pub fn new<I: IntoIterator<Item = usize>>(space: &MeasureSpace, atoms: I) -> Result<Self> {
        let universe = space.atom_count();
        let mut members: Vec<usize> = atoms.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&index) = members.last() {
            if index >= universe {
                return Err(Error::InvalidAtom { index, atom_count: universe });
            }
        }
        Ok(Self { universe, members })
    }

    pub fn empty(space: &MeasureSpace) -> Self {
        Self { universe: space.atom_count(), members: Vec::new() }
    }

    pub fn full(space: &MeasureSpace) -> Self {
        Self { universe: space.atom_count(), members: (0..space.atom_count()).collect() }
    }

    /// The first `k` atoms of the exhaustion, `E_k`.
    pub fn exhaustion_prefix(space: &MeasureSpace, k: usize) -> Result<Self> {
        if k > space.atom_count() {
            return Err(Error::OutOfRange { what: "exhaustion prefix", value: k, max: space.atom_count() });
        }
        let mut members = space.exhaustion_order()[..k].to_vec();
        members.sort_unstable();
        Ok(Self { universe: space.atom_count(), members })
    }

    /// Contiguous index range `lo..hi`.
    pub fn range(space: &MeasureSpace, lo: usize, hi: usize) -> Result<Self> {
        Self::new(space, lo..hi)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members.binary_search(&atom).is_ok()
    }

    pub fn measure(&self, space: &MeasureSpace) -> f64 {
        neumaier_sum(self.members.iter().map(|&i| space.weight(i)))
    }

    /// Membership as a dense mask over the universe.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }

    fn check(&self, space: &MeasureSpace) -> Result<()> {
        match self.members.last() {
            Some(&index) if index >= space.atom_count() => {
                Err(Error::InvalidAtom { index, atom_count: space.atom_count() })
            }
            _ => Ok(()),
        }
    }
}

/// A function on a [`MeasureSpace`], one finite value per atom.
#[derive(Debug, Clone)]
pub struct Density {
    space: Arc<MeasureSpace>,
    values: Vec<f64>,
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

pub(crate) fn same_space(a: &Arc<MeasureSpace>, b: &Arc<MeasureSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Density {
    pub fn new(space: Arc<MeasureSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(Error::LengthMismatch { expected: space.atom_count(), found: values.len() });
        }
        if let Some(atom) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { atom, column: 0 });
        }
        Ok(Self { space, values })
    }

    /// Construct from values known to be finite and of the right length.
    pub(crate) fn from_parts(space: Arc<MeasureSpace>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.atom_count());
        Self { space, values }
    }

    pub fn zeros(space: Arc<MeasureSpace>) -> Self {
        let n = space.atom_count();
        Self { space, values: vec![0.0; n] }
    }

    pub fn constant(space: Arc<MeasureSpace>, c: f64) -> Result<Self> {
        let n = space.atom_count();
        Self::new(space, vec![c; n])
    }

    pub fn indicator(space: Arc<MeasureSpace>, set: &AtomSet) -> Result<Self> {
        set.check(&space)?;
        let mut values = vec![0.0; space.atom_count()];
        for &i in set.members() {
            values[i] = 1.0;
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn same_space_as(&self, other: &Density) -> bool {
        same_space(&self.space, &other.space)
    }

    pub fn sub(&self, other: &Density) -> Result<Density> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Density) -> Result<Density> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, lambda: f64) -> Density {
        Density::from_parts(self.space.clone(), self.values.iter().map(|v| lambda * v).collect())
    }

    fn zip_with(&self, other: &Density, f: impl Fn(f64, f64) -> f64) -> Result<Density> {
        if !self.same_space_as(other) {
            return Err(Error::SpaceMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Density::from_parts(self.space.clone(), values))
    }
}

/// Validates an `L^p` exponent; `f64::INFINITY` stands for `p = ∞`.
pub(crate) fn check_exponent(p: f64) -> Result<f64> {
    if p >= 1.0 {
        Ok(p)
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `Σ w_i |u_i|^p` for finite `p`.
pub(crate) fn lp_power_slice(weights: &[f64], values: &[f64], p: f64) -> f64 {
    let terms = weights.iter().zip(values).map(|(&w, &u)| {
        let a = libm::fabs(u);
        if p == 1.0 {
            w * a
        } else if p == 2.0 {
            w * a * a
        } else if a == 0.0 {
            0.0
        } else {
            w * libm::pow(a, p)
        }
    });
    neumaier_sum(terms)
}

pub(crate) fn lp_norm_slice(weights: &[f64], values: &[f64], p: f64) -> f64 {
    if p == f64::INFINITY {
        return values.iter().map(|&v| libm::fabs(v)).fold(0.0, f64::max);
    }
    let s = lp_power_slice(weights, values, p);
    if p == 1.0 {
        s
    } else if p == 2.0 {
        libm::sqrt(s)
    } else if s == 0.0 {
        0.0
    } else {
        libm::pow(s, 1.0 / p)
    }
}

pub(crate) fn pairing_slice(weights: &[f64], u: &[f64], g: &[f64]) -> f64 {
    neumaier_sum(weights.iter().zip(u).zip(g).map(|((&w, &a), &b)| w * a * b))
}

/// `‖u‖_{L^p}`; pass `f64::INFINITY` for the sup norm.
pub fn lp_norm(u: &Density, p: f64) -> Result<f64> {
    let p = check_exponent(p)?;
    Ok(lp_norm_slice(u.space.weights(), &u.values, p))
}

/// `Σ_i w_i |u_i|^p`, the `p`-th power of the norm, for finite `p ≥ 1`.
pub fn lp_norm_pow(u: &Density, p: f64) -> Result<f64> {
    let p = check_exponent(p)?;
    if p == f64::INFINITY {
        return Err(Error::InvalidExponent(p));
    }
    Ok(lp_power_slice(u.space.weights(), &u.values, p))
}

/// `∫ u g dμ`.
pub fn dual_pairing(u: &Density, g: &Density) -> Result<f64> {
    if !u.same_space_as(g) {
        return Err(Error::SpaceMismatch);
    }
    Ok(pairing_slice(u.space.weights(), &u.values, &g.values))
}

/// `∫_A u dμ`.
pub fn integrate_over_set(u: &Density, set: &AtomSet) -> Result<f64> {
    set.check(&u.space)?;
    let w = u.space.weights();
    Ok(neumaier_sum(set.members().iter().map(|&i| w[i] * u.values[i])))
}

/// `(1/j) Σ_{k<j} u_{indices[k]}`.
pub fn cesaro_mean(seq: &FunctionSequence, indices: &[usize], j: usize) -> Result<Density> {
    if j == 0 || j > indices.len() {
        return Err(Error::OutOfRange { what: "Cesàro length j", value: j, max: indices.len() });
    }
    let n_atoms = seq.space().atom_count();
    for &n in &indices[..j] {
        if n >= seq.len() {
            return Err(Error::OutOfRange { what: "term index", value: n, max: seq.len() - 1 });
        }
    }
    let inv = 1.0 / j as f64;
    let values = (0..n_atoms)
        .map(|i| neumaier_sum(indices[..j].iter().map(|&n| seq.term(n).values[i])) * inv)
        .collect();
    Ok(Density::from_parts(seq.space().clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_orthonormal_counting, make_rademacher};

    fn quarter_space() -> Arc<MeasureSpace> {
        Arc::new(MeasureSpace::new(vec![0.25; 4]).unwrap())
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let s = quarter_space();
        let z = Density::zeros(s);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert_eq!(lp_norm(&z, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_on_unit_mass() {
        let u = Density::constant(quarter_space(), 1.0).unwrap();
        assert_eq!(lp_norm(&u, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn single_atom_l2() {
        let u = Density::new(quarter_space(), vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        // sqrt(4 * 0.25)
        assert_eq!(lp_norm(&u, 2.0).unwrap(), 1.0);
        assert_eq!(lp_norm(&u, f64::INFINITY).unwrap(), 2.0);
    }

    #[test]
    fn rejects_small_exponent_and_mismatch() {
        let u = Density::zeros(quarter_space());
        assert!(matches!(lp_norm(&u, 0.5), Err(Error::InvalidExponent(_))));
        assert!(matches!(lp_norm(&u, f64::NAN), Err(Error::InvalidExponent(_))));
        let other = Density::zeros(Arc::new(MeasureSpace::new(vec![0.5; 2]).unwrap()));
        assert!(matches!(dual_pairing(&u, &other), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn space_validation() {
        assert!(matches!(MeasureSpace::new(vec![]), Err(Error::EmptySpace)));
        assert!(matches!(
            MeasureSpace::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveWeight { atom: 1, .. })
        ));
        assert!(matches!(
            MeasureSpace::with_rank(vec![1.0, 1.0], vec![0, 0]),
            Err(Error::NotAPermutation { .. })
        ));
        let s = MeasureSpace::with_rank(vec![1.0, 2.0, 3.0], vec![2, 0, 1]).unwrap();
        assert_eq!(s.exhaustion_order(), &[1, 2, 0]);
    }

    #[test]
    fn basis_pairings() {
        let seq = make_orthonormal_counting(4).unwrap();
        assert_eq!(dual_pairing(seq.term(0), seq.term(1)).unwrap(), 0.0);
        assert_eq!(dual_pairing(seq.term(2), seq.term(2)).unwrap(), 1.0);
    }

    #[test]
    fn rademacher_first_two_orthogonal_on_1024_grid() {
        let seq = make_rademacher(10, 2).unwrap();
        assert_eq!(dual_pairing(seq.term(0), seq.term(1)).unwrap(), 0.0);
    }

    #[test]
    fn set_integrals() {
        let s = quarter_space();
        let one = Density::constant(s.clone(), 1.0).unwrap();
        assert_eq!(integrate_over_set(&one, &AtomSet::empty(&s)).unwrap(), 0.0);
        let half = AtomSet::new(&s, [1, 3]).unwrap();
        assert_eq!(integrate_over_set(&one, &half).unwrap(), 0.5);
        let full = AtomSet::full(&s);
        assert_eq!(
            integrate_over_set(&one, &full).unwrap(),
            dual_pairing(&one, &Density::constant(s, 1.0).unwrap()).unwrap()
        );
    }

    #[test]
    fn set_from_other_space_is_rejected() {
        let big = MeasureSpace::new(vec![1.0; 8]).unwrap();
        let set = AtomSet::new(&big, [6]).unwrap();
        let u = Density::zeros(quarter_space());
        assert!(matches!(integrate_over_set(&u, &set), Err(Error::InvalidAtom { index: 6, .. })));
        assert!(matches!(AtomSet::new(&big, [8]), Err(Error::InvalidAtom { .. })));
    }

    #[test]
    fn cesaro_of_two_basis_vectors() {
        let seq = make_orthonormal_counting(2).unwrap();
        let m = cesaro_mean(&seq, &[0, 1], 2).unwrap();
        assert_eq!(m.values(), &[0.5, 0.5]);
        let n2 = lp_norm(&m, 2.0).unwrap();
        assert!((n2 - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(cesaro_mean(&seq, &[1, 0], 1).unwrap(), *seq.term(1));
        assert!(cesaro_mean(&seq, &[0, 1], 3).is_err());
        assert!(cesaro_mean(&seq, &[0, 1], 0).is_err());
    }

    #[test]
    fn neumaier_recovers_cancelled_mass() {
        let s = neumaier_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
