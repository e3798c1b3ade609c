use std::sync::Arc;

use cesaro_core::diagnostics::ui_modulus;
use cesaro_core::oracle::{exact_ui_modulus, OracleBudget};
use cesaro_core::prelude::*;
use cesaro_core::selectors::hilbert_bound;
use proptest::prelude::*;

fn space_and_values(max_atoms: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1..=max_atoms).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..2.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

fn density(space: &Arc<MeasureSpace>, v: Vec<f64>) -> Density {
    Density::new(space.clone(), v).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn holder((w, u, g) in space_and_values(24), p in 1.0f64..6.0) {
        let s = Arc::new(MeasureSpace::new(w).unwrap());
        let (u, g) = (density(&s, u), density(&s, g));
        let pd = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        let lhs = dual_pairing(&u, &g).unwrap().abs();
        let rhs = lp_norm(&u, p).unwrap() * lp_norm(&g, pd).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn l1_is_dominated_by_l2_on_finite_mass((w, u, _) in space_and_values(24)) {
        let s = Arc::new(MeasureSpace::new(w).unwrap());
        let mass = s.total_mass();
        let u = density(&s, u);
        let l1 = lp_norm(&u, 1.0).unwrap();
        let l2 = lp_norm(&u, 2.0).unwrap();
        prop_assert!(l1 <= mass.sqrt() * l2 * (1.0 + 1e-12));
    }

    #[test]
    fn set_integrals_are_additive((w, u, _) in space_and_values(24), split in 0usize..24) {
        let s = Arc::new(MeasureSpace::new(w).unwrap());
        let n = s.atom_count();
        let k = split.min(n);
        let u = density(&s, u);
        let a = AtomSet::range(&s, 0, k).unwrap();
        let b = AtomSet::range(&s, k, n).unwrap();
        let whole = integrate_over_set(&u, &AtomSet::full(&s)).unwrap();
        let parts = integrate_over_set(&u, &a).unwrap() + integrate_over_set(&u, &b).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * lp_norm(&u, 1.0).unwrap().max(1.0));
    }

    #[test]
    fn duality_identities((w, u, _) in space_and_values(24), pi in 0usize..4, lambda in -5.0f64..5.0) {
        let p = [1.5, 2.0, 3.0, 4.0][pi];
        let s = Arc::new(MeasureSpace::new(w).unwrap());
        let u = density(&s, u);
        let n = lp_norm(&u, p).unwrap();
        prop_assume!(n > 0.0);
        let phi = duality_map(&u, p).unwrap();
        prop_assert!(rel_close(dual_pairing(&phi.vector, &u).unwrap(), n * n, 1e-10));
        prop_assert!(rel_close(lp_norm(&phi.vector, p / (p - 1.0)).unwrap(), n, 1e-10));
        let scaled = duality_map(&u.scale(lambda), p).unwrap();
        for (a, b) in scaled.vector.values().iter().zip(phi.vector.scale(lambda).values()) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300) || (a - b).abs() < 1e-300);
        }
    }

    #[test]
    fn ui_modulus_is_monotone_and_dominates_exact(
        (w, u, g) in space_and_values(12),
        d1 in 0.01f64..3.0,
        d2 in 0.01f64..3.0,
    ) {
        let s = Arc::new(MeasureSpace::new(w).unwrap());
        let seq = FunctionSequence::with_measured_bound(
            "random", vec![density(&s, u), density(&s, g)], Density::zeros(s.clone()), 1.0,
        ).unwrap();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(ui_modulus(&seq, lo).unwrap() <= ui_modulus(&seq, hi).unwrap());
        let exact = exact_ui_modulus(&seq, lo, &OracleBudget::default()).unwrap();
        prop_assert!(exact <= ui_modulus(&seq, lo).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn tightness_tail_is_nonincreasing((w, u, g) in space_and_values(24)) {
        let s = Arc::new(MeasureSpace::new(w).unwrap());
        let seq = FunctionSequence::with_measured_bound(
            "random", vec![density(&s, u), density(&s, g)], Density::zeros(s.clone()), 1.0,
        ).unwrap();
        let tails: Vec<f64> = (0..=s.atom_count()).map(|k| tightness_tail(&seq, k).unwrap()).collect();
        prop_assert!(tails.windows(2).all(|t| t[1] <= t[0] * (1.0 + 1e-12)));
        prop_assert_eq!(*tails.last().unwrap(), 0.0);
    }

    #[test]
    fn hilbert_selection_is_deterministic_and_certified(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 8), 2..12),
    ) {
        let s = Arc::new(MeasureSpace::new(vec![0.125; 8]).unwrap());
        let terms: Vec<Density> = rows.into_iter().map(|r| density(&s, r)).collect();
        let n = terms.len();
        let seq = FunctionSequence::with_measured_bound("random", terms, Density::zeros(s.clone()), 2.0).unwrap();
        let first = hilbert_greedy_select(&seq, seq.limit(), n);
        let second = hilbert_greedy_select(&seq, seq.limit(), n);
        match (first, second) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.selection.indices, &b.selection.indices);
                let r = (0..n).map(|i| lp_norm(seq.term(i), 2.0).unwrap()).fold(0.0, f64::max);
                for pt in &a.trace.points {
                    prop_assert!(pt.cesaro_value <= hilbert_bound(r, pt.j) * (1.0 + 1e-12));
                }
            }
            (Err(Error::SelectionExhausted { j: ja, partial: pa }), Err(Error::SelectionExhausted { j: jb, partial: pb })) => {
                prop_assert_eq!(ja, jb);
                prop_assert_eq!(pa.selection.indices, pb.selection.indices);
            }
            (a, b) => prop_assert!(false, "runs disagree: {:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }
}
