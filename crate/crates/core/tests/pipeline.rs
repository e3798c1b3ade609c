use cesaro_core::diagnostics::dyadic_test_sets;
use cesaro_core::prelude::*;

#[test]
fn rademacher_through_the_whole_pipeline() {
    let seq = make_rademacher(8, 8).unwrap();
    let sets = dyadic_test_sets(seq.space(), 8, 3).unwrap();
    let deltas: Vec<f64> = (1..=8).map(|i| 0.5f64.powi(i)).collect();
    let rep = dunford_pettis_report(&seq, &deltas, &[256], &sets, 1e-2).unwrap();
    assert_eq!(rep.verdict, Verdict::WeaklyCompatible);

    let sel = hilbert_greedy_select(&seq, seq.limit(), 8).unwrap();
    assert_eq!(sel.selection.indices, (0..8).collect::<Vec<_>>());
    assert!(sel.trace.respects_bound());

    let budget = OracleBudget::default();
    for j in 1..=6 {
        let sup = brute_force_sup_theta(&seq, &sel.selection.indices, j, 2.0, &budget).unwrap();
        assert!((sup.value * sup.value - 1.0 / j as f64).abs() < 1e-12);
    }
    assert!(replay_pair_log(&seq, &sel.selection).unwrap().within(1e-12));
}

#[test]
fn table_round_trip_preserves_selection() {
    let seq = make_rademacher_with(6, 6, true).unwrap();
    let back = load_sequence(&SequenceTable::from_sequence(&seq)).unwrap();
    let a = banach_saks_lp_select(&seq, 3.0, 6).unwrap().0;
    let b = banach_saks_lp_select(&back, 3.0, 6).unwrap().0;
    assert_eq!(a.selection.indices, b.selection.indices);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn spike_is_rejected_before_truncation() {
    let seq = make_spike(8, 8).unwrap();
    match szlenk_epsilon_select(&seq, 0.5, 8) {
        Err(Error::DiagnosticsFailed { .. }) => {}
        other => panic!("expected a diagnostics failure, got {other:?}"),
    }
    let budget = OracleBudget::default();
    let small = make_spike(4, 4).unwrap();
    assert_eq!(exact_ui_modulus(&small, 1.0 / 16.0, &budget).unwrap(), 1.0);
}
