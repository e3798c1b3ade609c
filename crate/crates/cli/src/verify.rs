//! Oracle cross-checks for one configured sequence, plus an optional seeded
//! sweep of the duality-map identities.

use std::sync::Arc;

use cesaro_core::diagnostics::{ui_modulus, weak_null_test, TestSet};
use cesaro_core::measure::{dual_pairing, lp_norm, AtomSet, Density, MeasureSpace};
use cesaro_core::oracle::{exact_ui_modulus, exhaustive_weak_test};
use cesaro_core::selectors::duality_map;
use cesaro_core::gallery::FunctionSequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::num;
use crate::run::{oracle_column, select, REPLAY_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` when the check was skipped.
    pub passed: Option<bool>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: Option<bool>, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }

    pub fn line(&self) -> String {
        let tag = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

fn ui_check(seq: &FunctionSequence, cfg: &ExperimentConfig) -> Result<Check> {
    let atoms = seq.space().atom_count();
    let budget = &cfg.oracle.budget;
    if atoms > budget.max_knapsack_atoms {
        return Ok(Check::new("ui-modulus", None, format!("{atoms} atoms exceed {}", budget.max_knapsack_atoms)));
    }
    let mut ok = true;
    let mut gap = 0.0f64;
    for &d in &cfg.diagnostics.deltas {
        let frac = ui_modulus(seq, d).map_err(CliError::stage("diagnostics"))?;
        let exact = exact_ui_modulus(seq, d, budget).map_err(CliError::stage("oracle"))?;
        ok &= exact <= frac * (1.0 + 1e-12);
        gap = gap.max(frac - exact);
    }
    Ok(Check::new("ui-modulus", Some(ok), format!("fractional ≥ exact on every δ; largest gap {}", num(gap))))
}

fn weak_check(seq: &FunctionSequence, cfg: &ExperimentConfig) -> Result<Check> {
    let atoms = seq.space().atom_count();
    let budget = &cfg.oracle.budget;
    if atoms > budget.max_subset_atoms {
        return Ok(Check::new("weak-test", None, format!("{atoms} atoms exceed {}", budget.max_subset_atoms)));
    }
    let tol = cfg.diagnostics.tol;
    let exhaustive = exhaustive_weak_test(seq, tol, budget).map_err(CliError::stage("oracle"))?;
    let space = seq.space();
    let sets: Vec<TestSet> = (0u64..1 << atoms)
        .map(|mask| {
            let atoms = AtomSet::new(space, (0..atoms).filter(|&i| mask >> i & 1 == 1)).expect("in range");
            TestSet::new(format!("{mask:b}"), atoms)
        })
        .collect();
    let direct = weak_null_test(seq, &sets, tol).map_err(CliError::stage("diagnostics"))?;
    let dev = direct
        .sets
        .iter()
        .zip(&exhaustive.tail_max)
        .map(|(s, &t)| (s.tail_max - t).abs())
        .fold(0.0f64, f64::max);
    let ok = direct.passed == exhaustive.passed && dev <= 1e-12;
    Ok(Check::new(
        "weak-test",
        Some(ok),
        format!("{} sets, verdicts {}/{}, largest deviation {}", sets.len(), direct.passed, exhaustive.passed, num(dev)),
    ))
}

fn selection_checks(seq: &FunctionSequence, cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let out = select(seq, cfg)?;
    let mut checks = vec![Check::new(
        "replay",
        Some(out.replay.within(REPLAY_TOL)),
        format!("{} steps, largest deviation {}", out.replay.steps, num(out.replay.max_deviation)),
    )];
    if out.uniform_bound {
        let oracle = oracle_column(seq, &out.selection, &cfg.oracle)?;
        let pairs: Vec<(f64, f64)> = out
            .selection
            .trace
            .points
            .iter()
            .zip(&oracle)
            .filter_map(|(p, o)| Some(((*o)?, p.analytic_bound?)))
            .collect();
        let ok = pairs.iter().all(|(o, b)| o <= b);
        let slack = pairs.iter().map(|(o, b)| b - o).fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "oracle-vs-certificate",
            Some(ok),
            format!("{} lengths checked, smallest slack {}", pairs.len(), num(slack)),
        ));
    }
    Ok(checks)
}

/// Randomised duality identities: `⟨φ(u), u⟩ = ‖u‖²`, `‖φ(u)‖_{p'} = ‖u‖`,
/// `φ(λu) = λφ(u)`, on `samples` densities per exponent.
pub fn duality_sweep(seed: u64, samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0, 4.0] {
        for _ in 0..samples {
            let n = rng.random_range(1..=32);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..2.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let lambda: f64 = rng.random_range(-5.0..5.0);
            let s = Arc::new(MeasureSpace::new(w).expect("positive weights"));
            let u = Density::new(s, v).expect("finite values");
            let norm = lp_norm(&u, p).expect("valid p");
            if norm == 0.0 {
                continue;
            }
            let phi = duality_map(&u, p).expect("valid p");
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel(dual_pairing(&phi.vector, &u).expect("same space"), norm * norm));
            worst = worst.max(rel(lp_norm(&phi.vector, p / (p - 1.0)).expect("valid p"), norm));
            let scaled = duality_map(&u.scale(lambda), p).expect("valid p");
            for (a, b) in scaled.vector.values().iter().zip(phi.vector.scale(lambda).values()) {
                if *b != 0.0 {
                    worst = worst.max(rel(*a, *b));
                }
            }
        }
    }
    Check::new(
        "duality-identities",
        Some(worst <= 1e-10),
        format!("{samples} densities per p, seed {seed}, largest relative error {}", num(worst)),
    )
}

pub fn verify(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Vec<Check>> {
    let seq = crate::run::build_sequence(cfg)?;
    let mut checks = vec![ui_check(&seq, cfg)?, weak_check(&seq, cfg)?];
    checks.extend(selection_checks(&seq, cfg)?);
    if let Some(seed) = seed {
        checks.push(duality_sweep(seed, 1000));
    }
    Ok(checks)
}
