//! The experiment pipeline: sequence, diagnostics, selection, oracle checks
//! and reports.

use std::path::{Path, PathBuf};

use cesaro_core::diagnostics::{
    dunford_pettis_report, dyadic_test_sets, prefix_test_sets, singleton_test_sets, DPReport, TestSet, Verdict,
};
use cesaro_core::gallery::{
    make_moving_bump, make_orthonormal_counting, make_rademacher_with, make_spike, FunctionSequence,
};
use cesaro_core::oracle::{brute_force_sup_theta, replay_diagonal, replay_pair_log, ReplayReport};
use cesaro_core::selectors::{
    banach_saks_lp_select, diagonal_extract, hilbert_greedy_select, okada_select, szlenk_epsilon_select, Decay,
    Selection, TraceQuantity,
};
use cesaro_core::Error as CoreError;

use crate::config::{DiagnosticsSpec, ExperimentConfig, OracleSpec, SelectorSpec, SetFamily, Source};
use crate::error::{CliError, ConfigError, Result};
use crate::report::{self, num};
use crate::table::read_sequence;

/// Tolerance for replayed pair-log statistics.
pub const REPLAY_TOL: f64 = 1e-12;

pub fn build_sequence(cfg: &ExperimentConfig) -> Result<FunctionSequence> {
    let seq = match &cfg.source {
        Source::Rademacher { k, n, shifted } => make_rademacher_with(*k, *n, *shifted),
        Source::Spike { k, n } => make_spike(*k, *n),
        Source::MovingBump { l, n } => make_moving_bump(*l, *n),
        Source::Orthonormal { d } => make_orthonormal_counting(*d),
        Source::File(f) => return read_sequence(&cfg.base_dir.join(f)),
    };
    seq.map_err(CliError::stage("sequence"))
}

fn test_sets(seq: &FunctionSequence, family: SetFamily) -> Result<Vec<TestSet>> {
    let space = seq.space();
    Ok(match family {
        SetFamily::Prefix => prefix_test_sets(space),
        SetFamily::Singleton => singleton_test_sets(space),
        SetFamily::Dyadic { level } => {
            let atoms = space.atom_count();
            if !atoms.is_power_of_two() {
                return Err(ConfigError::field(
                    "diagnostics.sets",
                    format!("dyadic sets need 2^K atoms, the sequence has {atoms}"),
                )
                .into());
            }
            let grid = atoms.trailing_zeros();
            if level > grid {
                return Err(ConfigError::field("diagnostics.level", format!("must be at most K = {grid}")).into());
            }
            dyadic_test_sets(space, grid, level).map_err(CliError::stage("diagnostics"))?
        }
    })
}

pub fn diagnose(seq: &FunctionSequence, spec: &DiagnosticsSpec) -> Result<DPReport> {
    let sets = test_sets(seq, spec.sets)?;
    let ks = spec.ks.clone().unwrap_or_else(|| vec![seq.space().atom_count()]);
    dunford_pettis_report(seq, &spec.deltas, &ks, &sets, spec.tol).map_err(CliError::stage("diagnostics"))
}

/// A selection and what is needed to report on it.
#[derive(Debug, Clone)]
pub struct SelectorOutcome {
    pub selection: Selection,
    /// Certificate details, in display order.
    pub notes: Vec<(String, String)>,
    pub replay: ReplayReport,
    /// Whether the trace bound covers every increasing `θ` into the selection.
    pub uniform_bound: bool,
}

pub fn select(seq: &FunctionSequence, cfg: &ExperimentConfig) -> Result<SelectorOutcome> {
    let horizon = cfg.horizon.unwrap_or(seq.len());
    let stage = CliError::stage("selection");
    let mut notes: Vec<(String, String)> = Vec::new();
    let mut note = |k: &str, v: String| notes.push((k.to_string(), v));
    let (selection, replay, uniform_bound) = match cfg.selector {
        SelectorSpec::Hilbert => {
            let s = hilbert_greedy_select(seq, seq.limit(), horizon).map_err(stage)?;
            note("bound", "(r^2 + 2)/j on the squared L2 norm of the Cesaro mean".into());
            let replay = replay_pair_log(seq, &s.selection).map_err(CliError::stage("replay"))?;
            (s, replay, true)
        }
        SelectorSpec::Szlenk { epsilon } => {
            let s = szlenk_epsilon_select(seq, epsilon, horizon).map_err(stage)?;
            let c = &s.certificate;
            note("epsilon", num(epsilon));
            note("x0_measure", num(c.x0_measure));
            note("delta", num(s.split.delta));
            note("m0", num(s.split.m0));
            note("sup_v_l1", num(c.sup_v));
            note("w_l1", num(c.w_l1));
            note("r2", num(c.r2));
            note("j0", c.j0.to_string());
            note("envelope_at_j0", num(c.envelope(c.j0)));
            note("bound", "mu(X0)^(1/2) ((r2^2 + 2)/j)^(1/2) + sup ||v_n||_1 + ||w||_1".into());
            let replay = replay_pair_log(seq, &s.selection.selection).map_err(CliError::stage("replay"))?;
            (s.selection, replay, true)
        }
        SelectorSpec::Diagonal => {
            let d = diagonal_extract(seq, horizon).map_err(stage)?;
            note("max_level", d.max_level.to_string());
            note("r", num(d.r));
            note("bound", "min over stages l of (l-1) r/j + ((j-l+1)/j) envelope_l(j-l+1)".into());
            let replay = replay_diagonal(seq, &d).map_err(CliError::stage("replay"))?;
            (d.selection, replay, true)
        }
        SelectorSpec::Lp => {
            let (s, k) = banach_saks_lp_select(seq, cfg.p, horizon).map_err(stage)?;
            note("floor_p", k.floor_p.to_string());
            note("C", num(k.c));
            note("B", num(k.b));
            note("zeta_sampled_sup", num(k.evidence.sampled_sup));
            note("bound", "r^p/j^p + (p + C r^p)/j^(p-1) + [p >= 2] B r^p/j".into());
            let replay = replay_pair_log(seq, &s.selection).map_err(CliError::stage("replay"))?;
            (s, replay, false)
        }
        SelectorSpec::Okada { tol } => {
            let s = okada_select(seq, cfg.p, horizon).map_err(stage)?;
            let decay = match Decay::of(&s.trace, tol) {
                Decay::Below { j } => format!("below {} at j = {j}", num(tol)),
                Decay::Stalled { j } => format!("not below {}; stopped decreasing at j = {j}", num(tol)),
                Decay::NotReached { last_j } => {
                    format!("not below {} by j = {last_j}; decreasing throughout", num(tol))
                }
            };
            note("decay", decay);
            let replay = replay_pair_log(seq, &s.selection).map_err(CliError::stage("replay"))?;
            (s, replay, false)
        }
    };
    Ok(SelectorOutcome { selection, notes, replay, uniform_bound })
}

/// Oracle supremum over increasing `θ` into the first `M` selected indices,
/// in the trace's own quantity, for `j ≤ max_j`.
pub fn oracle_column(seq: &FunctionSequence, sel: &Selection, spec: &OracleSpec) -> Result<Vec<Option<f64>>> {
    let idx = &sel.selection.indices;
    let m = spec.prefix.min(idx.len());
    let (p, power) = match sel.trace.quantity {
        TraceQuantity::SquaredL2 => (2.0, 2.0),
        TraceQuantity::L1 => (1.0, 1.0),
        TraceQuantity::LpPower(p) => (p, p),
        TraceQuantity::LpNorm(p) => (p, 1.0),
    };
    let mut out = Vec::with_capacity(sel.trace.len());
    for pt in &sel.trace.points {
        if pt.j > m || pt.j > spec.max_j {
            out.push(None);
            continue;
        }
        let s = brute_force_sup_theta(seq, &idx[..m], pt.j, p, &spec.budget).map_err(CliError::stage("oracle"))?;
        out.push(Some(s.value.powf(power)));
    }
    Ok(out)
}

/// Paths written by a run.
#[derive(Debug, Clone)]
pub struct RunBundle {
    pub report: DPReport,
    pub outcome: Option<SelectorOutcome>,
    pub oracle: Vec<Option<f64>>,
    pub files: Vec<PathBuf>,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn summary(
    cfg: &ExperimentConfig,
    seq: &FunctionSequence,
    rep: &DPReport,
    out: &SelectorOutcome,
    oracle: &[Option<f64>],
) -> String {
    let sel = &out.selection;
    let mut lines: Vec<(String, String)> = vec![
        ("sequence".into(), seq.label().to_string()),
        ("atoms".into(), seq.space().atom_count().to_string()),
        ("terms".into(), seq.len().to_string()),
        ("verdict".into(), rep.verdict.to_string()),
        ("selector".into(), sel.selection.rule.tag().into()),
        ("theorem".into(), sel.selection.rule.theorem().into()),
        ("quantity".into(), sel.trace.quantity.describe().into()),
        ("selected".into(), sel.selection.len().to_string()),
    ];
    lines.extend(out.notes.iter().cloned());
    let has_bound = sel.trace.points.iter().any(|p| p.analytic_bound.is_some());
    lines.push((
        "check.trace_within_bound".into(),
        if has_bound { yes_no(sel.trace.respects_bound()) } else { "n/a".into() },
    ));
    let checked: Vec<(f64, f64)> = sel
        .trace
        .points
        .iter()
        .zip(oracle)
        .filter_map(|(p, o)| Some((o.as_ref().copied()?, p.analytic_bound?)))
        .collect();
    let oracle_check = if !cfg.oracle.enabled {
        "disabled".into()
    } else if !out.uniform_bound {
        "n/a (bound covers the selected order only)".into()
    } else if checked.is_empty() {
        "n/a".into()
    } else {
        yes_no(checked.iter().all(|(o, b)| o <= b))
    };
    lines.push(("check.oracle_within_bound".into(), oracle_check));
    lines.push(("check.replay_max_deviation".into(), num(out.replay.max_deviation)));
    lines.push(("check.replay_ok".into(), yes_no(out.replay.within(REPLAY_TOL))));
    report::render_pairs(&lines)
}

fn manifest(cfg: &ExperimentConfig, seq: &FunctionSequence) -> String {
    let mut m = vec![("tool".to_string(), format!("cesaro {}", env!("CARGO_PKG_VERSION")))];
    m.extend(cfg.manifest_entries());
    m.push(("resolved.label".into(), seq.label().to_string()));
    m.push(("resolved.atoms".into(), seq.space().atom_count().to_string()));
    m.push(("resolved.terms".into(), seq.len().to_string()));
    m.push(("resolved.horizon".into(), cfg.horizon.unwrap_or(seq.len()).to_string()));
    m.push(("outputs".into(), "manifest.txt,diagnostics.txt,selection.csv,convergence.csv,summary.txt".into()));
    report::render_pairs(&m)
}

/// Runs the full experiment into `out_dir` (created if missing). Selectors
/// that need the Dunford-Pettis precondition stop after the diagnostics
/// report when the verdict is not weakly-compatible.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunBundle> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let seq = build_sequence(cfg)?;
    let mut files = vec![report::write_file(out_dir, "manifest.txt", &manifest(cfg, &seq))?];
    let rep = diagnose(&seq, &cfg.diagnostics)?;
    files.push(report::write_file(out_dir, "diagnostics.txt", &report::render_diagnostics(&rep))?);
    if cfg.selector.needs_l1_witnesses() && rep.verdict != Verdict::WeaklyCompatible {
        let condition = rep.verdict.failed_condition().expect("failing verdict");
        return Err(CliError::Stage {
            stage: "diagnostics",
            source: CoreError::DiagnosticsFailed {
                condition,
                detail: format!("Dunford-Pettis report verdict {}", rep.verdict),
            },
        });
    }
    let outcome = select(&seq, cfg)?;
    let oracle = if cfg.oracle.enabled {
        oracle_column(&seq, &outcome.selection, &cfg.oracle)?
    } else {
        vec![None; outcome.selection.trace.len()]
    };
    files.push(report::write_file(out_dir, "selection.csv", &report::render_selection(&outcome.selection))?);
    files.push(report::write_file(
        out_dir,
        "convergence.csv",
        &report::render_convergence(&outcome.selection, &oracle),
    )?);
    files.push(report::write_file(out_dir, "summary.txt", &summary(cfg, &seq, &rep, &outcome, &oracle))?);
    Ok(RunBundle { report: rep, outcome: Some(outcome), oracle, files })
}
