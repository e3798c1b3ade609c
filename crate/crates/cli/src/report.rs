//! Report rendering. Every number is written with 17 significant digits so
//! the files parse back to the same `f64`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cesaro_core::diagnostics::DPReport;
use cesaro_core::selectors::Selection;

use crate::error::{CliError, Result};

pub const SELECTION_HEADER: &str = "j,n_j,pairing";
pub const CONVERGENCE_HEADER: &str = "j,cesaro_norm,analytic_bound,oracle_sup";

/// `{:.16e}`, with `NaN` for missing entries.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    num(x.unwrap_or(f64::NAN))
}

pub fn render_diagnostics(rep: &DPReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "label = {}", rep.label);
    let _ = writeln!(s, "verdict = {}", rep.verdict);
    let _ = writeln!(s, "advisory = {}", DPReport::ADVISORY);
    let _ = writeln!(s, "norm_bound = {}", num(rep.norm_bound));
    let _ = writeln!(s, "tol = {}", num(rep.tol));
    for (d, w) in &rep.ui_samples {
        let _ = writeln!(s, "ui_modulus[{}] = {}", num(*d), num(*w));
    }
    for (k, t) in &rep.tight_samples {
        let _ = writeln!(s, "tightness_tail[{k}] = {}", num(*t));
    }
    let _ = writeln!(s, "set_test.passed = {}", rep.set_test.passed);
    let _ = writeln!(s, "set_test.sets = {}", rep.set_test.sets.len());
    let worst = rep.set_test.worst_set();
    let _ = writeln!(s, "set_test.worst = {}", worst.label);
    let _ = writeln!(s, "set_test.worst_tail_max = {}", num(worst.tail_max));
    s
}

pub fn render_selection(sel: &Selection) -> String {
    let mut s = String::from(SELECTION_HEADER);
    s.push('\n');
    for (j, (n, rec)) in sel.selection.indices.iter().zip(&sel.selection.pair_log).enumerate() {
        let _ = writeln!(s, "{},{},{}", j + 1, n, num(rec.value));
    }
    s
}

/// `oracle[j-1]` is the oracle supremum at length `j`, when computed.
pub fn render_convergence(sel: &Selection, oracle: &[Option<f64>]) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for (i, p) in sel.trace.points.iter().enumerate() {
        let o = oracle.get(i).copied().flatten();
        let _ = writeln!(s, "{},{},{},{}", p.j, num(p.cesaro_value), opt(p.analytic_bound), opt(o));
    }
    s
}

pub fn render_pairs(pairs: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

/// Writes `contents` to `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
