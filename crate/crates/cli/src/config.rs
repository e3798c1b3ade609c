//! Experiment configuration: a flat TOML document validated before any
//! computation.
//!
//! ```toml
//! p = 2.0
//!
//! [sequence]
//! gallery = "rademacher"   # or: file = "seq.csv"
//! k = 10
//! n = 8
//!
//! [selector]
//! name = "hilbert"         # hilbert | szlenk | diagonal | lp | okada
//! horizon = 8
//!
//! [diagnostics]
//! deltas = [0.5, 0.25]
//! ks = [1024]
//! sets = "dyadic"          # dyadic | prefix | singleton
//! tol = 0.01
//!
//! [oracle]
//! enabled = true
//! prefix = 12
//! max_j = 6
//! ```

use std::path::{Path, PathBuf};

use cesaro_core::oracle::OracleBudget;
use serde::Deserialize;

use crate::error::{CliError, ConfigError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: f64,
    output: Option<PathBuf>,
    sequence: RawSequence,
    selector: RawSelector,
    #[serde(default)]
    diagnostics: RawDiagnostics,
    #[serde(default)]
    oracle: RawOracle,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    gallery: Option<String>,
    file: Option<PathBuf>,
    k: Option<u32>,
    n: Option<usize>,
    l: Option<usize>,
    d: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSelector {
    name: String,
    horizon: Option<usize>,
    epsilon: Option<f64>,
    tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnostics {
    deltas: Option<Vec<f64>>,
    ks: Option<Vec<usize>>,
    sets: Option<String>,
    level: Option<u32>,
    tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    enabled: Option<bool>,
    prefix: Option<usize>,
    max_j: Option<usize>,
    max_evaluations: Option<u64>,
}

/// Where the sequence comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Rademacher { k: u32, n: usize, shifted: bool },
    Spike { k: u32, n: usize },
    MovingBump { l: usize, n: usize },
    Orthonormal { d: usize },
    /// As written in the config; resolved against the config's directory.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectorSpec {
    Hilbert,
    Szlenk { epsilon: f64 },
    Diagonal,
    Lp,
    /// `tol` is the level the trace is checked against.
    Okada { tol: f64 },
}

impl SelectorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SelectorSpec::Hilbert => "hilbert",
            SelectorSpec::Szlenk { .. } => "szlenk",
            SelectorSpec::Diagonal => "diagonal",
            SelectorSpec::Lp => "lp",
            SelectorSpec::Okada { .. } => "okada",
        }
    }

    /// Selectors whose argument needs the Dunford-Pettis precondition.
    pub fn needs_l1_witnesses(&self) -> bool {
        matches!(self, SelectorSpec::Szlenk { .. } | SelectorSpec::Diagonal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetFamily {
    Dyadic { level: u32 },
    Prefix,
    Singleton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSpec {
    pub deltas: Vec<f64>,
    /// `None`: the full atom count only.
    pub ks: Option<Vec<usize>>,
    pub sets: SetFamily,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub enabled: bool,
    /// Length `M` of the selection prefix enumerated by the oracle.
    pub prefix: usize,
    pub max_j: usize,
    pub budget: OracleBudget,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: f64,
    pub source: Source,
    pub selector: SelectorSpec,
    /// `None`: every term of the sequence.
    pub horizon: Option<usize>,
    pub diagnostics: DiagnosticsSpec,
    pub oracle: OracleSpec,
    pub output: Option<PathBuf>,
    /// Directory relative file paths are resolved against.
    pub base_dir: PathBuf,
}

fn positive(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::field(field, format!("must be a positive finite number, got {v}")))
    }
}

fn required<T>(field: &'static str, v: Option<T>, why: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::field(field, format!("required {why}")))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::validate(raw)
    }

    /// Reads and validates a config file; relative paths inside it are
    /// taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn validate(raw: RawConfig) -> Result<Self, ConfigError> {
        let p = raw.p;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(ConfigError::field("p", format!("must lie in [1, ∞), got {p}")));
        }

        let s = raw.sequence;
        let source = match (s.gallery.as_deref(), s.file) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field("sequence", "give either `gallery` or `file`, not both"))
            }
            (None, None) => return Err(ConfigError::field("sequence", "one of `gallery` or `file` is required")),
            (None, Some(f)) => Source::File(f),
            (Some(g), None) => {
                let why = |name: &str| format!("for gallery `{name}`");
                match g {
                    "rademacher" | "shifted-rademacher" => Source::Rademacher {
                        k: required("sequence.k", s.k, &why(g))?,
                        n: required("sequence.n", s.n, &why(g))?,
                        shifted: g == "shifted-rademacher",
                    },
                    "spike" => Source::Spike {
                        k: required("sequence.k", s.k, &why(g))?,
                        n: required("sequence.n", s.n, &why(g))?,
                    },
                    "moving-bump" => Source::MovingBump {
                        l: required("sequence.l", s.l, &why(g))?,
                        n: required("sequence.n", s.n, &why(g))?,
                    },
                    "orthonormal" => Source::Orthonormal { d: required("sequence.d", s.d, &why(g))? },
                    other => {
                        return Err(ConfigError::field(
                            "sequence.gallery",
                            format!(
                                "unknown gallery `{other}` (rademacher, shifted-rademacher, spike, moving-bump, orthonormal)"
                            ),
                        ))
                    }
                }
            }
        };

        let sel = raw.selector;
        let selector = match sel.name.as_str() {
            "hilbert" => SelectorSpec::Hilbert,
            "szlenk" => SelectorSpec::Szlenk {
                epsilon: positive("selector.epsilon", required("selector.epsilon", sel.epsilon, "for `szlenk`")?)?,
            },
            "diagonal" => SelectorSpec::Diagonal,
            "lp" => SelectorSpec::Lp,
            "okada" => SelectorSpec::Okada { tol: positive("selector.tol", sel.tol.unwrap_or(0.2))? },
            other => {
                return Err(ConfigError::field(
                    "selector.name",
                    format!("unknown selector `{other}` (hilbert, szlenk, diagonal, lp, okada)"),
                ))
            }
        };
        match selector {
            SelectorSpec::Hilbert if p != 2.0 => {
                return Err(ConfigError::field("p", format!("selector `hilbert` requires p = 2, got {p}")))
            }
            SelectorSpec::Szlenk { .. } | SelectorSpec::Diagonal if p != 1.0 => {
                return Err(ConfigError::field("p", format!("selector `{}` requires p = 1, got {p}", selector.name())))
            }
            SelectorSpec::Lp | SelectorSpec::Okada { .. } if p <= 1.0 => {
                return Err(ConfigError::field("p", format!("selector `{}` requires p > 1, got {p}", selector.name())))
            }
            _ => {}
        }
        if sel.epsilon.is_some() && !matches!(selector, SelectorSpec::Szlenk { .. }) {
            return Err(ConfigError::field("selector.epsilon", "only used by `szlenk`"));
        }
        if sel.tol.is_some() && !matches!(selector, SelectorSpec::Okada { .. }) {
            return Err(ConfigError::field("selector.tol", "only used by `okada`"));
        }
        if sel.horizon == Some(0) {
            return Err(ConfigError::field("selector.horizon", "must be at least 1"));
        }

        let d = raw.diagnostics;
        let deltas = match d.deltas {
            Some(v) if v.is_empty() => return Err(ConfigError::field("diagnostics.deltas", "must not be empty")),
            Some(v) => v.into_iter().map(|x| positive("diagnostics.deltas", x)).collect::<Result<_, _>>()?,
            None => (1..=10).map(|i| 0.5f64.powi(i)).collect(),
        };
        if matches!(&d.ks, Some(v) if v.is_empty()) {
            return Err(ConfigError::field("diagnostics.ks", "must not be empty"));
        }
        let sets = match d.sets.as_deref().unwrap_or("dyadic") {
            "dyadic" => SetFamily::Dyadic { level: d.level.unwrap_or(4) },
            "prefix" => SetFamily::Prefix,
            "singleton" => SetFamily::Singleton,
            other => {
                return Err(ConfigError::field(
                    "diagnostics.sets",
                    format!("unknown set family `{other}` (dyadic, prefix, singleton)"),
                ))
            }
        };
        if d.level.is_some() && !matches!(sets, SetFamily::Dyadic { .. }) {
            return Err(ConfigError::field("diagnostics.level", "only used with `sets = \"dyadic\"`"));
        }
        let diagnostics = DiagnosticsSpec {
            deltas,
            ks: d.ks,
            sets,
            tol: positive("diagnostics.tol", d.tol.unwrap_or(1e-2))?,
        };

        let o = raw.oracle;
        let mut budget = OracleBudget::default();
        if let Some(cap) = o.max_evaluations {
            if cap == 0 {
                return Err(ConfigError::field("oracle.max_evaluations", "must be at least 1"));
            }
            budget.max_evaluations = cap as u128;
        }
        let prefix = o.prefix.unwrap_or(12);
        if prefix == 0 || prefix > budget.max_horizon {
            return Err(ConfigError::field("oracle.prefix", format!("must lie in 1..={}", budget.max_horizon)));
        }
        let max_j = o.max_j.unwrap_or(6);
        if max_j == 0 || max_j > budget.max_j {
            return Err(ConfigError::field("oracle.max_j", format!("must lie in 1..={}", budget.max_j)));
        }
        let oracle = OracleSpec { enabled: o.enabled.unwrap_or(false), prefix, max_j, budget };

        Ok(Self {
            p,
            source,
            selector,
            horizon: sel.horizon,
            diagnostics,
            oracle,
            output: raw.output,
            base_dir: PathBuf::new(),
        })
    }

    /// Resolved parameters in a fixed order, for the run manifest.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        put("p", crate::report::num(self.p));
        match &self.source {
            Source::Rademacher { k, n, shifted } => {
                put("sequence.gallery", if *shifted { "shifted-rademacher" } else { "rademacher" }.into());
                put("sequence.k", k.to_string());
                put("sequence.n", n.to_string());
            }
            Source::Spike { k, n } => {
                put("sequence.gallery", "spike".into());
                put("sequence.k", k.to_string());
                put("sequence.n", n.to_string());
            }
            Source::MovingBump { l, n } => {
                put("sequence.gallery", "moving-bump".into());
                put("sequence.l", l.to_string());
                put("sequence.n", n.to_string());
            }
            Source::Orthonormal { d } => {
                put("sequence.gallery", "orthonormal".into());
                put("sequence.d", d.to_string());
            }
            Source::File(f) => put("sequence.file", f.display().to_string()),
        }
        put("selector.name", self.selector.name().into());
        match self.selector {
            SelectorSpec::Szlenk { epsilon } => put("selector.epsilon", crate::report::num(epsilon)),
            SelectorSpec::Okada { tol } => put("selector.tol", crate::report::num(tol)),
            _ => {}
        }
        put("selector.horizon", self.horizon.map_or("all".into(), |h| h.to_string()));
        let list = |v: &[f64]| v.iter().map(|&x| crate::report::num(x)).collect::<Vec<_>>().join(",");
        put("diagnostics.deltas", list(&self.diagnostics.deltas));
        put(
            "diagnostics.ks",
            self.diagnostics.ks.as_ref().map_or("atoms".into(), |k| {
                k.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            }),
        );
        put(
            "diagnostics.sets",
            match self.diagnostics.sets {
                SetFamily::Dyadic { level } => format!("dyadic(level={level})"),
                SetFamily::Prefix => "prefix".into(),
                SetFamily::Singleton => "singleton".into(),
            },
        );
        put("diagnostics.tol", crate::report::num(self.diagnostics.tol));
        put("oracle.enabled", self.oracle.enabled.to_string());
        put("oracle.prefix", self.oracle.prefix.to_string());
        put("oracle.max_j", self.oracle.max_j.to_string());
        put("oracle.max_evaluations", self.oracle.budget.max_evaluations.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
p = 2.0
[sequence]
gallery = "rademacher"
k = 10
n = 8
[selector]
name = "hilbert"
horizon = 8
"#;

    fn field_of(text: &str) -> &'static str {
        match ExperimentConfig::from_toml_str(text) {
            Err(ConfigError::Field { field, .. }) => field,
            other => panic!("expected a field error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.source, Source::Rademacher { k: 10, n: 8, shifted: false });
        assert_eq!(c.selector, SelectorSpec::Hilbert);
        assert_eq!(c.diagnostics.deltas.len(), 10);
        assert_eq!(c.diagnostics.sets, SetFamily::Dyadic { level: 4 });
        assert!(!c.oracle.enabled);
    }

    #[test]
    fn selector_exponent_mismatch_names_p() {
        assert_eq!(field_of(&BASE.replace("p = 2.0", "p = 1.0")), "p");
        let szlenk = BASE.replace("name = \"hilbert\"", "name = \"szlenk\"\nepsilon = 0.1");
        assert_eq!(field_of(&szlenk), "p");
        assert!(ExperimentConfig::from_toml_str(&szlenk.replace("p = 2.0", "p = 1.0")).is_ok());
    }

    #[test]
    fn bad_fields_are_named() {
        assert_eq!(field_of(&BASE.replace("gallery = \"rademacher\"", "gallery = \"nope\"")), "sequence.gallery");
        assert_eq!(field_of(&BASE.replace("k = 10\n", "")), "sequence.k");
        assert_eq!(field_of(&format!("{BASE}[diagnostics]\ntol = -1.0\n")), "diagnostics.tol");
        assert_eq!(field_of(&format!("{BASE}[diagnostics]\ndeltas = []\n")), "diagnostics.deltas");
        assert_eq!(field_of(&format!("{BASE}[oracle]\nmax_j = 9\n")), "oracle.max_j");
        let szlenk = BASE.replace("name = \"hilbert\"", "name = \"szlenk\"").replace("p = 2.0", "p = 1.0");
        assert_eq!(field_of(&szlenk), "selector.epsilon");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml_str(&format!("{BASE}[oracle]\nbogus = 1\n")),
            Err(ConfigError::Parse(_))
        ));
    }
}
