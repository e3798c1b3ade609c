use std::path::Path;
use std::process::Command;

use cesaro_cli::config::ExperimentConfig;
use cesaro_cli::report::CONVERGENCE_HEADER;
use cesaro_cli::run::run_experiment;
use cesaro_cli::table::read_sequence;
use cesaro_core::gallery::make_rademacher;

fn cesaro() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cesaro"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const HILBERT: &str = r#"
p = 2.0
[sequence]
gallery = "rademacher"
k = 10
n = 8
[selector]
name = "hilbert"
horizon = 8
[oracle]
enabled = true
prefix = 8
"#;

#[test]
fn gallery_file_feeds_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", HILBERT);
    let csv = dir.path().join("rad.csv");
    let st = cesaro().args(["gallery", "--config"]).arg(&cfg).arg("--out").arg(&csv).status().unwrap();
    assert!(st.success());
    let back = read_sequence(&csv).unwrap();
    let orig = make_rademacher(10, 8).unwrap();
    for n in 0..8 {
        assert_eq!(back.term(n).values(), orig.term(n).values());
    }

    let from_file = HILBERT.replace("gallery = \"rademacher\"\nk = 10\nn = 8", "file = \"rad.csv\"");
    let cfg2 = write(dir.path(), "f.toml", &from_file);
    let out = dir.path().join("out");
    let st = cesaro().args(["run", "--config"]).arg(&cfg2).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    let conv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(conv.lines().next().unwrap(), CONVERGENCE_HEADER);
}

#[test]
fn hilbert_bound_column_is_the_formula() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml_str(HILBERT).unwrap();
    run_experiment(&cfg, dir.path()).unwrap();
    let conv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    for (i, line) in conv.lines().skip(1).enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        let j = (i + 1) as f64;
        assert_eq!(cols[0].parse::<usize>().unwrap(), i + 1);
        assert_eq!(cols[2].parse::<f64>().unwrap(), (1.0f64 * 1.0 + 2.0) / j);
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("theorem = uniform Banach-Saks property of Hilbert spaces"));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = ExperimentConfig::from_toml_str(HILBERT).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = run_experiment(&cfg, a.path()).unwrap().files;
    let fb = run_experiment(&cfg, b.path()).unwrap().files;
    assert_eq!(fa.len(), 5);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn spike_with_szlenk_stops_after_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "p = 1.0\n[sequence]\ngallery = \"spike\"\nk = 10\nn = 10\n[selector]\nname = \"szlenk\"\nepsilon = 0.5\n[diagnostics]\ndeltas = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625]\n",
    );
    let out = dir.path().join("out");
    let res = cesaro().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("uniform integrability"));
    let diag = std::fs::read_to_string(out.join("diagnostics.txt")).unwrap();
    assert!(diag.contains("verdict = UI-failure"));
    assert!(!out.join("selection.csv").exists());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &HILBERT.replace("p = 2.0", "p = 3.0"));
    let res = cesaro().args(["diagnose", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`p`"));
}

#[test]
fn verify_with_seed_passes() {
    let dir = tempfile::tempdir().unwrap();
    let small = "p = 2.0\n[sequence]\ngallery = \"rademacher\"\nk = 3\nn = 3\n[selector]\nname = \"hilbert\"\n[diagnostics]\nlevel = 3\n[oracle]\nprefix = 3\nmax_j = 3\n";
    let cfg = write(dir.path(), "v.toml", small);
    let res = cesaro().args(["verify", "--seed", "7", "--config"]).arg(&cfg).output().unwrap();
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "{text}");
    for name in ["ui-modulus", "weak-test", "replay", "oracle-vs-certificate", "duality-identities"] {
        assert!(text.contains(&format!("PASS {name}")), "{text}");
    }
}
