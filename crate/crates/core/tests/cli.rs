use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_rclocality");

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.edges"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().expect("spawn");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Data rows of a CSV table, comments and column line dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn exact_single_edge_connection_is_one_third() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let g = corpus("single_edge");
    let (code, _, err) = run(&["exact", "--graph", g.to_str().unwrap(), "--q", "2", "--p", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out.join("exact.csv"));
    assert_eq!(r.len(), 1);
    let conn: f64 = r[0][2].parse().unwrap();
    let two: f64 = r[0][3].parse().unwrap();
    // Weights: closed edge q^2 = 4, open edge (p/(1-p)) q = 2.
    assert!((conn - 2.0 / 6.0).abs() < 1e-14);
    assert!((two - conn).abs() < 1e-14);
    let header = std::fs::read_to_string(out.join("exact.csv")).unwrap();
    assert!(header.contains("# lattice: single_edge"));
    assert!(header.contains("# seed: none"));
}

#[test]
fn greens_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = run(&["greens", "--lattice", "2x2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out.join("green.csv"));
    let origin = r.iter().find(|row| row[0] == "0" && row[1] == "0").unwrap();
    let g: f64 = origin[2].parse().unwrap();
    assert!((g - 0.625).abs() < 1e-12);
}

#[test]
fn p_and_beta_together_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let g = corpus("single_edge");
    let (code, _, err) = run(&[
        "exact", "--graph", g.to_str().unwrap(), "--q", "2", "--p", "0.5", "--beta", "0.3", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["error"]["kind"], "invalid_argument");
    assert!(rec["error"]["message"].as_str().unwrap().contains("p and beta"));
    assert!(err.contains("\"error\""));
    assert!(!out.join("manifest.toml").exists());
}

#[test]
fn config_file_conflict_also_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "command = \"exact\"\n[lattice]\nspec = \"2x2\"\n[model]\nq = 2\np = 0.5\nbeta = 0.2\n").unwrap();
    let (code, _, _) = run(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn capacity_error_names_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, _, _) = run(&["exact", "--lattice", "4x4", "--q", "2", "--p", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3);
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["error"]["kind"], "capacity");
    assert_eq!(rec["error"]["cap"], "24");
    assert_eq!(rec["error"]["requested"], "32");
}

#[test]
fn stochastic_command_needs_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "command = \"sample\"\n[lattice]\nspec = \"4x4\"\n[model]\nq = 2\np = 0.5\n[chain]\nsweeps = 100\n[sample]\nobservables = [\"wrapping\"]\n",
    )
    .unwrap();
    let (code, _, err) = run(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "command = \"greens\"\nlatice = 3\n").unwrap();
    let (code, _, _) = run(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn inconclusive_scan_writes_curves_and_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "command = \"pc-scan\"\nseed = 1\n[model]\nq = 2\n[chain]\nsweeps = 100\nburn_in = 10\n\
         [scan]\nfamily = \"torus\"\nd = 2\nsizes = [4, 6, 8]\ngrid = [0.05, 0.1]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let (code, _, _) = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert_eq!(rows(&out.join("curves.csv")).len(), 6);
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"inconclusive\""));
}

#[test]
fn manifest_rerun_is_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "command = \"sample\"\nseed = 11\n[lattice]\nspec = \"6x6\"\n[model]\nq = 1.5\np = 0.45\n\
         [chain]\nalgorithm = \"chayes_machta\"\nsweeps = 300\nburn_in = 20\n\
         [sample]\nobservables = [\"connect 0 7\", \"wrapping 0\", \"mean_cluster_fraction\"]\nchains = 3\nwrite_series = true\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let (code, _, err) = run(&["--config", cfg.to_str().unwrap(), "--workers", "1", "--out", a.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let manifest = a.join("manifest.toml");
    let (code, _, err) = run(&["--config", manifest.to_str().unwrap(), "--workers", "3", "--out", b.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?} differs");
    }
}

#[test]
fn graph_file_is_inlined_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let g = corpus("triangle");
    let (code, _, _) = run(&["exact", "--graph", g.to_str().unwrap(), "--q", "3", "--beta", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("edges = "));
    assert!(!manifest.contains("graph = "));
    let again = dir.path().join("again");
    let (code, _, _) = run(&["--config", out.join("manifest.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read(out.join("exact.csv")).unwrap(), std::fs::read(again.join("exact.csv")).unwrap());
}

#[test]
fn irb_check_small_torus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "command = \"irb-check\"\nseed = 5\n[lattice]\naxes = [{length = 4, wrap = \"periodic\"}, {length = 2, wrap = \"periodic\"}]\n\
         [model]\nq = 2\n[irb]\nbetas = [0.3, 0.9]\nrandom_vectors = 3\nlocality_sets = [[0, 1]]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    // Side 2 is below the smallest side the check accepts.
    assert_eq!(code, 2, "{err}");
    std::fs::write(
        &cfg,
        "command = \"irb-check\"\nseed = 5\n[lattice]\naxes = [{length = 4, wrap = \"periodic\"}, {length = 4, wrap = \"periodic\"}]\n\
         [model]\nq = 2\n[irb]\nbetas = [0.3, 0.9]\nrandom_vectors = 3\nlocality_sets = [[0, 1]]\n",
    )
    .unwrap();
    let (code, _, err) = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out.join("irb.csv"));
    assert_eq!(r.len(), 8);
    assert!(r.iter().all(|row| row[9] == "true"));
}

#[test]
fn shipped_configs_parse_and_cheap_ones_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let mut cfg = rclocality::cli::ExperimentConfig::load(&path).unwrap();
        cfg.normalize().unwrap();
        if let Some(m) = cfg.model {
            m.validate().unwrap();
        }
        count += 1;
    }
    assert!(count >= 8);
    let tmp = tempfile::tempdir().unwrap();
    for name in ["exact_single_edge", "greens_torus", "irb_check"] {
        let cfg = dir.join(format!("{name}.toml"));
        let out = tmp.path().join(name);
        let (code, _, err) = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}: {err}");
    }
}
