mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use visdiv::synthetic::{generate, SyntheticSpec};

fn visdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_visdiv")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Only the run directory under `out`.
fn run_dir(out: &Path) -> PathBuf {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn small_config(dir: &Path, attributes: &str) -> PathBuf {
    let spec = SyntheticSpec {
        concepts_per_class: 5,
        images_per_concept: 6,
        side: 48,
        ..SyntheticSpec::default()
    };
    generate(&dir.join("corpus"), &spec).unwrap();
    write_config(
        dir,
        &format!(
            r#"manifest = "corpus/manifest.jsonl"
norms = "corpus/norms.csv"
out = "out"
seed = 3
condition = 6
attributes = [{attributes}]

[corpus]
min_side = 48
canonical_side = 48

[codebook]
k = 8
max_points = 40

[classify]
folds = 2
models = ["RandomForest", "LogisticRegression"]
forest_grid = [{{ n_estimators = 20, max_depth = 4, min_samples_split = 2, min_samples_leaf = 1, max_features = "sqrt" }}]

[regress]
splits = 3
"#
        ),
    )
}

#[test]
fn extract_color_on_two_images_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        concepts_per_class: 1,
        images_per_concept: 1,
        // the default size filter keeps images of at least 256 px
        side: 256,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&tmp.path().join("corpus"), &spec).unwrap();
    let out = tmp.path().join("out");
    let args = [
        "--manifest",
        corpus.manifest.to_str().unwrap(),
        "--norms",
        corpus.norms.to_str().unwrap(),
        "--attributes",
        "Color",
        "--out",
        out.to_str().unwrap(),
    ];
    assert!(visdiv(&[&["ingest"], &args[..]].concat()).status.success());
    let first = visdiv(&[&["extract"], &args[..]].concat());
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(String::from_utf8_lossy(&first.stdout).contains("Color: 2 rows (2 new, 0 failed)"));

    let store = std::fs::read_to_string(run_dir(&out).join("features/Color.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> = store.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["dim"] == 96 && r["values"].as_array().unwrap().len() == 96));

    let again = visdiv(&[&["extract"], &args[..]].concat());
    assert_eq!(again.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&again.stdout).contains("Color: 2 rows (0 new, 0 failed)"));
    assert_eq!(std::fs::read_to_string(run_dir(&out).join("features/Color.jsonl")).unwrap(), store);
}

#[test]
fn surf_without_codebook_names_the_step() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#""SURF""#);
    let cfg = cfg.to_str().unwrap();
    assert!(visdiv(&["ingest", "--config", cfg]).status.success());
    let o = visdiv(&["extract", "--config", cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`codebook`"), "{}", stderr(&o));
    assert!(visdiv(&["codebook", "--config", cfg]).status.success());
    assert!(visdiv(&["extract", "--config", cfg]).status.success());
}

#[test]
fn analysis_reports_have_the_expected_shape_and_repeat_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#""Color", "HOG""#);
    let cfg = cfg.to_str().unwrap();
    for step in ["ingest", "extract", "diversity", "classify", "regress", "neighbors", "stats"] {
        let o = visdiv(&[step, "--config", cfg]);
        assert!(o.status.success(), "{step}: {}", stderr(&o));
    }
    let dir = run_dir(&tmp.path().join("out"));
    let reports = common::snapshot(&dir.join("reports"));

    let classify: serde_json::Value = serde_json::from_slice(&reports[Path::new("classify_c6.json")]).unwrap();
    assert_eq!(classify["seed"], 3);
    assert_eq!(classify["config_hash"].as_str().unwrap(), dir.file_name().unwrap().to_str().unwrap());
    for row in classify["results"].as_array().unwrap() {
        assert!(row["report"]["weighted_f1"].is_f64());
        let per_class = row["report"]["per_class_f1"].as_object().unwrap();
        assert!(per_class.contains_key("abstract") && per_class.contains_key("concrete"));
    }
    let csv = String::from_utf8(reports[Path::new("neighbors_c6.csv")].clone()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "attribute,A,C");
    assert_eq!(lines[1].split(',').next(), Some("Color"));
    assert_eq!(lines[2].split(',').next(), Some("HOG"));
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
    for svg in ["classify_c6.svg", "classwise_c6.svg", "neighbors_c6.svg"] {
        assert!(reports[Path::new(svg)].starts_with(b"<svg"), "{svg}");
    }

    for step in ["classify", "regress", "neighbors", "stats"] {
        assert!(visdiv(&[step, "--config", cfg, "--workers", "3"]).status.success());
    }
    assert_eq!(common::snapshot(&dir.join("reports")), reports);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#""Color""#);
    let out = tmp.path().join("elsewhere");
    let o = visdiv(&["ingest", "--config", cfg.to_str().unwrap(), "--seed", "11", "--condition", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = std::fs::read_to_string(run_dir(&out).join("config.toml")).unwrap();
    assert!(written.contains("seed = 11") && written.contains("condition = 5"));
}

#[test]
fn too_few_concepts_for_the_folds_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#""Color""#);
    let cfg = cfg.to_str().unwrap();
    for step in ["ingest", "extract", "diversity"] {
        assert!(visdiv(&[step, "--config", cfg]).status.success());
    }
    std::fs::write(
        tmp.path().join("run.toml"),
        std::fs::read_to_string(tmp.path().join("run.toml")).unwrap().replace("folds = 2", "folds = 6"),
    )
    .unwrap();
    // a different fold count is a different run directory, so repeat the earlier steps
    for step in ["ingest", "extract", "diversity"] {
        assert!(visdiv(&[step, "--config", cfg]).status.success());
    }
    let o = visdiv(&["classify", "--config", cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("5 abstract and 5 concrete"), "{}", stderr(&o));
}

#[test]
fn exit_codes_separate_input_errors_from_runtime_failures() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(visdiv(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(visdiv(&["ingest"]).status.code(), Some(1));
    let bad = write_config(tmp.path(), "manifest = \"m\"\nnorms = \"n\"\nunknown_key = 1\n");
    let o = visdiv(&["ingest", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.toml:3"), "{}", stderr(&o));

    // a valid configuration whose output location is a plain file
    let spec = SyntheticSpec {
        concepts_per_class: 1,
        images_per_concept: 1,
        side: 32,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&tmp.path().join("corpus"), &spec).unwrap();
    let blocker = tmp.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let o = visdiv(&["ingest", "--manifest", corpus.manifest.to_str().unwrap(), "--norms", corpus.norms.to_str().unwrap(), "--attributes", "Color", "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
