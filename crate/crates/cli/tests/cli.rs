use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn landtopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landtopo"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .expect("run landtopo")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let out = dir.join("syn");
    let o = landtopo(&["synth", "--out", s(&out), "--n", &n.to_string(), "--seed", &seed.to_string()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn featurize(syn: &Path, out: &Path, extra: &[&str]) -> Output {
    let inv = syn.join("inventory.geojson");
    let dem = syn.join("dem.asc");
    let mut args = vec!["featurize", "--inventory", s(&inv), "--dem", s(&dem), "--out", s(out)];
    args.extend(extra);
    landtopo(&args)
}

fn header(csv: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(csv).unwrap();
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

fn rows(csv: &Path) -> usize {
    std::fs::read_to_string(csv).unwrap().lines().count() - 1
}

/// Hand-made feature CSV: `per_class` rows of each class, classes far apart
/// in every column.
fn separable_csv(path: &Path, columns: &[&str], classes: &[&str], per_class: usize) {
    let mut text = format!("id,{},label\n", columns.join(","));
    for (c, class) in classes.iter().enumerate() {
        for i in 0..per_class {
            let vals: Vec<String> = (0..columns.len())
                .map(|j| format!("{}", 100.0 * c as f64 + ((i * 7 + j * 3) % 11) as f64))
                .collect();
            text.push_str(&format!("{class}_{i},{},{class}\n", vals.join(",")));
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn synth_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let sa = synth(a.path(), 3, 9);
    let sb = synth(b.path(), 3, 9);
    for f in ["inventory.geojson", "dem.asc", "manifest.json"] {
        assert_eq!(std::fs::read(sa.join(f)).unwrap(), std::fs::read(sb.join(f)).unwrap(), "{f}");
    }
    let inv: Value = serde_json::from_slice(&std::fs::read(sa.join("inventory.geojson")).unwrap()).unwrap();
    assert_eq!(inv["features"].as_array().unwrap().len(), 12);
}

#[test]
fn featurize_schema_and_determinism() {
    let dir = TempDir::new().unwrap();
    let syn = synth(dir.path(), 5, 1);
    let plain = dir.path().join("plain.csv");
    let o = featurize(&syn, &plain, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(rows(&plain), 20);
    // id + 18 topological + label
    assert_eq!(header(&plain).len(), 20);

    let geo = dir.path().join("geo.csv");
    assert_eq!(code(&featurize(&syn, &geo, &["--with-geometry"])), 0);
    assert_eq!(header(&geo).len(), 28);

    let again = dir.path().join("again.csv");
    assert_eq!(code(&featurize(&syn, &again, &[])), 0);
    assert_eq!(std::fs::read(&plain).unwrap(), std::fs::read(&again).unwrap());

    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("plain.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n_points"], 128);
    assert_eq!(meta["config"]["curve_bins"], 100);
}

#[test]
fn record_outside_dem_is_skipped() {
    let dir = TempDir::new().unwrap();
    let syn = synth(dir.path(), 2, 4);
    let path = syn.join("inventory.geojson");
    let mut inv: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    inv["features"].as_array_mut().unwrap().push(json!({
        "type": "Feature",
        "id": "faraway",
        "properties": {"failure_type": "slide"},
        "geometry": {"type": "Polygon", "coordinates": [[[1e6, 1e6], [1e6 + 50.0, 1e6], [1e6, 1e6 + 50.0], [1e6, 1e6]]]}
    }));
    std::fs::write(&path, serde_json::to_vec(&inv).unwrap()).unwrap();
    let out = dir.path().join("f.csv");
    let o = featurize(&syn, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(rows(&out), 8);
    let err = stderr(&o);
    assert!(err.contains("1 failed") && err.contains("faraway"), "{err}");
}

#[test]
fn empty_and_unreadable_inputs() {
    let dir = TempDir::new().unwrap();
    let syn = synth(dir.path(), 1, 2);
    let inv = dir.path().join("far.geojson");
    std::fs::write(
        &inv,
        r#"{"type":"FeatureCollection","features":[{"type":"Feature","properties":{"failure_type":"flow"},
        "geometry":{"type":"Polygon","coordinates":[[[-500,-500],[-400,-500],[-400,-400],[-500,-500]]]}}]}"#,
    )
    .unwrap();
    let dem = syn.join("dem.asc");
    let out = dir.path().join("f.csv");
    let o = landtopo(&["featurize", "--inventory", s(&inv), "--dem", s(&dem), "--out", s(&out)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(!out.exists());

    let missing = dir.path().join("nope.geojson");
    let o = landtopo(&["featurize", "--inventory", s(&missing), "--dem", s(&dem), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope.geojson"));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n_pointz = 64\n").unwrap();
    let o = landtopo(&["featurize", "--config", s(&cfg), "--inventory", s(&inv), "--dem", s(&dem), "--out", s(&out)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn train_select_and_determinism() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("f.csv");
    let cols: Vec<String> = (0..10).map(|j| format!("x{j}")).collect();
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    separable_csv(&csv, &cols, &["slide", "flow", "fall"], 20);

    let m6 = dir.path().join("m6.json");
    let o = landtopo(&["train", "--features", s(&csv), "--model", s(&m6), "--select", "6", "--n-trees", "30"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let model: Value = serde_json::from_slice(&std::fs::read(&m6).unwrap()).unwrap();
    assert_eq!(model["feature_names"].as_array().unwrap().len(), 6);
    let trace: Value = serde_json::from_slice(&std::fs::read(dir.path().join("m6.json.selection.json")).unwrap()).unwrap();
    assert_eq!(trace["selected"].as_array().unwrap().len(), 6);
    assert!(trace["config"].is_object());

    let all = dir.path().join("all.json");
    assert_eq!(code(&landtopo(&["train", "--features", s(&csv), "--model", s(&all), "--n-trees", "30"])), 0);
    let model: Value = serde_json::from_slice(&std::fs::read(&all).unwrap()).unwrap();
    assert_eq!(model["feature_names"].as_array().unwrap().len(), 10);

    let again = dir.path().join("again.json");
    assert_eq!(code(&landtopo(&["train", "--features", s(&csv), "--model", s(&again), "--n-trees", "30"])), 0);
    assert_eq!(std::fs::read(&all).unwrap(), std::fs::read(&again).unwrap());

    let o = landtopo(&["train", "--features", s(&csv), "--model", s(&again), "--select", "11"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let one = dir.path().join("one.csv");
    separable_csv(&one, &["x0", "x1"], &["slide"], 10);
    let o = landtopo(&["train", "--features", s(&one), "--model", s(&again)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("two classes"));
}

#[test]
fn evaluate_separable_is_perfect() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("f.csv");
    separable_csv(&csv, &["a", "b", "c"], &["slide", "flow", "fall", "complex"], 20);
    let report = dir.path().join("r.json");
    let o = landtopo(&[
        "evaluate", "--features", s(&csv), "--report", s(&report), "--folds", "10", "--repeats", "2", "--n-trees", "20",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["micro_f1"], 1.0);
    assert_eq!(r["config"]["folds"], 10);
    assert_eq!(r["config"]["forest"]["n_trees"], 20);
    let cm = std::fs::read_to_string(dir.path().join("r.json.confusion.csv")).unwrap();
    assert_eq!(cm.lines().count(), 5);
}

#[test]
fn sweep_writes_one_row_per_size() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("f.csv");
    separable_csv(&csv, &["a", "b"], &["slide", "flow"], 110);
    let out = dir.path().join("s.csv");
    let o = landtopo(&[
        "sweep", "--features", s(&csv), "--sizes", "10,25,50,100", "--out", s(&out), "--n-trees", "10", "--repeats", "2",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(rows(&out), 4);
}

#[test]
fn predict_and_decompose() {
    let dir = TempDir::new().unwrap();
    let syn = synth(dir.path(), 4, 6);
    let csv = dir.path().join("f.csv");
    assert_eq!(code(&featurize(&syn, &csv, &["--with-geometry"])), 0);
    let inv = syn.join("inventory.geojson");
    let dem = syn.join("dem.asc");

    let model = dir.path().join("m.json");
    assert_eq!(code(&landtopo(&["train", "--features", s(&csv), "--model", s(&model), "--n-trees", "30"])), 0);
    let out = dir.path().join("p.geojson");
    let o = landtopo(&["predict", "--model", s(&model), "--inventory", s(&inv), "--dem", s(&dem), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let labeled: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let features = labeled["features"].as_array().unwrap();
    assert_eq!(features.len(), 16);
    for f in features {
        let p = &f["properties"];
        assert!(p["predicted_class"].is_string());
        let total: f64 = ["slide", "flow", "fall", "complex"].iter().map(|c| p[format!("p_{c}")].as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    // a slide/flow/fall model for decomposition
    let text = std::fs::read_to_string(&csv).unwrap();
    let simple: String = text.lines().filter(|l| !l.ends_with(",complex")).map(|l| format!("{l}\n")).collect();
    let simple_csv = dir.path().join("simple.csv");
    std::fs::write(&simple_csv, simple).unwrap();
    let m3 = dir.path().join("m3.json");
    assert_eq!(code(&landtopo(&["train", "--features", s(&simple_csv), "--model", s(&m3), "--n-trees", "30"])), 0);
    let table = dir.path().join("d.csv");
    let o = landtopo(&[
        "decompose", "--model", s(&m3), "--inventory", s(&inv), "--dem", s(&dem), "--group-key", "behaviour", "--out", s(&table),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = std::fs::read_to_string(&table).unwrap();
    // one row per (group, class)
    assert_eq!(summary.lines().count(), 4, "{summary}");
    assert!(summary.lines().skip(1).all(|l| l.starts_with("slide_flow,") && l.split(',').nth(2) == Some("4")), "{summary}");
    assert_eq!(rows(&dir.path().join("d.csv.records.csv")), 4);

    // the four-class model is not a decomposition model
    let o = landtopo(&["decompose", "--model", s(&model), "--inventory", s(&inv), "--dem", s(&dem), "--out", s(&table)]);
    assert_eq!(code(&o), 4);
}

#[test]
fn predict_with_missing_feature_names_it() {
    let dir = TempDir::new().unwrap();
    let syn = synth(dir.path(), 1, 8);
    let csv = dir.path().join("f.csv");
    separable_csv(&csv, &["AL_H", "mystery"], &["slide", "flow"], 10);
    let model = dir.path().join("m.json");
    assert_eq!(code(&landtopo(&["train", "--features", s(&csv), "--model", s(&model), "--n-trees", "5"])), 0);
    let inv = syn.join("inventory.geojson");
    let dem = syn.join("dem.asc");
    let out = dir.path().join("p.geojson");
    let o = landtopo(&["predict", "--model", s(&model), "--inventory", s(&inv), "--dem", s(&dem), "--out", s(&out)]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("mystery"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn help_states_defaults() {
    let help = |cmd: &str| String::from_utf8(landtopo(&[cmd, "--help"]).stdout).unwrap();
    let train = help("train");
    for needle in ["500", "ceil(sqrt(m))", "unlimited", "[default: 1]", "0.9", "default 6", "balanced"] {
        assert!(train.contains(needle), "train --help lacks {needle:?}");
    }
    let eval = help("evaluate");
    assert!(eval.contains("Folds [default: 10]") && eval.contains("[default: 10]"));
    let feat = help("featurize");
    for needle in ["[default: 128]", "[default: 100]", "cap/20", "equirectangular"] {
        assert!(feat.contains(needle), "featurize --help lacks {needle:?}");
    }
    assert!(help("select").contains("[default: 0.9]"));
}
