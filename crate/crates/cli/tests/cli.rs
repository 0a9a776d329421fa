use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qwalk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = qwalk(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_schema(schema: &str, path: &Path) {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(schema);
    let schema = read_json(&schema_path);
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let instance = read_json(path);
    let errors: Vec<String> = validator
        .iter_errors(&instance)
        .map(|e| e.to_string())
        .collect();
    assert!(
        errors.is_empty(),
        "{} vs {}: {errors:#?}",
        path.display(),
        schema_path.display()
    );
}

/// `(m1, n1, m2, n2) -> (p, std_error)` from a pair CSV.
fn read_pairs(path: &Path) -> BTreeMap<(i32, i32, i32, i32), (f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut out = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let key = (
            f[0].parse().unwrap(),
            f[1].parse().unwrap(),
            f[2].parse().unwrap(),
            f[3].parse().unwrap(),
        );
        let err = f.get(5).map_or(0.0, |e| e.parse().unwrap());
        out.insert(key, (f[4].parse().unwrap(), err));
    }
    out
}

#[test]
fn simulate_writes_one_normalized_file_pair_per_step() {
    let dir = TempDir::new().unwrap();
    ok(&["simulate"], dir.path());
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let want: Vec<String> = (0..=3)
        .flat_map(|t| [format!("step_{t}.csv"), format!("step_{t}.json")])
        .collect();
    let mut want_sorted = want.clone();
    want_sorted.sort();
    assert_eq!(names, want_sorted);
    for t in 0..=3 {
        let csv = fs::read_to_string(dir.path().join(format!("step_{t}.csv"))).unwrap();
        let total: f64 = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10, "step {t}: {total}");
        let json = dir.path().join(format!("step_{t}.json"));
        assert_schema("distribution.schema.json", &json);
        assert_eq!(read_json(&json)["step"], t);
    }
}

#[test]
fn two_photon_default_configuration() {
    let dir = TempDir::new().unwrap();
    ok(&["two-photon"], dir.path());
    let summary = dir.path().join("summary.json");
    assert_schema("two_photon_summary.schema.json", &summary);
    let s = read_json(&summary);
    assert_eq!(s["steps"].as_array().unwrap().len(), 3);
    for t in 1..=3 {
        assert_schema(
            "violation.schema.json",
            &dir.path().join(format!("step_{t}_violation.json")),
        );
        let lin = fs::read_to_string(dir.path().join(format!("step_{t}_linearized.csv"))).unwrap();
        for line in lin.lines().skip(1) {
            let f: Vec<i32> = line
                .split(',')
                .take(2)
                .map(|x| x.parse().unwrap())
                .collect();
            assert!(f.iter().all(|l| (-24..=24).contains(l)), "{line}");
        }
    }
    assert!(s["steps"][0]["positive_pairs"].as_u64().unwrap() > 0);
}

#[test]
fn classical_two_photon_run_has_no_positive_witness() {
    let dir = TempDir::new().unwrap();
    ok(&["two-photon", "--c0", "0"], dir.path());
    let s = read_json(&dir.path().join("summary.json"));
    for step in s["steps"].as_array().unwrap() {
        assert_eq!(step["positive_pairs"], 0, "{step}");
    }
}

#[test]
fn hom_surface_peaks_at_pi_pi() {
    let dir = TempDir::new().unwrap();
    ok(&["hom"], dir.path());
    let csv = fs::read_to_string(dir.path().join("hom_surface.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 33 * 33);
    let pi = std::f64::consts::PI;
    let centre = rows
        .iter()
        .find(|r| (r[0] - pi).abs() < 1e-12 && (r[1] - pi).abs() < 1e-12)
        .expect("grid contains (pi, pi)");
    assert_eq!(centre[2], 1.0);
    let summary = dir.path().join("hom.json");
    assert_schema("hom.schema.json", &summary);
    let v = read_json(&summary)["scan"]["visibility"].as_f64().unwrap();
    assert!((v - 0.95).abs() < 1e-12);
}

#[test]
fn geometry_prints_the_pitch_check() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&["geometry"], dir.path());
    let line = stdout.lines().find(|l| l.starts_with("|d3|")).unwrap();
    assert!(line.contains("251.2") && line.ends_with("PASS"), "{line}");
    assert_schema("geometry.schema.json", &dir.path().join("geometry.json"));

    let layout = dir.path().join("layout.json");
    fs::write(&layout, r#"{ "layout": { "f1": 0.3, "f2": 0.03, "f3": 2.0, "f4": 0.2, "f5": 0.05, "f6": 0.8, "d0": 0.00314, "grating_period": 0.005 } }"#).unwrap();
    let stdout = ok(
        &["geometry", "--layout", layout.to_str().unwrap()],
        dir.path(),
    );
    let line = stdout.lines().find(|l| l.starts_with("|d3|")).unwrap();
    assert!(line.contains("502.4") && line.ends_with("FAIL"), "{line}");
}

#[test]
fn process_counts_recovers_the_theory() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let theory = p.join("theory");
    let fixture = p.join("fixture");
    let result = p.join("result");
    ok(&["two-photon"], &theory);
    ok(&["synthesize-counts", "--seed", "21"], &fixture);
    assert_schema(
        "counts_metadata.schema.json",
        &fixture.join("metadata.json"),
    );
    let f = |n: &str| fixture.join(n).to_str().unwrap().to_string();
    let args = [
        "process-counts",
        "--coincidences",
        &f("coincidences.csv"),
        "--modes",
        &f("modes.csv"),
        "--metadata",
        &f("metadata.json"),
        "--n-boot",
        "200",
    ];
    ok(&args, &result);
    assert_schema("similarity.schema.json", &result.join("similarity.json"));
    assert_schema("violation.schema.json", &result.join("violation.json"));
    let sim = read_json(&result.join("similarity.json"))["value"]
        .as_f64()
        .unwrap();
    assert!(sim > 0.99, "{sim}");

    let want = read_pairs(&theory.join("step_3_pairs.csv"));
    let got = read_pairs(&result.join("corrected.csv"));
    let keys: std::collections::BTreeSet<_> = want.keys().chain(got.keys()).collect();
    for k in keys {
        let t = want.get(k).map_or(0.0, |v| v.0);
        let (e, s) = got.get(k).copied().unwrap_or((0.0, 0.0));
        assert!((e - t).abs() <= 5.0 * s, "{k:?}: {e} +/- {s} vs {t}");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let code = |o: Output| o.status.code().unwrap();

    assert_eq!(code(qwalk(&["simulate", "--protocol", "C(PI) TX("], p)), 2);
    assert_eq!(
        code(qwalk(
            &["simulate", "--photon", "0,0,L", "--photon", "1,0,R"],
            p
        )),
        2
    );
    assert_eq!(code(qwalk(&["two-photon", "--c0", "1.5"], p)), 2);
    assert_eq!(
        code(qwalk(
            &[
                "process-counts",
                "--n-boot",
                "10",
                "--coincidences",
                "a",
                "--modes",
                "b",
                "--metadata",
                "c"
            ],
            p
        )),
        4
    );
    assert_eq!(
        code(qwalk(
            &["geometry", "--layout", "/definitely/missing.json"],
            p
        )),
        4
    );

    let blocker = p.join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(code(qwalk(&["simulate"], &blocker.join("sub"))), 4);

    let threads = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["simulate", "--out-dir"])
        .arg(p.join("t"))
        .env("QWALK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(threads), 2);

    let counts = p.join("empty");
    fs::create_dir_all(&counts).unwrap();
    fs::write(
        counts.join("coincidences.csv"),
        "m1,n1,m2,n2,counts\n0,0,1,0,0\n",
    )
    .unwrap();
    fs::write(
        counts.join("modes.csv"),
        "m,n,singles_hz,efficiency\n0,0,100,0.9\n1,0,100,0.9\n",
    )
    .unwrap();
    fs::write(
        counts.join("metadata.json"),
        r#"{"acquisition_time": 10, "window": 1e-9, "fbs_transmissivity": 0.5}"#,
    )
    .unwrap();
    let c = |n: &str| counts.join(n).to_str().unwrap().to_string();
    let args = [
        "process-counts",
        "--coincidences",
        &c("coincidences.csv"),
        "--modes",
        &c("modes.csv"),
        "--metadata",
        &c("metadata.json"),
    ];
    assert_eq!(code(qwalk(&args, &p.join("out"))), 3);
}
