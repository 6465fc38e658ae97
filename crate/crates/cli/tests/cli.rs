use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;
use udisc_cli::files::{instance_to_file, parse_instance};
use udisc_cli::report::{emit, emit_value, FloatStyle};

fn udisc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_udisc")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn pair(prior_a: f64, a: [f64; 2], prior_b: f64, b: [f64; 2]) -> String {
    let state = |p: f64, v: [f64; 2]| {
        format!(
            r#"{{"prior": {p}, "matrix": [[[{}, 0], [{}, 0]], [[{}, 0], [{}, 0]]]}}"#,
            v[0] * v[0],
            v[0] * v[1],
            v[1] * v[0],
            v[1] * v[1]
        )
    };
    format!(r#"{{"dim": 2, "states": [{}, {}]}}"#, state(prior_a, a), state(prior_b, b))
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn exit_code_corpus() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let orth = write(&dir, "orth.json", &pair(0.5, [1.0, 0.0], 0.5, [0.0, 1.0]));
    let same = write(&dir, "same.json", &pair(0.5, [1.0, 0.0], 0.5, [1.0, 0.0]));
    let overlap = write(&dir, "overlap.json", &pair(0.5, [1.0, 0.0], 0.5, [h, h]));
    let heavy = write(&dir, "heavy.json", &pair(0.6, [1.0, 0.0], 0.6, [0.0, 1.0]));
    let broken = write(&dir, "broken.json", "{\"dim\": 2, \"states\": [");
    let unknown = write(&dir, "unknown.json", "{\"dim\": 2, \"states\": [], \"extra\": 1}");
    let not_psd = write(&dir, "not_psd.json", &pair(0.5, [1.0, 0.0], 0.5, [0.0, 1.0]).replacen("[[[1, 0]", "[[[-1, 0]", 1));
    let bad_povm = write(&dir, "bad_povm.json", r#"{"format": "udisc-povm/1", "dim": 2, "operators": []}"#);
    let missing = dir.path().join("missing.json");
    let out = dir.path().join("out.json");

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["check", s(&orth)], 0),
        (vec!["check", s(&same)], 1),
        (vec!["decompose", s(&same)], 0),
        (vec!["bound", s(&same)], 0),
        (vec!["solve", s(&orth)], 0),
        (vec!["solve", s(&overlap)], 0),
        (vec!["solve", s(&same)], 1),
        (vec!["synth", s(&same)], 1),
        (vec!["simulate", s(&same)], 1),
        (vec!["simulate", s(&orth), "--trials", "100"], 0),
        (vec!["solve", s(&overlap), "--max-iter", "1"], 3),
        (vec!["solve", s(&heavy)], 2),
        (vec!["solve", s(&heavy), "--normalize-priors"], 0),
        (vec!["check", s(&broken)], 2),
        (vec!["check", s(&unknown)], 2),
        (vec!["check", s(&not_psd)], 2),
        (vec!["check", s(&missing)], 2),
        (vec!["check", s(&orth), "--output", s(&out)], 2),
        (vec!["simulate", s(&orth), "--povm", s(&bad_povm)], 2),
        (vec!["simulate", s(&orth), "--trials", "0"], 2),
        (vec!["solve", s(&orth), "--gap-tol", "-1"], 2),
        (vec!["solve", s(&orth), "--format", "yaml"], 2),
        (vec!["frobnicate"], 2),
        (vec!["gen", "--dim", "2", "--m", "2", "--ranks", "3"], 2),
        (vec!["gen", "--dim", "2", "--m", "3", "--ranks", "1,1"], 2),
        (vec!["--help"], 0),
    ];
    for (args, code) in cases {
        let (got, _, err) = udisc(&args);
        assert_eq!(got, code, "{args:?}: {err}");
    }
}

#[test]
fn identical_states_list_zero_cores() {
    let dir = TempDir::new().unwrap();
    let same = write(&dir, "same.json", &pair(0.5, [1.0, 0.0], 0.5, [1.0, 0.0]));
    let (code, out, _) = udisc(&["check", s(&same)]);
    assert_eq!(code, 1);
    let r = json(&out);
    assert_eq!(r["feasible"], false);
    assert_eq!(r["zero_cores"], serde_json::json!([0, 1]));
}

#[test]
fn orthogonal_pair_succeeds_surely() {
    let dir = TempDir::new().unwrap();
    let orth = write(&dir, "orth.json", &pair(0.3, [1.0, 0.0], 0.7, [0.0, 1.0]));
    let (code, out, _) = udisc(&["solve", s(&orth)]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert!((r["success"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!(out.contains("\"format\": \"udisc-report/1\""));
    assert!(out.contains("\"command\": \"solve\""));
}

#[test]
fn errors_name_state_and_row() {
    let dir = TempDir::new().unwrap();
    let text = pair(0.5, [1.0, 0.0], 0.5, [0.0, 1.0]).replacen("[[0, 0], [0, 0]], [[0, 0], [1, 0]]", "[[0, 0], [0, 0]], [[0, 0]]", 1);
    let f = write(&dir, "short.json", &text);
    let (code, out, err) = udisc(&["check", s(&f)]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("state 1, row 1: 1 entries, expected 2"), "{err}");

    let heavy = write(&dir, "heavy.json", &pair(0.6, [1.0, 0.0], 0.6, [0.0, 1.0]));
    let (_, _, err) = udisc(&["check", s(&heavy)]);
    assert!(err.contains("prior_sum"), "{err}");
}

#[test]
fn gen_is_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    for (p, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let (code, _, err) = udisc(&["gen", "--dim", "4", "--m", "2", "--ranks", "2,2", "--seed", seed, "--output", s(p)]);
        assert_eq!(code, 0, "{err}");
    }
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let (code, stdout, _) = udisc(&["gen", "--dim", "4", "--m", "2", "--ranks", "2,2", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.as_bytes(), read(&a));
}

#[test]
fn solve_synth_simulate_pipeline() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("inst.json");
    let povm = dir.path().join("povm.json");
    let (code, _, _) = udisc(&["gen", "--dim", "4", "--m", "3", "--ranks", "1,2,1", "--seed", "3", "--output", s(&inst)]);
    assert_eq!(code, 0);
    let (code, out, err) = udisc(&["synth", s(&inst), "--output", s(&povm)]);
    assert_eq!(code, 0, "{err}");
    let synth = json(&out);
    assert_eq!(synth["measurement"]["unambiguous"], true);
    let p = synth["success"].as_f64().unwrap();
    assert!(p > 0.0 && p <= synth["upper_bound"].as_f64().unwrap() + 1e-6);

    let (code, out, err) = udisc(&["simulate", s(&inst), "--povm", s(&povm), "--trials", "20000", "--seed", "5"]);
    assert_eq!(code, 0, "{err}");
    let sim = json(&out);
    assert_eq!(sim["misidentifications"], 0);
    let z = (sim["empirical_success"].as_f64().unwrap() - p) / sim["standard_error"].as_f64().unwrap();
    assert!(z.abs() < 4.0, "z = {z}");

    let (code, again, _) = udisc(&["simulate", s(&inst), "--trials", "20000", "--seed", "5"]);
    assert_eq!(code, 0);
    let again = json(&again);
    assert_eq!(again["povm_source"], "synthesized");
    assert_eq!(again["counts"], sim["counts"]);
}

#[test]
fn set_files_are_merged() {
    let dir = TempDir::new().unwrap();
    let text = r#"{
        "dim": 3,
        "states": [
            {"prior": 0.25, "matrix": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]]},
            {"prior": 0.25, "matrix": [[[0, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]]},
            {"prior": 0.5, "matrix": [[[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]]}
        ],
        "sets": [[0, 1], [2]]
    }"#;
    let f = write(&dir, "sets.json", text);
    let (code, out, err) = udisc(&["solve", s(&f)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["gammas"].as_array().unwrap().len(), 2);
    let (_, out, _) = udisc(&["decompose", s(&f)]);
    assert_eq!(json(&out)["sets"], serde_json::json!([[0, 1], [2]]));
}

#[test]
fn report_reemits_identically() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let f = write(&dir, "overlap.json", &pair(0.4, [1.0, 0.0], 0.6, [h, h]));
    for cmd in ["decompose", "check", "bound", "solve", "synth"] {
        let (_, out, _) = udisc(&[cmd, s(&f)]);
        let parsed = json(&out);
        assert_eq!(emit_value(&parsed, FloatStyle::Report), out, "{cmd}");
        assert_eq!(json(&emit_value(&parsed, FloatStyle::Report)), parsed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(seed in any::<u64>(), n in 1usize..=5, m in 2usize..=4) {
        let inst = udisc::model::random_instance(n, m, &[1 + (seed as usize) % n], seed).unwrap();
        let text = emit(&instance_to_file(&inst), FloatStyle::Exact).unwrap();
        let back = parse_instance(&text, &udisc::Tolerances::default(), false).unwrap().instance;
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn report_floats_round_trip(xs in proptest::collection::vec(-1e15f64..1e15, 1..20)) {
        let v = serde_json::to_value(udisc_cli::report::reals(&xs)).unwrap();
        let text = emit_value(&v, FloatStyle::Report);
        let back: Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(emit_value(&back, FloatStyle::Report), text);
        for (a, b) in xs.iter().zip(back.as_array().unwrap()) {
            let b = b.as_f64().unwrap();
            prop_assert!((a - b).abs() <= 5e-12 * a.abs());
        }
    }
}
