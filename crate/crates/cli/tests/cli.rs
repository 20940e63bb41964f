use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lesiondist"));
    c.env_remove("LESIONDIST_JOBS");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON document")
}

fn write_grid(path: &Path, dims: &[u32], data: &[f32]) {
    let mut b = b"LDGR".to_vec();
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&(dims.len() as u16).to_le_bytes());
    for d in dims {
        b.extend_from_slice(&d.to_le_bytes());
    }
    for v in data {
        b.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, b).unwrap();
}

fn read_payload(path: &Path, header: usize) -> Vec<f32> {
    fs::read(path).unwrap()[header..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

#[test]
fn dt_three_by_three_euclidean() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_grid(&d.join("g.ldgr"), &[3, 3], &[1.0; 9]);
    fs::write(d.join("d.csv"), "y,x\n1,1\n").unwrap();
    ok(
        &[
            "dt", "--image", "g.ldgr", "--dots", "d.csv", "--kind", "edm", "--out", "dm.ldgr",
        ],
        d,
    );
    let r2 = std::f32::consts::SQRT_2;
    assert_eq!(
        read_payload(&d.join("dm.ldgr"), 16),
        vec![r2, 1.0, r2, 1.0, 0.0, 1.0, r2, 1.0, r2]
    );
}

#[test]
fn maps_writes_sidecar_and_detect_finds_dot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let img: Vec<f32> = (0..49).map(|i| if i == 24 { 1.0 } else { 0.2 }).collect();
    write_grid(&d.join("g.ldgr"), &[7, 7], &img);
    fs::write(d.join("d.csv"), "3,3\n").unwrap();
    ok(
        &[
            "maps", "--image", "g.ldgr", "--dots", "d.csv", "--kind", "geodesic", "--out", "m.ldgr",
        ],
        d,
    );
    let side: Value = serde_json::from_str(&fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "geodesic");
    assert_eq!(side["p"], 5.0);
    assert_eq!(side["shifted"], false);
    assert_eq!(side["degenerate"], false);

    ok(
        &[
            "detect",
            "--map",
            "m.ldgr",
            "--threshold",
            "0.525",
            "--out",
            "det.csv",
        ],
        d,
    );
    assert_eq!(
        fs::read_to_string(d.join("det.csv")).unwrap(),
        "y,x,score\n3,3,1\n"
    );
}

#[test]
fn maps_flags_degenerate_constant_image() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_grid(&d.join("g.ldgr"), &[4, 4], &[0.5; 16]);
    fs::write(d.join("d.csv"), "0,0\n").unwrap();
    ok(
        &[
            "maps",
            "--image",
            "g.ldgr",
            "--dots",
            "d.csv",
            "--kind",
            "intensity",
            "--out",
            "m.ldgr",
        ],
        d,
    );
    let side: Value = serde_json::from_str(&fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(side["degenerate"], true);
    assert!(read_payload(&d.join("m.ldgr"), 16)
        .iter()
        .all(|&v| v == 1.0));
}

#[test]
fn error_exit_codes_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.ldgr"), b"XXXX0000").unwrap();
    fs::write(d.join("d.csv"), "0,0\n").unwrap();

    let out = run(
        &[
            "dt", "--image", "bad.ldgr", "--dots", "d.csv", "--kind", "idm", "--out", "x",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));
    let e = error_json(&out);
    assert_eq!(e["exit_code"], 3);
    assert_eq!(e["error"]["kind"], "format");

    let out = run(
        &[
            "dt",
            "--image",
            "bad.ldgr",
            "--dots",
            "d.csv",
            "--kind",
            "manhattan",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["class"], "config");

    fs::write(d.join("cfg.json"), r#"{"cases": 2, "unknown": true}"#).unwrap();
    let out = run(&["pipeline", "--config", "cfg.json", "--out-dir", "run"], d);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["stage"], "config");

    write_grid(&d.join("g.ldgr"), &[3, 3], &[0.0; 9]);
    fs::write(d.join("empty.csv"), "").unwrap();
    let out = run(
        &[
            "dt",
            "--image",
            "g.ldgr",
            "--dots",
            "empty.csv",
            "--kind",
            "idm",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));

    let out = bin()
        .args(["synth", "--count", "1", "--out-dir", "s"])
        .env("LESIONDIST_JOBS", "0")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_every_subcommand() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in [
        "dt",
        "maps",
        "detect",
        "eval",
        "froc-plotdata",
        "synth",
        "pipeline",
    ] {
        assert!(text.contains(sub), "{sub} missing from --help");
    }
}

#[test]
fn synth_writes_pairs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("synth.json"),
        r#"{"dims": [32, 32], "lesions": [1, 2], "seed": 5}"#,
    )
    .unwrap();
    ok(
        &[
            "synth",
            "--config",
            "synth.json",
            "--count",
            "3",
            "--out-dir",
            "cases",
        ],
        d,
    );
    for k in 0..3 {
        assert!(d.join(format!("cases/case_{k}.ldgr")).exists());
        assert!(d.join(format!("cases/case_{k}.csv")).exists());
    }
    let m: Value =
        serde_json::from_str(&fs::read_to_string(d.join("cases/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["count"], 3);
    assert_eq!(m["config"]["seed"], 5);

    ok(
        &[
            "synth",
            "--config",
            "synth.json",
            "--count",
            "3",
            "--out-dir",
            "again",
        ],
        d,
    );
    for k in 0..3 {
        let a = fs::read(d.join(format!("cases/case_{k}.ldgr"))).unwrap();
        let b = fs::read(d.join(format!("again/case_{k}.ldgr"))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn pipeline_eval_and_plotdata_agree_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cfg.json"),
        r#"{"cases": 8, "kinds": ["intensity", "euclidean"], "bootstrap_samples": 200,
            "simulator": {"noise": 0.05, "spurious": 2, "seed": 3}}"#,
    )
    .unwrap();
    ok(
        &[
            "--jobs",
            "1",
            "pipeline",
            "--config",
            "cfg.json",
            "--out-dir",
            "a",
        ],
        d,
    );
    ok(
        &[
            "--jobs",
            "4",
            "pipeline",
            "--config",
            "cfg.json",
            "--out-dir",
            "b",
        ],
        d,
    );
    ok(
        &["pipeline", "--config", "a/manifest.json", "--out-dir", "c"],
        d,
    );
    let a = fs::read(d.join("a/report.json")).unwrap();
    assert_eq!(a, fs::read(d.join("b/report.json")).unwrap());
    assert_eq!(a, fs::read(d.join("c/report.json")).unwrap());
    assert_eq!(
        fs::read(d.join("a/intensity/froc.csv")).unwrap(),
        fs::read(d.join("b/intensity/froc.csv")).unwrap()
    );

    let eval = |jobs: &str, out: &str| {
        ok(
            &[
                "--jobs",
                jobs,
                "eval",
                "--pred-dir",
                "a/intensity/pred",
                "--annot-dir",
                "a/cases",
                "--radius",
                "6",
                "--fp-limit",
                "10",
                "--bootstrap",
                "200",
                "--seed",
                "0",
                "--out",
                out,
                "--curve",
                &format!("{out}.csv"),
            ],
            d,
        );
        serde_json::from_str::<Value>(&fs::read_to_string(d.join(out)).unwrap()).unwrap()
    };
    let r1 = eval("1", "r1.json");
    let r3 = eval("3", "r3.json");
    assert_eq!(r1["bootstrap"], r3["bootstrap"]);

    let pipeline: Value = serde_json::from_slice(&a).unwrap();
    let idm = &pipeline["kinds"][0];
    assert_eq!(idm["kind"], "intensity");
    assert_eq!(r1["fauc"], idm["fauc"]);
    assert_eq!(r1["bootstrap"], idm["bootstrap"]);
    assert_eq!(
        fs::read_to_string(d.join("r1.json.csv")).unwrap(),
        fs::read_to_string(d.join("a/intensity/froc.csv")).unwrap()
    );

    ok(&["froc-plotdata", "--run-dir", "a", "--out", "plot.csv"], d);
    let plot = fs::read_to_string(d.join("plot.csv")).unwrap();
    assert!(plot.starts_with("label,threshold,fp_avg,sensitivity\n"));
    assert!(plot.contains("\nintensity,inf,0,0\n"));
    assert!(plot.contains("\neuclidean,"));
    assert!(!plot.contains("geodesic"));
}

#[test]
fn eval_reads_detection_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir_all(d.join("annot")).unwrap();
    fs::create_dir_all(d.join("pred")).unwrap();
    fs::write(d.join("annot/img_1.csv"), "y,x\n10,10\n30,30\n").unwrap();
    fs::write(
        d.join("pred/img_1.csv"),
        "y,x,score\n10,11,0.9\n50,50,0.8\n",
    )
    .unwrap();
    fs::write(d.join("annot/img_2.csv"), "y,x\n5,5\n").unwrap();
    fs::write(d.join("pred/img_2.csv"), "y,x,score\n5,5,0.7\n").unwrap();
    ok(
        &[
            "eval",
            "--pred-dir",
            "pred",
            "--annot-dir",
            "annot",
            "--bootstrap",
            "0",
            "--threshold",
            "0.75",
            "--out",
            "r.json",
        ],
        d,
    );
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["images"], serde_json::json!(["img_1", "img_2"]));
    assert_eq!(r["annotations"], 3);
    assert_eq!(r["at_threshold"]["true_positives"], 1);
    assert_eq!(r["at_threshold"]["false_positives"], 1);
    assert!(r["bootstrap"].is_null());
}
