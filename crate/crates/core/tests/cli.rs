use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_radixtiles"));
    c.env_remove("RADIXTILES_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Pixel bytes of a binary PGM, header stripped.
fn pgm_pixels(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = std::fs::read(path).unwrap();
    let text = String::from_utf8_lossy(&bytes[..20.min(bytes.len())]).into_owned();
    let mut it = text.split_whitespace();
    assert_eq!(it.next(), Some("P5"));
    let w: usize = it.next().unwrap().parse().unwrap();
    let h: usize = it.next().unwrap().parse().unwrap();
    (w, h, bytes[bytes.len() - w * h..].to_vec())
}

#[test]
fn decide_reports_counterexample() {
    let out = run(&["decide", "--matrix", "[[1,1],[-1,1]]", "--digits", "[[0,0],[1,0]]"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["yields"], false);
    let cycles: Vec<&Value> =
        v["witnesses"].as_array().unwrap().iter().flat_map(|w| w["cycle"].as_array().unwrap()).collect();
    assert!(cycles.iter().any(|s| **s == serde_json::json!(["0", "-1"])));
}

#[test]
fn expand_five_in_binary() {
    let out = run(&["expand", "--matrix", "[[2]]", "--digits", "[[0],[1]]", "--x", "[5]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["digits"], serde_json::json!([["1"], ["0"], ["1"]]));
    assert_eq!(v["status"]["terminated"]["length"], 3);
}

#[test]
fn membership_and_symbol() {
    let out = run(&["tile", "membership", "--matrix", "[[2]]", "--digits", "[[0],[1]]", "--point", "[\"1/3\"]"]);
    assert_eq!(json(&out)["verdict"], "Candidate");
    let out = run(&["tile", "membership", "--matrix", "[[2]]", "--digits", "[[0],[1]]", "--point", "[\"3/2\"]"]);
    assert_eq!(json(&out)["verdict"], "Outside");

    let out = run(&["wavelet", "symbol", "--matrix", "[[2]]", "--digits", "[[0],[1]]", "--xi", "[0.5]"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["abs"].as_f64().unwrap() < 1e-12);
}

#[test]
fn malformed_input_exits_one() {
    let out = run(&["decide", "--matrix", "[[1,2]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));

    let out = run(&["decide", "--matrix", "[[1,2],[3]]"]);
    assert_eq!(out.status.code(), Some(1));

    // not a dilation
    let out = run(&["analyze", "--matrix", "[[1,0],[0,2]]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dilation"));

    // wrong digit count
    let out = run(&["decide", "--matrix", "[[3]]", "--digits", "[[0],[1]]"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, "{\n  \"matrix\": [[2]],\n  \"digits\": oops\n}\n").unwrap();
    let out = run(&["decide", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = run(&["suite"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cap_precedence() {
    let args = ["decide", "--matrix", "[[3,0],[0,3]]"];
    let out = bin().args(args).env("RADIXTILES_CAP", "10").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("resource limit"), "{}", stderr(&out));

    let out = bin().args(args).args(["--cap", "100000"]).env("RADIXTILES_CAP", "10").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["yields"], true);

    let out = bin().args(args).env("RADIXTILES_CAP", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_cross_check_exit_codes() {
    let base = ["analyze", "--matrix", "[[3]]", "--samples", "500", "--depth", "10"];
    let out = run(&base);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["cross_check"], serde_json::json!([]));

    // a probe radius far beyond T puts probe points outside although decide = true
    let out = bin().args(base).args(["--probe-radius", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!json(&out)["cross_check"].as_array().unwrap().is_empty());
}

#[test]
fn suite_isolates_failing_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"cases": []}"#).unwrap();
    let out = run(&["suite", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cases"], serde_json::json!([]));
    assert_eq!(v["errors"], 0);

    let mixed = dir.path().join("mixed.json");
    std::fs::write(
        &mixed,
        r#"{"cases": [
            {"name": "too big", "matrix": [[1000000]], "digits": "canonical", "options": {"cap": 1000}},
            {"name": "ternary", "matrix": [[3]], "digits": "canonical", "options": {"samples": 300, "depth": 8}},
            {"name": "flat", "matrix": [[1, 0], [0, 2]], "digits": "canonical"}
        ]}"#,
    )
    .unwrap();
    let out = run(&["suite", mixed.to_str().unwrap(), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["errors"], 2);
    let cases = v["cases"].as_array().unwrap();
    assert!(cases[0]["error"].as_str().unwrap().contains("resource limit"));
    assert_eq!(cases[1]["record"]["decision"]["yields"], true);
    assert!(cases[2]["error"].is_string());

    let violating = dir.path().join("violating.json");
    std::fs::write(
        &violating,
        r#"{"cases": [{"matrix": [[3]], "digits": "canonical",
            "options": {"samples": 300, "depth": 8, "probe_radius": 5.0}}]}"#,
    )
    .unwrap();
    let out = run(&["suite", violating.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["cross_check_ledger"][0]["case"], 0);

    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"cases": [{"matrix": [[3]], "digits": "canonical", "options": {"samples_": 3}}]}"#)
        .unwrap();
    assert_eq!(run(&["suite", typo.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn render_depth_four_marks_sixteen_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("td.pgm");
    let out = run(&[
        "tile",
        "render",
        "--matrix",
        "[[1,1],[-1,1]]",
        "--digits",
        "[[0,0],[1,0]]",
        "--depth",
        "4",
        "--width",
        "256",
        "--height",
        "256",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["points"], "16");
    let (_, _, px) = pgm_pixels(&path);
    // at this resolution the 16 points land in distinct pixels
    assert_eq!(px.iter().filter(|&&p| p == 0).count(), 16);
}

#[test]
fn render_depth_zero_is_single_pixel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.pgm");
    let out = run(&[
        "tile",
        "render",
        "--matrix",
        "[[1,1],[-1,1]]",
        "--canonical",
        "--depth",
        "0",
        "--width",
        "9",
        "--height",
        "9",
        "--window=-1,1,-1,1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (w, _, px) = pgm_pixels(&path);
    let filled: Vec<usize> = px.iter().enumerate().filter(|(_, &p)| p == 0).map(|(i, _)| i).collect();
    // the origin sits in the centre pixel of a 9x9 raster over [-1,1]^2
    assert_eq!(filled, vec![4 * w + 4]);
}

#[test]
fn render_two_i_two_fills_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    for style in ["points", "cells"] {
        let path = dir.path().join(format!("sq-{style}.pgm"));
        let out = run(&[
            "tile",
            "render",
            "--matrix",
            "[[2,0],[0,2]]",
            "--digits",
            "[[0,0],[1,0],[0,1],[1,1]]",
            "--depth",
            "8",
            "--width",
            "128",
            "--height",
            "128",
            "--window=0,1,0,1",
            "--style",
            style,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let (_, _, px) = pgm_pixels(&path);
        assert!(px.iter().all(|&p| p == 0), "{style}: unit square not filled");
    }
}

#[test]
fn figure_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.png");
    let c = dir.path().join("c.pgm");
    for p in [&a, &b, &c] {
        let out = run(&["figure1", "--depth", "10", "--width", "200", "--height", "200", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    assert!(std::fs::read(&b).unwrap().starts_with(b"\x89PNG"));
    let (_, _, px) = pgm_pixels(&a);
    let filled = px.iter().filter(|&&p| p == 0).count();
    assert!(filled > 0 && filled < px.len());
}

#[test]
fn suite_rejects_file_with_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    std::fs::write(&f, r#"{"cases": []}"#).unwrap();
    let out = run(&["suite", f.to_str().unwrap(), "--builtin"]);
    assert_eq!(out.status.code(), Some(1));
}
