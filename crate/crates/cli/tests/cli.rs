use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tenun_core::io::{decode_pattern_json, encode_pattern_json, parse_wif, raster_document};
use tenun_core::raster::{load_image, ImageFormat};
use tenun_core::{RasterConfig, RasterMethod, WeavabilityConfig};

fn tenun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenun")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = tenun(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// C(n, k) mod 2 by Lucas: odd iff k's bits are a subset of n's.
fn binomial_is_odd(n: usize, k: usize) -> bool {
    k <= n && (k & !n) == 0
}

#[test]
fn generate_rule90_matches_pascal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r90.json");
    ok(&[
        "generate",
        "--rule",
        "90",
        "--width",
        "63",
        "--steps",
        "31",
        "--seed",
        "0",
        "--boundary",
        "fixed0",
        "--out",
        path_str(&out),
    ]);
    let bytes = fs::read(&out).unwrap();
    let doc = decode_pattern_json(&bytes).unwrap();
    assert_eq!(encode_pattern_json(&doc).unwrap(), bytes);
    let grid = doc.pattern_grid().unwrap();
    assert_eq!((grid.width(), grid.height()), (63, 32));
    for t in 0..32 {
        for x in 0..63usize {
            let d = x as isize - 31;
            let expect = (d + t as isize) % 2 == 0
                && d.unsigned_abs() <= t
                && binomial_is_odd(t, ((d + t as isize) / 2) as usize);
            assert_eq!(grid.get(t, x) == 1, expect, "row {t} col {x}");
        }
    }
}

#[test]
fn sweep_is_byte_deterministic() {
    let a = ok(&["sweep", "--width", "51", "--steps", "25", "--seed", "7"]);
    let b = ok(&["sweep", "--width", "51", "--steps", "25", "--seed", "7"]);
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 257);
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("sweep.json");
    ok(&["sweep", "--width", "51", "--steps", "25", "--seed", "7", "--out", path_str(&json)]);
    let v: Value = serde_json::from_slice(&fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 256);
    assert_eq!(v["params"]["seed"], 7);
}

#[test]
fn draft_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ones = dir.path().join("ones.json");
    ok(&[
        "generate",
        "--rule",
        "255",
        "--width",
        "40",
        "--steps",
        "20",
        "--init",
        "random",
        "--seed",
        "2",
        "--out",
        path_str(&ones),
    ]);
    let wif = dir.path().join("ones.wif");
    let png = dir.path().join("ones.png");
    ok(&["draft", path_str(&ones), "--wif", path_str(&wif), "--png", path_str(&png)]);
    let draft = parse_wif(&fs::read(&wif).unwrap()).unwrap();
    let grid = decode_pattern_json(&fs::read(&ones).unwrap()).unwrap().pattern_grid().unwrap();
    assert_eq!(draft.reconstruct(), grid.cells());
    assert!(fs::read(&png).unwrap().starts_with(b"\x89PNG"));

    let chaotic = dir.path().join("r30.json");
    ok(&[
        "generate",
        "--rule",
        "30",
        "--width",
        "80",
        "--steps",
        "60",
        "--init",
        "random",
        "--seed",
        "9",
        "--out",
        path_str(&chaotic),
    ]);
    let blocked = dir.path().join("r30.wif");
    let out = tenun(&["--json-errors", "draft", path_str(&chaotic), "--wif", path_str(&blocked)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!blocked.exists());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "capacity");
    assert!(err["error"]["required_shafts"].as_u64().unwrap() > 32);
}

#[test]
fn validation_and_io_exit_codes() {
    assert_eq!(tenun(&["generate", "--rule", "256"]).status.code(), Some(1));
    assert_eq!(tenun(&["generate", "--rule", "90", "--boundary", "sideways"]).status.code(), Some(1));
    assert_eq!(tenun(&["generate"]).status.code(), Some(1));
    assert_eq!(tenun(&["metrics", "/nonexistent/doc.json"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, br#"{"format_version": 1, "grid": {"width": 2, "height": 1, "k": 2, "init_rows": 0, "cells": [[0, 2]], "extra": 1}}"#).unwrap();
    let out = tenun(&["--json-errors", "metrics", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "schema");
    assert_eq!(err["error"]["path"], "grid.extra");

    let future = dir.path().join("future.json");
    fs::write(&future, br#"{"format_version": 9}"#).unwrap();
    let out = tenun(&["--json-errors", "metrics", path_str(&future)]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "unsupported_version");
}

#[test]
fn table_rule_round_trips_through_generate() {
    let parity = "6996966996696996";
    let doc = ok(&[
        "generate", "--table", parity, "--window", "2", "--width", "30", "--steps", "12", "--init", "random", "--seed",
        "3",
    ]);
    let doc = decode_pattern_json(&doc).unwrap();
    let rule = doc.rule.as_ref().unwrap();
    assert_eq!((rule.id.as_str(), rule.k, rule.r, rule.w), (parity, 2, 1, 2));
    assert!(doc.verify_evolution().unwrap());
}

#[test]
fn rasterize_matches_library_and_leaves_input_alone() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("ramp.pgm");
    let mut pgm = b"P5 32 32 255\n".to_vec();
    pgm.extend((0..32 * 32).map(|i| ((i % 32) * 8) as u8));
    fs::write(&image, &pgm).unwrap();
    let out = dir.path().join("ramp.json");
    ok(&[
        "rasterize",
        path_str(&image),
        "--method",
        "error-diffusion",
        "--width",
        "24",
        "--height",
        "24",
        "--repair",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(fs::read(&image).unwrap(), pgm);

    let matrix = load_image(&pgm, ImageFormat::Pgm).unwrap();
    let (doc, _) = raster_document(
        &matrix,
        &RasterConfig::new(24, 24, RasterMethod::ErrorDiffusion),
        &WeavabilityConfig::default(),
        true,
    )
    .unwrap();
    assert_eq!(fs::read(&out).unwrap(), encode_pattern_json(&doc).unwrap());

    let clobber = tenun(&["rasterize", path_str(&image), "--width", "4", "--height", "4", "--out", path_str(&image)]);
    assert_eq!(clobber.status.code(), Some(1));
    assert_eq!(fs::read(&image).unwrap(), pgm);

    let metrics = String::from_utf8(ok(&["metrics", path_str(&out)])).unwrap();
    assert!(metrics.contains("max_weft_float"));
    assert_eq!(fs::read(&image).unwrap(), pgm);
}
