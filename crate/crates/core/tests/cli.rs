use std::fs;
use std::path::Path;
use std::process::Command;

use demfuse::quality::QualityReport;
use demfuse::raster::{read_grid, write_grid, DemGrid, RasterFormat};

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["demfuse"];
    argv.extend_from_slice(args);
    demfuse::cli::run(argv)
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn put(dir: &Path, name: &str, values: &[f64]) -> String {
    let g = DemGrid::new(2, 3, values.to_vec(), -9999.0).unwrap();
    let p = dir.join(name);
    write_grid(&g, &p, RasterFormat::EsriAscii).unwrap();
    s(&p)
}

#[test]
fn synth_writes_scene_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    assert_eq!(
        run(&[
            "synth",
            "--preset",
            "industrial",
            "--seed",
            "7",
            "--out",
            &s(&out)
        ]),
        0
    );
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "hem_1.asc",
            "hem_2.asc",
            "input_1.asc",
            "input_2.asc",
            "spec.json",
            "truth.asc"
        ]
    );
    assert_eq!(json(&out.join("spec.json"))["seed"], 7);
}

#[test]
fn exit_codes_from_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_demfuse");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(
        status(&["synth", "--preset", "nope", "--out", &s(tmp.path())]),
        Some(2)
    );
    assert_eq!(status(&["fuse", "--method", "tvl1"]), Some(2));
    assert_eq!(status(&["frobnicate"]), Some(2));
    let missing = s(&tmp.path().join("missing.asc"));
    assert_eq!(
        status(&[
            "fuse",
            "--method",
            "median",
            &missing,
            "--out",
            &s(&tmp.path().join("f.asc"))
        ]),
        Some(1)
    );
    assert_eq!(status(&["--help"]), Some(0));
}

#[test]
fn wa_with_equal_hems_is_the_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = put(d, "a.asc", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let b = put(d, "b.asc", &[3.0, 2.0, 1.0, 0.0, -1.0, 10.0]);
    let h1 = put(d, "a_hem.asc", &[2.0; 6]);
    let h2 = put(d, "b_hem.asc", &[2.0; 6]);
    let out = d.join("f.asc");
    assert_eq!(
        run(&[
            "fuse",
            "--method",
            "wa",
            "--hem",
            &h1,
            "--hem",
            &h2,
            &a,
            &b,
            "--out",
            &s(&out)
        ]),
        0
    );
    let fused = read_grid(&out, RasterFormat::EsriAscii).unwrap();
    assert_eq!(fused.heights(), &[2.0, 2.0, 2.0, 2.0, 2.0, 8.0]);
    assert_eq!(json(&d.join("f.manifest.json"))["method"], "wa");

    // no weights at all is a runtime error
    assert_eq!(
        run(&["fuse", "--method", "wa", &a, &b, "--out", &s(&out)]),
        1
    );
    // one HEM for two inputs
    assert_eq!(
        run(&[
            "fuse",
            "--method",
            "wa",
            "--hem",
            &h1,
            &a,
            &b,
            "--out",
            &s(&out)
        ]),
        1
    );
}

#[test]
fn fuse_writes_manifest_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = put(d, "a.asc", &[100.0, 101.0, 110.0, 100.0, 100.5, 110.0]);
    let b = put(d, "b.asc", &[100.2, 100.8, 110.4, 99.6, 100.0, 109.0]);
    let out = d.join("f.asc");
    let code = run(&[
        "fuse",
        "--method",
        "tvl1",
        "--gamma",
        "0.7",
        &a,
        &b,
        "--trace",
        "--out",
        &s(&out),
    ]);
    assert_eq!(code, 0);
    assert!(out.exists());
    let m = json(&d.join("f.manifest.json"));
    for key in [
        "method",
        "gamma",
        "alpha_m",
        "beta",
        "theta",
        "tau",
        "sigma",
        "iterations",
        "final_rel_change",
        "wall_time_s",
    ] {
        assert!(!m[key].is_null(), "manifest lacks {key}");
    }
    assert_eq!(m["gamma"], 0.7);
    assert_eq!(m["gamma_source"], "user");
    assert_eq!(m["max_iters"], 1000);
    let trace = fs::read_to_string(d.join("f.trace.csv")).unwrap();
    assert!(trace.starts_with("iter,energy,max_dual_norm\n0,"));
}

#[test]
fn huber_records_meter_and_normalized_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = put(d, "a.asc", &[100.0, 101.0, 110.0, 100.0, 100.5, 110.0]);
    let b = put(d, "b.asc", &[100.2, 100.8, 110.4, 99.6, 100.0, 108.0]);
    let out = d.join("h.asc");
    let code = run(&[
        "fuse",
        "--method",
        "huber",
        "--gamma",
        "1",
        "--alpha",
        "4",
        "--beta",
        "1",
        &a,
        &b,
        "--out",
        &s(&out),
    ]);
    assert_eq!(code, 0);
    let m = json(&d.join("h.manifest.json"));
    assert_eq!(m["alpha_m"], 4.0);
    assert_eq!(m["beta"], 1.0);
    let alpha_n = m["alpha_normalized"].as_f64().unwrap();
    assert!((alpha_n - 4.0 / (110.4 - 99.6)).abs() < 1e-12, "{alpha_n}");
}

#[test]
fn eval_identical_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = put(d, "a.asc", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let out = d.join("ev");
    assert_eq!(
        run(&[
            "eval",
            &a,
            &a,
            "--hoa",
            "45.81",
            "--hoa",
            "72.02",
            "--out",
            &s(&out)
        ]),
        0
    );
    let r = json(&out.join("report.json"));
    assert_eq!(r["rmse"], 0.0);
    assert_eq!(
        (
            r["band_lt2"].as_f64(),
            r["band_lt4"].as_f64(),
            r["band_ge4"].as_f64()
        ),
        (Some(100.0), Some(100.0), Some(0.0))
    );
    assert_eq!(
        format!("{:.2}", r["pu_threshold"].as_f64().unwrap()),
        "30.36"
    );
    assert_eq!(r["n_pu_errors"], 0);
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(QualityReport::CSV_HEADER));
    assert_eq!(csv.lines().count(), 2);
    assert!(fs::read(out.join("residual.pgm"))
        .unwrap()
        .starts_with(b"P5"));
    assert!(out.join("residual.asc").exists());
}

#[test]
fn lcurve_default_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = put(d, "a.asc", &[100.0, 101.0, 110.0, 100.0, 100.5, 110.0]);
    let b = put(d, "b.asc", &[100.2, 130.8, 110.4, 99.6, 100.0, 108.0]);
    let out = d.join("lc");
    assert_eq!(run(&["lcurve", &a, &b, "--apply", "--out", &s(&out)]), 0);
    let csv = fs::read_to_string(out.join("lcurve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 16);
    let star = json(&out.join("gamma_star.json"))["gamma_star"]
        .as_f64()
        .unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .any(|l| l.split(',').next().unwrap().parse::<f64>().unwrap() == star));
    assert!(out.join("fused.asc").exists());
    assert_eq!(
        json(&out.join("fused.manifest.json"))["gamma_source"],
        "user"
    );
}

#[test]
fn bench_table_shape_and_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    assert_eq!(
        run(&["bench", "--preset", "industrial", "--out", &s(&out)]),
        0
    );
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    let names: Vec<&str> = rows.iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["input_1", "input_2", "WA", "TV-L1", "Huber"]);

    let table = json(&out.join("bench.json"));
    let rmse = |i: usize| table["rows"][i]["rmse"].as_f64().unwrap();
    let worst_input = rmse(0).max(rmse(1));
    for i in 2..5 {
        assert!(
            rmse(i) < worst_input,
            "row {i}: {} >= {worst_input}",
            rmse(i)
        );
    }
}
