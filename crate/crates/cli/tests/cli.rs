use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use qdiff_cli::formats;
use qdiff_cli::render::{pixel_point, project_to_pixel};
use qdiff_core::{HarmonicCoefficients, UnitVector3};
use serde_json::Value;

fn qdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiff")).args(args).output().expect("binary runs")
}

fn qdiff_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiff")).args(args).env(key, value).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

/// Asserts the exit status and a single `error: <code>: ...` line; returns the code.
fn fails(out: &Output, status: i32) -> String {
    assert_eq!(out.status.code(), Some(status), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    let rest = lines[0].strip_prefix("error: ").expect("error prefix");
    rest.split(": ").next().unwrap().to_string()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.deserialize().map(|row| row.unwrap()).collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ppm_pixels(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = fs::read(path).unwrap();
    let text = String::from_utf8_lossy(&bytes[..20]).to_string();
    let mut it = text.split_whitespace();
    assert_eq!(it.next(), Some("P6"));
    let w: usize = it.next().unwrap().parse().unwrap();
    let h: usize = it.next().unwrap().parse().unwrap();
    let header = format!("P6\n{w} {h}\n255\n").len();
    (w, h, bytes[header..].to_vec())
}

#[test]
fn help_and_version_exit_zero() {
    ok(&qdiff(&["--help"]));
    ok(&qdiff(&["--version"]));
    ok(&qdiff(&["blob", "--help"]));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fails(&qdiff(&[]), 2), "usage");
    assert_eq!(fails(&qdiff(&["bogus"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["basis-check", "--n", "1"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["basis-check", "--n", "257"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["basis-check"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["simulate", "--model", "navier"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["simulate", "--dt", "0.1", "--steps", "3"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["simulate", "--dt", "-1"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["blob", "--point", "0,0,0"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["blob", "--mode", "center", "--t-final", "1"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["deform", "--refinements", "9"]), 2), "usage");
    assert_eq!(fails(&qdiff(&["render", "--input", "x", "--width", "8"]), 2), "usage");
    assert_eq!(fails(&qdiff_env(&["basis-check", "--n", "4"], "QDIFF_THREADS", "many"), 2), "usage");
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fails(&qdiff(&["render", "--input", "/nonexistent/file.qcoef"]), 1), "io");
    let junk = dir.path().join("junk.qmat");
    fs::write(&junk, b"format=qmat-v1 n=3 layout=row-major precision=binary64\n1234").unwrap();
    let out = dir.path().join("o");
    assert_eq!(fails(&qdiff(&["render", "--input", s(&junk), "--out", s(&out)]), 1), "format");
    let init = dir.path().join("w.qmat");
    fs::write(&init, formats::encode_matrix(&qdiff_core::CMatrix::zeros(3, 3)).unwrap()).unwrap();
    let code = fails(&qdiff(&["simulate", "--n", "4", "--init", s(&init), "--out", s(&out)]), 1);
    assert_eq!(code, "size_mismatch");
}

#[test]
fn basis_check_passes_and_lists_multiplicities() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdiff(&["basis-check", "--n", "16", "--out", s(dir.path())]);
    ok(&out);
    assert!(csv_rows(&dir.path().join("checks.csv")).iter().all(|r| r["pass"] == "true"));

    let out = qdiff(&["basis-check", "--n", "64", "--out", s(dir.path())]);
    ok(&out);
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 64);
    for (l, r) in rows.iter().enumerate() {
        assert_eq!(num(r, "eigenvalue"), -((l * (l + 1)) as f64));
        assert_eq!(r["multiplicity"], (2 * l + 1).to_string());
    }
    assert_eq!(manifest(dir.path())["status"], "ok");
}

#[test]
fn simulate_zero_time_gives_one_state() {
    let dir = tempfile::tempdir().unwrap();
    ok(&qdiff(&["simulate", "--n", "8", "--t-final", "0", "--save-states", "--out", s(dir.path())]));
    assert_eq!(csv_rows(&dir.path().join("diagnostics.csv")).len(), 1);
    assert_eq!(fs::read_dir(dir.path().join("states")).unwrap().count(), 1);
    assert_eq!(fs::read(dir.path().join("initial.qmat")).unwrap(), fs::read(dir.path().join("final.qmat")).unwrap());
}

#[test]
fn simulate_conserves_casimirs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&qdiff(&["simulate", "--n", "16", "--t-final", "1", "--steps", "100", "--out", s(dir.path())]));
    let rows = csv_rows(&dir.path().join("diagnostics.csv"));
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| num(r, "trace_w2_drift") <= 1e-8));
    let m = manifest(dir.path());
    assert_eq!(m["config"]["steps"], 100);
    assert_eq!(m["config"]["integrator"], "isomp");
}

#[test]
fn equilibrium_input_has_flat_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut omega = HarmonicCoefficients::zeros(2);
    omega.set(2, 0, Complex64::new(1.0, 0.0)).unwrap();
    omega.set(2, 1, Complex64::new(0.3, 0.2)).unwrap();
    omega.set(2, -1, Complex64::new(-0.3, 0.2)).unwrap();
    let init = dir.path().join("omega.qcoef");
    fs::write(&init, formats::encode_coefficients(&omega)).unwrap();
    let out = dir.path().join("run");
    ok(&qdiff(&["simulate", "--n", "12", "--init", s(&init), "--t-final", "0.5", "--out", s(&out)]));
    let rows = csv_rows(&out.join("diagnostics.csv"));
    let first = num(&rows[0], "trace_w2_re");
    for r in &rows {
        assert!((num(r, "trace_w2_re") - first).abs() <= 1e-12 * first.abs());
        assert!(num(r, "spectral_drift") <= 1e-12);
    }
    let w0 = formats::decode_matrix(&formats::read(&out.join("initial.qmat")).unwrap()).unwrap();
    let w1 = formats::decode_matrix(&formats::read(&out.join("final.qmat")).unwrap()).unwrap();
    // The midpoint stage leaves the degree-2 eigenspace at O(h²), so the state
    // itself moves slightly while every invariant stays flat.
    let d = (w1 - &w0).norm() / w0.norm();
    assert!(d <= 1e-7, "relative change {d:e}");
}

#[test]
fn blob_density_follows_the_reference_flow() {
    let dir = tempfile::tempdir().unwrap();
    ok(&qdiff(&[
        "blob",
        "--mode",
        "density",
        "--n",
        "32",
        "--t-final",
        "0.5",
        "--point",
        "-1,0,0",
        "--out",
        s(dir.path()),
    ]));
    let rows = csv_rows(&dir.path().join("track.csv"));
    let end = rows.last().unwrap();
    let c = UnitVector3::new(num(end, "x"), num(end, "y"), num(end, "z")).unwrap();
    let target = UnitVector3::new(-0.77825, 0.42518, 0.46212).unwrap();
    assert!(c.angle_to(target) <= 0.15);
    assert!(num(end, "angle_error") < 1e-8);
}

#[test]
fn blob_at_time_zero_peaks_at_the_point() {
    let dir = tempfile::tempdir().unwrap();
    let y0 = UnitVector3::new(0.3, -0.5, 0.4).unwrap();
    ok(&qdiff(&[
        "blob",
        "--n",
        "16",
        "--t-final",
        "0",
        "--point",
        "0.3,-0.5,0.4",
        "--width",
        "128",
        "--out",
        s(dir.path()),
    ]));
    let (w, h, px) = ppm_pixels(&dir.path().join("final_density.ppm"));
    let mut best = (0u8, 0usize, 0usize);
    for row in 0..h {
        for col in 0..w {
            let i = 3 * (row * w + col);
            if px[i] == px[i + 1] && px[i] > best.0 {
                best = (px[i], col, row);
            }
        }
    }
    assert_eq!(best.0, 255);
    let peak = pixel_point(w, h, best.1, best.2).unwrap();
    assert!(peak.angle_to(y0) < 0.1, "peak at {peak:?}");
    let (col, row) = project_to_pixel(w, h, y0);
    assert!(col.abs_diff(best.1) <= 2 && row.abs_diff(best.2) <= 2);
}

#[test]
fn blob_center_mode_defaults() {
    let dir = tempfile::tempdir().unwrap();
    ok(&qdiff(&["blob", "--mode", "center", "--n", "8", "--out", s(dir.path())]));
    let m = manifest(dir.path());
    assert_eq!(m["config"]["steps"], 200);
    assert_eq!(m["config"]["h"], 1.0);
    let rows = csv_rows(&dir.path().join("track.csv"));
    assert_eq!(rows.len(), 201);
    assert!(num(rows.last().unwrap(), "z") > num(&rows[0], "z"));
}

#[test]
fn deform_at_time_zero_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    ok(&qdiff(&["deform", "--t-final", "0", "--refinements", "2", "--n", "8", "--out", s(dir.path())]));
    let mesh = formats::decode_mesh(&formats::read(&dir.path().join("mesh.qmesh")).unwrap()).unwrap();
    assert_eq!(mesh.faces.len(), 320);
    assert!(mesh.face_scalars.unwrap().iter().all(|r| (r - 1.0).abs() < 1e-9));
    let c = formats::read(&dir.path().join("ffstar.qcoef")).unwrap();
    let d = formats::decode_coefficients(&c).unwrap();
    let constant = d.get(0, 0).unwrap().norm();
    let rest: f64 = d.iter().filter(|(l, _, _)| *l > 0).map(|(_, _, z)| z.norm()).fold(0.0, f64::max);
    assert!(rest < 1e-12 * constant);
}

#[test]
fn deform_reproduces_the_area_and_density_pattern() {
    let dir = tempfile::tempdir().unwrap();
    ok(&qdiff(&["deform", "--t-final", "1", "--refinements", "3", "--n", "32", "--out", s(dir.path())]));
    let before = qdiff_core::reference::icosasphere(3).unwrap();
    let mesh = formats::decode_mesh(&formats::read(&dir.path().join("mesh.qmesh")).unwrap()).unwrap();
    for (f, r) in mesh.face_scalars.as_ref().unwrap().iter().enumerate() {
        let z = before.face_centroid(f).z;
        if z < -0.5 {
            assert!(*r > 1.0);
        }
        if z > 0.5 {
            assert!(*r < 1.0);
        }
    }
    let summary = &manifest(dir.path())["summary"];
    assert!(summary["ffstar_south"].as_f64().unwrap() > summary["ffstar_north"].as_f64().unwrap());
    assert!(summary["total_area_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn render_y10_and_constant() {
    let dir = tempfile::tempdir().unwrap();
    let y10 = dir.path().join("y10.qcoef");
    fs::write(&y10, formats::encode_coefficients(&HarmonicCoefficients::single(1, 1, 0, 1.0.into()).unwrap())).unwrap();
    let out = dir.path().join("r");
    ok(&qdiff(&["render", "--input", s(&y10), "--width", "64", "--out", s(&out)]));
    let (w, _, px) = ppm_pixels(&out.join("y10.ppm"));
    assert!(px[3 * (4 * w + 32)] > 200 && px[3 * (27 * w + 32)] < 55);
    let side = fs::read_to_string(out.join("y10.range.txt")).unwrap();
    assert!(side.starts_with("colormap=grayscale min="));

    let grid = qdiff_core::GridField::from_fn(8, 16, |_| Complex64::new(2.0, 0.0)).unwrap();
    let flat = dir.path().join("flat.qgrid");
    fs::write(&flat, formats::encode_grid(&grid)).unwrap();
    ok(&qdiff(&["render", "--input", s(&flat), "--width", "32", "--out", s(&out)]));
    let (_, _, px) = ppm_pixels(&out.join("flat.ppm"));
    assert!(px.chunks(3).all(|p| p == [128; 3] || p == qdiff_cli::render::BACKGROUND));

    let mesh = dir.path().join("m.qmesh");
    fs::write(&mesh, formats::encode_mesh(&qdiff_core::reference::icosasphere(0).unwrap()).unwrap()).unwrap();
    assert_eq!(fails(&qdiff(&["render", "--input", s(&mesh), "--out", s(&out)]), 1), "format");
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        files.insert(e.file_name().to_string_lossy().to_string(), fs::read(e.path()).unwrap());
    }
    files
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = ["simulate", "--n", "10", "--t-final", "0.3", "--dt", "0.05", "--width", "32", "--out", s(&out)];
    ok(&qdiff(&args));
    let first = snapshot(&out);
    ok(&qdiff_env(&args, "QDIFF_THREADS", "1"));
    assert_eq!(snapshot(&out), first);
    ok(&qdiff_env(&args, "QDIFF_THREADS", "3"));
    assert_eq!(snapshot(&out), first);
}

#[test]
fn eigenbasis_cache_is_written_reused_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache/eig12.qeig");
    let out = dir.path().join("o");
    let args = ["basis-check", "--n", "12", "--cache-eigenbasis", s(&cache), "--out", s(&out)];
    ok(&qdiff(&args));
    let bytes = fs::read(&cache).unwrap();
    assert!(bytes.starts_with(b"format=qeig-v1 n=12"));
    ok(&qdiff(&args));
    assert_eq!(fs::read(&cache).unwrap(), bytes);

    let other = qdiff(&["basis-check", "--n", "10", "--cache-eigenbasis", s(&cache), "--out", s(&out)]);
    assert_eq!(fails(&other, 1), "cache");

    let mut corrupt = bytes.clone();
    let at = corrupt.len() - 8 * 40;
    corrupt[at..at + 8].copy_from_slice(&0.5f64.to_le_bytes());
    fs::write(&cache, &corrupt).unwrap();
    assert_eq!(fails(&qdiff(&args), 1), "eigensolver");
}
