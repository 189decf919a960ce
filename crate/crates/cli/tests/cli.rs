use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn eneon(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eneon"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("ENEON_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn fit_value(fit: &Value, name: &str) -> f64 {
    let names = fit["names"].as_array().unwrap();
    let i = names.iter().position(|n| n == name).unwrap();
    fit["values"][i].as_f64().unwrap()
}

#[test]
fn help_lists_config_keys_with_units() {
    let tmp = TempDir::new().unwrap();
    let o = eneon(&["--help"], tmp.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for key in [
        "seed",
        "z_model.barrier_u_ev",
        "trap.k2_mev_per_um2",
        "resonator.kappa_over_2pi_mhz",
        "coupling.g_mhz",
        "two_tone.pump_strength",
        "rabi_split.noise_fraction",
        "sampling.noise_step_ns",
        "timedomain.<kind>.decoherence.pink_exponent",
    ] {
        assert!(text.contains(key), "--help misses {key}");
    }
    let keys = text
        .lines()
        .skip_while(|l| !l.starts_with("Configuration keys"))
        .skip(1);
    for line in keys.filter(|l| l.starts_with("  ") && !l.trim_start().starts_with('(')) {
        assert!(line.contains('['), "no unit on `{line}`");
    }
}

#[test]
fn solve_y_at_crossing_and_sweet_spot() {
    let tmp = TempDir::new().unwrap();
    let o = eneon(&["solve", "y", "--vrg", "516"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(tmp.path().join("solve_y.json"));
    assert!((s["f01_ghz"].as_f64().unwrap() - 6.426).abs() < 0.05);

    let o = eneon(&["solve", "y", "--vrg", "339"], tmp.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("solve_y_wavefunctions.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    let n = rows.len();
    for k in (0..n).step_by(97) {
        let (a, b) = (&rows[k], &rows[n - 1 - k]);
        assert!(
            (a[2] - b[2]).abs() < 1e-6 * (1.0 + a[2].abs()),
            "psi0 asymmetric at row {k}"
        );
        assert!(
            (a[3] + b[3]).abs() < 1e-6 * (1.0 + a[3].abs()),
            "psi1 not odd at row {k}"
        );
    }
}

#[test]
fn solve_z_defaults() {
    let tmp = TempDir::new().unwrap();
    let o = eneon(&["solve", "z"], tmp.path());
    assert!(o.status.success());
    let s = json(tmp.path().join("solve_z.json"));
    let e0 = s["e0_mev"].as_f64().unwrap();
    assert!((-18.0..=-13.0).contains(&e0), "E0 = {e0}");
    assert_eq!(s["boundary_warning"], Value::Bool(false));
    assert!(stdout(&o).contains("E1 - E0"));
}

#[test]
fn spectrum_map_summary() {
    let tmp = TempDir::new().unwrap();
    let o = eneon(&["spectrum-map"], tmp.path());
    assert!(o.status.success());
    let s = json(tmp.path().join("spectrum_summary.json"));
    assert!((s["sweet_spot_mv"].as_f64().unwrap() - 339.0).abs() <= 4.0);
    let c: Vec<f64> = s["resonance_crossings_mv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(c.len(), 2);
    assert!((c[0] - 162.0).abs() < 4.0 && (c[1] - 516.0).abs() < 4.0);
    assert!(s["zero_point_field_v_per_m"].as_f64().unwrap() > 0.0);
}

#[test]
fn two_tone_map_is_written_when_enabled() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[sweep]\nstart_mv = 500\nstop_mv = 530\nstep_mv = 10\n[two_tone]\nenabled = true\nf_step_mhz = 5\n",
    );
    let o = eneon(&["--config", cfg.to_str().unwrap(), "spectrum-map"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let map = fs::read_to_string(tmp.path().join("two_tone_map.csv")).unwrap();
    assert!(map.starts_with("v_rg_mv,delta_fs_mhz,phase_deg\n"));
    assert!(map.lines().count() > 10);
}

#[test]
fn rabi_split_refit_reproduces_embedded_parameters() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[rabi_split]\nnoise_fraction = 0.01\n");
    let o = eneon(&["--config", cfg.to_str().unwrap(), "rabi-split"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let embedded = json(tmp.path().join("rabi_split_fit.json"));
    let cut = tmp.path().join("rabi_split_cut.csv");
    let o = eneon(
        &[
            "fit",
            cut.to_str().unwrap(),
            "--model",
            "vacuum-rabi",
            "--kappa",
            "0.4",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let refit = json(tmp.path().join("fit-vacuum-rabi.json"));
    for name in ["g_mhz", "gamma_mhz", "f_r_ghz"] {
        let a = fit_value(&embedded["fit"]["coupled"], name);
        let b = fit_value(&refit["coupled"], name);
        assert!((a - b).abs() <= 1e-9 * a.abs(), "{name}: {a} vs {b}");
    }
    assert!((fit_value(&refit["coupled"], "g_mhz") - 3.5).abs() < 0.05 * 3.5);
}

#[test]
fn rabi_split_without_coupling_reports_single_peak() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[coupling]\ng_mhz = 0.0\n");
    let o = eneon(&["--config", cfg.to_str().unwrap(), "rabi-split"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("single peak"));
}

#[test]
fn bundled_fixture_recovers_generating_parameters() {
    let tmp = TempDir::new().unwrap();
    let truth = json(fixture("vacuum_rabi_truth.json"));
    let trace = fixture("vacuum_rabi_trace.csv");
    let o = eneon(
        &[
            "fit",
            trace.to_str().unwrap(),
            "--model",
            "vacuum-rabi",
            "--kappa",
            "0.4",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = json(tmp.path().join("fit-vacuum-rabi.json"));
    for name in ["g_mhz", "gamma_mhz"] {
        let want = truth[name].as_f64().unwrap();
        let got = fit_value(&fit["coupled"], name);
        assert!((got - want).abs() < 0.05 * want, "{name}: {got} vs {want}");
    }
}

#[test]
fn wrong_model_is_not_converged_with_exit_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "realizations = 1\n");
    let o = eneon(
        &["--config", cfg.to_str().unwrap(), "timedomain", "t1"],
        tmp.path(),
    );
    assert!(o.status.success());
    let curve = tmp.path().join("t1_curve.csv");
    let o = eneon(&["fit", curve.to_str().unwrap(), "--model", "rabi"], tmp.path());
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    let fit = json(tmp.path().join("fit-rabi.json"));
    assert_eq!(fit["converged"], Value::Bool(false));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let bad = write_config(tmp.path(), "[trap]\nk2 = 1.0\n");
    let o = eneon(&["--config", bad.to_str().unwrap(), "solve", "y"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k2"));

    let invalid = write_config(tmp.path(), "[trap]\nk2_mev_per_um2 = -1.0\n");
    let o = eneon(&["--config", invalid.to_str().unwrap(), "solve", "y"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trap.k2_mev_per_um2"));

    let no_cross = write_config(tmp.path(), "[sweep]\nstop_mv = 400\n");
    let o = eneon(
        &["--config", no_cross.to_str().unwrap(), "rabi-split"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(3));

    let malformed = tmp.path().join("bad.csv");
    fs::write(&malformed, "sweep_ns,p_e\n0,1\n1,oops\n").unwrap();
    let o = eneon(
        &["fit", malformed.to_str().unwrap(), "--model", "decay-exponential"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let wrong_cols = tmp.path().join("cols.csv");
    fs::write(&wrong_cols, "t,y\n0,1\n1,0.5\n").unwrap();
    let o = eneon(
        &[
            "fit",
            wrong_cols.to_str().unwrap(),
            "--model",
            "decay-exponential",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep_ns"));
}

fn output_hashes(dir: &Path, manifest: &str) -> Vec<(String, String)> {
    let m = json(dir.join(manifest));
    m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["path"].as_str().unwrap().into(),
                f["sha256"].as_str().unwrap().into(),
            )
        })
        .collect()
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let one = TempDir::new().unwrap();
    let four = TempDir::new().unwrap();
    let cfg = write_config(
        one.path(),
        "[sweep]\nstart_mv = 300\nstop_mv = 380\nstep_mv = 20\n",
    );
    for (dir, threads) in [(&one, "1"), (&four, "4")] {
        for args in [
            vec!["spectrum-map"],
            vec!["--realizations", "100", "timedomain", "echo"],
            vec!["--realizations", "200", "timedomain", "ramsey"],
        ] {
            let mut full = vec!["--config", cfg.to_str().unwrap(), "--threads", threads];
            full.extend(args);
            let o = eneon(&full, dir.path());
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    for m in [
        "manifest-spectrum-map.json",
        "manifest-timedomain-echo.json",
        "manifest-timedomain-ramsey.json",
    ] {
        let a = output_hashes(one.path(), m);
        assert!(!a.is_empty());
        assert_eq!(a, output_hashes(four.path(), m), "{m}");
    }
}

#[test]
fn manifest_verify_round_trip() {
    let tmp = TempDir::new().unwrap();
    let o = eneon(
        &["--seed", "7", "--realizations", "50", "timedomain", "ramsey"],
        tmp.path(),
    );
    assert!(o.status.success());
    let manifest = tmp.path().join("manifest-timedomain-ramsey.json");
    assert_eq!(json(manifest.clone())["seed"], Value::from(7));
    let o = eneon(&["manifest", "verify", manifest.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("verified 2 outputs"));

    let mut m = json(manifest.clone());
    m["outputs"][0]["sha256"] = Value::from("0".repeat(64));
    let tampered = tmp.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_string(&m).unwrap()).unwrap();
    let o = eneon(&["manifest", "verify", tampered.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn manifest_verify_detects_changed_fit_input() {
    let tmp = TempDir::new().unwrap();
    let trace = tmp.path().join("trace.csv");
    fs::copy(fixture("vacuum_rabi_trace.csv"), &trace).unwrap();
    let o = eneon(
        &["fit", trace.to_str().unwrap(), "--model", "lorentzian"],
        tmp.path(),
    );
    assert!(o.status.success());
    let manifest = tmp.path().join("manifest-fit-lorentzian.json");
    let o = eneon(&["manifest", "verify", manifest.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stdout(&o));
    fs::write(&trace, "f_p_ghz,s21_sq\n6.4,0\n6.41,1\n6.42,0\n").unwrap();
    let o = eneon(&["manifest", "verify", manifest.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_directory_from_environment() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_eneon"))
        .args(["solve", "y"])
        .env("ENEON_OUT", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.join("solve_y.json").exists());
    assert!(dir.join("manifest-solve-y.json").exists());
}

#[test]
fn echo_under_static_noise_reports_no_decay() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "realizations = 200\n[timedomain.echo.decoherence]\nquasi_static_sigma_mhz = 4.5\n",
    );
    let o = eneon(
        &["--config", cfg.to_str().unwrap(), "timedomain", "echo"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("no decay"), "{}", stdout(&o));
}
