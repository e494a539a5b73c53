//! End-to-end tests of the `spinpulse` binary: subcommands, exit codes,
//! deterministic CSV output, and agreement of the emitted curves with the
//! ODE oracle.

use spinpulse::oracle::integrate_state_grid;
use spinpulse::sech::SechPulseParams;
use spinpulse::Complex64 as C64;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinpulse"))
}

fn workspace_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("spinpulse_cli_{name}"))
}

fn write_cfg(name: &str, content: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn swap_prob_matches_oracle_curve() {
    let cfg = write_cfg(
        "swap_oracle.cfg",
        "omega_GHz = 1\na_over_omega = 2.5\nc_over_omega = 0.8\n\
         t_start = 0\nt_end = 4\nsamples = 41\n",
    );
    let out = run(&["swap-prob", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let curve: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(curve.len(), 41);

    let p = SechPulseParams::new(2.5, 0.8, 1.0).unwrap();
    let grid: Vec<f64> = curve.iter().map(|c| c.0).collect();
    let v0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let traj = integrate_state_grid(&p.hamiltonian(), &v0, &grid, 1e-10).unwrap();
    for ((t, p_cli), v) in curve.iter().zip(&traj.states) {
        let p_ode = v[1].norm_sqr();
        assert!((p_cli - p_ode).abs() < 1e-6, "t = {t}: cli {p_cli}, oracle {p_ode}");
    }
}

#[test]
fn byte_identical_reruns() {
    let cfg_path = workspace_path("configs/fig1.cfg");
    let out_a = tmp("det_a.csv");
    let out_b = tmp("det_b.csv");
    for out in [&out_a, &out_b] {
        let r = run(&[
            "swap-prob",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "CSV output must be bit-identical across runs");
}

#[test]
fn sweep_runs_shipped_configs() {
    for name in ["fig2a", "fig2b", "fig3"] {
        let out = tmp(&format!("{name}.csv"));
        let r = run(&[
            "sweep",
            "--config",
            workspace_path(&format!("configs/{name}.cfg")).to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{name} failed: {}", String::from_utf8_lossy(&r.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.lines().count() > 90);
    }
}

#[test]
fn synthesize_emits_angles_and_field() {
    let cfg = write_cfg(
        "synth.cfg",
        "theta_family = gauss_deriv\ntheta_v0 = 1\ntheta_v1 = 0.5\ntheta_T = 1\n\
         phi_family = constant\nphi_value = 0.4\n\
         alpha_family = constant\nalpha_value = 0\n\
         t_start = -3\nt_end = 3\nsamples = 25\n",
    );
    let out = run(&["synthesize", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,theta,phi,alpha,F1,F2,F3");
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn evolve_override_with_set() {
    let cfg = write_cfg(
        "evolve.cfg",
        "system = sech\nomega_GHz = 1\na_over_omega = 3\nc_over_omega = 1\n\
         t_start = 0\nt_end = 2\nsamples = 5\n",
    );
    let out = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "samples=9",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn config_error_exit_code_2() {
    let cfg = write_cfg("bad.cfg", "omega_GHz = 1\n"); // no parameter block
    let out = run(&["swap-prob", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("a_over_omega"), "stderr should name the missing keys: {err}");

    let missing = run(&["swap-prob", "--config", "/nonexistent/path.cfg"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_error_exit_code_3() {
    // gamma = 1/2 + c/omega = 0 is a hypergeometric pole
    let cfg = write_cfg(
        "pole.cfg",
        "omega_GHz = 1\na_over_omega = 1\nc_over_omega = -0.5\n\
         t_start = 0\nt_end = 1\nsamples = 3\n",
    );
    let out = run(&["swap-prob", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validate_healthy_exit_0() {
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sech-vs-oracle"));
    assert!(text.contains("10/10 checks passed"));
}

#[test]
fn validate_detects_injected_perturbation() {
    let out = run(&["validate", "--inject-euler-perturbation", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"));
    assert!(text.contains("trajectory-unitarity"));
}
