//! Self-check suite: unitarity and determinant identities, closed forms
//! against the ODE oracle, hypergeometric relations, and the B₊ invariance
//! of the Swap amplitude. The CLI `validate` subcommand runs this suite and
//! maps the outcome to its exit code.

use crate::four_level::{
    gamma_phi, reduced_evolution, transition_amplitude, BasisState, ParallelFieldSpec,
    TimeFunction,
};
use crate::hyp2f1::hyp2f1_c;
use crate::oracle::{integrate_propagator_grid, HamiltonianFn};
use crate::pulse::{field_from_angles, AngleProfile, EulerTrajectory};
use crate::sech::{SechPulse, SechPulseParams};
use crate::su2::{euler_params_from_angles, evolution_from_r, EulerParams, Su2Propagator};
use num_complex::Complex64 as C64;
use self::rand_lite::SplitMix64;
use std::f64::consts::PI;

/// Options of the validation run.
#[derive(Debug, Clone)]
pub struct ValidateOptions {
    /// Threshold for closed-form vs oracle comparisons.
    pub oracle_tolerance: f64,
    /// Harness hook: additive perturbation injected into the half-angle
    /// parameters before the unitarity checks. Zero in normal operation; a
    /// value like 1e-3 demonstrates that the checks are sensitive.
    pub euler_perturbation: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { oracle_tolerance: 1e-6, euler_perturbation: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub achieved: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status}  {:<28} achieved {:>10.3e}  tolerance {:>8.1e}  {}\n",
                c.name, c.achieved, c.tolerance, c.detail
            ));
        }
        let (passed, total) = (
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
        );
        out.push_str(&format!("{passed}/{total} checks passed\n"));
        out
    }
}

/// Minimal deterministic PRNG so the validation suite does not pull a
/// dev-dependency into the library.
mod rand_lite {
    pub struct SplitMix64(pub u64);

    impl SplitMix64 {
        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }

        /// Uniform in [lo, hi).
        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            lo + u * (hi - lo)
        }
    }
}

fn perturbed_params(theta: f64, phi: f64, alpha: f64, eps: f64) -> EulerParams {
    let mut p = euler_params_from_angles(theta, phi, alpha).expect("finite angles");
    p.p1 += eps;
    p
}

/// Max deviation between the angle-synthesized propagator û(t) = R(t)R₀⁻¹
/// and the ODE integration of the synthesized field, over the grid.
pub fn angle_consistency_deviation(
    traj: &EulerTrajectory,
    grid: &[f64],
    rel_tol: f64,
    perturbation: f64,
) -> Result<f64, String> {
    let params_at = |t: f64| {
        let p = traj.eval(t);
        perturbed_params(p.theta, p.phi, p.alpha, perturbation)
    };
    let r0 = Su2Propagator::new(params_at(grid[0]), grid[0]).map_err(|e| e.to_string())?;
    let traj_h = traj.clone();
    let h = HamiltonianFn::new(2, move |t| {
        let f = field_from_angles(&traj_h, t);
        crate::cmat::sigma_dot(f.f1, f.f2, f.f3)
    });
    let ode = integrate_propagator_grid(&h, grid, rel_tol).map_err(|e| e.to_string())?;
    let mut max_dev: f64 = 0.0;
    for (t, u_ode) in ode.times.iter().zip(&ode.matrices) {
        let r_t = Su2Propagator::new(params_at(*t), *t).map_err(|e| e.to_string())?;
        let u_angles = evolution_from_r(&r_t, &r0).map_err(|e| e.to_string())?;
        max_dev = max_dev.max(u_angles.max_abs_diff(u_ode));
    }
    Ok(max_dev)
}

/// Max entrywise deviation between the sech closed form and the oracle over
/// a symmetric grid |ωt| ≤ `wt_max`. Negative times are reached by
/// composing the oracle propagator with its value at t = 0.
pub fn sech_oracle_deviation(
    p: &SechPulseParams,
    wt_max: f64,
    samples: usize,
    rel_tol: f64,
) -> Result<f64, String> {
    let pulse = SechPulse::new(*p).map_err(|e| e.to_string())?;
    let t_max = wt_max / p.omega;
    let grid: Vec<f64> = (0..=2 * samples)
        .map(|k| -t_max + t_max * k as f64 / samples as f64)
        .collect();
    let ode = integrate_propagator_grid(&p.hamiltonian(), &grid, rel_tol)
        .map_err(|e| e.to_string())?;
    // U(t)·U(0)⁻¹ turns the grid integration (started at −t_max) into the
    // propagator with reference time 0
    let k0 = grid.len() / 2;
    let u0_inv = ode.matrices[k0].adjoint();
    let mut max_dev: f64 = 0.0;
    for (t, u) in ode.times.iter().zip(&ode.matrices) {
        let u_ode = u.mul(&u0_inv);
        let u_closed = pulse.evolution(*t).map_err(|e| e.to_string())?;
        max_dev = max_dev.max(u_closed.max_abs_diff(&u_ode));
    }
    Ok(max_dev)
}

/// Max entrywise deviation between the reduced 4×4 evolution operator
/// (embedded 2×2 block from the oracle, phases by quadrature) and the direct
/// 4×4 ODE integration, over the grid.
pub fn reduction_deviation(
    spec: &ParallelFieldSpec,
    grid: &[f64],
    rel_tol: f64,
) -> Result<f64, String> {
    let spec2 = spec.clone();
    let h2 = HamiltonianFn::new(2, move |t| {
        let k = crate::four_level::effective_field(&spec2, t);
        crate::cmat::sigma_dot(k.f1, k.f2, k.f3)
    });
    let block = integrate_propagator_grid(&h2, grid, rel_tol).map_err(|e| e.to_string())?;
    let full = integrate_propagator_grid(&spec.hamiltonian(), grid, rel_tol)
        .map_err(|e| e.to_string())?;
    let mut max_dev: f64 = 0.0;
    for ((t, u2), u4) in block.times.iter().zip(&block.matrices).zip(&full.matrices) {
        let (gamma, phi) = gamma_phi(spec, *t);
        let reduced = reduced_evolution(u2, gamma, phi, *t).map_err(|e| e.to_string())?;
        max_dev = max_dev.max(reduced.matrix.max_abs_diff(u4));
    }
    Ok(max_dev)
}

/// Max deviation between the closed-form sech Swap curve and the reduced
/// four-level construction for the same physics.
pub fn sech_reduction_deviation(
    p: &SechPulseParams,
    b_plus: TimeFunction,
    grid: &[f64],
    rel_tol: f64,
) -> Result<f64, String> {
    let spec = ParallelFieldSpec::from_sum_diff(
        b_plus,
        TimeFunction::sech_pulse(p.c, p.omega),
        TimeFunction::constant(p.a),
    );
    let pulse = SechPulse::new(*p).map_err(|e| e.to_string())?;
    let full = integrate_propagator_grid(&spec.hamiltonian(), grid, rel_tol)
        .map_err(|e| e.to_string())?;
    let mut max_dev: f64 = 0.0;
    for (t, u4) in full.times.iter().zip(&full.matrices) {
        let u2 = pulse.evolution(*t).map_err(|e| e.to_string())?;
        let (gamma, phi) = gamma_phi(&spec, *t);
        let reduced = reduced_evolution(&u2, gamma, phi, *t).map_err(|e| e.to_string())?;
        max_dev = max_dev.max(reduced.matrix.max_abs_diff(u4));
    }
    Ok(max_dev)
}

/// Run the whole suite.
pub fn run_suite(opts: &ValidateOptions) -> SuiteReport {
    let checks = vec![
        check_euler_determinant(opts),
        check_trajectory_unitarity(opts),
        check_z_circle(),
        check_hyp2f1_log_case(),
        check_hyp2f1_contiguous(),
        check_angle_consistency(opts),
        check_sech_vs_oracle(opts),
        check_reduction(opts),
        check_b_plus_invariance(),
        check_constrained_field(),
    ];
    SuiteReport { checks }
}

fn result(
    name: &'static str,
    achieved: f64,
    tolerance: f64,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult { name, passed: achieved <= tolerance, achieved, tolerance, detail: detail.into() }
}

fn failure(name: &'static str, tolerance: f64, err: String) -> CheckResult {
    CheckResult { name, passed: false, achieved: f64::INFINITY, tolerance, detail: err }
}

fn check_euler_determinant(opts: &ValidateOptions) -> CheckResult {
    let mut rng = SplitMix64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = perturbed_params(
            rng.uniform(-PI, PI),
            rng.uniform(-PI, PI),
            rng.uniform(-PI, PI),
            opts.euler_perturbation,
        );
        worst = worst.max((p.delta() - 1.0).abs());
    }
    result("euler-determinant", worst, 1e-14, "|Δ − 1| over 200 random angle triples")
}

fn check_trajectory_unitarity(opts: &ValidateOptions) -> CheckResult {
    let traj = EulerTrajectory {
        theta: AngleProfile::SineInterp { from: 0.2, to: 2.4, half_width: 1.0 },
        phi: AngleProfile::GaussDeriv { amplitude: 1.1, baseline: 0.4, width: 0.8 },
        alpha: AngleProfile::LinearPeriodic { rate: 0.7 },
    };
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let t = -2.0 + 4.0 * k as f64 / 100.0;
        let p = traj.eval(t);
        let ep = perturbed_params(p.theta, p.phi, p.alpha, opts.euler_perturbation);
        worst = worst.max(crate::su2::as_matrix(&ep).unitarity_defect());
    }
    result("trajectory-unitarity", worst, 1e-10, "‖R†R − I‖ along a synthesized trajectory")
}

fn check_z_circle() -> CheckResult {
    let p = SechPulseParams::new(3.0, 1.0, 1.0).expect("valid params");
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let t = -20.0 + 40.0 * k as f64 / 400.0;
        worst = worst.max((crate::sech::z_of_time(&p, t).norm() - 1.0).abs());
    }
    result("z-unit-circle", worst, 1e-14, "| |z(t)| − 1 | for |ωt| ≤ 20")
}

fn check_hyp2f1_log_case() -> CheckResult {
    let one = C64::new(1.0, 0.0);
    match hyp2f1_c(one, one, C64::new(2.0, 0.0), C64::new(0.3, 0.0)) {
        Ok(v) => {
            let want = -(0.7f64).ln() / 0.3;
            result(
                "hyp2f1-log-case",
                (v - want).norm() / want.abs(),
                1e-12,
                "F(1,1;2;0.3) against −ln(0.7)/0.3",
            )
        }
        Err(e) => failure("hyp2f1-log-case", 1e-12, e.to_string()),
    }
}

fn check_hyp2f1_contiguous() -> CheckResult {
    let mut rng = SplitMix64(0x5eed_0002);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = C64::new(rng.uniform(-2.0, 3.0), rng.uniform(-2.0, 2.0));
        let b = C64::new(rng.uniform(-2.0, 3.0), rng.uniform(-2.0, 2.0));
        let c = C64::new(rng.uniform(0.7, 4.0), rng.uniform(-1.5, 1.5));
        let z = C64::from_polar(rng.uniform(0.05, 0.9), rng.uniform(-PI, PI));
        let trio = (
            hyp2f1_c(a, b, c, z),
            hyp2f1_c(a - 1.0, b, c, z),
            hyp2f1_c(a, b, c + 1.0, z),
        );
        match trio {
            (Ok(f), Ok(f_am), Ok(f_cp)) => {
                let lhs = c * (C64::new(1.0, 0.0) - z) * f - c * f_am + (c - b) * z * f_cp;
                let scale = f.norm().max(f_am.norm()).max(f_cp.norm()).max(1.0) * c.norm();
                worst = worst.max(lhs.norm() / scale);
            }
            _ => return failure("hyp2f1-contiguous", 1e-9, "evaluation error".into()),
        }
    }
    result("hyp2f1-contiguous", worst, 1e-9, "Gauss contiguous relation, 50 draws")
}

fn check_angle_consistency(opts: &ValidateOptions) -> CheckResult {
    let combos = [
        EulerTrajectory {
            theta: AngleProfile::SineInterp { from: 0.3, to: 2.0, half_width: 1.0 },
            phi: AngleProfile::SineInterp { from: -0.5, to: 0.8, half_width: 1.0 },
            alpha: AngleProfile::SineInterp { from: 1.0, to: -0.4, half_width: 1.0 },
        },
        EulerTrajectory {
            theta: AngleProfile::GaussDeriv { amplitude: 1.2, baseline: 0.7, width: 0.9 },
            phi: AngleProfile::Constant(0.6),
            alpha: AngleProfile::GaussDeriv { amplitude: -0.8, baseline: 0.2, width: 1.1 },
        },
        EulerTrajectory {
            theta: AngleProfile::LinearPeriodic { rate: 1.3 },
            phi: AngleProfile::Constant(std::f64::consts::FRAC_PI_3),
            alpha: AngleProfile::LinearPeriodic { rate: 0.4 },
        },
    ];
    let grid: Vec<f64> = (0..=60).map(|k| -3.0 + 0.1 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for traj in &combos {
        match angle_consistency_deviation(traj, &grid, 1e-9, opts.euler_perturbation) {
            Ok(dev) => worst = worst.max(dev),
            Err(e) => return failure("angle-field-consistency", opts.oracle_tolerance, e),
        }
    }
    result(
        "angle-field-consistency",
        worst,
        opts.oracle_tolerance,
        "û(t) = R(t)R₀⁻¹ vs ODE of the synthesized field",
    )
}

fn check_sech_vs_oracle(opts: &ValidateOptions) -> CheckResult {
    let mut rng = SplitMix64(0x5eed_0003);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let p = SechPulseParams::new(
            rng.uniform(0.1, 8.0),
            rng.uniform(0.1, 10.0),
            1.0,
        )
        .expect("valid params");
        match sech_oracle_deviation(&p, 6.0, 24, 1e-9) {
            Ok(dev) => worst = worst.max(dev),
            Err(e) => return failure("sech-vs-oracle", opts.oracle_tolerance, e),
        }
    }
    result(
        "sech-vs-oracle",
        worst,
        opts.oracle_tolerance,
        "closed-form û vs ODE, 8 random (a, c) draws",
    )
}

fn check_reduction(opts: &ValidateOptions) -> CheckResult {
    let mut rng = SplitMix64(0x5eed_0004);
    let grid: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let spec = ParallelFieldSpec::from_sum_diff(
            TimeFunction::harmonic(rng.uniform(-2.0, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.0, PI)),
            TimeFunction::sech_pulse(rng.uniform(0.2, 3.0), rng.uniform(0.5, 2.0)),
            TimeFunction::constant(rng.uniform(0.2, 3.0)),
        );
        match reduction_deviation(&spec, &grid, 1e-9) {
            Ok(dev) => worst = worst.max(dev),
            Err(e) => return failure("four-level-reduction", opts.oracle_tolerance, e),
        }
    }
    result(
        "four-level-reduction",
        worst,
        opts.oracle_tolerance,
        "phase-factorized Û vs direct 4×4 ODE, 3 random specs",
    )
}

fn check_b_plus_invariance() -> CheckResult {
    let u2 = crate::su2::as_matrix(
        &euler_params_from_angles(0.9, 0.4, -0.2).expect("finite angles"),
    );
    let base = reduced_evolution(&u2, 0.0, 0.8, 1.0).expect("unitary block");
    let amp0 = transition_amplitude(&base, BasisState::DownUp, BasisState::UpDown).norm();
    let mut rng = SplitMix64(0x5eed_0005);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let alt = reduced_evolution(&u2, rng.uniform(-30.0, 30.0), 0.8, 1.0).expect("unitary");
        let amp = transition_amplitude(&alt, BasisState::DownUp, BasisState::UpDown).norm();
        worst = worst.max((amp - amp0).abs());
    }
    result("b-plus-invariance", worst, 1e-12, "Swap modulus under 10 replacements of B₊")
}

fn check_constrained_field() -> CheckResult {
    let theta = AngleProfile::GaussDeriv { amplitude: 0.6, baseline: 1.2, width: 1.0 };
    let phi = AngleProfile::SineInterp { from: 0.4, to: 0.8, half_width: 1.2 };
    let grid: Vec<f64> = (0..=30).map(|k| -1.5 + 0.1 * k as f64).collect();
    match crate::pulse::constrained_two_spin_field(&theta, &phi, &grid) {
        Ok(out) => {
            let traj = EulerTrajectory { theta, phi, alpha: out.alpha.clone() };
            let mut worst: f64 = 0.0;
            for &t in &grid {
                worst = worst.max(field_from_angles(&traj, t).f2.abs());
            }
            result("constrained-f2-zero", worst, 1e-8, "|F₂| with reconstructed α")
        }
        Err(e) => failure("constrained-f2-zero", 1e-8, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn healthy_suite_passes() {
        let report = run_suite(&ValidateOptions::default());
        assert!(report.all_passed(), "{}", report.render());
    }

    #[test]
    fn injected_perturbation_detected() {
        let opts = ValidateOptions { euler_perturbation: 1e-3, ..Default::default() };
        let report = run_suite(&opts);
        let det = report.checks.iter().find(|c| c.name == "euler-determinant").unwrap();
        assert!(!det.passed);
        let uni = report.checks.iter().find(|c| c.name == "trajectory-unitarity").unwrap();
        assert!(!uni.passed);
    }
}
