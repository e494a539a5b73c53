//! Independent adaptive integrator for n-level time-dependent Schrödinger
//! equations (n = 2 or 4), used to validate every closed form in the crate.
//!
//! Dormand–Prince 5(4) with PI step-size control; complex states are
//! integrated natively. Grid sampling steps exactly onto the requested times
//! (no interpolation error enters the validation chain); cubic Hermite dense
//! output is available for off-step queries.

use crate::cmat::{vec_norm, CMat};
use num_complex::Complex64 as C64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("relative tolerance {0:.3e} outside [1e-13, 1e-3]")]
    ToleranceOutOfRange(f64),
    #[error("integration interval must have t1 > t0 (got {t0} .. {t1})")]
    BadInterval { t0: f64, t1: f64 },
    #[error("Hamiltonian sample at t = {t} is not Hermitian (defect {defect:.3e})")]
    NonHermitian { t: f64, defect: f64 },
    #[error("Hamiltonian dimension {got} does not match state dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("step size underflow at t = {t}: the problem looks stiff")]
    StepUnderflow { t: f64 },
    #[error("grid must be strictly increasing with at least one point")]
    BadGrid,
}

/// Time-dependent Hermitian Hamiltonian in angular-frequency units.
#[derive(Clone)]
pub struct HamiltonianFn {
    dim: usize,
    f: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
}

impl HamiltonianFn {
    pub fn new(dim: usize, f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Self {
        HamiltonianFn { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, t: f64) -> CMat {
        (self.f)(t)
    }

    fn checked_matrix(&self, t: f64) -> Result<CMat, OracleError> {
        let h = self.matrix(t);
        if h.dim() != self.dim {
            return Err(OracleError::DimensionMismatch { got: h.dim(), want: self.dim });
        }
        let defect = h.hermiticity_defect();
        if defect > 1e-12 * (1.0 + h.max_abs()) {
            return Err(OracleError::NonHermitian { t, defect });
        }
        Ok(h)
    }
}

/// Propagator samples along a time grid; `matrices[0]` is the identity when
/// the grid starts at the initial time.
#[derive(Debug, Clone)]
pub struct PropagatorTrajectory {
    pub times: Vec<f64>,
    pub matrices: Vec<CMat>,
    /// Max unitarity defect ‖U†U − I‖_max observed over the trajectory.
    pub tolerance_achieved: f64,
}

/// State samples along a time grid.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    /// Max norm drift |‖v‖ − ‖v₀‖| observed over the trajectory.
    pub tolerance_achieved: f64,
}

/// Solve i dU/dt = H(t) U, U(t0) = I, reporting U at the accepted steps.
pub fn integrate_propagator(
    h: &HamiltonianFn,
    t0: f64,
    t1: f64,
    rel_tol: f64,
) -> Result<PropagatorTrajectory, OracleError> {
    let grid = [t0, t1];
    let n = h.dim();
    let y0 = flatten(&CMat::identity(n));
    let sol = rk45(h, &y0, t0, t1, rel_tol, Some(&grid), true)?;
    propagator_from_solution(n, sol)
}

/// Solve i dU/dt = H(t) U stepping exactly onto each grid time.
pub fn integrate_propagator_grid(
    h: &HamiltonianFn,
    grid: &[f64],
    rel_tol: f64,
) -> Result<PropagatorTrajectory, OracleError> {
    validate_grid(grid)?;
    let n = h.dim();
    let y0 = flatten(&CMat::identity(n));
    let sol = rk45(h, &y0, grid[0], *grid.last().unwrap(), rel_tol, Some(grid), false)?;
    propagator_from_solution(n, sol)
}

/// Solve i dv/dt = H(t) v for a state vector, sampling at accepted steps.
pub fn integrate_state(
    h: &HamiltonianFn,
    v0: &[C64],
    t0: f64,
    t1: f64,
    rel_tol: f64,
) -> Result<StateTrajectory, OracleError> {
    if v0.len() != h.dim() {
        return Err(OracleError::DimensionMismatch { got: h.dim(), want: v0.len() });
    }
    let grid = [t0, t1];
    let sol = rk45(h, v0, t0, t1, rel_tol, Some(&grid), true)?;
    state_from_solution(v0, sol)
}

/// Solve i dv/dt = H(t) v stepping exactly onto each grid time.
pub fn integrate_state_grid(
    h: &HamiltonianFn,
    v0: &[C64],
    grid: &[f64],
    rel_tol: f64,
) -> Result<StateTrajectory, OracleError> {
    if v0.len() != h.dim() {
        return Err(OracleError::DimensionMismatch { got: h.dim(), want: v0.len() });
    }
    validate_grid(grid)?;
    let sol = rk45(h, v0, grid[0], *grid.last().unwrap(), rel_tol, Some(grid), false)?;
    state_from_solution(v0, sol)
}

/// Accepted-step record for dense output.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    steps: Vec<(f64, Vec<C64>, Vec<C64>)>, // (t, y, f)
}

impl DenseSolution {
    /// Cubic Hermite interpolation between the bracketing accepted steps
    /// (O(h⁴) local accuracy).
    pub fn eval(&self, t: f64) -> Vec<C64> {
        let n = self.steps.len();
        if t <= self.steps[0].0 {
            return self.steps[0].1.clone();
        }
        if t >= self.steps[n - 1].0 {
            return self.steps[n - 1].1.clone();
        }
        let k = self.steps.partition_point(|s| s.0 <= t) - 1;
        let (t0, y0, f0) = &self.steps[k];
        let (t1, y1, f1) = &self.steps[k + 1];
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        y0.iter()
            .zip(y1)
            .zip(f0.iter().zip(f1))
            .map(|((a, b), (fa, fb))| a * h00 + fa * (h10 * h) + b * h01 + fb * (h11 * h))
            .collect()
    }

    pub fn t_span(&self) -> (f64, f64) {
        (self.steps[0].0, self.steps.last().unwrap().0)
    }
}

/// Integrate the propagator keeping every accepted step for interpolation.
pub fn integrate_propagator_dense(
    h: &HamiltonianFn,
    t0: f64,
    t1: f64,
    rel_tol: f64,
) -> Result<DenseSolution, OracleError> {
    let n = h.dim();
    let y0 = flatten(&CMat::identity(n));
    let sol = rk45(h, &y0, t0, t1, rel_tol, None, true)?;
    Ok(DenseSolution { steps: sol.records })
}

pub fn unflatten(n: usize, y: &[C64]) -> CMat {
    CMat::from_rows(n, y)
}

fn flatten(m: &CMat) -> Vec<C64> {
    m.data().to_vec()
}

fn validate_grid(grid: &[f64]) -> Result<(), OracleError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OracleError::BadGrid);
    }
    Ok(())
}

fn propagator_from_solution(
    n: usize,
    sol: Rk45Output,
) -> Result<PropagatorTrajectory, OracleError> {
    let times: Vec<f64> = sol.samples.iter().map(|(t, _)| *t).collect();
    let matrices: Vec<CMat> = sol.samples.iter().map(|(_, y)| unflatten(n, y)).collect();
    let defect = matrices
        .iter()
        .map(|m| m.unitarity_defect())
        .fold(0.0, f64::max);
    Ok(PropagatorTrajectory { times, matrices, tolerance_achieved: defect })
}

fn state_from_solution(v0: &[C64], sol: Rk45Output) -> Result<StateTrajectory, OracleError> {
    let norm0 = vec_norm(v0);
    let times: Vec<f64> = sol.samples.iter().map(|(t, _)| *t).collect();
    let states: Vec<Vec<C64>> = sol.samples.into_iter().map(|(_, y)| y).collect();
    let drift = states
        .iter()
        .map(|v| (vec_norm(v) - norm0).abs())
        .fold(0.0, f64::max);
    Ok(StateTrajectory { times, states, tolerance_achieved: drift })
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// b − b̂: weights of the embedded error estimate (7 stages, FSAL).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

struct Rk45Output {
    /// Samples at the mandatory times (grid) or at every accepted step.
    samples: Vec<(f64, Vec<C64>)>,
    /// Every accepted step with its derivative, for dense output.
    records: Vec<(f64, Vec<C64>, Vec<C64>)>,
}

/// Core adaptive loop for i dy/dt = H(t)·y with y a flattened matrix or a
/// state vector. `mandatory` times are hit exactly; when `sample_all_steps`
/// is set the output carries every accepted step instead of only mandatory
/// times.
fn rk45(
    h: &HamiltonianFn,
    y0: &[C64],
    t0: f64,
    t1: f64,
    rel_tol: f64,
    mandatory: Option<&[f64]>,
    sample_all_steps: bool,
) -> Result<Rk45Output, OracleError> {
    if !(1e-13..=1e-3).contains(&rel_tol) {
        return Err(OracleError::ToleranceOutOfRange(rel_tol));
    }
    if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
        return Err(OracleError::BadInterval { t0, t1 });
    }
    let n = h.dim();
    let ncols = y0.len() / n;

    let rhs = |t: f64, y: &[C64], out: &mut Vec<C64>| -> Result<(), OracleError> {
        let hm = h.checked_matrix(t)?;
        out.clear();
        out.resize(y.len(), C64::new(0.0, 0.0));
        let minus_i = C64::new(0.0, -1.0);
        // y holds ncols column-collections row-major: y[i*ncols + j]
        for i in 0..n {
            for k in 0..n {
                let hik = hm[(i, k)] * minus_i;
                if hik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..ncols {
                    out[i * ncols + j] += hik * y[k * ncols + j];
                }
            }
        }
        Ok(())
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f_cur = Vec::new();
    rhs(t, &y, &mut f_cur)?;

    let mut samples: Vec<(f64, Vec<C64>)> = Vec::new();
    let mut records: Vec<(f64, Vec<C64>, Vec<C64>)> = Vec::new();
    records.push((t, y.clone(), f_cur.clone()));

    let mut mandatory_iter = mandatory.unwrap_or(&[]).iter().copied().peekable();
    while let Some(&m) = mandatory_iter.peek() {
        if m <= t {
            samples.push((t, y.clone()));
            mandatory_iter.next();
        } else {
            break;
        }
    }
    if sample_all_steps && samples.is_empty() {
        samples.push((t, y.clone()));
    }

    // initial step heuristic
    let f_scale = vec_norm(&f_cur).max(1e-8);
    let mut dt = (0.01 * (1.0 + vec_norm(&y)) / f_scale).min(t1 - t0);
    let mut err_prev: f64 = 1.0;

    let mut k = vec![Vec::new(); 7];
    let mut ytmp: Vec<C64> = Vec::new();
    let mut rejects_in_a_row = 0;

    while t < t1 {
        let next_stop = mandatory_iter.peek().copied().unwrap_or(t1).min(t1);
        let h_step = dt.min(next_stop - t);
        if h_step < f64::EPSILON * t.abs().max(1.0) * 4.0 {
            // Mandatory point within roundoff; emit and move on.
            if mandatory_iter.peek().is_some() {
                samples.push((next_stop, y.clone()));
                mandatory_iter.next();
                t = next_stop;
                continue;
            }
            break;
        }

        // stages (k1 = f_cur, FSAL candidate)
        k[0] = f_cur.clone();
        let stage = |coeffs: &[f64], k: &[Vec<C64>], y: &[C64], h_step: f64, out: &mut Vec<C64>| {
            out.clear();
            out.extend_from_slice(y);
            for (c, kv) in coeffs.iter().zip(k) {
                if *c == 0.0 {
                    continue;
                }
                for (o, x) in out.iter_mut().zip(kv) {
                    *o += x * (c * h_step);
                }
            }
        };

        stage(&A2, &k, &y, h_step, &mut ytmp);
        rhs(t + C[0] * h_step, &ytmp, &mut k[1])?;
        stage(&A3, &k, &y, h_step, &mut ytmp);
        rhs(t + C[1] * h_step, &ytmp, &mut k[2])?;
        stage(&A4, &k, &y, h_step, &mut ytmp);
        rhs(t + C[2] * h_step, &ytmp, &mut k[3])?;
        stage(&A5, &k, &y, h_step, &mut ytmp);
        rhs(t + C[3] * h_step, &ytmp, &mut k[4])?;
        stage(&A6, &k, &y, h_step, &mut ytmp);
        rhs(t + C[4] * h_step, &ytmp, &mut k[5])?;
        // 5th-order solution
        stage(&B, &k, &y, h_step, &mut ytmp);
        let y5 = ytmp.clone();
        rhs(t + h_step, &y5, &mut k[6])?;

        // embedded error estimate
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let mut e = C64::new(0.0, 0.0);
            for (w, kv) in E.iter().zip(&k) {
                if *w != 0.0 {
                    e += kv[i] * *w;
                }
            }
            e *= h_step;
            let scale = rel_tol * (0.01 + y[i].norm().max(y5[i].norm()));
            let r = e.norm() / scale;
            err = err.max(r);
        }

        if err <= 1.0 {
            t += h_step;
            y = y5;
            f_cur = k[6].clone();
            records.push((t, y.clone(), f_cur.clone()));
            if sample_all_steps {
                samples.push((t, y.clone()));
            }
            while let Some(&m) = mandatory_iter.peek() {
                if (m - t).abs() <= f64::EPSILON * t.abs().max(1.0) * 8.0 {
                    if !sample_all_steps {
                        samples.push((t, y.clone()));
                    }
                    mandatory_iter.next();
                } else {
                    break;
                }
            }
            // PI controller (Hairer's dopri5 defaults)
            let beta = 0.04;
            let expo = 0.2 - 0.75 * beta;
            let fac = 0.9 * err.max(1e-10).powf(-expo) * err_prev.max(1e-10).powf(beta);
            dt = h_step * fac.clamp(0.2, 10.0);
            err_prev = err.max(1e-10);
            rejects_in_a_row = 0;
        } else {
            dt = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            rejects_in_a_row += 1;
            if rejects_in_a_row > 40 || dt < f64::EPSILON * t.abs().max(1.0) * 16.0 {
                return Err(OracleError::StepUnderflow { t });
            }
        }
    }

    Ok(Rk45Output { samples, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::{pauli, sigma_dot};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_hamiltonian_stays_identity() {
        let h = HamiltonianFn::new(2, |_| CMat::zeros(2));
        let grid: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let traj = integrate_propagator_grid(&h, &grid, 1e-10).unwrap();
        for m in &traj.matrices {
            assert!(m.max_abs_diff(&CMat::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn constant_sigma3_phase_evolution() {
        let f = 0.83;
        let h = HamiltonianFn::new(2, move |_| pauli(3).scale(c(f, 0.0)));
        let grid: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
        let traj = integrate_propagator_grid(&h, &grid, 1e-10).unwrap();
        for (t, m) in traj.times.iter().zip(&traj.matrices) {
            let want = CMat::from_rows(
                2,
                &[
                    C64::from_polar(1.0, -f * t),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    C64::from_polar(1.0, f * t),
                ],
            );
            assert!(m.max_abs_diff(&want) < 1e-8, "t = {t}");
        }
        assert!(traj.tolerance_achieved < 1e-9);
    }

    #[test]
    fn eigenstate_keeps_moduli() {
        // v0 an eigenstate of a constant σ·F: only phases evolve
        let h = HamiltonianFn::new(2, |_| sigma_dot(1.0, 0.0, 0.0));
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let v0 = [c(inv_sqrt2, 0.0), c(inv_sqrt2, 0.0)];
        let grid: Vec<f64> = (0..=30).map(|k| 0.2 * k as f64).collect();
        let traj = integrate_state_grid(&h, &v0, &grid, 1e-10).unwrap();
        for v in &traj.states {
            assert!((v[0].norm() - inv_sqrt2).abs() < 1e-8);
            assert!((v[1].norm() - inv_sqrt2).abs() < 1e-8);
        }
    }

    #[test]
    fn rabi_oscillation_between_middle_levels() {
        // Four levels, exchange only: |ud⟩ ↔ |du⟩ oscillates at frequency
        // set by J, with full transfer at t = π/(2J).
        use crate::four_level::{hamiltonian_4, TimeFunction, TwoSpinFields};
        let j = 0.7;
        let fields = TwoSpinFields::new(
            [TimeFunction::zero(), TimeFunction::zero(), TimeFunction::zero()],
            [TimeFunction::zero(), TimeFunction::zero(), TimeFunction::zero()],
            TimeFunction::constant(j),
        );
        let h = HamiltonianFn::new(4, move |t| hamiltonian_4(&fields, t));
        let v0 = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let t_swap = std::f64::consts::PI / (2.0 * j);
        let grid: Vec<f64> = (0..=40).map(|k| t_swap * k as f64 / 40.0).collect();
        let traj = integrate_state_grid(&h, &v0, &grid, 1e-10).unwrap();
        for (t, v) in traj.times.iter().zip(&traj.states) {
            let p_du = v[2].norm_sqr();
            let want = (j * t).sin().powi(2);
            assert!((p_du - want).abs() < 1e-7, "t = {t}: {p_du} vs {want}");
        }
        let last = traj.states.last().unwrap();
        assert!((last[2].norm_sqr() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn unitarity_defect_tracks_tolerance() {
        let h = HamiltonianFn::new(2, |t: f64| sigma_dot((3.0 * t).sin(), 0.4, 1.0 / t.cosh()));
        for tol in [1e-6, 1e-8, 1e-10] {
            let traj = integrate_propagator(&h, 0.0, 8.0, tol).unwrap();
            let steps = traj.times.len() as f64;
            assert!(
                traj.tolerance_achieved < 10.0 * tol * steps,
                "defect {:.2e} at tol {tol:.0e} over {steps} steps",
                traj.tolerance_achieved
            );
        }
    }

    #[test]
    fn convergence_under_tolerance_halving() {
        // deviation from the exact constant-field propagator never grows as
        // the tolerance tightens (statistically: summed over a small set)
        let cases = [(0.9, 0.0, 0.3), (0.1, 0.7, -0.5), (1.5, -1.0, 0.2)];
        let mut prev_total = f64::INFINITY;
        for tol in [1e-4, 1e-6, 1e-8, 1e-10] {
            let mut total = 0.0;
            for (f1, f2, f3) in cases {
                let h = HamiltonianFn::new(2, move |_| sigma_dot(f1, f2, f3));
                let t1 = 5.0;
                let traj = integrate_propagator_grid(&h, &[0.0, t1], tol).unwrap();
                let got = traj.matrices.last().unwrap().clone();
                // exact: U = exp(−i (σ·f) t) = cos(|f|t) I − i sin(|f|t) σ·f/|f|
                let fmag = (f1 * f1 + f2 * f2 + f3 * f3).sqrt();
                let want = CMat::identity(2)
                    .scale(c((fmag * t1).cos(), 0.0))
                    .add(&sigma_dot(f1, f2, f3).scale(c(0.0, -(fmag * t1).sin() / fmag)));
                total += got.max_abs_diff(&want);
            }
            let floored = total.max(1e-12);
            assert!(
                floored <= prev_total.max(1e-12) * 1.5,
                "deviation grew from {prev_total:.2e} to {total:.2e} at tol {tol:.0e}"
            );
            prev_total = floored;
        }
        assert!(prev_total < 1e-8);
    }

    #[test]
    fn dense_output_fourth_order() {
        let h = HamiltonianFn::new(2, |t: f64| sigma_dot(0.0, 0.0, 1.0 + 0.5 * (2.0 * t).sin()));
        let tol = 1e-9;
        let dense = integrate_propagator_dense(&h, 0.0, 4.0, tol).unwrap();
        // phase: ∫(1 + 0.5 sin 2τ)dτ = t + 0.25(1 − cos 2t)
        for k in 1..40 {
            let t = 0.1 * k as f64;
            let phase = t + 0.25 * (1.0 - (2.0 * t).cos());
            let y = dense.eval(t);
            let got = unflatten(2, &y);
            let want = CMat::from_rows(
                2,
                &[
                    C64::from_polar(1.0, -phase),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    C64::from_polar(1.0, phase),
                ],
            );
            assert!(got.max_abs_diff(&want) < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn error_paths() {
        let h = HamiltonianFn::new(2, |_| CMat::zeros(2));
        assert!(matches!(
            integrate_propagator(&h, 0.0, 1.0, 1e-2),
            Err(OracleError::ToleranceOutOfRange(_))
        ));
        assert!(matches!(
            integrate_propagator(&h, 1.0, 0.0, 1e-8),
            Err(OracleError::BadInterval { .. })
        ));
        let bad = HamiltonianFn::new(2, |_| {
            CMat::from_rows(2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)])
        });
        assert!(matches!(
            integrate_propagator(&bad, 0.0, 1.0, 1e-8),
            Err(OracleError::NonHermitian { .. })
        ));
    }
}
