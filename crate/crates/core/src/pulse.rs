//! Angle trajectories and field synthesis.
//!
//! An [`EulerTrajectory`] carries three time-dependent angles (θ, φ, α), each
//! with its closed-form derivative. [`field_from_angles`] evaluates the
//! external field realized by the trajectory,
//!
//! ```text
//! F₁ = (θ̇/2) sin φ + (α̇/2) sin θ cos φ
//! F₂ = (α̇/2) sin θ sin φ − (θ̇/2) cos φ
//! F₃ = φ̇/2 − (α̇/2) cos θ
//! ```
//!
//! so pulse families whose derivatives vanish outside a window produce fields
//! restricted in time. [`constrained_two_spin_field`] specializes to the
//! two-spin effective field: it enforces F₂ = 0 by reconstructing α from a
//! quadrature and returns K₁ = θ̇/(2 sin φ), K₃ = −η̇/(2 tan φ) with
//! η = ln(cos φ sin θ).

use crate::quad;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Absolute tolerance of the α-reconstruction quadrature.
const ALPHA_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum PulseError {
    #[error("time grid needs at least two points")]
    DegenerateGrid,
    #[error("time grid must be strictly increasing")]
    UnorderedGrid,
    #[error("constraint domain violated at t = {t}: {reason}")]
    ConstraintDomain { t: f64, reason: String },
}

/// Real 3-vector field in angular-frequency units (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector3 {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl FieldVector3 {
    pub fn zero() -> Self {
        FieldVector3 { f1: 0.0, f2: 0.0, f3: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        (self.f1 * self.f1 + self.f2 * self.f2 + self.f3 * self.f3).sqrt()
    }
}

/// One angle as a function of time with its analytic derivative.
#[derive(Clone)]
pub enum AngleProfile {
    /// Fixed value; derivative 0.
    Constant(f64),
    /// Smooth interpolation from `from` (t ≤ −T) to `to` (t ≥ T) through a
    /// half-period of a sine; the derivative vanishes identically outside
    /// |t| < T, so the synthesized field has exactly finite support.
    SineInterp { from: f64, to: f64, half_width: f64 },
    /// `v(t) = A·(t/T)·exp(−(t/T)²) + baseline`; tends to `baseline` with
    /// vanishing derivative as t → ±∞.
    GaussDeriv { amplitude: f64, baseline: f64, width: f64 },
    /// `v(t) = rate·t`, the periodic-field generator.
    LinearPeriodic { rate: f64 },
    /// Angle defined by quadrature of a supplied derivative (used for the
    /// reconstructed α of the constrained two-spin field).
    Quadrature(QuadratureAngle),
}

/// Value-by-quadrature angle: the derivative is analytic, the value is the
/// running integral from `base_time` (adaptive Simpson, 1e-10 absolute).
#[derive(Clone)]
pub struct QuadratureAngle {
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    base_time: f64,
    base_value: f64,
}

impl QuadratureAngle {
    pub fn new(
        derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        base_time: f64,
        base_value: f64,
    ) -> Self {
        QuadratureAngle { derivative, base_time, base_value }
    }
}

impl std::fmt::Debug for AngleProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AngleProfile::Constant(v) => write!(f, "Constant({v})"),
            AngleProfile::SineInterp { from, to, half_width } => {
                write!(f, "SineInterp({from} -> {to}, T = {half_width})")
            }
            AngleProfile::GaussDeriv { amplitude, baseline, width } => {
                write!(f, "GaussDeriv(A = {amplitude}, baseline = {baseline}, T = {width})")
            }
            AngleProfile::LinearPeriodic { rate } => write!(f, "LinearPeriodic({rate})"),
            AngleProfile::Quadrature(q) => {
                write!(f, "Quadrature(base t = {}, base value = {})", q.base_time, q.base_value)
            }
        }
    }
}

impl AngleProfile {
    /// (value, derivative) at time t.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            AngleProfile::Constant(v) => (*v, 0.0),
            AngleProfile::SineInterp { from, to, half_width } => {
                let big_t = *half_width;
                if t <= -big_t {
                    (*from, 0.0)
                } else if t >= big_t {
                    (*to, 0.0)
                } else {
                    let half_swing = 0.5 * (to - from);
                    let mid = 0.5 * (to + from);
                    let phase = PI * t / (2.0 * big_t);
                    (
                        half_swing * phase.sin() + mid,
                        half_swing * PI / (2.0 * big_t) * phase.cos(),
                    )
                }
            }
            AngleProfile::GaussDeriv { amplitude, baseline, width } => {
                let x = t / width;
                let gauss = (-x * x).exp();
                (
                    amplitude * x * gauss + baseline,
                    amplitude / width * (1.0 - 2.0 * x * x) * gauss,
                )
            }
            AngleProfile::LinearPeriodic { rate } => (rate * t, *rate),
            AngleProfile::Quadrature(q) => {
                let value = q.base_value
                    + quad::integrate(q.derivative.as_ref(), q.base_time, t, ALPHA_QUAD_TOL);
                (value, (q.derivative)(t))
            }
        }
    }

    /// Half-width T of the derivative's support when it is exactly finite.
    fn support_half_width(&self) -> Option<f64> {
        match self {
            AngleProfile::Constant(_) => Some(0.0),
            AngleProfile::SineInterp { half_width, .. } => Some(*half_width),
            AngleProfile::LinearPeriodic { rate } if *rate == 0.0 => Some(0.0),
            _ => None,
        }
    }
}

/// Three angles (θ, φ, α) as functions of time.
#[derive(Debug, Clone)]
pub struct EulerTrajectory {
    pub theta: AngleProfile,
    pub phi: AngleProfile,
    pub alpha: AngleProfile,
}

/// Angles and derivatives at one time.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
    pub alpha_dot: f64,
}

impl EulerTrajectory {
    pub fn eval(&self, t: f64) -> TrajectoryPoint {
        let (theta, theta_dot) = self.theta.eval(t);
        let (phi, phi_dot) = self.phi.eval(t);
        let (alpha, alpha_dot) = self.alpha.eval(t);
        TrajectoryPoint { theta, phi, alpha, theta_dot, phi_dot, alpha_dot }
    }

    /// `Some(T)` when all derivatives vanish exactly outside [−T, T].
    pub fn support_window(&self) -> Option<f64> {
        let t1 = self.theta.support_half_width()?;
        let t2 = self.phi.support_half_width()?;
        let t3 = self.alpha.support_half_width()?;
        Some(t1.max(t2).max(t3))
    }
}

/// Angles and analytic derivatives of the trajectory at time t.
pub fn eval_trajectory(traj: &EulerTrajectory, t: f64) -> TrajectoryPoint {
    traj.eval(t)
}

/// The external field realized by the trajectory (see module docs for the
/// closed form).
pub fn field_from_angles(traj: &EulerTrajectory, t: f64) -> FieldVector3 {
    let p = traj.eval(t);
    let (sin_phi, cos_phi) = p.phi.sin_cos();
    let (sin_theta, cos_theta) = p.theta.sin_cos();
    FieldVector3 {
        f1: 0.5 * p.theta_dot * sin_phi + 0.5 * p.alpha_dot * sin_theta * cos_phi,
        f2: 0.5 * p.alpha_dot * sin_theta * sin_phi - 0.5 * p.theta_dot * cos_phi,
        f3: 0.5 * p.phi_dot - 0.5 * p.alpha_dot * cos_theta,
    }
}

/// Result of the constrained two-spin construction on a grid.
#[derive(Debug, Clone)]
pub struct ConstrainedTwoSpinField {
    pub grid: Vec<f64>,
    /// K₁ = J = θ̇/(2 sin φ) at each grid point.
    pub k1: Vec<f64>,
    /// K₃ = B₋ = −η̇/(2 tan φ) at each grid point.
    pub k3: Vec<f64>,
    /// α at each grid point (α(grid[0]) = 0).
    pub alpha_samples: Vec<f64>,
    /// Reconstructed α as a profile usable in an [`EulerTrajectory`].
    pub alpha: AngleProfile,
}

/// Build the effective two-spin field (K₁, 0, K₃) generated by θ and φ,
/// reconstructing α by quadrature of α̇ = θ̇ cos φ/(sin θ sin φ) so that the
/// synthesized F₂ vanishes.
///
/// Preconditions checked on the whole grid: sin φ ≠ 0 and cos φ·sin θ > 0
/// (the domain of η = ln(cos φ sin θ)).
pub fn constrained_two_spin_field(
    theta: &AngleProfile,
    phi: &AngleProfile,
    grid: &[f64],
) -> Result<ConstrainedTwoSpinField, PulseError> {
    if grid.len() < 2 {
        return Err(PulseError::DegenerateGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PulseError::UnorderedGrid);
    }
    for &t in grid {
        check_constraint_domain(theta, phi, t)?;
    }

    let theta_arc = theta.clone();
    let phi_arc = phi.clone();
    let alpha_dot = move |t: f64| {
        let (th, th_dot) = theta_arc.eval(t);
        let (ph, _) = phi_arc.eval(t);
        th_dot * ph.cos() / (th.sin() * ph.sin())
    };
    let alpha_profile = AngleProfile::Quadrature(QuadratureAngle::new(
        Arc::new(alpha_dot),
        grid[0],
        0.0,
    ));

    // cumulative quadrature for the samples; one pass over the grid
    let theta_arc = theta.clone();
    let phi_arc = phi.clone();
    let alpha_samples = quad::cumulative(
        move |t: f64| {
            let (th, th_dot) = theta_arc.eval(t);
            let (ph, _) = phi_arc.eval(t);
            th_dot * ph.cos() / (th.sin() * ph.sin())
        },
        grid,
        ALPHA_QUAD_TOL,
    );

    let mut k1 = Vec::with_capacity(grid.len());
    let mut k3 = Vec::with_capacity(grid.len());
    for &t in grid {
        let (th, th_dot) = theta.eval(t);
        let (ph, ph_dot) = phi.eval(t);
        k1.push(0.5 * th_dot / ph.sin());
        // η̇ = −φ̇ tan φ + θ̇ cos θ / sin θ
        let eta_dot = -ph_dot * ph.tan() + th_dot * th.cos() / th.sin();
        k3.push(-0.5 * eta_dot / ph.tan());
    }

    Ok(ConstrainedTwoSpinField {
        grid: grid.to_vec(),
        k1,
        k3,
        alpha_samples,
        alpha: alpha_profile,
    })
}

fn check_constraint_domain(
    theta: &AngleProfile,
    phi: &AngleProfile,
    t: f64,
) -> Result<(), PulseError> {
    let (th, _) = theta.eval(t);
    let (ph, _) = phi.eval(t);
    if ph.sin().abs() < 1e-12 {
        return Err(PulseError::ConstraintDomain {
            t,
            reason: format!("sin(phi) = {:.3e} vanishes", ph.sin()),
        });
    }
    if ph.cos() * th.sin() <= 0.0 {
        return Err(PulseError::ConstraintDomain {
            t,
            reason: format!(
                "cos(phi)*sin(theta) = {:.3e} <= 0, log argument not positive",
                ph.cos() * th.sin()
            ),
        });
    }
    Ok(())
}
