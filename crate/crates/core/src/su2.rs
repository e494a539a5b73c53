//! Evolution operators of the two-level spin equation `i dv/dt = (σ·F) v`,
//! represented by four real Euler parameters (a unit quaternion).
//!
//! The operator is `R = I·p₀ − i(σ·p)` with `Δ = p₀² + |p|²` conserved under
//! self-adjoint evolution; Δ = 1 makes R special-unitary. The half-angle map
//! from three angles (θ, φ, α) is fixed by the rotation product
//! `R = R₃(−φ) R₂(θ) R₃(α)` with `Rᵢ(β) = exp(i σᵢ β/2)`; with that
//! convention R(t) built from an angle trajectory solves the spin equation
//! in the synthesized field of [`crate::pulse::field_from_angles`].

use crate::cmat::CMat;
use crate::pulse::FieldVector3;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Su2Error {
    #[error("non-finite angle input ({0}, {1}, {2})")]
    NonFiniteAngles(f64, f64, f64),
    #[error("determinant Δ = {delta:.3e} too far from 1 (tolerance {tol:.1e})")]
    DeterminantDrift { delta: f64, tol: f64 },
    #[error("singular reference operator: Δ = {delta:.3e}")]
    SingularReference { delta: f64 },
}

/// Two-component complex spinor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor2 {
    pub up: C64,
    pub down: C64,
}

impl Spinor2 {
    pub fn new(up: C64, down: C64) -> Self {
        Spinor2 { up, down }
    }

    pub fn basis_up() -> Self {
        Spinor2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn basis_down() -> Self {
        Spinor2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// |up|² + |down|².
    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }
}

/// Euler parameters (p₀, p₁, p₂, p₃); a quaternion under composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl EulerParams {
    pub fn new(p0: f64, p1: f64, p2: f64, p3: f64) -> Self {
        EulerParams { p0, p1, p2, p3 }
    }

    pub fn identity() -> Self {
        EulerParams::new(1.0, 0.0, 0.0, 0.0)
    }

    /// Δ = p₀² + p₁² + p₂² + p₃² (the determinant of the matrix form).
    pub fn delta(&self) -> f64 {
        self.p0 * self.p0 + self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3
    }

    /// Hamilton product; matches matrix multiplication of the R forms.
    pub fn compose(&self, rhs: &EulerParams) -> EulerParams {
        let (a0, a1, a2, a3) = (self.p0, self.p1, self.p2, self.p3);
        let (b0, b1, b2, b3) = (rhs.p0, rhs.p1, rhs.p2, rhs.p3);
        EulerParams::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }

    /// Inverse via the conjugate quaternion; errors when Δ ≈ 0.
    pub fn inverse(&self) -> Result<EulerParams, Su2Error> {
        let d = self.delta();
        if d < 1e-12 {
            return Err(Su2Error::SingularReference { delta: d });
        }
        Ok(EulerParams::new(
            self.p0 / d,
            -self.p1 / d,
            -self.p2 / d,
            -self.p3 / d,
        ))
    }
}

/// R(t) as Euler parameters tagged with the time it refers to.
#[derive(Debug, Clone, Copy)]
pub struct Su2Propagator {
    pub params: EulerParams,
    pub reference_time: f64,
}

impl Su2Propagator {
    /// Wraps Euler parameters, diagnosing Δ drift beyond 1e-8 instead of
    /// silently renormalizing.
    pub fn new(params: EulerParams, reference_time: f64) -> Result<Self, Su2Error> {
        let delta = params.delta();
        if (delta - 1.0).abs() > 1e-8 {
            return Err(Su2Error::DeterminantDrift { delta, tol: 1e-8 });
        }
        Ok(Su2Propagator { params, reference_time })
    }

    pub fn matrix(&self) -> CMat {
        as_matrix(&self.params)
    }
}

/// Half-angle map from (θ, φ, α) to Euler parameters.
///
/// The signs of p₁ and p₂ are fixed by expanding the rotation product
/// R₃(−φ) R₂(θ) R₃(α); with them, Δ = 1 holds identically and R(t) along a
/// trajectory solves `i dR/dt = (σ·F) R` with the field of
/// [`crate::pulse::field_from_angles`]. Flipping both signs (the naive
/// half-angle substitution with θ → −θ) would instead require flipping
/// F₁ and F₂.
pub fn euler_params_from_angles(
    theta: f64,
    phi: f64,
    alpha: f64,
) -> Result<EulerParams, Su2Error> {
    if !theta.is_finite() || !phi.is_finite() || !alpha.is_finite() {
        return Err(Su2Error::NonFiniteAngles(theta, phi, alpha));
    }
    let half_sum = 0.5 * (phi + alpha);
    let half_diff = 0.5 * (phi - alpha);
    let (sin_ht, cos_ht) = (0.5 * theta).sin_cos();
    Ok(EulerParams::new(
        half_diff.cos() * cos_ht,
        half_sum.sin() * sin_ht,
        -half_sum.cos() * sin_ht,
        half_diff.sin() * cos_ht,
    ))
}

/// Matrix form `R = I·p₀ − i(σ·p)`.
pub fn as_matrix(p: &EulerParams) -> CMat {
    CMat::from_rows(
        2,
        &[
            C64::new(p.p0, -p.p3),
            C64::new(-p.p2, -p.p1),
            C64::new(p.p2, -p.p1),
            C64::new(p.p0, p.p3),
        ],
    )
}

/// Evolution operator `û(t) = R(t) R₀⁻¹`, so `û(t₀) = I`.
pub fn evolution_from_r(r_t: &Su2Propagator, r_0: &Su2Propagator) -> Result<CMat, Su2Error> {
    let inv = r_0.params.inverse()?;
    Ok(as_matrix(&r_t.params.compose(&inv)))
}

/// `v(t) = u · v⁰`.
pub fn apply(u: &CMat, v0: &Spinor2) -> Spinor2 {
    assert_eq!(u.dim(), 2, "apply expects a 2x2 operator");
    Spinor2::new(
        u[(0, 0)] * v0.up + u[(0, 1)] * v0.down,
        u[(1, 0)] * v0.up + u[(1, 1)] * v0.down,
    )
}

/// Max-norm residual of the Euler-parameter equations of motion
/// `ṗ₀ + (p·F) = 0`, `ṗ + p×F − p₀F = 0`; a verification probe.
pub fn euler_ode_residual(p: &EulerParams, p_dot: &EulerParams, field: &FieldVector3) -> f64 {
    let (f1, f2, f3) = (field.f1, field.f2, field.f3);
    let r0 = p_dot.p0 + p.p1 * f1 + p.p2 * f2 + p.p3 * f3;
    let r1 = p_dot.p1 + (p.p2 * f3 - p.p3 * f2) - p.p0 * f1;
    let r2 = p_dot.p2 + (p.p3 * f1 - p.p1 * f3) - p.p0 * f2;
    let r3 = p_dot.p3 + (p.p1 * f2 - p.p2 * f1) - p.p0 * f3;
    r0.abs().max(r1.abs()).max(r2.abs()).max(r3.abs())
}
