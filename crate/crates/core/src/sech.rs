//! Closed-form evolution operator and Swap probability for the two-level
//! system driven by the effective field `K(t) = (a, 0, c/cosh ωt)`.
//!
//! The propagator is assembled from two hypergeometric amplitudes
//!
//! ```text
//! G₁(z) = i(2c+ω) z^μ (1−z)^ν F(α, ν; γ; z)
//! G₂(z) = 2a z^{μ+1/2} (1−z)^ν F(α, ν+1; γ+1; z)
//! ```
//!
//! with μ = c/2ω, ν = i|a|/ω, γ = 1/2 + 2μ, α = γ + ν, evaluated along
//! `z(t) = ((e^{ωt} + i)/(e^{ωt} − i))²`, which traverses the unit circle
//! from 1 through −1 (t = 0) back to 1. Writing z = e^{2iψ} with
//! ψ = atan2(1, sinh ωt), the argument 2ψ ∈ (0, 2π) is continuous in t, so
//! z^μ is taken on the branch cut along the positive real axis; the principal
//! branch would jump as the trajectory crosses −1. (1−z) stays in the right
//! half-plane, so its principal power is continuous.
//!
//! ```text
//!        û(t) = 1/(|G₁⁰|²+|G₂⁰|²) · [G₁(z)  −Ḡ₂(z)] [Ḡ₁⁰  Ḡ₂⁰]
//!                                   [G₂(z)   Ḡ₁(z)] [−G₂⁰ G₁⁰]
//! ```
//!
//! with G⁰ = G(z(0)) = G(−1), so û(0) = I. The Swap probability is |û₂₁|².

use crate::cmat::CMat;
use crate::hyp2f1::{hyp2f1_c, principal_power, SpecialFnError};
use crate::oracle::HamiltonianFn;
use crate::pulse::FieldVector3;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

/// Evaluation is restricted to |ωt| ≤ 34; beyond that z(t) is within f64
/// roundoff of the branch point z = 1 and the asymptotic law applies.
const MAX_OMEGA_T: f64 = 34.0;
/// Anchor time (in units of 1/ω) where the scattering matrix of the
/// asymptotic law is extracted; the residual field there is c·sech(25) ≈
/// 3e-11·c, negligible at the 1e-8 level.
const ASYMPTOTIC_ANCHOR: f64 = 25.0;

#[derive(Debug, Clone, Error)]
pub enum SechError {
    #[error("omega must be positive and finite (got {0})")]
    BadOmega(f64),
    #[error("non-finite pulse parameter")]
    NonFinite,
    #[error("gamma = 1/2 + c/omega = {0} is a non-positive integer: hypergeometric pole")]
    DegenerateGamma(f64),
    #[error("normalization |G1|^2 + |G2|^2 = {0:.3e} degenerate")]
    DegenerateNormalization(f64),
    #[error("|omega*t| = {0:.1} too large for direct evaluation (limit 34); use the asymptotic law")]
    TimeOutOfRange(f64),
    #[error("hypergeometric evaluation failed: {0}")]
    Special(#[from] SpecialFnError),
}

/// Pulse parameters, all in angular-frequency units: exchange `a`,
/// field-difference amplitude `c`, pulse rate `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechPulseParams {
    pub a: f64,
    pub c: f64,
    pub omega: f64,
}

impl SechPulseParams {
    pub fn new(a: f64, c: f64, omega: f64) -> Result<Self, SechError> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(SechError::BadOmega(omega));
        }
        if !a.is_finite() || !c.is_finite() {
            return Err(SechError::NonFinite);
        }
        Ok(SechPulseParams { a, c, omega })
    }

    /// The effective field (a, 0, c/cosh ωt).
    pub fn field(&self, t: f64) -> FieldVector3 {
        FieldVector3 { f1: self.a, f2: 0.0, f3: self.c / (self.omega * t).cosh() }
    }

    /// σ·K(t) as a Hamiltonian for the ODE oracle.
    pub fn hamiltonian(&self) -> HamiltonianFn {
        let p = *self;
        HamiltonianFn::new(2, move |t| {
            let f = p.field(t);
            crate::cmat::sigma_dot(f.f1, f.f2, f.f3)
        })
    }

    pub fn derived(&self) -> Result<SechDerived, SechError> {
        let mu = self.c / (2.0 * self.omega);
        let gamma = 0.5 + 2.0 * mu;
        if gamma < 0.5 && (gamma - gamma.round()).abs() < 1e-12 {
            return Err(SechError::DegenerateGamma(gamma));
        }
        let nu = C64::new(0.0, self.a.abs() / self.omega);
        Ok(SechDerived { mu, nu, gamma, alpha: nu + gamma })
    }
}

/// Derived hypergeometric parameters of the pulse.
#[derive(Debug, Clone, Copy)]
pub struct SechDerived {
    pub mu: f64,
    pub nu: C64,
    pub gamma: f64,
    pub alpha: C64,
}

/// Point on the z trajectory with the quantities needed for accurate powers:
/// 1−z computed from the half-argument (no cancellation near z = 1) and the
/// continuous argument in (0, 2π).
#[derive(Debug, Clone, Copy)]
struct ZPoint {
    z: C64,
    one_minus_z: C64,
    arg: f64,
}

fn z_point(omega_t: f64) -> ZPoint {
    let s = omega_t.sinh();
    if s == 0.0 {
        return ZPoint {
            z: C64::new(-1.0, 0.0),
            one_minus_z: C64::new(2.0, 0.0),
            arg: PI,
        };
    }
    let psi = 1.0f64.atan2(s); // ∈ (0, π)
    let arg = 2.0 * psi;
    let (sin_psi, cos_psi) = psi.sin_cos();
    ZPoint {
        z: C64::from_polar(1.0, arg),
        // 1 − e^{2iψ} = 2 sin ψ (sin ψ − i cos ψ); no cancellation near z = 1
        one_minus_z: C64::new(2.0 * sin_psi * sin_psi, -2.0 * sin_psi * cos_psi),
        arg,
    }
}

/// `z(t) = ((e^{ωt} + i)/(e^{ωt} − i))²`; |z| = 1 exactly, z(0) = −1.
pub fn z_of_time(p: &SechPulseParams, t: f64) -> C64 {
    z_point(p.omega * t).z
}

/// G₁ and G₂ at a point of the unit circle (z ≠ 1).
pub fn g_functions(p: &SechPulseParams, z: C64) -> Result<(C64, C64), SechError> {
    let mut arg = z.arg();
    if arg <= 0.0 {
        arg += 2.0 * PI;
    }
    let zp = ZPoint { z, one_minus_z: C64::new(1.0, 0.0) - z, arg };
    let d = p.derived()?;
    g_eval(p, &d, &zp)
}

fn g_eval(p: &SechPulseParams, d: &SechDerived, zp: &ZPoint) -> Result<(C64, C64), SechError> {
    let log_mod = zp.z.norm().ln();
    let zlog = C64::new(log_mod, zp.arg);
    let z_mu = (zlog * d.mu).exp();
    let z_mu_half = (zlog * (d.mu + 0.5)).exp();
    let pw_nu = principal_power(zp.one_minus_z, d.nu)?;

    let gamma = C64::new(d.gamma, 0.0);
    let f1 = hyp2f1_c(d.alpha, d.nu, gamma, zp.z)?;
    let g1 = C64::new(0.0, 2.0 * p.c + p.omega) * z_mu * pw_nu * f1;
    // zero coupling kills G₂ before its hypergeometric factor matters
    let g2 = if p.a == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        let f2 = hyp2f1_c(d.alpha, d.nu + 1.0, gamma + 1.0, zp.z)?;
        C64::new(2.0 * p.a, 0.0) * z_mu_half * pw_nu * f2
    };
    Ok((g1, g2))
}

/// Precomputed pulse: the G amplitudes at z(0) = −1 and the normalization.
#[derive(Debug, Clone)]
pub struct SechPulse {
    pub params: SechPulseParams,
    pub derived: SechDerived,
    g1_0: C64,
    g2_0: C64,
    norm: f64,
}

impl SechPulse {
    pub fn new(params: SechPulseParams) -> Result<Self, SechError> {
        let derived = params.derived()?;
        let zp0 = z_point(0.0);
        let (g1_0, g2_0) = g_eval(&params, &derived, &zp0)?;
        let norm = g1_0.norm_sqr() + g2_0.norm_sqr();
        if norm < 1e-12 {
            return Err(SechError::DegenerateNormalization(norm));
        }
        Ok(SechPulse { params, derived, g1_0, g2_0, norm })
    }

    /// û(t); unitary, û(0) = I.
    pub fn evolution(&self, t: f64) -> Result<CMat, SechError> {
        let wt = self.params.omega * t;
        if wt.abs() > MAX_OMEGA_T {
            return Err(SechError::TimeOutOfRange(wt.abs()));
        }
        let zp = z_point(wt);
        let (g1, g2) = g_eval(&self.params, &self.derived, &zp)?;
        let inv_n = C64::new(1.0 / self.norm, 0.0);
        let left = CMat::from_rows(2, &[g1, -g2.conj(), g2, g1.conj()]);
        let right = CMat::from_rows(
            2,
            &[
                self.g1_0.conj(),
                self.g2_0.conj(),
                -self.g2_0,
                self.g1_0,
            ],
        );
        Ok(left.mul(&right).scale(inv_n))
    }

    /// |⟨↓|û(t)|↑⟩|² = |G₂(z)Ḡ₁⁰ − Ḡ₁(z)G₂⁰|² / (|G₁⁰|²+|G₂⁰|²)².
    pub fn swap_probability(&self, t: f64) -> Result<f64, SechError> {
        let wt = self.params.omega * t;
        if wt.abs() > MAX_OMEGA_T {
            return Err(SechError::TimeOutOfRange(wt.abs()));
        }
        let zp = z_point(wt);
        let (g1, g2) = g_eval(&self.params, &self.derived, &zp)?;
        let amp = g2 * self.g1_0.conj() - g1.conj() * self.g2_0;
        Ok(amp.norm_sqr() / (self.norm * self.norm))
    }
}

/// Convenience wrapper: û(t) for the given pulse parameters.
pub fn evolution_u(p: &SechPulseParams, t: f64) -> Result<CMat, SechError> {
    SechPulse::new(*p)?.evolution(t)
}

/// Convenience wrapper: Swap probability at time t.
pub fn swap_probability(p: &SechPulseParams, t: f64) -> Result<f64, SechError> {
    SechPulse::new(*p)?.swap_probability(t)
}

/// Large-time law P(t) ≈ A₁ sin²(a·t + δ) + A₂, valid once the sech tail is
/// negligible (|ωt| ≳ a few).
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticLaw {
    pub a1: f64,
    pub a2: f64,
    pub delta: f64,
}

/// Extract the asymptotic law from the z → 1 limit of the closed form. The
/// propagator tends to exp(−i·a·σ₁·t)·C with constant C; C is read off at the
/// anchor ωt = 25 where the connection-formula path of the hypergeometric
/// evaluation is fully converged.
pub fn asymptotic_law(p: &SechPulseParams) -> Result<AsymptoticLaw, SechError> {
    let pulse = SechPulse::new(*p)?;
    let t_anchor = ASYMPTOTIC_ANCHOR / p.omega;
    let u = pulse.evolution(t_anchor)?;
    // C = exp(+i a σ₁ T) û(T)
    let (s, cth) = (p.a * t_anchor).sin_cos();
    let rot = CMat::from_rows(
        2,
        &[
            C64::new(cth, 0.0),
            C64::new(0.0, s),
            C64::new(0.0, s),
            C64::new(cth, 0.0),
        ],
    );
    let cmat = rot.mul(&u);
    let x = cmat[(1, 0)];
    let y = C64::new(0.0, -1.0) * cmat[(0, 0)];
    // P(t) = |x cos(at) + y sin(at)|² = α + β cos(2at) + γ sin(2at)
    let alpha = 0.5 * (x.norm_sqr() + y.norm_sqr());
    let beta = 0.5 * (x.norm_sqr() - y.norm_sqr());
    let gamma = (x * y.conj()).re;
    let amp = (beta * beta + gamma * gamma).sqrt();
    Ok(AsymptoticLaw {
        a1: 2.0 * amp,
        a2: alpha - amp,
        delta: 0.5 * gamma.atan2(-beta),
    })
}

/// Evaluate the asymptotic Swap probability at time t (uses |t|; the exact
/// probability is even in t).
pub fn swap_probability_asymptotic(p: &SechPulseParams, t: f64) -> Result<f64, SechError> {
    let law = asymptotic_law(p)?;
    let tt = t.abs();
    Ok(law.a1 * (p.a * tt + law.delta).sin().powi(2) + law.a2)
}

/// Least-squares fit of samples (t, P) to A₁ sin²(a·t + δ) + A₂ with the
/// frequency fixed by `a`; linear in the parameters after expanding in
/// cos(2at), sin(2at).
#[derive(Debug, Clone, Copy)]
pub struct LargeTimeFit {
    pub a1: f64,
    pub a2: f64,
    pub delta: f64,
    pub rms_residual: f64,
}

pub fn fit_large_time_law(samples: &[(f64, f64)], a: f64) -> LargeTimeFit {
    assert!(samples.len() >= 4, "need at least 4 samples for the 3-parameter fit");
    // design: P ≈ c0 + c1 cos(2at) + c2 sin(2at)
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(t, p) in samples {
        let row = [1.0, (2.0 * a * t).cos(), (2.0 * a * t).sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * p;
        }
    }
    let coef = solve3(ata, atb);
    let amp = (coef[1] * coef[1] + coef[2] * coef[2]).sqrt();
    let a1 = 2.0 * amp;
    let a2 = coef[0] - amp;
    let delta = 0.5 * coef[2].atan2(-coef[1]);
    let mut ss = 0.0;
    for &(t, p) in samples {
        let fit = a1 * (a * t + delta).sin().powi(2) + a2;
        ss += (p - fit) * (p - fit);
    }
    LargeTimeFit { a1, a2, delta, rms_residual: (ss / samples.len() as f64).sqrt() }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (entry, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}
