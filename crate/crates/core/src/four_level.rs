//! Two interacting spins: the 4×4 Hamiltonian, the parallel-field reduction
//! to a two-level problem, and transition amplitudes including the Swap.
//!
//! For parallel external fields `G = (0,0,G₃)`, `F = (0,0,F₃)` the evolution
//! operator factorizes as
//!
//! ```text
//! Û(t) = exp(−i/2 [(Σ₃+ρ₃)Γ(t) + Σ₃ρ₃ Φ(t)]) · M(t)
//! Γ(t) = ∫₀ᵗ B₊ dτ,   Φ(t) = ∫₀ᵗ J dτ,   B₊ = G₃ + F₃
//! ```
//!
//! where M embeds the 2×2 evolution operator of the effective field
//! `K = (J, 0, B₋)`, `B₋ = G₃ − F₃`, between the middle basis states. The
//! Swap amplitude ⟨↑↓|Û|↓↑⟩ therefore depends only on B₋ and J, never on B₊.
//!
//! Basis ordering throughout: |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.

use crate::cmat::CMat;
use crate::pulse::FieldVector3;
use crate::quad;
use num_complex::Complex64 as C64;
use std::sync::Arc;
use thiserror::Error;

/// Bohr magneton in eV/T (CODATA).
pub const BOHR_MAGNETON_EV_PER_T: f64 = 5.7883818060e-5;
/// ħ in eV·s (CODATA).
pub const HBAR_EV_S: f64 = 6.582119569e-16;

/// Angular frequency (1/ns) produced by one tesla: μ_B/ħ scaled to ns.
pub fn angular_frequency_per_tesla() -> f64 {
    BOHR_MAGNETON_EV_PER_T / HBAR_EV_S * 1e-9
}

/// Absolute tolerance of the Γ/Φ quadratures.
const PHASE_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum FourLevelError {
    #[error("embedded 2x2 block is not unitary (defect {0:.3e}, tolerance 1e-8)")]
    NonUnitaryBlock(f64),
    #[error("embedded block must be 2x2, got {0}x{0}")]
    WrongBlockDimension(usize),
}

/// Scalar function of time behind an `Arc`, so field profiles stay cheap to
/// clone and safe to share across threads.
#[derive(Clone)]
pub struct TimeFunction(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl TimeFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TimeFunction(Arc::new(f))
    }

    pub fn zero() -> Self {
        TimeFunction::constant(0.0)
    }

    pub fn constant(v: f64) -> Self {
        TimeFunction::new(move |_| v)
    }

    /// amp / cosh(rate·t)
    pub fn sech_pulse(amp: f64, rate: f64) -> Self {
        TimeFunction::new(move |t| amp / (rate * t).cosh())
    }

    pub fn harmonic(amp: f64, freq: f64, phase: f64) -> Self {
        TimeFunction::new(move |t| amp * (freq * t + phase).sin())
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl std::fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TimeFunction(..)")
    }
}

/// The fields of the two-spin Hamiltonian `H = ρ·G + Σ·F + (J/2)(Σ·ρ)`,
/// all time-dependent, in angular-frequency units.
#[derive(Debug, Clone)]
pub struct TwoSpinFields {
    pub g: [TimeFunction; 3],
    pub f: [TimeFunction; 3],
    pub j: TimeFunction,
}

impl TwoSpinFields {
    pub fn new(g: [TimeFunction; 3], f: [TimeFunction; 3], j: TimeFunction) -> Self {
        TwoSpinFields { g, f, j }
    }

    /// Parallel fields along z plus exchange.
    pub fn parallel(g3: TimeFunction, f3: TimeFunction, j: TimeFunction) -> Self {
        TwoSpinFields {
            g: [TimeFunction::zero(), TimeFunction::zero(), g3],
            f: [TimeFunction::zero(), TimeFunction::zero(), f3],
            j,
        }
    }
}

/// The 4×4 Hamiltonian matrix, written out entry by entry:
///
/// ```text
/// [F₃+G₃+J/2   F₁−iF₂     G₁−iG₂     0       ]
/// [F₁+iF₂      G₃−F₃−J/2  J          G₁−iG₂  ]
/// [G₁+iG₂      J          F₃−G₃−J/2  F₁−iF₂  ]
/// [0           G₁+iG₂     F₁+iF₂     J/2−G₃−F₃]
/// ```
///
/// Hermitian by construction; [`hamiltonian_4_tensor`] assembles the same
/// operator from Kronecker products as an independent check.
pub fn hamiltonian_4(fields: &TwoSpinFields, t: f64) -> CMat {
    let g1 = fields.g[0].eval(t);
    let g2 = fields.g[1].eval(t);
    let g3 = fields.g[2].eval(t);
    let f1 = fields.f[0].eval(t);
    let f2 = fields.f[1].eval(t);
    let f3 = fields.f[2].eval(t);
    let j = fields.j.eval(t);

    let fm = C64::new(f1, -f2);
    let fp = C64::new(f1, f2);
    let gm = C64::new(g1, -g2);
    let gp = C64::new(g1, g2);
    let o = C64::new(0.0, 0.0);
    let jc = C64::new(j, 0.0);
    CMat::from_rows(
        4,
        &[
            C64::new(f3 + g3 + 0.5 * j, 0.0), fm, gm, o,
            fp, C64::new(g3 - f3 - 0.5 * j, 0.0), jc, gm,
            gp, jc, C64::new(f3 - g3 - 0.5 * j, 0.0), fm,
            o, gp, fp, C64::new(0.5 * j - g3 - f3, 0.0),
        ],
    )
}

/// Tensor-product assembly `I⊗(σ·F) + (σ·G)⊗I + (J/2)Σᵢ σᵢ⊗σᵢ`; used to
/// cross-check [`hamiltonian_4`].
pub fn hamiltonian_4_tensor(fields: &TwoSpinFields, t: f64) -> CMat {
    use crate::cmat::{kron2, pauli, sigma_dot};
    let g1 = fields.g[0].eval(t);
    let g2 = fields.g[1].eval(t);
    let g3 = fields.g[2].eval(t);
    let f1 = fields.f[0].eval(t);
    let f2 = fields.f[1].eval(t);
    let f3 = fields.f[2].eval(t);
    let j = fields.j.eval(t);

    let id = CMat::identity(2);
    let mut h = kron2(&id, &sigma_dot(f1, f2, f3));
    h = h.add(&kron2(&sigma_dot(g1, g2, g3), &id));
    for k in 1..=3 {
        h = h.add(&kron2(&pauli(k), &pauli(k)).scale(C64::new(0.5 * j, 0.0)));
    }
    h
}

/// Parallel-field configuration in laboratory units: local fields in tesla,
/// dimensionless g-factors, exchange already in angular frequency (1/ns).
#[derive(Debug, Clone)]
pub struct ParallelFieldSpec {
    pub b1_tesla: TimeFunction,
    pub b2_tesla: TimeFunction,
    pub g1: f64,
    pub g2: f64,
    pub j: TimeFunction,
}

impl ParallelFieldSpec {
    pub fn new(
        b1_tesla: TimeFunction,
        b2_tesla: TimeFunction,
        g1: f64,
        g2: f64,
        j: TimeFunction,
    ) -> Self {
        ParallelFieldSpec { b1_tesla, b2_tesla, g1, g2, j }
    }

    /// Build a spec directly from the scaled sum/difference profiles
    /// B₊, B₋ (angular frequency), with unit g-factors.
    pub fn from_sum_diff(b_plus: TimeFunction, b_minus: TimeFunction, j: TimeFunction) -> Self {
        let scale = angular_frequency_per_tesla();
        let bp = b_plus.clone();
        let bm = b_minus.clone();
        let b1 = TimeFunction::new(move |t| 0.5 * (bp.eval(t) + bm.eval(t)) / scale);
        let bp = b_plus;
        let bm = b_minus;
        let b2 = TimeFunction::new(move |t| 0.5 * (bp.eval(t) - bm.eval(t)) / scale);
        ParallelFieldSpec::new(b1, b2, 1.0, 1.0, j)
    }

    /// B₊ = μ_B (g₁B₁ + g₂B₂)/ħ in angular frequency.
    pub fn b_plus(&self, t: f64) -> f64 {
        angular_frequency_per_tesla()
            * (self.g1 * self.b1_tesla.eval(t) + self.g2 * self.b2_tesla.eval(t))
    }

    /// B₋ = μ_B (g₁B₁ − g₂B₂)/ħ in angular frequency.
    pub fn b_minus(&self, t: f64) -> f64 {
        angular_frequency_per_tesla()
            * (self.g1 * self.b1_tesla.eval(t) - self.g2 * self.b2_tesla.eval(t))
    }

    /// The two-spin fields G = (0,0,μ_B g₁B₁), F = (0,0,μ_B g₂B₂) (ħ = 1).
    pub fn two_spin_fields(&self) -> TwoSpinFields {
        let scale = angular_frequency_per_tesla();
        let b1 = self.b1_tesla.clone();
        let b2 = self.b2_tesla.clone();
        let (g1, g2) = (self.g1, self.g2);
        TwoSpinFields::parallel(
            TimeFunction::new(move |t| scale * g1 * b1.eval(t)),
            TimeFunction::new(move |t| scale * g2 * b2.eval(t)),
            self.j.clone(),
        )
    }

    /// The Hamiltonian of this configuration for the ODE oracle.
    pub fn hamiltonian(&self) -> crate::oracle::HamiltonianFn {
        let fields = self.two_spin_fields();
        crate::oracle::HamiltonianFn::new(4, move |t| hamiltonian_4(&fields, t))
    }
}

/// Effective two-level field K = (J, 0, B₋) of the reduced problem.
pub fn effective_field(spec: &ParallelFieldSpec, t: f64) -> FieldVector3 {
    FieldVector3 { f1: spec.j.eval(t), f2: 0.0, f3: spec.b_minus(t) }
}

/// The phase integrals Γ(t) = ∫₀ᵗ B₊ dτ and Φ(t) = ∫₀ᵗ J dτ by adaptive
/// quadrature (1e-10 absolute).
pub fn gamma_phi(spec: &ParallelFieldSpec, t: f64) -> (f64, f64) {
    let (lo, hi, sign) = if t >= 0.0 { (0.0, t, 1.0) } else { (t, 0.0, -1.0) };
    let gamma = sign * quad::integrate(|tau| spec.b_plus(tau), lo, hi, PHASE_QUAD_TOL);
    let phi = sign * quad::integrate(|tau| spec.j.eval(tau), lo, hi, PHASE_QUAD_TOL);
    (gamma, phi)
}

/// 4×4 evolution operator with its reference time.
#[derive(Debug, Clone)]
pub struct FourLevelPropagator {
    pub matrix: CMat,
    pub time: f64,
}

/// Assemble Û(t) from the embedded 2×2 evolution operator and the phases:
/// the diagonal factor has eigenvalues of Σ₃+ρ₃ equal to (2,0,0,−2) and of
/// Σ₃ρ₃ equal to (1,−1,−1,1), so
///
/// ```text
/// Û = diag(e^{−i(Γ+Φ/2)}, e^{iΦ/2}, e^{iΦ/2}, e^{i(Γ−Φ/2)}) · M(u₂)
/// ```
pub fn reduced_evolution(
    u2: &CMat,
    gamma: f64,
    phi: f64,
    time: f64,
) -> Result<FourLevelPropagator, FourLevelError> {
    if u2.dim() != 2 {
        return Err(FourLevelError::WrongBlockDimension(u2.dim()));
    }
    let defect = u2.unitarity_defect();
    if defect > 1e-8 {
        return Err(FourLevelError::NonUnitaryBlock(defect));
    }
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut m = CMat::from_rows(
        4,
        &[
            one, o, o, o,
            o, u2[(0, 0)], u2[(0, 1)], o,
            o, u2[(1, 0)], u2[(1, 1)], o,
            o, o, o, one,
        ],
    );
    let phases = [
        C64::from_polar(1.0, -(gamma + 0.5 * phi)),
        C64::from_polar(1.0, 0.5 * phi),
        C64::from_polar(1.0, 0.5 * phi),
        C64::from_polar(1.0, gamma - 0.5 * phi),
    ];
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = phases[i] * m[(i, j)];
        }
    }
    Ok(FourLevelPropagator { matrix: m, time })
}

/// Product basis states in the fixed ordering |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisState {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl BasisState {
    pub fn index(&self) -> usize {
        match self {
            BasisState::UpUp => 0,
            BasisState::UpDown => 1,
            BasisState::DownUp => 2,
            BasisState::DownDown => 3,
        }
    }

    pub fn ket(&self) -> [C64; 4] {
        let mut v = [C64::new(0.0, 0.0); 4];
        v[self.index()] = C64::new(1.0, 0.0);
        v
    }
}

/// ⟨to|Û|from⟩.
pub fn transition_amplitude(u: &FourLevelPropagator, from: BasisState, to: BasisState) -> C64 {
    u.matrix[(to.index(), from.index())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_fields_zero_hamiltonian() {
        let fields = TwoSpinFields::new(
            [TimeFunction::zero(), TimeFunction::zero(), TimeFunction::zero()],
            [TimeFunction::zero(), TimeFunction::zero(), TimeFunction::zero()],
            TimeFunction::zero(),
        );
        assert_eq!(hamiltonian_4(&fields, 0.3).max_abs(), 0.0);
    }

    #[test]
    fn exchange_only_matrix() {
        let fields = TwoSpinFields::new(
            [TimeFunction::zero(), TimeFunction::zero(), TimeFunction::zero()],
            [TimeFunction::zero(), TimeFunction::zero(), TimeFunction::zero()],
            TimeFunction::constant(2.0),
        );
        let h = hamiltonian_4(&fields, 0.0);
        for (i, want) in [1.0, -1.0, -1.0, 1.0].into_iter().enumerate() {
            assert_eq!(h[(i, i)], c(want, 0.0));
        }
        assert_eq!(h[(1, 2)], c(2.0, 0.0));
        assert_eq!(h[(2, 1)], c(2.0, 0.0));
        assert_eq!(h[(0, 3)], c(0.0, 0.0));
    }

    #[test]
    fn literal_matches_tensor_assembly() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..25 {
            let mut rand_tf = || {
                let v = rng.random_range(-2.0..2.0);
                TimeFunction::constant(v)
            };
            let fields = TwoSpinFields::new(
                [rand_tf(), rand_tf(), rand_tf()],
                [rand_tf(), rand_tf(), rand_tf()],
                rand_tf(),
            );
            let lit = hamiltonian_4(&fields, 0.0);
            let tens = hamiltonian_4_tensor(&fields, 0.0);
            assert!(lit.max_abs_diff(&tens) < 1e-14);
            assert_eq!(lit.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn gamma_phi_closed_forms() {
        // constant exchange: Φ = J·t; zero sum field: Γ = 0
        let spec = ParallelFieldSpec::from_sum_diff(
            TimeFunction::zero(),
            TimeFunction::constant(0.4),
            TimeFunction::constant(0.8),
        );
        let (gamma, phi) = gamma_phi(&spec, 2.5);
        assert!(gamma.abs() < 1e-12);
        assert!((phi - 0.8 * 2.5).abs() < 1e-10);

        // sech sum field: Γ(t) = (2c/ω)·atan(tanh(ωt/2))
        let (cc, w) = (1.3, 2.0);
        let spec = ParallelFieldSpec::from_sum_diff(
            TimeFunction::sech_pulse(cc, w),
            TimeFunction::zero(),
            TimeFunction::zero(),
        );
        for t in [0.4, 1.7, -1.1] {
            let (gamma, _) = gamma_phi(&spec, t);
            let exact = 2.0 * cc / w * ((w * t / 2.0).tanh()).atan();
            assert!((gamma - exact).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn effective_field_examples() {
        // matched fields: K = (J, 0, 0)
        let spec = ParallelFieldSpec::new(
            TimeFunction::constant(1.0),
            TimeFunction::constant(2.0),
            1.0,
            0.5,
            TimeFunction::constant(0.7),
        );
        let k = effective_field(&spec, 0.0);
        assert_eq!(k.f1, 0.7);
        assert_eq!(k.f2, 0.0);
        assert!(k.f3.abs() < 1e-12);

        // no exchange: K = (0, 0, B₋)
        let spec = ParallelFieldSpec::from_sum_diff(
            TimeFunction::constant(3.0),
            TimeFunction::constant(0.9),
            TimeFunction::zero(),
        );
        let k = effective_field(&spec, 1.0);
        assert_eq!(k.f1, 0.0);
        assert!((k.f3 - 0.9).abs() < 1e-12);

        // sech difference realizes K = (a, 0, c/cosh ωt)
        let (a, cc, w) = (3.0, 1.0, 1.0);
        let spec = ParallelFieldSpec::from_sum_diff(
            TimeFunction::harmonic(2.0, 0.5, 0.1),
            TimeFunction::sech_pulse(cc, w),
            TimeFunction::constant(a),
        );
        for t in [-1.0, 0.0, 0.6] {
            let k = effective_field(&spec, t);
            assert!((k.f1 - a).abs() < 1e-12);
            assert!((k.f3 - cc / (w * t).cosh()).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_evolution_identity() {
        let u = reduced_evolution(&CMat::identity(2), 0.0, 0.0, 0.0).unwrap();
        assert!(u.matrix.max_abs_diff(&CMat::identity(4)) < 1e-15);
    }

    #[test]
    fn reduced_evolution_phase_bookkeeping() {
        let (gamma, phi) = (0.7, -1.1);
        let u = reduced_evolution(&CMat::identity(2), gamma, phi, 1.0).unwrap();
        assert!((u.matrix[(0, 0)] - C64::from_polar(1.0, -(gamma + 0.5 * phi))).norm() < 1e-15);
        assert!((u.matrix[(1, 1)] - C64::from_polar(1.0, 0.5 * phi)).norm() < 1e-15);
        assert!((u.matrix[(3, 3)] - C64::from_polar(1.0, gamma - 0.5 * phi)).norm() < 1e-15);
        assert!(u.matrix.unitarity_defect() < 1e-14);
    }

    #[test]
    fn reduced_evolution_block_structure() {
        let u2 = crate::su2::as_matrix(
            &crate::su2::euler_params_from_angles(0.9, 0.3, -1.2).unwrap(),
        );
        let u = reduced_evolution(&u2, 0.4, 0.9, 0.0).unwrap();
        // corners coupling uu/dd to ud/du vanish identically
        for (i, j) in [
            (0, 1), (0, 2), (1, 0), (2, 0),
            (3, 1), (3, 2), (1, 3), (2, 3),
            (0, 3), (3, 0),
        ] {
            assert_eq!(u.matrix[(i, j)], c(0.0, 0.0));
        }
    }

    #[test]
    fn non_unitary_block_rejected() {
        let bad = CMat::from_rows(2, &[c(1.1, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            reduced_evolution(&bad, 0.0, 0.0, 0.0),
            Err(FourLevelError::NonUnitaryBlock(_))
        ));
    }

    #[test]
    fn swap_amplitude_reads_off_diagonal() {
        let u2 = crate::su2::as_matrix(
            &crate::su2::euler_params_from_angles(1.1, 0.2, 0.5).unwrap(),
        );
        let u = reduced_evolution(&u2, 2.0, 0.3, 0.0).unwrap();
        let amp = transition_amplitude(&u, BasisState::DownUp, BasisState::UpDown);
        assert!((amp.norm() - u2[(0, 1)].norm()).abs() < 1e-14);
        let amp = transition_amplitude(&u, BasisState::UpDown, BasisState::DownUp);
        assert!((amp.norm() - u2[(1, 0)].norm()).abs() < 1e-14);

        let id = reduced_evolution(&CMat::identity(2), 0.0, 0.0, 0.0).unwrap();
        assert_eq!(
            transition_amplitude(&id, BasisState::UpDown, BasisState::DownUp),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn swap_amplitude_ignores_sum_field() {
        // replace B₊ with anything: Γ changes, the Swap amplitude does not
        let u2 = crate::su2::as_matrix(
            &crate::su2::euler_params_from_angles(0.7, 0.8, 0.1).unwrap(),
        );
        let base = reduced_evolution(&u2, 0.0, 0.45, 1.0).unwrap();
        let amp0 = transition_amplitude(&base, BasisState::DownUp, BasisState::UpDown).norm();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let gamma = rng.random_range(-20.0..20.0);
            let alt = reduced_evolution(&u2, gamma, 0.45, 1.0).unwrap();
            let amp = transition_amplitude(&alt, BasisState::DownUp, BasisState::UpDown).norm();
            assert!((amp - amp0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_conversion_magnitude() {
        // 1 T ↦ ~88 rad/ns; 11 mT at ω = 1/ns gives c/ω ≈ 0.97
        let per_tesla = angular_frequency_per_tesla();
        assert!((per_tesla - 87.94).abs() < 0.01);
        let c_ratio = per_tesla * 11e-3;
        assert!((c_ratio - 0.967).abs() < 0.005);
    }
}
