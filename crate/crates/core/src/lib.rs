//! Exact evolution operators for driven two- and four-level spin systems.
//!
//! The library solves the spin equation `i dv/dt = (σ·F) v` for a family of
//! external fields `F(t)` that are restricted in time, by parametrizing the
//! evolution operator with three time-dependent angles and synthesizing the
//! field that realizes it. The same machinery covers two Heisenberg-coupled
//! spins in parallel fields, where the 4×4 evolution operator factorizes into
//! scalar phases and an embedded 2×2 block driven by the effective field
//! `K = (J, 0, B₋)`.
//!
//! For the adiabatic sech pulse `B₋(t) = c / cosh(ωt)` with constant exchange
//! `J = a`, the 2×2 block has a closed form in terms of the Gauss
//! hypergeometric function on the unit circle; [`sech`] evaluates it and the
//! resulting Swap probability. Every closed form in the crate is
//! cross-checked against the independent adaptive integrator in [`oracle`].
//!
//! Modules:
//! - [`su2`] — unit Euler parameters (quaternions) for 2×2 evolution operators
//! - [`pulse`] — angle trajectories, field synthesis, constrained two-spin fields
//! - [`oracle`] — adaptive Runge–Kutta integrator for n-level Schrödinger equations
//! - [`hyp2f1`] — complex-parameter Gauss hypergeometric function, log-gamma, powers
//! - [`sech`] — closed-form propagator and Swap probability for the sech pulse
//! - [`four_level`] — two-spin Hamiltonian, parallel-field reduction, amplitudes
//! - [`validate`] — self-check suite wired to the CLI `validate` subcommand

pub mod cmat;
pub mod four_level;
pub mod hyp2f1;
pub mod oracle;
pub mod pulse;
pub mod quad;
pub mod sech;
pub mod su2;
pub mod validate;

pub use num_complex::Complex64;
