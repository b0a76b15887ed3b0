#![forbid(unsafe_code)]

//! Engineering and decoherence of superpositions of displaced number states
//! on a circle in phase space, for the center-of-mass motion of a trapped ion.
//!
//! The library covers four layers:
//!
//! - [`states`]: the target superposition |Ψ_n^(N)(β)⟩ of N displaced number
//!   states D(β_r)|n⟩ with evenly spaced displacement phases, its normalization
//!   constant, and truncated Fock-basis representations.
//! - [`protocol`]: closed forms for the preparation sequence — the
//!   two-component line step, per-cycle pulse durations, total times, and the
//!   no-fluorescence success probabilities — plus an exact state-vector
//!   simulation of the whole sequence used as a self-check.
//! - [`phasespace`]: the Wigner function of the superposition, its exact time
//!   evolution under the damped-harmonic-oscillator master equation
//!   (diagonal/nondiagonal split included), and the Gaussian propagator kernel.
//! - [`coherence`]: total purity Tr ρ², diagonal purity Σ P_m², the phonon
//!   distribution, and the normalized coherence measure C(t), evaluated through
//!   truncated bivariate Taylor jets ([`specfun::Jet2`]).
//!
//! Everything above is cross-checked by [`oracle`]: a truncated Fock-basis
//! master-equation integrator, Wigner reconstruction from a density matrix,
//! and tensor-product Gauss–Legendre quadrature.

pub mod coherence;
pub mod oracle;
pub mod phasespace;
pub mod protocol;
pub mod specfun;
pub mod states;

pub use num_complex::Complex64;
