//! Quantum evolution of a harmonic oscillator with time-dependent frequency
//! `omega^2(t) = omega0^2 + eps(t)`.
//!
//! The crate computes the exact fundamental matrix of the phase-space system
//! (the reference oracle), its Magnus-expansion approximations, Bogoliubov
//! coefficients, in-out and closed-time-path effective actions, and the causal
//! equation-of-motion source built from retarded Fourier transforms.

pub mod bogoliubov;
pub mod conventions;
pub mod ctp;
pub mod drive;
pub mod error;
pub mod linalg;
pub mod magnus;
pub mod ode;
pub mod perturbation;
pub mod propagator;
pub mod quad;

pub use bogoliubov::{Bogoliubov, InOutAction, Source};
pub use ctp::{Branch, CtpResult, EomSample, GeneralizedEta};
pub use drive::{DriveKind, DriveProfile, FourierValue, Interpolation, Table, Window};
pub use error::{Error, Result};
pub use magnus::{MagnusTerms, Resonance};
pub use perturbation::Gamma2Result;
pub use propagator::{Basis, EvolutionMatrix};
