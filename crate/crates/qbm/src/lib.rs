//! Numerical laboratory for a damped quantum oscillator.
//!
//! A single oscillator couples through rotating-wave terms to a bath of
//! harmonic modes with coupling density g^2(w) = strength w^n e^{-w/cutoff}.
//! Within the one-excitation sector the model is exactly diagonalizable, and
//! this crate follows it from both ends:
//!
//! * exact: discretize the bath, diagonalize the arrowhead sector
//!   ([`spectrum`]), evolve amplitudes and extract the time-local Langevin
//!   coefficients ([`dynamics`]), and resum the continuum limit through the
//!   resolvent ([`resolvent`]),
//! * perturbative: golden-rule rates, pole shift, Breit-Wigner amplitude and
//!   the kinetic relaxation they imply ([`perturbation`]),
//! * observables: the stochastic-acceleration autocorrelation ([`noise`])
//!   and mean occupation, including its long-time and low-temperature
//!   anomalies ([`population`]).
//!
//! Units: hbar = k_B = 1 unless a function takes hbar explicitly.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod noise;
pub mod perturbation;
pub mod population;
pub mod quad;
pub mod resolvent;
pub mod spectrum;

pub use error::{Error, Result};
