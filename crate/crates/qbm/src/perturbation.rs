//! Second-order perturbation theory for the oscillator-bath coupling.
//!
//! The working objects are the golden-rule rate 2 pi g^2(Omega), the
//! principal-value level shift, and the finite-time smeared delta
//! delta_t(a) = sin^2(a t)/(pi a^2 t) that replaces energy conservation at
//! finite times. Together they give the Breit-Wigner survival amplitude, a
//! stochastic transition matrix for the occupation numbers, and the
//! exponential relaxation law of the mean population.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Coupling, DiscreteBath};
use crate::quad::{self, Accumulator};

/// Principal-value level shift: PV int_0^inf g^2(w)/(Omega - w) dw.
pub fn level_shift(coupling: &Coupling, omega0: f64) -> Result<f64> {
    let split = omega0 + coupling.support();
    let head = quad::principal_value(|w| coupling.g_squared(w), omega0, 0.0, split, 1e-11)?
        .require_converged("level shift head")?;
    let tail = quad::integrate_to_infinity(
        |w| coupling.g_squared(w) / (omega0 - w),
        split,
        coupling.cutoff,
        1e-11,
    );
    Ok(head.value + tail.value)
}

/// Finite-time energy delta: delta_t(a) = sin^2(a t)/(pi a^2 t).
///
/// Peak value t/pi, zeros at a = k pi/t, unit mass as t -> inf. The series
/// branch keeps the removable singularity at a = 0 smooth.
pub fn smeared_delta(alpha: f64, t: f64) -> f64 {
    let x = alpha * t;
    if x.abs() < 1e-4 {
        (t / std::f64::consts::PI) * (1.0 - x * x / 3.0)
    } else {
        let s = x.sin();
        s * s / (std::f64::consts::PI * alpha * alpha * t)
    }
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Golden-rule transition rates out of the oscillator at finite time.
#[derive(Debug, Clone)]
pub struct TransitionRates {
    /// Gamma_{0m} = 2 pi g_m^2 delta_t(Omega - w_m), one per bath mode.
    pub to_modes: Vec<f64>,
    /// Total escape rate, sum of `to_modes`; tends to 2 pi g^2(Omega).
    pub total: f64,
}

pub fn golden_rule_rates(bath: &DiscreteBath, omega0: f64, t: f64) -> TransitionRates {
    let mut to_modes = Vec::with_capacity(bath.len());
    let mut acc = Accumulator::default();
    for (&w, &g) in bath.omegas.iter().zip(&bath.couplings) {
        let rate = 2.0 * std::f64::consts::PI * g * g * smeared_delta(omega0 - w, t);
        to_modes.push(rate);
        acc.add(rate);
    }
    TransitionRates { to_modes, total: acc.total() }
}

/// One-step transition-probability matrix P = I + Gamma dt in the basis
/// (oscillator, mode 1, ..., mode N). The rate matrix is symmetric with
/// support only on the first row and column, and diagonals absorb minus the
/// row sums, so every row of P sums to one up to rounding.
pub fn stochastic_matrix(rates: &TransitionRates, dt: f64) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let n = rates.to_modes.len();
    let mut hops = Vec::with_capacity(n);
    let mut acc = Accumulator::default();
    for &r in &rates.to_modes {
        let p = r * dt;
        hops.push(p);
        acc.add(p);
    }
    let escape = acc.total();
    if escape > 1.0 {
        return Err(Error::Domain(format!(
            "dt = {dt} gives escape probability {escape} > 1; shrink the step"
        )));
    }
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    m[0][0] = 1.0 - escape;
    for k in 0..n {
        m[0][k + 1] = hops[k];
        m[k + 1][0] = hops[k];
        m[k + 1][k + 1] = 1.0 - hops[k];
    }
    Ok(m)
}

/// Kinetic relaxation of the mean population: exponential approach from
/// `n0` to the equilibrium value `n_eq` at rate `gamma`.
pub fn relaxation_population(gamma: f64, n_eq: f64, n0: f64, t: f64) -> f64 {
    // n0 e^{-gt} + n_eq (1 - e^{-gt}), written to stay exact as g t -> 0.
    n0 + (n_eq - n0) * (-(-gamma * t).exp_m1())
}

/// Breit-Wigner survival amplitude e^{-i w_eff t - gamma t/2}.
pub fn bw_amplitude(omega_eff: f64, gamma: f64, t: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * gamma * t).exp(), -omega_eff * t)
}

/// First-order amplitude for the oscillator excitation to reach a single
/// mode detuned by D = w_m - Omega:
/// A_m(t) = -i g t e^{-i(Omega + D/2) t} sinc(D t / 2).
pub fn first_order_mode_amplitude(omega0: f64, omega_m: f64, g: f64, t: f64) -> Complex64 {
    let d = omega_m - omega0;
    let envelope = g * t * sinc(0.5 * d * t);
    Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -(omega0 + 0.5 * d) * t) * envelope
}
