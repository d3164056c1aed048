//! Autocorrelation of the stochastic acceleration driving the oscillator.
//!
//! The symmetrized kernel K(t) is computed three ways that must agree:
//!
//! * `discrete_kernel`: direct mode sum with thermal weights 2 n + 1,
//! * `operator_kernel`: from the first-order Heisenberg amplitudes and
//!   their second time derivative, an algebraic identity with the mode sum,
//! * `continuum_kernel`: Fourier transform of the coupling density against
//!   coth(beta w / 2).
//!
//! `ClassicalKernel` is the high-temperature limit, a delta approximant of
//! width hbar/(pi k_B T) carrying total mass gamma k_B T / M.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Coupling, DiscreteBath, System, Thermal};
use crate::perturbation::first_order_mode_amplitude;
use crate::quad::{self, Accumulator};

/// K(t) = sum_m (2 n_m + 1) g_m^2 (w_m + Omega)^2 cos(w_m t) / (2 M Omega).
pub fn discrete_kernel(system: &System, bath: &DiscreteBath, thermal: &Thermal, t: f64) -> f64 {
    let norm = 1.0 / (2.0 * system.mass * system.omega0);
    let mut acc = Accumulator::default();
    for (&w, &g) in bath.omegas.iter().zip(&bath.couplings) {
        let s = w + system.omega0;
        acc.add(thermal.coth_half(w) * g * g * s * s * (w * t).cos());
    }
    norm * acc.total()
}

/// Same kernel from the Heisenberg picture: each mode contributes through
/// its first-order amplitude A_m(t) and acceleration amplitude
/// A''_m(t) = -Omega^2 A_m(t) - g (w + Omega) e^{-i w t}, with
/// A''_m(0) = -g (w + Omega) exactly.
pub fn operator_kernel(system: &System, bath: &DiscreteBath, thermal: &Thermal, t: f64) -> f64 {
    let omega0 = system.omega0;
    let mut acc = Accumulator::default();
    for (&w, &g) in bath.omegas.iter().zip(&bath.couplings) {
        let amp = first_order_mode_amplitude(omega0, w, g, t);
        let acc0 = -g * (w + omega0);
        let acct = -omega0 * omega0 * amp
            - Complex64::from_polar(g * (w + omega0), -w * t);
        let term = (acc0 * acct.conj()).re / (2.0 * system.mass * omega0)
            + omega0 * (acc0 * amp.conj()).re / (2.0 * system.mass);
        acc.add(thermal.coth_half(w) * term);
    }
    acc.total()
}

/// Continuum kernel: Re int_0^inf g^2(w) (w + Omega)^2 coth(beta w/2)
/// e^{-i w t} dw / (2 M Omega).
pub fn continuum_kernel(
    system: &System,
    coupling: &Coupling,
    thermal: &Thermal,
    t: f64,
) -> Result<f64> {
    let norm = 1.0 / (2.0 * system.mass * system.omega0);
    let omega0 = system.omega0;
    let th = *thermal;
    let c = *coupling;
    let f = move |w: f64| {
        let s = w + omega0;
        c.g_squared(w) * s * s * th.coth_half(w)
    };
    let r = quad::fourier_integral(f, t, 0.0, coupling.support(), 1e-10, 50_000)?;
    Ok(norm * r.value.re)
}

/// High-temperature (classical) limit of the kernel:
/// K(t) = c a [1/(a t)^2 - csch^2(a t)] with c = gamma k_B T / M and
/// a = pi k_B T / hbar. A delta approximant: K(0) = c a / 3, width ~ 1/a,
/// total mass int_0^inf K dt = c independent of hbar.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalKernel {
    pub damping: f64,
    pub temperature: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl ClassicalKernel {
    pub fn new(damping: f64, temperature: f64, mass: f64, hbar: f64) -> Result<Self> {
        for (name, v) in
            [("damping", damping), ("temperature", temperature), ("mass", mass)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(hbar >= 0.0) || !hbar.is_finite() {
            return Err(Error::Config(format!("hbar must be >= 0, got {hbar}")));
        }
        Ok(Self { damping, temperature, mass, hbar })
    }

    /// Total mass c = gamma k_B T / M of the kernel.
    pub fn strength(&self) -> f64 {
        self.damping * self.temperature / self.mass
    }

    /// Inverse width a = pi k_B T / hbar; infinite in the strict limit.
    pub fn inverse_width(&self) -> f64 {
        if self.hbar == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::PI * self.temperature / self.hbar
        }
    }

    /// K(t); errors at t = 0 in the strict hbar = 0 limit, where the kernel
    /// is a delta function and has no pointwise value.
    pub fn kernel(&self, t: f64) -> Result<f64> {
        let c = self.strength();
        if self.hbar == 0.0 {
            if t == 0.0 {
                return Err(Error::Domain(
                    "classical kernel at hbar = 0 is a delta function; t = 0 has no value".into(),
                ));
            }
            return Ok(0.0);
        }
        let a = self.inverse_width();
        let x = (a * t).abs();
        if x < 1e-2 {
            // 1/x^2 - csch^2 x = 1/3 - x^2/15 + 2 x^4/189 + O(x^6).
            Ok(c * a * (1.0 / 3.0 - x * x / 15.0 + 2.0 * x.powi(4) / 189.0))
        } else {
            let csch = 1.0 / x.sinh();
            Ok(c * a * (1.0 / (x * x) - csch * csch))
        }
    }

    /// Partial mass int_0^t K = c [coth(a t) - 1/(a t)]; approaches c like
    /// c/(a t), so it is within 1% of c once a t >= 100.
    pub fn partial_strength(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("partial mass needs t > 0, got {t}")));
        }
        let c = self.strength();
        if self.hbar == 0.0 {
            return Ok(c);
        }
        let x = self.inverse_width() * t;
        if x < 1e-2 {
            // coth x - 1/x = x/3 - x^3/45 + 2 x^5/945 + O(x^7).
            Ok(c * (x / 3.0 - x.powi(3) / 45.0 + 2.0 * x.powi(5) / 945.0))
        } else {
            let coth = 1.0 + 2.0 / (2.0 * x).exp_m1();
            Ok(c * (coth - 1.0 / x))
        }
    }
}
