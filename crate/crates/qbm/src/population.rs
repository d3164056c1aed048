//! Mean occupation of the oscillator.
//!
//! The exact discrete route propagates the initial excitation and the
//! thermal bath occupations through the one-excitation amplitudes. The
//! continuum route expresses the stationary value as int rho(w) n(beta w) dw,
//! whose deep-cold limit is dominated by the spectral threshold: occupation
//! falls as a power of temperature rather than exponentially, and the
//! effective single-level description of that power law is a Tsallis
//! distribution with 1 < q < 2.

use crate::error::{Error, Result};
use crate::model::Thermal;
use crate::quad::{self, Accumulator};
use crate::resolvent::Resolvent;
use crate::spectrum::Spectrum;

use num_complex::Complex64;

/// A scaling fit below this R^2 does not support a power-law reading.
pub const SCALING_MIN_R_SQUARED: f64 = 0.995;

/// Mean occupation from the exact amplitudes:
/// <N(t)> = |A(t)|^2 n0 + sum_k |A_k(t)|^2 n_k.
pub fn discrete_population(s: &Spectrum, thermal: &Thermal, n0: f64, t: f64) -> f64 {
    let mut acc = Accumulator::default();
    acc.add(crate::dynamics::survival_amplitude(s, t).norm_sqr() * n0);
    for (k, amp) in crate::dynamics::mode_amplitudes(s, t).into_iter().enumerate() {
        acc.add(amp.norm_sqr() * thermal.occupation(s.bath_frequency(k)));
    }
    acc.total()
}

/// Truncation point for Boltzmann-weighted integrals over rho: far enough
/// that e^{-beta w} has fallen by e^-40 per threshold power, never past the
/// spectral support.
fn boltzmann_window(r: &Resolvent, beta: f64) -> f64 {
    r.support().min(40.0 * (r.coupling().exponent + 2.0) / beta)
}

/// Stationary occupation int rho(w) n(beta w) dw.
///
/// The threshold region is integrated under w = y^2, which concentrates
/// nodes where rho n varies fastest at low temperature.
pub fn equilibrium_population(r: &Resolvent, thermal: &Thermal) -> Result<f64> {
    if thermal.is_zero_temperature() {
        return Ok(0.0);
    }
    let th = *thermal;
    let split = (0.5 * r.system().omega0).min(0.5 * r.support());
    let cap = split.min(boltzmann_window(r, th.beta));
    let head = quad::integrate(
        |y| {
            let w = y * y;
            r.spectral_density(w) * th.occupation(w) * 2.0 * y
        },
        0.0,
        cap.sqrt(),
        1e-11,
    )
    .require_converged("equilibrium occupation, threshold piece")?;
    let mid = quad::integrate(
        |w| r.spectral_density(w) * th.occupation(w),
        cap,
        split,
        1e-11,
    )
    .require_converged("equilibrium occupation, middle piece")?;
    let tail = quad::integrate(
        |w| r.spectral_density(w) * th.occupation(w),
        split,
        r.support(),
        1e-11,
    )
    .require_converged("equilibrium occupation, resonance piece")?;
    Ok(head.value + mid.value + tail.value)
}

/// First Boltzmann term int rho(w) e^{-beta w} dw through the exponential
/// panel engine (decay rate beta plays the role the phase rate i t plays in
/// the survival transform).
pub fn low_temperature_population(r: &Resolvent, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("low-temperature weight needs beta > 0, got {beta}")));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    let res = quad::kernel_panels(
        |w| r.spectral_density(w),
        Complex64::new(beta, 0.0),
        0.0,
        boltzmann_window(r, beta),
        1e-10,
        10_000,
    )?;
    Ok(res.value.re)
}

/// The same integral by plain adaptive quadrature; an independent route for
/// cross-checking the panel engine.
pub fn low_temperature_population_adaptive(r: &Resolvent, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("low-temperature weight needs beta > 0, got {beta}")));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    let res = quad::integrate(
        |w| r.spectral_density(w) * (-beta * w).exp(),
        0.0,
        boltzmann_window(r, beta),
        1e-12,
    )
    .require_converged("low-temperature weight")?;
    Ok(res.value)
}

/// Power-law reading of the deep-cold occupation N(T) ~ amplitude T^p.
///
/// The oscillator quantum is pinned at the resonance, so the stored energy
/// scales like the occupation itself and the heat capacity one power lower.
/// The same exponent fixes the deformation parameter q = (p + 1)/p of the
/// Tsallis occupation that reproduces the power law from a single level.
#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    pub occupation_exponent: f64,
    pub energy_exponent: f64,
    pub heat_capacity_exponent: f64,
    pub tsallis_q: f64,
    /// Prefactor of the occupation law in N = amplitude T^p.
    pub amplitude: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl ScalingFit {
    /// True when the log-log fit is clean enough to quote the exponents.
    pub fn reliable(&self) -> bool {
        self.r_squared >= SCALING_MIN_R_SQUARED
    }
}

/// Fits occupations against inverse temperatures on log-log axes.
pub fn scaling_fit(betas: &[f64], occupations: &[f64]) -> Result<ScalingFit> {
    for &b in betas {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Domain(format!("scaling fit needs finite beta > 0, got {b}")));
        }
    }
    let temperatures: Vec<f64> = betas.iter().map(|b| 1.0 / b).collect();
    let fit = quad::power_law_fit(&temperatures, occupations)?;
    let p = fit.exponent;
    if !(p > 0.0) {
        return Err(Error::FitRejected {
            r_squared: fit.r_squared,
            minimum: SCALING_MIN_R_SQUARED,
        });
    }
    Ok(ScalingFit {
        occupation_exponent: p,
        energy_exponent: p,
        heat_capacity_exponent: p - 1.0,
        tsallis_q: (p + 1.0) / p,
        amplitude: fit.amplitude,
        r_squared: fit.r_squared,
        points: fit.points,
    })
}

/// Power-law fit that discards warm points until the cold tail dominates.
///
/// Near the warm end of a scan the occupation still carries the resonance
/// term ~ e^{-beta w_p}, which bends the log-log curve; the power law is an
/// asymptotic statement. Points must come ordered warm to cold (ascending
/// beta). Drops the warmest point until the fit is [`ScalingFit::reliable`]
/// or only four points remain, and returns the fit with the drop count; the
/// caller decides whether an unreliable final fit is acceptable.
pub fn scaling_fit_trimmed(betas: &[f64], occupations: &[f64]) -> Result<(ScalingFit, usize)> {
    if betas.len() != occupations.len() {
        return Err(Error::Domain(format!(
            "scaling fit needs matched lengths, got {} and {}",
            betas.len(),
            occupations.len()
        )));
    }
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("scaling fit needs strictly ascending beta".into()));
    }
    let mut dropped = 0;
    loop {
        let fit = scaling_fit(&betas[dropped..], &occupations[dropped..])?;
        if fit.reliable() || betas.len() - dropped <= 4 {
            return Ok((fit, dropped));
        }
        dropped += 1;
    }
}

/// Tsallis occupation 1/([1 + (q-1) beta w]^{1/(q-1)} - 1) for 1 < q < 2.
///
/// Reduces to the Bose occupation as q -> 1 and falls as the power
/// 1/(q-1) at deep cold; the denominator is evaluated through expm1/ln_1p
/// so the classical regime beta w << 1 keeps full precision.
pub fn tsallis_occupation(q: f64, beta: f64, w: f64) -> Result<f64> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::Domain(format!(
            "Tsallis deformation must satisfy 1 < q < 2, got {q}"
        )));
    }
    if !(beta > 0.0) || w < 0.0 {
        return Err(Error::Domain(format!(
            "Tsallis occupation needs beta > 0 and w >= 0, got beta = {beta}, w = {w}"
        )));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    let x = (q - 1.0) * beta * w;
    let denom = (x.ln_1p() / (q - 1.0)).exp_m1();
    Ok(1.0 / denom)
}
