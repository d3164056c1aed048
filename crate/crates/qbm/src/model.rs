//! Physical parameters of the damped oscillator and its bath.
//!
//! Units: hbar = k_B = 1, frequencies in units of an arbitrary energy scale.
//! The bath couples through the density g^2(w) = strength w^n exp(-w/cutoff)
//! on w > 0; discretization replaces the continuum by modes that carry the
//! exact coupling mass of their frequency bin, so sum rules survive the
//! truncation to machine precision.

use crate::error::{Error, Result};
use crate::quad::{self, Accumulator};

fn require_positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

/// The distinguished oscillator: bare frequency and mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    pub omega0: f64,
    pub mass: f64,
}

impl System {
    pub fn new(omega0: f64, mass: f64) -> Result<Self> {
        Ok(Self {
            omega0: require_positive("system.omega0", omega0)?,
            mass: require_positive("system.mass", mass)?,
        })
    }
}

/// Continuum coupling density g^2(w) = strength * w^exponent * exp(-w/cutoff).
///
/// `exponent >= 1` keeps the density integrable against 1/w, which every
/// second-order quantity here requires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub strength: f64,
    pub exponent: f64,
    pub cutoff: f64,
}

impl Coupling {
    pub fn new(strength: f64, exponent: f64, cutoff: f64) -> Result<Self> {
        let strength = require_positive("coupling.strength", strength)?;
        let cutoff = require_positive("coupling.cutoff", cutoff)?;
        if !exponent.is_finite() || exponent < 1.0 {
            return Err(Error::Config(format!(
                "coupling.exponent must be >= 1 (threshold power), got {exponent}"
            )));
        }
        Ok(Self { strength, exponent, cutoff })
    }

    /// g^2(w); identically zero for w <= 0.
    pub fn g_squared(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        self.strength * w.powf(self.exponent) * (-w / self.cutoff).exp()
    }

    /// Golden-rule decay rate 2 pi g^2(w) for a level at frequency w.
    pub fn decay_rate(&self, w: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.g_squared(w)
    }

    /// Frequency above which the density is below ~1e-26 of its peak; safe
    /// truncation point for semi-infinite integrals over g^2.
    pub fn support(&self) -> f64 {
        self.cutoff * (60.0 + 10.0 * self.exponent)
    }

    /// Inverts 2 pi g^2(omega0) = rate for the strength, holding the shape.
    pub fn with_decay_rate(rate: f64, exponent: f64, cutoff: f64, omega0: f64) -> Result<Self> {
        let rate = require_positive("decay rate", rate)?;
        let omega0 = require_positive("omega0", omega0)?;
        let shape = omega0.powf(exponent) * (-omega0 / cutoff).exp();
        Self::new(rate / (2.0 * std::f64::consts::PI * shape), exponent, cutoff)
    }
}

/// Thermal state of the bath. `beta` may be infinite (zero temperature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermal {
    pub beta: f64,
}

impl Thermal {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::Config(format!("bath.beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn zero_temperature() -> Self {
        Self { beta: f64::INFINITY }
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// Bose occupation 1/(e^{beta w} - 1); zero at zero temperature.
    /// exp_m1 keeps the classical regime beta w << 1 at full precision.
    pub fn occupation(&self, w: f64) -> f64 {
        if self.beta.is_infinite() {
            return 0.0;
        }
        let x = self.beta * w;
        let d = x.exp_m1();
        if d.is_infinite() {
            0.0
        } else {
            1.0 / d
        }
    }

    /// coth(beta w / 2) = 1 + 2 occupation(w); equals 1 at zero temperature.
    pub fn coth_half(&self, w: f64) -> f64 {
        1.0 + 2.0 * self.occupation(w)
    }
}

/// How a frequency bin is condensed to a single representative mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRule {
    /// Geometric center of the bin.
    Midpoint,
    /// g^2-weighted centroid of the bin.
    Centroid,
}

/// A finite set of bath modes with strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    pub omegas: Vec<f64>,
    /// Couplings g_k >= 0 (amplitudes, not squares).
    pub couplings: Vec<f64>,
}

impl DiscreteBath {
    pub fn from_modes(omegas: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if omegas.len() != couplings.len() || omegas.is_empty() {
            return Err(Error::Config(format!(
                "bath needs matched nonempty mode lists, got {} frequencies and {} couplings",
                omegas.len(),
                couplings.len()
            )));
        }
        for win in omegas.windows(2) {
            if !(win[0] < win[1]) {
                return Err(Error::Config(format!(
                    "bath frequencies must be strictly increasing, got {} then {}",
                    win[0], win[1]
                )));
            }
        }
        if !(omegas[0] > 0.0) {
            return Err(Error::Config(format!(
                "bath frequencies must be positive, got {}",
                omegas[0]
            )));
        }
        for &g in &couplings {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::Config(format!("couplings must be finite and >= 0, got {g}")));
            }
        }
        Ok(Self { omegas, couplings })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Total coupling mass sum_k g_k^2.
    pub fn total_coupling(&self) -> f64 {
        let mut acc = Accumulator::default();
        for &g in &self.couplings {
            acc.add(g * g);
        }
        acc.total()
    }
}

/// Condenses the continuum density on [0, omega_max] into `modes` uniform
/// bins. Each mode carries the exact bin mass, g_k^2 = int_bin g^2(w) dw, so
/// sum_k g_k^2 telescopes to the full integral regardless of bin count.
pub fn discretize(
    coupling: &Coupling,
    omega_max: f64,
    modes: usize,
    rule: BinRule,
) -> Result<DiscreteBath> {
    require_positive("bath.omega_max", omega_max)?;
    if modes == 0 {
        return Err(Error::Config("bath.modes must be at least 1".into()));
    }
    let dw = omega_max / modes as f64;
    let mut omegas = Vec::with_capacity(modes);
    let mut gs = Vec::with_capacity(modes);
    for k in 0..modes {
        let lo = k as f64 * dw;
        let hi = if k + 1 == modes { omega_max } else { (k + 1) as f64 * dw };
        let mass = quad::integrate(|w| coupling.g_squared(w), lo, hi, 1e-13)
            .require_converged("bin coupling mass")?
            .value;
        let omega = match rule {
            BinRule::Midpoint => 0.5 * (lo + hi),
            BinRule::Centroid => {
                if mass > 0.0 {
                    let first = quad::integrate(|w| w * coupling.g_squared(w), lo, hi, 1e-13)
                        .require_converged("bin first moment")?
                        .value;
                    first / mass
                } else {
                    // Density underflowed across the whole bin; the mode is
                    // decoupled and its placement is immaterial.
                    0.5 * (lo + hi)
                }
            }
        };
        omegas.push(omega);
        gs.push(mass.max(0.0).sqrt());
    }
    DiscreteBath::from_modes(omegas, gs)
}
