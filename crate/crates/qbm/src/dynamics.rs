//! Time evolution in the one-excitation sector.
//!
//! Everything here is an exact spectral sum over the eigenpairs, so time
//! derivatives are available analytically (multiply by powers of the
//! eigenfrequencies) rather than by finite differences. The survival
//! amplitude splits into the quadrature pair a = Re A, b = -Im A; both obey
//! the same damped-oscillator equation x'' + Gamma(t) x' + Omega^2(t) x = 0,
//! and solving the 2x2 linear system for (Gamma, Omega^2) at each instant
//! gives the time-local generalized Langevin coefficients.

use num_complex::Complex64;

use crate::quad::Accumulator;
use crate::spectrum::Spectrum;

/// The Wronskian a b' - b a' below this is treated as a node of the
/// quadrature pair, where the coefficient extraction is singular.
pub const WRONSKIAN_FLOOR: f64 = 1e-8;

/// Phase factors e^{-i a_nu t} for every eigenfrequency.
pub fn eigenphases(s: &Spectrum, t: f64) -> Vec<Complex64> {
    s.frequencies.iter().map(|&a| Complex64::from_polar(1.0, -a * t)).collect()
}

/// Survival amplitude A(t) = sum_nu w_nu e^{-i a_nu t}; A(0) = 1.
pub fn survival_amplitude(s: &Spectrum, t: f64) -> Complex64 {
    let mut re = Accumulator::default();
    let mut im = Accumulator::default();
    for (&w, &a) in s.weights.iter().zip(&s.frequencies) {
        let (sin, cos) = (a * t).sin_cos();
        re.add(w * cos);
        im.add(-(w * sin));
    }
    Complex64::new(re.total(), im.total())
}

/// Propagation amplitude from the oscillator into bath mode k.
pub fn mode_amplitude(s: &Spectrum, k: usize, t: f64) -> Complex64 {
    let mut re = Accumulator::default();
    let mut im = Accumulator::default();
    for nu in 0..s.len() {
        let c = s.phis[nu] * s.overlap(nu, k);
        if c == 0.0 {
            continue;
        }
        let (sin, cos) = (s.frequencies[nu] * t).sin_cos();
        re.add(c * cos);
        im.add(-(c * sin));
    }
    Complex64::new(re.total(), im.total())
}

/// All mode amplitudes at once; shares the eigenphase evaluation, which for
/// wide baths is the dominant cost of calling `mode_amplitude` per mode.
pub fn mode_amplitudes(s: &Spectrum, t: f64) -> Vec<Complex64> {
    let phases = eigenphases(s, t);
    let n = s.modes();
    let mut re = vec![Accumulator::default(); n];
    let mut im = vec![Accumulator::default(); n];
    for nu in 0..s.len() {
        let w = s.weights[nu];
        if w == 0.0 {
            continue;
        }
        let p = phases[nu];
        let a = s.frequencies[nu];
        for k in 0..n {
            let g = s.coupling(k);
            if g == 0.0 {
                continue;
            }
            // phi_nu c_{nu k} = w_nu g_k / (a_nu - w_k).
            let c = w * g / (a - s.bath_frequency(k));
            re[k].add(c * p.re);
            im[k].add(c * p.im);
        }
    }
    re.into_iter().zip(im).map(|(r, i)| Complex64::new(r.total(), i.total())).collect()
}

/// |A(t)|^2 + sum_k |A_k(t)|^2 - 1; zero for exact eigenpairs.
pub fn unitarity_defect(s: &Spectrum, t: f64) -> f64 {
    let mut acc = Accumulator::default();
    acc.add(survival_amplitude(s, t).norm_sqr());
    for amp in mode_amplitudes(s, t) {
        acc.add(amp.norm_sqr());
    }
    acc.total() - 1.0
}

/// Time-local coefficients of x'' + gamma x' + omega_sq x = 0 satisfied by
/// the quadrature pair, plus the Wronskian that conditions their extraction.
#[derive(Debug, Clone, Copy)]
pub struct LangevinPoint {
    pub omega_sq: f64,
    pub gamma: f64,
    pub wronskian: f64,
    /// True when |wronskian| <= WRONSKIAN_FLOOR; the coefficients blow up at
    /// nodes of the pair and should not be trusted there.
    pub singular: bool,
}

pub fn langevin_coefficients(s: &Spectrum, t: f64) -> LangevinPoint {
    let mut a = Accumulator::default();
    let mut b = Accumulator::default();
    let mut da = Accumulator::default();
    let mut db = Accumulator::default();
    let mut dda = Accumulator::default();
    let mut ddb = Accumulator::default();
    for (&w, &al) in s.weights.iter().zip(&s.frequencies) {
        let (sin, cos) = (al * t).sin_cos();
        a.add(w * cos);
        b.add(w * sin);
        da.add(-(w * al * sin));
        db.add(w * al * cos);
        dda.add(-(w * al * al * cos));
        ddb.add(-(w * al * al * sin));
    }
    let (a, b) = (a.total(), b.total());
    let (da, db) = (da.total(), db.total());
    let (dda, ddb) = (dda.total(), ddb.total());
    let wronskian = a * db - b * da;
    LangevinPoint {
        omega_sq: (da * ddb - db * dda) / wronskian,
        gamma: (b * dda - a * ddb) / wronskian,
        wronskian,
        singular: wronskian.abs() <= WRONSKIAN_FLOOR,
    }
}
