//! Continuum-limit dynamics through the oscillator resolvent.
//!
//! In the continuum limit the survival amplitude is the Fourier transform
//! of the spectral function
//!
//! ```text
//!   rho(w) = g^2(w) / [(w - Omega - Delta(w))^2 + pi^2 g^4(w)],
//! ```
//!
//! where Delta(w) = PV int g^2(w')/(w - w') dw' is the level-shift function.
//! Delta is smooth but expensive, so it is sampled once on a node grid
//! clustered toward the threshold (where it has a w ln w inflection) and
//! interpolated by a natural cubic spline; everything downstream reads the
//! cache.
//!
//! Long times defeat direct quadrature, so `survival_asymptotic` splits the
//! transform with a smooth bump chi supported below the resonance: the
//! threshold piece int rho chi e^{-iwt} is integrated exactly in the scaled
//! variable u = w t, and the remainder is the resonance-pole contribution
//! Z e^{-i w_p t - gamma_p t / 2}. The crossover between exponential decay
//! and the power-law tail falls out of the competition between the two.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Coupling, System};
use crate::quad;

const NODE_COUNT: usize = 4000;
const NODE_TOL: f64 = 1e-10;
/// Panel allowance for direct Fourier transforms of rho.
const DIRECT_BUDGET: usize = 25_000;
/// Panel allowance for the scaled threshold transform at long times.
const ASYMPTOTIC_BUDGET: usize = 60_000;

/// Natural cubic spline on strictly increasing nodes.
#[derive(Debug, Clone)]
struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl Spline {
    fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n >= 3 {
            // Thomas sweep on the interior equations; m[0] = m[n-1] = 0.
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let mut b = 2.0 * (h0 + h1);
                let mut d = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
                if i > 1 {
                    let w = h0 / diag[i - 1];
                    b -= w * h0;
                    d -= w * rhs[i - 1];
                }
                diag[i] = b;
                rhs[i] = d;
            }
            for i in (1..n - 1).rev() {
                let h1 = xs[i + 1] - xs[i];
                m[i] = (rhs[i] - h1 * m[i + 1]) / diag[i];
            }
        }
        Self { xs, ys, m }
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * self.m[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[i + 1]
    }
}

/// A discrete level pushed below the continuum by strong coupling.
#[derive(Debug, Clone, Copy)]
pub struct BoundState {
    /// Its (negative) frequency.
    pub frequency: f64,
    /// Its weight 1/(1 - Delta'(w_b)) in the survival amplitude.
    pub weight: f64,
}

/// The resonance pole: dressed frequency, width, and residue weight.
#[derive(Debug, Clone, Copy)]
pub struct Resonance {
    pub frequency: f64,
    pub width: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Resolvent {
    system: System,
    coupling: Coupling,
    omega_hi: f64,
    /// chi in the long-time split is 1 below chi_cut/2 and 0 above chi_cut.
    chi_cut: f64,
    cache: Spline,
    bound: Option<BoundState>,
    resonance: Option<Resonance>,
}

/// Level-shift function by direct quadrature, valid at any frequency.
fn delta_exact(coupling: &Coupling, w: f64) -> Result<f64> {
    if w <= 0.0 {
        // The integrand has no pole: g^2 lives on w' > 0.
        let r = quad::integrate_to_infinity(
            |x| coupling.g_squared(x) / (w - x),
            0.0,
            coupling.cutoff,
            NODE_TOL,
        );
        Ok(r.require_converged("level shift below threshold")?.value)
    } else {
        let split = w + coupling.support();
        let head = quad::principal_value(|x| coupling.g_squared(x), w, 0.0, split, NODE_TOL)?
            .require_converged("level shift principal value")?;
        let tail = quad::integrate_to_infinity(
            |x| coupling.g_squared(x) / (w - x),
            split,
            coupling.cutoff,
            NODE_TOL,
        );
        Ok(head.value + tail.value)
    }
}

impl Resolvent {
    pub fn new(system: System, coupling: Coupling) -> Result<Self> {
        let omega_hi = coupling.support();
        // Quadratic node clustering toward the threshold, where Delta bends
        // like w ln w and a uniform grid would lose the tail exponent.
        let mut xs = Vec::with_capacity(NODE_COUNT + 1);
        let mut ys = Vec::with_capacity(NODE_COUNT + 1);
        for i in 0..=NODE_COUNT {
            let s = i as f64 / NODE_COUNT as f64;
            let x = omega_hi * s * s;
            xs.push(x);
            ys.push(delta_exact(&coupling, x)?);
        }
        let cache = Spline::natural(xs, ys);

        let mut r = Self {
            chi_cut: system.omega0 / 5.0,
            system,
            coupling,
            omega_hi,
            cache,
            bound: None,
            resonance: None,
        };
        r.bound = r.find_bound_state()?;
        r.resonance = r.find_resonance();
        Ok(r)
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// Upper edge of the cached frequency window; the coupling density is
    /// negligible beyond it.
    pub fn support(&self) -> f64 {
        self.omega_hi
    }

    /// Delta(w); cached inside [0, support], direct quadrature outside.
    pub fn level_shift(&self, w: f64) -> Result<f64> {
        if (0.0..=self.omega_hi).contains(&w) {
            Ok(self.cache.eval(w))
        } else {
            delta_exact(&self.coupling, w)
        }
    }

    pub fn level_shift_derivative(&self, w: f64) -> Result<f64> {
        if (0.0..=self.omega_hi).contains(&w) {
            Ok(self.cache.deriv(w))
        } else {
            let h = 1e-6 * w.abs().max(self.coupling.cutoff);
            Ok((delta_exact(&self.coupling, w + h)? - delta_exact(&self.coupling, w - h)?)
                / (2.0 * h))
        }
    }

    /// Local decay width gamma(w) = 2 pi g^2(w).
    pub fn decay_width(&self, w: f64) -> f64 {
        self.coupling.decay_rate(w)
    }

    /// Spectral function rho(w) = g^2 / [(w - Omega - Delta)^2 + pi^2 g^4].
    /// Zero outside (0, support]: below threshold there are no modes, and
    /// beyond the support the density has decayed past machine relevance.
    pub fn spectral_density(&self, w: f64) -> f64 {
        if w <= 0.0 || w > self.omega_hi {
            return 0.0;
        }
        let g2 = self.coupling.g_squared(w);
        let d = w - self.system.omega0 - self.cache.eval(w);
        let half_width = std::f64::consts::PI * g2;
        g2 / (d * d + half_width * half_width)
    }

    /// The same function arranged as a local Lorentzian,
    /// (1/2pi) gamma(w) / [(w - Omega - Delta)^2 + gamma(w)^2/4].
    pub fn spectral_density_lorentzian_form(&self, w: f64) -> f64 {
        if w <= 0.0 || w > self.omega_hi {
            return 0.0;
        }
        let gamma = self.decay_width(w);
        let d = w - self.system.omega0 - self.cache.eval(w);
        gamma / (2.0 * std::f64::consts::PI) / (d * d + 0.25 * gamma * gamma)
    }

    pub fn bound_state(&self) -> Option<&BoundState> {
        self.bound.as_ref()
    }

    pub fn resonance(&self) -> Option<&Resonance> {
        self.resonance.as_ref()
    }

    fn find_bound_state(&self) -> Result<Option<BoundState>> {
        // F(w) = w - Omega - Delta(w) is monotone on w < 0 (Delta' < 0
        // there); a bound state exists iff F(0-) = -Omega - Delta(0) > 0.
        let delta0 = self.cache.ys[0];
        if -self.system.omega0 - delta0 <= 0.0 {
            return Ok(None);
        }
        let f = |w: f64| -> Result<f64> { Ok(w - self.system.omega0 - delta_exact(&self.coupling, w)?) };
        let mut lo = -(self.system.omega0 + 2.0 * delta0.abs() + 1.0);
        for _ in 0..60 {
            if f(lo)? < 0.0 {
                break;
            }
            lo *= 2.0;
        }
        let mut hi = -1e-14 * self.omega_hi;
        if f(lo)? >= 0.0 || f(hi)? <= 0.0 {
            return Err(Error::Convergence(
                "bound-state bracket failed despite Delta(0) < -Omega".into(),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let wb = 0.5 * (lo + hi);
        let h = 1e-6 * wb.abs().max(self.coupling.cutoff);
        let dprime =
            (delta_exact(&self.coupling, wb + h)? - delta_exact(&self.coupling, wb - h)?)
                / (2.0 * h);
        Ok(Some(BoundState { frequency: wb, weight: 1.0 / (1.0 - dprime) }))
    }

    fn find_resonance(&self) -> Option<Resonance> {
        // Root of F(w) = w - Omega - Delta(w) inside the continuum, located
        // on the cache by bisection.
        let f = |w: f64| w - self.system.omega0 - self.cache.eval(w);
        let mut lo = self.cache.xs[1];
        let mut hi = self.omega_hi;
        if !(f(lo) < 0.0 && f(hi) > 0.0) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let wp = 0.5 * (lo + hi);
        Some(Resonance {
            frequency: wp,
            width: self.decay_width(wp),
            weight: 1.0 / (1.0 - self.cache.deriv(wp)),
        })
    }

    /// Total spectral weight: bound-state weight plus int rho. Equals 1 up
    /// to quadrature and truncation error; the defect is a global health
    /// check on the cache.
    pub fn norm_defect(&self) -> Result<f64> {
        let r = quad::integrate(|w| self.spectral_density(w), 0.0, self.omega_hi, 1e-10)
            .require_converged("spectral norm")?;
        let zb = self.bound.map_or(0.0, |b| b.weight);
        Ok(1.0 - zb - r.value)
    }

    fn bound_term(&self, t: f64) -> Complex64 {
        match &self.bound {
            Some(b) => Complex64::from_polar(b.weight, -b.frequency * t),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Survival amplitude by direct Fourier transform of rho. Exact up to
    /// quadrature error, but the panel count grows linearly with t; past
    /// the budget this reports the resolvable range instead of degrading.
    pub fn survival_direct(&self, t: f64) -> Result<Complex64> {
        let r = quad::fourier_integral(
            |w| self.spectral_density(w),
            t,
            0.0,
            self.omega_hi,
            1e-9,
            DIRECT_BUDGET,
        )?;
        Ok(r.value + self.bound_term(t))
    }

    /// chi: C-infinity bump, 1 below chi_cut/2, 0 above chi_cut.
    fn chi(&self, w: f64) -> f64 {
        let half = 0.5 * self.chi_cut;
        if w <= half {
            1.0
        } else if w >= self.chi_cut {
            0.0
        } else {
            let s = (w - half) / half;
            let phi = |x: f64| (-1.0 / x).exp();
            phi(1.0 - s) / (phi(s) + phi(1.0 - s))
        }
    }

    /// Long-time survival amplitude: threshold transform of rho chi plus
    /// the resonance-pole term (plus any bound state). Valid once t covers
    /// several resonance periods; accurate deep into the power-law tail.
    pub fn survival_asymptotic(&self, t: f64) -> Result<Complex64> {
        if t < 0.0 {
            return Ok(self.survival_asymptotic(-t)?.conj());
        }
        let res = self.resonance.as_ref().ok_or_else(|| {
            Error::Capability(
                "no resonance pole in the continuum; asymptotic survival needs one".into(),
            )
        })?;
        let threshold = quad::fourier_integral(
            |w| self.spectral_density(w) * self.chi(w),
            t,
            0.0,
            self.chi_cut,
            1e-10,
            ASYMPTOTIC_BUDGET,
        )?;
        let pole = Complex64::from_polar(
            res.weight * (-0.5 * res.width * t).exp(),
            -res.frequency * t,
        );
        Ok(threshold.value + pole + self.bound_term(t))
    }

    /// Survival amplitude, switching from direct quadrature to the
    /// asymptotic split once the direct panel count would be excessive.
    pub fn survival(&self, t: f64) -> Result<Complex64> {
        let panels = self.omega_hi * t.abs() * 4.0 / std::f64::consts::PI;
        if panels <= 20_000.0 {
            self.survival_direct(t)
        } else {
            self.survival_asymptotic(t)
        }
    }
}
