//! Exact diagonalization of the one-excitation sector.
//!
//! With one excitation shared by the oscillator and N bath modes, the
//! Hamiltonian restricted to that sector is the (N+1) x (N+1) symmetric
//! arrowhead matrix
//!
//! ```text
//!     [ Omega  g_1  g_2 ... ]
//!     [ g_1    w_1   0  ... ]
//!     [ g_2     0   w_2 ... ]
//!     [ ...                 ]
//! ```
//!
//! Its eigenvalues are the roots of the secular function
//! S(a) = a - Omega - sum_k g_k^2/(a - w_k), which interlace the bath
//! frequencies; S' = 1 + sum_k g_k^2/(a - w_k)^2 >= 1, so each root is
//! simple and bracketed bisection cannot miss. The oscillator weight of
//! root a_nu is 1/S'(a_nu) and the bath overlaps follow in closed form,
//! so no dense eigensolver is needed at any size.

use crate::error::{Error, Result};
use crate::model::{DiscreteBath, System};
use crate::quad::Accumulator;

/// Eigendecomposition of the one-excitation sector.
#[derive(Debug, Clone)]
pub struct Spectrum {
    omega0: f64,
    omegas: Vec<f64>,
    couplings: Vec<f64>,
    /// Eigenfrequencies a_nu, ascending; length N + 1.
    pub frequencies: Vec<f64>,
    /// Oscillator weights |Phi_nu|^2 = 1/S'(a_nu); they sum to 1.
    pub weights: Vec<f64>,
    /// Phi_nu = +sqrt(weight) (sign convention: oscillator component >= 0).
    pub phis: Vec<f64>,
    /// For eigenpairs that are a decoupled bath mode (g_k = 0), the mode index.
    decoupled: Vec<Option<usize>>,
}

struct Secular<'a> {
    omega0: f64,
    omegas: &'a [f64],
    gsq: &'a [f64],
}

impl Secular<'_> {
    fn eval(&self, a: f64) -> f64 {
        let mut acc = Accumulator::default();
        for (&w, &g2) in self.omegas.iter().zip(self.gsq) {
            acc.add(g2 / (a - w));
        }
        a - self.omega0 - acc.total()
    }

    fn deriv(&self, a: f64) -> f64 {
        let mut acc = Accumulator::default();
        for (&w, &g2) in self.omegas.iter().zip(self.gsq) {
            let d = a - w;
            acc.add(g2 / (d * d));
        }
        1.0 + acc.total()
    }

    /// Walks in from a pole until S has the sign it takes deep in the gap.
    /// Returns the evaluation point, or the closest representable point when
    /// the root hugs the pole tighter than f64 can resolve.
    fn off_pole(&self, pole: f64, span: f64, from_above: bool) -> f64 {
        let mut eps = 0.25 * span;
        loop {
            let x = if from_above { pole + eps } else { pole - eps };
            if x != pole {
                let s = self.eval(x);
                // Just above a pole S -> -inf, just below S -> +inf.
                if (from_above && s < 0.0) || (!from_above && s > 0.0) {
                    return x;
                }
            } else {
                return if from_above { pole.next_up() } else { pole.next_down() };
            }
            eps /= 16.0;
        }
    }

    /// Bracketed bisection with a Newton polish; [lo, hi] must straddle.
    fn root(&self, mut lo: f64, mut hi: f64) -> f64 {
        debug_assert!(self.eval(lo) < 0.0 && self.eval(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        let mut a = 0.5 * (lo + hi);
        for _ in 0..2 {
            let step = self.eval(a) / self.deriv(a);
            let next = a - step;
            // Closed interval: the exact root may sit on a bracket endpoint.
            if next.is_finite() && next >= lo && next <= hi {
                a = next;
            }
        }
        a
    }
}

/// Diagonalizes the one-excitation sector for the given oscillator and bath.
pub fn diagonalize(system: &System, bath: &DiscreteBath) -> Result<Spectrum> {
    let omega0 = system.omega0;
    let n = bath.len();

    // Decoupled modes (g = 0 exactly) contribute trivial eigenpairs and must
    // leave the secular problem, where they would be spurious poles.
    let mut cw = Vec::with_capacity(n);
    let mut cg2 = Vec::with_capacity(n);
    let mut decoupled_modes = Vec::new();
    for (k, (&w, &g)) in bath.omegas.iter().zip(&bath.couplings).enumerate() {
        if g == 0.0 {
            decoupled_modes.push(k);
        } else {
            cw.push(w);
            cg2.push(g * g);
        }
    }
    let sec = Secular { omega0, omegas: &cw, gsq: &cg2 };

    // Gershgorin bounds with margin; S is negative at the lower end of the
    // spectrum and positive at the upper end.
    let g_abs_sum: f64 = cg2.iter().map(|g2| g2.sqrt()).sum();
    let mut lower = omega0 - g_abs_sum;
    let mut upper = omega0 + g_abs_sum;
    for (&w, &g2) in cw.iter().zip(&cg2) {
        lower = lower.min(w - g2.sqrt());
        upper = upper.max(w + g2.sqrt());
    }
    let span = (upper - lower).max(1e-12 * omega0.abs()).max(f64::MIN_POSITIVE);
    lower -= 1e-3 * span;
    upper += 1e-3 * span;
    while sec.eval(lower) >= 0.0 {
        lower -= span;
    }
    while sec.eval(upper) <= 0.0 {
        upper += span;
    }

    let m = cw.len();
    let mut eigen: Vec<(f64, Option<usize>)> = Vec::with_capacity(n + 1);
    for gap in 0..=m {
        let lo = if gap == 0 {
            lower
        } else {
            let left_span = if gap == m { upper - cw[m - 1] } else { cw[gap] - cw[gap - 1] };
            sec.off_pole(cw[gap - 1], left_span, true)
        };
        let hi = if gap == m {
            upper
        } else {
            let right_span = if gap == 0 { cw[0] - lower } else { cw[gap] - cw[gap - 1] };
            sec.off_pole(cw[gap], right_span, false)
        };
        let root = if lo < hi { sec.root(lo, hi) } else { lo };
        eigen.push((root, None));
    }
    for &k in &decoupled_modes {
        eigen.push((bath.omegas[k], Some(k)));
    }
    eigen.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut frequencies = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    let mut phis = Vec::with_capacity(n + 1);
    let mut decoupled = Vec::with_capacity(n + 1);
    for (a, dk) in eigen {
        frequencies.push(a);
        if dk.is_some() {
            weights.push(0.0);
            phis.push(0.0);
        } else {
            let w = 1.0 / sec.deriv(a);
            weights.push(w);
            phis.push(w.sqrt());
        }
        decoupled.push(dk);
    }

    let wsum: f64 = weights.iter().sum();
    if !((wsum - 1.0).abs() < 1e-8) {
        return Err(Error::Convergence(format!(
            "oscillator weights sum to {wsum}, not 1; secular roots are unreliable"
        )));
    }

    Ok(Spectrum {
        omega0,
        omegas: bath.omegas.clone(),
        couplings: bath.couplings.clone(),
        frequencies,
        weights,
        phis,
        decoupled,
    })
}

impl Spectrum {
    /// Number of eigenpairs, N + 1.
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Number of bath modes N.
    pub fn modes(&self) -> usize {
        self.omegas.len()
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn bath_frequency(&self, k: usize) -> f64 {
        self.omegas[k]
    }

    pub fn coupling(&self, k: usize) -> f64 {
        self.couplings[k]
    }

    /// Bath component c_{nu k} of eigenvector nu: Phi_nu g_k/(a_nu - w_k).
    pub fn overlap(&self, nu: usize, k: usize) -> f64 {
        if let Some(kd) = self.decoupled[nu] {
            return if k == kd { 1.0 } else { 0.0 };
        }
        let g = self.couplings[k];
        if g == 0.0 {
            return 0.0;
        }
        self.phis[nu] * g / (self.frequencies[nu] - self.omegas[k])
    }

    /// sum_nu w_nu a_nu; equals Omega exactly (first diagonal element).
    pub fn mean_frequency(&self) -> f64 {
        let mut acc = Accumulator::default();
        for (&w, &a) in self.weights.iter().zip(&self.frequencies) {
            acc.add(w * a);
        }
        acc.total()
    }
}
