//! One function per subcommand. Each returns the rendered table, the scalar
//! results for the manifest, any regime warnings, and the resolved config.
//!
//! Parallel loops go through `par_map`, which collects in index order, so
//! output bytes never depend on the thread count.

use num_complex::Complex64;
use qbm::dynamics;
use qbm::model::{System, Thermal};
use qbm::noise;
use qbm::perturbation::{bw_amplitude, level_shift, relaxation_population};
use qbm::population::{self, scaling_fit_trimmed};
use qbm::quad;
use qbm::resolvent::Resolvent;
use qbm::spectrum::diagonalize;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::json;

use crate::config::{grid_points, BetaGridSection, Config, Result, Spacing};
use crate::output::Table;
use crate::{Command, RunError};

pub struct Run {
    pub table: Table,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
    pub config: Config,
    pub failed_checks: usize,
}

impl Run {
    fn new(table: Table, results: serde_json::Value, config: Config) -> Self {
        Run { table, results, warnings: Vec::new(), config, failed_checks: 0 }
    }
}

pub fn execute(command: Command, cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    match command {
        Command::Spectrum => spectrum(cfg),
        Command::Decay => decay(cfg, pool),
        Command::Langevin => langevin(cfg, pool),
        Command::Noise => noise_cmd(cfg, pool),
        Command::Population => population_cmd(cfg, pool),
        Command::Asymptote => asymptote(cfg, pool),
        Command::Khalfin => khalfin(cfg, pool),
        Command::Tscan => tscan(cfg, pool),
        Command::Validate => validate(cfg),
    }
}

fn par_map<T, F>(pool: &ThreadPool, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

fn first_err<T>(rows: Vec<qbm::Result<T>>) -> Result<Vec<T>> {
    rows.into_iter().map(|r| r.map_err(RunError::from)).collect()
}

/// Golden-rule columns assume gamma << omega; past this ratio they are
/// qualitative at best.
const WEAK_REGIME_RATIO: f64 = 0.05;

fn warn_weak(warnings: &mut Vec<String>, gamma: f64, omega0: f64) {
    let ratio = gamma / omega0;
    if ratio > WEAK_REGIME_RATIO {
        warnings.push(format!(
            "gamma/omega = {ratio:.3} exceeds the weak-damping regime ({WEAK_REGIME_RATIO}); \
             perturbative columns are unreliable"
        ));
    }
}

/// Shift, golden-rule rate, and resolvent for the continuum; all trivial when
/// the oscillator is decoupled.
fn perturbative_setup(
    cfg: &Config,
    sys: &System,
) -> Result<(f64, f64, Option<Resolvent>)> {
    match cfg.coupling()? {
        Some(c) => {
            let shift = level_shift(&c, sys.omega0)?;
            let gamma = c.decay_rate(sys.omega0);
            let r = Resolvent::new(*sys, c)?;
            Ok((shift, gamma, Some(r)))
        }
        None => Ok((0.0, 0.0, None)),
    }
}

fn spectrum(cfg: &Config) -> Result<Run> {
    let sys = cfg.system()?;
    let bath = cfg.bath()?;
    let s = diagonalize(&sys, &bath)?;
    let mut table = Table::new("alpha (frequency),weight (dimensionless)");
    for nu in 0..s.len() {
        table.push_row(&[s.frequencies[nu], s.weights[nu]]);
    }
    let results = json!({
        "modes": bath.len(),
        "weight_sum": s.weights.iter().sum::<f64>(),
        "mean_frequency": s.mean_frequency(),
    });
    Ok(Run::new(table, results, cfg.clone().with_bath_scheme_resolved()))
}

fn decay(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let bath = cfg.bath()?;
    let s = diagonalize(&sys, &bath)?;
    let ts = cfg.times()?;
    let (shift, gamma, res) = perturbative_setup(cfg, &sys)?;
    let omega_eff = sys.omega0 + shift;
    let rows = par_map(pool, ts.len(), |i| -> qbm::Result<[f64; 4]> {
        let t = ts[i];
        let exact = dynamics::survival_amplitude(&s, t).norm();
        let bw = bw_amplitude(omega_eff, gamma, t).norm();
        let continuum = match &res {
            Some(r) => r.survival(t)?.norm(),
            None => 1.0,
        };
        Ok([t, exact, bw, continuum])
    });
    let mut table = Table::new(
        "t (1/frequency),survival_exact (dimensionless),\
         survival_golden_rule (dimensionless),survival_continuum (dimensionless)",
    );
    for row in first_err(rows)? {
        table.push_row(&row);
    }
    let results = json!({ "level_shift": shift, "decay_rate": gamma });
    let mut run = Run::new(table, results, cfg.clone().with_bath_scheme_resolved());
    warn_weak(&mut run.warnings, gamma, sys.omega0);
    Ok(run)
}

fn langevin(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let bath = cfg.bath()?;
    let s = diagonalize(&sys, &bath)?;
    let ts = cfg.times()?;
    let rows = par_map(pool, ts.len(), |i| {
        let p = dynamics::langevin_coefficients(&s, ts[i]);
        ([ts[i], p.omega_sq, p.gamma, p.wronskian], p.singular)
    });
    let mut table = Table::new(
        "t (1/frequency),omega_sq (frequency^2),gamma (frequency),wronskian (frequency)",
    );
    let mut flagged = 0usize;
    for (row, singular) in rows {
        table.push_row(&row);
        flagged += singular as usize;
    }
    let results = json!({ "flagged": flagged });
    let mut run = Run::new(table, results, cfg.clone().with_bath_scheme_resolved());
    if flagged > 0 {
        run.warnings.push(format!(
            "{flagged} of {} samples sit near a Wronskian node; coefficients there diverge",
            ts.len()
        ));
    }
    Ok(run)
}

fn noise_cmd(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let bath = cfg.bath()?;
    let th = cfg.thermal()?;
    let coupling = cfg.coupling()?;
    let ts = cfg.times()?;
    let rows = par_map(pool, ts.len(), |i| -> qbm::Result<[f64; 3]> {
        let t = ts[i];
        let discrete = noise::discrete_kernel(&sys, &bath, &th, t);
        let continuum = match &coupling {
            Some(c) => noise::continuum_kernel(&sys, c, &th, t)?,
            None => 0.0,
        };
        Ok([t, discrete, continuum])
    });
    let mut table = Table::new(
        "t (1/frequency),kernel_modes (frequency^2/mass),kernel_continuum (frequency^2/mass)",
    );
    for row in first_err(rows)? {
        table.push_row(&row);
    }
    let results = json!({
        "kernel_initial": noise::discrete_kernel(&sys, &bath, &th, 0.0),
    });
    Ok(Run::new(table, results, cfg.clone().with_bath_scheme_resolved()))
}

fn population_cmd(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let bath = cfg.bath()?;
    let th = cfg.thermal()?;
    let s = diagonalize(&sys, &bath)?;
    let ts = cfg.times()?;
    let n0 = cfg.system.n0;
    let (shift, gamma) = match cfg.coupling()? {
        Some(c) => (level_shift(&c, sys.omega0)?, c.decay_rate(sys.omega0)),
        None => (0.0, 0.0),
    };
    let n_eq = th.occupation(sys.omega0 + shift);
    let rows = par_map(pool, ts.len(), |i| {
        let t = ts[i];
        let exact = population::discrete_population(&s, &th, n0, t);
        let kinetic = relaxation_population(gamma, n_eq, n0, t);
        [t, exact, kinetic]
    });
    let mut table = Table::new(
        "t (1/frequency),occupation_exact (dimensionless),occupation_kinetic (dimensionless)",
    );
    for row in rows {
        table.push_row(&row);
    }
    let results = json!({
        "equilibrium": n_eq,
        "decay_rate": gamma,
        "level_shift": shift,
    });
    let mut run = Run::new(table, results, cfg.clone().with_bath_scheme_resolved());
    warn_weak(&mut run.warnings, gamma, sys.omega0);
    Ok(run)
}

fn asymptote(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let c = cfg.require_coupling()?;
    let section = cfg.asymptote.clone().unwrap_or(BetaGridSection {
        beta_min: 0.5 / sys.omega0,
        beta_max: 2.0 / sys.omega0,
        samples: 7,
        spacing: Spacing::Log,
    });
    let betas = grid_points(section.beta_min, section.beta_max, section.samples, section.spacing)?;
    let r = Resolvent::new(sys, c)?;
    let shift = level_shift(&c, sys.omega0)?;
    let omega_eff = sys.omega0 + shift;
    let rows = par_map(pool, betas.len(), |i| -> qbm::Result<[f64; 3]> {
        let th = Thermal::new(betas[i])?;
        let n = population::equilibrium_population(&r, &th)?;
        Ok([betas[i], n, th.occupation(omega_eff)])
    });
    let mut table = Table::new(
        "beta (1/frequency),occupation (dimensionless),bose_shifted (dimensionless)",
    );
    for row in first_err(rows)? {
        table.push_row(&row);
    }
    let results = json!({ "level_shift": shift, "decay_rate": c.decay_rate(sys.omega0) });
    let mut cfg_out = cfg.clone().with_bath_scheme_resolved();
    cfg_out.asymptote = Some(section.clone());
    let mut run = Run::new(table, results, cfg_out);
    warn_weak(&mut run.warnings, c.decay_rate(sys.omega0), sys.omega0);
    if section.beta_max * sys.omega0 > 5.0 {
        run.warnings.push(format!(
            "beta_max * omega = {:.1}: the threshold contribution overtakes the Bose \
             reference at low temperature",
            section.beta_max * sys.omega0
        ));
    }
    Ok(run)
}

fn khalfin(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let c = cfg.require_coupling()?;
    let gamma = c.decay_rate(sys.omega0);
    if gamma <= 0.0 {
        return Err(RunError::Config(
            "khalfin needs a nonzero decay rate to place its default window".into(),
        ));
    }
    let window = cfg.khalfin.clone().unwrap_or_default();
    let t_min = window.t_min.unwrap_or(100.0 / gamma);
    let t_max = window.t_max.unwrap_or(1000.0 / gamma);
    let samples = window.samples.unwrap_or(24);
    let ts = grid_points(t_min, t_max, samples, Spacing::Log)?;
    let r = Resolvent::new(sys, c)?;
    let amps = first_err(par_map(pool, ts.len(), |i| -> qbm::Result<f64> {
        Ok(r.survival(ts[i])?.norm())
    }))?;
    let fit = quad::power_law_fit(&ts, &amps)?;
    let mut table = Table::new(
        "t (1/frequency),survival (dimensionless),survival_fit (dimensionless)",
    );
    for (t, a) in ts.iter().zip(&amps) {
        table.push_row(&[*t, *a, fit.amplitude * t.powf(fit.exponent)]);
    }
    let results = json!({
        "exponent": fit.exponent,
        "amplitude": fit.amplitude,
        "r_squared": fit.r_squared,
    });
    let mut cfg_out = cfg.clone().with_bath_scheme_resolved();
    cfg_out.khalfin = Some(crate::config::WindowSection {
        t_min: Some(t_min),
        t_max: Some(t_max),
        samples: Some(samples),
    });
    let mut run = Run::new(table, results, cfg_out);
    if fit.r_squared < 0.99 {
        run.warnings.push(format!(
            "tail fit R^2 = {:.4}: the window mixes exponential and power-law decay; \
             move it later",
            fit.r_squared
        ));
    }
    Ok(run)
}

fn tscan(cfg: &Config, pool: &ThreadPool) -> Result<Run> {
    let sys = cfg.system()?;
    let c = cfg.require_coupling()?;
    let section = cfg.tscan.clone().unwrap_or(BetaGridSection {
        beta_min: 5.0 / sys.omega0,
        beta_max: 500.0 / sys.omega0,
        samples: 12,
        spacing: Spacing::Log,
    });
    if section.spacing != Spacing::Log {
        return Err(RunError::Config("tscan needs a log-spaced beta grid".into()));
    }
    let betas = grid_points(section.beta_min, section.beta_max, section.samples, section.spacing)?;
    let r = Resolvent::new(sys, c)?;
    let ns = first_err(par_map(pool, betas.len(), |i| -> qbm::Result<f64> {
        let th = Thermal::new(betas[i])?;
        population::equilibrium_population(&r, &th)
    }))?;
    let (fit, dropped) = scaling_fit_trimmed(&betas, &ns)?;
    let mut table = Table::new(
        "temperature (frequency),occupation (dimensionless),\
         exponent (dimensionless),tsallis_q (dimensionless)",
    );
    for (b, n) in betas.iter().zip(&ns) {
        table.push_row(&[1.0 / b, *n, fit.occupation_exponent, fit.tsallis_q]);
    }
    let results = json!({
        "exponent": fit.occupation_exponent,
        "tsallis_q": fit.tsallis_q,
        "heat_capacity_exponent": fit.heat_capacity_exponent,
        "amplitude": fit.amplitude,
        "r_squared": fit.r_squared,
        "dropped": dropped,
    });
    let mut cfg_out = cfg.clone().with_bath_scheme_resolved();
    cfg_out.tscan = Some(section);
    let mut run = Run::new(table, results, cfg_out);
    if !fit.reliable() {
        run.warnings.push(format!(
            "scaling fit R^2 = {:.4} after dropping {dropped} warm points; \
             extend the scan toward lower temperature",
            fit.r_squared
        ));
    }
    Ok(run)
}

/// Invariant suite. Each check prints measured against tolerance; any FAIL
/// makes the command exit nonzero.
fn validate(cfg: &Config) -> Result<Run> {
    let sys = cfg.system()?;
    let bath = cfg.bath()?;
    let th = cfg.thermal()?;
    let s = diagonalize(&sys, &bath)?;
    let ts = match &cfg.grid {
        Some(_) => cfg.times()?,
        None => grid_points(0.0, 100.0, 201, Spacing::Linear)?,
    };

    let mut checks: Vec<(&str, f64, f64)> = Vec::new();

    let weight_sum: f64 = s.weights.iter().sum();
    checks.push(("weight_sum", (weight_sum - 1.0).abs(), 1e-10));

    // First moment of the weights telescopes to the bare frequency exactly.
    checks.push((
        "mean_frequency",
        (s.mean_frequency() - sys.omega0).abs() / sys.omega0,
        1e-10,
    ));

    let trace_bath: f64 = bath.omegas.iter().sum();
    let trace_alpha: f64 = s.frequencies.iter().sum();
    let scale = sys.omega0 + trace_bath.abs();
    checks.push(("trace", (trace_alpha - (sys.omega0 + trace_bath)).abs() / scale, 1e-10));

    let unitarity = ts
        .iter()
        .map(|&t| dynamics::unitarity_defect(&s, t))
        .fold(0.0f64, f64::max);
    checks.push(("unitarity", unitarity, 1e-8));

    // Discrete noise kernel against the operator-product evaluation.
    let k0 = noise::discrete_kernel(&sys, &bath, &th, 0.0).abs().max(f64::MIN_POSITIVE);
    let kernel_dev = (0..41)
        .map(|i| {
            let t = ts[0] + (ts[ts.len() - 1] - ts[0]) * i as f64 / 40.0;
            (noise::discrete_kernel(&sys, &bath, &th, t)
                - noise::operator_kernel(&sys, &bath, &th, t))
            .abs()
        })
        .fold(0.0f64, f64::max)
        / k0;
    checks.push(("kernel_identity", kernel_dev, 1e-10));

    if let Some(c) = cfg.coupling()? {
        let r = Resolvent::new(sys, c)?;
        checks.push(("spectral_norm", r.norm_defect()?.abs(), 1e-3));

        // Laplace and Fourier faces of the same panel engine must agree at
        // matched arguments (beta = i t correspondence).
        let beta = 5.0 / sys.omega0;
        let direct = population::low_temperature_population(&r, beta)?;
        let adaptive = population::low_temperature_population_adaptive(&r, beta)?;
        checks.push((
            "laplace_duality",
            (direct - adaptive).abs() / adaptive.abs().max(f64::MIN_POSITIVE),
            1e-6,
        ));

        let arg = 5.0;
        let hi = r.support();
        let panels = quad::kernel_panels(
            |w| r.spectral_density(w),
            Complex64::new(0.0, arg),
            0.0,
            hi,
            1e-10,
            50_000,
        )?
        .value;
        let fourier =
            quad::fourier_integral(|w| r.spectral_density(w), arg, 0.0, hi, 1e-10, 50_000)?.value;
        checks.push(("fourier_duality", (panels - fourier).norm() / fourier.norm(), 1e-6));
    }

    let mut table = Table::new("check,measured,tolerance,status");
    let mut failed = 0usize;
    for (name, measured, tol) in &checks {
        let ok = measured <= tol;
        failed += !ok as usize;
        table
            .lines
            .push(format!("{name},{measured:.16e},{tol:.16e},{}", if ok { "PASS" } else { "FAIL" }));
    }
    let results = json!({
        "passed": checks.len() - failed,
        "failed": failed,
    });
    let mut run = Run::new(table, results, cfg.clone().with_bath_scheme_resolved());
    run.failed_checks = failed;
    Ok(run)
}
