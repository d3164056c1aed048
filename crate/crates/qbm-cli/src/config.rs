//! JSON configuration. One schema serves every command; whichever sections a
//! command needs must be present, the rest may be omitted. The manifest
//! embeds the resolved document so a run can be reproduced from it alone.

use std::path::Path;

use qbm::model::{discretize, BinRule, Coupling, DiscreteBath, System, Thermal};
use serde::{Deserialize, Serialize};

use crate::RunError;

pub type Result<T> = std::result::Result<T, RunError>;

fn err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemSection,
    pub coupling: CouplingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptote: Option<BetaGridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tscan: Option<BetaGridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub khalfin: Option<WindowSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub omega: f64,
    pub mass: f64,
    /// Inverse temperature; omitted means zero temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Initial oscillator occupation for relaxation runs.
    #[serde(default = "default_n0")]
    pub n0: f64,
}

fn default_n0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// Density family; the only one implemented is "power_exponential",
    /// g^2(w) = lambda w^n e^{-w/omega_c}.
    pub family: String,
    /// lambda = 0 decouples the oscillator; perturbative columns go flat.
    pub lambda: f64,
    pub n: f64,
    pub omega_c: f64,
}

/// Either a condensed continuum (`n`, `omega_max`, optional `scheme`) or an
/// explicit mode list; the two forms are mutually exclusive.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    /// Bin representative: "centroid" (default) or "midpoint".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Explicit modes [[omega, g], ...], strictly increasing omega.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    #[serde(default = "default_linear")]
    pub spacing: Spacing,
}

fn default_linear() -> Spacing {
    Spacing::Linear
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGridSection {
    pub beta_min: f64,
    pub beta_max: f64,
    pub samples: usize,
    #[serde(default = "default_log")]
    pub spacing: Spacing,
}

fn default_log() -> Spacing {
    Spacing::Log
}

/// Time window for the tail fit; anything omitted is derived from the decay
/// rate (t in [100/gamma, 1000/gamma], 24 samples).
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

pub fn grid_points(min: f64, max: f64, samples: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(err(format!("grid needs finite min <= max, got [{min}, {max}]")));
    }
    if samples == 0 {
        return Err(err("grid needs at least one sample"));
    }
    if spacing == Spacing::Log && min <= 0.0 {
        return Err(err(format!("log spacing needs min > 0, got {min}")));
    }
    if samples == 1 {
        return Ok(vec![min]);
    }
    let pts = (0..samples)
        .map(|i| {
            let u = i as f64 / (samples - 1) as f64;
            match spacing {
                Spacing::Linear => min + (max - min) * u,
                Spacing::Log => min * (max / min).powf(u),
            }
        })
        .collect();
    Ok(pts)
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| err(format!("config {}: {e}", path.display())))
    }

    pub fn system(&self) -> Result<System> {
        Ok(System::new(self.system.omega, self.system.mass)?)
    }

    pub fn thermal(&self) -> Result<Thermal> {
        match self.system.beta {
            None => Ok(Thermal::zero_temperature()),
            Some(b) => Ok(Thermal::new(b)?),
        }
    }

    /// None when lambda = 0 (decoupled oscillator).
    pub fn coupling(&self) -> Result<Option<Coupling>> {
        let c = &self.coupling;
        if c.family != "power_exponential" {
            return Err(err(format!(
                "coupling.family {:?} unknown; the only family is \"power_exponential\"",
                c.family
            )));
        }
        if c.lambda == 0.0 {
            return Ok(None);
        }
        Ok(Some(Coupling::new(c.lambda, c.n, c.omega_c)?))
    }

    pub fn require_coupling(&self) -> Result<Coupling> {
        self.coupling()?
            .ok_or_else(|| err("this command needs coupling.lambda > 0".to_string()))
    }

    pub fn bath(&self) -> Result<DiscreteBath> {
        let b = self
            .bath
            .as_ref()
            .ok_or_else(|| err("this command needs a bath section".to_string()))?;
        match (&b.modes, b.n, b.omega_max) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(err(
                "bath gives both explicit modes and a continuum condensation; pick one",
            )),
            (Some(modes), None, None) => {
                if b.scheme.is_some() {
                    return Err(err("bath.scheme applies only to a condensed continuum"));
                }
                let omegas = modes.iter().map(|m| m[0]).collect();
                let gs = modes.iter().map(|m| m[1]).collect();
                Ok(DiscreteBath::from_modes(omegas, gs)?)
            }
            (None, Some(n), Some(omega_max)) => {
                let rule = match b.scheme.as_deref() {
                    None | Some("centroid") => BinRule::Centroid,
                    Some("midpoint") => BinRule::Midpoint,
                    Some(other) => {
                        return Err(err(format!(
                            "bath.scheme {other:?} unknown; use \"centroid\" or \"midpoint\""
                        )))
                    }
                };
                let c = self.require_coupling()?;
                Ok(discretize(&c, omega_max, n, rule)?)
            }
            _ => Err(err("bath needs either modes or both n and omega_max")),
        }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| err("this command needs a grid section".to_string()))?;
        grid_points(g.t_min, g.t_max, g.samples, g.spacing)
    }

    /// Copy with the sections a run actually used filled in, for the echo in
    /// the manifest.
    pub fn with_bath_scheme_resolved(mut self) -> Self {
        if let Some(b) = &mut self.bath {
            if b.modes.is_none() && b.scheme.is_none() {
                b.scheme = Some("centroid".to_string());
            }
        }
        self
    }
}
