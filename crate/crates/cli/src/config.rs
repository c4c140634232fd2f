//! Run configuration: one JSON document, every field optional on input and
//! explicit after merging with the defaults.

use std::path::PathBuf;

use jcdyn::{SystemParams, ThermalModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub thermal: ThermalModel,
    pub sweep: SweepSection,
    pub numerics: NumericsSection,
    pub subspace: SubspaceSection,
    pub outputs: OutputsSection,
}

/// Rates in meV. Frequencies and `P_θ` follow from the thermal model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub g: f64,
    pub kappa: f64,
    pub gamma_x: f64,
    pub p_x: f64,
    pub gamma_theta: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { g: 0.3, kappa: 0.1, gamma_x: 0.001, p_x: 0.06, gamma_theta: 0.0 }
    }
}

impl SystemSection {
    /// Base parameters; frequencies and `P_θ` are placeholders until a
    /// temperature is chosen.
    pub fn base(&self) -> SystemParams {
        SystemParams {
            g: self.g,
            kappa: self.kappa,
            gamma_x: self.gamma_x,
            p_x: self.p_x,
            p_theta: 0.0,
            gamma_theta: self.gamma_theta,
            omega_x: 0.0,
            omega_c: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    #[serde(alias = "T_min")]
    pub t_min: f64,
    #[serde(alias = "T_max")]
    pub t_max: f64,
    pub steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { t_min: 10.0, t_max: 50.0, steps: 81 }
    }
}

impl SweepSection {
    pub fn temperatures(&self) -> Vec<f64> {
        let h = (self.t_max - self.t_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| if k + 1 == self.steps { self.t_max } else { self.t_min + h * k as f64 }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Grid center in meV; the crossover energy ω₀ when absent.
    pub center: Option<f64>,
    pub half_width_over_g: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { center: None, half_width_over_g: 6.0, points: 2001 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Peak prominence cut, fraction of the spectrum maximum.
    pub min_prominence: f64,
    /// Tracking tie tolerance, meV.
    pub tie_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { min_prominence: jcdyn::sweep::MIN_PROMINENCE, tie_tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub n_max: usize,
    pub omega_grid: GridSection,
    pub tolerances: Tolerances,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self { n_max: 10, omega_grid: GridSection::default(), tolerances: Tolerances::default() }
    }
}

/// Rates of the transition-block analysis, in units of `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubspaceSection {
    pub kappa_over_g: f64,
    pub gamma_x_over_g: f64,
    /// Detuning of the coefficient analysis.
    pub coefficients_delta_over_g: f64,
    /// Upper end of the exceptional-point search.
    pub ep_search_max_over_g: f64,
}

impl Default for SubspaceSection {
    fn default() -> Self {
        Self { kappa_over_g: 0.33, gamma_x_over_g: 0.003, coefficients_delta_over_g: 0.33, ep_search_max_over_g: 6.0 }
    }
}

/// Upper limit on sweep temperatures.
pub const MAX_STEPS: usize = 100_000;

pub const FIGURES: [&str; 5] = ["spectra", "peaks", "blocks", "ep_map", "coefficients"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: PathBuf,
    /// Commands run by `all`.
    pub figures: Vec<String>,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), figures: FIGURES.iter().map(|s| s.to_string()).collect() }
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.system;
        for (name, v) in [
            ("system.g", s.g),
            ("system.kappa", s.kappa),
            ("system.gamma_x", s.gamma_x),
            ("system.p_x", s.p_x),
            ("system.gamma_theta", s.gamma_theta),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        self.thermal.validate().map_err(|e| invalid("thermal", e))?;
        let w = &self.sweep;
        if !(w.t_min.is_finite() && w.t_max.is_finite() && w.t_min >= 0.0 && w.t_min < w.t_max) {
            return Err(invalid("sweep.t_min", format!("need 0 <= t_min < t_max, got {} and {}", w.t_min, w.t_max)));
        }
        if w.steps < 2 || w.steps > MAX_STEPS {
            return Err(invalid("sweep.steps", format!("must be in [2, {MAX_STEPS}], got {}", w.steps)));
        }
        if w.temperatures().windows(2).any(|p| !(p[1] > p[0])) {
            return Err(invalid("sweep.steps", "temperature range too narrow for this many steps"));
        }
        let n = &self.numerics;
        if n.n_max < 2 {
            return Err(invalid("numerics.n_max", format!("must be >= 2, got {}", n.n_max)));
        }
        if n.n_max > 40 {
            return Err(invalid("numerics.n_max", format!("must be <= 40, got {}", n.n_max)));
        }
        let g = &n.omega_grid;
        if g.points < 5 || g.points > 1_000_000 {
            return Err(invalid("numerics.omega_grid.points", format!("must be in [5, 1e6], got {}", g.points)));
        }
        if !(g.half_width_over_g.is_finite() && g.half_width_over_g > 0.0) {
            return Err(invalid("numerics.omega_grid.half_width_over_g", "must be > 0"));
        }
        if self.system.g <= 0.0 {
            return Err(invalid("system.g", "must be > 0 (grids and block rates are in units of g)"));
        }
        if g.center.is_some_and(|c| !c.is_finite()) {
            return Err(invalid("numerics.omega_grid.center", "must be finite"));
        }
        let t = &n.tolerances;
        if !(t.min_prominence.is_finite() && (0.0..1.0).contains(&t.min_prominence)) {
            return Err(invalid("numerics.tolerances.min_prominence", "must be in [0, 1)"));
        }
        if !(t.tie_tol.is_finite() && t.tie_tol >= 0.0) {
            return Err(invalid("numerics.tolerances.tie_tol", "must be >= 0"));
        }
        let b = &self.subspace;
        for (name, v) in [("subspace.kappa_over_g", b.kappa_over_g), ("subspace.gamma_x_over_g", b.gamma_x_over_g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        if !b.coefficients_delta_over_g.is_finite() {
            return Err(invalid("subspace.coefficients_delta_over_g", "must be finite"));
        }
        if !(b.ep_search_max_over_g.is_finite() && b.ep_search_max_over_g > 0.0) {
            return Err(invalid("subspace.ep_search_max_over_g", "must be > 0"));
        }
        if let Some(f) = self.outputs.figures.iter().find(|f| !FIGURES.contains(&f.as_str())) {
            return Err(invalid("outputs.figures", format!("unknown figure `{f}`")));
        }
        Ok(())
    }

    /// Pretty JSON with every field present.
    pub fn resolved_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of [`Self::resolved_json`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.resolved_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
