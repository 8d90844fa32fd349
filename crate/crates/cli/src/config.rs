//! Run configuration: TOML file plus `--set` overrides, resolved and validated up front.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wqed_core::ed::{EdConfig, EdSolver};
use wqed_core::transfer::{ProtocolSchedule, Segment};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub ed: EdSection,
    pub dynamics: DynamicsSection,
    pub protocol: ProtocolSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub omega0: f64,
    pub lambda: f64,
    pub n_sites: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            omega0: 1.0,
            lambda: 0.2,
            n_sites: 2000,
        }
    }
}

/// Axes of the Cartesian sweep. Values are sorted and deduplicated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub delta: Vec<f64>,
    pub g: Vec<f64>,
    /// Qubit separations; empty means a single qubit.
    pub x: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            delta: vec![0.3],
            g: vec![0.3],
            x: vec![],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdSection {
    pub n_sites: usize,
    /// Starting truncation; raised until the ground energy settles to `rel_tol`.
    pub n_max: usize,
    pub total_max: usize,
    pub rel_tol: f64,
    pub dim_cap: usize,
    pub solver: SolverChoice,
}

impl Default for EdSection {
    fn default() -> Self {
        EdSection {
            n_sites: 12,
            n_max: 2,
            total_max: 2,
            rel_tol: 1e-6,
            dim_cap: 400_000,
            solver: SolverChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Dense,
    Lanczos,
    Auto,
}

impl EdSection {
    pub fn seed(&self) -> EdConfig {
        EdConfig {
            n_max: self.n_max,
            total_max: self.total_max,
            dim_cap: self.dim_cap,
            solver: match self.solver {
                SolverChoice::Dense => EdSolver::Dense,
                SolverChoice::Lanczos => EdSolver::Lanczos,
                SolverChoice::Auto => EdSolver::Auto,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub t_max: f64,
    pub dt: f64,
    /// Fraction of the trace averaged for the plateau.
    pub tail_fraction: f64,
    /// Population window [lo, hi] for the early exponential fit.
    pub decay_window: [f64; 2],
    /// Keep every `stride`-th sample in the trace table.
    pub stride: usize,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            t_max: 3000.0,
            dt: 0.5,
            tail_fraction: 0.1,
            decay_window: [0.1, 0.9],
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoldMode {
    /// First maximum of the measured Rabi oscillation.
    Tuned,
    /// π/(2τ) from the tight-binding doublet.
    Swap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Hold {
    Mode(HoldMode),
    Time(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    /// Ramp duration in units of 1/τ.
    pub ramp_tau: f64,
    pub hold: Hold,
    /// Explicit schedule; replaces the standard five-segment one, and `ramp_tau`/`hold` go unused.
    pub segments: Option<Vec<Segment>>,
    pub steps_per_ramp: usize,
    pub hold_samples: usize,
    pub adiabatic_threshold: f64,
    pub stride: usize,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            ramp_tau: 50.0,
            hold: Hold::Mode(HoldMode::Tuned),
            segments: None,
            steps_per_ramp: 200,
            hold_samples: 200,
            adiabatic_threshold: 0.1,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Half-width of the site window written for spatial profiles.
    pub window: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { window: 40 }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("--set expects key=value, got '{assignment}'")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(cfg_err(format!("--set: bad key path '{path}'")));
    }
    let mut table = root;
    for k in &keys[..keys.len() - 1] {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| cfg_err(format!("--set: '{k}' in '{path}' is not a table")))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    cfg.canonicalize();
    Ok(cfg)
}

impl RunConfig {
    fn canonicalize(&mut self) {
        for axis in [&mut self.sweep.delta, &mut self.sweep.g] {
            axis.sort_by(f64::total_cmp);
            axis.dedup();
        }
        self.sweep.x.sort_unstable();
        self.sweep.x.dedup();
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate_common(&self) -> Result<(), ConfigError> {
        let s = &self.sweep;
        if s.delta.is_empty() || s.g.is_empty() {
            return Err(cfg_err("sweep.delta and sweep.g need at least one value"));
        }
        if s.delta.iter().chain(&s.g).any(|v| !v.is_finite()) {
            return Err(cfg_err("sweep values must be finite"));
        }
        if self.output.window == 0 {
            return Err(cfg_err("output.window must be positive"));
        }
        Ok(())
    }

    pub fn validate_dynamics(&self) -> Result<(), ConfigError> {
        let d = &self.dynamics;
        if !(d.t_max > 0.0 && d.dt > 0.0 && d.dt <= d.t_max) {
            return Err(cfg_err(format!(
                "dynamics: need 0 < dt <= t_max, got dt={}, t_max={}",
                d.dt, d.t_max
            )));
        }
        if !(d.tail_fraction > 0.0 && d.tail_fraction <= 1.0) {
            return Err(cfg_err("dynamics.tail_fraction must lie in (0, 1]"));
        }
        let [lo, hi] = d.decay_window;
        if !(0.0 < lo && lo < hi && hi <= 1.0) {
            return Err(cfg_err("dynamics.decay_window must satisfy 0 < lo < hi <= 1"));
        }
        if d.stride == 0 {
            return Err(cfg_err("dynamics.stride must be positive"));
        }
        Ok(())
    }

    pub fn validate_protocol(&self) -> Result<(), ConfigError> {
        let p = &self.protocol;
        if !(p.ramp_tau > 0.0) || !p.ramp_tau.is_finite() {
            return Err(cfg_err("protocol.ramp_tau must be positive"));
        }
        if let Hold::Time(t) = p.hold {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(cfg_err("protocol.hold must be 'tuned', 'swap' or a non-negative time"));
            }
        }
        if p.steps_per_ramp == 0 || p.hold_samples == 0 || p.stride == 0 {
            return Err(cfg_err("protocol step counts and stride must be positive"));
        }
        if !(p.adiabatic_threshold > 0.0) {
            return Err(cfg_err("protocol.adiabatic_threshold must be positive"));
        }
        if let Some(segs) = &p.segments {
            ProtocolSchedule { segments: segs.clone() }
                .validate()
                .map_err(|e| cfg_err(format!("protocol.segments: {e}")))?;
        }
        Ok(())
    }

    pub fn validate_ed(&self) -> Result<(), ConfigError> {
        if !(self.ed.rel_tol > 0.0) {
            return Err(cfg_err("ed.rel_tol must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_values_are_typed() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "model.lambda=0.25").unwrap();
        apply_override(&mut t, "sweep.g=[0.1, 0.2]").unwrap();
        apply_override(&mut t, "ed.solver=dense").unwrap();
        let cfg: RunConfig = toml::Value::Table(t).try_into().unwrap();
        assert_eq!(cfg.model.lambda, 0.25);
        assert_eq!(cfg.sweep.g, vec![0.1, 0.2]);
        assert!(matches!(cfg.ed.solver, SolverChoice::Dense));
    }

    #[test]
    fn hold_accepts_mode_or_time() {
        let p: ProtocolSection = toml::from_str("hold = 'swap'").unwrap();
        assert_eq!(p.hold, Hold::Mode(HoldMode::Swap));
        let p: ProtocolSection = toml::from_str("hold = 12.5").unwrap();
        assert_eq!(p.hold, Hold::Time(12.5));
        assert!(toml::from_str::<ProtocolSection>("hold = 'later'").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[model]\nomega = 1.0").is_err());
        assert!(toml::from_str::<RunConfig>("[plot]\nx = 1").is_err());
    }

    #[test]
    fn axes_are_sorted() {
        let mut cfg: RunConfig = toml::from_str("[sweep]\ng = [0.3, 0.1, 0.3]\nx = [4, 2]").unwrap();
        cfg.canonicalize();
        assert_eq!(cfg.sweep.g, vec![0.1, 0.3]);
        assert_eq!(cfg.sweep.x, vec![2, 4]);
    }
}
