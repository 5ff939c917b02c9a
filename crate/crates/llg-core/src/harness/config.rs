//! File-backed run configuration.
//!
//! A single JSON document drives every CLI mode. Unknown keys are rejected so
//! that a typo fails loudly instead of silently running with a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::integrator::SolverKind;
use crate::problem::{self, Problem};

/// Desk-scale ceilings; the paper-scale experiments behind `--paper-scale`
/// lift them.
pub const DESK_MAX_MESH_LEVEL: usize = 64;
pub const DESK_MAX_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Run,
    ConvSpace,
    ConvTime,
    ConvCoupled,
    Reference,
    Verify,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Run => "run",
            Mode::ConvSpace => "conv-space",
            Mode::ConvTime => "conv-time",
            Mode::ConvCoupled => "conv-coupled",
            Mode::Reference => "reference",
            Mode::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamilyCfg {
    Crisscross,
    Diagonal,
}

fn default_family() -> MeshFamilyCfg {
    MeshFamilyCfg::Crisscross
}

/// Reference-solution settings for problems without a closed-form solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// The reference runs with time step `tau / tau_factor`.
    #[serde(default)]
    pub tau_factor: Option<usize>,
    /// The reference mesh is the finest ladder mesh refined by this many
    /// additional bisection passes (two passes halve `h`).
    #[serde(default)]
    pub extra_bisections: Option<u32>,
    /// Load a stored reference field instead of computing one.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl ReferenceConfig {
    pub fn tau_factor(&self) -> usize {
        self.tau_factor.unwrap_or(16)
    }

    pub fn extra_bisections(&self) -> u32 {
        self.extra_bisections.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Problem identifier, e.g. `cubic` or `bump-chi:0.05`.
    pub problem: String,
    /// Optional mode pin; when present it must match the CLI subcommand.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_family")]
    pub mesh_family: MeshFamilyCfg,
    /// Cells per unit-square edge for single-mesh modes.
    #[serde(default)]
    pub mesh_level: Option<usize>,
    /// Mesh ladder for spatial and coupled studies.
    #[serde(default)]
    pub mesh_levels: Option<Vec<usize>>,
    /// Time step for single-tau modes; the step count is `t_end / tau`.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Time-step ladder for temporal and coupled studies.
    #[serde(default)]
    pub tau_ladder: Option<Vec<f64>>,
    /// Physical overrides; defaults come from the problem definition.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub lambda_sq: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub solver: Option<SolverKind>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Emit a log-log SVG next to the CSV table.
    #[serde(default)]
    pub plot: bool,
    /// Byte-identical outputs: wall times are reported as zero.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The problem with physical overrides applied.
    pub fn resolved_problem(&self) -> Result<Problem<f64>, Error> {
        let mut p = problem::by_name::<f64>(&self.problem)?;
        if let Some(a) = self.alpha {
            p.alpha = a;
        }
        if let Some(l) = self.lambda_sq {
            p.lambda_sq = l;
        }
        if let Some(t) = self.t_end {
            p.t_end = t;
        }
        for (label, v) in [
            ("alpha", p.alpha),
            ("lambda_sq", p.lambda_sq),
            ("t_end", p.t_end),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{label} must be positive, got {v}")));
            }
        }
        Ok(p)
    }

    /// Checks the fields required by `mode`, positivity, ladder lengths, and
    /// the desk-scale ceilings (`--paper-scale` lifts the latter).
    pub fn validate(&self, mode: Mode, paper_scale: bool) -> Result<(), Error> {
        if let Some(pinned) = self.mode {
            if pinned != mode {
                return Err(Error::Config(format!(
                    "config pins mode {pinned} but the {mode} command was invoked"
                )));
            }
        }
        let p = self.resolved_problem()?;

        let need = |opt: bool, what: &str| -> Result<(), Error> {
            if opt {
                Ok(())
            } else {
                Err(Error::Config(format!("{mode} requires {what}")))
            }
        };
        let ladder_ok = |lens: &[f64], what: &str| -> Result<(), Error> {
            if lens.len() < 2 {
                return Err(Error::Config(format!(
                    "{what} needs at least two entries for a convergence study"
                )));
            }
            for &v in lens {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{what} entries must be positive")));
                }
            }
            Ok(())
        };

        match mode {
            Mode::Run => {
                need(self.mesh_level.is_some(), "mesh_level")?;
                need(self.tau.is_some(), "tau")?;
            }
            Mode::ConvSpace => {
                need(self.mesh_levels.is_some(), "mesh_levels")?;
                need(self.tau.is_some(), "tau")?;
                let levels = self.mesh_levels.as_ref().unwrap();
                ladder_ok(
                    &levels.iter().map(|&n| n as f64).collect::<Vec<_>>(),
                    "mesh_levels",
                )?;
                if !levels.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Config(
                        "mesh_levels must be strictly increasing".to_string(),
                    ));
                }
            }
            Mode::ConvTime => {
                need(self.mesh_level.is_some(), "mesh_level")?;
                need(self.tau_ladder.is_some(), "tau_ladder")?;
                let taus = self.tau_ladder.as_ref().unwrap();
                ladder_ok(taus, "tau_ladder")?;
                if !taus.windows(2).all(|w| w[0] > w[1]) {
                    return Err(Error::Config(
                        "tau_ladder must be strictly decreasing".to_string(),
                    ));
                }
            }
            Mode::ConvCoupled => {
                need(self.mesh_levels.is_some(), "mesh_levels")?;
                need(self.tau_ladder.is_some(), "tau_ladder")?;
                let levels = self.mesh_levels.as_ref().unwrap();
                let taus = self.tau_ladder.as_ref().unwrap();
                if levels.len() != taus.len() {
                    return Err(Error::Config(format!(
                        "coupled ladder lengths differ: {} mesh levels vs {} taus",
                        levels.len(),
                        taus.len()
                    )));
                }
                ladder_ok(taus, "tau_ladder")?;
            }
            Mode::Reference => {
                need(self.mesh_level.is_some(), "mesh_level")?;
                need(self.tau.is_some(), "tau")?;
            }
            Mode::Verify => {}
        }

        if !paper_scale {
            let worst_level = self
                .mesh_levels
                .iter()
                .flatten()
                .copied()
                .chain(self.mesh_level)
                .max()
                .unwrap_or(0);
            if worst_level > DESK_MAX_MESH_LEVEL {
                return Err(Error::Config(format!(
                    "mesh level {worst_level} exceeds the desk ceiling {DESK_MAX_MESH_LEVEL}; \
                     pass --paper-scale to lift it"
                )));
            }
            let mut taus: Vec<f64> = self.tau_ladder.clone().unwrap_or_default();
            taus.extend(self.tau);
            for tau in taus {
                let steps = steps_for(p.t_end, tau)?;
                let factor = self.reference.as_ref().map_or(1, |r| r.tau_factor());
                if steps.saturating_mul(factor) > DESK_MAX_STEPS {
                    return Err(Error::Config(format!(
                        "tau {tau} implies {} steps, over the desk ceiling {DESK_MAX_STEPS}; \
                         pass --paper-scale to lift it",
                        steps * factor
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Step count for a uniform partition of `[0, t_end]` with step `tau`; the
/// pair must tile the interval exactly (up to round-off).
pub fn steps_for(t_end: f64, tau: f64) -> Result<usize, Error> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let n = (t_end / tau).round();
    if n < 2.0 {
        return Err(Error::Config(format!(
            "tau {tau} leaves fewer than two steps on [0, {t_end}]"
        )));
    }
    if (n * tau - t_end).abs() > 1e-9 * t_end {
        return Err(Error::Config(format!(
            "tau {tau} does not divide t_end {t_end} evenly"
        )));
    }
    Ok(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig::from_json(
            r#"{ "problem": "cubic", "mesh_level": 8, "tau": 0.01 }"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_a_minimal_run_config() {
        let cfg = base();
        assert_eq!(cfg.problem, "cubic");
        assert_eq!(cfg.mesh_level, Some(8));
        assert!(cfg.validate(Mode::Run, false).is_ok());
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = RunConfig::from_json(r#"{ "problem": "cubic", "mesh_levl": 8 }"#);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn rejects_mode_mismatch_and_short_ladders() {
        let mut cfg = base();
        cfg.mode = Some(Mode::Run);
        assert!(cfg.validate(Mode::ConvTime, false).is_err());

        let mut cfg = base();
        cfg.mesh_levels = Some(vec![8]);
        assert!(cfg.validate(Mode::ConvSpace, false).is_err());
    }

    #[test]
    fn desk_guard_trips_without_paper_scale() {
        let mut cfg = base();
        cfg.mesh_level = Some(128);
        let err = cfg.validate(Mode::Run, false).unwrap_err();
        assert!(err.to_string().contains("paper-scale"), "{err}");
        assert!(cfg.validate(Mode::Run, true).is_ok());

        let mut cfg = base();
        cfg.tau = Some(0.2 / 4096.0);
        assert!(cfg.validate(Mode::Run, false).is_err());
        assert!(cfg.validate(Mode::Run, true).is_ok());
    }

    #[test]
    fn steps_for_requires_an_even_tiling() {
        assert_eq!(steps_for(0.2, 1e-3).unwrap(), 200);
        assert_eq!(steps_for(0.2, 0.2 / 3.0).unwrap(), 3);
        assert!(steps_for(0.2, 0.033).is_err());
        assert!(steps_for(0.2, 0.2).is_err());
        assert!(steps_for(0.2, -0.1).is_err());
    }

    #[test]
    fn physical_overrides_apply_and_must_be_positive() {
        let mut cfg = base();
        cfg.alpha = Some(0.7);
        assert!((cfg.resolved_problem().unwrap().alpha - 0.7).abs() < 1e-15);
        cfg.alpha = Some(-1.0);
        assert!(cfg.resolved_problem().is_err());
    }
}
