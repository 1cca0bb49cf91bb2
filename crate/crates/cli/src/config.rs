//! Serializable run configurations, echoed into outputs and accepted back via `--config`.

use std::fs;
use std::path::{Path, PathBuf};

use abc_orbits::diagnostics::{Axis, Orientation, SectionSpec};
use abc_orbits::shooting::ShootingConfig;
use abc_orbits::{Config, Params, Point};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Integrate(IntegrateRun),
    Shoot(ShootRun),
    Verify(VerifyRun),
    Rotation(RotationRun),
    Poincare(PoincareRun),
    Sweep(SweepRun),
    Lemmas(LemmasRun),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Integrate(_) => "integrate",
            RunConfig::Shoot(_) => "shoot",
            RunConfig::Verify(_) => "verify",
            RunConfig::Rotation(_) => "rotation",
            RunConfig::Poincare(_) => "poincare",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Lemmas(_) => "lemmas",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrateRun {
    pub params: Params,
    pub from: Point,
    pub t0: f64,
    pub t1: f64,
    pub integrator: Config,
    /// Uniform resampling; `None` writes the accepted steps.
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootRun {
    pub shooting: ShootingConfig,
    pub assemble: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyRun {
    pub shooting: ShootingConfig,
    pub orbit: Option<PathBuf>,
    pub directions: bool,
    /// Number of heights in the lemma and exit-face scan.
    pub grid: usize,
    pub reflection_samples: usize,
    pub reflection_tol: f64,
}

impl Default for VerifyRun {
    fn default() -> Self {
        VerifyRun {
            shooting: ShootingConfig::default(),
            orbit: None,
            directions: false,
            grid: 200,
            reflection_samples: 50,
            reflection_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RotationRun {
    pub shooting: ShootingConfig,
    pub on_orbit: bool,
    pub from: Option<Point>,
    /// Averaging time. Defaults to `periods` periods on the orbit, 1000 otherwise.
    pub t: Option<f64>,
    pub periods: u32,
    pub out: Option<PathBuf>,
}

impl Default for RotationRun {
    fn default() -> Self {
        RotationRun {
            shooting: ShootingConfig::default(),
            on_orbit: false,
            from: None,
            t: None,
            periods: 10,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoincareRun {
    pub params: Params,
    pub integrator: Config,
    pub section: SectionSpec,
    /// Seeds per side of the square seed grid.
    pub grid: usize,
    pub t_max: f64,
    pub out: Option<PathBuf>,
}

impl Default for PoincareRun {
    fn default() -> Self {
        PoincareRun {
            params: Params::default(),
            integrator: Config::default(),
            section: SectionSpec { axis: Axis::Z, level: 0.0, orientation: Orientation::Positive },
            grid: 20,
            t_max: 500.0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepRun {
    pub shooting: ShootingConfig,
    pub radius: f64,
    pub step: f64,
    pub out: Option<PathBuf>,
}

impl Default for SweepRun {
    fn default() -> Self {
        SweepRun { shooting: ShootingConfig::default(), radius: 0.1, step: 0.05, out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmasRun {
    pub shooting: ShootingConfig,
    pub grid: usize,
    pub out: Option<PathBuf>,
}

impl Default for LemmasRun {
    fn default() -> Self {
        LemmasRun { shooting: ShootingConfig::default(), grid: 200, out: None }
    }
}

/// Reads a run config, either bare or under the `config` key of an output file.
pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))
}

/// `<out>.config.json`, written next to CSV outputs.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_round_trip() {
        let run = RunConfig::Sweep(SweepRun { radius: 0.05, ..Default::default() });
        let text = serde_json::to_string(&run).unwrap();
        assert!(text.starts_with(r#"{"command":"sweep""#));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), run);
    }

    #[test]
    fn missing_fields_take_defaults() {
        let run: RunConfig = serde_json::from_str(r#"{"command":"lemmas","grid":7}"#).unwrap();
        assert_eq!(run, RunConfig::Lemmas(LemmasRun { grid: 7, ..Default::default() }));
    }
}
