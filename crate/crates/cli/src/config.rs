//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wgmodes::{Formulation, MediumSpec, SolveOptions};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Rectangle {
        a: f64,
        b: f64,
        nx: usize,
        ny: usize,
    },
    Annulus {
        r1: f64,
        r2: f64,
        nr: usize,
        ntheta: usize,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        holes: Vec<Vec<[f64; 2]>>,
        h: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_vtk_prefix")]
    pub vtk_prefix: String,
}

fn default_csv() -> String {
    "modes.csv".into()
}

fn default_report() -> String {
    "crossval.json".into()
}

fn default_vtk_prefix() -> String {
    "mode".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            report: default_report(),
            vtk_prefix: default_vtk_prefix(),
        }
    }
}

fn default_formulations() -> Vec<Formulation> {
    Formulation::ALL.to_vec()
}

fn default_modes() -> usize {
    4
}

fn default_rtol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub refinements: usize,
    #[serde(default = "default_formulations")]
    pub formulations: Vec<Formulation>,
    #[serde(default = "default_modes")]
    pub num_modes: usize,
    /// Angular frequency in rad/s for field reconstruction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Relative tolerance for scalar/vector agreement.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Refinement level used for field export; the finest by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_level: Option<usize>,
    #[serde(default)]
    pub output: Outputs,
    #[serde(default)]
    pub solver: SolveOptions,
    /// Directory that relative paths resolve against; set when loading.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.num_modes == 0 {
            return Err(CliError::Input("num_modes must be at least 1".into()));
        }
        if self.formulations.is_empty() {
            return Err(CliError::Input("formulations must not be empty".into()));
        }
        if !(self.rtol > 0.0) {
            return Err(CliError::Input("rtol must be positive".into()));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w.is_finite()) {
                return Err(CliError::Input(format!("omega must be positive, got {w}")));
            }
        }
        if let Some(l) = self.field_level {
            if l > self.refinements {
                return Err(CliError::Input(format!(
                    "field_level {l} exceeds refinements {}",
                    self.refinements
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
