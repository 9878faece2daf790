//! Scenario configuration: JSON schema, parsing with key paths, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stlab_core::expr::Expr;
use stlab_core::initial_data::{HSpec, PSpec};
use stlab_core::lab::VerificationConfig;
use stlab_core::laplacian::{BoundaryCondition, FaceCondition};
use stlab_core::solver::SolverConfig;
use stlab_core::{Face, Grid, MetricSpec};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: GridConfig,
    pub metric: MetricConfig,
    #[serde(default = "zero_p")]
    pub p: PSpec,
    pub h: HSpec,
    pub u: UConfig,
    /// Required when `u` is solved for; otherwise only names the face types.
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verification: VerificationConfig,
    /// Closed-form solution to compare the solver against.
    #[serde(default)]
    pub reference: Option<ReferenceSolution>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn zero_p() -> PSpec {
    PSpec::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: [usize; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Flat,
    Diagonal { xx: Expr, yy: Expr, zz: Expr },
    Conformal { phi: Expr },
    /// Six-component field dump (see [`crate::io`]); relative paths resolve
    /// against the config file's directory.
    Tabulated { path: PathBuf },
}

impl MetricConfig {
    pub fn analytic(&self) -> Option<MetricSpec> {
        match self {
            MetricConfig::Flat => Some(MetricSpec::Flat),
            MetricConfig::Diagonal { xx, yy, zz } => {
                Some(MetricSpec::Diagonal { xx: xx.clone(), yy: yy.clone(), zz: zz.clone() })
            }
            MetricConfig::Conformal { phi } => Some(MetricSpec::Conformal { phi: phi.clone() }),
            MetricConfig::Tabulated { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum UConfig {
    Solve,
    Manufactured { expr: Expr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub x_lo: FaceCondition,
    pub x_hi: FaceCondition,
    pub y_lo: FaceCondition,
    pub y_hi: FaceCondition,
    pub z_lo: FaceCondition,
    pub z_hi: FaceCondition,
    #[serde(default)]
    pub pin: Option<[usize; 3]>,
}

impl BoundaryConfig {
    pub fn condition(&self) -> BoundaryCondition {
        BoundaryCondition {
            faces: [
                self.x_lo.clone(),
                self.x_hi.clone(),
                self.y_lo.clone(),
                self.y_hi.clone(),
                self.z_lo.clone(),
                self.z_hi.clone(),
            ],
            pin: self.pin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSolution {
    pub expr: Expr,
    /// Bound on the max nodal error.
    pub tolerance: f64,
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file; a relative tabulated-metric path is made
    /// relative to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, crate::error::LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::LabError::io(path, e))?;
        let mut cfg = Self::from_json_str(&text)?;
        if let MetricConfig::Tabulated { path: table } = &mut cfg.metric {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let valid_name = !self.name.is_empty()
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid_name {
            return Err(ConfigError::new("name", "must be non-empty and use only [A-Za-z0-9_-]"));
        }
        for a in 0..3 {
            if self.grid.dims[a] < 5 {
                return Err(ConfigError::new(format!("grid.dims[{a}]"), "need at least 5 nodes per axis"));
            }
            if !(self.grid.upper[a] > self.grid.lower[a]) {
                return Err(ConfigError::new(format!("grid.upper[{a}]"), "must exceed grid.lower"));
            }
        }
        match (&self.u, &self.boundary) {
            (UConfig::Solve, None) => {
                return Err(ConfigError::new("boundary", "required when u.mode is \"solve\""));
            }
            (UConfig::Solve, Some(_)) if matches!(self.h, HSpec::Derived) => {
                return Err(ConfigError::new("h.family", "\"derived\" needs a manufactured u"));
            }
            _ => {}
        }
        if let Some(b) = &self.boundary {
            let bc = b.condition();
            if let Some(pin) = b.pin {
                for a in 0..3 {
                    if pin[a] >= self.grid.dims[a] {
                        return Err(ConfigError::new(format!("boundary.pin[{a}]"), "outside the grid"));
                    }
                }
            } else if matches!(self.u, UConfig::Solve) && !bc.has_dirichlet() {
                return Err(ConfigError::new("boundary.pin", "required when no face is Dirichlet"));
            }
        }
        self.solver.validate().map_err(|e| ConfigError::new("solver", e.to_string()))?;
        self.validate_verification()?;
        if let Some(r) = &self.reference {
            if !(r.tolerance > 0.0) {
                return Err(ConfigError::new("reference.tolerance", "must be positive"));
            }
        }
        Ok(())
    }

    fn validate_verification(&self) -> Result<(), ConfigError> {
        let v = &self.verification;
        if v.n_levels < 2 {
            return Err(ConfigError::new("verification.n_levels", "must be at least 2"));
        }
        let nonnegative = [
            ("epsilon_reg_rel", v.epsilon_reg_rel),
            ("eps_neq0_rel", v.eps_neq0_rel),
            ("inequality_tolerance", v.inequality_tolerance),
            ("identity_tolerance", v.identity_tolerance),
            ("identity_grad_floor_rel", v.identity_grad_floor_rel),
            ("identity_margin_frac", v.identity_margin_frac),
            ("surface_identity_tolerance", v.surface_identity_tolerance),
            ("lemma_tolerance", v.lemma_tolerance),
            ("flux_tolerance", v.flux_tolerance),
            ("face_constant_tolerance", v.face_constant_tolerance),
            ("condition_tolerance", v.condition_tolerance),
            ("kato_tolerance", v.kato_tolerance),
            ("c0_delta", v.c0_delta),
            ("coarea_relative", v.coarea_relative),
            ("coarea_floor", v.coarea_floor),
        ];
        for (key, value) in nonnegative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ConfigError::new(format!("verification.{key}"), "must be finite and non-negative"));
            }
        }
        if let Some(probe) = &v.sphere_probe {
            if !(probe.radius > 0.0) {
                return Err(ConfigError::new("verification.sphere_probe.radius", "must be positive"));
            }
        }
        Ok(())
    }

    /// Copy with `n` nodes along every axis.
    pub fn with_resolution(&self, n: usize) -> Self {
        ScenarioConfig { grid: GridConfig { dims: [n; 3], ..self.grid.clone() }, ..self.clone() }
    }

    pub fn boundary_condition(&self) -> Option<BoundaryCondition> {
        self.boundary.as_ref().map(BoundaryConfig::condition)
    }

    pub fn build_grid(&self) -> Result<Grid, ConfigError> {
        let grid = Grid::from_box(self.grid.dims, self.grid.lower, self.grid.upper)
            .map_err(|e| ConfigError::new("grid", e.to_string()))?;
        Ok(match self.boundary_condition() {
            Some(bc) => grid.with_tags(bc.tags()),
            None => grid,
        })
    }

    /// Whether the analysed `u` satisfies the equation by construction.
    pub fn u_solves(&self) -> bool {
        matches!(self.u, UConfig::Solve) || matches!(self.h, HSpec::Derived)
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn lemma_faces(&self) -> impl Iterator<Item = Face> + '_ {
        self.verification.dirichlet_lemma_faces.iter().chain(&self.verification.neumann_lemma_faces).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "grid": {"dims": [8, 8, 8], "lower": [0, 0, 0], "upper": [1, 1, 1]},
        "metric": {"family": "flat"},
        "h": {"family": "constant", "value": 0.0},
        "u": {"mode": "manufactured", "expr": "x"}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ScenarioConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(cfg.p, PSpec::Zero);
        assert_eq!(cfg.verification, VerificationConfig::default());
        assert!(!cfg.u_solves());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn unknown_family_reports_key_path() {
        let text = MINIMAL.replace(r#""family": "flat""#, r#""family": "hyperbolic""#);
        let err = ScenarioConfig::from_json_str(&text).unwrap_err();
        assert_eq!(err.path, "metric.family");
        assert!(err.message.contains("hyperbolic"), "{err}");
    }

    #[test]
    fn nested_errors_carry_full_path() {
        let text = MINIMAL.replace(r#""mode": "manufactured", "expr": "x""#, r#""mode": "manufactured", "expr": {"add": ["x", {"tan": "y"}]}"#);
        let err = ScenarioConfig::from_json_str(&text).unwrap_err();
        assert!(err.path.starts_with("u"), "{err}");
        let text = MINIMAL.replace(r#""dims": [8, 8, 8]"#, r#""dims": [8, 3, 8]"#);
        assert_eq!(ScenarioConfig::from_json_str(&text).unwrap_err().path, "grid.dims[1]");
        let text = MINIMAL.replace(r#""u": {"#, r#""verification": {"n_levels": 1}, "u": {"#);
        assert_eq!(ScenarioConfig::from_json_str(&text).unwrap_err().path, "verification.n_levels");
    }

    #[test]
    fn solve_mode_needs_boundary_data() {
        let text = MINIMAL.replace(r#"{"mode": "manufactured", "expr": "x"}"#, r#"{"mode": "solve"}"#);
        assert_eq!(ScenarioConfig::from_json_str(&text).unwrap_err().path, "boundary");
    }

    #[test]
    fn resolution_override_changes_hash() {
        let cfg = ScenarioConfig::from_json_str(MINIMAL).unwrap();
        let finer = cfg.with_resolution(16);
        assert_eq!(finer.grid.dims, [16; 3]);
        assert_ne!(cfg.hash(), finer.hash());
        assert_eq!(cfg.hash(), cfg.clone().hash());
    }
}
