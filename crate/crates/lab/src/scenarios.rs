//! Built-in scenario catalog. The configs are the JSON files under
//! `scenarios/`, embedded at build time.

use std::path::Path;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{ConfigError, LabError};

const BUILTINS: [(&str, &str); 8] = [
    ("flat-linear", include_str!("../scenarios/flat-linear.json")),
    ("trace-matched", include_str!("../scenarios/trace-matched.json")),
    ("quasi-1d-exponential", include_str!("../scenarios/quasi-1d-exponential.json")),
    ("radial-spheres", include_str!("../scenarios/radial-spheres.json")),
    ("schwarzschild-slice", include_str!("../scenarios/schwarzschild-slice.json")),
    ("conformal-faces", include_str!("../scenarios/conformal-faces.json")),
    ("manufactured-sine", include_str!("../scenarios/manufactured-sine.json")),
    ("neumann-slab", include_str!("../scenarios/neumann-slab.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    let (_, text) = BUILTINS.iter().find(|(n, _)| *n == name)?;
    Some(ScenarioConfig::from_json_str(text).unwrap_or_else(|e| panic!("built-in {name} is invalid: {e}")))
}

pub fn catalog() -> Vec<CatalogEntry> {
    names()
        .map(|n| {
            let cfg = builtin(n).expect("listed");
            CatalogEntry { name: cfg.name, description: cfg.description }
        })
        .collect()
}

/// A config file path if one exists, otherwise a built-in name.
pub fn resolve(spec: &str) -> Result<ScenarioConfig, LabError> {
    let path = Path::new(spec);
    if path.is_file() {
        return ScenarioConfig::from_path(path);
    }
    builtin(spec).ok_or_else(|| {
        ConfigError::new("", format!("no config file or built-in scenario named {spec:?}")).into()
    })
}
