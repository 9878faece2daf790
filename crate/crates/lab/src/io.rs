//! On-disk formats.
//!
//! Field dumps are flat little-endian `f64` arrays, node-major with x
//! fastest and components interleaved per node, next to a JSON sidecar
//! that records the lattice and the component names.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stlab_core::levelset::LevelSetSurface;
use stlab_core::report::VerificationReport;
use stlab_core::{Grid, SymTensorField};

use crate::error::{ConfigError, LabError};

pub const SYM_COMPONENTS: [&str; 6] = ["xx", "xy", "xz", "yy", "yz", "zz"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub name: String,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub components: Vec<String>,
    pub dtype: String,
    pub layout: String,
    pub data: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub meta: FieldSidecar,
    pub values: Vec<f64>,
}

impl FieldDump {
    pub fn new(name: &str, grid: &Grid, components: &[&str], values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len() * components.len(), "field length mismatch");
        FieldDump {
            meta: FieldSidecar {
                name: name.to_string(),
                dims: grid.dims(),
                spacing: grid.spacing(),
                origin: grid.origin(),
                components: components.iter().map(|c| c.to_string()).collect(),
                dtype: "f64le".to_string(),
                layout: "node-major, x fastest, components interleaved".to_string(),
                data: format!("{name}.bin"),
            },
            values,
        }
    }

    pub fn sym(name: &str, field: &SymTensorField) -> Self {
        let values = field.values.iter().flat_map(|s| s.0).collect();
        Self::new(name, &field.grid, &SYM_COMPONENTS, values)
    }

    /// Writes `<dir>/<name>.bin` and `<dir>/<name>.json`; returns both paths.
    pub fn write(&self, dir: &Path) -> Result<[PathBuf; 2], LabError> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let bin = dir.join(&self.meta.data);
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(&bin, bytes).map_err(|e| LabError::io(&bin, e))?;
        let json = dir.join(format!("{}.json", self.meta.name));
        write_json(&json, &self.meta)?;
        Ok([bin, json])
    }

    /// Reads a dump given the path of either its sidecar or its data file.
    pub fn read(path: &Path) -> Result<Self, LabError> {
        let sidecar = path.with_extension("json");
        let text = fs::read_to_string(&sidecar).map_err(|e| LabError::io(&sidecar, e))?;
        let meta: FieldSidecar = serde_json::from_str(&text)
            .map_err(|e| ConfigError::new("metric.path", format!("{}: {e}", sidecar.display())))?;
        if meta.dtype != "f64le" {
            return Err(ConfigError::new("metric.path", format!("unsupported dtype {}", meta.dtype)).into());
        }
        let bin = sidecar.with_file_name(&meta.data);
        let bytes = fs::read(&bin).map_err(|e| LabError::io(&bin, e))?;
        let expected = 8 * meta.dims.iter().product::<usize>() * meta.components.len();
        if bytes.len() != expected {
            return Err(ConfigError::new(
                "metric.path",
                format!("{} holds {} bytes, sidecar implies {expected}", bin.display(), bytes.len()),
            )
            .into());
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(FieldDump { meta, values })
    }

    /// Reinterprets a six-component dump as a symmetric tensor field on `grid`.
    pub fn to_sym(&self, grid: &Grid) -> Result<SymTensorField, ConfigError> {
        if self.meta.components != SYM_COMPONENTS {
            return Err(ConfigError::new("metric.path", "expected components xx, xy, xz, yy, yz, zz"));
        }
        if self.meta.dims != grid.dims() {
            return Err(ConfigError::new(
                "metric.path",
                format!("table dims {:?} differ from grid dims {:?}", self.meta.dims, grid.dims()),
            ));
        }
        let values = self
            .values
            .chunks_exact(6)
            .map(|c| stlab_core::tensor::Sym3([c[0], c[1], c[2], c[3], c[4], c[5]]))
            .collect();
        SymTensorField::new(*grid, values).map_err(|e| ConfigError::new("metric.path", e.to_string()))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    check: &'a str,
    kind: &'a str,
    lhs: f64,
    rhs: f64,
    margin: f64,
    tolerance: f64,
    error_bar: f64,
    pass: bool,
    gating: bool,
}

/// One row per check, in report order.
pub fn summary_csv(reports: &[VerificationReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        let kind = match r.kind {
            stlab_core::report::CheckKind::Identity => "identity",
            stlab_core::report::CheckKind::Inequality => "inequality",
            stlab_core::report::CheckKind::Condition => "condition",
            stlab_core::report::CheckKind::Measurement => "measurement",
        };
        w.serialize(SummaryRow {
            check: &r.name,
            kind,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            tolerance: r.tolerance,
            error_bar: r.error_bar,
            pass: r.pass,
            gating: r.gating,
        })
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// Wavefront OBJ of the level set in physical coordinates.
pub fn write_obj(path: &Path, grid: &Grid, surface: &LevelSetSurface) -> Result<(), LabError> {
    let file = fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "# level {:e}", surface.level)?;
        for v in &surface.mesh.vertices {
            let [x, y, z] = grid.position_of(v);
            writeln!(w, "v {x:e} {y:e} {z:e}")?;
        }
        for t in &surface.mesh.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()
    };
    emit().map_err(|e| LabError::io(path, e))
}

#[derive(Debug, Serialize)]
struct TriangleRow {
    level: f64,
    triangle: usize,
    area: f64,
    mean_curvature: f64,
    gauss_curvature: f64,
    grad_norm: f64,
}

/// Per-triangle geometry of every surface, for plotting.
pub fn triangles_csv(surfaces: &[LevelSetSurface]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in surfaces {
        for t in &s.triangles {
            w.serialize(TriangleRow {
                level: s.level,
                triangle: t.index,
                area: t.area,
                mean_curvature: t.mean_curvature,
                gauss_curvature: t.gauss_curvature,
                grad_norm: t.grad_norm,
            })
            .expect("in-memory csv");
        }
    }
    w.into_inner().expect("in-memory csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use stlab_core::report::VerificationReport;

    #[test]
    fn field_dump_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::from_box([5, 6, 7], [0.0; 3], [1.0, 2.0, 3.0]).unwrap();
        let values: Vec<f64> = (0..2 * grid.len()).map(|i| i as f64 * 0.1 - 3.0).collect();
        let dump = FieldDump::new("pair", &grid, &["a", "b"], values);
        let [bin, json] = dump.write(dir.path()).unwrap();
        assert_eq!(fs::metadata(&bin).unwrap().len(), 16 * grid.len() as u64);
        assert_eq!(FieldDump::read(&json).unwrap(), dump);
        assert_eq!(FieldDump::read(&bin).unwrap(), dump);
    }

    #[test]
    fn sym_dump_checks_dims() {
        let grid = Grid::from_box([5; 3], [0.0; 3], [1.0; 3]).unwrap();
        let g = SymTensorField::constant(grid, stlab_core::tensor::Sym3::IDENTITY);
        let dump = FieldDump::sym("g", &g);
        assert_eq!(dump.to_sym(&grid).unwrap(), g);
        let other = Grid::from_box([6; 3], [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(dump.to_sym(&other).unwrap_err().path, "metric.path");
    }

    #[test]
    fn summary_has_one_row_per_check() {
        let reports = vec![
            VerificationReport::identity("a", 1.0, 1.0, 0.0, 1e-6),
            VerificationReport::measurement("b", 2.5),
        ];
        let text = String::from_utf8(summary_csv(&reports)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("check,kind,lhs"));
        assert!(lines[1].starts_with("a,identity,"));
    }
}
