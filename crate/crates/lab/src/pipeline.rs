//! One scenario from configuration to reports and files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use stlab_core::initial_data::{derived_h, energy_momentum, HSpec};
use stlab_core::lab::{run_verification, Analysis, LabOutcome};
use stlab_core::metric::metric_from_values;
use stlab_core::report::VerificationReport;
use stlab_core::solver::{solve, SolveResult};
use stlab_core::{build_metric, Grid, ScalarField};

use crate::config::{ScenarioConfig, UConfig};
use crate::error::{LabError, EXIT_CHECK_FAILED, EXIT_PASS};
use crate::io::{self, FieldDump};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Overrides the config's output directory.
    pub out_dir: Option<PathBuf>,
    /// When false nothing is written and the manifest lists no files.
    pub write: bool,
    pub dump_fields: bool,
    pub dump_surfaces: bool,
    /// Multiplies every check tolerance.
    pub tolerance_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out_dir: None, write: false, dump_fields: false, dump_surfaces: false, tolerance_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub version: String,
    pub config_hash: String,
    pub pass: bool,
    pub exit_code: i32,
    pub timings: Vec<StageTiming>,
    /// Paths relative to the output directory, in the order written.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn total_seconds(&self) -> f64 {
        self.timings.iter().map(|t| t.seconds).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub delta: f64,
    pub iterations: usize,
    /// Max interior change across the stage.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub converged: bool,
    pub delta_final: f64,
    pub max_residual: f64,
    pub stages: Vec<StageSummary>,
}

impl SolverSummary {
    fn from_result(r: &SolveResult) -> Self {
        SolverSummary {
            iterations: r.iterations,
            converged: r.converged,
            delta_final: r.delta_final,
            max_residual: r.max_interior_residual(),
            stages: r
                .stages
                .iter()
                .map(|s| StageSummary { delta: s.delta, iterations: s.iterations, change: s.change })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n_levels: usize,
    pub regular_levels: usize,
    pub epsilon_reg: f64,
    pub excluded_measure: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// The JSON report document. Holds no timings, so it is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub scenario: String,
    pub description: String,
    pub config_hash: String,
    pub dims: [usize; 3],
    pub u_solves: bool,
    pub pass: bool,
    pub solver: Option<SolverSummary>,
    pub levels: LevelSummary,
    pub reports: Vec<VerificationReport>,
}

pub struct RunOutcome {
    pub config: ScenarioConfig,
    pub manifest: RunManifest,
    pub document: ReportDocument,
    pub analysis: Analysis,
    pub lab: LabOutcome,
    pub solve: Option<SolveResult>,
    pub out_dir: Option<PathBuf>,
}

impl RunOutcome {
    pub fn reports(&self) -> &[VerificationReport] {
        &self.document.reports
    }

    pub fn report(&self, name: &str) -> Option<&VerificationReport> {
        self.document.reports.iter().find(|r| r.name == name)
    }

    pub fn pass(&self) -> bool {
        self.document.pass
    }

    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code
    }
}

struct Clock {
    last: Instant,
    timings: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Clock { last: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming { stage: stage.to_string(), seconds: (now - self.last).as_secs_f64() });
        self.last = now;
    }
}

pub fn default_out_dir(cfg: &ScenarioConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| Path::new("out").join(&cfg.name))
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome, LabError> {
    cfg.validate()?;
    let mut clock = Clock::new();
    let grid = cfg.build_grid()?;
    let m = match cfg.metric.analytic() {
        Some(spec) => build_metric(&grid, &spec)?,
        None => {
            let crate::config::MetricConfig::Tabulated { path } = &cfg.metric else { unreachable!() };
            metric_from_values(FieldDump::read(path)?.to_sym(&grid)?)?
        }
    };
    clock.lap("metric");

    let p = cfg.p.build(&m);
    let constant_h = |grid: Grid| match &cfg.h {
        HSpec::Constant { value } => Some(ScalarField::constant(grid, *value)),
        HSpec::Expression { expr } => Some(ScalarField::from_fn(grid, |x| expr.eval(&x))),
        HSpec::Derived => None,
    };
    let (u, idf, solved) = match &cfg.u {
        UConfig::Manufactured { expr } => {
            let u = ScalarField::from_fn(grid, |x| expr.eval(&x));
            let h = constant_h(grid).unwrap_or_else(|| derived_h(&u, &m, &p));
            let idf = energy_momentum(&m, &p, &h);
            clock.lap("initial_data");
            (u, idf, None)
        }
        UConfig::Solve => {
            let h = constant_h(grid).expect("validated: solve mode has explicit h");
            let idf = energy_momentum(&m, &p, &h);
            clock.lap("initial_data");
            let bc = cfg.boundary_condition().expect("validated: solve mode has boundary data");
            let result = solve(&m, &idf, &bc, &cfg.solver)?;
            if !result.converged {
                return Err(LabError::Solver(format!(
                    "interior residual {:e} exceeds {:e} after {} iterations",
                    result.max_interior_residual(),
                    cfg.solver.residual_tolerance(),
                    result.iterations
                )));
            }
            clock.lap("solve");
            (result.u.clone(), idf, Some(result))
        }
    };

    let analysis = Analysis::new(&u, &m, &idf);
    clock.lap("analysis");
    let lab = run_verification(&analysis, &cfg.verification, cfg.u_solves())?;
    let mut reports = lab.reports.clone();
    if let Some(reference) = &cfg.reference {
        reports.push(reference_report(&u, solved.as_ref(), reference));
    }
    if let Some(s) = &solved {
        reports.push(VerificationReport::measurement("solver_iterations", s.iterations as f64));
        reports.push(VerificationReport::measurement("solver_max_residual", s.max_interior_residual()));
    }
    if opts.tolerance_scale != 1.0 {
        reports = reports.into_iter().map(|r| r.rescaled(opts.tolerance_scale)).collect();
    }
    let pass = !reports.iter().any(VerificationReport::fails_gate);
    clock.lap("verification");

    let split = &lab.sliced.split;
    let document = ReportDocument {
        scenario: cfg.name.clone(),
        description: cfg.description.clone(),
        config_hash: cfg.hash(),
        dims: grid.dims(),
        u_solves: cfg.u_solves(),
        pass,
        solver: solved.as_ref().map(SolverSummary::from_result),
        levels: LevelSummary {
            n_levels: split.levels.len(),
            regular_levels: lab.sliced.surfaces.len(),
            epsilon_reg: split.epsilon_reg,
            excluded_measure: split.a_measure,
            t_min: split.t_min,
            t_max: split.t_max,
        },
        reports,
    };
    let mut manifest = RunManifest {
        scenario: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: document.config_hash.clone(),
        pass,
        exit_code: if pass { EXIT_PASS } else { EXIT_CHECK_FAILED },
        timings: Vec::new(),
        files: Vec::new(),
    };
    let mut outcome =
        RunOutcome { config: cfg.clone(), manifest: manifest.clone(), document, analysis, lab, solve: solved, out_dir: None };
    if opts.write {
        let dir = opts.out_dir.clone().unwrap_or_else(|| default_out_dir(cfg));
        manifest.files = write_outputs(&dir, &outcome, opts)?;
        manifest.files.push("manifest.json".to_string());
        clock.lap("write");
        manifest.timings = clock.timings;
        io::write_json(&dir.join("manifest.json"), &manifest)?;
        outcome.out_dir = Some(dir);
    } else {
        manifest.timings = clock.timings;
    }
    outcome.manifest = manifest;
    Ok(outcome)
}

fn reference_report(
    u: &ScalarField,
    solved: Option<&SolveResult>,
    reference: &crate::config::ReferenceSolution,
) -> VerificationReport {
    let grid = u.grid;
    let exact: Vec<f64> = (0..grid.len()).map(|n| reference.expr.eval(&grid.position(n))).collect();
    let max_err = |f: &ScalarField| f.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let err = max_err(u);
    let mut breakdown = Vec::new();
    if let Some(s) = solved {
        for (k, (stage, field)) in s.stages.iter().zip(&s.stage_solutions).enumerate() {
            breakdown.push((format!("stage_{k}_delta"), stage.delta));
            breakdown.push((format!("stage_{k}_error"), max_err(field)));
        }
    }
    VerificationReport::identity("reference_solution", err, 0.0, err, reference.tolerance).with_breakdown(breakdown)
}

fn write_outputs(dir: &Path, outcome: &RunOutcome, opts: &RunOptions) -> Result<Vec<String>, LabError> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut files = Vec::new();
    let rel = |p: &Path| p.strip_prefix(dir).unwrap_or(p).to_string_lossy().replace('\\', "/");

    io::write_json(&dir.join("config.json"), &outcome.config)?;
    files.push("config.json".to_string());
    io::write_json(&dir.join("report.json"), &outcome.document)?;
    files.push("report.json".to_string());
    let csv_path = dir.join("summary.csv");
    std::fs::write(&csv_path, io::summary_csv(&outcome.document.reports)).map_err(|e| LabError::io(&csv_path, e))?;
    files.push("summary.csv".to_string());

    if opts.dump_fields {
        let fields_dir = dir.join("fields");
        for dump in field_dumps(outcome) {
            for p in dump.write(&fields_dir)? {
                files.push(rel(&p));
            }
        }
    }
    if opts.dump_surfaces {
        let surf_dir = dir.join("surfaces");
        std::fs::create_dir_all(&surf_dir).map_err(|e| LabError::io(&surf_dir, e))?;
        let grid = outcome.analysis.grid();
        for (k, s) in outcome.lab.sliced.surfaces.iter().enumerate() {
            let p = surf_dir.join(format!("level_{k:03}.obj"));
            io::write_obj(&p, grid, s)?;
            files.push(rel(&p));
        }
        let p = surf_dir.join("triangles.csv");
        std::fs::write(&p, io::triangles_csv(&outcome.lab.sliced.surfaces)).map_err(|e| LabError::io(&p, e))?;
        files.push(rel(&p));
    }
    Ok(files)
}

fn field_dumps(outcome: &RunOutcome) -> Vec<FieldDump> {
    let an = &outcome.analysis;
    let grid = *an.grid();
    let scalar = |name: &str, f: &ScalarField| FieldDump::new(name, &grid, &["value"], f.values.clone());
    let mut dumps = vec![
        scalar("u", an.u()),
        scalar("grad_norm", &an.grad_norm),
        scalar("h", &an.idf.h),
        scalar("p_trace", &an.idf.p_trace),
        scalar("mu", &an.idf.mu),
        FieldDump::new("j", &grid, &["x", "y", "z"], an.idf.j.values.iter().flatten().copied().collect()),
        FieldDump::sym("g", &an.m.g),
        FieldDump::sym("p", &an.idf.p),
        FieldDump::sym("ricci", &an.m.ricci),
        scalar("scalar_curvature", &an.m.scalar_curv),
    ];
    if let Some(s) = &outcome.solve {
        dumps.push(scalar("residual", &s.residual_field));
    }
    dumps
}
