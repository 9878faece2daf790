//! Convergence studies: rerun a scenario on a ladder of resolutions and fit
//! the observed order of each residual.

use std::path::PathBuf;

use serde::Serialize;
use stlab_core::report::{CheckKind, VerificationReport};

use crate::config::ScenarioConfig;
use crate::error::{ConfigError, LabError};
use crate::pipeline::{default_out_dir, run_scenario, RunManifest, RunOptions};

/// Residuals at or below this are roundoff; a check that never rises above
/// it is reported as exact instead of fitted.
pub const EXACT_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct StudyRun {
    pub resolution: usize,
    pub spacing: f64,
    pub reports: Vec<VerificationReport>,
    pub manifest: RunManifest,
}

impl StudyRun {
    pub fn report(&self, name: &str) -> Option<&VerificationReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub check: String,
    pub spacings: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `ln residual` against `ln spacing`.
    pub order: Option<f64>,
    pub exact: bool,
}

#[derive(Debug)]
pub struct StudyReport {
    pub scenario: String,
    pub resolutions: Vec<usize>,
    pub runs: Vec<StudyRun>,
    pub fits: Vec<OrderFit>,
    /// The run failure that stopped the study, if any.
    pub aborted: Option<LabError>,
    pub out_dir: Option<PathBuf>,
}

impl StudyReport {
    pub fn fit(&self, check: &str) -> Option<&OrderFit> {
        self.fits.iter().find(|f| f.check == check)
    }

    pub fn run(&self, resolution: usize) -> Option<&StudyRun> {
        self.runs.iter().find(|r| r.resolution == resolution)
    }
}

/// Identity residuals and inequality margins are tracked; an inequality
/// margin that converges to zero signals an equality case.
fn studied_residual(r: &VerificationReport) -> Option<f64> {
    match r.kind {
        CheckKind::Identity | CheckKind::Inequality => Some(r.margin.abs()),
        CheckKind::Condition | CheckKind::Measurement => None,
    }
}

pub fn least_squares_order(spacings: &[f64], residuals: &[f64]) -> Option<f64> {
    if spacings.len() < 2 || spacings.len() != residuals.len() {
        return None;
    }
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.max(EXACT_FLOOR).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn fit_orders(runs: &[StudyRun]) -> Vec<OrderFit> {
    let Some(first) = runs.first() else { return Vec::new() };
    first
        .reports
        .iter()
        .filter(|r| studied_residual(r).is_some())
        .filter_map(|r| {
            let mut spacings = Vec::new();
            let mut residuals = Vec::new();
            for run in runs {
                let value = run.report(&r.name).and_then(studied_residual)?;
                spacings.push(run.spacing);
                residuals.push(value);
            }
            let exact = residuals.iter().all(|&v| v <= EXACT_FLOOR);
            let order = if exact { None } else { least_squares_order(&spacings, &residuals) };
            Some(OrderFit { check: r.name.clone(), spacings, residuals, order, exact })
        })
        .collect()
}

pub fn validate_resolutions(resolutions: &[usize]) -> Result<(), ConfigError> {
    if resolutions.len() < 3 {
        return Err(ConfigError::new("resolutions", "a study needs at least three resolutions"));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new("resolutions", "resolutions must be strictly increasing"));
    }
    Ok(())
}

/// Runs every resolution in order. A failing run stops the study; the runs
/// before it are kept and fitted.
pub fn run_study(cfg: &ScenarioConfig, resolutions: &[usize], opts: &RunOptions) -> Result<StudyReport, LabError> {
    validate_resolutions(resolutions)?;
    let base = opts.out_dir.clone().unwrap_or_else(|| default_out_dir(cfg));
    let mut runs = Vec::new();
    let mut aborted = None;
    for &n in resolutions {
        let run_cfg = cfg.with_resolution(n);
        let run_opts = RunOptions { out_dir: Some(base.join(format!("n{n}"))), ..opts.clone() };
        match run_scenario(&run_cfg, &run_opts) {
            Ok(out) => {
                let spacing = out.analysis.grid().spacing().iter().copied().fold(0.0, f64::max);
                runs.push(StudyRun { resolution: n, spacing, reports: out.document.reports, manifest: out.manifest });
            }
            Err(e) => {
                aborted = Some(e);
                break;
            }
        }
    }
    let fits = fit_orders(&runs);
    let mut report = StudyReport {
        scenario: cfg.name.clone(),
        resolutions: resolutions.to_vec(),
        runs,
        fits,
        aborted,
        out_dir: None,
    };
    if opts.write {
        std::fs::create_dir_all(&base).map_err(|e| LabError::io(&base, e))?;
        let path = base.join("study.csv");
        std::fs::write(&path, study_csv(&report)).map_err(|e| LabError::io(&path, e))?;
        report.out_dir = Some(base);
    }
    Ok(report)
}

#[derive(Serialize)]
struct StudyRow<'a> {
    check: &'a str,
    resolution: usize,
    spacing: f64,
    residual: f64,
    pairwise_order: Option<f64>,
    fitted_order: Option<f64>,
    exact: bool,
}

/// One row per (check, resolution); the pairwise order compares with the
/// previous resolution.
pub fn study_csv(report: &StudyReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for fit in &report.fits {
        for (k, run) in report.runs.iter().enumerate() {
            let pairwise = (k > 0 && !fit.exact)
                .then(|| least_squares_order(&fit.spacings[k - 1..=k], &fit.residuals[k - 1..=k]))
                .flatten();
            w.serialize(StudyRow {
                check: &fit.check,
                resolution: run.resolution,
                spacing: fit.spacings[k],
                residual: fit.residuals[k],
                pairwise_order: pairwise,
                fitted_order: fit.order,
                exact: fit.exact,
            })
            .expect("in-memory csv");
        }
    }
    w.into_inner().expect("in-memory csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_fit_recovers_power_law() {
        let h = [0.1, 0.05, 0.025];
        let r: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((least_squares_order(&h, &r).unwrap() - 2.0).abs() < 1e-12);
        let r: Vec<f64> = h.iter().map(|h: &f64| 0.5 * h.powf(1.5)).collect();
        assert!((least_squares_order(&h, &r).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn resolution_ladder_is_checked() {
        assert!(validate_resolutions(&[16, 32]).is_err());
        assert!(validate_resolutions(&[16, 32, 32]).is_err());
        assert!(validate_resolutions(&[16, 24, 32]).is_ok());
    }

    #[test]
    fn roundoff_residuals_are_flagged_exact() {
        let manifest = RunManifest {
            scenario: "s".into(),
            version: "0".into(),
            config_hash: String::new(),
            pass: true,
            exit_code: 0,
            timings: vec![],
            files: vec![],
        };
        let runs: Vec<StudyRun> = [(8, 0.2, 1e-14), (16, 0.1, 3e-15), (32, 0.05, 2e-14)]
            .iter()
            .map(|&(n, h, r)| StudyRun {
                resolution: n,
                spacing: h,
                reports: vec![
                    VerificationReport::identity("exact", 0.0, 0.0, r, 1e-6),
                    VerificationReport::identity("second", 0.0, 0.0, h * h, 1.0),
                    VerificationReport::measurement("ignored", 1.0),
                ],
                manifest: manifest.clone(),
            })
            .collect();
        let fits = fit_orders(&runs);
        assert_eq!(fits.len(), 2);
        assert!(fits[0].exact && fits[0].order.is_none());
        assert!((fits[1].order.unwrap() - 2.0).abs() < 1e-9);
    }
}
