//! δ-regularized Picard iteration for `Δu + P|∇u| = h|∇u|`.
//!
//! Each step freezes the gradient term and solves the linear problem
//! `Δû = (h − P) √(|∇u_k|² + δ)`, then relaxes `u ← u + ω(û − u)`.

use alloc::vec::Vec;

use crate::calculus;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::initial_data::InitialDataFields;
use crate::laplacian::{assemble_laplacian, laplacian_divergence, BoundaryCondition, DiscreteLaplacian};
use crate::math;
use crate::metric::MetricData;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    pub delta_schedule: Vec<f64>,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub linear_tol: f64,
    pub linear_max_iters: usize,
    pub damping: f64,
    /// Finish with an unregularized (δ = 0) stage when `|∇u|` is bounded
    /// well away from zero at interior nodes.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta_schedule: alloc::vec![1e-2, 1e-3, 1e-4, 1e-6],
            picard_tol: 1e-8,
            picard_max_iters: 200,
            linear_tol: 1e-12,
            linear_max_iters: 20_000,
            damping: 0.8,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.delta_schedule;
        if s.is_empty() {
            return Err(Error::InvalidSolverConfig("delta_schedule is empty"));
        }
        if s.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidSolverConfig("delta_schedule must be strictly decreasing"));
        }
        if !(s[s.len() - 1] > 0.0) {
            return Err(Error::InvalidSolverConfig("delta_schedule entries must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidSolverConfig("damping must lie in (0, 1]"));
        }
        if !(self.picard_tol > 0.0) || !(self.linear_tol > 0.0) {
            return Err(Error::InvalidSolverConfig("tolerances must be positive"));
        }
        if self.picard_max_iters == 0 || self.linear_max_iters == 0 {
            return Err(Error::InvalidSolverConfig("iteration caps must be positive"));
        }
        Ok(())
    }

    /// Bound on the interior residual that a converged run must meet.
    pub fn residual_tolerance(&self) -> f64 {
        10.0 * self.picard_tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub delta: f64,
    pub iterations: usize,
    pub updates: Vec<f64>,
    /// Max interior `|u_δ − u_{previous stage}|`.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub u: ScalarField,
    /// `Δu + (P − h)|∇u|` at interior nodes, zero on the boundary.
    pub residual_field: ScalarField,
    pub iterations: usize,
    pub converged: bool,
    pub delta_final: f64,
    pub stages: Vec<StageReport>,
    /// Iterate at the end of each scheduled δ (not including the polish stage).
    pub stage_solutions: Vec<ScalarField>,
}

impl SolveResult {
    pub fn max_interior_residual(&self) -> f64 {
        max_interior_abs(&self.residual_field)
    }
}

pub fn max_interior_abs(f: &ScalarField) -> f64 {
    (0..f.grid.len())
        .filter(|&n| !f.grid.is_boundary(n))
        .map(|n| math::abs(f.values[n]))
        .fold(0.0, math::max)
}

/// Pointwise `Δu + P|∇u| − h|∇u|` at interior nodes with the solver's stencils.
pub fn residual(u: &ScalarField, m: &MetricData, idf: &InitialDataFields) -> ScalarField {
    let lap = laplacian_divergence(u, m);
    let (_, norm) = calculus::gradient(u, m);
    let grid = u.grid;
    let values = (0..grid.len())
        .map(|n| {
            if grid.is_boundary(n) {
                0.0
            } else {
                lap.values[n] + (idf.p_trace.values[n] - idf.h.values[n]) * norm.values[n]
            }
        })
        .collect();
    ScalarField { grid, values }
}

pub fn solve(
    m: &MetricData,
    idf: &InitialDataFields,
    bc: &BoundaryCondition,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    solve_from(m, idf, bc, cfg, None)
}

/// As [`solve`], starting Picard from `initial` instead of the harmonic extension
/// of the boundary data.
pub fn solve_from(
    m: &MetricData,
    idf: &InitialDataFields,
    bc: &BoundaryCondition,
    cfg: &SolverConfig,
    initial: Option<ScalarField>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let op = assemble_laplacian(m, bc)?;
    let grid = *m.grid();
    let coeff: Vec<f64> =
        (0..grid.len()).map(|n| idf.h.values[n] - idf.p_trace.values[n]).collect();

    let mut u = match initial {
        Some(u0) => u0,
        None => {
            let zero = ScalarField::constant(grid, 0.0);
            op.solve(&zero, None, cfg.linear_tol, cfg.linear_max_iters)?.0
        }
    };

    let mut stages = Vec::new();
    let mut stage_solutions = Vec::new();
    let mut total = 0;
    let n_sched = cfg.delta_schedule.len();
    for (si, &delta) in cfg.delta_schedule.iter().enumerate() {
        let final_stage = si + 1 == n_sched && !cfg.polish;
        let start = u.clone();
        let (next, report) = picard_stage(&op, m, idf, &coeff, u, delta, cfg, final_stage)?;
        u = next;
        total += report.iterations;
        stages.push(StageReport { change: max_interior_diff(&start, &u), ..report });
        stage_solutions.push(u.clone());
    }
    let mut delta_final = cfg.delta_schedule[n_sched - 1];
    if cfg.polish {
        let (_, norm) = calculus::gradient(&u, m);
        let min_grad = (0..grid.len())
            .filter(|&n| !grid.is_boundary(n))
            .map(|n| norm.values[n])
            .fold(f64::INFINITY, math::min);
        let needs_regularization = min_grad < 10.0 * math::sqrt(delta_final);
        let active = coeff.iter().any(|&c| c != 0.0);
        if !needs_regularization && active {
            let start = u.clone();
            let (next, report) = picard_stage(&op, m, idf, &coeff, u, 0.0, cfg, true)?;
            u = next;
            total += report.iterations;
            stages.push(StageReport { change: max_interior_diff(&start, &u), ..report });
            delta_final = 0.0;
        }
    }
    let residual_field = residual(&u, m, idf);
    let converged = max_interior_abs(&residual_field) <= cfg.residual_tolerance();
    Ok(SolveResult {
        u,
        residual_field,
        iterations: total,
        converged,
        delta_final,
        stages,
        stage_solutions,
    })
}

#[allow(clippy::too_many_arguments)]
fn picard_stage(
    op: &DiscreteLaplacian,
    m: &MetricData,
    idf: &InitialDataFields,
    coeff: &[f64],
    mut u: ScalarField,
    delta: f64,
    cfg: &SolverConfig,
    require_residual: bool,
) -> Result<(ScalarField, StageReport)> {
    let grid = u.grid;
    let mut updates: Vec<f64> = Vec::new();
    let mut tight = false;
    for it in 1..=cfg.picard_max_iters {
        // Early iterates move a lot; solving them to full accuracy is wasted work.
        // Convergence is only accepted after a full-accuracy solve.
        let tol = match updates.last() {
            _ if tight => cfg.linear_tol,
            Some(&last) => math::max(cfg.linear_tol, math::min(1e-6, 1e-2 * last)),
            None => math::max(cfg.linear_tol, 1e-6),
        };
        let exact = tol <= cfg.linear_tol;
        let (_, norm) = calculus::gradient(&u, m);
        let source = ScalarField {
            grid,
            values: (0..grid.len())
                .map(|n| coeff[n] * math::sqrt(norm.values[n] * norm.values[n] + delta))
                .collect(),
        };
        let (target, _) = op.solve(&source, Some(&u), tol, cfg.linear_max_iters)?;
        let mut update = 0.0;
        for (ui, ti) in u.values.iter_mut().zip(&target.values) {
            let step = cfg.damping * (ti - *ui);
            *ui += step;
            update = math::max(update, math::abs(step));
        }
        updates.push(update);
        if update < cfg.picard_tol {
            if !exact {
                tight = true;
                continue;
            }
            let done = !require_residual
                || max_interior_abs(&residual(&u, m, idf)) <= cfg.residual_tolerance();
            if done {
                return Ok((u, StageReport { delta, iterations: it, updates, change: 0.0 }));
            }
        }
    }
    Err(Error::PicardStalled { delta, iterations: cfg.picard_max_iters, updates })
}

fn max_interior_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    (0..a.grid.len())
        .filter(|&n| !a.grid.is_boundary(n))
        .map(|n| math::abs(a.values[n] - b.values[n]))
        .fold(0.0, math::max)
}

/// Max difference between the default solve and one started from a bumped
/// initial iterate. Used to report sensitivity where uniqueness is unknown.
pub fn initial_iterate_sensitivity(
    m: &MetricData,
    idf: &InitialDataFields,
    bc: &BoundaryCondition,
    cfg: &SolverConfig,
    reference: &ScalarField,
    amplitude: f64,
) -> Result<f64> {
    let grid = *m.grid();
    let lo = grid.origin();
    let hi = grid.upper();
    let bumped = ScalarField {
        grid,
        values: (0..grid.len())
            .map(|n| {
                let p = grid.position(n);
                let bump: f64 = (0..3)
                    .map(|a| {
                        let s = (p[a] - lo[a]) / (hi[a] - lo[a]);
                        math::sin(math::PI * s)
                    })
                    .product();
                reference.values[n] + amplitude * bump
            })
            .collect(),
    };
    let other = solve_from(m, idf, bc, cfg, Some(bumped))?;
    Ok(max_interior_diff(reference, &other.u))
}
