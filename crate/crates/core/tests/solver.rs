//! Properties of the regularized Picard solver.

use stlab_core::expr::Expr;
use stlab_core::initial_data::{energy_momentum, InitialDataFields, PSpec};
use stlab_core::laplacian::{BoundaryCondition, FaceCondition};
use stlab_core::solver::{solve, SolveResult, SolverConfig};
use stlab_core::{build_metric, Error, Face, Grid, MetricData, MetricSpec, ScalarField};

const E: f64 = std::f64::consts::E;

fn flat(n: usize, lower: [f64; 3]) -> (Grid, MetricData) {
    let upper = [lower[0] + 1.0, lower[1] + 1.0, lower[2] + 1.0];
    let grid = Grid::from_box([n; 3], lower, upper).unwrap();
    (grid, build_metric(&grid, &MetricSpec::Flat).unwrap())
}

fn data(m: &MetricData, h: f64) -> InitialDataFields {
    energy_momentum(m, &PSpec::Zero.build(m), &ScalarField::constant(*m.grid(), h))
}

/// `(e^{x − x0} − 1)/(e − 1)`, the 1D solution of `u'' = u'` with u(x0) = 0, u(x0 + 1) = 1.
fn quasi_expr(x0: f64) -> Expr {
    Expr::sum([Expr::sum([Expr::X, Expr::Const(-x0)]).exp(), Expr::Const(-1.0)]).scaled(1.0 / (E - 1.0))
}

fn quasi(n: usize, x0: f64) -> (Grid, SolveResult) {
    let (grid, m) = flat(n, [x0, 0.0, 0.0]);
    let bc = BoundaryCondition::dirichlet_all(quasi_expr(x0));
    (grid, solve(&m, &data(&m, 1.0), &bc, &SolverConfig::default()).unwrap())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn quasi_one_dimensional_solution_matches_closed_form() {
    let (grid, res) = quasi(17, 0.0);
    assert!(res.converged && res.delta_final == 0.0);
    let exact: Vec<f64> = (0..grid.len()).map(|k| (grid.position(k)[0].exp() - 1.0) / (E - 1.0)).collect();
    let err = max_diff(&res.u.values, &exact);
    assert!(err < 5e-5, "max error {err}");
    // Each δ stage moves closer to the δ = 0 solution.
    let stage_errors: Vec<f64> = res.stage_solutions.iter().map(|s| max_diff(&s.values, &exact)).collect();
    assert!(stage_errors.windows(2).all(|w| w[1] < w[0]), "{stage_errors:?}");
    assert!(err <= stage_errors[stage_errors.len() - 1]);
}

#[test]
fn shifting_the_box_shifts_the_solution() {
    let (_, a) = quasi(13, 0.0);
    let (_, b) = quasi(13, 0.75);
    assert!(max_diff(&a.u.values, &b.u.values) < 1e-9);
}

#[test]
fn equation_is_invariant_under_adding_constants_and_positive_scaling() {
    let (_, m) = flat(13, [0.0; 3]);
    let idf = data(&m, 1.0);
    let cfg = SolverConfig::default();
    let bc = BoundaryCondition::dirichlet_all(quasi_expr(0.0));
    let base = solve(&m, &idf, &bc, &cfg).unwrap().u;
    let shifted = solve(&m, &idf, &bc.shifted(2.5), &cfg).unwrap().u;
    let moved: Vec<f64> = base.values.iter().map(|v| v + 2.5).collect();
    assert!(max_diff(&shifted.values, &moved) < 1e-8);
    let scaled_bc = BoundaryCondition::dirichlet_all(quasi_expr(0.0).scaled(3.0));
    let scaled = solve(&m, &idf, &scaled_bc, &cfg).unwrap().u;
    let tripled: Vec<f64> = base.values.iter().map(|v| 3.0 * v).collect();
    assert!(max_diff(&scaled.values, &tripled) < 1e-8);
}

#[test]
fn linear_case_superposes() {
    // With h = P = 0 the equation is Laplace's; solutions add.
    let (_, m) = flat(11, [0.0; 3]);
    let idf = data(&m, 0.0);
    let cfg = SolverConfig::default();
    let a = Expr::X;
    let b = Expr::sum([Expr::Y.powi(2), Expr::Z.powi(2).scaled(-1.0)]);
    let ua = solve(&m, &idf, &BoundaryCondition::dirichlet_all(a.clone()), &cfg).unwrap().u;
    let ub = solve(&m, &idf, &BoundaryCondition::dirichlet_all(b.clone()), &cfg).unwrap().u;
    let uab = solve(&m, &idf, &BoundaryCondition::dirichlet_all(Expr::sum([a, b])), &cfg).unwrap().u;
    let sum: Vec<f64> = ua.values.iter().zip(&ub.values).map(|(x, y)| x + y).collect();
    assert!(max_diff(&uab.values, &sum) < 1e-9);
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let (_, a) = quasi(11, 0.0);
    let (_, b) = quasi(11, 0.0);
    assert_eq!(a.u.values, b.u.values);
    assert_eq!(a.stages, b.stages);
}

#[test]
fn neumann_faces_reproduce_one_dimensional_profile() {
    let (grid, m) = flat(13, [0.0; 3]);
    let mut bc = BoundaryCondition::dirichlet_all(quasi_expr(0.0));
    for f in [Face::YLo, Face::YHi, Face::ZLo, Face::ZHi] {
        bc.faces[f.index()] = FaceCondition::Neumann;
    }
    let res = solve(&m, &data(&m, 1.0), &bc, &SolverConfig::default()).unwrap();
    let exact: Vec<f64> = (0..grid.len()).map(|k| (grid.position(k)[0].exp() - 1.0) / (E - 1.0)).collect();
    assert!(max_diff(&res.u.values, &exact) < 2e-4);
}

#[test]
fn exhausted_iteration_budget_is_reported() {
    let (_, m) = flat(9, [0.0; 3]);
    let cfg = SolverConfig { picard_max_iters: 1, ..Default::default() };
    let bc = BoundaryCondition::dirichlet_all(quasi_expr(0.0));
    match solve(&m, &data(&m, 1.0), &bc, &cfg) {
        Err(Error::PicardStalled { iterations, .. }) => assert_eq!(iterations, 1),
        other => panic!("expected a stall, got {other:?}"),
    }
}
