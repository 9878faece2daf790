//! Randomized invariants.

use std::collections::BTreeMap;

use approx::assert_relative_eq;
use proptest::prelude::*;
use stlab_core::calculus;
use stlab_core::expr::Expr;
use stlab_core::levelset::{extract_level_set, LevelSetFields};
use stlab_core::marching::triangulate;
use stlab_core::report::VerificationReport;
use stlab_core::tensor::Sym3;
use stlab_core::{build_metric, Grid, MetricSpec, ScalarField};

fn spd(b: [f64; 9]) -> Sym3 {
    // B Bᵀ + I
    Sym3::from_fn(|i, j| (0..3).map(|k| b[3 * i + k] * b[3 * j + k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spd_inverse_is_inverse(b in prop::array::uniform9(-2.0f64..2.0)) {
        let g = spd(b);
        let inv = g.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let prod: f64 = (0..3).map(|k| g.get(i, k) * inv.get(k, j)).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod - expected).abs() < 1e-10, "({i},{j}) = {prod}");
            }
        }
        prop_assert!(g.leading_minors().iter().all(|&m| m > 0.0));
    }

    #[test]
    fn differences_are_exact_on_quadratics(
        c in prop::array::uniform6(-3.0f64..3.0),
        l in prop::array::uniform3(-3.0f64..3.0),
    ) {
        let q = Sym3(c);
        let grid = Grid::from_box([7, 8, 9], [-0.5, 0.0, 0.25], [0.5, 1.5, 1.0]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Flat).unwrap();
        let u = ScalarField::from_fn(grid, |p| q.bilinear(&p, &p) + l[0] * p[0] + l[1] * p[1] + l[2] * p[2]);
        let du = calculus::partials(&u);
        let hess = calculus::hessian(&u, &m);
        for n in 0..grid.len() {
            let p = grid.position(n);
            let grad = q.apply(&p);
            for a in 0..3 {
                prop_assert!((du.values[n][a] - (2.0 * grad[a] + l[a])).abs() < 1e-9);
            }
            for k in 0..6 {
                prop_assert!((hess.values[n].0[k] - 2.0 * c[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn marched_spheres_are_closed(
        cx in 0.4f64..0.6, cy in 0.4f64..0.6, cz in 0.4f64..0.6, r in 0.12f64..0.3,
    ) {
        let grid = Grid::from_box([13; 3], [0.0; 3], [1.0; 3]).unwrap();
        let u = ScalarField::from_fn(grid, |p| {
            ((p[0] - cx).powi(2) + (p[1] - cy).powi(2) + (p[2] - cz).powi(2)).sqrt()
        });
        let mesh = triangulate(&grid, &u.values, r);
        prop_assert!(!mesh.triangles.is_empty());
        let mut edges: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        prop_assert!(edges.values().all(|&c| c == 2));
    }

    #[test]
    fn affine_relabelling_preserves_geometry(a in 0.2f64..5.0, b in -3.0f64..3.0) {
        let grid = Grid::from_box([11; 3], [0.0; 3], [1.0; 3]).unwrap();
        let phi = Expr::sum([Expr::Const(1.0), Expr::X.scaled(0.2)]);
        let m = build_metric(&grid, &MetricSpec::Conformal { phi }).unwrap();
        let u = ScalarField::from_fn(grid, |p| (p[0] - 0.4).powi(2) + (p[1] - 0.5).powi(2) + 0.5 * p[2]);
        let v = u.map(|x| a * x + b);
        let level = 0.3;
        let s = extract_level_set(&LevelSetFields::new(&u, &m), &m, level).unwrap();
        let t = extract_level_set(&LevelSetFields::new(&v, &m), &m, a * level + b).unwrap();
        assert_relative_eq!(s.total_area(), t.total_area(), max_relative = 1e-9);
        let hs = s.integrate(|tr| tr.mean_curvature);
        let ht = t.integrate(|tr| tr.mean_curvature);
        assert_relative_eq!(hs, ht, max_relative = 1e-7, epsilon = 1e-9);
    }

    #[test]
    fn looser_tolerance_never_fails_more(
        residual in -1.0f64..1.0, tol in 0.0f64..0.5, lhs in -1.0f64..1.0, rhs in -1.0f64..1.0,
        f in 1.0f64..10.0,
    ) {
        let id = VerificationReport::identity("i", 0.0, 0.0, residual, tol);
        prop_assert!(!id.pass || id.clone().rescaled(f).pass);
        let ineq = VerificationReport::inequality("q", lhs, rhs, tol, 0.0);
        prop_assert!(!ineq.pass || ineq.clone().rescaled(f).pass);
        prop_assert_eq!(ineq.clone().rescaled(1.0).pass, ineq.pass);
    }

    #[test]
    fn sums_evaluate_termwise(
        c in prop::array::uniform3(-2.0f64..2.0),
        p in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let terms = [Expr::X.scaled(c[0]), Expr::Y.sin().scaled(c[1]), Expr::Z.powi(3).scaled(c[2])];
        let total = Expr::sum(terms.clone()).eval(&p);
        let parts: f64 = terms.iter().map(|t| t.eval(&p)).sum();
        prop_assert!((total - parts).abs() < 1e-12);
        let expected = c[0] * p[0] + c[1] * p[1].sin() + c[2] * p[2].powi(3);
        prop_assert!((total - expected).abs() < 1e-12);
    }
}
