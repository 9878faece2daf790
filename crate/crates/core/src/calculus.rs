//! Covariant derivatives of node fields.

use alloc::vec::Vec;

use crate::fd;
use crate::grid::{ScalarField, SymTensorField, VectorField};
use crate::initial_data::InitialDataFields;
use crate::math;
use crate::metric::MetricData;
use crate::tensor::{Sym3, Vec3};

/// Coordinate partials `∂_i u` (a covector field).
pub fn partials(u: &ScalarField) -> VectorField {
    VectorField { grid: u.grid, values: fd::grad(&u.grid, &u.values) }
}

/// Contravariant gradient `∇u^i = g^{ij} ∂_j u` and its length `|∇u|_g`.
pub fn gradient(u: &ScalarField, m: &MetricData) -> (VectorField, ScalarField) {
    let du = partials(u);
    let grid = u.grid;
    let mut up = Vec::with_capacity(grid.len());
    let mut norm = Vec::with_capacity(grid.len());
    for (n, d) in du.values.iter().enumerate() {
        let v = m.raise(n, d);
        norm.push(math::sqrt(crate::tensor::dot(&v, d).max(0.0)));
        up.push(v);
    }
    (VectorField { grid, values: up }, ScalarField { grid, values: norm })
}

/// `∇²_ij u = ∂_i ∂_j u − Γ^k_ij ∂_k u`.
pub fn hessian(u: &ScalarField, m: &MetricData) -> SymTensorField {
    let grid = u.grid;
    let second = fd::second_partials(&grid, &u.values);
    let du = fd::grad(&grid, &u.values);
    let values = (0..grid.len())
        .map(|n| {
            let gm = &m.christoffel[n];
            let d = &du[n];
            Sym3(core::array::from_fn(|c| {
                second[n].0[c] - (gm[0].0[c] * d[0] + gm[1].0[c] * d[1] + gm[2].0[c] * d[2])
            }))
        })
        .collect();
    SymTensorField { grid, values }
}

/// Spacetime Hessian `∇²u + p |∇u|`.
pub fn spacetime_hessian(
    u: &ScalarField,
    idf: &InitialDataFields,
    m: &MetricData,
) -> SymTensorField {
    let hess = hessian(u, m);
    let (_, norm) = gradient(u, m);
    spacetime_hessian_from(&hess, &idf.p, &norm)
}

pub fn spacetime_hessian_from(
    hess: &SymTensorField,
    p: &SymTensorField,
    grad_norm: &ScalarField,
) -> SymTensorField {
    let values = hess
        .values
        .iter()
        .zip(&p.values)
        .zip(&grad_norm.values)
        .map(|((h, p), &g)| *h + p.scale(g))
        .collect();
    SymTensorField { grid: hess.grid, values }
}

/// Pointwise Laplacian `g^{ij} ∇²_ij u`, defined at every node.
pub fn laplacian_pointwise(u: &ScalarField, m: &MetricData) -> ScalarField {
    let hess = hessian(u, m);
    trace(&hess, m)
}

pub fn trace(t: &SymTensorField, m: &MetricData) -> ScalarField {
    let values =
        t.values.iter().zip(&m.g_inv.values).map(|(t, inv)| t.trace_with(inv)).collect();
    ScalarField { grid: t.grid, values }
}

/// `div X = (1/√g) ∂_i (√g X^i)`.
pub fn divergence(x: &VectorField, m: &MetricData) -> ScalarField {
    let grid = x.grid;
    let sg = &m.sqrt_det.values;
    let values = (0..grid.len())
        .map(|n| {
            let s: f64 = (0..3).map(|i| fd::d1(&grid, n, i, |k| sg[k] * x.values[k][i])).sum();
            s / sg[n]
        })
        .collect();
    ScalarField { grid, values }
}

/// `(∇X)[n][j][i] = ∇_j X^i = ∂_j X^i + Γ^i_jk X^k`.
pub fn covariant_derivative(x: &VectorField, m: &MetricData) -> Vec<[Vec3; 3]> {
    let grid = x.grid;
    (0..grid.len())
        .map(|n| {
            let gm = &m.christoffel[n];
            let xv = &x.values[n];
            core::array::from_fn(|j| {
                core::array::from_fn(|i| {
                    let d = fd::d1(&grid, n, j, |k| x.values[k][i]);
                    let corr: f64 = (0..3).map(|k| gm[i].get(j, k) * xv[k]).sum();
                    d + corr
                })
            })
        })
        .collect()
}

/// Unit normal field `ν = ∇u/|∇u|`; zero where `|∇u| <= floor`.
pub fn unit_normal(grad_up: &VectorField, grad_norm: &ScalarField, floor: f64) -> VectorField {
    let values = grad_up
        .values
        .iter()
        .zip(&grad_norm.values)
        .map(|(v, &g)| if g > floor { crate::tensor::scale(v, 1.0 / g) } else { [0.0; 3] })
        .collect();
    VectorField { grid: grad_up.grid, values }
}
