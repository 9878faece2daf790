//! The tensor `p`, its trace, the prescribing function `h`, and the
//! constraint quantities `2μ = R + P² − |p|²`, `J = div(p − P g)`.

use alloc::vec::Vec;

use crate::calculus;
use crate::expr::Expr;
use crate::fd;
use crate::grid::{Grid, ScalarField, SymTensorField, VectorField};
use crate::metric::MetricData;
use crate::tensor::Sym3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum PSpec {
    Zero,
    /// `p = c g`.
    ScaledMetric { c: f64 },
    Components { xx: Expr, xy: Expr, xz: Expr, yy: Expr, yz: Expr, zz: Expr },
}

impl PSpec {
    pub fn build(&self, m: &MetricData) -> SymTensorField {
        let grid = *m.grid();
        let values = match self {
            PSpec::Zero => alloc::vec![Sym3::ZERO; grid.len()],
            PSpec::ScaledMetric { c } => m.g.values.iter().map(|g| g.scale(*c)).collect(),
            PSpec::Components { xx, xy, xz, yy, yz, zz } => (0..grid.len())
                .map(|n| {
                    let p = grid.position(n);
                    Sym3([xx.eval(&p), xy.eval(&p), xz.eval(&p), yy.eval(&p), yz.eval(&p), zz.eval(&p)])
                })
                .collect(),
        };
        SymTensorField { grid, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum HSpec {
    Constant { value: f64 },
    Expression { expr: Expr },
    /// `h = P + Δu/|∇u|` for a given `u`, so that `u` solves the equation.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialDataFields {
    pub p: SymTensorField,
    pub p_trace: ScalarField,
    pub h: ScalarField,
    pub mu: ScalarField,
    /// Contravariant momentum density.
    pub j: VectorField,
}

pub fn energy_momentum(m: &MetricData, p: &SymTensorField, h: &ScalarField) -> InitialDataFields {
    let grid = *m.grid();
    let trace: Vec<f64> =
        p.values.iter().zip(&m.g_inv.values).map(|(p, inv)| p.trace_with(inv)).collect();
    let mu: Vec<f64> = (0..grid.len())
        .map(|n| {
            let inv = &m.g_inv.values[n];
            let pn = p.values[n].norm_sq_with(inv);
            0.5 * (m.scalar_curv.values[n] + trace[n] * trace[n] - pn)
        })
        .collect();
    let q: Vec<Sym3> = (0..grid.len()).map(|n| p.values[n] - m.g.values[n].scale(trace[n])).collect();
    let j = covariant_divergence_sym(&grid, &q, m);
    InitialDataFields {
        p: p.clone(),
        p_trace: ScalarField { grid, values: trace },
        h: h.clone(),
        mu: ScalarField { grid, values: mu },
        j,
    }
}

/// Raised divergence `g^{ij} g^{ik} ∇_k q_{ij}` of a symmetric 2-tensor.
fn covariant_divergence_sym(grid: &Grid, q: &[Sym3], m: &MetricData) -> VectorField {
    let values = (0..grid.len())
        .map(|n| {
            let inv = &m.g_inv.values[n];
            let gm = &m.christoffel[n];
            // dq[k] = ∂_k q
            let dq: [Sym3; 3] = core::array::from_fn(|k| {
                Sym3(core::array::from_fn(|c| fd::d1(grid, n, k, |i| q[i].0[c])))
            });
            let qn = &q[n];
            let lower: [f64; 3] = core::array::from_fn(|j| {
                let mut s = 0.0;
                for i in 0..3 {
                    for k in 0..3 {
                        let mut cov = dq[k].get(i, j);
                        for l in 0..3 {
                            cov -= gm[l].get(k, i) * qn.get(l, j) + gm[l].get(k, j) * qn.get(i, l);
                        }
                        s += inv.get(i, k) * cov;
                    }
                }
                s
            });
            inv.apply(&lower)
        })
        .collect();
    VectorField { grid: *grid, values }
}

/// `h = P + Δu/|∇u|`, zero where `|∇u|` vanishes.
pub fn derived_h(u: &ScalarField, m: &MetricData, p: &SymTensorField) -> ScalarField {
    let lap = calculus::laplacian_pointwise(u, m);
    let (_, norm) = calculus::gradient(u, m);
    let values = (0..u.grid.len())
        .map(|n| {
            let trace = p.values[n].trace_with(&m.g_inv.values[n]);
            if norm.values[n] > 0.0 {
                trace + lap.values[n] / norm.values[n]
            } else {
                trace
            }
        })
        .collect();
    ScalarField { grid: u.grid, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_metric, MetricSpec};

    fn flat() -> MetricData {
        let grid = Grid::from_box([6; 3], [0.0; 3], [1.0; 3]).unwrap();
        build_metric(&grid, &MetricSpec::Flat).unwrap()
    }

    #[test]
    fn zero_p_gives_half_scalar_curvature() {
        let grid = Grid::from_box([7; 3], [0.0; 3], [1.0; 3]).unwrap();
        let phi = Expr::sum([Expr::Const(1.0), Expr::X.powi(2)]);
        let m = build_metric(&grid, &MetricSpec::Conformal { phi }).unwrap();
        let p = PSpec::Zero.build(&m);
        let idf = energy_momentum(&m, &p, &ScalarField::constant(grid, 0.0));
        for n in 0..grid.len() {
            assert_eq!(idf.mu.values[n], 0.5 * m.scalar_curv.values[n]);
            assert_eq!(idf.j.values[n], [0.0; 3]);
        }
    }

    #[test]
    fn scaled_metric_p_has_closed_form_constraints() {
        let m = flat();
        let c = 0.7;
        let idf = energy_momentum(&m, &PSpec::ScaledMetric { c }.build(&m), &ScalarField::constant(*m.grid(), 0.0));
        for n in 0..m.grid().len() {
            assert!((idf.p_trace.values[n] - 3.0 * c).abs() < 1e-14);
            assert!((idf.mu.values[n] - 3.0 * c * c).abs() < 1e-14);
            assert!(idf.j.values[n].iter().all(|v| v.abs() < 1e-13));
        }
    }
}
