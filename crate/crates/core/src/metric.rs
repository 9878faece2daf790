//! Metric fields and their finite-difference curvature.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fd;
use crate::grid::{Grid, ScalarField, SymTensorField};
use crate::math;
use crate::tensor::{Sym3, Vec3};

/// Analytic metric families evaluated at grid nodes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum MetricSpec {
    Flat,
    Diagonal { xx: Expr, yy: Expr, zz: Expr },
    /// `g = φ⁴ δ`.
    Conformal { phi: Expr },
}

impl MetricSpec {
    pub fn eval(&self, p: &Vec3) -> Sym3 {
        match self {
            MetricSpec::Flat => Sym3::IDENTITY,
            MetricSpec::Diagonal { xx, yy, zz } => Sym3::diag(xx.eval(p), yy.eval(p), zz.eval(p)),
            MetricSpec::Conformal { phi } => {
                let f = math::powi(phi.eval(p), 4);
                Sym3::diag(f, f, f)
            }
        }
    }
}

/// A metric with everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricData {
    pub g: SymTensorField,
    pub g_inv: SymTensorField,
    pub sqrt_det: ScalarField,
    /// `christoffel[n][k]` holds `Γ^k_{ij}` at node `n`.
    pub christoffel: Vec<[Sym3; 3]>,
    pub ricci: SymTensorField,
    pub scalar_curv: ScalarField,
}

pub fn build_metric(grid: &Grid, spec: &MetricSpec) -> Result<MetricData> {
    let values = (0..grid.len()).map(|n| spec.eval(&grid.position(n))).collect();
    metric_from_values(SymTensorField::new(*grid, values)?)
}

/// Derive inverse, volume density, Christoffel symbols and curvature from
/// tabulated metric components.
pub fn metric_from_values(g: SymTensorField) -> Result<MetricData> {
    let grid = g.grid;
    for (n, gn) in g.values.iter().enumerate() {
        if !gn.leading_minors().iter().all(|&m| m > 0.0) {
            return Err(Error::NotPositiveDefinite { node: grid.coords(n) });
        }
    }
    let g_inv: Vec<Sym3> = g.values.iter().map(Sym3::inverse).collect();
    let sqrt_det: Vec<f64> = g.values.iter().map(|v| math::sqrt(v.det())).collect();

    // dg[n][l] = ∂_l g at node n
    let comps: Vec<Vec<f64>> = (0..6).map(|c| g.component(c)).collect();
    let dg: Vec<[Sym3; 3]> = (0..grid.len())
        .map(|n| {
            core::array::from_fn(|l| {
                Sym3(core::array::from_fn(|c| fd::d1(&grid, n, l, |i| comps[c][i])))
            })
        })
        .collect();

    let christoffel: Vec<[Sym3; 3]> = (0..grid.len())
        .map(|n| {
            let d = &dg[n];
            // Γ_{lij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
            let lower = |l: usize, i: usize, j: usize| {
                0.5 * (d[i].get(j, l) + d[j].get(i, l) - d[l].get(i, j))
            };
            let inv = &g_inv[n];
            core::array::from_fn(|k| {
                Sym3::from_fn(|i, j| (0..3).map(|l| inv.get(k, l) * lower(l, i, j)).sum())
            })
        })
        .collect();

    let ricci = ricci_from_christoffel(&grid, &christoffel);
    let scalar_curv: Vec<f64> =
        ricci.iter().zip(&g_inv).map(|(r, inv)| r.trace_with(inv)).collect();

    Ok(MetricData {
        g_inv: SymTensorField { grid, values: g_inv },
        sqrt_det: ScalarField { grid, values: sqrt_det },
        christoffel,
        ricci: SymTensorField { grid, values: ricci },
        scalar_curv: ScalarField { grid, values: scalar_curv },
        g,
    })
}

/// `R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik`, with the
/// sign fixed so round spheres have positive scalar curvature.
fn ricci_from_christoffel(grid: &Grid, gamma: &[[Sym3; 3]]) -> Vec<Sym3> {
    // v[n][i] = Γ^k_{ik}
    let v: Vec<Vec3> = gamma
        .iter()
        .map(|gm| core::array::from_fn(|i| (0..3).map(|k| gm[k].get(i, k)).sum()))
        .collect();
    (0..grid.len())
        .map(|n| {
            let gm = &gamma[n];
            Sym3::from_fn(|i, j| {
                let c = crate::tensor::sym_index(i, j);
                let div: f64 =
                    (0..3).map(|k| fd::d1(grid, n, k, |m| gamma[m][k].0[c])).sum();
                let dv = 0.5
                    * (fd::d1(grid, n, j, |m| v[m][i]) + fd::d1(grid, n, i, |m| v[m][j]));
                let mut quad = 0.0;
                for l in 0..3 {
                    quad += v[n][l] * gm[l].get(i, j);
                    for k in 0..3 {
                        quad -= gm[k].get(j, l) * gm[l].get(i, k);
                    }
                }
                div - dv + quad
            })
        })
        .collect()
}

impl MetricData {
    pub fn grid(&self) -> &Grid {
        &self.g.grid
    }

    /// Raise a covector at `node`.
    #[inline]
    pub fn raise(&self, node: usize, cov: &Vec3) -> Vec3 {
        self.g_inv.values[node].apply(cov)
    }

    /// Lower a vector at `node`.
    #[inline]
    pub fn lower(&self, node: usize, v: &Vec3) -> Vec3 {
        self.g.values[node].apply(v)
    }

    #[inline]
    pub fn inner(&self, node: usize, a: &Vec3, b: &Vec3) -> f64 {
        self.g.values[node].bilinear(a, b)
    }

    #[inline]
    pub fn norm(&self, node: usize, a: &Vec3) -> f64 {
        math::sqrt(self.inner(node, a, a).max(0.0))
    }

    /// `Γ^k_ij a^i b^j` for each `k`.
    #[inline]
    pub fn christoffel_contract(&self, node: usize, a: &Vec3, b: &Vec3) -> Vec3 {
        let gm = &self.christoffel[node];
        core::array::from_fn(|k| gm[k].bilinear(a, b))
    }
}
