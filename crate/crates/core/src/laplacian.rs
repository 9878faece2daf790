//! Divergence-form Laplace–Beltrami operator `(1/√g) ∂_i(√g g^{ij} ∂_j u)`
//! with boundary rows folded in.
//!
//! Interior rows are scaled by `−√g`, which makes the interior block
//! symmetric positive definite once Dirichlet columns are eliminated.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{BoundaryTag, Face, Grid, ScalarField};
use crate::linsolve::{bicgstab, pcg, CsrMatrix, SolveStats};
use crate::metric::MetricData;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum FaceCondition {
    Dirichlet { value: Expr },
    /// Zero normal flux, `∂u/∂η = 0`.
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    /// Indexed by [`Face::index`].
    pub faces: [FaceCondition; 6],
    /// Node held at zero when no face is Dirichlet.
    pub pin: Option<[usize; 3]>,
}

impl BoundaryCondition {
    pub fn dirichlet_all(value: Expr) -> Self {
        BoundaryCondition {
            faces: core::array::from_fn(|_| FaceCondition::Dirichlet { value: value.clone() }),
            pin: None,
        }
    }

    pub fn face(&self, face: Face) -> &FaceCondition {
        &self.faces[face.index()]
    }

    pub fn has_dirichlet(&self) -> bool {
        self.faces.iter().any(|f| matches!(f, FaceCondition::Dirichlet { .. }))
    }

    pub fn tags(&self) -> [BoundaryTag; 6] {
        core::array::from_fn(|i| match self.faces[i] {
            FaceCondition::Dirichlet { .. } => BoundaryTag::Dirichlet,
            FaceCondition::Neumann => BoundaryTag::Neumann,
        })
    }

    /// `u + c` on every Dirichlet face.
    pub fn shifted(&self, c: f64) -> Self {
        let faces = core::array::from_fn(|i| match &self.faces[i] {
            FaceCondition::Dirichlet { value } => FaceCondition::Dirichlet {
                value: Expr::sum([value.clone(), Expr::Const(c)]),
            },
            FaceCondition::Neumann => FaceCondition::Neumann,
        });
        BoundaryCondition { faces, pin: self.pin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Interior,
    Dirichlet(f64),
    Pinned,
    Neumann(Face),
}

/// Assembled operator plus what is needed to form right-hand sides.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    pub grid: Grid,
    pub matrix: CsrMatrix,
    pub kinds: Vec<NodeKind>,
    /// Contribution of eliminated Dirichlet columns to each row's right-hand side.
    rhs_shift: Vec<f64>,
    sqrt_det: Vec<f64>,
    pub symmetric: bool,
}

/// Coefficients of `√g Δu` at an interior node, as `(node, weight)` pairs.
pub fn interior_stencil(m: &MetricData, node: usize) -> Vec<(usize, f64)> {
    let grid = m.grid();
    let h = grid.spacing();
    let a = |n: usize, i: usize, j: usize| m.sqrt_det.values[n] * m.g_inv.values[n].get(i, j);
    let mut out = Vec::with_capacity(19);
    let mut center = 0.0;
    for i in 0..3 {
        let s = grid.stride(i);
        let ap = 0.5 * (a(node, i, i) + a(node + s, i, i)) / (h[i] * h[i]);
        let am = 0.5 * (a(node, i, i) + a(node - s, i, i)) / (h[i] * h[i]);
        out.push((node + s, ap));
        out.push((node - s, am));
        center -= ap + am;
    }
    out.push((node, center));
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let (si, sj) = (grid.stride(i), grid.stride(j));
            let w = 1.0 / (4.0 * h[i] * h[j]);
            let ap = a(node + si, i, j) * w;
            let am = a(node - si, i, j) * w;
            out.push((node + si + sj, ap));
            out.push((node + si - sj, -ap));
            out.push((node - si + sj, -am));
            out.push((node - si - sj, am));
        }
    }
    out
}

/// First-derivative stencil weights along `axis` at `node` (matches [`crate::fd::d1`]).
fn d1_weights(grid: &Grid, node: usize, axis: usize) -> [(usize, f64); 3] {
    let c = grid.coords(node)[axis];
    let n = grid.dims()[axis];
    let s = grid.stride(axis);
    let h = grid.spacing()[axis];
    if c == 0 {
        [(node, -1.5 / h), (node + s, 2.0 / h), (node + 2 * s, -0.5 / h)]
    } else if c == n - 1 {
        [(node, 1.5 / h), (node - s, -2.0 / h), (node - 2 * s, 0.5 / h)]
    } else {
        [(node + s, 0.5 / h), (node - s, -0.5 / h), (node, 0.0)]
    }
}

fn classify(grid: &Grid, bc: &BoundaryCondition, node: usize) -> NodeKind {
    let faces = Face::ALL.iter().filter(|&&f| grid.on_face(node, f));
    let mut neumann = None;
    for &f in faces {
        match bc.face(f) {
            FaceCondition::Dirichlet { value } => {
                return NodeKind::Dirichlet(value.eval(&grid.position(node)))
            }
            FaceCondition::Neumann => {
                if neumann.is_none() {
                    neumann = Some(f);
                }
            }
        }
    }
    if bc.pin.map(|p| grid.index(p)) == Some(node) {
        return NodeKind::Pinned;
    }
    match neumann {
        Some(f) => NodeKind::Neumann(f),
        None => NodeKind::Interior,
    }
}

pub fn assemble_laplacian(m: &MetricData, bc: &BoundaryCondition) -> Result<DiscreteLaplacian> {
    if !bc.has_dirichlet() && bc.pin.is_none() {
        return Err(Error::SingularOperator);
    }
    let grid = *m.grid();
    let kinds: Vec<NodeKind> = (0..grid.len()).map(|n| classify(&grid, bc, n)).collect();
    let mut rows = Vec::with_capacity(grid.len());
    let mut rhs_shift = vec![0.0; grid.len()];
    let mut symmetric = true;
    for n in 0..grid.len() {
        let raw: Vec<(usize, f64)> = match kinds[n] {
            NodeKind::Dirichlet(_) | NodeKind::Pinned => {
                rows.push(vec![(n, 1.0)]);
                continue;
            }
            NodeKind::Interior => {
                interior_stencil(m, n).into_iter().map(|(c, w)| (c, -w)).collect()
            }
            NodeKind::Neumann(face) => {
                symmetric = false;
                let inv = &m.g_inv.values[n];
                let a = face.axis();
                let sign = face.outward_sign();
                let mut r = Vec::with_capacity(9);
                for j in 0..3 {
                    let coef = sign * inv.get(a, j);
                    if coef == 0.0 {
                        continue;
                    }
                    for (c, w) in d1_weights(&grid, n, j) {
                        if w != 0.0 {
                            r.push((c, coef * w));
                        }
                    }
                }
                r
            }
        };
        let mut row = Vec::with_capacity(raw.len());
        for (c, w) in raw {
            match kinds[c] {
                NodeKind::Dirichlet(v) => rhs_shift[n] -= w * v,
                NodeKind::Pinned => {}
                _ => row.push((c, w)),
            }
        }
        rows.push(row);
    }
    Ok(DiscreteLaplacian {
        grid,
        matrix: CsrMatrix::from_rows(rows),
        kinds,
        rhs_shift,
        sqrt_det: m.sqrt_det.values.clone(),
        symmetric,
    })
}

impl DiscreteLaplacian {
    /// Right-hand side for `Δu = source` at interior nodes.
    pub fn system_rhs(&self, source: &[f64]) -> Vec<f64> {
        (0..self.grid.len())
            .map(|n| match self.kinds[n] {
                NodeKind::Interior => -self.sqrt_det[n] * source[n] + self.rhs_shift[n],
                NodeKind::Dirichlet(v) => v,
                NodeKind::Pinned => 0.0,
                NodeKind::Neumann(_) => self.rhs_shift[n],
            })
            .collect()
    }

    /// Nodal values that satisfy the Dirichlet and pin rows, zero elsewhere.
    pub fn boundary_values(&self) -> Vec<f64> {
        self.kinds
            .iter()
            .map(|k| if let NodeKind::Dirichlet(v) = k { *v } else { 0.0 })
            .collect()
    }

    /// Solve `Δu = source` with the folded boundary rows to relative residual `tol`.
    pub fn solve(
        &self,
        source: &ScalarField,
        guess: Option<&ScalarField>,
        tol: f64,
        max_iter: usize,
    ) -> Result<(ScalarField, SolveStats)> {
        let b = self.system_rhs(&source.values);
        let x0 = match guess {
            Some(g) => g.values.clone(),
            None => self.boundary_values(),
        };
        let (x, stats) = if self.symmetric {
            pcg(&self.matrix, &b, &x0, tol, max_iter)?
        } else {
            bicgstab(&self.matrix, &b, &x0, tol, max_iter)?
        };
        Ok((ScalarField { grid: self.grid, values: x }, stats))
    }
}

/// `Δu` from the divergence-form stencil at interior nodes; zero on the boundary.
pub fn laplacian_divergence(u: &ScalarField, m: &MetricData) -> ScalarField {
    let grid = u.grid;
    let values = (0..grid.len())
        .map(|n| {
            if grid.is_boundary(n) {
                return 0.0;
            }
            let s: f64 = interior_stencil(m, n).iter().map(|&(c, w)| w * u.values[c]).sum();
            s / m.sqrt_det.values[n]
        })
        .collect();
    ScalarField { grid, values }
}
