//! Level sets `Σ_t = {u = t}` and their geometry.
//!
//! Every per-triangle quantity is evaluated at the triangle centroid from
//! trilinearly interpolated node fields (`g`, `∂u`, `∇²u`, `Ric`, `R`), so
//! algebraic identities between them hold to rounding.

use alloc::vec::Vec;

use crate::calculus;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, SymTensorField, VectorField};
use crate::interp::Sampler;
use crate::marching::{triangulate, TriangleMesh};
use crate::math;
use crate::metric::MetricData;
use crate::tensor::{dot, scale, sub, tangent_frame, Sym3, Vec3};

/// Below this centroid gradient length a triangle is flagged degenerate.
pub const DEGENERATE_GRADIENT: f64 = 1e-12;

/// Node fields of `u` reused by every level.
#[derive(Debug, Clone)]
pub struct LevelSetFields {
    pub u: ScalarField,
    /// Covariant partials `∂_i u`.
    pub du: VectorField,
    pub hess: SymTensorField,
}

impl LevelSetFields {
    pub fn new(u: &ScalarField, m: &MetricData) -> Self {
        LevelSetFields { u: u.clone(), du: calculus::partials(u), hess: calculus::hessian(u, m) }
    }
}

/// Geometry of one triangle of a level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceTriangle {
    /// Index into the mesh triangle list.
    pub index: usize,
    /// Centroid in fractional grid coordinates.
    pub centroid: Vec3,
    /// Metric area.
    pub area: f64,
    /// `g`-unit normal `∇u/|∇u|` (contravariant).
    pub normal: Vec3,
    /// `g`-orthonormal tangent frame.
    pub frame: [Vec3; 2],
    /// Second fundamental form `A_ab` in the tangent frame: (A11, A12, A22).
    pub second_form: [f64; 3],
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    pub grad_norm: f64,
    /// Interpolated `∇²u`.
    pub hess: Sym3,
    pub ricci_nn: f64,
    pub scalar_curv: f64,
}

impl SurfaceTriangle {
    pub fn second_form_norm_sq(&self) -> f64 {
        let [a11, a12, a22] = self.second_form;
        a11 * a11 + 2.0 * a12 * a12 + a22 * a22
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetSurface {
    pub level: f64,
    pub mesh: TriangleMesh,
    /// Non-degenerate triangles.
    pub triangles: Vec<SurfaceTriangle>,
    pub degenerate: usize,
}

impl LevelSetSurface {
    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Area-weighted integral of a per-triangle quantity.
    pub fn integrate(&self, f: impl Fn(&SurfaceTriangle) -> f64) -> f64 {
        self.triangles.iter().map(|t| f(t) * t.area).sum()
    }

    /// Interpolated values of a node field at the triangle centroids.
    pub fn sample(&self, field: &ScalarField) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|t| Sampler::new(&field.grid, &t.centroid).scalar(&field.values))
            .collect()
    }

    pub fn min_grad_norm(&self) -> f64 {
        self.triangles.iter().map(|t| t.grad_norm).fold(f64::INFINITY, math::min)
    }
}

/// `K = ½(R − 2 Ric(ν,ν) − |A|² + H²)`, the twice-traced Gauss equation with `R_Σ = 2K`.
#[inline]
pub fn gauss_trace_curvature(scalar_curv: f64, ricci_nn: f64, a_norm_sq: f64, mean: f64) -> f64 {
    0.5 * (scalar_curv - 2.0 * ricci_nn - a_norm_sq + mean * mean)
}

/// Metric area of a flat triangle with physical corners `p`, metric `g`.
pub fn metric_triangle_area(g: &Sym3, p: &[Vec3; 3]) -> f64 {
    let a = sub(&p[1], &p[0]);
    let b = sub(&p[2], &p[0]);
    let gram = g.bilinear(&a, &a) * g.bilinear(&b, &b) - g.bilinear(&a, &b) * g.bilinear(&a, &b);
    0.5 * math::sqrt(gram.max(0.0))
}

pub fn extract_level_set(fields: &LevelSetFields, m: &MetricData, level: f64) -> Result<LevelSetSurface> {
    let grid = fields.u.grid;
    let (min, max) = fields.u.min_max();
    if !(level > min && level < max) {
        return Err(Error::LevelOutOfRange { level, min, max });
    }
    let mesh = triangulate(&grid, &fields.u.values, level);
    let mut triangles = Vec::with_capacity(mesh.triangles.len());
    let mut degenerate = 0;
    for (index, tri) in mesh.triangles.iter().enumerate() {
        let corners = tri.map(|v| mesh.vertices[v]);
        let centroid: Vec3 =
            core::array::from_fn(|a| (corners[0][a] + corners[1][a] + corners[2][a]) / 3.0);
        let s = Sampler::new(&grid, &centroid);
        let g = s.sym(&m.g.values);
        let physical = corners.map(|c| grid.position_of(&c));
        let area = metric_triangle_area(&g, &physical);
        let g_inv = g.inverse();
        let du = s.vector(&fields.du.values);
        let grad_up = g_inv.apply(&du);
        let grad_norm = math::sqrt(dot(&grad_up, &du).max(0.0));
        if area == 0.0 {
            continue;
        }
        if grad_norm < DEGENERATE_GRADIENT {
            degenerate += 1;
            continue;
        }
        let normal = scale(&grad_up, 1.0 / grad_norm);
        let frame = tangent_frame(&g, &normal);
        let hess = s.sym(&fields.hess.values);
        let a11 = hess.bilinear(&frame[0], &frame[0]) / grad_norm;
        let a12 = hess.bilinear(&frame[0], &frame[1]) / grad_norm;
        let a22 = hess.bilinear(&frame[1], &frame[1]) / grad_norm;
        let mean = a11 + a22;
        let ricci_nn = s.sym(&m.ricci.values).bilinear(&normal, &normal);
        let scalar_curv = s.scalar(&m.scalar_curv.values);
        let a_sq = a11 * a11 + 2.0 * a12 * a12 + a22 * a22;
        triangles.push(SurfaceTriangle {
            index,
            centroid,
            area,
            normal,
            frame,
            second_form: [a11, a12, a22],
            mean_curvature: mean,
            gauss_curvature: gauss_trace_curvature(scalar_curv, ricci_nn, a_sq, mean),
            grad_norm,
            hess,
            ricci_nn,
            scalar_curv,
        });
    }
    Ok(LevelSetSurface { level, mesh, triangles, degenerate })
}

/// Per-triangle Gauss curvature from the traced Gauss equation.
pub fn gauss_curvature(surface: &LevelSetSurface) -> Vec<f64> {
    surface.triangles.iter().map(|t| t.gauss_curvature).collect()
}

/// Residuals of the pointwise identities that tie `A` and `H` to `∇²u`,
/// evaluated per triangle from the same interpolated Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriangleIdentityResiduals {
    /// Residual of `|A|² = |∇u|⁻²(|∇²u|² − 2|∇|∇u||² + ∇²u(ν,ν)²)`, relative to `max(|A|², 1)`.
    pub second_form_norm: f64,
    /// Residual of `|∇u| H = Δu − ∇²u(ν,ν)`.
    pub mean_curvature: f64,
}

pub fn triangle_identities(t: &SurfaceTriangle, m: &MetricData) -> TriangleIdentityResiduals {
    let grid = m.grid();
    let g = Sampler::new(grid, &t.centroid).sym(&m.g.values);
    let g_inv = g.inverse();
    let hnu = t.hess.apply(&t.normal);
    let grad_grad_sq = g_inv.bilinear(&hnu, &hnu);
    let hnn = dot(&hnu, &t.normal);
    let hess_sq = t.hess.norm_sq_with(&g_inv);
    let rhs = (hess_sq - 2.0 * grad_grad_sq + hnn * hnn) / (t.grad_norm * t.grad_norm);
    let lhs = t.second_form_norm_sq();
    let scale_ = math::max(math::abs(lhs), math::max(math::abs(rhs), 1.0));
    let lap = t.hess.trace_with(&g_inv);
    TriangleIdentityResiduals {
        second_form_norm: math::abs(lhs - rhs) / scale_,
        mean_curvature: math::abs(t.grad_norm * t.mean_curvature - (lap - hnn)),
    }
}

/// Total angle defect `Σ (2π − Σ angles)` over vertices not on the mesh
/// boundary, with angles measured in the centroid metric of each triangle.
/// Diagnostic only; for a closed surface it approximates `2πχ`.
pub fn angle_defect_total(surface: &LevelSetSurface, m: &MetricData) -> f64 {
    use alloc::collections::BTreeMap;
    let grid = m.grid();
    let mesh = &surface.mesh;
    let mut angle_sum = alloc::vec![0.0; mesh.vertices.len()];
    let mut edge_count: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for tri in &mesh.triangles {
        let p = tri.map(|v| grid.position_of(&mesh.vertices[v]));
        let centroid: Vec3 = core::array::from_fn(|a| {
            (mesh.vertices[tri[0]][a] + mesh.vertices[tri[1]][a] + mesh.vertices[tri[2]][a]) / 3.0
        });
        let g = Sampler::new(grid, &centroid).sym(&m.g.values);
        for k in 0..3 {
            let a = sub(&p[(k + 1) % 3], &p[k]);
            let b = sub(&p[(k + 2) % 3], &p[k]);
            let denom = math::sqrt(g.bilinear(&a, &a) * g.bilinear(&b, &b));
            if denom > 0.0 {
                let c = (g.bilinear(&a, &b) / denom).clamp(-1.0, 1.0);
                angle_sum[tri[k]] += libm::acos(c);
            }
            let (u, v) = (tri[k], tri[(k + 1) % 3]);
            *edge_count.entry((u.min(v), u.max(v))).or_insert(0) += 1;
        }
    }
    let mut on_boundary = alloc::vec![false; mesh.vertices.len()];
    for (&(u, v), &c) in &edge_count {
        if c != 2 {
            on_boundary[u] = true;
            on_boundary[v] = true;
        }
    }
    (0..mesh.vertices.len())
        .filter(|&v| !on_boundary[v])
        .map(|v| 2.0 * math::PI - angle_sum[v])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::metric::{build_metric, MetricSpec};

    #[test]
    fn plane_level_set_is_flat_with_unit_area() {
        let grid = Grid::from_box([9; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Flat).unwrap();
        let u = ScalarField::from_fn(grid, |p| p[0]);
        let s = extract_level_set(&LevelSetFields::new(&u, &m), &m, 0.5).unwrap();
        assert!((s.total_area() - 1.0).abs() < 1e-6);
        for t in &s.triangles {
            assert!(t.mean_curvature.abs() < 1e-9);
            assert!(t.gauss_curvature.abs() < 1e-9);
            assert!((m.g.values[0].bilinear(&t.normal, &t.normal) - 1.0).abs() < 1e-8);
        }
        assert_eq!(s.degenerate, 0);
    }

    #[test]
    fn level_outside_range_is_rejected() {
        let grid = Grid::from_box([5; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Flat).unwrap();
        let u = ScalarField::from_fn(grid, |p| p[0]);
        let f = LevelSetFields::new(&u, &m);
        assert!(matches!(extract_level_set(&f, &m, 1.0), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(extract_level_set(&f, &m, -0.2), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn flipping_u_flips_normal_and_mean_curvature_only() {
        let grid = Grid::from_box([17; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Flat).unwrap();
        let u = ScalarField::from_fn(grid, |p| {
            (p[0] - 0.5).powi(2) + (p[1] - 0.45).powi(2) + 0.5 * (p[2] - 0.5).powi(2)
        });
        let neg = u.map(|v| -v);
        let a = extract_level_set(&LevelSetFields::new(&u, &m), &m, 0.06).unwrap();
        let b = extract_level_set(&LevelSetFields::new(&neg, &m), &m, -0.06).unwrap();
        let total = |s: &LevelSetSurface, f: fn(&SurfaceTriangle) -> f64| s.integrate(f);
        assert!((total(&a, |t| t.mean_curvature) + total(&b, |t| t.mean_curvature)).abs() < 1e-9);
        assert!((total(&a, |t| t.gauss_curvature) - total(&b, |t| t.gauss_curvature)).abs() < 1e-9);
        assert!((a.total_area() - b.total_area()).abs() < 1e-12);
    }
}
