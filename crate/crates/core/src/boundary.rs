//! Geometry of the coordinate faces `S` of the box inside `(U, g)`.
//!
//! A face `{x^a = c}` is a level set of the coordinate `x^a`, so with outward
//! sign `s` its unit normal is `η^i = s g^{ia}/√g^{aa}` and its second
//! fundamental form is `B_ij = −s Γ^a_ij/√g^{aa}` restricted to `TS`.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Face, Grid, ScalarField};
use crate::initial_data::InitialDataFields;
use crate::interp::Sampler;
use crate::levelset::LevelSetSurface;
use crate::math;
use crate::metric::MetricData;
use crate::tensor::{cross, dot, scale, Sym3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct FaceGeometry {
    pub face: Face,
    /// Face nodes, lower tangential axis fastest.
    pub nodes: Vec<usize>,
    /// Whether each node lies on no other face.
    pub interior: Vec<bool>,
    /// Outward `g`-unit normal (contravariant).
    pub eta: Vec<Vec3>,
    /// Second fundamental form with respect to `eta`, already projected to `TS`.
    pub b: Vec<Sym3>,
    pub mean_curvature: Vec<f64>,
    /// `tr_S p = (g^{ij} − η^i η^j) p_ij`.
    pub tr_s_p: Vec<f64>,
}

/// Geometry of all six faces, indexed by [`Face::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGeometry {
    pub faces: Vec<FaceGeometry>,
}

impl BoundaryGeometry {
    pub fn face(&self, face: Face) -> &FaceGeometry {
        &self.faces[face.index()]
    }
}

/// Tangential projector `δ^i_j − η^i η_j` applied on both slots of `t`.
pub fn project_tangential(t: &Sym3, g: &Sym3, eta: &Vec3) -> Sym3 {
    let eta_low = g.apply(eta);
    let q = |i: usize, k: usize| if i == k { 1.0 } else { 0.0 } - eta_low[i] * eta[k];
    Sym3::from_fn(|i, j| {
        let mut s = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                s += q(i, k) * q(j, l) * t.get(k, l);
            }
        }
        s
    })
}

pub fn face_geometry(m: &MetricData, p: &crate::grid::SymTensorField, face: Face) -> FaceGeometry {
    let grid = m.grid();
    let a = face.axis();
    let s = face.outward_sign();
    let nodes = grid.face_nodes(face);
    let mut geo = FaceGeometry {
        face,
        interior: nodes
            .iter()
            .map(|&n| Face::ALL.iter().all(|&f| f == face || !grid.on_face(n, f)))
            .collect(),
        nodes,
        eta: Vec::new(),
        b: Vec::new(),
        mean_curvature: Vec::new(),
        tr_s_p: Vec::new(),
    };
    for &n in &geo.nodes {
        let g = &m.g.values[n];
        let inv = &m.g_inv.values[n];
        let len = math::sqrt(inv.get(a, a));
        let eta: Vec3 = core::array::from_fn(|i| s * inv.get(i, a) / len);
        let full = m.christoffel[n][a].scale(-s / len);
        let b = project_tangential(&full, g, &eta);
        let h_s = b.trace_with(inv);
        let pn = &p.values[n];
        let tr_s_p = pn.trace_with(inv) - pn.bilinear(&eta, &eta);
        geo.eta.push(eta);
        geo.b.push(b);
        geo.mean_curvature.push(h_s);
        geo.tr_s_p.push(tr_s_p);
    }
    geo
}

pub fn boundary_geometry(m: &MetricData, idf: &InitialDataFields) -> BoundaryGeometry {
    BoundaryGeometry { faces: Face::ALL.iter().map(|&f| face_geometry(m, &idf.p, f)).collect() }
}

/// `∂_η f` at each face node: one-sided normal, centered tangential differences.
pub fn normal_derivative(f: &ScalarField, geo: &FaceGeometry) -> Vec<f64> {
    let grid = f.grid;
    geo.nodes
        .iter()
        .zip(&geo.eta)
        .map(|(&n, eta)| dot(&crate::fd::grad_at(&grid, n, |k| f.values[k]), eta))
        .collect()
}

/// Scatters per-face-node values into a full node array (zero elsewhere).
pub fn scatter<T: Copy + Default>(grid: &Grid, geo: &FaceGeometry, values: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); grid.len()];
    for (&n, v) in geo.nodes.iter().zip(values) {
        out[n] = *v;
    }
    out
}

/// A point where a level set meets a face, with the frame `{η, ν, e₁}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Fractional grid coordinates.
    pub coords: Vec3,
    pub g: Sym3,
    pub eta: Vec3,
    pub nu: Vec3,
    pub e1: Vec3,
    pub b: Sym3,
    pub mean_curvature: f64,
    /// Geodesic curvature `⟨∇_{e₁} η, e₁⟩ = B(e₁, e₁)`.
    pub kappa: f64,
    pub grad_norm: f64,
    /// Interpolated covariant partials of `u`.
    pub du: Vec3,
}

/// Curve points of `surface ∩ face`: mesh vertices lying on the face whose
/// rim-free neighbourhood is available, with all face quantities interpolated
/// within the face.
pub fn boundary_curve_points(
    surface: &LevelSetSurface,
    geo: &FaceGeometry,
    m: &MetricData,
    du: &[Vec3],
) -> Vec<CurvePoint> {
    let grid = m.grid();
    let a = geo.face.axis();
    let fixed = if geo.face.is_upper() { (grid.dims()[a] - 1) as f64 } else { 0.0 };
    let eta_full = scatter(grid, geo, &geo.eta);
    let b_full = scatter(grid, geo, &geo.b);
    let h_full = scatter(grid, geo, &geo.mean_curvature);
    let (t1, t2) = crate::grid::tangential_axes(a);
    let rim = |c: &Vec3| {
        [t1, t2].iter().any(|&ax| c[ax] <= 0.0 || c[ax] >= (grid.dims()[ax] - 1) as f64)
    };
    let mut out = Vec::new();
    for v in &surface.mesh.vertices {
        if v[a] != fixed || rim(v) {
            continue;
        }
        let smp = Sampler::new(grid, v);
        let g = smp.sym(&m.g.values);
        let inv = g.inverse();
        let d = smp.vector(du);
        let up = inv.apply(&d);
        let grad_norm = math::sqrt(dot(&up, &d).max(0.0));
        if grad_norm <= 0.0 {
            continue;
        }
        let nu = scale(&up, 1.0 / grad_norm);
        let eta = smp.vector(&eta_full);
        let w = cross(&g.apply(&eta), &g.apply(&nu));
        let wn = math::sqrt(g.bilinear(&w, &w));
        if wn <= 0.0 {
            continue;
        }
        let e1 = scale(&w, 1.0 / wn);
        let b = smp.sym(&b_full);
        out.push(CurvePoint {
            coords: *v,
            g,
            eta,
            nu,
            e1,
            b,
            mean_curvature: smp.scalar(&h_full),
            kappa: b.bilinear(&e1, &e1),
            grad_norm,
            du: d,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::grid::SymTensorField;
    use crate::metric::{build_metric, MetricSpec};

    #[test]
    fn flat_faces_have_unit_normals_and_no_curvature() {
        let grid = Grid::from_box([6; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Flat).unwrap();
        let p = SymTensorField::constant(grid, Sym3::IDENTITY.scale(0.1));
        for face in Face::ALL {
            let geo = face_geometry(&m, &p, face);
            for i in 0..geo.nodes.len() {
                let mut expect = [0.0; 3];
                expect[face.axis()] = face.outward_sign();
                assert_eq!(geo.eta[i], expect);
                assert_eq!(geo.mean_curvature[i], 0.0);
                assert!((geo.tr_s_p[i] - 0.2).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn conformal_face_curvature_matches_closed_form() {
        // g = φ⁴δ with φ = 1 + x²/4: face x = const has B = 2φ ∂_xφ δ_T, H_S = 4φ⁻³∂_xφ.
        let phi = Expr::sum(alloc::vec![Expr::Const(1.0), Expr::X.powi(2).scaled(0.25)]);
        let grid = Grid::from_box([33; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Conformal { phi }).unwrap();
        let p = SymTensorField::constant(grid, Sym3::ZERO);
        let geo = face_geometry(&m, &p, Face::XHi);
        let (f, df): (f64, f64) = (1.25, 0.5);
        for i in 0..geo.nodes.len() {
            let n = geo.nodes[i];
            let g = &m.g.values[n];
            assert!((g.bilinear(&geo.eta[i], &geo.eta[i]) - 1.0).abs() < 1e-10);
            assert!((geo.mean_curvature[i] - 4.0 * df / f.powi(3)).abs() < 5e-3, "{} {:?}", geo.mean_curvature[i], geo.b[i]);
            assert!((geo.b[i].get(1, 1) - 2.0 * f * df).abs() < 5e-3);
            assert!(geo.b[i].get(0, 0).abs() < 1e-12);
            let lo = face_geometry(&m, &p, Face::XLo);
            assert!(lo.mean_curvature[i].abs() < 1e-3);
        }
    }
}
