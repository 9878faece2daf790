//! Both sides of the level-set integral inequality, the boundary lemmas,
//! the pointwise identities behind them, and the sufficient conditions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::boundary::{self, boundary_curve_points, BoundaryGeometry, FaceGeometry};
use crate::calculus;
use crate::coarea::{coarea_two_sided, estimate_c0, regular_volume_weights, slice_levels, CoareaValue, SlicedLevels};
use crate::error::{Error, Result};
use crate::fd;
use crate::grid::{tangential_axes, Face, Grid, ScalarField, VectorField};
use crate::initial_data::InitialDataFields;
use crate::interp::Sampler;
use crate::levelset::{self, extract_level_set, LevelSetFields, LevelSetSurface, SurfaceTriangle};
use crate::math;
use crate::metric::MetricData;
use crate::report::VerificationReport;
use crate::tensor::{dot, scale, sub, Sym3, Vec3};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct VerificationConfig {
    pub n_levels: usize,
    /// `epsilon_reg = epsilon_reg_rel × max |∇u|`.
    pub epsilon_reg_rel: f64,
    /// Boundary nodes with `|∇u| ≤ eps_neq0_rel × max_∂U |∇u|` are left out of the boundary integral.
    pub eps_neq0_rel: f64,
    pub inequality_tolerance: f64,
    /// Relative tolerance of the node identities.
    pub identity_tolerance: f64,
    /// Node identities are sampled where `|∇u| > identity_grad_floor_rel × max |∇u|`.
    pub identity_grad_floor_rel: f64,
    /// Node identities skip a boundary layer of this fraction of each axis.
    pub identity_margin_frac: f64,
    /// Relative tolerance of the per-triangle algebraic identities.
    pub surface_identity_tolerance: f64,
    pub lemma_tolerance: f64,
    /// Face lemmas skip a band of this fraction of each tangential axis next
    /// to the face's edges, where solutions need not be C² up to the boundary.
    pub lemma_rim_frac: f64,
    /// Bound on `|∂_η u|` (relative to `max |∇u|`) for the zero-flux hypothesis.
    pub flux_tolerance: f64,
    /// Bound on the variation of `u` over a face for the constant-data hypothesis.
    pub face_constant_tolerance: f64,
    pub condition_tolerance: f64,
    pub kato_tolerance: f64,
    /// `φ_δ` regularization used for the excluded-level constant.
    pub c0_delta: f64,
    pub coarea_relative: f64,
    pub coarea_floor: f64,
    pub dirichlet_lemma_faces: Vec<Face>,
    pub neumann_lemma_faces: Vec<Face>,
    pub sphere_probe: Option<SphereProbe>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        VerificationConfig {
            n_levels: 64,
            epsilon_reg_rel: 1e-3,
            eps_neq0_rel: 1e-6,
            inequality_tolerance: 1e-4,
            identity_tolerance: 5e-2,
            identity_grad_floor_rel: 1e-3,
            identity_margin_frac: 0.125,
            surface_identity_tolerance: 1e-6,
            lemma_tolerance: 1e-3,
            lemma_rim_frac: 0.125,
            flux_tolerance: 1e-6,
            face_constant_tolerance: 1e-10,
            condition_tolerance: 1e-8,
            kato_tolerance: 1e-8,
            c0_delta: 1e-6,
            coarea_relative: 0.02,
            coarea_floor: 1e-6,
            dirichlet_lemma_faces: Vec::new(),
            neumann_lemma_faces: Vec::new(),
            sphere_probe: None,
        }
    }
}

/// Expected geometry of the level set `|x − center|² = radius²` in flat space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SphereProbe {
    pub center: Vec3,
    pub radius: f64,
    pub area_tolerance: f64,
    pub curvature_tolerance: f64,
}

/// Node fields shared by every check.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub m: MetricData,
    pub idf: InitialDataFields,
    pub fields: LevelSetFields,
    pub grad_up: VectorField,
    pub grad_norm: ScalarField,
    pub bg: BoundaryGeometry,
    /// Covariant partials of `h`.
    pub dh: Vec<Vec3>,
}

impl Analysis {
    pub fn new(u: &ScalarField, m: &MetricData, idf: &InitialDataFields) -> Self {
        let fields = LevelSetFields::new(u, m);
        let (grad_up, grad_norm) = calculus::gradient(u, m);
        Analysis {
            m: m.clone(),
            idf: idf.clone(),
            grad_up,
            grad_norm,
            bg: boundary::boundary_geometry(m, idf),
            dh: fd::grad(&u.grid, &idf.h.values),
            fields,
        }
    }

    pub fn u(&self) -> &ScalarField {
        &self.fields.u
    }

    pub fn grid(&self) -> &Grid {
        self.m.grid()
    }

    pub fn max_grad(&self) -> f64 {
        self.grad_norm.values.iter().copied().fold(0.0, math::max)
    }

    /// `∂_η|∇u| = ∇²u(η, ∇u)/|∇u|` at each node of one face.
    ///
    /// Differencing the node field `|∇u|` along the normal would only be
    /// first order: its own stencil error jumps between the one-sided face
    /// value and the centered interior values.
    pub fn grad_norm_normal_derivative(&self, geo: &FaceGeometry) -> Vec<f64> {
        geo.nodes
            .iter()
            .zip(&geo.eta)
            .map(|(&n, eta)| {
                let norm = self.grad_norm.values[n];
                if norm > 0.0 {
                    self.fields.hess.values[n].bilinear(eta, &self.grad_up.values[n]) / norm
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn spacetime_hess_norm_sq(&self, hess: &Sym3, p: &Sym3, grad_norm: f64, g_inv: &Sym3) -> f64 {
        (*hess + p.scale(grad_norm)).norm_sq_with(g_inv)
    }
}

// ---------------------------------------------------------------- boundary side

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryIntegral {
    pub value: f64,
    pub per_face: [f64; 6],
    pub total_area: f64,
    /// Area of boundary nodes with `|∇u| ≤ eps_neq0`.
    pub excluded_area: f64,
}

/// Induced area factor `√det(g|_S) = √g √g^{aa}` of a coordinate face.
fn face_area_factor(m: &MetricData, node: usize, axis: usize) -> f64 {
    m.sqrt_det.values[node] * math::sqrt(m.g_inv.values[node].get(axis, axis))
}

/// `∂_η|∇u| + p(∇u, η)` at each node of one face.
pub fn boundary_integrand(an: &Analysis, geo: &FaceGeometry) -> Vec<f64> {
    let dn = an.grad_norm_normal_derivative(geo);
    geo.nodes
        .iter()
        .zip(&geo.eta)
        .zip(dn)
        .map(|((&n, eta), d)| d + an.idf.p.values[n].bilinear(&an.grad_up.values[n], eta))
        .collect()
}

pub fn boundary_integral_lhs(an: &Analysis, eps_neq0: f64) -> BoundaryIntegral {
    let grid = *an.grid();
    let mut out = BoundaryIntegral::default();
    for geo in &an.bg.faces {
        let integrand = boundary_integrand(an, geo);
        let axis = geo.face.axis();
        let mut face_sum = 0.0;
        for (k, &n) in geo.nodes.iter().enumerate() {
            let da = grid.face_weight(n, geo.face) * face_area_factor(&an.m, n, axis);
            out.total_area += da;
            if an.grad_norm.values[n] > eps_neq0 {
                face_sum += integrand[k] * da;
            } else {
                out.excluded_area += da;
            }
        }
        out.per_face[geo.face.index()] = face_sum;
        out.value += face_sum;
    }
    out
}

// ---------------------------------------------------------------- bulk side

pub const BULK_TERMS: [&str; 5] = ["hessian", "mu", "j_nu", "h_terms", "gauss"];

/// The five bulk integrand terms at one point.
fn bulk_terms(
    an: &Analysis,
    g_inv: &Sym3,
    hess: &Sym3,
    p: &Sym3,
    du: &Vec3,
    grad_norm: f64,
    mu: f64,
    j: &Vec3,
    h: f64,
    p_trace: f64,
    dh: &Vec3,
    gauss: f64,
) -> [f64; 5] {
    let hess_term = 0.5 * an.spacetime_hess_norm_sq(hess, p, grad_norm, g_inv) / (grad_norm * grad_norm);
    let nu = scale(&g_inv.apply(du), 1.0 / grad_norm);
    let j_nu = dot(j, du) / grad_norm;
    let h_terms = h * h - 2.0 * h * p_trace + 2.0 * dot(&nu, dh);
    [hess_term, mu, j_nu, h_terms, -gauss]
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BulkIntegral {
    pub terms: [CoareaValue; 5],
    pub total: CoareaValue,
    /// Total with the `h`-terms halved.
    pub total_half_h: CoareaValue,
}

/// Node-wise geometry of the level set through a node.
#[derive(Debug, Clone, Copy)]
struct NodeShape {
    nu: Vec3,
    hnn: f64,
    lap: f64,
    mean: f64,
    a_sq: f64,
}

fn node_shape(an: &Analysis, n: usize) -> Option<NodeShape> {
    let norm = an.grad_norm.values[n];
    if !(norm > 0.0) {
        return None;
    }
    let g = &an.m.g.values[n];
    let g_inv = &an.m.g_inv.values[n];
    let hess = &an.fields.hess.values[n];
    let nu = scale(&an.grad_up.values[n], 1.0 / norm);
    let hnn = hess.bilinear(&nu, &nu);
    let lap = hess.trace_with(g_inv);
    let tangential = boundary::project_tangential(hess, g, &nu);
    let a_sq = tangential.norm_sq_with(g_inv) / (norm * norm);
    Some(NodeShape { nu, hnn, lap, mean: (lap - hnn) / norm, a_sq })
}

pub fn bulk_integral_rhs(an: &Analysis, sliced: &SlicedLevels) -> Result<BulkIntegral> {
    let grid = *an.grid();
    for l in sliced.split.levels.iter().filter(|l| l.regular) {
        if !sliced.surfaces.iter().any(|s| s.level == l.t) {
            return Err(Error::MissingSurface { level: l.t });
        }
    }
    let weights = regular_volume_weights(an.u(), &an.m, &sliced.split);
    let idf = &an.idf;
    let mut node_terms: [Vec<f64>; 5] = core::array::from_fn(|_| vec![0.0; grid.len()]);
    for n in 0..grid.len() {
        if weights[n] == 0.0 {
            continue;
        }
        let Some(shape) = node_shape(an, n) else { continue };
        let ric_nn = an.m.ricci.values[n].bilinear(&shape.nu, &shape.nu);
        let k = levelset::gauss_trace_curvature(an.m.scalar_curv.values[n], ric_nn, shape.a_sq, shape.mean);
        let t = bulk_terms(
            an,
            &an.m.g_inv.values[n],
            &an.fields.hess.values[n],
            &idf.p.values[n],
            &an.fields.du.values[n],
            an.grad_norm.values[n],
            idf.mu.values[n],
            &idf.j.values[n],
            idf.h.values[n],
            idf.p_trace.values[n],
            &an.dh[n],
            k,
        );
        for c in 0..5 {
            node_terms[c][n] = t[c];
        }
    }
    let surface_terms = |tr: &SurfaceTriangle| -> [f64; 5] {
        let s = Sampler::new(&grid, &tr.centroid);
        let g_inv = s.sym(&an.m.g.values).inverse();
        bulk_terms(
            an,
            &g_inv,
            &tr.hess,
            &s.sym(&idf.p.values),
            &s.vector(&an.fields.du.values),
            tr.grad_norm,
            s.scalar(&idf.mu.values),
            &s.vector(&idf.j.values),
            s.scalar(&idf.h.values),
            s.scalar(&idf.p_trace.values),
            &s.vector(&an.dh),
            tr.gauss_curvature,
        )
    };
    let mut out = BulkIntegral::default();
    for c in 0..5 {
        out.terms[c] = coarea_two_sided(sliced, &weights, &node_terms[c], |_, tr| surface_terms(tr)[c]);
    }
    let add = |f: &dyn Fn(usize) -> f64| CoareaValue {
        slice: (0..5).map(|c| f(c) * out.terms[c].slice).sum(),
        volume: (0..5).map(|c| f(c) * out.terms[c].volume).sum(),
    };
    out.total = add(&|_| 1.0);
    out.total_half_h = add(&|c| if c == 3 { 0.5 } else { 1.0 });
    Ok(out)
}

// ---------------------------------------------------------------- main inequality

#[derive(Debug, Clone, PartialEq)]
pub struct MainInequality {
    pub boundary: BoundaryIntegral,
    pub bulk: BulkIntegral,
    pub c0: f64,
    pub error_bar: f64,
    pub report: VerificationReport,
    pub report_half_h: VerificationReport,
}

pub fn verify_main_inequality(
    an: &Analysis,
    sliced: &SlicedLevels,
    cfg: &VerificationConfig,
) -> Result<MainInequality> {
    let eps_neq0 = cfg.eps_neq0_rel * boundary_max_grad(an);
    let lhs = boundary_integral_lhs(an, eps_neq0);
    let bulk = bulk_integral_rhs(an, sliced)?;
    let c0 = estimate_c0(an.u(), &an.m, &sliced.split, cfg.c0_delta);
    let a_term = c0 * sliced.split.area_integral_over_a;
    let build = |name: &str, total: &CoareaValue| {
        let error_bar = a_term + total.discrepancy();
        let mut breakdown: Vec<(String, f64)> = BULK_TERMS
            .iter()
            .zip(&bulk.terms)
            .map(|(k, v)| (k.to_string(), v.slice))
            .collect();
        breakdown.extend([
            ("rhs_volume".to_string(), total.volume),
            ("excluded_level_term".to_string(), a_term),
            ("coarea_discrepancy".to_string(), total.discrepancy()),
            ("c0".to_string(), c0),
            ("excluded_measure".to_string(), sliced.split.a_measure),
            ("excluded_boundary_area".to_string(), lhs.excluded_area),
        ]);
        breakdown.extend(Face::ALL.iter().map(|f| (format!("lhs_{}", f.name()), lhs.per_face[f.index()])));
        VerificationReport::inequality(name, lhs.value, total.slice, cfg.inequality_tolerance, error_bar)
            .with_breakdown(breakdown)
    };
    let report = build("main_inequality", &bulk.total);
    let report_half_h = build("main_inequality_half_h", &bulk.total_half_h)
        .informational()
        .with_note("h-terms weighted by 1/2");
    let error_bar = report.error_bar;
    Ok(MainInequality { boundary: lhs, bulk, c0, error_bar, report, report_half_h })
}

fn boundary_max_grad(an: &Analysis) -> f64 {
    let grid = an.grid();
    (0..grid.len())
        .filter(|&n| grid.is_boundary(n))
        .map(|n| an.grad_norm.values[n])
        .fold(0.0, math::max)
}

// ---------------------------------------------------------------- boundary lemmas

fn face_variation(an: &Analysis, geo: &FaceGeometry) -> f64 {
    let (lo, hi) = geo
        .nodes
        .iter()
        .map(|&n| an.u().values[n])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    hi - lo
}

/// Nodes used for pointwise lemma checks: off the rim, with `|∇u| > floor`.
/// Minimum distance in cells from a face's edges along each axis.
fn rim_band(grid: &Grid, frac: f64) -> [f64; 3] {
    let dims = grid.dims();
    core::array::from_fn(|a| math::max(1.0, libm::ceil(frac * (dims[a] - 1) as f64 - 1e-9)))
}

/// Whether fractional coordinates `c` on `face` lie inside the rim band.
fn inside_rim_band(grid: &Grid, face: Face, c: &Vec3, band: &[f64; 3]) -> bool {
    let dims = grid.dims();
    let (t1, t2) = tangential_axes(face.axis());
    [t1, t2].iter().all(|&a| c[a] >= band[a] - 1e-9 && (dims[a] - 1) as f64 - c[a] >= band[a] - 1e-9)
}

fn lemma_nodes<'a>(
    an: &'a Analysis,
    geo: &'a FaceGeometry,
    floor: f64,
    rim_frac: f64,
) -> impl Iterator<Item = usize> + 'a {
    let grid = an.grid();
    let band = rim_band(grid, rim_frac);
    (0..geo.nodes.len()).filter(move |&k| {
        let n = geo.nodes[k];
        let c = grid.coords(n).map(|v| v as f64);
        geo.interior[k] && an.grad_norm.values[n] > floor && inside_rim_band(grid, geo.face, &c, &band)
    })
}

struct MaxResidual {
    residual: f64,
    lhs: f64,
    rhs: f64,
    count: usize,
}

impl MaxResidual {
    fn new() -> Self {
        MaxResidual { residual: 0.0, lhs: 0.0, rhs: 0.0, count: 0 }
    }

    fn push(&mut self, lhs: f64, rhs: f64) {
        let r = math::abs(lhs - rhs);
        self.count += 1;
        if r > self.residual || r.is_nan() || self.count == 1 {
            self.residual = r;
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }
}

/// On a face where `u` is constant:
/// `∂_η|∇u| + p(∇u, η) = (−H_S − s(tr_S p − h))|∇u|` with `s = sign⟨∇u, η⟩`.
pub fn check_dirichlet_lemma(an: &Analysis, face: Face, cfg: &VerificationConfig) -> Result<VerificationReport> {
    let geo = an.bg.face(face);
    let variation = face_variation(an, geo);
    if !(variation <= cfg.face_constant_tolerance) {
        return Err(Error::Precondition { check: format!("dirichlet_lemma_{}", face.name()), measured: variation });
    }
    let integrand = boundary_integrand(an, geo);
    let floor = cfg.epsilon_reg_rel * an.max_grad();
    let mut worst = MaxResidual::new();
    let (mut outward, mut inward) = (0usize, 0usize);
    for k in lemma_nodes(an, geo, floor, cfg.lemma_rim_frac) {
        let n = geo.nodes[k];
        let s = if dot(&an.fields.du.values[n], &geo.eta[k]) >= 0.0 { 1.0 } else { -1.0 };
        if s > 0.0 {
            outward += 1
        } else {
            inward += 1
        }
        let rhs = (-geo.mean_curvature[k] - s * (geo.tr_s_p[k] - an.idf.h.values[n])) * an.grad_norm.values[n];
        worst.push(integrand[k], rhs);
    }
    Ok(VerificationReport::identity(
        format!("dirichlet_lemma_{}", face.name()),
        worst.lhs,
        worst.rhs,
        worst.residual,
        cfg.lemma_tolerance,
    )
    .with_breakdown(vec![
        ("nodes".to_string(), worst.count as f64),
        ("outward_nodes".to_string(), outward as f64),
        ("inward_nodes".to_string(), inward as f64),
        ("face_variation".to_string(), variation),
    ]))
}

/// Largest `|∂_η u|` over the rim-free nodes of a face.
pub fn max_normal_flux(an: &Analysis, geo: &FaceGeometry) -> f64 {
    let flux = boundary::normal_derivative(an.u(), geo);
    (0..geo.nodes.len()).filter(|&k| geo.interior[k]).map(|k| math::abs(flux[k])).fold(0.0, math::max)
}

fn check_zero_flux(an: &Analysis, geo: &FaceGeometry, name: &str, cfg: &VerificationConfig) -> Result<f64> {
    let flux = max_normal_flux(an, geo);
    if !(flux <= cfg.flux_tolerance * math::max(1.0, an.max_grad())) {
        return Err(Error::Precondition { check: name.to_string(), measured: flux });
    }
    Ok(flux)
}

/// Compares `∂_η|∇u|` with `±B(∇u,∇u)/|∇u|` on a zero-flux face and reports
/// which sign matches. `matching_sign` is 0 when both signs fit equally well.
pub fn check_neumann_gradient_lemma(
    an: &Analysis,
    face: Face,
    cfg: &VerificationConfig,
) -> Result<VerificationReport> {
    let name = format!("neumann_gradient_lemma_{}", face.name());
    let geo = an.bg.face(face);
    let flux = check_zero_flux(an, geo, &name, cfg)?;
    let dn = an.grad_norm_normal_derivative(geo);
    let floor = cfg.epsilon_reg_rel * an.max_grad();
    let mut plus = MaxResidual::new();
    let mut minus = MaxResidual::new();
    let mut b_max: f64 = 0.0;
    for k in lemma_nodes(an, geo, floor, cfg.lemma_rim_frac) {
        let n = geo.nodes[k];
        let up = &an.grad_up.values[n];
        let b = geo.b[k].bilinear(up, up) / an.grad_norm.values[n];
        b_max = b_max.max(math::abs(b));
        plus.push(dn[k], b);
        minus.push(dn[k], -b);
    }
    let (best, other, sign) = if minus.residual <= plus.residual { (&minus, &plus, -1.0) } else { (&plus, &minus, 1.0) };
    let unique = other.residual > 10.0 * best.residual && other.residual > cfg.lemma_tolerance;
    let matching = if unique { sign } else { 0.0 };
    let note = match matching as i32 {
        -1 => "matching sign: minus",
        1 => "matching sign: plus",
        _ => "both signs fit; B(∇u,∇u) too small to discriminate",
    };
    Ok(VerificationReport::identity(name, best.lhs, best.rhs, best.residual, cfg.lemma_tolerance)
        .with_breakdown(vec![
            ("residual_plus".to_string(), plus.residual),
            ("residual_minus".to_string(), minus.residual),
            ("matching_sign".to_string(), matching),
            ("max_abs_b_term".to_string(), b_max),
            ("max_flux".to_string(), flux),
            ("nodes".to_string(), best.count as f64),
        ])
        .with_note(note))
}

/// At points where regular level sets meet a zero-flux face, compares
/// `∂_η|∇u| + p(∇u, η)` with `(−H_S + p(ν, η) + κ)|∇u|`; the second report
/// is the split `B(ν, ν) = H_S − κ`.
pub fn check_neumann_boundary_term(
    an: &Analysis,
    face: Face,
    surfaces: &[LevelSetSurface],
    cfg: &VerificationConfig,
) -> Result<[VerificationReport; 2]> {
    let name = format!("neumann_boundary_term_{}", face.name());
    let split_name = format!("neumann_curvature_split_{}", face.name());
    let geo = an.bg.face(face);
    check_zero_flux(an, geo, &name, cfg)?;
    let grid = *an.grid();
    let dn = boundary::scatter(&grid, geo, &an.grad_norm_normal_derivative(geo));
    let band = rim_band(&grid, cfg.lemma_rim_frac);
    let mut term = MaxResidual::new();
    let mut split = MaxResidual::new();
    for s in surfaces {
        for pt in boundary_curve_points(s, geo, &an.m, &an.fields.du.values) {
            if !inside_rim_band(&grid, face, &pt.coords, &band) {
                continue;
            }
            let smp = Sampler::new(&grid, &pt.coords);
            let p = smp.sym(&an.idf.p.values);
            let up = pt.g.inverse().apply(&pt.du);
            let lhs = smp.scalar(&dn) + p.bilinear(&up, &pt.eta);
            let rhs = (-pt.mean_curvature + p.bilinear(&pt.nu, &pt.eta) + pt.kappa) * pt.grad_norm;
            term.push(lhs, rhs);
            split.push(pt.b.bilinear(&pt.nu, &pt.nu), pt.mean_curvature - pt.kappa);
        }
    }
    let finish = |r: VerificationReport, m: &MaxResidual| {
        let r = r.with_breakdown(vec![("points".to_string(), m.count as f64)]);
        if m.count == 0 {
            r.with_note("vacuous: no level set meets the face")
        } else {
            r
        }
    };
    Ok([
        finish(VerificationReport::identity(name, term.lhs, term.rhs, term.residual, cfg.lemma_tolerance), &term),
        finish(
            VerificationReport::identity(split_name, split.lhs, split.rhs, split.residual, cfg.lemma_tolerance),
            &split,
        ),
    ])
}

// ---------------------------------------------------------------- pointwise identities

/// Nodes with `|∇u| > floor` whose distance to every face is at least
/// `max(2 cells, margin_frac × extent)` per axis, so every nested difference
/// is centered and the sampled region does not move under refinement.
fn identity_nodes(an: &Analysis, floor: f64, margin_frac: f64) -> Vec<usize> {
    let grid = an.grid();
    let dims = grid.dims();
    let min_depth: [usize; 3] = core::array::from_fn(|a| {
        let cells = libm::ceil(margin_frac * (dims[a] - 1) as f64 - 1e-9) as usize;
        cells.max(2)
    });
    (0..grid.len())
        .filter(|&n| {
            let c = grid.coords(n);
            (0..3).all(|a| c[a] >= min_depth[a] && dims[a] - 1 - c[a] >= min_depth[a])
                && an.grad_norm.values[n] > floor
        })
        .collect()
}

/// Largest `|lhs − rhs|` over `nodes`, relative to `max(1, largest term)`.
/// `f` returns `(lhs, rhs, magnitude of the largest single term)`.
fn max_identity(name: &str, nodes: &[usize], tol: f64, f: impl Fn(usize) -> (f64, f64, f64)) -> VerificationReport {
    relative_identity(name, tol, nodes.iter().map(|&n| f(n)))
}

fn relative_identity(name: &str, tol: f64, triples: impl Iterator<Item = (f64, f64, f64)>) -> VerificationReport {
    let mut worst = MaxResidual::new();
    let mut scale_: f64 = 1.0;
    for (l, r, mag) in triples {
        scale_ = scale_.max(math::abs(l)).max(math::abs(r)).max(mag);
        worst.push(l, r);
    }
    VerificationReport::identity(name, worst.lhs, worst.rhs, worst.residual / scale_, tol).with_breakdown(vec![
        ("nodes".to_string(), worst.count as f64),
        ("absolute_residual".to_string(), worst.residual),
        ("scale".to_string(), scale_),
    ])
}

fn largest(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0, |a, &t| math::max(a, math::abs(t)))
}

/// Node and surface identities. Each node identity compares two
/// independently discretized sides, so its residual measures truncation error.
pub fn check_proof_identities(
    an: &Analysis,
    surfaces: &[LevelSetSurface],
    cfg: &VerificationConfig,
) -> Vec<VerificationReport> {
    let grid = *an.grid();
    let m = &an.m;
    let floor = cfg.epsilon_reg_rel * an.max_grad();
    let nodes = identity_nodes(an, cfg.identity_grad_floor_rel * an.max_grad(), cfg.identity_margin_frac);
    let tol = cfg.identity_tolerance;
    let shapes: Vec<Option<NodeShape>> = (0..grid.len()).map(|n| node_shape(an, n)).collect();

    let norm_sq = an.grad_norm.map(|v| v * v);
    let lap_norm_sq = calculus::laplacian_pointwise(&norm_sq, m);
    let lap_u = calculus::trace(&an.fields.hess, m);
    let d_lap_u = fd::grad(&grid, &lap_u.values);
    let d_norm = fd::grad(&grid, &an.grad_norm.values);
    let nu_field = calculus::unit_normal(&an.grad_up, &an.grad_norm, 0.0);
    let div_nu = calculus::divergence(&nu_field, m);
    let cov_nu = calculus::covariant_derivative(&nu_field, m);
    let riccati: Vec<Vec3> = (0..grid.len())
        .map(|n| {
            let nu = &nu_field.values[n];
            let accel: Vec3 = core::array::from_fn(|i| (0..3).map(|j| nu[j] * cov_nu[n][j][i]).sum());
            sub(&accel, &scale(nu, div_nu.values[n]))
        })
        .collect();
    let div_riccati = calculus::divergence(&VectorField { grid, values: riccati }, m);

    let mut out = Vec::new();
    out.push(max_identity("bochner", &nodes, tol, |n| {
        let g_inv = &m.g_inv.values[n];
        let up = &an.grad_up.values[n];
        let terms = [
            an.fields.hess.values[n].norm_sq_with(g_inv),
            m.ricci.values[n].bilinear(up, up),
            dot(up, &d_lap_u[n]),
        ];
        let lhs = 0.5 * lap_norm_sq.values[n];
        (lhs, terms.iter().sum(), largest(&terms))
    }));
    out.push(max_identity("gauss_trace", &nodes, tol, |n| {
        let s = shapes[n].unwrap();
        let lhs = m.ricci.values[n].bilinear(&s.nu, &s.nu);
        let terms = [div_riccati.values[n], s.a_sq, s.mean * s.mean];
        (lhs, terms[0] - terms[1] + terms[2], largest(&terms))
    }));
    out.push(max_identity("second_form_norm", &nodes, tol, |n| {
        let s = shapes[n].unwrap();
        let g_inv = &m.g_inv.values[n];
        let norm = an.grad_norm.values[n];
        let grad_grad = g_inv.bilinear(&d_norm[n], &d_norm[n]);
        let terms = [an.fields.hess.values[n].norm_sq_with(g_inv), 2.0 * grad_grad, s.hnn * s.hnn]
            .map(|t| t / (norm * norm));
        (s.a_sq, terms[0] - terms[1] + terms[2], largest(&terms))
    }));
    out.push(max_identity("grad_norm_derivative", &nodes, tol, |n| {
        let s = shapes[n].unwrap();
        (dot(&an.grad_up.values[n], &d_norm[n]), an.grad_norm.values[n] * s.hnn, 0.0)
    }));
    out.push(max_identity("mean_curvature", &nodes, tol, |n| {
        let s = shapes[n].unwrap();
        (an.grad_norm.values[n] * div_nu.values[n], s.lap - s.hnn, largest(&[s.lap, s.hnn]))
    }));

    // Δu = H_S⟨∇u, η⟩ + ∇²u(η, η) on faces carrying constant data.
    for geo in &an.bg.faces {
        if !(face_variation(an, geo) <= cfg.face_constant_tolerance) {
            continue;
        }
        let ks: Vec<usize> = lemma_nodes(an, geo, floor, cfg.lemma_rim_frac).collect();
        let position: Vec<usize> = ks.iter().map(|&k| geo.nodes[k]).collect();
        out.push(max_identity(&format!("face_laplacian_split_{}", geo.face.name()), &position, tol, |n| {
            let k = ks[position.iter().position(|&x| x == n).unwrap()];
            let hess = &an.fields.hess.values[n];
            let terms = [
                geo.mean_curvature[k] * dot(&an.fields.du.values[n], &geo.eta[k]),
                hess.bilinear(&geo.eta[k], &geo.eta[k]),
            ];
            (lap_u.values[n], terms[0] + terms[1], largest(&terms))
        }));
    }

    // Per-triangle algebra on the regular level sets.
    let mut a_rel: f64 = 0.0;
    let mut h_abs: f64 = 0.0;
    let mut count = 0usize;
    for s in surfaces {
        for t in &s.triangles {
            let r = levelset::triangle_identities(t, m);
            a_rel = a_rel.max(r.second_form_norm);
            h_abs = h_abs.max(r.mean_curvature);
            count += 1;
        }
    }
    let tri = vec![("triangles".to_string(), count as f64)];
    out.push(
        VerificationReport::identity("surface_second_form_norm", 0.0, 0.0, a_rel, cfg.surface_identity_tolerance)
            .with_breakdown(tri.clone()),
    );
    out.push(
        VerificationReport::identity("surface_mean_curvature", 0.0, 0.0, h_abs, cfg.surface_identity_tolerance)
            .with_breakdown(tri),
    );
    out
}

/// `|∇|∇u|| ≤ |∇²u|` at interior nodes with `|∇u| > epsilon_reg`, with
/// `∇|∇u| = ∇²u(ν, ·)`. Reports the smallest margin.
pub fn check_kato(an: &Analysis, cfg: &VerificationConfig) -> VerificationReport {
    let grid = an.grid();
    let floor = cfg.epsilon_reg_rel * an.max_grad();
    let mut margin = f64::INFINITY;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for n in 0..grid.len() {
        if grid.is_boundary(n) || an.grad_norm.values[n] <= floor {
            continue;
        }
        let g_inv = &an.m.g_inv.values[n];
        let hess = &an.fields.hess.values[n];
        let nu = scale(&an.grad_up.values[n], 1.0 / an.grad_norm.values[n]);
        let hnu = hess.apply(&nu);
        let l = math::sqrt(g_inv.bilinear(&hnu, &hnu));
        let r = math::sqrt(hess.norm_sq_with(g_inv));
        if r - l < margin {
            margin = r - l;
            lhs = r;
            rhs = l;
        }
    }
    if margin == f64::INFINITY {
        margin = 0.0;
    }
    let mut report = VerificationReport::inequality("kato", lhs, rhs, cfg.kato_tolerance, 0.0);
    report.margin = margin;
    report.evaluated()
}

// ---------------------------------------------------------------- sufficient conditions

/// The five pointwise sufficient conditions, as minimum margins. These are
/// informational: a violated condition does not fail a run.
pub fn evaluate_conditions(an: &Analysis, cfg: &VerificationConfig) -> Vec<VerificationReport> {
    let grid = an.grid();
    let idf = &an.idf;
    let m = &an.m;
    let floor = cfg.epsilon_reg_rel * an.max_grad();
    let min_over = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, math::min);
    let dh_norm = |n: usize| math::sqrt(m.g_inv.values[n].bilinear(&an.dh[n], &an.dh[n]).max(0.0));
    let base = |n: usize| {
        let h = idf.h.values[n];
        idf.mu.values[n] + h * h - 2.0 * h * idf.p_trace.values[n]
    };
    let worst_case = min_over(&mut (0..grid.len()).map(|n| {
        let j_norm = m.norm(n, &idf.j.values[n]);
        base(n) - j_norm - 2.0 * dh_norm(n)
    }));
    let with_nu = min_over(&mut (0..grid.len()).filter(|&n| an.grad_norm.values[n] > floor).map(|n| {
        let du = &an.fields.du.values[n];
        let norm = an.grad_norm.values[n];
        let nu = scale(&an.grad_up.values[n], 1.0 / norm);
        base(n) + dot(&idf.j.values[n], du) / norm + 2.0 * dot(&nu, &an.dh[n])
    }));
    let mut convexity = f64::INFINITY;
    let mut momentum = f64::INFINITY;
    for geo in &an.bg.faces {
        for (k, &n) in geo.nodes.iter().enumerate() {
            let h_s = geo.mean_curvature[k];
            convexity = convexity.min(h_s - math::abs(geo.tr_s_p[k] - idf.h.values[n]));
            let p_eta = idf.p.values[n].apply(&geo.eta[k]);
            momentum = momentum.min(h_s - math::sqrt(m.g_inv.values[n].bilinear(&p_eta, &p_eta).max(0.0)));
        }
    }
    let riemannian = min_over(&mut (0..grid.len()).map(|n| {
        let h = idf.h.values[n];
        m.scalar_curv.values[n] + h * h - 2.0 * dh_norm(n)
    }));
    let tol = cfg.condition_tolerance;
    let finite = |v: f64| if v == f64::INFINITY { 0.0 } else { v };
    vec![
        VerificationReport::condition("condition_bulk_worst_case", finite(worst_case), tol),
        VerificationReport::condition("condition_bulk_solution_normal", finite(with_nu), tol),
        VerificationReport::condition("condition_boundary_convexity", finite(convexity), tol),
        VerificationReport::condition("condition_boundary_momentum", finite(momentum), tol),
        VerificationReport::condition("condition_riemannian", finite(riemannian), tol),
    ]
}

// ---------------------------------------------------------------- sphere probe

/// Area, `H`, `K` and `∫K dA` of one level set against a round sphere.
pub fn probe_sphere(an: &Analysis, probe: &SphereProbe) -> Result<Vec<VerificationReport>> {
    let r = probe.radius;
    let s = extract_level_set(&an.fields, &an.m, r * r)?;
    let area = s.total_area();
    let exact_area = 4.0 * math::PI * r * r;
    let rel = |v: f64, e: f64| math::abs(v - e) / math::abs(e);
    let worst = |f: &dyn Fn(&SurfaceTriangle) -> f64, e: f64| {
        s.triangles.iter().map(|t| rel(f(t), e)).fold(0.0, math::max)
    };
    let mean_h = s.integrate(|t| t.mean_curvature) / area;
    let mean_k = s.integrate(|t| t.gauss_curvature) / area;
    let total_k = s.integrate(|t| t.gauss_curvature);
    let tri = ("triangles".to_string(), s.triangles.len() as f64);
    Ok(vec![
        VerificationReport::identity("sphere_area", area, exact_area, rel(area, exact_area), probe.area_tolerance)
            .with_breakdown(vec![tri.clone()]),
        VerificationReport::identity(
            "sphere_mean_curvature",
            mean_h,
            2.0 / r,
            worst(&|t| t.mean_curvature, 2.0 / r),
            probe.curvature_tolerance,
        ),
        VerificationReport::identity(
            "sphere_gauss_curvature",
            mean_k,
            1.0 / (r * r),
            worst(&|t| t.gauss_curvature, 1.0 / (r * r)),
            probe.curvature_tolerance,
        ),
        VerificationReport::identity(
            "sphere_gauss_bonnet",
            total_k,
            4.0 * math::PI,
            rel(total_k, 4.0 * math::PI),
            probe.curvature_tolerance,
        )
        .with_breakdown(vec![("angle_defect".to_string(), levelset::angle_defect_total(&s, &an.m)), tri]),
    ])
}

// ---------------------------------------------------------------- full run

#[derive(Debug, Clone)]
pub struct LabOutcome {
    pub reports: Vec<VerificationReport>,
    pub sliced: SlicedLevels,
    pub main: MainInequality,
    pub epsilon_reg: f64,
}

impl LabOutcome {
    pub fn report(&self, name: &str) -> Option<&VerificationReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn pass(&self) -> bool {
        !self.reports.iter().any(|r| r.fails_gate())
    }
}

/// Runs every check in a fixed order. The main inequality gates only when
/// `u_solves` is set, since it is derived for solutions.
pub fn run_verification(an: &Analysis, cfg: &VerificationConfig, u_solves: bool) -> Result<LabOutcome> {
    let epsilon_reg = cfg.epsilon_reg_rel * an.max_grad();
    let sliced = slice_levels(&an.fields, &an.m, cfg.n_levels, epsilon_reg)?;
    let main = verify_main_inequality(an, &sliced, cfg)?;
    let mut reports = Vec::new();
    let mut headline = main.report.clone();
    if !u_solves {
        headline = headline.informational().with_note("u is not a solution; reported only");
    }
    reports.push(headline);
    reports.push(main.report_half_h.clone());
    let coarea = &main.bulk.total;
    reports.push(
        VerificationReport::identity(
            "coarea_consistency",
            coarea.slice,
            coarea.volume,
            coarea.discrepancy(),
            cfg.coarea_relative * math::max(math::max(math::abs(coarea.slice), math::abs(coarea.volume)), 0.0)
                + cfg.coarea_floor,
        )
        .with_breakdown(vec![("relative".to_string(), coarea.relative_discrepancy(cfg.coarea_floor))]),
    );
    for &face in &cfg.dirichlet_lemma_faces {
        reports.push(check_dirichlet_lemma(an, face, cfg)?);
    }
    for &face in &cfg.neumann_lemma_faces {
        reports.push(check_neumann_gradient_lemma(an, face, cfg)?);
        reports.extend(check_neumann_boundary_term(an, face, &sliced.surfaces, cfg)?);
    }
    reports.extend(check_proof_identities(an, &sliced.surfaces, cfg));
    reports.push(check_kato(an, cfg));
    if let Some(probe) = &cfg.sphere_probe {
        reports.extend(probe_sphere(an, probe)?);
    }
    reports.extend(evaluate_conditions(an, cfg));
    reports.push(VerificationReport::measurement("excluded_level_measure", sliced.split.a_measure));
    reports.push(VerificationReport::measurement("c0", main.c0));
    Ok(LabOutcome { reports, sliced, main, epsilon_reg })
}
