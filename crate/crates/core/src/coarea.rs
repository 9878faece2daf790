//! Regular/critical split of the value range and two-sided coarea integration.

use alloc::vec::Vec;

use crate::calculus;
use crate::error::Result;
use crate::grid::ScalarField;
use crate::interp::Sampler;
use crate::levelset::{extract_level_set, LevelSetFields, LevelSetSurface, SurfaceTriangle};
use crate::math;
use crate::metric::MetricData;

/// One sampled level and its classification.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelSample {
    pub t: f64,
    pub regular: bool,
    pub min_grad: f64,
    pub area: f64,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularValueSplit {
    pub epsilon_reg: f64,
    /// Lower end of the sampled range; bin `k` is `[t_min + kΔt, t_min + (k+1)Δt)`.
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
    pub levels: Vec<LevelSample>,
    /// Total length of the excluded bins.
    pub a_measure: f64,
    /// `Σ_{excluded} Δt |Σ_t|`.
    pub area_integral_over_a: f64,
}

impl RegularValueSplit {
    pub fn b_levels(&self) -> Vec<f64> {
        self.levels.iter().filter(|l| l.regular).map(|l| l.t).collect()
    }

    pub fn excluded_intervals(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .filter(|l| !l.regular)
            .map(|l| (l.t - 0.5 * self.dt, l.t + 0.5 * self.dt))
            .collect()
    }

    /// Bin containing value `v`, clamped to the sampled range.
    pub fn bin_of(&self, v: f64) -> usize {
        let k = libm::floor((v - self.t_min) / self.dt);
        (k.max(0.0) as usize).min(self.levels.len() - 1)
    }

    pub fn node_in_b(&self, v: f64) -> bool {
        self.levels[self.bin_of(v)].regular
    }
}

/// The split together with the surfaces of its regular levels, in level order.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedLevels {
    pub split: RegularValueSplit,
    pub surfaces: Vec<LevelSetSurface>,
}

/// Samples `n_levels` midpoints of equal bins tiling `[min u, max u]` and
/// classifies each level as regular when it has no degenerate triangle and
/// its minimum interpolated `|∇u|` is at least `epsilon_reg`.
pub fn slice_levels(
    fields: &LevelSetFields,
    m: &MetricData,
    n_levels: usize,
    epsilon_reg: f64,
) -> Result<SlicedLevels> {
    let n_levels = n_levels.max(2);
    let (t_min, t_max) = fields.u.min_max();
    let dt = (t_max - t_min) / n_levels as f64;
    let mut levels = Vec::with_capacity(n_levels);
    let mut surfaces = Vec::new();
    let mut a_measure = 0.0;
    let mut area_a = 0.0;
    for k in 0..n_levels {
        let t = t_min + (k as f64 + 0.5) * dt;
        let surface = extract_level_set(fields, m, t)?;
        let min_grad = surface.min_grad_norm();
        let area = surface.total_area();
        let regular = surface.degenerate == 0 && !surface.triangles.is_empty() && min_grad >= epsilon_reg;
        levels.push(LevelSample { t, regular, min_grad, area, degenerate: surface.degenerate });
        if regular {
            surfaces.push(surface);
        } else {
            a_measure += dt;
            area_a += dt * area;
        }
    }
    let split = RegularValueSplit {
        epsilon_reg,
        t_min,
        t_max,
        dt,
        levels,
        a_measure,
        area_integral_over_a: area_a,
    };
    Ok(SlicedLevels { split, surfaces })
}

pub fn regular_split(
    u: &ScalarField,
    m: &MetricData,
    n_levels: usize,
    epsilon_reg: f64,
) -> Result<RegularValueSplit> {
    Ok(slice_levels(&LevelSetFields::new(u, m), m, n_levels, epsilon_reg)?.split)
}

/// Both evaluations of `∫∫_{Σ_t} f dA dt` over the regular bins.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoareaValue {
    /// `Σ_{t∈ℬ} Δt ∫_{Σ_t} f dA`.
    pub slice: f64,
    /// `∫_{u⁻¹(ℬ)} f |∇u| dV`.
    pub volume: f64,
}

impl CoareaValue {
    pub fn discrepancy(&self) -> f64 {
        math::abs(self.slice - self.volume)
    }

    pub fn relative_discrepancy(&self, floor: f64) -> f64 {
        self.discrepancy() / math::max(math::max(math::abs(self.slice), math::abs(self.volume)), floor)
    }
}

/// Node volume weights `w √g |∇u|` restricted to `u⁻¹(ℬ)`.
pub fn regular_volume_weights(u: &ScalarField, m: &MetricData, split: &RegularValueSplit) -> Vec<f64> {
    let grid = u.grid;
    let (_, norm) = calculus::gradient(u, m);
    (0..grid.len())
        .map(|n| {
            if split.node_in_b(u.values[n]) {
                grid.volume_weight(n) * m.sqrt_det.values[n] * norm.values[n]
            } else {
                0.0
            }
        })
        .collect()
}

/// Two-sided coarea integral with separate surface and node integrands.
pub fn coarea_two_sided(
    sliced: &SlicedLevels,
    volume_weights: &[f64],
    node_integrand: &[f64],
    surface_integrand: impl Fn(&LevelSetSurface, &SurfaceTriangle) -> f64,
) -> CoareaValue {
    let dt = sliced.split.dt;
    let slice = sliced
        .surfaces
        .iter()
        .map(|s| dt * s.triangles.iter().map(|tr| surface_integrand(s, tr) * tr.area).sum::<f64>())
        .sum();
    let volume = volume_weights.iter().zip(node_integrand).map(|(w, f)| w * f).sum();
    CoareaValue { slice, volume }
}

pub fn coarea_integrate(
    f: &ScalarField,
    u: &ScalarField,
    m: &MetricData,
    sliced: &SlicedLevels,
) -> CoareaValue {
    let weights = regular_volume_weights(u, m, &sliced.split);
    coarea_two_sided(sliced, &weights, &f.values, |_, tr| {
        Sampler::new(&f.grid, &tr.centroid).scalar(&f.values)
    })
}

/// Empirical constant of the excluded-level error term: the largest
/// `(−Δφ_δ)/|∇u|` over interior nodes with values in ℬ, clipped below at 0,
/// where `φ_δ = √(|∇u|² + δ)`.
pub fn estimate_c0(u: &ScalarField, m: &MetricData, split: &RegularValueSplit, delta: f64) -> f64 {
    let grid = u.grid;
    let (_, norm) = calculus::gradient(u, m);
    let phi = norm.map(|v| math::sqrt(v * v + delta));
    let lap = calculus::laplacian_pointwise(&phi, m);
    let mut c0: f64 = 0.0;
    for n in 0..grid.len() {
        if grid.depth(n) == 0 || !split.node_in_b(u.values[n]) || norm.values[n] <= 0.0 {
            continue;
        }
        c0 = c0.max(-lap.values[n] / norm.values[n]);
    }
    c0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::metric::{build_metric, MetricSpec};

    fn flat(n: usize) -> (Grid, MetricData) {
        let grid = Grid::from_box([n; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = build_metric(&grid, &MetricSpec::Flat).unwrap();
        (grid, m)
    }

    #[test]
    fn linear_u_has_only_regular_levels_and_unit_slab_volume() {
        let (grid, m) = flat(9);
        let u = ScalarField::from_fn(grid, |p| p[0]);
        let sliced = slice_levels(&LevelSetFields::new(&u, &m), &m, 16, 1e-3).unwrap();
        assert_eq!(sliced.split.a_measure, 0.0);
        assert_eq!(sliced.surfaces.len(), 16);
        let one = ScalarField::constant(grid, 1.0);
        let v = coarea_integrate(&one, &u, &m, &sliced);
        assert!((v.slice - 1.0).abs() < 1e-3, "{v:?}");
        assert!((v.volume - 1.0).abs() < 1e-3, "{v:?}");
    }

    #[test]
    fn radial_levels_near_minimum_are_excluded() {
        let (grid, m) = flat(17);
        let u = ScalarField::from_fn(grid, |p| {
            (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)
        });
        let split = regular_split(&u, &m, 32, 0.3).unwrap();
        // |∇u| = 2r and t = r², so levels with 2√t < 0.3 must be excluded.
        for l in &split.levels {
            if 2.0 * l.t.sqrt() < 0.25 {
                assert!(!l.regular, "t = {}", l.t);
            }
            if 2.0 * l.t.sqrt() > 0.4 {
                assert!(l.regular, "t = {}", l.t);
            }
        }
        assert!(split.a_measure > 0.0);
        assert!(split.area_integral_over_a > 0.0);
        let open = regular_split(&u, &m, 32, 0.0).unwrap();
        assert!(open.levels.iter().all(|l| l.regular == (l.degenerate == 0)));
    }

    #[test]
    fn bins_tile_the_range() {
        let (grid, m) = flat(9);
        let u = ScalarField::from_fn(grid, |p| p[0] + 0.3 * p[1]);
        let split = regular_split(&u, &m, 10, 0.0).unwrap();
        assert!((split.dt * 10.0 - (split.t_max - split.t_min)).abs() < 1e-14);
        assert_eq!(split.bin_of(split.t_min), 0);
        assert_eq!(split.bin_of(split.t_max), 9);
    }
}
