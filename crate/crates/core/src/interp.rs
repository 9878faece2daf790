//! Trilinear interpolation of node fields at fractional grid coordinates.

use crate::grid::Grid;
use crate::tensor::{Sym3, Vec3};

/// The eight corner nodes and weights around fractional coordinates `c`.
pub fn trilinear_weights(grid: &Grid, c: &Vec3) -> [(usize, f64); 8] {
    let dims = grid.dims();
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        let max_base = dims[a] - 2;
        let f = c[a].max(0.0);
        let b = (libm::floor(f) as usize).min(max_base);
        base[a] = b;
        frac[a] = (f - b as f64).clamp(0.0, 1.0);
    }
    let mut out = [(0usize, 0.0); 8];
    for (corner, slot) in out.iter_mut().enumerate() {
        let bits = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
        let ijk = [base[0] + bits[0], base[1] + bits[1], base[2] + bits[2]];
        let w: f64 = (0..3).map(|a| if bits[a] == 1 { frac[a] } else { 1.0 - frac[a] }).product();
        *slot = (grid.index(ijk), w);
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Sampler {
    weights: [(usize, f64); 8],
}

impl Sampler {
    pub fn new(grid: &Grid, c: &Vec3) -> Self {
        Sampler { weights: trilinear_weights(grid, c) }
    }

    pub fn scalar(&self, f: &[f64]) -> f64 {
        self.weights.iter().map(|&(n, w)| w * f[n]).sum()
    }

    pub fn vector(&self, f: &[Vec3]) -> Vec3 {
        let mut out = [0.0; 3];
        for &(n, w) in &self.weights {
            for a in 0..3 {
                out[a] += w * f[n][a];
            }
        }
        out
    }

    pub fn sym(&self, f: &[Sym3]) -> Sym3 {
        let mut out = [0.0; 6];
        for &(n, w) in &self.weights {
            for c in 0..6 {
                out[c] += w * f[n].0[c];
            }
        }
        Sym3(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn reproduces_trilinear_functions() {
        let grid = Grid::from_box([5, 6, 7], [0.0; 3], [1.0, 2.0, 3.0]).unwrap();
        let f: Vec<f64> = (0..grid.len())
            .map(|n| {
                let [x, y, z] = grid.position(n);
                1.0 + x - 2.0 * y + z + x * y * z
            })
            .collect();
        for c in [[0.3, 1.7, 2.2], [3.99, 4.5, 6.0], [0.0, 0.0, 0.0]] {
            let s = Sampler::new(&grid, &c);
            let [x, y, z] = grid.position_of(&c);
            let want = 1.0 + x - 2.0 * y + z + x * y * z;
            assert!((s.scalar(&f) - want).abs() < 1e-12);
        }
    }
}
