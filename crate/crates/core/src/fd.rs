//! Second-order finite differences: centered in the interior, one-sided at
//! boundary nodes. Every stencil is written on differences `f(n±k) - f(n)`
//! so constant data differentiates to exactly zero.

use alloc::vec::Vec;

use crate::grid::Grid;
use crate::tensor::{Sym3, Vec3};

/// `∂f/∂x_axis` at `node`.
#[inline]
pub fn d1(grid: &Grid, node: usize, axis: usize, f: impl Fn(usize) -> f64) -> f64 {
    let c = grid.coords(node)[axis];
    let n = grid.dims()[axis];
    let s = grid.stride(axis);
    let h = grid.spacing()[axis];
    let f0 = f(node);
    if c == 0 {
        (4.0 * (f(node + s) - f0) - (f(node + 2 * s) - f0)) / (2.0 * h)
    } else if c == n - 1 {
        -(4.0 * (f(node - s) - f0) - (f(node - 2 * s) - f0)) / (2.0 * h)
    } else {
        (f(node + s) - f(node - s)) / (2.0 * h)
    }
}

/// `∂²f/∂x_axis²` at `node`.
#[inline]
pub fn d2(grid: &Grid, node: usize, axis: usize, f: impl Fn(usize) -> f64) -> f64 {
    let c = grid.coords(node)[axis];
    let n = grid.dims()[axis];
    let s = grid.stride(axis);
    let h = grid.spacing()[axis];
    let f0 = f(node);
    let one_sided = |step: isize| {
        let at = |k: isize| f((node as isize + k * step) as usize) - f0;
        (-5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h)
    };
    if c == 0 {
        one_sided(s as isize)
    } else if c == n - 1 {
        one_sided(-(s as isize))
    } else {
        ((f(node + s) - f0) + (f(node - s) - f0)) / (h * h)
    }
}

/// Coordinate gradient `(∂_x f, ∂_y f, ∂_z f)` at `node`.
#[inline]
pub fn grad_at(grid: &Grid, node: usize, f: impl Fn(usize) -> f64 + Copy) -> Vec3 {
    [d1(grid, node, 0, f), d1(grid, node, 1, f), d1(grid, node, 2, f)]
}

/// Coordinate gradient of a node field at every node.
pub fn grad(grid: &Grid, values: &[f64]) -> Vec<Vec3> {
    (0..grid.len()).map(|n| grad_at(grid, n, |i| values[i])).collect()
}

/// Coordinate second derivatives `∂_i ∂_j f` at every node. Pure second
/// derivatives use the three-point stencil; mixed ones differentiate the
/// first-derivative field.
pub fn second_partials(grid: &Grid, values: &[f64]) -> Vec<Sym3> {
    let first = grad(grid, values);
    (0..grid.len())
        .map(|n| {
            let dxy = 0.5
                * (d1(grid, n, 1, |i| first[i][0]) + d1(grid, n, 0, |i| first[i][1]));
            let dxz = 0.5
                * (d1(grid, n, 2, |i| first[i][0]) + d1(grid, n, 0, |i| first[i][2]));
            let dyz = 0.5
                * (d1(grid, n, 2, |i| first[i][1]) + d1(grid, n, 1, |i| first[i][2]));
            Sym3([
                d2(grid, n, 0, |i| values[i]),
                dxy,
                dxz,
                d2(grid, n, 1, |i| values[i]),
                dyz,
                d2(grid, n, 2, |i| values[i]),
            ])
        })
        .collect()
}
