//! Isosurface triangulation by marching tetrahedra on the Freudenthal
//! (six-tetrahedra-per-cube) subdivision of the lattice. Neighbouring cubes
//! split shared faces along the same diagonal, so the surface is watertight.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::grid::Grid;
use crate::tensor::{cross, dot, sub, Vec3};

/// Triangle mesh with vertices in fractional grid coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

// Corner c of a cell has offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

struct Builder<'a> {
    grid: &'a Grid,
    values: &'a [f64],
    level: f64,
    mesh: TriangleMesh,
    edge_vertex: BTreeMap<(usize, usize), usize>,
}

impl Builder<'_> {
    fn vertex_on_edge(&mut self, a: usize, b: usize) -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&v) = self.edge_vertex.get(&key) {
            return v;
        }
        let (fa, fb) = (self.values[key.0] - self.level, self.values[key.1] - self.level);
        let s = fa / (fa - fb);
        let ca = self.grid.coords(key.0);
        let cb = self.grid.coords(key.1);
        let p = core::array::from_fn(|k| ca[k] as f64 + s * (cb[k] as f64 - ca[k] as f64));
        let id = self.mesh.vertices.len();
        self.mesh.vertices.push(p);
        self.edge_vertex.insert(key, id);
        id
    }

    fn emit(&mut self, tri: [usize; 3], toward: Vec3) {
        let [a, b, c] = tri.map(|i| self.mesh.vertices[i]);
        let n = cross(&sub(&b, &a), &sub(&c, &a));
        if dot(&n, &sub(&toward, &a)) < 0.0 {
            self.mesh.triangles.push([tri[0], tri[2], tri[1]]);
        } else {
            self.mesh.triangles.push(tri);
        }
    }

    fn tet(&mut self, nodes: [usize; 4]) {
        let below: Vec<usize> = (0..4).filter(|&i| self.values[nodes[i]] < self.level).collect();
        let above: Vec<usize> = (0..4).filter(|&i| self.values[nodes[i]] >= self.level).collect();
        if below.is_empty() || above.is_empty() {
            return;
        }
        let coord = |n: usize| {
            let c = self.grid.coords(n);
            [c[0] as f64, c[1] as f64, c[2] as f64]
        };
        let toward = coord(nodes[above[0]]);
        match below.len() {
            1 | 3 => {
                let (lone, others) = if below.len() == 1 { (below[0], &above) } else { (above[0], &below) };
                let v: Vec<usize> =
                    others.iter().map(|&o| self.vertex_on_edge(nodes[lone], nodes[o])).collect();
                self.emit([v[0], v[1], v[2]], toward);
            }
            _ => {
                let (b0, b1, a0, a1) = (nodes[below[0]], nodes[below[1]], nodes[above[0]], nodes[above[1]]);
                let v00 = self.vertex_on_edge(b0, a0);
                let v01 = self.vertex_on_edge(b0, a1);
                let v11 = self.vertex_on_edge(b1, a1);
                let v10 = self.vertex_on_edge(b1, a0);
                self.emit([v00, v01, v11], toward);
                self.emit([v00, v11, v10], toward);
            }
        }
    }
}

/// Triangulate `{values = level}`.
pub fn triangulate(grid: &Grid, values: &[f64], level: f64) -> TriangleMesh {
    let mut b = Builder {
        grid,
        values,
        level,
        mesh: TriangleMesh::default(),
        edge_vertex: BTreeMap::new(),
    };
    let d = grid.dims();
    for k in 0..d[2] - 1 {
        for j in 0..d[1] - 1 {
            for i in 0..d[0] - 1 {
                let corners: [usize; 8] = core::array::from_fn(|c| {
                    let o = corner_offset(c);
                    grid.index([i + o[0], j + o[1], k + o[2]])
                });
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &c in &corners {
                    lo = lo.min(values[c]);
                    hi = hi.max(values[c]);
                }
                if !(lo < level && hi >= level) {
                    continue;
                }
                for tet in TETS {
                    b.tet(tet.map(|c| corners[c]));
                }
            }
        }
    }
    b.mesh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_is_watertight_within_box_and_flat() {
        let grid = Grid::from_box([6, 6, 6], [0.0; 3], [1.0; 3]).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|n| grid.position(n)[0]).collect();
        let mesh = triangulate(&grid, &f, 0.47);
        assert!(!mesh.triangles.is_empty());
        for v in &mesh.vertices {
            assert!((v[0] - 0.47 * 5.0).abs() < 1e-12);
        }
        // every interior edge is shared by exactly two triangles
        let mut count = BTreeMap::new();
        for t in &mesh.triangles {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                *count.entry(key).or_insert(0) += 1;
            }
        }
        assert!(count.values().all(|&c| c == 1 || c == 2));
    }

    #[test]
    fn sphere_is_closed_and_outward() {
        let grid = Grid::from_box([12; 3], [-1.0; 3], [1.0; 3]).unwrap();
        let f: Vec<f64> = (0..grid.len())
            .map(|n| {
                let p = grid.position(n);
                dot(&p, &p)
            })
            .collect();
        let mesh = triangulate(&grid, &f, 0.4);
        let mut count = BTreeMap::new();
        for t in &mesh.triangles {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                *count.entry(key).or_insert(0) += 1;
            }
            let [a, b, c] = t.map(|i| grid.position_of(&mesh.vertices[i]));
            let n = cross(&sub(&b, &a), &sub(&c, &a));
            assert!(dot(&n, &a) > 0.0, "normal should point outward");
        }
        assert!(count.values().all(|&c| c == 2));
    }
}
