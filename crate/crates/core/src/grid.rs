//! Structured lattice and the node fields that live on it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::{Sym3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Face {
    XLo,
    XHi,
    YLo,
    YHi,
    ZLo,
    ZHi,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XLo, Face::XHi, Face::YLo, Face::YHi, Face::ZLo, Face::ZHi];

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    pub fn is_upper(self) -> bool {
        self as usize % 2 == 1
    }

    /// Sign of the outward coordinate direction.
    pub fn outward_sign(self) -> f64 {
        if self.is_upper() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::XLo => "x_lo",
            Face::XHi => "x_hi",
            Face::YLo => "y_lo",
            Face::YHi => "y_hi",
            Face::ZLo => "z_lo",
            Face::ZHi => "z_hi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    #[default]
    Free,
}

/// Node lattice with uniform spacing per axis. Node `(i, j, k)` sits at
/// `origin + (i, j, k) * spacing` and has flat index `i + nx (j + ny k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    tags: [BoundaryTag; 6],
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            if dims[axis] < 5 {
                return Err(Error::GridTooSmall { axis, nodes: dims[axis] });
            }
            if !(spacing[axis] > 0.0) || !spacing[axis].is_finite() {
                return Err(Error::BadSpacing { axis, spacing: spacing[axis] });
            }
        }
        Ok(Grid { dims, spacing, origin, tags: [BoundaryTag::Free; 6] })
    }

    /// Grid spanning the box `[lower, upper]` with `dims` nodes per axis.
    pub fn from_box(dims: [usize; 3], lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for axis in 0..3 {
            if dims[axis] < 5 {
                return Err(Error::GridTooSmall { axis, nodes: dims[axis] });
            }
            spacing[axis] = (upper[axis] - lower[axis]) / (dims[axis] - 1) as f64;
        }
        Grid::new(dims, spacing, lower)
    }

    pub fn with_tags(mut self, tags: [BoundaryTag; 6]) -> Self {
        self.tags = tags;
        self
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn upper(&self) -> [f64; 3] {
        core::array::from_fn(|a| self.origin[a] + self.spacing[a] * (self.dims[a] - 1) as f64)
    }

    pub fn tag(&self, face: Face) -> BoundaryTag {
        self.tags[face.index()]
    }

    pub fn tags(&self) -> [BoundaryTag; 6] {
        self.tags
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat-index offset of one step along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    #[inline]
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    #[inline]
    pub fn coords(&self, node: usize) -> [usize; 3] {
        let i = node % self.dims[0];
        let rest = node / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn position(&self, node: usize) -> Vec3 {
        let c = self.coords(node);
        core::array::from_fn(|a| self.origin[a] + self.spacing[a] * c[a] as f64)
    }

    /// Physical position of fractional grid coordinates.
    pub fn position_of(&self, coords: &Vec3) -> Vec3 {
        core::array::from_fn(|a| self.origin[a] + self.spacing[a] * coords[a])
    }

    /// Distance in nodes to the nearest boundary face.
    pub fn depth(&self, node: usize) -> usize {
        let c = self.coords(node);
        (0..3).map(|a| c[a].min(self.dims[a] - 1 - c[a])).min().unwrap_or(0)
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.depth(node) == 0
    }

    pub fn on_face(&self, node: usize, face: Face) -> bool {
        let c = self.coords(node)[face.axis()];
        if face.is_upper() {
            c == self.dims[face.axis()] - 1
        } else {
            c == 0
        }
    }

    /// Nodes of a face, ordered with the lower tangential axis fastest.
    pub fn face_nodes(&self, face: Face) -> Vec<usize> {
        let axis = face.axis();
        let fixed = if face.is_upper() { self.dims[axis] - 1 } else { 0 };
        let (a, b) = tangential_axes(axis);
        let mut out = Vec::with_capacity(self.dims[a] * self.dims[b]);
        for jb in 0..self.dims[b] {
            for ja in 0..self.dims[a] {
                let mut ijk = [0; 3];
                ijk[axis] = fixed;
                ijk[a] = ja;
                ijk[b] = jb;
                out.push(self.index(ijk));
            }
        }
        out
    }

    /// Trapezoid quadrature weight of a node for volume integrals (coordinate measure).
    pub fn volume_weight(&self, node: usize) -> f64 {
        let c = self.coords(node);
        (0..3)
            .map(|a| {
                let w = if c[a] == 0 || c[a] == self.dims[a] - 1 { 0.5 } else { 1.0 };
                w * self.spacing[a]
            })
            .product()
    }

    /// Trapezoid quadrature weight of a face node (coordinate measure on the face).
    pub fn face_weight(&self, node: usize, face: Face) -> f64 {
        let c = self.coords(node);
        let (a, b) = tangential_axes(face.axis());
        [a, b]
            .iter()
            .map(|&ax| {
                let w = if c[ax] == 0 || c[ax] == self.dims[ax] - 1 { 0.5 } else { 1.0 };
                w * self.spacing[ax]
            })
            .product()
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dims == other.dims && self.spacing == other.spacing && self.origin == other.origin
    }
}

/// The two axes spanning a face normal to `axis`, in increasing order.
pub fn tangential_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength { expected: grid.len(), found: values.len() });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.len()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(Vec3) -> f64) -> Self {
        let values = (0..grid.len()).map(|n| f(grid.position(n))).collect();
        ScalarField { grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub values: Vec<Vec3>,
}

impl VectorField {
    pub fn new(grid: Grid, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength { expected: grid.len(), found: values.len() });
        }
        Ok(VectorField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField { grid, values: vec![[0.0; 3]; grid.len()] }
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    pub grid: Grid,
    pub values: Vec<Sym3>,
}

impl SymTensorField {
    pub fn new(grid: Grid, values: Vec<Sym3>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength { expected: grid.len(), found: values.len() });
        }
        Ok(SymTensorField { grid, values })
    }

    pub fn constant(grid: Grid, value: Sym3) -> Self {
        SymTensorField { grid, values: vec![value; grid.len()] }
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v.0[c]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_degenerate_grids() {
        assert_eq!(
            Grid::new([4, 5, 5], [1.0; 3], [0.0; 3]),
            Err(Error::GridTooSmall { axis: 0, nodes: 4 })
        );
        assert!(matches!(
            Grid::new([5, 5, 5], [1.0, 0.0, 1.0], [0.0; 3]),
            Err(Error::BadSpacing { axis: 1, .. })
        ));
    }

    #[test]
    fn index_roundtrip_and_weights() {
        let g = Grid::from_box([5, 6, 7], [0.0; 3], [1.0, 2.0, 3.0]).unwrap();
        for n in 0..g.len() {
            assert_eq!(g.index(g.coords(n)), n);
        }
        let vol: f64 = (0..g.len()).map(|n| g.volume_weight(n)).sum();
        assert!((vol - 6.0).abs() < 1e-12);
        let area: f64 = g.face_nodes(Face::ZHi).iter().map(|&n| g.face_weight(n, Face::ZHi)).sum();
        assert!((area - 2.0).abs() < 1e-12);
        assert!(g.face_nodes(Face::XLo).iter().all(|&n| g.on_face(n, Face::XLo)));
    }
}
