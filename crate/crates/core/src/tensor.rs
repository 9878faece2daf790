//! Small dense algebra for 3-vectors and symmetric 3×3 tensors.

use core::ops::{Add, Mul, Sub};

pub type Vec3 = [f64; 3];

/// Storage slot of component `(i, j)` in the order xx, xy, xz, yy, yz, zz.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    const MAP: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    MAP[i][j]
}

pub const COMPONENT_NAMES: [&str; 6] = ["xx", "xy", "xz", "yy", "yz", "zz"];

/// Symmetric 3×3 tensor stored as its six independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sym3(pub [f64; 6]);

impl Sym3 {
    pub const ZERO: Sym3 = Sym3([0.0; 6]);
    pub const IDENTITY: Sym3 = Sym3([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Sym3([a, 0.0, 0.0, b, 0.0, c])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Sym3([f(0, 0), f(0, 1), f(0, 2), f(1, 1), f(1, 2), f(2, 2)])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[sym_index(i, j)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym3(self.0.map(|v| v * s))
    }

    pub fn det(&self) -> f64 {
        let [xx, xy, xz, yy, yz, zz] = self.0;
        xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz)
    }

    /// Leading principal minors, in order of size.
    pub fn leading_minors(&self) -> [f64; 3] {
        let [xx, xy, ..] = self.0;
        [xx, xx * self.0[3] - xy * xy, self.det()]
    }

    pub fn inverse(&self) -> Sym3 {
        let [xx, xy, xz, yy, yz, zz] = self.0;
        let inv_det = 1.0 / self.det();
        Sym3([
            (yy * zz - yz * yz) * inv_det,
            (xz * yz - xy * zz) * inv_det,
            (xy * yz - xz * yy) * inv_det,
            (xx * zz - xz * xz) * inv_det,
            (xy * xz - xx * yz) * inv_det,
            (xx * yy - xy * xy) * inv_det,
        ])
    }

    /// `T(a, ·)` as a covector.
    pub fn apply(&self, a: &Vec3) -> Vec3 {
        [
            self.get(0, 0) * a[0] + self.get(0, 1) * a[1] + self.get(0, 2) * a[2],
            self.get(1, 0) * a[0] + self.get(1, 1) * a[1] + self.get(1, 2) * a[2],
            self.get(2, 0) * a[0] + self.get(2, 1) * a[1] + self.get(2, 2) * a[2],
        ]
    }

    /// `T(a, b)`.
    pub fn bilinear(&self, a: &Vec3, b: &Vec3) -> f64 {
        dot(&self.apply(a), b)
    }

    /// `g^{ij} T_ij` for an inverse metric `g_inv`.
    pub fn trace_with(&self, g_inv: &Sym3) -> f64 {
        let t = &self.0;
        let h = &g_inv.0;
        t[0] * h[0] + t[3] * h[3] + t[5] * h[5] + 2.0 * (t[1] * h[1] + t[2] * h[2] + t[4] * h[4])
    }

    /// `g^{ia} g^{jb} S_ij T_ab`.
    pub fn contract_with(&self, other: &Sym3, g_inv: &Sym3) -> f64 {
        let a = mixed(g_inv, self);
        let b = mixed(g_inv, other);
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                sum += a[i][j] * b[j][i];
            }
        }
        sum
    }

    pub fn norm_sq_with(&self, g_inv: &Sym3) -> f64 {
        self.contract_with(self, g_inv)
    }
}

/// `(g^{-1} T)^i_j` as a dense matrix.
pub fn mixed(g_inv: &Sym3, t: &Sym3) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| g_inv.get(i, k) * t.get(k, j)).sum();
        }
    }
    out
}

impl Add for Sym3 {
    type Output = Sym3;
    fn add(self, rhs: Sym3) -> Sym3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        Sym3(out)
    }
}

impl Sub for Sym3 {
    type Output = Sym3;
    fn sub(self, rhs: Sym3) -> Sym3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        Sym3(out)
    }
}

impl Mul<f64> for Sym3 {
    type Output = Sym3;
    fn mul(self, rhs: f64) -> Sym3 {
        self.scale(rhs)
    }
}

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Gram–Schmidt completion: two `g`-unit vectors orthogonal to each other
/// and to the `g`-unit vector `n`.
pub fn tangent_frame(g: &Sym3, n: &Vec3) -> [Vec3; 2] {
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut frame: [Vec3; 2] = [[0.0; 3]; 2];
    let mut found = 0;
    let mut used = [false; 3];
    let mut prev: [Vec3; 3] = [*n, [0.0; 3], [0.0; 3]];
    while found < 2 {
        // Pick the remaining coordinate direction least aligned with the span so far.
        let mut best = None;
        let mut best_norm = -1.0;
        for (k, e) in basis.iter().enumerate() {
            if used[k] {
                continue;
            }
            let mut v = *e;
            for q in prev.iter().take(found + 1) {
                v = sub(&v, &scale(q, g.bilinear(&v, q)));
            }
            let nn = g.bilinear(&v, &v);
            if nn > best_norm {
                best_norm = nn;
                best = Some((k, v));
            }
        }
        let (k, v) = best.expect("three basis vectors span R^3");
        used[k] = true;
        let v = scale(&v, 1.0 / crate::math::sqrt(best_norm));
        frame[found] = v;
        prev[found + 1] = v;
        found += 1;
    }
    frame
}
