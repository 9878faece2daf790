//! Numerical kernels for the perturbed spacetime Laplacian equation
//! `Δu + P|∇u| = h|∇u|` on a structured 3D grid.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! and the command-line front end live in the `stlab` crate.
//!
//! Layout:
//! - [`grid`], [`tensor`], [`fd`], [`expr`]: lattice, small tensor algebra,
//!   finite-difference stencils and analytic field expressions.
//! - [`metric`], [`calculus`], [`initial_data`]: metric curvature, covariant
//!   derivatives and the constraint quantities μ and J.
//! - [`laplacian`], [`linsolve`], [`solver`]: discrete Laplace–Beltrami
//!   operator, Krylov solvers and the δ-regularized Picard solver.
//! - [`interp`], [`marching`], [`levelset`], [`coarea`]: level-set
//!   extraction, surface geometry and coarea slicing.
//! - [`boundary`], [`lab`], [`report`]: boundary geometry, the verification
//!   checks and their reports.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boundary;
pub mod calculus;
pub mod coarea;
pub mod error;
pub mod expr;
pub mod fd;
pub mod grid;
pub mod initial_data;
pub mod interp;
pub mod lab;
pub mod laplacian;
pub mod levelset;
pub mod linsolve;
pub mod marching;
pub mod math;
pub mod metric;
pub mod report;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use grid::{BoundaryTag, Face, Grid, ScalarField, SymTensorField, VectorField};
pub use metric::{build_metric, MetricData, MetricSpec};
