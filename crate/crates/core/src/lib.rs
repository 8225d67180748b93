//! A desk-scale numerical laboratory for weighted weak-type norm inequalities
//! on a one-dimensional dyadic grid.
//!
//! Everything lives on the bounded domain `[0, 2^K)` split into `2^(K+L)`
//! cells of width `2^-L`; functions are piecewise constant on cells, so
//! integrals, rearrangements, oscillations and norms all have exact finite
//! algorithms. On top of that substrate the crate builds maximal operators,
//! Orlicz averages, sparse families with pointwise domination, weight
//! condition estimators (reverse Hölder and its maximal-indicator weakenings
//! over single cubes and disjoint families), the truncated Hilbert transform,
//! and an experiment harness that measures best constants in the weak-type
//! inequalities relating them, hunts for extremal weights, and sweeps
//! resolutions.
//!
//! All values are immutable after construction and every operation is a pure
//! function, so everything is safe to evaluate in parallel.

pub mod error;
pub mod grid;
pub mod lab;
pub mod maximal;
pub mod norms;
pub mod orlicz;
pub mod oscillation;
pub mod rearrange;
pub mod report;
pub mod singular;
pub mod sparse;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{integrate, CellSet, Cube, CubeFamily, FamilyKind, GridDomain, GridFunction};
