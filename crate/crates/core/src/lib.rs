// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact segmentation of time series under the Blake-Zisserman and Potts
//! functionals, fixed-partition Mumford-Shah solvers, and diagnostics for
//! the stability of minimizers under parameter changes and grid refinement.
//!
//! The global minimization over functions is reduced to a minimization over
//! partitions: for a fixed jump set the remaining quadratic problem decouples
//! into independent Neumann blocks with a unique solution, so the optimum is
//! found by dynamic programming over block costs.
//!
//! Modules, bottom-up:
//!
//! - [`grid`]: equidistant grids, cell averaging and step-function embedding.
//! - [`partitions`]: partitions of `[0, 1]`, the Hausdorff metric, thresholds.
//! - [`solvers`]: fixed-partition minimizers (tridiagonal and spectral).
//! - [`functionals`]: direct evaluation of every functional of the family.
//! - [`optimize`]: exact dynamic programming, brute force, grid-restricted MS.
//! - [`convergence`]: experiment harness for minimizer stability.

#![forbid(unsafe_code)]

pub mod convergence;
pub mod error;
pub mod exec;
pub mod functionals;
pub mod grid;
mod l2;
pub mod optimize;
pub mod partitions;
pub mod solvers;
mod tridiag;

pub use error::{Error, Result};
pub use exec::Execution;
pub use functionals::{Candidate, ObjectiveBreakdown, Observation, ParameterPoint, Resolution};
pub use grid::{ContinuousSignal, Cubic, DiscreteSignal, Grid, Piece, PrefixTable};
pub use optimize::{Caps, SegmentationResult, SolveOptions};
pub use partitions::{GridPartition, Interval, Partition};
pub use solvers::{ContinuousSolution, DiscreteSolution, PiecewiseSolution, SpectralBlock};
