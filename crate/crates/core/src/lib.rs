//! Adaptive space-time first-order least-squares discretization of the heat
//! equation on prismatic meshes, with a triangular P1 baseline in one space dimension.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adapt;
pub mod assembly;
pub mod element;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod geometry;
pub mod mesh;
pub mod output;
pub mod problems;
pub mod quadrature;
pub mod simplicial;
pub mod space;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{Interval, Point, Simplex};
pub use adapt::{doerfler_mark, fit_rate, Mode, RunRecord};
pub use experiment::{run, ExperimentConfig, MeshFamily, RunOutcome};
pub use mesh::{PrismaticMesh, TriMesh};
pub use problems::{problem, Problem};
