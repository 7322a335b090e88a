//! Detection, refinement, aggregation and evaluation of 3D reflection-symmetry
//! planes on meshes and point clouds.

pub mod aggregate;
pub mod cli;
pub mod detector;
pub mod error;
pub mod geom;
pub mod hypothesis;
pub mod io;
pub mod metrics;
pub mod pointcloud;
pub mod prediction;
pub mod registration;
pub mod rng;
pub mod shapes;
pub mod symmetrize;

pub use error::{Error, Result};
