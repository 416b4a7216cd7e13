//! Build planar "triangle packings" — star unfoldings of convex polyhedra —
//! that realize a positively weighted tree as the cut locus of a source
//! point, check every precondition of Alexandrov's gluing theorem on the
//! result, and verify the realization independently through the restricted
//! Voronoi diagram of the source images.
//!
//! The pipeline is: parse or generate a [`tree::LengthTree`], build a
//! [`packer::Packing`] under a [`packer::BuildConfig`], run
//! [`validator::validate`], and confirm with [`ridge::extract_ridge`] +
//! [`ridge::match_tree`] or the cheaper [`ridge::bisector_oracle`].
//!
//! With the default `parallel` feature, per-site Voronoi regions, the
//! bisector oracle, and the polygon simplicity scan use rayon; disabling
//! the feature falls back to equivalent sequential code.

pub mod error;
pub mod geom;
pub mod packer;
pub mod render;
pub mod ridge;
pub mod samples;
pub mod tree;
pub mod validator;

pub use error::{Error, Result};
