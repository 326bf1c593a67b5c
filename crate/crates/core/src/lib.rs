//! Neighborhood-preserving Voronoi treemaps.
//!
//! A weighted hierarchy with per-node similarity data is laid out as nested
//! additively weighted power diagrams. Strongly similar nodes on the same
//! level are steered into sharing a cell edge.

pub mod error;
pub mod geometry;
pub mod layout_init;
pub mod metrics;
pub mod optimizer;
pub mod par;
pub mod pipeline;
pub mod render;
pub mod seeding;
pub mod similarity;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
