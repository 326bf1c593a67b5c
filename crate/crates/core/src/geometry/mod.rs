//! Power-diagram kernel: polygons, clipped cells, adjacency and relaxation.

pub mod neighbors;
pub mod point;
pub mod polygon;
pub mod power;
pub mod relax;

pub use neighbors::{cell_neighbors, NeighborMap};
pub use point::{Aabb, Point, Segment};
pub use polygon::{ConvexPolygon, HalfPlane, Measures};
pub use power::{power_cells, power_diagram, Cell, Diagram};
pub use relax::{adapt_weights, lloyd_step, DEFAULT_ADAPT_RATE};
