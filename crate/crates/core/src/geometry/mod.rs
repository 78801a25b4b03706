//! Exact geometry on axis-aligned boxes: boxes, canonical unions, `Q[sqrt d]`.

mod aabb;
mod bound;
mod surd;
mod tile;
mod union;

pub use aabb::{Aabb, OpenBox};
pub use bound::Bound;
pub use surd::ExtendedRational;
pub use tile::{tile_check, TileReport, MAX_TILES};
pub use union::BoxUnion;
