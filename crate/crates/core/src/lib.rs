//! Coarse-geometry invariants computed on finite truncations of proper
//! metric spaces: scale profiles of maps, coarsely n-to-1 certification,
//! asymptotic-dimension control functions, gradual disjointness and
//! divergence of families, coarse-openness feasibility, and orbit
//! quotients under finite isometric group actions.
//!
//! Everything here works on a [`tower::Tower`]: a proper metric space
//! presented as nested finite balls around a basepoint. Truncations can
//! only ever give *evidence* for asymptotic statements, never proofs;
//! verdict types carry the truncation radii they were computed at.

pub mod actions;
pub mod corpus;
pub mod dimension;
pub mod error;
pub mod families;
pub mod graph;
pub mod maps;
pub mod openness;
pub mod schema;
pub mod space;
pub mod tower;

pub use error::{CoarseError, Result};
pub use space::{PointId, Space};
pub use tower::Tower;
