//! Tubular spaces, equitable sets of circles, and the wall structures they
//! produce: intersection counting, dilation detection, a bounded cover
//! simulator and the group-word helpers for the spiral family.

pub mod cover;
pub mod dilation;
pub mod document;
pub mod equitable;
pub mod groupword;
pub mod lattice;
pub mod space;
pub mod walls;

pub use document::{parse, serialize, Document, DocumentError};
pub use lattice::{ExactRational, LatticeVector};
pub use space::{EdgeId, Side, TubularSpace, VertexId};
