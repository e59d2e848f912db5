//! Motion comic authoring engine: story analysis, action-driven animation
//! suggestions, timeline sampling, persistence and export.

pub mod analysis;
pub mod narrative;
pub mod design_space;
pub mod engine;
pub mod document;
pub mod render;
pub mod authoring;
