//! Atomic operations, staged clips, sequential timelines and sampling.

pub mod easing;
pub mod gait;
pub mod geometry;
pub mod instantiate;
pub mod ops;
pub mod sample;
pub mod timeline;

use thiserror::Error;

use crate::design_space::Role;

pub use easing::Easing;
pub use geometry::{ArcLength, Point};
pub use instantiate::{instantiate, Actor, Cast};
pub use ops::{
    clip_duration, AnimationClip, AppearMode, AtomicOp, Axis, Binding, DisappearMode, ElementState, Slot,
    SpawnKind, SpawnedElement, Stage, Transform,
};
pub use sample::{final_states, sample};
pub use timeline::Timeline;

pub mod defaults {
    pub const CANVAS_WIDTH: f64 = 1600.0;
    pub const CANVAS_HEIGHT: f64 = 900.0;
    pub const SPEED: f64 = 200.0;
    pub const OP_DURATION: f64 = 0.5;
    pub const FPS: f64 = 30.0;
    pub const MIN_SCALE_FACTOR: f64 = 0.01;

    pub const SMOOTH_MAX_POINTS: usize = 64;
    pub const FLATTEN_TOLERANCE: f64 = 1.0;

    pub const GAIT_AMPLITUDE: f64 = 0.35;
    pub const GAIT_UNITS_PER_HZ: f64 = 100.0;
    pub const GAIT_MIN_HZ: f64 = 1.0;
    pub const GAIT_MAX_HZ: f64 = 4.0;

    pub const HOP_SEGMENTS: usize = 16;

    pub const BUBBLE_HOLD: f64 = 2.0;
    pub const BUBBLE_WRAP_CHARS: usize = 24;
    pub const BUBBLE_ANCHOR_FRACTION: f64 = 0.2;
    pub const BUBBLE_FONT_SIZE: f64 = 20.0;
    pub const BUBBLE_CHAR_WIDTH: f64 = 11.0;
    pub const BUBBLE_LINE_HEIGHT: f64 = 26.0;
    pub const BUBBLE_PADDING: f64 = 14.0;
    pub const BUBBLE_TAIL: f64 = 18.0;
    pub const SPAWN_Z: i64 = 1_000_000;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("no placed element for the {role} `{name}`")]
    MissingActor { role: Role, name: String },
    #[error("element `{element}` has no {slot} slot")]
    MissingSlot { element: String, slot: Slot },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown pattern template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("invalid operation: {0}")]
    InvalidOp(String),
    #[error("point ({x}, {y}) is off the canvas")]
    OffCanvas { x: f64, y: f64 },
    #[error("unknown clip {0}")]
    UnknownClip(u64),
    #[error("bad permutation: {0}")]
    BadPermutation(String),
}
