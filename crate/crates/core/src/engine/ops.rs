use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::easing::Easing;
use super::geometry::{polyline_length, Point};
use super::EngineError;
use crate::design_space::AtomicOpKind;

/// Missing fields take their identity values when deserializing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Transform {
    pub x: f64,
    pub y: f64,
    pub scale_x: f64,
    pub scale_y: f64,
    pub rotation: f64,
    pub flip_h: bool,
    pub flip_v: bool,
    pub opacity: f64,
    pub blur: f64,
}

impl Default for Transform {
    fn default() -> Self {
        Transform {
            x: 0.0,
            y: 0.0,
            scale_x: 1.0,
            scale_y: 1.0,
            rotation: 0.0,
            flip_h: false,
            flip_v: false,
            opacity: 1.0,
            blur: 0.0,
        }
    }
}

impl Transform {
    pub fn at(x: f64, y: f64) -> Self {
        Transform {
            x,
            y,
            ..Transform::default()
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = [self.x, self.y, self.scale_x, self.scale_y, self.rotation, self.opacity, self.blur]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err("transform fields must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(format!("opacity {} outside [0, 1]", self.opacity));
        }
        if self.scale_x <= 0.0 || self.scale_y <= 0.0 {
            return Err("scale factors must be positive".into());
        }
        if self.blur < 0.0 {
            return Err("blur must be non-negative".into());
        }
        Ok(())
    }
}

/// Named body-part slots of a cut-out character rig.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Head,
    Body,
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
}

impl Slot {
    pub const ALL: [Slot; 6] = [
        Slot::Head,
        Slot::Body,
        Slot::LeftArm,
        Slot::RightArm,
        Slot::LeftLeg,
        Slot::RightLeg,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Slot::Head => "head",
            Slot::Body => "body",
            Slot::LeftArm => "left_arm",
            Slot::RightArm => "right_arm",
            Slot::LeftLeg => "left_leg",
            Slot::RightLeg => "right_leg",
        }
    }

    pub fn is_leg(self) -> bool {
        matches!(self, Slot::LeftLeg | Slot::RightLeg)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Slot {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Slot::ALL
            .into_iter()
            .find(|slot| slot.token() == s)
            .ok_or_else(|| EngineError::InvalidParam {
                name: "slot".into(),
                reason: format!("unknown slot `{s}`"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AppearMode {
    #[default]
    Fade,
    Grow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisappearMode {
    #[default]
    Fade,
    Shrink,
}

fn linear() -> Easing {
    Easing::Linear
}

fn cubic() -> Easing {
    Easing::EaseInOutCubic
}

/// A parameterized primitive animation bound to one element (or one slot).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AtomicOp {
    /// Follows an absolute polyline at constant speed.
    PathMove {
        polyline: Vec<Point>,
        speed: f64,
        #[serde(default)]
        gait: bool,
        #[serde(default = "linear")]
        easing: Easing,
    },
    ScaleTo {
        to_x: f64,
        to_y: f64,
        duration: f64,
        #[serde(default = "cubic")]
        easing: Easing,
    },
    RotateBy {
        delta: f64,
        duration: f64,
        #[serde(default = "cubic")]
        easing: Easing,
    },
    FlipAxis { axis: Axis },
    /// Fades or grows in; `at` teleports the element first.
    Appear {
        #[serde(default)]
        mode: AppearMode,
        duration: f64,
        #[serde(default = "cubic")]
        easing: Easing,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Point>,
    },
    Disappear {
        #[serde(default)]
        mode: DisappearMode,
        duration: f64,
        #[serde(default = "cubic")]
        easing: Easing,
    },
    /// Sinusoidal rotation about the current angle that returns to it.
    Oscillate {
        amplitude: f64,
        cycles: f64,
        duration: f64,
        #[serde(default)]
        antiphase: bool,
    },
}

impl AtomicOp {
    pub fn kind(&self) -> AtomicOpKind {
        match self {
            AtomicOp::PathMove { .. } => AtomicOpKind::PathMovement,
            AtomicOp::ScaleTo { .. } => AtomicOpKind::Scale,
            AtomicOp::RotateBy { .. } | AtomicOp::Oscillate { .. } => AtomicOpKind::Rotation,
            AtomicOp::FlipAxis { .. } => AtomicOpKind::Flip,
            AtomicOp::Appear { .. } => AtomicOpKind::Appearance,
            AtomicOp::Disappear { .. } => AtomicOpKind::Disappearance,
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            AtomicOp::PathMove { polyline, speed, .. } => polyline_length(polyline) / speed,
            AtomicOp::ScaleTo { duration, .. }
            | AtomicOp::RotateBy { duration, .. }
            | AtomicOp::Appear { duration, .. }
            | AtomicOp::Disappear { duration, .. }
            | AtomicOp::Oscillate { duration, .. } => *duration,
            AtomicOp::FlipAxis { .. } => 0.0,
        }
    }

    pub fn easing(&self) -> Easing {
        match self {
            AtomicOp::PathMove { easing, .. }
            | AtomicOp::ScaleTo { easing, .. }
            | AtomicOp::RotateBy { easing, .. }
            | AtomicOp::Appear { easing, .. }
            | AtomicOp::Disappear { easing, .. } => *easing,
            AtomicOp::FlipAxis { .. } | AtomicOp::Oscillate { .. } => Easing::Linear,
        }
    }

    /// Whether the op can drive a single body-part slot.
    pub fn slot_capable(&self) -> bool {
        matches!(self, AtomicOp::RotateBy { .. } | AtomicOp::Oscillate { .. })
    }

    pub fn validate(&self, allow_off_canvas: bool) -> Result<(), EngineError> {
        let bad = |reason: String| Err(EngineError::InvalidOp(reason));
        let duration_ok = |d: f64| d.is_finite() && d >= 0.0;
        match self {
            AtomicOp::PathMove { polyline, speed, .. } => {
                if polyline.len() < 2 {
                    return bad("path needs at least 2 points".into());
                }
                if !(speed.is_finite() && *speed > 0.0) {
                    return bad(format!("speed must be positive, got {speed}"));
                }
                if let Some(p) = polyline.iter().find(|p| !p.is_finite()) {
                    return bad(format!("non-finite path point ({}, {})", p.x, p.y));
                }
                if !allow_off_canvas {
                    if let Some(p) = polyline.iter().find(|p| !p.on_canvas()) {
                        return Err(EngineError::OffCanvas { x: p.x, y: p.y });
                    }
                }
                Ok(())
            }
            AtomicOp::ScaleTo { to_x, to_y, duration, .. } => {
                if !(to_x.is_finite() && to_y.is_finite() && *to_x > 0.0 && *to_y > 0.0) {
                    return bad("scale targets must be positive".into());
                }
                if !duration_ok(*duration) {
                    return bad("duration must be non-negative".into());
                }
                Ok(())
            }
            AtomicOp::RotateBy { delta, duration, .. } => {
                if !delta.is_finite() || !duration_ok(*duration) {
                    return bad("rotation needs a finite angle and non-negative duration".into());
                }
                Ok(())
            }
            AtomicOp::FlipAxis { .. } => Ok(()),
            AtomicOp::Appear { duration, at, .. } => {
                if !duration_ok(*duration) {
                    return bad("duration must be non-negative".into());
                }
                if let Some(p) = at {
                    if !p.is_finite() {
                        return bad("appear position must be finite".into());
                    }
                    if !allow_off_canvas && !p.on_canvas() {
                        return Err(EngineError::OffCanvas { x: p.x, y: p.y });
                    }
                }
                Ok(())
            }
            AtomicOp::Disappear { duration, .. } => {
                if !duration_ok(*duration) {
                    return bad("duration must be non-negative".into());
                }
                Ok(())
            }
            AtomicOp::Oscillate { amplitude, cycles, duration, .. } => {
                if !amplitude.is_finite() || !(cycles.is_finite() && *cycles >= 0.0) || !duration_ok(*duration) {
                    return bad("oscillation needs finite amplitude and non-negative cycles and duration".into());
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub element: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<Slot>,
    #[serde(flatten)]
    pub op: AtomicOp,
}

impl Binding {
    pub fn element(element: impl Into<String>, op: AtomicOp) -> Self {
        Binding {
            element: element.into(),
            slot: None,
            op,
        }
    }

    pub fn slot(element: impl Into<String>, slot: Slot, op: AtomicOp) -> Self {
        Binding {
            element: element.into(),
            slot: Some(slot),
            op,
        }
    }
}

/// Bindings that run in parallel. `hold` extends the stage past its longest
/// op, e.g. to leave a bubble on screen for reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub bindings: Vec<Binding>,
    #[serde(default)]
    pub hold: f64,
}

impl Stage {
    pub fn new(bindings: Vec<Binding>) -> Self {
        Stage { bindings, hold: 0.0 }
    }

    pub fn single(binding: Binding) -> Self {
        Stage::new(vec![binding])
    }

    pub fn duration(&self) -> f64 {
        self.bindings.iter().map(|b| b.op.duration()).fold(0.0, f64::max) + self.hold
    }

    pub fn validate(&self, allow_off_canvas: bool) -> Result<(), EngineError> {
        if !(self.hold.is_finite() && self.hold >= 0.0) {
            return Err(EngineError::InvalidOp("hold must be non-negative".into()));
        }
        for (i, b) in self.bindings.iter().enumerate() {
            b.op.validate(allow_off_canvas)?;
            if b.slot.is_some() && !b.op.slot_capable() {
                return Err(EngineError::InvalidOp(format!(
                    "{} cannot target a slot",
                    b.op.kind()
                )));
            }
            let clash = self.bindings[..i]
                .iter()
                .any(|o| o.element == b.element && o.slot == b.slot);
            if clash {
                return Err(EngineError::InvalidOp(format!(
                    "element `{}` bound twice in one stage",
                    b.element
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpawnKind {
    SpeechBubble,
    ThoughtBubble,
    Text,
}

/// An auxiliary element that exists only while its clip plays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnedElement {
    pub id: String,
    pub kind: SpawnKind,
    pub text: String,
    pub lines: Vec<String>,
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<String>,
    /// Where a bubble's tail points, in canvas units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Point>,
    pub initial: Transform,
    pub z: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationClip {
    pub id: u64,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_action_id: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub spawned: Vec<SpawnedElement>,
}

impl AnimationClip {
    pub fn duration(&self) -> f64 {
        self.stages.iter().map(Stage::duration).sum()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.stages.is_empty() {
            return Err(EngineError::InvalidOp(format!("clip {} has no stages", self.id)));
        }
        let off_canvas = self
            .params
            .get("allow_off_canvas")
            .and_then(Value::as_bool)
            .unwrap_or(false);
        for s in &self.stages {
            s.validate(off_canvas)?;
        }
        Ok(())
    }
}

pub fn clip_duration(clip: &AnimationClip) -> f64 {
    clip.duration()
}

/// Sampled state of one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementState {
    pub element_id: String,
    pub transform: Transform,
    pub z: i64,
    pub visible: bool,
    /// Extra rotation per rig slot, radians.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pose: BTreeMap<Slot, f64>,
}

impl ElementState {
    pub fn new(element_id: impl Into<String>, transform: Transform, z: i64) -> Self {
        ElementState {
            element_id: element_id.into(),
            visible: transform.opacity > 0.0,
            transform,
            z,
            pose: BTreeMap::new(),
        }
    }
}
