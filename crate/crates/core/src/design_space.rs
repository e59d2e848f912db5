//! Action-category × atomic-operation design space: observed frequencies,
//! the built-in pattern templates, and frequency-ranked suggestions.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::defaults;
use crate::narrative::{ActionCategory, SvoAction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignSpaceError {
    #[error("action {0} has no category")]
    UnclassifiedAction(usize),
    #[error("unknown pattern template `{0}`")]
    UnknownTemplate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicOpKind {
    PathMovement,
    Scale,
    Rotation,
    Flip,
    Appearance,
    Disappearance,
}

impl AtomicOpKind {
    pub const ALL: [AtomicOpKind; 6] = [
        AtomicOpKind::PathMovement,
        AtomicOpKind::Scale,
        AtomicOpKind::Rotation,
        AtomicOpKind::Flip,
        AtomicOpKind::Appearance,
        AtomicOpKind::Disappearance,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn token(self) -> &'static str {
        match self {
            AtomicOpKind::PathMovement => "path_movement",
            AtomicOpKind::Scale => "scale",
            AtomicOpKind::Rotation => "rotation",
            AtomicOpKind::Flip => "flip",
            AtomicOpKind::Appearance => "appearance",
            AtomicOpKind::Disappearance => "disappearance",
        }
    }
}

impl fmt::Display for AtomicOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// How often each atomic operation was observed for each action category
/// across the surveyed motion comics. Rows follow [`ActionCategory::ALL`],
/// columns follow [`AtomicOpKind::ALL`].
const COUNTS: [[u32; 6]; 8] = [
    [24, 0, 0, 0, 6, 4],      // atrans
    [593, 24, 0, 0, 99, 18],  // ptrans
    [112, 0, 80, 0, 32, 0],   // propel
    [106, 32, 395, 18, 0, 0], // move
    [20, 0, 0, 0, 0, 32],     // ingest
    [15, 0, 0, 0, 46, 0],     // expel
    [8, 23, 0, 0, 168, 0],    // speak
    [6, 8, 0, 0, 76, 0],      // mental
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: [[u32; 6]; 8],
}

impl FrequencyTable {
    pub fn observed() -> &'static FrequencyTable {
        static TABLE: FrequencyTable = FrequencyTable { counts: COUNTS };
        &TABLE
    }

    pub fn count(&self, category: ActionCategory, op: AtomicOpKind) -> u32 {
        self.counts[category.ordinal()][op.ordinal()]
    }

    pub fn row_total(&self, category: ActionCategory) -> u32 {
        self.counts[category.ordinal()].iter().sum()
    }

    pub fn col_total(&self, op: AtomicOpKind) -> u32 {
        self.counts.iter().map(|row| row[op.ordinal()]).sum()
    }

    pub fn grand_total(&self) -> u32 {
        self.counts.iter().flatten().sum()
    }
}

/// Op kinds with a nonzero count in the category's row, in column order.
pub fn nonzero_ops(category: ActionCategory) -> Vec<AtomicOpKind> {
    let table = FrequencyTable::observed();
    AtomicOpKind::ALL
        .into_iter()
        .filter(|op| table.count(category, *op) > 0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamKind {
    Number { min: f64, max: f64 },
    Bool,
    Point,
    Polyline,
    Choice { options: Vec<String> },
    Text,
    Element,
    Slot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub default: Value,
    pub description: String,
}

fn param(name: &str, kind: ParamKind, unit: Option<&str>, default: Value, description: &str) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        kind,
        unit: unit.map(Into::into),
        default,
        description: description.into(),
    }
}

/// The element roles a template animates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Subject,
    Object,
    Receiver,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Subject => "subject",
            Role::Object => "object",
            Role::Receiver => "receiver",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTemplate {
    pub id: String,
    pub label: String,
    pub category: ActionCategory,
    /// Ordered stages, one op kind each.
    pub op_kinds: Vec<AtomicOpKind>,
    pub roles: Vec<Role>,
    pub parameters: Vec<ParamSpec>,
    pub figure_ref: String,
}

impl PatternTemplate {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

fn speed() -> ParamSpec {
    param(
        "speed",
        ParamKind::Number { min: 1.0, max: 5000.0 },
        Some("units/s"),
        json!(defaults::SPEED),
        "travel speed along the path",
    )
}

fn path() -> ParamSpec {
    param(
        "path",
        ParamKind::Polyline,
        Some("canvas units"),
        Value::Null,
        "drawn trajectory; a straight line to the target when omitted",
    )
}

fn target() -> ParamSpec {
    param(
        "target",
        ParamKind::Point,
        Some("canvas units"),
        Value::Null,
        "destination; the other actor's position when omitted",
    )
}

fn duration(default: f64, what: &str) -> ParamSpec {
    param(
        "duration",
        ParamKind::Number { min: 0.0, max: 60.0 },
        Some("s"),
        json!(default),
        what,
    )
}

fn easing(default: &str) -> ParamSpec {
    param(
        "easing",
        ParamKind::Choice {
            options: vec!["linear".into(), "ease_in_out_cubic".into()],
        },
        None,
        json!(default),
        "timing curve",
    )
}

fn off_canvas() -> ParamSpec {
    param(
        "allow_off_canvas",
        ParamKind::Bool,
        None,
        json!(false),
        "permit path points outside the canvas",
    )
}

fn gait() -> ParamSpec {
    param(
        "gait",
        ParamKind::Bool,
        None,
        json!(true),
        "alternate the legs while travelling (characters with leg parts)",
    )
}

fn appear_mode(options: [&str; 2]) -> ParamSpec {
    param(
        "mode",
        ParamKind::Choice {
            options: options.iter().map(|s| s.to_string()).collect(),
        },
        None,
        json!(options[0]),
        "how the element enters or leaves",
    )
}

fn text() -> ParamSpec {
    param(
        "text",
        ParamKind::Text,
        None,
        Value::Null,
        "displayed text; the action's object when omitted",
    )
}

fn hold() -> ParamSpec {
    param(
        "hold",
        ParamKind::Number { min: 0.0, max: 60.0 },
        Some("s"),
        json!(defaults::BUBBLE_HOLD),
        "time the text stays on screen after entering",
    )
}

fn element_overrides(roles: &[Role]) -> Vec<ParamSpec> {
    roles
        .iter()
        .map(|r| {
            let name = match r {
                Role::Subject => "subject_element",
                Role::Object => "object_element",
                Role::Receiver => "receiver_element",
            };
            param(
                name,
                ParamKind::Element,
                None,
                Value::Null,
                "placed element to use for this role; the first placement of the named entity when omitted",
            )
        })
        .collect()
}

struct Def {
    id: &'static str,
    label: &'static str,
    category: ActionCategory,
    op_kinds: &'static [AtomicOpKind],
    roles: &'static [Role],
    figure_ref: &'static str,
    params: fn() -> Vec<ParamSpec>,
}

use ActionCategory as C;
use AtomicOpKind as K;

const DEFS: &[Def] = &[
    Def {
        id: "atrans.transfer_path",
        label: "Transfer Path",
        category: C::Atrans,
        op_kinds: &[K::PathMovement],
        roles: &[Role::Object, Role::Receiver],
        figure_ref: "A.1",
        params: || vec![speed(), path(), easing("linear"), off_canvas()],
    },
    Def {
        id: "atrans.vanish_reappear_at_recipient",
        label: "Vanish-Reappear",
        category: C::Atrans,
        op_kinds: &[K::Disappearance, K::Appearance],
        roles: &[Role::Object, Role::Receiver],
        figure_ref: "A.2",
        params: || vec![duration(defaults::OP_DURATION, "length of each fade"), easing("ease_in_out_cubic")],
    },
    Def {
        id: "ptrans.path",
        label: "Path",
        category: C::Ptrans,
        op_kinds: &[K::PathMovement],
        roles: &[Role::Subject],
        figure_ref: "B.1",
        params: || vec![speed(), path(), target(), gait(), easing("linear"), off_canvas()],
    },
    Def {
        id: "ptrans.dis_reappear",
        label: "Dis-Reappear",
        category: C::Ptrans,
        op_kinds: &[K::Disappearance, K::Appearance],
        roles: &[Role::Subject],
        figure_ref: "B.2",
        params: || {
            vec![
                target(),
                duration(defaults::OP_DURATION, "length of each fade"),
                appear_mode(["fade", "shrink"]),
                easing("ease_in_out_cubic"),
            ]
        },
    },
    Def {
        id: "propel.strike",
        label: "Strike",
        category: C::Propel,
        op_kinds: &[K::Rotation, K::PathMovement],
        roles: &[Role::Subject, Role::Object],
        figure_ref: "H",
        params: || {
            vec![
                param("angle", ParamKind::Number { min: -6.3, max: 6.3 }, Some("rad"), json!(-1.2), "swing of the striking limb"),
                param("slot", ParamKind::Slot, None, json!("right_arm"), "limb that strikes"),
                duration(defaults::OP_DURATION, "length of the swing"),
                speed(),
                target(),
            ]
        },
    },
    Def {
        id: "propel.launch",
        label: "Launch",
        category: C::Propel,
        op_kinds: &[K::Appearance, K::PathMovement],
        roles: &[Role::Subject, Role::Object],
        figure_ref: "H",
        params: || vec![duration(defaults::OP_DURATION, "length of the fade-in"), speed(), path(), target(), off_canvas()],
    },
    Def {
        id: "move.limb_gesture",
        label: "Limb Gesture",
        category: C::Move,
        op_kinds: &[K::Rotation],
        roles: &[Role::Subject],
        figure_ref: "G",
        params: || {
            vec![
                param("slot", ParamKind::Slot, None, json!("right_arm"), "limb to rotate"),
                param("angle", ParamKind::Number { min: -6.3, max: 6.3 }, Some("rad"), json!(-1.0), "rotation of the limb"),
                duration(defaults::OP_DURATION, "length of the gesture"),
                easing("ease_in_out_cubic"),
            ]
        },
    },
    Def {
        id: "move.nod",
        label: "Nod",
        category: C::Move,
        op_kinds: &[K::Rotation],
        roles: &[Role::Subject],
        figure_ref: "G",
        params: || {
            vec![
                param("cycles", ParamKind::Number { min: 0.5, max: 20.0 }, None, json!(2.0), "number of nods"),
                param("amplitude", ParamKind::Number { min: 0.0, max: 3.2 }, Some("rad"), json!(0.25), "head tilt"),
                duration(1.0, "length of the nodding"),
            ]
        },
    },
    Def {
        id: "move.wave",
        label: "Wave",
        category: C::Move,
        op_kinds: &[K::Rotation],
        roles: &[Role::Subject],
        figure_ref: "G",
        params: || {
            vec![
                param("cycles", ParamKind::Number { min: 0.5, max: 20.0 }, None, json!(3.0), "number of waves"),
                param("amplitude", ParamKind::Number { min: 0.0, max: 3.2 }, Some("rad"), json!(0.5), "arm swing"),
                param("slot", ParamKind::Slot, None, json!("right_arm"), "waving limb"),
                duration(1.5, "length of the waving"),
            ]
        },
    },
    Def {
        id: "move.hop",
        label: "Hop",
        category: C::Move,
        op_kinds: &[K::PathMovement],
        roles: &[Role::Subject],
        figure_ref: "G",
        params: || {
            vec![
                param("height", ParamKind::Number { min: 0.0, max: 900.0 }, Some("canvas units"), json!(60.0), "apex above the start"),
                param("distance", ParamKind::Number { min: -1600.0, max: 1600.0 }, Some("canvas units"), json!(80.0), "horizontal travel"),
                speed(),
            ]
        },
    },
    Def {
        id: "ingest.approach_then_vanish",
        label: "Approach-Vanish",
        category: C::Ingest,
        op_kinds: &[K::PathMovement, K::Disappearance],
        roles: &[Role::Subject, Role::Object],
        figure_ref: "C.1",
        params: || vec![speed(), path(), duration(defaults::OP_DURATION, "length of the fade-out"), off_canvas()],
    },
    Def {
        id: "ingest.vanish",
        label: "Vanish",
        category: C::Ingest,
        op_kinds: &[K::Disappearance],
        roles: &[Role::Object],
        figure_ref: "C.2",
        params: || vec![duration(defaults::OP_DURATION, "length of the fade-out"), appear_mode(["fade", "shrink"])],
    },
    Def {
        id: "expel.emerge_then_path",
        label: "Emerge-Path",
        category: C::Expel,
        op_kinds: &[K::Appearance, K::PathMovement],
        roles: &[Role::Subject, Role::Object],
        figure_ref: "D.1",
        params: || vec![duration(defaults::OP_DURATION, "length of the fade-in"), speed(), path(), target(), off_canvas()],
    },
    Def {
        id: "speak.bubble_appear",
        label: "Dialogue Box",
        category: C::Speak,
        op_kinds: &[K::Appearance],
        roles: &[Role::Subject],
        figure_ref: "E.1",
        params: || vec![text(), duration(defaults::OP_DURATION, "length of the fade-in"), hold()],
    },
    Def {
        id: "speak.bubble_scale_in",
        label: "Dialogue Box (Scale)",
        category: C::Speak,
        op_kinds: &[K::Scale],
        roles: &[Role::Subject],
        figure_ref: "E.1",
        params: || vec![text(), duration(defaults::OP_DURATION, "length of the scale-in"), hold()],
    },
    Def {
        id: "speak.onomatopoeia_text",
        label: "Onomatopoeia",
        category: C::Speak,
        op_kinds: &[K::Appearance],
        roles: &[Role::Subject],
        figure_ref: "E.2",
        params: || vec![text(), duration(defaults::OP_DURATION, "length of the fade-in"), hold()],
    },
    Def {
        id: "mental.thought_bubble_appear",
        label: "Thought Bubble",
        category: C::Mental,
        op_kinds: &[K::Appearance],
        roles: &[Role::Subject],
        figure_ref: "F.1",
        params: || vec![text(), duration(defaults::OP_DURATION, "length of the fade-in"), hold()],
    },
    Def {
        id: "mental.thought_bubble_scale_in",
        label: "Thought Bubble (Scale)",
        category: C::Mental,
        op_kinds: &[K::Scale],
        roles: &[Role::Subject],
        figure_ref: "F.1",
        params: || vec![text(), duration(defaults::OP_DURATION, "length of the scale-in"), hold()],
    },
];

/// All built-in templates, grouped by category in [`ActionCategory::ALL`]
/// order and in registry order within a category.
pub fn registry() -> &'static [PatternTemplate] {
    static REGISTRY: OnceLock<Vec<PatternTemplate>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut all: Vec<PatternTemplate> = Vec::with_capacity(DEFS.len());
        for category in ActionCategory::ALL {
            for def in DEFS.iter().filter(|d| d.category == category) {
                let roles = def.roles.to_vec();
                let mut parameters = (def.params)();
                parameters.extend(element_overrides(&roles));
                all.push(PatternTemplate {
                    id: def.id.into(),
                    label: def.label.into(),
                    category: def.category,
                    op_kinds: def.op_kinds.to_vec(),
                    roles,
                    parameters,
                    figure_ref: def.figure_ref.into(),
                });
            }
        }
        all
    })
}

pub fn template(id: &str) -> Result<&'static PatternTemplate, DesignSpaceError> {
    registry()
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| DesignSpaceError::UnknownTemplate(id.to_string()))
}

pub fn patterns_for(category: ActionCategory) -> Vec<&'static PatternTemplate> {
    registry().iter().filter(|t| t.category == category).collect()
}

/// A composite pattern is scored by its rarest constituent op.
pub fn score_pattern(template: &PatternTemplate) -> u32 {
    let table = FrequencyTable::observed();
    template
        .op_kinds
        .iter()
        .map(|op| table.count(template.category, *op))
        .min()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationSuggestion {
    pub template: PatternTemplate,
    pub score: u32,
    pub rank: usize,
}

pub fn suggest_for_category(category: ActionCategory) -> Vec<AnimationSuggestion> {
    let mut scored: Vec<(&PatternTemplate, u32)> = patterns_for(category)
        .into_iter()
        .map(|t| (t, score_pattern(t)))
        .collect();
    // Stable sort keeps registry order among equal scores.
    scored.sort_by_key(|s| std::cmp::Reverse(s.1));
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (t, score))| AnimationSuggestion {
            template: t.clone(),
            score,
            rank: i + 1,
        })
        .collect()
}

pub fn suggest(action: &SvoAction) -> Result<Vec<AnimationSuggestion>, DesignSpaceError> {
    let category = action
        .category
        .ok_or(DesignSpaceError::UnclassifiedAction(action.id))?;
    Ok(suggest_for_category(category))
}

/// Machine-readable dump of the table and registry for clients.
pub fn design_space_document() -> Value {
    let table = FrequencyTable::observed();
    json!({
        "atomic_operations": AtomicOpKind::ALL.iter().map(|k| k.token()).collect::<Vec<_>>(),
        "categories": ActionCategory::ALL.iter().map(|c| c.token()).collect::<Vec<_>>(),
        "frequency_table": {
            "rows": ActionCategory::ALL.iter().map(|c| json!({
                "category": c.token(),
                "counts": AtomicOpKind::ALL.iter().map(|k| table.count(*c, *k)).collect::<Vec<_>>(),
                "total": table.row_total(*c),
            })).collect::<Vec<_>>(),
            "column_totals": AtomicOpKind::ALL.iter().map(|k| table.col_total(*k)).collect::<Vec<_>>(),
            "grand_total": table.grand_total(),
        },
        "templates": registry().iter().map(|t| {
            let mut v = serde_json::to_value(t).expect("template serializes");
            v["score"] = json!(score_pattern(t));
            v
        }).collect::<Vec<_>>(),
        "scoring": "minimum frequency over the template's op kinds within its category row",
    })
}
