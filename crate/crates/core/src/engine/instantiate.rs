use serde_json::{Map, Value};

use super::defaults;
use super::easing::Easing;
use super::gait::apply_gait;
use super::geometry::{smooth_path, Point};
use super::ops::{
    AnimationClip, AppearMode, AtomicOp, Binding, DisappearMode, ElementState, Slot, SpawnKind, SpawnedElement,
    Stage, Transform,
};
use super::EngineError;
use crate::design_space::{ParamKind, PatternTemplate, Role};
use crate::narrative::SvoAction;

/// A placed element as instantiation sees it: its state at the end of the
/// scene's current timeline plus rig facts.
#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub element_id: String,
    pub entity: String,
    pub state: ElementState,
    pub slots: Vec<Slot>,
    pub width: f64,
    pub height: f64,
    /// Offset from the anchor to the top edge of the topmost slot; negative is up.
    pub top: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cast {
    pub actors: Vec<Actor>,
    pub clip_id: u64,
}

/// Lower-cased name without a leading article.
pub fn normalize_name(name: &str) -> String {
    let lower = name.trim().to_lowercase();
    for article in ["the ", "a ", "an "] {
        if let Some(rest) = lower.strip_prefix(article) {
            return rest.trim().to_string();
        }
    }
    lower
}

/// Template parameters checked against the template's schema.
pub struct Params<'a> {
    template: &'a PatternTemplate,
    values: Map<String, Value>,
}

fn invalid(name: &str, reason: impl Into<String>) -> EngineError {
    EngineError::InvalidParam {
        name: name.to_string(),
        reason: reason.into(),
    }
}

pub fn parse_point(name: &str, v: &Value) -> Result<Point, EngineError> {
    let p = match v {
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(x), Some(y)) => Point::new(x, y),
            _ => return Err(invalid(name, "point coordinates must be numbers")),
        },
        Value::Object(o) => match (o.get("x").and_then(Value::as_f64), o.get("y").and_then(Value::as_f64)) {
            (Some(x), Some(y)) => Point::new(x, y),
            _ => return Err(invalid(name, "point needs numeric x and y")),
        },
        _ => return Err(invalid(name, "expected a point {x, y} or [x, y]")),
    };
    Ok(p)
}

impl<'a> Params<'a> {
    pub fn parse(template: &'a PatternTemplate, params: &Value) -> Result<Self, EngineError> {
        let values = match params {
            Value::Null => Map::new(),
            Value::Object(m) => m.clone(),
            _ => return Err(invalid("params", "expected a JSON object")),
        };
        for (name, v) in &values {
            let spec = template
                .param(name)
                .ok_or_else(|| EngineError::UnknownParam(name.clone()))?;
            if v.is_null() {
                continue;
            }
            match &spec.kind {
                ParamKind::Number { min, max } => {
                    let n = v.as_f64().ok_or_else(|| invalid(name, "expected a number"))?;
                    if !(n >= *min && n <= *max) {
                        return Err(invalid(name, format!("{n} outside [{min}, {max}]")));
                    }
                }
                ParamKind::Bool => {
                    v.as_bool().ok_or_else(|| invalid(name, "expected a boolean"))?;
                }
                ParamKind::Point => {
                    parse_point(name, v)?;
                }
                ParamKind::Polyline => {
                    let a = v.as_array().ok_or_else(|| invalid(name, "expected an array of points"))?;
                    for p in a {
                        parse_point(name, p)?;
                    }
                }
                ParamKind::Choice { options } => {
                    let s = v.as_str().ok_or_else(|| invalid(name, "expected a string"))?;
                    if !options.iter().any(|o| o == s) {
                        return Err(invalid(name, format!("`{s}` is not one of {options:?}")));
                    }
                }
                ParamKind::Text | ParamKind::Element => {
                    v.as_str().ok_or_else(|| invalid(name, "expected a string"))?;
                }
                ParamKind::Slot => {
                    let s = v.as_str().ok_or_else(|| invalid(name, "expected a slot name"))?;
                    s.parse::<Slot>()?;
                }
            }
        }
        Ok(Params { template, values })
    }

    fn given(&self, name: &str) -> Option<&Value> {
        self.values.get(name).filter(|v| !v.is_null())
    }

    fn value(&self, name: &str) -> Option<&Value> {
        self.given(name)
            .or_else(|| self.template.param(name).map(|p| &p.default).filter(|v| !v.is_null()))
    }

    fn number(&self, name: &str) -> f64 {
        self.value(name).and_then(Value::as_f64).expect("numeric parameter with default")
    }

    fn flag(&self, name: &str) -> bool {
        self.value(name).and_then(Value::as_bool).unwrap_or(false)
    }

    fn text(&self, name: &str) -> Option<String> {
        self.given(name).and_then(Value::as_str).map(str::to_string)
    }

    fn choice(&self, name: &str) -> String {
        self.value(name).and_then(Value::as_str).unwrap_or_default().to_string()
    }

    fn slot(&self) -> Slot {
        self.value("slot")
            .and_then(Value::as_str)
            .and_then(|s| s.parse().ok())
            .unwrap_or(Slot::RightArm)
    }

    fn point(&self, name: &str) -> Option<Point> {
        self.given(name).map(|v| parse_point(name, v).expect("checked in parse"))
    }

    fn polyline(&self, name: &str) -> Option<Vec<Point>> {
        self.given(name).and_then(Value::as_array).map(|a| {
            a.iter()
                .map(|p| parse_point(name, p).expect("checked in parse"))
                .collect()
        })
    }

    fn easing(&self) -> Easing {
        match self.value("easing").and_then(Value::as_str) {
            Some("linear") => Easing::Linear,
            _ => Easing::EaseInOutCubic,
        }
    }

    fn path_easing(&self) -> Easing {
        match self.value("easing").and_then(Value::as_str) {
            Some("ease_in_out_cubic") => Easing::EaseInOutCubic,
            _ => Easing::Linear,
        }
    }

    fn allow_off_canvas(&self) -> bool {
        self.flag("allow_off_canvas")
    }
}

struct Builder<'a> {
    template: &'a PatternTemplate,
    action: &'a SvoAction,
    cast: &'a Cast,
    params: Params<'a>,
}

fn role_key(role: Role) -> &'static str {
    match role {
        Role::Subject => "subject_element",
        Role::Object => "object_element",
        Role::Receiver => "receiver_element",
    }
}

impl<'a> Builder<'a> {
    fn role_name(&self, role: Role) -> &'a str {
        match role {
            Role::Subject => &self.action.subject,
            Role::Object => &self.action.object,
            Role::Receiver => &self.action.receiver,
        }
    }

    fn find(&self, role: Role) -> Result<Option<&'a Actor>, EngineError> {
        if let Some(id) = self.params.text(role_key(role)) {
            return self
                .cast
                .actors
                .iter()
                .find(|a| a.element_id == id)
                .map(Some)
                .ok_or(EngineError::UnknownElement(id));
        }
        let name = normalize_name(self.role_name(role));
        if name.is_empty() {
            return Ok(None);
        }
        Ok(self.cast.actors.iter().find(|a| normalize_name(&a.entity) == name))
    }

    fn actor(&self, role: Role) -> Result<&'a Actor, EngineError> {
        self.find(role)?.ok_or_else(|| EngineError::MissingActor {
            role,
            name: self.role_name(role).to_string(),
        })
    }

    fn speed(&self) -> f64 {
        self.params.number("speed")
    }

    /// Path from `start`: the drawn path if given, else a straight line to
    /// the `target` parameter, else to `fallback`.
    fn route(&self, start: Point, fallback: Result<Point, EngineError>) -> Result<Vec<Point>, EngineError> {
        let off = self.params.allow_off_canvas();
        if let Some(raw) = self.params.polyline("path") {
            if !off {
                if let Some(p) = raw.iter().find(|p| !p.on_canvas()) {
                    return Err(EngineError::OffCanvas { x: p.x, y: p.y });
                }
            }
            let mut pts = smooth_path(&raw).ok_or_else(|| invalid("path", "needs at least 2 distinct points"))?;
            if !off {
                for p in &mut pts {
                    *p = p.clamp_to_canvas();
                }
            }
            if pts[0].distance(start) > 1e-9 {
                pts.insert(0, start);
            }
            return Ok(pts);
        }
        let end = match self.params.point("target") {
            Some(p) => p,
            None => fallback?,
        };
        Ok(vec![start, end])
    }

    fn path_move(&self, polyline: Vec<Point>, gait: bool) -> AtomicOp {
        AtomicOp::PathMove {
            polyline,
            speed: self.speed(),
            gait,
            easing: self.params.path_easing(),
        }
    }

    fn duration(&self) -> f64 {
        self.params.number("duration")
    }

    fn disappear(&self) -> AtomicOp {
        let mode = if self.params.choice("mode") == "shrink" {
            DisappearMode::Shrink
        } else {
            DisappearMode::Fade
        };
        AtomicOp::Disappear {
            mode,
            duration: self.duration(),
            easing: self.params.easing(),
        }
    }

    fn appear(&self, at: Option<Point>) -> AtomicOp {
        let mode = if self.params.choice("mode") == "shrink" {
            AppearMode::Grow
        } else {
            AppearMode::Fade
        };
        AtomicOp::Appear {
            mode,
            duration: self.duration(),
            easing: self.params.easing(),
            at,
        }
    }

    fn require_slot(&self, actor: &Actor, slot: Slot) -> Result<(), EngineError> {
        if actor.slots.contains(&slot) {
            Ok(())
        } else {
            Err(EngineError::MissingSlot {
                element: actor.element_id.clone(),
                slot,
            })
        }
    }

    /// A point 300 units from `from`, away from `away` if given, else toward
    /// the canvas centre line.
    fn default_throw(&self, from: Point, away: Option<Point>) -> Point {
        let dir = match away {
            Some(a) if a.distance(from) > 1e-9 => {
                let d = a.distance(from);
                Point::new((from.x - a.x) / d, (from.y - a.y) / d)
            }
            _ if from.x < defaults::CANVAS_WIDTH / 2.0 => Point::new(1.0, 0.0),
            _ => Point::new(-1.0, 0.0),
        };
        Point::new(from.x + 300.0 * dir.x, from.y + 300.0 * dir.y).clamp_to_canvas()
    }

    fn spawn(&self, kind: SpawnKind, speaker: &Actor, scale_in: bool) -> SpawnedElement {
        let text = self.params.text("text").unwrap_or_else(|| {
            if self.action.object.trim().is_empty() {
                self.action.verb.to_uppercase()
            } else {
                self.action.object.clone()
            }
        });
        let lines = wrap_text(&text, defaults::BUBBLE_WRAP_CHARS);
        let longest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64;
        let pad = defaults::BUBBLE_PADDING;
        let width = (longest * defaults::BUBBLE_CHAR_WIDTH + 2.0 * pad).max(2.0 * pad + defaults::BUBBLE_CHAR_WIDTH);
        let height = lines.len().max(1) as f64 * defaults::BUBBLE_LINE_HEIGHT + 2.0 * pad;
        let st = &speaker.state.transform;
        let anchor = Point::new(
            st.x,
            st.y + speaker.top * st.scale_y - defaults::BUBBLE_ANCHOR_FRACTION * speaker.height * st.scale_y,
        );
        let gap = if kind == SpawnKind::Text { 0.0 } else { defaults::BUBBLE_TAIL };
        let centre = Point::new(
            anchor.x.clamp(width / 2.0, (defaults::CANVAS_WIDTH - width / 2.0).max(width / 2.0)),
            (anchor.y - gap - height / 2.0).clamp(height / 2.0, (defaults::CANVAS_HEIGHT - height / 2.0).max(height / 2.0)),
        );
        let tail = (kind != SpawnKind::Text).then_some(anchor.clamp_to_canvas());
        let initial = if scale_in {
            Transform {
                scale_x: defaults::MIN_SCALE_FACTOR,
                scale_y: defaults::MIN_SCALE_FACTOR,
                ..Transform::at(centre.x, centre.y)
            }
        } else {
            Transform {
                opacity: 0.0,
                ..Transform::at(centre.x, centre.y)
            }
        };
        SpawnedElement {
            id: format!("clip{}.{}", self.cast.clip_id, spawn_suffix(kind)),
            kind,
            text,
            lines,
            width,
            height,
            speaker: Some(speaker.element_id.clone()),
            tail,
            initial,
            z: defaults::SPAWN_Z,
        }
    }

    fn bubble(&self, kind: SpawnKind, scale_in: bool) -> Result<(Vec<Stage>, Vec<SpawnedElement>), EngineError> {
        let speaker = self.actor(Role::Subject)?;
        let spawned = self.spawn(kind, speaker, scale_in);
        let op = if scale_in {
            AtomicOp::ScaleTo {
                to_x: 1.0,
                to_y: 1.0,
                duration: self.duration(),
                easing: Easing::EaseInOutCubic,
            }
        } else {
            AtomicOp::Appear {
                mode: AppearMode::Fade,
                duration: self.duration(),
                easing: Easing::EaseInOutCubic,
                at: None,
            }
        };
        let stage = Stage {
            bindings: vec![Binding::element(spawned.id.clone(), op)],
            hold: self.params.number("hold"),
        };
        Ok((vec![stage], vec![spawned]))
    }

    fn build(&self) -> Result<(Vec<Stage>, Vec<SpawnedElement>), EngineError> {
        let pos = |a: &Actor| a.state.transform.position();
        let single = |b: Binding| Stage::single(b);
        let none = Vec::new;
        let stages = match self.template.id.as_str() {
            "atrans.transfer_path" => {
                let object = self.actor(Role::Object)?;
                let receiver = self.find(Role::Receiver)?;
                let fallback = receiver.map(pos).ok_or_else(|| EngineError::MissingActor {
                    role: Role::Receiver,
                    name: self.action.receiver.clone(),
                });
                let path = self.route(pos(object), fallback)?;
                vec![single(Binding::element(&object.element_id, self.path_move(path, false)))]
            }
            "atrans.vanish_reappear_at_recipient" => {
                let object = self.actor(Role::Object)?;
                let receiver = self.actor(Role::Receiver)?;
                vec![
                    single(Binding::element(&object.element_id, self.disappear())),
                    single(Binding::element(&object.element_id, self.appear(Some(pos(receiver))))),
                ]
            }
            "ptrans.path" => {
                let subject = self.actor(Role::Subject)?;
                let fallback = match self.find(Role::Object)? {
                    Some(o) => Ok(pos(o)),
                    None => Err(EngineError::MissingActor {
                        role: Role::Object,
                        name: self.action.object.clone(),
                    }),
                };
                let path = self.route(pos(subject), fallback)?;
                let gait = self.params.flag("gait");
                let stage = single(Binding::element(&subject.element_id, self.path_move(path, gait)));
                vec![apply_gait(&stage, &subject.element_id, &subject.slots)]
            }
            "ptrans.dis_reappear" => {
                let subject = self.actor(Role::Subject)?;
                let target = match self.params.point("target") {
                    Some(p) => p,
                    None => pos(self.actor(Role::Object)?),
                };
                vec![
                    single(Binding::element(&subject.element_id, self.disappear())),
                    single(Binding::element(&subject.element_id, self.appear(Some(target)))),
                ]
            }
            "propel.strike" => {
                let subject = self.actor(Role::Subject)?;
                let object = self.actor(Role::Object)?;
                let slot = self.params.slot();
                self.require_slot(subject, slot)?;
                let target = self
                    .params
                    .point("target")
                    .unwrap_or_else(|| self.default_throw(pos(object), Some(pos(subject))));
                vec![
                    single(Binding::slot(
                        &subject.element_id,
                        slot,
                        AtomicOp::RotateBy {
                            delta: self.params.number("angle"),
                            duration: self.duration(),
                            easing: Easing::EaseInOutCubic,
                        },
                    )),
                    single(Binding::element(
                        &object.element_id,
                        self.path_move(vec![pos(object), target], false),
                    )),
                ]
            }
            "propel.launch" | "expel.emerge_then_path" => {
                let subject = self.actor(Role::Subject)?;
                let object = self.actor(Role::Object)?;
                let origin = pos(subject);
                let fallback = match self.find(Role::Receiver)? {
                    Some(r) => pos(r),
                    None => self.default_throw(origin, None),
                };
                let path = self.route(origin, Ok(fallback))?;
                vec![
                    single(Binding::element(
                        &object.element_id,
                        AtomicOp::Appear {
                            mode: AppearMode::Fade,
                            duration: self.duration(),
                            easing: Easing::EaseInOutCubic,
                            at: Some(origin),
                        },
                    )),
                    single(Binding::element(&object.element_id, self.path_move(path, false))),
                ]
            }
            "move.limb_gesture" => {
                let subject = self.actor(Role::Subject)?;
                let slot = self.params.slot();
                self.require_slot(subject, slot)?;
                vec![single(Binding::slot(
                    &subject.element_id,
                    slot,
                    AtomicOp::RotateBy {
                        delta: self.params.number("angle"),
                        duration: self.duration(),
                        easing: self.params.easing(),
                    },
                ))]
            }
            "move.nod" | "move.wave" => {
                let subject = self.actor(Role::Subject)?;
                let op = AtomicOp::Oscillate {
                    amplitude: self.params.number("amplitude"),
                    cycles: self.params.number("cycles"),
                    duration: self.duration(),
                    antiphase: false,
                };
                let binding = if self.template.id == "move.wave" {
                    let slot = self.params.slot();
                    self.require_slot(subject, slot)?;
                    Binding::slot(&subject.element_id, slot, op)
                } else if subject.slots.contains(&Slot::Head) {
                    Binding::slot(&subject.element_id, Slot::Head, op)
                } else {
                    Binding::element(&subject.element_id, op)
                };
                vec![single(binding)]
            }
            "move.hop" => {
                let subject = self.actor(Role::Subject)?;
                let start = pos(subject);
                let h = self.params.number("height");
                let d = self.params.number("distance");
                let n = defaults::HOP_SEGMENTS;
                let path: Vec<Point> = (0..=n)
                    .map(|i| {
                        let u = i as f64 / n as f64;
                        Point::new(start.x + d * u, start.y - 4.0 * h * u * (1.0 - u))
                    })
                    .collect();
                vec![single(Binding::element(&subject.element_id, self.path_move(path, false)))]
            }
            "ingest.approach_then_vanish" => {
                let subject = self.actor(Role::Subject)?;
                let object = self.actor(Role::Object)?;
                let path = self.route(pos(object), Ok(pos(subject)))?;
                vec![
                    single(Binding::element(&object.element_id, self.path_move(path, false))),
                    single(Binding::element(&object.element_id, self.disappear())),
                ]
            }
            "ingest.vanish" => {
                let object = self.actor(Role::Object)?;
                vec![single(Binding::element(&object.element_id, self.disappear()))]
            }
            "speak.bubble_appear" => return self.bubble(SpawnKind::SpeechBubble, false),
            "speak.bubble_scale_in" => return self.bubble(SpawnKind::SpeechBubble, true),
            "speak.onomatopoeia_text" => return self.bubble(SpawnKind::Text, false),
            "mental.thought_bubble_appear" => return self.bubble(SpawnKind::ThoughtBubble, false),
            "mental.thought_bubble_scale_in" => return self.bubble(SpawnKind::ThoughtBubble, true),
            other => return Err(EngineError::UnknownTemplate(other.to_string())),
        };
        Ok((stages, none()))
    }
}

fn spawn_suffix(kind: SpawnKind) -> &'static str {
    match kind {
        SpawnKind::SpeechBubble => "speech",
        SpawnKind::ThoughtBubble => "thought",
        SpawnKind::Text => "text",
    }
}

/// Greedy word wrap at `width` characters; longer words are split.
pub fn wrap_text(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in text.split_whitespace() {
        let mut word: Vec<char> = word.chars().collect();
        while word.len() > width {
            if !line.is_empty() {
                lines.push(std::mem::take(&mut line));
            }
            lines.push(word[..width].iter().collect());
            word.drain(..width);
        }
        if word.is_empty() {
            continue;
        }
        let len = line.chars().count();
        if len > 0 && len + 1 + word.len() > width {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.extend(word);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

/// Builds a clip for `action` from `template`, with its stages following
/// the template's op kinds in order.
pub fn instantiate(
    template: &PatternTemplate,
    action: &SvoAction,
    cast: &Cast,
    params: &Value,
) -> Result<AnimationClip, EngineError> {
    let builder = Builder {
        template,
        action,
        cast,
        params: Params::parse(template, params)?,
    };
    let (stages, spawned) = builder.build()?;
    let clip = AnimationClip {
        id: cast.clip_id,
        label: format!("{} - {}", action.outline_label(), template.label),
        source_action_id: Some(action.id),
        template_id: Some(template.id.clone()),
        params: params.clone(),
        stages,
        spawned,
    };
    clip.validate()?;
    Ok(clip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_space::{registry, template};
    use crate::engine::sample::{final_states, sample};
    use crate::engine::timeline::Timeline;
    use crate::narrative::ActionCategory;
    use serde_json::json;

    fn actor(id: &str, entity: &str, x: f64, y: f64, slots: &[Slot]) -> Actor {
        Actor {
            element_id: id.into(),
            entity: entity.into(),
            state: ElementState::new(id, Transform::at(x, y), 0),
            slots: slots.to_vec(),
            width: 120.0,
            height: 200.0,
            top: -100.0,
        }
    }

    fn cast() -> Cast {
        Cast {
            actors: vec![
                actor("princess-1", "princess", 200.0, 600.0, &Slot::ALL),
                actor("tower-1", "old tower", 1200.0, 500.0, &[Slot::Body]),
                actor("grandmother-1", "grandmother", 300.0, 600.0, &Slot::ALL),
                actor("cap-1", "cap", 350.0, 550.0, &[Slot::Body]),
                actor("lrrh-1", "Little Red Riding Hood", 900.0, 600.0, &Slot::ALL),
            ],
            clip_id: 7,
        }
    }

    fn act(subject: &str, verb: &str, object: &str, receiver: &str, c: ActionCategory) -> SvoAction {
        SvoAction {
            id: 0,
            subject: subject.into(),
            verb: verb.into(),
            object: object.into(),
            receiver: receiver.into(),
            category: Some(c),
        }
    }

    fn went() -> SvoAction {
        act("princess", "went", "old tower", "", ActionCategory::Ptrans)
    }

    fn base(c: &Cast) -> Vec<ElementState> {
        c.actors.iter().map(|a| a.state.clone()).collect()
    }

    fn state<'a>(s: &'a [ElementState], id: &str) -> &'a ElementState {
        s.iter().find(|e| e.element_id == id).unwrap()
    }

    #[test]
    fn path_with_drawn_polyline_walks() {
        let drag = json!([[200, 600], [500, 560], [800, 540], [1200, 500]]);
        let clip = instantiate(template("ptrans.path").unwrap(), &went(), &cast(), &json!({"path": drag})).unwrap();
        assert_eq!(clip.label, "princess WENT old tower - Path");
        assert_eq!(clip.stages.len(), 1);
        let b = &clip.stages[0].bindings;
        assert!(matches!(b[0].op, AtomicOp::PathMove { gait: true, .. }));
        assert_eq!(b.iter().filter(|b| b.slot.is_some_and(Slot::is_leg)).count(), 2);
        let t = Timeline { clips: vec![clip] };
        let end = final_states(&t, &base(&cast()));
        assert_eq!(state(&end, "princess-1").transform.position(), Point::new(1200.0, 500.0));
    }

    #[test]
    fn straight_path_duration_is_length_over_speed() {
        let c = Cast {
            actors: vec![actor("p", "princess", 100.0, 100.0, &[])],
            clip_id: 1,
        };
        let clip = instantiate(
            template("ptrans.path").unwrap(),
            &went(),
            &c,
            &json!({"target": {"x": 500, "y": 100}}),
        )
        .unwrap();
        assert_eq!(clip.duration(), 2.0);
    }

    #[test]
    fn transfer_moves_object_to_receiver() {
        let gave = act("grandmother", "gave", "cap", "Little Red Riding Hood", ActionCategory::Atrans);
        let clip = instantiate(template("atrans.transfer_path").unwrap(), &gave, &cast(), &Value::Null).unwrap();
        match &clip.stages[0].bindings[0] {
            Binding {
                element,
                op: AtomicOp::PathMove { polyline, .. },
                ..
            } => {
                assert_eq!(element, "cap-1");
                assert_eq!(polyline, &vec![Point::new(350.0, 550.0), Point::new(900.0, 600.0)]);
            }
            other => panic!("{other:?}"),
        }
        let no_receiver = act("grandmother", "gave", "cap", "wolf", ActionCategory::Atrans);
        assert_eq!(
            instantiate(template("atrans.transfer_path").unwrap(), &no_receiver, &cast(), &Value::Null),
            Err(EngineError::MissingActor {
                role: Role::Receiver,
                name: "wolf".into()
            })
        );
    }

    #[test]
    fn dis_reappear_stages() {
        let clip = instantiate(template("ptrans.dis_reappear").unwrap(), &went(), &cast(), &Value::Null).unwrap();
        let kinds: Vec<_> = clip.stages.iter().map(|s| s.bindings[0].op.kind()).collect();
        assert_eq!(kinds, template("ptrans.dis_reappear").unwrap().op_kinds);
        let t = Timeline { clips: vec![clip] };
        let mid = sample(&t, &base(&cast()), 0.5);
        assert_eq!(state(&mid, "princess-1").transform.opacity, 0.0);
        assert_eq!(state(&mid, "princess-1").transform.position(), Point::new(200.0, 600.0));
        let end = final_states(&t, &base(&cast()));
        assert_eq!(state(&end, "princess-1").transform.position(), Point::new(1200.0, 500.0));
    }

    #[test]
    fn speech_bubble_spawns_above_speaker() {
        let said = act("grandmother", "said", "Come here, my dear child, and take this cap", "", ActionCategory::Speak);
        let clip = instantiate(template("speak.bubble_appear").unwrap(), &said, &cast(), &Value::Null).unwrap();
        let b = &clip.spawned[0];
        assert_eq!(b.id, "clip7.speech");
        assert!(b.lines.iter().all(|l| l.chars().count() <= 24));
        assert_eq!(b.lines.join(" "), "Come here, my dear child, and take this cap");
        let tail = b.tail.unwrap();
        assert_eq!(tail, Point::new(300.0, 600.0 - 100.0 - 40.0));
        assert!(b.initial.y + b.height / 2.0 < tail.y);
        assert_eq!(clip.stages[0].bindings[0].element, b.id);
        assert_eq!(clip.stages[0].hold, defaults::BUBBLE_HOLD);
    }

    #[test]
    fn unknown_and_invalid_params() {
        let t = template("ptrans.path").unwrap();
        assert_eq!(
            instantiate(t, &went(), &cast(), &json!({"sped": 3})),
            Err(EngineError::UnknownParam("sped".into()))
        );
        assert!(matches!(
            instantiate(t, &went(), &cast(), &json!({"speed": -3})),
            Err(EngineError::InvalidParam { .. })
        ));
        assert!(matches!(
            instantiate(t, &went(), &cast(), &json!({"path": [[0, 0], [4000, 0]]})),
            Err(EngineError::OffCanvas { .. })
        ));
        assert!(instantiate(t, &went(), &cast(), &json!({"path": [[0, 0], [4000, 0]], "allow_off_canvas": true})).is_ok());
        assert!(matches!(
            instantiate(t, &went(), &cast(), &json!({"path": [[5, 5]]})),
            Err(EngineError::InvalidParam { .. })
        ));
    }

    #[test]
    fn missing_slot_is_reported() {
        let waved = act("old tower", "waved", "", "", ActionCategory::Move);
        assert_eq!(
            instantiate(template("move.wave").unwrap(), &waved, &cast(), &Value::Null),
            Err(EngineError::MissingSlot {
                element: "tower-1".into(),
                slot: Slot::RightArm
            })
        );
    }

    #[test]
    fn every_template_instantiates_in_op_order() {
        let c = cast();
        for t in registry() {
            let a = act("grandmother", "did", "cap", "Little Red Riding Hood", t.category);
            let clip = instantiate(t, &a, &c, &Value::Null).unwrap_or_else(|e| panic!("{}: {e}", t.id));
            let kinds: Vec<_> = clip.stages.iter().map(|s| s.bindings[0].op.kind()).collect();
            assert_eq!(kinds, t.op_kinds, "{}", t.id);
            assert!(clip.duration() > 0.0, "{}", t.id);
        }
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_text("", 24), Vec::<String>::new());
        assert_eq!(wrap_text("aaaa bbbb cc", 9), vec!["aaaa bbbb", "cc"]);
        assert_eq!(wrap_text("abcdefghij", 4), vec!["abcd", "efgh", "ij"]);
    }
}
