use std::collections::HashMap;

use super::defaults;
use super::geometry::{lerp, ArcLength};
use super::ops::{AnimationClip, AppearMode, AtomicOp, Axis, Binding, DisappearMode, ElementState, Stage};
use super::timeline::Timeline;

struct Board {
    states: Vec<ElementState>,
    index: HashMap<String, usize>,
}

impl Board {
    fn new(base: &[ElementState]) -> Self {
        let states = base.to_vec();
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.element_id.clone(), i))
            .collect();
        Board { states, index }
    }

    fn insert(&mut self, state: ElementState) {
        self.index.insert(state.element_id.clone(), self.states.len());
        self.states.push(state);
    }

    fn remove(&mut self, id: &str) {
        if let Some(i) = self.index.remove(id) {
            self.states.remove(i);
            for v in self.index.values_mut() {
                if *v > i {
                    *v -= 1;
                }
            }
        }
    }

    fn get_mut(&mut self, id: &str) -> Option<&mut ElementState> {
        let i = *self.index.get(id)?;
        Some(&mut self.states[i])
    }

    fn into_sorted(mut self) -> Vec<ElementState> {
        // Stable: equal z keeps insertion order.
        self.states.sort_by_key(|s| s.z);
        self.states
    }
}

/// Element states at time `t` seconds.
///
/// Nothing moves at `t = 0`; every clip and stage starts acting only once
/// `t` exceeds its start. At or after the total duration the result is the
/// final state of the whole timeline. Spawned elements are present only
/// strictly inside their clip.
pub fn sample(timeline: &Timeline, base: &[ElementState], t: f64) -> Vec<ElementState> {
    let t = if t.is_nan() { 0.0 } else { t };
    let total = timeline.duration();
    let mut board = Board::new(base);
    let mut start = 0.0;
    for clip in &timeline.clips {
        let end = start + clip.duration();
        if t >= total || t > end {
            apply_clip(&mut board, clip, None);
        } else {
            if t > start {
                apply_clip(&mut board, clip, Some(t - start));
            }
            break;
        }
        start = end;
    }
    board.into_sorted()
}

/// States after every clip has played.
pub fn final_states(timeline: &Timeline, base: &[ElementState]) -> Vec<ElementState> {
    sample(timeline, base, f64::INFINITY)
}

fn apply_clip(board: &mut Board, clip: &AnimationClip, local: Option<f64>) {
    for s in &clip.spawned {
        board.insert(ElementState::new(s.id.clone(), s.initial, s.z));
    }
    let mut stage_start = 0.0;
    for stage in &clip.stages {
        let d = stage.duration();
        match local {
            Some(tau) if tau <= stage_start => break,
            Some(tau) if tau <= stage_start + d => apply_stage(board, stage, Some(tau - stage_start)),
            _ => apply_stage(board, stage, None),
        }
        stage_start += d;
    }
    let done = local.is_none_or(|tau| tau >= clip.duration());
    if done {
        for s in &clip.spawned {
            board.remove(&s.id);
        }
    }
}

fn apply_stage(board: &mut Board, stage: &Stage, local: Option<f64>) {
    for b in &stage.bindings {
        if let Some(state) = board.get_mut(&b.element) {
            apply_binding(state, b, local);
        }
    }
}

fn apply_binding(state: &mut ElementState, binding: &Binding, local: Option<f64>) {
    let op = &binding.op;
    let d = op.duration();
    let (u, done) = match local {
        Some(tau) if d > 0.0 && tau < d => (tau / d, false),
        _ => (1.0, true),
    };
    let e = if done { 1.0 } else { op.easing().apply(u) };
    let tr = &mut state.transform;
    match op {
        AtomicOp::PathMove { polyline, .. } => {
            let p = if done {
                *polyline.last().expect("validated path")
            } else {
                ArcLength::new(polyline).point_at_fraction(e)
            };
            tr.x = p.x;
            tr.y = p.y;
        }
        AtomicOp::ScaleTo { to_x, to_y, .. } => {
            tr.scale_x = lerp(tr.scale_x, *to_x, e);
            tr.scale_y = lerp(tr.scale_y, *to_y, e);
        }
        AtomicOp::RotateBy { delta, .. } => match binding.slot {
            Some(slot) => {
                let r = state.pose.entry(slot).or_insert(0.0);
                *r = lerp(*r, *r + delta, e);
            }
            None => tr.rotation = lerp(tr.rotation, tr.rotation + delta, e),
        },
        AtomicOp::FlipAxis { axis } => match axis {
            Axis::H => tr.flip_h = !tr.flip_h,
            Axis::V => tr.flip_v = !tr.flip_v,
        },
        AtomicOp::Appear { mode, at, .. } => {
            if let Some(p) = at {
                tr.x = p.x;
                tr.y = p.y;
            }
            match mode {
                AppearMode::Fade => tr.opacity = lerp(0.0, 1.0, e),
                AppearMode::Grow => {
                    tr.opacity = 1.0;
                    if !done {
                        let f = lerp(defaults::MIN_SCALE_FACTOR, 1.0, e);
                        tr.scale_x *= f;
                        tr.scale_y *= f;
                    }
                }
            }
        }
        AtomicOp::Disappear { mode, .. } => match mode {
            DisappearMode::Fade => tr.opacity = lerp(tr.opacity, 0.0, e),
            DisappearMode::Shrink => {
                if done {
                    tr.opacity = 0.0;
                } else {
                    let f = lerp(1.0, defaults::MIN_SCALE_FACTOR, e);
                    tr.scale_x *= f;
                    tr.scale_y *= f;
                }
            }
        },
        AtomicOp::Oscillate {
            amplitude,
            cycles,
            antiphase,
            ..
        } => {
            let offset = if done {
                0.0
            } else {
                let s = amplitude * (std::f64::consts::TAU * cycles * u).sin();
                if *antiphase {
                    -s
                } else {
                    s
                }
            };
            match binding.slot {
                Some(slot) => {
                    let r = state.pose.entry(slot).or_insert(0.0);
                    *r += offset;
                }
                None => tr.rotation += offset,
            }
        }
    }
    tr.opacity = tr.opacity.clamp(0.0, 1.0);
    state.visible = tr.opacity > 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::easing::Easing;
    use crate::engine::geometry::Point;
    use crate::engine::ops::{Slot, SpawnKind, SpawnedElement, Transform};
    use serde_json::Value;

    fn clip(id: u64, stages: Vec<Stage>) -> AnimationClip {
        AnimationClip {
            id,
            label: String::new(),
            source_action_id: None,
            template_id: None,
            params: Value::Null,
            stages,
            spawned: vec![],
        }
    }

    fn base() -> Vec<ElementState> {
        vec![
            ElementState::new("a", Transform::at(0.0, 0.0), 1),
            ElementState::new("b", Transform::at(500.0, 500.0), 0),
        ]
    }

    fn find<'a>(s: &'a [ElementState], id: &str) -> &'a ElementState {
        s.iter().find(|e| e.element_id == id).unwrap()
    }

    fn path(to: Point, speed: f64) -> AtomicOp {
        AtomicOp::PathMove {
            polyline: vec![Point::new(0.0, 0.0), to],
            speed,
            gait: false,
            easing: Easing::Linear,
        }
    }

    #[test]
    fn empty_timeline_is_identity_sorted_by_z() {
        let out = sample(&Timeline::new(), &base(), 3.0);
        assert_eq!(out[0].element_id, "b");
        assert_eq!(find(&out, "a"), &base()[0]);
    }

    #[test]
    fn path_midpoint() {
        let t = Timeline {
            clips: vec![clip(1, vec![Stage::single(Binding::element("a", path(Point::new(300.0, 400.0), 500.0)))])],
        };
        assert_eq!(t.duration(), 1.0);
        let s = sample(&t, &base(), 0.5);
        assert_eq!(find(&s, "a").transform.position(), Point::new(150.0, 200.0));
        assert_eq!(find(&s, "a").transform.position(), Point::new(150.0, 200.0));
        assert_eq!(find(&sample(&t, &base(), 9.0), "a").transform.position(), Point::new(300.0, 400.0));
        assert_eq!(sample(&t, &base(), 0.0), sample(&Timeline::new(), &base(), 0.0));
    }

    #[test]
    fn dis_reappear_semantics() {
        let target = Point::new(900.0, 100.0);
        let t = Timeline {
            clips: vec![clip(
                1,
                vec![
                    Stage::single(Binding::element(
                        "a",
                        AtomicOp::Disappear {
                            mode: DisappearMode::Fade,
                            duration: 0.5,
                            easing: Easing::EaseInOutCubic,
                        },
                    )),
                    Stage::single(Binding::element(
                        "a",
                        AtomicOp::Appear {
                            mode: AppearMode::Fade,
                            duration: 0.5,
                            easing: Easing::EaseInOutCubic,
                            at: Some(target),
                        },
                    )),
                ],
            )],
        };
        let at_gap = sample(&t, &base(), 0.5);
        assert_eq!(find(&at_gap, "a").transform.opacity, 0.0);
        assert!(!find(&at_gap, "a").visible);
        assert_eq!(find(&at_gap, "a").transform.position(), Point::new(0.0, 0.0));
        let end = final_states(&t, &base());
        assert_eq!(find(&end, "a").transform.position(), target);
        assert_eq!(find(&end, "a").transform.opacity, 1.0);
    }

    #[test]
    fn later_clips_start_from_earlier_end() {
        let t = Timeline {
            clips: vec![
                clip(1, vec![Stage::single(Binding::element("a", path(Point::new(100.0, 0.0), 100.0)))]),
                clip(
                    2,
                    vec![Stage::single(Binding::element(
                        "b",
                        AtomicOp::RotateBy {
                            delta: 1.0,
                            duration: 1.0,
                            easing: Easing::Linear,
                        },
                    ))],
                ),
            ],
        };
        let s = sample(&t, &base(), 1.5);
        assert_eq!(find(&s, "a").transform.x, 100.0);
        assert_eq!(find(&s, "b").transform.rotation, 0.5);
    }

    #[test]
    fn flip_only_timeline_is_instant() {
        let t = Timeline {
            clips: vec![clip(1, vec![Stage::single(Binding::element("a", AtomicOp::FlipAxis { axis: Axis::H }))])],
        };
        assert_eq!(t.duration(), 0.0);
        assert!(find(&sample(&t, &base(), 0.0), "a").transform.flip_h);
    }

    #[test]
    fn spawned_live_inside_clip_only() {
        let mut c = clip(
            1,
            vec![Stage {
                bindings: vec![Binding::element(
                    "bubble",
                    AtomicOp::Appear {
                        mode: AppearMode::Fade,
                        duration: 0.5,
                        easing: Easing::Linear,
                        at: None,
                    },
                )],
                hold: 1.0,
            }],
        );
        c.spawned.push(SpawnedElement {
            id: "bubble".into(),
            kind: SpawnKind::SpeechBubble,
            text: "Hi".into(),
            lines: vec!["Hi".into()],
            width: 50.0,
            height: 30.0,
            speaker: Some("a".into()),
            tail: None,
            initial: Transform {
                opacity: 0.0,
                ..Transform::at(10.0, 10.0)
            },
            z: 100,
        });
        let t = Timeline { clips: vec![c] };
        assert_eq!(sample(&t, &base(), 0.0).len(), 2);
        let mid = sample(&t, &base(), 0.25);
        assert_eq!(mid.len(), 3);
        assert_eq!(find(&mid, "bubble").transform.opacity, 0.5);
        assert_eq!(mid[2].element_id, "bubble");
        assert_eq!(sample(&t, &base(), 1.5).len(), 2);
    }

    #[test]
    fn oscillation_returns_to_rest() {
        let t = Timeline {
            clips: vec![clip(
                1,
                vec![Stage::single(Binding::slot(
                    "a",
                    Slot::LeftLeg,
                    AtomicOp::Oscillate {
                        amplitude: 0.35,
                        cycles: 4.0,
                        duration: 2.0,
                        antiphase: false,
                    },
                ))],
            )],
        };
        let peak = sample(&t, &base(), 0.125);
        assert!((find(&peak, "a").pose[&Slot::LeftLeg] - 0.35).abs() < 1e-12);
        assert_eq!(find(&final_states(&t, &base()), "a").pose[&Slot::LeftLeg], 0.0);
    }
}
