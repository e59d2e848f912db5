//! Acceptance suite: one pass/fail line per criterion.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use motioncomic_core::analysis::{
    repair_spans_report, validate_spans, FixtureAnalyzer, RepairFailure, RepairStep, SpanRule,
};
use motioncomic_core::authoring::{self, Mutation};
use motioncomic_core::design_space::{self, nonzero_ops, registry, suggest_for_category, template, AtomicOpKind, FrequencyTable};
use motioncomic_core::document::canonical::canonicalize;
use motioncomic_core::document::{self, assets, ProjectDocument};
use motioncomic_core::engine::{
    final_states, instantiate, sample, Actor, AnimationClip, AppearMode, ArcLength, AtomicOp, Axis, Binding,
    Cast, DisappearMode, Easing, ElementState, Point, Slot, Stage, Timeline, Transform,
};
use motioncomic_core::narrative::{ActionCategory, SceneSpan, SvoAction};
use motioncomic_core::render::{self, MotionComicDocument};
use motioncomic_service::openapi::ROUTES;
use motioncomic_service::routes::router;
use motioncomic_service::AppState;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn analyzer(story: &str) -> FixtureAnalyzer {
    FixtureAnalyzer::load(fixture(&format!("{story}.analyzer.json"))).unwrap()
}

// 1

fn pipeline_replay() -> Outcome {
    let analyzer = analyzer("red_riding_hood");
    let story = read("red_riding_hood.txt");
    let started = Instant::now();
    let doc = ProjectDocument::new_project(&story, &analyzer).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let spans: Vec<SceneSpan> = doc.scenes.iter().map(|e| e.scene.span).collect();
    ensure!(spans == [SceneSpan::new(0, 0, 5), SceneSpan::new(1, 6, 12)], "spans {spans:?}");
    let gave = &doc.scenes[0].scene.actions[0];
    ensure!(
        (gave.subject.as_str(), gave.verb.as_str(), gave.object.as_str(), gave.receiver.as_str())
            == ("grandmother", "gave", "a little cap made of red velvet", "Little Red Riding Hood"),
        "first action {gave:?}"
    );
    let classes: Vec<(String, Option<ActionCategory>)> =
        doc.scenes[1].scene.actions.iter().map(|a| (a.verb.clone(), a.category)).collect();
    let expected = vec![
        ("cried".to_string(), Some(ActionCategory::Expel)),
        ("went".to_string(), Some(ActionCategory::Ptrans)),
        ("said".to_string(), Some(ActionCategory::Speak)),
    ];
    ensure!(classes == expected, "classifications {classes:?}");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("spans, SVO and classes exact in {elapsed:.2?}"))
}

// 2

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Vec<SceneSpan> {
    let mut cuts: Vec<usize> = (1..n).filter(|_| rng.random_bool(0.15)).collect();
    cuts.push(n);
    let mut begin = 0;
    cuts.iter()
        .enumerate()
        .map(|(id, &end)| {
            let s = SceneSpan::new(id, begin, end - 1);
            begin = end;
            s
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Repair {
    Ok,
    NotSorted,
    Unrepairable,
}

struct SpanCase {
    spans: Vec<SceneSpan>,
    rule: SpanRule,
    repair: Repair,
    repaired: Option<Vec<SceneSpan>>,
    step: Option<RepairStep>,
}

/// Every applicable single edit of a valid partition, with the expected
/// verdicts worked out from the partition rules directly.
fn single_edits(p: &[SceneSpan], n: usize, rng: &mut ChaCha8Rng) -> Vec<SpanCase> {
    let last = p.len() - 1;
    let len = |s: &SceneSpan| s.end_index - s.begin_index + 1;
    let mut out = vec![SpanCase { spans: vec![], rule: SpanRule::NonEmpty, repair: Repair::Unrepairable, repaired: None, step: None }];
    for i in 1..p.len() {
        if len(&p[i]) >= 2 {
            let k = rng.random_range(1..len(&p[i]));
            let mut s = p.to_vec();
            s[i].begin_index += k;
            let (repair, repaired, step) = if k == 1 {
                let mut fixed = s.clone();
                fixed[i - 1].end_index += 1;
                (Repair::Ok, Some(fixed), Some(RepairStep::ClosedGap { id: i - 1 }))
            } else {
                (Repair::Unrepairable, None, None)
            };
            out.push(SpanCase { spans: s, rule: SpanRule::Contiguous, repair, repaired, step });

            let mut s = p.to_vec();
            s[i].end_index = s[i].begin_index - 1;
            if i < last {
                out.push(SpanCase { spans: s, rule: SpanRule::Ordered, repair: Repair::Unrepairable, repaired: None, step: None });
            }
        }
        let mut s = p.to_vec();
        s[i].begin_index -= 1;
        out.push(SpanCase { spans: s, rule: SpanRule::Disjoint, repair: Repair::Unrepairable, repaired: None, step: None });

        let mut s = p.to_vec();
        s[i].id = s[i - 1].id;
        out.push(SpanCase { spans: s, rule: SpanRule::IdSequence, repair: Repair::Unrepairable, repaired: None, step: None });

        let mut s = p.to_vec();
        s.swap(i - 1, i);
        out.push(SpanCase { spans: s, rule: SpanRule::IdSequence, repair: Repair::NotSorted, repaired: None, step: None });
    }
    if len(&p[last]) >= 2 {
        let mut s = p.to_vec();
        s[last].end_index -= rng.random_range(1..len(&p[last]));
        let from = s[last].end_index;
        out.push(SpanCase { spans: s, rule: SpanRule::LastEnd, repair: Repair::Ok, repaired: Some(p.to_vec()), step: Some(RepairStep::StretchedLast { from }) });
    }
    let mut s = p.to_vec();
    s[last].end_index = n - 1 + rng.random_range(1..10);
    out.push(SpanCase { spans: s, rule: SpanRule::InRange, repair: Repair::Ok, repaired: Some(p.to_vec()), step: Some(RepairStep::Clamped { id: last }) });
    if len(&p[0]) >= 2 {
        let mut s = p.to_vec();
        s[0].begin_index = 1;
        out.push(SpanCase { spans: s, rule: SpanRule::FirstBegin, repair: Repair::Unrepairable, repaired: None, step: None });
    }
    out
}

fn span_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rules = BTreeSet::new();
    let mut repairs = BTreeSet::new();
    let mut steps = HashSet::new();
    let mut edits = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=200);
        let p = random_partition(&mut rng, n);
        ensure!(validate_spans(&p, n).is_ok(), "valid partition rejected: {p:?}");
        let r = repair_spans_report(&p, n).map_err(|e| format!("{e:?}"))?;
        ensure!(r.spans == p && r.steps.is_empty(), "valid partition altered");
        repairs.insert(Repair::Ok);
        for case in single_edits(&p, n, &mut rng) {
            edits += 1;
            let violations = validate_spans(&case.spans, n).err().ok_or_else(|| format!("edit accepted: {:?}", case.spans))?;
            ensure!(violations.iter().any(|v| v.rule() == case.rule), "expected {:?} in {violations:?}", case.rule);
            rules.extend(violations.iter().map(|v| v.rule()));
            match (repair_spans_report(&case.spans, n), case.repair) {
                (Ok(r), Repair::Ok) => {
                    ensure!(Some(&r.spans) == case.repaired.as_ref(), "repair gave {:?}", r.spans);
                    ensure!(r.steps == case.step.into_iter().collect::<Vec<_>>(), "steps {:?}", r.steps);
                    steps.extend(r.steps.iter().map(std::mem::discriminant));
                }
                (Err(RepairFailure::NotSorted), Repair::NotSorted) | (Err(RepairFailure::Unrepairable(_)), Repair::Unrepairable) => {}
                (got, want) => return Err(format!("{:?}: repair {got:?}, expected {want:?}", case.spans)),
            }
            repairs.insert(case.repair);
        }
    }
    ensure!(rules.len() == SpanRule::ALL.len(), "rules exercised: {rules:?}");
    ensure!(repairs.len() == 3 && steps.len() == 3, "repair outcomes {repairs:?}, step kinds {}", steps.len());
    Ok(format!("1000 partitions accepted, {edits} edits judged; 8/8 rules, 3/3 repair steps, 3/3 outcomes"))
}

// 3

fn design_space_soundness() -> Outcome {
    let table = FrequencyTable::observed();
    let rows: Vec<u32> = ActionCategory::ALL.iter().map(|c| table.row_total(*c)).collect();
    ensure!(rows == [34, 734, 224, 551, 52, 61, 199, 90], "row totals {rows:?}");
    let cols: Vec<u32> = AtomicOpKind::ALL.iter().map(|k| table.col_total(*k)).collect();
    ensure!(cols == [884, 87, 475, 18, 427, 54], "column totals {cols:?}");
    ensure!(table.grand_total() == 1945, "grand total {}", table.grand_total());
    for t in registry() {
        let allowed = nonzero_ops(t.category);
        ensure!(t.op_kinds.iter().all(|k| allowed.contains(k)), "{} uses ops outside its row", t.id);
    }
    let ranked: Vec<(String, u32)> =
        suggest_for_category(ActionCategory::Ptrans).iter().map(|s| (s.template.id.clone(), s.score)).collect();
    ensure!(
        ranked == [("ptrans.path".to_string(), 593), ("ptrans.dis_reappear".to_string(), 18)],
        "ptrans ranking {ranked:?}"
    );
    Ok(format!("totals exact, {} templates within their rows, ptrans path(593) > dis_reappear(18)", registry().len()))
}

// 4

fn ease(e: Easing, u: f64) -> f64 {
    match e {
        Easing::Linear => u,
        Easing::EaseInOutCubic if u < 0.5 => 4.0 * u.powi(3),
        Easing::EaseInOutCubic => 1.0 - (2.0 - 2.0 * u).powi(3) / 2.0,
    }
}

/// Point at arc length `s`, found by marching 10^4 fixed steps along the
/// polyline and interpolating inside the step that crosses `s`.
fn brute_force(points: &[Point], s: f64) -> Point {
    let per = 10_000usize.div_ceil(points.len() - 1);
    let mut walked = 0.0;
    let mut prev = points[0];
    for w in points.windows(2) {
        for k in 1..=per {
            let f = k as f64 / per as f64;
            let q = Point::new(w[0].x + (w[1].x - w[0].x) * f, w[0].y + (w[1].y - w[0].y) * f);
            let step = ((q.x - prev.x).powi(2) + (q.y - prev.y).powi(2)).sqrt();
            if walked + step >= s && step > 0.0 {
                let g = (s - walked) / step;
                return Point::new(prev.x + (q.x - prev.x) * g, prev.y + (q.y - prev.y) * g);
            }
            walked += step;
            prev = q;
        }
    }
    prev
}

fn one_clip(stages: Vec<Stage>) -> Timeline {
    Timeline {
        clips: vec![AnimationClip {
            id: 1,
            label: String::new(),
            source_action_id: None,
            template_id: None,
            params: Value::Null,
            stages,
            spawned: vec![],
        }],
    }
}

fn random_easing(rng: &mut ChaCha8Rng) -> Easing {
    *[Easing::Linear, Easing::EaseInOutCubic].choose(rng).unwrap()
}

fn interpolation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(2..=64);
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random_range(0.0..1600.0), rng.random_range(0.0..900.0)))
            .collect();
        let speed = rng.random_range(20.0..800.0);
        let easing = random_easing(&mut rng);
        let op = AtomicOp::PathMove { polyline: pts.clone(), speed, gait: rng.random_bool(0.5), easing };
        let d = op.duration();
        let total: f64 = pts.windows(2).map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt()).sum();
        let tl = one_clip(vec![Stage::single(Binding::element("e", op))]);
        let base = vec![ElementState::new("e", Transform::at(pts[0].x, pts[0].y), 0)];
        for _ in 0..20 {
            let t = rng.random_range(0.0..d);
            let got = sample(&tl, &base, t)[0].transform.position();
            let want = brute_force(&pts, ease(easing, t / d) * total);
            worst = worst.max(got.distance(want));
        }
        let arc = ArcLength::new(&pts);
        let last = pts[n - 1];
        for (got, want) in [
            (arc.point_at_fraction(0.0), pts[0]),
            (arc.point_at_fraction(1.0), last),
            (sample(&tl, &base, 0.0)[0].transform.position(), pts[0]),
            (sample(&tl, &base, d)[0].transform.position(), last),
            (final_states(&tl, &base)[0].transform.position(), last),
        ] {
            worst_end = worst_end.max(got.distance(want));
        }
    }
    ensure!(worst <= 1e-6, "max interior error {worst:e}");
    ensure!(worst_end <= 1e-9, "max endpoint error {worst_end:e}");

    for _ in 0..500 {
        let mut stages = Vec::new();
        for _ in 0..rng.random_range(1..6) {
            let duration = rng.random_range(0.05..2.0);
            let easing = random_easing(&mut rng);
            let op = if rng.random_bool(0.5) {
                let mode = if rng.random_bool(0.5) { AppearMode::Fade } else { AppearMode::Grow };
                AtomicOp::Appear { mode, duration, easing, at: None }
            } else {
                let mode = if rng.random_bool(0.5) { DisappearMode::Fade } else { DisappearMode::Shrink };
                AtomicOp::Disappear { mode, duration, easing }
            };
            stages.push(Stage::single(Binding::element("e", op)));
        }
        let tl = one_clip(stages);
        let mut start = Transform::at(800.0, 450.0);
        start.opacity = rng.random_range(0.0..=1.0);
        let base = vec![ElementState::new("e", start, 0)];
        let d = tl.duration();
        for k in 0..=60 {
            let o = sample(&tl, &base, d * k as f64 / 59.0)[0].transform.opacity;
            ensure!((0.0..=1.0).contains(&o), "opacity {o}");
        }
    }

    for _ in 0..200 {
        let mut t = Transform::at(rng.random_range(0.0..1600.0), rng.random_range(0.0..900.0));
        t.rotation = rng.random_range(-10.0..10.0);
        t.flip_h = rng.random_bool(0.5);
        t.flip_v = rng.random_bool(0.5);
        let base = vec![ElementState::new("e", t, 0)];
        for axis in [Axis::H, Axis::V] {
            let flip = || Stage::single(Binding::element("e", AtomicOp::FlipAxis { axis }));
            let end = final_states(&one_clip(vec![flip(), flip()]), &base)[0].transform;
            ensure!(end == t, "flip twice changed {t:?} to {end:?}");
        }
        let turn = AtomicOp::RotateBy { delta: std::f64::consts::TAU, duration: 1.0, easing: random_easing(&mut rng) };
        let r = final_states(&one_clip(vec![Stage::single(Binding::element("e", turn))]), &base)[0].transform.rotation;
        ensure!(
            (r.cos() - t.rotation.cos()).abs() <= 1e-12 && (r.sin() - t.rotation.sin()).abs() <= 1e-12,
            "full turn from {} ends at {r}",
            t.rotation
        );
    }
    Ok(format!("500 paths: interior error {worst:.1e} <= 1e-6, endpoints {worst_end:.1e} <= 1e-9; opacity in [0,1]; flip and full-turn identities hold"))
}

// 5

fn actor(id: &str, entity: &str, x: f64, y: f64) -> Actor {
    Actor {
        element_id: id.into(),
        entity: entity.into(),
        state: ElementState::new(id, Transform::at(x, y), 0),
        slots: Slot::ALL.to_vec(),
        width: 120.0,
        height: 200.0,
        top: -100.0,
    }
}

fn action(subject: &str, verb: &str, object: &str, category: ActionCategory) -> SvoAction {
    SvoAction {
        id: 0,
        subject: subject.into(),
        verb: verb.into(),
        object: object.into(),
        receiver: String::new(),
        category: Some(category),
    }
}

fn state<'a>(states: &'a [ElementState], id: &str) -> &'a Transform {
    &states.iter().find(|s| s.element_id == id).unwrap().transform
}

fn composite_semantics() -> Outcome {
    let cast = Cast {
        actors: vec![
            actor("wolf-1", "wolf", 900.0, 600.0),
            actor("grandmother-1", "grandmother", 300.0, 600.0),
            actor("stone-1", "stone", 500.0, 620.0),
        ],
        clip_id: 1,
    };
    let base: Vec<ElementState> = cast.actors.iter().map(|a| a.state.clone()).collect();
    let build = |id: &str, a: &SvoAction, params: Value| -> Result<Timeline, String> {
        let clip = instantiate(template(id).map_err(|e| e.to_string())?, a, &cast, &params).map_err(|e| e.to_string())?;
        Ok(Timeline { clips: vec![clip] })
    };
    let grid = |tl: &Timeline| -> Vec<f64> { (0..=1000).map(|k| tl.duration() * k as f64 / 1000.0).collect() };

    let tl = build("ptrans.dis_reappear", &action("wolf", "ran", "", ActionCategory::Ptrans), json!({ "target": [1250, 640] }))?;
    let vanished = grid(&tl).into_iter().any(|t| state(&sample(&tl, &base, t), "wolf-1").opacity == 0.0);
    ensure!(vanished, "dis_reappear never reaches opacity 0");
    let end = *state(&final_states(&tl, &base), "wolf-1");
    ensure!(end.position() == Point::new(1250.0, 640.0) && end.opacity == 1.0, "dis_reappear ends at {end:?}");

    let tl = build("ingest.approach_then_vanish", &action("wolf", "swallowed", "grandmother", ActionCategory::Ingest), Value::Null)?;
    let end = *state(&final_states(&tl, &base), "grandmother-1");
    ensure!(end.opacity == 0.0 && end.position() == Point::new(900.0, 600.0), "ingested object ends at {end:?}");

    let tl = build("expel.emerge_then_path", &action("wolf", "spat", "stone", ActionCategory::Expel), Value::Null)?;
    let first = *state(&sample(&tl, &base, 1e-6), "stone-1");
    ensure!(first.opacity <= 1e-9 && first.position() == Point::new(900.0, 600.0), "expelled object starts as {first:?}");
    let AtomicOp::PathMove { polyline, .. } = &tl.clips[0].stages[1].bindings[0].op else {
        return Err("emerge_then_path has no path stage".into());
    };
    let end = *state(&final_states(&tl, &base), "stone-1");
    ensure!(end.opacity == 1.0 && end.position() == *polyline.last().unwrap(), "expelled object ends at {end:?}");
    Ok("dis_reappear, approach_then_vanish and emerge_then_path behave as composed".into())
}

// 6

fn random_project(rng: &mut ChaCha8Rng, seed_doc: &ProjectDocument, a: &FixtureAnalyzer) -> ProjectDocument {
    let mut doc = seed_doc.clone();
    let backgrounds: Vec<String> =
        assets::builtin_assets().into_iter().filter(|x| x.id.starts_with("background.")).map(|x| x.id).collect();
    let coord = |rng: &mut ChaCha8Rng| [rng.random_range(0.0..1600.0), rng.random_range(0.0..900.0)];
    if rng.random_bool(0.2) {
        let svg = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"90\"></svg>", rng.random_range(10..400));
        let up = doc.add_upload(svg.as_bytes()).unwrap();
        doc.set_background(0, Some(&up.id)).unwrap();
    }
    for _ in 0..rng.random_range(0..30) {
        let scene = rng.random_range(0..doc.scenes.len());
        let s = &doc.scenes[scene];
        let entities: Vec<String> =
            s.scene.characters.iter().chain(&s.scene.items).map(|e| e.name.clone()).collect();
        let m = match rng.random_range(0..7) {
            0 | 1 => {
                let [x, y] = coord(rng);
                let mut t = Transform::at(x, y);
                t.scale_x = rng.random_range(0.3..2.0);
                t.rotation = rng.random_range(-1.0..1.0);
                t.flip_h = rng.random_bool(0.3);
                Mutation::Place {
                    scene,
                    entity: entities.choose(rng).cloned().unwrap_or_default(),
                    variant: "default".into(),
                    transform: t,
                    z: rng.random_bool(0.5).then(|| rng.random_range(-3..5)),
                }
            }
            2 => Mutation::SaveLayout { scene },
            3 => Mutation::SetBackground { scene, asset: backgrounds.choose(rng).cloned() },
            4 => Mutation::Reclassify {
                scene,
                action: rng.random_range(0..s.scene.actions.len().max(1)),
                category: *ActionCategory::ALL.choose(rng).unwrap(),
            },
            _ => {
                let Some(act) = s.scene.actions.choose(rng) else { continue };
                let Some(category) = act.category else { continue };
                let Some(t) = design_space::patterns_for(category).choose(rng).map(|t| t.id.clone()) else { continue };
                let mut params = json!({});
                if rng.random_bool(0.5) {
                    params["target"] = json!(coord(rng));
                }
                if rng.random_bool(0.5) {
                    params["speed"] = json!(rng.random_range(50.0..600.0));
                }
                Mutation::AddClip { scene, action: act.id, template_id: t, params }
            }
        };
        let mut next = doc.clone();
        if authoring::apply(&mut next, &m, a).is_ok() {
            doc = next;
        }
    }
    doc
}

fn persistence_and_export() -> Outcome {
    let a = analyzer("sleeping_beauty");
    let seed_doc = ProjectDocument::new_project(&read("sleeping_beauty.txt"), &a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dir = tempfile::tempdir().unwrap();
    let (mut exported, mut replays) = (0, 0);
    for i in 0..500 {
        let d = random_project(&mut rng, &seed_doc, &a);
        let path = dir.path().join(format!("p{i}")).join(document::PROJECT_FILE);
        document::save(&d, &path).map_err(|e| format!("project {i}: {e}"))?;
        let back = document::load(&path).map_err(|e| format!("project {i}: {e}"))?;
        let mut want: ProjectDocument = canonicalize(&d).unwrap();
        want.upload_bytes = d.upload_bytes.clone();
        ensure!(back == want, "project {i} changed across save and load");

        let Ok(x) = render::export_document(&back, 30, None) else { continue };
        exported += 1;
        let json = x.to_json();
        ensure!(json == render::export_document(&back, 30, None).unwrap().to_json(), "project {i}: export differs between runs");
        let sid = x.scenes[0].id;
        let frames = |fps| render::render_frames(&back, sid, fps).unwrap().into_iter().map(|f| f.svg).collect::<Vec<_>>();
        ensure!(frames(5) == frames(5), "project {i}: frames differ between runs");
        let parsed = MotionComicDocument::from_json(&json).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let s = parsed.scenes.choose(&mut rng).unwrap();
            let t = rng.random_range(0.0..=s.duration + 0.5);
            ensure!(s.replay(t) == back.sample_scene(s.id, t).unwrap(), "project {i} scene {} differs at t = {t}", s.id);
            replays += 1;
        }
    }
    ensure!(exported >= 100, "only {exported} projects had a saved scene");
    Ok(format!("500 round trips equal; {exported} exports and frame sets repeat byte for byte; {replays} replays match"))
}

// 7

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_motioncomic");
    let run_once = |dir: &Path| -> Result<(), String> {
        let project = dir.join("project.json");
        let steps: [Vec<String>; 2] = [
            vec![
                "analyze".into(),
                "--story".into(),
                fixture("sleeping_beauty.txt"),
                "--analyzer".into(),
                "fixture".into(),
                "--fixture".into(),
                fixture("sleeping_beauty.analyzer.json"),
                "--out".into(),
                project.display().to_string(),
            ],
            vec![
                "compile".into(),
                "--project".into(),
                project.display().to_string(),
                "--authoring".into(),
                fixture("sleeping_beauty.authoring.json"),
                "--out".into(),
                dir.join("out").display().to_string(),
                "--fps".into(),
                "30".into(),
            ],
        ];
        for args in steps {
            let o = Command::new(bin).args(&args).env("RUST_LOG", "off").output().map_err(|e| e.to_string())?;
            ensure!(o.status.success(), "{} failed: {}", args[0], String::from_utf8_lossy(&o.stderr));
        }
        Ok(())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let started = Instant::now();
    run_once(a.path())?;
    let elapsed = started.elapsed();
    run_once(b.path())?;
    let out = a.path().join("out");
    let x = MotionComicDocument::from_json(&std::fs::read_to_string(out.join(render::EXPORT_FILE)).unwrap())
        .map_err(|e| e.to_string())?;
    ensure!(x.scenes.len() == 3 && x.header.fps == 30, "{} scenes at {} fps", x.scenes.len(), x.header.fps);
    let mut frames = 0;
    for s in &x.scenes {
        let n = std::fs::read_dir(out.join(&s.frames_dir)).unwrap().count();
        ensure!(n == s.frame_count && n == render::frame_count(s.duration, 30), "scene {}: {n} frame files", s.id);
        frames += n;
    }
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    ensure!(ta == tb, "outputs differ between runs");
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("3 scenes, {frames} frames at 30 fps, {} identical files, {elapsed:.2?}", ta.len()))
}

// 8

async fn send(app: &Router, method: Method, uri: &str, body: Vec<u8>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let res = app.clone().oneshot(req.body(Body::from(body)).unwrap()).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn concrete(seg: &str) -> &str {
    match seg {
        "{id}" => "p1",
        "{sid}" | "{aid}" | "{cid}" | "{index}" => "0",
        "{entity}" => "wolf",
        "{variant}" => "default",
        "{slot}" => "head",
        "{path}" => "x.png",
        s => s,
    }
}

async fn service_robustness() -> Outcome {
    let state = AppState::new(Arc::new(analyzer("red_riding_hood")), None);
    let app = router(Arc::new(state));
    let story = serde_json::to_vec(&json!({ "story_text": read("red_riding_hood.txt") })).unwrap();
    let (status, _) = send(&app, Method::POST, "/projects", story).await;
    ensure!(status == StatusCode::CREATED, "create: {status}");
    let place = json!({ "entity": "Little Red Riding Hood", "transform": { "x": 200, "y": 640 } });
    let (_, body) = send(&app, Method::POST, "/projects/p1/scenes/1/placements", place.to_string().into_bytes()).await;
    let eid = serde_json::from_slice::<Value>(&body).unwrap()["result"]["element_id"].as_str().unwrap_or_default().to_string();
    send(&app, Method::PUT, "/projects/p1/scenes/1/layout", vec![]).await;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let junk_segments = ["-1", "99999999999999999999", "%20", "..", "%FF", "x", "0.5", "%F0%9F%92%A5"];
    let bodies: [&[u8]; 6] = [b"", b"{", b"[1,2", b"{\"op\":\"place\",\"scene\":\"x\"}", b"\xff\xfe", b"{\"category\":7,\"spans\":\"x\",\"order\":[-1],\"asset\":3,\"transform\":{\"x\":\"far\"}}"];
    let mut requests = 0;
    for r in ROUTES {
        let method = Method::from_bytes(r.method.to_uppercase().as_bytes()).unwrap();
        for _ in 0..25 {
            let mut uri: String = r
                .path
                .split('/')
                .map(|seg| if seg.starts_with('{') && rng.random_bool(0.5) { junk_segments.choose(&mut rng).unwrap() } else { concrete(seg) })
                .collect::<Vec<_>>()
                .join("/");
            if rng.random_bool(0.4) {
                uri.push_str(["?t=nan", "?fps=-3", "?revision=x", "?fps=100000", "?t=1e400", "?scene=zz"].choose(&mut rng).unwrap());
            }
            let body = bodies.choose(&mut rng).unwrap().to_vec();
            let (status, bytes) = send(&app, method.clone(), &uri, body).await;
            requests += 1;
            if status.is_success() {
                continue;
            }
            ensure!(status.is_client_error() || status == StatusCode::BAD_GATEWAY, "{method} {uri}: {status}");
            let v: Value = serde_json::from_slice(&bytes).map_err(|_| format!("{method} {uri}: untyped error body"))?;
            ensure!(v["code"].is_string() && v["message"].is_string() && v.get("detail").is_some(), "{method} {uri}: {v}");
        }
    }

    let (_, body) = send(&app, Method::GET, "/projects/p1/revisions", vec![]).await;
    let base = serde_json::from_slice::<Value>(&body).unwrap()["revisions"].as_array().unwrap().len() as u64 - 1;
    let mut tasks = Vec::new();
    for i in 0..100u32 {
        let app = app.clone();
        let eid = eid.clone();
        tasks.push(tokio::spawn(async move {
            let (method, uri, body) = match i % 4 {
                0 => (Method::POST, "/projects/p1/scenes/1/timeline/clips".to_string(), json!({ "action": 1, "template_id": "ptrans.dis_reappear", "params": { "target": [400 + i, 600] } })),
                1 => (Method::PATCH, format!("/projects/p1/scenes/1/placements/{eid}"), json!({ "transform": { "x": 200 + i, "y": 640 } })),
                2 => (Method::PATCH, "/projects/p1/scenes/0/actions/1".to_string(), json!({ "category": "speak" })),
                _ => (Method::GET, "/projects/p1/scenes/1/sample?t=1".to_string(), Value::Null),
            };
            let body = if body.is_null() { vec![] } else { body.to_string().into_bytes() };
            (i % 4, send(&app, method, &uri, body).await.0)
        }));
    }
    let (mut writes, mut clips) = (0u64, 0usize);
    for t in tasks {
        let (kind, status) = t.await.unwrap();
        ensure!(status.is_success(), "concurrent request kind {kind}: {status}");
        writes += u64::from(kind != 3);
        clips += usize::from(kind == 0);
    }
    let (_, body) = send(&app, Method::GET, "/projects/p1/revisions", vec![]).await;
    let chain: Vec<u64> = serde_json::from_slice::<Value>(&body).unwrap()["revisions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["revision"].as_u64().unwrap())
        .collect();
    ensure!(chain == (0..=base + writes).collect::<Vec<_>>(), "revision chain {chain:?}");
    let (_, body) = send(&app, Method::GET, "/projects/p1/scenes/1/timeline", vec![]).await;
    let n = serde_json::from_slice::<Value>(&body).unwrap()["clips"].as_array().unwrap().len();
    ensure!(n == clips, "{n} clips after {clips} concurrent adds");
    Ok(format!("{requests} malformed requests typed; 100 concurrent requests left revisions 0..={}", base + writes))
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("analysis pipeline replay", Box::new(pipeline_replay)),
        ("scene span properties", Box::new(span_properties)),
        ("design space soundness", Box::new(design_space_soundness)),
        ("interpolation oracle", Box::new(interpolation_oracle)),
        ("composite semantics", Box::new(composite_semantics)),
        ("persistence and export determinism", Box::new(persistence_and_export)),
        ("end to end compile", Box::new(end_to_end)),
        (
            "service robustness",
            Box::new(|| {
                tokio::runtime::Builder::new_multi_thread()
                    .worker_threads(4)
                    .enable_all()
                    .build()
                    .unwrap()
                    .block_on(service_robustness())
            }),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
