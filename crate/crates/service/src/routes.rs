use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use motioncomic_core::authoring::{self, Mutation, Outcome};
use motioncomic_core::design_space;
use motioncomic_core::document::assets::{self, AssetKind, MAX_UPLOAD_BYTES};
use motioncomic_core::document::{canonical, story_from_bytes, ProjectDocument};
use motioncomic_core::engine::Slot;
use motioncomic_core::narrative::rebuild_scene_text;
use motioncomic_core::render::{self, svg};

use crate::error::{ApiError, ApiResult};
use crate::extract::{parse_json, JsonBody, PathParams, QueryParams, RawBody};
use crate::openapi;
use crate::state::SharedState;

/// Largest fps accepted by the frame endpoints.
pub const MAX_FPS: u32 = 120;

pub fn router(state: SharedState) -> Router {
    let project = "/projects/{id}";
    let scene = "/projects/{id}/scenes/{sid}";
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/openapi.json", get(|| async { Json(openapi::document()) }))
        .route("/design-space", get(|| async { Json(design_space::design_space_document()) }))
        .route("/assets", get(builtin_assets))
        .route("/projects", post(create_project))
        .route(project, get(get_project))
        .route(&format!("{project}/outline"), get(get_outline))
        .route(&format!("{project}/revisions"), get(get_revisions))
        .route(&format!("{project}/spans"), axum::routing::patch(patch_spans))
        .route(&format!("{project}/mutations"), post(post_mutation))
        .route(&format!("{project}/export"), post(export))
        .route(&format!("{project}/assets"), get(project_assets).post(upload))
        .route(&format!("{project}/assets/files/{{*path}}"), get(asset_file))
        .route(&format!("{project}/prototypes"), get(get_prototypes).post(add_prototype))
        .route(&format!("{project}/prototypes/{{entity}}/variants"), post(add_variant))
        .route(
            &format!("{project}/prototypes/{{entity}}/variants/{{variant}}/slots/{{slot}}"),
            put(set_slot).delete(clear_slot),
        )
        .route(&format!("{scene}/actions/{{aid}}"), axum::routing::patch(patch_action))
        .route(&format!("{scene}/actions/{{aid}}/suggestions"), get(suggestions))
        .route(&format!("{scene}/layout"), get(get_layout).put(save_layout))
        .route(&format!("{scene}/placements"), post(place))
        .route(
            &format!("{scene}/placements/{{eid}}"),
            axum::routing::patch(update_placement).delete(remove_placement),
        )
        .route(&format!("{scene}/background"), put(set_background))
        .route(&format!("{scene}/bgm"), put(set_bgm))
        .route(&format!("{scene}/timeline"), get(get_timeline))
        .route(&format!("{scene}/timeline/clips"), post(add_clip))
        .route(&format!("{scene}/timeline/clips/{{cid}}"), axum::routing::delete(remove_clip))
        .route(&format!("{scene}/timeline/order"), put(reorder))
        .route(&format!("{scene}/sample"), get(sample))
        .route(&format!("{scene}/frames"), get(frames))
        .route(&format!("{scene}/frames/{{index}}"), get(frame_svg))
        .fallback(|| async { ApiError::new("UnknownRoute", "no such endpoint") })
        .method_not_allowed_fallback(|| async { ApiError::new("MethodNotAllowed", "method not allowed here") })
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

fn canonical_json(value: &impl serde::Serialize) -> Response {
    match canonical::to_canonical_string(value) {
        Ok(body) => ([(header::CONTENT_TYPE, "application/json")], body).into_response(),
        Err(e) => ApiError::internal(e.to_string()).into_response(),
    }
}

fn outline(project_id: &str, revision: u64, doc: &ProjectDocument) -> Value {
    let scenes: Vec<Value> = doc
        .scenes
        .iter()
        .map(|e| {
            let s = &e.scene;
            json!({
                "id": s.span.id,
                "begin_index": s.span.begin_index,
                "end_index": s.span.end_index,
                "text": rebuild_scene_text(&doc.story, &s.span).unwrap_or_default(),
                "characters": s.characters,
                "items": s.items,
                "actions": s.actions,
                "layout_saved": e.layout.saved,
                "clips": e.timeline.clips.len(),
                "duration": e.timeline.duration(),
            })
        })
        .collect();
    json!({
        "project_id": project_id,
        "revision": revision,
        "sentences": doc.story,
        "scenes": scenes,
    })
}

/// Builds a mutation from the body object plus fields taken from the path.
fn mutation(op: &str, path: Value, body: Value) -> ApiResult<Mutation> {
    let mut map = match body {
        Value::Null => Map::new(),
        Value::Object(m) => m,
        _ => return Err(ApiError::new("InvalidBody", "expected a JSON object")),
    };
    if let Value::Object(p) = path {
        for (k, v) in p {
            if map.insert(k.clone(), v).is_some() {
                return Err(ApiError::new("InvalidBody", format!("`{k}` is given by the path")));
            }
        }
    }
    map.insert("op".into(), Value::String(op.into()));
    serde_json::from_value(Value::Object(map)).map_err(|e| ApiError::new("InvalidBody", e.to_string()))
}

async fn run(state: &SharedState, id: &str, m: Mutation) -> ApiResult<(u64, Outcome)> {
    let analyzer = state.analyzer.clone();
    let blocking = m.needs_analyzer();
    let name = m.name();
    state
        .mutate(id, name, blocking, move |doc| authoring::apply(doc, &m, &*analyzer))
        .await
}

fn done(revision: u64, outcome: Outcome) -> Json<Value> {
    Json(json!({ "revision": revision, "result": outcome }))
}

async fn builtin_assets() -> Json<Value> {
    Json(json!({ "assets": assets::builtin_assets() }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewProject {
    story_text: String,
}

async fn create_project(State(state): State<SharedState>, headers: HeaderMap, RawBody(bytes): RawBody) -> ApiResult<Response> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::new("EmptyStory", "story text is empty"));
    }
    let text = if is_json {
        parse_json::<NewProject>(&bytes)?.story_text
    } else {
        story_from_bytes(&bytes)?
    };
    let analyzer = state.analyzer.clone();
    let doc = tokio::task::spawn_blocking(move || ProjectDocument::new_project(&text, &*analyzer)).await??;
    let mut body = outline("", 0, &doc);
    body["project_id"] = json!(state.insert(doc));
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

#[derive(Deserialize)]
struct RevisionQuery {
    revision: Option<u64>,
}

async fn get_project(
    State(state): State<SharedState>,
    PathParams(id): PathParams<String>,
    QueryParams(q): QueryParams<RevisionQuery>,
) -> ApiResult<Response> {
    let p = state.project(&id)?;
    let r = match q.revision {
        Some(n) => p
            .at(n)
            .ok_or_else(|| ApiError::new("UnknownRevision", format!("project `{id}` has no revision {n}")))?,
        None => p.latest(),
    };
    Ok(canonical_json(&json!({ "project_id": id, "revision": r.revision, "document": &*r.doc })))
}

async fn get_outline(State(state): State<SharedState>, PathParams(id): PathParams<String>) -> ApiResult<Json<Value>> {
    let r = state.project(&id)?.latest();
    Ok(Json(outline(&id, r.revision, &r.doc)))
}

async fn get_revisions(State(state): State<SharedState>, PathParams(id): PathParams<String>) -> ApiResult<Json<Value>> {
    let revs: Vec<Value> = state
        .project(&id)?
        .revisions()
        .into_iter()
        .map(|(revision, op)| json!({ "revision": revision, "op": op }))
        .collect();
    Ok(Json(json!({ "project_id": id, "revisions": revs })))
}

async fn patch_spans(
    State(state): State<SharedState>,
    PathParams(id): PathParams<String>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("resegment", Value::Null, body)?;
    let (revision, _) = run(&state, &id, m).await?;
    let r = state.project(&id)?.latest();
    Ok(Json(outline(&id, revision, &r.doc)))
}

async fn post_mutation(
    State(state): State<SharedState>,
    PathParams(id): PathParams<String>,
    JsonBody(m): JsonBody<Mutation>,
) -> ApiResult<Json<Value>> {
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

#[derive(Deserialize)]
struct ExportQuery {
    fps: Option<u32>,
    scene: Option<usize>,
}

fn check_fps(fps: Option<u32>) -> ApiResult<u32> {
    let fps = fps.unwrap_or(render::DEFAULT_FPS);
    if fps == 0 || fps > MAX_FPS {
        return Err(ApiError::new("InvalidParam", format!("fps must be in 1..={MAX_FPS}")));
    }
    Ok(fps)
}

async fn export(
    State(state): State<SharedState>,
    PathParams(id): PathParams<String>,
    QueryParams(q): QueryParams<ExportQuery>,
) -> ApiResult<Response> {
    let fps = check_fps(q.fps)?;
    let r = state.project(&id)?.latest();
    let x = tokio::task::spawn_blocking(move || render::export_document(&r.doc, fps, q.scene)).await??;
    Ok(([(header::CONTENT_TYPE, "application/json")], x.to_json()).into_response())
}

async fn project_assets(State(state): State<SharedState>, PathParams(id): PathParams<String>) -> ApiResult<Json<Value>> {
    let r = state.project(&id)?.latest();
    let mut all = assets::builtin_assets();
    all.extend(r.doc.assets.iter().cloned());
    Ok(Json(json!({ "revision": r.revision, "assets": all })))
}

async fn upload(
    State(state): State<SharedState>,
    PathParams(id): PathParams<String>,
    RawBody(bytes): RawBody,
) -> ApiResult<Response> {
    let (revision, asset) = state.mutate(&id, "upload", false, move |doc| doc.add_upload(&bytes)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "revision": revision, "asset": asset }))).into_response())
}

async fn asset_file(
    State(state): State<SharedState>,
    PathParams((id, path)): PathParams<(String, String)>,
) -> ApiResult<Response> {
    let r = state.project(&id)?.latest();
    let not_found = || ApiError::new("UnknownAsset", format!("no asset file `{path}`"));
    let asset = assets::builtin_assets()
        .into_iter()
        .chain(r.doc.assets.iter().cloned())
        .find(|a| a.path == path)
        .ok_or_else(not_found)?;
    let bytes = match asset.kind {
        AssetKind::Builtin => assets::builtin_bytes(&asset.id, state.asset_root.as_deref()),
        AssetKind::Uploaded => r.doc.upload_bytes.get(&asset.id).cloned(),
    }
    .ok_or_else(not_found)?;
    Ok(([(header::CONTENT_TYPE, asset.mime)], bytes).into_response())
}

async fn get_prototypes(State(state): State<SharedState>, PathParams(id): PathParams<String>) -> ApiResult<Json<Value>> {
    let r = state.project(&id)?.latest();
    Ok(Json(json!({
        "revision": r.revision,
        "characters": r.doc.prototypes,
        "items": r.doc.item_prototypes,
    })))
}

async fn add_prototype(
    State(state): State<SharedState>,
    PathParams(id): PathParams<String>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Response> {
    let m = mutation("add_prototype", Value::Null, body)?;
    let (revision, _) = run(&state, &id, m.clone()).await?;
    let Mutation::AddPrototype { entity } = m else { unreachable!("built as add_prototype") };
    let r = state.project(&id)?.at(revision).ok_or_else(|| ApiError::internal("revision vanished"))?;
    let proto = r.doc.prototype(&entity.name).cloned();
    Ok((StatusCode::CREATED, Json(json!({ "revision": revision, "prototype": proto }))).into_response())
}

async fn add_variant(
    State(state): State<SharedState>,
    PathParams((id, entity)): PathParams<(String, String)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Response> {
    let m = mutation("add_variant", json!({ "entity": entity }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok((StatusCode::CREATED, done(revision, outcome)).into_response())
}

async fn set_slot(
    State(state): State<SharedState>,
    PathParams((id, entity, variant, slot)): PathParams<(String, String, String, Slot)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation(
        "set_slot",
        json!({ "entity": entity, "variant": variant, "slot": slot }),
        json!({ "part": body }),
    )?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn clear_slot(
    State(state): State<SharedState>,
    PathParams((id, entity, variant, slot)): PathParams<(String, String, String, Slot)>,
) -> ApiResult<Json<Value>> {
    let m = mutation(
        "set_slot",
        json!({ "entity": entity, "variant": variant, "slot": slot, "part": null }),
        Value::Null,
    )?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn patch_action(
    State(state): State<SharedState>,
    PathParams((id, sid, aid)): PathParams<(String, usize, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("reclassify", json!({ "scene": sid, "action": aid }), body)?;
    let (revision, _) = run(&state, &id, m).await?;
    let r = state.project(&id)?.at(revision).ok_or_else(|| ApiError::internal("revision vanished"))?;
    Ok(Json(json!({ "revision": revision, "action": r.doc.action(sid, aid)? })))
}

async fn suggestions(
    State(state): State<SharedState>,
    PathParams((id, sid, aid)): PathParams<(String, usize, usize)>,
) -> ApiResult<Json<Value>> {
    let r = state.project(&id)?.latest();
    let action = r.doc.action(sid, aid)?;
    let ranked: Vec<Value> = design_space::suggest(action)?
        .into_iter()
        .map(|s| {
            json!({
                "rank": s.rank,
                "score": s.score,
                "template_id": s.template.id,
                "label": s.template.label,
                "category": s.template.category,
                "op_kinds": s.template.op_kinds,
                "roles": s.template.roles,
                "parameters": s.template.parameters,
            })
        })
        .collect();
    Ok(Json(json!({ "revision": r.revision, "action": action, "suggestions": ranked })))
}

async fn get_layout(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
) -> ApiResult<Json<Value>> {
    let r = state.project(&id)?.latest();
    Ok(Json(json!({ "revision": r.revision, "layout": r.doc.scene(sid)?.layout })))
}

async fn save_layout(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("save_layout", json!({ "scene": sid }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn place(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Response> {
    let m = mutation("place", json!({ "scene": sid }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok((StatusCode::CREATED, done(revision, outcome)).into_response())
}

async fn update_placement(
    State(state): State<SharedState>,
    PathParams((id, sid, eid)): PathParams<(String, usize, String)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("update_placement", json!({ "scene": sid, "element_id": eid }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn remove_placement(
    State(state): State<SharedState>,
    PathParams((id, sid, eid)): PathParams<(String, usize, String)>,
) -> ApiResult<Json<Value>> {
    let m = mutation("remove_placement", json!({ "scene": sid, "element_id": eid }), Value::Null)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn set_background(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("set_background", json!({ "scene": sid }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn set_bgm(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("set_bgm", json!({ "scene": sid }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn get_timeline(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
) -> ApiResult<Json<Value>> {
    let r = state.project(&id)?.latest();
    let t = &r.doc.scene(sid)?.timeline;
    let offsets: Vec<f64> = t.offsets();
    Ok(Json(json!({
        "revision": r.revision,
        "clips": t.clips,
        "offsets": offsets,
        "duration": t.duration(),
    })))
}

async fn add_clip(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Response> {
    let m = mutation("add_clip", json!({ "scene": sid }), body)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    let Outcome::Clip(clip) = outcome else {
        return Err(ApiError::internal("add_clip produced no clip"));
    };
    let duration = clip.duration();
    Ok((
        StatusCode::CREATED,
        Json(json!({ "revision": revision, "clip": clip, "duration": duration })),
    )
        .into_response())
}

async fn remove_clip(
    State(state): State<SharedState>,
    PathParams((id, sid, cid)): PathParams<(String, usize, u64)>,
) -> ApiResult<Json<Value>> {
    let m = mutation("remove_clip", json!({ "scene": sid, "clip_id": cid }), Value::Null)?;
    let (revision, outcome) = run(&state, &id, m).await?;
    Ok(done(revision, outcome))
}

async fn reorder(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    JsonBody(body): JsonBody<Value>,
) -> ApiResult<Json<Value>> {
    let m = mutation("reorder_clips", json!({ "scene": sid }), body)?;
    let (revision, _) = run(&state, &id, m).await?;
    let r = state.project(&id)?.at(revision).ok_or_else(|| ApiError::internal("revision vanished"))?;
    let order: Vec<u64> = r.doc.scene(sid)?.timeline.clips.iter().map(|c| c.id).collect();
    Ok(Json(json!({ "revision": revision, "order": order })))
}

#[derive(Deserialize)]
struct SampleQuery {
    t: f64,
}

async fn sample(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    QueryParams(q): QueryParams<SampleQuery>,
) -> ApiResult<Response> {
    let r = state.project(&id)?.latest();
    let states = r.doc.sample_scene(sid, q.t)?;
    Ok(canonical_json(&json!({ "revision": r.revision, "t": q.t, "states": states })))
}

#[derive(Deserialize)]
struct FpsQuery {
    fps: Option<u32>,
}

async fn frames(
    State(state): State<SharedState>,
    PathParams((id, sid)): PathParams<(String, usize)>,
    QueryParams(q): QueryParams<FpsQuery>,
) -> ApiResult<Response> {
    let fps = check_fps(q.fps)?;
    let r = state.project(&id)?.latest();
    let revision = r.revision;
    let scene = tokio::task::spawn_blocking(move || render::export_scene(&r.doc, sid, fps)).await??;
    let timeline = scene.timeline();
    let base = scene.base_states();
    let frames: Vec<Value> = (0..scene.frame_count)
        .map(|k| {
            let t = render::frame_time(k, fps);
            json!({ "index": k, "t": t, "states": motioncomic_core::engine::sample(&timeline, &base, t) })
        })
        .collect();
    Ok(canonical_json(&json!({
        "revision": revision,
        "fps": fps,
        "duration": scene.duration,
        "frame_count": scene.frame_count,
        "frames": frames,
    })))
}

async fn frame_svg(
    State(state): State<SharedState>,
    PathParams((id, sid, index)): PathParams<(String, usize, String)>,
    QueryParams(q): QueryParams<FpsQuery>,
) -> ApiResult<Response> {
    let fps = check_fps(q.fps)?;
    let index: usize = index
        .trim_end_matches(".svg")
        .parse()
        .map_err(|_| ApiError::new("InvalidPath", format!("bad frame index `{index}`")))?;
    let r = state.project(&id)?.latest();
    let scene = render::export_scene(&r.doc, sid, fps)?;
    if index >= scene.frame_count {
        return Err(ApiError::new("UnknownFrame", format!("scene {sid} has {} frames", scene.frame_count)));
    }
    let states = scene.replay(render::frame_time(index, fps));
    let prefix = format!("/projects/{id}/assets/files/");
    let body = svg::frame_svg(&scene, &states, &prefix);
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], body).into_response())
}
