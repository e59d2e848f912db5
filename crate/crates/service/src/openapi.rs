//! OpenAPI description generated from the route table.

use serde_json::{json, Map, Value};

use crate::error::status_for;

pub struct RouteDoc {
    pub method: &'static str,
    pub path: &'static str,
    pub summary: &'static str,
    /// Request body, described; `None` for bodiless requests.
    pub body: Option<&'static str>,
    pub query: &'static [(&'static str, &'static str)],
    pub success: u16,
    pub errors: &'static [&'static str],
}

const P: &[&str] = &["UnknownProject"];
const S: &[&str] = &["UnknownProject", "UnknownScene", "InvalidPath"];

pub const ROUTES: &[RouteDoc] = &[
    RouteDoc { method: "get", path: "/health", summary: "Liveness probe", body: None, query: &[], success: 200, errors: &[] },
    RouteDoc { method: "get", path: "/openapi.json", summary: "This document", body: None, query: &[], success: 200, errors: &[] },
    RouteDoc { method: "get", path: "/design-space", summary: "Frequency table, atomic operations and pattern templates", body: None, query: &[], success: 200, errors: &[] },
    RouteDoc { method: "get", path: "/assets", summary: "Built-in asset library", body: None, query: &[], success: 200, errors: &[] },
    RouteDoc {
        method: "post",
        path: "/projects",
        summary: "Analyze a story into a new project; JSON {story_text} or a text/plain upload",
        body: Some("{story_text: string} or raw UTF-8 text"),
        query: &[],
        success: 201,
        errors: &["EmptyStory", "NotText", "InvalidBody", "AnalyzerUnavailable", "InvalidSpans", "MalformedResponse", "MissingField", "MissingFixture", "PayloadTooLarge"],
    },
    RouteDoc { method: "get", path: "/projects/{id}", summary: "Project document at the latest or a given revision", body: None, query: &[("revision", "integer")], success: 200, errors: &["UnknownProject", "UnknownRevision", "InvalidQuery"] },
    RouteDoc { method: "get", path: "/projects/{id}/outline", summary: "Scenes with text, entities, actions and categories", body: None, query: &[], success: 200, errors: P },
    RouteDoc { method: "get", path: "/projects/{id}/revisions", summary: "Committed revision chain", body: None, query: &[], success: 200, errors: P },
    RouteDoc {
        method: "patch",
        path: "/projects/{id}/spans",
        summary: "Resegment the story; unchanged scenes keep their layouts and timelines",
        body: Some("{spans: [{id, begin_index, end_index}]}"),
        query: &[],
        success: 200,
        errors: &["UnknownProject", "InvalidBody", "InvalidSpans", "AnalyzerUnavailable", "MalformedResponse", "MissingFixture"],
    },
    RouteDoc {
        method: "post",
        path: "/projects/{id}/mutations",
        summary: "Apply one authoring-script mutation",
        body: Some("{op, ...} as in an authoring script"),
        query: &[],
        success: 200,
        errors: &["UnknownProject", "InvalidBody"],
    },
    RouteDoc { method: "post", path: "/projects/{id}/export", summary: "Motion comic document for saved scenes", body: None, query: &[("fps", "integer"), ("scene", "integer")], success: 200, errors: &["UnknownProject", "NothingToExport", "UnsavedLayout", "InvalidParam", "InvalidQuery"] },
    RouteDoc { method: "get", path: "/projects/{id}/assets", summary: "Built-in and uploaded assets", body: None, query: &[], success: 200, errors: P },
    RouteDoc { method: "post", path: "/projects/{id}/assets", summary: "Upload an image or audio asset (raw bytes, at most 10 MiB)", body: Some("raw file bytes"), query: &[], success: 201, errors: &["UnknownProject", "PayloadTooLarge", "UnsupportedMedia", "EmptyUpload"] },
    RouteDoc { method: "get", path: "/projects/{id}/assets/files/{path}", summary: "Asset file by library-relative path", body: None, query: &[], success: 200, errors: &["UnknownProject", "UnknownAsset"] },
    RouteDoc { method: "get", path: "/projects/{id}/prototypes", summary: "Character and item prototypes", body: None, query: &[], success: 200, errors: P },
    RouteDoc { method: "post", path: "/projects/{id}/prototypes", summary: "Add a prototype for a new entity", body: Some("{entity: {name, kind}}"), query: &[], success: 201, errors: &["UnknownProject", "InvalidBody", "DuplicateEntity", "UnknownEntity"] },
    RouteDoc { method: "post", path: "/projects/{id}/prototypes/{entity}/variants", summary: "Add a variant, empty or copied", body: Some("{variant, copy_from?}"), query: &[], success: 201, errors: &["UnknownProject", "InvalidBody", "UnknownEntity", "DuplicateVariant", "UnknownVariant"] },
    RouteDoc { method: "put", path: "/projects/{id}/prototypes/{entity}/variants/{variant}/slots/{slot}", summary: "Set one slot's asset, anchor, offset or scale", body: Some("{asset, anchor?, offset?, scale?}"), query: &[], success: 200, errors: &["UnknownProject", "InvalidBody", "InvalidPath", "UnknownEntity", "UnknownVariant", "UnknownAsset", "WrongAssetType"] },
    RouteDoc { method: "delete", path: "/projects/{id}/prototypes/{entity}/variants/{variant}/slots/{slot}", summary: "Clear one slot", body: None, query: &[], success: 200, errors: &["UnknownProject", "InvalidPath", "UnknownEntity", "UnknownVariant", "LastSlot"] },
    RouteDoc { method: "patch", path: "/projects/{id}/scenes/{sid}/actions/{aid}", summary: "Override an action's category", body: Some("{category}"), query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "UnknownAction", "InvalidBody", "InvalidPath"] },
    RouteDoc { method: "get", path: "/projects/{id}/scenes/{sid}/actions/{aid}/suggestions", summary: "Ranked pattern templates for an action", body: None, query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "UnknownAction", "UnclassifiedAction", "InvalidPath"] },
    RouteDoc { method: "get", path: "/projects/{id}/scenes/{sid}/layout", summary: "Scene layout", body: None, query: &[], success: 200, errors: S },
    RouteDoc { method: "put", path: "/projects/{id}/scenes/{sid}/layout", summary: "Save the layout snapshot", body: None, query: &[], success: 200, errors: S },
    RouteDoc { method: "post", path: "/projects/{id}/scenes/{sid}/placements", summary: "Place an element", body: Some("{entity, variant?, transform?, z?}"), query: &[], success: 201, errors: &["UnknownProject", "UnknownScene", "InvalidBody", "UnknownEntity", "UnknownVariant", "EmptyVariant", "InvalidTransform"] },
    RouteDoc { method: "patch", path: "/projects/{id}/scenes/{sid}/placements/{eid}", summary: "Move, restack or re-skin an element", body: Some("{transform?, z?, variant?}"), query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "UnknownElement", "InvalidBody", "UnknownVariant", "InvalidTransform"] },
    RouteDoc { method: "delete", path: "/projects/{id}/scenes/{sid}/placements/{eid}", summary: "Remove an element", body: None, query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "UnknownElement", "ElementInUse"] },
    RouteDoc { method: "put", path: "/projects/{id}/scenes/{sid}/background", summary: "Set or clear the background", body: Some("{asset: string | null}"), query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "InvalidBody", "UnknownAsset", "WrongAssetType"] },
    RouteDoc { method: "put", path: "/projects/{id}/scenes/{sid}/bgm", summary: "Set or clear background music", body: Some("{bgm: {asset, offset} | null}"), query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "InvalidBody", "UnknownAsset", "WrongAssetType"] },
    RouteDoc { method: "get", path: "/projects/{id}/scenes/{sid}/timeline", summary: "Clips with start offsets", body: None, query: &[], success: 200, errors: S },
    RouteDoc {
        method: "post",
        path: "/projects/{id}/scenes/{sid}/timeline/clips",
        summary: "Instantiate a pattern template for an action",
        body: Some("{action, template_id, params?}"),
        query: &[],
        success: 201,
        errors: &["UnknownProject", "UnknownScene", "InvalidBody", "UnknownAction", "UnclassifiedAction", "UnknownTemplate", "TemplateMismatch", "MissingActor", "MissingSlot", "UnknownParam", "InvalidParam", "OffCanvas"],
    },
    RouteDoc { method: "delete", path: "/projects/{id}/scenes/{sid}/timeline/clips/{cid}", summary: "Remove a clip", body: None, query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "UnknownClip", "InvalidPath"] },
    RouteDoc { method: "put", path: "/projects/{id}/scenes/{sid}/timeline/order", summary: "Reorder clips", body: Some("{order: [clip id]}"), query: &[], success: 200, errors: &["UnknownProject", "UnknownScene", "InvalidBody", "BadPermutation"] },
    RouteDoc { method: "get", path: "/projects/{id}/scenes/{sid}/sample", summary: "Element states at time t", body: None, query: &[("t", "number")], success: 200, errors: &["UnknownProject", "UnknownScene", "InvalidPath", "InvalidQuery"] },
    RouteDoc { method: "get", path: "/projects/{id}/scenes/{sid}/frames", summary: "Frame manifest: states per frame", body: None, query: &[("fps", "integer")], success: 200, errors: &["UnknownProject", "UnknownScene", "UnsavedLayout", "InvalidParam", "InvalidQuery"] },
    RouteDoc { method: "get", path: "/projects/{id}/scenes/{sid}/frames/{index}", summary: "One frame as SVG", body: None, query: &[("fps", "integer")], success: 200, errors: &["UnknownProject", "UnknownScene", "UnsavedLayout", "UnknownFrame", "InvalidParam", "InvalidPath"] },
];

fn path_params(path: &str) -> Vec<Value> {
    path.split('/')
        .filter_map(|seg| seg.strip_prefix('{').and_then(|s| s.strip_suffix('}')))
        .map(|name| {
            let ty = if matches!(name, "sid" | "aid" | "cid") { "integer" } else { "string" };
            json!({ "name": name, "in": "path", "required": true, "schema": { "type": ty } })
        })
        .collect()
}

pub fn document() -> Value {
    let mut paths = Map::new();
    for r in ROUTES {
        let mut params = path_params(r.path);
        for (name, ty) in r.query {
            params.push(json!({ "name": name, "in": "query", "required": *name == "t", "schema": { "type": ty } }));
        }
        let mut responses = Map::new();
        responses.insert(r.success.to_string(), json!({ "description": "success" }));
        let mut by_status: std::collections::BTreeMap<u16, Vec<&str>> = Default::default();
        for code in r.errors.iter().copied().chain(["InvalidBody"].into_iter().filter(|_| r.body.is_some())) {
            let list = by_status.entry(status_for(code).as_u16()).or_default();
            if !list.contains(&code) {
                list.push(code);
            }
        }
        for (status, codes) in by_status {
            responses.insert(
                status.to_string(),
                json!({
                    "description": codes.join(", "),
                    "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Error" } } },
                }),
            );
        }
        let mut op = json!({ "summary": r.summary, "parameters": params, "responses": responses });
        if let Some(body) = r.body {
            op["requestBody"] = json!({
                "required": false,
                "description": body,
                "content": { "application/json": { "schema": { "type": "object" } } },
            });
        }
        paths
            .entry(r.path.to_string())
            .or_insert_with(|| json!({}))
            .as_object_mut()
            .expect("path item")
            .insert(r.method.into(), op);
    }
    json!({
        "openapi": "3.0.3",
        "info": { "title": "motioncomic", "version": env!("CARGO_PKG_VERSION") },
        "paths": paths,
        "components": { "schemas": { "Error": {
            "type": "object",
            "required": ["code", "message", "detail"],
            "properties": {
                "code": { "type": "string" },
                "message": { "type": "string" },
                "detail": {},
            },
        } } },
    })
}
