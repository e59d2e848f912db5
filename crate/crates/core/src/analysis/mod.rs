//! Three-step story analysis: segment into scenes, extract entities and
//! SVO actions per scene, classify each action.

pub mod analyzer;
pub mod llm;
pub mod schema;
pub mod spans;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use analyzer::{
    Analyzer, AnalyzerError, AnalyzerRequest, CountingAnalyzer, FixtureAnalyzer, FixtureError,
    Payloads, RequestKind, ScenePayload,
};
pub use llm::{ConfigError, LlmAnalyzer, LlmAnalyzerConfig};
pub use schema::{ClassifiedAction, RawSvo, SceneInfo, SchemaError};
pub use spans::{
    repair_spans, repair_spans_report, validate_spans, RepairFailure, RepairReport, RepairStep,
    SpanRule, SpanViolation,
};

use crate::narrative::{
    rebuild_scene_text, ActionCategory, EntityKind, EntityRef, NarrativeError, Scene, SceneSpan,
    Sentence, SvoAction,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("story text is empty")]
    EmptyStory,
    #[error("analyzer unavailable: {0}")]
    AnalyzerUnavailable(String),
    #[error("no fixture response for {kind} input {sha256}")]
    MissingFixture { kind: RequestKind, sha256: String },
    #[error("malformed {kind} response: {reason}")]
    MalformedResponse { kind: RequestKind, reason: String },
    #[error("{kind} response is missing field `{path}`")]
    MissingField { kind: RequestKind, path: String },
    #[error("unknown action category `{0}`")]
    UnknownCategory(String),
    #[error("invalid scene spans: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSpans(Vec<SpanViolation>),
    #[error("action {index} has an empty verb")]
    EmptyVerb { index: usize },
    #[error("nothing to classify")]
    NothingToClassify,
    #[error("scene text is empty")]
    EmptySceneText,
    #[error("unknown action {0}")]
    UnknownAction(usize),
    #[error(transparent)]
    Narrative(#[from] NarrativeError),
}

impl AnalysisError {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::EmptyStory => "EmptyStory",
            AnalysisError::AnalyzerUnavailable(_) => "AnalyzerUnavailable",
            AnalysisError::MissingFixture { .. } => "MissingFixture",
            AnalysisError::MalformedResponse { .. } => "MalformedResponse",
            AnalysisError::MissingField { .. } => "MissingField",
            AnalysisError::UnknownCategory(_) => "UnknownCategory",
            AnalysisError::InvalidSpans(_) => "InvalidSpans",
            AnalysisError::EmptyVerb { .. } => "EmptyVerb",
            AnalysisError::NothingToClassify => "NothingToClassify",
            AnalysisError::EmptySceneText => "EmptySceneText",
            AnalysisError::UnknownAction(_) => "UnknownAction",
            AnalysisError::Narrative(NarrativeError::EmptyStory) => "EmptyStory",
            AnalysisError::Narrative(NarrativeError::SpanOutOfRange { .. }) => "SpanOutOfRange",
            AnalysisError::Narrative(NarrativeError::UnknownCategory(_)) => "UnknownCategory",
        }
    }

    fn from_schema(kind: RequestKind, e: SchemaError) -> Self {
        match e {
            SchemaError::Malformed(reason) => AnalysisError::MalformedResponse { kind, reason },
            SchemaError::MissingField(path) => AnalysisError::MissingField { kind, path },
            SchemaError::UnknownCategory(t) => AnalysisError::UnknownCategory(t),
        }
    }
}

impl From<AnalyzerError> for AnalysisError {
    fn from(e: AnalyzerError) -> Self {
        match e {
            AnalyzerError::Unavailable(m) => AnalysisError::AnalyzerUnavailable(m),
            AnalyzerError::MissingFixture { kind, sha256 } => {
                AnalysisError::MissingFixture { kind, sha256 }
            }
        }
    }
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Asks the analyzer for a scene partition, repairing it when the damage is
/// within the repair rules. A one-sentence story is always a single scene.
pub fn segment_story(
    sentences: &[Sentence],
    analyzer: &dyn Analyzer,
) -> Result<Vec<SceneSpan>, AnalysisError> {
    let n = sentences.len();
    if n == 0 {
        return Err(AnalysisError::EmptyStory);
    }
    if n == 1 {
        return Ok(vec![SceneSpan::new(0, 0, 0)]);
    }
    let request = AnalyzerRequest::segment(sentences);
    let raw = analyzer.complete(&request)?;
    let spans = schema::parse_segmentation(&raw)
        .map_err(|e| AnalysisError::from_schema(RequestKind::Segment, e))?;
    match validate_spans(&spans, n) {
        Ok(()) => Ok(spans),
        Err(violations) => match repair_spans(&spans, n) {
            Ok(repaired) => {
                log::info!("repaired scene spans: {violations:?}");
                Ok(repaired)
            }
            Err(RepairFailure::Unrepairable(_)) | Err(RepairFailure::NotSorted) => {
                Err(AnalysisError::InvalidSpans(violations))
            }
        },
    }
}

pub fn extract_scene_info(
    scene_text: &str,
    analyzer: &dyn Analyzer,
) -> Result<SceneInfo, AnalysisError> {
    if scene_text.trim().is_empty() {
        return Err(AnalysisError::EmptySceneText);
    }
    let raw = analyzer.complete(&AnalyzerRequest::extract(scene_text))?;
    schema::parse_scene_info(&raw).map_err(|e| AnalysisError::from_schema(RequestKind::Extract, e))
}

/// Classifies every verb of `svo`. The result has one entry per input action,
/// in input order.
pub fn classify_actions(
    svo: &[SvoAction],
    analyzer: &dyn Analyzer,
) -> Result<Vec<ClassifiedAction>, AnalysisError> {
    if svo.is_empty() {
        return Err(AnalysisError::NothingToClassify);
    }
    if let Some(index) = svo.iter().position(|a| a.verb.trim().is_empty()) {
        return Err(AnalysisError::EmptyVerb { index });
    }
    let raw = analyzer.complete(&AnalyzerRequest::classify(svo))?;
    let classified = schema::parse_classification(&raw)
        .map_err(|e| AnalysisError::from_schema(RequestKind::Classify, e))?;
    if classified.len() != svo.len() {
        return Err(AnalysisError::MalformedResponse {
            kind: RequestKind::Classify,
            reason: format!("expected {} classifications, got {}", svo.len(), classified.len()),
        });
    }
    for (i, (c, a)) in classified.iter().zip(svo).enumerate() {
        if !c.action.trim().eq_ignore_ascii_case(a.verb.trim()) {
            return Err(AnalysisError::MalformedResponse {
                kind: RequestKind::Classify,
                reason: format!("entry {i} classifies `{}` but the verb is `{}`", c.action, a.verb),
            });
        }
    }
    Ok(classified)
}

/// Sets one action's category; every other field is untouched.
pub fn reclassify_action(
    scene: &Scene,
    action_id: usize,
    category: ActionCategory,
) -> Result<Scene, AnalysisError> {
    let mut updated = scene.clone();
    let action = updated
        .actions
        .iter_mut()
        .find(|a| a.id == action_id)
        .ok_or(AnalysisError::UnknownAction(action_id))?;
    action.category = Some(category);
    Ok(updated)
}

/// A scene together with the hash of the text it was extracted from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzedScene {
    pub scene: Scene,
    pub text_hash: String,
}

fn dedup_names(names: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        if !n.is_empty() && !out.contains(n) {
            out.push(n.clone());
        }
    }
    out
}

/// Extracts and classifies one scene. No classification call is made for a
/// scene without actions.
fn analyze_span(
    sentences: &[Sentence],
    span: SceneSpan,
    analyzer: &dyn Analyzer,
) -> Result<(SceneInfo, Vec<SvoAction>, String), AnalysisError> {
    let text = rebuild_scene_text(sentences, &span)?;
    let info = extract_scene_info(&text, analyzer)?;
    let mut actions: Vec<SvoAction> = info
        .svo
        .iter()
        .enumerate()
        .map(|(id, raw)| SvoAction {
            id,
            subject: raw.subject.clone(),
            verb: raw.verb.clone(),
            object: raw.object.clone(),
            receiver: raw.receiver.clone(),
            category: None,
        })
        .collect();
    if !actions.is_empty() {
        let classified = classify_actions(&actions, analyzer)?;
        for (a, c) in actions.iter_mut().zip(classified) {
            a.category = Some(c.category);
        }
    }
    Ok((info, actions, text_hash(&text)))
}

/// Runs `analyze_span` for each span, concurrently across scenes. Errors are
/// reported for the earliest failing scene.
fn analyze_spans(
    sentences: &[Sentence],
    spans: &[SceneSpan],
    analyzer: &dyn Analyzer,
) -> Result<Vec<(SceneInfo, Vec<SvoAction>, String)>, AnalysisError> {
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = spans
            .iter()
            .map(|span| scope.spawn(move || analyze_span(sentences, *span, analyzer)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scene analysis thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// Builds scenes from extracted info. Entity kinds are fixed by their first
/// appearance across the story; a subject naming a known entity joins the
/// scene's entity lists.
fn assemble_scenes(parts: Vec<(SceneSpan, SceneInfo, Vec<SvoAction>, String)>) -> Vec<AnalyzedScene> {
    let mut kinds: BTreeMap<String, EntityKind> = BTreeMap::new();
    for (_, info, _, _) in &parts {
        for c in &info.characters {
            kinds.entry(c.clone()).or_insert(EntityKind::Character);
        }
        for o in &info.objects {
            kinds.entry(o.clone()).or_insert(EntityKind::Item);
        }
    }

    parts
        .into_iter()
        .map(|(span, info, actions, hash)| {
            let mut names = dedup_names(&info.characters);
            for o in dedup_names(&info.objects) {
                if !names.contains(&o) {
                    names.push(o);
                }
            }
            for a in &actions {
                if kinds.contains_key(&a.subject) && !names.contains(&a.subject) {
                    names.push(a.subject.clone());
                }
            }
            let (mut characters, mut items) = (Vec::new(), Vec::new());
            for name in names {
                match kinds[&name] {
                    EntityKind::Character => characters.push(EntityRef::character(name)),
                    EntityKind::Item => items.push(EntityRef::item(name)),
                }
            }
            AnalyzedScene {
                scene: Scene {
                    span,
                    characters,
                    items,
                    actions,
                },
                text_hash: hash,
            }
        })
        .collect()
}

/// Full pipeline: segment, then extract and classify each scene.
pub fn analyze_story(
    sentences: &[Sentence],
    analyzer: &dyn Analyzer,
) -> Result<Vec<AnalyzedScene>, AnalysisError> {
    let spans = segment_story(sentences, analyzer)?;
    let analyzed = analyze_spans(sentences, &spans, analyzer)?;
    Ok(assemble_scenes(
        spans
            .into_iter()
            .zip(analyzed)
            .map(|(s, (info, actions, hash))| (s, info, actions, hash))
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResegmentOutcome {
    pub scenes: Vec<AnalyzedScene>,
    /// For each new scene, the index of the previous scene it was carried
    /// over from, when its text did not change.
    pub carried_from: Vec<Option<usize>>,
}

/// Applies a user-edited partition. Scenes whose text is unchanged keep
/// their extracted information; the rest are analyzed again.
pub fn resegment(
    sentences: &[Sentence],
    previous: &[AnalyzedScene],
    edited_spans: &[SceneSpan],
    analyzer: &dyn Analyzer,
) -> Result<ResegmentOutcome, AnalysisError> {
    validate_spans(edited_spans, sentences.len()).map_err(AnalysisError::InvalidSpans)?;

    let mut carried_from = Vec::with_capacity(edited_spans.len());
    let mut to_analyze = Vec::new();
    for (i, span) in edited_spans.iter().enumerate() {
        let hash = text_hash(&rebuild_scene_text(sentences, span)?);
        let found = previous.iter().position(|p| p.text_hash == hash);
        if found.is_none() {
            to_analyze.push(i);
        }
        carried_from.push(found);
    }

    let fresh_spans: Vec<SceneSpan> = to_analyze.iter().map(|&i| edited_spans[i]).collect();
    let mut fresh = analyze_spans(sentences, &fresh_spans, analyzer)?.into_iter();

    let mut parts = Vec::with_capacity(edited_spans.len());
    for (i, span) in edited_spans.iter().enumerate() {
        match carried_from[i] {
            Some(p) => {
                let old = &previous[p].scene;
                let info = SceneInfo {
                    characters: old.characters.iter().map(|e| e.name.clone()).collect(),
                    objects: old.items.iter().map(|e| e.name.clone()).collect(),
                    svo: Vec::new(),
                };
                parts.push((*span, info, old.actions.clone(), previous[p].text_hash.clone()));
            }
            None => {
                let (info, actions, hash) = fresh.next().expect("one result per re-analyzed scene");
                parts.push((*span, info, actions, hash));
            }
        }
    }
    Ok(ResegmentOutcome {
        scenes: assemble_scenes(parts),
        carried_from,
    })
}
