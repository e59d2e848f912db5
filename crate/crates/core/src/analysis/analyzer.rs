use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::narrative::{rebuild_scene_text, SceneSpan, Sentence, SvoAction};

pub const SEGMENT_PROMPT: &str = include_str!("../../prompts/v1/segment.txt");
pub const EXTRACT_PROMPT: &str = include_str!("../../prompts/v1/extract.txt");
pub const CLASSIFY_PROMPT: &str = include_str!("../../prompts/v1/classify.txt");
pub const PROMPT_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Segment,
    Extract,
    Classify,
}

impl RequestKind {
    pub fn prompt(self) -> &'static str {
        match self {
            RequestKind::Segment => SEGMENT_PROMPT,
            RequestKind::Extract => EXTRACT_PROMPT,
            RequestKind::Classify => CLASSIFY_PROMPT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RequestKind::Segment => "segment",
            RequestKind::Extract => "extract",
            RequestKind::Classify => "classify",
        }
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One analysis request: the step kind plus its rendered user input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerRequest {
    pub kind: RequestKind,
    pub input: String,
}

#[derive(Serialize)]
struct SvoInput<'a> {
    subject: &'a str,
    verb: &'a str,
    object: &'a str,
    receiver: &'a str,
}

impl AnalyzerRequest {
    /// The sentence list rendered as a JSON array of strings.
    pub fn segment(sentences: &[Sentence]) -> Self {
        let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
        AnalyzerRequest {
            kind: RequestKind::Segment,
            input: serde_json::to_string(&texts).expect("string list serializes"),
        }
    }

    pub fn extract(scene_text: &str) -> Self {
        AnalyzerRequest {
            kind: RequestKind::Extract,
            input: scene_text.to_string(),
        }
    }

    /// `{"svo": [...]}` in the shape the classification prompt describes.
    pub fn classify(svo: &[SvoAction]) -> Self {
        let entries: Vec<SvoInput<'_>> = svo
            .iter()
            .map(|a| SvoInput {
                subject: &a.subject,
                verb: &a.verb,
                object: &a.object,
                receiver: &a.receiver,
            })
            .collect();
        let mut body = BTreeMap::new();
        body.insert("svo", entries);
        AnalyzerRequest {
            kind: RequestKind::Classify,
            input: serde_json::to_string(&body).expect("svo list serializes"),
        }
    }

    pub fn prompt(&self) -> &'static str {
        self.kind.prompt()
    }

    pub fn input_sha256(&self) -> String {
        hex::encode(Sha256::digest(self.input.as_bytes()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyzerError {
    #[error("analyzer unavailable: {0}")]
    Unavailable(String),
    #[error("no fixture response for {kind} input {sha256}")]
    MissingFixture { kind: RequestKind, sha256: String },
}

/// A stateless structured-text analyzer. Implementations return the raw
/// response document; the pipeline parses and validates it.
pub trait Analyzer: Send + Sync {
    fn complete(&self, request: &AnalyzerRequest) -> Result<String, AnalyzerError>;
}

impl<A: Analyzer + ?Sized> Analyzer for &A {
    fn complete(&self, request: &AnalyzerRequest) -> Result<String, AnalyzerError> {
        (**self).complete(request)
    }
}

impl<A: Analyzer + ?Sized> Analyzer for std::sync::Arc<A> {
    fn complete(&self, request: &AnalyzerRequest) -> Result<String, AnalyzerError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture file: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("payload span {0}..={1} is outside the story")]
    BadSpan(usize, usize),
}

/// Replays canned responses keyed by request kind and input SHA-256.
///
/// File format: `{"segment": {"<sha256>": "<response>"}, "extract": {...}, "classify": {...}}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureAnalyzer {
    #[serde(flatten)]
    responses: BTreeMap<RequestKind, BTreeMap<String, String>>,
}

impl FixtureAnalyzer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FixtureError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn record(&mut self, request: &AnalyzerRequest, response: impl Into<String>) {
        self.responses
            .entry(request.kind)
            .or_default()
            .insert(request.input_sha256(), response.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }

    pub fn len(&self) -> usize {
        self.responses.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Hand-written analyzer answers for one story: the segmentation, then an
/// extraction and classification per sentence range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payloads {
    pub segment: serde_json::Value,
    pub scenes: Vec<ScenePayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePayload {
    pub span: (usize, usize),
    pub extract: serde_json::Value,
    pub classify: serde_json::Value,
}

impl FixtureAnalyzer {
    /// Records `payloads` under the requests the pipeline will make for
    /// `sentences`. The classify request is keyed by the actions the
    /// extraction payload yields.
    pub fn from_payloads(sentences: &[Sentence], payloads: &Payloads) -> Result<Self, FixtureError> {
        let mut f = FixtureAnalyzer::new();
        f.record(&AnalyzerRequest::segment(sentences), payloads.segment.to_string());
        for p in &payloads.scenes {
            let span = SceneSpan::new(0, p.span.0, p.span.1);
            let text = rebuild_scene_text(sentences, &span).map_err(|_| FixtureError::BadSpan(p.span.0, p.span.1))?;
            f.record(&AnalyzerRequest::extract(&text), p.extract.to_string());
            let actions: Vec<SvoAction> = match super::schema::parse_scene_info(&p.extract.to_string()) {
                Ok(info) => info
                    .svo
                    .iter()
                    .enumerate()
                    .map(|(id, r)| SvoAction {
                        id,
                        subject: r.subject.clone(),
                        verb: r.verb.clone(),
                        object: r.object.clone(),
                        receiver: r.receiver.clone(),
                        category: None,
                    })
                    .collect(),
                Err(_) => continue,
            };
            if !actions.is_empty() {
                f.record(&AnalyzerRequest::classify(&actions), p.classify.to_string());
            }
        }
        Ok(f)
    }
}

impl Analyzer for FixtureAnalyzer {
    fn complete(&self, request: &AnalyzerRequest) -> Result<String, AnalyzerError> {
        let sha256 = request.input_sha256();
        self.responses
            .get(&request.kind)
            .and_then(|m| m.get(&sha256))
            .cloned()
            .ok_or(AnalyzerError::MissingFixture {
                kind: request.kind,
                sha256,
            })
    }
}

/// Wraps an analyzer and counts calls per kind.
#[derive(Debug, Default)]
pub struct CountingAnalyzer<A> {
    inner: A,
    segment: AtomicUsize,
    extract: AtomicUsize,
    classify: AtomicUsize,
}

impl<A> CountingAnalyzer<A> {
    pub fn new(inner: A) -> Self {
        CountingAnalyzer {
            inner,
            segment: AtomicUsize::new(0),
            extract: AtomicUsize::new(0),
            classify: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self, kind: RequestKind) -> usize {
        match kind {
            RequestKind::Segment => self.segment.load(Ordering::SeqCst),
            RequestKind::Extract => self.extract.load(Ordering::SeqCst),
            RequestKind::Classify => self.classify.load(Ordering::SeqCst),
        }
    }

    pub fn total_calls(&self) -> usize {
        [RequestKind::Segment, RequestKind::Extract, RequestKind::Classify]
            .into_iter()
            .map(|k| self.calls(k))
            .sum()
    }
}

impl<A: Analyzer> Analyzer for CountingAnalyzer<A> {
    fn complete(&self, request: &AnalyzerRequest) -> Result<String, AnalyzerError> {
        let counter = match request.kind {
            RequestKind::Segment => &self.segment,
            RequestKind::Extract => &self.extract,
            RequestKind::Classify => &self.classify,
        };
        counter.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(request)
    }
}
