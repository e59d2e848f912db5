//! Frame discretization, vector frames and the motion-comic export.

pub mod svg;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::document::assets::{self, AssetKind, AssetRef};
use crate::document::{canonical, DocumentError, ProjectDocument, SCHEMA_VERSION};
use crate::engine::{self, defaults, AnimationClip, Easing, ElementState, Point, Slot, Timeline, Transform};
use crate::narrative::{rebuild_scene_text, EntityKind};

pub const DEFAULT_FPS: u32 = 30;
pub const EXPORT_FILE: &str = "motioncomic.json";
pub const FORMAT: &str = "motioncomic";

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("scene {0} has no saved layout")]
    UnsavedLayout(usize),
    #[error("no scene has a saved layout")]
    NothingToExport,
    #[error("fps must be positive")]
    BadFps,
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("io: {0}")]
    Io(String),
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::UnsavedLayout(_) => "UnsavedLayout",
            RenderError::NothingToExport => "NothingToExport",
            RenderError::BadFps => "InvalidParam",
            RenderError::Document(e) => e.code(),
            RenderError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for RenderError {
    fn from(e: std::io::Error) -> Self {
        RenderError::Io(e.to_string())
    }
}

/// Frames covering `[0, duration]` with both ends included.
pub fn frame_count(duration: f64, fps: u32) -> usize {
    if !(duration > 0.0) {
        return 1;
    }
    (duration * fps as f64 + 1e-9).floor() as usize + 1
}

pub fn frame_time(index: usize, fps: u32) -> f64 {
    index as f64 / fps as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    pub origin: String,
    pub y_axis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitConstants {
    pub amplitude: f64,
    pub frequency: String,
    pub units_per_hz: f64,
    pub min_hz: f64,
    pub max_hz: f64,
    pub cycles: String,
    pub right_leg: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportHeader {
    pub format: String,
    pub schema_version: String,
    pub canvas: Canvas,
    pub fps: u32,
    pub duration: f64,
    pub easing: BTreeMap<String, String>,
    pub gait: GaitConstants,
    pub sampling: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportPart {
    pub slot: Slot,
    pub asset: String,
    pub path: String,
    pub anchor: Point,
    pub offset: Point,
    pub scale: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportElement {
    pub element_id: String,
    pub entity: String,
    pub kind: EntityKind,
    pub variant: String,
    pub initial: Transform,
    pub z: i64,
    pub parts: Vec<ExportPart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportBgm {
    pub asset: AssetRef,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportScene {
    pub id: usize,
    pub text: String,
    /// Seconds into the whole export at which this scene begins.
    pub start: f64,
    pub duration: f64,
    pub frame_count: usize,
    pub frames_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<AssetRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bgm: Option<ExportBgm>,
    pub elements: Vec<ExportElement>,
    pub clips: Vec<AnimationClip>,
}

impl ExportScene {
    pub fn base_states(&self) -> Vec<ElementState> {
        self.elements
            .iter()
            .map(|e| ElementState::new(e.element_id.clone(), e.initial, e.z))
            .collect()
    }

    pub fn timeline(&self) -> Timeline {
        Timeline {
            clips: self.clips.clone(),
        }
    }

    /// Element states at `t` seconds into the scene, computed from the
    /// export alone.
    pub fn replay(&self, t: f64) -> Vec<ElementState> {
        engine::sample(&self.timeline(), &self.base_states(), t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionComicDocument {
    pub header: ExportHeader,
    pub scenes: Vec<ExportScene>,
    /// Every asset referenced by a scene, by id.
    pub assets: Vec<AssetRef>,
}

impl MotionComicDocument {
    pub fn to_json(&self) -> String {
        canonical::to_canonical_string(self).expect("export serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RenderError> {
        serde_json::from_str(text).map_err(|e| RenderError::Io(format!("bad export document: {e}")))
    }

    pub fn scene(&self, id: usize) -> Option<&ExportScene> {
        self.scenes.iter().find(|s| s.id == id)
    }
}

fn header(fps: u32, duration: f64) -> ExportHeader {
    ExportHeader {
        format: FORMAT.into(),
        schema_version: SCHEMA_VERSION.into(),
        canvas: Canvas {
            width: defaults::CANVAS_WIDTH,
            height: defaults::CANVAS_HEIGHT,
            origin: "top-left".into(),
            y_axis: "down".into(),
        },
        fps,
        duration,
        easing: [Easing::Linear, Easing::EaseInOutCubic]
            .into_iter()
            .map(|e| {
                let name = serde_json::to_value(e).ok().and_then(|v| v.as_str().map(String::from));
                (name.unwrap_or_default(), e.formula().to_string())
            })
            .collect(),
        gait: GaitConstants {
            amplitude: defaults::GAIT_AMPLITUDE,
            frequency: "clamp(speed / units_per_hz, min_hz, max_hz)".into(),
            units_per_hz: defaults::GAIT_UNITS_PER_HZ,
            min_hz: defaults::GAIT_MIN_HZ,
            max_hz: defaults::GAIT_MAX_HZ,
            cycles: "max(round(2 * duration * frequency) / 2, 0.5)".into(),
            right_leg: "antiphase".into(),
        },
        sampling: "a clip or stage applies for t > start; t >= duration yields the final state".into(),
    }
}

fn resolve(doc: &ProjectDocument, id: &str) -> Result<AssetRef, RenderError> {
    doc.asset(id)
        .ok_or_else(|| DocumentError::UnknownAsset(id.to_string()).into())
}

/// One scene with every reference resolved. Fails on an unsaved layout.
pub fn export_scene(doc: &ProjectDocument, scene: usize, fps: u32) -> Result<ExportScene, RenderError> {
    if fps == 0 {
        return Err(RenderError::BadFps);
    }
    let entry = doc.scene(scene)?;
    if !entry.layout.saved {
        return Err(RenderError::UnsavedLayout(scene));
    }
    let mut elements = Vec::new();
    for p in &entry.layout.placements {
        let proto = doc
            .prototype(&p.entity)
            .ok_or_else(|| DocumentError::UnknownEntity(p.entity.clone()))?;
        let variant = proto.variant(&p.variant).ok_or_else(|| DocumentError::UnknownVariant {
            entity: p.entity.clone(),
            variant: p.variant.clone(),
        })?;
        let mut parts = Vec::new();
        for (slot, part) in &variant.slots {
            let a = resolve(doc, &part.asset)?;
            parts.push(ExportPart {
                slot: *slot,
                asset: a.id,
                path: a.path,
                anchor: part.anchor,
                offset: part.offset,
                scale: part.scale,
                width: a.width,
                height: a.height,
            });
        }
        elements.push(ExportElement {
            element_id: p.element_id.clone(),
            entity: p.entity.clone(),
            kind: proto.entity.kind,
            variant: p.variant.clone(),
            initial: p.transform,
            z: p.z,
            parts,
        });
    }
    let background = entry.layout.background.as_deref().map(|id| resolve(doc, id)).transpose()?;
    let bgm = match &entry.layout.bgm {
        Some(b) => Some(ExportBgm {
            asset: resolve(doc, &b.asset)?,
            offset: b.offset,
        }),
        None => None,
    };
    let duration = entry.timeline.duration();
    Ok(ExportScene {
        id: scene,
        text: rebuild_scene_text(&doc.story, &entry.scene.span).unwrap_or_default(),
        start: 0.0,
        duration,
        frame_count: frame_count(duration, fps),
        frames_dir: frames_dir(scene),
        background,
        bgm,
        elements,
        clips: entry.timeline.clips.clone(),
    })
}

pub fn frames_dir(scene: usize) -> String {
    format!("scene-{scene:03}")
}

pub fn frame_file(index: usize) -> String {
    format!("frame-{index:06}.svg")
}

fn scene_assets(s: &ExportScene, into: &mut BTreeMap<String, AssetRef>) {
    for a in s.background.iter().chain(s.bgm.as_ref().map(|b| &b.asset)) {
        into.insert(a.id.clone(), a.clone());
    }
    for e in &s.elements {
        for p in &e.parts {
            into.entry(p.asset.clone()).or_insert_with(|| AssetRef {
                id: p.asset.clone(),
                kind: if assets::builtin(&p.asset).is_some() {
                    AssetKind::Builtin
                } else {
                    AssetKind::Uploaded
                },
                path: p.path.clone(),
                mime: String::new(),
                width: p.width,
                height: p.height,
            });
        }
    }
}

/// Export of `only` or of every scene with a saved layout, in id order,
/// back to back.
pub fn export_document(
    doc: &ProjectDocument,
    fps: u32,
    only: Option<usize>,
) -> Result<MotionComicDocument, RenderError> {
    let mut scenes = Vec::new();
    match only {
        Some(id) => scenes.push(export_scene(doc, id, fps)?),
        None => {
            for (i, entry) in doc.scenes.iter().enumerate() {
                if entry.layout.saved {
                    scenes.push(export_scene(doc, i, fps)?);
                }
            }
        }
    }
    if scenes.is_empty() {
        return Err(RenderError::NothingToExport);
    }
    let mut start = 0.0;
    let mut refs = BTreeMap::new();
    for s in &mut scenes {
        s.start = start;
        start += s.duration;
        scene_assets(s, &mut refs);
    }
    // Parts only carry size and path; fill the rest from the project.
    let assets = refs
        .into_values()
        .map(|a| doc.asset(&a.id).unwrap_or(a))
        .collect();
    Ok(MotionComicDocument {
        header: header(fps, start),
        scenes,
        assets,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFrame {
    pub index: usize,
    pub time: f64,
    pub states: Vec<ElementState>,
    pub svg: String,
}

/// Asset hrefs inside a frame file: frames live one directory below the
/// export root, next to `assets/`.
pub const FRAME_HREF_PREFIX: &str = "../assets/";

pub fn render_export_scene(scene: &ExportScene, fps: u32) -> Vec<VectorFrame> {
    let timeline = scene.timeline();
    let base = scene.base_states();
    let n = frame_count(timeline.duration(), fps);
    (0..n)
        .into_par_iter()
        .map(|k| {
            let time = frame_time(k, fps);
            let states = engine::sample(&timeline, &base, time);
            let svg = svg::frame_svg(scene, &states, FRAME_HREF_PREFIX);
            VectorFrame {
                index: k,
                time,
                states,
                svg,
            }
        })
        .collect()
}

pub fn render_frames(doc: &ProjectDocument, scene: usize, fps: u32) -> Result<Vec<VectorFrame>, RenderError> {
    Ok(render_export_scene(&export_scene(doc, scene, fps)?, fps))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExportSummary {
    pub scenes: usize,
    pub frames: usize,
    pub assets: usize,
}

fn asset_bytes(doc: &ProjectDocument, a: &AssetRef, root: Option<&Path>) -> Option<Vec<u8>> {
    match a.kind {
        AssetKind::Builtin => assets::builtin_bytes(&a.id, root),
        AssetKind::Uploaded => doc.upload_bytes.get(&a.id).cloned(),
    }
}

/// Writes `out/scene-NNN/frame-NNNNNN.svg`, `out/motioncomic.json` and the
/// referenced assets under `out/assets/`.
pub fn write_export(
    doc: &ProjectDocument,
    export: &MotionComicDocument,
    out: &Path,
    asset_root: Option<&Path>,
) -> Result<ExportSummary, RenderError> {
    std::fs::create_dir_all(out)?;
    let mut frames = 0;
    for scene in &export.scenes {
        let dir = out.join(&scene.frames_dir);
        std::fs::create_dir_all(&dir)?;
        let rendered = render_export_scene(scene, export.header.fps);
        frames += rendered.len();
        rendered
            .par_iter()
            .try_for_each(|f| std::fs::write(dir.join(frame_file(f.index)), &f.svg))?;
    }
    for a in &export.assets {
        let bytes = asset_bytes(doc, a, asset_root).ok_or_else(|| DocumentError::UnknownAsset(a.id.clone()))?;
        let path = out.join("assets").join(&a.path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, bytes)?;
    }
    std::fs::write(out.join(EXPORT_FILE), export.to_json())?;
    Ok(ExportSummary {
        scenes: export.scenes.len(),
        frames,
        assets: export.assets.len(),
    })
}
