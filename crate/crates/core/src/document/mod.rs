//! The persistent project: story, analysis, prototypes, layouts, timelines
//! and assets.

pub mod assets;
pub mod canonical;
pub mod layout;
pub mod prototype;
pub mod store;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, AnalyzedScene, Analyzer};
use crate::design_space;
use crate::engine::{self, instantiate, Actor, AnimationClip, Cast, ElementState, EngineError, Point, Slot, Timeline, Transform};
use crate::narrative::{tokenize_sentences, ActionCategory, EntityKind, EntityRef, Scene, SceneSpan, Sentence, SvoAction};

pub use assets::{AssetKind, AssetRef, UploadError};
pub use layout::{BgmRef, Placement, SceneLayout};
pub use prototype::{Prototype, SlotPart, Variant, DEFAULT_VARIANT};
pub use store::{load, save, PROJECT_FILE};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    #[error("story text is empty")]
    EmptyStory,
    #[error("story upload is not UTF-8 text")]
    NotText,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("document schema {found} is not readable by this version ({expected})")]
    SchemaMismatch { found: String, expected: String },
    #[error("corrupt document: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("unknown scene {0}")]
    UnknownScene(usize),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("entity `{0}` already has a prototype")]
    DuplicateEntity(String),
    #[error("entity `{entity}` has no variant `{variant}`")]
    UnknownVariant { entity: String, variant: String },
    #[error("variant `{variant}` of `{entity}` already exists")]
    DuplicateVariant { entity: String, variant: String },
    #[error("variant `{variant}` of `{entity}` has no parts")]
    EmptyVariant { entity: String, variant: String },
    #[error("unknown asset `{0}`")]
    UnknownAsset(String),
    #[error("asset `{asset}` cannot be used as {usage}")]
    WrongAssetType { asset: String, usage: &'static str },
    #[error("cannot remove the last part of a variant")]
    LastSlot,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element `{element}` is animated by clip {clip}")]
    ElementInUse { element: String, clip: u64 },
    #[error("unknown action {0}")]
    UnknownAction(usize),
    #[error("action {0} has no category")]
    UnclassifiedAction(usize),
    #[error("template `{template}` is for {template_category} actions, not {action_category}")]
    TemplateMismatch {
        template: String,
        template_category: ActionCategory,
        action_category: ActionCategory,
    },
    #[error("unknown pattern template `{0}`")]
    UnknownTemplate(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error(transparent)]
    Upload(#[from] UploadError),
    #[error("document has {} integrity problem(s): {}", .0.len(), .0.join("; "))]
    Invalid(Vec<String>),
}

impl DocumentError {
    pub fn code(&self) -> &'static str {
        match self {
            DocumentError::EmptyStory => "EmptyStory",
            DocumentError::NotText => "NotText",
            DocumentError::Analysis(e) => e.code(),
            DocumentError::Engine(e) => match e {
                EngineError::MissingActor { .. } => "MissingActor",
                EngineError::MissingSlot { .. } => "MissingSlot",
                EngineError::UnknownElement(_) => "UnknownElement",
                EngineError::UnknownTemplate(_) => "UnknownTemplate",
                EngineError::UnknownParam(_) => "UnknownParam",
                EngineError::InvalidParam { .. } => "InvalidParam",
                EngineError::InvalidOp(_) => "InvalidOp",
                EngineError::OffCanvas { .. } => "OffCanvas",
                EngineError::UnknownClip(_) => "UnknownClip",
                EngineError::BadPermutation(_) => "BadPermutation",
            },
            DocumentError::SchemaMismatch { .. } => "SchemaMismatch",
            DocumentError::Corrupt(_) => "CorruptDocument",
            DocumentError::Io(_) => "Io",
            DocumentError::UnknownScene(_) => "UnknownScene",
            DocumentError::UnknownEntity(_) => "UnknownEntity",
            DocumentError::DuplicateEntity(_) => "DuplicateEntity",
            DocumentError::UnknownVariant { .. } => "UnknownVariant",
            DocumentError::DuplicateVariant { .. } => "DuplicateVariant",
            DocumentError::EmptyVariant { .. } => "EmptyVariant",
            DocumentError::UnknownAsset(_) => "UnknownAsset",
            DocumentError::WrongAssetType { .. } => "WrongAssetType",
            DocumentError::LastSlot => "LastSlot",
            DocumentError::UnknownElement(_) => "UnknownElement",
            DocumentError::ElementInUse { .. } => "ElementInUse",
            DocumentError::UnknownAction(_) => "UnknownAction",
            DocumentError::UnclassifiedAction(_) => "UnclassifiedAction",
            DocumentError::TemplateMismatch { .. } => "TemplateMismatch",
            DocumentError::UnknownTemplate(_) => "UnknownTemplate",
            DocumentError::InvalidTransform(_) => "InvalidTransform",
            DocumentError::Upload(UploadError::TooLarge(_)) => "PayloadTooLarge",
            DocumentError::Upload(UploadError::Empty) => "EmptyUpload",
            DocumentError::Upload(UploadError::Unsupported) => "UnsupportedMedia",
            DocumentError::Invalid(_) => "InvalidDocument",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene: Scene,
    pub text_hash: String,
    #[serde(default)]
    pub layout: SceneLayout,
    #[serde(default)]
    pub timeline: Timeline,
}

/// Partial update for one slot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotAssignment {
    pub asset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectDocument {
    pub schema_version: String,
    pub story_text: String,
    pub story: Vec<Sentence>,
    pub scenes: Vec<SceneEntry>,
    pub prototypes: Vec<Prototype>,
    pub item_prototypes: Vec<Prototype>,
    /// Uploaded assets; built-ins are implicit.
    #[serde(default)]
    pub assets: Vec<AssetRef>,
    #[serde(skip)]
    pub upload_bytes: BTreeMap<String, Vec<u8>>,
    /// Fields written by newer versions, kept verbatim.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

/// Reads a `.txt` upload as story text.
pub fn story_from_bytes(bytes: &[u8]) -> Result<String, DocumentError> {
    let text = std::str::from_utf8(bytes).map_err(|_| DocumentError::NotText)?;
    Ok(text.strip_prefix('\u{feff}').unwrap_or(text).to_string())
}

fn check_transform(t: &Transform) -> Result<(), DocumentError> {
    t.validate().map_err(DocumentError::InvalidTransform)
}

impl ProjectDocument {
    /// Analyzes `story_text` and stubs a prototype for every extracted entity.
    pub fn new_project(story_text: &str, analyzer: &dyn Analyzer) -> Result<Self, DocumentError> {
        if story_text.trim().is_empty() {
            return Err(DocumentError::EmptyStory);
        }
        let story = tokenize_sentences(story_text).map_err(AnalysisError::from)?;
        let analyzed = analysis::analyze_story(&story, analyzer)?;
        let mut doc = ProjectDocument {
            schema_version: SCHEMA_VERSION.into(),
            story_text: story_text.to_string(),
            story,
            scenes: Vec::new(),
            prototypes: Vec::new(),
            item_prototypes: Vec::new(),
            assets: Vec::new(),
            upload_bytes: BTreeMap::new(),
            extra: BTreeMap::new(),
        };
        doc.install_scenes(analyzed, &[]);
        Ok(doc)
    }

    fn install_scenes(&mut self, analyzed: Vec<AnalyzedScene>, carried: &[Option<SceneEntry>]) {
        self.scenes = analyzed
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let (layout, timeline) = match carried.get(i).cloned().flatten() {
                    Some(old) => (old.layout, old.timeline),
                    None => Default::default(),
                };
                SceneEntry {
                    scene: a.scene,
                    text_hash: a.text_hash,
                    layout,
                    timeline,
                }
            })
            .collect();
        let entities: Vec<EntityRef> = self
            .scenes
            .iter()
            .flat_map(|s| s.scene.entities())
            .cloned()
            .collect();
        for e in entities {
            if self.prototype(&e.name).is_none() {
                self.push_prototype(Prototype::stub(e));
            }
        }
    }

    fn push_prototype(&mut self, p: Prototype) {
        match p.entity.kind {
            EntityKind::Character => self.prototypes.push(p),
            EntityKind::Item => self.item_prototypes.push(p),
        }
    }

    pub fn all_prototypes(&self) -> impl Iterator<Item = &Prototype> {
        self.prototypes.iter().chain(self.item_prototypes.iter())
    }

    pub fn prototype(&self, entity: &str) -> Option<&Prototype> {
        self.all_prototypes().find(|p| p.entity.name == entity)
    }

    fn prototype_mut(&mut self, entity: &str) -> Result<&mut Prototype, DocumentError> {
        self.prototypes
            .iter_mut()
            .chain(self.item_prototypes.iter_mut())
            .find(|p| p.entity.name == entity)
            .ok_or_else(|| DocumentError::UnknownEntity(entity.to_string()))
    }

    pub fn scene(&self, id: usize) -> Result<&SceneEntry, DocumentError> {
        self.scenes.get(id).ok_or(DocumentError::UnknownScene(id))
    }

    fn scene_mut(&mut self, id: usize) -> Result<&mut SceneEntry, DocumentError> {
        self.scenes.get_mut(id).ok_or(DocumentError::UnknownScene(id))
    }

    pub fn asset(&self, id: &str) -> Option<AssetRef> {
        assets::builtin(id).or_else(|| self.assets.iter().find(|a| a.id == id).cloned())
    }

    fn asset_size(&self, id: &str) -> Option<(f64, f64)> {
        self.asset(id).map(|a| (a.width, a.height))
    }

    fn require_asset(&self, id: &str, usage: &'static str, audio: bool) -> Result<AssetRef, DocumentError> {
        let a = self.asset(id).ok_or_else(|| DocumentError::UnknownAsset(id.to_string()))?;
        let ok = if audio { a.is_audio() } else { a.is_image() };
        if !ok {
            return Err(DocumentError::WrongAssetType {
                asset: id.to_string(),
                usage,
            });
        }
        Ok(a)
    }

    pub fn add_upload(&mut self, bytes: &[u8]) -> Result<AssetRef, DocumentError> {
        let asset = assets::uploaded_asset(bytes)?;
        if !self.assets.iter().any(|a| a.id == asset.id) {
            self.assets.push(asset.clone());
        }
        self.upload_bytes.insert(asset.id.clone(), bytes.to_vec());
        Ok(asset)
    }

    pub fn add_prototype(&mut self, entity: EntityRef) -> Result<&Prototype, DocumentError> {
        if entity.name.trim().is_empty() {
            return Err(DocumentError::UnknownEntity(entity.name));
        }
        if self.prototype(&entity.name).is_some() {
            return Err(DocumentError::DuplicateEntity(entity.name));
        }
        let name = entity.name.clone();
        self.push_prototype(Prototype::stub(entity));
        Ok(self.prototype(&name).expect("just added"))
    }

    /// New variant, empty or copied from an existing one.
    pub fn add_variant(&mut self, entity: &str, name: &str, copy_from: Option<&str>) -> Result<(), DocumentError> {
        let p = self.prototype_mut(entity)?;
        if p.variant(name).is_some() {
            return Err(DocumentError::DuplicateVariant {
                entity: entity.into(),
                variant: name.into(),
            });
        }
        let slots = match copy_from {
            Some(src) => p
                .variant(src)
                .ok_or_else(|| DocumentError::UnknownVariant {
                    entity: entity.into(),
                    variant: src.into(),
                })?
                .slots
                .clone(),
            None => BTreeMap::new(),
        };
        p.variants.push(Variant {
            name: name.into(),
            slots,
        });
        Ok(())
    }

    /// Sets or clears one slot of one variant. Placements and timelines are
    /// untouched.
    pub fn set_slot(
        &mut self,
        entity: &str,
        variant: &str,
        slot: Slot,
        assignment: Option<SlotAssignment>,
    ) -> Result<(), DocumentError> {
        let resolved = match &assignment {
            Some(a) => {
                let asset = self.require_asset(&a.asset, "a body part", false)?;
                if let Some(s) = a.scale {
                    if !(s.is_finite() && s > 0.0) {
                        return Err(DocumentError::InvalidTransform("part scale must be positive".into()));
                    }
                }
                let finite = |p: &Option<Point>| p.is_none_or(|p| p.is_finite());
                if !finite(&a.anchor) || !finite(&a.offset) {
                    return Err(DocumentError::InvalidTransform("part anchor and offset must be finite".into()));
                }
                Some(SlotPart {
                    asset: asset.id.clone(),
                    anchor: a.anchor.unwrap_or_else(|| prototype::default_anchor(slot, &asset)),
                    offset: a.offset.unwrap_or_else(|| prototype::default_offset(slot)),
                    scale: a.scale.unwrap_or(1.0),
                })
            }
            None => None,
        };
        let p = self.prototype_mut(entity)?;
        let v = p.variant_mut(variant).ok_or_else(|| DocumentError::UnknownVariant {
            entity: entity.into(),
            variant: variant.into(),
        })?;
        match resolved {
            Some(part) => {
                v.slots.insert(slot, part);
            }
            None => {
                if v.slots.contains_key(&slot) && v.slots.len() == 1 {
                    return Err(DocumentError::LastSlot);
                }
                v.slots.remove(&slot);
            }
        }
        Ok(())
    }

    /// Places an instance of `entity`; returns its new element id. The
    /// entity joins the scene's entity list if it was not there.
    pub fn place_element(
        &mut self,
        scene: usize,
        entity: &str,
        variant: &str,
        transform: Transform,
        z: Option<i64>,
    ) -> Result<String, DocumentError> {
        check_transform(&transform)?;
        let proto = self
            .prototype(entity)
            .ok_or_else(|| DocumentError::UnknownEntity(entity.to_string()))?;
        let v = proto.variant(variant).ok_or_else(|| DocumentError::UnknownVariant {
            entity: entity.into(),
            variant: variant.into(),
        })?;
        if v.slots.is_empty() {
            return Err(DocumentError::EmptyVariant {
                entity: entity.into(),
                variant: variant.into(),
            });
        }
        let entity_ref = proto.entity.clone();
        let entry = self.scene_mut(scene)?;
        let base = layout::slug(entity);
        let id = (1..)
            .map(|n| format!("{base}-{n}"))
            .find(|id| entry.layout.placement(id).is_none())
            .expect("unbounded ids");
        let z = z.unwrap_or_else(|| entry.layout.next_z());
        entry.layout.placements.push(Placement {
            element_id: id.clone(),
            entity: entity.into(),
            variant: variant.into(),
            transform,
            z,
        });
        entry.layout.saved = false;
        if !entry.scene.has_entity(entity) {
            match entity_ref.kind {
                EntityKind::Character => entry.scene.characters.push(entity_ref),
                EntityKind::Item => entry.scene.items.push(entity_ref),
            }
        }
        Ok(id)
    }

    pub fn update_placement(
        &mut self,
        scene: usize,
        element_id: &str,
        transform: Option<Transform>,
        z: Option<i64>,
        variant: Option<&str>,
    ) -> Result<(), DocumentError> {
        if let Some(t) = &transform {
            check_transform(t)?;
        }
        let entity = self
            .scene(scene)?
            .layout
            .placement(element_id)
            .ok_or_else(|| DocumentError::UnknownElement(element_id.to_string()))?
            .entity
            .clone();
        if let Some(v) = variant {
            let proto = self.prototype(&entity).ok_or_else(|| DocumentError::UnknownEntity(entity.clone()))?;
            let var = proto.variant(v).ok_or_else(|| DocumentError::UnknownVariant {
                entity: entity.clone(),
                variant: v.into(),
            })?;
            if var.slots.is_empty() {
                return Err(DocumentError::EmptyVariant {
                    entity,
                    variant: v.into(),
                });
            }
        }
        let entry = self.scene_mut(scene)?;
        let p = entry
            .layout
            .placements
            .iter_mut()
            .find(|p| p.element_id == element_id)
            .expect("checked above");
        if let Some(t) = transform {
            p.transform = t;
        }
        if let Some(z) = z {
            p.z = z;
        }
        if let Some(v) = variant {
            p.variant = v.into();
        }
        entry.layout.saved = false;
        Ok(())
    }

    pub fn remove_placement(&mut self, scene: usize, element_id: &str) -> Result<(), DocumentError> {
        let entry = self.scene_mut(scene)?;
        let idx = entry
            .layout
            .placements
            .iter()
            .position(|p| p.element_id == element_id)
            .ok_or_else(|| DocumentError::UnknownElement(element_id.to_string()))?;
        if let Some(c) = entry
            .timeline
            .clips
            .iter()
            .find(|c| c.stages.iter().flat_map(|s| &s.bindings).any(|b| b.element == element_id))
        {
            return Err(DocumentError::ElementInUse {
                element: element_id.into(),
                clip: c.id,
            });
        }
        entry.layout.placements.remove(idx);
        entry.layout.saved = false;
        Ok(())
    }

    pub fn save_layout(&mut self, scene: usize) -> Result<(), DocumentError> {
        self.scene_mut(scene)?.layout.saved = true;
        Ok(())
    }

    pub fn set_background(&mut self, scene: usize, asset: Option<&str>) -> Result<(), DocumentError> {
        if let Some(a) = asset {
            self.require_asset(a, "a background", false)?;
        }
        let entry = self.scene_mut(scene)?;
        entry.layout.background = asset.map(Into::into);
        entry.layout.saved = false;
        Ok(())
    }

    pub fn set_bgm(&mut self, scene: usize, bgm: Option<BgmRef>) -> Result<(), DocumentError> {
        if let Some(b) = &bgm {
            self.require_asset(&b.asset, "background music", true)?;
            if !(b.offset.is_finite() && b.offset >= 0.0) {
                return Err(DocumentError::InvalidTransform("music offset must be non-negative".into()));
            }
        }
        self.scene_mut(scene)?.layout.bgm = bgm;
        Ok(())
    }

    pub fn action(&self, scene: usize, action_id: usize) -> Result<&SvoAction, DocumentError> {
        self.scene(scene)?
            .scene
            .action(action_id)
            .ok_or(DocumentError::UnknownAction(action_id))
    }

    pub fn reclassify(&mut self, scene: usize, action_id: usize, category: ActionCategory) -> Result<(), DocumentError> {
        let entry = self.scene_mut(scene)?;
        entry.scene = analysis::reclassify_action(&entry.scene, action_id, category)?;
        Ok(())
    }

    /// Applies an edited partition. Scenes whose text did not change keep
    /// their layout and timeline; new scenes start empty.
    pub fn resegment(&mut self, spans: &[SceneSpan], analyzer: &dyn Analyzer) -> Result<(), DocumentError> {
        let previous: Vec<AnalyzedScene> = self
            .scenes
            .iter()
            .map(|e| AnalyzedScene {
                scene: e.scene.clone(),
                text_hash: e.text_hash.clone(),
            })
            .collect();
        let outcome = analysis::resegment(&self.story, &previous, spans, analyzer)?;
        let carried: Vec<Option<SceneEntry>> = outcome
            .carried_from
            .iter()
            .map(|c| c.map(|i| self.scenes[i].clone()))
            .collect();
        let mut scenes = outcome.scenes;
        for (s, c) in scenes.iter_mut().zip(&carried) {
            // Manually added entities survive when the scene is carried over.
            if let Some(old) = c {
                for e in old.scene.entities() {
                    if !s.scene.has_entity(&e.name) {
                        match e.kind {
                            EntityKind::Character => s.scene.characters.push(e.clone()),
                            EntityKind::Item => s.scene.items.push(e.clone()),
                        }
                    }
                }
            }
        }
        self.install_scenes(scenes, &carried);
        Ok(())
    }

    /// Placed elements as the engine sees them after the current timeline.
    pub fn cast(&self, scene: usize) -> Result<Cast, DocumentError> {
        let entry = self.scene(scene)?;
        let end = engine::final_states(&entry.timeline, &entry.layout.base_states());
        let actors = entry
            .layout
            .placements
            .iter()
            .filter_map(|p| {
                let state = end.iter().find(|s| s.element_id == p.element_id)?.clone();
                let variant = self.prototype(&p.entity)?.variant(&p.variant)?;
                let extent = prototype::variant_extent(variant, |id| self.asset_size(id));
                Some(Actor {
                    element_id: p.element_id.clone(),
                    entity: p.entity.clone(),
                    state,
                    slots: variant.slots.keys().copied().collect(),
                    width: extent.width(),
                    height: extent.height(),
                    top: extent.min.y,
                })
            })
            .collect();
        Ok(Cast {
            actors,
            clip_id: entry.timeline.next_clip_id(),
        })
    }

    /// Instantiates `template_id` for an action and appends the clip.
    pub fn add_clip(
        &mut self,
        scene: usize,
        action_id: usize,
        template_id: &str,
        params: &Value,
    ) -> Result<&AnimationClip, DocumentError> {
        let action = self.action(scene, action_id)?.clone();
        let category = action.category.ok_or(DocumentError::UnclassifiedAction(action_id))?;
        let template =
            design_space::template(template_id).map_err(|_| DocumentError::UnknownTemplate(template_id.into()))?;
        if template.category != category {
            return Err(DocumentError::TemplateMismatch {
                template: template_id.into(),
                template_category: template.category,
                action_category: category,
            });
        }
        let cast = self.cast(scene)?;
        let clip = instantiate(template, &action, &cast, params)?;
        let entry = self.scene_mut(scene)?;
        entry.timeline.push(clip);
        Ok(entry.timeline.clips.last().expect("just pushed"))
    }

    pub fn remove_clip(&mut self, scene: usize, clip_id: u64) -> Result<(), DocumentError> {
        let entry = self.scene_mut(scene)?;
        entry.timeline = entry.timeline.remove(clip_id)?;
        Ok(())
    }

    pub fn reorder_clips(&mut self, scene: usize, order: &[u64]) -> Result<(), DocumentError> {
        let entry = self.scene_mut(scene)?;
        entry.timeline = entry.timeline.reorder_ids(order)?;
        Ok(())
    }

    pub fn sample_scene(&self, scene: usize, t: f64) -> Result<Vec<ElementState>, DocumentError> {
        let entry = self.scene(scene)?;
        Ok(engine::sample(&entry.timeline, &entry.layout.base_states(), t))
    }

    /// Every dangling reference in the document, described.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let major = self.schema_version.split('.').next().unwrap_or("");
        if major != SCHEMA_VERSION.split('.').next().unwrap_or("") {
            problems.push(format!("schema version {} is not {}", self.schema_version, SCHEMA_VERSION));
        }
        let mut names = std::collections::BTreeSet::new();
        for p in self.all_prototypes() {
            if !names.insert(p.entity.name.as_str()) {
                problems.push(format!("entity `{}` has two prototypes", p.entity.name));
            }
            let mut variants = std::collections::BTreeSet::new();
            for v in &p.variants {
                if !variants.insert(v.name.as_str()) {
                    problems.push(format!("`{}` has two variants named `{}`", p.entity.name, v.name));
                }
                for (slot, part) in &v.slots {
                    if self.asset(&part.asset).is_none() {
                        problems.push(format!("`{}`/{}/{slot} uses missing asset `{}`", p.entity.name, v.name, part.asset));
                    }
                }
            }
        }
        for a in &self.assets {
            if a.kind == AssetKind::Uploaded && !self.upload_bytes.contains_key(&a.id) {
                problems.push(format!("uploaded asset `{}` has no data", a.id));
            }
        }
        for (i, entry) in self.scenes.iter().enumerate() {
            if entry.scene.span.id != i {
                problems.push(format!("scene {i} carries id {}", entry.scene.span.id));
            }
            let l = &entry.layout;
            for (what, id) in [("background", &l.background), ("music", &l.bgm.as_ref().map(|b| b.asset.clone()))] {
                if let Some(id) = id {
                    if self.asset(id).is_none() {
                        problems.push(format!("scene {i} {what} uses missing asset `{id}`"));
                    }
                }
            }
            let mut ids = std::collections::BTreeSet::new();
            for p in &l.placements {
                if !ids.insert(p.element_id.as_str()) {
                    problems.push(format!("scene {i} has two elements `{}`", p.element_id));
                }
                match self.prototype(&p.entity) {
                    None => problems.push(format!("scene {i} element `{}` has no prototype `{}`", p.element_id, p.entity)),
                    Some(proto) if proto.variant(&p.variant).is_none_or(|v| v.slots.is_empty()) => problems.push(format!(
                        "scene {i} element `{}` uses missing or empty variant `{}`",
                        p.element_id, p.variant
                    )),
                    _ => {}
                }
            }
            let mut clip_ids = std::collections::BTreeSet::new();
            for c in &entry.timeline.clips {
                if !clip_ids.insert(c.id) {
                    problems.push(format!("scene {i} has two clips with id {}", c.id));
                }
                if let Err(e) = c.validate() {
                    problems.push(format!("scene {i} clip {}: {e}", c.id));
                }
                if let Some(a) = c.source_action_id {
                    if entry.scene.action(a).is_none() {
                        problems.push(format!("scene {i} clip {} refers to missing action {a}", c.id));
                    }
                }
                for b in c.stages.iter().flat_map(|s| &s.bindings) {
                    let spawned = c.spawned.iter().any(|s| s.id == b.element);
                    if !spawned && !ids.contains(b.element.as_str()) {
                        problems.push(format!("scene {i} clip {} animates missing element `{}`", c.id, b.element));
                    }
                }
            }
        }
        problems
    }
}
