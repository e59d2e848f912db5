//! Declarative project edits. A script is a list of the same mutations the
//! HTTP service accepts, applied in order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::Analyzer;
use crate::document::{BgmRef, DocumentError, ProjectDocument, SlotAssignment, DEFAULT_VARIANT};
use crate::engine::{AnimationClip, Slot, Transform};
use crate::narrative::{ActionCategory, EntityRef, SceneSpan};

pub const SCRIPT_VERSION: u32 = 1;

fn default_variant() -> String {
    DEFAULT_VARIANT.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    Resegment {
        spans: Vec<SceneSpan>,
    },
    Reclassify {
        scene: usize,
        action: usize,
        category: ActionCategory,
    },
    AddPrototype {
        entity: EntityRef,
    },
    AddVariant {
        entity: String,
        variant: String,
        #[serde(default)]
        copy_from: Option<String>,
    },
    /// `part: null` clears the slot.
    SetSlot {
        entity: String,
        #[serde(default = "default_variant")]
        variant: String,
        slot: Slot,
        part: Option<SlotAssignment>,
    },
    Place {
        scene: usize,
        entity: String,
        #[serde(default = "default_variant")]
        variant: String,
        #[serde(default)]
        transform: Transform,
        #[serde(default)]
        z: Option<i64>,
    },
    UpdatePlacement {
        scene: usize,
        element_id: String,
        #[serde(default)]
        transform: Option<Transform>,
        #[serde(default)]
        z: Option<i64>,
        #[serde(default)]
        variant: Option<String>,
    },
    RemovePlacement {
        scene: usize,
        element_id: String,
    },
    SaveLayout {
        scene: usize,
    },
    SetBackground {
        scene: usize,
        asset: Option<String>,
    },
    SetBgm {
        scene: usize,
        bgm: Option<BgmRef>,
    },
    AddClip {
        scene: usize,
        action: usize,
        template_id: String,
        #[serde(default)]
        params: Value,
    },
    RemoveClip {
        scene: usize,
        clip_id: u64,
    },
    ReorderClips {
        scene: usize,
        order: Vec<u64>,
    },
}

impl Mutation {
    pub fn name(&self) -> &'static str {
        match self {
            Mutation::Resegment { .. } => "resegment",
            Mutation::Reclassify { .. } => "reclassify",
            Mutation::AddPrototype { .. } => "add_prototype",
            Mutation::AddVariant { .. } => "add_variant",
            Mutation::SetSlot { .. } => "set_slot",
            Mutation::Place { .. } => "place",
            Mutation::UpdatePlacement { .. } => "update_placement",
            Mutation::RemovePlacement { .. } => "remove_placement",
            Mutation::SaveLayout { .. } => "save_layout",
            Mutation::SetBackground { .. } => "set_background",
            Mutation::SetBgm { .. } => "set_bgm",
            Mutation::AddClip { .. } => "add_clip",
            Mutation::RemoveClip { .. } => "remove_clip",
            Mutation::ReorderClips { .. } => "reorder_clips",
        }
    }

    pub fn template_id(&self) -> Option<&str> {
        match self {
            Mutation::AddClip { template_id, .. } => Some(template_id),
            _ => None,
        }
    }

    /// Whether applying this may call the analyzer.
    pub fn needs_analyzer(&self) -> bool {
        matches!(self, Mutation::Resegment { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Done {},
    Placed { element_id: String },
    Clip(AnimationClip),
}

pub fn apply(doc: &mut ProjectDocument, m: &Mutation, analyzer: &dyn Analyzer) -> Result<Outcome, DocumentError> {
    match m {
        Mutation::Resegment { spans } => doc.resegment(spans, analyzer)?,
        Mutation::Reclassify { scene, action, category } => doc.reclassify(*scene, *action, *category)?,
        Mutation::AddPrototype { entity } => {
            doc.add_prototype(entity.clone())?;
        }
        Mutation::AddVariant {
            entity,
            variant,
            copy_from,
        } => doc.add_variant(entity, variant, copy_from.as_deref())?,
        Mutation::SetSlot {
            entity,
            variant,
            slot,
            part,
        } => doc.set_slot(entity, variant, *slot, part.clone())?,
        Mutation::Place {
            scene,
            entity,
            variant,
            transform,
            z,
        } => {
            let element_id = doc.place_element(*scene, entity, variant, *transform, *z)?;
            return Ok(Outcome::Placed { element_id });
        }
        Mutation::UpdatePlacement {
            scene,
            element_id,
            transform,
            z,
            variant,
        } => doc.update_placement(*scene, element_id, *transform, *z, variant.as_deref())?,
        Mutation::RemovePlacement { scene, element_id } => doc.remove_placement(*scene, element_id)?,
        Mutation::SaveLayout { scene } => doc.save_layout(*scene)?,
        Mutation::SetBackground { scene, asset } => doc.set_background(*scene, asset.as_deref())?,
        Mutation::SetBgm { scene, bgm } => doc.set_bgm(*scene, bgm.clone())?,
        Mutation::AddClip {
            scene,
            action,
            template_id,
            params,
        } => return Ok(Outcome::Clip(doc.add_clip(*scene, *action, template_id, params)?.clone())),
        Mutation::RemoveClip { scene, clip_id } => doc.remove_clip(*scene, *clip_id)?,
        Mutation::ReorderClips { scene, order } => doc.reorder_clips(*scene, order)?,
    }
    Ok(Outcome::Done {})
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub version: u32,
    #[serde(default)]
    pub mutations: Vec<Mutation>,
}

#[derive(Debug, thiserror::Error)]
pub enum AuthoringError {
    #[error("cannot read script: {0}")]
    Io(String),
    #[error("malformed script: {0}")]
    Parse(String),
    #[error("script version {0} is not supported")]
    Version(u32),
    #[error("mutation {index} ({op}{}) failed: {source}", template.as_deref().map(|t| format!(" {t}")).unwrap_or_default())]
    Step {
        index: usize,
        op: &'static str,
        template: Option<String>,
        source: DocumentError,
    },
}

impl Script {
    pub fn from_json(text: &str) -> Result<Self, AuthoringError> {
        let s: Script = serde_json::from_str(text).map_err(|e| AuthoringError::Parse(e.to_string()))?;
        if s.version != SCRIPT_VERSION {
            return Err(AuthoringError::Version(s.version));
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AuthoringError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| AuthoringError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    /// Applies every mutation in order; stops at the first failure, leaving
    /// `doc` as it was before the script.
    pub fn apply(&self, doc: &mut ProjectDocument, analyzer: &dyn Analyzer) -> Result<Vec<Outcome>, AuthoringError> {
        let mut work = doc.clone();
        let mut out = Vec::with_capacity(self.mutations.len());
        for (index, m) in self.mutations.iter().enumerate() {
            let o = apply(&mut work, m, analyzer).map_err(|source| AuthoringError::Step {
                index,
                op: m.name(),
                template: m.template_id().map(String::from),
                source,
            })?;
            out.push(o);
        }
        *doc = work;
        Ok(out)
    }
}
