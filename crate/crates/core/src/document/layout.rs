use serde::{Deserialize, Serialize};

use crate::engine::{ElementState, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub element_id: String,
    pub entity: String,
    pub variant: String,
    pub transform: Transform,
    pub z: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgmRef {
    pub asset: String,
    /// Seconds into the scene at which the track starts.
    #[serde(default)]
    pub offset: f64,
}

/// Background, music and the initial placement of every element. `saved`
/// is set by an explicit save and cleared by any later edit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneLayout {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bgm: Option<BgmRef>,
    #[serde(default)]
    pub placements: Vec<Placement>,
    #[serde(default)]
    pub saved: bool,
}

impl SceneLayout {
    pub fn placement(&self, element_id: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.element_id == element_id)
    }

    /// Initial element states in insertion order.
    pub fn base_states(&self) -> Vec<ElementState> {
        self.placements
            .iter()
            .map(|p| ElementState::new(p.element_id.clone(), p.transform, p.z))
            .collect()
    }

    pub fn next_z(&self) -> i64 {
        self.placements.iter().map(|p| p.z + 1).max().unwrap_or(0)
    }
}

/// `name` reduced to lower-case ASCII words joined by dashes.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    let out = out.trim_end_matches('-').to_string();
    if out.is_empty() {
        "element".into()
    } else {
        out
    }
}
