use serde::{Deserialize, Serialize};

use super::ops::AnimationClip;
use super::EngineError;

/// Clips of one scene, played strictly one after another.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub clips: Vec<AnimationClip>,
}

impl Timeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn duration(&self) -> f64 {
        self.clips.iter().map(AnimationClip::duration).sum()
    }

    pub fn next_clip_id(&self) -> u64 {
        self.clips.iter().map(|c| c.id + 1).max().unwrap_or(1)
    }

    pub fn clip(&self, id: u64) -> Option<&AnimationClip> {
        self.clips.iter().find(|c| c.id == id)
    }

    /// Start time of each clip.
    pub fn offsets(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.clips
            .iter()
            .map(|c| {
                let start = t;
                t += c.duration();
                start
            })
            .collect()
    }

    pub fn push(&mut self, clip: AnimationClip) {
        self.clips.push(clip);
    }

    /// New order where position `i` holds the clip previously at `permutation[i]`.
    pub fn reorder(&self, permutation: &[usize]) -> Result<Timeline, EngineError> {
        let n = self.clips.len();
        let mut seen = vec![false; n];
        if permutation.len() != n {
            return Err(EngineError::BadPermutation(format!(
                "expected {n} indices, got {}",
                permutation.len()
            )));
        }
        for &p in permutation {
            if p >= n || seen[p] {
                return Err(EngineError::BadPermutation(format!("index {p} is out of range or repeated")));
            }
            seen[p] = true;
        }
        Ok(Timeline {
            clips: permutation.iter().map(|&p| self.clips[p].clone()).collect(),
        })
    }

    /// Reorders by clip ids rather than positions.
    pub fn reorder_ids(&self, ids: &[u64]) -> Result<Timeline, EngineError> {
        let perm = ids
            .iter()
            .map(|id| {
                self.clips
                    .iter()
                    .position(|c| c.id == *id)
                    .ok_or(EngineError::UnknownClip(*id))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.reorder(&perm)
    }

    pub fn remove(&self, clip_id: u64) -> Result<Timeline, EngineError> {
        let idx = self
            .clips
            .iter()
            .position(|c| c.id == clip_id)
            .ok_or(EngineError::UnknownClip(clip_id))?;
        let mut clips = self.clips.clone();
        clips.remove(idx);
        Ok(Timeline { clips })
    }
}
