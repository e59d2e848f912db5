use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Easing {
    #[default]
    Linear,
    EaseInOutCubic,
}

impl Easing {
    /// Maps normalized time `u` (clamped to [0, 1]) to progress.
    pub fn apply(self, u: f64) -> f64 {
        let u = if u.is_nan() { 0.0 } else { u.clamp(0.0, 1.0) };
        match self {
            Easing::Linear => u,
            Easing::EaseInOutCubic => {
                if u < 0.5 {
                    4.0 * u * u * u
                } else {
                    let v = -2.0 * u + 2.0;
                    1.0 - v * v * v / 2.0
                }
            }
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Easing::Linear => "u",
            Easing::EaseInOutCubic => "u < 0.5 ? 4u^3 : 1 - (-2u + 2)^3 / 2",
        }
    }
}
