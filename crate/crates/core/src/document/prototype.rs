use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{Point, Slot};
use crate::narrative::{EntityKind, EntityRef};

use super::assets::AssetRef;

fn one() -> f64 {
    1.0
}

/// One body part: an asset, its pivot in asset units, and where that pivot
/// sits relative to the element anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPart {
    pub asset: String,
    pub anchor: Point,
    pub offset: Point,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub slots: BTreeMap<Slot, SlotPart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub entity: EntityRef,
    pub variants: Vec<Variant>,
}

pub const DEFAULT_VARIANT: &str = "default";

/// Draw order of slots, back to front.
pub const PAINT_ORDER: [Slot; 6] = [
    Slot::LeftLeg,
    Slot::RightLeg,
    Slot::LeftArm,
    Slot::Body,
    Slot::RightArm,
    Slot::Head,
];

/// Where a slot's pivot sits on the default rig.
pub fn default_offset(slot: Slot) -> Point {
    match slot {
        Slot::Head => Point::new(0.0, -48.0),
        Slot::Body => Point::new(0.0, 0.0),
        Slot::LeftArm => Point::new(-30.0, -42.0),
        Slot::RightArm => Point::new(30.0, -42.0),
        Slot::LeftLeg => Point::new(-16.0, 46.0),
        Slot::RightLeg => Point::new(16.0, 46.0),
    }
}

/// The pivot inside an asset used for `slot`: heads hang from the chin,
/// limbs from their top, bodies and items from the centre.
pub fn default_anchor(slot: Slot, asset: &AssetRef) -> Point {
    match slot {
        Slot::Head => Point::new(asset.width / 2.0, asset.height - 2.0),
        Slot::LeftArm | Slot::RightArm | Slot::LeftLeg | Slot::RightLeg => Point::new(asset.width / 2.0, 4.0),
        Slot::Body => Point::new(asset.width / 2.0, asset.height / 2.0),
    }
}

fn pick(name: &str, table: &[(&[&str], &'static str)], fallback: &'static str) -> &'static str {
    let lower = name.to_lowercase();
    table
        .iter()
        .find(|(words, _)| words.iter().any(|w| lower.contains(w)))
        .map(|(_, id)| *id)
        .unwrap_or(fallback)
}

fn head_for(name: &str) -> &'static str {
    pick(
        name,
        &[
            (&["princess", "queen", "king", "prince"], "head.crown"),
            (&["old", "grand", "fairy", "witch"], "head.old"),
            (&["wolf"], "head.wolf"),
        ],
        "head.smile",
    )
}

fn body_for(name: &str) -> &'static str {
    pick(
        name,
        &[
            (&["princess", "queen", "girl", "mother", "grand", "woman", "hood", "lady"], "body.dress"),
            (&["king", "fairy", "witch", "wizard", "old"], "body.robe"),
        ],
        "body.tunic",
    )
}

fn item_for(name: &str) -> &'static str {
    pick(
        name,
        &[
            (&["tower", "castle"], "item.tower"),
            (&["cap", "hat"], "item.cap"),
            (&["spindle", "needle"], "item.spindle"),
            (&["apple", "fruit"], "item.apple"),
            (&["basket", "cake", "wine", "bottle"], "item.basket"),
            (&["rose", "flower", "hedge", "thorn"], "item.rose"),
        ],
        "item.box",
    )
}

fn part(slot: Slot, asset_id: &str) -> SlotPart {
    let asset = super::assets::builtin(asset_id).expect("stub assets are built in");
    SlotPart {
        asset: asset.id.clone(),
        anchor: default_anchor(slot, &asset),
        offset: default_offset(slot),
        scale: 1.0,
    }
}

impl Prototype {
    /// A default-variant prototype made of built-in parts: a full rig for
    /// characters, a single body slot for items.
    pub fn stub(entity: EntityRef) -> Self {
        let mut slots = BTreeMap::new();
        match entity.kind {
            EntityKind::Character => {
                slots.insert(Slot::Head, part(Slot::Head, head_for(&entity.name)));
                slots.insert(Slot::Body, part(Slot::Body, body_for(&entity.name)));
                for s in [Slot::LeftArm, Slot::RightArm] {
                    slots.insert(s, part(s, "limb.arm"));
                }
                for s in [Slot::LeftLeg, Slot::RightLeg] {
                    slots.insert(s, part(s, "limb.leg"));
                }
            }
            EntityKind::Item => {
                slots.insert(Slot::Body, part(Slot::Body, item_for(&entity.name)));
            }
        }
        Prototype {
            entity,
            variants: vec![Variant {
                name: DEFAULT_VARIANT.into(),
                slots,
            }],
        }
    }

    pub fn variant(&self, name: &str) -> Option<&Variant> {
        self.variants.iter().find(|v| v.name == name)
    }

    pub fn variant_mut(&mut self, name: &str) -> Option<&mut Variant> {
        self.variants.iter_mut().find(|v| v.name == name)
    }
}

/// Extent of a variant around its anchor, in canvas units at scale 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub min: Point,
    pub max: Point,
}

impl Extent {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Bounding box of every part of `variant`; `size_of` returns an asset's size.
pub fn variant_extent(variant: &Variant, size_of: impl Fn(&str) -> Option<(f64, f64)>) -> Extent {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in variant.slots.values() {
        let (w, h) = size_of(&p.asset).unwrap_or((0.0, 0.0));
        let x0 = p.offset.x - p.anchor.x * p.scale;
        let y0 = p.offset.y - p.anchor.y * p.scale;
        min.x = min.x.min(x0);
        min.y = min.y.min(y0);
        max.x = max.x.max(x0 + w * p.scale);
        max.y = max.y.max(y0 + h * p.scale);
    }
    if !min.x.is_finite() {
        return Extent {
            min: Point::default(),
            max: Point::default(),
        };
    }
    Extent { min, max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::assets::builtin;

    fn size(id: &str) -> Option<(f64, f64)> {
        builtin(id).map(|a| (a.width, a.height))
    }

    #[test]
    fn stubs() {
        let p = Prototype::stub(EntityRef::character("princess"));
        let v = p.variant(DEFAULT_VARIANT).unwrap();
        assert_eq!(v.slots.len(), 6);
        assert_eq!(v.slots[&Slot::Head].asset, "head.crown");
        let tower = Prototype::stub(EntityRef::item("old tower"));
        assert_eq!(tower.variants[0].slots.keys().collect::<Vec<_>>(), vec![&Slot::Body]);
        assert_eq!(tower.variants[0].slots[&Slot::Body].asset, "item.tower");
    }

    #[test]
    fn extent_of_default_rig() {
        let p = Prototype::stub(EntityRef::character("old woman"));
        let e = variant_extent(&p.variants[0], size);
        // Head top: -48 - 78; leg bottom: 46 - 4 + 70.
        assert_eq!(e.min.y, -126.0);
        assert_eq!(e.max.y, 112.0);
        let box_ = Prototype::stub(EntityRef::item("thing"));
        let e = variant_extent(&box_.variants[0], size);
        assert_eq!((e.width(), e.height(), e.min.y), (80.0, 80.0, -40.0));
    }
}
