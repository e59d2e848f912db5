use super::defaults;
use super::ops::{AtomicOp, Binding, Slot, Stage};

/// Step frequency in Hz for a walking speed in units/s.
pub fn step_frequency(speed: f64) -> f64 {
    (speed / defaults::GAIT_UNITS_PER_HZ).clamp(defaults::GAIT_MIN_HZ, defaults::GAIT_MAX_HZ)
}

/// Whole half-cycles closest to `duration * frequency`, at least one, so the
/// legs come back to rest exactly when the walk ends.
pub fn step_cycles(duration: f64, frequency: f64) -> f64 {
    ((duration * frequency * 2.0).round() / 2.0).max(0.5)
}

/// Adds antiphase leg swings to every element walking in `stage` whose
/// path asks for a gait and whose rig has legs. Other stages come back
/// unchanged.
pub fn apply_gait(stage: &Stage, element: &str, slots: &[Slot]) -> Stage {
    let mut out = stage.clone();
    let legs: Vec<Slot> = Slot::ALL
        .into_iter()
        .filter(|s| s.is_leg() && slots.contains(s))
        .collect();
    if legs.is_empty() {
        return out;
    }
    for b in &stage.bindings {
        let AtomicOp::PathMove { speed, gait: true, .. } = &b.op else {
            continue;
        };
        if b.element != element || b.slot.is_some() {
            continue;
        }
        let duration = b.op.duration();
        if duration <= 0.0 {
            continue;
        }
        let cycles = step_cycles(duration, step_frequency(*speed));
        for &leg in &legs {
            if out.bindings.iter().any(|o| o.element == element && o.slot == Some(leg)) {
                continue;
            }
            out.bindings.push(Binding::slot(
                element,
                leg,
                AtomicOp::Oscillate {
                    amplitude: defaults::GAIT_AMPLITUDE,
                    cycles,
                    duration,
                    antiphase: leg == Slot::RightLeg,
                },
            ));
        }
    }
    out
}
