//! Scene-span partition checks and the conservative repair pass.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::narrative::SceneSpan;

/// Which partition rule a violation broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanRule {
    NonEmpty,
    IdSequence,
    Ordered,
    FirstBegin,
    Contiguous,
    Disjoint,
    InRange,
    LastEnd,
}

impl SpanRule {
    pub const ALL: [SpanRule; 8] = [
        SpanRule::NonEmpty,
        SpanRule::IdSequence,
        SpanRule::Ordered,
        SpanRule::FirstBegin,
        SpanRule::Contiguous,
        SpanRule::Disjoint,
        SpanRule::InRange,
        SpanRule::LastEnd,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SpanViolation {
    /// No spans at all.
    Empty,
    /// The span at `position` carries `id` instead of `expected`.
    IdOutOfSequence {
        position: usize,
        id: usize,
        expected: usize,
    },
    Inverted {
        id: usize,
        begin: usize,
        end: usize,
    },
    FirstBeginNotZero {
        id: usize,
        begin: usize,
    },
    Gap {
        id: usize,
        expected_begin: usize,
        begin: usize,
    },
    Overlap {
        id: usize,
        index: usize,
    },
    EndOutOfRange {
        id: usize,
        end: usize,
        last: usize,
    },
    LastEndMismatch {
        id: usize,
        end: usize,
        expected: usize,
    },
}

impl SpanViolation {
    pub fn rule(&self) -> SpanRule {
        match self {
            SpanViolation::Empty => SpanRule::NonEmpty,
            SpanViolation::IdOutOfSequence { .. } => SpanRule::IdSequence,
            SpanViolation::Inverted { .. } => SpanRule::Ordered,
            SpanViolation::FirstBeginNotZero { .. } => SpanRule::FirstBegin,
            SpanViolation::Gap { .. } => SpanRule::Contiguous,
            SpanViolation::Overlap { .. } => SpanRule::Disjoint,
            SpanViolation::EndOutOfRange { .. } => SpanRule::InRange,
            SpanViolation::LastEndMismatch { .. } => SpanRule::LastEnd,
        }
    }
}

impl fmt::Display for SpanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpanViolation::Empty => write!(f, "no scenes"),
            SpanViolation::IdOutOfSequence {
                position,
                id,
                expected,
            } => write!(f, "scene at position {position} has id {id}, expected {expected}"),
            SpanViolation::Inverted { id, begin, end } => {
                write!(f, "scene {id} begins at {begin} after its end {end}")
            }
            SpanViolation::FirstBeginNotZero { id, begin } => {
                write!(f, "first scene {id} begins at {begin}, expected 0")
            }
            SpanViolation::Gap {
                id,
                expected_begin,
                begin,
            } => write!(
                f,
                "gap before scene {id}: begins at {begin}, expected {expected_begin}"
            ),
            SpanViolation::Overlap { id, index } => {
                write!(f, "scene {id} overlaps its predecessor at index {index}")
            }
            SpanViolation::EndOutOfRange { id, end, last } => {
                write!(f, "scene {id} ends at {end}, beyond last sentence {last}")
            }
            SpanViolation::LastEndMismatch { id, end, expected } => {
                write!(f, "last scene {id} ends at {end}, expected {expected}")
            }
        }
    }
}

/// Checks that `spans` partition `0..n_sentences` contiguously and in order.
///
/// Returns every violation in scan order, so the first entry is the first
/// broken rule.
pub fn validate_spans(spans: &[SceneSpan], n_sentences: usize) -> Result<(), Vec<SpanViolation>> {
    let mut violations = Vec::new();
    let Some(last_span) = spans.last() else {
        return Err(vec![SpanViolation::Empty]);
    };
    let last_index = n_sentences.saturating_sub(1);

    for (position, span) in spans.iter().enumerate() {
        if span.id != position {
            violations.push(SpanViolation::IdOutOfSequence {
                position,
                id: span.id,
                expected: position,
            });
        }
        if span.begin_index > span.end_index {
            violations.push(SpanViolation::Inverted {
                id: span.id,
                begin: span.begin_index,
                end: span.end_index,
            });
        }
        if position == 0 {
            if span.begin_index != 0 {
                violations.push(SpanViolation::FirstBeginNotZero {
                    id: span.id,
                    begin: span.begin_index,
                });
            }
        } else {
            let expected_begin = spans[position - 1].end_index + 1;
            if span.begin_index > expected_begin {
                violations.push(SpanViolation::Gap {
                    id: span.id,
                    expected_begin,
                    begin: span.begin_index,
                });
            } else if span.begin_index < expected_begin {
                violations.push(SpanViolation::Overlap {
                    id: span.id,
                    index: span.begin_index,
                });
            }
        }
        if span.end_index > last_index {
            violations.push(SpanViolation::EndOutOfRange {
                id: span.id,
                end: span.end_index,
                last: last_index,
            });
        }
    }

    if last_span.end_index != last_index {
        violations.push(SpanViolation::LastEndMismatch {
            id: last_span.id,
            end: last_span.end_index,
            expected: last_index,
        });
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// One edit performed by [`repair_spans_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum RepairStep {
    Clamped { id: usize },
    StretchedLast { from: usize },
    ClosedGap { id: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairFailure {
    /// Input not sorted by `begin_index`.
    NotSorted,
    Unrepairable(Vec<SpanViolation>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    pub spans: Vec<SceneSpan>,
    pub steps: Vec<RepairStep>,
}

/// Clamps indices into range, stretches the last span to the final
/// sentence and closes single-index gaps by extending the earlier span.
/// Anything still invalid afterwards (overlaps, wider gaps, bad ids) is
/// unrepairable.
pub fn repair_spans(spans: &[SceneSpan], n_sentences: usize) -> Result<Vec<SceneSpan>, RepairFailure> {
    repair_spans_report(spans, n_sentences).map(|r| r.spans)
}

pub fn repair_spans_report(
    spans: &[SceneSpan],
    n_sentences: usize,
) -> Result<RepairReport, RepairFailure> {
    if spans.is_empty() || n_sentences == 0 {
        return Err(RepairFailure::Unrepairable(vec![SpanViolation::Empty]));
    }
    if spans.windows(2).any(|w| w[0].begin_index > w[1].begin_index) {
        return Err(RepairFailure::NotSorted);
    }
    let last_index = n_sentences - 1;
    let mut steps = Vec::new();
    let mut repaired: Vec<SceneSpan> = spans.to_vec();

    for span in repaired.iter_mut() {
        let begin = span.begin_index.min(last_index);
        let end = span.end_index.min(last_index);
        if (begin, end) != (span.begin_index, span.end_index) {
            span.begin_index = begin;
            span.end_index = end;
            steps.push(RepairStep::Clamped { id: span.id });
        }
    }

    if let Some(last) = repaired.last_mut() {
        if last.end_index < last_index {
            steps.push(RepairStep::StretchedLast {
                from: last.end_index,
            });
            last.end_index = last_index;
        }
    }

    for i in 1..repaired.len() {
        if repaired[i].begin_index == repaired[i - 1].end_index + 2 {
            repaired[i - 1].end_index += 1;
            steps.push(RepairStep::ClosedGap {
                id: repaired[i - 1].id,
            });
        }
    }

    match validate_spans(&repaired, n_sentences) {
        Ok(()) => Ok(RepairReport {
            spans: repaired,
            steps,
        }),
        Err(v) => Err(RepairFailure::Unrepairable(v)),
    }
}
