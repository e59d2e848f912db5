//! Story IR: sentences, scene spans, entities and subject-verb-object actions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NarrativeError {
    #[error("story text is empty")]
    EmptyStory,
    #[error("span {begin}..={end} is out of range for {len} sentences")]
    SpanOutOfRange { begin: usize, end: usize, len: usize },
    #[error("unknown action category `{0}`")]
    UnknownCategory(String),
}

/// One sentence of the story, with its 0-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

/// A contiguous, inclusive range of sentence indices forming one scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SceneSpan {
    pub id: usize,
    pub begin_index: usize,
    pub end_index: usize,
}

impl SceneSpan {
    pub fn new(id: usize, begin_index: usize, end_index: usize) -> Self {
        SceneSpan {
            id,
            begin_index,
            end_index,
        }
    }

    pub fn len(&self) -> usize {
        self.end_index.saturating_sub(self.begin_index) + 1
    }

    pub fn is_empty(&self) -> bool {
        self.end_index < self.begin_index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Character,
    Item,
}

/// A named story entity. Names are compared exactly, case included.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityRef {
    pub name: String,
    pub kind: EntityKind,
}

impl EntityRef {
    pub fn character(name: impl Into<String>) -> Self {
        EntityRef {
            name: name.into(),
            kind: EntityKind::Character,
        }
    }

    pub fn item(name: impl Into<String>) -> Self {
        EntityRef {
            name: name.into(),
            kind: EntityKind::Item,
        }
    }
}

/// The eight fundamental action categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionCategory {
    Atrans,
    Ptrans,
    Propel,
    Move,
    Ingest,
    Expel,
    Speak,
    Mental,
}

impl ActionCategory {
    pub const ALL: [ActionCategory; 8] = [
        ActionCategory::Atrans,
        ActionCategory::Ptrans,
        ActionCategory::Propel,
        ActionCategory::Move,
        ActionCategory::Ingest,
        ActionCategory::Expel,
        ActionCategory::Speak,
        ActionCategory::Mental,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ActionCategory::Atrans => "atrans",
            ActionCategory::Ptrans => "ptrans",
            ActionCategory::Propel => "propel",
            ActionCategory::Move => "move",
            ActionCategory::Ingest => "ingest",
            ActionCategory::Expel => "expel",
            ActionCategory::Speak => "speak",
            ActionCategory::Mental => "mental",
        }
    }

    /// Row position in the frequency table.
    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ActionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ActionCategory {
    type Err = NarrativeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionCategory::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| NarrativeError::UnknownCategory(s.to_string()))
    }
}

/// A subject-verb-object(-receiver) action extracted from a scene.
///
/// For `speak` and `mental` actions `object` carries the utterance or thought
/// verbatim; otherwise it names an entity or a free-text object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvoAction {
    pub id: usize,
    pub subject: String,
    pub verb: String,
    pub object: String,
    #[serde(default)]
    pub receiver: String,
    /// `None` until classified.
    #[serde(default)]
    pub category: Option<ActionCategory>,
}

impl SvoAction {
    pub fn outline_label(&self) -> String {
        let mut label = format!("{} {}", self.subject, self.verb.to_uppercase());
        if !self.object.is_empty() {
            label.push(' ');
            label.push_str(&self.object);
        }
        if !self.receiver.is_empty() {
            label.push_str(" → ");
            label.push_str(&self.receiver);
        }
        label
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scene {
    pub span: SceneSpan,
    pub characters: Vec<EntityRef>,
    pub items: Vec<EntityRef>,
    pub actions: Vec<SvoAction>,
}

impl Scene {
    pub fn action(&self, id: usize) -> Option<&SvoAction> {
        self.actions.iter().find(|a| a.id == id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityRef> {
        self.characters.iter().chain(self.items.iter())
    }

    pub fn has_entity(&self, name: &str) -> bool {
        self.entities().any(|e| e.name == name)
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing_quote(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | '»')
}

/// Splits story text into sentences.
///
/// A sentence ends at `.`, `!` or `?` followed by whitespace or end of text.
/// Closing quotes directly after the terminator stay with the sentence.
/// Whitespace runs inside a sentence collapse to single spaces.
pub fn tokenize_sentences(story_text: &str) -> Result<Vec<Sentence>, NarrativeError> {
    if story_text.trim().is_empty() {
        return Err(NarrativeError::EmptyStory);
    }
    let chars: Vec<char> = story_text.chars().collect();
    let mut pieces: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        current.push(c);
        i += 1;
        if is_terminator(c) {
            let mut j = i;
            while j < chars.len() && is_closing_quote(chars[j]) {
                j += 1;
            }
            if j == chars.len() || chars[j].is_whitespace() {
                current.extend(&chars[i..j]);
                i = j;
                pieces.push(std::mem::take(&mut current));
            }
        }
    }
    pieces.push(current);

    let sentences = pieces
        .iter()
        .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(index, text)| Sentence { index, text })
        .collect();
    Ok(sentences)
}

/// Joins the sentences covered by `span` with single spaces.
pub fn rebuild_scene_text(story: &[Sentence], span: &SceneSpan) -> Result<String, NarrativeError> {
    if span.begin_index > span.end_index || span.end_index >= story.len() {
        return Err(NarrativeError::SpanOutOfRange {
            begin: span.begin_index,
            end: span.end_index,
            len: story.len(),
        });
    }
    Ok(story[span.begin_index..=span.end_index]
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &[Sentence]) -> Vec<&str> {
        s.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn splits_terminal_punctuation() {
        let s = tokenize_sentences("A. B!").unwrap();
        assert_eq!(
            s,
            vec![
                Sentence {
                    index: 0,
                    text: "A.".into()
                },
                Sentence {
                    index: 1,
                    text: "B!".into()
                }
            ]
        );
        assert_eq!(texts(&tokenize_sentences("Hi.").unwrap()), vec!["Hi."]);
    }

    #[test]
    fn whitespace_only_is_empty_story() {
        assert_eq!(tokenize_sentences("  \n\t "), Err(NarrativeError::EmptyStory));
        assert_eq!(tokenize_sentences(""), Err(NarrativeError::EmptyStory));
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let s = tokenize_sentences("\"What is that?\" asked she. Fine.").unwrap();
        assert_eq!(texts(&s), vec!["\"What is that?\"", "asked she.", "Fine."]);
    }

    #[test]
    fn inner_punctuation_does_not_split() {
        let s = tokenize_sentences("Mr.Smith waited... then left. 3.5 apples?").unwrap();
        assert_eq!(texts(&s), vec!["Mr.Smith waited...", "then left.", "3.5 apples?"]);
    }

    #[test]
    fn trailing_fragment_without_terminator_is_kept() {
        let s = tokenize_sentences("One. two three").unwrap();
        assert_eq!(texts(&s), vec!["One.", "two three"]);
    }

    #[test]
    fn collapses_internal_whitespace() {
        let s = tokenize_sentences("  The  king\n rode.\n\nShe  slept.  ").unwrap();
        assert_eq!(texts(&s), vec!["The king rode.", "She slept."]);
    }

    #[test]
    fn rebuild_examples() {
        let one = tokenize_sentences("Hi.").unwrap();
        assert_eq!(rebuild_scene_text(&one, &SceneSpan::new(0, 0, 0)).unwrap(), "Hi.");

        let six = tokenize_sentences("a. b. c. d. e. f.").unwrap();
        assert_eq!(
            rebuild_scene_text(&six, &SceneSpan::new(0, 0, 5)).unwrap(),
            "a. b. c. d. e. f."
        );

        let ten = tokenize_sentences("s0. s1. s2. s3. s4. s5. s6. s7. s8. s9.").unwrap();
        assert_eq!(rebuild_scene_text(&ten, &SceneSpan::new(1, 2, 3)).unwrap(), "s2. s3.");
    }

    #[test]
    fn rebuild_rejects_out_of_range() {
        let one = tokenize_sentences("Hi.").unwrap();
        assert!(matches!(
            rebuild_scene_text(&one, &SceneSpan::new(0, 0, 1)),
            Err(NarrativeError::SpanOutOfRange { .. })
        ));
        assert!(matches!(
            rebuild_scene_text(&one, &SceneSpan::new(0, 1, 0)),
            Err(NarrativeError::SpanOutOfRange { .. })
        ));
    }

    #[test]
    fn category_tokens_round_trip() {
        for c in ActionCategory::ALL {
            assert_eq!(c.token().parse::<ActionCategory>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.token()));
            assert_eq!(serde_json::from_str::<ActionCategory>(&json).unwrap(), c);
        }
        assert_eq!(
            "run".parse::<ActionCategory>(),
            Err(NarrativeError::UnknownCategory("run".into()))
        );
    }

    #[test]
    fn outline_label_uppercases_verb() {
        let a = SvoAction {
            id: 0,
            subject: "princess".into(),
            verb: "went".into(),
            object: "old tower".into(),
            receiver: String::new(),
            category: Some(ActionCategory::Ptrans),
        };
        assert_eq!(a.outline_label(), "princess WENT old tower");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tokenization_preserves_words(words in prop::collection::vec("[a-z]{1,6}[.!?]?", 1..40)) {
                let text = words.join(" ");
                let sentences = tokenize_sentences(&text).unwrap();
                let rejoined: Vec<String> = sentences
                    .iter()
                    .flat_map(|s| s.text.split(' ').map(str::to_string).collect::<Vec<_>>())
                    .collect();
                let expected: Vec<String> = text.split_whitespace().map(str::to_string).collect();
                prop_assert_eq!(rejoined, expected);
                for (i, s) in sentences.iter().enumerate() {
                    prop_assert_eq!(s.index, i);
                    prop_assert!(!s.text.is_empty());
                }
            }

            #[test]
            fn full_cover_rebuild_matches_word_sequence(words in prop::collection::vec("[a-z]{1,6}[.!?]?", 1..40)) {
                let text = words.join("  ");
                let sentences = tokenize_sentences(&text).unwrap();
                let span = SceneSpan::new(0, 0, sentences.len() - 1);
                let rebuilt = rebuild_scene_text(&sentences, &span).unwrap();
                prop_assert_eq!(rebuilt, text.split_whitespace().collect::<Vec<_>>().join(" "));
            }
        }
    }
}
