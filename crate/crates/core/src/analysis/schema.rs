//! Parsers for the three analyzer output documents.
//!
//! Responses are never trusted raw: each parser checks shape and types
//! before anything reaches the story model.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::narrative::{ActionCategory, SceneSpan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("unknown action category `{0}`")]
    UnknownCategory(String),
}

/// Returns the body of the first fenced code block, or the whole trimmed
/// text when no fence is present.
pub fn extract_payload(text: &str) -> &str {
    let Some(open) = text.find("```") else {
        return text.trim();
    };
    let after_fence = &text[open + 3..];
    // Skip an optional language tag on the opening fence line.
    let body_start = after_fence.find('\n').map(|i| i + 1).unwrap_or(after_fence.len());
    let body = &after_fence[body_start..];
    match body.find("```") {
        Some(close) => body[..close].trim(),
        None => body.trim(),
    }
}

fn parse_json(text: &str) -> Result<Value, SchemaError> {
    serde_json::from_str(extract_payload(text)).map_err(|e| SchemaError::Malformed(e.to_string()))
}

fn index_field(obj: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<usize, SchemaError> {
    let v = obj
        .get(key)
        .ok_or_else(|| SchemaError::MissingField(format!("{path}.{key}")))?;
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| SchemaError::Malformed(format!("{path}.{key} is not a non-negative integer")))
}

/// Parses the scene segmentation document: `[{"id", "begin_index", "end_index"}, ...]`.
pub fn parse_segmentation(text: &str) -> Result<Vec<SceneSpan>, SchemaError> {
    let value = parse_json(text)?;
    let items = value
        .as_array()
        .ok_or_else(|| SchemaError::Malformed("expected a JSON array of scenes".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let path = format!("[{i}]");
            let obj = item
                .as_object()
                .ok_or_else(|| SchemaError::Malformed(format!("{path} is not an object")))?;
            Ok(SceneSpan {
                id: index_field(obj, "id", &path)?,
                begin_index: index_field(obj, "begin_index", &path)?,
                end_index: index_field(obj, "end_index", &path)?,
            })
        })
        .collect()
}

/// One extracted subject-verb-object tuple, before classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSvo {
    pub subject: String,
    pub verb: String,
    pub object: String,
    pub receiver: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneInfo {
    pub characters: Vec<String>,
    pub objects: Vec<String>,
    pub svo: Vec<RawSvo>,
}

fn string_list(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Vec<String>, SchemaError> {
    let v = obj
        .get(key)
        .ok_or_else(|| SchemaError::MissingField(key.to_string()))?;
    let arr = v
        .as_array()
        .ok_or_else(|| SchemaError::Malformed(format!("`{key}` is not an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| {
            s.as_str()
                .map(|s| s.trim().to_string())
                .ok_or_else(|| SchemaError::Malformed(format!("`{key}[{i}]` is not a string")))
        })
        .collect()
}

fn string_field(
    obj: &serde_json::Map<String, Value>,
    key: &str,
    path: &str,
    required: bool,
) -> Result<String, SchemaError> {
    match obj.get(key) {
        None | Some(Value::Null) if required => Err(SchemaError::MissingField(format!("{path}.{key}"))),
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.trim().to_string()),
        Some(_) => Err(SchemaError::Malformed(format!("{path}.{key} is not a string"))),
    }
}

/// Parses the per-scene extraction document
/// (`{"character": [...], "object": [...], "svo": [...]}`).
pub fn parse_scene_info(text: &str) -> Result<SceneInfo, SchemaError> {
    let value = parse_json(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| SchemaError::Malformed("expected a JSON object".into()))?;
    let characters = string_list(obj, "character")?;
    let objects = string_list(obj, "object")?;
    let svo_value = obj
        .get("svo")
        .ok_or_else(|| SchemaError::MissingField("svo".into()))?;
    let entries = svo_value
        .as_array()
        .ok_or_else(|| SchemaError::Malformed("`svo` is not an array".into()))?;
    let svo = entries
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let path = format!("svo[{i}]");
            let e = entry
                .as_object()
                .ok_or_else(|| SchemaError::Malformed(format!("{path} is not an object")))?;
            let subject = string_field(e, "subject", &path, true)?;
            let verb = string_field(e, "verb", &path, true)?;
            if subject.is_empty() {
                return Err(SchemaError::MissingField(format!("{path}.subject")));
            }
            if verb.is_empty() {
                return Err(SchemaError::MissingField(format!("{path}.verb")));
            }
            Ok(RawSvo {
                subject,
                verb,
                object: string_field(e, "object", &path, false)?,
                receiver: string_field(e, "receiver", &path, false)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SceneInfo {
        characters,
        objects,
        svo,
    })
}

/// A verb and the category the analyzer assigned it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedAction {
    pub action: String,
    pub category: ActionCategory,
}

/// Parses the classification document: `[{"action", "category"}, ...]`.
pub fn parse_classification(text: &str) -> Result<Vec<ClassifiedAction>, SchemaError> {
    let value = parse_json(text)?;
    let items = value
        .as_array()
        .ok_or_else(|| SchemaError::Malformed("expected a JSON array of classifications".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let path = format!("[{i}]");
            let obj = item
                .as_object()
                .ok_or_else(|| SchemaError::Malformed(format!("{path} is not an object")))?;
            let action = string_field(obj, "action", &path, true)?;
            let token = string_field(obj, "category", &path, true)?;
            let category = token
                .to_ascii_lowercase()
                .parse::<ActionCategory>()
                .map_err(|_| SchemaError::UnknownCategory(token.clone()))?;
            Ok(ClassifiedAction { action, category })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_prefers_first_fence() {
        assert_eq!(extract_payload("  [1]  "), "[1]");
        assert_eq!(extract_payload("Here:\n```json\n[1, 2]\n```\nand ```[3]```"), "[1, 2]");
        assert_eq!(extract_payload("```\n{}\n"), "{}");
    }

    #[test]
    fn segmentation_reference_output() {
        let spans = parse_segmentation(
            "```\n[\n{\"id\": 0, \"begin_index\": 0, \"end_index\": 5},\n{\"id\": 1, \"begin_index\": 6, \"end_index\": 12}\n]\n```",
        )
        .unwrap();
        assert_eq!(spans, vec![SceneSpan::new(0, 0, 5), SceneSpan::new(1, 6, 12)]);
    }

    #[test]
    fn segmentation_rejects_bad_shapes() {
        assert!(matches!(parse_segmentation("{}"), Err(SchemaError::Malformed(_))));
        assert!(matches!(parse_segmentation("not json"), Err(SchemaError::Malformed(_))));
        assert_eq!(
            parse_segmentation(r#"[{"id":0,"begin_index":0}]"#),
            Err(SchemaError::MissingField("[0].end_index".into()))
        );
        assert!(matches!(
            parse_segmentation(r#"[{"id":0,"begin_index":-1,"end_index":2}]"#),
            Err(SchemaError::Malformed(_))
        ));
    }

    #[test]
    fn scene_info_defaults_receiver() {
        let info = parse_scene_info(
            r#"{"character":["grandmother","Little Red Riding Hood"],"object":["a cap made of red velvet"],
                "svo":[{"subject":"grandmother","verb":"gave","object":"a little cap made of red velvet","receiver":"Little Red Riding Hood"},
                       {"subject":"mother","verb":"said","object":"Come Little Red Riding Hood."}]}"#,
        )
        .unwrap();
        assert_eq!(info.svo[0].receiver, "Little Red Riding Hood");
        assert_eq!(info.svo[1].receiver, "");
    }

    #[test]
    fn scene_info_missing_fields() {
        assert_eq!(
            parse_scene_info(r#"{"character":[],"object":[]}"#),
            Err(SchemaError::MissingField("svo".into()))
        );
        assert_eq!(
            parse_scene_info(r#"{"object":[],"svo":[]}"#),
            Err(SchemaError::MissingField("character".into()))
        );
        assert_eq!(
            parse_scene_info(r#"{"character":[],"object":[],"svo":[{"subject":"","verb":"went"}]}"#),
            Err(SchemaError::MissingField("svo[0].subject".into()))
        );
        assert_eq!(
            parse_scene_info(r#"{"character":[],"object":[],"svo":[{"subject":"a"}]}"#),
            Err(SchemaError::MissingField("svo[0].verb".into()))
        );
    }

    #[test]
    fn classification_reference_output() {
        let c = parse_classification(
            r#"[{"action":"cried","category":"expel"},{"action":"went","category":"ptrans"},{"action":"said","category":"speak"}]"#,
        )
        .unwrap();
        let cats: Vec<_> = c.iter().map(|c| c.category).collect();
        assert_eq!(
            cats,
            vec![ActionCategory::Expel, ActionCategory::Ptrans, ActionCategory::Speak]
        );
        assert_eq!(
            parse_classification(r#"[{"action":"ran","category":"run"}]"#),
            Err(SchemaError::UnknownCategory("run".into()))
        );
    }
}
