use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::canonical;
use super::{AssetKind, DocumentError, ProjectDocument, SCHEMA_VERSION};

pub const PROJECT_FILE: &str = "project.json";

fn major(version: &str) -> &str {
    version.split('.').next().unwrap_or(version)
}

/// Canonical serialization: equal documents give identical bytes.
pub fn to_json(doc: &ProjectDocument) -> String {
    canonical::to_canonical_string(doc).expect("document serializes")
}

/// Parses a document, checking its schema major version first.
pub fn from_json(text: &str) -> Result<ProjectDocument, DocumentError> {
    let value: Value = serde_json::from_str(text).map_err(|e| DocumentError::Corrupt(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| DocumentError::Corrupt("missing schema_version".into()))?;
    if major(version) != major(SCHEMA_VERSION) {
        return Err(DocumentError::SchemaMismatch {
            found: version.into(),
            expected: SCHEMA_VERSION.into(),
        });
    }
    serde_json::from_value(value).map_err(|e| DocumentError::Corrupt(e.to_string()))
}

fn assets_dir(project_file: &Path) -> PathBuf {
    project_file.parent().unwrap_or(Path::new(".")).join("assets")
}

fn io(e: std::io::Error) -> DocumentError {
    DocumentError::Io(e.to_string())
}

/// Writes `project.json` (or the given file) plus uploaded assets beside it.
pub fn save(doc: &ProjectDocument, path: impl AsRef<Path>) -> Result<(), DocumentError> {
    let path = path.as_ref();
    let problems = doc.validate();
    if !problems.is_empty() {
        return Err(DocumentError::Invalid(problems));
    }
    let assets = assets_dir(path);
    for a in doc.assets.iter().filter(|a| a.kind == AssetKind::Uploaded) {
        let target = assets.join(&a.path);
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).map_err(io)?;
        }
        fs::write(&target, &doc.upload_bytes[&a.id]).map_err(io)?;
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, to_json(doc)).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn load(path: impl AsRef<Path>) -> Result<ProjectDocument, DocumentError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io)?;
    let mut doc = from_json(&text)?;
    let assets = assets_dir(path);
    for a in doc.assets.iter().filter(|a| a.kind == AssetKind::Uploaded) {
        let bytes = fs::read(assets.join(&a.path))
            .map_err(|e| DocumentError::Corrupt(format!("asset {}: {e}", a.path)))?;
        doc.upload_bytes.insert(a.id.clone(), bytes);
    }
    Ok(doc)
}
