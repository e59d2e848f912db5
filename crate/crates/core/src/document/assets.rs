use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MAX_UPLOAD_BYTES: usize = 10 * 1024 * 1024;
pub const ENV_ASSET_DIR: &str = "DB_ASSET_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetKind {
    Builtin,
    Uploaded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetRef {
    pub id: String,
    pub kind: AssetKind,
    /// Relative to the project's `assets/` directory.
    pub path: String,
    pub mime: String,
    pub width: f64,
    pub height: f64,
}

impl AssetRef {
    pub fn is_image(&self) -> bool {
        self.mime.starts_with("image/")
    }

    pub fn is_audio(&self) -> bool {
        self.mime.starts_with("audio/")
    }
}

struct Builtin {
    id: &'static str,
    width: f64,
    height: f64,
    svg: &'static str,
}

macro_rules! builtin {
    ($id:literal, $w:literal, $h:literal) => {
        Builtin {
            id: $id,
            width: $w as f64,
            height: $h as f64,
            svg: include_str!(concat!("../../assets/builtin/", $id, ".svg")),
        }
    };
}

static BUILTINS: &[Builtin] = &[
    builtin!("background.castle", 1600, 900),
    builtin!("background.forest", 1600, 900),
    builtin!("background.room", 1600, 900),
    builtin!("body.dress", 70, 100),
    builtin!("body.robe", 70, 100),
    builtin!("body.tunic", 70, 100),
    builtin!("head.crown", 80, 96),
    builtin!("head.neutral", 80, 80),
    builtin!("head.old", 80, 80),
    builtin!("head.smile", 80, 80),
    builtin!("head.wolf", 80, 80),
    builtin!("item.apple", 60, 60),
    builtin!("item.basket", 90, 70),
    builtin!("item.box", 80, 80),
    builtin!("item.cap", 70, 50),
    builtin!("item.rose", 50, 80),
    builtin!("item.spindle", 40, 90),
    builtin!("item.tower", 160, 320),
    builtin!("limb.arm", 20, 60),
    builtin!("limb.leg", 22, 70),
];

fn builtin_ref(b: &Builtin) -> AssetRef {
    AssetRef {
        id: b.id.to_string(),
        kind: AssetKind::Builtin,
        path: format!("builtin/{}.svg", b.id),
        mime: "image/svg+xml".into(),
        width: b.width,
        height: b.height,
    }
}

/// The built-in library in id order. Ids are stable across versions.
pub fn builtin_assets() -> Vec<AssetRef> {
    BUILTINS.iter().map(builtin_ref).collect()
}

pub fn builtin(id: &str) -> Option<AssetRef> {
    BUILTINS.iter().find(|b| b.id == id).map(builtin_ref)
}

/// Bytes of a built-in asset, read from `root` when it holds a file of
/// that name and embedded otherwise.
pub fn builtin_bytes(id: &str, root: Option<&Path>) -> Option<Vec<u8>> {
    let b = BUILTINS.iter().find(|b| b.id == id)?;
    if let Some(root) = root {
        if let Ok(bytes) = std::fs::read(root.join(format!("{id}.svg"))) {
            return Some(bytes);
        }
    }
    Some(b.svg.as_bytes().to_vec())
}

pub fn builtin_root_from_env() -> Option<std::path::PathBuf> {
    std::env::var_os(ENV_ASSET_DIR).map(Into::into)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UploadError {
    #[error("upload of {0} bytes exceeds the 10 MiB limit")]
    TooLarge(usize),
    #[error("upload is empty")]
    Empty,
    #[error("unsupported media type")]
    Unsupported,
}

fn svg_dimension(text: &str, attr: &str) -> Option<f64> {
    let open = text.find("<svg")?;
    let tag_end = text[open..].find('>')? + open;
    let tag = &text[open..tag_end];
    let key = format!(" {attr}=\"");
    let start = tag.find(&key)? + key.len();
    let end = tag[start..].find('"')? + start;
    let digits: String = tag[start..end]
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '.')
        .collect();
    digits.parse().ok().filter(|v: &f64| *v > 0.0)
}

/// Recognizes the upload's media type from its leading bytes and reads the
/// pixel size where the format makes that cheap.
pub fn sniff(bytes: &[u8]) -> Option<(&'static str, &'static str, f64, f64)> {
    const FALLBACK: f64 = 256.0;
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") && bytes.len() >= 24 {
        let w = u32::from_be_bytes(bytes[16..20].try_into().ok()?) as f64;
        let h = u32::from_be_bytes(bytes[20..24].try_into().ok()?) as f64;
        return Some(("image/png", "png", w, h));
    }
    if bytes.starts_with(&[0xff, 0xd8, 0xff]) {
        return Some(("image/jpeg", "jpg", FALLBACK, FALLBACK));
    }
    if (bytes.starts_with(b"GIF87a") || bytes.starts_with(b"GIF89a")) && bytes.len() >= 10 {
        let w = u16::from_le_bytes([bytes[6], bytes[7]]) as f64;
        let h = u16::from_le_bytes([bytes[8], bytes[9]]) as f64;
        return Some(("image/gif", "gif", w, h));
    }
    if bytes.len() >= 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WEBP" {
        return Some(("image/webp", "webp", FALLBACK, FALLBACK));
    }
    if bytes.len() >= 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WAVE" {
        return Some(("audio/wav", "wav", 0.0, 0.0));
    }
    if bytes.starts_with(b"OggS") {
        return Some(("audio/ogg", "ogg", 0.0, 0.0));
    }
    if bytes.starts_with(b"ID3") || (bytes.len() >= 2 && bytes[0] == 0xff && bytes[1] & 0xe0 == 0xe0) {
        return Some(("audio/mpeg", "mp3", 0.0, 0.0));
    }
    if let Ok(text) = std::str::from_utf8(bytes) {
        if text.contains("<svg") {
            let w = svg_dimension(text, "width").unwrap_or(FALLBACK);
            let h = svg_dimension(text, "height").unwrap_or(FALLBACK);
            return Some(("image/svg+xml", "svg", w, h));
        }
    }
    None
}

/// Checks an upload and builds its content-addressed asset reference.
pub fn uploaded_asset(bytes: &[u8]) -> Result<AssetRef, UploadError> {
    if bytes.is_empty() {
        return Err(UploadError::Empty);
    }
    if bytes.len() > MAX_UPLOAD_BYTES {
        return Err(UploadError::TooLarge(bytes.len()));
    }
    let (mime, ext, width, height) = sniff(bytes).ok_or(UploadError::Unsupported)?;
    let digest = hex::encode(Sha256::digest(bytes));
    let id = format!("upload.{}", &digest[..16]);
    Ok(AssetRef {
        path: format!("uploads/{id}.{ext}"),
        id,
        kind: AssetKind::Uploaded,
        mime: mime.into(),
        width,
        height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_library_is_consistent() {
        let all = builtin_assets();
        assert_eq!(all.len(), 20);
        for a in &all {
            let bytes = builtin_bytes(&a.id, None).unwrap();
            let (mime, _, w, h) = sniff(&bytes).unwrap();
            assert_eq!(mime, a.mime);
            assert_eq!((w, h), (a.width, a.height), "{}", a.id);
        }
        assert!(builtin("head.crown").is_some());
        assert!(builtin("head.missing").is_none());
    }

    #[test]
    fn builtin_root_override() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("item.box.svg"), b"<svg width=\"1\" height=\"1\"/>").unwrap();
        assert_eq!(builtin_bytes("item.box", Some(dir.path())).unwrap(), b"<svg width=\"1\" height=\"1\"/>");
        assert!(builtin_bytes("item.cap", Some(dir.path())).unwrap().starts_with(b"<svg"));
    }

    #[test]
    fn uploads_are_sniffed_and_limited() {
        let mut png = b"\x89PNG\r\n\x1a\n\0\0\0\rIHDR".to_vec();
        png.extend_from_slice(&300u32.to_be_bytes());
        png.extend_from_slice(&200u32.to_be_bytes());
        let a = uploaded_asset(&png).unwrap();
        assert_eq!((a.mime.as_str(), a.width, a.height), ("image/png", 300.0, 200.0));
        assert!(a.path.starts_with("uploads/upload.") && a.path.ends_with(".png"));
        assert_eq!(uploaded_asset(b"hello"), Err(UploadError::Unsupported));
        assert_eq!(uploaded_asset(b""), Err(UploadError::Empty));
        let big = vec![b' '; MAX_UPLOAD_BYTES + 1];
        assert_eq!(uploaded_asset(&big), Err(UploadError::TooLarge(MAX_UPLOAD_BYTES + 1)));
        assert_eq!(uploaded_asset(b"ID3\x04rest").unwrap().mime, "audio/mpeg");
    }
}
