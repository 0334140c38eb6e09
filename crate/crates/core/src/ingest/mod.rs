//! Model ingestion: the canonical JSON interchange format (normative, read
//! and write) and a best-effort reader for EMF UML2 XMI files.

mod canonical;
mod xmi;

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::model::Model;

pub use canonical::{parse_canonical, serialize_canonical};
pub use xmi::parse_xmi;

/// File extension of the canonical format.
pub const CANONICAL_EXTENSION: &str = ".hvm.json";
/// File extension of XMI model files.
pub const XMI_EXTENSION: &str = ".uml";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Downgrade unknown fields and duplicate element ids to warnings.
    pub lenient: bool,
}

impl ParseOptions {
    pub fn strict() -> Self {
        ParseOptions { lenient: false }
    }

    pub fn lenient() -> Self {
        ParseOptions { lenient: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FatalKind {
    /// Not well-formed JSON or XML.
    Syntax,
    /// Missing field, wrong type, unknown field (strict) or empty id.
    Schema,
    DuplicateKey,
    /// Two elements share an id (strict mode).
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseFatal {
    pub kind: FatalKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseFatal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ParseFatal {}

/// Outcome of reading a model document: exactly one of `model` and `fatal`
/// is present.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseReport {
    pub model: Option<Model>,
    pub warnings: Vec<ParseWarning>,
    pub fatal: Option<ParseFatal>,
}

impl ParseReport {
    fn ok(model: Model, warnings: Vec<ParseWarning>) -> Self {
        ParseReport { model: Some(model), warnings, fatal: None }
    }

    fn fatal(kind: FatalKind, path: impl Into<String>, message: impl Into<String>, warnings: Vec<ParseWarning>) -> Self {
        ParseReport {
            model: None,
            warnings,
            fatal: Some(ParseFatal { kind, path: path.into(), message: message.into() }),
        }
    }

    pub fn into_result(self) -> Result<(Model, Vec<ParseWarning>), ParseFatal> {
        match (self.model, self.fatal) {
            (Some(model), None) => Ok((model, self.warnings)),
            (_, Some(fatal)) => Err(fatal),
            (None, None) => unreachable!("parse report without model or fatal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Canonical,
    Xmi,
}

impl ModelFormat {
    /// Picks the reader from a file name; anything not ending in `.uml` is
    /// read as canonical.
    pub fn from_path(path: &Path) -> Self {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.ends_with(XMI_EXTENSION) || name.ends_with(".xmi") {
            ModelFormat::Xmi
        } else {
            ModelFormat::Canonical
        }
    }
}

pub fn parse_document(format: ModelFormat, text: &str, options: ParseOptions) -> ParseReport {
    match format {
        ModelFormat::Canonical => parse_canonical(text, options),
        ModelFormat::Xmi => parse_xmi(text),
    }
}
