use serde_json::error::Category;

use super::{FatalKind, ParseOptions, ParseReport, ParseWarning};
use crate::model::{ElementId, Model, Snapshot};

/// Reads a canonical model document.
///
/// Missing optional fields take their defaults. Unknown fields and duplicate
/// element ids are fatal unless `options.lenient` is set, in which case they
/// become warnings. The returned model is normalized.
pub fn parse_canonical(text: &str, options: ParseOptions) -> ParseReport {
    let mut ignored: Vec<String> = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: Result<Model, serde_path_to_error::Error<serde_json::Error>> = {
        let mut record = |path: serde_ignored::Path| ignored.push(path.to_string());
        let tracked = serde_ignored::Deserializer::new(&mut de, &mut record);
        serde_path_to_error::deserialize(tracked)
    };
    let parsed = parsed
        .map_err(|err| (json_path(&err.path().to_string()), err.into_inner()))
        .and_then(|model| de.end().map(|()| model).map_err(|e| ("$".to_owned(), e)));
    let model = match parsed {
        Ok(model) => model,
        Err((path, inner)) => {
            let kind = match inner.classify() {
                Category::Syntax | Category::Eof | Category::Io => FatalKind::Syntax,
                Category::Data if inner.to_string().starts_with("duplicate field") => FatalKind::DuplicateKey,
                Category::Data => FatalKind::Schema,
            };
            return ParseReport::fatal(kind, path, inner.to_string(), Vec::new());
        }
    };

    let mut warnings = Vec::new();
    for path in ignored {
        let path = json_path(&path);
        if !options.lenient {
            return ParseReport::fatal(FatalKind::Schema, path, "unknown field", warnings);
        }
        warnings.push(ParseWarning { path, message: "unknown field ignored".into() });
    }

    if let Some(path) = first_empty_id(&model) {
        return ParseReport::fatal(FatalKind::Schema, path, "element id must not be empty", warnings);
    }

    let snapshot = Snapshot::new(model);
    if let Some(dup) = snapshot.duplicates().iter().next() {
        if !options.lenient {
            return ParseReport::fatal(
                FatalKind::DuplicateId,
                "$",
                format!("duplicate element id '{dup}'"),
                warnings,
            );
        }
        for dup in snapshot.duplicates() {
            warnings.push(ParseWarning { path: "$".into(), message: format!("duplicate element id '{dup}'") });
        }
    }
    ParseReport::ok(snapshot.into_model(), warnings)
}

/// Writes the canonical form: schema key order, element lists sorted by id,
/// default-valued optional fields omitted, two-space indentation and a
/// trailing newline.
pub fn serialize_canonical(model: &Model) -> String {
    let normalized = model.clone().normalized();
    let mut out = serde_json::to_string_pretty(&normalized).expect("model serialization is infallible");
    out.push('\n');
    out
}

fn json_path(raw: &str) -> String {
    if raw.is_empty() || raw == "." {
        "$".to_owned()
    } else if raw.starts_with('[') {
        format!("${raw}")
    } else {
        format!("$.{raw}")
    }
}

fn first_empty_id(model: &Model) -> Option<String> {
    let empty = |id: &ElementId| id.as_str().is_empty();
    for (ci, class) in model.classes.iter().enumerate() {
        if empty(&class.id) {
            return Some(format!("$.classes[{ci}].id"));
        }
        for (ai, a) in class.attributes.iter().enumerate() {
            if empty(&a.id) {
                return Some(format!("$.classes[{ci}].attributes[{ai}].id"));
            }
        }
        for (oi, o) in class.operations.iter().enumerate() {
            if empty(&o.id) {
                return Some(format!("$.classes[{ci}].operations[{oi}].id"));
            }
        }
    }
    for (ei, e) in model.enumerations.iter().enumerate() {
        if empty(&e.id) {
            return Some(format!("$.enumerations[{ei}].id"));
        }
    }
    for (ai, a) in model.associations.iter().enumerate() {
        if empty(&a.id) {
            return Some(format!("$.associations[{ai}].id"));
        }
    }
    for (ii, i) in model.interactions.iter().enumerate() {
        if empty(&i.id) {
            return Some(format!("$.interactions[{ii}].id"));
        }
        for (li, l) in i.lifelines.iter().enumerate() {
            if empty(&l.id) {
                return Some(format!("$.interactions[{ii}].lifelines[{li}].id"));
            }
        }
        for (mi, m) in i.messages.iter().enumerate() {
            if empty(&m.id) {
                return Some(format!("$.interactions[{ii}].messages[{mi}].id"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::FatalKind;
    use crate::model::MessageSort;

    const MINIMAL: &str =
        r#"{"modelId":"m","revision":0,"classes":[],"enumerations":[],"associations":[],"interactions":[]}"#;

    #[test]
    fn minimal_document() {
        let report = parse_canonical(MINIMAL, ParseOptions::strict());
        assert!(report.fatal.is_none());
        assert!(report.warnings.is_empty());
        assert_eq!(report.model.unwrap(), Model::empty("m"));
    }

    #[test]
    fn empty_model_serializes_to_seven_lines() {
        let text = serialize_canonical(&Model::empty("m"));
        assert_eq!(
            text,
            "{\n  \"modelId\": \"m\",\n  \"classes\": [],\n  \"enumerations\": [],\n  \"associations\": [],\n  \"interactions\": []\n}\n"
        );
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn defaults_fill_missing_optional_fields() {
        let doc = r#"{"modelId":"m","classes":[{"id":"C1","name":"A","operations":[{"id":"O1","name":"f"}]}],
            "enumerations":[],"associations":[],
            "interactions":[{"id":"I1","name":"i","lifelines":[{"id":"L1","name":"a"}],
              "messages":[{"id":"M1","name":"f","sourceLifelineId":"L1","targetLifelineId":"L1"}]}]}"#;
        let model = parse_canonical(doc, ParseOptions::strict()).model.unwrap();
        assert_eq!(model.revision, 0);
        let msg = &model.interactions[0].messages[0];
        assert_eq!(msg.sort, MessageSort::Sync);
        assert!(msg.arguments.is_empty());
        assert!(!model.classes[0].is_abstract);
    }

    #[test]
    fn unknown_field_strict_vs_lenient() {
        let doc = r#"{"modelId":"m","classes":[{"id":"C1","name":"A","color":"red"}],"enumerations":[],"associations":[],"interactions":[]}"#;
        let strict = parse_canonical(doc, ParseOptions::strict());
        let fatal = strict.fatal.unwrap();
        assert_eq!(fatal.kind, FatalKind::Schema);
        assert!(fatal.path.contains("color"), "{}", fatal.path);

        let lenient = parse_canonical(doc, ParseOptions::lenient());
        assert!(lenient.model.is_some());
        assert_eq!(lenient.warnings.len(), 1);
        assert!(lenient.warnings[0].path.contains("color"));
    }

    #[test]
    fn wrong_type_reports_path() {
        let doc = r#"{"modelId":"m","classes":[{"id":"C1","name":7}],"enumerations":[],"associations":[],"interactions":[]}"#;
        let fatal = parse_canonical(doc, ParseOptions::strict()).fatal.unwrap();
        assert_eq!(fatal.kind, FatalKind::Schema);
        assert_eq!(fatal.path, "$.classes[0].name");
    }

    #[test]
    fn duplicate_key_is_fatal() {
        let doc = r#"{"modelId":"m","modelId":"n","classes":[],"enumerations":[],"associations":[],"interactions":[]}"#;
        let fatal = parse_canonical(doc, ParseOptions::lenient()).fatal.unwrap();
        assert_eq!(fatal.kind, FatalKind::DuplicateKey);
    }

    #[test]
    fn malformed_is_syntax_error() {
        let fatal = parse_canonical("{\"modelId\": ", ParseOptions::strict()).fatal.unwrap();
        assert_eq!(fatal.kind, FatalKind::Syntax);
        let trailing = parse_canonical(&format!("{MINIMAL} x"), ParseOptions::strict()).fatal.unwrap();
        assert_eq!(trailing.kind, FatalKind::Syntax);
    }

    #[test]
    fn duplicate_ids_fatal_when_strict_and_visible_to_validation_when_lenient() {
        let doc = r#"{"modelId":"m","classes":[{"id":"C1","name":"A"},{"id":"C1","name":"B"}],"enumerations":[],"associations":[],"interactions":[]}"#;
        let strict = parse_canonical(doc, ParseOptions::strict());
        assert_eq!(strict.fatal.unwrap().kind, FatalKind::DuplicateId);

        let lenient = parse_canonical(doc, ParseOptions::lenient());
        let issues = Snapshot::new(lenient.model.unwrap()).validate_wellformed();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].element_id.as_str(), "C1");
    }

    #[test]
    fn empty_id_rejected() {
        let doc = r#"{"modelId":"m","classes":[{"id":"","name":"A"}],"enumerations":[],"associations":[],"interactions":[]}"#;
        let fatal = parse_canonical(doc, ParseOptions::lenient()).fatal.unwrap();
        assert_eq!(fatal.path, "$.classes[0].id");
    }
}
