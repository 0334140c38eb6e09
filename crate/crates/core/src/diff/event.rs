use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{Association, Attribute, Class, ElementId, ElementKind, Enumeration, Interaction, Lifeline, Message, Operation};

/// A whole element, as carried by an `ElementAdded` event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Class(Class),
    Operation(Operation),
    Attribute(Attribute),
    Enumeration(Enumeration),
    Association(Association),
    Interaction(Interaction),
    Lifeline(Lifeline),
    Message(Message),
}

impl Element {
    pub fn id(&self) -> &ElementId {
        match self {
            Element::Class(e) => &e.id,
            Element::Operation(e) => &e.id,
            Element::Attribute(e) => &e.id,
            Element::Enumeration(e) => &e.id,
            Element::Association(e) => &e.id,
            Element::Interaction(e) => &e.id,
            Element::Lifeline(e) => &e.id,
            Element::Message(e) => &e.id,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Class(_) => ElementKind::Class,
            Element::Operation(_) => ElementKind::Operation,
            Element::Attribute(_) => ElementKind::Attribute,
            Element::Enumeration(_) => ElementKind::Enumeration,
            Element::Association(_) => ElementKind::Association,
            Element::Interaction(_) => ElementKind::Interaction,
            Element::Lifeline(_) => ElementKind::Lifeline,
            Element::Message(_) => ElementKind::Message,
        }
    }

    fn to_value(&self) -> Value {
        let v = match self {
            Element::Class(e) => serde_json::to_value(e),
            Element::Operation(e) => serde_json::to_value(e),
            Element::Attribute(e) => serde_json::to_value(e),
            Element::Enumeration(e) => serde_json::to_value(e),
            Element::Association(e) => serde_json::to_value(e),
            Element::Interaction(e) => serde_json::to_value(e),
            Element::Lifeline(e) => serde_json::to_value(e),
            Element::Message(e) => serde_json::to_value(e),
        };
        v.expect("element serialization is infallible")
    }

    fn from_value(kind: ElementKind, value: Value) -> Result<Self, serde_json::Error> {
        Ok(match kind {
            ElementKind::Class => Element::Class(serde_json::from_value(value)?),
            ElementKind::Operation => Element::Operation(serde_json::from_value(value)?),
            ElementKind::Attribute => Element::Attribute(serde_json::from_value(value)?),
            ElementKind::Enumeration => Element::Enumeration(serde_json::from_value(value)?),
            ElementKind::Association => Element::Association(serde_json::from_value(value)?),
            ElementKind::Interaction => Element::Interaction(serde_json::from_value(value)?),
            ElementKind::Lifeline => Element::Lifeline(serde_json::from_value(value)?),
            ElementKind::Message => Element::Message(serde_json::from_value(value)?),
            ElementKind::ParameterList => {
                return Err(serde::de::Error::custom("a parameter list is not an addable element"))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChangeKind {
    ElementAdded,
    ElementRemoved,
    PropertyChanged,
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChangeKind::ElementAdded => "ElementAdded",
            ChangeKind::ElementRemoved => "ElementRemoved",
            ChangeKind::PropertyChanged => "PropertyChanged",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Change {
    /// `parent_id` names the containing class or interaction for nested kinds.
    Added { parent_id: Option<ElementId>, payload: Element },
    Removed,
    /// Absent optional values are carried as JSON `null`.
    PropertyChanged { property: String, old_value: Value, new_value: Value },
}

/// One modification of a model, sequenced per model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WireEvent", into = "WireEvent")]
pub struct ChangeEvent {
    pub seq: u64,
    pub model_id: String,
    /// Revision the model reaches once this event's batch is applied.
    pub revision: u64,
    pub element_kind: ElementKind,
    pub element_id: ElementId,
    pub change: Change,
}

impl ChangeEvent {
    pub fn kind(&self) -> ChangeKind {
        match self.change {
            Change::Added { .. } => ChangeKind::ElementAdded,
            Change::Removed => ChangeKind::ElementRemoved,
            Change::PropertyChanged { .. } => ChangeKind::PropertyChanged,
        }
    }

    /// Single-line canonical serialization.
    pub fn to_canonical(&self) -> String {
        serde_json::to_string(self).expect("event serialization is infallible")
    }
}

// Key order here is the canonical key order of an event record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct WireEvent {
    seq: u64,
    model_id: String,
    revision: u64,
    kind: ChangeKind,
    element_kind: ElementKind,
    element_id: ElementId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent_id: Option<ElementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    property: Option<String>,
    #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
    old_value: Option<Value>,
    #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
    new_value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payload: Option<Value>,
}

/// Distinguishes an explicit `null` (present) from a missing key.
fn present<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Value>, D::Error> {
    Value::deserialize(de).map(Some)
}

impl From<ChangeEvent> for WireEvent {
    fn from(event: ChangeEvent) -> Self {
        let kind = event.kind();
        let mut wire = WireEvent {
            seq: event.seq,
            model_id: event.model_id,
            revision: event.revision,
            kind,
            element_kind: event.element_kind,
            element_id: event.element_id,
            parent_id: None,
            property: None,
            old_value: None,
            new_value: None,
            payload: None,
        };
        match event.change {
            Change::Added { parent_id, payload } => {
                wire.parent_id = parent_id;
                wire.payload = Some(payload.to_value());
            }
            Change::Removed => {}
            Change::PropertyChanged { property, old_value, new_value } => {
                wire.property = Some(property);
                wire.old_value = Some(old_value);
                wire.new_value = Some(new_value);
            }
        }
        wire
    }
}

impl TryFrom<WireEvent> for ChangeEvent {
    type Error = String;

    fn try_from(wire: WireEvent) -> Result<Self, Self::Error> {
        if wire.seq == 0 {
            return Err("seq must be positive".into());
        }
        let change = match wire.kind {
            ChangeKind::ElementAdded => {
                let payload = wire.payload.ok_or("ElementAdded requires a payload")?;
                let payload = Element::from_value(wire.element_kind, payload).map_err(|e| format!("payload: {e}"))?;
                if payload.id() != &wire.element_id {
                    return Err(format!("payload id '{}' differs from elementId '{}'", payload.id(), wire.element_id));
                }
                Change::Added { parent_id: wire.parent_id, payload }
            }
            ChangeKind::ElementRemoved => Change::Removed,
            ChangeKind::PropertyChanged => {
                let property = wire.property.ok_or("PropertyChanged requires a property")?;
                let old_value = wire.old_value.ok_or("PropertyChanged requires oldValue")?;
                let new_value = wire.new_value.ok_or("PropertyChanged requires newValue")?;
                Change::PropertyChanged { property, old_value, new_value }
            }
        };
        Ok(ChangeEvent {
            seq: wire.seq,
            model_id: wire.model_id,
            revision: wire.revision,
            element_kind: wire.element_kind,
            element_id: wire.element_id,
            change,
        })
    }
}

#[derive(Debug, Error)]
#[error("event record {index}: {source}")]
pub struct EventParseError {
    /// Zero-based position of the offending record.
    pub index: usize,
    #[source]
    pub source: serde_json::Error,
}

/// Newline-delimited canonical records, one event per line.
pub fn events_to_ndjson(events: &[ChangeEvent]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&event.to_canonical());
        out.push('\n');
    }
    out
}

/// Reads an event batch given either as a JSON array or as newline-delimited
/// records. Blank lines are ignored.
pub fn parse_events(text: &str) -> Result<Vec<ChangeEvent>, EventParseError> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|source| EventParseError { index: 0, source });
    }
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .enumerate()
        .map(|(index, line)| serde_json::from_str(line).map_err(|source| EventParseError { index, source }))
        .collect()
}
