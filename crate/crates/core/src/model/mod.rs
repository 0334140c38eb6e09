//! In-memory representation of a combined class + sequence model.
//!
//! A [`Model`] is plain data. Element lists are kept in canonical order
//! (sorted by id, see [`Model::normalize`]); lookups and the structural
//! queries used by the rules live on [`Snapshot`], which pairs a model with
//! an id index.

mod snapshot;
mod wellformed;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use snapshot::{
    DepKey, LifelineResolution, LookupError, ReadSet, Snapshot, UnresolvedReason,
};
pub use wellformed::{IssueKind, StructuralIssue};

/// Identity of a model element, unique across all element kinds of one model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(value: impl Into<String>) -> Self {
        ElementId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(value: &str) -> Self {
        ElementId(value.to_owned())
    }
}

impl From<String> for ElementId {
    fn from(value: String) -> Self {
        ElementId(value)
    }
}

impl std::borrow::Borrow<str> for ElementId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    #[default]
    Public,
    Protected,
    Package,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    In,
    Inout,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageSort {
    #[default]
    Sync,
    Async,
    Reply,
    Create,
    Delete,
}

impl MessageSort {
    /// Sorts that denote a call of a named operation.
    pub fn is_call(self) -> bool {
        matches!(self, MessageSort::Sync | MessageSort::Async)
    }
}

impl fmt::Display for MessageSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageSort::Sync => "sync",
            MessageSort::Async => "async",
            MessageSort::Reply => "reply",
            MessageSort::Create => "create",
            MessageSort::Delete => "delete",
        };
        f.write_str(s)
    }
}

fn is_default<T: Default + PartialEq>(value: &T) -> bool {
    *value == T::default()
}

fn default_multiplicity() -> String {
    "1".to_owned()
}

fn is_default_multiplicity(value: &str) -> bool {
    value == "1"
}

fn default_true() -> bool {
    true
}

fn is_true(value: &bool) -> bool {
    *value
}

// Field order below is the canonical key order of the interchange format.
// Fields holding their default value are omitted on output.

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Operation {
    pub id: ElementId,
    pub name: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub visibility: Visibility,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<Parameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_type_name: Option<String>,
}

impl Operation {
    /// Number of parameters a caller supplies (`in` and `inout`).
    pub fn input_arity(&self) -> usize {
        self.parameters
            .iter()
            .filter(|p| matches!(p.direction, Direction::In | Direction::Inout))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Attribute {
    pub id: ElementId,
    pub name: String,
    pub type_name: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Class {
    pub id: ElementId,
    pub name: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub is_abstract: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub superclass_ids: Vec<ElementId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<Attribute>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operations: Vec<Operation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Enumeration {
    pub id: ElementId,
    pub name: String,
    pub literals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssociationEnd {
    pub class_id: ElementId,
    #[serde(
        default = "default_multiplicity",
        skip_serializing_if = "is_default_multiplicity"
    )]
    pub multiplicity: String,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub navigable: bool,
}

impl AssociationEnd {
    pub fn new(class_id: impl Into<ElementId>) -> Self {
        AssociationEnd {
            class_id: class_id.into(),
            multiplicity: default_multiplicity(),
            navigable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Association {
    pub id: ElementId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub end_a: AssociationEnd,
    pub end_b: AssociationEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lifeline {
    pub id: ElementId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_ref: Option<ElementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Message {
    pub id: ElementId,
    pub name: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sort: MessageSort,
    pub source_lifeline_id: ElementId,
    pub target_lifeline_id: ElementId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arguments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Interaction {
    pub id: ElementId,
    pub name: String,
    pub lifelines: Vec<Lifeline>,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Model {
    pub model_id: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub revision: u64,
    pub classes: Vec<Class>,
    pub enumerations: Vec<Enumeration>,
    pub associations: Vec<Association>,
    pub interactions: Vec<Interaction>,
}

impl Model {
    pub fn empty(model_id: impl Into<String>) -> Self {
        Model {
            model_id: model_id.into(),
            revision: 0,
            classes: Vec::new(),
            enumerations: Vec::new(),
            associations: Vec::new(),
            interactions: Vec::new(),
        }
    }

    /// Puts every element list into canonical order (ascending id).
    ///
    /// The sort is stable, so elements sharing an id keep their relative order.
    pub fn normalize(&mut self) {
        self.classes.sort_by(|a, b| a.id.cmp(&b.id));
        for class in &mut self.classes {
            class.attributes.sort_by(|a, b| a.id.cmp(&b.id));
            class.operations.sort_by(|a, b| a.id.cmp(&b.id));
        }
        self.enumerations.sort_by(|a, b| a.id.cmp(&b.id));
        self.associations.sort_by(|a, b| a.id.cmp(&b.id));
        self.interactions.sort_by(|a, b| a.id.cmp(&b.id));
        for interaction in &mut self.interactions {
            interaction.lifelines.sort_by(|a, b| a.id.cmp(&b.id));
            interaction.messages.sort_by(|a, b| a.id.cmp(&b.id));
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn message_count(&self) -> usize {
        self.interactions.iter().map(|i| i.messages.len()).sum()
    }

    pub fn lifeline_count(&self) -> usize {
        self.interactions.iter().map(|i| i.lifelines.len()).sum()
    }

    pub fn operation_count(&self) -> usize {
        self.classes.iter().map(|c| c.operations.len()).sum()
    }

    pub fn find_class(&self, id: &str) -> Option<&Class> {
        self.classes.iter().find(|c| c.id.as_str() == id)
    }

    pub fn find_interaction(&self, id: &str) -> Option<&Interaction> {
        self.interactions.iter().find(|i| i.id.as_str() == id)
    }
}

/// The kinds of element a change event can address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ElementKind {
    Class,
    Operation,
    Attribute,
    ParameterList,
    Enumeration,
    Association,
    Interaction,
    Lifeline,
    Message,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Class => "class",
            ElementKind::Operation => "operation",
            ElementKind::Attribute => "attribute",
            ElementKind::ParameterList => "parameterList",
            ElementKind::Enumeration => "enumeration",
            ElementKind::Association => "association",
            ElementKind::Interaction => "interaction",
            ElementKind::Lifeline => "lifeline",
            ElementKind::Message => "message",
        }
    }

    /// Kinds that live inside a container element.
    pub fn parent_kind(self) -> Option<ElementKind> {
        match self {
            ElementKind::Operation | ElementKind::Attribute | ElementKind::ParameterList => {
                Some(ElementKind::Class)
            }
            ElementKind::Lifeline | ElementKind::Message => Some(ElementKind::Interaction),
            _ => None,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_arity_ignores_out_parameters() {
        let op = Operation {
            id: "O1".into(),
            name: "split".into(),
            visibility: Visibility::Public,
            parameters: vec![
                Parameter { name: "a".into(), type_name: "int".into(), direction: Direction::In },
                Parameter { name: "b".into(), type_name: "int".into(), direction: Direction::Inout },
                Parameter { name: "c".into(), type_name: "int".into(), direction: Direction::Out },
            ],
            return_type_name: None,
        };
        assert_eq!(op.input_arity(), 2);
    }

    #[test]
    fn normalize_orders_nested_lists() {
        let mut m = Model::empty("m");
        m.interactions.push(Interaction {
            id: "I1".into(),
            name: "x".into(),
            lifelines: vec![],
            messages: vec![
                Message {
                    id: "M2".into(),
                    name: "b".into(),
                    sort: MessageSort::Sync,
                    source_lifeline_id: "L1".into(),
                    target_lifeline_id: "L1".into(),
                    arguments: vec![],
                },
                Message {
                    id: "M1".into(),
                    name: "a".into(),
                    sort: MessageSort::Sync,
                    source_lifeline_id: "L1".into(),
                    target_lifeline_id: "L1".into(),
                    arguments: vec![],
                },
            ],
        });
        m.normalize();
        let ids: Vec<_> = m.interactions[0].messages.iter().map(|m| m.id.as_str()).collect();
        assert_eq!(ids, ["M1", "M2"]);
    }
}
