//! Model differencing: two snapshots in, an ordered list of change events
//! out, and `apply` as its inverse.

mod event;
mod props;

use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use crate::model::{
    Association, Attribute, Class, DepKey, ElementId, ElementKind, Enumeration, Interaction, Lifeline, Message, Model,
    Operation,
};
use props::Properties;

pub use event::{events_to_ndjson, parse_events, Change, ChangeEvent, ChangeKind, Element, EventParseError};

/// Property name under which an operation's parameters change as a whole.
pub const PARAMETER_LIST: &str = "parameterList";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("model id mismatch: '{before}' vs '{after}'")]
    ModelIdMismatch { before: String, after: String },
}

/// An event that cannot be applied to the snapshot at hand.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stale event (seq {seq}) on '{element_id}': {reason}")]
pub struct StaleEvent {
    pub seq: u64,
    pub element_id: ElementId,
    pub reason: String,
}

/// Property names that `diff` compares for a kind, in emission order.
pub fn properties_of(kind: ElementKind) -> &'static [&'static str] {
    match kind {
        ElementKind::Class => Class::NAMES,
        ElementKind::Operation => &Operation::NAMES[..3],
        ElementKind::ParameterList => &Operation::NAMES[3..],
        ElementKind::Attribute => Attribute::NAMES,
        ElementKind::Enumeration => Enumeration::NAMES,
        ElementKind::Association => Association::NAMES,
        ElementKind::Interaction => Interaction::NAMES,
        ElementKind::Lifeline => Lifeline::NAMES,
        ElementKind::Message => Message::NAMES,
    }
}

/// Events turning `before` into `after`, numbered from seq 1.
pub fn diff(before: &Model, after: &Model) -> Result<Vec<ChangeEvent>, DiffError> {
    diff_from(before, after, 1)
}

/// As [`diff`], numbering events from `first_seq`. Every event carries
/// revision `before.revision + 1`.
pub fn diff_from(before: &Model, after: &Model, first_seq: u64) -> Result<Vec<ChangeEvent>, DiffError> {
    if before.model_id != after.model_id {
        return Err(DiffError::ModelIdMismatch { before: before.model_id.clone(), after: after.model_id.clone() });
    }
    let old = flatten(before);
    let new = flatten(after);
    let same_place = |a: &Node, b: &Node| a.kind == b.kind && a.parent == b.parent;

    let mut removed: Vec<&Node> = old
        .iter()
        .filter(|(id, node)| !new.get(*id).is_some_and(|other| same_place(node, other)))
        .map(|(_, node)| node)
        .collect();
    removed.sort_by_key(|node| (Reverse(node.depth), node.element.id()));

    let mut added: Vec<&Node> = new
        .iter()
        .filter(|(id, node)| !old.get(*id).is_some_and(|other| same_place(node, other)))
        .map(|(_, node)| node)
        .collect();
    added.sort_by_key(|node| (node.depth, node.element.id()));

    let mut changes = Vec::new();
    let mut seq = first_seq;
    let mut next = |element_kind: ElementKind, element_id: &ElementId, change: Change| {
        let event = ChangeEvent {
            seq,
            model_id: before.model_id.clone(),
            revision: before.revision + 1,
            element_kind,
            element_id: element_id.clone(),
            change,
        };
        seq += 1;
        event
    };

    for node in removed {
        changes.push(next(node.kind, node.element.id(), Change::Removed));
    }
    for node in added {
        let change = Change::Added { parent_id: node.parent.cloned(), payload: node.element.shell() };
        changes.push(next(node.kind, node.element.id(), change));
    }
    for (id, node) in &old {
        let Some(other) = new.get(id).filter(|other| same_place(node, other)) else { continue };
        for (kind, property, old_value, new_value) in node.element.property_changes(&other.element) {
            let change = Change::PropertyChanged { property: property.to_owned(), old_value, new_value };
            changes.push(next(kind, id, change));
        }
    }
    Ok(changes)
}

/// Renumbers `events` consecutively from `first_seq` and stamps `revision`.
pub fn renumber(events: &mut [ChangeEvent], first_seq: u64, revision: u64) {
    for (i, event) in events.iter_mut().enumerate() {
        event.seq = first_seq + i as u64;
        event.revision = revision;
    }
}

/// Applies one event to a copy of `model`. The revision is left unchanged.
pub fn apply(model: &Model, event: &ChangeEvent) -> Result<Model, StaleEvent> {
    let mut copy = model.clone().normalized();
    apply_in_place(&mut copy, event)?;
    Ok(copy)
}

/// Applies one event to `model`, which must be normalized (element lists in
/// id order). On error the model is untouched.
pub fn apply_in_place(model: &mut Model, event: &ChangeEvent) -> Result<(), StaleEvent> {
    let stale = |reason: String| StaleEvent { seq: event.seq, element_id: event.element_id.clone(), reason };
    if event.model_id != model.model_id {
        return Err(stale(format!("event targets model '{}', not '{}'", event.model_id, model.model_id)));
    }
    match &event.change {
        Change::Added { parent_id, payload } => add(model, event.element_kind, parent_id.as_ref(), payload).map_err(stale),
        Change::Removed => remove(model, event.element_kind, &event.element_id).map_err(stale),
        Change::PropertyChanged { property, old_value, new_value } => {
            change(model, event.element_kind, &event.element_id, property, old_value, new_value).map_err(stale)
        }
    }
}

/// Dependency keys whose state `event` changes, read from `model` as it is
/// now. Callers collect them once before and once after applying, which
/// covers both the old and the new position of the element.
pub fn touched_keys(model: &Model, event: &ChangeEvent, out: &mut Vec<DepKey>) {
    let id = &event.element_id;
    out.push(DepKey::Element(id.clone()));
    let structural = !matches!(event.change, Change::PropertyChanged { .. });
    let renames = matches!(&event.change, Change::PropertyChanged { property, .. } if property == "name");
    match locate(model, id) {
        Some(Place::Class(ci)) => {
            let class = &model.classes[ci];
            out.push(DepKey::ClassName(class.name.clone()));
            if structural {
                out.push(DepKey::Members(class.id.clone()));
                out.extend(class.operations.iter().map(|o| DepKey::Element(o.id.clone())));
                out.extend(class.attributes.iter().map(|a| DepKey::Element(a.id.clone())));
            }
        }
        Some(Place::Operation(ci, _)) | Some(Place::Attribute(ci, _)) => {
            if structural || renames {
                out.push(DepKey::Members(model.classes[ci].id.clone()));
            }
        }
        Some(Place::Association(ai)) => {
            let assoc = &model.associations[ai];
            out.push(DepKey::AssocEnds(assoc.end_a.class_id.clone()));
            out.push(DepKey::AssocEnds(assoc.end_b.class_id.clone()));
        }
        Some(Place::Interaction(ii)) if structural => {
            let interaction = &model.interactions[ii];
            out.extend(interaction.lifelines.iter().map(|l| DepKey::Element(l.id.clone())));
            out.extend(interaction.messages.iter().map(|m| DepKey::Element(m.id.clone())));
        }
        _ => {}
    }
}

fn add(model: &mut Model, kind: ElementKind, parent_id: Option<&ElementId>, payload: &Element) -> Result<(), String> {
    if payload.kind() != kind {
        return Err(format!("payload is a {}, event says {}", payload.kind(), kind));
    }
    let mut ids = vec![payload.id()];
    match payload {
        Element::Class(c) => ids.extend(c.attributes.iter().map(|a| &a.id).chain(c.operations.iter().map(|o| &o.id))),
        Element::Interaction(i) => ids.extend(i.lifelines.iter().map(|l| &l.id).chain(i.messages.iter().map(|m| &m.id))),
        _ => {}
    }
    for (n, id) in ids.iter().enumerate() {
        if ids[..n].contains(id) || locate(model, id).is_some() {
            return Err(format!("element '{id}' already exists"));
        }
    }

    let parent = match (kind.parent_kind(), parent_id) {
        (None, None) => None,
        (None, Some(p)) => return Err(format!("a {kind} has no parent, got '{p}'")),
        (Some(pk), None) => return Err(format!("a {kind} needs a parent {pk}")),
        (Some(pk), Some(p)) => match locate(model, p) {
            Some(place) if place.kind() == pk => Some(place),
            Some(place) => return Err(format!("parent '{p}' is a {}, expected {pk}", place.kind())),
            None => return Err(format!("parent '{p}' not found")),
        },
    };

    match (payload.clone(), parent) {
        (Element::Class(mut c), None) => {
            c.attributes.sort_by(|a, b| a.id.cmp(&b.id));
            c.operations.sort_by(|a, b| a.id.cmp(&b.id));
            insert_sorted(&mut model.classes, c, |c| &c.id);
        }
        (Element::Enumeration(e), None) => insert_sorted(&mut model.enumerations, e, |e| &e.id),
        (Element::Association(a), None) => insert_sorted(&mut model.associations, a, |a| &a.id),
        (Element::Interaction(mut i), None) => {
            i.lifelines.sort_by(|a, b| a.id.cmp(&b.id));
            i.messages.sort_by(|a, b| a.id.cmp(&b.id));
            insert_sorted(&mut model.interactions, i, |i| &i.id);
        }
        (Element::Operation(o), Some(Place::Class(ci))) => insert_sorted(&mut model.classes[ci].operations, o, |o| &o.id),
        (Element::Attribute(a), Some(Place::Class(ci))) => insert_sorted(&mut model.classes[ci].attributes, a, |a| &a.id),
        (Element::Lifeline(l), Some(Place::Interaction(ii))) => {
            insert_sorted(&mut model.interactions[ii].lifelines, l, |l| &l.id)
        }
        (Element::Message(m), Some(Place::Interaction(ii))) => {
            insert_sorted(&mut model.interactions[ii].messages, m, |m| &m.id)
        }
        _ => unreachable!("parent kind checked above"),
    }
    Ok(())
}

fn remove(model: &mut Model, kind: ElementKind, id: &ElementId) -> Result<(), String> {
    let place = locate(model, id).ok_or_else(|| "element not found".to_owned())?;
    if place.kind() != kind {
        return Err(format!("element is a {}, event says {kind}", place.kind()));
    }
    match place {
        Place::Class(ci) => drop(model.classes.remove(ci)),
        Place::Operation(ci, oi) => drop(model.classes[ci].operations.remove(oi)),
        Place::Attribute(ci, ai) => drop(model.classes[ci].attributes.remove(ai)),
        Place::Enumeration(ei) => drop(model.enumerations.remove(ei)),
        Place::Association(ai) => drop(model.associations.remove(ai)),
        Place::Interaction(ii) => drop(model.interactions.remove(ii)),
        Place::Lifeline(ii, li) => drop(model.interactions[ii].lifelines.remove(li)),
        Place::Message(ii, mi) => drop(model.interactions[ii].messages.remove(mi)),
    }
    Ok(())
}

fn change(
    model: &mut Model,
    kind: ElementKind,
    id: &ElementId,
    property: &str,
    old_value: &Value,
    new_value: &Value,
) -> Result<(), String> {
    let place = locate(model, id).ok_or_else(|| "element not found".to_owned())?;
    let expected = match kind {
        ElementKind::ParameterList => ElementKind::Operation,
        other => other,
    };
    if place.kind() != expected {
        return Err(format!("element is a {}, event says {kind}", place.kind()));
    }
    if !properties_of(kind).contains(&property) {
        return Err(format!("a {kind} has no property '{property}'"));
    }
    match place {
        Place::Class(ci) => set_checked(&mut model.classes[ci], property, old_value, new_value),
        Place::Operation(ci, oi) => set_checked(&mut model.classes[ci].operations[oi], property, old_value, new_value),
        Place::Attribute(ci, ai) => set_checked(&mut model.classes[ci].attributes[ai], property, old_value, new_value),
        Place::Enumeration(ei) => set_checked(&mut model.enumerations[ei], property, old_value, new_value),
        Place::Association(ai) => set_checked(&mut model.associations[ai], property, old_value, new_value),
        Place::Interaction(ii) => set_checked(&mut model.interactions[ii], property, old_value, new_value),
        Place::Lifeline(ii, li) => {
            set_checked(&mut model.interactions[ii].lifelines[li], property, old_value, new_value)
        }
        Place::Message(ii, mi) => set_checked(&mut model.interactions[ii].messages[mi], property, old_value, new_value),
    }
}

fn set_checked<T: Properties>(element: &mut T, property: &str, old_value: &Value, new_value: &Value) -> Result<(), String> {
    let current = element.get(property).ok_or_else(|| format!("unknown property '{property}'"))?;
    let old = element.normalize(property, old_value.clone())?;
    if old != current {
        return Err(format!("oldValue {old} does not match current {current}"));
    }
    let new = element.normalize(property, new_value.clone())?;
    if new == current {
        return Err(format!("newValue equals current value {current}"));
    }
    element.set(property, new)
}

fn insert_sorted<T>(list: &mut Vec<T>, item: T, id: impl Fn(&T) -> &ElementId) {
    let at = list.partition_point(|x| id(x) < id(&item));
    list.insert(at, item);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Class(usize),
    Operation(usize, usize),
    Attribute(usize, usize),
    Enumeration(usize),
    Association(usize),
    Interaction(usize),
    Lifeline(usize, usize),
    Message(usize, usize),
}

impl Place {
    fn kind(self) -> ElementKind {
        match self {
            Place::Class(_) => ElementKind::Class,
            Place::Operation(..) => ElementKind::Operation,
            Place::Attribute(..) => ElementKind::Attribute,
            Place::Enumeration(_) => ElementKind::Enumeration,
            Place::Association(_) => ElementKind::Association,
            Place::Interaction(_) => ElementKind::Interaction,
            Place::Lifeline(..) => ElementKind::Lifeline,
            Place::Message(..) => ElementKind::Message,
        }
    }
}

fn find<T>(list: &[T], id: &ElementId, key: impl Fn(&T) -> &ElementId) -> Option<usize> {
    list.binary_search_by(|x| key(x).cmp(id)).ok()
}

fn locate(model: &Model, id: &ElementId) -> Option<Place> {
    if let Some(i) = find(&model.classes, id, |c| &c.id) {
        return Some(Place::Class(i));
    }
    if let Some(i) = find(&model.enumerations, id, |e| &e.id) {
        return Some(Place::Enumeration(i));
    }
    if let Some(i) = find(&model.associations, id, |a| &a.id) {
        return Some(Place::Association(i));
    }
    if let Some(i) = find(&model.interactions, id, |i| &i.id) {
        return Some(Place::Interaction(i));
    }
    for (ci, class) in model.classes.iter().enumerate() {
        if let Some(oi) = find(&class.operations, id, |o| &o.id) {
            return Some(Place::Operation(ci, oi));
        }
        if let Some(ai) = find(&class.attributes, id, |a| &a.id) {
            return Some(Place::Attribute(ci, ai));
        }
    }
    for (ii, interaction) in model.interactions.iter().enumerate() {
        if let Some(li) = find(&interaction.lifelines, id, |l| &l.id) {
            return Some(Place::Lifeline(ii, li));
        }
        if let Some(mi) = find(&interaction.messages, id, |m| &m.id) {
            return Some(Place::Message(ii, mi));
        }
    }
    None
}

enum ElementRef<'a> {
    Class(&'a Class),
    Operation(&'a Operation),
    Attribute(&'a Attribute),
    Enumeration(&'a Enumeration),
    Association(&'a Association),
    Interaction(&'a Interaction),
    Lifeline(&'a Lifeline),
    Message(&'a Message),
}

type PropertyChange = (ElementKind, &'static str, Value, Value);

impl<'a> ElementRef<'a> {
    fn id(&self) -> &'a ElementId {
        match *self {
            ElementRef::Class(e) => &e.id,
            ElementRef::Operation(e) => &e.id,
            ElementRef::Attribute(e) => &e.id,
            ElementRef::Enumeration(e) => &e.id,
            ElementRef::Association(e) => &e.id,
            ElementRef::Interaction(e) => &e.id,
            ElementRef::Lifeline(e) => &e.id,
            ElementRef::Message(e) => &e.id,
        }
    }

    /// The element without its children; those get events of their own.
    fn shell(&self) -> Element {
        match *self {
            ElementRef::Class(c) => Element::Class(Class { attributes: Vec::new(), operations: Vec::new(), ..c.clone() }),
            ElementRef::Interaction(i) => {
                Element::Interaction(Interaction { lifelines: Vec::new(), messages: Vec::new(), ..i.clone() })
            }
            ElementRef::Operation(e) => Element::Operation(e.clone()),
            ElementRef::Attribute(e) => Element::Attribute(e.clone()),
            ElementRef::Enumeration(e) => Element::Enumeration(e.clone()),
            ElementRef::Association(e) => Element::Association(e.clone()),
            ElementRef::Lifeline(e) => Element::Lifeline(e.clone()),
            ElementRef::Message(e) => Element::Message(e.clone()),
        }
    }

    fn property_changes(&self, after: &ElementRef<'_>) -> Vec<PropertyChange> {
        fn compare<T: Properties>(kind: ElementKind, a: &T, b: &T) -> Vec<PropertyChange> {
            let mut out = Vec::new();
            for &name in T::NAMES {
                let (x, y) = (a.get(name).expect("listed"), b.get(name).expect("listed"));
                if x != y {
                    let kind = if name == PARAMETER_LIST { ElementKind::ParameterList } else { kind };
                    out.push((kind, name, x, y));
                }
            }
            out
        }
        match (self, after) {
            (ElementRef::Class(a), ElementRef::Class(b)) => compare(ElementKind::Class, *a, *b),
            (ElementRef::Operation(a), ElementRef::Operation(b)) => compare(ElementKind::Operation, *a, *b),
            (ElementRef::Attribute(a), ElementRef::Attribute(b)) => compare(ElementKind::Attribute, *a, *b),
            (ElementRef::Enumeration(a), ElementRef::Enumeration(b)) => compare(ElementKind::Enumeration, *a, *b),
            (ElementRef::Association(a), ElementRef::Association(b)) => compare(ElementKind::Association, *a, *b),
            (ElementRef::Interaction(a), ElementRef::Interaction(b)) => compare(ElementKind::Interaction, *a, *b),
            (ElementRef::Lifeline(a), ElementRef::Lifeline(b)) => compare(ElementKind::Lifeline, *a, *b),
            (ElementRef::Message(a), ElementRef::Message(b)) => compare(ElementKind::Message, *a, *b),
            _ => unreachable!("callers match kinds first"),
        }
    }
}

struct Node<'a> {
    kind: ElementKind,
    parent: Option<&'a ElementId>,
    depth: u8,
    element: ElementRef<'a>,
}

/// Every element by id; the first occurrence of a duplicated id wins.
fn flatten(model: &Model) -> BTreeMap<&ElementId, Node<'_>> {
    fn put<'a>(out: &mut BTreeMap<&'a ElementId, Node<'a>>, kind: ElementKind, parent: Option<&'a ElementId>, element: ElementRef<'a>) {
        let depth = u8::from(parent.is_some());
        out.entry(element.id()).or_insert(Node { kind, parent, depth, element });
    }
    let mut out = BTreeMap::new();
    let mut put = |kind, parent, element| put(&mut out, kind, parent, element);
    for c in &model.classes {
        put(ElementKind::Class, None, ElementRef::Class(c));
        for o in &c.operations {
            put(ElementKind::Operation, Some(&c.id), ElementRef::Operation(o));
        }
        for a in &c.attributes {
            put(ElementKind::Attribute, Some(&c.id), ElementRef::Attribute(a));
        }
    }
    for e in &model.enumerations {
        put(ElementKind::Enumeration, None, ElementRef::Enumeration(e));
    }
    for a in &model.associations {
        put(ElementKind::Association, None, ElementRef::Association(a));
    }
    for i in &model.interactions {
        put(ElementKind::Interaction, None, ElementRef::Interaction(i));
        for l in &i.lifelines {
            put(ElementKind::Lifeline, Some(&i.id), ElementRef::Lifeline(l));
        }
        for m in &i.messages {
            put(ElementKind::Message, Some(&i.id), ElementRef::Message(m));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MessageSort, Visibility};

    fn op(id: &str, name: &str) -> Operation {
        Operation { id: id.into(), name: name.into(), visibility: Visibility::Public, parameters: vec![], return_type_name: None }
    }

    fn sample() -> Model {
        let mut m = Model::empty("m");
        m.classes.push(Class {
            id: "C1".into(),
            name: "Order".into(),
            is_abstract: false,
            superclass_ids: vec![],
            attributes: vec![],
            operations: vec![op("O1", "place"), op("O2", "cancel")],
        });
        m.interactions.push(Interaction {
            id: "I1".into(),
            name: "i".into(),
            lifelines: vec![Lifeline { id: "L1".into(), name: "o".into(), type_ref: Some("C1".into()), type_name: None }],
            messages: vec![Message {
                id: "M1".into(),
                name: "place".into(),
                sort: MessageSort::Sync,
                source_lifeline_id: "L1".into(),
                target_lifeline_id: "L1".into(),
                arguments: vec![],
            }],
        });
        m
    }

    fn fold(model: &Model, events: &[ChangeEvent]) -> Model {
        events.iter().fold(model.clone(), |m, e| apply(&m, e).unwrap())
    }

    #[test]
    fn identical_models_yield_nothing() {
        assert!(diff(&sample(), &sample()).unwrap().is_empty());
    }

    #[test]
    fn rename_is_one_property_change() {
        let before = sample();
        let mut after = sample();
        after.classes[0].operations[0].name = "submit".into();
        let events = diff(&before, &after).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].element_kind, ElementKind::Operation);
        assert_eq!(
            events[0].change,
            Change::PropertyChanged { property: "name".into(), old_value: "place".into(), new_value: "submit".into() }
        );
        assert_eq!(fold(&before, &events), after);
    }

    #[test]
    fn removing_class_removes_operations_first() {
        let before = sample();
        let mut after = sample();
        after.classes.clear();
        let events = diff(&before, &after).unwrap();
        let ids: Vec<_> = events.iter().map(|e| e.element_id.as_str()).collect();
        assert_eq!(ids, ["O1", "O2", "C1"]);
        assert!(events.iter().all(|e| e.kind() == ChangeKind::ElementRemoved));
        assert_eq!(fold(&before, &events), after);
    }

    #[test]
    fn additions_are_parents_first_with_shell_payloads() {
        let before = Model::empty("m");
        let after = sample();
        let events = diff(&before, &after).unwrap();
        let order: Vec<_> = events.iter().map(|e| e.element_id.as_str()).collect();
        assert_eq!(order, ["C1", "I1", "L1", "M1", "O1", "O2"]);
        match &events[0].change {
            Change::Added { parent_id: None, payload: Element::Class(c) } => assert!(c.operations.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(fold(&before, &events), after);
        let seqs: Vec<_> = events.iter().map(|e| e.seq).collect();
        assert_eq!(seqs, (1..=6).collect::<Vec<_>>());
    }

    #[test]
    fn move_is_remove_then_add() {
        let before = sample();
        let mut after = sample();
        let moved = after.classes[0].operations.remove(1);
        after.classes.push(Class {
            id: "C2".into(),
            name: "Other".into(),
            is_abstract: false,
            superclass_ids: vec![],
            attributes: vec![],
            operations: vec![moved],
        });
        let events = diff(&before, &after).unwrap();
        let kinds: Vec<_> = events.iter().map(|e| (e.kind(), e.element_id.as_str())).collect();
        assert_eq!(
            kinds,
            [
                (ChangeKind::ElementRemoved, "O2"),
                (ChangeKind::ElementAdded, "C2"),
                (ChangeKind::ElementAdded, "O2"),
            ]
        );
        assert_eq!(fold(&before, &events), after);
    }

    #[test]
    fn parameter_list_is_whole_value() {
        let before = sample();
        let mut after = sample();
        after.classes[0].operations[0].parameters.push(crate::model::Parameter {
            name: "x".into(),
            type_name: "int".into(),
            direction: Default::default(),
        });
        let events = diff(&before, &after).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].element_kind, ElementKind::ParameterList);
        assert_eq!(events[0].element_id.as_str(), "O1");
        assert_eq!(fold(&before, &events), after);
    }

    #[test]
    fn model_id_mismatch() {
        assert!(matches!(diff(&Model::empty("a"), &Model::empty("b")), Err(DiffError::ModelIdMismatch { .. })));
    }

    fn event(kind: ElementKind, id: &str, change: Change) -> ChangeEvent {
        ChangeEvent { seq: 7, model_id: "m".into(), revision: 1, element_kind: kind, element_id: id.into(), change }
    }

    #[test]
    fn stale_events_are_rejected_without_mutation() {
        let model = sample();
        let rename = |old: &str| {
            event(
                ElementKind::Operation,
                "O1",
                Change::PropertyChanged { property: "name".into(), old_value: old.into(), new_value: "x".into() },
            )
        };
        let err = apply(&model, &rename("wrong")).unwrap_err();
        assert_eq!(err.seq, 7);
        assert!(err.reason.contains("oldValue"));
        assert!(apply(&model, &rename("place")).is_ok());

        let absent = event(ElementKind::Class, "C9", Change::Removed);
        assert!(apply(&model, &absent).is_err());
        let wrong_kind = event(ElementKind::Message, "C1", Change::Removed);
        assert!(apply(&model, &wrong_kind).is_err());
        let dup = event(
            ElementKind::Operation,
            "O1",
            Change::Added { parent_id: Some("C1".into()), payload: Element::Operation(op("O1", "again")) },
        );
        assert!(apply(&model, &dup).is_err());
        let orphan = event(
            ElementKind::Operation,
            "O9",
            Change::Added { parent_id: Some("I1".into()), payload: Element::Operation(op("O9", "f")) },
        );
        assert!(apply(&model, &orphan).is_err());
        let noop = event(
            ElementKind::Operation,
            "O1",
            Change::PropertyChanged { property: "name".into(), old_value: "place".into(), new_value: "place".into() },
        );
        assert!(apply(&model, &noop).is_err());
        let mut in_place = model.clone();
        assert!(apply_in_place(&mut in_place, &noop).is_err());
        assert_eq!(in_place, model);
    }

    #[test]
    fn added_class_lands_in_id_order() {
        let model = sample();
        let class = Class {
            id: "C0".into(),
            name: "First".into(),
            is_abstract: false,
            superclass_ids: vec![],
            attributes: vec![],
            operations: vec![],
        };
        let added =
            apply(&model, &event(ElementKind::Class, "C0", Change::Added { parent_id: None, payload: Element::Class(class) }))
                .unwrap();
        assert_eq!(added.classes[0].id.as_str(), "C0");
        assert_eq!(added.revision, model.revision);
    }
}
