use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use super::{Association, Attribute, Class, Enumeration, ElementId, ElementKind, Interaction, Lifeline, Message, Model, Operation};

/// A unit of model state an evaluation can depend on.
///
/// `Element` covers the element's own scalar properties and its existence
/// (absent ids are recorded too, so a later addition invalidates).
/// `Members` covers the operation/attribute lists of a class, `ClassName` the
/// set of classes carrying a name, and `AssocEnds` the set of associations
/// with an end at a class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepKey {
    Element(ElementId),
    Members(ElementId),
    ClassName(String),
    AssocEnds(ElementId),
}

impl DepKey {
    pub fn element_id(&self) -> Option<&ElementId> {
        match self {
            DepKey::Element(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for DepKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepKey::Element(id) => write!(f, "{id}"),
            DepKey::Members(id) => write!(f, "members({id})"),
            DepKey::ClassName(name) => write!(f, "class-name({name})"),
            DepKey::AssocEnds(id) => write!(f, "assoc-ends({id})"),
        }
    }
}

pub type ReadSet = BTreeSet<DepKey>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("no {expected} with id '{id}'")]
    Unknown { id: ElementId, expected: ElementKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnresolvedReason {
    NoType,
    DanglingRef,
    UnknownName,
    AmbiguousName,
}

impl UnresolvedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnresolvedReason::NoType => "noType",
            UnresolvedReason::DanglingRef => "danglingRef",
            UnresolvedReason::UnknownName => "unknownName",
            UnresolvedReason::AmbiguousName => "ambiguousName",
        }
    }
}

impl fmt::Display for UnresolvedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LifelineResolution {
    Resolved(ElementId),
    Unresolved(UnresolvedReason),
}

impl LifelineResolution {
    pub fn class_id(&self) -> Option<&ElementId> {
        match self {
            LifelineResolution::Resolved(id) => Some(id),
            LifelineResolution::Unresolved(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Loc {
    Class(usize),
    Operation(usize, usize),
    Attribute(usize, usize),
    Enumeration(usize),
    Association(usize),
    Interaction(usize),
    Lifeline(usize, usize),
    Message(usize, usize),
}

impl Loc {
    fn kind(self) -> ElementKind {
        match self {
            Loc::Class(_) => ElementKind::Class,
            Loc::Operation(..) => ElementKind::Operation,
            Loc::Attribute(..) => ElementKind::Attribute,
            Loc::Enumeration(_) => ElementKind::Enumeration,
            Loc::Association(_) => ElementKind::Association,
            Loc::Interaction(_) => ElementKind::Interaction,
            Loc::Lifeline(..) => ElementKind::Lifeline,
            Loc::Message(..) => ElementKind::Message,
        }
    }
}

/// An immutable, indexed model. Every query is a pure function of the
/// snapshot; the `*_tracked` variants additionally record what they read.
#[derive(Debug, Clone)]
pub struct Snapshot {
    model: Model,
    ids: HashMap<ElementId, Loc>,
    classes_by_name: HashMap<String, Vec<usize>>,
    assocs_by_class: HashMap<ElementId, Vec<usize>>,
    duplicates: BTreeSet<ElementId>,
}

impl PartialEq for Snapshot {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
    }
}

impl Snapshot {
    pub fn new(mut model: Model) -> Self {
        model.normalize();
        let mut ids = HashMap::new();
        let mut duplicates = BTreeSet::new();
        let mut classes_by_name: HashMap<String, Vec<usize>> = HashMap::new();
        let mut assocs_by_class: HashMap<ElementId, Vec<usize>> = HashMap::new();

        let mut insert = |id: &ElementId, loc: Loc| {
            if ids.contains_key(id) {
                duplicates.insert(id.clone());
            } else {
                ids.insert(id.clone(), loc);
            }
        };

        for (ci, class) in model.classes.iter().enumerate() {
            insert(&class.id, Loc::Class(ci));
            classes_by_name.entry(class.name.clone()).or_default().push(ci);
            for (ai, attr) in class.attributes.iter().enumerate() {
                insert(&attr.id, Loc::Attribute(ci, ai));
            }
            for (oi, op) in class.operations.iter().enumerate() {
                insert(&op.id, Loc::Operation(ci, oi));
            }
        }
        for (ei, e) in model.enumerations.iter().enumerate() {
            insert(&e.id, Loc::Enumeration(ei));
        }
        for (ai, assoc) in model.associations.iter().enumerate() {
            insert(&assoc.id, Loc::Association(ai));
            assocs_by_class.entry(assoc.end_a.class_id.clone()).or_default().push(ai);
            if assoc.end_b.class_id != assoc.end_a.class_id {
                assocs_by_class.entry(assoc.end_b.class_id.clone()).or_default().push(ai);
            }
        }
        for (ii, interaction) in model.interactions.iter().enumerate() {
            insert(&interaction.id, Loc::Interaction(ii));
            for (li, l) in interaction.lifelines.iter().enumerate() {
                insert(&l.id, Loc::Lifeline(ii, li));
            }
            for (mi, m) in interaction.messages.iter().enumerate() {
                insert(&m.id, Loc::Message(ii, mi));
            }
        }

        Snapshot { model, ids, classes_by_name, assocs_by_class, duplicates }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn revision(&self) -> u64 {
        self.model.revision
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains_key(id)
    }

    pub fn kind_of(&self, id: &str) -> Option<ElementKind> {
        self.ids.get(id).map(|loc| loc.kind())
    }

    /// Ids used by more than one element.
    pub fn duplicates(&self) -> &BTreeSet<ElementId> {
        &self.duplicates
    }

    pub fn class(&self, id: &str) -> Option<&Class> {
        match self.ids.get(id) {
            Some(Loc::Class(ci)) => Some(&self.model.classes[*ci]),
            _ => None,
        }
    }

    pub fn operation(&self, id: &str) -> Option<(&Class, &Operation)> {
        match self.ids.get(id) {
            Some(Loc::Operation(ci, oi)) => {
                let class = &self.model.classes[*ci];
                Some((class, &class.operations[*oi]))
            }
            _ => None,
        }
    }

    pub fn enumeration(&self, id: &str) -> Option<&Enumeration> {
        match self.ids.get(id) {
            Some(Loc::Enumeration(ei)) => Some(&self.model.enumerations[*ei]),
            _ => None,
        }
    }

    pub fn attribute(&self, id: &str) -> Option<(&Class, &Attribute)> {
        match self.ids.get(id) {
            Some(Loc::Attribute(ci, ai)) => {
                let class = &self.model.classes[*ci];
                Some((class, &class.attributes[*ai]))
            }
            _ => None,
        }
    }

    pub fn association(&self, id: &str) -> Option<&Association> {
        match self.ids.get(id) {
            Some(Loc::Association(ai)) => Some(&self.model.associations[*ai]),
            _ => None,
        }
    }

    pub fn interaction(&self, id: &str) -> Option<&Interaction> {
        match self.ids.get(id) {
            Some(Loc::Interaction(ii)) => Some(&self.model.interactions[*ii]),
            _ => None,
        }
    }

    pub fn lifeline(&self, id: &str) -> Option<(&Interaction, &Lifeline)> {
        match self.ids.get(id) {
            Some(Loc::Lifeline(ii, li)) => {
                let interaction = &self.model.interactions[*ii];
                Some((interaction, &interaction.lifelines[*li]))
            }
            _ => None,
        }
    }

    pub fn message(&self, id: &str) -> Option<(&Interaction, &Message)> {
        match self.ids.get(id) {
            Some(Loc::Message(ii, mi)) => {
                let interaction = &self.model.interactions[*ii];
                Some((interaction, &interaction.messages[*mi]))
            }
            _ => None,
        }
    }

    /// Id of the element that contains `id`, for operations, attributes,
    /// lifelines and messages.
    pub fn parent_of(&self, id: &str) -> Option<&ElementId> {
        match self.ids.get(id)? {
            Loc::Operation(ci, _) | Loc::Attribute(ci, _) => Some(&self.model.classes[*ci].id),
            Loc::Lifeline(ii, _) | Loc::Message(ii, _) => Some(&self.model.interactions[*ii].id),
            _ => None,
        }
    }

    pub fn classes_named<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Class> + 'a {
        self.classes_by_name
            .get(name)
            .into_iter()
            .flatten()
            .map(move |ci| &self.model.classes[*ci])
    }

    pub fn associations_at<'a>(&'a self, class_id: &str) -> impl Iterator<Item = &'a Association> + 'a {
        self.assocs_by_class
            .get(class_id)
            .into_iter()
            .flatten()
            .map(move |ai| &self.model.associations[*ai])
    }

    pub fn lifelines(&self) -> impl Iterator<Item = (&Interaction, &Lifeline)> {
        self.model
            .interactions
            .iter()
            .flat_map(|i| i.lifelines.iter().map(move |l| (i, l)))
    }

    pub fn messages(&self) -> impl Iterator<Item = (&Interaction, &Message)> {
        self.model
            .interactions
            .iter()
            .flat_map(|i| i.messages.iter().map(move |m| (i, m)))
    }

    /// Looks up a lifeline belonging to `interaction`. Lifelines of other
    /// interactions are not visible.
    pub fn lifeline_in_tracked<'a>(
        &'a self,
        interaction: &Interaction,
        lifeline_id: &ElementId,
        reads: &mut ReadSet,
    ) -> Option<&'a Lifeline> {
        reads.insert(DepKey::Element(lifeline_id.clone()));
        match self.lifeline(lifeline_id.as_str()) {
            Some((owner, lifeline)) if owner.id == interaction.id => Some(lifeline),
            _ => None,
        }
    }

    pub fn resolve_lifeline_type(&self, lifeline_id: &str) -> Result<LifelineResolution, LookupError> {
        let (_, lifeline) = self.lifeline(lifeline_id).ok_or_else(|| LookupError::Unknown {
            id: lifeline_id.into(),
            expected: ElementKind::Lifeline,
        })?;
        Ok(self.resolve_lifeline_tracked(lifeline, &mut ReadSet::new()))
    }

    /// Resolves the class a lifeline stands for: an existing `typeRef` wins,
    /// then a unique case-sensitive `typeName` match. A dangling `typeRef`
    /// is reported as such even when the name lookup also fails.
    pub fn resolve_lifeline_tracked(&self, lifeline: &Lifeline, reads: &mut ReadSet) -> LifelineResolution {
        reads.insert(DepKey::Element(lifeline.id.clone()));
        if let Some(type_ref) = &lifeline.type_ref {
            reads.insert(DepKey::Element(type_ref.clone()));
            if self.class(type_ref.as_str()).is_some() {
                return LifelineResolution::Resolved(type_ref.clone());
            }
        }
        let by_name = lifeline.type_name.as_ref().map(|name| {
            reads.insert(DepKey::ClassName(name.clone()));
            let matches: Vec<&Class> = self.classes_named(name).collect();
            for class in &matches {
                reads.insert(DepKey::Element(class.id.clone()));
            }
            match matches.as_slice() {
                [only] => Ok(only.id.clone()),
                [] => Err(UnresolvedReason::UnknownName),
                _ => Err(UnresolvedReason::AmbiguousName),
            }
        });
        match by_name {
            Some(Ok(id)) => LifelineResolution::Resolved(id),
            _ if lifeline.type_ref.is_some() => LifelineResolution::Unresolved(UnresolvedReason::DanglingRef),
            Some(Err(reason)) => LifelineResolution::Unresolved(reason),
            None => LifelineResolution::Unresolved(UnresolvedReason::NoType),
        }
    }

    /// The class followed by its transitive superclasses, breadth-first in
    /// declaration order, each visited once. Superclass ids that are not
    /// classes are recorded as read and skipped.
    pub fn ancestry_tracked<'a>(&'a self, class: &'a Class, reads: &mut ReadSet) -> Vec<&'a Class> {
        let mut out = Vec::new();
        let mut visited: HashSet<&str> = HashSet::new();
        let mut queue: VecDeque<&'a Class> = VecDeque::new();
        visited.insert(class.id.as_str());
        reads.insert(DepKey::Element(class.id.clone()));
        queue.push_back(class);
        while let Some(current) = queue.pop_front() {
            out.push(current);
            for sup in &current.superclass_ids {
                if !visited.insert(sup.as_str()) {
                    continue;
                }
                reads.insert(DepKey::Element(sup.clone()));
                if let Some(parent) = self.class(sup.as_str()) {
                    queue.push_back(parent);
                }
            }
        }
        out
    }

    pub fn operations_of(
        &self,
        class_id: &str,
        include_inherited: bool,
    ) -> Result<Vec<(ElementId, &Operation)>, LookupError> {
        let class = self.class(class_id).ok_or_else(|| LookupError::Unknown {
            id: class_id.into(),
            expected: ElementKind::Class,
        })?;
        Ok(self
            .operations_of_tracked(class, include_inherited, &mut ReadSet::new())
            .into_iter()
            .map(|(owner, op)| (owner.id.clone(), op))
            .collect())
    }

    /// Operations visible on `class`, nearest owner first.
    pub fn operations_of_tracked<'a>(
        &'a self,
        class: &'a Class,
        include_inherited: bool,
        reads: &mut ReadSet,
    ) -> Vec<(&'a Class, &'a Operation)> {
        let owners = if include_inherited {
            self.ancestry_tracked(class, reads)
        } else {
            reads.insert(DepKey::Element(class.id.clone()));
            vec![class]
        };
        let mut out = Vec::new();
        for owner in owners {
            reads.insert(DepKey::Members(owner.id.clone()));
            out.extend(owner.operations.iter().map(|op| (owner, op)));
        }
        out
    }

    pub fn associated(&self, class_a: &str, class_b: &str) -> Result<bool, LookupError> {
        let a = self.class(class_a).ok_or_else(|| LookupError::Unknown {
            id: class_a.into(),
            expected: ElementKind::Class,
        })?;
        let b = self.class(class_b).ok_or_else(|| LookupError::Unknown {
            id: class_b.into(),
            expected: ElementKind::Class,
        })?;
        Ok(self.associated_tracked(a, b, &mut ReadSet::new()))
    }

    /// True when some association joins the ancestry of `a` with the ancestry
    /// of `b` (in either end order), or when `a` and `b` are the same class.
    /// Navigability is not considered.
    pub fn associated_tracked(&self, a: &Class, b: &Class, reads: &mut ReadSet) -> bool {
        if a.id == b.id {
            reads.insert(DepKey::Element(a.id.clone()));
            return true;
        }
        let side_a: Vec<&Class> = self.ancestry_tracked(a, reads);
        let side_b: Vec<&Class> = self.ancestry_tracked(b, reads);
        let ids_a: HashSet<&str> = side_a.iter().map(|c| c.id.as_str()).collect();
        let ids_b: HashSet<&str> = side_b.iter().map(|c| c.id.as_str()).collect();
        for class in side_a.iter().chain(side_b.iter()) {
            reads.insert(DepKey::AssocEnds(class.id.clone()));
            for assoc in self.associations_at(class.id.as_str()) {
                reads.insert(DepKey::Element(assoc.id.clone()));
                let ea = assoc.end_a.class_id.as_str();
                let eb = assoc.end_b.class_id.as_str();
                if (ids_a.contains(ea) && ids_b.contains(eb)) || (ids_a.contains(eb) && ids_b.contains(ea)) {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AssociationEnd, Visibility};

    fn class(id: &str, name: &str, supers: &[&str], ops: &[(&str, &str)]) -> Class {
        Class {
            id: id.into(),
            name: name.into(),
            is_abstract: false,
            superclass_ids: supers.iter().map(|s| ElementId::from(*s)).collect(),
            attributes: vec![],
            operations: ops
                .iter()
                .map(|(oid, name)| Operation {
                    id: (*oid).into(),
                    name: (*name).into(),
                    visibility: Visibility::Public,
                    parameters: vec![],
                    return_type_name: None,
                })
                .collect(),
        }
    }

    fn lifeline(id: &str, type_ref: Option<&str>, type_name: Option<&str>) -> Lifeline {
        Lifeline {
            id: id.into(),
            name: id.to_lowercase(),
            type_ref: type_ref.map(ElementId::from),
            type_name: type_name.map(str::to_owned),
        }
    }

    fn snapshot_with(classes: Vec<Class>, lifelines: Vec<Lifeline>) -> Snapshot {
        let mut m = Model::empty("m");
        m.classes = classes;
        m.interactions.push(Interaction { id: "I1".into(), name: "i".into(), lifelines, messages: vec![] });
        Snapshot::new(m)
    }

    #[test]
    fn lifeline_resolution_cases() {
        let s = snapshot_with(
            vec![
                class("C1", "Order", &[], &[]),
                class("C2", "Customer", &[], &[]),
                class("D1", "Dup", &[], &[]),
                class("D2", "Dup", &[], &[]),
            ],
            vec![
                lifeline("L1", Some("C2"), None),
                lifeline("L2", None, Some("Ghost")),
                lifeline("L3", None, Some("Dup")),
                lifeline("L4", None, None),
                lifeline("L5", Some("C9"), None),
                lifeline("L6", Some("C9"), Some("Order")),
                lifeline("L7", None, Some("order")),
            ],
        );
        use LifelineResolution::*;
        use UnresolvedReason::*;
        assert_eq!(s.resolve_lifeline_type("L1").unwrap(), Resolved("C2".into()));
        assert_eq!(s.resolve_lifeline_type("L2").unwrap(), Unresolved(UnknownName));
        assert_eq!(s.resolve_lifeline_type("L3").unwrap(), Unresolved(AmbiguousName));
        assert_eq!(s.resolve_lifeline_type("L4").unwrap(), Unresolved(NoType));
        assert_eq!(s.resolve_lifeline_type("L5").unwrap(), Unresolved(DanglingRef));
        assert_eq!(s.resolve_lifeline_type("L6").unwrap(), Resolved("C1".into()));
        // case-sensitive
        assert_eq!(s.resolve_lifeline_type("L7").unwrap(), Unresolved(UnknownName));
        assert!(matches!(s.resolve_lifeline_type("nope"), Err(LookupError::Unknown { .. })));
    }

    #[test]
    fn operations_of_orders_nearest_first() {
        let s = snapshot_with(
            vec![
                class("A", "Base", &[], &[("OA1", "notify")]),
                class("B", "Mid", &["A"], &[("OB1", "b")]),
                class("C", "Other", &[], &[("OC1", "c")]),
                class("D", "Leaf", &["B", "C"], &[("OD1", "place"), ("OD2", "cancel")]),
            ],
            vec![],
        );
        let own: Vec<_> = s.operations_of("D", false).unwrap().into_iter().map(|(_, o)| o.name.clone()).collect();
        assert_eq!(own, ["place", "cancel"]);
        let all: Vec<_> = s.operations_of("D", true).unwrap().into_iter().map(|(_, o)| o.name.clone()).collect();
        assert_eq!(all, ["place", "cancel", "b", "c", "notify"]);
        assert!(s.operations_of("missing", true).is_err());
    }

    #[test]
    fn operations_of_terminates_on_cycles() {
        let s = snapshot_with(
            vec![class("A", "A", &["B"], &[("OA", "a")]), class("B", "B", &["A"], &[("OB", "b")])],
            vec![],
        );
        let all = s.operations_of("A", true).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn associated_follows_ancestry_and_is_symmetric() {
        let mut m = Model::empty("m");
        m.classes = vec![
            class("C1", "Order", &[], &[]),
            class("C2", "Customer", &[], &[]),
            class("C3", "PremiumCustomer", &["C2"], &[]),
            class("C4", "Shipper", &[], &[]),
        ];
        m.associations.push(Association {
            id: "A1".into(),
            name: None,
            end_a: AssociationEnd::new("C2"),
            end_b: AssociationEnd::new("C1"),
        });
        let s = Snapshot::new(m);
        assert!(s.associated("C2", "C1").unwrap());
        assert!(s.associated("C1", "C2").unwrap());
        assert!(s.associated("C1", "C1").unwrap());
        assert!(s.associated("C3", "C1").unwrap());
        assert!(s.associated("C1", "C3").unwrap());
        assert!(!s.associated("C2", "C4").unwrap());
        assert!(!s.associated("C4", "C2").unwrap());
    }

    #[test]
    fn tracked_reads_include_absent_ids() {
        let s = snapshot_with(vec![class("A", "A", &["Z"], &[])], vec![]);
        let mut reads = ReadSet::new();
        let a = s.class("A").unwrap();
        s.operations_of_tracked(a, true, &mut reads);
        assert!(reads.contains(&DepKey::Element("Z".into())));
        assert!(reads.contains(&DepKey::Members("A".into())));
    }
}
