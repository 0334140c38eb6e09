use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use super::snapshot::{DepKey, ReadSet, Snapshot};
use super::{Class, ElementId, ElementKind, Interaction, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum IssueKind {
    DuplicateId,
    DanglingSuperclass,
    InheritanceCycle,
    DanglingAssociationEnd,
    DanglingMessageEndpoint,
}

impl IssueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueKind::DuplicateId => "duplicateId",
            IssueKind::DanglingSuperclass => "danglingSuperclass",
            IssueKind::InheritanceCycle => "inheritanceCycle",
            IssueKind::DanglingAssociationEnd => "danglingAssociationEnd",
            IssueKind::DanglingMessageEndpoint => "danglingMessageEndpoint",
        }
    }
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructuralIssue {
    pub kind: IssueKind,
    pub element_id: ElementId,
    pub detail: String,
    /// Existing elements implicated by the issue (never absent ids).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<ElementId>,
}

impl Snapshot {
    /// Reports every structural defect of the model. Never fails; the order
    /// is by element id, then kind, then detail.
    pub fn validate_wellformed(&self) -> Vec<StructuralIssue> {
        let mut issues: Vec<StructuralIssue> = Vec::new();
        let mut counts: HashMap<&ElementId, usize> = HashMap::new();
        for id in self.all_ids() {
            *counts.entry(id).or_default() += 1;
        }
        for id in self.duplicates() {
            issues.push(duplicate_issue(id, counts.get(id).copied().unwrap_or(2)));
        }

        let mut scratch = ReadSet::new();
        for class in &self.model().classes {
            if self.class(class.id.as_str()).is_some_and(|c| std::ptr::eq(c, class)) {
                issues.extend(self.class_issues(class, &mut scratch));
            }
        }
        for assoc in &self.model().associations {
            if self.association(assoc.id.as_str()).is_some_and(|a| std::ptr::eq(a, assoc)) {
                issues.extend(self.association_issues(assoc.id.as_str(), &mut scratch));
            }
        }
        for (interaction, message) in self.messages() {
            if self.message(message.id.as_str()).is_some_and(|(_, m)| std::ptr::eq(m, message)) {
                issues.extend(self.message_issues(interaction, message, &mut scratch));
            }
        }
        issues.sort_by(|a, b| {
            (&a.element_id, a.kind, &a.detail).cmp(&(&b.element_id, b.kind, &b.detail))
        });
        issues
    }

    /// Structural issues whose subject is `id` (a class, association or
    /// message), including a duplicate-id finding.
    pub fn structural_issues_tracked(&self, id: &str, reads: &mut ReadSet) -> Vec<StructuralIssue> {
        reads.insert(DepKey::Element(id.into()));
        let mut issues = Vec::new();
        if let Some(dup) = self.duplicates().get(id) {
            let count = self.all_ids().filter(|other| *other == dup).count();
            issues.push(duplicate_issue(dup, count));
        }
        match self.kind_of(id) {
            Some(ElementKind::Class) => {
                let class = self.class(id).expect("indexed class");
                issues.extend(self.class_issues(class, reads));
            }
            Some(ElementKind::Association) => issues.extend(self.association_issues(id, reads)),
            Some(ElementKind::Message) => {
                let (interaction, message) = self.message(id).expect("indexed message");
                issues.extend(self.message_issues(interaction, message, reads));
            }
            _ => {}
        }
        issues
    }

    fn all_ids(&self) -> impl Iterator<Item = &ElementId> {
        let m = self.model();
        m.classes
            .iter()
            .flat_map(|c| {
                std::iter::once(&c.id)
                    .chain(c.attributes.iter().map(|a| &a.id))
                    .chain(c.operations.iter().map(|o| &o.id))
            })
            .chain(m.enumerations.iter().map(|e| &e.id))
            .chain(m.associations.iter().map(|a| &a.id))
            .chain(m.interactions.iter().flat_map(|i| {
                std::iter::once(&i.id)
                    .chain(i.lifelines.iter().map(|l| &l.id))
                    .chain(i.messages.iter().map(|m| &m.id))
            }))
    }

    fn class_issues(&self, class: &Class, reads: &mut ReadSet) -> Vec<StructuralIssue> {
        reads.insert(DepKey::Element(class.id.clone()));
        let mut issues = Vec::new();
        for sup in &class.superclass_ids {
            reads.insert(DepKey::Element(sup.clone()));
            if self.class(sup.as_str()).is_none() {
                let what = if self.contains(sup.as_str()) { "is not a class" } else { "does not exist" };
                issues.push(StructuralIssue {
                    kind: IssueKind::DanglingSuperclass,
                    element_id: class.id.clone(),
                    detail: format!("superclass '{sup}' of class '{}' {what}", class.name),
                    related: vec![],
                });
            }
        }
        if let Some(path) = self.inheritance_cycle(class, reads) {
            let rendered: Vec<&str> = std::iter::once(class.id.as_str())
                .chain(path.iter().map(|id| id.as_str()))
                .chain(std::iter::once(class.id.as_str()))
                .collect();
            issues.push(StructuralIssue {
                kind: IssueKind::InheritanceCycle,
                element_id: class.id.clone(),
                detail: format!(
                    "class '{}' inherits from itself: {}",
                    class.name,
                    rendered.join(" -> ")
                ),
                related: path,
            });
        }
        issues
    }

    /// Breadth-first search from the superclasses of `class` back to itself.
    /// Returns the intermediate classes of the shortest cycle found.
    fn inheritance_cycle(&self, class: &Class, reads: &mut ReadSet) -> Option<Vec<ElementId>> {
        let mut parent: HashMap<&ElementId, Option<&ElementId>> = HashMap::new();
        let mut queue: VecDeque<&ElementId> = VecDeque::new();
        for sup in &class.superclass_ids {
            if !parent.contains_key(sup) {
                parent.insert(sup, None);
                queue.push_back(sup);
            }
        }
        while let Some(id) = queue.pop_front() {
            reads.insert(DepKey::Element(id.clone()));
            if *id == class.id {
                let mut path = Vec::new();
                let mut cursor = parent.get(id).copied().flatten();
                while let Some(step) = cursor {
                    path.push(step.clone());
                    cursor = parent.get(step).copied().flatten();
                }
                path.reverse();
                return Some(path);
            }
            let Some(current) = self.class(id.as_str()) else { continue };
            for sup in &current.superclass_ids {
                if !parent.contains_key(sup) {
                    parent.insert(sup, Some(id));
                    queue.push_back(sup);
                }
            }
        }
        None
    }

    fn association_issues(&self, id: &str, reads: &mut ReadSet) -> Vec<StructuralIssue> {
        let Some(assoc) = self.association(id) else { return Vec::new() };
        reads.insert(DepKey::Element(assoc.id.clone()));
        let mut issues = Vec::new();
        for (label, end) in [("endA", &assoc.end_a), ("endB", &assoc.end_b)] {
            reads.insert(DepKey::Element(end.class_id.clone()));
            if self.class(end.class_id.as_str()).is_none() {
                issues.push(StructuralIssue {
                    kind: IssueKind::DanglingAssociationEnd,
                    element_id: assoc.id.clone(),
                    detail: format!("association {label} references '{}', which is not a class", end.class_id),
                    related: vec![],
                });
            }
        }
        issues
    }

    fn message_issues(&self, interaction: &Interaction, message: &Message, reads: &mut ReadSet) -> Vec<StructuralIssue> {
        reads.insert(DepKey::Element(message.id.clone()));
        let mut issues = Vec::new();
        for (label, lifeline_id) in [("source", &message.source_lifeline_id), ("target", &message.target_lifeline_id)] {
            if self.lifeline_in_tracked(interaction, lifeline_id, reads).is_none() {
                let related = if self.contains(lifeline_id.as_str()) { vec![lifeline_id.clone()] } else { vec![] };
                issues.push(StructuralIssue {
                    kind: IssueKind::DanglingMessageEndpoint,
                    element_id: message.id.clone(),
                    detail: format!(
                        "{label} '{lifeline_id}' is not a lifeline of interaction '{}'",
                        interaction.id
                    ),
                    related,
                });
            }
        }
        issues
    }
}

fn duplicate_issue(id: &ElementId, count: usize) -> StructuralIssue {
    StructuralIssue {
        kind: IssueKind::DuplicateId,
        element_id: id.clone(),
        detail: format!("id '{id}' is used by {count} elements"),
        related: vec![],
    }
}
