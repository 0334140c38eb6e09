use std::fmt::Write as _;

use serde::Serialize;

use super::{RuleId, Severity};
use crate::model::ElementKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleDescriptor {
    pub rule_id: RuleId,
    pub subject_kinds: &'static [ElementKind],
    pub severity: Severity,
    pub title: &'static str,
    pub description: &'static str,
    pub example: &'static str,
}

const MESSAGES: &[ElementKind] = &[ElementKind::Message];

static CATALOG: [RuleDescriptor; 7] = [
    RuleDescriptor {
        rule_id: RuleId::MsgUnnamed,
        subject_kinds: MESSAGES,
        severity: Severity::Warning,
        title: "Message without a name",
        description: "A synchronous or asynchronous message whose name is empty or only whitespace. \
                      Reply, create and delete messages are exempt.",
        example: "A sync message from `order` to `customer` with name \"\".",
    },
    RuleDescriptor {
        rule_id: RuleId::MsgUndefOp,
        subject_kinds: MESSAGES,
        severity: Severity::Error,
        title: "Undefined operation",
        description: "A named call message whose target lifeline resolves to a class that neither \
                      declares nor inherits an operation of that name. Not reported when the target \
                      lifeline is unresolved.",
        example: "Message `pay` sent to a lifeline typed `Order`, where `Order` has only `place` and `cancel`.",
    },
    RuleDescriptor {
        rule_id: RuleId::MsgParamMismatch,
        subject_kinds: MESSAGES,
        severity: Severity::Error,
        title: "Argument count mismatch",
        description: "A call message naming existing operations, none of which takes as many \
                      in/inout parameters as the message passes arguments. Overloads are resolved \
                      by arity only.",
        example: "Message `place()` with no arguments where the only `place` is `place(itemId: in)`.",
    },
    RuleDescriptor {
        rule_id: RuleId::MsgNoAssoc,
        subject_kinds: MESSAGES,
        severity: Severity::Warning,
        title: "Message without association",
        description: "A call message between lifelines of two different classes where no \
                      association joins the two classes or any of their superclasses. Self-messages \
                      are never reported.",
        example: "`customer` calls `Shipper` although no association links `Customer` and `Shipper`.",
    },
    RuleDescriptor {
        rule_id: RuleId::LifelineUndefType,
        subject_kinds: &[ElementKind::Lifeline],
        severity: Severity::Error,
        title: "Lifeline with undefined type",
        description: "A lifeline whose type cannot be resolved: no type at all, a type reference \
                      that is not a class, a type name no class carries, or a type name shared by \
                      several classes.",
        example: "Lifeline `clerk` with type name `Clerk` in a model without such a class.",
    },
    RuleDescriptor {
        rule_id: RuleId::MsgPrivateOp,
        subject_kinds: MESSAGES,
        severity: Severity::Warning,
        title: "Call to a non-public operation",
        description: "The nearest operation matching a call message is private and the sender's \
                      class differs from the target class, or it is protected and the sender's \
                      class is neither the target class nor one of its subclasses.",
        example: "`customer` calls `cancel` on `Order`, where `cancel` is private.",
    },
    RuleDescriptor {
        rule_id: RuleId::StructWellformed,
        subject_kinds: &[ElementKind::Association, ElementKind::Class, ElementKind::Message],
        severity: Severity::Error,
        title: "Structural defect",
        description: "Broken structure: duplicate ids, superclass references that are not classes, \
                      inheritance cycles, association ends that are not classes, and message \
                      endpoints that are not lifelines of the message's interaction.",
        example: "Association `A7` whose second end names a deleted class.",
    },
];

/// The seven rules, in stable catalog order.
pub fn catalog() -> &'static [RuleDescriptor] {
    &CATALOG
}

pub fn descriptor(rule: RuleId) -> &'static RuleDescriptor {
    CATALOG.iter().find(|d| d.rule_id == rule).expect("every rule has a descriptor")
}

/// Markdown reference with one section per rule.
pub fn reference_markdown() -> String {
    let mut out = String::from("# Rule reference\n\nGenerated from the rule catalog; `hv rules` prints the same text.\n");
    for d in catalog() {
        let kinds: Vec<&str> = d.subject_kinds.iter().map(|k| k.as_str()).collect();
        let _ = write!(
            out,
            "\n## {id}: {title}\n\n- Severity: {sev}\n- Subjects: {kinds}\n\n{desc}\n\nExample: {ex}\n",
            id = d.rule_id,
            title = d.title,
            sev = d.severity,
            kinds = kinds.join(", "),
            desc = d.description,
            ex = d.example,
        );
    }
    out
}
