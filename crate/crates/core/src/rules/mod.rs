//! The consistency-rule catalog.
//!
//! Every check is a pure function of a [`Snapshot`] and a subject id. Besides
//! its diagnostics it returns the set of model state it looked at, which the
//! engine inverts into its dependency index.

mod catalog;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Class, DepKey, ElementId, ElementKind, Interaction, LifelineResolution, LookupError, Message, ReadSet, Snapshot,
    Visibility,
};

pub use catalog::{catalog, descriptor, reference_markdown, RuleDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::Error, Severity::Warning, Severity::Info];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Severity::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| UnknownName(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown name '{0}'")]
pub struct UnknownName(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleId {
    #[serde(rename = "MSG-UNNAMED")]
    MsgUnnamed,
    #[serde(rename = "MSG-UNDEF-OP")]
    MsgUndefOp,
    #[serde(rename = "MSG-PARAM-MISMATCH")]
    MsgParamMismatch,
    #[serde(rename = "MSG-NO-ASSOC")]
    MsgNoAssoc,
    #[serde(rename = "LIFELINE-UNDEF-TYPE")]
    LifelineUndefType,
    #[serde(rename = "MSG-PRIVATE-OP")]
    MsgPrivateOp,
    #[serde(rename = "STRUCT-WELLFORMED")]
    StructWellformed,
}

impl RuleId {
    /// Catalog order.
    pub const ALL: [RuleId; 7] = [
        RuleId::MsgUnnamed,
        RuleId::MsgUndefOp,
        RuleId::MsgParamMismatch,
        RuleId::MsgNoAssoc,
        RuleId::LifelineUndefType,
        RuleId::MsgPrivateOp,
        RuleId::StructWellformed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::MsgUnnamed => "MSG-UNNAMED",
            RuleId::MsgUndefOp => "MSG-UNDEF-OP",
            RuleId::MsgParamMismatch => "MSG-PARAM-MISMATCH",
            RuleId::MsgNoAssoc => "MSG-NO-ASSOC",
            RuleId::LifelineUndefType => "LIFELINE-UNDEF-TYPE",
            RuleId::MsgPrivateOp => "MSG-PRIVATE-OP",
            RuleId::StructWellformed => "STRUCT-WELLFORMED",
        }
    }

    pub fn severity(self) -> Severity {
        descriptor(self).severity
    }

    pub fn subject_kinds(self) -> &'static [ElementKind] {
        descriptor(self).subject_kinds
    }
}

// Diagnostics sort by rule id text, so the ordering follows the string.
impl Ord for RuleId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for RuleId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| UnknownName(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub rule_id: RuleId,
    pub severity: Severity,
    pub message: String,
    pub element_id: ElementId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_id: Option<ElementId>,
    #[serde(default)]
    pub related_element_ids: Vec<ElementId>,
    pub model_revision: u64,
}

impl Diagnostic {
    /// Sort key: rule id, subject, message.
    pub fn order_key(&self) -> (RuleId, &ElementId, &str) {
        (self.rule_id, &self.element_id, &self.message)
    }

    /// Equality disregarding the revision stamp.
    pub fn same_finding(&self, other: &Diagnostic) -> bool {
        self.rule_id == other.rule_id
            && self.element_id == other.element_id
            && self.message == other.message
            && self.severity == other.severity
            && self.interaction_id == other.interaction_id
            && self.related_element_ids == other.related_element_ids
    }
}

/// Sorts by (ruleId, elementId, message), then the remaining fields so the
/// order is total.
pub fn sort_diagnostics(list: &mut [Diagnostic]) {
    list.sort_by(|a, b| {
        a.order_key()
            .cmp(&b.order_key())
            .then_with(|| a.interaction_id.cmp(&b.interaction_id))
            .then_with(|| a.related_element_ids.cmp(&b.related_element_ids))
            .then_with(|| a.model_revision.cmp(&b.model_revision))
    });
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvaluationResult {
    pub diagnostics: Vec<Diagnostic>,
    pub read_set: ReadSet,
}

impl EvaluationResult {
    /// Element ids among the read-set entries.
    pub fn read_ids(&self) -> impl Iterator<Item = &ElementId> {
        self.read_set.iter().filter_map(DepKey::element_id)
    }
}

/// Evaluates `rule` on `subject`. The subject must be an element of one of
/// the rule's subject kinds.
pub fn evaluate(rule: RuleId, snapshot: &Snapshot, subject: &str) -> Result<EvaluationResult, LookupError> {
    match rule {
        RuleId::MsgUnnamed => check_msg_unnamed(snapshot, subject),
        RuleId::MsgUndefOp => check_msg_undef_op(snapshot, subject),
        RuleId::MsgParamMismatch => check_msg_param_mismatch(snapshot, subject),
        RuleId::MsgNoAssoc => check_msg_no_assoc(snapshot, subject),
        RuleId::LifelineUndefType => check_lifeline_type(snapshot, subject),
        RuleId::MsgPrivateOp => check_private_call(snapshot, subject),
        RuleId::StructWellformed => check_structure(snapshot, subject),
    }
}

/// Subjects of `rule` in `snapshot`, sorted by id, each once.
pub fn subjects_of(rule: RuleId, snapshot: &Snapshot) -> Vec<ElementId> {
    let model = snapshot.model();
    let mut out: Vec<ElementId> = Vec::new();
    for kind in rule.subject_kinds() {
        match kind {
            ElementKind::Message => out.extend(snapshot.messages().map(|(_, m)| m.id.clone())),
            ElementKind::Lifeline => out.extend(snapshot.lifelines().map(|(_, l)| l.id.clone())),
            ElementKind::Class => out.extend(model.classes.iter().map(|c| c.id.clone())),
            ElementKind::Association => out.extend(model.associations.iter().map(|a| a.id.clone())),
            other => unreachable!("no rule has {other} subjects"),
        }
    }
    out.sort();
    out.dedup();
    out
}

/// True when `id` is currently a subject of `rule`.
pub fn is_subject(rule: RuleId, snapshot: &Snapshot, id: &str) -> bool {
    snapshot.kind_of(id).is_some_and(|kind| rule.subject_kinds().contains(&kind))
}

struct Ctx<'a> {
    snapshot: &'a Snapshot,
    rule: RuleId,
    reads: ReadSet,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Ctx<'a> {
    fn new(snapshot: &'a Snapshot, rule: RuleId, subject: &str) -> Self {
        let mut reads = ReadSet::new();
        reads.insert(DepKey::Element(subject.into()));
        Ctx { snapshot, rule, reads, diagnostics: Vec::new() }
    }

    fn report(&mut self, subject: &ElementId, interaction: Option<&ElementId>, message: String, related: Vec<ElementId>) {
        self.diagnostics.push(Diagnostic {
            rule_id: self.rule,
            severity: self.rule.severity(),
            message,
            element_id: subject.clone(),
            interaction_id: interaction.cloned(),
            related_element_ids: related,
            model_revision: self.snapshot.revision(),
        });
    }

    fn finish(mut self) -> EvaluationResult {
        sort_diagnostics(&mut self.diagnostics);
        EvaluationResult { diagnostics: self.diagnostics, read_set: self.reads }
    }

    fn message(&self, id: &str) -> Result<(&'a Interaction, &'a Message), LookupError> {
        self.snapshot.message(id).ok_or_else(|| LookupError::Unknown { id: id.into(), expected: ElementKind::Message })
    }

    /// Class a message endpoint stands for, if the lifeline exists in the
    /// message's interaction and its type resolves.
    fn endpoint_class(&mut self, interaction: &Interaction, lifeline_id: &ElementId) -> Option<&'a Class> {
        let lifeline = self.snapshot.lifeline_in_tracked(interaction, lifeline_id, &mut self.reads)?;
        match self.snapshot.resolve_lifeline_tracked(lifeline, &mut self.reads) {
            LifelineResolution::Resolved(id) => self.snapshot.class(id.as_str()),
            LifelineResolution::Unresolved(_) => None,
        }
    }
}

fn is_blank(name: &str) -> bool {
    name.trim().is_empty()
}

/// Shared front half of the operation-call rules: a named call message
/// whose target resolves to a class.
struct Call<'a> {
    interaction: &'a Interaction,
    message: &'a Message,
    target: &'a Class,
}

fn named_call<'a>(ctx: &mut Ctx<'a>, id: &str) -> Result<Option<Call<'a>>, LookupError> {
    let (interaction, message) = ctx.message(id)?;
    if !message.sort.is_call() || is_blank(&message.name) {
        return Ok(None);
    }
    Ok(ctx.endpoint_class(interaction, &message.target_lifeline_id).map(|target| Call { interaction, message, target }))
}

/// Operations named like the message, nearest owner first.
fn candidates<'a>(ctx: &mut Ctx<'a>, call: &Call<'a>) -> Vec<(&'a Class, &'a crate::model::Operation)> {
    ctx.snapshot
        .operations_of_tracked(call.target, true, &mut ctx.reads)
        .into_iter()
        .filter(|(_, op)| op.name == call.message.name)
        .collect()
}

pub fn check_msg_unnamed(snapshot: &Snapshot, message_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::MsgUnnamed, message_id);
    let (interaction, message) = ctx.message(message_id)?;
    if message.sort.is_call() && is_blank(&message.name) {
        let text = format!("{} message in interaction '{}' has no name", message.sort, interaction.name);
        ctx.report(&message.id, Some(&interaction.id), text, Vec::new());
    }
    Ok(ctx.finish())
}

pub fn check_msg_undef_op(snapshot: &Snapshot, message_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::MsgUndefOp, message_id);
    if let Some(call) = named_call(&mut ctx, message_id)? {
        if candidates(&mut ctx, &call).is_empty() {
            let text = format!(
                "operation '{}' is not defined on class '{}' or its superclasses",
                call.message.name, call.target.name
            );
            ctx.report(&call.message.id, Some(&call.interaction.id), text, vec![call.target.id.clone()]);
        }
    }
    Ok(ctx.finish())
}

pub fn check_msg_param_mismatch(snapshot: &Snapshot, message_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::MsgParamMismatch, message_id);
    if let Some(call) = named_call(&mut ctx, message_id)? {
        let found = candidates(&mut ctx, &call);
        for (_, op) in &found {
            ctx.reads.insert(DepKey::Element(op.id.clone()));
        }
        let arity = call.message.arguments.len();
        if !found.is_empty() && found.iter().all(|(_, op)| op.input_arity() != arity) {
            let mut arities: Vec<usize> = found.iter().map(|(_, op)| op.input_arity()).collect();
            arities.sort_unstable();
            arities.dedup();
            let expected: Vec<String> = arities.iter().map(usize::to_string).collect();
            let text = format!(
                "message '{}' passes {arity} argument(s); '{}' on class '{}' takes {}",
                call.message.name,
                call.message.name,
                call.target.name,
                expected.join(" or ")
            );
            let mut related: Vec<ElementId> = found.iter().map(|(_, op)| op.id.clone()).collect();
            related.sort();
            related.dedup();
            ctx.report(&call.message.id, Some(&call.interaction.id), text, related);
        }
    }
    Ok(ctx.finish())
}

pub fn check_msg_no_assoc(snapshot: &Snapshot, message_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::MsgNoAssoc, message_id);
    let (interaction, message) = ctx.message(message_id)?;
    if message.sort.is_call() {
        let target = ctx.endpoint_class(interaction, &message.target_lifeline_id);
        let source = match target {
            Some(_) => ctx.endpoint_class(interaction, &message.source_lifeline_id),
            None => None,
        };
        if let (Some(source), Some(target)) = (source, target) {
            if source.id != target.id && !snapshot.associated_tracked(source, target, &mut ctx.reads) {
                let text = format!("no association connects class '{}' to class '{}'", source.name, target.name);
                ctx.report(&message.id, Some(&interaction.id), text, vec![source.id.clone(), target.id.clone()]);
            }
        }
    }
    Ok(ctx.finish())
}

pub fn check_lifeline_type(snapshot: &Snapshot, lifeline_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::LifelineUndefType, lifeline_id);
    let (interaction, lifeline) = snapshot
        .lifeline(lifeline_id)
        .ok_or_else(|| LookupError::Unknown { id: lifeline_id.into(), expected: ElementKind::Lifeline })?;
    if let LifelineResolution::Unresolved(reason) = snapshot.resolve_lifeline_tracked(lifeline, &mut ctx.reads) {
        let (detail, related) = match (reason, &lifeline.type_ref, &lifeline.type_name) {
            (crate::model::UnresolvedReason::AmbiguousName, _, Some(name)) => {
                let ids: Vec<ElementId> = snapshot.classes_named(name).map(|c| c.id.clone()).collect();
                (format!("type name '{name}' matches {} classes", ids.len()), ids)
            }
            (crate::model::UnresolvedReason::DanglingRef, Some(r), _) => {
                (format!("type reference '{r}' is not a class"), Vec::new())
            }
            (crate::model::UnresolvedReason::UnknownName, _, Some(name)) => {
                (format!("no class is named '{name}'"), Vec::new())
            }
            _ => ("no type given".to_owned(), Vec::new()),
        };
        let text = format!("lifeline '{}' has an undefined type ({}): {detail}", lifeline.name, reason.as_str());
        ctx.report(&lifeline.id, Some(&interaction.id), text, related);
    }
    Ok(ctx.finish())
}

pub fn check_private_call(snapshot: &Snapshot, message_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::MsgPrivateOp, message_id);
    let Some(call) = named_call(&mut ctx, message_id)? else { return Ok(ctx.finish()) };
    let Some(&(owner, op)) = candidates(&mut ctx, &call).first() else { return Ok(ctx.finish()) };
    ctx.reads.insert(DepKey::Element(op.id.clone()));
    if !matches!(op.visibility, Visibility::Private | Visibility::Protected) {
        return Ok(ctx.finish());
    }
    let Some(source) = ctx.endpoint_class(call.interaction, &call.message.source_lifeline_id) else {
        return Ok(ctx.finish());
    };
    let allowed = source.id == call.target.id
        || (op.visibility == Visibility::Protected
            && snapshot.ancestry_tracked(source, &mut ctx.reads).iter().any(|c| c.id == call.target.id));
    if !allowed {
        let vis = if op.visibility == Visibility::Private { "private" } else { "protected" };
        let text = format!(
            "class '{}' calls {vis} operation '{}' of class '{}'",
            source.name, op.name, owner.name
        );
        let mut related = vec![op.id.clone(), source.id.clone()];
        related.sort();
        ctx.report(&call.message.id, Some(&call.interaction.id), text, related);
    }
    Ok(ctx.finish())
}

pub fn check_structure(snapshot: &Snapshot, element_id: &str) -> Result<EvaluationResult, LookupError> {
    let mut ctx = Ctx::new(snapshot, RuleId::StructWellformed, element_id);
    let kind = snapshot.kind_of(element_id);
    if !kind.is_some_and(|k| RuleId::StructWellformed.subject_kinds().contains(&k)) {
        return Err(LookupError::Unknown { id: element_id.into(), expected: ElementKind::Class });
    }
    let interaction = match kind {
        Some(ElementKind::Message) => snapshot.parent_of(element_id).cloned(),
        _ => None,
    };
    let issues = snapshot.structural_issues_tracked(element_id, &mut ctx.reads);
    for issue in issues {
        let text = format!("{}: {}", issue.kind.as_str(), issue.detail);
        ctx.report(&issue.element_id, interaction.as_ref(), text, issue.related);
    }
    Ok(ctx.finish())
}

#[cfg(test)]
mod tests;
