use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::rng::Rng;
use crate::diff::{apply_in_place, Change, ChangeEvent, Element};
use crate::model::{
    Association, AssociationEnd, Class, Direction, ElementId, ElementKind, Interaction, Lifeline, Message, MessageSort,
    Model, Operation, Parameter, Visibility,
};

/// Operation and message names are drawn from `op0..op47`.
const VOCABULARY: usize = 48;
/// Draws before an edit kind that does not fit the model falls back to a rename.
const MAX_DRAWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EditKind {
    RenameOp,
    AddOp,
    RemoveOp,
    RenameMsg,
    AddMsg,
    RemoveMsg,
    RetargetLifeline,
    AddAssoc,
    RemoveAssoc,
    ChangeParams,
    /// Dangling superclass or association end.
    StructuralFault,
}

impl EditKind {
    pub const ALL: [EditKind; 11] = [
        EditKind::RenameOp,
        EditKind::AddOp,
        EditKind::RemoveOp,
        EditKind::RenameMsg,
        EditKind::AddMsg,
        EditKind::RemoveMsg,
        EditKind::RetargetLifeline,
        EditKind::AddAssoc,
        EditKind::RemoveAssoc,
        EditKind::ChangeParams,
        EditKind::StructuralFault,
    ];
}

/// Integer weights over [`EditKind::ALL`], in that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditMix(pub [u32; 11]);

impl Default for EditMix {
    fn default() -> Self {
        EditMix([3, 2, 1, 3, 2, 1, 1, 1, 1, 2, 0])
    }
}

impl EditMix {
    pub fn only(kind: EditKind) -> Self {
        let mut weights = [0; 11];
        weights[EditKind::ALL.iter().position(|k| *k == kind).expect("listed")] = 1;
        EditMix(weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimParams {
    pub seed: u64,
    pub classes: usize,
    pub ops_per_class: (usize, usize),
    pub interactions: usize,
    pub messages_per_interaction: (usize, usize),
    pub lifelines_per_interaction: (usize, usize),
    pub steps: usize,
    pub batch_size: (usize, usize),
    /// Chance that a generated message names no existing operation.
    pub undefined_op_probability: f64,
    pub edit_mix: EditMix,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            seed: 0,
            classes: 30,
            ops_per_class: (1, 4),
            interactions: 8,
            messages_per_interaction: (3, 8),
            lifelines_per_interaction: (2, 4),
            steps: 200,
            batch_size: (1, 3),
            undefined_op_probability: 0.2,
            edit_mix: EditMix::default(),
        }
    }
}

impl SimParams {
    pub fn with_seed(seed: u64) -> Self {
        SimParams { seed, ..SimParams::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ranges = [
            ("opsPerClass", self.ops_per_class),
            ("messagesPerInteraction", self.messages_per_interaction),
            ("lifelinesPerInteraction", self.lifelines_per_interaction),
            ("batchSize", self.batch_size),
        ];
        for (name, (lo, hi)) in ranges {
            if lo > hi {
                return Err(format!("{name}: {lo} > {hi}"));
            }
        }
        if self.edit_mix.0.iter().all(|w| *w == 0) {
            return Err("edit mix has no positive weight".into());
        }
        if !(0.0..=1.0).contains(&self.undefined_op_probability) {
            return Err("undefinedOpProbability must be within [0, 1]".into());
        }
        Ok(())
    }
}

fn op_name(rng: &mut Rng) -> String {
    format!("op{}", rng.below(VOCABULARY))
}

fn parameters(rng: &mut Rng, count: usize) -> Vec<Parameter> {
    (0..count)
        .map(|i| Parameter {
            name: format!("p{i}"),
            type_name: ["String", "Integer", "Boolean"][rng.below(3)].to_owned(),
            direction: if rng.chance(0.1) { Direction::Out } else { Direction::In },
        })
        .collect()
}

fn arguments(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("a{i}")).collect()
}

/// Deterministic model for `params.seed`. Also returns the generator so the
/// edit stream continues from the same sequence.
pub fn generate_model_with_rng(params: &SimParams) -> (Model, Rng) {
    let mut rng = Rng::new(params.seed);
    let mut model = Model::empty(format!("sim-{}", params.seed));

    for c in 0..params.classes {
        let id = format!("C{c:04}");
        let superclass_ids = if c > 0 && rng.chance(0.2) { vec![format!("C{:04}", rng.below(c)).into()] } else { vec![] };
        let operations = (0..rng.range(params.ops_per_class))
            .map(|o| Operation {
                id: format!("{id}-O{o}").into(),
                name: op_name(&mut rng),
                visibility: if rng.chance(0.1) { Visibility::Private } else { Visibility::Public },
                parameters: {
                    let n = rng.below(3);
                    parameters(&mut rng, n)
                },
                return_type_name: None,
            })
            .collect();
        model.classes.push(Class {
            id: id.clone().into(),
            name: format!("Class{c}"),
            is_abstract: false,
            superclass_ids,
            attributes: vec![],
            operations,
        });
    }
    if params.classes >= 2 {
        for a in 0..params.classes / 2 {
            let x = rng.below(params.classes);
            let y = rng.below(params.classes);
            model.associations.push(Association {
                id: format!("A{a:04}").into(),
                name: None,
                end_a: AssociationEnd::new(format!("C{x:04}")),
                end_b: AssociationEnd::new(format!("C{y:04}")),
            });
        }
    }

    for i in 0..params.interactions {
        let id = format!("I{i:04}");
        let lifelines: Vec<Lifeline> = (0..rng.range(params.lifelines_per_interaction).max(1))
            .map(|l| Lifeline {
                id: format!("{id}-L{l}").into(),
                name: format!("part{l}"),
                type_ref: (params.classes > 0).then(|| format!("C{:04}", rng.below(params.classes)).into()),
                type_name: None,
            })
            .collect();
        let mut messages = Vec::new();
        for m in 0..rng.range(params.messages_per_interaction) {
            let source = rng.pick(&lifelines).expect("non-empty").id.clone();
            let target = rng.pick(&lifelines).expect("non-empty").clone();
            let (name, args) = message_call(&mut rng, &model, &target, params.undefined_op_probability);
            let sort = match rng.below(20) {
                0 => MessageSort::Reply,
                1 | 2 => MessageSort::Async,
                _ => MessageSort::Sync,
            };
            messages.push(Message {
                id: format!("{id}-M{m:03}").into(),
                name,
                sort,
                source_lifeline_id: source,
                target_lifeline_id: target.id.clone(),
                arguments: args,
            });
        }
        model.interactions.push(Interaction { id: id.into(), name: format!("Scenario{i}"), lifelines, messages });
    }
    (model.normalized(), rng)
}

pub fn generate_model(params: &SimParams) -> Model {
    generate_model_with_rng(params).0
}

/// Name and arguments for a message to `target`: usually an operation the
/// target class declares, with matching arity.
fn message_call(rng: &mut Rng, model: &Model, target: &Lifeline, undefined: f64) -> (String, Vec<String>) {
    let class = target.type_ref.as_ref().and_then(|id| model.classes.iter().find(|c| c.id == *id));
    match class {
        Some(class) if !class.operations.is_empty() && !rng.chance(undefined) => {
            let op = rng.pick(&class.operations).expect("non-empty");
            (op.name.clone(), arguments(op.input_arity()))
        }
        _ => (format!("missing{}", rng.below(VOCABULARY)), arguments(rng.below(2))),
    }
}

/// One batch of edits applicable to `model` in order. Events are numbered
/// from `first_seq` and carry `model.revision + 1`.
pub fn generate_edits(rng: &mut Rng, model: &Model, params: &SimParams, first_seq: u64) -> Vec<ChangeEvent> {
    let mut gen = EditGen { rng, work: model.clone(), events: Vec::new(), seq: first_seq, ids: HashSet::new() };
    gen.collect_ids();
    for _ in 0..gen.rng.range(params.batch_size) {
        let mut done = false;
        for _ in 0..MAX_DRAWS {
            let kind = EditKind::ALL[gen.rng.weighted(&params.edit_mix.0).expect("validated mix")];
            if gen.edit(kind) {
                done = true;
                break;
            }
        }
        if !done && !gen.edit(EditKind::RenameOp) {
            gen.edit(EditKind::RenameMsg);
        }
    }
    gen.events
}

struct EditGen<'r> {
    rng: &'r mut Rng,
    work: Model,
    events: Vec<ChangeEvent>,
    seq: u64,
    ids: HashSet<ElementId>,
}

impl EditGen<'_> {
    fn collect_ids(&mut self) {
        let m = &self.work;
        for c in &m.classes {
            self.ids.insert(c.id.clone());
            self.ids.extend(c.operations.iter().map(|o| o.id.clone()));
            self.ids.extend(c.attributes.iter().map(|a| a.id.clone()));
        }
        self.ids.extend(m.enumerations.iter().map(|e| e.id.clone()));
        self.ids.extend(m.associations.iter().map(|a| a.id.clone()));
        for i in &m.interactions {
            self.ids.insert(i.id.clone());
            self.ids.extend(i.lifelines.iter().map(|l| l.id.clone()));
            self.ids.extend(i.messages.iter().map(|m| m.id.clone()));
        }
    }

    fn fresh_id(&mut self, prefix: &str) -> ElementId {
        loop {
            let id = ElementId::from(format!("{prefix}{:08x}", self.rng.next_u64() as u32));
            if self.ids.insert(id.clone()) {
                return id;
            }
        }
    }

    fn emit(&mut self, kind: ElementKind, id: ElementId, change: Change) {
        let event = ChangeEvent {
            seq: self.seq,
            model_id: self.work.model_id.clone(),
            revision: self.work.revision + 1,
            element_kind: kind,
            element_id: id,
            change,
        };
        apply_in_place(&mut self.work, &event).expect("generated edits are applicable");
        if let Change::Removed = event.change {
            self.ids.remove(&event.element_id);
        }
        self.seq += 1;
        self.events.push(event);
    }

    fn set(&mut self, kind: ElementKind, id: ElementId, property: &str, old: Value, new: Value) {
        self.emit(kind, id, Change::PropertyChanged { property: property.into(), old_value: old, new_value: new });
    }

    fn classes_with_ops(&self) -> Vec<usize> {
        (0..self.work.classes.len()).filter(|&i| !self.work.classes[i].operations.is_empty()).collect()
    }

    fn pick_op(&mut self) -> Option<(usize, usize)> {
        let owners = self.classes_with_ops();
        let ci = *self.rng.pick(&owners)?;
        let oi = self.rng.below(self.work.classes[ci].operations.len());
        Some((ci, oi))
    }

    fn pick_message(&mut self) -> Option<(usize, usize)> {
        let hosts: Vec<usize> =
            (0..self.work.interactions.len()).filter(|&i| !self.work.interactions[i].messages.is_empty()).collect();
        let ii = *self.rng.pick(&hosts)?;
        Some((ii, self.rng.below(self.work.interactions[ii].messages.len())))
    }

    /// Emits one edit of `kind`; false when the model has nothing to edit.
    fn edit(&mut self, kind: EditKind) -> bool {
        match kind {
            EditKind::RenameOp => {
                let Some((ci, oi)) = self.pick_op() else { return false };
                let op = &self.work.classes[ci].operations[oi];
                let (id, old) = (op.id.clone(), op.name.clone());
                let new = different_name(self.rng, &old);
                self.set(ElementKind::Operation, id, "name", old.into(), new.into());
            }
            EditKind::AddOp => {
                let Some(ci) = (!self.work.classes.is_empty()).then(|| self.rng.below(self.work.classes.len())) else {
                    return false;
                };
                let id = self.fresh_id("op-");
                let n = self.rng.below(3);
                let op = Operation {
                    id: id.clone(),
                    name: op_name(self.rng),
                    visibility: if self.rng.chance(0.1) { Visibility::Private } else { Visibility::Public },
                    parameters: parameters(self.rng, n),
                    return_type_name: None,
                };
                let parent = self.work.classes[ci].id.clone();
                self.emit(
                    ElementKind::Operation,
                    id,
                    Change::Added { parent_id: Some(parent), payload: Element::Operation(op) },
                );
            }
            EditKind::RemoveOp => {
                let Some((ci, oi)) = self.pick_op() else { return false };
                let id = self.work.classes[ci].operations[oi].id.clone();
                self.emit(ElementKind::Operation, id, Change::Removed);
            }
            EditKind::RenameMsg => {
                let Some((ii, mi)) = self.pick_message() else { return false };
                let message = &self.work.interactions[ii].messages[mi];
                let (id, old) = (message.id.clone(), message.name.clone());
                let new = if self.rng.chance(0.05) && !old.is_empty() {
                    String::new()
                } else {
                    different_name(self.rng, &old)
                };
                self.set(ElementKind::Message, id, "name", old.into(), new.into());
            }
            EditKind::AddMsg => {
                let hosts: Vec<usize> = (0..self.work.interactions.len())
                    .filter(|&i| !self.work.interactions[i].lifelines.is_empty())
                    .collect();
                let Some(&ii) = self.rng.pick(&hosts) else { return false };
                let lifelines = self.work.interactions[ii].lifelines.clone();
                let source = self.rng.pick(&lifelines).expect("non-empty").id.clone();
                let target = self.rng.pick(&lifelines).expect("non-empty").clone();
                let (name, arguments) = message_call(self.rng, &self.work, &target, 0.2);
                let id = self.fresh_id("msg-");
                let message = Message {
                    id: id.clone(),
                    name,
                    sort: MessageSort::Sync,
                    source_lifeline_id: source,
                    target_lifeline_id: target.id,
                    arguments,
                };
                let parent = self.work.interactions[ii].id.clone();
                self.emit(
                    ElementKind::Message,
                    id,
                    Change::Added { parent_id: Some(parent), payload: Element::Message(message) },
                );
            }
            EditKind::RemoveMsg => {
                let Some((ii, mi)) = self.pick_message() else { return false };
                let id = self.work.interactions[ii].messages[mi].id.clone();
                self.emit(ElementKind::Message, id, Change::Removed);
            }
            EditKind::RetargetLifeline => {
                let all: Vec<(usize, usize)> = self
                    .work
                    .interactions
                    .iter()
                    .enumerate()
                    .flat_map(|(ii, i)| (0..i.lifelines.len()).map(move |li| (ii, li)))
                    .collect();
                if self.work.classes.len() < 2 {
                    return false;
                }
                let Some(&(ii, li)) = self.rng.pick(&all) else { return false };
                let lifeline = &self.work.interactions[ii].lifelines[li];
                let (id, old) = (lifeline.id.clone(), lifeline.type_ref.clone());
                let mut new = self.work.classes[self.rng.below(self.work.classes.len())].id.clone();
                if Some(&new) == old.as_ref() {
                    let at = self.work.classes.iter().position(|c| c.id == new).expect("listed");
                    new = self.work.classes[(at + 1) % self.work.classes.len()].id.clone();
                }
                let old = old.map_or(Value::Null, |o| Value::from(o.as_str()));
                self.set(ElementKind::Lifeline, id, "typeRef", old, new.as_str().into());
            }
            EditKind::AddAssoc => {
                if self.work.classes.is_empty() {
                    return false;
                }
                let n = self.work.classes.len();
                let a = self.work.classes[self.rng.below(n)].id.clone();
                let b = self.work.classes[self.rng.below(n)].id.clone();
                let id = self.fresh_id("assoc-");
                let assoc = Association { id: id.clone(), name: None, end_a: AssociationEnd::new(a), end_b: AssociationEnd::new(b) };
                self.emit(ElementKind::Association, id, Change::Added { parent_id: None, payload: Element::Association(assoc) });
            }
            EditKind::RemoveAssoc => {
                if self.work.associations.is_empty() {
                    return false;
                }
                let id = self.work.associations[self.rng.below(self.work.associations.len())].id.clone();
                self.emit(ElementKind::Association, id, Change::Removed);
            }
            EditKind::ChangeParams => {
                let Some((ci, oi)) = self.pick_op() else { return false };
                let op = &self.work.classes[ci].operations[oi];
                let (id, old) = (op.id.clone(), op.parameters.clone());
                let mut count = self.rng.below(4);
                if count == old.len() {
                    count = (count + 1) % 4;
                }
                let new = parameters(self.rng, count);
                let to_value = |p: &Vec<Parameter>| serde_json::to_value(p).expect("serializable");
                self.set(ElementKind::ParameterList, id, "parameterList", to_value(&old), to_value(&new));
            }
            EditKind::StructuralFault => {
                if self.work.classes.is_empty() {
                    return false;
                }
                let ci = self.rng.below(self.work.classes.len());
                let class = &self.work.classes[ci];
                let (id, old) = (class.id.clone(), class.superclass_ids.clone());
                let ghost = ElementId::from(format!("ghost-{:08x}", self.rng.next_u64() as u32));
                let mut new = old.clone();
                new.push(ghost);
                let to_value = |v: &Vec<ElementId>| serde_json::to_value(v).expect("serializable");
                self.set(ElementKind::Class, id, "superclassIds", to_value(&old), to_value(&new));
            }
        }
        true
    }
}

fn different_name(rng: &mut Rng, old: &str) -> String {
    let mut name = op_name(rng);
    if name == old {
        name.push('x');
    }
    name
}
