//! Seeded (before, after) model pairs for diff testing.
//!
//! `after` is produced by editing the model structs directly, so the pair does
//! not depend on the diff machinery it is meant to test.

use std::collections::HashSet;

use super::generate::{generate_model_with_rng, SimParams};
use super::rng::Rng;
use crate::model::{
    Association, AssociationEnd, Attribute, Class, Direction, ElementId, Enumeration, Interaction, Lifeline, Message,
    MessageSort, Model, Operation, Parameter, Visibility,
};

const MUTATIONS: usize = 24;

/// Small model for `seed` plus an edited copy with the same model id.
///
/// About one pair in twenty has an unrelated second model (same id), which
/// makes nearly every element an addition or removal.
pub fn generate_pair(seed: u64) -> (Model, Model) {
    let mut rng = Rng::new(seed ^ 0x5EED_0F_D1FF);
    let params = SimParams {
        seed,
        classes: rng.range((0, 10)),
        ops_per_class: (0, 3),
        interactions: rng.range((0, 4)),
        messages_per_interaction: (0, 6),
        lifelines_per_interaction: (1, 3),
        ..SimParams::default()
    };
    let (mut before, _) = generate_model_with_rng(&params);
    decorate(&mut rng, &mut before);
    before.normalize();

    let after = if rng.chance(0.05) {
        let mut other = generate_model_with_rng(&SimParams { seed: rng.next_u64(), ..params }).0;
        decorate(&mut rng, &mut other);
        other.model_id = before.model_id.clone();
        other.normalized()
    } else {
        let mut after = before.clone();
        let edits = rng.range((0, 12));
        mutate(&mut rng, &mut after, edits);
        after.normalized()
    };
    (before, after)
}

/// Adds the element kinds the sim generator leaves out: attributes,
/// enumerations, named associations and untyped lifelines.
fn decorate(rng: &mut Rng, model: &mut Model) {
    let mut ids = all_ids(model);
    for _ in 0..rng.range((0, 3)) {
        let id = fresh(rng, &mut ids, "E");
        let literals = (0..rng.range((0, 3))).map(|i| format!("LIT{i}")).collect();
        model.enumerations.push(Enumeration { id, name: format!("Enum{}", rng.below(9)), literals });
    }
    for c in 0..model.classes.len() {
        if rng.chance(0.3) {
            let id = fresh(rng, &mut ids, "AT");
            model.classes[c].attributes.push(Attribute {
                id,
                name: format!("attr{}", rng.below(9)),
                type_name: "String".into(),
                visibility: Visibility::Private,
            });
        }
    }
    for a in &mut model.associations {
        if rng.chance(0.3) {
            a.name = Some(format!("rel{}", rng.below(9)));
        }
    }
}

fn all_ids(m: &Model) -> HashSet<ElementId> {
    let mut ids = HashSet::new();
    for c in &m.classes {
        ids.insert(c.id.clone());
        ids.extend(c.operations.iter().map(|o| o.id.clone()));
        ids.extend(c.attributes.iter().map(|a| a.id.clone()));
    }
    ids.extend(m.enumerations.iter().map(|e| e.id.clone()));
    ids.extend(m.associations.iter().map(|a| a.id.clone()));
    for i in &m.interactions {
        ids.insert(i.id.clone());
        ids.extend(i.lifelines.iter().map(|l| l.id.clone()));
        ids.extend(i.messages.iter().map(|m| m.id.clone()));
    }
    ids
}

fn fresh(rng: &mut Rng, ids: &mut HashSet<ElementId>, prefix: &str) -> ElementId {
    loop {
        let id = ElementId::from(format!("{prefix}-{:06x}", rng.next_u64() as u32 & 0xFF_FFFF));
        if ids.insert(id.clone()) {
            return id;
        }
    }
}

fn word(rng: &mut Rng) -> String {
    format!("w{}", rng.below(16))
}

fn class_ref(rng: &mut Rng, model: &Model) -> ElementId {
    match rng.pick(&model.classes) {
        Some(c) if !rng.chance(0.1) => c.id.clone(),
        _ => ElementId::from("nowhere"),
    }
}

fn new_operation(rng: &mut Rng, ids: &mut HashSet<ElementId>) -> Operation {
    Operation {
        id: fresh(rng, ids, "op"),
        name: word(rng),
        visibility: Visibility::Public,
        parameters: (0..rng.below(3))
            .map(|i| Parameter { name: format!("p{i}"), type_name: "Integer".into(), direction: Direction::In })
            .collect(),
        return_type_name: rng.chance(0.5).then(|| "Boolean".to_owned()),
    }
}

/// Applies `count` random edits in place. Ids stay unique.
pub fn mutate(rng: &mut Rng, model: &mut Model, count: usize) {
    let mut ids = all_ids(model);
    for _ in 0..count {
        let nc = model.classes.len();
        let ni = model.interactions.len();
        match rng.below(MUTATIONS) {
            0 if nc > 0 => {
                let c = rng.below(nc);
                model.classes[c].name = word(rng);
            }
            1 if nc > 0 => {
                let c = rng.below(nc);
                model.classes[c].is_abstract ^= true;
            }
            2 if nc > 0 => {
                let c = rng.below(nc);
                let target = class_ref(rng, model);
                let supers = &mut model.classes[c].superclass_ids;
                if supers.is_empty() || rng.chance(0.5) {
                    supers.push(target);
                } else {
                    supers.clear();
                }
            }
            3 => {
                let id = fresh(rng, &mut ids, "C");
                let operations = (0..rng.below(3)).map(|_| new_operation(rng, &mut ids)).collect();
                model.classes.push(Class {
                    id,
                    name: word(rng),
                    is_abstract: false,
                    superclass_ids: vec![],
                    attributes: vec![],
                    operations,
                });
            }
            4 if nc > 0 => {
                model.classes.remove(rng.below(nc));
            }
            5 if nc > 0 => {
                let c = rng.below(nc);
                let op = new_operation(rng, &mut ids);
                model.classes[c].operations.push(op);
            }
            6 if nc > 0 => {
                let c = rng.below(nc);
                let ops = &mut model.classes[c].operations;
                if !ops.is_empty() {
                    ops.remove(rng.below(ops.len()));
                }
            }
            7 if nc > 0 => {
                let c = rng.below(nc);
                if let Some(o) = (!model.classes[c].operations.is_empty()).then(|| rng.below(model.classes[c].operations.len())) {
                    let name = word(rng);
                    let op = &mut model.classes[c].operations[o];
                    match rng.below(4) {
                        0 => op.name = name,
                        1 => op.visibility = [Visibility::Public, Visibility::Private, Visibility::Protected, Visibility::Package][rng.below(4)],
                        2 => op.return_type_name = if op.return_type_name.is_some() { None } else { Some(name) },
                        _ => {
                            if op.parameters.is_empty() || rng.chance(0.5) {
                                op.parameters.push(Parameter { name, type_name: "String".into(), direction: Direction::Inout });
                            } else {
                                op.parameters.pop();
                            }
                        }
                    }
                }
            }
            // Move an operation to another class.
            8 if nc > 1 => {
                let from = rng.below(nc);
                let to = rng.below(nc);
                if from != to && !model.classes[from].operations.is_empty() {
                    let o = rng.below(model.classes[from].operations.len());
                    let op = model.classes[from].operations.remove(o);
                    model.classes[to].operations.push(op);
                }
            }
            9 if nc > 0 => {
                let c = rng.below(nc);
                let attrs = &mut model.classes[c].attributes;
                if attrs.is_empty() || rng.chance(0.5) {
                    let id = fresh(rng, &mut ids, "AT");
                    model.classes[c].attributes.push(Attribute {
                        id,
                        name: word(rng),
                        type_name: "Integer".into(),
                        visibility: Visibility::Public,
                    });
                } else {
                    let a = rng.below(attrs.len());
                    let name = word(rng);
                    attrs[a].name = name;
                    attrs[a].type_name = "Text".into();
                }
            }
            10 => {
                if model.enumerations.is_empty() || rng.chance(0.3) {
                    let id = fresh(rng, &mut ids, "E");
                    model.enumerations.push(Enumeration { id, name: word(rng), literals: vec!["A".into()] });
                } else {
                    let e = rng.below(model.enumerations.len());
                    if rng.chance(0.3) {
                        model.enumerations.remove(e);
                    } else {
                        let w = word(rng);
                        model.enumerations[e].literals.push(w);
                    }
                }
            }
            11 => {
                if model.associations.is_empty() || rng.chance(0.3) {
                    let id = fresh(rng, &mut ids, "A");
                    let end_a = AssociationEnd::new(class_ref(rng, model));
                    let end_b = AssociationEnd::new(class_ref(rng, model));
                    model.associations.push(Association { id, name: None, end_a, end_b });
                } else {
                    let a = rng.below(model.associations.len());
                    if rng.chance(0.3) {
                        model.associations.remove(a);
                    } else {
                        let target = class_ref(rng, model);
                        let name = word(rng);
                        let assoc = &mut model.associations[a];
                        match rng.below(5) {
                            0 => assoc.end_a.class_id = target,
                            1 => assoc.end_b.multiplicity = "1..*".into(),
                            2 => assoc.end_b.navigable ^= true,
                            3 => assoc.name = if assoc.name.is_some() { None } else { Some(name) },
                            _ => assoc.end_b.class_id = target,
                        }
                    }
                }
            }
            12 => {
                let id = fresh(rng, &mut ids, "I");
                let lifeline = Lifeline {
                    id: fresh(rng, &mut ids, "L"),
                    name: word(rng),
                    type_ref: Some(class_ref(rng, model)),
                    type_name: None,
                };
                let message = Message {
                    id: fresh(rng, &mut ids, "M"),
                    name: word(rng),
                    sort: MessageSort::Sync,
                    source_lifeline_id: lifeline.id.clone(),
                    target_lifeline_id: lifeline.id.clone(),
                    arguments: vec![],
                };
                model.interactions.push(Interaction { id, name: word(rng), lifelines: vec![lifeline], messages: vec![message] });
            }
            13 if ni > 0 => {
                model.interactions.remove(rng.below(ni));
            }
            14 if ni > 0 => {
                let i = rng.below(ni);
                model.interactions[i].name = word(rng);
            }
            15 if ni > 0 => {
                let i = rng.below(ni);
                let id = fresh(rng, &mut ids, "L");
                let type_name = rng.chance(0.5).then(|| word(rng));
                let type_ref = type_name.is_none().then(|| class_ref(rng, model));
                model.interactions[i].lifelines.push(Lifeline { id, name: word(rng), type_ref, type_name });
            }
            16 if ni > 0 => {
                let i = rng.below(ni);
                let lifelines = &mut model.interactions[i].lifelines;
                if !lifelines.is_empty() {
                    lifelines.remove(rng.below(lifelines.len()));
                }
            }
            17 if ni > 0 => {
                let i = rng.below(ni);
                if !model.interactions[i].lifelines.is_empty() {
                    let l = rng.below(model.interactions[i].lifelines.len());
                    let target = class_ref(rng, model);
                    let name = word(rng);
                    let lifeline = &mut model.interactions[i].lifelines[l];
                    match rng.below(3) {
                        0 => lifeline.name = name,
                        1 => lifeline.type_ref = if lifeline.type_ref.is_some() { None } else { Some(target) },
                        _ => lifeline.type_name = if lifeline.type_name.is_some() { None } else { Some(name) },
                    }
                }
            }
            18 if ni > 0 => {
                let i = rng.below(ni);
                if !model.interactions[i].lifelines.is_empty() {
                    let lifelines = model.interactions[i].lifelines.clone();
                    let source = rng.pick(&lifelines).expect("non-empty").id.clone();
                    let target = rng.pick(&lifelines).expect("non-empty").id.clone();
                    let id = fresh(rng, &mut ids, "M");
                    model.interactions[i].messages.push(Message {
                        id,
                        name: word(rng),
                        sort: MessageSort::Async,
                        source_lifeline_id: source,
                        target_lifeline_id: target,
                        arguments: vec!["x".into()],
                    });
                }
            }
            19 if ni > 0 => {
                let i = rng.below(ni);
                let messages = &mut model.interactions[i].messages;
                if !messages.is_empty() {
                    messages.remove(rng.below(messages.len()));
                }
            }
            20 | 21 if ni > 0 => {
                let i = rng.below(ni);
                if !model.interactions[i].messages.is_empty() {
                    let m = rng.below(model.interactions[i].messages.len());
                    let other = rng.pick(&model.interactions[i].lifelines).map(|l| l.id.clone());
                    let name = if rng.chance(0.2) { String::new() } else { word(rng) };
                    let message = &mut model.interactions[i].messages[m];
                    match rng.below(5) {
                        0 => message.name = name,
                        1 => message.sort = [MessageSort::Sync, MessageSort::Async, MessageSort::Reply, MessageSort::Create, MessageSort::Delete][rng.below(5)],
                        2 => message.arguments.push(name),
                        3 => message.arguments.clear(),
                        _ => {
                            if let Some(other) = other {
                                message.target_lifeline_id = other;
                            }
                        }
                    }
                }
            }
            // Move a message or lifeline to another interaction.
            22 | 23 if ni > 1 => {
                let from = rng.below(ni);
                let to = rng.below(ni);
                if from != to {
                    let (source, target) = if from < to {
                        let (a, b) = model.interactions.split_at_mut(to);
                        (&mut a[from], &mut b[0])
                    } else {
                        let (a, b) = model.interactions.split_at_mut(from);
                        (&mut b[0], &mut a[to])
                    };
                    if rng.chance(0.5) && !source.messages.is_empty() {
                        let m = rng.below(source.messages.len());
                        target.messages.push(source.messages.remove(m));
                    } else if !source.lifelines.is_empty() {
                        let l = rng.below(source.lifelines.len());
                        target.lifelines.push(source.lifelines.remove(l));
                    }
                }
            }
            _ => {}
        }
    }
}
