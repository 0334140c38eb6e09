use super::*;
use crate::ingest::{parse_canonical, ParseOptions};
use crate::model::{Association, AssociationEnd, Lifeline, MessageSort, Model, Operation, Parameter, Direction};

const ORDER: &str = include_str!("../../../../fixtures/order.hvm.json");

fn order() -> Model {
    parse_canonical(ORDER, ParseOptions::strict()).into_result().unwrap().0
}

fn run(model: &Model, rule: RuleId, subject: &str) -> Vec<Diagnostic> {
    evaluate(rule, &Snapshot::new(model.clone()), subject).unwrap().diagnostics
}

fn message_mut<'a>(model: &'a mut Model, id: &str) -> &'a mut Message {
    model.interactions.iter_mut().flat_map(|i| i.messages.iter_mut()).find(|m| m.id.as_str() == id).unwrap()
}

fn add_message(model: &mut Model, id: &str, name: &str, from: &str, to: &str, args: &[&str]) {
    model.interactions[0].messages.push(Message {
        id: id.into(),
        name: name.into(),
        sort: MessageSort::Sync,
        source_lifeline_id: from.into(),
        target_lifeline_id: to.into(),
        arguments: args.iter().map(|a| a.to_string()).collect(),
    });
}

fn add_lifeline(model: &mut Model, id: &str, type_ref: Option<&str>, type_name: Option<&str>) {
    model.interactions[0].lifelines.push(Lifeline {
        id: id.into(),
        name: format!("ll{id}"),
        type_ref: type_ref.map(Into::into),
        type_name: type_name.map(Into::into),
    });
}

fn full(model: &Model) -> Vec<Diagnostic> {
    let snapshot = Snapshot::new(model.clone());
    let mut out = Vec::new();
    for rule in RuleId::ALL {
        for subject in subjects_of(rule, &snapshot) {
            out.extend(evaluate(rule, &snapshot, subject.as_str()).unwrap().diagnostics);
        }
    }
    sort_diagnostics(&mut out);
    out
}

#[test]
fn order_fixture_findings() {
    let all = full(&order());
    let found: Vec<(RuleId, &str)> = all.iter().map(|d| (d.rule_id, d.element_id.as_str())).collect();
    assert_eq!(
        found,
        [(RuleId::MsgPrivateOp, "M2"), (RuleId::MsgUndefOp, "M3"), (RuleId::MsgUnnamed, "M4")]
    );
}

#[test]
fn unnamed_message() {
    let m = order();
    assert_eq!(run(&m, RuleId::MsgUnnamed, "M4").len(), 1);
    let mut reply = order();
    message_mut(&mut reply, "M4").sort = MessageSort::Reply;
    assert!(run(&reply, RuleId::MsgUnnamed, "M4").is_empty());
    let mut spaces = order();
    message_mut(&mut spaces, "M4").name = "  ".into();
    assert_eq!(run(&spaces, RuleId::MsgUnnamed, "M4").len(), 1);
}

#[test]
fn undefined_operation() {
    let m = order();
    let d = run(&m, RuleId::MsgUndefOp, "M3");
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].severity, Severity::Error);
    assert_eq!(d[0].interaction_id.as_ref().map(|i| i.as_str()), Some("I1"));
    assert!(run(&m, RuleId::MsgUndefOp, "M1").is_empty());

    let mut inherited = order();
    add_lifeline(&mut inherited, "L3", Some("C3"), None);
    add_message(&mut inherited, "M5", "notify", "L2", "L3", &[]);
    assert!(run(&inherited, RuleId::MsgUndefOp, "M5").is_empty());
}

#[test]
fn parameter_mismatch() {
    let m = order();
    assert!(run(&m, RuleId::MsgParamMismatch, "M1").is_empty());
    let mut none = order();
    message_mut(&mut none, "M1").arguments.clear();
    let d = run(&none, RuleId::MsgParamMismatch, "M1");
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].related_element_ids, vec![ElementId::from("O1")]);

    let mut overloads = order();
    let param = |n: &str| Parameter { name: n.into(), type_name: "String".into(), direction: Direction::In };
    overloads.classes[0].operations.push(Operation {
        id: "O9".into(),
        name: "place".into(),
        visibility: Visibility::Public,
        parameters: vec![param("a"), param("b")],
        return_type_name: None,
    });
    message_mut(&mut overloads, "M1").arguments = vec!["x".into(), "y".into()];
    assert!(run(&overloads, RuleId::MsgParamMismatch, "M1").is_empty());
    message_mut(&mut overloads, "M1").arguments.push("z".into());
    let d = run(&overloads, RuleId::MsgParamMismatch, "M1");
    assert_eq!(d[0].related_element_ids, vec![ElementId::from("O1"), ElementId::from("O9")]);
}

#[test]
fn missing_association() {
    let m = order();
    assert!(run(&m, RuleId::MsgNoAssoc, "M1").is_empty());
    let mut shipper = order();
    add_lifeline(&mut shipper, "L3", Some("C4"), None);
    add_message(&mut shipper, "M5", "ship", "L1", "L3", &[]);
    assert_eq!(run(&shipper, RuleId::MsgNoAssoc, "M5").len(), 1);
    add_message(&mut shipper, "M6", "place", "L2", "L2", &[]);
    assert!(run(&shipper, RuleId::MsgNoAssoc, "M6").is_empty());
    // An association declared on a superclass covers the subclass.
    add_lifeline(&mut shipper, "L4", Some("C3"), None);
    add_message(&mut shipper, "M7", "place", "L4", "L2", &["i"]);
    assert!(run(&shipper, RuleId::MsgNoAssoc, "M7").is_empty());
}

#[test]
fn lifeline_types() {
    let m = order();
    assert!(run(&m, RuleId::LifelineUndefType, "L1").is_empty());
    let mut untyped = order();
    add_lifeline(&mut untyped, "L3", None, None);
    let d = run(&untyped, RuleId::LifelineUndefType, "L3");
    assert_eq!(d.len(), 1);
    assert!(d[0].message.contains("noType"), "{}", d[0].message);

    let mut twins = order();
    twins.classes[3].name = "Order".into();
    add_lifeline(&mut twins, "L3", None, Some("Order"));
    let d = run(&twins, RuleId::LifelineUndefType, "L3");
    assert!(d[0].message.contains("ambiguousName"));
    assert_eq!(d[0].related_element_ids, vec![ElementId::from("C1"), ElementId::from("C4")]);

    let mut dangling = order();
    add_lifeline(&mut dangling, "L3", Some("C99"), Some("Nope"));
    assert!(run(&dangling, RuleId::LifelineUndefType, "L3")[0].message.contains("danglingRef"));
}

#[test]
fn private_call() {
    let m = order();
    let d = run(&m, RuleId::MsgPrivateOp, "M2");
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].severity, Severity::Warning);
    let mut self_call = order();
    message_mut(&mut self_call, "M2").source_lifeline_id = "L2".into();
    assert!(run(&self_call, RuleId::MsgPrivateOp, "M2").is_empty());
    assert!(run(&m, RuleId::MsgPrivateOp, "M1").is_empty());
}

#[test]
fn protected_call_from_subclass() {
    let mut m = order();
    m.classes[1].operations[0].visibility = Visibility::Protected;
    add_lifeline(&mut m, "L3", Some("C3"), None);
    add_lifeline(&mut m, "L4", Some("C4"), None);
    add_message(&mut m, "M5", "notify", "L3", "L1", &[]);
    add_message(&mut m, "M6", "notify", "L4", "L1", &[]);
    assert!(run(&m, RuleId::MsgPrivateOp, "M5").is_empty());
    assert_eq!(run(&m, RuleId::MsgPrivateOp, "M6").len(), 1);
}

#[test]
fn structure() {
    let mut m = order();
    m.associations.push(Association {
        id: "A2".into(),
        name: None,
        end_a: AssociationEnd::new("C1"),
        end_b: AssociationEnd::new("C404"),
    });
    assert_eq!(run(&m, RuleId::StructWellformed, "A2").len(), 1);
    assert!(run(&m, RuleId::StructWellformed, "C1").is_empty());

    let mut cycle = order();
    cycle.classes[0].superclass_ids = vec!["C4".into()];
    cycle.classes[3].superclass_ids = vec!["C1".into()];
    assert_eq!(run(&cycle, RuleId::StructWellformed, "C1").len(), 1);
    assert_eq!(run(&cycle, RuleId::StructWellformed, "C4").len(), 1);
    assert!(run(&cycle, RuleId::StructWellformed, "C2").is_empty());
}

#[test]
fn unresolved_target_only_reports_lifeline() {
    let mut m = order();
    m.interactions[0].lifelines[1].type_ref = Some("C404".into());
    let all = full(&m);
    let on_l2: Vec<_> = all.iter().filter(|d| d.element_id.as_str() == "L2").collect();
    assert_eq!(on_l2.len(), 1);
    assert_eq!(on_l2[0].rule_id, RuleId::LifelineUndefType);
    for id in ["M1", "M2", "M3"] {
        assert!(all.iter().all(|d| d.element_id.as_str() != id), "{id} still reported");
    }
}

#[test]
fn subjects() {
    let snapshot = Snapshot::new(order());
    let ids = |rule| subjects_of(rule, &snapshot).into_iter().map(|i| i.to_string()).collect::<Vec<_>>();
    assert_eq!(ids(RuleId::MsgUnnamed), ["M1", "M2", "M3", "M4"]);
    assert_eq!(ids(RuleId::LifelineUndefType), ["L1", "L2"]);
    assert_eq!(ids(RuleId::StructWellformed), ["A1", "C1", "C2", "C3", "C4", "M1", "M2", "M3", "M4"]);
    let empty = Snapshot::new(Model::empty("m"));
    assert!(RuleId::ALL.iter().all(|r| subjects_of(*r, &empty).is_empty()));
}

#[test]
fn wrong_subject_kind_is_lookup_error() {
    let snapshot = Snapshot::new(order());
    assert!(evaluate(RuleId::MsgUnnamed, &snapshot, "C1").is_err());
    assert!(evaluate(RuleId::LifelineUndefType, &snapshot, "M1").is_err());
    assert!(evaluate(RuleId::StructWellformed, &snapshot, "E1").is_err());
}

#[test]
fn catalog_shape() {
    let list = catalog();
    assert_eq!(list.len(), 7);
    let ids: std::collections::HashSet<_> = list.iter().map(|d| d.rule_id).collect();
    assert_eq!(ids.len(), 7);
    assert!(list.iter().all(|d| !d.title.is_empty() && !d.description.is_empty()));
    for rule in RuleId::ALL {
        assert_eq!(rule.as_str().parse::<RuleId>().unwrap(), rule);
        assert_eq!(serde_json::to_value(rule).unwrap(), rule.as_str());
    }
}

#[test]
fn results_are_sound_on_fixture() {
    let snapshot = Snapshot::new(order());
    for rule in RuleId::ALL {
        for subject in subjects_of(rule, &snapshot) {
            let result = evaluate(rule, &snapshot, subject.as_str()).unwrap();
            assert!(result.read_set.contains(&DepKey::Element(subject.clone())));
            let read: std::collections::HashSet<_> = result.read_ids().collect();
            for d in &result.diagnostics {
                assert!(!d.message.is_empty());
                for related in &d.related_element_ids {
                    assert!(read.contains(related), "{rule} {subject}: {related} not read");
                }
            }
            assert_eq!(evaluate(rule, &snapshot, subject.as_str()).unwrap(), result);
        }
    }
}
