//! Reader for the subset of EMF UML2 XMI that carries class and sequence
//! diagrams. Anything outside that subset is skipped with a warning that
//! names the element's document path.

use std::collections::HashMap;

use roxmltree::{Document, Node};

use super::{FatalKind, ParseReport, ParseWarning};
use crate::model::{
    Association, AssociationEnd, Attribute, Class, Direction, ElementId, Enumeration, Interaction, Lifeline, Message,
    MessageSort, Model, Operation, Parameter, Visibility,
};

const KNOWN_UML_NAMESPACES: [&str; 2] = ["http://www.eclipse.org/uml2/", "http://www.omg.org/spec/UML/"];

/// Reads an XMI document. Only malformed XML is fatal.
pub fn parse_xmi(text: &str) -> ParseReport {
    let doc = match Document::parse(text) {
        Ok(doc) => doc,
        Err(err) => return ParseReport::fatal(FatalKind::Syntax, "", err.to_string(), Vec::new()),
    };
    let mut reader = Reader::new(&doc);
    let model = reader.read();
    ParseReport::ok(model.normalized(), reader.warnings)
}

struct Reader<'a, 'input> {
    by_id: HashMap<&'a str, Node<'a, 'input>>,
    warnings: Vec<ParseWarning>,
    model: Model,
    associations: Vec<(Node<'a, 'input>, String)>,
    root: Node<'a, 'input>,
}

fn xmi_attr<'a>(node: Node<'a, '_>, local: &str) -> Option<&'a str> {
    node.attributes()
        .find(|a| a.name() == local && a.namespace().is_some_and(|ns| ns.contains("XMI")))
        .map(|a| a.value())
}

/// Local part of an `xmi:type` value such as `uml:Class`.
fn xmi_type<'a>(node: Node<'a, '_>) -> Option<&'a str> {
    xmi_attr(node, "type").map(|t| t.rsplit(':').next().unwrap_or(t))
}

fn attr<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    node.attribute(name)
}

fn child_path(parent_path: &str, node: Node) -> String {
    let name = node.tag_name().name();
    let index = node
        .prev_sibling_element()
        .into_iter()
        .flat_map(|n| std::iter::successors(Some(n), |s| s.prev_sibling_element()))
        .filter(|s| s.tag_name().name() == name)
        .count()
        + 1;
    format!("{parent_path}/{name}[{index}]")
}

fn visibility(node: Node) -> Visibility {
    match attr(node, "visibility") {
        Some("private") => Visibility::Private,
        Some("protected") => Visibility::Protected,
        Some("package") => Visibility::Package,
        _ => Visibility::Public,
    }
}

fn message_sort(value: Option<&str>) -> Option<MessageSort> {
    Some(match value {
        None | Some("synchCall") => MessageSort::Sync,
        Some("asynchCall") | Some("asynchSignal") => MessageSort::Async,
        Some("reply") => MessageSort::Reply,
        Some("createMessage") => MessageSort::Create,
        Some("deleteMessage") => MessageSort::Delete,
        Some(_) => return None,
    })
}

impl<'a, 'input> Reader<'a, 'input> {
    fn new(doc: &'a Document<'input>) -> Self {
        let mut by_id = HashMap::new();
        for node in doc.descendants().filter(|n| n.is_element()) {
            if let Some(id) = xmi_attr(node, "id") {
                by_id.entry(id).or_insert(node);
            }
        }
        Reader {
            by_id,
            warnings: Vec::new(),
            model: Model::empty("model"),
            associations: Vec::new(),
            root: doc.root_element(),
        }
    }

    fn warn(&mut self, path: &str, message: impl Into<String>) {
        self.warnings.push(ParseWarning { path: path.to_owned(), message: message.into() });
    }

    fn id_of(&self, node: Node, path: &str) -> ElementId {
        match xmi_attr(node, "id") {
            Some(id) if !id.is_empty() => ElementId::from(id),
            _ => ElementId::from(format!("gen:{path}")),
        }
    }

    fn read(&mut self) -> Model {
        let root = self.root;
        let root_path = format!("/{}", root.tag_name().name());
        let model_node = if root.tag_name().name() == "XMI" {
            let mut found = None;
            for child in root.children().filter(|n| n.is_element()) {
                let path = child_path(&root_path, child);
                if found.is_none() && matches!(child.tag_name().name(), "Model" | "Package") {
                    found = Some((child, path));
                } else {
                    self.warn(&path, format!("unsupported element '{}' skipped", child.tag_name().name()));
                }
            }
            found
        } else if matches!(root.tag_name().name(), "Model" | "Package") {
            Some((root, root_path.clone()))
        } else {
            None
        };
        let Some((model_node, model_path)) = model_node else {
            self.warn(&root_path, "no UML model element found; document yields an empty model");
            return std::mem::replace(&mut self.model, Model::empty("model"));
        };

        let ns = model_node.tag_name().namespace().unwrap_or_default();
        if !KNOWN_UML_NAMESPACES.iter().any(|known| ns.starts_with(known)) {
            self.warn(&model_path, format!("unrecognized UML namespace '{ns}'; reading by structure"));
        }
        self.model.model_id = xmi_attr(model_node, "id")
            .or_else(|| attr(model_node, "name"))
            .unwrap_or("model")
            .to_owned();

        self.read_package(model_node, &model_path);
        for (node, path) in std::mem::take(&mut self.associations) {
            self.read_association(node, &path);
        }
        std::mem::replace(&mut self.model, Model::empty("model"))
    }

    fn read_package(&mut self, node: Node<'a, 'input>, path: &str) {
        for child in node.children().filter(|n| n.is_element()) {
            let child_path = child_path(path, child);
            if child.tag_name().name() != "packagedElement" {
                self.warn(&child_path, format!("unsupported element '{}' skipped", child.tag_name().name()));
                continue;
            }
            match xmi_type(child) {
                Some("Class") => self.read_class(child, &child_path),
                Some("Association") => self.associations.push((child, child_path)),
                Some("Enumeration") => self.read_enumeration(child, &child_path),
                Some("Interaction") => self.read_interaction(child, &child_path),
                Some("Package") | Some("Model") => self.read_package(child, &child_path),
                Some(other) => self.warn(&child_path, format!("unsupported element type 'uml:{other}' skipped")),
                None => self.warn(&child_path, "packaged element without xmi:type skipped"),
            }
        }
    }

    /// Name of the type referenced by a typed element: a `type` id attribute,
    /// or a nested `<type href="...#Name"/>` pointing into a library.
    fn type_name(&self, node: Node) -> String {
        if let Some(type_id) = attr(node, "type") {
            return match self.by_id.get(type_id) {
                Some(target) => attr(*target, "name").unwrap_or(type_id).to_owned(),
                None => type_id.to_owned(),
            };
        }
        node.children()
            .find(|c| c.is_element() && c.tag_name().name() == "type")
            .and_then(|t| attr(t, "href"))
            .map(|href| href.rsplit('#').next().unwrap_or(href).to_owned())
            .unwrap_or_default()
    }

    fn read_class(&mut self, node: Node<'a, 'input>, path: &str) {
        let mut class = Class {
            id: self.id_of(node, path),
            name: attr(node, "name").unwrap_or_default().to_owned(),
            is_abstract: attr(node, "isAbstract") == Some("true"),
            superclass_ids: Vec::new(),
            attributes: Vec::new(),
            operations: Vec::new(),
        };
        for child in node.children().filter(|n| n.is_element()) {
            let child_path = child_path(path, child);
            match child.tag_name().name() {
                "generalization" => match attr(child, "general") {
                    Some(general) => class.superclass_ids.push(general.into()),
                    None => self.warn(&child_path, "generalization without 'general' reference skipped"),
                },
                // Properties that are association ends are read with their association.
                "ownedAttribute" if attr(child, "association").is_some() => {}
                "ownedAttribute" => class.attributes.push(Attribute {
                    id: self.id_of(child, &child_path),
                    name: attr(child, "name").unwrap_or_default().to_owned(),
                    type_name: self.type_name(child),
                    visibility: visibility(child),
                }),
                "ownedOperation" => class.operations.push(self.read_operation(child, &child_path)),
                "ownedBehavior" if xmi_type(child) == Some("Interaction") => {
                    self.read_interaction(child, &child_path)
                }
                other => self.warn(&child_path, format!("unsupported element '{other}' in class skipped")),
            }
        }
        self.model.classes.push(class);
    }

    fn read_operation(&mut self, node: Node<'a, 'input>, path: &str) -> Operation {
        let mut op = Operation {
            id: self.id_of(node, path),
            name: attr(node, "name").unwrap_or_default().to_owned(),
            visibility: visibility(node),
            parameters: Vec::new(),
            return_type_name: None,
        };
        for param in node.children().filter(|n| n.is_element() && n.tag_name().name() == "ownedParameter") {
            let direction = match attr(param, "direction") {
                Some("return") => {
                    op.return_type_name = Some(self.type_name(param));
                    continue;
                }
                Some("out") => Direction::Out,
                Some("inout") => Direction::Inout,
                _ => Direction::In,
            };
            op.parameters.push(Parameter {
                name: attr(param, "name").unwrap_or_default().to_owned(),
                type_name: self.type_name(param),
                direction,
            });
        }
        op
    }

    fn read_enumeration(&mut self, node: Node<'a, 'input>, path: &str) {
        let mut literals = Vec::new();
        for child in node.children().filter(|n| n.is_element()) {
            let child_path = child_path(path, child);
            match child.tag_name().name() {
                "ownedLiteral" => literals.push(attr(child, "name").unwrap_or_default().to_owned()),
                other => self.warn(&child_path, format!("unsupported element '{other}' in enumeration skipped")),
            }
        }
        self.model.enumerations.push(Enumeration {
            id: self.id_of(node, path),
            name: attr(node, "name").unwrap_or_default().to_owned(),
            literals,
        });
    }

    fn read_interaction(&mut self, node: Node<'a, 'input>, path: &str) {
        let mut interaction = Interaction {
            id: self.id_of(node, path),
            name: attr(node, "name").unwrap_or_default().to_owned(),
            lifelines: Vec::new(),
            messages: Vec::new(),
        };
        let mut message_nodes = Vec::new();
        for child in node.children().filter(|n| n.is_element()) {
            let child_path = child_path(path, child);
            match child.tag_name().name() {
                "ownedAttribute" => {}
                "lifeline" => {
                    let lifeline = self.read_lifeline(child, &child_path);
                    interaction.lifelines.push(lifeline);
                }
                "fragment" if xmi_type(child) == Some("MessageOccurrenceSpecification") => {}
                "fragment" => {
                    let kind = xmi_type(child).unwrap_or("untyped");
                    self.warn(&child_path, format!("fragment 'uml:{kind}' is not modeled; skipped"))
                }
                "message" => message_nodes.push((child, child_path)),
                other => self.warn(&child_path, format!("unsupported element '{other}' in interaction skipped")),
            }
        }
        for (child, child_path) in message_nodes {
            if let Some(message) = self.read_message(child, &child_path, &interaction) {
                interaction.messages.push(message);
            }
        }
        self.model.interactions.push(interaction);
    }

    fn read_lifeline(&mut self, node: Node<'a, 'input>, path: &str) -> Lifeline {
        let mut lifeline = Lifeline {
            id: self.id_of(node, path),
            name: attr(node, "name").unwrap_or_default().to_owned(),
            type_ref: None,
            type_name: None,
        };
        if let Some(represents) = attr(node, "represents") {
            match self.by_id.get(represents) {
                Some(property) => lifeline.type_ref = attr(*property, "type").map(ElementId::from),
                None => self.warn(path, format!("represented property '{represents}' not found; lifeline left untyped")),
            }
        }
        lifeline
    }

    /// Lifeline covered by a message end (an occurrence specification).
    fn covered_lifeline(&self, end_id: Option<&str>, interaction: &Interaction) -> Option<ElementId> {
        let end = self.by_id.get(end_id?)?;
        let covered = attr(*end, "covered")?.split_whitespace().next()?;
        interaction
            .lifelines
            .iter()
            .find(|l| l.id.as_str() == covered)
            .map(|l| l.id.clone())
    }

    fn read_message(&mut self, node: Node<'a, 'input>, path: &str, interaction: &Interaction) -> Option<Message> {
        let source = self.covered_lifeline(attr(node, "sendEvent"), interaction);
        let target = self.covered_lifeline(attr(node, "receiveEvent"), interaction);
        let (Some(source), Some(target)) = (source, target) else {
            self.warn(path, "message ends do not resolve to lifelines of this interaction; skipped");
            return None;
        };
        let sort = match message_sort(attr(node, "messageSort")) {
            Some(sort) => sort,
            None => {
                self.warn(path, "unknown messageSort; read as synchronous call");
                MessageSort::Sync
            }
        };
        let mut name = attr(node, "name").unwrap_or_default().to_owned();
        if let Some(signature) = attr(node, "signature") {
            match self.by_id.get(signature) {
                Some(op) if op.tag_name().name() == "ownedOperation" => {
                    name = attr(*op, "name").unwrap_or_default().to_owned();
                }
                _ => self.warn(path, format!("signature '{signature}' does not resolve to an operation")),
            }
        }
        let arguments = node
            .children()
            .filter(|c| c.is_element() && c.tag_name().name() == "argument")
            .map(|arg| attr(arg, "value").or_else(|| attr(arg, "name")).unwrap_or_default().to_owned())
            .collect();
        Some(Message {
            id: self.id_of(node, path),
            name,
            sort,
            source_lifeline_id: source,
            target_lifeline_id: target,
            arguments,
        })
    }

    fn read_association(&mut self, node: Node<'a, 'input>, path: &str) {
        let member_ends: Vec<&str> = match attr(node, "memberEnd") {
            Some(list) => list.split_whitespace().collect(),
            None => node
                .children()
                .filter(|c| c.is_element() && c.tag_name().name() == "ownedEnd")
                .filter_map(|c| xmi_attr(c, "id"))
                .collect(),
        };
        if member_ends.len() != 2 {
            self.warn(path, format!("association with {} member ends skipped", member_ends.len()));
            return;
        }
        let navigable_owned: Vec<&str> = attr(node, "navigableOwnedEnd")
            .map(|l| l.split_whitespace().collect())
            .unwrap_or_default();
        let mut ends = Vec::with_capacity(2);
        for end_id in member_ends {
            let Some(property) = self.by_id.get(end_id).copied() else {
                self.warn(path, format!("member end '{end_id}' not found; association skipped"));
                return;
            };
            let Some(class_id) = attr(property, "type") else {
                self.warn(path, format!("member end '{end_id}' has no type; association skipped"));
                return;
            };
            let owned_by_association = property.tag_name().name() == "ownedEnd";
            ends.push(AssociationEnd {
                class_id: class_id.into(),
                multiplicity: multiplicity(property),
                navigable: !owned_by_association || navigable_owned.contains(&end_id),
            });
        }
        let end_b = ends.pop().expect("two ends");
        let end_a = ends.pop().expect("two ends");
        self.model.associations.push(Association {
            id: self.id_of(node, path),
            name: attr(node, "name").map(str::to_owned),
            end_a,
            end_b,
        });
    }
}

fn multiplicity(property: Node) -> String {
    // An absent bound defaults to 1; a literal without a value attribute is 0.
    let bound = |tag: &str| {
        property
            .children()
            .find(|c| c.is_element() && c.tag_name().name() == tag)
            .map(|c| attr(c, "value").unwrap_or("0").to_owned())
            .unwrap_or_else(|| "1".to_owned())
    };
    let (lower, upper) = (bound("lowerValue"), bound("upperValue"));
    if lower == upper {
        lower
    } else {
        format!("{lower}..{upper}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<uml:Model xmi:version="20131001" xmlns:xmi="http://www.omg.org/spec/XMI/20131001" xmlns:uml="http://www.eclipse.org/uml2/5.0.0/UML" xmi:id="shop" name="Shop">"#;

    fn doc(body: &str) -> String {
        format!("{HEADER}\n{body}\n</uml:Model>\n")
    }

    #[test]
    fn single_class_with_operation() {
        let text = doc(r#"<packagedElement xmi:type="uml:Class" xmi:id="C1" name="Order">
            <ownedOperation xmi:id="O1" name="place"/>
        </packagedElement>"#);
        let report = parse_xmi(&text);
        let model = report.model.unwrap();
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        assert_eq!(model.model_id, "shop");
        assert_eq!(model.classes.len(), 1);
        assert_eq!(model.classes[0].operations.len(), 1);
        assert_eq!(model.classes[0].operations[0].name, "place");
    }

    #[test]
    fn state_machine_skipped_with_warning() {
        let text = doc(r#"<packagedElement xmi:type="uml:Class" xmi:id="C1" name="Order"/>
        <packagedElement xmi:type="uml:StateMachine" xmi:id="SM1" name="Lifecycle"/>"#);
        let report = parse_xmi(&text);
        assert_eq!(report.model.unwrap().classes.len(), 1);
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].path, "/Model/packagedElement[2]");
        assert!(report.warnings[0].message.contains("StateMachine"));
    }

    #[test]
    fn message_without_ends_skipped_with_warning() {
        let text = doc(r#"<packagedElement xmi:type="uml:Interaction" xmi:id="I1" name="Flow">
            <lifeline xmi:id="L1" name="a"/>
            <message xmi:id="M1" name="go"/>
        </packagedElement>"#);
        let report = parse_xmi(&text);
        let model = report.model.unwrap();
        assert!(model.interactions[0].messages.is_empty());
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].path, "/Model/packagedElement[1]/message[1]");
    }

    #[test]
    fn malformed_xml_is_fatal() {
        let report = parse_xmi("<uml:Model><packagedElement></uml:Model>");
        assert_eq!(report.fatal.unwrap().kind, FatalKind::Syntax);
    }

    #[test]
    fn missing_ids_are_synthesized_from_paths() {
        let text = doc(r#"<packagedElement xmi:type="uml:Class" name="Order"><ownedOperation name="place"/></packagedElement>"#);
        let model = parse_xmi(&text).model.unwrap();
        assert_eq!(model.classes[0].id.as_str(), "gen:/Model/packagedElement[1]");
        assert_eq!(
            model.classes[0].operations[0].id.as_str(),
            "gen:/Model/packagedElement[1]/ownedOperation[1]"
        );
    }

    #[test]
    fn unknown_namespace_warns_but_reads() {
        let text = r#"<uml:Model xmlns:xmi="http://www.omg.org/XMI" xmlns:uml="urn:other-uml" xmi:id="m">
            <packagedElement xmi:type="uml:Class" xmi:id="C1" name="A"/></uml:Model>"#;
        let report = parse_xmi(text);
        assert_eq!(report.model.unwrap().classes.len(), 1);
        assert!(report.warnings[0].message.contains("urn:other-uml"));
    }

    #[test]
    fn multiplicity_bounds() {
        let text = doc(r#"<packagedElement xmi:type="uml:Class" xmi:id="C1" name="A"/>
        <packagedElement xmi:type="uml:Class" xmi:id="C2" name="B"/>
        <packagedElement xmi:type="uml:Association" xmi:id="A1" memberEnd="e1 e2" navigableOwnedEnd="e2">
          <ownedEnd xmi:id="e1" type="C1" association="A1">
            <lowerValue xmi:type="uml:LiteralInteger" xmi:id="lv"/>
            <upperValue xmi:type="uml:LiteralUnlimitedNatural" xmi:id="uv" value="*"/>
          </ownedEnd>
          <ownedEnd xmi:id="e2" type="C2" association="A1"/>
        </packagedElement>"#);
        let model = parse_xmi(&text).model.unwrap();
        let assoc = &model.associations[0];
        assert_eq!(assoc.end_a.multiplicity, "0..*");
        assert!(!assoc.end_a.navigable);
        assert_eq!(assoc.end_b.multiplicity, "1");
        assert!(assoc.end_b.navigable);
    }
}
