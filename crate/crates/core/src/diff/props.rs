//! Per-kind property tables: names, read as JSON, write from JSON.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::model::{Association, Attribute, Class, Enumeration, Interaction, Lifeline, Message, Operation};

pub(crate) trait Properties: Clone {
    const NAMES: &'static [&'static str];

    fn get(&self, property: &str) -> Option<Value>;

    fn set(&mut self, property: &str, value: Value) -> Result<(), String>;

    /// Writes `value` to a scratch copy and reads it back, so client values
    /// that spell defaults differently compare equal to stored ones.
    fn normalize(&self, property: &str, value: Value) -> Result<Value, String> {
        let mut probe = self.clone();
        probe.set(property, value)?;
        Ok(probe.get(property).expect("property settable implies readable"))
    }
}

fn read<T: Serialize>(value: &T) -> Option<Value> {
    Some(serde_json::to_value(value).expect("property serialization is infallible"))
}

fn write<T: DeserializeOwned>(slot: &mut T, property: &str, value: Value) -> Result<(), String> {
    *slot = serde_json::from_value(value).map_err(|e| format!("bad value for '{property}': {e}"))?;
    Ok(())
}

fn unknown(property: &str) -> String {
    format!("unknown property '{property}'")
}

impl Properties for Class {
    const NAMES: &'static [&'static str] = &["name", "isAbstract", "superclassIds"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "isAbstract" => read(&self.is_abstract),
            "superclassIds" => read(&self.superclass_ids),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "isAbstract" => write(&mut self.is_abstract, property, value),
            "superclassIds" => write(&mut self.superclass_ids, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Operation {
    const NAMES: &'static [&'static str] = &["name", "visibility", "returnTypeName", "parameterList"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "visibility" => read(&self.visibility),
            "returnTypeName" => read(&self.return_type_name),
            "parameterList" => read(&self.parameters),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "visibility" => write(&mut self.visibility, property, value),
            "returnTypeName" => write(&mut self.return_type_name, property, value),
            "parameterList" => write(&mut self.parameters, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Attribute {
    const NAMES: &'static [&'static str] = &["name", "typeName", "visibility"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "typeName" => read(&self.type_name),
            "visibility" => read(&self.visibility),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "typeName" => write(&mut self.type_name, property, value),
            "visibility" => write(&mut self.visibility, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Enumeration {
    const NAMES: &'static [&'static str] = &["name", "literals"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "literals" => read(&self.literals),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "literals" => write(&mut self.literals, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Association {
    const NAMES: &'static [&'static str] = &[
        "name",
        "endA.classId",
        "endA.multiplicity",
        "endA.navigable",
        "endB.classId",
        "endB.multiplicity",
        "endB.navigable",
    ];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "endA.classId" => read(&self.end_a.class_id),
            "endA.multiplicity" => read(&self.end_a.multiplicity),
            "endA.navigable" => read(&self.end_a.navigable),
            "endB.classId" => read(&self.end_b.class_id),
            "endB.multiplicity" => read(&self.end_b.multiplicity),
            "endB.navigable" => read(&self.end_b.navigable),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "endA.classId" => write(&mut self.end_a.class_id, property, value),
            "endA.multiplicity" => write(&mut self.end_a.multiplicity, property, value),
            "endA.navigable" => write(&mut self.end_a.navigable, property, value),
            "endB.classId" => write(&mut self.end_b.class_id, property, value),
            "endB.multiplicity" => write(&mut self.end_b.multiplicity, property, value),
            "endB.navigable" => write(&mut self.end_b.navigable, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Interaction {
    const NAMES: &'static [&'static str] = &["name"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Lifeline {
    const NAMES: &'static [&'static str] = &["name", "typeRef", "typeName"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "typeRef" => read(&self.type_ref),
            "typeName" => read(&self.type_name),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "typeRef" => write(&mut self.type_ref, property, value),
            "typeName" => write(&mut self.type_name, property, value),
            _ => Err(unknown(property)),
        }
    }
}

impl Properties for Message {
    const NAMES: &'static [&'static str] = &["name", "sort", "sourceLifelineId", "targetLifelineId", "arguments"];

    fn get(&self, property: &str) -> Option<Value> {
        match property {
            "name" => read(&self.name),
            "sort" => read(&self.sort),
            "sourceLifelineId" => read(&self.source_lifeline_id),
            "targetLifelineId" => read(&self.target_lifeline_id),
            "arguments" => read(&self.arguments),
            _ => None,
        }
    }

    fn set(&mut self, property: &str, value: Value) -> Result<(), String> {
        match property {
            "name" => write(&mut self.name, property, value),
            "sort" => write(&mut self.sort, property, value),
            "sourceLifelineId" => write(&mut self.source_lifeline_id, property, value),
            "targetLifelineId" => write(&mut self.target_lifeline_id, property, value),
            "arguments" => write(&mut self.arguments, property, value),
            _ => Err(unknown(property)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, Parameter, Visibility};

    #[test]
    fn every_listed_property_round_trips() {
        let op = Operation {
            id: "O1".into(),
            name: "f".into(),
            visibility: Visibility::Private,
            parameters: vec![Parameter { name: "a".into(), type_name: "int".into(), direction: Direction::Out }],
            return_type_name: Some("int".into()),
        };
        for name in Operation::NAMES {
            let mut copy = op.clone();
            copy.set(name, op.get(name).unwrap()).unwrap();
            assert_eq!(copy, op);
        }
    }

    #[test]
    fn null_clears_optional() {
        let mut lifeline = Lifeline { id: "L1".into(), name: "l".into(), type_ref: Some("C1".into()), type_name: None };
        lifeline.set("typeRef", Value::Null).unwrap();
        assert_eq!(lifeline.type_ref, None);
    }

    #[test]
    fn normalize_fills_defaults() {
        let op = Operation {
            id: "O1".into(),
            name: "f".into(),
            visibility: Visibility::Public,
            parameters: vec![],
            return_type_name: None,
        };
        let spelled = serde_json::json!([{"name": "a", "typeName": "int", "direction": "in"}]);
        let terse = serde_json::json!([{"name": "a", "typeName": "int"}]);
        assert_eq!(op.normalize("parameterList", spelled).unwrap(), op.normalize("parameterList", terse).unwrap());
        assert!(op.normalize("parameterList", serde_json::json!(3)).is_err());
    }
}
