use hv_core::model::Snapshot;
use hv_core::rules::Diagnostic;

/// Human-readable location of an element: `Interaction/message#id`,
/// `Class.operation#id`, `Class#id` and so on. Unknown ids render as `#id`.
pub fn element_path(snapshot: &Snapshot, id: &str) -> String {
    if let Some((interaction, message)) = snapshot.message(id) {
        return format!("{}/{}#{id}", interaction.name, message.name);
    }
    if let Some((class, op)) = snapshot.operation(id) {
        return format!("{}.{}#{id}", class.name, op.name);
    }
    if let Some((interaction, lifeline)) = snapshot.lifeline(id) {
        return format!("{}/{}#{id}", interaction.name, lifeline.name);
    }
    if let Some((class, attribute)) = snapshot.attribute(id) {
        return format!("{}.{}#{id}", class.name, attribute.name);
    }
    let name = snapshot
        .class(id)
        .map(|c| c.name.as_str())
        .or_else(|| snapshot.interaction(id).map(|i| i.name.as_str()))
        .or_else(|| snapshot.enumeration(id).map(|e| e.name.as_str()))
        .or_else(|| snapshot.association(id).and_then(|a| a.name.as_deref()))
        .unwrap_or_default();
    format!("{name}#{id}")
}

/// `SEVERITY ruleId elementPath: message`
pub fn render_line(snapshot: &Snapshot, d: &Diagnostic) -> String {
    format!(
        "{} {} {}: {}",
        d.severity.as_str().to_uppercase(),
        d.rule_id,
        element_path(snapshot, d.element_id.as_str()),
        d.message
    )
}

pub fn render_ndjson(diagnostics: &[Diagnostic]) -> String {
    diagnostics.iter().map(|d| serde_json::to_string(d).expect("serializable diagnostic") + "\n").collect()
}
