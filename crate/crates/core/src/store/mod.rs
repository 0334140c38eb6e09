//! Revisioned diagnostic cache.
//!
//! Each model has one immutable [`ModelEntry`] holding its current diagnostic
//! set, a summary and a bounded history of deltas. Writers build a new entry
//! and swap it into the backend; readers see either the old or the new one.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::DiagnosticDelta;
use crate::model::ElementId;
use crate::rules::{sort_diagnostics, Diagnostic, RuleId, Severity};

/// Deltas retained per model for stream catch-up.
pub const DEFAULT_HISTORY: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub model_id: String,
    pub revision: u64,
    pub total: u64,
    pub by_rule: BTreeMap<String, u64>,
    pub by_severity: BTreeMap<String, u64>,
}

impl Summary {
    /// Counts `diagnostics`; rules and severities with no entries are left out.
    pub fn recount(model_id: &str, revision: u64, diagnostics: &[Diagnostic]) -> Self {
        let mut summary = Summary {
            model_id: model_id.to_owned(),
            revision,
            total: diagnostics.len() as u64,
            by_rule: BTreeMap::new(),
            by_severity: BTreeMap::new(),
        };
        for d in diagnostics {
            *summary.by_rule.entry(d.rule_id.as_str().to_owned()).or_default() += 1;
            *summary.by_severity.entry(d.severity.as_str().to_owned()).or_default() += 1;
        }
        summary
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelEntry {
    pub model_id: String,
    pub revision: u64,
    /// Sorted like the engine's output.
    pub current: Vec<Diagnostic>,
    pub summary: Summary,
    /// Revision the oldest retained delta starts from.
    pub history_base: u64,
    pub history: VecDeque<DiagnosticDelta>,
}

/// Key-value contract for per-model entries. `put` replaces the whole entry
/// atomically.
pub trait StoreBackend: Send + Sync {
    fn get(&self, key: &str) -> Option<Arc<ModelEntry>>;
    fn put(&self, key: &str, entry: Arc<ModelEntry>);
    fn delete(&self, key: &str) -> bool;
}

#[derive(Debug, Default)]
pub struct MemoryBackend {
    entries: RwLock<HashMap<String, Arc<ModelEntry>>>,
}

impl StoreBackend for MemoryBackend {
    fn get(&self, key: &str) -> Option<Arc<ModelEntry>> {
        self.entries.read().expect("store lock").get(key).cloned()
    }

    fn put(&self, key: &str, entry: Arc<ModelEntry>) {
        self.entries.write().expect("store lock").insert(key.to_owned(), entry);
    }

    fn delete(&self, key: &str) -> bool {
        self.entries.write().expect("store lock").remove(key).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("model '{model_id}' is at revision {stored}; delta for revision {got} needs a resync")]
    ResyncRequired { model_id: String, stored: u64, got: u64 },
    #[error("delta for revision {revision} does not fit the stored set: {detail}")]
    DeltaInconsistent { revision: u64, detail: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Filter {
    pub rule_id: Option<RuleId>,
    pub severity: Option<Severity>,
    pub interaction_id: Option<ElementId>,
}

impl Filter {
    pub fn matches(&self, d: &Diagnostic) -> bool {
        self.rule_id.is_none_or(|r| r == d.rule_id)
            && self.severity.is_none_or(|s| s == d.severity)
            && self.interaction_id.as_ref().is_none_or(|i| d.interaction_id.as_ref() == Some(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurrentView {
    pub revision: u64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltasSince {
    Deltas(Vec<DiagnosticDelta>),
    /// History no longer reaches back far enough; fetch the current set.
    ResyncRequired,
}

pub struct Store {
    backend: Arc<dyn StoreBackend>,
    history: usize,
    writer: Mutex<()>,
}

impl Default for Store {
    fn default() -> Self {
        Store::new(Arc::new(MemoryBackend::default()), DEFAULT_HISTORY)
    }
}

impl Store {
    pub fn new(backend: Arc<dyn StoreBackend>, history: usize) -> Self {
        Store { backend, history, writer: Mutex::new(()) }
    }

    /// Replaces everything stored for `model_id` with a full diagnostic set.
    pub fn reset(&self, model_id: &str, revision: u64, diagnostics: Vec<Diagnostic>) -> Arc<ModelEntry> {
        let _guard = self.writer.lock().expect("writer lock");
        let entry = Arc::new(entry_with(model_id, revision, diagnostics, revision, VecDeque::new()));
        self.backend.put(model_id, Arc::clone(&entry));
        entry
    }

    pub fn remove(&self, model_id: &str) -> bool {
        let _guard = self.writer.lock().expect("writer lock");
        self.backend.delete(model_id)
    }

    /// Applies a delta on top of the stored set. The delta must be for the
    /// revision after the stored one; an unknown model starts empty.
    pub fn put_delta(&self, model_id: &str, delta: &DiagnosticDelta) -> Result<Arc<ModelEntry>, StoreError> {
        let _guard = self.writer.lock().expect("writer lock");
        let (mut current, base, history) = match self.backend.get(model_id) {
            Some(entry) => {
                if delta.revision != entry.revision + 1 {
                    return Err(StoreError::ResyncRequired {
                        model_id: model_id.to_owned(),
                        stored: entry.revision,
                        got: delta.revision,
                    });
                }
                (entry.current.clone(), entry.history_base, entry.history.clone())
            }
            None => (Vec::new(), delta.revision.saturating_sub(1), VecDeque::new()),
        };
        let inconsistent = |detail: String| StoreError::DeltaInconsistent { revision: delta.revision, detail };
        for gone in &delta.removed {
            let at = current
                .iter()
                .position(|d| d.same_finding(gone))
                .ok_or_else(|| inconsistent(format!("{} on {} is not stored", gone.rule_id, gone.element_id)))?;
            current.swap_remove(at);
        }
        for new in &delta.added {
            if current.iter().any(|d| d.same_finding(new)) {
                return Err(inconsistent(format!("{} on {} is already stored", new.rule_id, new.element_id)));
            }
            current.push(new.clone());
        }
        let mut history = history;
        let mut base = base;
        history.push_back(delta.clone());
        while history.len() > self.history {
            history.pop_front();
            base += 1;
        }
        let entry = Arc::new(entry_with(model_id, delta.revision, current, base, history));
        self.backend.put(model_id, Arc::clone(&entry));
        Ok(entry)
    }

    pub fn entry(&self, model_id: &str) -> Option<Arc<ModelEntry>> {
        self.backend.get(model_id)
    }

    /// Stored diagnostics matching `filter`, sorted by rule then subject.
    pub fn get_current(&self, model_id: &str, filter: &Filter) -> CurrentView {
        match self.backend.get(model_id) {
            Some(entry) => CurrentView {
                revision: entry.revision,
                diagnostics: entry.current.iter().filter(|d| filter.matches(d)).cloned().collect(),
            },
            None => CurrentView { revision: 0, diagnostics: Vec::new() },
        }
    }

    pub fn get_summary(&self, model_id: &str) -> Summary {
        match self.backend.get(model_id) {
            Some(entry) => entry.summary.clone(),
            None => Summary::recount(model_id, 0, &[]),
        }
    }

    /// Deltas after `revision`, oldest first, when the history still covers
    /// them.
    pub fn get_deltas_since(&self, model_id: &str, revision: u64) -> DeltasSince {
        let Some(entry) = self.backend.get(model_id) else {
            return if revision == 0 { DeltasSince::Deltas(Vec::new()) } else { DeltasSince::ResyncRequired };
        };
        if revision > entry.revision || revision < entry.history_base {
            return DeltasSince::ResyncRequired;
        }
        DeltasSince::Deltas(entry.history.iter().filter(|d| d.revision > revision).cloned().collect())
    }
}

fn entry_with(
    model_id: &str,
    revision: u64,
    mut current: Vec<Diagnostic>,
    history_base: u64,
    history: VecDeque<DiagnosticDelta>,
) -> ModelEntry {
    for d in &mut current {
        d.model_revision = revision;
    }
    sort_diagnostics(&mut current);
    let summary = Summary::recount(model_id, revision, &current);
    ModelEntry { model_id: model_id.to_owned(), revision, current, summary, history_base, history }
}
