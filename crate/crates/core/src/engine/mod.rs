//! Incremental consistency checking.
//!
//! [`EngineState`] keeps one [`EvaluationResult`] per (rule, subject) pair and
//! an index from each dependency key to the pairs whose read-sets contain it.
//! A batch of change events is applied to a copy of the snapshot; only the
//! pairs reachable from the touched keys are evaluated again.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{apply_in_place, touched_keys, ChangeEvent, StaleEvent};
use crate::model::{DepKey, ElementId, Model, Snapshot};
use crate::rules::{evaluate, is_subject, sort_diagnostics, subjects_of, Diagnostic, EvaluationResult, RuleId};

/// One rule applied to one subject.
pub type RuleInstance = (RuleId, ElementId);

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiagnosticDelta {
    pub revision: u64,
    pub added: Vec<Diagnostic>,
    pub removed: Vec<Diagnostic>,
}

impl DiagnosticDelta {
    pub fn empty(revision: u64) -> Self {
        DiagnosticDelta { revision, added: Vec::new(), removed: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("sequence gap: expected seq {expected}, got {got}; resync required")]
    ResyncRequired { expected: u64, got: u64 },
    #[error(transparent)]
    StaleEvent(#[from] StaleEvent),
}

#[derive(Debug, Clone)]
pub struct EngineState {
    snapshot: Arc<Snapshot>,
    results: HashMap<RuleInstance, EvaluationResult>,
    dep_index: HashMap<DepKey, HashSet<RuleInstance>>,
    last_seq: u64,
    eval_counter: u64,
    last_evaluations: u64,
    skip_reevaluation: bool,
}

impl EngineState {
    /// Evaluates every rule instance of `model` once.
    pub fn init(model: Model) -> (Self, Vec<Diagnostic>) {
        Self::init_at(model, 0)
    }

    /// As [`init`](Self::init), treating events up to `last_seq` as already
    /// applied.
    pub fn init_at(model: Model, last_seq: u64) -> (Self, Vec<Diagnostic>) {
        let snapshot = Arc::new(Snapshot::new(model));
        let mut state = EngineState {
            snapshot: Arc::clone(&snapshot),
            results: HashMap::new(),
            dep_index: HashMap::new(),
            last_seq,
            eval_counter: 0,
            last_evaluations: 0,
            skip_reevaluation: false,
        };
        for rule in RuleId::ALL {
            for subject in subjects_of(rule, &snapshot) {
                let result = evaluate(rule, &snapshot, subject.as_str()).expect("listed subject");
                state.eval_counter += 1;
                state.index_insert(&(rule, subject.clone()), &result);
                state.results.insert((rule, subject), result);
            }
        }
        state.last_evaluations = state.eval_counter;
        let diagnostics = state.current();
        (state, diagnostics)
    }

    pub fn snapshot(&self) -> &Arc<Snapshot> {
        &self.snapshot
    }

    pub fn revision(&self) -> u64 {
        self.snapshot.revision()
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Rule evaluations performed since `init`, including its own.
    pub fn eval_counter(&self) -> u64 {
        self.eval_counter
    }

    /// Rule evaluations performed by the latest `init` or `process` call.
    pub fn last_evaluations(&self) -> u64 {
        self.last_evaluations
    }

    pub fn instance_count(&self) -> usize {
        self.results.len()
    }

    pub fn result(&self, rule: RuleId, subject: &str) -> Option<&EvaluationResult> {
        self.results.get(&(rule, ElementId::from(subject)))
    }

    /// Every live diagnostic, stamped with the current revision and sorted
    /// like [`full_check`].
    pub fn current(&self) -> Vec<Diagnostic> {
        let revision = self.revision();
        let mut out: Vec<Diagnostic> = self
            .results
            .values()
            .flat_map(|r| r.diagnostics.iter())
            .map(|d| Diagnostic { model_revision: revision, ..d.clone() })
            .collect();
        sort_diagnostics(&mut out);
        out
    }

    /// Applies one batch of events and re-evaluates the affected rule
    /// instances. Events with `seq <= last_seq` are dropped; the remaining
    /// ones must continue `last_seq` without gaps. On error the state is
    /// unchanged.
    pub fn process(&mut self, events: &[ChangeEvent]) -> Result<DiagnosticDelta, EngineError> {
        let fresh: Vec<&ChangeEvent> = events.iter().filter(|e| e.seq > self.last_seq).collect();
        if fresh.is_empty() {
            self.last_evaluations = 0;
            return Ok(DiagnosticDelta::empty(self.revision()));
        }
        for (i, event) in fresh.iter().enumerate() {
            let expected = self.last_seq + 1 + i as u64;
            if event.seq != expected {
                return Err(EngineError::ResyncRequired { expected, got: event.seq });
            }
        }

        let mut model = self.snapshot.model().clone();
        let mut touched: Vec<DepKey> = Vec::new();
        for event in &fresh {
            touched_keys(&model, event, &mut touched);
            apply_in_place(&mut model, event)?;
            touched_keys(&model, event, &mut touched);
        }
        model.revision += 1;
        let snapshot = Arc::new(Snapshot::new(model));

        // Instances whose read-sets saw a touched key, and subjects whose
        // existence or kind may have changed.
        let mut dirty: BTreeSet<RuleInstance> = BTreeSet::new();
        let mut candidates: BTreeSet<&ElementId> = BTreeSet::new();
        for key in &touched {
            if let Some(hits) = self.dep_index.get(key) {
                dirty.extend(hits.iter().cloned());
            }
            if let DepKey::Element(id) = key {
                candidates.insert(id);
            }
        }
        let mut dead: Vec<RuleInstance> = Vec::new();
        for id in candidates {
            for rule in RuleId::ALL {
                let instance = (rule, id.clone());
                let was = self.results.contains_key(&instance);
                let is = is_subject(rule, &snapshot, id.as_str());
                if was && !is {
                    dirty.remove(&instance);
                    dead.push(instance);
                } else if !was && is {
                    dirty.insert(instance);
                }
            }
        }
        dirty.retain(|instance| is_subject(instance.0, &snapshot, instance.1.as_str()));

        let revision = snapshot.revision();
        let mut delta = DiagnosticDelta::empty(revision);
        for instance in dead {
            let old = self.results.remove(&instance).expect("dead instance was live");
            self.index_remove(&instance, &old);
            delta.removed.extend(old.diagnostics);
        }
        let mut evaluations = 0;
        for instance in dirty {
            let known = self.results.contains_key(&instance);
            if known && self.skip_reevaluation {
                continue;
            }
            let result = evaluate(instance.0, &snapshot, instance.1.as_str()).expect("live subject");
            evaluations += 1;
            let old = self.results.remove(&instance).unwrap_or_default();
            self.index_remove(&instance, &old);
            self.index_insert(&instance, &result);
            for d in &old.diagnostics {
                if !result.diagnostics.iter().any(|n| n.same_finding(d)) {
                    delta.removed.push(d.clone());
                }
            }
            for d in &result.diagnostics {
                if !old.diagnostics.iter().any(|o| o.same_finding(d)) {
                    delta.added.push(d.clone());
                }
            }
            self.results.insert(instance, result);
        }
        sort_diagnostics(&mut delta.added);
        sort_diagnostics(&mut delta.removed);

        self.snapshot = snapshot;
        self.last_seq = fresh.last().expect("non-empty").seq;
        self.eval_counter += evaluations;
        self.last_evaluations = evaluations;
        Ok(delta)
    }

    /// Checks that the dependency index is exactly the inverse of the stored
    /// read-sets and that results cover every live rule instance.
    pub fn audit(&self) -> Result<(), String> {
        let mut inverse: HashMap<&DepKey, HashSet<&RuleInstance>> = HashMap::new();
        for (instance, result) in &self.results {
            for key in &result.read_set {
                inverse.entry(key).or_default().insert(instance);
            }
        }
        if inverse.len() != self.dep_index.len() {
            return Err(format!("index has {} keys, read-sets have {}", self.dep_index.len(), inverse.len()));
        }
        for (key, hits) in &self.dep_index {
            let expected = inverse.get(key).ok_or_else(|| format!("index key {key} read by nothing"))?;
            if hits.len() != expected.len() || !hits.iter().all(|h| expected.contains(h)) {
                return Err(format!("index entry for {key} disagrees with read-sets"));
            }
        }
        let mut live = 0;
        for rule in RuleId::ALL {
            for subject in subjects_of(rule, &self.snapshot) {
                live += 1;
                if !self.results.contains_key(&(rule, subject.clone())) {
                    return Err(format!("no result for {rule} on {subject}"));
                }
            }
        }
        if live != self.results.len() {
            return Err(format!("{} results for {live} live instances", self.results.len()));
        }
        Ok(())
    }

    /// Test hook: when set, `process` evaluates new subjects only, leaving
    /// stale results in place.
    #[doc(hidden)]
    pub fn inject_skip_reevaluation(&mut self, on: bool) {
        self.skip_reevaluation = on;
    }

    fn index_insert(&mut self, instance: &RuleInstance, result: &EvaluationResult) {
        for key in &result.read_set {
            self.dep_index.entry(key.clone()).or_default().insert(instance.clone());
        }
    }

    fn index_remove(&mut self, instance: &RuleInstance, result: &EvaluationResult) {
        for key in &result.read_set {
            if let Some(hits) = self.dep_index.get_mut(key) {
                hits.remove(instance);
                if hits.is_empty() {
                    self.dep_index.remove(key);
                }
            }
        }
    }
}

/// Stateless evaluation of every rule instance, sorted by rule, subject and
/// message.
pub fn full_check(model: &Model) -> Vec<Diagnostic> {
    full_check_snapshot(&Snapshot::new(model.clone()))
}

pub fn full_check_snapshot(snapshot: &Snapshot) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for rule in RuleId::ALL {
        for subject in subjects_of(rule, snapshot) {
            out.extend(evaluate(rule, snapshot, subject.as_str()).expect("listed subject").diagnostics);
        }
    }
    sort_diagnostics(&mut out);
    out
}

/// Number of evaluations [`full_check`] performs on `snapshot`.
pub fn full_evaluation_count(snapshot: &Snapshot) -> u64 {
    RuleId::ALL.iter().map(|rule| subjects_of(*rule, snapshot).len() as u64).sum()
}
