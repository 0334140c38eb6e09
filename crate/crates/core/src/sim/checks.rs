//! Single-seed property checks shared by the test suites.

use std::collections::BTreeSet;

use super::pairs::{generate_pair, mutate};
use super::rng::Rng;
use crate::diff::{apply_in_place, diff, touched_keys};
use crate::model::{DepKey, Snapshot};
use crate::rules::{evaluate, subjects_of, RuleId};

/// `fold(apply, before, diff(before, after)) == after` for the pair of `seed`.
/// Returns the number of events on success.
pub fn diff_round_trip(seed: u64) -> Result<usize, String> {
    let (before, after) = generate_pair(seed);
    let events = diff(&before, &after).map_err(|e| format!("seed {seed}: {e}"))?;
    let mut work = before.clone();
    for event in &events {
        apply_in_place(&mut work, event).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    work.revision = after.revision;
    if work != after {
        return Err(format!("seed {seed}: folded model differs from target after {} events", events.len()));
    }
    if !diff(&after, &after).map_err(|e| e.to_string())?.is_empty() {
        return Err(format!("seed {seed}: self-diff is not empty"));
    }
    Ok(events.len())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// The mutation stayed outside the read-set and the result was unchanged.
    Held,
    /// The mutation touched the read-set, removed the subject, or changed nothing.
    Inapplicable,
    Violated(String),
}

/// Evaluates one random rule instance, mutates the model, and re-evaluates
/// when no key touched by the mutation is in the first read-set.
pub fn read_set_probe(seed: u64) -> ProbeOutcome {
    let mut rng = Rng::new(seed.wrapping_mul(31).wrapping_add(7));
    let (model, _) = generate_pair(seed);
    let before = Snapshot::new(model.clone());
    let instances: Vec<(RuleId, String)> = RuleId::ALL
        .iter()
        .flat_map(|&rule| subjects_of(rule, &before).into_iter().map(move |s| (rule, s.as_str().to_owned())))
        .collect();
    let Some((rule, subject)) = rng.pick(&instances).cloned() else {
        return ProbeOutcome::Inapplicable;
    };
    let first = match evaluate(rule, &before, &subject) {
        Ok(result) => result,
        Err(e) => return ProbeOutcome::Violated(format!("seed {seed}: {rule} on {subject}: {e}")),
    };

    let mut after = model.clone();
    let edits = rng.range((1, 3));
    mutate(&mut rng, &mut after, edits);
    let after = after.normalized();
    let events = match diff(&model, &after) {
        Ok(events) if !events.is_empty() => events,
        Ok(_) => return ProbeOutcome::Inapplicable,
        Err(e) => return ProbeOutcome::Violated(format!("seed {seed}: {e}")),
    };
    let mut work = model.clone();
    let mut keys = Vec::new();
    for event in &events {
        touched_keys(&work, event, &mut keys);
        if let Err(e) = apply_in_place(&mut work, event) {
            return ProbeOutcome::Violated(format!("seed {seed}: {e}"));
        }
        touched_keys(&work, event, &mut keys);
    }
    let touched: BTreeSet<DepKey> = keys.into_iter().collect();
    if touched.iter().any(|k| first.read_set.contains(k)) {
        return ProbeOutcome::Inapplicable;
    }

    let later = Snapshot::new(work);
    match evaluate(rule, &later, &subject) {
        Ok(second) if second == first => ProbeOutcome::Held,
        Ok(second) => ProbeOutcome::Violated(format!(
            "seed {seed}: {rule} on {subject} changed outside its read-set: {:?} -> {:?}",
            first.diagnostics, second.diagnostics
        )),
        Err(e) => ProbeOutcome::Violated(format!("seed {seed}: {rule} on {subject} vanished: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps() {
        for seed in 0..100 {
            diff_round_trip(seed).unwrap();
            if let ProbeOutcome::Violated(detail) = read_set_probe(seed) {
                panic!("{detail}");
            }
        }
    }
}
