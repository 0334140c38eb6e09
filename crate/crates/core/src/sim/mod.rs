//! Seeded workloads and the incremental-vs-batch equivalence harness.

mod checks;
mod generate;
mod pairs;
mod rng;

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::engine::{full_check_snapshot, full_evaluation_count, EngineState};

pub use checks::{diff_round_trip, read_set_probe, ProbeOutcome};
pub use generate::{generate_edits, generate_model, generate_model_with_rng, EditKind, EditMix, SimParams};
pub use pairs::{generate_pair, mutate};
pub use rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Equivalence {
    pub passed: bool,
    /// First step whose incremental diagnostics differed from the oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WallTimes {
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReport {
    pub seed: u64,
    pub steps: usize,
    pub events: u64,
    pub equivalence: Equivalence,
    pub incremental_evals: u64,
    pub batch_evals_equivalent: u64,
    pub speedup_ratio: f64,
    /// Per-step `process` latency; only measured by [`benchmark`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_times: Option<WallTimes>,
}

impl SimReport {
    pub fn passed(&self) -> bool {
        self.equivalence.passed
    }

    /// Plain `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed() { "PASS".to_owned() } else { "FAIL".to_owned() };
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "steps: {}", self.steps);
        let _ = writeln!(out, "events: {}", self.events);
        let _ = writeln!(out, "equivalence: {verdict}");
        if let Some(step) = self.equivalence.first_failure_step {
            let _ = writeln!(out, "firstFailureStep: {step}");
        }
        if let Some(detail) = &self.equivalence.detail {
            let _ = writeln!(out, "detail: {detail}");
        }
        let _ = writeln!(out, "incrementalEvals: {}", self.incremental_evals);
        let _ = writeln!(out, "batchEvalsEquivalent: {}", self.batch_evals_equivalent);
        let _ = writeln!(out, "speedupRatio: {:.2}", self.speedup_ratio);
        if let Some(w) = &self.wall_times {
            let _ = writeln!(out, "p50Ms: {:.3}", w.p50_ms);
            let _ = writeln!(out, "p95Ms: {:.3}", w.p95_ms);
            let _ = writeln!(out, "maxMs: {:.3}", w.max_ms);
            let _ = writeln!(out, "totalMs: {:.1}", w.total_ms);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record per-step `process` latency.
    pub timed: bool,
    /// Check index inversion after every step.
    pub audit: bool,
    /// Make the engine skip re-evaluation, so the oracle must catch it.
    pub inject_fault: bool,
}

/// Runs `params.steps` generated batches through the engine, comparing
/// against the batch oracle after each one. Stops at the first mismatch.
pub fn run(params: &SimParams, options: RunOptions) -> SimReport {
    let (model, mut rng) = generate_model_with_rng(params);
    let (mut state, _) = EngineState::init(model);
    state.inject_skip_reevaluation(options.inject_fault);
    let mut report = SimReport {
        seed: params.seed,
        steps: params.steps,
        events: 0,
        equivalence: Equivalence { passed: true, first_failure_step: None, detail: None },
        incremental_evals: 0,
        batch_evals_equivalent: 0,
        speedup_ratio: 1.0,
        wall_times: None,
    };
    let mut times: Vec<f64> = Vec::new();
    for step in 1..=params.steps {
        let batch = generate_edits(&mut rng, state.snapshot().model(), params, state.last_seq() + 1);
        report.events += batch.len() as u64;
        let started = Instant::now();
        let outcome = state.process(&batch);
        let elapsed = started.elapsed().as_secs_f64() * 1000.0;
        if let Err(e) = outcome {
            report.equivalence = Equivalence { passed: false, first_failure_step: Some(step), detail: Some(e.to_string()) };
            break;
        }
        times.push(elapsed);
        report.incremental_evals += state.last_evaluations();
        report.batch_evals_equivalent += full_evaluation_count(state.snapshot());
        let oracle = full_check_snapshot(state.snapshot());
        let current = state.current();
        if current != oracle {
            let detail = format!("incremental has {} diagnostics, oracle {}", current.len(), oracle.len());
            report.equivalence = Equivalence { passed: false, first_failure_step: Some(step), detail: Some(detail) };
            break;
        }
        if options.audit {
            if let Err(detail) = state.audit() {
                report.equivalence =
                    Equivalence { passed: false, first_failure_step: Some(step), detail: Some(format!("audit: {detail}")) };
                break;
            }
        }
    }
    if params.steps > 0 {
        report.speedup_ratio = report.batch_evals_equivalent as f64 / report.incremental_evals.max(1) as f64;
    }
    if options.timed {
        report.wall_times = Some(percentiles(&mut times));
    }
    report
}

pub fn verify_equivalence(params: &SimParams) -> SimReport {
    run(params, RunOptions::default())
}

pub fn benchmark(params: &SimParams) -> SimReport {
    run(params, RunOptions { timed: true, ..RunOptions::default() })
}

/// Nearest-rank percentiles over per-step latencies in milliseconds.
pub fn percentiles(times: &mut [f64]) -> WallTimes {
    times.sort_by(f64::total_cmp);
    let rank = |p: f64| -> f64 {
        if times.is_empty() {
            return 0.0;
        }
        let idx = ((p * times.len() as f64).ceil() as usize).clamp(1, times.len()) - 1;
        times[idx]
    };
    WallTimes {
        p50_ms: rank(0.50),
        p95_ms: rank(0.95),
        max_ms: times.last().copied().unwrap_or(0.0),
        total_ms: times.iter().sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::apply_in_place;
    use crate::ingest::{parse_canonical, serialize_canonical, ParseOptions};
    use crate::model::Snapshot;

    #[test]
    fn same_seed_same_model() {
        let params = SimParams::with_seed(42);
        let a = serialize_canonical(&generate_model(&params));
        let b = serialize_canonical(&generate_model(&params));
        assert_eq!(a, b);
        let reparsed = parse_canonical(&a, ParseOptions::strict()).into_result().unwrap().0;
        assert_eq!(reparsed, generate_model(&params));
    }

    #[test]
    fn default_models_are_wellformed() {
        for seed in 0..20 {
            let model = generate_model(&SimParams::with_seed(seed));
            assert!(Snapshot::new(model).validate_wellformed().is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn no_classes_means_unresolved_lifelines() {
        let params = SimParams { classes: 0, ..SimParams::with_seed(3) };
        let model = generate_model(&params);
        assert!(model.classes.is_empty());
        assert!(model.interactions.iter().flat_map(|i| &i.lifelines).all(|l| l.type_ref.is_none() && l.type_name.is_none()));
        assert!(verify_equivalence(&SimParams { steps: 20, ..params }).passed());
    }

    #[test]
    fn rename_op_edit_is_one_property_change() {
        let params = SimParams { edit_mix: EditMix::only(EditKind::RenameOp), batch_size: (1, 1), ..SimParams::with_seed(5) };
        let (model, mut rng) = generate_model_with_rng(&params);
        let batch = generate_edits(&mut rng, &model, &params, 1);
        assert_eq!(batch.len(), 1);
        assert_eq!(batch[0].element_kind, crate::model::ElementKind::Operation);
    }

    #[test]
    fn remove_op_without_ops_falls_back() {
        let params = SimParams {
            ops_per_class: (0, 0),
            edit_mix: EditMix::only(EditKind::RemoveOp),
            batch_size: (1, 1),
            ..SimParams::with_seed(5)
        };
        let (model, mut rng) = generate_model_with_rng(&params);
        let batch = generate_edits(&mut rng, &model, &params, 1);
        assert_eq!(batch.len(), 1);
        assert_eq!(batch[0].element_kind, crate::model::ElementKind::Message);
    }

    #[test]
    fn batches_apply_cleanly() {
        for seed in 0..30 {
            let params = SimParams::with_seed(seed);
            let (mut model, mut rng) = generate_model_with_rng(&params);
            let mut seq = 1;
            for _ in 0..50 {
                let batch = generate_edits(&mut rng, &model, &params, seq);
                for event in &batch {
                    apply_in_place(&mut model, event).unwrap();
                }
                seq += batch.len() as u64;
                model.revision += 1;
            }
        }
    }

    #[test]
    fn seed_42_passes_with_savings() {
        let report = verify_equivalence(&SimParams::with_seed(42));
        assert!(report.passed(), "{}", report.to_text());
        assert!(report.speedup_ratio > 1.0);
        assert_eq!(report, verify_equivalence(&SimParams::with_seed(42)));
        assert!(report.wall_times.is_none());
    }

    #[test]
    fn zero_steps() {
        let report = verify_equivalence(&SimParams { steps: 0, ..SimParams::with_seed(1) });
        assert!(report.passed());
        assert_eq!(report.speedup_ratio, 1.0);
    }

    #[test]
    fn injected_fault_is_caught() {
        let report = run(&SimParams::with_seed(42), RunOptions { inject_fault: true, ..RunOptions::default() });
        assert!(!report.passed());
        assert!(report.equivalence.first_failure_step.is_some());
    }

    #[test]
    fn structural_faults_stay_equivalent() {
        let mut mix = EditMix::default();
        mix.0[10] = 2;
        let params = SimParams { edit_mix: mix, ..SimParams::with_seed(9) };
        let report = run(&params, RunOptions { audit: true, ..RunOptions::default() });
        assert!(report.passed(), "{}", report.to_text());
    }

    #[test]
    fn benchmark_reports_times() {
        let report = benchmark(&SimParams { steps: 20, ..SimParams::with_seed(2) });
        let w = report.wall_times.unwrap();
        assert!(w.p50_ms <= w.p95_ms && w.p95_ms <= w.max_ms);
    }
}
