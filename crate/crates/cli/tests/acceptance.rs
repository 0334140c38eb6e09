//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::json;

use hv_cli::{load_model, run_check, run_simulate, CheckOptions, Format};
use hv_core::diff::{apply_in_place, events_to_ndjson, ChangeEvent};
use hv_core::engine::{full_evaluation_count, DiagnosticDelta, EngineState};
use hv_core::ingest::serialize_canonical;
use hv_core::model::Model;
use hv_core::rules::{Diagnostic, RuleId};
use hv_core::sim::{
    diff_round_trip, generate_edits, generate_model, percentiles, read_set_probe, verify_equivalence, EditKind,
    EditMix, ProbeOutcome, Rng, RunOptions, SimParams,
};
use hv_service::{AppState, InconsistenciesResponse, PostEventsResponse, PutModelResponse, DELTA_EVENT};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let failures: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|seed| {
            let report = verify_equivalence(&SimParams::with_seed(seed));
            (!report.passed()).then(|| format!("seed {seed}: {:?}", report.equivalence.detail))
        })
        .collect();
    let elapsed = started.elapsed();
    ensure(failures.is_empty(), || format!("{} failing seeds, first {}", failures.len(), failures[0]))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 seeds x 200 batches in {:.1}s", elapsed.as_secs_f64()))
}

fn showcase_golden() -> Outcome {
    let out = run_check(&fixture("showcase.hvm.json"), &CheckOptions { format: Format::Ndjson, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(fixture("showcase.expected.ndjson")).map_err(|e| e.to_string())?;
    ensure(out.stdout == golden, || "output differs from showcase.expected.ndjson".into())?;
    let count = |rule| out.diagnostics.iter().filter(|d| d.rule_id == rule).count();
    ensure(out.diagnostics.len() == 6, || format!("{} diagnostics", out.diagnostics.len()))?;
    ensure(count(RuleId::MsgUnnamed) == 1 && count(RuleId::MsgUndefOp) == 1, || "rule mix differs".into())?;
    Ok("6 diagnostics, one MSG-UNNAMED, one MSG-UNDEF-OP".into())
}

/// Diagnostic without its revision stamp, for set comparisons.
fn identity(d: &Diagnostic) -> String {
    let mut d = d.clone();
    d.model_revision = 0;
    serde_json::to_string(&d).expect("serializable diagnostic")
}

struct Client {
    http: reqwest::Client,
    base: String,
}

impl Client {
    async fn start() -> Client {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        tokio::spawn(hv_service::serve_listener(listener, AppState::default()));
        Client { http: reqwest::Client::new(), base }
    }

    async fn put(&self, id: &str, body: String) -> Result<PutModelResponse, String> {
        let response = self.http.put(format!("{}/models/{id}", self.base)).body(body).send().await.map_err(|e| e.to_string())?;
        ensure(response.status() == 200, || format!("PUT status {}", response.status()))?;
        response.json().await.map_err(|e| e.to_string())
    }

    async fn post(&self, id: &str, body: String) -> Result<PostEventsResponse, String> {
        let response =
            self.http.post(format!("{}/models/{id}/events", self.base)).body(body).send().await.map_err(|e| e.to_string())?;
        let status = response.status();
        ensure(status == 200, || format!("POST status {status}"))?;
        response.json().await.map_err(|e| e.to_string())
    }

    async fn inconsistencies(&self, id: &str) -> Result<InconsistenciesResponse, String> {
        let response =
            self.http.get(format!("{}/models/{id}/inconsistencies", self.base)).send().await.map_err(|e| e.to_string())?;
        response.json().await.map_err(|e| e.to_string())
    }
}

async fn rename_loop() -> Outcome {
    let client = Client::start().await;
    let order = std::fs::read_to_string(fixture("order.hvm.json")).unwrap();
    let put = client.put("order", order).await?;
    let undefined: Vec<&Diagnostic> = put.diagnostics.iter().filter(|d| d.rule_id == RuleId::MsgUndefOp).collect();
    ensure(undefined.len() == 1 && undefined[0].element_id.as_str() == "M3", || "expected UNDEF-OP on M3".into())?;
    let target = identity(undefined[0]);

    let add = json!({
        "seq": 1, "modelId": "order", "revision": 1, "kind": "ElementAdded", "elementKind": "operation",
        "elementId": "O9", "parentId": "C1",
        "payload": {"id": "O9", "name": "charge", "parameters": [{"name": "amount", "typeName": "Money"}]}
    });
    let added = client.post("order", json!([add]).to_string()).await?;
    ensure(added.delta.is_empty(), || format!("adding 'charge' changed findings: {:?}", added.delta))?;

    let rename = json!({
        "seq": 2, "modelId": "order", "revision": 2, "kind": "PropertyChanged", "elementKind": "operation",
        "elementId": "O9", "property": "name", "oldValue": "charge", "newValue": "pay"
    });
    let renamed = client.post("order", json!([rename]).to_string()).await?;
    let removed: Vec<String> = renamed.delta.removed.iter().map(identity).collect();
    ensure(removed == [target.clone()], || format!("removed {removed:?}"))?;
    ensure(renamed.delta.added.is_empty(), || format!("added {:?}", renamed.delta.added))?;

    let after = client.inconsistencies("order").await?;
    ensure(!after.diagnostics.iter().any(|d| identity(d) == target), || "GET still lists the diagnostic".into())?;
    ensure(after.diagnostics.len() == 2, || format!("{} diagnostics left", after.diagnostics.len()))?;
    Ok("renaming O9 'charge' -> 'pay' removed exactly MSG-UNDEF-OP M3".into())
}

fn incremental_bound() -> Outcome {
    let params = SimParams {
        seed: 4,
        classes: 1000,
        interactions: 200,
        messages_per_interaction: (50, 50),
        lifelines_per_interaction: (4, 8),
        batch_size: (1, 1),
        edit_mix: EditMix::only(EditKind::RenameOp),
        ..SimParams::default()
    };
    let model = generate_model(&params);
    let messages: usize = model.interactions.iter().map(|i| i.messages.len()).sum();
    ensure(model.classes.len() == 1000 && messages == 10_000, || {
        format!("{} classes, {messages} messages", model.classes.len())
    })?;
    let (mut state, _) = EngineState::init(model);
    let mut rng = Rng::new(params.seed);
    let mut times = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let batch = generate_edits(&mut rng, state.snapshot().model(), &params, state.last_seq() + 1);
        ensure(batch.len() == 1, || format!("batch of {}", batch.len()))?;
        let started = Instant::now();
        state.process(&batch).map_err(|e| e.to_string())?;
        times.push(started.elapsed().as_secs_f64() * 1000.0);
        let full = full_evaluation_count(state.snapshot());
        let ratio = state.last_evaluations() as f64 / full as f64;
        ensure(ratio <= 0.01, || format!("{} of {full} evaluations", state.last_evaluations()))?;
        worst_ratio = worst_ratio.max(ratio);
    }
    let wall = percentiles(&mut times);
    ensure(wall.p95_ms < 50.0, || format!("p95 {:.2} ms", wall.p95_ms))?;
    Ok(format!("worst {:.3}% of full evaluations, p95 {:.2} ms over 100 renames", worst_ratio * 100.0, wall.p95_ms))
}

fn round_trips() -> Outcome {
    let failures: Vec<String> =
        (0..1000u64).into_par_iter().filter_map(|seed| diff_round_trip(seed).err().map(|e| format!("seed {seed}: {e}"))).collect();
    ensure(failures.is_empty(), || format!("{} failures, first {}", failures.len(), failures[0]))?;
    Ok("1000 model pairs".into())
}

fn read_set_soundness() -> Outcome {
    let mut held = 0;
    let mut seed = 0u64;
    while held < 1000 {
        match read_set_probe(seed) {
            ProbeOutcome::Held => held += 1,
            ProbeOutcome::Inapplicable => {}
            ProbeOutcome::Violated(detail) => return Err(format!("seed {seed}: {detail}")),
        }
        seed += 1;
    }
    Ok(format!("1000 out-of-read-set mutations ({seed} seeds drawn)"))
}

fn determinism() -> Outcome {
    let fixtures = ["order.hvm.json", "order.uml", "showcase.hvm.json", "empty.hvm.json"];
    for name in fixtures {
        let path = fixture(name);
        for format in [Format::Text, Format::Ndjson] {
            let options = CheckOptions { format, ..Default::default() };
            let a = run_check(&path, &options).map_err(|e| e.to_string())?;
            let b = run_check(&path, &options).map_err(|e| e.to_string())?;
            ensure(a.stdout == b.stdout, || format!("{name}: check output differs"))?;
        }
        let a = serialize_canonical(&load_model(&path, false).map_err(|e| e.to_string())?.0);
        let b = serialize_canonical(&load_model(&path, false).map_err(|e| e.to_string())?.0);
        ensure(a == b, || format!("{name}: canonical form differs"))?;
    }
    for json in [false, true] {
        let a = run_simulate(&SimParams::with_seed(42), 3, RunOptions::default(), json).map_err(|e| e.to_string())?;
        let b = run_simulate(&SimParams::with_seed(42), 3, RunOptions::default(), json).map_err(|e| e.to_string())?;
        ensure(a.stdout == b.stdout, || "simulate reports differ".into())?;
    }
    Ok(format!("{} fixtures, simulate seed 42", fixtures.len()))
}

/// Incremental reader for `text/event-stream` bodies.
struct SseReader {
    response: reqwest::Response,
    buffer: String,
}

impl SseReader {
    async fn next(&mut self) -> Result<(String, String), String> {
        loop {
            if let Some(end) = self.buffer.find("\n\n") {
                let record: String = self.buffer.drain(..end + 2).collect();
                let mut event = String::new();
                let mut data = String::new();
                for line in record.lines() {
                    if let Some(v) = line.strip_prefix("event:") {
                        event = v.trim().to_owned();
                    } else if let Some(v) = line.strip_prefix("data:") {
                        data.push_str(v.strip_prefix(' ').unwrap_or(v));
                    }
                }
                if event.is_empty() {
                    continue;
                }
                return Ok((event, data));
            }
            let chunk = tokio::time::timeout(Duration::from_secs(10), self.response.chunk())
                .await
                .map_err(|_| "stream stalled".to_string())?
                .map_err(|e| e.to_string())?
                .ok_or("stream ended")?;
            self.buffer.push_str(std::str::from_utf8(&chunk).map_err(|e| e.to_string())?);
        }
    }
}

async fn convergence() -> Outcome {
    let client = Client::start().await;
    let params = SimParams::with_seed(8);
    let mut model: Model = generate_model(&params).normalized();
    let id = model.model_id.clone();
    client.put(&id, serialize_canonical(&model)).await?;

    // Advance a little before taking the snapshot the stream starts from.
    let mut rng = Rng::new(params.seed ^ 0x5eed);
    let mut seq = 0;
    let post = |model: &mut Model, rng: &mut Rng, seq: &mut u64| {
        let batch: Vec<ChangeEvent> = generate_edits(rng, model, &params, *seq + 1);
        for event in &batch {
            apply_in_place(model, event).expect("generated events apply");
        }
        model.revision += 1;
        *seq += batch.len() as u64;
        batch
    };
    for _ in 0..5 {
        let batch = post(&mut model, &mut rng, &mut seq);
        client.post(&id, events_to_ndjson(&batch)).await?;
    }
    let base = client.inconsistencies(&id).await?;
    let mut folded: BTreeSet<String> = base.diagnostics.iter().map(identity).collect();

    let response = client
        .http
        .get(format!("{}/models/{id}/stream?from={}", client.base, base.revision))
        .send()
        .await
        .map_err(|e| e.to_string())?;
    ensure(response.status() == 200, || format!("stream status {}", response.status()))?;
    let mut stream = SseReader { response, buffer: String::new() };

    let mut last_batch = Vec::new();
    let mut final_revision = base.revision;
    for _ in 0..50 {
        last_batch = post(&mut model, &mut rng, &mut seq);
        final_revision = client.post(&id, events_to_ndjson(&last_batch)).await?.revision;
    }
    let mut expected_revision = base.revision + 1;
    while expected_revision <= final_revision {
        let (event, data) = stream.next().await?;
        ensure(event == DELTA_EVENT, || format!("unexpected {event} record: {data}"))?;
        let delta: DiagnosticDelta = serde_json::from_str(&data).map_err(|e| e.to_string())?;
        ensure(delta.revision == expected_revision, || format!("revision {} after {}", delta.revision, expected_revision - 1))?;
        for d in &delta.removed {
            ensure(folded.remove(&identity(d)), || format!("removed unknown diagnostic at r{}", delta.revision))?;
        }
        for d in &delta.added {
            ensure(folded.insert(identity(d)), || format!("added known diagnostic at r{}", delta.revision))?;
        }
        expected_revision += 1;
    }
    let later = client.inconsistencies(&id).await?;
    ensure(later.revision == final_revision, || format!("GET at r{}, expected r{final_revision}", later.revision))?;
    let later_set: BTreeSet<String> = later.diagnostics.iter().map(identity).collect();
    ensure(folded == later_set, || format!("folded {} diagnostics, GET has {}", folded.len(), later_set.len()))?;

    let repeat = client.post(&id, events_to_ndjson(&last_batch)).await?;
    ensure(repeat.delta.is_empty() && repeat.revision == final_revision, || format!("duplicate batch gave {:?}", repeat.delta))?;
    Ok(format!("50 batches, {} diagnostics at r{final_revision}; duplicate batch empty", later_set.len()))
}

fn main() -> ExitCode {
    let runtime = tokio::runtime::Runtime::new().expect("runtime");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("showcase fixture", Box::new(showcase_golden)),
        ("rename loop", Box::new(|| runtime.block_on(rename_loop()))),
        ("incremental work bound", Box::new(incremental_bound)),
        ("diff/apply round-trip", Box::new(round_trips)),
        ("read-set soundness", Box::new(read_set_soundness)),
        ("determinism", Box::new(determinism)),
        ("service convergence", Box::new(|| runtime.block_on(convergence()))),
    ];
    let mut failed = 0;
    for (number, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", number + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.1}s)", number + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
