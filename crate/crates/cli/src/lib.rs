//! Command implementations behind the `hv` binary.

mod render;
mod watch;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use hv_core::diff::{diff, events_to_ndjson, DiffError};
use hv_core::engine::full_check;
use hv_core::ingest::{parse_document, ModelFormat, ParseFatal, ParseOptions, ParseWarning};
use hv_core::model::{Model, Snapshot};
use hv_core::rules::{Diagnostic, RuleId, Severity};
use hv_core::sim::{run, RunOptions, SimParams, SimReport};

pub use render::{element_path, render_line, render_ndjson};
pub use watch::{watch, Reload, WatchOptions, WatchSession};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// Findings at or above the threshold, a non-empty diff, or a failed simulation.
    Findings = 1,
    Failure = 2,
}

impl From<Exit> for std::process::ExitCode {
    fn from(exit: Exit) -> Self {
        std::process::ExitCode::from(exit as u8)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {fatal}", path.display())]
    Parse { path: PathBuf, fatal: ParseFatal },
    #[error("model ids differ ('{a}' vs '{b}'); pass --force-id to compare anyway")]
    ModelIdMismatch { a: String, b: String },
    #[error("invalid simulation parameters: {0}")]
    SimParams(String),
    #[error("watch: {0}")]
    Watch(#[from] notify::Error),
    #[error(transparent)]
    Serve(#[from] hv_service::ServeError),
}

impl From<DiffError> for CliError {
    fn from(e: DiffError) -> Self {
        match e {
            DiffError::ModelIdMismatch { before, after } => CliError::ModelIdMismatch { a: before, b: after },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum FailOn {
    Never,
    #[default]
    Error,
    Warning,
}

impl FailOn {
    pub fn trips(self, severity: Severity) -> bool {
        match self {
            FailOn::Never => false,
            FailOn::Error => severity == Severity::Error,
            FailOn::Warning => matches!(severity, Severity::Error | Severity::Warning),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Ndjson,
}

/// Reads a model, choosing the reader from the file name.
pub fn load_model(path: &Path, lenient: bool) -> Result<(Model, Vec<ParseWarning>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let options = if lenient { ParseOptions::lenient() } else { ParseOptions::strict() };
    parse_document(ModelFormat::from_path(path), &text, options)
        .into_result()
        .map_err(|fatal| CliError::Parse { path: path.to_owned(), fatal })
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub format: Format,
    /// Empty means every rule.
    pub rules: Vec<RuleId>,
    pub fail_on: FailOn,
    pub lenient: bool,
}

#[derive(Debug, Clone)]
pub struct CheckOutput {
    pub stdout: String,
    pub diagnostics: Vec<Diagnostic>,
    pub warnings: Vec<ParseWarning>,
    pub exit: Exit,
}

pub fn run_check(path: &Path, options: &CheckOptions) -> Result<CheckOutput, CliError> {
    let (model, warnings) = load_model(path, options.lenient)?;
    let mut diagnostics = full_check(&model);
    if !options.rules.is_empty() {
        diagnostics.retain(|d| options.rules.contains(&d.rule_id));
    }
    let snapshot = Snapshot::new(model);
    let stdout = match options.format {
        Format::Text => diagnostics.iter().map(|d| render_line(&snapshot, d) + "\n").collect(),
        Format::Ndjson => render_ndjson(&diagnostics),
    };
    let exit = if diagnostics.iter().any(|d| options.fail_on.trips(d.severity)) { Exit::Findings } else { Exit::Ok };
    Ok(CheckOutput { stdout, diagnostics, warnings, exit })
}

#[derive(Debug, Clone)]
pub struct DiffOutput {
    pub stdout: String,
    pub events: usize,
    pub exit: Exit,
}

/// Change events turning `a` into `b`, one canonical JSON object per line.
pub fn run_diff(a: &Path, b: &Path, force_id: bool) -> Result<DiffOutput, CliError> {
    let (before, _) = load_model(a, false)?;
    let (mut after, _) = load_model(b, false)?;
    if force_id {
        after.model_id = before.model_id.clone();
    }
    let events = diff(&before, &after)?;
    let exit = if events.is_empty() { Exit::Ok } else { Exit::Findings };
    Ok(DiffOutput { stdout: events_to_ndjson(&events), events: events.len(), exit })
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub stdout: String,
    pub reports: Vec<SimReport>,
    pub exit: Exit,
}

/// Runs `runs` consecutive seeds starting at `params.seed`.
pub fn run_simulate(params: &SimParams, runs: u64, options: RunOptions, json: bool) -> Result<SimulateOutput, CliError> {
    params.validate().map_err(CliError::SimParams)?;
    let mut reports = Vec::new();
    let mut stdout = String::new();
    for offset in 0..runs.max(1) {
        let params = SimParams { seed: params.seed.wrapping_add(offset), ..params.clone() };
        let report = run(&params, options);
        if json {
            let _ = writeln!(stdout, "{}", serde_json::to_string(&report).expect("serializable report"));
        } else {
            if offset > 0 {
                stdout.push('\n');
            }
            stdout.push_str(&report.to_text());
        }
        let failed = !report.passed();
        reports.push(report);
        if failed {
            break;
        }
    }
    let exit = if reports.iter().all(SimReport::passed) { Exit::Ok } else { Exit::Findings };
    Ok(SimulateOutput { stdout, reports, exit })
}
