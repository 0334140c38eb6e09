use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::Duration;

use notify::{PollWatcher, RecommendedWatcher, RecursiveMode};
use notify_debouncer_mini::{new_debouncer_opt, Config, DebounceEventResult, Debouncer};

use hv_core::diff::diff_from;
use hv_core::engine::{DiagnosticDelta, EngineState};
use hv_core::model::Snapshot;

use crate::{load_model, render_line, CliError};

#[derive(Debug, Clone)]
pub struct WatchOptions {
    pub debounce: Duration,
    /// Poll the file instead of using native notifications.
    pub poll: bool,
    pub lenient: bool,
    /// Stop after this many non-empty deltas.
    pub max_changes: Option<usize>,
}

impl Default for WatchOptions {
    fn default() -> Self {
        WatchOptions { debounce: Duration::from_millis(200), poll: false, lenient: false, max_changes: None }
    }
}

/// Result of re-reading the watched file.
#[derive(Debug, Clone, PartialEq)]
pub enum Reload {
    /// The model is the same as before.
    Unchanged,
    /// `+`/`-` prefixed lines, possibly empty when the edit changed no finding.
    Delta { text: String, delta: DiagnosticDelta },
    /// The file could not be used; the previous state is kept.
    Warning(String),
}

/// Engine state for one watched file.
pub struct WatchSession {
    path: PathBuf,
    lenient: bool,
    engine: EngineState,
}

impl WatchSession {
    /// Loads the file and returns the session with its full initial report.
    pub fn new(path: &Path, lenient: bool) -> Result<(Self, String), CliError> {
        let (model, _) = load_model(path, lenient)?;
        let (engine, diagnostics) = EngineState::init(model);
        let snapshot = engine.snapshot();
        let report = diagnostics.iter().map(|d| render_line(snapshot, d) + "\n").collect();
        Ok((WatchSession { path: path.to_owned(), lenient, engine }, report))
    }

    pub fn engine(&self) -> &EngineState {
        &self.engine
    }

    pub fn reload(&mut self) -> Reload {
        let model = match load_model(&self.path, self.lenient) {
            Ok((model, _)) => model,
            Err(e) => return Reload::Warning(format!("{e}; keeping the previous model")),
        };
        let prior: Arc<Snapshot> = Arc::clone(self.engine.snapshot());
        let events = match diff_from(prior.model(), &model, self.engine.last_seq() + 1) {
            Ok(events) => events,
            Err(e) => return Reload::Warning(format!("{e}; keeping the previous model")),
        };
        if events.is_empty() {
            return Reload::Unchanged;
        }
        let delta = match self.engine.process(&events) {
            Ok(delta) => delta,
            Err(e) => return Reload::Warning(format!("{e}; keeping the previous model")),
        };
        let now = self.engine.snapshot();
        let mut text = String::new();
        for d in &delta.removed {
            text.push_str(&format!("- {}\n", render_line(&prior, d)));
        }
        for d in &delta.added {
            text.push_str(&format!("+ {}\n", render_line(now, d)));
        }
        Reload::Delta { text, delta }
    }
}

enum Guard {
    Native(Debouncer<RecommendedWatcher>),
    Poll(Debouncer<PollWatcher>),
}

impl Guard {
    fn watcher(&mut self) -> &mut dyn notify::Watcher {
        match self {
            Guard::Native(d) => d.watcher(),
            Guard::Poll(d) => d.watcher(),
        }
    }
}

fn start(options: &WatchOptions, tx: mpsc::Sender<DebounceEventResult>) -> Result<Guard, CliError> {
    // The poller only sees whole-second mtimes, so it hashes contents too.
    let poll_config = notify::Config::default()
        .with_poll_interval(options.debounce.max(Duration::from_millis(50)))
        .with_compare_contents(true);
    let config = Config::default().with_timeout(options.debounce).with_notify_config(poll_config);
    if !options.poll {
        match new_debouncer_opt::<_, RecommendedWatcher>(config.clone(), tx.clone()) {
            Ok(d) => return Ok(Guard::Native(d)),
            Err(e) => tracing::warn!(error = %e, "native file notifications unavailable; polling"),
        }
    }
    Ok(Guard::Poll(new_debouncer_opt::<_, PollWatcher>(config, tx)?))
}

/// Prints the initial report, then one block of delta lines per change of
/// `path` until interrupted (or `max_changes` deltas were printed).
pub fn watch(path: &Path, options: &WatchOptions, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_owned(), source };
    let (mut session, report) = WatchSession::new(path, options.lenient)?;

    // Editors often replace the file, so watch its directory. The watcher is
    // running before the report goes out, so no later save is missed.
    let absolute = std::path::absolute(path).map_err(io)?;
    let dir = absolute.parent().unwrap_or(Path::new(".")).to_owned();
    let name = absolute.file_name().map(|n| n.to_owned());
    let (tx, rx) = mpsc::channel();
    let mut guard = start(options, tx)?;
    guard.watcher().watch(&dir, RecursiveMode::NonRecursive)?;
    tracing::info!(path = %absolute.display(), "watching");
    out.write_all(report.as_bytes()).map_err(io)?;
    out.flush().map_err(io)?;

    let mut changes = 0;
    for batch in rx {
        let events = match batch {
            Ok(events) => events,
            Err(e) => {
                tracing::warn!(error = %e, "watch error");
                continue;
            }
        };
        if !events.iter().any(|e| e.path.file_name() == name.as_deref()) {
            continue;
        }
        match session.reload() {
            Reload::Unchanged => tracing::debug!("no model change"),
            Reload::Warning(message) => eprintln!("warning: {message}"),
            Reload::Delta { text, delta } => {
                out.write_all(text.as_bytes()).map_err(io)?;
                out.flush().map_err(io)?;
                tracing::info!(revision = delta.revision, "model changed");
                if !delta.is_empty() {
                    changes += 1;
                }
            }
        }
        if options.max_changes.is_some_and(|max| changes >= max) {
            break;
        }
    }
    Ok(())
}
