use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use hv_cli::{
    run_check, run_diff, run_simulate, watch, CheckOptions, CliError, Exit, FailOn, Format, WatchOptions,
};
use hv_core::rules::{catalog, reference_markdown, RuleId};
use hv_core::sim::{EditMix, RunOptions, SimParams};

/// Consistency checks between UML class and sequence diagrams.
#[derive(Debug, Parser)]
#[command(name = "hv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file once.
    Check {
        /// `.hvm.json` (canonical) or `.uml` (XMI) file.
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Comma-separated rule ids to report; all rules by default.
        #[arg(long, value_delimiter = ',')]
        rules: Vec<RuleId>,
        /// Lowest severity that makes the exit code 1.
        #[arg(long, value_enum, default_value_t)]
        fail_on: FailOn,
        /// Downgrade unknown fields and duplicate ids to warnings.
        #[arg(long)]
        lenient: bool,
    },
    /// Re-check a model file whenever it changes and print the differences.
    Watch {
        path: PathBuf,
        #[arg(long, default_value_t = 200)]
        debounce_ms: u64,
        /// Poll instead of relying on native file notifications.
        #[arg(long)]
        poll: bool,
        #[arg(long)]
        lenient: bool,
        #[arg(long, hide = true)]
        max_changes: Option<usize>,
    },
    /// Print the change events turning one model into another (NDJSON).
    Diff {
        before: PathBuf,
        after: PathBuf,
        /// Compare even if the model ids differ.
        #[arg(long)]
        force_id: bool,
    },
    /// Run the HTTP service.
    Serve {
        /// Defaults to $HV_PORT, then 8787.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Run seeded workloads against the batch oracle.
    Simulate(SimulateArgs),
    /// Print the rule reference.
    Rules {
        #[arg(long, value_enum, default_value_t = RulesFormat::Markdown)]
        format: RulesFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RulesFormat {
    Markdown,
    Json,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of consecutive seeds to run.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 30)]
    classes: usize,
    #[arg(long, default_value_t = 8)]
    interactions: usize,
    #[arg(long, default_value_t = 1)]
    min_batch: usize,
    #[arg(long, default_value_t = 3)]
    max_batch: usize,
    /// Eleven comma-separated weights: renameOp, addOp, removeOp, renameMsg,
    /// addMsg, removeMsg, retargetLifeline, addAssoc, removeAssoc,
    /// changeParams, structuralFault.
    #[arg(long, value_delimiter = ',')]
    edit_mix: Option<Vec<u32>>,
    /// Measure per-step latency.
    #[arg(long)]
    bench: bool,
    /// Verify the dependency index after every step.
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    json: bool,
    /// Make the engine skip re-evaluation (the oracle must notice).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

impl SimulateArgs {
    fn params(&self) -> Result<SimParams, CliError> {
        let edit_mix = match &self.edit_mix {
            None => EditMix::default(),
            Some(weights) => EditMix(
                weights
                    .as_slice()
                    .try_into()
                    .map_err(|_| CliError::SimParams(format!("--edit-mix needs 11 weights, got {}", weights.len())))?,
            ),
        };
        Ok(SimParams {
            seed: self.seed,
            classes: self.classes,
            interactions: self.interactions,
            steps: self.steps,
            batch_size: (self.min_batch, self.max_batch),
            edit_mix,
            ..SimParams::default()
        })
    }
}

fn init_logging() {
    let filter = EnvFilter::try_from_env("HV_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).with_target(false).init();
}

fn print(text: &str) {
    let mut stdout = std::io::stdout().lock();
    // A closed pipe is not worth an error exit.
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

fn run(command: Command) -> Result<Exit, CliError> {
    match command {
        Command::Check { path, format, rules, fail_on, lenient } => {
            let output = run_check(&path, &CheckOptions { format, rules, fail_on, lenient })?;
            for warning in &output.warnings {
                eprintln!("warning: {warning}");
            }
            print(&output.stdout);
            Ok(output.exit)
        }
        Command::Watch { path, debounce_ms, poll, lenient, max_changes } => {
            let options = WatchOptions { debounce: Duration::from_millis(debounce_ms), poll, lenient, max_changes };
            watch(&path, &options, &mut std::io::stdout())?;
            Ok(Exit::Ok)
        }
        Command::Diff { before, after, force_id } => {
            let output = run_diff(&before, &after, force_id)?;
            print(&output.stdout);
            Ok(output.exit)
        }
        Command::Serve { port, host } => {
            let port = hv_service::resolve_port(port)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Serve(e.into()))?;
            runtime.block_on(hv_service::serve(SocketAddr::new(host, port), hv_service::AppState::default()))?;
            Ok(Exit::Ok)
        }
        Command::Simulate(args) => {
            let options = RunOptions { timed: args.bench, audit: args.audit, inject_fault: args.inject_fault };
            let output = run_simulate(&args.params()?, args.runs, options, args.json)?;
            print(&output.stdout);
            if let Some(failed) = output.reports.iter().find(|r| !r.passed()) {
                eprintln!("equivalence failed for seed {}", failed.seed);
            }
            Ok(output.exit)
        }
        Command::Rules { format } => {
            match format {
                RulesFormat::Markdown => print(&reference_markdown()),
                RulesFormat::Json => print(&(serde_json::to_string_pretty(catalog()).expect("serializable catalog") + "\n")),
            }
            Ok(Exit::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match run(cli.command) {
        Ok(exit) => exit.into(),
        Err(e) => {
            eprintln!("error: {e}");
            Exit::Failure.into()
        }
    }
}
