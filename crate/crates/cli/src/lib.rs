//! The `rcm` command line. [`dispatch`] parses arguments, merges settings
//! and runs one subcommand, writing results to `out` and diagnostics to
//! `err`. Exit codes: 0 success, 2 usage, 3 the run ended in ⊥, 4 the
//! result disagrees with its oracle, 5 the model endpoint failed.

pub mod bench;
mod commands;
pub mod settings;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rcm_core::sat::Band;

pub use settings::{Layer, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOTTOM: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_BACKEND: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }
    pub fn bottom(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_BOTTOM,
            message: msg.into(),
        }
    }
    pub fn mismatch(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_MISMATCH,
            message: msg.into(),
        }
    }
    pub fn backend(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_BACKEND,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::usage(format!("{e:#}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "rcm", version, about = "Run recursive context-stack computations")]
pub struct Cli {
    /// TOML settings file; defaults to $RCM_CONFIG.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Largest frame in tokens.
    #[arg(long, global = true)]
    pub max_space: Option<usize>,
    /// Largest stack depth.
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    /// Largest number of generation steps.
    #[arg(long, global = true)]
    pub max_steps: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a text prompt against a chat-completions endpoint.
    Run(RunArgs),
    /// Deterministic Turing machines.
    #[command(subcommand)]
    Tm(TmCommand),
    /// Alternating Turing machines.
    #[command(subcommand)]
    Atm(AtmCommand),
    /// SAT solving, trace export and benchmarking.
    #[command(subcommand)]
    Sat(SatCommand),
    /// Systems of scaffolds described in a TOML file.
    #[command(subcommand)]
    Scaffold(ScaffoldCommand),
}

#[derive(Args, Debug, Default, Clone)]
pub struct BackendArgs {
    /// Endpoint base, e.g. http://localhost:8000/v1.
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    #[arg(long)]
    pub retries: Option<u32>,
    #[arg(long)]
    pub requests_per_second: Option<f64>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("task").required(true))]
pub struct RunArgs {
    #[arg(long, group = "task")]
    pub prompt: Option<String>,
    #[arg(long, group = "task", value_name = "FILE")]
    pub prompt_file: Option<PathBuf>,
    /// Root problem shown in the prompt template.
    #[arg(long, conflicts_with = "root_file")]
    pub root: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub root_file: Option<PathBuf>,
    /// Show the root problem on every step after the first.
    #[arg(long)]
    pub prefix: bool,
    /// Keep each call's question in the caller frame before its answer.
    #[arg(long)]
    pub preserve: bool,
    #[arg(long)]
    pub no_loop_detection: bool,
    /// Write the per-step depth and space log as CSV.
    #[arg(long, value_name = "FILE")]
    pub steps_csv: Option<PathBuf>,
    /// Print a JSON record instead of the bare answer.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args, Debug)]
pub struct MachineArgs {
    /// Fixture name (parity, increment, palindrome, countdown, cnf_eval,
    /// followed) or a descriptor file.
    #[arg(long)]
    pub machine: String,
    /// Input word, one character per symbol.
    #[arg(long, default_value = "")]
    pub input: String,
    /// Print a JSON record instead of the bare verdict.
    #[arg(long)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum TmCommand {
    /// Simulate the machine directly.
    #[command(alias = "run")]
    Direct(MachineArgs),
    /// Game value of the machine's start configuration.
    Win {
        #[command(flatten)]
        m: MachineArgs,
        /// Most configurations to explore.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
    },
    /// Decide by recursive evaluation of state, head and cell functions.
    Recursive {
        #[command(flatten)]
        m: MachineArgs,
        /// Answer repeated calls from a memo table.
        #[arg(long)]
        memo: bool,
        /// Write measured and bounded subtree sizes per time step as CSV.
        #[arg(long, value_name = "FILE")]
        cost_report: Option<PathBuf>,
    },
    /// Simulate with periodic summarization of the configuration history.
    Summarize {
        #[command(flatten)]
        m: MachineArgs,
        /// Threshold factor over the embedding bound.
        #[arg(long, default_value_t = 2)]
        factor: usize,
        /// Embedding length bound; measured from the direct run if absent.
        #[arg(long = "N", alias = "n")]
        n: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AtmCommand {
    /// Evaluate by recursive calls on successor configurations.
    Eval {
        #[command(flatten)]
        m: MachineArgs,
        /// Most configurations the oracle may explore.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
    },
}

#[derive(Args, Debug)]
pub struct FormulaArgs {
    #[arg(long, value_name = "FILE")]
    pub dimacs: PathBuf,
    /// Problem statement; its last line is the question. Generated from the
    /// formula when absent.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SatCommand {
    /// Decide satisfiability; prints Yes or No.
    Solve {
        #[command(flatten)]
        f: FormulaArgs,
        /// Ask the configured endpoint instead of the built-in policy.
        #[arg(long)]
        backend: bool,
        #[command(flatten)]
        endpoint: BackendArgs,
        #[arg(long)]
        json: bool,
    },
    /// Export per-step training samples as JSONL.
    GenTraces {
        #[command(flatten)]
        f: FormulaArgs,
        /// Output file; stdout when absent.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Benchmark many instances and report trajectory and context lengths.
    Bench {
        /// Directory of .cnf files; random instances per band when absent.
        #[arg(long, value_name = "DIR")]
        dir: Option<PathBuf>,
        /// Row CSV; stdout when absent.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Per-band summary CSV; stderr when absent.
        #[arg(long, value_name = "FILE")]
        summary: Option<PathBuf>,
        /// Bands to sample, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "easy,medium,hard")]
        bands: Vec<Band>,
        #[arg(long)]
        per_band: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        min_vars: Option<usize>,
        #[arg(long)]
        max_vars: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print a random 3-CNF formula in DIMACS form.
    Random {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ScaffoldCommand {
    /// Evaluate one scaffold of a system on an input.
    Run {
        #[arg(long, value_name = "FILE")]
        system: PathBuf,
        /// Scaffold index or name.
        #[arg(long)]
        entry: String,
        #[arg(long, default_value = "")]
        input: String,
        /// Space limit per invocation; defaults to the frame limit.
        #[arg(long)]
        space: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        calls: u64,
        #[arg(long, default_value_t = 10_000)]
        depth: usize,
        /// Print every oracle query to stderr.
        #[arg(long)]
        log: bool,
    },
}

impl Cli {
    fn flag_layer(&self) -> Layer {
        let mut l = Layer::default();
        l.limits.max_space = self.max_space;
        l.limits.max_depth = self.max_depth;
        l.limits.max_steps = self.max_steps;
        let backend = match &self.command {
            Command::Run(a) => Some(&a.backend),
            Command::Sat(SatCommand::Solve { endpoint, .. }) => Some(endpoint),
            _ => None,
        };
        if let Some(b) = backend {
            l.backend.base_url = b.base_url.clone();
            l.backend.model = b.model.clone();
            l.backend.api_key_env = b.api_key_env.clone();
            l.backend.timeout_secs = b.timeout_secs;
            l.backend.max_tokens = b.max_tokens;
            l.backend.retries = b.retries;
            l.backend.requests_per_second = b.requests_per_second;
        }
        if let Command::Sat(SatCommand::Bench {
            per_band,
            seed,
            min_vars,
            max_vars,
            workers,
            ..
        }) = &self.command
        {
            l.bench.per_band = *per_band;
            l.bench.seed = *seed;
            l.bench.min_vars = *min_vars;
            l.bench.max_vars = *max_vars;
            l.bench.workers = *workers;
        }
        l
    }
}

/// Runs `argv` (program name first) with environment lookups through `env`.
pub fn dispatch_with<I, T>(
    argv: I,
    out: &mut dyn Write,
    err: &mut dyn Write,
    env: &dyn Fn(&str) -> Option<String>,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version go to stdout
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = Settings::resolve(cli.flag_layer(), cli.config.clone(), env)
        .and_then(|s| commands::execute(cli.command, &s, out, err));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "rcm: {e}");
            e.code
        }
    }
}

/// [`dispatch_with`] on the process streams and environment.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_with(argv, &mut stdout.lock(), &mut stderr.lock(), &|k| std::env::var(k).ok())
}
