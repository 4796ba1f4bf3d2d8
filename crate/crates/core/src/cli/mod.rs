//! Command-line front end. `run` is the whole program minus process exit.

mod commands;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::energy::{Algo, Engine, EngineConfig, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};

pub use report::{Format, Report, Table};

pub const MEM_ENV: &str = "SUMSETLAB_MEM";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sumsetlab",
    version,
    about = "Exact sumset, energy and convexity experiments"
)]
pub struct Cli {
    /// Memory budget in bytes; accepts K, M, G suffixes. SUMSETLAB_MEM wins over this flag.
    #[arg(long, global = true)]
    mem: Option<String>,
    #[arg(long, global = true, default_value = "auto")]
    algo: Algo,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random families (overrides any seed in the family spec).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Re-check the spectrum sandwich and Cauchy-Schwarz on every energy.
    #[arg(long, global = true)]
    check: bool,
    /// Add wall-clock `timing_ms` to JSON reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

/// Input sets: files first, then families, in the order given.
#[derive(Debug, Args, Clone)]
pub struct Inputs {
    /// Set file (repeatable).
    #[arg(long = "set")]
    sets: Vec<PathBuf>,
    /// Family spec including n, e.g. `power:n=64,m=2` (repeatable).
    #[arg(long = "family")]
    families: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a family member as a set file.
    Gen {
        family: String,
        /// Size, if the spec leaves it out.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Convexity order, doubling constants and energy summary of one set.
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "++,+-,++-")]
        patterns: String,
    },
    /// T_k, or a moment of a signed representation function.
    Energy {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Sign pattern applied to the k summands, e.g. `+-`.
        #[arg(long)]
        signs: Option<String>,
        /// Moment order: an integer, or a rational in (1, 3) for a float moment.
        #[arg(long)]
        moment: Option<String>,
    },
    /// Dyadic classes of a representation function.
    Spectrum {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "++")]
        signs: String,
    },
    /// Signed sumset of the inputs.
    Sumset {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "++")]
        signs: String,
        /// Include the elements, not just the size.
        #[arg(long)]
        list: bool,
    },
    /// Size of a patterned self-sumset and its ratio to |B|.
    Doubling {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "++-")]
        pattern: String,
    },
    /// Lucky-pair census over the rich sums of k copies of a set.
    Lucky {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = crate::garaev::DEFAULT_PARTITION_CONSTANT)]
        c: u64,
        /// Smallest dyadic class edge to examine.
        #[arg(long, default_value_t = 4)]
        min_r: u64,
        /// Examine only this sum.
        #[arg(long)]
        x: Option<String>,
        /// `index`: the set is f([N]) and axes run over indices; `identity`: g = id.
        #[arg(long, default_value = "index")]
        axes: String,
    },
    /// Least-squares exponent of Q against N in log-log space.
    Fit {
        /// Comma-separated `N:Q` points.
        #[arg(long)]
        points: Option<String>,
        /// CSV file with `N,Q` rows (a header line is skipped).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Evaluate a catalogued bound on a family over a size grid.
    Verify {
        #[arg(long)]
        bound: String,
        /// Family template, e.g. `power:m=2`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "16,32,64,128")]
        grid: String,
        /// Override the measured quantity (T<k>, sum<k>, diff, cross).
        #[arg(long)]
        quantity: Option<String>,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = crate::bounds::DEFAULT_SLOPE_TOLERANCE)]
        tolerance: f64,
    },
    /// Catalogued exponents.
    Predict {
        /// One bound id; all when omitted.
        #[arg(long)]
        bound: Option<String>,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Rich-sum tail of A−A+A−A against sampled delta-set energies (heuristic).
    Tail {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "1,2,4,8")]
        shifts: String,
    },
}

/// Parses sizes like `4096`, `64K`, `512M`, `4G` (binary multiples).
pub fn parse_bytes(text: &str) -> Result<u64> {
    let t = text.trim();
    let (digits, shift) = match t.char_indices().last() {
        Some((i, c)) if c.eq_ignore_ascii_case(&'k') => (&t[..i], 10),
        Some((i, c)) if c.eq_ignore_ascii_case(&'m') => (&t[..i], 20),
        Some((i, c)) if c.eq_ignore_ascii_case(&'g') => (&t[..i], 30),
        _ => (t, 0),
    };
    let v: u64 = digits
        .parse()
        .map_err(|_| Error::input(format!("bad memory size {text:?}")))?;
    let bytes = v
        .checked_mul(1u64 << shift)
        .ok_or_else(|| Error::input(format!("memory size {text:?} too large")))?;
    if bytes == 0 {
        return Err(Error::input("memory budget must be positive"));
    }
    Ok(bytes)
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Invariant(_) => EXIT_CHECK_FAILED,
        _ => EXIT_BAD_INPUT,
    }
}

pub(crate) struct Context {
    pub engine: Engine,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub timing: bool,
}

/// Runs one invocation; `mem_env` is the value of `SUMSETLAB_MEM`, if set.
/// Returns the process exit code.
pub fn run<I, T>(
    args: I,
    mem_env: Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli, mem_env, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli, mem_env: Option<String>, stdout: &mut dyn Write) -> Result<i32> {
    let memory_budget = match mem_env.as_deref().or(cli.mem.as_deref()) {
        Some(text) => parse_bytes(text)?,
        None => DEFAULT_MEMORY_BUDGET,
    };
    let ctx = Context {
        engine: Engine::new(EngineConfig {
            memory_budget,
            algo: cli.algo,
            verify: cli.check,
        }),
        format: cli.format,
        out: cli.out,
        seed: cli.seed,
        timing: cli.timing,
    };
    commands::dispatch(&ctx, cli.command, stdout)
}
