//! The `cpl` command line: seeded, reproducible experiments over the
//! `cpl-core` library, each printing a line-oriented `key=value` report.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod linear;
mod operators;
mod protocols;
pub mod report;
mod structures;

pub use report::{Report, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cpl_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: cpl_core::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cpl", version, about = "Cell probe laboratory: data structures, encodings, circuits and operators over GF(2)")]
pub struct Cli {
    /// Seed for every random choice made by the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for exhaustive factorization and exact discrepancy.
    #[arg(long, global = true, env = "CPL_THREADS", default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a random script against a structure and report probe counts.
    Simulate(SimulateArgs),
    /// Check query non-adaptivity and memoryless updates on random memories.
    Check(CheckArgs),
    /// Run an encoding protocol end to end and compare its length to entropy.
    EncodeVerify(EncodeArgs),
    /// Convert between a linear structure (V, Q) and a depth-2 XOR circuit.
    Compile(CompileArgs),
    /// Factor a matrix F as Q·V with few wires.
    Factorize(FactorizeArgs),
    /// Write an operator matrix: prefix sums, grid lines or a geometric incidence.
    GenOperator(GenArgs),
    /// Discrepancy, spectrum and intersection profile of a matrix or geometry file.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DsKind {
    /// Indexing: one cell per string position, copied across columns.
    Colcopy,
    /// Indexing: one register per string.
    Register,
    /// Set disjointness: a bitset of T.
    Bitset,
    /// Prefix sums over GF(2) with dyadic ranges.
    PrefixTree,
    /// Non-adaptive but not memoryless.
    CopyCell,
    /// Adaptive queries.
    BinarySearch,
}

#[derive(Debug, Clone, Args)]
pub struct DsArgs {
    #[arg(long, value_enum)]
    pub ds: DsKind,
    /// Number of strings (indexing).
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// String length, universe or input size, depending on the structure.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Word size in bits.
    #[arg(long, default_value_t = 8)]
    pub w: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub ds: DsArgs,
    /// Print every probe as `op#<k> <R|W> @<addr> <before> -> <after>`.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub ds: DsArgs,
    /// Randomized memories per operation.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Indexing,
    Disjointness,
    Matmul,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    /// Structure to encode through (indexing: colcopy or register; disjointness: bitset).
    #[arg(long, value_enum)]
    pub ds: Option<DsKind>,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub w: u32,
    /// Matrix dimension (matmul).
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Instance file instead of a random instance (indexing: matrix, disjointness: set).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Circuit file to audit instead of the naive circuit (matmul).
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Random matrices per column in the matmul audit.
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    /// Wrap the structure so that this update's writes are lost.
    #[arg(long)]
    pub drop_update: Option<usize>,
    /// Also print the message as hex.
    #[arg(long)]
    pub hex: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompileTarget {
    /// Read V and Q, write the circuit.
    Circuit,
    /// Read the circuit, write V and Q.
    Ds,
}

#[derive(Debug, Clone, Args)]
pub struct CompileArgs {
    #[arg(long, value_enum)]
    pub to: CompileTarget,
    /// Cell contents as a function of the input (s x n).
    #[arg(long)]
    pub v: Option<PathBuf>,
    /// Query answers as a function of the cells (m x s).
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[arg(long)]
    pub circuit: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FactorMode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Args)]
pub struct FactorizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FactorMode::Greedy)]
    pub mode: FactorMode,
    /// Largest middle layer tried by the exhaustive search (default: columns of F).
    #[arg(long)]
    pub s_max: Option<usize>,
    #[arg(long)]
    pub v_out: Option<PathBuf>,
    #[arg(long)]
    pub q_out: Option<PathBuf>,
    #[arg(long)]
    pub circuit_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    PrefixSum,
    GridLines,
    Incidence,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: OperatorKind,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Prime grid size.
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// Geometry file (incidence).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Matrix file to write; without it the matrix goes to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Matrix file, or a geometry file starting with `DIM`.
    #[arg(long)]
    pub input: PathBuf,
    /// Count singular values at least this large.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Jacobi convergence tolerance.
    #[arg(long, default_value_t = cpl_core::operators::DEFAULT_JACOBI_TOL)]
    pub tol: f64,
    /// Random colorings tried when the exact search is out of reach.
    #[arg(long, default_value_t = 4096)]
    pub trials: usize,
}

/// Per-run context: the one seeded generator and the thread budget.
pub struct Ctx {
    pub seed: u64,
    pub threads: usize,
    pub rng: ChaCha8Rng,
}

impl Ctx {
    pub fn new(seed: u64, threads: usize) -> Self {
        Ctx {
            seed,
            threads,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn echo(&self, report: &mut Report) {
        report.config("seed", self.seed).config("threads", self.threads);
    }
}

/// What a command produced: a report, or raw text for stdout.
pub enum Output {
    Report(Report),
    Text(String),
}

pub fn execute(cli: Cli) -> CliResult<Output> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let mut ctx = Ctx::new(cli.seed, cli.threads);
    let with_echo = |mut r: Report, ctx: &Ctx| {
        ctx.echo(&mut r);
        Output::Report(r)
    };
    Ok(match cli.command {
        Command::Simulate(a) => with_echo(structures::simulate(&a, &mut ctx)?, &ctx),
        Command::Check(a) => with_echo(structures::check(&a, &mut ctx)?, &ctx),
        Command::EncodeVerify(a) => with_echo(protocols::encode_verify(&a, &mut ctx)?, &ctx),
        Command::Compile(a) => with_echo(linear::compile(&a)?, &ctx),
        Command::Factorize(a) => with_echo(linear::factorize(&a, &ctx)?, &ctx),
        Command::GenOperator(a) => match operators::gen_operator(&a)? {
            Output::Report(r) => with_echo(r, &ctx),
            text => text,
        },
        Command::Analyze(a) => with_echo(operators::analyze(&a, &mut ctx)?, &ctx),
    })
}

/// Parses `args`, runs the command and writes its output; returns the exit
/// code: 0 on success or PASS, 1 on FAIL, 2 on any error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli) {
        Ok(Output::Report(r)) => {
            let _ = write!(out, "{r}");
            match r.status() {
                Status::Fail => 1,
                Status::Pass | Status::Done => 0,
            }
        }
        Ok(Output::Text(t)) => {
            let _ = out.write_all(t.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn main_entry() -> ExitCode {
    let code = run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and parses a file, attaching its path to parse errors.
pub(crate) fn parse_file<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> cpl_core::Result<T>,
) -> CliResult<T> {
    let text = read_file(path)?;
    parse(&text).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_matrix(path: &Path) -> CliResult<cpl_core::BitMatrix> {
    parse_file(path, cpl_core::BitMatrix::parse_text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (u8, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("cpl").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn disjointness_example() {
        let (code, out, _) = run_str(&[
            "encode-verify", "--protocol", "disjointness", "--ds", "bitset", "--n", "8", "--w", "8", "--seed", "7",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("\nlength_bits=48\n"), "{out}");
        assert!(out.contains("\nentropy_bits=8\n"), "{out}");
        assert!(out.contains("\nresult=PASS\n"), "{out}");
        assert!(out.contains("config.seed=7\n"), "{out}");
    }

    #[test]
    fn same_seed_same_bytes() {
        let args = ["simulate", "--ds", "register", "--k", "4", "--n", "4", "--seed", "3", "--trace"];
        assert_eq!(run_str(&args), run_str(&args));
        let other = ["simulate", "--ds", "register", "--k", "4", "--n", "4", "--seed", "4", "--trace"];
        assert_ne!(run_str(&args).1, run_str(&other).1);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["simulate"]).0, 2);
        assert_eq!(run_str(&["--threads", "0", "check", "--ds", "bitset"]).0, 2);
        let (code, _, err) = run_str(&["factorize", "--input", "/nonexistent/f.mat"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error: /nonexistent/f.mat"), "{err}");
    }

    #[test]
    fn help_is_not_an_error() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("encode-verify"));
    }
}
