//! Command-line driver behind the `equisquare` binary.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad usage or parameters.
//! Machine-readable JSON goes to stdout and a short summary to stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::constructions::{
    block_structured_square, counterexample_square, cyclic_latin, missing_colour_certificate,
    random_equi_square, BlockStructure, BoxPairing, SIDECAR_FORMAT,
};
use crate::dependence::{block_transversal, default_cap};
use crate::experiments::{self, Experiment, Params};
use crate::hypergraph::alon_kim;
use crate::rng::SeedSplitter;
use crate::solvers::{brute_force_max, exact_max, local_search, random_greedy};
use crate::square::{
    read_cells, read_square, write_square, write_transversal, FormatError, Transversal,
};

#[derive(Debug, Parser)]
#[command(name = "equisquare", version, about = "Transversals in equi-n-squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Counterexample,
    Random,
    Block,
    Cyclic,
    AlonKim,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Brute,
    Greedy,
    Local,
    Block,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentName {
    MissingColour,
    Concentration,
    GreedyBaseline,
    Peel,
    Survival,
}

impl From<ExperimentName> for Experiment {
    fn from(e: ExperimentName) -> Self {
        match e {
            ExperimentName::MissingColour => Experiment::MissingColour,
            ExperimentName::Concentration => Experiment::Concentration,
            ExperimentName::GreedyBaseline => Experiment::GreedyBaseline,
            ExperimentName::Peel => Experiment::Peel,
            ExperimentName::Survival => Experiment::Survival,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an instance and its sidecar, if any.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Order of the square; for alon-kim, the parameter t.
        #[arg(long)]
        n: usize,
        /// Block size for --kind block.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find a transversal and write it next to the input.
    Solve {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Node budget for exact search.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Blocks sidecar; defaults to `<stem>.blocks.json`.
        #[arg(long)]
        blocks: Option<PathBuf>,
        /// Component cap for the block method.
        #[arg(long)]
        s: Option<usize>,
        /// Local-search iterations; defaults to 20n.
        #[arg(long)]
        iterations: Option<usize>,
        /// Transversal output; defaults to `<stem>.transversal.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the halving trace as JSON (block method).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a square, and optionally a transversal and a pairing certificate.
    Verify {
        #[arg(long)]
        square: PathBuf,
        #[arg(long)]
        transversal: Option<PathBuf>,
        #[arg(long)]
        pairing: Option<PathBuf>,
    },
    /// Run an experiment suite and write CSV.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value_t = 0.9)]
        min_frac: f64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn failed(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

/// `dir/s.txt` with `suffix = "pairing.json"` gives `dir/s.pairing.json`.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate {
            kind,
            n,
            m,
            seed,
            out,
        } => generate(kind, n, m, seed, &out),
        Command::Solve {
            method,
            input,
            seed,
            budget,
            blocks,
            s,
            iterations,
            out,
            trace,
        } => solve(
            method, &input, seed, budget, blocks, s, iterations, out, trace,
        ),
        Command::Verify {
            square,
            transversal,
            pairing,
        } => verify(&square, transversal.as_deref(), pairing.as_deref()),
        Command::Experiment {
            name,
            n,
            m,
            trials,
            seed,
            parallel,
            s,
            iterations,
            min_frac,
            out,
        } => {
            let params = Params {
                n,
                m,
                trials,
                seed,
                parallel,
                cap: s,
                iterations,
                min_frac,
            };
            experiment(name.into(), &params, out.as_deref())
        }
    }
}

fn generate(kind: Kind, n: usize, m: Option<usize>, seed: u64, out: &Path) -> Result<(), Failure> {
    let mut written = vec![out.to_path_buf()];
    match kind {
        Kind::Counterexample => {
            let (square, pairing) = counterexample_square(n).map_err(usage)?;
            write_square(&square, out).map_err(usage)?;
            let side = sidecar_path(out, "pairing.json");
            write_text(&side, &pairing.to_json())?;
            written.push(side);
        }
        Kind::Random => {
            let square = random_equi_square(n, seed).map_err(usage)?;
            write_square(&square, out).map_err(usage)?;
        }
        Kind::Block => {
            let m = m.ok_or_else(|| usage("--kind block needs --m"))?;
            let (square, blocks) = block_structured_square(n, m, seed).map_err(usage)?;
            write_square(&square, out).map_err(usage)?;
            let side = sidecar_path(out, "blocks.json");
            write_text(&side, &blocks.to_json())?;
            written.push(side);
        }
        Kind::Cyclic => {
            let square = cyclic_latin(n).map_err(usage)?;
            write_square(&square, out).map_err(usage)?;
        }
        Kind::AlonKim => {
            let h = alon_kim(n).map_err(usage)?;
            h.write(out).map_err(usage)?;
            let side = sidecar_path(out, "hypergraph.json");
            let doc = json!({
                "format": SIDECAR_FORMAT,
                "kind": "alon-kim",
                "t": n,
                "class_sizes": h.class_sizes(),
                "edges": h.edges(),
            });
            write_text(&side, &doc.to_string())?;
            written.push(side);
        }
    }
    let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    println!("{}", json!({ "files": files }));
    eprintln!("wrote {}", files.join(", "));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    method: Method,
    input: &Path,
    seed: u64,
    budget: u64,
    blocks: Option<PathBuf>,
    s: Option<usize>,
    iterations: Option<usize>,
    out: Option<PathBuf>,
    trace_out: Option<PathBuf>,
) -> Result<(), Failure> {
    let square = read_square(input).map_err(usage)?;
    let n = square.n();
    let split = SeedSplitter::new(seed);
    let iterations = iterations.unwrap_or(20 * n);
    let (t, optimal): (Transversal, bool) = match method {
        Method::Exact => exact_max(&square, budget),
        Method::Brute => (brute_force_max(&square).map_err(usage)?.1, true),
        Method::Greedy => (random_greedy(&square, &mut split.stream("greedy")), false),
        Method::Local => {
            let start = random_greedy(&square, &mut split.stream("greedy"));
            (
                local_search(
                    &square,
                    &start,
                    &mut split.stream("local_search"),
                    iterations,
                ),
                false,
            )
        }
        Method::Block => {
            let path = blocks.unwrap_or_else(|| sidecar_path(input, "blocks.json"));
            if !path.exists() {
                return Err(usage(format!(
                    "block method needs a blocks sidecar; {} not found",
                    path.display()
                )));
            }
            let structure = BlockStructure::from_json(&read_text(&path)?)
                .map_err(|e| usage(format!("bad blocks sidecar: {e}")))?;
            let cap = s.unwrap_or_else(|| default_cap(n));
            let run = block_transversal(&square, &structure, cap, &mut split.stream("halving"))
                .map_err(usage)?;
            if let Some(path) = trace_out {
                let mut trace = run.trace.clone();
                trace.rng_seed = Some(seed);
                write_text(&path, &trace.to_json())?;
            }
            (run.transversal, false)
        }
    };
    let cells_file = out.unwrap_or_else(|| sidecar_path(input, "transversal.txt"));
    write_transversal(&t, &cells_file).map_err(usage)?;
    println!(
        "{}",
        json!({ "size": t.len(), "optimal": optimal, "cells_file": cells_file.display().to_string() })
    );
    eprintln!("n={n} size={} optimal={optimal}", t.len());
    Ok(())
}

fn format_failure(e: FormatError) -> Failure {
    match e {
        FormatError::Io(_) => usage(e),
        other => failed(other),
    }
}

fn verify(
    square: &Path,
    transversal: Option<&Path>,
    pairing: Option<&Path>,
) -> Result<(), Failure> {
    let sq = read_square(square).map_err(format_failure)?;
    let mut report = json!({ "square": "ok", "n": sq.n() });
    let mut t = None;
    if let Some(path) = transversal {
        let cells = read_cells(path).map_err(format_failure)?;
        let valid = Transversal::new(&sq, &cells).map_err(failed)?;
        report["transversal"] = json!({ "status": "ok", "size": valid.len() });
        t = Some(valid);
    }
    if let Some(path) = pairing {
        let pairing = BoxPairing::from_json(&read_text(path)?)
            .map_err(|e| usage(format!("bad pairing sidecar: {e}")))?;
        let t = t.unwrap_or_else(Transversal::empty);
        let cert = missing_colour_certificate(&sq, &pairing, &t).map_err(failed)?;
        if cert.transversal_size > cert.implied_bound {
            return Err(failed(format!(
                "BoundViolation({}, {})",
                cert.transversal_size, cert.implied_bound
            )));
        }
        report["certificate"] = json!({
            "status": "ok",
            "distinct_missing": cert.distinct_missing,
            "implied_bound": cert.implied_bound,
        });
    }
    println!("{report}");
    eprintln!("verify: pass");
    Ok(())
}

fn experiment(which: Experiment, params: &Params, out: Option<&Path>) -> Result<(), Failure> {
    let summary = match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            experiments::run_to_csv(which, params, std::io::BufWriter::new(file))
        }
        None => experiments::run_to_csv(which, params, std::io::stdout().lock()),
    }
    .map_err(usage)?;
    eprintln!("{summary}");
    Ok(())
}
