mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "decoy", version, about = "Decoy-group anonymization of sensitive attributes")]
struct Cli {
    /// Seed for every random choice (ids, generation, randomization).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; most commands write to stdout without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset.
    GenData(GenData),
    /// Publish a dataset through A', mechanism A or Anatomy.
    Anonymize(Anonymize),
    /// Estimate count queries from a published table.
    Estimate(Estimate),
    /// Utility threshold, privacy tail and their tables.
    Guarantees(Guarantees),
    /// Compare mechanisms over a random query pool.
    Benchmark(Benchmark),
}

#[derive(Args, Debug)]
struct GenData {
    /// Number of tuples.
    #[arg(long)]
    n: usize,
    /// Schema JSON; defaults to the built-in census-like schema.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Also write the resolved schema JSON here.
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Anonymize {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Group size l' (A'), l (Anatomy), or 1/p (mechanism A when --p is absent).
    #[arg(long)]
    l_prime: usize,
    #[arg(long, default_value = "a_prime", value_parser = ["a_prime", "global_a", "anatomy"])]
    mechanism: String,
    /// Retention probability as a fraction, e.g. 3/4.
    #[arg(long)]
    p: Option<String>,
    /// Allow p != 1/l' for A' (the release is then not zero-differentially private).
    #[arg(long)]
    unsafe_test_mode: bool,
    /// Delete up to l'-1 tuples when the data is not eligible.
    #[arg(long)]
    enforce_eligibility: bool,
}

#[derive(Args, Debug)]
struct Estimate {
    /// Published CSV.
    #[arg(long)]
    published: PathBuf,
    /// Sidecar JSON; defaults to the CSV path with extension `meta.json`.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// JSON-lines query file.
    #[arg(long, conflicts_with = "query")]
    queries: Option<PathBuf>,
    /// A single query, e.g. '{"nsa":{"age":"a01"},"sa":{"occupation":"o03"}}'.
    #[arg(long)]
    query: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value = "exact", value_parser = ["exact", "simple"])]
    decoy_model: String,
}

#[derive(Args, Debug)]
struct Guarantees {
    #[arg(long)]
    l_prime: usize,
    /// Relative error bound.
    #[arg(long)]
    eps: f64,
    /// Error probability threshold T_E.
    #[arg(long, default_value_t = 0.02)]
    te: f64,
    /// Write the table for f_s in 1..=f_max (to --out, or stdout).
    #[arg(long)]
    f_max: Option<u64>,
}

#[derive(Args, Debug)]
struct Benchmark {
    /// Comma-separated: a_prime,anatomy,global_a,laplace.
    #[arg(long, value_delimiter = ',', default_value = "a_prime,anatomy,global_a,laplace")]
    mechanisms: Vec<String>,
    /// Synthetic dataset size (ignored with --input).
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Benchmark a CSV instead of synthetic data (needs --schema).
    #[arg(long, requires = "schema")]
    input: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8,9,10")]
    l_primes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05")]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    laplace_m: Vec<usize>,
    /// Anonymization seeds per configuration (default: --seed).
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 5000)]
    pool_size: usize,
    #[arg(long, default_value = "exact", value_parser = ["exact", "simple"])]
    decoy_model: String,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
