use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use decoy_core::bench::{run_benchmark, BenchConfig, BenchMechanism};
use decoy_core::data::{
    enforce_eligibility, generate_synthetic, ingest_csv, read_published_files, write_dataset, write_published,
    Dataset, SchemaConfig,
};
use decoy_core::estimator::{estimate_resolved, BayesOptions, CountQuery, DecoyModel};
use decoy_core::guarantees::{guarantee_tables, write_guarantee_csv, GuaranteeParams};
use decoy_core::mechanism::{
    anonymize_a_prime, anonymize_anatomy, anonymize_global_a, MechanismKind, RandomizerConfig,
};
use decoy_core::{Error, Execution, Ratio};
use serde_json::json;

use crate::{Anonymize, Benchmark, Cli, Command, Estimate, GenData, Guarantees};

/// A command-line mistake detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// 2 usage, 3 data, 4 infeasible configuration.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                _ if err.is_infeasible() => 4,
                Error::InvalidParameter(_) | Error::Unsupported(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(args) => gen_data(cli, args),
        Command::Anonymize(args) => anonymize(cli, args),
        Command::Estimate(args) => estimate(cli, args),
        Command::Guarantees(args) => guarantees(cli, args),
        Command::Benchmark(args) => benchmark(cli, args),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_schema(path: &Path) -> Result<SchemaConfig> {
    SchemaConfig::from_json_file(path).with_context(|| format!("reading schema {}", path.display()))
}

fn decoy_model(name: &str) -> DecoyModel {
    if name == "simple" {
        DecoyModel::Simple
    } else {
        DecoyModel::Exact
    }
}

fn gen_data(cli: &Cli, args: &GenData) -> Result<()> {
    let config = match &args.schema {
        Some(p) => load_schema(p)?,
        None => SchemaConfig::census_like(),
    };
    let dataset = generate_synthetic(args.n, &config, cli.seed)?;
    write_dataset(&dataset, output(cli.out.as_deref())?)?;
    if let Some(p) = &args.schema_out {
        let resolved = SchemaConfig::from_schema(dataset.schema());
        std::fs::write(p, resolved.to_json_string()).with_context(|| format!("writing {}", p.display()))?;
    }
    if cli.json {
        eprintln!("{}", json!({ "rows": dataset.len(), "seed": cli.seed }));
    }
    Ok(())
}

fn sibling(path: &Path, extension: &str) -> PathBuf {
    path.with_extension(extension)
}

fn anonymize(cli: &Cli, args: &Anonymize) -> Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| usage("anonymize needs --out for the published CSV"))?;
    let config = load_schema(&args.schema)?;
    let mut dataset: Dataset = ingest_csv(&args.input, &config, cli.seed)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut deleted = 0;
    if args.enforce_eligibility {
        let (fixed, report) = enforce_eligibility(&dataset, args.l_prime);
        if report.eligible {
            deleted = report.deleted_ids.len();
            dataset = fixed;
        }
    }
    let p = args
        .p
        .as_deref()
        .map(|s| s.parse::<Ratio<u64>>().map_err(|_| usage(format!("--p `{s}` is not a fraction like 3/4"))))
        .transpose()?;

    let mut written = vec![out.to_path_buf()];
    let rows = match args.mechanism.as_str() {
        "anatomy" => {
            let publication = anonymize_anatomy(&dataset, args.l_prime, cli.seed)?;
            let sa_path = sibling(out, "sa.csv");
            publication.write_nsa_csv(output(Some(out))?)?;
            publication.write_sa_csv(output(Some(&sa_path))?)?;
            written.push(sa_path);
            publication.nsa_table.len()
        }
        mechanism => {
            let table = if mechanism == "global_a" {
                let p = p.unwrap_or_else(|| Ratio::new(1, args.l_prime.max(1) as u64));
                anonymize_global_a(&dataset, p, cli.seed)?
            } else {
                let cfg = RandomizerConfig {
                    mechanism: MechanismKind::APrime,
                    l_prime: args.l_prime,
                    seed: cli.seed,
                    p,
                    unsafe_test_mode: args.unsafe_test_mode,
                };
                anonymize_a_prime(&dataset, &cfg)?
            };
            let meta_path = sibling(out, "meta.json");
            write_published(&table, output(Some(out))?)?;
            table.meta().write_file(&meta_path)?;
            written.push(meta_path);
            table.len()
        }
    };

    if cli.json {
        println!(
            "{}",
            json!({ "rows": rows, "deleted_for_eligibility": deleted, "files": written })
        );
    } else {
        if deleted > 0 {
            eprintln!("deleted {deleted} tuples to make the data eligible");
        }
        for f in &written {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn estimate(cli: &Cli, args: &Estimate) -> Result<()> {
    let meta = args
        .meta
        .clone()
        .unwrap_or_else(|| sibling(&args.published, "meta.json"));
    let table = read_published_files(&args.published, &meta)
        .with_context(|| format!("reading {} with {}", args.published.display(), meta.display()))?;
    let queries = match (&args.queries, &args.query) {
        (Some(path), _) => CountQuery::read_jsonl(path)?,
        (None, Some(text)) => CountQuery::parse_jsonl(text)?,
        (None, None) => return Err(usage("estimate needs --queries FILE or --query JSON")),
    };
    let opts = BayesOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        model: decoy_model(&args.decoy_model),
    };
    let mut out = output(cli.out.as_deref())?;
    let mut results = Vec::with_capacity(queries.len());
    for q in &queries {
        let resolved = q.resolve(table.schema())?;
        let est = estimate_resolved(&table, &resolved, &opts)?;
        if cli.json {
            results.push(json!({
                "query": q,
                "estimate": est.estimate,
                "iterations": est.iterations,
                "converged": est.converged,
            }));
        } else {
            writeln!(out, "{:.3}\t{}", est.estimate, q.to_json_line())?;
        }
    }
    if cli.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&results)?)?;
    }
    Ok(())
}

fn guarantees(cli: &Cli, args: &Guarantees) -> Result<()> {
    let params = GuaranteeParams::new(args.l_prime, args.eps, args.te)?;
    let table = args
        .f_max
        .map(|f| guarantee_tables(args.l_prime, args.eps, 1..=f))
        .transpose()?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&params)?);
    } else {
        println!(
            "T_f real {:.2} / reported {} (safe integer threshold {})",
            params.t_f.real, params.t_f.rounded, params.t_f.ceil
        );
        println!("T_P at f_s = {}: {:.4}", params.t_f.rounded.max(1), params.t_p);
    }
    if let Some(rows) = table {
        match &cli.out {
            Some(p) => write_guarantee_csv(&rows, output(Some(p))?)?,
            None if !cli.json => write_guarantee_csv(&rows, io::stdout().lock())?,
            None => {}
        }
    }
    Ok(())
}

fn benchmark(cli: &Cli, args: &Benchmark) -> Result<()> {
    let mechanisms = args
        .mechanisms
        .iter()
        .map(|m| m.parse::<BenchMechanism>())
        .collect::<Result<Vec<_>, _>>()?;
    let dataset = match (&args.input, &args.schema) {
        (Some(input), Some(schema)) => ingest_csv(input, &load_schema(schema)?, cli.seed)?,
        _ => generate_synthetic(args.n, &SchemaConfig::census_like(), cli.seed)?,
    };
    let config = BenchConfig {
        mechanisms,
        l_primes: args.l_primes.clone(),
        epsilons: args.epsilons.clone(),
        laplace_m: args.laplace_m.clone(),
        seeds: if args.seeds.is_empty() { vec![cli.seed] } else { args.seeds.clone() },
        pool_size: args.pool_size,
        pool_seed: cli.seed,
        bayes: BayesOptions {
            model: decoy_model(&args.decoy_model),
            ..BayesOptions::default()
        },
        exec: if args.sequential { Execution::Sequential } else { Execution::default() },
        ..BenchConfig::default()
    };
    let report = run_benchmark(&dataset, &config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if cli.json {
        println!("{}", report.to_json_string());
        if let Some(p) = &cli.out {
            report.write_csv(output(Some(p))?)?;
        }
    } else {
        report.write_csv(output(cli.out.as_deref())?)?;
    }
    Ok(())
}
