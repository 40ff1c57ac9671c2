use std::fs::File;
use std::io::BufWriter;
use std::process::ExitCode;

use clap::Parser;

use spmat_bench::{run, BenchConfig, BenchError, Experiment};

/// Insertion and expression-fusion benchmarks for the sparse matrix library.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Cli {
    /// Experiment to run: insert-unordered, insert-quasi-ordered,
    /// expr-trace, or expr-diagmat.
    #[arg(long)]
    experiment: String,

    /// Matrix side length.
    #[arg(long, default_value_t = 2000)]
    n: usize,

    /// Comma-separated densities of non-zero elements, each in (0, 1].
    #[arg(long, default_value = "0.0001,0.001,0.01,0.1")]
    densities: String,

    /// Repetitions per (density, strategy) cell.
    #[arg(long, default_value_t = 10)]
    reps: usize,

    /// Seed for workload generation; the same seed reproduces the exact
    /// insertion sequences and matrix contents.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: String,

    /// Density cap above which direct-CSC insertion is skipped in unordered
    /// mode (its quadratic build time is orders of magnitude slower).
    #[arg(long, default_value_t = 0.01)]
    csc_cap: f64,
}

fn config_from(cli: &Cli) -> Result<BenchConfig, String> {
    let experiment = Experiment::parse(&cli.experiment).ok_or_else(|| {
        format!(
            "unknown experiment `{}`; expected insert-unordered, insert-quasi-ordered, expr-trace or expr-diagmat",
            cli.experiment
        )
    })?;
    let mut densities = Vec::new();
    for token in cli.densities.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        densities.push(
            token
                .parse::<f64>()
                .map_err(|_| format!("invalid density `{token}`"))?,
        );
    }
    Ok(BenchConfig {
        experiment,
        n: cli.n,
        densities,
        reps: cli.reps,
        seed: cli.seed,
        csc_density_cap: cli.csc_cap,
        quiet: std::env::var("BENCH_QUIET").is_ok_and(|v| v == "1"),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config_from(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let records = match run(&cfg) {
        Ok(records) => records,
        Err(BenchError::Config(msg)) => {
            eprintln!("error: configuration error: {msg}");
            return ExitCode::from(2);
        }
        Err(BenchError::Correctness(msg)) => {
            eprintln!("error: correctness check failed: {msg}");
            return ExitCode::from(3);
        }
    };

    let file = match File::create(&cli.out) {
        Ok(file) => file,
        Err(err) => {
            eprintln!("error: cannot create {}: {err}", cli.out);
            return ExitCode::from(2);
        }
    };
    let mut sink = BufWriter::new(file);
    if let Err(err) = spmat::io::write_csv_results(&records, &mut sink) {
        eprintln!("error: writing {}: {err}", cli.out);
        return ExitCode::from(2);
    }
    if !cfg.quiet {
        eprintln!("wrote {} records to {}", records.len(), cli.out);
    }
    ExitCode::SUCCESS
}
