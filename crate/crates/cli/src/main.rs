//! Command-line front end: sampling, density grids, experiment execution,
//! and the verification table. Exit codes: 0 success, 1 check or threshold
//! failure, 2 usage or config error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mallows_core::density::{rho_density, u_density, DensityParams, QuadratureConfig, RhoParams};
use mallows_core::experiments::{run_experiment, ExperimentConfig};
use mallows_core::perm::Permutation;
use mallows_core::sampler::{
    decode_lehmer, sample_mallows_with, MallowsParams, SeedSpec,
};
use mallows_core::verify::{run_all, sampler_exactness_with_decoder, CheckStatus, VerifyConfig};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mallows",
    version,
    about = "Exact Mallows permutation sampling, limit densities, and convergence experiments"
)]
struct Cli {
    /// Worker threads for parallel sections (default: hardware count). Never
    /// affects outputs, only speed.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw permutations and print them with inversion counts.
    Sample(SampleArgs),
    /// Evaluate a limit density on an evenly spaced grid.
    Density(DensityArgs),
    /// Run a Monte Carlo experiment described by a JSON config file.
    Experiment(ExperimentArgs),
    /// Run the exact-identity and density-identity check suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SampleArgs {
    /// Permutation size.
    #[arg(long)]
    n: usize,
    /// Weight q > 0. Exactly one of --q and --beta.
    #[arg(long, conflicts_with = "beta")]
    q: Option<f64>,
    /// Slope; the weight becomes 1 - beta/n.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Number of draws.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed; identical seeds reproduce identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DensityKind {
    /// Single-permutation limit density.
    U,
    /// Product limit density.
    Rho,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, value_enum)]
    kind: DensityKind,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    /// Second slope; only the product density reads it.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Grid resolution per axis; the output has resolution^2 rows.
    #[arg(long = "grid", default_value_t = 51)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and report.csv (default: JSON to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest enumerated size (hard limit 9).
    #[arg(long = "max-n", default_value_t = 6)]
    max_n: usize,
    /// Comma-separated weights for the exhaustive suites.
    #[arg(
        long = "q-list",
        value_delimiter = ',',
        default_values_t = vec![0.3, 0.8, 1.25]
    )]
    q_list: Vec<f64>,
    /// Negative-control hook: corrupt the decode path so the sampler check
    /// must fail.
    #[arg(long, hide = true, default_value_t = false)]
    corrupt_decoder: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads < 1 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("error: worker pool was already configured");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn run(command: Command) -> CliResult {
    match command {
        Command::Sample(args) => cmd_sample(args),
        Command::Density(args) => cmd_density(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn cmd_sample(args: SampleArgs) -> CliResult {
    let params = match (args.q, args.beta) {
        (Some(q), None) => MallowsParams::new(args.n, q)?,
        (None, Some(beta)) => MallowsParams::from_beta(args.n, beta)?,
        _ => return Err("provide exactly one of --q and --beta".into()),
    };
    if args.count < 1 {
        return Err("--count must be at least 1".into());
    }
    let mut rng = SeedSpec::new(args.seed).rng(0);
    let draws: Vec<Permutation> = (0..args.count)
        .map(|_| sample_mallows_with(&params, &mut rng))
        .collect();
    let text = match args.format {
        Format::Csv => {
            let mut text = String::from("permutation,inversions\n");
            for p in &draws {
                text.push_str(&format!(
                    "{},{}\n",
                    csv_quote(&p.one_line()),
                    p.inversion_number()
                ));
            }
            text
        }
        Format::Json => {
            #[derive(Serialize)]
            struct SampleRow<'a> {
                permutation: &'a Permutation,
                inversions: u64,
            }
            let rows: Vec<SampleRow> = draws
                .iter()
                .map(|p| SampleRow {
                    permutation: p,
                    inversions: p.inversion_number(),
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&rows)?;
            text.push('\n');
            text
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_density(args: DensityArgs) -> CliResult {
    if args.grid < 2 {
        return Err("--grid must be at least 2".into());
    }
    let quad = QuadratureConfig::default();
    let dp = DensityParams::new(args.beta);
    let rp = RhoParams::new(args.beta, args.gamma);
    let res = args.grid;
    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(res * res);
    for i in 0..res {
        let x = i as f64 / (res - 1) as f64;
        for j in 0..res {
            let y = j as f64 / (res - 1) as f64;
            let value = match args.kind {
                DensityKind::U => u_density(x, y, dp),
                DensityKind::Rho => rho_density(x, y, rp, &quad)?,
            };
            rows.push((x, y, value));
        }
    }
    let text = match args.format {
        Format::Csv => {
            let mut text = String::from("x,y,value\n");
            for (x, y, value) in &rows {
                text.push_str(&format!("{x:.16e},{y:.16e},{value:.16e}\n"));
            }
            text
        }
        Format::Json => {
            #[derive(Serialize)]
            struct GridRow {
                x: f64,
                y: f64,
                value: f64,
            }
            let rows: Vec<GridRow> = rows
                .into_iter()
                .map(|(x, y, value)| GridRow { x, y, value })
                .collect();
            let mut text = serde_json::to_string_pretty(&rows)?;
            text.push('\n');
            text
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("could not read {}: {e}", args.config.display()))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| format!("config does not parse: {e}"))?;
    let report = run_experiment(&config)?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.json"), report.to_json())?;
            std::fs::write(dir.join("report.csv"), report.to_csv())?;
            for s in &report.per_n {
                println!(
                    "n={}: median={:.6} min={:.6} max={:.6}",
                    s.n, s.median, s.min, s.max
                );
            }
            println!(
                "report written to {}; hard thresholds {}",
                dir.display(),
                if report.all_hard_pass { "pass" } else { "FAIL" }
            );
        }
        None => {
            let mut json = report.to_json();
            json.push('\n');
            print!("{json}");
        }
    }
    if report.all_hard_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_verify(args: VerifyArgs) -> CliResult {
    let config = VerifyConfig {
        max_n: args.max_n,
        q_list: args.q_list,
    };
    let mut results = run_all(&config)?;
    if args.corrupt_decoder {
        let corrupted = sampler_exactness_with_decoder(config.max_n, &config.q_list, |code| {
            let p = decode_lehmer(code)?;
            if p.n() < 2 {
                return Ok(p);
            }
            let mut map = p.as_slice().to_vec();
            map.swap(0, 1);
            Permutation::from_one_line(map)
        })?;
        if let Some(slot) = results.iter_mut().find(|r| r.name == "sampler-exactness") {
            *slot = corrupted;
        }
    }
    let text = match args.format {
        Format::Csv => {
            let mut text = String::from("name,status,detail\n");
            for r in &results {
                text.push_str(&format!("{},{},{}\n", r.name, r.status, csv_quote(&r.detail)));
            }
            text
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&results)?;
            text.push('\n');
            text
        }
    };
    emit(&args.out, &text)?;
    let failures = results
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .count();
    if failures > 0 {
        eprintln!("{failures} check(s) failed");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
