use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doa_bench::curves::{emit_curves, write_curves, Quantity};
use doa_bench::sweep::{read_records, run_sweep, write_records, write_summary};
use doa_bench::ExperimentConfig;
use doa_map::validate::{validate_distributions_with, VALIDATION_SEED};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "doa-bench", version, about = "Monte Carlo experiments for source-count estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write per-run and summary CSV tables.
    Sweep {
        /// Flat TOML file; keys left out keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start from the full-size defaults instead of the desk-scale ones.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides `output_path`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill `wall_ms` with measured times (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Check the incomplete-beta and double-gamma identities.
    ValidateDist {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = VALIDATION_SEED)]
        seed: u64,
    },
    /// Average one column of a results table into per-method curves over SNR.
    Curves {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        quantity: String,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    body(&mut out)?;
    out.flush()
}

fn sweep(
    config: Option<PathBuf>,
    paper_scale: bool,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    timing: bool,
) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(config.as_deref(), paper_scale) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(o) = out {
        cfg.output_path = o;
    }
    cfg.timing |= timing;
    if jobs == Some(0) {
        return fail(EXIT_CONFIG, "--jobs must be at least 1");
    }

    let result = match run_sweep(&cfg, jobs) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let summary = summary_path(&cfg.output_path);
    if let Err(e) = write_file(&cfg.output_path, |w| write_records(w, &result.records)) {
        return fail(EXIT_RUNTIME, format!("writing {} (output may be partial): {e}", cfg.output_path.display()));
    }
    if let Err(e) = write_file(&summary, |w| write_summary(w, &result.summary)) {
        return fail(EXIT_RUNTIME, format!("writing {} (output may be partial): {e}", summary.display()));
    }
    eprintln!(
        "wrote {} rows to {} and {} summary rows to {}",
        result.records.len(),
        cfg.output_path.display(),
        result.summary.len(),
        summary.display()
    );
    ExitCode::SUCCESS
}

fn curves(input: &Path, quantity: &str) -> ExitCode {
    let quantity: Quantity = match quantity.parse() {
        Ok(q) => q,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let records = match File::open(input).map_err(csv::Error::from).and_then(read_records) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_RUNTIME, format!("reading {}: {e}", input.display())),
    };
    let curves = match emit_curves(&records, quantity) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    match write_curves(input, &curves) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_RUNTIME, format!("writing curves (output may be partial): {e}")),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Sweep {
            config,
            paper_scale,
            seed,
            jobs,
            out,
            timing,
        } => sweep(config, paper_scale, seed, jobs, out, timing),
        Command::ValidateDist { samples, seed } => {
            if samples == 0 {
                return fail(EXIT_CONFIG, "--samples must be at least 1");
            }
            let report = validate_distributions_with(doa_map::specfun::reg_inc_beta, seed, samples);
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                fail(EXIT_VALIDATION, "distribution checks failed")
            }
        }
        Command::Curves { input, quantity } => curves(&input, &quantity),
    }
}
