use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use paraproduct_kit::experiment::{run, ConfigInput, Format};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

/// Seeded numerical experiments on wavelet paraproduct decompositions.
#[derive(Parser, Debug)]
#[command(name = "paraproduct-kit", version)]
struct Args {
    /// decompose | norms | kernel | atoms | divcurl | sweep
    #[arg(long)]
    command: String,
    #[arg(long, default_value = "haar")]
    wavelet: String,
    /// Dimension (1 by default, 2 for divcurl)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    p: f64,
    #[arg(long, allow_hyphen_values = true)]
    jmin: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    jmax: Option<i32>,
    /// Finest sampling level
    #[arg(long = "K")]
    k: Option<i32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Nonzero coefficients per random field
    #[arg(long)]
    entries: Option<usize>,
    /// Support box as LO,HI (same in every coordinate)
    #[arg(long = "box", default_value = "0,1", allow_hyphen_values = true)]
    bbox: String,
    /// Output file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

fn usage(field: &str, msg: &str) -> ExitCode {
    eprintln!("error: invalid {field}: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();

    let Some((lo, hi)) = args.bbox.split_once(',') else {
        return usage("box", "expected LO,HI");
    };
    let (Ok(box_lo), Ok(box_hi)) = (lo.trim().parse::<f64>(), hi.trim().parse::<f64>()) else {
        return usage("box", "expected two numbers");
    };
    let input = ConfigInput {
        command: args.command,
        wavelet: args.wavelet,
        n: args.n,
        p: args.p,
        j_min: args.jmin,
        j_max: args.jmax,
        k: args.k,
        box_lo,
        box_hi,
        seed: args.seed,
        trials: args.trials,
        entries: args.entries,
        format: match args.format {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        },
    };
    let cfg = match input.resolve() {
        Ok(c) => c,
        Err(e) => return usage(e.field, &e.message),
    };

    if let Some(t) = std::env::var("PARAPRODUCT_KIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    let start = Instant::now();
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());

    let text = match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let written = match &args.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} (tolerance {:?})", c.name, c.value, c.tolerance);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
