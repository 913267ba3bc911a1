use std::path::PathBuf;
use std::process::ExitCode;

use capimac::experiment::{emit_report, run_ablation, run_experiment, summarize, DatasetSource, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Cluster incomplete, misaligned two-view data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (align rate, seed) pair from a config file.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory with view0.csv, view1.csv and labels.csv.
    #[arg(long, conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// k,n,d1,d2,separation
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long = "align-rate")]
    align_rates: Vec<f64>,
    #[arg(long)]
    missing_rate: Option<f64>,
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    no_ipt: bool,
    #[arg(long)]
    anchors: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_matrices: bool,
    /// Run both padding arms on shared inputs.
    #[arg(long)]
    ablation: bool,
}

fn configure(args: &RunArgs) -> capimac::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(d) = &args.dataset {
        cfg.dataset = DatasetSource::Dir(d.clone());
    }
    if let Some(s) = &args.synthetic {
        cfg.dataset = DatasetSource::parse_synthetic(s)?;
    }
    if !args.align_rates.is_empty() {
        cfg.align_rates = args.align_rates.clone();
    }
    if let Some(m) = args.missing_rate {
        cfg.missing_rate = m;
    }
    if !args.seeds.is_empty() {
        cfg.seeds = args.seeds.clone();
    }
    if args.no_ipt {
        cfg.ipt = false;
    }
    if args.anchors.is_some() {
        cfg.n_anchors = args.anchors;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    cfg.dump_matrices |= args.dump_matrices;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let cfg = match configure(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    let records = if args.ablation {
        run_ablation(&cfg).map(|pairs| pairs.into_iter().flat_map(|(a, b)| [a, b]).collect())
    } else {
        run_experiment(&cfg)
    };
    let result = records.and_then(|r| emit_report(&r, &cfg, &cfg.out_dir).map(|paths| (r, paths)));
    match result {
        Ok((records, paths)) => {
            for s in summarize(&records) {
                println!(
                    "{} align={} ipt={} runs={} acc={:.4}±{:.4} nmi={:.4}±{:.4} ari={:.4}±{:.4} f1={:.4}±{:.4}",
                    s.dataset,
                    s.align_rate,
                    s.ipt,
                    s.runs,
                    s.acc.mean,
                    s.acc.std,
                    s.nmi.mean,
                    s.nmi.std,
                    s.ari.mean,
                    s.ari.std,
                    s.f1.mean,
                    s.f1.std
                );
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
