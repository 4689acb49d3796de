use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use longtail::corpus::Boundaries;
use longtail::pipeline::{cmd_compare, cmd_stats, cmd_synth, cmd_train};
use longtail::runconfig::{parse_losses, RunConfig};
use longtail::synth::SyntheticSpec;

#[derive(Parser)]
#[command(name = "longtail", version, about = "Long-tail multi-label loss experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label frequency, bucket and co-occurrence statistics for a JSONL corpus.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fixed tail boundary (n <= tail_max is tail). Defaults to tercile buckets.
        #[arg(long, requires = "head_min")]
        tail_max: Option<usize>,
        /// Fixed head boundary (n >= head_min is head).
        #[arg(long, requires = "tail_max")]
        head_min: Option<usize>,
    },
    /// Generate a synthetic long-tailed corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total number of classes, split evenly into head/medium/tail.
        #[arg(long = "C", alias = "classes")]
        classes: Option<usize>,
        #[arg(long)]
        head: Option<usize>,
        #[arg(long)]
        medium: Option<usize>,
        #[arg(long)]
        tail: Option<usize>,
        #[arg(long)]
        decay: Option<f64>,
        #[arg(long)]
        linkage: Option<f64>,
        #[arg(long)]
        tokens_per_doc: Option<usize>,
        #[arg(long)]
        tokens_per_label: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        documents: Option<usize>,
    },
    /// Train one loss and evaluate it on the test split.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train several losses on shared splits and features and tabulate them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated loss kinds; defaults to compare.losses in the config.
        #[arg(long)]
        losses: Option<String>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Stats { data, out, tail_max, head_min } => {
            let boundaries = match (tail_max, head_min) {
                (Some(t), Some(h)) => {
                    let b = Boundaries::new(t, h);
                    b.validate()?;
                    Some(b)
                }
                _ => None,
            };
            let report = cmd_stats(&data, &out, boundaries)?;
            println!(
                "documents = {}, classes = {}, dropped (no labels) = {}",
                report.documents, report.classes, report.dropped_empty
            );
            println!("avg labels/instance = {:.2}", report.avg_labels_per_instance);
            if let Some([h, m, t]) = report.bucket_sizes {
                println!("buckets head/medium/tail = {h}/{m}/{t}");
            }
            println!("wrote {}", out.display());
        }
        Command::Synth {
            out,
            seed,
            classes,
            head,
            medium,
            tail,
            decay,
            linkage,
            tokens_per_doc,
            tokens_per_label,
            noise,
            documents,
        } => {
            let mut spec = SyntheticSpec::default();
            if let Some(c) = classes {
                spec.head = c / 3;
                spec.medium = c / 3;
                spec.tail = c - 2 * (c / 3);
            }
            let set = |slot: &mut usize, v: Option<usize>| {
                if let Some(v) = v {
                    *slot = v;
                }
            };
            set(&mut spec.head, head);
            set(&mut spec.medium, medium);
            set(&mut spec.tail, tail);
            set(&mut spec.tokens_per_doc, tokens_per_doc);
            set(&mut spec.tokens_per_label, tokens_per_label);
            set(&mut spec.documents, documents);
            spec.decay = decay.unwrap_or(spec.decay);
            spec.linkage = linkage.unwrap_or(spec.linkage);
            spec.noise = noise.unwrap_or(spec.noise);
            if let Some(c) = classes {
                if spec.classes() != c {
                    bail!("--C {c} does not match head+medium+tail = {}", spec.classes());
                }
            }
            let summary = cmd_synth(&spec, seed, &out)?;
            println!("{summary}");
            println!("wrote {}", out.display());
        }
        Command::Train { config } => {
            let cfg = RunConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
            let summary = cmd_train(&cfg)?;
            let r = &summary.report;
            println!("threshold = {:.2}", summary.threshold);
            println!(
                "test micro-F1 = {:.2}, macro-F1 = {:.2}",
                100.0 * r.total.micro,
                100.0 * r.total.macro_
            );
            println!("wrote {}", summary.out_dir.display());
        }
        Command::Compare { config, losses } => {
            let cfg = RunConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
            let kinds = match losses {
                Some(l) => parse_losses(&l)?,
                None => cfg.compare_losses.clone(),
            };
            let summary = cmd_compare(&cfg, &kinds)?;
            print!("{}", summary.table);
            println!("wrote {}", cfg.out_dir.display());
            return Ok(summary.all_ok());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more runs failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
