use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rbdrift::decay::SeriesKind;
use rbdrift::Pairing;
use rbdrift_cli::commands::{self, parse_models};
use rbdrift_cli::{CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "rbdrift", version, about = "Randomized benchmarking under slow detuning drift")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration JSON; omitted keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, overriding the config.
    #[arg(long, global = true, env = "RBDRIFT_WORKERS")]
    workers: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmarking dataset.
    Simulate,
    /// Ensemble Ramsey decay and its fitted T2*.
    Ramsey,
    /// Fit decay models to a dataset.
    Fit {
        dataset: PathBuf,
        /// Comma-separated model names.
        #[arg(long, default_value = "zero-order,no-constant,residual-spam,two-fidelity")]
        models: String,
        /// Series to fit: tilde, up or down.
        #[arg(long, default_value = "tilde", conflicts_with = "per_direction")]
        series: String,
        /// Fit the up and down series separately instead of the difference.
        #[arg(long)]
        per_direction: bool,
    },
    /// Pairwise relative likelihoods of fits on the same data.
    Compare {
        #[arg(required = true, num_args = 2..)]
        fits: Vec<PathBuf>,
    },
    /// Interleaved gate fidelity from a reference and an interleaved fit.
    Interleave {
        reference: PathBuf,
        interleaved: PathBuf,
        /// p/p, q/q or q/p.
        #[arg(long, default_value = "p/p")]
        pairing: String,
        /// Pulses per Clifford, overriding the config.
        #[arg(long)]
        n_g: Option<f64>,
    },
    /// Plot-ready tables and a JSON bundle for a dataset and its fits.
    Report {
        dataset: PathBuf,
        fits: Vec<PathBuf>,
    },
    /// Print the default configuration.
    DefaultConfig,
}

fn load_config(g: &Global) -> CliResult<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(w) = g.workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = &g.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.global)?;
    if let Some(n) = cfg.workers {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            warn!("thread pool already initialised; ignoring workers = {n}");
        }
    }
    let out = cfg.output_dir.clone();
    match cli.command {
        Command::Simulate => {
            let res = commands::cmd_simulate(&cfg)?;
            info!("wrote {}", res.dataset.display());
            println!("{:>5} {:>10} {:>10} {:>10}", "m", "F_up", "F_down", "F_tilde");
            for r in &res.summary {
                println!(
                    "{:>5} {:>10.6} {:>10.6} {:>10.6}",
                    r.m, r.mean_up, r.mean_down, r.tilde
                );
            }
        }
        Command::Ramsey => {
            let (rows, summary) = commands::cmd_ramsey(&cfg)?;
            info!("{} delays, {} samples", rows.len(), summary.n_samples);
            println!("fitted T2* = {:.3} us", summary.fitted_t2_star_us);
        }
        Command::Fit {
            dataset,
            models,
            series,
            per_direction,
        } => {
            let kinds = parse_models(&models)?;
            let series: Vec<SeriesKind> = if per_direction {
                vec![SeriesKind::Up, SeriesKind::Down]
            } else {
                vec![series.parse::<SeriesKind>()?]
            };
            for s in series {
                let res = commands::cmd_fit(&dataset, &kinds, s, &out)?;
                for (rec, path) in res.records.iter().zip(&res.files) {
                    println!(
                        "{:<14} {:<6} aic {:>12.4}  p {:.6}  -> {}",
                        rec.fit.kind().to_string(),
                        s.name(),
                        rec.fit.aic,
                        rec.fit.model.p(),
                        path.display()
                    );
                }
            }
        }
        Command::Compare { fits } => {
            for r in commands::cmd_compare(&fits, &out)? {
                println!(
                    "{} vs {}: {:.4}",
                    r.model_b, r.model_a, r.relative_likelihood
                );
            }
        }
        Command::Interleave {
            reference,
            interleaved,
            pairing,
            n_g,
        } => {
            let pairing: Pairing = pairing.parse()?;
            let rep =
                commands::cmd_interleave(&reference, &interleaved, pairing, n_g.unwrap_or(cfg.n_g), &out)?;
            if let Some(f) = rep.interleaved_fidelity {
                println!(
                    "interleaved fidelity ({pairing}) = {:.4}% +/- {:.4}%",
                    100.0 * f.value,
                    100.0 * f.uncertainty
                );
            }
        }
        Command::Report { dataset, fits } => {
            let bundle = commands::cmd_report(&dataset, &fits, &cfg.report, cfg.n_g, &out)?;
            for t in &bundle.tables {
                println!("{}", out.join(t).display());
            }
        }
        Command::DefaultConfig => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

