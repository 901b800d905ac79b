use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mitk::bench::{run_bench, BenchConfig};
use mitk::discrete::{entropy, joint_entropy, mutual_information, read_table, Axis};
use mitk::estimators::{csv_file_name, train_estimator, trajectory_csv};
use mitk::verify::{run_verify, VerifyOptions};

/// Environment variable that replaces the built-in default seed.
const SEED_ENV: &str = "MITK_SEED";

#[derive(Parser)]
#[command(name = "mitk", version, about = "Mutual-information toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized theorem verification suite.
    Verify(VerifyArgs),
    /// Train one estimator and write its trajectory CSV.
    Train(TrainArgs),
    /// Train several estimators over several seeds and summarize.
    Bench(BenchArgs),
    /// Exact mutual information of a joint probability table file.
    TableMi(TableArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Perturb the KL oracle; the suite must then fail.
    #[arg(long)]
    corrupt_kl: bool,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Flat key=value file applied before command-line flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, conflicts_with = "target_mi")]
    rho: Option<f64>,
    #[arg(long)]
    target_mi: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eval_interval: Option<usize>,
    #[arg(long)]
    ema: Option<f64>,
    /// `joint` or `separable`.
    #[arg(long)]
    critic_form: Option<String>,
    /// Hidden widths, comma separated.
    #[arg(long)]
    critic_widths: Option<String>,
    #[arg(long)]
    critic_embed: Option<usize>,
    #[arg(long)]
    adam_lr: Option<f64>,
    #[arg(long)]
    adam_beta1: Option<f64>,
    #[arg(long)]
    adam_beta2: Option<f64>,
    #[arg(long)]
    adam_eps: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    estimator: Option<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated estimator tags.
    #[arg(long)]
    estimators: Option<String>,
    /// Number of seeds, counted up from the master seed.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    table: PathBuf,
}

fn default_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| {
            format!("{SEED_ENV} must be an integer, got `{v}`")
        })?)),
        Err(_) => Ok(None),
    }
}

/// defaults < environment seed < config file < flags.
fn resolve(run: &RunArgs, extra: &[(&str, Option<String>)]) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::default();
    if let Some(s) = default_seed()? {
        cfg.seed = s;
    }
    if let Some(path) = &run.config {
        cfg.apply_file(path)
            .with_context(|| format!("reading config {}", path.display()))?;
    }
    let flags: Vec<(&str, Option<String>)> = vec![
        ("dim", run.dim.map(|v| v.to_string())),
        ("rho", run.rho.map(|v| v.to_string())),
        ("target_mi", run.target_mi.map(|v| v.to_string())),
        ("steps", run.steps.map(|v| v.to_string())),
        ("batch_size", run.batch_size.map(|v| v.to_string())),
        ("seed", run.seed.map(|v| v.to_string())),
        ("out", run.out.as_ref().map(|p| p.display().to_string())),
        ("eval_interval", run.eval_interval.map(|v| v.to_string())),
        ("ema", run.ema.map(|v| v.to_string())),
        ("critic.form", run.critic_form.clone()),
        ("critic.widths", run.critic_widths.clone()),
        ("critic.embed", run.critic_embed.map(|v| v.to_string())),
        ("adam.lr", run.adam_lr.map(|v| v.to_string())),
        ("adam.beta1", run.adam_beta1.map(|v| v.to_string())),
        ("adam.beta2", run.adam_beta2.map(|v| v.to_string())),
        ("adam.eps", run.adam_eps.map(|v| v.to_string())),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            cfg.set(key, v)
                .with_context(|| format!("flag for `{key}`"))?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let seed = match args.seed {
        Some(s) => s,
        None => default_seed()?.unwrap_or(0),
    };
    let report = run_verify(&VerifyOptions {
        trials: args.trials,
        seed,
        corrupt_oracle: args.corrupt_kl,
    })?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if args.corrupt_kl {
        eprintln!("note: KL oracle deliberately perturbed");
    }
    for line in &report.lines {
        println!("{line}");
        if !line.passed() {
            if let Some(w) = &line.witness {
                println!("    witness: {w}");
            }
        }
    }
    let ok = report.passed();
    println!(
        "verify: {}",
        if ok { "all probes passed" } else { "FAILED" }
    );
    Ok(ok)
}

fn cmd_train(args: &TrainArgs) -> Result<bool> {
    let cfg = resolve(&args.run, &[("estimators", args.estimator.clone())])?;
    if cfg.estimators.len() != 1 {
        bail!(
            "train runs exactly one estimator, got {}",
            cfg.estimators.len()
        );
    }
    let kind = cfg.estimators[0];
    let task = cfg.task()?;
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    std::fs::write(cfg.out_dir.join("config.txt"), cfg.render())?;
    let traj = train_estimator(&task, &cfg.train_config(kind, cfg.seed))?;
    let path = cfg
        .out_dir
        .join(csv_file_name(kind, cfg.dim, cfg.mi_for_names()?, cfg.seed));
    std::fs::write(&path, trajectory_csv(&traj))
        .with_context(|| format!("writing {}", path.display()))?;
    let last = traj.last();
    println!(
        "{kind}: step {} estimate {:.6} smoothed {:.6} true_mi {:.6}",
        last.step, last.estimate, last.smoothed, traj.true_mi
    );
    println!("{}", path.display());
    Ok(true)
}

fn cmd_bench(args: &BenchArgs) -> Result<bool> {
    let cfg = resolve(
        &args.run,
        &[
            ("estimators", args.estimators.clone()),
            ("seeds", args.seeds.map(|v| v.to_string())),
            ("workers", args.workers.map(|v| v.to_string())),
        ],
    )?;
    let outcome = run_bench(&cfg)?;
    print!("{outcome}");
    for run in &outcome.runs {
        if let Err(e) = &run.result {
            eprintln!("run {} seed {} failed: {e}", run.kind, run.seed);
        }
    }
    println!("wrote {}", cfg.out_dir.join("summary.csv").display());
    Ok(outcome.all_succeeded())
}

fn cmd_table_mi(args: &TableArgs) -> Result<bool> {
    let j = read_table::<f64>(&args.table)
        .with_context(|| format!("reading {}", args.table.display()))?;
    println!("I(X;Y)  = {:.9}", mutual_information(&j));
    println!("H(X)    = {:.9}", entropy(&j.marginal(Axis::Rows)));
    println!("H(Y)    = {:.9}", entropy(&j.marginal(Axis::Cols)));
    println!("H(X,Y)  = {:.9}", joint_entropy(&j));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Train(a) => cmd_train(a),
        Command::Bench(a) => cmd_bench(a),
        Command::TableMi(a) => cmd_table_mi(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
