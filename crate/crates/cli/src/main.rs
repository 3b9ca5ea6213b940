use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use decodoku_cli::server::{self, AppState};
use decodoku_cli::{lattice_spec, parse_lattice, parse_probability};
use decodoku_core::experiment::{
    logical_csv, run_logical_experiment, run_survival_experiment, survival_csv, write_csv, Decoder,
    LogicalConfig, Policy, SurvivalConfig, DEFAULT_CAP,
};
use decodoku_core::game::DEFAULT_WARMUP;
use decodoku_core::pairrank::RankOptions;
use decodoku_core::savefile::SaveDocument;
use decodoku_core::stats::median;
use decodoku_core::MagnitudeDist;

#[derive(Parser)]
#[command(name = "decodoku", version, about = "Z_d surface-code decoding lab")]
struct Cli {
    /// Start the HTTP game service (same as the `serve` subcommand).
    #[arg(long)]
    serve: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Logical failure rate of a decoder against p.
    Logical(LogicalArgs),
    /// Survival times of a policy in dynamic games.
    Survival(SurvivalArgs),
    /// Replay a save file and report the final state.
    Replay { file: PathBuf },
    /// Run the HTTP game service. The bind address comes from DECODOKU_ADDR.
    Serve(ServeArgs),
}

#[derive(Args)]
struct LatticeArgs {
    /// Plaquette grid as WxH.
    #[arg(long, default_value = "8x8", value_parser = parse_lattice)]
    lattice: (usize, usize),
    /// Qudit dimension.
    #[arg(long, default_value_t = 10)]
    d: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LogicalArgs {
    #[command(flatten)]
    common: LatticeArgs,
    /// Comma-separated error probabilities.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_probability)]
    p: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value = "hdrg")]
    decoder: Decoder,
}

#[derive(Args)]
struct SurvivalArgs {
    #[command(flatten)]
    common: LatticeArgs,
    #[arg(long, default_value = "pairrank")]
    policy: Policy,
    #[arg(long, default_value_t = 200)]
    episodes: u64,
    /// Move cap per episode; capped episodes are censored.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long, default_value_t = 1)]
    spawn_period: u32,
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    warmup: usize,
    /// Rank annihilating pairs first.
    #[arg(long)]
    prefer_annihilating: bool,
}

#[derive(Args, Default)]
struct ServeArgs {
    /// Write save files of finished games into this directory.
    #[arg(long)]
    save_dir: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, csv: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => write_csv(path, csv).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn logical(args: LogicalArgs) -> anyhow::Result<()> {
    let cfg = LogicalConfig {
        spec: lattice_spec(args.common.lattice, args.common.d)?,
        ps: args.p,
        trials: args.trials,
        seed: args.common.seed,
        decoder: args.decoder,
        magnitude_dist: MagnitudeDist::Uniform,
    };
    let rows = run_logical_experiment(&cfg)?;
    for r in &rows {
        let (lo, hi) = r.wilson95();
        eprintln!("p={:<6} rate={:.4} 95% CI [{lo:.4}, {hi:.4}]", r.p, r.rate);
    }
    emit(args.common.out.as_ref(), &logical_csv(&rows))
}

fn survival(args: SurvivalArgs) -> anyhow::Result<()> {
    let cfg = SurvivalConfig {
        spec: lattice_spec(args.common.lattice, args.common.d)?,
        spawn_period: args.spawn_period,
        warmup: args.warmup,
        seed: args.common.seed,
        episodes: args.episodes,
        cap: args.cap,
        policy: args.policy,
        rank: RankOptions {
            prefer_annihilating: args.prefer_annihilating,
        },
    };
    let rows = run_survival_experiment(&cfg)?;
    let moves: Vec<f64> = rows.iter().map(|r| r.moves_survived as f64).collect();
    let censored = rows.iter().filter(|r| r.censored).count();
    eprintln!(
        "{} episodes, median {} moves, {censored} censored at cap {}",
        rows.len(),
        median(&moves),
        cfg.cap
    );
    emit(args.common.out.as_ref(), &survival_csv(&rows))
}

fn replay(file: PathBuf) -> anyhow::Result<()> {
    let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let doc = SaveDocument::parse(&text)?;
    let g = doc.replay()?;
    println!(
        "{}: {} {}x{} d={} moves={} score={} status={} defects={} verdict={:?}",
        file.display(),
        g.mode().as_str(),
        g.spec().width,
        g.spec().height,
        g.spec().d,
        g.moves_made,
        g.score,
        g.status.as_str(),
        g.syndrome.defect_count(),
        g.verdict()
    );
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    if let Some(dir) = &args.save_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let addr = server::bind_addr_from_env()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::serve(addr, Arc::new(AppState::new(args.save_dir))))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match (cli.serve, cli.command) {
        (true, None) => serve(ServeArgs::default()),
        (true, Some(Command::Serve(args))) | (false, Some(Command::Serve(args))) => serve(args),
        (true, Some(_)) => bail!("--serve cannot be combined with another subcommand"),
        (false, Some(Command::Logical(args))) => logical(args),
        (false, Some(Command::Survival(args))) => survival(args),
        (false, Some(Command::Replay { file })) => replay(file),
        (false, None) => bail!("nothing to do; see `decodoku --help`"),
    }
}
