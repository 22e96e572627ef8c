use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hexplore::bench::{compare_table, emit_curves, run_suite, SuiteConfig};
use hexplore::neural::{load_checkpoint, Network};
use hexplore::rl::{EpsilonSchedule, ProgressRule, RewardParams};
use hexplore::sim::trace::parse_starts;
use hexplore::sim::{default_cap, run_episode, train_bamax, EpisodeConfig, Method, TrainConfig, DEFAULT_STALL_LIMIT};
use hexplore::{generate_maze, Maze};

/// Multi-agent exploration of hexagonal grid mazes.
///
/// Every flag can also be set through an environment variable named
/// HEXPLORE_<FLAG>; flags take precedence.
#[derive(Parser)]
#[command(name = "hexplore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a maze file.
    Gen(GenArgs),
    /// Run one episode on a maze file and print its metrics.
    Explore(ExploreArgs),
    /// Train the Q-network on 10x10 mazes.
    Train(TrainArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
    /// Average the coverage curves of a benchmark directory.
    Curves(CurvesArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, env = "HEXPLORE_SIZE", default_value_t = 10)]
    size: usize,
    #[arg(long, env = "HEXPLORE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "HEXPLORE_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct ExploreArgs {
    /// dfs, bfs, cdfs, cbfs or bamax.
    #[arg(long, env = "HEXPLORE_METHOD")]
    method: Method,
    #[arg(long, env = "HEXPLORE_MAZE")]
    maze: PathBuf,
    /// Start cells as `col,row;col,row;...`, one per agent.
    #[arg(long, env = "HEXPLORE_STARTS")]
    starts: String,
    /// Write a per-agent, per-step trace here.
    #[arg(long, env = "HEXPLORE_TRACE")]
    trace: Option<PathBuf>,
    /// Network checkpoint, required by bamax.
    #[arg(long, env = "HEXPLORE_CKPT")]
    ckpt: Option<PathBuf>,
    /// Timestep cap; 10 * size^2 by default.
    #[arg(long, env = "HEXPLORE_CAP")]
    cap: Option<usize>,
    #[arg(long, env = "HEXPLORE_STALL_LIMIT", default_value_t = DEFAULT_STALL_LIMIT)]
    stall_limit: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, env = "HEXPLORE_SIZE", default_value_t = 10)]
    size: usize,
    #[arg(long, env = "HEXPLORE_EPISODES", default_value_t = 300)]
    episodes: usize,
    #[arg(long, env = "HEXPLORE_SEED", default_value_t = 0)]
    seed: u64,
    /// Checkpoint path.
    #[arg(long, env = "HEXPLORE_OUT")]
    out: PathBuf,
    /// Per-episode CSV log.
    #[arg(long, env = "HEXPLORE_LOG")]
    log: Option<PathBuf>,
    #[arg(long, env = "HEXPLORE_AGENTS", default_value_t = 4)]
    agents: usize,
    #[arg(long, env = "HEXPLORE_BATCH", default_value_t = 64)]
    batch: usize,
    #[arg(long, env = "HEXPLORE_BUFFER", default_value_t = 50_000)]
    buffer: usize,
    #[arg(long, env = "HEXPLORE_LR", default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, env = "HEXPLORE_WARMUP", default_value_t = 50)]
    warmup: usize,
    /// Optimizer steps at the end of each episode.
    #[arg(long, env = "HEXPLORE_UPDATES_PER_EPISODE", default_value_t = 1)]
    updates_per_episode: usize,
    /// Also take an optimizer step every this many simulation steps.
    #[arg(long, env = "HEXPLORE_UPDATE_EVERY")]
    update_every: Option<usize>,
    #[arg(long, env = "HEXPLORE_EPS_START", default_value_t = 1.0)]
    eps_start: f64,
    #[arg(long, env = "HEXPLORE_EPS_END", default_value_t = 0.05)]
    eps_end: f64,
    #[arg(long, env = "HEXPLORE_EPS_DECAY", default_value_t = 200)]
    eps_decay: usize,
    #[arg(long, env = "HEXPLORE_GAMMA", default_value_t = 0.99)]
    gamma: f64,
    /// Use min instead of max in the progress reward.
    #[arg(long, env = "HEXPLORE_MIN_PROGRESS")]
    min_progress: bool,
    /// Factor applied to rewards before they enter the Bellman target.
    #[arg(long, env = "HEXPLORE_REWARD_SCALE", default_value_t = 1.0)]
    reward_scale: f64,
    /// Learning-rate multiplier for the image branches.
    #[arg(long, env = "HEXPLORE_IMAGE_LR_SCALE", default_value_t = 0.01)]
    image_lr_scale: f64,
    #[arg(long, env = "HEXPLORE_CHECKPOINT_EVERY", default_value_t = 25)]
    checkpoint_every: usize,
    #[arg(long, env = "HEXPLORE_STALL_LIMIT", default_value_t = DEFAULT_STALL_LIMIT)]
    stall_limit: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated grid sizes.
    #[arg(long, env = "HEXPLORE_SIZES", value_delimiter = ',', default_value = "10")]
    sizes: Vec<usize>,
    #[arg(long, env = "HEXPLORE_MAZES", default_value_t = 100)]
    mazes: usize,
    /// Comma-separated methods.
    #[arg(long, env = "HEXPLORE_METHODS", value_delimiter = ',', default_value = "dfs,bfs,cdfs,cbfs")]
    methods: Vec<Method>,
    #[arg(long, env = "HEXPLORE_CKPT")]
    ckpt: Option<PathBuf>,
    #[arg(long, env = "HEXPLORE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "HEXPLORE_OUT")]
    out: PathBuf,
    #[arg(long, env = "HEXPLORE_AGENTS", default_value_t = 4)]
    agents: usize,
    /// Worker threads; all cores by default.
    #[arg(long, env = "HEXPLORE_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long = "in", env = "HEXPLORE_IN")]
    input: PathBuf,
    #[arg(long, env = "HEXPLORE_OUT")]
    out: PathBuf,
}

fn load_net(ckpt: Option<&PathBuf>) -> Result<Network<f32>> {
    let path = ckpt.context("--ckpt is required for bamax")?;
    load_checkpoint(path).with_context(|| format!("loading {}", path.display()))
}

fn gen(args: GenArgs) -> Result<()> {
    let maze = generate_maze(args.size, args.seed)?;
    fs::write(&args.out, maze.to_text()).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn explore(args: ExploreArgs) -> Result<()> {
    let file = fs::File::open(&args.maze).with_context(|| format!("opening {}", args.maze.display()))?;
    let maze = Maze::read_from(BufReader::new(file))?;
    maze.validate()?;
    let starts = parse_starts(&args.starts)?;
    let net = match args.method {
        Method::Bamax => Some(load_net(args.ckpt.as_ref())?),
        _ => None,
    };
    let mut cfg = EpisodeConfig::new(args.method, maze.size(), starts);
    cfg.max_timesteps = args.cap.unwrap_or_else(|| default_cap(maze.size()));
    cfg.stall_limit = args.stall_limit;
    cfg.record_trace = args.trace.is_some();
    let outcome = run_episode(cfg, &maze, net.as_ref())?;
    if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
        let mut w = BufWriter::new(fs::File::create(path).with_context(|| format!("writing {}", path.display()))?);
        trace.write_to(&mut w)?;
        w.flush()?;
    }
    let m = &outcome.metrics;
    let coverage = m.coverage_curve.last().map_or(0.0, |c| c.1);
    println!(
        "method={} size={} steps={} backtracks={} coverage={coverage:.4} terminated={:?}",
        args.method,
        maze.size(),
        m.simulation_steps,
        m.backtrack_count,
        m.termination
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    if args.size != 10 {
        eprintln!("note: training on {0}x{0}; evaluation at other sizes rescales the observation", args.size);
    }
    let cfg = TrainConfig {
        size: args.size,
        agents: args.agents,
        episodes: args.episodes,
        seed: args.seed,
        buffer_capacity: args.buffer,
        batch_size: args.batch,
        learning_rate: args.lr,
        schedule: EpsilonSchedule::new(args.eps_start, args.eps_end, args.eps_decay),
        warmup_episodes: args.warmup,
        updates_per_episode: args.updates_per_episode,
        update_every: args.update_every,
        max_timesteps: None,
        stall_limit: args.stall_limit,
        reward: RewardParams {
            gamma: args.gamma,
            rule: if args.min_progress { ProgressRule::Min } else { ProgressRule::Max },
            ..RewardParams::default()
        },
        reward_scale: args.reward_scale,
        image_lr_scale: args.image_lr_scale,
        checkpoint: Some(args.out.clone()),
        checkpoint_every: args.checkpoint_every,
        log: args.log,
    };
    let report = train_bamax(&cfg)?;
    let n = report.logs.len().min(50);
    if n > 0 {
        let mean = |logs: &[hexplore::sim::EpisodeLog]| logs.iter().map(|l| l.steps as f64).sum::<f64>() / logs.len() as f64;
        println!(
            "episodes={} optimizer_steps={} first{n}_mean_steps={:.1} last{n}_mean_steps={:.1} checkpoint={}",
            report.logs.len(),
            report.optimizer_steps,
            mean(&report.logs[..n]),
            mean(&report.logs[report.logs.len() - n..]),
            args.out.display()
        );
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    if args.methods.contains(&Method::Bamax) && args.ckpt.is_none() {
        bail!("--ckpt is required when benchmarking bamax");
    }
    let mut cfg = SuiteConfig::new(args.sizes, args.methods, args.out);
    cfg.mazes_per_size = args.mazes;
    cfg.seed = args.seed;
    cfg.agents = args.agents;
    cfg.checkpoint = args.ckpt;
    cfg.threads = args.threads;
    let out = run_suite(&cfg)?;
    print!("{}", compare_table(&out.aggregate).text);
    for r in out.aggregate.flagged() {
        eprintln!(
            "warning: {} on G{} completed {:.0}% of mazes",
            r.method,
            r.size,
            r.completion_rate * 100.0
        );
    }
    Ok(())
}

fn curves(args: CurvesArgs) -> Result<()> {
    for path in emit_curves(&args.input, &args.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Explore(a) => explore(a),
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
        Command::Curves(a) => curves(a),
    }
}
