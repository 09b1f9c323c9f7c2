use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use coop_invaders::agent::{train_assistant, train_single, TrainReport};
use coop_invaders::harness::{
    eval_run, mann_whitney, score_svg, EpisodeRecord, EvalMode, RunConfig, ScoreLog, SummaryStats, DEFAULT_WINDOW,
};
use coop_invaders::nn::{grad_check, load_checkpoint, test_matrix, Checkpoint};
use coop_invaders::play::{SurveyLog, DEFAULT_TICK_RATE};

use crate::server::{self, ServerConfig};

/// Largest gradient-check error that still counts as a pass.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "coop-invaders",
    version,
    about = "Train, evaluate and play-test cooperative Space Invaders agents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (`key = value` lines with dotted keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(match self.seed {
            Some(seed) => cfg.with_seed(seed),
            None => cfg,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the solo player network.
    TrainSingle {
        #[command(flatten)]
        common: Common,
        /// Output directory for scores.csv and checkpoints.
        #[arg(long)]
        out: PathBuf,
        /// Overrides `train.max_episodes`.
        #[arg(long)]
        episodes: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Train the assistant next to a frozen player network.
    TrainAssistant {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        player_ckpt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        episodes: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Play evaluation episodes and write a score log.
    Eval {
        #[command(flatten)]
        common: Common,
        /// single, random-assist or trained-assist.
        #[arg(long)]
        mode: EvalMode,
        #[arg(long, default_value_t = 100)]
        episodes: u64,
        /// Player 1 network; a uniform random player when absent.
        #[arg(long)]
        player_ckpt: Option<PathBuf>,
        #[arg(long)]
        assistant_ckpt: Option<PathBuf>,
        #[arg(long, visible_alias = "out")]
        csv: PathBuf,
    },
    /// Print summary statistics of a score log as JSON.
    Summarize {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Mann-Whitney U test between two score logs, printed as JSON.
    Compare { a: PathBuf, b: PathBuf },
    /// Render a score log as an SVG chart.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, visible_alias = "out")]
        svg: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long)]
        title: Option<String>,
    },
    /// Compare backpropagated gradients with finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Parameters probed per architecture.
        #[arg(long, default_value_t = 300)]
        probes: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Serve the browser play-test endpoint.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        assistant_ckpt: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = DEFAULT_TICK_RATE)]
        fps: u32,
        #[arg(long, default_value = "surveys.jsonl")]
        survey_log: PathBuf,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TrainSingle {
            common,
            out,
            episodes,
            quiet,
        } => {
            let mut cfg = common.load()?;
            if let Some(n) = episodes {
                cfg.train.max_episodes = n;
            }
            let report = train_single(&cfg.env, &cfg.single_reward, &cfg.train, &out, &mut progress(quiet))?;
            finish(&report);
        }
        Command::TrainAssistant {
            common,
            player_ckpt,
            out,
            episodes,
            quiet,
        } => {
            let mut cfg = common.load()?;
            if let Some(n) = episodes {
                cfg.train.max_episodes = n;
            }
            let player = read_ckpt(&player_ckpt)?;
            let report = train_assistant(
                &cfg.env,
                &cfg.assistant_reward,
                &player,
                &cfg.train,
                &out,
                &mut progress(quiet),
            )?;
            finish(&report);
        }
        Command::Eval {
            common,
            mode,
            episodes,
            player_ckpt,
            assistant_ckpt,
            csv,
        } => {
            let cfg = common.load()?;
            let seed = common.seed.unwrap_or(cfg.train.seeds.env);
            let player = player_ckpt.as_deref().map(read_ckpt).transpose()?;
            let assistant = assistant_ckpt.as_deref().map(read_ckpt).transpose()?;
            let log = eval_run(mode, episodes, seed, &cfg.env, player.as_ref(), assistant.as_ref())?;
            log.save(&csv)?;
            if !log.is_empty() {
                let s = SummaryStats::of(&log.scores(), DEFAULT_WINDOW)?;
                println!("{mode}: {} episodes, mean score {:.1}, max {}", s.n, s.mean, s.max);
            }
        }
        Command::Summarize { csv, window } => {
            let s = SummaryStats::of(&ScoreLog::load(&csv)?.scores(), window)?;
            let out = json!({
                "n": s.n,
                "mean": s.mean,
                "max": s.max,
                "min": s.min,
                "median": s.median,
                "window": s.window,
                "rolling_mean": s.final_rolling_mean(),
            });
            println!("{out}");
        }
        Command::Compare { a, b } => {
            let c = mann_whitney(&ScoreLog::load(&a)?.scores(), &ScoreLog::load(&b)?.scores())?;
            let out = json!({
                "u_statistic": c.u_statistic,
                "p_value": c.p_value,
                "mean_diff": c.mean_diff,
            });
            println!("{out}");
        }
        Command::Plot {
            csv,
            svg,
            window,
            title,
        } => {
            let log = ScoreLog::load(&csv)?;
            let title = title.unwrap_or_else(|| csv.display().to_string());
            std::fs::write(&svg, score_svg(&title, &log.scores(), window)?)
                .with_context(|| format!("writing {}", svg.display()))?;
        }
        Command::Gradcheck { seed, probes, step } => {
            let mut worst: f64 = 0.0;
            for (name, spec) in test_matrix() {
                let err = grad_check(&spec, seed, probes, step)?;
                println!("{name:<6} {spec}  max relative error {err:.3e}");
                worst = worst.max(err);
            }
            if !(worst < GRADCHECK_TOLERANCE) {
                bail!("gradient check failed: {worst:.3e} >= {GRADCHECK_TOLERANCE:e}");
            }
        }
        Command::Serve {
            common,
            assistant_ckpt,
            host,
            port,
            fps,
            survey_log,
        } => {
            let cfg = common.load()?;
            if fps == 0 {
                bail!("--fps must be at least 1");
            }
            // Refuse to start with a checkpoint no session could use.
            read_ckpt(&assistant_ckpt)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let (listener, addr) = server::bind(&host, port).await?;
                println!("listening on http://{addr} (WebSocket /play)");
                server::serve(
                    listener,
                    ServerConfig {
                        assistant_ckpt,
                        env: cfg.env,
                        fps,
                        surveys: SurveyLog::new(survey_log),
                    },
                )
                .await
            })?;
        }
    }
    Ok(())
}

fn read_ckpt(path: &Path) -> Result<Checkpoint> {
    load_checkpoint(path).with_context(|| format!("loading {}", path.display()))
}

fn progress(quiet: bool) -> impl FnMut(&EpisodeRecord) {
    move |r: &EpisodeRecord| {
        if !quiet {
            eprintln!(
                "episode {:>5}  score {:>5}  steps {:>5}  {:<12} epsilon {:.3}",
                r.episode,
                r.score,
                r.steps,
                r.outcome.as_str(),
                r.epsilon
            );
        }
    }
}

fn finish(report: &TrainReport) {
    println!(
        "{} episodes; scores in {}; final checkpoint {}",
        report.log.len(),
        report.log_path.display(),
        report.final_checkpoint.display()
    );
}
