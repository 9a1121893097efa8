use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use trajsketch::ingest::write_episode_log;
use trajsketch::similarity::WaypointSeq;
use trajsketch::simulator::SimConfig;
use trajsketch_server::analyze::{run_analyze, AnalyzeOptions};
use trajsketch_server::api::{resolve_query, router, run_rollout, AppState, QueryRequest, RolloutRequest};
use trajsketch_server::config::WorkspaceConfig;
use trajsketch_server::dataset::{load_scenes, DatasetSnapshot};
use trajsketch_server::label::run_label;

#[derive(Parser)]
#[command(name = "trajsketch", version, about = "Trajectory sketches: labeling, retrieval, analytics and rollouts")]
struct Cli {
    /// Workspace config (JSON).
    #[arg(long, global = true, env = "TRAJSKETCH_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a 2D and a 2.5D sketch for every episode plus a manifest.
    Label {
        /// Episode-log directory; defaults to the configured dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Skill relevance, height alignment and distance distribution report.
    Analyze {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Histogram bin width in meters.
        #[arg(long, default_value_t = 0.02)]
        bin_width: f64,
        #[arg(long)]
        resample_n: Option<usize>,
    },
    /// Top-k most similar dataset episodes, printed as JSON.
    Query {
        /// JSON list of [x, y, z] waypoints.
        #[arg(long, conflicts_with = "episode_id", required_unless_present = "episode_id")]
        waypoints: Option<PathBuf>,
        #[arg(long)]
        episode_id: Option<String>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        resample_n: Option<usize>,
    },
    /// Execute a waypoint plan and print the rollout as JSON.
    Simulate {
        /// JSON list of {x, y, z, gripper?} waypoints.
        #[arg(long)]
        plan: PathBuf,
        /// Simulator settings (JSON); defaults when omitted.
        #[arg(long)]
        sim: Option<PathBuf>,
        /// Also write the executed episode as an episode log.
        #[arg(long)]
        episode_out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn dataset_dir(flag: Option<PathBuf>, cfg: &WorkspaceConfig) -> anyhow::Result<PathBuf> {
    flag.or_else(|| cfg.dataset_path.clone())
        .context("no dataset directory: pass --dataset, set dataset_path in the config or TRAJSKETCH_DATASET")
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = WorkspaceConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Label { dataset, out } => {
            let manifest = run_label(&dataset_dir(dataset, &cfg)?, &out, &cfg)?;
            log::info!("labeled {} episodes, {} failed", manifest.episodes.len(), manifest.failures.len());
            if !manifest.failures.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Analyze { queries, dataset, out, k, bin_width, resample_n } => {
            let opts = AnalyzeOptions { k, bin_width, resample_n: resample_n.or(cfg.resample_n) };
            let report = run_analyze(&queries, &dataset_dir(dataset, &cfg)?, &out, &opts, &cfg)?;
            if let Some(m) = report.distances.median {
                log::info!("{} queries, median mean top-{} distance {m:.6} m", report.query_count, report.k);
            }
        }
        Command::Query { waypoints, episode_id, dataset, k, resample_n } => {
            let data = DatasetSnapshot::load(&dataset_dir(dataset, &cfg)?, cfg.epsilon)?;
            let waypoints: Option<WaypointSeq> = waypoints.as_deref().map(read_json).transpose()?;
            let req = QueryRequest { waypoints, episode_id, k, resample_n };
            let (query, n) = resolve_query(&req, &data, &cfg).map_err(|e| anyhow::anyhow!(e.message))?;
            print_json(&trajsketch::similarity::top_k_similar(&query, &data.records, k, n)?)?;
        }
        Command::Simulate { plan, sim, episode_out } => {
            let req = RolloutRequest {
                plan: read_json(&plan)?,
                sim: sim.as_deref().map(read_json::<SimConfig>).transpose()?,
            };
            let res = run_rollout(&req, &cfg).map_err(|e| anyhow::anyhow!(e.message))?;
            if let Some(p) = episode_out {
                std::fs::write(&p, write_episode_log(&res.episode)).with_context(|| format!("writing {}", p.display()))?;
            }
            print_json(&res)?;
        }
        Command::Serve { dataset, port } => {
            let dataset = match dataset.or_else(|| cfg.dataset_path.clone()) {
                Some(d) => DatasetSnapshot::load(&d, cfg.epsilon)?,
                None => {
                    log::warn!("no dataset configured; similarity queries will return nothing");
                    DatasetSnapshot::empty()
                }
            };
            let scenes = match &cfg.scenes_dir {
                Some(d) => load_scenes(d)?,
                None => Default::default(),
            };
            let port = port.unwrap_or(cfg.port);
            log::info!("{} episodes, {} scenes; listening on port {port}", dataset.records.len(), scenes.len());
            let app = router(AppState::new(cfg, dataset, scenes));
            tokio::runtime::Runtime::new()?.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                axum::serve(listener, app).await
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
