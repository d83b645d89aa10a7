use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use skimsum::evaluation::{compare_strategies, render_table, EvaluationReport, Strategy};
use skimsum::model::PipelineConfig;
use skimsum::providers::{Providers, RemoteOptions};
use skimsum_service::{http, Input, JobState, Service, ServiceError, ServiceOptions};

#[derive(Debug, Parser)]
#[command(name = "skimsum", version, about = "Hierarchical summaries of spoken dialog")]
struct Cli {
    /// Artifact store directory.
    #[arg(long, global = true, env = "DS_STORE_DIR", default_value = "skimsum-store")]
    store: PathBuf,
    /// Pipeline worker threads.
    #[arg(long, global = true, default_value_t = 2)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Register an audio file, transcript JSON or marked-up transcript JSON.
    Ingest {
        input: PathBuf,
        /// Pipeline config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Audio file to attach to a transcript input.
        #[arg(long)]
        audio: Option<PathBuf>,
    },
    /// Run the pipeline for an ingested recording and wait for it.
    Run {
        recording_id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Give up waiting after this many seconds.
        #[arg(long, default_value_t = 3600)]
        timeout_s: u64,
    },
    /// Score segmentation strategies on a recording.
    Eval {
        recording_id: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Both)]
        strategy: StrategyArg,
        /// Print reports as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Static UI bundle served at `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Write a recording's hierarchy artifact to a file.
    Export {
        recording_id: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Naive,
    Semantic,
    Both,
}

impl StrategyArg {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyArg::Naive => vec![Strategy::NaiveFixed],
            StrategyArg::Semantic => vec![Strategy::CorefSemantic],
            StrategyArg::Both => vec![Strategy::CorefSemantic, Strategy::NaiveFixed],
        }
    }
}

fn read_config(path: Option<&PathBuf>) -> Result<Option<PipelineConfig>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(PipelineConfig::from_json(&text).map_err(ServiceError::from)?))
}

fn open(cli: &Cli) -> Result<Service> {
    let providers = Providers::from_env(RemoteOptions::default()).context("configuring providers")?;
    log::debug!("providers: {providers:?}");
    Ok(Service::open(&cli.store, providers, ServiceOptions { workers: cli.workers, stage_hook: None })?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            match e.downcast_ref::<ServiceError>() {
                Some(s) => eprintln!("error [{}]: {s}", s.code()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Ingest { input, config, audio } => {
            let config = read_config(config.as_ref())?;
            let service = open(cli)?;
            let parsed = Input::from_path(input)?;
            let (entry, job_id) = match (audio, parsed) {
                (None, parsed) => service.ingest(parsed, config)?,
                (Some(audio), Input::Transcript(t)) => {
                    // the fake transcriber reads a sidecar next to the audio
                    let sidecar = skimsum::providers::FakeTranscriber::sidecar_path(audio);
                    std::fs::write(&sidecar, t.to_json_pretty())
                        .with_context(|| format!("writing {}", sidecar.display()))?;
                    service.ingest(Input::Audio(audio.clone()), config)?
                }
                (Some(_), _) => bail!("--audio needs a plain transcript input"),
            };
            println!("{}", serde_json::json!({ "recording_id": entry.recording_id, "job_id": job_id }));
        }
        Command::Run { recording_id, config, timeout_s } => {
            let config = read_config(config.as_ref())?;
            let service = open(cli)?;
            let job = service.submit_job(Input::Recording(recording_id.clone()), config)?;
            let job = service.wait_job(&job.job_id, Duration::from_secs(*timeout_s))?;
            println!("{}", serde_json::to_string_pretty(&job)?);
            if job.state != JobState::Done {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Eval { recording_id, strategy, json } => {
            let service = open(cli)?;
            let wanted = strategy.strategies();
            let reports = match service.get_evaluations(recording_id) {
                Ok(stored) => wanted
                    .iter()
                    .filter_map(|s| stored.iter().find(|r| r.strategy == *s).cloned())
                    .collect(),
                Err(ServiceError::NotReady { .. }) => evaluate_now(&service, recording_id, &wanted)?,
                Err(e) => return Err(e.into()),
            };
            if *json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                let deltas = if reports.len() >= 2 { compare_strategies(&reports)? } else { Vec::new() };
                print!("{}", render_table(&reports, &deltas));
            }
        }
        Command::Serve { port, host, ui } => {
            let service = Arc::new(open(cli)?);
            let app = http::router(service, ui.clone());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), *port)).await?;
                log::warn!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
        }
        Command::Export { recording_id, out } => {
            let service = open(cli)?;
            let bytes = service.get_hierarchy(recording_id)?;
            std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs the pipeline, which stores the reports, then reads them back.
fn evaluate_now(service: &Service, recording_id: &str, wanted: &[Strategy]) -> Result<Vec<EvaluationReport>> {
    let job = service.submit_job(Input::Recording(recording_id.to_string()), None)?;
    let job = service.wait_job(&job.job_id, Duration::from_secs(3600))?;
    if job.state != JobState::Done {
        bail!("pipeline ended in {:?}: {:?}", job.state, job.error);
    }
    let stored = service.get_evaluations(recording_id)?;
    Ok(wanted.iter().filter_map(|s| stored.iter().find(|r| r.strategy == *s).cloned()).collect())
}
