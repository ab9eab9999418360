use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use fwpd_server::config::{load_scene, Config};
use fwpd_server::{replay, serve, Host, ServeOptions};

#[derive(Parser)]
#[command(name = "fwpd", version, about = "Functional waypoint planning server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve operator sessions over WebSocket.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Run a timestamped script headless and write its trace.
    Replay {
        script: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Trace output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a scene file and print a summary.
    CheckScene { path: PathBuf },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "tick-hz")]
    tick_hz: Option<f64>,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(s) = &self.scene {
            cfg.scene = Some(s.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(hz) = self.tick_hz {
            cfg.tick_hz = hz;
        }
        let cfg = cfg.with_env();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::CheckScene { path } => {
            let scene = load_scene(&path)?;
            println!(
                "{}: {} obstacles, bounds x [{}, {}] y [{}, {}]",
                if scene.name.is_empty() { path.display().to_string() } else { scene.name.clone() },
                scene.obstacles.len(),
                scene.bounds.x.lo,
                scene.bounds.x.hi,
                scene.bounds.y.lo,
                scene.bounds.y.hi
            );
            for ob in &scene.obstacles {
                println!("  {}", ob.label);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { common, port } => {
            let mut cfg = common.resolve()?;
            if let Some(p) = port {
                cfg.port = p;
            }
            let scene = cfg.load_scene()?;
            let options = ServeOptions {
                model: cfg.robot.clone(),
                scene,
                session: cfg.session_config(),
                tick_hz: cfg.tick_hz,
                log_dir: Some(cfg.log_dir.clone()),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = serve::bind(cfg.port).await.map_err(|e| anyhow::anyhow!("cannot listen on port {}: {e}", cfg.port))?;
                tracing::info!(addr = %listener.local_addr()?, "listening");
                tokio::select! {
                    r = serve::serve(listener, options) => r?,
                    _ = tokio::signal::ctrl_c() => tracing::info!("shutting down"),
                }
                anyhow::Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { script, common, out } => {
            let entries = match replay::load_script(&script) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {}: {e}", script.display());
                    return Ok(ExitCode::from(1));
                }
            };
            let cfg = common.resolve()?;
            let scene = cfg.load_scene()?;
            let host = Host::new(cfg.robot.clone(), scene, cfg.session_config(), cfg.tick_hz);
            let report = replay::run(host, &entries);
            match out {
                Some(path) => std::fs::write(&path, report.trace_text())?,
                None => print!("{}", report.trace_text()),
            }
            for f in &report.failures {
                eprintln!("expectation failed: {f}");
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}
