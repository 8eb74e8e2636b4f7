use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use motorscene_gateway::{GatewayConfig, RetryPolicy};
use motorscene_service::{router, AppState, Engine};

#[derive(Parser)]
#[command(name = "motorscene-service", about = "Scene editing session service")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Gateway config (TOML). Without one, a live provider is used when its key is set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use this mock fixture instead of a live model.
    #[arg(long, conflicts_with = "config")]
    mock_fixture: Option<PathBuf>,
    /// Attempts per instruction before giving up.
    #[arg(long, default_value_t = 1)]
    retries: u32,
    /// Persist sessions as JSONL journals here and restore them on startup.
    #[arg(long)]
    journal_dir: Option<PathBuf>,
}

fn engine(args: &Args) -> Result<Engine, String> {
    let config = match (&args.config, &args.mock_fixture) {
        (Some(path), _) => GatewayConfig::from_path(path).map_err(|e| e.to_string())?,
        (None, Some(fixture)) => GatewayConfig::mock(fixture),
        (None, None) => GatewayConfig::default(),
    };
    let policy = RetryPolicy::new(args.retries).map_err(|e| e.to_string())?;
    if !config.llm_available() {
        eprintln!("no model provider available; only template instructions will be handled");
        return Ok(Engine::templates_only());
    }
    let provider = config.build_provider().map_err(|e| e.to_string())?;
    Ok(Engine::with_provider(provider, config, policy))
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let engine = match engine(&args) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut state = AppState::new(engine);
    if let Some(dir) = &args.journal_dir {
        state = match state.with_journal_dir(dir) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        eprintln!("restored {} session(s) from {}", state.session_ids().len(), dir.display());
    }
    let listener = match tokio::net::TcpListener::bind(args.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: bind {}: {e}", args.bind);
            return ExitCode::from(1);
        }
    };
    eprintln!("listening on http://{}", args.bind);
    let served = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    match served {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
