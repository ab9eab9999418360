//! WebSocket server: one session per connection, driven by a tick timer.
//!
//! Each connection gets a worker thread that owns its `Host`. Inbound frames
//! and ticks are queued to the worker in arrival order, so the session has a
//! single writer and planning never races the clock.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::mpsc as tokio_mpsc;
use tokio::time::MissedTickBehavior;

use fwpd_core::{RobotModel, Scene, SessionConfig};

use crate::host::Host;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub model: RobotModel,
    pub scene: Scene,
    pub session: SessionConfig,
    pub tick_hz: f64,
    /// Directory for per-connection traces and event logs; nothing is written when `None`.
    pub log_dir: Option<PathBuf>,
}

struct AppState {
    options: ServeOptions,
    connections: AtomicUsize,
}

enum Input {
    Frame(String),
    Tick,
    Close,
}

pub fn router(options: ServeOptions) -> Router {
    let state = Arc::new(AppState { options, connections: AtomicUsize::new(0) });
    Router::new().route("/", get(upgrade)).route("/ws", get(upgrade)).with_state(state)
}

/// Binds `0.0.0.0:port` (port 0 picks a free one).
pub async fn bind(port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await
}

pub async fn serve(listener: TcpListener, options: ServeOptions) -> std::io::Result<()> {
    axum::serve(listener, router(options)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> impl IntoResponse {
    let n = state.connections.fetch_add(1, Ordering::SeqCst) + 1;
    let options = state.options.clone();
    ws.on_upgrade(move |socket| connection(socket, options, n))
}

async fn connection(socket: WebSocket, options: ServeOptions, n: usize) {
    tracing::info!(connection = n, "session opened");
    let (mut ws_tx, mut ws_rx) = socket.split();
    let (in_tx, in_rx) = mpsc::channel::<Input>();
    let (out_tx, mut out_rx) = tokio_mpsc::unbounded_channel::<String>();

    let period = Duration::from_secs_f64(1.0 / options.tick_hz);
    let worker = std::thread::Builder::new()
        .name(format!("session-{n}"))
        .spawn(move || run_worker(options, n, in_rx, out_tx))
        .expect("spawn session worker");

    let writer = tokio::spawn(async move {
        while let Some(frame) = out_rx.recv().await {
            if ws_tx.send(Message::Text(frame.into())).await.is_err() {
                break;
            }
        }
    });

    let tick_tx = in_tx.clone();
    let ticker = tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
        // the first tick completes immediately; the session starts at t = 0
        interval.tick().await;
        loop {
            interval.tick().await;
            if tick_tx.send(Input::Tick).is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = ws_rx.next().await {
        let frame = match msg {
            Message::Text(t) => t.to_string(),
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        if in_tx.send(Input::Frame(frame)).is_err() {
            break;
        }
    }

    ticker.abort();
    let _ = in_tx.send(Input::Close);
    let _ = tokio::task::spawn_blocking(move || worker.join()).await;
    writer.abort();
    tracing::info!(connection = n, "session closed");
}

fn run_worker(options: ServeOptions, n: usize, inputs: mpsc::Receiver<Input>, out: tokio_mpsc::UnboundedSender<String>) {
    let mut host = Host::new(options.model, options.scene, options.session, options.tick_hz);
    let mut sink = |frame: &str| {
        let _ = out.send(frame.to_owned());
    };
    host.greeting(&mut sink);
    while let Ok(input) = inputs.recv() {
        match input {
            Input::Frame(text) => host.handle(&text, &mut sink),
            Input::Tick => host.tick(&mut sink),
            Input::Close => break,
        }
    }
    if let Some(dir) = options.log_dir {
        if let Err(e) = write_logs(&dir, n, &host) {
            tracing::error!(error = %e, dir = %dir.display(), "could not write session logs");
        }
    }
}

/// File name stem for connection `n`'s logs.
pub fn log_stem(n: usize) -> String {
    format!("session-{}-{n}", std::process::id())
}

fn write_logs(dir: &std::path::Path, n: usize, host: &Host) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let stem = log_stem(n);
    std::fs::write(dir.join(format!("{stem}.trace.jsonl")), jsonl(host.trace()))?;
    std::fs::write(dir.join(format!("{stem}.events.jsonl")), jsonl(&host.event_log_lines()))
}

pub fn jsonl(lines: &[String]) -> String {
    let mut s = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    s
}
