use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde_json::json;
use tokio::sync::{broadcast, watch};

use samadyn_core::control::ControllerKind;
use samadyn_core::model::RobotParams;
use samadyn_core::sim::{Simulator, CONTROL_DECIMATION, PHYSICS_DT};

use crate::protocol::{
    advance_yaw, apply_command, CommandMessage, ErrorMessage, StateMessage, TeleopTarget, HEAD_ORIENTATION_RATE_HZ,
};
use crate::{Result, TeleopError};

/// State broadcast rate, Hz.
pub const BROADCAST_HZ: u64 = 30;
const STATE_QUEUE: usize = 16;
/// If the loop falls this far behind wall time it stops trying to catch up.
const MAX_LAG: Duration = Duration::from_millis(250);

/// The simulation as driven by operator commands: hands and head follow IK
/// toward the references, yaw rate integrates into the yaw setpoint.
pub struct SimLoop {
    sim: Simulator,
    target: TeleopTarget,
}

impl SimLoop {
    pub fn new(params: RobotParams) -> Result<Self> {
        let sim = Simulator::from_params(params, ControllerKind::Proposed)?;
        let target = TeleopTarget {
            refs: sim.hold_references(),
            controller: ControllerKind::Proposed,
        };
        Ok(SimLoop { sim, target })
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn target(&self) -> &TeleopTarget {
        &self.target
    }

    pub fn apply(&mut self, msg: &CommandMessage) {
        self.target = apply_command(msg, self.target.clone());
    }

    /// One physics step, preceded by an outer-loop update on control ticks.
    pub fn tick(&mut self) -> Result<()> {
        if self.sim.steps() % CONTROL_DECIMATION == 0 {
            advance_yaw(&mut self.target.refs, PHYSICS_DT * CONTROL_DECIMATION as f64);
            self.sim.set_controller(self.target.controller);
            let torso = self.sim.ik_command(&self.target.refs)?;
            self.sim.update_control(&self.target.refs, torso)?;
        }
        self.sim.physics_step()?;
        Ok(())
    }

    /// Telemetry for the current state; clamp flags cover the steps since the previous call.
    pub fn state_message(&mut self) -> Result<StateMessage> {
        let flags = self.sim.take_flags();
        Ok(StateMessage::from_snapshot(&self.sim.snapshot()?, flags.clamp))
    }
}

fn publish_due(steps: u64) -> bool {
    steps == 0 || (steps * BROADCAST_HZ) / 1000 != ((steps - CONTROL_DECIMATION) * BROADCAST_HZ) / 1000
}

/// Real-time loop: one control period per 5 ms absolute deadline.
fn run_realtime(
    mut sim: SimLoop,
    commands: mpsc::Receiver<CommandMessage>,
    states: broadcast::Sender<Utf8Bytes>,
    latest: watch::Sender<Utf8Bytes>,
    stop: Arc<AtomicBool>,
) {
    let period = Duration::from_secs_f64(PHYSICS_DT * CONTROL_DECIMATION as f64);
    let mut deadline = Instant::now();
    while !stop.load(Ordering::Relaxed) {
        while let Ok(cmd) = commands.try_recv() {
            sim.apply(&cmd);
        }
        if publish_due(sim.simulator().steps()) {
            match sim.state_message() {
                Ok(msg) => {
                    let text = Utf8Bytes::from(msg.to_json());
                    latest.send_replace(text.clone());
                    // no receivers is fine
                    let _ = states.send(text);
                }
                Err(e) => {
                    log::error!("telemetry failed: {e}");
                    break;
                }
            }
        }
        for _ in 0..CONTROL_DECIMATION {
            if let Err(e) = sim.tick() {
                log::error!("simulation stopped: {e}");
                return;
            }
        }
        deadline += period;
        let now = Instant::now();
        if now < deadline {
            thread::sleep(deadline - now);
        } else if now - deadline > MAX_LAG {
            log::warn!("simulation loop fell {:?} behind real time", now - deadline);
            deadline = now;
        }
    }
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<CommandMessage>,
    states: broadcast::Sender<Utf8Bytes>,
    latest: watch::Receiver<Utf8Bytes>,
    kinematics: Arc<serde_json::Value>,
}

/// A running service. Dropping it without [`TeleopServer::shutdown`] leaves
/// the background tasks running until the runtime exits.
pub struct TeleopServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    sim_thread: Option<thread::JoinHandle<()>>,
    server: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl TeleopServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub async fn shutdown(mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.sim_thread.take() {
            let _ = tokio::task::spawn_blocking(move || h.join()).await;
        }
        self.server.abort();
    }
}

pub fn kinematics_document(params: &RobotParams) -> serde_json::Value {
    json!({
        "dh_arm": params.dh_arm,
        "dh_head": params.dh_head,
        "mounts": params.mounts,
        "joint_order": ["q_la1", "q_la2", "q_la3", "q_la4", "q_la5", "q_ra1", "q_ra2", "q_ra3", "q_ra4", "q_ra5", "q_h1", "q_h2"],
    })
}

/// Binds `addr`, starts the simulation thread and serves `/ws`, `/health` and `/kinematics`.
pub async fn start(params: RobotParams, addr: SocketAddr) -> Result<TeleopServer> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(TeleopError::Bind)?;
    let addr = listener.local_addr().map_err(TeleopError::Bind)?;
    let kinematics = Arc::new(kinematics_document(&params));

    let mut sim = SimLoop::new(params)?;
    let first = Utf8Bytes::from(sim.state_message()?.to_json());
    let (cmd_tx, cmd_rx) = mpsc::channel();
    let (state_tx, _) = broadcast::channel(STATE_QUEUE);
    let (latest_tx, latest_rx) = watch::channel(first);
    let stop = Arc::new(AtomicBool::new(false));

    let sim_thread = {
        let (state_tx, stop) = (state_tx.clone(), stop.clone());
        thread::Builder::new()
            .name("samadyn-sim".into())
            .spawn(move || run_realtime(sim, cmd_rx, state_tx, latest_tx, stop))
            .map_err(TeleopError::Bind)?
    };

    let app = Router::new()
        .route("/ws", get(ws_handler))
        .route("/health", get(health))
        .route("/kinematics", get(kinematics_handler))
        .with_state(AppState {
            commands: cmd_tx,
            states: state_tx,
            latest: latest_rx,
            kinematics,
        });
    let server = tokio::spawn(async move { axum::serve(listener, app).await });
    log::info!("teleop service listening on {addr}");
    Ok(TeleopServer {
        addr,
        stop,
        sim_thread: Some(sim_thread),
        server,
    })
}

/// Serves on `port` until Ctrl-C.
pub async fn serve(params: RobotParams, port: u16) -> Result<()> {
    let server = start(params, SocketAddr::from(([0, 0, 0, 0], port))).await?;
    tokio::signal::ctrl_c().await.map_err(TeleopError::Bind)?;
    log::info!("shutting down");
    server.shutdown().await;
    Ok(())
}

async fn health() -> impl IntoResponse {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

async fn kinematics_handler(State(app): State<AppState>) -> impl IntoResponse {
    Json((*app.kinematics).clone())
}

async fn ws_handler(ws: WebSocketUpgrade, State(app): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client_session(socket, app))
}

async fn client_session(socket: WebSocket, app: AppState) {
    let (mut sink, mut stream) = socket.split();
    let mut states = app.states.subscribe();
    let first = app.latest.borrow().clone();
    let (reply_tx, mut reply_rx) = tokio::sync::mpsc::unbounded_channel::<Utf8Bytes>();

    let writer = tokio::spawn(async move {
        if sink.send(Message::Text(first)).await.is_err() {
            return;
        }
        loop {
            let text = tokio::select! {
                s = states.recv() => match s {
                    Ok(s) => s,
                    // slow client: oldest states were dropped
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                },
                r = reply_rx.recv() => match r {
                    Some(r) => r,
                    None => break,
                },
            };
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
    });

    let min_head_interval = Duration::from_secs_f64(1.0 / HEAD_ORIENTATION_RATE_HZ);
    let mut last_head: Option<Instant> = None;
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        let reply = match CommandMessage::parse(text.as_str()) {
            Ok(cmd) => {
                let limited = matches!(cmd, CommandMessage::HeadOrientation(_))
                    && last_head.is_some_and(|t| t.elapsed() < min_head_interval);
                if limited {
                    Some(format!("head_orientation limited to {HEAD_ORIENTATION_RATE_HZ} Hz"))
                } else {
                    if matches!(cmd, CommandMessage::HeadOrientation(_)) {
                        last_head = Some(Instant::now());
                    }
                    if app.commands.send(cmd).is_err() {
                        Some("simulation is not running".to_string())
                    } else {
                        None
                    }
                }
            }
            Err(e) => Some(e),
        };
        if let Some(r) = reply {
            if reply_tx.send(Utf8Bytes::from(ErrorMessage::new(r).to_json())).is_err() {
                break;
            }
        }
    }
    drop(reply_tx);
    writer.abort();
}
