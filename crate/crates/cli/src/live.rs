//! Live mode: the simulator runs in real time on its own thread, a human
//! (through `/ws`) drives the haptic device, and telemetry is broadcast to
//! every connected client.

use std::net::SocketAddr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use plugpull::sim::{ControlSnapshot, HandInput, Operator, OperatorObservation, ScenarioConfig, Simulation};
use plugpull::Vec3;
use tokio::net::TcpListener;
use tokio::sync::broadcast;

use crate::command::CommandFrame;
use crate::telemetry::{Decimator, TelemetryFrame};

/// Operator whose hand inputs are whatever the client last sent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LiveOperator {
    pub force: Vec3,
    pub grip_torque: f64,
}

impl Operator for LiveOperator {
    fn act(&mut self, _obs: &OperatorObservation, _dt: f64) -> HandInput {
        HandInput { force: self.force, grip_torque: self.grip_torque }
    }
}

/// Simulation plus live operator. Commands are queued and only applied at
/// the start of the next control tick.
pub struct LiveSession {
    cfg: ScenarioConfig,
    sim: Simulation,
    operator: LiveOperator,
    pending: Vec<CommandFrame>,
}

impl LiveSession {
    pub fn new(cfg: ScenarioConfig) -> plugpull::Result<Self> {
        let sim = Simulation::new(cfg.clone())?;
        Ok(Self { cfg, sim, operator: LiveOperator::default(), pending: Vec::new() })
    }

    pub fn enqueue(&mut self, cmd: CommandFrame) {
        self.pending.push(cmd);
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn operator(&self) -> &LiveOperator {
        &self.operator
    }

    /// Applies pending commands, then runs one control period. Returns
    /// whether a reset happened before the step.
    pub fn step(&mut self) -> plugpull::Result<(ControlSnapshot, bool)> {
        let mut reset = false;
        for cmd in self.pending.drain(..) {
            match cmd {
                CommandFrame::HandleWrench(f) => self.operator.force = f,
                CommandFrame::GripTorque(g) => self.operator.grip_torque = g,
                CommandFrame::YawSetpoint(y) => self.sim.set_yaw_setpoint(y),
                CommandFrame::Reset => {
                    self.sim = Simulation::new(self.cfg.clone())?;
                    self.operator = LiveOperator::default();
                    reset = true;
                }
            }
        }
        let snap = self.sim.step(&mut self.operator)?;
        Ok((snap, reset))
    }

    fn restart(&mut self) -> plugpull::Result<()> {
        self.sim = Simulation::new(self.cfg.clone())?;
        self.operator = LiveOperator::default();
        self.pending.clear();
        Ok(())
    }
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<CommandFrame>,
    telemetry: broadcast::Sender<String>,
}

/// Runs the session in real time (scaled by `speed`), publishing frames
/// at the configured telemetry rate. Returns when every command sender is
/// gone.
fn sim_loop(
    mut session: LiveSession,
    speed: f64,
    commands: mpsc::Receiver<CommandFrame>,
    telemetry: broadcast::Sender<String>,
) {
    let period = session.cfg.control_period;
    let mut decimator = Decimator::new(session.cfg.telemetry_rate);
    let mut epoch = Instant::now();
    loop {
        loop {
            match commands.try_recv() {
                Ok(cmd) => session.enqueue(cmd),
                Err(mpsc::TryRecvError::Empty) => break,
                Err(mpsc::TryRecvError::Disconnected) => return,
            }
        }
        let due = epoch.elapsed().as_secs_f64() * speed;
        if session.time() > due {
            std::thread::sleep(Duration::from_secs_f64(period.min(0.001)));
            continue;
        }
        match session.step() {
            Ok((snap, reset)) => {
                if reset {
                    decimator.reset();
                    epoch = Instant::now();
                }
                if decimator.accept(snap.t) {
                    // No receivers is fine.
                    let _ = telemetry.send(TelemetryFrame::from_snapshot(&snap).encode());
                }
            }
            Err(e) => {
                tracing::warn!("simulation stopped: {e}; restarting");
                let _ = telemetry.send(serde_json::json!({ "error": e.to_string() }).to_string());
                if session.restart().is_err() {
                    return;
                }
                decimator.reset();
                epoch = Instant::now();
            }
        }
    }
}

async fn ws_handler(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(socket: WebSocket, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    let mut frames = state.telemetry.subscribe();
    let (reply_tx, mut replies) = tokio::sync::mpsc::unbounded_channel::<String>();

    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                frame = frames.recv() => match frame {
                    Ok(text) => text,
                    // Slow client: skip what it missed.
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                },
                reply = replies.recv() => match reply {
                    Some(text) => text,
                    None => break,
                },
            };
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        match CommandFrame::parse(&text) {
            Ok(cmd) => {
                if state.commands.send(cmd).is_err() {
                    break;
                }
            }
            Err(e) => {
                let _ = reply_tx.send(e.reply());
            }
        }
    }
    drop(reply_tx);
    writer.abort();
}

/// Serves `/ws` on `listener` until the process ends.
pub async fn serve(listener: TcpListener, cfg: ScenarioConfig, speed: f64) -> anyhow::Result<()> {
    let session = LiveSession::new(cfg)?;
    let (cmd_tx, cmd_rx) = mpsc::channel();
    let (tel_tx, _) = broadcast::channel(256);
    let loop_tx = tel_tx.clone();
    std::thread::Builder::new()
        .name("sim".into())
        .spawn(move || sim_loop(session, speed, cmd_rx, loop_tx))?;

    let app = Router::new()
        .route("/ws", get(ws_handler))
        .with_state(AppState { commands: cmd_tx, telemetry: tel_tx });
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!("live mode on ws://{addr}/ws");
    axum::serve(listener, app).await?;
    Ok(())
}
