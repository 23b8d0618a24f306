//! Live steering service. One owner thread holds the simulation and runs
//! the tick loop; client messages are applied only between ticks. At most
//! one client is the controller at a time: the first to send a steering
//! message takes control and keeps it until it releases or disconnects.
//! Others may still subscribe and watch.

pub mod protocol;
mod transport;

use std::collections::{BTreeMap, BTreeSet};
use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::sim::{Applied, Simulation};

use protocol::{Action, Body, Channel};

pub const DEFAULT_FRAME_RATE: f64 = 20.0;

/// A free run pauses while any metrics subscriber has this many unsent
/// messages, so the lossless channel cannot grow without bound.
const HIGH_WATER: usize = 1024;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub addr: String,
    /// Upper bound on frames per second while running. Metrics rows are
    /// never dropped.
    pub frame_rate: f64,
    /// Rewritten after every steering message and at shutdown.
    pub log_path: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            addr: "127.0.0.1:0".into(),
            frame_rate: DEFAULT_FRAME_RATE,
            log_path: None,
        }
    }
}

pub(crate) enum Inbound {
    Joined {
        client: u64,
        outbox: Sender<String>,
        backlog: Arc<AtomicUsize>,
    },
    Message { client: u64, text: String },
    Gone { client: u64 },
}

pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    owner: JoinHandle<Simulation>,
    acceptor: JoinHandle<()>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting, closes connections and returns the simulation.
    pub fn shutdown(self) -> Simulation {
        self.shutdown.store(true, Ordering::Relaxed);
        let _ = self.acceptor.join();
        self.owner.join().expect("server owner thread panicked")
    }

    /// Blocks until the server stops on its own (it never does unless the
    /// owner thread panics). Used by the command line front end.
    pub fn wait(self) {
        let _ = self.acceptor.join();
        let _ = self.owner.join();
    }
}

/// Binds `opts.addr` and starts serving `config`. The world starts empty;
/// clients send a `setup` control message first.
pub fn serve(config: &SimConfig, opts: ServeOptions) -> Result<ServerHandle> {
    if !(opts.frame_rate > 0.0) {
        return Err(SimError::Config(format!("frame rate must be positive, got {}", opts.frame_rate)));
    }
    let sim = Simulation::new(config)?;
    let listener = TcpListener::bind(&opts.addr).map_err(|e| SimError::Config(format!("bind {}: {e}", opts.addr)))?;
    let addr = listener.local_addr().map_err(|e| SimError::Other(e.to_string()))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| SimError::Other(e.to_string()))?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();

    let acceptor = {
        let shutdown = shutdown.clone();
        std::thread::spawn(move || accept_loop(listener, tx, shutdown))
    };
    let owner = {
        let shutdown = shutdown.clone();
        std::thread::spawn(move || Owner::new(sim, opts).run(rx, &shutdown))
    };
    Ok(ServerHandle {
        addr,
        shutdown,
        owner,
        acceptor,
    })
}

fn accept_loop(listener: TcpListener, to_owner: Sender<Inbound>, shutdown: Arc<AtomicBool>) {
    let mut next = 0u64;
    let mut workers = Vec::new();
    while !shutdown.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, _)) => {
                let _ = stream.set_nonblocking(false);
                let _ = stream.set_nodelay(true);
                let client = next;
                next += 1;
                let (out_tx, out_rx) = mpsc::channel();
                let backlog = Arc::new(AtomicUsize::new(0));
                let joined = Inbound::Joined {
                    client,
                    outbox: out_tx,
                    backlog: backlog.clone(),
                };
                if to_owner.send(joined).is_err() {
                    break;
                }
                let to_owner = to_owner.clone();
                let shutdown = shutdown.clone();
                workers.push(std::thread::spawn(move || {
                    transport::serve_client(stream, client, to_owner, out_rx, backlog, shutdown)
                }));
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(5)),
            Err(_) => std::thread::sleep(Duration::from_millis(5)),
        }
    }
    for w in workers {
        let _ = w.join();
    }
}

struct Client {
    outbox: Sender<String>,
    backlog: Arc<AtomicUsize>,
    channels: BTreeSet<Channel>,
    patch_clock: u64,
}

struct Owner {
    sim: Simulation,
    opts: ServeOptions,
    clients: BTreeMap<u64, Client>,
    controller: Option<u64>,
    running: bool,
    last_frame: Option<Instant>,
}

impl Client {
    fn push(&self, msg: String) {
        self.backlog.fetch_add(1, Ordering::Relaxed);
        let _ = self.outbox.send(msg);
    }
}

impl Owner {
    fn new(sim: Simulation, opts: ServeOptions) -> Self {
        Self {
            sim,
            opts,
            clients: BTreeMap::new(),
            controller: None,
            running: false,
            last_frame: None,
        }
    }

    fn run(mut self, rx: Receiver<Inbound>, shutdown: &AtomicBool) -> Simulation {
        while !shutdown.load(Ordering::Relaxed) {
            let stepping = self.running && !self.congested();
            let first = if stepping {
                rx.try_recv().ok()
            } else {
                let wait = if self.running { 1 } else { 20 };
                match rx.recv_timeout(Duration::from_millis(wait)) {
                    Ok(m) => Some(m),
                    Err(RecvTimeoutError::Timeout) => None,
                    Err(RecvTimeoutError::Disconnected) => break,
                }
            };
            if let Some(m) = first {
                self.handle(m);
                while let Ok(m) = rx.try_recv() {
                    self.handle(m);
                }
            }
            if self.running && !self.congested() {
                self.tick_once(false);
            }
        }
        self.save_log();
        self.sim
    }

    fn send(&self, client: u64, msg: String) {
        if let Some(c) = self.clients.get(&client) {
            c.push(msg);
        }
    }

    fn broadcast(&self, msg: &str) {
        for c in self.clients.values() {
            c.push(msg.to_string());
        }
    }

    fn send_frames(&mut self) {
        let state = self.sim.state();
        let clock = state.patch_clock();
        for c in self.clients.values_mut() {
            if c.channels.contains(&Channel::Frames) {
                c.push(protocol::encode_frame(state, c.patch_clock));
                c.patch_clock = clock;
            }
        }
        self.last_frame = Some(Instant::now());
    }

    fn send_metrics(&self) {
        let row = protocol::encode_metrics(self.sim.state());
        for c in self.clients.values() {
            if c.channels.contains(&Channel::Metrics) {
                c.push(row.clone());
            }
        }
    }

    fn congested(&self) -> bool {
        self.clients
            .values()
            .any(|c| c.channels.contains(&Channel::Metrics) && c.backlog.load(Ordering::Relaxed) >= HIGH_WATER)
    }

    fn status(&self) -> String {
        json!({"type": "status", "running": self.running, "tick": self.sim.tick(), "controller": self.controller})
            .to_string()
    }

    fn frame_due(&self) -> bool {
        let interval = Duration::from_secs_f64(1.0 / self.opts.frame_rate);
        self.last_frame.is_none_or(|t| t.elapsed() >= interval)
    }

    /// One tick plus its metrics row. While free-running, frames are
    /// coalesced to the frame rate.
    fn tick_once(&mut self, every_frame: bool) -> bool {
        if let Err(e) = self.sim.step() {
            self.running = false;
            self.broadcast(&protocol::encode_error(&Value::Null, &e.to_string(), json!({})));
            self.send_frames();
            self.broadcast(&self.status());
            return false;
        }
        self.send_metrics();
        if self.sim.at_limit() && self.running {
            self.running = false;
            self.send_frames();
            self.broadcast(&self.status());
            return false;
        }
        if every_frame || self.frame_due() {
            self.send_frames();
        }
        true
    }

    fn save_log(&mut self) {
        if let Some(path) = self.opts.log_path.clone() {
            let _ = self.sim.save_log(path);
        }
    }

    fn handle(&mut self, m: Inbound) {
        match m {
            Inbound::Joined { client, outbox, backlog } => {
                self.clients.insert(
                    client,
                    Client {
                        outbox,
                        backlog,
                        channels: [Channel::Frames, Channel::Metrics].into(),
                        patch_clock: 0,
                    },
                );
                let state = self.sim.state();
                let schema =
                    protocol::encode_schema(self.sim.model(), state.config(), state, self.opts.frame_rate, self.running);
                self.send(client, schema);
            }
            Inbound::Gone { client } => {
                self.clients.remove(&client);
                if self.controller == Some(client) {
                    self.controller = None;
                }
            }
            Inbound::Message { client, text } => self.message(client, &text),
        }
    }

    fn message(&mut self, client: u64, text: &str) {
        let msg = match protocol::decode(text) {
            Ok(m) => m,
            Err(e) => return self.send(client, protocol::encode_error(&Value::Null, &e, json!({}))),
        };
        let id = msg.id;
        if msg.body.steers() {
            match self.controller {
                None => self.controller = Some(client),
                Some(c) if c == client => {}
                Some(_) => {
                    return self.send(client, protocol::encode_error(&id, "another client has control", json!({})));
                }
            }
        }
        let tick = |o: &Self| o.sim.tick();
        // setup and commands answer first, then show the new state
        let mut frame_after = false;
        let reply = match msg.body {
            Body::Release => {
                if self.controller == Some(client) {
                    self.controller = None;
                }
                protocol::encode_ack(&id, json!({}))
            }
            Body::Subscribe { channels } => {
                if let Some(c) = self.clients.get_mut(&client) {
                    c.channels = channels.into_iter().collect();
                }
                protocol::encode_ack(&id, json!({}))
            }
            Body::Control { action, count } => match action {
                Action::Setup => match self.sim.setup() {
                    Ok(()) => {
                        let reporters: Vec<String> =
                            self.sim.state().reporters().iter().map(|r| r.name.clone()).collect();
                        frame_after = true;
                        protocol::encode_ack(&id, json!({"tick": tick(self), "reporters": reporters}))
                    }
                    Err(e) => protocol::encode_error(&id, &e.to_string(), json!({})),
                },
                Action::Go => {
                    self.running = !self.sim.at_limit();
                    self.broadcast(&self.status());
                    protocol::encode_ack(&id, json!({"tick": tick(self), "running": self.running}))
                }
                Action::Stop => {
                    let was = std::mem::replace(&mut self.running, false);
                    if was {
                        self.send_frames();
                        self.broadcast(&self.status());
                    }
                    protocol::encode_ack(&id, json!({"tick": tick(self)}))
                }
                Action::Step => {
                    if self.running {
                        protocol::encode_error(&id, "stop first", json!({}))
                    } else {
                        for _ in 0..count.unwrap_or(1) {
                            if !self.tick_once(true) {
                                break;
                            }
                        }
                        protocol::encode_ack(&id, json!({"tick": tick(self)}))
                    }
                }
            },
            Body::SetParam { name, value } => match self.sim.set_param(&name, value) {
                Ok(applied) => {
                    let deferred = applied == Applied::ParamDeferred;
                    protocol::encode_ack(&id, json!({"tick": tick(self), "deferred": deferred}))
                }
                Err(e) => protocol::encode_error(&id, &e.to_string(), json!({})),
            },
            Body::Command { text } => match self.sim.command(&text) {
                Ok(values) => {
                    let values: Vec<String> = values.iter().map(ToString::to_string).collect();
                    frame_after = !self.running;
                    protocol::encode_ack(&id, json!({"tick": tick(self), "values": values}))
                }
                Err(e) => protocol::encode_error(
                    &id,
                    &e.to_string(),
                    json!({"phase": e.phase, "span": e.span}),
                ),
            },
        };
        self.send(client, reply);
        if frame_after {
            self.send_frames();
        }
        self.save_log();
    }
}
