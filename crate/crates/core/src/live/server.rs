//! TCP front end of the live simulator.
//!
//! One thread owns the [`WorldState`] and runs the tick loop in real time.
//! Each client gets a reader thread, which forwards commands into a queue the
//! tick loop drains at tick boundaries, and a writer thread fed through a
//! bounded channel; a slow client loses frames instead of stalling the loop.

use std::io::{BufReader, BufWriter, ErrorKind, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender, TrySendError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::{read_message, Message, WorldState};
use crate::error::{Error, Result};

/// Environment variable that overrides the configured port.
pub const PORT_ENV: &str = "COGMAP_PORT";

const CLIENT_QUEUE: usize = 64;

/// Port from [`PORT_ENV`], if set and valid.
pub fn port_from_env() -> Option<u16> {
    std::env::var(PORT_ENV).ok()?.trim().parse().ok()
}

type Frame = Arc<Vec<u8>>;

struct Client {
    id: usize,
    tx: SyncSender<Frame>,
    stream: TcpStream,
    writer: JoinHandle<()>,
}

impl Client {
    /// Stops the reader, flushes queued frames, then closes the connection.
    fn close(self) {
        let _ = self.stream.shutdown(Shutdown::Read);
        drop(self.tx);
        let _ = self.writer.join();
        let _ = self.stream.shutdown(Shutdown::Both);
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: JoinHandle<Result<WorldState>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Asks the loop to stop after the current tick and returns the final world.
    pub fn stop(self) -> Result<WorldState> {
        self.stop.store(true, Ordering::SeqCst);
        self.join()
    }

    /// Waits for the loop to end on its own.
    pub fn join(self) -> Result<WorldState> {
        self.thread
            .join()
            .map_err(|_| Error::Format("server loop panicked".into()))?
    }
}

/// Binds `addr` and starts the tick loop. With `max_duration` the loop ends
/// once simulated time reaches it; otherwise it runs until stopped.
pub fn serve(world: WorldState, addr: impl ToSocketAddrs, max_duration: Option<f64>) -> Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    let thread = thread::Builder::new()
        .name("cogmap-live".into())
        .spawn(move || run(world, listener, flag, max_duration))?;
    Ok(ServerHandle { addr, stop, thread })
}

fn spawn_client(stream: TcpStream, id: usize, commands: Sender<(usize, Message)>) -> Result<Client> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let (tx, rx): (SyncSender<Frame>, Receiver<Frame>) = mpsc::sync_channel(CLIENT_QUEUE);
    let write_half = stream.try_clone()?;
    let handle = stream.try_clone()?;
    let writer = thread::spawn(move || {
        let mut w = BufWriter::new(write_half);
        while let Ok(frame) = rx.recv() {
            if w.write_all(&frame).and_then(|_| w.flush()).is_err() {
                break;
            }
        }
    });
    let errors = tx.clone();
    thread::spawn(move || {
        let mut r = BufReader::new(stream);
        loop {
            match read_message(&mut r) {
                Ok(Some(msg)) => {
                    if commands.send((id, msg)).is_err() {
                        break;
                    }
                }
                Ok(None) => break,
                Err(e) => {
                    let reply = Message::Error { message: e.to_string() };
                    if let Ok(frame) = reply.to_frame() {
                        let _ = errors.try_send(Arc::new(frame));
                    }
                    if !matches!(e, Error::Json(_)) {
                        break;
                    }
                }
            }
        }
    });
    Ok(Client {
        id,
        tx,
        stream: handle,
        writer,
    })
}

fn broadcast(clients: &mut Vec<Client>, frame: &Frame) {
    clients.retain(|c| !matches!(c.tx.try_send(frame.clone()), Err(TrySendError::Disconnected(_))));
}

fn send_to(clients: &[Client], id: usize, msg: &Message) {
    if let (Some(c), Ok(frame)) = (clients.iter().find(|c| c.id == id), msg.to_frame()) {
        let _ = c.tx.try_send(Arc::new(frame));
    }
}

fn run(
    mut world: WorldState,
    listener: TcpListener,
    stop: Arc<AtomicBool>,
    max_duration: Option<f64>,
) -> Result<WorldState> {
    let dt = world.config().tick;
    let (cmd_tx, cmd_rx) = mpsc::channel();
    let mut clients = Vec::new();
    let mut next_id = 0;
    let started = Instant::now();
    let mut ticks: u32 = 0;
    while !stop.load(Ordering::SeqCst) {
        loop {
            match listener.accept() {
                Ok((stream, _)) => {
                    if let Ok(c) = spawn_client(stream, next_id, cmd_tx.clone()) {
                        clients.push(c);
                    }
                    next_id += 1;
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => break,
                Err(_) => break,
            }
        }
        while let Ok((id, msg)) = cmd_rx.try_recv() {
            match msg {
                Message::Command(cmd) => {
                    if let Err(e) = world.apply_command(cmd) {
                        send_to(&clients, id, &Message::Error { message: e.to_string() });
                    }
                }
                _ => send_to(
                    &clients,
                    id,
                    &Message::Error {
                        message: "clients may only send commands".into(),
                    },
                ),
            }
        }
        world.tick(dt)?;
        for ev in world.drain_events() {
            broadcast(&mut clients, &Arc::new(Message::Event(ev).to_frame()?));
        }
        let snap = Message::Snapshot(Box::new(world.snapshot()));
        broadcast(&mut clients, &Arc::new(snap.to_frame()?));
        if max_duration.is_some_and(|d| world.time + 1e-9 >= d) {
            break;
        }
        ticks += 1;
        let due = started + Duration::from_secs_f64(dt) * ticks;
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            thread::sleep(wait);
        }
    }
    for c in clients {
        c.close();
    }
    Ok(world)
}
