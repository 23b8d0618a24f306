//! Per-connection I/O. A connection whose first bytes are `GET ` is
//! upgraded to a websocket carrying one JSON message per text frame;
//! anything else is newline-delimited JSON over the raw stream.

use std::io::{self, BufRead, BufReader, ErrorKind, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{Receiver, Sender, TryRecvError};
use std::sync::Arc;
use std::time::{Duration, Instant};

use tungstenite::Message;

use super::Inbound;

const POLL: Duration = Duration::from_millis(5);
const BATCH: usize = 512;
const SNIFF: Duration = Duration::from_millis(100);

fn timed_out(e: &io::Error) -> bool {
    matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut)
}

fn is_websocket(stream: &TcpStream) -> io::Result<bool> {
    stream.set_read_timeout(Some(POLL))?;
    let deadline = Instant::now() + SNIFF;
    let mut buf = [0u8; 4];
    loop {
        match stream.peek(&mut buf) {
            Ok(0) => return Ok(false),
            Ok(n) if n >= 4 => return Ok(&buf == b"GET "),
            Ok(n) if !b"GET ".starts_with(&buf[..n]) => return Ok(false),
            Ok(_) => {}
            Err(e) if timed_out(&e) => {}
            Err(e) => return Err(e),
        }
        if Instant::now() >= deadline {
            return Ok(false);
        }
        std::thread::sleep(POLL);
    }
}

pub(super) fn serve_client(
    stream: TcpStream,
    client: u64,
    to_owner: Sender<Inbound>,
    outbox: Receiver<String>,
    backlog: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
) {
    let outbox = Outbox { rx: outbox, backlog };
    let _ = match is_websocket(&stream) {
        Ok(true) => websocket(stream, client, &to_owner, &outbox, &shutdown),
        Ok(false) => ndjson(stream, client, &to_owner, &outbox, &shutdown),
        Err(e) => Err(e),
    };
    let _ = to_owner.send(Inbound::Gone { client });
}

struct Outbox {
    rx: Receiver<String>,
    /// Messages queued but not yet written; the owner pauses the run
    /// while this is high.
    backlog: Arc<AtomicUsize>,
}

/// Sends up to a batch of queued messages so that reads are not starved
/// while a run floods the outbox. `false` once the owner is gone.
fn flush_outbox(outbox: &Outbox, mut send: impl FnMut(String) -> io::Result<()>) -> io::Result<bool> {
    for _ in 0..BATCH {
        match outbox.rx.try_recv() {
            Ok(msg) => {
                send(msg)?;
                outbox.backlog.fetch_sub(1, Ordering::Relaxed);
            }
            Err(TryRecvError::Empty) => return Ok(true),
            Err(TryRecvError::Disconnected) => return Ok(false),
        }
    }
    Ok(true)
}

fn ndjson(
    stream: TcpStream,
    client: u64,
    to_owner: &Sender<Inbound>,
    outbox: &Outbox,
    shutdown: &AtomicBool,
) -> io::Result<()> {
    stream.set_read_timeout(Some(POLL))?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut line = Vec::new();
    while !shutdown.load(Ordering::Relaxed) {
        let alive = flush_outbox(outbox, |msg| {
            writer.write_all(msg.as_bytes())?;
            writer.write_all(b"\n")
        })?;
        writer.flush()?;
        if !alive {
            return Ok(());
        }
        match reader.read_until(b'\n', &mut line) {
            Ok(0) => return Ok(()),
            Ok(_) if line.ends_with(b"\n") => {
                let text = String::from_utf8_lossy(&line).trim().to_string();
                line.clear();
                if !text.is_empty() && to_owner.send(Inbound::Message { client, text }).is_err() {
                    return Ok(());
                }
            }
            Ok(_) => {}
            Err(e) if timed_out(&e) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn websocket(
    stream: TcpStream,
    client: u64,
    to_owner: &Sender<Inbound>,
    outbox: &Outbox,
    shutdown: &AtomicBool,
) -> io::Result<()> {
    stream.set_read_timeout(None)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    ws.get_ref().set_read_timeout(Some(POLL))?;
    let ws_err = |e: tungstenite::Error| match e {
        tungstenite::Error::Io(e) => e,
        other => io::Error::other(other.to_string()),
    };
    while !shutdown.load(Ordering::Relaxed) {
        let alive = flush_outbox(outbox, |msg| ws.send(Message::text(msg)).map_err(ws_err))?;
        if !alive {
            let _ = ws.close(None);
            return Ok(());
        }
        match ws.read() {
            Ok(Message::Text(text)) => {
                if to_owner
                    .send(Inbound::Message {
                        client,
                        text: text.to_string(),
                    })
                    .is_err()
                {
                    return Ok(());
                }
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if timed_out(&e) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(ws_err(e)),
        }
    }
    Ok(())
}
