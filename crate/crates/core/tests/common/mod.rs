#![allow(dead_code)]

pub mod oracle;
pub mod programs;

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::time::{Duration, Instant};

use serde_json::Value;

const WAIT: Duration = Duration::from_secs(10);

/// Line-oriented test client that remembers every message it reads.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    log: Vec<Value>,
}

impl Client {
    pub fn connect(addr: SocketAddr) -> Self {
        let s = TcpStream::connect(addr).unwrap();
        s.set_read_timeout(Some(WAIT)).unwrap();
        Self {
            writer: s.try_clone().unwrap(),
            reader: BufReader::new(s),
            log: Vec::new(),
        }
    }

    pub fn send_raw(&mut self, line: &str) {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    fn read(&mut self) -> Value {
        let mut line = String::new();
        let n = self.reader.read_line(&mut line).expect("server reply");
        assert!(n > 0, "server closed the connection");
        let v: Value = serde_json::from_str(&line).unwrap();
        self.log.push(v.clone());
        v
    }

    pub fn next_of(&mut self, kind: &str) -> Value {
        let deadline = Instant::now() + WAIT;
        loop {
            assert!(Instant::now() < deadline, "no {kind} message");
            let v = self.read();
            if v["type"] == kind {
                return v;
            }
        }
    }

    /// Sends `msg` and waits for the ack or error carrying its id.
    pub fn request(&mut self, msg: Value) -> Value {
        let id = msg["id"].clone();
        self.send_raw(&msg.to_string());
        loop {
            let v = self.read();
            if (v["type"] == "ack" || v["type"] == "error") && v["id"] == id {
                return v;
            }
        }
    }

    pub fn seen(&self, kind: &str) -> Vec<Value> {
        self.log.iter().filter(|v| v["type"] == kind).cloned().collect()
    }

    pub fn clear(&mut self) {
        self.log.clear();
    }
}
