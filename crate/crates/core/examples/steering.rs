//! Serves a model, drives it over the socket like a browser would, then
//! replays the session log.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::time::Duration;

use sosim::config::SimConfig;
use sosim::server::{serve, ServeOptions};
use sosim::sim::{load_log, replay};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log = std::env::temp_dir().join("sosim-steering.log");
    let opts = ServeOptions { log_path: Some(log.clone()), ..ServeOptions::default() };
    let server = serve(&SimConfig::new("consensus").with_seed(1), opts)?;
    println!("listening on {}", server.addr());

    let stream = TcpStream::connect(server.addr())?;
    let mut out = stream.try_clone()?;
    let mut lines = BufReader::new(stream).lines();
    let script = [
        r#"{"id":1,"type":"control","action":"setup"}"#,
        r#"{"id":2,"type":"set-param","name":"radius","value":2.5}"#,
        r#"{"id":3,"type":"control","action":"step","count":5}"#,
        r#"{"id":4,"type":"command","text":"count nodes"}"#,
    ];
    for (i, msg) in script.iter().enumerate() {
        writeln!(out, "{msg}")?;
        // print everything up to the reply to this message
        for line in lines.by_ref() {
            let v: serde_json::Value = serde_json::from_str(&line?)?;
            let kind = v["type"].as_str().unwrap_or("").to_string();
            if kind != "frame" && kind != "metrics" {
                println!("<- {kind} {}", v.get("id").cloned().unwrap_or_default());
            }
            if (kind == "ack" || kind == "error") && v["id"] == i + 1 {
                break;
            }
        }
    }
    std::thread::sleep(Duration::from_millis(50));
    let live = server.shutdown();
    let again = replay(&load_log(&log)?)?;
    println!("live digest   {}\nreplay digest {}", live.state().digest(), again.state().digest());
    Ok(())
}
