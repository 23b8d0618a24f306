mod common;

use std::time::Duration;

use serde_json::{json, Value};
use sosim::config::SimConfig;
use sosim::server::{serve, ServeOptions};
use sosim::sim::{load_log, replay};

use common::Client;

fn flocking() -> SimConfig {
    SimConfig::new("flocking").with_seed(11).with_param("n_nodes", 40.0)
}

#[test]
fn schema_then_setup_and_step() {
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    let mut c = Client::connect(server.addr());
    let schema = c.next_of("schema");
    assert_eq!(schema["model"], "flocking");
    let params = schema["params"].as_array().unwrap();
    let radius = params.iter().find(|p| p["name"] == "capture_radius").unwrap();
    assert_eq!(radius["live"], false);
    assert_eq!(radius["type"], "real");
    assert!(radius["min"].is_number() && radius["max"].is_number() && radius["default"].is_number());

    assert_eq!(schema["models"].as_object().unwrap().len(), 7);

    let ack = c.request(json!({"id": 1, "type": "control", "action": "setup"}));
    assert_eq!(ack["tick"], 0);
    assert!(ack["reporters"].as_array().unwrap().iter().any(|r| r == "free_count"));
    let first = c.next_of("frame");
    assert_eq!(first["tick"], 0);
    let nodes = first["agents"].as_array().unwrap().iter().filter(|a| a["breed"] == "node").count();
    assert_eq!(nodes, 40);
    assert_eq!(first["patches"].as_array().unwrap().len(), 33 * 33);

    c.clear();
    let ack = c.request(json!({"id": 2, "type": "control", "action": "step", "count": 5}));
    assert_eq!(ack["type"], "ack");
    assert_eq!(ack["tick"], 5);
    let frames = c.seen("frame");
    let metrics = c.seen("metrics");
    assert_eq!(frames.len(), 5);
    assert_eq!(metrics.iter().map(|m| m["tick"].as_u64().unwrap()).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    // flocking only recolors a few tower patches
    assert!(frames[4]["patches"].as_array().unwrap().len() < 33 * 33);
    server.shutdown();
}

#[test]
fn step_while_running_is_refused() {
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    let mut c = Client::connect(server.addr());
    c.request(json!({"id": 1, "type": "control", "action": "setup"}));
    let go = c.request(json!({"id": 2, "type": "control", "action": "go"}));
    assert_eq!(go["running"], true);
    let err = c.request(json!({"id": 3, "type": "control", "action": "step", "count": 2}));
    assert_eq!(err["type"], "error");
    assert_eq!(err["message"], "stop first");
    let stop = c.request(json!({"id": 4, "type": "control", "action": "stop"}));
    let t = stop["tick"].as_u64().unwrap();
    std::thread::sleep(Duration::from_millis(50));
    let again = c.request(json!({"id": 5, "type": "control", "action": "step", "count": 0}));
    assert_eq!(again["tick"].as_u64().unwrap(), t, "paused world must not advance");
    server.shutdown();
}

#[test]
fn malformed_input_keeps_the_connection() {
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    let mut c = Client::connect(server.addr());
    c.send_raw("{this is not json");
    let err = c.next_of("error");
    assert_eq!(err["id"], Value::Null);
    c.send_raw(r#"{"id":9,"type":"control","action":"dance"}"#);
    assert_eq!(c.next_of("error")["id"], Value::Null);
    let ack = c.request(json!({"id": 10, "type": "command", "text": "count turtles"}));
    assert_eq!(ack["values"], json!(["0"]));
    server.shutdown();
}

#[test]
fn params_commands_and_errors() {
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    let mut c = Client::connect(server.addr());
    c.request(json!({"id": 1, "type": "control", "action": "setup"}));
    let a = c.request(json!({"id": 2, "type": "set-param", "name": "capture_radius", "value": 5}));
    assert_eq!(a["deferred"], true);
    let a = c.request(json!({"id": 3, "type": "set-param", "name": "step", "value": 0.5}));
    assert_eq!(a["deferred"], false);
    let e = c.request(json!({"id": 4, "type": "set-param", "name": "bogus", "value": 1}));
    assert_eq!(e["type"], "error");
    let e = c.request(json!({"id": 5, "type": "set-param", "name": "step", "value": -3}));
    assert_eq!(e["type"], "error");

    let v = c.request(json!({"id": "q", "type": "command", "text": "count nodes with [ color = red ]"}));
    assert_eq!(v["id"], "q");
    assert_eq!(v["values"], json!(["0"]));
    let e = c.request(json!({"id": 6, "type": "command", "text": "ask nodes [ fd ]"}));
    assert_eq!(e["type"], "error");
    assert_eq!(e["phase"], "parse");
    assert_eq!(e["span"]["line"], 1);
    assert!(e["span"]["col"].as_u64().unwrap() > 1);
    server.shutdown();
}

#[test]
fn single_controller_until_release() {
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    let mut a = Client::connect(server.addr());
    let mut b = Client::connect(server.addr());
    a.request(json!({"id": 1, "type": "control", "action": "setup"}));
    let denied = b.request(json!({"id": 1, "type": "control", "action": "step"}));
    assert_eq!(denied["message"], "another client has control");
    // watching is always allowed
    let sub = b.request(json!({"id": 2, "type": "subscribe", "channels": ["metrics"]}));
    assert_eq!(sub["type"], "ack");
    b.clear();
    a.request(json!({"id": 2, "type": "release"}));
    let ok = b.request(json!({"id": 3, "type": "control", "action": "step", "count": 2}));
    assert_eq!(ok["tick"], 2);
    assert!(b.seen("frame").is_empty(), "unsubscribed from frames");
    server.shutdown();
}

#[test]
fn controller_disconnect_frees_control() {
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    {
        let mut a = Client::connect(server.addr());
        a.request(json!({"id": 1, "type": "control", "action": "setup"}));
    }
    std::thread::sleep(Duration::from_millis(100));
    let mut b = Client::connect(server.addr());
    let ok = b.request(json!({"id": 1, "type": "control", "action": "step"}));
    assert_eq!(ok["type"], "ack");
    server.shutdown();
}

#[test]
fn run_stops_at_tick_limit() {
    let mut cfg = flocking();
    cfg.world.max_ticks = Some(25);
    let server = serve(&cfg, ServeOptions::default()).unwrap();
    let mut c = Client::connect(server.addr());
    c.request(json!({"id": 1, "type": "control", "action": "setup"}));
    c.request(json!({"id": 2, "type": "control", "action": "go"}));
    loop {
        let s = c.next_of("status");
        if s["running"] == false {
            assert_eq!(s["tick"], 25);
            break;
        }
    }
    // lossless metrics: one row per tick
    let ticks: Vec<u64> = c.seen("metrics").iter().map(|m| m["tick"].as_u64().unwrap()).collect();
    assert_eq!(ticks, (1..=25).collect::<Vec<_>>());
    server.shutdown();
}

#[test]
fn frames_are_throttled_while_running() {
    let cfg = SimConfig::new("tutorial").with_seed(2).with_param("n", 10.0);
    let opts = ServeOptions {
        frame_rate: 5.0,
        ..ServeOptions::default()
    };
    let server = serve(&cfg, opts).unwrap();
    let mut c = Client::connect(server.addr());
    c.request(json!({"id": 1, "type": "control", "action": "setup"}));
    c.clear();
    c.request(json!({"id": 2, "type": "control", "action": "go"}));
    std::thread::sleep(Duration::from_millis(500));
    c.request(json!({"id": 3, "type": "control", "action": "stop"}));
    let frames = c.seen("frame").len();
    let rows = c.seen("metrics").len();
    assert!(rows > 20, "only {rows} ticks ran");
    assert!(frames <= 6, "{frames} frames in half a second at 5 fps");
    server.shutdown();
}

#[test]
fn websocket_transport() {
    use tungstenite::Message;
    let server = serve(&flocking(), ServeOptions::default()).unwrap();
    let (mut ws, _) = tungstenite::connect(format!("ws://{}/", server.addr())).unwrap();
    let next = |ws: &mut tungstenite::WebSocket<_>| -> Value {
        loop {
            if let Message::Text(t) = ws.read().unwrap() {
                return serde_json::from_str(&t).unwrap();
            }
        }
    };
    assert_eq!(next(&mut ws)["type"], "schema");
    ws.send(Message::text(r#"{"id":1,"type":"control","action":"setup"}"#)).unwrap();
    let ack = loop {
        let m = next(&mut ws);
        if m["type"] == "ack" {
            break m;
        }
    };
    assert_eq!(ack["id"], 1);
    ws.send(Message::text("garbage")).unwrap();
    loop {
        if next(&mut ws)["type"] == "error" {
            break;
        }
    }
    server.shutdown();
}

#[test]
fn session_log_replays_to_the_same_series() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.log");
    let opts = ServeOptions {
        log_path: Some(log.clone()),
        ..ServeOptions::default()
    };
    let server = serve(&flocking(), opts).unwrap();
    let mut c = Client::connect(server.addr());
    c.request(json!({"id": 1, "type": "control", "action": "setup"}));
    c.request(json!({"id": 2, "type": "control", "action": "go"}));
    std::thread::sleep(Duration::from_millis(30));
    c.request(json!({"id": 3, "type": "command", "text": "ask nodes [ rt 90 ]"}));
    std::thread::sleep(Duration::from_millis(30));
    c.request(json!({"id": 4, "type": "command", "text": "ask one-of nodes [ die ]"}));
    c.request(json!({"id": 5, "type": "set-param", "name": "step", "value": 0.3}));
    std::thread::sleep(Duration::from_millis(30));
    c.request(json!({"id": 6, "type": "command", "text": "set bonus 3"}));
    c.request(json!({"id": 7, "type": "control", "action": "stop"}));
    let mut live = server.shutdown();
    let live_csv = live.state().series().to_csv().unwrap();
    assert!(live.state().series().len() > 0);

    let entries = load_log(&log).unwrap();
    assert_eq!(entries, live.log());
    let replayed = replay(&entries).unwrap();
    assert_eq!(replayed.state().series().to_csv().unwrap(), live_csv);
    assert_eq!(replayed.state().digest(), live.state().digest());
}
