use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};

use serde_json::Value;
use tungstenite::{connect, Message};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ensemble"))
}

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn run(trace: &str, extra: &[&str]) -> std::process::Output {
    bin()
        .args(["run", "--scene"])
        .arg(sample("table.json"))
        .arg("--trace")
        .arg(sample(trace))
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn sample_traces_replay_cleanly() {
    for trace in ["put-in-front.jsonl", "put-there.jsonl", "pick-destination.jsonl", "learn-grasp.jsonl"] {
        let out = run(trace, &[]);
        assert_eq!(out.status.code(), Some(0), "{trace}: {}", String::from_utf8_lossy(&out.stderr));
        let log = String::from_utf8(out.stdout).unwrap();
        for line in log.lines() {
            let v: Value = serde_json::from_str(line).unwrap();
            assert!(v["time"].is_u64() && v["direction"].is_string());
        }
    }
}

#[test]
fn log_times_are_gap_free() {
    let out = run("pick-destination.jsonl", &[]);
    let times: Vec<u64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["time"].as_u64().unwrap())
        .collect();
    assert_eq!(times, (1..=times.len() as u64).collect::<Vec<_>>());
}

#[test]
fn out_of_vocabulary_is_nonzero() {
    let out = run("out-of-vocabulary.jsonl", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("juggle"));
}

#[test]
fn finite_state_modes_are_refused() {
    let out = run("put-in-front.jsonl", &["--mode", "dfa"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Dfa"));
}

#[test]
fn missing_scene_is_an_error() {
    let out = bin()
        .args(["run", "--scene", "/nonexistent.json", "--trace"])
        .arg(sample("put-in-front.jsonl"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn learned_lexicon_survives_a_restart() {
    let dir = std::env::temp_dir().join(format!("ensemble-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let lex = dir.join("lexicon.json");
    let out = bin()
        .arg("--save-lexicon")
        .arg(&lex)
        .args(["run", "--scene"])
        .arg(sample("table.json"))
        .arg("--trace")
        .arg(sample("learn-grasp.jsonl"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let trace = dir.join("mime.jsonl");
    std::fs::write(
        &trace,
        concat!(
            r#"{"type":"gesture","gesture":{"kind":"iconic_static","shape_id":"mime-cup-hold"}}"#,
            "\n",
            r#"{"type":"expect","kind":"action","action_record":"grasp(cup)"}"#,
            "\n"
        ),
    )
    .unwrap();
    let replay = |with_lexicon: bool| {
        let mut cmd = bin();
        if with_lexicon {
            cmd.arg("--load-lexicon").arg(&lex);
        }
        cmd.args(["run", "--scene"]).arg(sample("table.json")).arg("--trace").arg(&trace);
        cmd.output().unwrap().status.code()
    };
    assert_eq!(replay(true), Some(0));
    assert_eq!(replay(false), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fuzz_report_is_clean_json() {
    let out = bin()
        .args(["fuzz", "--max-len", "5", "--count", "100", "--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["sequences"], 100);
    assert_eq!(report["dead_inputs"], 0);
    assert_eq!(report["invariant_violations"], 0);
}

#[test]
fn repl_answers_commands() {
    let mut child = bin()
        .args(["repl", "--scene"])
        .arg(sample("table.json"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"The plate.\n:point 0.75 -1.7\nPut it there.\n:quit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Okay, go on."), "{text}");
    assert!(text.contains("put(plate,"), "{text}");
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        self.0.kill().ok();
        self.0.wait().ok();
    }
}

fn read_until_idle(socket: &mut tungstenite::WebSocket<tungstenite::stream::MaybeTlsStream<std::net::TcpStream>>) -> Vec<Value> {
    let mut out = Vec::new();
    loop {
        let msg = socket.read().unwrap();
        let v: Value = serde_json::from_str(msg.to_text().unwrap()).unwrap();
        let done = v["type"] == "stack_debug";
        out.push(v);
        if done {
            return out;
        }
    }
}

#[test]
fn serve_round_trip() {
    let mut child = bin()
        .args(["serve", "--port", "0", "--scene"])
        .arg(sample("table.json"))
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let _server = Server(child);
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();
    let (mut socket, _) = connect(url.as_str()).unwrap();

    let mut all = read_until_idle(&mut socket);
    socket
        .send(Message::text(r#"{"seq":1,"type":"utterance","text":"The plate."}"#))
        .unwrap();
    let reply = read_until_idle(&mut socket);
    assert_eq!(reply[0]["type"], "agent_move");
    assert_eq!(reply[0]["text"], "Okay, go on.");
    all.extend(reply);

    socket
        .send(Message::text(r#"{"seq":2,"type":"deixis_click","x":0.75,"z":-1.7}"#))
        .unwrap();
    let reply = read_until_idle(&mut socket);
    let marker = reply
        .iter()
        .find(|m| m["type"] == "scene_state")
        .and_then(|m| m["deixis_marker"].as_array().cloned())
        .unwrap();
    let (mx, mz) = (marker[0].as_f64().unwrap(), marker[2].as_f64().unwrap());
    assert!((mx - 0.75).hypot(mz + 1.7) <= 0.5);
    all.extend(reply);

    socket
        .send(Message::text(r#"{"seq":3,"type":"utterance","text":"Put it there."}"#))
        .unwrap();
    let reply = read_until_idle(&mut socket);
    assert_eq!(reply[0]["kind"], "action");
    assert!(reply[0]["action_record"].as_str().unwrap().starts_with("put(plate,"));
    all.extend(reply);

    socket.send(Message::text("nonsense")).unwrap();
    let err = socket.read().unwrap();
    let err: Value = serde_json::from_str(err.to_text().unwrap()).unwrap();
    assert_eq!(err["type"], "error");
    all.push(err);

    let seqs: Vec<u64> = all.iter().map(|m| m["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, (1..=seqs.len() as u64).collect::<Vec<_>>());
    socket.close(None).ok();
}
