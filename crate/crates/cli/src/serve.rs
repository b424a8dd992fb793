use std::io::{self, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;

use ensemble_core::automaton::Machine;
use ensemble_core::dialogue::{build_interaction_machine, GestureLexicon, Session, World};
use ensemble_core::harness::{Connection, ServerMessage};
use ensemble_core::scene::Scene;
use tungstenite::{accept, Message};

fn send(ws: &mut tungstenite::WebSocket<TcpStream>, messages: &[ServerMessage]) -> tungstenite::Result<()> {
    for m in messages {
        ws.send(Message::text(serde_json::to_string(m).expect("message serializes")))?;
    }
    Ok(())
}

fn session_loop(
    stream: TcpStream,
    machine: Arc<Machine<World>>,
    scene: Scene,
    gestures: Option<GestureLexicon>,
    save: Option<PathBuf>,
) -> tungstenite::Result<()> {
    let mut ws = accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
    })?;
    let mut world = World::new(scene);
    if let Some(g) = gestures {
        world.gestures = g;
    }
    let mut conn = Connection::new(Session::new(machine, world, 0));
    let hello = conn.snapshot();
    send(&mut ws, &hello)?;
    loop {
        let reply = match ws.read() {
            Ok(Message::Text(text)) => conn.handle_text(text.as_str()),
            Ok(Message::Binary(bytes)) => conn.handle_text(&String::from_utf8_lossy(&bytes)),
            Ok(Message::Close(_)) | Err(tungstenite::Error::ConnectionClosed) => break,
            Ok(_) => continue,
            Err(e) => return Err(e),
        };
        send(&mut ws, &reply)?;
    }
    if let Some(path) = save {
        if let Err(e) = conn.session().world().gestures.save(&path) {
            eprintln!("could not save gesture lexicon: {e}");
        }
    }
    Ok(())
}

/// Accepts WebSocket connections on `port`, one session and one thread each.
/// Port 0 picks a free port; the bound address is printed first.
pub fn run(port: u16, scene: Scene, gestures: Option<GestureLexicon>, save: Option<PathBuf>) -> io::Result<()> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    println!("listening on ws://{}", listener.local_addr()?);
    io::stdout().flush()?;
    let machine = Arc::new(build_interaction_machine());
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                eprintln!("accept failed: {e}");
                continue;
            }
        };
        let (machine, scene, gestures, save) = (machine.clone(), scene.clone(), gestures.clone(), save.clone());
        thread::spawn(move || {
            if let Err(e) = session_loop(stream, machine, scene, gestures, save) {
                eprintln!("session ended: {e}");
            }
        });
    }
    Ok(())
}
