//! Messages between the live-session service and its clients, and the
//! per-connection logic that answers them.

use serde::{Deserialize, Serialize};

use crate::automaton::ContextFrame;
use crate::dialogue::Session;
use crate::grammar::{Gesture, InputEvent};
use crate::moves::{AgentMove, MoveKind};
use crate::scene::{Vec3, WorldObject};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Utterance {
        text: String,
    },
    Deixis {
        origin: Vec3,
        direction: Vec3,
    },
    DeixisClick {
        x: f64,
        z: f64,
    },
    Gesture {
        #[serde(flatten)]
        gesture: Gesture,
    },
    LearnGesture {
        shape_id: String,
    },
    Reset,
}

/// A client message with the client's optional sequence number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientEnvelope {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(flatten)]
    pub message: ClientMessage,
}

/// An agent move as clients see it: records and candidates in printed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMove {
    pub kind: MoveKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_record: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named_candidate: Option<String>,
}

impl From<&AgentMove> for WireMove {
    fn from(m: &AgentMove) -> Self {
        WireMove {
            kind: m.kind,
            text: m.text.clone(),
            action_record: m.action_record.as_ref().map(|r| r.to_string()),
            named_candidate: m.named_candidate.as_ref().map(|c| c.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    AgentMove {
        seq: u64,
        #[serde(flatten)]
        agent_move: WireMove,
    },
    SceneState {
        seq: u64,
        objects: Vec<WorldObject>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        deixis_marker: Option<Vec3>,
    },
    StackDebug {
        seq: u64,
        state: String,
        frames: Vec<ContextFrame>,
    },
    Error {
        seq: u64,
        message: String,
    },
}

impl ServerMessage {
    pub fn seq(&self) -> u64 {
        match self {
            ServerMessage::AgentMove { seq, .. }
            | ServerMessage::SceneState { seq, .. }
            | ServerMessage::StackDebug { seq, .. }
            | ServerMessage::Error { seq, .. } => *seq,
        }
    }
}

/// One connection's engine session and its outgoing sequence numbers.
pub struct Connection {
    session: Session,
    seq: u64,
    clock: u64,
}

impl Connection {
    pub fn new(session: Session) -> Connection {
        Connection {
            session,
            seq: 0,
            clock: 0,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    fn next(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    /// The current scene and stack, as sent after every message.
    pub fn snapshot(&mut self) -> Vec<ServerMessage> {
        let objects = self.session.world().scene.objects.clone();
        let deixis_marker = self.session.config().top().indicated.as_ref().map(|t| t.location);
        let state = self.session.config().state.clone();
        let frames = self.session.config().stack.clone();
        vec![
            ServerMessage::SceneState {
                seq: self.next(),
                objects,
                deixis_marker,
            },
            ServerMessage::StackDebug {
                seq: self.next(),
                state,
                frames,
            },
        ]
    }

    /// Answers one raw text frame. Malformed input yields an error frame.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientEnvelope>(text) {
            Ok(env) => self.handle(env.message),
            Err(e) => vec![ServerMessage::Error {
                seq: self.next(),
                message: format!("malformed message: {e}"),
            }],
        }
    }

    pub fn handle(&mut self, message: ClientMessage) -> Vec<ServerMessage> {
        self.clock += 1;
        let time = self.clock;
        let event = match message {
            ClientMessage::Utterance { text } => InputEvent::utterance(time, text),
            ClientMessage::Deixis { origin, direction } => {
                InputEvent::gesture(time, Gesture::Deixis { origin, direction })
            }
            ClientMessage::DeixisClick { x, z } => {
                let scene = &self.session.world().scene;
                let origin = scene.human_viewpoint;
                let target = Vec3::new(x, scene.ground_plane_height, z);
                InputEvent::gesture(
                    time,
                    Gesture::Deixis {
                        origin,
                        direction: target.sub(origin),
                    },
                )
            }
            ClientMessage::Gesture { gesture } => InputEvent::gesture(time, gesture),
            ClientMessage::LearnGesture { shape_id } => {
                let mv = match self.session.learn_gesture(&shape_id) {
                    Ok((_, ack)) => ack,
                    Err(e) => AgentMove::confusion(e.to_string()),
                };
                let mut out = vec![ServerMessage::AgentMove {
                    seq: self.next(),
                    agent_move: (&mv).into(),
                }];
                out.extend(self.snapshot());
                return out;
            }
            ClientMessage::Reset => {
                self.session.reset();
                return self.snapshot();
            }
        };
        let turn = self.session.handle(&event);
        let mut out: Vec<ServerMessage> = turn
            .moves
            .iter()
            .map(|m| ServerMessage::AgentMove {
                seq: self.next(),
                agent_move: m.into(),
            })
            .collect();
        out.extend(self.snapshot());
        out
    }
}
