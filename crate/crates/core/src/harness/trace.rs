//! Line-delimited trace files and their replay.

use std::sync::Arc;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use std::hash::Hasher;
use thiserror::Error;

use super::term::Term;
use crate::automaton::{Configuration, Mode, ModeError};
use crate::dialogue::{build_interaction_machine, GestureLexicon, Session, TurnError, World};
use crate::grammar::{Gesture, InputEvent};
use crate::moves::{AgentMove, MoveKind};
use crate::scene::{Scene, Vec3};

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceLine {
    Utterance {
        #[serde(default)]
        time: Option<u64>,
        text: String,
    },
    Deixis {
        #[serde(default)]
        time: Option<u64>,
        origin: Vec3,
        direction: Vec3,
    },
    /// A ray from the human's viewpoint through a ground coordinate.
    DeixisClick {
        #[serde(default)]
        time: Option<u64>,
        x: f64,
        z: f64,
    },
    Gesture {
        #[serde(default)]
        time: Option<u64>,
        gesture: Gesture,
    },
    LearnGesture {
        #[serde(default)]
        time: Option<u64>,
        shape_id: String,
    },
    /// The next move produced by the preceding human line.
    Expect(ExpectedMove),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedMove {
    pub kind: MoveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_record: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named_candidate: Option<String>,
}

pub const COORDINATE_TOLERANCE: f64 = 1e-9;

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn term_matches(expected: &str, actual: &str) -> bool {
    match (Term::parse(expected), Term::parse(actual)) {
        (Ok(e), Ok(a)) => e.matches(&a, COORDINATE_TOLERANCE),
        _ => normalize(expected) == normalize(actual),
    }
}

impl ExpectedMove {
    /// `None` when `actual` matches, else what differs.
    pub fn mismatch(&self, actual: &AgentMove) -> Option<String> {
        if self.kind != actual.kind {
            return Some(format!("expected a {} move, got {}", self.kind, actual));
        }
        if let Some(t) = &self.text {
            if normalize(t) != normalize(&actual.text) {
                return Some(format!("expected text {t:?}, got {:?}", actual.text));
            }
        }
        if let Some(r) = &self.action_record {
            match &actual.action_record {
                Some(a) if term_matches(r, &a.to_string()) => {}
                other => {
                    let got = other.as_ref().map(|f| f.to_string()).unwrap_or_else(|| "none".into());
                    return Some(format!("expected action record {r}, got {got}"));
                }
            }
        }
        if let Some(c) = &self.named_candidate {
            match &actual.named_candidate {
                Some(v) if term_matches(c, &v.to_string()) => {}
                other => {
                    let got = other.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "none".into());
                    return Some(format!("expected candidate {c}, got {got}"));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Human,
    Agent,
}

/// One entry of a replay log. Times are the log's own sequence numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: u64,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<InputEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learn_gesture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "move")]
    pub agent_move: Option<AgentMove>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
}

/// FNV-1a hash of the machine state and stack, in hex.
pub fn config_digest(config: &Configuration) -> String {
    let mut h = FnvHasher::default();
    let body = serde_json::to_string(&(&config.state, &config.stack)).expect("configuration serializes");
    h.write(body.as_bytes());
    format!("{:016x}", h.finish())
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace line {line}: expected move with no preceding human line")]
    DanglingExpectation { line: usize },
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// Parses a trace file, skipping blank lines and `#` comments.
pub fn parse_trace(text: &str) -> Result<Vec<(usize, TraceLine)>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|t| (i + 1, t))
                .map_err(|e| HarnessError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceReport {
    pub records: Vec<TraceRecord>,
    pub errors: Vec<TurnError>,
    pub mismatches: Vec<String>,
    pub final_scene: Option<Scene>,
    pub gestures: Option<GestureLexicon>,
}

impl TraceReport {
    pub fn moves(&self) -> impl Iterator<Item = &AgentMove> {
        self.records.iter().filter_map(|r| r.agent_move.as_ref())
    }

    pub fn confusions(&self) -> usize {
        self.moves().filter(|m| m.kind == MoveKind::Confusion).count()
    }

    /// Success means no confusion, no error and every expectation met.
    pub fn success(&self) -> bool {
        self.confusions() == 0 && self.errors.is_empty() && self.mismatches.is_empty()
    }

    /// The log as JSON lines.
    pub fn log(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

/// Options for [`run_trace`].
#[derive(Debug, Clone)]
pub struct ReplayOptions {
    pub mode: Mode,
    pub seed: u64,
    pub gestures: Option<GestureLexicon>,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            mode: Mode::Dpda,
            seed: 0,
            gestures: None,
        }
    }
}

/// Replays the human lines of a trace against a fresh session and checks
/// the expected moves that follow each of them.
pub fn run_trace(scene: Scene, trace: &str, options: &ReplayOptions) -> Result<TraceReport, HarnessError> {
    let lines = parse_trace(trace)?;
    let machine = Arc::new(build_interaction_machine().restrict(options.mode)?);
    let mut world = World::new(scene);
    if let Some(g) = &options.gestures {
        world.gestures = g.clone();
    }
    let mut session = Session::new(machine, world, options.seed);
    let mut report = TraceReport::default();
    let mut seq = 0u64;
    let mut last_moves: Option<(usize, Vec<AgentMove>, usize)> = None;
    let flush_expectations = |report: &mut TraceReport, pending: Option<(usize, Vec<AgentMove>, usize)>| {
        if let Some((line, moves, checked)) = pending {
            if checked > 0 && checked < moves.len() {
                report.mismatches.push(format!(
                    "line {line}: {} moves expected, {} produced",
                    checked,
                    moves.len()
                ));
            }
        }
    };
    for (line, item) in lines {
        let event = match &item {
            TraceLine::Expect(expected) => {
                let Some((human_line, moves, checked)) = last_moves.as_mut() else {
                    return Err(HarnessError::DanglingExpectation { line });
                };
                match moves.get(*checked) {
                    Some(actual) => {
                        if let Some(m) = expected.mismatch(actual) {
                            report.mismatches.push(format!("line {line}: {m}"));
                        }
                    }
                    None => report.mismatches.push(format!(
                        "line {line}: only {} moves followed line {human_line}",
                        moves.len()
                    )),
                }
                *checked += 1;
                continue;
            }
            TraceLine::Utterance { time, text } => InputEvent::utterance(time.unwrap_or(seq), text.clone()),
            TraceLine::Deixis { time, origin, direction } => InputEvent::gesture(
                time.unwrap_or(seq),
                Gesture::Deixis {
                    origin: *origin,
                    direction: *direction,
                },
            ),
            TraceLine::DeixisClick { time, x, z } => {
                let scene = &session.world().scene;
                let target = Vec3::new(*x, scene.ground_plane_height, *z);
                let origin = scene.human_viewpoint;
                InputEvent::gesture(
                    time.unwrap_or(seq),
                    Gesture::Deixis {
                        origin,
                        direction: target.sub(origin),
                    },
                )
            }
            TraceLine::Gesture { time, gesture } => InputEvent::gesture(time.unwrap_or(seq), gesture.clone()),
            TraceLine::LearnGesture { shape_id, .. } => {
                flush_expectations(&mut report, last_moves.take());
                seq += 1;
                report.records.push(TraceRecord {
                    time: seq,
                    direction: Direction::Human,
                    event: None,
                    learn_gesture: Some(shape_id.clone()),
                    agent_move: None,
                    config_digest: None,
                });
                let mv = match session.learn_gesture(shape_id) {
                    Ok((_, ack)) => ack,
                    Err(e) => {
                        report.errors.push(TurnError::Compose { message: e.to_string() });
                        AgentMove::confusion(e.to_string())
                    }
                };
                seq += 1;
                report.records.push(TraceRecord {
                    time: seq,
                    direction: Direction::Agent,
                    event: None,
                    learn_gesture: None,
                    agent_move: Some(mv.clone()),
                    config_digest: Some(config_digest(session.config())),
                });
                last_moves = Some((line, vec![mv], 0));
                continue;
            }
        };
        flush_expectations(&mut report, last_moves.take());
        seq += 1;
        report.records.push(TraceRecord {
            time: seq,
            direction: Direction::Human,
            event: Some(event.clone()),
            learn_gesture: None,
            agent_move: None,
            config_digest: None,
        });
        let turn = session.handle(&event);
        let digest = config_digest(session.config());
        for m in &turn.moves {
            seq += 1;
            report.records.push(TraceRecord {
                time: seq,
                direction: Direction::Agent,
                event: None,
                learn_gesture: None,
                agent_move: Some(m.clone()),
                config_digest: Some(digest.clone()),
            });
        }
        report.errors.extend(turn.errors);
        last_moves = Some((line, turn.moves, 0));
    }
    flush_expectations(&mut report, last_moves.take());
    report.final_scene = Some(session.world().scene.clone());
    report.gestures = Some(session.world().gestures.clone());
    Ok(report)
}
