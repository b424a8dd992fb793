//! Grammar-driven fuzzing of the interaction machine.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::automaton::Mode;
use crate::dialogue::{build_interaction_machine, GestureLexiconEntry, Session, TurnError, World};
use crate::grammar::{generate, GenerateError, Gesture, InputEvent, Polarity, Terminal};
use crate::moves::MoveKind;
use crate::scene::{Scene, Vec3, WorldObject};
use crate::semantics::Value;

/// Shape id bound to grasping the first object in fuzz sessions.
pub const FUZZ_SHAPE: &str = "fuzz-grasp";

const EXAMPLE_LIMIT: usize = 10;

/// Clustered objects: the first two cups share a deixis region.
pub fn fuzz_scene() -> Scene {
    let mk = |id: &str, kind: &str, attrs: &[&str], x: f64, z: f64| WorldObject {
        id: id.into(),
        kind: kind.into(),
        attributes: attrs.iter().map(|s| s.to_string()).collect(),
        position: Vec3::new(x, 0.0, z),
        graspable: true,
        held_by: None,
    };
    Scene::new(
        Vec3::new(0.0, 1.2, 0.0),
        vec![
            mk("c1", "cup", &["blue"], 0.5, 1.0),
            mk("c2", "cup", &["red"], 0.8, 1.1),
            mk("plate", "plate", &["white"], -1.0, 1.2),
            mk("knife", "knife", &[], 1.5, -0.5),
            mk("block", "block", &["green"], -0.5, -1.0),
        ],
    )
    .expect("fuzz scene is valid")
}

/// A concrete event for each terminal: canonical words, a ray from the
/// human's viewpoint at the first object, and fixed gesture ids.
pub fn synthesize(scene: &Scene, terminal: Terminal, time: u64) -> InputEvent {
    let gesture = |g| InputEvent::gesture(time, g);
    match terminal {
        Terminal::Deixis => {
            let target = scene.objects.first().map(|o| o.position).unwrap_or_default();
            let origin = scene.human_viewpoint;
            gesture(Gesture::Deixis {
                origin,
                direction: target.sub(origin),
            })
        }
        Terminal::StaticIconic => gesture(Gesture::IconicStatic {
            shape_id: FUZZ_SHAPE.into(),
        }),
        Terminal::DynamicIconic => gesture(Gesture::IconicDynamic {
            motion_id: "sweep".into(),
        }),
        Terminal::Yes => gesture(Gesture::Head { polarity: Polarity::Yes }),
        Terminal::No => gesture(Gesture::Head { polarity: Polarity::No }),
        Terminal::Noun => InputEvent::utterance(time, "The plate."),
        Terminal::Verb => InputEvent::utterance(time, "Put it there."),
        Terminal::Prep => InputEvent::utterance(time, "On the plate."),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub max_len: usize,
    pub count: usize,
    pub seed: u64,
    pub sequences: usize,
    pub events: usize,
    pub dead_inputs: usize,
    pub compose_errors: usize,
    pub underflows: usize,
    pub budget_exhausted: usize,
    pub invariant_violations: usize,
    pub moves: BTreeMap<String, usize>,
    pub examples: Vec<String>,
}

impl FuzzReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn clean(&self) -> bool {
        self.dead_inputs == 0 && self.underflows == 0 && self.invariant_violations == 0
    }
}

fn fuzz_session(scene: &Scene, seed: u64) -> Session {
    let mut world = World::new(scene.clone());
    let first = scene.objects.first().map(|o| o.id.clone()).unwrap_or_default();
    let bound_form = world
        .actions
        .instantiate("grasp", vec![Ok(Value::Object(first))])
        .expect("grasp is a predicate");
    world
        .gestures
        .bind(GestureLexiconEntry {
            shape_id: FUZZ_SHAPE.into(),
            bound_form,
            pose: None,
            learned_at: 0,
        })
        .expect("fresh lexicon");
    let machine = build_interaction_machine().restrict(Mode::Dpda).expect("shipped machine is deterministic");
    Session::new(Arc::new(machine), world, seed)
}

/// Invariants that must hold after every event.
pub fn check_invariants(session: &Session, moves: &[crate::moves::AgentMove]) -> Vec<String> {
    let mut out = Vec::new();
    let config = session.config();
    if config.stack.is_empty() {
        out.push("empty stack".into());
    }
    if !session.machine().states().contains(&config.state) {
        out.push(format!("unknown state {}", config.state));
    }
    if matches!(config.state.as_str(), "Compose" | "Execute") {
        out.push(format!("came to rest in {}", config.state));
    }
    if config.held() != session.world().held() {
        out.push("held set on the stack differs from the scene".into());
    }
    for m in moves {
        if m.kind == MoveKind::Action && !m.action_record.as_ref().is_some_and(|r| r.is_saturated()) {
            out.push(format!("action without saturated record: {m}"));
        }
        if m.kind == MoveKind::Question && m.named_candidate.is_none() {
            out.push(format!("question without candidate: {m}"));
        }
    }
    if let Some(last) = moves.last() {
        if last.kind == MoveKind::Question && last.named_candidate.as_ref() != config.top().candidates.first() {
            out.push("question does not name the head candidate".into());
        }
    }
    let executed = moves
        .iter()
        .any(|m| m.kind == MoveKind::Action && m.action_record.as_ref().is_some_and(|r| r.head != "reach"));
    if executed && config.depth() != 1 {
        out.push(format!("stack depth {} after an action", config.depth()));
    }
    out
}

/// Runs `count` sampled sentences of length at most `max_len` through fresh
/// sessions on [`fuzz_scene`].
pub fn fuzz(max_len: usize, count: usize, seed: u64) -> Result<FuzzReport, GenerateError> {
    let sentences = generate(max_len, count, seed)?;
    let scene = fuzz_scene();
    let mut report = FuzzReport {
        max_len,
        count,
        seed,
        sequences: sentences.len(),
        events: 0,
        dead_inputs: 0,
        compose_errors: 0,
        underflows: 0,
        budget_exhausted: 0,
        invariant_violations: 0,
        moves: BTreeMap::new(),
        examples: Vec::new(),
    };
    for (i, sentence) in sentences.iter().enumerate() {
        let mut session = fuzz_session(&scene, seed);
        let symbols: String = sentence.iter().map(|t| t.symbol()).collect::<Vec<_>>().join(" ");
        for (k, &t) in sentence.iter().enumerate() {
            report.events += 1;
            let turn = session.handle(&synthesize(&scene, t, k as u64));
            for m in &turn.moves {
                *report.moves.entry(m.kind.to_string()).or_default() += 1;
            }
            for e in &turn.errors {
                match e {
                    TurnError::DeadInput { state, input } => {
                        report.dead_inputs += 1;
                        if report.examples.len() < EXAMPLE_LIMIT {
                            report.examples.push(format!("#{i} [{symbols}]: dead input {input} in {state}"));
                        }
                    }
                    TurnError::Underflow { .. } => report.underflows += 1,
                    TurnError::BudgetExhausted { .. } => report.budget_exhausted += 1,
                    TurnError::Compose { .. } | TurnError::Unrecognized { .. } => report.compose_errors += 1,
                }
            }
            for v in check_invariants(&session, &turn.moves) {
                report.invariant_violations += 1;
                if report.examples.len() < EXAMPLE_LIMIT {
                    report.examples.push(format!("#{i} [{symbols}] at {k}: {v}"));
                }
            }
        }
    }
    Ok(report)
}
