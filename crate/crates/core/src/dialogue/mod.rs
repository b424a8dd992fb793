//! The interaction machine: deixis interpretation, the guarded
//! disambiguation loop, composition on transitions, one-shot gesture
//! learning, and the agent's moves.

mod compose;
mod execute;
mod gestures;
mod render;
mod session;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::automaton::{Machine, MachineDef, Registry};
use crate::grammar::Lexicon;
use crate::moves::AgentMove;
use crate::scene::Scene;
use crate::semantics::ActionTable;

pub use execute::{execute_action, resolve_location};
pub use gestures::{learn_gesture, GestureLexicon, GestureLexiconEntry, LearnError};
pub use render::{ask_pending, describe, describe_np, fill_template, propose_candidate, Templates};
pub use session::{Session, Turn, TurnError};

/// Holder id the agent uses in `WorldObject::held_by`.
pub const AGENT_ID: &str = "agent";

const MACHINE_JSON: &str = include_str!("../../data/interaction_machine.json");

#[derive(Debug, Error, PartialEq)]
pub enum DialogueError {
    #[error("no candidate to ask about")]
    NoCandidates,
}

/// Everything compose functions read or change besides the stack.
#[derive(Debug, Clone)]
pub struct World {
    pub scene: Scene,
    pub lexicon: Lexicon,
    pub actions: ActionTable,
    pub gestures: GestureLexicon,
    pub templates: Templates,
}

impl World {
    /// A world over `scene` with the bundled vocabulary and templates.
    pub fn new(scene: Scene) -> World {
        World {
            scene,
            lexicon: Lexicon::default(),
            actions: ActionTable::default(),
            gestures: GestureLexicon::default(),
            templates: Templates::default(),
        }
    }

    /// Objects the agent is holding.
    pub fn held(&self) -> BTreeSet<String> {
        self.scene
            .objects
            .iter()
            .filter(|o| o.held_by.as_deref() == Some(AGENT_ID))
            .map(|o| o.id.clone())
            .collect()
    }
}

/// The compose and emit functions the shipped machine refers to.
pub fn interaction_registry() -> Registry<World> {
    let mut r = Registry::default();
    r.compose("start_action", compose::start_action)
        .compose("object_phrase", compose::object_phrase)
        .compose("fill_destination", compose::fill_destination)
        .compose("indicate", compose::indicate)
        .compose("indicate_object", compose::indicate_object)
        .compose("point_object", compose::point_object)
        .compose("shape_gesture", compose::shape_gesture)
        .compose("apply_indicated_location", compose::apply_indicated_location)
        .compose("compute_candidates", compose::compute_candidates)
        .compose("reject_candidate", compose::reject_candidate)
        .compose("accept_candidate", compose::accept_candidate)
        .compose("repoint", compose::repoint)
        .compose("refine_candidates", compose::refine_candidates)
        .compose("execute", compose::execute);
    r.emit("ok", |w: &World, _| Some(AgentMove::ack(&w.templates.ok)))
        .emit("never_mind", |w: &World, _| Some(AgentMove::ack(&w.templates.never_mind)))
        .emit("propose", |w: &World, f| propose_candidate(w, f).ok())
        .emit("ask_pending", |w: &World, f| Some(ask_pending(w, f)))
        .emit("exhausted", |w: &World, _| Some(AgentMove::confusion(&w.templates.exhausted)));
    r
}

/// The shipped machine definition.
pub fn interaction_machine_definition() -> MachineDef {
    serde_json::from_str(MACHINE_JSON).expect("bundled machine parses")
}

/// The interaction machine, in NPDA mode. It does not depend on the scene.
pub fn build_interaction_machine() -> Machine<World> {
    Machine::from_json(MACHINE_JSON, &interaction_registry()).expect("bundled machine is well formed")
}
