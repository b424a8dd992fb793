use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gestures::{learn_gesture, GestureLexiconEntry, LearnError};
use super::World;
use crate::automaton::{Configuration, ContextFrame, Input, Machine, StepError, TraceEntry};
use crate::grammar::{classify_event, InputEvent};
use crate::moves::AgentMove;
use crate::scene::Scene;

const DEMONSTRATION_WINDOW: usize = 64;

/// Something that went wrong while handling one event. Each one is also
/// reported to the human as a confusion move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TurnError {
    Unrecognized { message: String },
    DeadInput { state: String, input: String },
    Compose { message: String },
    Underflow { state: String },
    BudgetExhausted { state: String },
}

/// The agent's response to one human event.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Turn {
    pub moves: Vec<AgentMove>,
    pub errors: Vec<TurnError>,
}

/// One human's dialogue with the agent over a scene.
pub struct Session {
    machine: Arc<Machine<World>>,
    world: World,
    initial_scene: Scene,
    config: Configuration,
    seed: u64,
    rng: ChaCha8Rng,
    demonstration: Vec<InputEvent>,
    clock: u64,
}

impl Session {
    pub fn new(machine: Arc<Machine<World>>, world: World, seed: u64) -> Session {
        let config = Configuration::with_frame(machine.start(), ContextFrame::bottom(world.held()));
        Session {
            initial_scene: world.scene.clone(),
            machine,
            world,
            config,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            demonstration: Vec::new(),
            clock: 0,
        }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn world_mut(&mut self) -> &mut World {
        &mut self.world
    }

    pub fn machine(&self) -> &Machine<World> {
        &self.machine
    }

    /// Restores the scene as loaded and an empty context. Learned gestures stay.
    pub fn reset(&mut self) {
        self.world.scene = self.initial_scene.clone();
        self.config = Configuration::with_frame(self.machine.start(), ContextFrame::bottom(self.world.held()));
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.demonstration.clear();
    }

    /// Classifies the event and feeds each of its terminals in order.
    pub fn handle(&mut self, event: &InputEvent) -> Turn {
        self.clock = self.clock.max(event.time);
        self.demonstration.push(event.clone());
        if self.demonstration.len() > DEMONSTRATION_WINDOW {
            self.demonstration.remove(0);
        }
        match classify_event(&self.world.lexicon, event) {
            Ok(items) => {
                let mut turn = Turn::default();
                for item in items {
                    let t = self.feed(&Input::terminal(item.terminal, Some(item.content)));
                    turn.moves.extend(t.moves);
                    turn.errors.extend(t.errors);
                }
                turn
            }
            Err(e) => Turn {
                moves: vec![AgentMove::confusion(&self.world.templates.not_understood)],
                errors: vec![TurnError::Unrecognized { message: e.to_string() }],
            },
        }
    }

    /// Feeds one already classified input.
    pub fn feed(&mut self, input: &Input) -> Turn {
        let mut trace = Vec::new();
        self.machine
            .feed(&mut self.world, &mut self.config, input, &mut self.rng, &mut trace);
        let mut turn = Turn::default();
        let confused = |t: &World| AgentMove::confusion(&t.templates.not_understood);
        for entry in trace {
            match entry {
                TraceEntry::Move(m) => turn.moves.push(m),
                TraceEntry::Error(StepError::Compose(message)) => {
                    turn.moves.push(AgentMove::confusion(&message));
                    turn.errors.push(TurnError::Compose { message });
                }
                TraceEntry::Error(StepError::DeadInput { state, input }) => {
                    turn.moves.push(confused(&self.world));
                    turn.errors.push(TurnError::DeadInput {
                        state,
                        input: input.to_string(),
                    });
                }
                TraceEntry::Error(StepError::Underflow(state)) => {
                    turn.moves.push(confused(&self.world));
                    turn.errors.push(TurnError::Underflow { state });
                }
                TraceEntry::BudgetExhausted { state } => {
                    turn.moves.push(confused(&self.world));
                    turn.errors.push(TurnError::BudgetExhausted { state });
                }
            }
        }
        turn
    }

    /// Learns `shape_id` from the events seen since the last lesson.
    pub fn learn_gesture(&mut self, shape_id: &str) -> Result<(GestureLexiconEntry, AgentMove), LearnError> {
        let entry = learn_gesture(&self.world, shape_id, &self.demonstration, self.clock)?;
        self.world.gestures.bind(entry.clone())?;
        self.demonstration.clear();
        Ok((entry, AgentMove::ack(&self.world.templates.learned)))
    }
}
