//! Extended nondeterministic pushdown automaton with guarded, weighted
//! transitions over context frames, and its DPDA/NFA/DFA restrictions.

mod guard;
mod stack;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{Content, Terminal};
use crate::moves::AgentMove;

pub use guard::Guard;
pub use stack::{exec_stack_op, Configuration, ContextFrame, StackError, StackOp};

/// Upper bound on ε-transitions taken after a single input.
pub const EPSILON_BUDGET: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InputClass {
    Epsilon,
    Terminal(Terminal),
}

impl TryFrom<String> for InputClass {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "ε" || s == "eps" || s == "epsilon" {
            return Ok(InputClass::Epsilon);
        }
        serde_json::from_value(serde_json::Value::String(s.clone()))
            .map(InputClass::Terminal)
            .map_err(|_| format!("unknown input class {s:?}"))
    }
}

impl From<InputClass> for String {
    fn from(c: InputClass) -> String {
        c.to_string()
    }
}

impl fmt::Display for InputClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputClass::Epsilon => f.write_str("ε"),
            InputClass::Terminal(t) => write!(f, "{t}"),
        }
    }
}

/// A classified move as the machine consumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub class: InputClass,
    pub content: Option<Content>,
}

impl Input {
    pub fn epsilon() -> Self {
        Input {
            class: InputClass::Epsilon,
            content: None,
        }
    }

    pub fn terminal(t: Terminal, content: Option<Content>) -> Self {
        Input {
            class: InputClass::Terminal(t),
            content,
        }
    }
}

/// Stack operation named by a transition. The frame for `push` and
/// `rewrite` comes from the transition's compose function, or is the
/// current top when there is none.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StackOpKind {
    #[default]
    None,
    Push,
    Pop,
    Rewrite,
    Flush,
    PopUntil(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Npda,
    Dpda,
    Nfa,
    Dfa,
}

impl Mode {
    pub fn is_deterministic(self) -> bool {
        matches!(self, Mode::Dpda | Mode::Dfa)
    }

    pub fn is_finite_state(self) -> bool {
        matches!(self, Mode::Nfa | Mode::Dfa)
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "npda" => Ok(Mode::Npda),
            "dpda" => Ok(Mode::Dpda),
            "nfa" => Ok(Mode::Nfa),
            "dfa" => Ok(Mode::Dfa),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Result of a compose function: the frame the stack operation uses, plus
/// any moves the composition itself produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub frame: ContextFrame,
    pub moves: Vec<AgentMove>,
}

impl Composed {
    pub fn frame(frame: ContextFrame) -> Self {
        Composed {
            frame,
            moves: Vec::new(),
        }
    }
}

/// The continuation run when a transition fires.
pub type ComposeFn<E> = dyn Fn(&mut E, &ContextFrame, &Input) -> Result<Composed, String> + Send + Sync;
/// Renders a move from the top frame after the transition.
pub type EmitFn<E> = dyn Fn(&E, &ContextFrame) -> Option<AgentMove> + Send + Sync;

/// Named compose and emit functions that machine definitions refer to.
pub struct Registry<E> {
    compose: BTreeMap<String, Arc<ComposeFn<E>>>,
    emit: BTreeMap<String, Arc<EmitFn<E>>>,
}

impl<E> Default for Registry<E> {
    fn default() -> Self {
        Registry {
            compose: BTreeMap::new(),
            emit: BTreeMap::new(),
        }
    }
}

impl<E> Registry<E> {
    pub fn compose(
        &mut self,
        name: &str,
        f: impl Fn(&mut E, &ContextFrame, &Input) -> Result<Composed, String> + Send + Sync + 'static,
    ) -> &mut Self {
        self.compose.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn emit(
        &mut self,
        name: &str,
        f: impl Fn(&E, &ContextFrame) -> Option<AgentMove> + Send + Sync + 'static,
    ) -> &mut Self {
        self.emit.insert(name.to_string(), Arc::new(f));
        self
    }
}

/// On-disk transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDef {
    pub from: String,
    pub input: InputClass,
    #[serde(default)]
    pub guard: Guard,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default)]
    pub op: StackOpKind,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compose: Option<String>,
}

fn unit_weight() -> f64 {
    1.0
}

/// On-disk machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDef {
    pub start: String,
    pub states: Vec<String>,
    pub transitions: Vec<RuleDef>,
}

pub struct TransitionRule<E> {
    pub def: RuleDef,
    compose: Option<Arc<ComposeFn<E>>>,
    emit: Option<Arc<EmitFn<E>>>,
}

impl<E> Clone for TransitionRule<E> {
    fn clone(&self) -> Self {
        TransitionRule {
            def: self.def.clone(),
            compose: self.compose.clone(),
            emit: self.emit.clone(),
        }
    }
}

impl<E> TransitionRule<E> {
    fn label(&self, index: usize) -> String {
        format!("#{index} {} --{}--> {}", self.def.from, self.def.input, self.def.to)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DefinitionError {
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown compose function {0:?}")]
    UnknownCompose(String),
    #[error("unknown emit template {0:?}")]
    UnknownEmit(String),
    #[error("weight {weight} of {rule} is outside (0, 1]")]
    Weight { rule: String, weight: f64 },
    #[error("bad machine definition: {0}")]
    Parse(String),
}

#[derive(Debug, Error, PartialEq)]
#[error("machine violates {mode:?} restrictions: {}", summarize(.offending))]
pub struct ModeError {
    pub mode: Mode,
    pub offending: Vec<String>,
}

fn summarize(offending: &[String]) -> String {
    const SHOWN: usize = 3;
    let mut out = offending.iter().take(SHOWN).cloned().collect::<Vec<_>>().join("; ");
    if offending.len() > SHOWN {
        out.push_str(&format!("; and {} more", offending.len() - SHOWN));
    }
    out
}

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum StepError {
    #[error("no transition from {state} on {input}")]
    DeadInput { state: String, input: InputClass },
    #[error("{0}")]
    Compose(String),
    #[error("stack underflow in {0}")]
    Underflow(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEntry {
    Move(AgentMove),
    Error(StepError),
    /// ε-transitions were still enabled after `EPSILON_BUDGET` of them.
    BudgetExhausted { state: String },
}

pub struct Machine<E> {
    start: String,
    states: BTreeSet<String>,
    rules: Vec<TransitionRule<E>>,
    mode: Mode,
}

impl<E> Clone for Machine<E> {
    fn clone(&self) -> Self {
        Machine {
            start: self.start.clone(),
            states: self.states.clone(),
            rules: self.rules.clone(),
            mode: self.mode,
        }
    }
}

impl<E> fmt::Debug for Machine<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Machine")
            .field("start", &self.start)
            .field("states", &self.states)
            .field("rules", &self.rules.iter().map(|r| &r.def).collect::<Vec<_>>())
            .field("mode", &self.mode)
            .finish()
    }
}

impl<E> Machine<E> {
    /// Binds a definition to the registry's functions. The result is in
    /// NPDA mode; see [`Machine::restrict`].
    pub fn from_def(def: &MachineDef, registry: &Registry<E>) -> Result<Machine<E>, DefinitionError> {
        let states: BTreeSet<String> = def.states.iter().cloned().collect();
        let known = |s: &String| {
            if states.contains(s) {
                Ok(())
            } else {
                Err(DefinitionError::UnknownState(s.clone()))
            }
        };
        known(&def.start)?;
        let mut rules = Vec::with_capacity(def.transitions.len());
        for (i, r) in def.transitions.iter().enumerate() {
            known(&r.from)?;
            known(&r.to)?;
            if let StackOpKind::PopUntil(s) = &r.op {
                known(s)?;
            }
            if !(r.weight > 0.0 && r.weight <= 1.0) {
                return Err(DefinitionError::Weight {
                    rule: format!("#{i} {} --{}--> {}", r.from, r.input, r.to),
                    weight: r.weight,
                });
            }
            let compose = match &r.compose {
                None => None,
                Some(name) => Some(
                    registry
                        .compose
                        .get(name)
                        .cloned()
                        .ok_or_else(|| DefinitionError::UnknownCompose(name.clone()))?,
                ),
            };
            let emit = match &r.emit {
                None => None,
                Some(name) => Some(
                    registry
                        .emit
                        .get(name)
                        .cloned()
                        .ok_or_else(|| DefinitionError::UnknownEmit(name.clone()))?,
                ),
            };
            rules.push(TransitionRule {
                def: r.clone(),
                compose,
                emit,
            });
        }
        Ok(Machine {
            start: def.start.clone(),
            states,
            rules,
            mode: Mode::Npda,
        })
    }

    pub fn from_json(text: &str, registry: &Registry<E>) -> Result<Machine<E>, DefinitionError> {
        let def: MachineDef = serde_json::from_str(text).map_err(|e| DefinitionError::Parse(e.to_string()))?;
        Machine::from_def(&def, registry)
    }

    pub fn definition(&self) -> MachineDef {
        MachineDef {
            start: self.start.clone(),
            states: self.states.iter().cloned().collect(),
            transitions: self.rules.iter().map(|r| r.def.clone()).collect(),
        }
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn rules(&self) -> impl Iterator<Item = &RuleDef> {
        self.rules.iter().map(|r| &r.def)
    }

    pub fn initial(&self) -> Configuration {
        Configuration::new(self.start.clone())
    }

    /// Checks the machine against `mode` and returns it in that mode.
    ///
    /// Deterministic modes need unit weights and pairwise exclusive guards
    /// among transitions sharing a state and input class. Finite-state modes
    /// forbid any stack operation, compose function or frame-reading guard.
    pub fn restrict(mut self, mode: Mode) -> Result<Machine<E>, ModeError> {
        let mut offending = Vec::new();
        if mode.is_finite_state() {
            for (i, r) in self.rules.iter().enumerate() {
                if r.def.op != StackOpKind::None || r.compose.is_some() || !r.def.guard.is_frame_free() {
                    offending.push(format!("{} uses the stack", r.label(i)));
                }
            }
        }
        if mode.is_deterministic() {
            for (i, r) in self.rules.iter().enumerate() {
                if r.def.weight != 1.0 {
                    offending.push(format!("{} has weight {}", r.label(i), r.def.weight));
                }
            }
            for (i, a) in self.rules.iter().enumerate() {
                for (j, b) in self.rules.iter().enumerate().skip(i + 1) {
                    if a.def.from == b.def.from
                        && a.def.input == b.def.input
                        && !a.def.guard.excludes(&b.def.guard)
                    {
                        offending.push(format!("{} overlaps {}", a.label(i), b.label(j)));
                    }
                }
            }
        }
        if offending.is_empty() {
            self.mode = mode;
            Ok(self)
        } else {
            Err(ModeError { mode, offending })
        }
    }

    fn enabled(&self, config: &Configuration, class: InputClass) -> Vec<usize> {
        let top = config.top();
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.def.from == config.state && r.def.input == class && r.def.guard.eval(top))
            .map(|(i, _)| i)
            .collect()
    }

    fn choose(&self, enabled: &[usize], rng: &mut dyn RngCore) -> usize {
        if enabled.len() == 1 {
            return enabled[0];
        }
        if self.mode.is_deterministic() {
            let mut best = enabled[0];
            for &i in &enabled[1..] {
                if self.rules[i].def.weight > self.rules[best].def.weight {
                    best = i;
                }
            }
            return best;
        }
        let weights: Vec<f64> = enabled.iter().map(|&i| self.rules[i].def.weight).collect();
        let dist = WeightedIndex::new(&weights).expect("weights are positive");
        enabled[dist.sample(rng)]
    }

    /// Takes one transition on `input`. On error the configuration is left
    /// untouched. A compose result whose held set differs from the current
    /// top replaces the held set of every frame before the stack operation.
    pub fn step(
        &self,
        env: &mut E,
        config: &mut Configuration,
        input: &Input,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<AgentMove>, StepError> {
        let enabled = self.enabled(config, input.class);
        if enabled.is_empty() {
            return Err(StepError::DeadInput {
                state: config.state.clone(),
                input: input.class,
            });
        }
        let rule = &self.rules[self.choose(&enabled, rng)];
        if rule.def.op == StackOpKind::Pop && !config.can_pop() {
            return Err(StepError::Underflow(config.state.clone()));
        }
        let composed = match &rule.compose {
            Some(f) => f(env, config.top(), input).map_err(StepError::Compose)?,
            None => Composed::frame(config.top().clone()),
        };
        let mut frame = composed.frame;
        let held = frame.held.clone();
        let op = match &rule.def.op {
            StackOpKind::None => StackOp::None,
            StackOpKind::Push => {
                frame.origin_state = Some(rule.def.from.clone());
                StackOp::Push(frame)
            }
            StackOpKind::Rewrite => StackOp::Rewrite(frame),
            StackOpKind::Pop => StackOp::Pop,
            StackOpKind::Flush => StackOp::Flush,
            StackOpKind::PopUntil(s) => StackOp::PopUntil(s.clone()),
        };
        let mut base = config.clone();
        if held != config.top().held {
            for f in &mut base.stack {
                f.held = held.clone();
            }
        }
        let mut next = exec_stack_op(&base, &op).map_err(|_| StepError::Underflow(config.state.clone()))?;
        next.enter(&rule.def.to);
        let mut moves = composed.moves;
        if let Some(emit) = &rule.emit {
            moves.extend(emit(env, next.top()));
        }
        *config = next;
        Ok(moves)
    }

    /// Whether any ε-transition is enabled in `config`.
    pub fn epsilon_enabled(&self, config: &Configuration) -> bool {
        !self.enabled(config, InputClass::Epsilon).is_empty()
    }

    /// Follows enabled ε-transitions until none remain or the budget runs out.
    pub fn settle(
        &self,
        env: &mut E,
        config: &mut Configuration,
        rng: &mut dyn RngCore,
        trace: &mut Vec<TraceEntry>,
    ) {
        let eps = Input::epsilon();
        for taken in 0..=EPSILON_BUDGET {
            if !self.epsilon_enabled(config) {
                return;
            }
            if taken == EPSILON_BUDGET {
                trace.push(TraceEntry::BudgetExhausted {
                    state: config.state.clone(),
                });
                return;
            }
            match self.step(env, config, &eps, rng) {
                Ok(moves) => trace.extend(moves.into_iter().map(TraceEntry::Move)),
                Err(e) => {
                    trace.push(TraceEntry::Error(e));
                    return;
                }
            }
        }
    }

    /// Feeds one input and then settles. Errors become trace entries.
    pub fn feed(
        &self,
        env: &mut E,
        config: &mut Configuration,
        input: &Input,
        rng: &mut dyn RngCore,
        trace: &mut Vec<TraceEntry>,
    ) {
        match self.step(env, config, input, rng) {
            Ok(moves) => trace.extend(moves.into_iter().map(TraceEntry::Move)),
            Err(e) => trace.push(TraceEntry::Error(e)),
        }
        self.settle(env, config, rng, trace);
    }

    /// Left fold of [`Machine::feed`] over `inputs`.
    pub fn run(
        &self,
        env: &mut E,
        config: Configuration,
        inputs: &[Input],
        rng: &mut dyn RngCore,
    ) -> (Configuration, Vec<TraceEntry>) {
        let mut config = config;
        let mut trace = Vec::new();
        for input in inputs {
            self.feed(env, &mut config, input, rng, &mut trace);
        }
        (config, trace)
    }

    fn epsilon_closure(&self, states: BTreeSet<String>) -> BTreeSet<String> {
        let mut closed = states;
        let mut frontier: Vec<String> = closed.iter().cloned().collect();
        while let Some(s) = frontier.pop() {
            for r in &self.rules {
                if r.def.from == s && r.def.input == InputClass::Epsilon && closed.insert(r.def.to.clone()) {
                    frontier.push(r.def.to.clone());
                }
            }
        }
        closed
    }

    /// Set-of-states simulation for finite-state modes: every state
    /// reachable from `from` by reading `inputs`, with ε-closure throughout.
    pub fn reachable(&self, from: &BTreeSet<String>, inputs: &[Terminal]) -> BTreeSet<String> {
        let mut current = self.epsilon_closure(from.clone());
        for &t in inputs {
            let next = self
                .rules
                .iter()
                .filter(|r| current.contains(&r.def.from) && r.def.input == InputClass::Terminal(t))
                .map(|r| r.def.to.clone())
                .collect();
            current = self.epsilon_closure(next);
        }
        current
    }
}
