use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::DeixisTarget;
use crate::semantics::{SemanticForm, Value};

/// A stack symbol: the situational context of one discourse segment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContextFrame {
    pub indicated: Option<DeixisTarget>,
    pub held: BTreeSet<String>,
    pub candidates: Vec<Value>,
    pub pending_form: Option<SemanticForm>,
    /// Referent of "it".
    pub focus: Option<String>,
    pub origin_state: Option<String>,
}

impl ContextFrame {
    /// A frame holding only what persists physically.
    pub fn bottom(held: BTreeSet<String>) -> Self {
        ContextFrame {
            held,
            ..ContextFrame::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StackOp {
    None,
    Push(ContextFrame),
    Pop,
    Rewrite(ContextFrame),
    Flush,
    PopUntil(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum StackError {
    #[error("pop on the bottom frame with no candidates left")]
    Underflow,
}

/// Machine state, stack (top last) and the per-episode record of
/// `(state entered, top frame at entry)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub state: String,
    pub stack: Vec<ContextFrame>,
    pub history: Vec<(String, ContextFrame)>,
}

impl Configuration {
    pub fn new(start: impl Into<String>) -> Self {
        Self::with_frame(start, ContextFrame::default())
    }

    pub fn with_frame(start: impl Into<String>, frame: ContextFrame) -> Self {
        let state = start.into();
        Configuration {
            history: vec![(state.clone(), frame.clone())],
            state,
            stack: vec![frame],
        }
    }

    pub fn top(&self) -> &ContextFrame {
        self.stack.last().expect("stack never empties")
    }

    pub fn top_mut(&mut self) -> &mut ContextFrame {
        self.stack.last_mut().expect("stack never empties")
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    /// Union of the held sets of every frame.
    pub fn held(&self) -> BTreeSet<String> {
        self.stack.iter().flat_map(|f| f.held.iter().cloned()).collect()
    }

    fn record_entry(&mut self) {
        let top = self.top().clone();
        self.history.push((self.state.clone(), top));
    }

    /// Moves to `state`, recording the entry.
    pub fn enter(&mut self, state: &str) {
        self.state = state.to_string();
        self.record_entry();
    }

    /// Whether a `Pop` would succeed right now.
    pub fn can_pop(&self) -> bool {
        self.depth() > 1 || !self.top().candidates.is_empty()
    }
}

/// Applies one stack operation, returning the new configuration.
///
/// `Pop` on the bottom frame advances its candidate list instead. `Flush`
/// leaves a single frame that keeps only the union of held objects and ends
/// the episode's history. `PopUntil(s)` pops back to the frame recorded at
/// the latest entry into `s`, restoring it onto the bottom frame if it was
/// overwritten, and is a `Flush` when `s` was never entered.
pub fn exec_stack_op(config: &Configuration, op: &StackOp) -> Result<Configuration, StackError> {
    let mut out = config.clone();
    match op {
        StackOp::None => {}
        StackOp::Push(f) => out.stack.push(f.clone()),
        StackOp::Rewrite(f) => *out.top_mut() = f.clone(),
        StackOp::Pop => {
            if out.depth() > 1 {
                out.stack.pop();
            } else if !out.top().candidates.is_empty() {
                out.top_mut().candidates.remove(0);
            } else {
                return Err(StackError::Underflow);
            }
        }
        StackOp::Flush => flush(&mut out),
        StackOp::PopUntil(state) => {
            let snapshot = out
                .history
                .iter()
                .rev()
                .find(|(s, _)| s == state)
                .map(|(_, f)| f.clone());
            match snapshot {
                None => flush(&mut out),
                Some(snap) => {
                    while out.depth() > 1 && *out.top() != snap {
                        out.stack.pop();
                    }
                    if *out.top() != snap {
                        *out.top_mut() = snap;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn flush(config: &mut Configuration) {
    let held = config.held();
    config.stack = vec![ContextFrame::bottom(held)];
    config.history.clear();
}
