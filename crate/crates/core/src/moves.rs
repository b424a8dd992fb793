use std::fmt;

use serde::{Deserialize, Serialize};

use crate::semantics::{SemanticForm, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Ack,
    Question,
    Action,
    Confusion,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Ack => "ack",
            MoveKind::Question => "question",
            MoveKind::Action => "action",
            MoveKind::Confusion => "confusion",
        })
    }
}

/// One contribution by the agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMove {
    pub kind: MoveKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_record: Option<SemanticForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named_candidate: Option<Value>,
}

impl AgentMove {
    pub fn ack(text: impl Into<String>) -> Self {
        AgentMove {
            kind: MoveKind::Ack,
            text: text.into(),
            action_record: None,
            named_candidate: None,
        }
    }

    pub fn confusion(text: impl Into<String>) -> Self {
        AgentMove {
            kind: MoveKind::Confusion,
            text: text.into(),
            action_record: None,
            named_candidate: None,
        }
    }

    pub fn question(text: impl Into<String>, candidate: Value) -> Self {
        AgentMove {
            kind: MoveKind::Question,
            text: text.into(),
            action_record: None,
            named_candidate: Some(candidate),
        }
    }

    /// An executed action. The record must be saturated.
    pub fn action(text: impl Into<String>, record: SemanticForm) -> Self {
        debug_assert!(record.is_saturated());
        AgentMove {
            kind: MoveKind::Action,
            text: text.into(),
            action_record: Some(record),
            named_candidate: None,
        }
    }
}

impl fmt::Display for AgentMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.kind, self.text)?;
        if let Some(r) = &self.action_record {
            write!(f, " <{r}>")?;
        }
        Ok(())
    }
}
