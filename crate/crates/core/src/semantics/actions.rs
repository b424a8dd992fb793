//! Declarative predicate table: arity, slot types and precondition schemas.

use serde::{Deserialize, Serialize};

use super::{CompositionError, Hole, SemType, SemanticForm, Slot, Value};

/// `put(x, y) <= grasp(x)`: the named predicate applied to the value in
/// `slot` must hold before the action runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Precondition {
    pub head: String,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateEntry {
    pub name: String,
    pub slots: Vec<SemType>,
    pub result: SemType,
    #[serde(default)]
    pub precondition: Option<Precondition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionTable {
    pub predicates: Vec<PredicateEntry>,
}

const DEFAULT_ACTIONS: &str = include_str!("../../data/actions.json");

impl Default for ActionTable {
    fn default() -> Self {
        ActionTable::from_json(DEFAULT_ACTIONS).expect("bundled action table parses")
    }
}

impl ActionTable {
    pub fn from_json(text: &str) -> Result<ActionTable, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn get(&self, name: &str) -> Option<&PredicateEntry> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn precondition(&self, name: &str) -> Option<&Precondition> {
        self.get(name).and_then(|p| p.precondition.as_ref())
    }

    /// Builds `head(args...)`, leaving a named hole wherever an argument is
    /// `Err(name)`. Holes are bound in order of appearance.
    pub fn instantiate(&self, head: &str, args: Vec<Result<Value, &str>>) -> Result<SemanticForm, CompositionError> {
        let entry = self
            .get(head)
            .ok_or_else(|| CompositionError::UnknownPredicate(head.to_string()))?;
        if entry.slots.len() != args.len() {
            return Err(CompositionError::Arity {
                head: head.to_string(),
                expected: entry.slots.len(),
                found: args.len(),
            });
        }
        let slots = entry
            .slots
            .iter()
            .zip(args)
            .map(|(ty, arg)| match arg {
                Ok(v) => {
                    let found = match &v {
                        Value::Form(f) => Some(f.result.clone()),
                        other => other.sem_type(),
                    };
                    if found.as_ref() != Some(ty) {
                        return Err(CompositionError::TypeMismatch {
                            expected: ty.clone(),
                            found,
                        });
                    }
                    Ok(Slot::Filled(v))
                }
                Err(name) => Ok(Slot::Hole(Hole {
                    name: name.to_string(),
                    ty: ty.clone(),
                })),
            })
            .collect::<Result<Vec<_>, _>>()?;
        SemanticForm::new(head, slots, entry.result.clone())
    }
}
