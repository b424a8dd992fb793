//! Surface templates and question generation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DialogueError, World};
use crate::automaton::ContextFrame;
use crate::grammar::NounPhrase;
use crate::moves::AgentMove;
use crate::scene::Scene;
use crate::semantics::{SemType, SemanticForm, Slot, Value};

/// Agent surface strings. Placeholders are written `{name}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Templates {
    pub go_on: String,
    pub done: String,
    pub ok: String,
    pub never_mind: String,
    pub ask_theme: String,
    pub ask_destination: String,
    pub ask_point: String,
    /// One question per action predicate, keyed by head.
    pub propose: BTreeMap<String, String>,
    pub propose_theme: String,
    pub propose_object: String,
    pub exhausted: String,
    pub unknown_gesture: String,
    pub not_understood: String,
    pub not_seen: String,
    pub bad_pointing: String,
    pub cannot_grasp: String,
    pub out_of_reach: String,
    pub learned: String,
}

const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.json");

impl Default for Templates {
    fn default() -> Self {
        Templates::from_json(DEFAULT_TEMPLATES).expect("bundled templates parse")
    }
}

impl Templates {
    pub fn from_json(text: &str) -> Result<Templates, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Substitutes `{key}` placeholders.
pub fn fill_template(template: &str, vars: &[(&str, &str)]) -> String {
    vars.iter()
        .fold(template.to_string(), |acc, (k, v)| acc.replace(&format!("{{{k}}}"), v))
}

/// A definite description of a value, e.g. "the blue cup".
pub fn describe(scene: &Scene, value: &Value) -> String {
    match value {
        Value::Object(id) => match scene.object(id) {
            Some(o) => {
                let mut words = vec!["the".to_string()];
                words.extend(o.attributes.iter().cloned());
                words.push(o.kind.clone());
                words.join(" ")
            }
            None => id.clone(),
        },
        Value::Agent => "you".into(),
        Value::Location(_) | Value::Region(_) | Value::Deixis(_) => "that spot".into(),
        Value::Form(f) => f.to_string(),
    }
}

/// An indefinite description of what a noun phrase asks for.
pub fn describe_np(np: &NounPhrase) -> String {
    let mut words: Vec<&str> = np.attributes.iter().map(String::as_str).collect();
    match &np.noun {
        Some(n) => words.push(n),
        None if words.is_empty() => return "anything there".into(),
        None => words.push("thing"),
    }
    format!("any {}", words.join(" "))
}

pub(crate) fn relation_words(relation: &str) -> &str {
    match relation {
        "front_of" => "in front of",
        other => other,
    }
}

/// The form whose own arguments contain the named hole.
pub(crate) fn hole_parent<'a>(form: &'a SemanticForm, name: &str) -> Option<&'a SemanticForm> {
    for slot in &form.args {
        match slot {
            Slot::Hole(h) if h.name == name => return Some(form),
            Slot::Filled(Value::Form(inner)) => {
                if let Some(p) = hole_parent(inner, name) {
                    return Some(p);
                }
            }
            _ => {}
        }
    }
    None
}

pub(crate) fn verb_word(world: &World, lemma: &str) -> String {
    world
        .lexicon
        .verb_by_lemma(lemma)
        .and_then(|v| v.forms.first().cloned())
        .unwrap_or_else(|| lemma.to_string())
}

/// Asks about the head candidate of `frame`, phrased from the pending
/// action with that candidate in its outermost hole.
pub fn propose_candidate(world: &World, frame: &ContextFrame) -> Result<AgentMove, DialogueError> {
    let candidate = frame.candidates.first().ok_or(DialogueError::NoCandidates)?;
    let t = &world.templates;
    let named = describe(&world.scene, candidate);
    let object_question = || fill_template(&t.propose_object, &[("candidate", &named)]);
    let text = match &frame.pending_form {
        None => object_question(),
        Some(form) => match form.next_hole() {
            None => object_question(),
            Some(hole) => {
                let parent = hole_parent(form, &hole.name);
                let top_level = parent.is_some_and(|p| std::ptr::eq(p, form));
                let verb = verb_word(world, &form.head);
                if top_level && hole.ty == SemType::Entity {
                    fill_template(&t.propose_theme, &[("verb", &verb), ("candidate", &named)])
                } else {
                    let relation = match parent {
                        Some(p) if !top_level => relation_words(&p.head),
                        _ => "at",
                    };
                    match t.propose.get(&form.head) {
                        Some(tpl) => fill_template(
                            tpl,
                            &[("verb", &verb), ("theme", "it"), ("relation", relation), ("candidate", &named)],
                        ),
                        None => object_question(),
                    }
                }
            }
        },
    };
    Ok(AgentMove::question(text, candidate.clone()))
}

/// Prompt for whatever the pending action still lacks.
pub fn ask_pending(world: &World, frame: &ContextFrame) -> AgentMove {
    let t = &world.templates;
    let Some(form) = &frame.pending_form else {
        return AgentMove::ack(&t.ok);
    };
    let Some(hole) = form.next_hole() else {
        return AgentMove::ack(&t.ok);
    };
    let verb = verb_word(world, &form.head);
    let top_level = hole_parent(form, &hole.name).is_some_and(|p| std::ptr::eq(p, form));
    let text = match (&hole.ty, top_level) {
        (SemType::Entity, true) => fill_template(&t.ask_theme, &[("verb", &verb)]),
        (SemType::Location, _) => fill_template(&t.ask_destination, &[("verb", &verb), ("theme", "it")]),
        _ => t.ask_point.clone(),
    };
    AgentMove::ack(text)
}
