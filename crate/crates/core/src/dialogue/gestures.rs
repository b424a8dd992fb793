//! Iconic gesture vocabulary and one-shot learning of grasp gestures.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::World;
use crate::grammar::{classify_event, Content, Landmark, NounPhrase, Phrase, Theme, InputEvent};
use crate::scene::Scene;
use crate::semantics::{ActionTable, SemanticForm, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureLexiconEntry {
    pub shape_id: String,
    pub bound_form: SemanticForm,
    /// Hand pose the form was demonstrated with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<String>,
    pub learned_at: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("gesture {0:?} is already bound; unlearn it first")]
    Rebind(String),
    #[error("incomplete demonstration: {0}")]
    IncompleteDemonstration(String),
    #[error("bad gesture lexicon: {0}")]
    Invalid(String),
    #[error("gesture lexicon file: {0}")]
    Io(String),
}

/// Static shapes learned during sessions and the fixed motion vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureLexicon {
    /// Dynamic gesture id to the action lemma it mimes.
    #[serde(default)]
    pub motions: BTreeMap<String, String>,
    #[serde(default)]
    pub entries: Vec<GestureLexiconEntry>,
}

const DEFAULT_GESTURES: &str = include_str!("../../data/gestures.json");

impl Default for GestureLexicon {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_GESTURES).expect("bundled gesture lexicon parses")
    }
}

impl GestureLexicon {
    pub fn get(&self, shape_id: &str) -> Option<&GestureLexiconEntry> {
        self.entries.iter().find(|e| e.shape_id == shape_id)
    }

    pub fn motion(&self, motion_id: &str) -> Option<&str> {
        self.motions.get(motion_id).map(String::as_str)
    }

    pub fn bind(&mut self, entry: GestureLexiconEntry) -> Result<(), LearnError> {
        if self.get(&entry.shape_id).is_some() {
            return Err(LearnError::Rebind(entry.shape_id));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn unlearn(&mut self, shape_id: &str) -> Option<GestureLexiconEntry> {
        let i = self.entries.iter().position(|e| e.shape_id == shape_id)?;
        Some(self.entries.remove(i))
    }

    /// Shape ids are unique and every bound head is a known predicate.
    pub fn validate(&self, actions: &ActionTable) -> Result<(), LearnError> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(&e.shape_id) {
                return Err(LearnError::Invalid(format!("duplicate shape {:?}", e.shape_id)));
            }
            if actions.get(&e.bound_form.head).is_none() {
                return Err(LearnError::Invalid(format!("unknown predicate {:?}", e.bound_form.head)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicon serializes")
    }

    pub fn from_json(text: &str, actions: &ActionTable) -> Result<GestureLexicon, LearnError> {
        let lex: GestureLexicon = serde_json::from_str(text).map_err(|e| LearnError::Invalid(e.to_string()))?;
        lex.validate(actions)?;
        Ok(lex)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| LearnError::Io(e.to_string()))
    }

    pub fn load(path: &Path, actions: &ActionTable) -> Result<GestureLexicon, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|e| LearnError::Io(e.to_string()))?;
        GestureLexicon::from_json(&text, actions)
    }
}

fn unique(scene: &Scene, pool: &[String], np: &NounPhrase) -> Option<String> {
    match scene.filter_by_description(pool, np.noun.as_deref(), &np.attributes).as_slice() {
        [one] => Some(one.clone()),
        _ => None,
    }
}

/// Reads a demonstration for an object referent (by pointing or by name)
/// and a grasp action, and binds `shape_id` to `grasp(referent)`. The
/// latest referent wins. Binds the specific object, not its kind.
pub fn learn_gesture(
    world: &World,
    shape_id: &str,
    demonstration: &[InputEvent],
    learned_at: u64,
) -> Result<GestureLexiconEntry, LearnError> {
    if world.gestures.get(shape_id).is_some() {
        return Err(LearnError::Rebind(shape_id.to_string()));
    }
    let scene = &world.scene;
    let all = scene.object_ids();
    let mut region: Option<Vec<String>> = None;
    let mut referent: Option<String> = None;
    let mut grasped = false;
    let ground = |np: &NounPhrase, region: &Option<Vec<String>>| match (np.is_deictic(), region) {
        (true, Some(r)) if np.noun.is_none() && np.attributes.is_empty() => r.first().cloned(),
        (true, Some(r)) => unique(scene, r, np),
        _ => unique(scene, &all, np),
    };
    for event in demonstration {
        let Ok(items) = classify_event(&world.lexicon, event) else { continue };
        for item in items {
            match item.content {
                Content::Pointing { origin, direction } => {
                    if let Ok(t) = scene.resolve_deixis(origin, direction) {
                        if let Some(first) = t.objects_in_region.first() {
                            referent = Some(first.clone());
                        }
                        region = Some(t.objects_in_region);
                    }
                }
                Content::Phrase(Phrase::Noun(np)) => {
                    if let Some(id) = ground(&np, &region) {
                        referent = Some(id);
                    }
                }
                Content::Phrase(Phrase::Prep(pp)) => {
                    if let Landmark::Object(np) = &pp.landmark {
                        if let Some(id) = ground(np, &region) {
                            referent = Some(id);
                        }
                    }
                }
                Content::Phrase(Phrase::Verb(vp)) => {
                    if vp.verb == "grasp" {
                        grasped = true;
                        if let Some(Theme::Object(np)) = &vp.theme {
                            if let Some(id) = ground(np, &region) {
                                referent = Some(id);
                            }
                        }
                    }
                }
                Content::Motion(m) => grasped |= world.gestures.motion(&m) == Some("grasp"),
                _ => {}
            }
        }
    }
    let referent =
        referent.ok_or_else(|| LearnError::IncompleteDemonstration("no referent object".into()))?;
    if !grasped {
        return Err(LearnError::IncompleteDemonstration("no grasp action".into()));
    }
    let bound_form = world
        .actions
        .instantiate("grasp", vec![Ok(Value::Object(referent))])
        .map_err(|e| LearnError::Invalid(e.to_string()))?;
    Ok(GestureLexiconEntry {
        shape_id: shape_id.to_string(),
        bound_form,
        pose: Some(shape_id.to_string()),
        learned_at,
    })
}
