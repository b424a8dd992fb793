//! Input events, their classification into the terminal alphabet of the
//! interactive grammar, and membership in that grammar.

mod cfg;
mod utterance;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::Vec3;

pub use cfg::{Cfg, GenerateError, Production, Symbol};
pub use utterance::{
    parse_utterance, Destination, Determiner, Landmark, Lexicon, NounPhrase, ParsedUtterance, Phrase,
    PrepEntry, PrepPhrase, Theme, VerbEntry, VerbPhrase,
};

/// One move type of the interactive grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Terminal {
    /// δ, deictic gesture.
    #[serde(rename = "δ", alias = "d", alias = "deixis")]
    Deixis,
    /// ω, static iconic gesture (object).
    #[serde(rename = "ω", alias = "w", alias = "iconic_static")]
    StaticIconic,
    /// α, dynamic iconic gesture (action).
    #[serde(rename = "α", alias = "a", alias = "iconic_dynamic")]
    DynamicIconic,
    #[serde(rename = "y")]
    Yes,
    #[serde(rename = "n")]
    No,
    #[serde(rename = "N")]
    Noun,
    #[serde(rename = "V")]
    Verb,
    #[serde(rename = "P")]
    Prep,
}

impl Terminal {
    pub const ALL: [Terminal; 8] = [
        Terminal::Deixis,
        Terminal::StaticIconic,
        Terminal::DynamicIconic,
        Terminal::Yes,
        Terminal::No,
        Terminal::Noun,
        Terminal::Verb,
        Terminal::Prep,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Terminal::Deixis => "δ",
            Terminal::StaticIconic => "ω",
            Terminal::DynamicIconic => "α",
            Terminal::Yes => "y",
            Terminal::No => "n",
            Terminal::Noun => "N",
            Terminal::Verb => "V",
            Terminal::Prep => "P",
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    #[serde(alias = "positive", alias = "y")]
    Yes,
    #[serde(alias = "negative", alias = "n")]
    No,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gesture {
    Deixis { origin: Vec3, direction: Vec3 },
    IconicStatic { shape_id: String },
    IconicDynamic { motion_id: String },
    Head { polarity: Polarity },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Speech,
    Gesture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Utterance(String),
    Gesture(Gesture),
}

/// One multimodal move by the human.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEvent {
    pub time: u64,
    pub payload: Payload,
}

impl InputEvent {
    pub fn utterance(time: u64, text: impl Into<String>) -> Self {
        InputEvent {
            time,
            payload: Payload::Utterance(text.into()),
        }
    }

    pub fn gesture(time: u64, gesture: Gesture) -> Self {
        InputEvent {
            time,
            payload: Payload::Gesture(gesture),
        }
    }

    pub fn modality(&self) -> Modality {
        match self.payload {
            Payload::Utterance(_) => Modality::Speech,
            Payload::Gesture(_) => Modality::Gesture,
        }
    }
}

/// What a classified move carries besides its terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Content {
    Pointing { origin: Vec3, direction: Vec3 },
    Shape(String),
    Motion(String),
    Phrase(Phrase),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classified {
    pub terminal: Terminal,
    pub content: Content,
}

#[derive(Debug, Error, PartialEq)]
pub enum GrammarError {
    #[error("could not understand {text:?}: {reason}")]
    UnknownInput { text: String, reason: String },
    #[error("malformed event: {0}")]
    Malformed(String),
}

/// Maps an event to the terminals it contributes, in order.
pub fn classify_event(lexicon: &Lexicon, event: &InputEvent) -> Result<Vec<Classified>, GrammarError> {
    let one = |terminal, content| Ok(vec![Classified { terminal, content }]);
    match &event.payload {
        Payload::Utterance(text) => Ok(parse_utterance(lexicon, text)?
            .phrases
            .into_iter()
            .map(|p| Classified {
                terminal: p.terminal(),
                content: Content::Phrase(p),
            })
            .collect()),
        Payload::Gesture(Gesture::Deixis { origin, direction }) => {
            if direction.is_zero() || !direction.is_finite() || !origin.is_finite() {
                return Err(GrammarError::Malformed("deixis needs a finite non-zero direction".into()));
            }
            one(
                Terminal::Deixis,
                Content::Pointing {
                    origin: *origin,
                    direction: *direction,
                },
            )
        }
        Payload::Gesture(Gesture::IconicStatic { shape_id }) => {
            one(Terminal::StaticIconic, Content::Shape(shape_id.clone()))
        }
        Payload::Gesture(Gesture::IconicDynamic { motion_id }) => {
            one(Terminal::DynamicIconic, Content::Motion(motion_id.clone()))
        }
        Payload::Gesture(Gesture::Head { polarity }) => {
            let (t, p) = match polarity {
                Polarity::Yes => (Terminal::Yes, Phrase::Yes),
                Polarity::No => (Terminal::No, Phrase::No),
            };
            one(t, Content::Phrase(p))
        }
    }
}

/// Membership in the interactive language.
pub fn accepts(sequence: &[Terminal]) -> bool {
    Cfg::interactive().accepts(sequence)
}

/// Samples sentences of the interactive language.
pub fn generate(max_len: usize, count: usize, seed: u64) -> Result<Vec<Vec<Terminal>>, GenerateError> {
    Cfg::interactive().generate(max_len, count, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(e: &InputEvent) -> Vec<Terminal> {
        classify_event(&Lexicon::default(), e)
            .unwrap()
            .into_iter()
            .map(|c| c.terminal)
            .collect()
    }

    #[test]
    fn gestures_map_directly() {
        let head = InputEvent::gesture(0, Gesture::Head { polarity: Polarity::Yes });
        assert_eq!(classify(&head), vec![Terminal::Yes]);
        let head = InputEvent::gesture(0, Gesture::Head { polarity: Polarity::No });
        assert_eq!(classify(&head), vec![Terminal::No]);
        let shape = InputEvent::gesture(0, Gesture::IconicStatic { shape_id: "x".into() });
        assert_eq!(classify(&shape), vec![Terminal::StaticIconic]);
        let motion = InputEvent::gesture(0, Gesture::IconicDynamic { motion_id: "x".into() });
        assert_eq!(classify(&motion), vec![Terminal::DynamicIconic]);
        let point = InputEvent::gesture(
            0,
            Gesture::Deixis {
                origin: Vec3::new(0.0, 1.0, 0.0),
                direction: Vec3::new(0.0, -1.0, 1.0),
            },
        );
        assert_eq!(classify(&point), vec![Terminal::Deixis]);
    }

    #[test]
    fn speech_goes_through_the_parser() {
        assert_eq!(classify(&InputEvent::utterance(0, "put it there")), vec![Terminal::Verb]);
        let err = classify_event(&Lexicon::default(), &InputEvent::utterance(0, "flibber the wug"));
        assert!(matches!(err, Err(GrammarError::UnknownInput { .. })));
    }

    #[test]
    fn zero_pointing_direction_is_malformed() {
        let point = InputEvent::gesture(
            0,
            Gesture::Deixis {
                origin: Vec3::new(0.0, 1.0, 0.0),
                direction: Vec3::default(),
            },
        );
        assert!(classify_event(&Lexicon::default(), &point).is_err());
    }

    #[test]
    fn event_json_shape() {
        let e: InputEvent = serde_json::from_str(
            r#"{"time":3,"payload":{"gesture":{"kind":"head","polarity":"positive"}}}"#,
        )
        .unwrap();
        assert_eq!(e.payload, Payload::Gesture(Gesture::Head { polarity: Polarity::Yes }));
        let t: Terminal = serde_json::from_str("\"δ\"").unwrap();
        assert_eq!(t, Terminal::Deixis);
    }
}
