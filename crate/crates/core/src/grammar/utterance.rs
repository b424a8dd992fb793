//! Closed-vocabulary utterance parsing into noun, verb and preposition
//! phrases.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{GrammarError, Terminal};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerbEntry {
    pub lemma: String,
    pub forms: Vec<String>,
    /// Argument slots the verb takes, from `theme` and `destination`.
    pub slots: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepEntry {
    pub word: String,
    pub relation: String,
}

/// Vocabulary accepted by the utterance parser.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub nouns: BTreeSet<String>,
    pub attributes: BTreeSet<String>,
    pub verbs: Vec<VerbEntry>,
    pub prepositions: Vec<PrepEntry>,
    pub definite: BTreeSet<String>,
    pub demonstrative: BTreeSet<String>,
    pub indefinite: BTreeSet<String>,
    pub pronouns: BTreeSet<String>,
    pub locatives: BTreeSet<String>,
    pub yes: BTreeSet<String>,
    pub no: BTreeSet<String>,
    #[serde(default)]
    pub fillers: BTreeSet<String>,
}

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.json");

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::from_json(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

impl Lexicon {
    pub fn from_json(text: &str) -> Result<Lexicon, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn verb(&self, word: &str) -> Option<&VerbEntry> {
        self.verbs.iter().find(|v| v.forms.iter().any(|f| f == word))
    }

    pub fn verb_by_lemma(&self, lemma: &str) -> Option<&VerbEntry> {
        self.verbs.iter().find(|v| v.lemma == lemma)
    }

    fn relation(&self, word: &str) -> Option<&str> {
        self.prepositions
            .iter()
            .find(|p| p.word == word)
            .map(|p| p.relation.as_str())
    }

    fn determiner(&self, word: &str) -> Option<Determiner> {
        if self.definite.contains(word) {
            Some(Determiner::Definite)
        } else if self.demonstrative.contains(word) {
            Some(Determiner::Demonstrative)
        } else if self.indefinite.contains(word) {
            Some(Determiner::Indefinite)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Determiner {
    Definite,
    Demonstrative,
    Indefinite,
    Bare,
}

/// "the blue cup", "that cup", "cup", or a bare demonstrative "that"
/// (`noun` is `None` only in the last case).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhrase {
    pub determiner: Determiner,
    pub attributes: BTreeSet<String>,
    pub noun: Option<String>,
}

impl NounPhrase {
    pub fn is_deictic(&self) -> bool {
        self.determiner == Determiner::Demonstrative
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Landmark {
    Object(NounPhrase),
    /// "you", the agent itself.
    Agent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepPhrase {
    pub relation: String,
    pub landmark: Landmark,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    Pronoun,
    Object(NounPhrase),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destination {
    /// "there" / "here": the location singled out by pointing.
    Demonstrative,
    Relation(PrepPhrase),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbPhrase {
    pub verb: String,
    pub theme: Option<Theme>,
    pub destination: Option<Destination>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phrase {
    Noun(NounPhrase),
    Verb(VerbPhrase),
    Prep(PrepPhrase),
    Yes,
    No,
}

impl Phrase {
    pub fn terminal(&self) -> Terminal {
        match self {
            Phrase::Noun(_) => Terminal::Noun,
            Phrase::Verb(_) => Terminal::Verb,
            Phrase::Prep(_) => Terminal::Prep,
            Phrase::Yes => Terminal::Yes,
            Phrase::No => Terminal::No,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedUtterance {
    pub phrases: Vec<Phrase>,
}

impl ParsedUtterance {
    pub fn terminals(&self) -> Vec<Terminal> {
        self.phrases.iter().map(Phrase::terminal).collect()
    }
}

struct Cursor<'a> {
    lex: &'a Lexicon,
    words: &'a [String],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.words.get(self.pos).map(String::as_str)
    }

    fn peek_at(&self, k: usize) -> Option<&'a str> {
        self.words.get(self.pos + k).map(String::as_str)
    }

    fn done(&self) -> bool {
        self.pos >= self.words.len()
    }

    fn err(&self, reason: impl Into<String>) -> GrammarError {
        GrammarError::UnknownInput {
            text: self.words.join(" "),
            reason: reason.into(),
        }
    }

    fn noun_phrase(&mut self) -> Result<NounPhrase, GrammarError> {
        let determiner = match self.peek().and_then(|w| self.lex.determiner(w)) {
            Some(d) => {
                self.pos += 1;
                d
            }
            None => Determiner::Bare,
        };
        let mut attributes = BTreeSet::new();
        while let Some(w) = self.peek() {
            if self.lex.attributes.contains(w) {
                attributes.insert(w.to_string());
                self.pos += 1;
            } else {
                break;
            }
        }
        match self.peek() {
            Some(w) if self.lex.nouns.contains(w) => {
                self.pos += 1;
                Ok(NounPhrase {
                    determiner,
                    attributes,
                    noun: Some(w.to_string()),
                })
            }
            _ if determiner == Determiner::Demonstrative && attributes.is_empty() => Ok(NounPhrase {
                determiner,
                attributes,
                noun: None,
            }),
            Some(w) => Err(self.err(format!("unknown word {w:?}"))),
            None => Err(self.err("expected a noun")),
        }
    }

    fn starts_front_of(&self) -> bool {
        self.peek() == Some("in") && self.peek_at(1) == Some("front") && self.peek_at(2) == Some("of")
    }

    fn starts_prep(&self) -> bool {
        self.starts_front_of() || self.peek().is_some_and(|w| self.lex.relation(w).is_some())
    }

    fn prep_phrase(&mut self) -> Result<PrepPhrase, GrammarError> {
        let relation = if self.starts_front_of() {
            self.pos += 3;
            "front_of".to_string()
        } else {
            let w = self.peek().ok_or_else(|| self.err("expected a preposition"))?;
            let rel = self
                .lex
                .relation(w)
                .ok_or_else(|| self.err(format!("unknown preposition {w:?}")))?;
            self.pos += 1;
            rel.to_string()
        };
        let landmark = if matches!(self.peek(), Some("you") | Some("yourself")) {
            self.pos += 1;
            Landmark::Agent
        } else {
            Landmark::Object(self.noun_phrase()?)
        };
        Ok(PrepPhrase { relation, landmark })
    }

    fn verb_phrase(&mut self, entry: &VerbEntry) -> Result<VerbPhrase, GrammarError> {
        self.pos += 1;
        let takes_destination = entry.slots.iter().any(|s| s == "destination");
        let theme = match self.peek() {
            None => None,
            Some(w) if self.lex.pronouns.contains(w) => {
                self.pos += 1;
                Some(Theme::Pronoun)
            }
            Some(w) if self.lex.locatives.contains(w) => None,
            Some(_) if self.starts_prep() => None,
            Some(_) => Some(Theme::Object(self.noun_phrase()?)),
        };
        let destination = match self.peek() {
            None => None,
            Some(w) if self.lex.locatives.contains(w) => {
                self.pos += 1;
                Some(Destination::Demonstrative)
            }
            Some(_) if self.starts_prep() => Some(Destination::Relation(self.prep_phrase()?)),
            Some(w) => return Err(self.err(format!("unexpected {w:?} after verb"))),
        };
        if destination.is_some() && !takes_destination {
            return Err(self.err(format!("{:?} takes no destination", entry.lemma)));
        }
        Ok(VerbPhrase {
            verb: entry.lemma.clone(),
            theme,
            destination,
        })
    }

    fn clause(&mut self, out: &mut Vec<Phrase>) -> Result<(), GrammarError> {
        while let Some(w) = self.peek() {
            if self.lex.yes.contains(w) {
                self.pos += 1;
                out.push(Phrase::Yes);
            } else if self.lex.no.contains(w) {
                self.pos += 1;
                out.push(Phrase::No);
            } else {
                break;
            }
        }
        let Some(w) = self.peek() else {
            return Ok(());
        };
        let phrase = if let Some(entry) = self.lex.verb(w) {
            Phrase::Verb(self.verb_phrase(entry)?)
        } else if self.starts_prep() {
            Phrase::Prep(self.prep_phrase()?)
        } else {
            Phrase::Noun(self.noun_phrase()?)
        };
        out.push(phrase);
        if !self.done() {
            return Err(self.err(format!("unexpected {:?}", self.peek().unwrap_or(""))));
        }
        Ok(())
    }
}

/// Parses an utterance. Clauses split on sentence and clause punctuation
/// are parsed independently and their phrases concatenated in order.
pub fn parse_utterance(lexicon: &Lexicon, text: &str) -> Result<ParsedUtterance, GrammarError> {
    let mut phrases = Vec::new();
    for clause in text.split(|c: char| matches!(c, '.' | '!' | '?' | ',' | ';')) {
        let words: Vec<String> = clause
            .split_whitespace()
            .map(|w| {
                w.chars()
                    .filter(|c| c.is_alphanumeric() || *c == '-' || *c == '\'')
                    .collect::<String>()
                    .to_lowercase()
            })
            .filter(|w| !w.is_empty() && !lexicon.fillers.contains(w))
            .collect();
        let mut cursor = Cursor {
            lex: lexicon,
            words: &words,
            pos: 0,
        };
        cursor.clause(&mut phrases)?;
    }
    if phrases.is_empty() {
        return Err(GrammarError::UnknownInput {
            text: text.to_string(),
            reason: "empty utterance".into(),
        });
    }
    Ok(ParsedUtterance { phrases })
}
