//! Closed library of transition guards over the top stack frame.

use serde::{Deserialize, Serialize};

use super::ContextFrame;
use crate::scene::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    #[default]
    Always,
    IndicatedPresent,
    IndicatedAbsent,
    /// The indicated location lies within `radius` (horizontally) of `center`.
    IndicatedWithin { center: Vec3, radius: f64 },
    CandidatesEq(usize),
    CandidatesGt(usize),
    PendingPresent,
    PendingAbsent,
    PendingSaturated,
    PendingUnsaturated,
    /// The pending form's outermost open hole has this name.
    NextHole(String),
    FocusPresent,
    FocusAbsent,
    All(Vec<Guard>),
}

impl Guard {
    pub fn eval(&self, frame: &ContextFrame) -> bool {
        let pending = frame.pending_form.as_ref();
        match self {
            Guard::Always => true,
            Guard::IndicatedPresent => frame.indicated.is_some(),
            Guard::IndicatedAbsent => frame.indicated.is_none(),
            Guard::IndicatedWithin { center, radius } => frame
                .indicated
                .as_ref()
                .is_some_and(|t| t.location.horizontal_distance(center) <= *radius),
            Guard::CandidatesEq(n) => frame.candidates.len() == *n,
            Guard::CandidatesGt(n) => frame.candidates.len() > *n,
            Guard::PendingPresent => pending.is_some(),
            Guard::PendingAbsent => pending.is_none(),
            Guard::PendingSaturated => pending.is_some_and(|f| f.is_saturated()),
            Guard::PendingUnsaturated => pending.is_some_and(|f| !f.is_saturated()),
            Guard::NextHole(name) => pending
                .and_then(|f| f.next_hole())
                .is_some_and(|h| &h.name == name),
            Guard::FocusPresent => frame.focus.is_some(),
            Guard::FocusAbsent => frame.focus.is_none(),
            Guard::All(gs) => gs.iter().all(|g| g.eval(frame)),
        }
    }

    /// True when the guard never looks at the frame.
    pub fn is_frame_free(&self) -> bool {
        match self {
            Guard::Always => true,
            Guard::All(gs) => gs.iter().all(Guard::is_frame_free),
            _ => false,
        }
    }

    fn atoms(&self) -> Vec<&Guard> {
        match self {
            Guard::Always => Vec::new(),
            Guard::All(gs) => gs.iter().flat_map(Guard::atoms).collect(),
            atom => vec![atom],
        }
    }

    /// Sound but incomplete: `true` means no frame satisfies both guards.
    pub fn excludes(&self, other: &Guard) -> bool {
        let mine = self.atoms();
        let theirs = other.atoms();
        mine.iter()
            .any(|a| theirs.iter().any(|b| atoms_exclude(a, b) || atoms_exclude(b, a)))
            || mine.iter().any(|a| atoms_exclude(a, a))
            || theirs.iter().any(|b| atoms_exclude(b, b))
    }
}

fn atoms_exclude(a: &Guard, b: &Guard) -> bool {
    use Guard::*;
    match (a, b) {
        (IndicatedPresent, IndicatedAbsent) | (IndicatedWithin { .. }, IndicatedAbsent) => true,
        (CandidatesEq(x), CandidatesEq(y)) => x != y,
        (CandidatesEq(x), CandidatesGt(y)) => x <= y,
        (PendingPresent, PendingAbsent)
        | (PendingSaturated, PendingAbsent)
        | (PendingUnsaturated, PendingAbsent)
        | (NextHole(_), PendingAbsent)
        | (PendingSaturated, PendingUnsaturated)
        | (PendingSaturated, NextHole(_)) => true,
        (NextHole(x), NextHole(y)) => x != y,
        (FocusPresent, FocusAbsent) => true,
        _ => false,
    }
}
