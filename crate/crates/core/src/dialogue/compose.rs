//! Continuations run on transitions of the interaction machine. Each maps
//! the top frame and the input to the frame the stack operation installs.
//! Failures carry the text of the confusion move the session emits.

use super::render::{describe_np, fill_template, hole_parent};
use super::{execute_action, World};
use crate::automaton::{Composed, ContextFrame, Input};
use crate::grammar::{Content, Destination, Landmark, NounPhrase, Phrase, PrepPhrase, Theme, VerbPhrase};
use crate::moves::AgentMove;
use crate::scene::DeixisTarget;
use crate::semantics::{cps_apply, satisfy_precondition, Raised, SemType, SemanticForm, Value};

type Outcome = Result<Composed, String>;

enum Grounding {
    NeedsPointing,
    Found(Vec<String>),
}

fn not_understood(world: &World) -> String {
    world.templates.not_understood.clone()
}

fn not_seen(world: &World, what: &str) -> String {
    fill_template(&world.templates.not_seen, &[("description", what)])
}

fn phrase<'a>(world: &World, input: &'a Input) -> Result<&'a Phrase, String> {
    match &input.content {
        Some(Content::Phrase(p)) => Ok(p),
        _ => Err(not_understood(world)),
    }
}

fn objects(ids: Vec<String>) -> Vec<Value> {
    ids.into_iter().map(Value::Object).collect()
}

fn ground(world: &World, frame: &ContextFrame, np: &NounPhrase) -> Grounding {
    let pool = match (&frame.indicated, np.is_deictic()) {
        (Some(t), true) => t.objects_in_region.clone(),
        (None, true) if np.noun.is_none() && np.attributes.is_empty() => return Grounding::NeedsPointing,
        _ => world.scene.object_ids(),
    };
    Grounding::Found(
        world
            .scene
            .filter_by_description(&pool, np.noun.as_deref(), &np.attributes),
    )
}

fn reach_move(world: &World, id: &str) -> Result<AgentMove, String> {
    let record = world
        .actions
        .instantiate("reach", vec![Ok(Value::Object(id.to_string()))])
        .map_err(|e| e.to_string())?;
    Ok(AgentMove::action(&world.templates.go_on, record))
}

/// A saturated `reach(x)` only shifts the focus of conversation.
fn settle_reach(world: &World, frame: &mut ContextFrame, moves: &mut Vec<AgentMove>) {
    let Some(form) = &frame.pending_form else { return };
    if form.head != "reach" || !form.is_saturated() {
        return;
    }
    if let Some(Value::Object(id)) = form.args.first().and_then(|s| match s {
        crate::semantics::Slot::Filled(v) => Some(v),
        _ => None,
    }) {
        frame.focus = Some(id.clone());
        moves.push(AgentMove::action(&world.templates.go_on, form.clone()));
        frame.pending_form = None;
    }
}

fn done(world: &World, mut frame: ContextFrame, mut moves: Vec<AgentMove>) -> Outcome {
    settle_reach(world, &mut frame, &mut moves);
    Ok(Composed { frame, moves })
}

/// Candidates only make sense for the hole a "yes" would fill.
fn offer(frame: &mut ContextFrame, hole: &str, cands: Vec<Value>) {
    let next = frame.pending_form.as_ref().and_then(|f| f.next_hole()).map(|h| h.name.clone());
    if next.as_deref() == Some(hole) {
        frame.candidates = cands;
    }
}

fn composition(world: &World) -> impl Fn(crate::semantics::CompositionError) -> String + '_ {
    move |_| not_understood(world)
}

fn is_nested_hole(form: &SemanticForm, name: &str) -> bool {
    hole_parent(form, name).is_some_and(|p| !std::ptr::eq(p, form))
}

fn pointing(world: &World, input: &Input) -> Result<DeixisTarget, String> {
    match &input.content {
        Some(Content::Pointing { origin, direction }) => world
            .scene
            .resolve_deixis(*origin, *direction)
            .map_err(|_| world.templates.bad_pointing.clone()),
        _ => Err(not_understood(world)),
    }
}

/// Builds `head(landmark)` for a prepositional phrase. An unresolved or
/// ambiguous landmark leaves hole `w`, with any matches in `cands`.
fn relation_form(
    world: &World,
    frame: &ContextFrame,
    pp: &PrepPhrase,
    cands: &mut Vec<Value>,
) -> Result<SemanticForm, String> {
    let arg = match &pp.landmark {
        Landmark::Agent => Ok(Value::Agent),
        Landmark::Object(np) => match ground(world, frame, np) {
            Grounding::NeedsPointing => Err("w"),
            Grounding::Found(ids) if ids.is_empty() => return Err(not_seen(world, &describe_np(np))),
            Grounding::Found(mut ids) if ids.len() == 1 => Ok(Value::Object(ids.remove(0))),
            Grounding::Found(ids) => {
                *cands = objects(ids);
                Err("w")
            }
        },
    };
    world
        .actions
        .instantiate(&pp.relation, vec![arg])
        .map_err(composition(world))
}

fn verb_phrase(world: &World, input: &Input) -> Result<VerbPhrase, String> {
    match &input.content {
        Some(Content::Phrase(Phrase::Verb(vp))) => Ok(vp.clone()),
        Some(Content::Phrase(Phrase::Prep(pp))) => Ok(VerbPhrase {
            verb: "put".into(),
            theme: None,
            destination: Some(Destination::Relation(pp.clone())),
        }),
        Some(Content::Motion(id)) => match world.gestures.motion(id) {
            Some(verb) => Ok(VerbPhrase {
                verb: verb.to_string(),
                theme: None,
                destination: None,
            }),
            None => Err(world.templates.unknown_gesture.clone()),
        },
        _ => Err(not_understood(world)),
    }
}

/// V, α or P: a new pending action. Arguments the move leaves open become
/// holes `b` (theme) and `v` or `w` (destination); "it" is the focus.
pub(super) fn start_action(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let vp = verb_phrase(world, input)?;
    let entry = world.actions.get(&vp.verb).ok_or_else(|| not_understood(world))?.clone();
    let mut theme_cands = Vec::new();
    let theme = match &vp.theme {
        None | Some(Theme::Pronoun) => frame.focus.clone().map(Value::Object).ok_or("b"),
        Some(Theme::Object(np)) => match ground(world, frame, np) {
            Grounding::NeedsPointing => Err("b"),
            Grounding::Found(ids) if ids.is_empty() => return Err(not_seen(world, &describe_np(np))),
            Grounding::Found(mut ids) if ids.len() == 1 => Ok(Value::Object(ids.remove(0))),
            Grounding::Found(ids) => {
                theme_cands = objects(ids);
                Err("b")
            }
        },
    };
    let mut dest_cands = Vec::new();
    let mut args = vec![theme];
    if entry.slots.len() > 1 {
        args.push(match &vp.destination {
            None => Err("v"),
            Some(Destination::Demonstrative) => frame
                .indicated
                .as_ref()
                .map(|t| Value::Location(t.location))
                .ok_or("v"),
            Some(Destination::Relation(pp)) => Ok(Value::Form(Box::new(relation_form(
                world,
                frame,
                pp,
                &mut dest_cands,
            )?))),
        });
    }
    let form = world
        .actions
        .instantiate(&vp.verb, args)
        .map_err(composition(world))?;
    let mut out = frame.clone();
    out.candidates.clear();
    out.pending_form = Some(form);
    offer(&mut out, "b", theme_cands);
    offer(&mut out, "w", dest_cands);
    done(world, out, Vec::new())
}

/// N: establishes the focus object, or fills the pending action's next hole.
pub(super) fn object_phrase(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let np = match phrase(world, input)? {
        Phrase::Noun(np) => np.clone(),
        _ => return Err(not_understood(world)),
    };
    let ids = match ground(world, frame, &np) {
        Grounding::NeedsPointing => return Err(world.templates.ask_point.clone()),
        Grounding::Found(ids) if ids.is_empty() => return Err(not_seen(world, &describe_np(&np))),
        Grounding::Found(ids) => ids,
    };
    let mut out = frame.clone();
    out.candidates.clear();
    let mut moves = Vec::new();
    match &frame.pending_form {
        None if ids.len() == 1 => {
            moves.push(reach_move(world, &ids[0])?);
            out.focus = Some(ids[0].clone());
        }
        None => out.candidates = objects(ids),
        Some(form) => {
            let hole = form.next_hole().ok_or_else(|| not_understood(world))?.clone();
            if hole.ty == SemType::Location {
                let single = ids.len() == 1;
                let arg = if single { Ok(Value::Object(ids[0].clone())) } else { Err("w") };
                let rel = world.actions.instantiate("on", vec![arg]).map_err(composition(world))?;
                out.pending_form = Some(form.fill_open(&hole.name, rel).map_err(composition(world))?);
                if !single {
                    offer(&mut out, "w", objects(ids));
                }
            } else if ids.len() == 1 {
                out.pending_form =
                    Some(cps_apply(form, Value::Object(ids[0].clone())).map_err(composition(world))?);
            } else {
                out.candidates = objects(ids);
            }
        }
    }
    done(world, out, moves)
}

/// P while an action is pending: supplies its destination.
pub(super) fn fill_destination(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let Some(form) = frame.pending_form.clone() else {
        return start_action(world, frame, input);
    };
    let pp = match phrase(world, input)? {
        Phrase::Prep(pp) => pp.clone(),
        _ => return Err(not_understood(world)),
    };
    let mut out = frame.clone();
    out.candidates.clear();
    let mut cands = Vec::new();
    if let Some(v) = form.binders.iter().find(|h| h.ty == SemType::Location) {
        let rel = relation_form(world, frame, &pp, &mut cands)?;
        out.pending_form = Some(form.fill_open(&v.name, rel).map_err(composition(world))?);
        offer(&mut out, "w", cands);
    } else if let Some(w) = form
        .binders
        .iter()
        .find(|h| h.ty == SemType::Entity && is_nested_hole(&form, &h.name))
    {
        let value = match &pp.landmark {
            Landmark::Agent => Value::Agent,
            Landmark::Object(np) => match ground(world, frame, np) {
                Grounding::NeedsPointing => return Err(world.templates.ask_point.clone()),
                Grounding::Found(ids) if ids.is_empty() => return Err(not_seen(world, &describe_np(np))),
                Grounding::Found(mut ids) if ids.len() == 1 => Value::Object(ids.remove(0)),
                Grounding::Found(ids) => {
                    offer(&mut out, &w.name, objects(ids));
                    return done(world, out, Vec::new());
                }
            },
        };
        let raised = Raised {
            value,
            established: Vec::new(),
        };
        out.pending_form = Some(form.fill(&w.name, raised).map_err(composition(world))?);
    } else {
        return Err(not_understood(world));
    }
    done(world, out, Vec::new())
}

/// δ: records the indicated location and its objects.
pub(super) fn indicate(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let target = pointing(world, input)?;
    let mut out = frame.clone();
    out.indicated = Some(target);
    Ok(Composed::frame(out))
}

/// δ with nothing pending: a single object in the region becomes the focus.
pub(super) fn indicate_object(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let target = pointing(world, input)?;
    let mut out = frame.clone();
    out.indicated = Some(target.clone());
    let mut moves = Vec::new();
    if frame.pending_form.is_none() {
        match target.objects_in_region.as_slice() {
            [] => {}
            [only] => {
                moves.push(reach_move(world, only)?);
                out.focus = Some(only.clone());
            }
            many => out.candidates = objects(many.to_vec()),
        }
    }
    done(world, out, moves)
}

/// δ while waiting for the theme.
pub(super) fn point_object(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let Some(form) = frame.pending_form.clone() else {
        return indicate_object(world, frame, input);
    };
    let target = pointing(world, input)?;
    let mut out = frame.clone();
    out.indicated = Some(target.clone());
    out.candidates.clear();
    match target.objects_in_region.as_slice() {
        [] => return Err(not_seen(world, "anything there")),
        [only] => {
            out.pending_form = Some(cps_apply(&form, Value::Object(only.clone())).map_err(composition(world))?)
        }
        many => out.candidates = objects(many.to_vec()),
    }
    done(world, out, Vec::new())
}

/// ω: a learned gesture stands for its bound form. It satisfies the
/// pending action's precondition when it can, else it is an argument.
pub(super) fn shape_gesture(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let shape = match &input.content {
        Some(Content::Shape(s)) => s,
        _ => return Err(not_understood(world)),
    };
    let evidence = match world.gestures.get(shape) {
        Some(e) => e.bound_form.clone(),
        None => return Err(world.templates.unknown_gesture.clone()),
    };
    let mut out = frame.clone();
    out.candidates.clear();
    out.pending_form = Some(match &frame.pending_form {
        None => evidence,
        Some(form) => {
            let schema = world.actions.precondition(&form.head);
            if schema.is_some_and(|p| p.head == evidence.head) {
                satisfy_precondition(&world.actions, form, &evidence)
            } else {
                cps_apply(form, Value::Form(Box::new(evidence)))
            }
            .map_err(composition(world))?
        }
    });
    done(world, out, Vec::new())
}

/// "there": the indicated location fills the location hole.
pub(super) fn apply_indicated_location(world: &mut World, frame: &ContextFrame, _input: &Input) -> Outcome {
    let (Some(form), Some(target)) = (&frame.pending_form, &frame.indicated) else {
        return Err(not_understood(world));
    };
    let mut out = frame.clone();
    out.pending_form = Some(cps_apply(form, Value::Deixis(target.clone())).map_err(composition(world))?);
    done(world, out, Vec::new())
}

fn region_candidates(frame: &ContextFrame, target: &DeixisTarget) -> Vec<Value> {
    let mut cands = objects(target.objects_in_region.clone());
    let wants_place = frame
        .pending_form
        .as_ref()
        .and_then(|f| f.next_hole().map(|h| is_nested_hole(f, &h.name)))
        .unwrap_or(false);
    if wants_place {
        cands.push(Value::Location(target.location));
    }
    cands
}

/// The objects in the indicated region, nearest first, then the bare
/// location itself.
pub(super) fn compute_candidates(world: &mut World, frame: &ContextFrame, _input: &Input) -> Outcome {
    let target = frame.indicated.as_ref().ok_or_else(|| not_understood(world))?;
    let mut out = frame.clone();
    out.candidates = region_candidates(frame, target);
    Ok(Composed::frame(out))
}

/// "no" with more options left.
pub(super) fn reject_candidate(world: &mut World, frame: &ContextFrame, _input: &Input) -> Outcome {
    if frame.candidates.is_empty() {
        return Err(not_understood(world));
    }
    let mut out = frame.clone();
    out.candidates.remove(0);
    Ok(Composed::frame(out))
}

/// "yes": the head candidate goes into the pending action, or becomes the
/// focus when nothing is pending.
pub(super) fn accept_candidate(world: &mut World, frame: &ContextFrame, _input: &Input) -> Outcome {
    let head = frame.candidates.first().cloned().ok_or_else(|| not_understood(world))?;
    let mut out = frame.clone();
    out.candidates.clear();
    let mut moves = Vec::new();
    match &frame.pending_form {
        Some(form) => out.pending_form = Some(cps_apply(form, head).map_err(composition(world))?),
        None => match head {
            Value::Object(id) => {
                moves.push(reach_move(world, &id)?);
                out.focus = Some(id);
            }
            _ => return Err(not_understood(world)),
        },
    }
    done(world, out, moves)
}

/// δ during disambiguation: start over from the new region.
pub(super) fn repoint(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let target = pointing(world, input)?;
    let cands = region_candidates(frame, &target);
    if cands.is_empty() {
        return Err(not_seen(world, "anything there"));
    }
    let mut out = frame.clone();
    out.indicated = Some(target);
    out.candidates = cands;
    Ok(Composed::frame(out))
}

/// N or P during disambiguation: keep the candidates matching the description.
pub(super) fn refine_candidates(world: &mut World, frame: &ContextFrame, input: &Input) -> Outcome {
    let np = match phrase(world, input)? {
        Phrase::Noun(np) => np,
        Phrase::Prep(PrepPhrase {
            landmark: Landmark::Object(np),
            ..
        }) => np,
        _ => return Err(not_understood(world)),
    };
    let ids: Vec<String> = frame
        .candidates
        .iter()
        .filter_map(|c| c.as_object().map(str::to_string))
        .collect();
    let kept = world
        .scene
        .filter_by_description(&ids, np.noun.as_deref(), &np.attributes);
    if kept.is_empty() {
        return Err(not_seen(world, &describe_np(np)));
    }
    let mut out = frame.clone();
    out.candidates = objects(kept);
    Ok(Composed::frame(out))
}

/// Runs the saturated pending action against the scene.
pub(super) fn execute(world: &mut World, frame: &ContextFrame, _input: &Input) -> Outcome {
    let form = frame.pending_form.clone().ok_or_else(|| not_understood(world))?;
    let mv = execute_action(world, &form);
    let mut out = frame.clone();
    out.pending_form = None;
    out.held = world.held();
    Ok(Composed { frame: out, moves: vec![mv] })
}
