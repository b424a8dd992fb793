//! Partially specified actions as typed forms with named holes, composed
//! one argument at a time by continuation-passing application.

mod actions;
pub mod cps;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{DeixisTarget, Vec3};

pub use actions::{ActionTable, Precondition, PredicateEntry};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemType {
    Entity,
    Location,
    Truth,
    Arrow(Box<SemType>, Box<SemType>),
}

impl SemType {
    pub fn arrow(from: SemType, to: SemType) -> SemType {
        SemType::Arrow(Box::new(from), Box::new(to))
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Entity => f.write_str("e"),
            SemType::Location => f.write_str("loc"),
            SemType::Truth => f.write_str("t"),
            SemType::Arrow(a, b) => match **a {
                SemType::Arrow(..) => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
        }
    }
}

/// Anything that can fill a hole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Object(String),
    /// The agent itself ("you").
    Agent,
    Location(Vec3),
    /// An entity standing for whatever is at a location.
    Region(Vec3),
    /// A pointing result: a location bound together with the objects near it.
    Deixis(DeixisTarget),
    Form(Box<SemanticForm>),
}

impl Value {
    /// `None` for pointing results, which only enter forms through raising.
    pub fn sem_type(&self) -> Option<SemType> {
        match self {
            Value::Object(_) | Value::Agent | Value::Region(_) => Some(SemType::Entity),
            Value::Location(_) => Some(SemType::Location),
            Value::Deixis(_) => None,
            Value::Form(f) => Some(f.sem_type()),
        }
    }

    pub fn as_object(&self) -> Option<&str> {
        match self {
            Value::Object(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Object(id) => f.write_str(id),
            Value::Agent => f.write_str("agent"),
            Value::Location(p) | Value::Region(p) => write!(f, "{p}"),
            Value::Deixis(t) => write!(f, "{}", t.location),
            Value::Form(form) => write!(f, "{form}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hole {
    pub name: String,
    pub ty: SemType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Filled(Value),
    Hole(Hole),
}

/// `λb.λv.put(b,v)` and friends. Holes may sit inside nested forms
/// (`λw.put(b,on(w))`); `binders` lists every hole in the tree, outermost
/// first, and only the top-level form has binders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticForm {
    pub head: String,
    pub args: Vec<Slot>,
    pub result: SemType,
    pub binders: Vec<Hole>,
    /// Precondition forms already established for this action.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub satisfied: Vec<SemanticForm>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RaiseError {
    #[error("no coercion from {from} to {to}")]
    NoCoercion { from: String, to: SemType },
    #[error("the indicated region holds no object")]
    EmptyRegion,
}

#[derive(Debug, Error, PartialEq)]
pub enum CompositionError {
    #[error("{0} has no open argument")]
    Saturated(String),
    #[error("{head} takes {expected} arguments, got {found}")]
    Arity { head: String, expected: usize, found: usize },
    #[error("expected {expected}, found {}", .found.as_ref().map(|t| t.to_string()).unwrap_or_else(|| "a pointing".into()))]
    TypeMismatch { expected: SemType, found: Option<SemType> },
    #[error(transparent)]
    Raise(#[from] RaiseError),
    #[error("{evidence} does not establish a precondition of {action}")]
    PreconditionMismatch { action: String, evidence: String },
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("malformed form: {0}")]
    Malformed(String),
}

/// A coerced argument together with any preconditions the coercion
/// established.
#[derive(Debug, Clone, PartialEq)]
pub struct Raised {
    pub value: Value,
    pub established: Vec<SemanticForm>,
}

impl SemanticForm {
    /// Builds a form, binding its holes in depth-first order of appearance.
    pub fn new(head: impl Into<String>, args: Vec<Slot>, result: SemType) -> Result<SemanticForm, CompositionError> {
        let args = args
            .into_iter()
            .map(|slot| match slot {
                Slot::Filled(Value::Form(mut inner)) => {
                    inner.binders.clear();
                    Slot::Filled(Value::Form(inner))
                }
                other => other,
            })
            .collect();
        let mut form = SemanticForm {
            head: head.into(),
            args,
            result,
            binders: Vec::new(),
            satisfied: Vec::new(),
        };
        let mut holes = Vec::new();
        form.collect_holes(&mut holes);
        form.binders = holes;
        form.check()?;
        Ok(form)
    }

    /// Reorders the binders; `order` must name every hole exactly once.
    pub fn with_binder_order(mut self, order: &[&str]) -> Result<SemanticForm, CompositionError> {
        let mut reordered = Vec::with_capacity(order.len());
        for name in order {
            let hole = self
                .binders
                .iter()
                .find(|h| h.name == *name)
                .ok_or_else(|| CompositionError::Malformed(format!("no hole named {name}")))?;
            reordered.push(hole.clone());
        }
        self.binders = reordered;
        self.check()?;
        Ok(self)
    }

    fn collect_holes(&self, out: &mut Vec<Hole>) {
        for slot in &self.args {
            match slot {
                Slot::Hole(h) => out.push(h.clone()),
                Slot::Filled(Value::Form(f)) => f.collect_holes(out),
                Slot::Filled(_) => {}
            }
        }
    }

    fn check(&self) -> Result<(), CompositionError> {
        let mut holes = Vec::new();
        self.collect_holes(&mut holes);
        let names: BTreeSet<&str> = holes.iter().map(|h| h.name.as_str()).collect();
        if names.len() != holes.len() {
            return Err(CompositionError::Malformed("hole names repeat".into()));
        }
        let mut bound: Vec<&Hole> = self.binders.iter().collect();
        bound.sort_by(|a, b| a.name.cmp(&b.name));
        holes.sort_by(|a, b| a.name.cmp(&b.name));
        if bound.len() != holes.len() || bound.iter().zip(&holes).any(|(a, b)| *a != b) {
            return Err(CompositionError::Malformed("binders do not match holes".into()));
        }
        Ok(())
    }

    /// One arrow per open hole, outermost first, ending in the result type.
    pub fn sem_type(&self) -> SemType {
        self.binders
            .iter()
            .rev()
            .fold(self.result.clone(), |acc, h| SemType::arrow(h.ty.clone(), acc))
    }

    pub fn is_saturated(&self) -> bool {
        self.binders.is_empty()
    }

    pub fn hole_count(&self) -> usize {
        self.binders.len()
    }

    pub fn next_hole(&self) -> Option<&Hole> {
        self.binders.first()
    }

    pub fn has_hole(&self, name: &str) -> bool {
        self.binders.iter().any(|h| h.name == name)
    }

    pub fn is_satisfied(&self, precondition: &SemanticForm) -> bool {
        self.satisfied.contains(precondition)
    }

    fn substitute(&mut self, name: &str, value: &Value) -> bool {
        for slot in &mut self.args {
            match slot {
                Slot::Hole(h) if h.name == name => {
                    *slot = Slot::Filled(value.clone());
                    return true;
                }
                Slot::Filled(Value::Form(f)) => {
                    if f.substitute(name, value) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        false
    }

    /// Fills the named hole through the continuation combinator.
    pub fn fill(&self, name: &str, raised: Raised) -> Result<SemanticForm, CompositionError> {
        let hole = self
            .binders
            .iter()
            .find(|h| h.name == name)
            .ok_or_else(|| CompositionError::Malformed(format!("no hole named {name}")))?
            .clone();
        if raised.value.sem_type().as_ref() != Some(&hole.ty) {
            return Err(CompositionError::TypeMismatch {
                expected: hole.ty,
                found: raised.value.sem_type(),
            });
        }
        let base = self.clone();
        let name = name.to_string();
        let m: cps::Comp<cps::Func<Raised, SemanticForm>, SemanticForm> =
            cps::Comp::pure(Box::new(move |arg: Raised| {
                let mut out = base;
                out.substitute(&name, &arg.value);
                out.binders.retain(|h| h.name != name);
                for p in arg.established {
                    if !out.satisfied.contains(&p) {
                        out.satisfied.push(p);
                    }
                }
                out
            }));
        let n = cps::Comp::pure(raised);
        Ok(cps::cps_apply(m, n).run(|form| form))
    }
}

impl SemanticForm {
    /// Plugs an open form such as `λw.on(w)` into the named hole, whose type
    /// must be the inner form's result. The inner holes take the filled
    /// hole's place in the binder order.
    pub fn fill_open(&self, name: &str, inner: SemanticForm) -> Result<SemanticForm, CompositionError> {
        let pos = self
            .binders
            .iter()
            .position(|h| h.name == name)
            .ok_or_else(|| CompositionError::Malformed(format!("no hole named {name}")))?;
        if self.binders[pos].ty != inner.result {
            return Err(CompositionError::TypeMismatch {
                expected: self.binders[pos].ty.clone(),
                found: Some(inner.result.clone()),
            });
        }
        if inner.binders.iter().any(|h| self.has_hole(&h.name)) {
            return Err(CompositionError::Malformed("hole names repeat".into()));
        }
        let mut out = self.clone();
        let spliced = inner.binders.clone();
        let mut nested = inner;
        nested.binders.clear();
        out.substitute(name, &Value::Form(Box::new(nested)));
        out.binders.splice(pos..=pos, spliced);
        out.check()?;
        Ok(out)
    }
}

impl fmt::Display for SemanticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.binders {
            write!(f, "λ{}.", h.name)?;
        }
        self.fmt_body(f)
    }
}

impl SemanticForm {
    fn fmt_body(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.head)?;
        for (i, slot) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match slot {
                Slot::Hole(h) => f.write_str(&h.name)?,
                Slot::Filled(Value::Form(inner)) => inner.fmt_body(f)?,
                Slot::Filled(v) => write!(f, "{v}")?,
            }
        }
        f.write_str(")")
    }
}

/// Coerces `arg` to `target` when a sanctioned coercion exists:
/// identity; location to the entity at that location; pointing to its
/// location or to the nearest object in its region; and `grasp(x)` to `x`,
/// recording the grasp as established.
pub fn raise_type(arg: &Value, target: &SemType) -> Result<Raised, RaiseError> {
    let plain = |value| {
        Ok(Raised {
            value,
            established: Vec::new(),
        })
    };
    if arg.sem_type().as_ref() == Some(target) {
        return plain(arg.clone());
    }
    match (arg, target) {
        (Value::Location(p), SemType::Entity) => plain(Value::Region(*p)),
        (Value::Deixis(t), SemType::Location) => plain(Value::Location(t.location)),
        (Value::Deixis(t), SemType::Entity) => t
            .objects_in_region
            .first()
            .map(|id| Value::Object(id.clone()))
            .map_or(Err(RaiseError::EmptyRegion), plain),
        (Value::Form(form), SemType::Entity) if form.head == "grasp" && form.is_saturated() => {
            match form.args.as_slice() {
                [Slot::Filled(Value::Object(id))] => Ok(Raised {
                    value: Value::Object(id.clone()),
                    established: vec![(**form).clone()],
                }),
                _ => Err(no_coercion(arg, target)),
            }
        }
        _ => Err(no_coercion(arg, target)),
    }
}

fn no_coercion(arg: &Value, target: &SemType) -> RaiseError {
    RaiseError::NoCoercion {
        from: arg.to_string(),
        to: target.clone(),
    }
}

/// Applies `func` to `arg`, filling its outermost hole.
///
/// An argument whose type exactly matches a later hole of a different type
/// than the outermost one fills that hole instead; same-typed holes are only
/// ever filled in order. Failing an exact match, the argument is raised to
/// the outermost hole's type, then to any differently typed later hole.
pub fn cps_apply(func: &SemanticForm, arg: Value) -> Result<SemanticForm, CompositionError> {
    let outer = func
        .next_hole()
        .ok_or_else(|| CompositionError::Saturated(func.to_string()))?
        .clone();
    let arg_ty = arg.sem_type();
    let exact = |h: &Hole| arg_ty.as_ref() == Some(&h.ty);
    if exact(&outer) {
        return func.fill(&outer.name, raise_type(&arg, &outer.ty)?);
    }
    let others: Vec<&Hole> = func.binders[1..].iter().filter(|h| h.ty != outer.ty).collect();
    if let Some(h) = others.iter().find(|h| exact(h)) {
        return func.fill(&h.name, raise_type(&arg, &h.ty)?);
    }
    let first_err = match raise_type(&arg, &outer.ty) {
        Ok(r) => return func.fill(&outer.name, r),
        Err(e) => e,
    };
    for h in others {
        if let Ok(r) = raise_type(&arg, &h.ty) {
            return func.fill(&h.name, r);
        }
    }
    Err(match first_err {
        RaiseError::EmptyRegion => first_err.into(),
        RaiseError::NoCoercion { .. } => CompositionError::TypeMismatch {
            expected: outer.ty,
            found: arg_ty,
        },
    })
}

/// Records `evidence` as establishing `action`'s declared precondition,
/// filling the hole the precondition binds when it is still open.
pub fn satisfy_precondition(
    table: &ActionTable,
    action: &SemanticForm,
    evidence: &SemanticForm,
) -> Result<SemanticForm, CompositionError> {
    let mismatch = || CompositionError::PreconditionMismatch {
        action: action.to_string(),
        evidence: evidence.to_string(),
    };
    let schema = table.precondition(&action.head).ok_or_else(mismatch)?;
    if schema.head != evidence.head || !evidence.is_saturated() {
        return Err(mismatch());
    }
    if action.is_satisfied(evidence) {
        return Ok(action.clone());
    }
    let subject = match evidence.args.as_slice() {
        [Slot::Filled(v)] => v.clone(),
        _ => return Err(mismatch()),
    };
    match action.args.get(schema.slot) {
        Some(Slot::Hole(h)) => {
            let raised = Raised {
                value: subject,
                established: vec![evidence.clone()],
            };
            action.fill(&h.name.clone(), raised)
        }
        Some(Slot::Filled(v)) if *v == subject => {
            let mut out = action.clone();
            out.satisfied.push(evidence.clone());
            Ok(out)
        }
        _ => Err(mismatch()),
    }
}
