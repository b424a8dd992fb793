use super::render::{describe, fill_template};
use super::{World, AGENT_ID};
use crate::moves::AgentMove;
use crate::scene::{Scene, Vec3};
use crate::semantics::{SemanticForm, Slot, Value};

fn filled(form: &SemanticForm, i: usize) -> Option<&Value> {
    match form.args.get(i) {
        Some(Slot::Filled(v)) => Some(v),
        _ => None,
    }
}

/// The ground point a destination denotes.
pub fn resolve_location(scene: &Scene, value: &Value) -> Option<Vec3> {
    match value {
        Value::Location(p) | Value::Region(p) => Some(*p),
        Value::Deixis(t) => Some(t.location),
        Value::Object(id) => scene.object(id).map(|o| o.position),
        Value::Agent => Some(scene.front_of_agent()),
        Value::Form(f) => match (f.head.as_str(), filled(f, 0)) {
            ("front_of", Some(Value::Agent)) => Some(scene.front_of_agent()),
            (_, Some(inner)) if f.args.len() == 1 => resolve_location(scene, inner),
            _ => None,
        },
    }
}

/// Carries out a saturated action in the scene and reports it. `put`
/// performs the grasp it presupposes when the theme is not already held,
/// recording it among the action's satisfied preconditions. Refusals leave
/// the scene unchanged.
pub fn execute_action(world: &mut World, form: &SemanticForm) -> AgentMove {
    let t = world.templates.clone();
    if !form.is_saturated() {
        return AgentMove::confusion(t.not_understood);
    }
    let theme = match filled(form, 0) {
        Some(Value::Object(id)) => id.clone(),
        _ => return AgentMove::confusion(t.not_understood),
    };
    let Some(object) = world.scene.object(&theme) else {
        return AgentMove::confusion(t.not_understood);
    };
    let refuse_grasp = || {
        let name = describe(&world.scene, &Value::Object(theme.clone()));
        AgentMove::confusion(fill_template(&t.cannot_grasp, &[("object", &name)]))
    };
    match form.head.as_str() {
        "reach" => AgentMove::action(t.go_on, form.clone()),
        "grasp" => {
            if !object.graspable {
                return refuse_grasp();
            }
            world.scene.object_mut(&theme).expect("checked").held_by = Some(AGENT_ID.into());
            AgentMove::action(t.done, form.clone())
        }
        "put" => {
            if !object.graspable {
                return refuse_grasp();
            }
            let already_held = object.held_by.as_deref() == Some(AGENT_ID);
            let Some(target) = filled(form, 1).and_then(|v| resolve_location(&world.scene, v)) else {
                return AgentMove::confusion(t.not_understood);
            };
            if !world.scene.in_bounds(&target) {
                return AgentMove::confusion(t.out_of_reach);
            }
            let mut record = form.clone();
            if !already_held {
                if let Ok(grasp) = world.actions.instantiate("grasp", vec![Ok(Value::Object(theme.clone()))]) {
                    if !record.is_satisfied(&grasp) {
                        record.satisfied.push(grasp);
                    }
                }
            }
            let o = world.scene.object_mut(&theme).expect("checked");
            o.position = target;
            o.held_by = None;
            AgentMove::action(t.done, record)
        }
        _ => AgentMove::confusion(t.not_understood),
    }
}
