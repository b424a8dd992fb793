//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use ensemble_core::automaton::{
    exec_stack_op, Configuration, ContextFrame, Guard, Input, InputClass, Machine, MachineDef, Mode, Registry,
    RuleDef, StackOp, StackOpKind,
};
use ensemble_core::dialogue::{build_interaction_machine, Session, World};
use ensemble_core::grammar::{accepts, generate, Gesture, InputEvent, Polarity, Terminal};
use ensemble_core::harness::{run_trace, ReplayOptions};
use ensemble_core::moves::{AgentMove, MoveKind};
use ensemble_core::scene::{load_scene, Scene, Vec3, WorldObject};
use ensemble_core::semantics::{Hole, SemType, SemanticForm, Slot, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE: &str = include_str!("../../../samples/table.json");
const PUT_IN_FRONT: &str = include_str!("../../../samples/put-in-front.jsonl");
const PUT_THERE: &str = include_str!("../../../samples/put-there.jsonl");
const PICK_DESTINATION: &str = include_str!("../../../samples/pick-destination.jsonl");

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table() -> Scene {
    load_scene(TABLE).expect("sample scene loads")
}

fn object(id: &str, kind: &str, x: f64, z: f64) -> WorldObject {
    WorldObject {
        id: id.into(),
        kind: kind.into(),
        attributes: BTreeSet::new(),
        position: Vec3::new(x, 0.0, z),
        graspable: true,
        held_by: None,
    }
}

fn session(scene: Scene) -> Session {
    let machine = build_interaction_machine().restrict(Mode::Dpda).expect("deterministic");
    Session::new(Arc::new(machine), World::new(scene), 0)
}

fn head(polarity: Polarity) -> InputEvent {
    InputEvent::gesture(0, Gesture::Head { polarity })
}

fn point(origin: Vec3, target: Vec3) -> InputEvent {
    InputEvent::gesture(
        0,
        Gesture::Deixis {
            origin,
            direction: target.sub(origin),
        },
    )
}

fn records(moves: &[AgentMove]) -> Vec<String> {
    moves
        .iter()
        .map(|m| match &m.action_record {
            Some(r) => format!("{}:{}", m.kind, r),
            None => format!("{}:{}", m.kind, m.text),
        })
        .collect()
}

fn location_arg(form: &SemanticForm, index: usize) -> Option<Vec3> {
    match form.args.get(index)? {
        Slot::Filled(Value::Location(p)) => Some(*p),
        Slot::Filled(Value::Form(inner)) => location_arg(inner, 0),
        _ => None,
    }
}

/// Ray and ground intersection written out from the line equation.
fn ray_plane(origin: [f64; 3], direction: [f64; 3], ground: f64) -> [f64; 3] {
    let t = (ground - origin[1]) / direction[1];
    [origin[0] + t * direction[0], ground, origin[2] + t * direction[2]]
}

fn near(a: Vec3, b: [f64; 3], tol: f64) -> bool {
    (a.x - b[0]).abs() <= tol && (a.y - b[1]).abs() <= tol && (a.z - b[2]).abs() <= tol
}

fn language_only() -> Outcome {
    let start = Instant::now();
    let scene = table();
    let report = run_trace(scene.clone(), PUT_IN_FRONT, &ReplayOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let moves: Vec<AgentMove> = report.moves().cloned().collect();
    let got = records(&moves);
    check(
        got == ["action:reach(plate)", "action:put(plate,front_of(agent))"],
        || format!("moves {got:?}"),
    )?;
    check(moves[0].text == "Okay, go on." && moves[1].text == "Okay.", || {
        format!("texts {:?}", moves.iter().map(|m| &m.text).collect::<Vec<_>>())
    })?;
    check(report.confusions() == 0 && report.success(), || format!("{:?}", report.mismatches))?;
    // "in front of you": front_offset along the horizontal line from the agent to the human.
    let (a, h) = (scene.agent_origin, scene.human_viewpoint);
    let (dx, dz) = (h.x - a.x, h.z - a.z);
    let len = (dx * dx + dz * dz).sqrt();
    let expected = [
        a.x + scene.front_offset * dx / len,
        scene.ground_plane_height,
        a.z + scene.front_offset * dz / len,
    ];
    let plate = report.final_scene.as_ref().and_then(|s| s.object("plate")).ok_or("plate missing")?;
    check(near(plate.position, expected, 1e-9), || {
        format!("plate at {} expected {expected:?}", plate.position)
    })?;
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("2 moves, 0 confusions, {elapsed:.2?}"))
}

fn pointing() -> Outcome {
    let scene = table();
    let report = run_trace(scene.clone(), PUT_THERE, &ReplayOptions::default()).map_err(|e| e.to_string())?;
    check(report.success(), || format!("{:?} {:?}", report.mismatches, report.errors))?;
    let ray = PUT_THERE
        .lines()
        .filter(|l| l.contains("\"deixis\""))
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .next()
        .ok_or("trace has no pointing line")?;
    let v3 = |k: &str| -> [f64; 3] {
        let a = ray[k].as_array().unwrap();
        [a[0].as_f64().unwrap(), a[1].as_f64().unwrap(), a[2].as_f64().unwrap()]
    };
    let expected = ray_plane(v3("origin"), v3("direction"), scene.ground_plane_height);
    let last = report.moves().last().cloned().ok_or("no moves")?;
    let record = last.action_record.ok_or("last move has no record")?;
    check(record.head == "put", || format!("record {record}"))?;
    check(record.args.first() == Some(&Slot::Filled(Value::Object("plate".into()))), || {
        format!("record {record}")
    })?;
    let loc = location_arg(&record, 1).ok_or_else(|| format!("no location in {record}"))?;
    check(near(loc, expected, 1e-9), || format!("location {loc} expected {expected:?}"))?;
    let plate = report.final_scene.as_ref().and_then(|s| s.object("plate")).ok_or("plate missing")?;
    check(near(plate.position, expected, 1e-9), || format!("plate at {}", plate.position))?;
    Ok(format!("put(plate,{loc}) within 1e-9 of the ray and plane intersection"))
}

fn pick_destination() -> Outcome {
    let report = run_trace(table(), PICK_DESTINATION, &ReplayOptions::default()).map_err(|e| e.to_string())?;
    check(report.success(), || format!("{:?} {:?}", report.mismatches, report.errors))?;

    let mut s = session(table());
    let t = s.handle(&InputEvent::utterance(0, "Put the block on that."));
    check(t.errors.is_empty(), || format!("{:?}", t.errors))?;
    let pending = s.config().top().pending_form.clone().ok_or("no pending form")?;
    check(pending.to_string() == "λw.put(b,on(w))", || format!("pending {pending}"))?;

    let origin = Vec3::new(0.0, 1.5, 3.0);
    let hit = ray_plane([0.0, 1.5, 3.0], [1.1, -1.5, -2.0], 0.0);
    let mut questions = Vec::new();
    let mut counts = Vec::new();
    let mut depths = Vec::new();
    let events = [
        point(origin, Vec3::new(1.1, 0.0, 1.0)),
        head(Polarity::No),
        head(Polarity::No),
        head(Polarity::Yes),
    ];
    let mut last = Vec::new();
    for (i, e) in events.iter().enumerate() {
        let t = s.handle(e);
        check(t.errors.is_empty(), || format!("event {i}: {:?}", t.errors))?;
        questions.extend(t.moves.iter().filter(|m| m.kind == MoveKind::Question).cloned());
        if i < 3 {
            counts.push(s.config().top().candidates.len());
            depths.push(s.config().depth());
        }
        last = t.moves;
    }
    let named: Vec<String> = questions
        .iter()
        .filter_map(|q| q.named_candidate.as_ref().and_then(Value::as_object).map(String::from))
        .collect();
    check(named == ["o1", "o2"], || format!("object questions {named:?}"))?;
    check(counts == [3, 2, 1], || format!("candidate counts {counts:?}"))?;
    check(depths.windows(2).all(|w| w[0] == w[1]), || format!("depths {depths:?}"))?;
    let record = last
        .iter()
        .find_map(|m| m.action_record.clone())
        .ok_or("no executed form")?;
    let expected = SemanticForm {
        head: "put".into(),
        args: vec![
            Slot::Filled(Value::Object("b".into())),
            Slot::Filled(Value::Form(Box::new(SemanticForm {
                head: "on".into(),
                args: vec![Slot::Filled(Value::Region(Vec3::new(hit[0], hit[1], hit[2])))],
                result: SemType::Location,
                binders: vec![],
                satisfied: vec![],
            }))),
        ],
        result: SemType::Truth,
        binders: vec![],
        satisfied: record.satisfied.clone(),
    };
    check(record == expected, || format!("executed {record:?}"))?;
    Ok(format!("questions named o1, o2; candidates {counts:?}; executed {record}"))
}

/// The interaction grammar written out again, one character per terminal.
const RULES: &[(char, &[&str])] = &[
    ('S', &["OA", "AO"]),
    ('O', &["d", "dD", "w", "wD", "N", "ND"]),
    ('A', &["a", "aD", "V", "VD", "P", "PD"]),
    ('D', &["d", "dD", "P", "PD", "N", "ND", "y", "yD", "n", "nD"]),
];
const NONTERMINALS: &str = "SOAD";
const ALPHABET: &str = "dwaynNVP";

fn to_terminal(c: char) -> Terminal {
    match c {
        'd' => Terminal::Deixis,
        'w' => Terminal::StaticIconic,
        'a' => Terminal::DynamicIconic,
        'y' => Terminal::Yes,
        'n' => Terminal::No,
        'N' => Terminal::Noun,
        'V' => Terminal::Verb,
        'P' => Terminal::Prep,
        _ => unreachable!(),
    }
}

/// Every sentence of length at most `max` by breadth-first leftmost rewriting.
/// Every symbol yields at least one terminal, so longer forms are dropped.
fn enumerate_language(max: usize) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([String::from("S")]);
    while let Some(form) = queue.pop_front() {
        let Some(pos) = form.find(|c| NONTERMINALS.contains(c)) else {
            out.insert(form);
            continue;
        };
        let nt = form[pos..].chars().next().unwrap();
        let (_, alts) = RULES.iter().find(|(l, _)| *l == nt).unwrap();
        for alt in *alts {
            let next = format!("{}{}{}", &form[..pos], alt, &form[pos + 1..]);
            if next.chars().count() <= max && seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    out
}

fn grammar_oracle() -> Outcome {
    let start = Instant::now();
    let language = enumerate_language(5);
    let alphabet: Vec<char> = ALPHABET.chars().collect();
    let mut total = 0usize;
    let mut disagreements = Vec::new();
    let mut frontier = vec![String::new()];
    for _ in 1..=5 {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &c in &alphabet {
                let s = format!("{prefix}{c}");
                let terminals: Vec<Terminal> = s.chars().map(to_terminal).collect();
                total += 1;
                if accepts(&terminals) != language.contains(&s) && disagreements.len() < 5 {
                    disagreements.push(s.clone());
                }
                next.push(s);
            }
        }
        frontier = next;
    }
    let elapsed = start.elapsed();
    check(total == 37_448, || format!("enumerated {total} sequences"))?;
    check(disagreements.is_empty(), || format!("disagree on {disagreements:?}"))?;
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    let samples = generate(8, 10_000, 42).map_err(|e| e.to_string())?;
    check(samples.len() == 10_000, || format!("{} samples", samples.len()))?;
    let bad = samples.iter().filter(|s| s.len() > 8 || !accepts(s)).count();
    check(bad == 0, || format!("{bad} samples rejected"))?;
    Ok(format!(
        "{total} sequences agree ({} in the language) in {elapsed:.2?}; 10000 samples accepted",
        language.len()
    ))
}

const FSM_STATES: [&str; 6] = ["Q0", "Q1", "Q2", "Q3", "Q4", "Q5"];

fn fsm(rules: &[(usize, Option<Terminal>, usize)]) -> MachineDef {
    MachineDef {
        start: FSM_STATES[0].into(),
        states: FSM_STATES.iter().map(|s| s.to_string()).collect(),
        transitions: rules
            .iter()
            .map(|&(from, input, to)| RuleDef {
                from: FSM_STATES[from].into(),
                input: input.map_or(InputClass::Epsilon, InputClass::Terminal),
                guard: Guard::Always,
                weight: 1.0,
                op: StackOpKind::None,
                to: FSM_STATES[to].into(),
                emit: None,
                compose: None,
            })
            .collect(),
    }
}

fn random_string(rng: &mut ChaCha8Rng) -> Vec<Terminal> {
    let len = rng.gen_range(0..=16);
    (0..len).map(|_| *Terminal::ALL.choose(rng).unwrap()).collect()
}

fn finite_state_reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut strings = 0;
    let mut mismatches = Vec::new();
    let mut nondeterministic_choices = 0usize;
    for _ in 0..10 {
        // Partial deterministic table; a missing entry leaves the state as is.
        let mut table: BTreeMap<(usize, Terminal), usize> = BTreeMap::new();
        for q in 0..FSM_STATES.len() {
            for t in Terminal::ALL {
                if rng.gen_bool(0.7) {
                    table.insert((q, t), rng.gen_range(0..FSM_STATES.len()));
                }
            }
        }
        let rules: Vec<_> = table.iter().map(|(&(q, t), &r)| (q, Some(t), r)).collect();
        let machine = Machine::<()>::from_def(&fsm(&rules), &Registry::default())
            .map_err(|e| e.to_string())?
            .restrict(Mode::Dfa)
            .map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let input = random_string(&mut rng);
            strings += 1;
            let mut q = 0usize;
            let mut reference = vec![FSM_STATES[q].to_string()];
            for &t in &input {
                q = table.get(&(q, t)).copied().unwrap_or(q);
                reference.push(FSM_STATES[q].to_string());
            }
            let mut config = machine.initial();
            let mut trajectory = vec![config.state.clone()];
            let mut trace = Vec::new();
            for &t in &input {
                machine.feed(&mut (), &mut config, &Input::terminal(t, None), &mut rng, &mut trace);
                trajectory.push(config.state.clone());
            }
            if trajectory != reference && mismatches.len() < 3 {
                mismatches.push(format!("dfa {input:?}: {trajectory:?} vs {reference:?}"));
            }
        }
    }
    check(strings == 1000, || format!("{strings} dfa strings"))?;

    let mut nfa_strings = 0;
    for _ in 0..10 {
        let mut rules = Vec::new();
        for q in 0..FSM_STATES.len() {
            for t in Terminal::ALL {
                for _ in 0..rng.gen_range(0..=2) {
                    rules.push((q, Some(t), rng.gen_range(0..FSM_STATES.len())));
                }
            }
            if rng.gen_bool(0.3) {
                rules.push((q, None, rng.gen_range(0..FSM_STATES.len())));
            }
        }
        let machine = Machine::<()>::from_def(&fsm(&rules), &Registry::default())
            .map_err(|e| e.to_string())?
            .restrict(Mode::Nfa)
            .map_err(|e| e.to_string())?;
        let dfa = SubsetDfa::build(&rules);
        for _ in 0..100 {
            let input = random_string(&mut rng);
            nfa_strings += 1;
            let mut d = 0usize;
            let start: BTreeSet<String> = [FSM_STATES[0].to_string()].into();
            for k in 0..=input.len() {
                if k > 0 {
                    d = dfa.step(d, input[k - 1]);
                }
                let expected: BTreeSet<String> = dfa.sets[d].iter().map(|&q| FSM_STATES[q].to_string()).collect();
                let got = machine.reachable(&start, &input[..k]);
                if got != expected && mismatches.len() < 6 {
                    mismatches.push(format!("nfa {:?}: {got:?} vs {expected:?}", &input[..k]));
                }
            }
            // A single sampled run stays inside the reachable set while it lives.
            let mut config = machine.initial();
            let mut trace = Vec::new();
            let mut d = 0usize;
            for &t in &input {
                let before = trace.len();
                machine.feed(&mut (), &mut config, &Input::terminal(t, None), &mut rng, &mut trace);
                d = dfa.step(d, t);
                if trace.len() > before {
                    break;
                }
                nondeterministic_choices += 1;
                let idx = FSM_STATES.iter().position(|s| *s == config.state).unwrap();
                if !dfa.sets[d].contains(&idx) && mismatches.len() < 6 {
                    mismatches.push(format!("sampled run left the reachable set on {input:?}"));
                }
            }
        }
    }
    check(nfa_strings == 1000, || format!("{nfa_strings} nfa strings"))?;
    check(mismatches.is_empty(), || mismatches.join("; "))?;
    check(build_interaction_machine().restrict(Mode::Dfa).is_err(), || {
        "interaction machine unexpectedly finite-state".into()
    })?;
    Ok(format!(
        "1000 dfa trajectories and 1000 nfa reachable-set traces match; {nondeterministic_choices} sampled steps stayed inside"
    ))
}

/// Subset construction over an NFA with ε-moves, built eagerly from the start set.
struct SubsetDfa {
    sets: Vec<BTreeSet<usize>>,
    delta: BTreeMap<(usize, Terminal), usize>,
}

impl SubsetDfa {
    fn closure(rules: &[(usize, Option<Terminal>, usize)], mut set: BTreeSet<usize>) -> BTreeSet<usize> {
        loop {
            let more: Vec<usize> = rules
                .iter()
                .filter(|(f, i, t)| i.is_none() && set.contains(f) && !set.contains(t))
                .map(|&(_, _, t)| t)
                .collect();
            if more.is_empty() {
                return set;
            }
            set.extend(more);
        }
    }

    fn build(rules: &[(usize, Option<Terminal>, usize)]) -> SubsetDfa {
        let start = Self::closure(rules, [0].into());
        let mut sets = vec![start];
        let mut delta = BTreeMap::new();
        let mut i = 0;
        while i < sets.len() {
            for t in Terminal::ALL {
                let moved: BTreeSet<usize> = rules
                    .iter()
                    .filter(|(f, inp, _)| *inp == Some(t) && sets[i].contains(f))
                    .map(|&(_, _, to)| to)
                    .collect();
                let target = Self::closure(rules, moved);
                let j = match sets.iter().position(|s| *s == target) {
                    Some(j) => j,
                    None => {
                        sets.push(target);
                        sets.len() - 1
                    }
                };
                delta.insert((i, t), j);
            }
            i += 1;
        }
        SubsetDfa { sets, delta }
    }

    fn step(&self, d: usize, t: Terminal) -> usize {
        self.delta[&(d, t)]
    }
}

const STACK_STATES: [&str; 4] = ["S0", "S1", "S2", "S3"];

fn random_frame(rng: &mut ChaCha8Rng) -> ContextFrame {
    let ids = ["a", "b", "c", "d"];
    ContextFrame {
        held: ids.iter().filter(|_| rng.gen_bool(0.25)).map(|s| s.to_string()).collect(),
        candidates: (0..rng.gen_range(0..3))
            .map(|_| Value::Object(ids.choose(rng).unwrap().to_string()))
            .collect(),
        focus: rng.gen_bool(0.5).then(|| ids.choose(rng).unwrap().to_string()),
        ..ContextFrame::default()
    }
}

fn stack_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ops = 0usize;
    let mut underflows = 0usize;
    for seq in 0..10_000 {
        let mut c = Configuration::with_frame("S0", random_frame(&mut rng));
        for _ in 0..rng.gen_range(1..=25) {
            let op = match rng.gen_range(0..6) {
                0 => StackOp::Push(random_frame(&mut rng)),
                1 => StackOp::Pop,
                2 => StackOp::Rewrite(random_frame(&mut rng)),
                3 => StackOp::Flush,
                4 => StackOp::PopUntil(STACK_STATES.choose(&mut rng).unwrap().to_string()),
                _ => StackOp::None,
            };
            ops += 1;
            match exec_stack_op(&c, &op) {
                Ok(next) => c = next,
                Err(_) => underflows += 1,
            }
            c.enter(STACK_STATES.choose(&mut rng).unwrap());
            check(c.depth() >= 1, || format!("sequence {seq}: empty stack after {op:?}"))?;

            let union: BTreeSet<String> = c.stack.iter().flat_map(|f| f.held.iter().cloned()).collect();
            let flushed = exec_stack_op(&c, &StackOp::Flush).map_err(|e| e.to_string())?;
            let only_held = ContextFrame {
                held: union,
                ..ContextFrame::default()
            };
            check(flushed.stack == vec![only_held], || format!("sequence {seq}: flush gave {:?}", flushed.stack))?;
            let rewound = exec_stack_op(&c, &StackOp::PopUntil("NeverEntered".into())).map_err(|e| e.to_string())?;
            check(rewound == flushed, || format!("sequence {seq}: PopUntil differs from Flush"))?;
        }
    }
    Ok(format!("10000 sequences, {ops} operations ({underflows} refused pops)"))
}

/// `k - 1` objects on a small ring around a ground point, plus that point,
/// give `k` candidates for a nested destination.
fn ring_scene(k: usize) -> (Scene, Vec3) {
    let center = Vec3::new(2.0, 0.0, 1.0);
    let mut objects = vec![object("blk", "block", -3.0, -3.0)];
    for i in 0..k - 1 {
        let a = i as f64 * std::f64::consts::TAU / (k - 1) as f64;
        objects.push(object(&format!("r{i:02}"), "cup", center.x + 0.3 * a.cos(), center.z + 0.3 * a.sin()));
    }
    (Scene::new(Vec3::new(0.0, 1.5, 0.0), objects).expect("ring scene"), center)
}

fn disambiguation_bound() -> Outcome {
    let mut runs = 0;
    for k in 1..=20 {
        let (scene, center) = ring_scene(k);
        for nos in 0..=k {
            runs += 1;
            let mut s = session(scene.clone());
            s.handle(&InputEvent::utterance(0, "Put the block on that."));
            let t = s.handle(&point(scene.human_viewpoint, center));
            let offered = s.config().top().candidates.clone();
            check(offered.len() == k, || format!("k={k}: {} candidates", offered.len()))?;
            let mut moves = t.moves;
            for _ in 0..nos {
                moves.extend(s.handle(&head(Polarity::No)).moves);
            }
            if nos < k {
                moves.extend(s.handle(&head(Polarity::Yes)).moves);
            }
            let asked: Vec<&Value> = moves
                .iter()
                .filter(|m| m.kind == MoveKind::Question)
                .filter_map(|m| m.named_candidate.as_ref())
                .collect();
            let want = (nos + 1).min(k);
            check(asked.len() == want, || format!("k={k} no×{nos}: {} questions, want {want}", asked.len()))?;
            check(asked.iter().zip(&offered).all(|(a, b)| *a == b), || {
                format!("k={k}: questions out of candidate order")
            })?;
            let tail = moves.last().ok_or("no moves")?;
            if nos == k {
                check(tail.kind == MoveKind::Confusion, || format!("k={k}: ended with {tail}"))?;
                check(s.config().state == "Reground", || format!("k={k}: in {}", s.config().state))?;
                let again = s.handle(&point(scene.human_viewpoint, center));
                check(again.moves.iter().any(|m| m.kind == MoveKind::Question), || {
                    format!("k={k}: pointing again did not re-offer")
                })?;
            } else {
                let record = tail.action_record.as_ref().ok_or_else(|| format!("k={k}: no action"))?;
                check(tail.kind == MoveKind::Action && record.head == "put", || format!("k={k}: {tail}"))?;
            }
        }
    }
    Ok(format!("{runs} runs over k = 1..20"))
}

fn one_shot_learning() -> Outcome {
    let scene = table();
    let mut s = session(scene.clone());
    s.handle(&InputEvent::utterance(0, "The cup."));
    s.handle(&InputEvent::utterance(1, "Grab it."));
    let (entry, _) = s.learn_gesture("mime-cup-hold").map_err(|e| e.to_string())?;
    check(entry.bound_form.to_string() == "grasp(cup)", || format!("bound {}", entry.bound_form))?;
    let mime = InputEvent::gesture(
        2,
        Gesture::IconicStatic {
            shape_id: "mime-cup-hold".into(),
        },
    );

    s.reset();
    check(s.world().held().is_empty(), || "reset kept a held object".into())?;
    let t = s.handle(&mime);
    let grasp = SemanticForm {
        head: "grasp".into(),
        args: vec![Slot::Filled(Value::Object("cup".into()))],
        result: SemType::Truth,
        binders: vec![],
        satisfied: vec![],
    };
    check(t.moves.len() == 1 && t.moves[0].action_record.as_ref() == Some(&grasp), || {
        format!("lone gesture gave {:?}", records(&t.moves))
    })?;
    let cup: BTreeSet<String> = ["cup".to_string()].into();
    check(s.world().held() == cup && s.config().held() == cup, || {
        format!("held {:?}", s.world().held())
    })?;

    s.reset();
    s.handle(&InputEvent::utterance(3, "Put."));
    let before = s.config().top().pending_form.clone().ok_or("no pending put")?;
    check(before.to_string() == "λb.λv.put(b,v)", || format!("pending {before}"))?;
    s.handle(&mime);
    let after = s.config().top().pending_form.clone().ok_or("pending put dropped")?;
    let v = Hole {
        name: "v".into(),
        ty: SemType::Location,
    };
    let expected = SemanticForm {
        head: "put".into(),
        args: vec![Slot::Filled(Value::Object("cup".into())), Slot::Hole(v.clone())],
        result: SemType::Truth,
        binders: vec![v],
        satisfied: vec![grasp],
    };
    check(after == expected, || format!("pending after gesture {after:?}"))?;
    Ok(format!("grasp(cup) alone; {before} became {after}"))
}

enum ObjectMove {
    Named(&'static str),
    Pointed(&'static str),
}

enum ActionMove {
    Say(String),
    Mime(&'static str),
}

fn object_event(scene: &Scene, o: &ObjectMove) -> InputEvent {
    match o {
        ObjectMove::Named(kind) => InputEvent::utterance(0, format!("The {kind}.")),
        ObjectMove::Pointed(id) => point(scene.human_viewpoint, scene.object(id).unwrap().position),
    }
}

fn action_event(a: &ActionMove) -> InputEvent {
    match a {
        ActionMove::Say(text) => InputEvent::utterance(0, text.clone()),
        ActionMove::Mime(motion) => InputEvent::gesture(
            0,
            Gesture::IconicDynamic {
                motion_id: (*motion).into(),
            },
        ),
    }
}

fn final_record(s: &mut Session, events: &[InputEvent]) -> Result<SemanticForm, String> {
    let mut last = None;
    for e in events {
        let t = s.handle(e);
        if !t.errors.is_empty() {
            return Err(format!("{:?}", t.errors));
        }
        if let Some(r) = t.moves.iter().rev().find_map(|m| m.action_record.clone()) {
            last = Some(r);
        }
    }
    last.ok_or_else(|| "no action record".into())
}

fn order_symmetry() -> Outcome {
    // Themes stand alone in their pointing regions; the bowl sits beside the box.
    let themes = [("cup", "cup"), ("knife", "knife"), ("plate", "plate"), ("b", "block")];
    let objects = [("cup", "cup"), ("knife", "knife"), ("plate", "plate"), ("b", "block"), ("o1", "bowl")];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scene = table();
    let mut checked = 0;
    for i in 0..100 {
        let &(id, kind) = themes.choose(&mut rng).unwrap();
        let object_move = if rng.gen_bool(0.5) {
            ObjectMove::Named(kind)
        } else {
            ObjectMove::Pointed(id)
        };
        let landmark = objects.iter().filter(|(o, _)| *o != id).collect::<Vec<_>>();
        let &&(_, lm_kind) = landmark.choose(&mut rng).unwrap();
        let action_move = match rng.gen_range(0..5) {
            0 => ActionMove::Say("Grab it.".into()),
            1 => ActionMove::Mime("claw"),
            2 => ActionMove::Say(format!("Put it on the {lm_kind}.")),
            3 => ActionMove::Say(format!("In the {lm_kind}.")),
            _ => ActionMove::Say("Put it in front of you.".into()),
        };
        let o = object_event(&scene, &object_move);
        let a = action_event(&action_move);
        let oa = final_record(&mut session(scene.clone()), &[o.clone(), a.clone()])
            .map_err(|e| format!("pair {i} OA: {e}"))?;
        let ao = final_record(&mut session(scene.clone()), &[a, o]).map_err(|e| format!("pair {i} AO: {e}"))?;
        check(oa == ao, || format!("pair {i}: OA {oa} vs AO {ao}"))?;
        check(oa.is_saturated() && oa.head != "reach", || format!("pair {i}: {oa}"))?;
        checked += 1;
    }
    Ok(format!("{checked} pairs give identical records"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("language-only dialogue replay", language_only),
        ("pointing dialogue replay", pointing),
        ("disambiguation walkthrough", pick_destination),
        ("grammar membership oracle", grammar_oracle),
        ("finite-state reductions", finite_state_reductions),
        ("stack operation laws", stack_laws),
        ("disambiguation bound", disambiguation_bound),
        ("one-shot gesture learning", one_shot_learning),
        ("order symmetry", order_symmetry),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
