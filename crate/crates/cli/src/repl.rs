use std::io::{self, BufRead, Write};
use std::sync::Arc;

use ensemble_core::dialogue::{build_interaction_machine, GestureLexicon, Session, World};
use ensemble_core::grammar::{Gesture, InputEvent, Polarity};
use ensemble_core::scene::{Scene, Vec3};

const HELP: &str = "\
Type an utterance, or one of:
  :point X Z          point at a ground coordinate
  :ray OX OY OZ DX DY DZ  point along a ray
  :shape ID           static iconic gesture
  :motion ID          dynamic iconic gesture
  :yes / :no          head gesture
  :learn ID           learn a gesture from what was just shown
  :scene / :stack     show the scene or the stack
  :reset              start over
  :quit";

fn numbers(args: &[&str], n: usize) -> Option<Vec<f64>> {
    let v: Vec<f64> = args.iter().filter_map(|a| a.parse().ok()).collect();
    (v.len() == n && args.len() == n).then_some(v)
}

/// Reads commands from `input` until end of input or `:quit`. Returns the
/// gesture lexicon as it stands at the end.
pub fn run(scene: Scene, gestures: Option<GestureLexicon>, input: impl BufRead, mut out: impl Write) -> io::Result<GestureLexicon> {
    let mut world = World::new(scene);
    if let Some(g) = gestures {
        world.gestures = g;
    }
    let mut session = Session::new(Arc::new(build_interaction_machine()), world, 0);
    writeln!(out, "{HELP}")?;
    for (time, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let time = time as u64;
        let words: Vec<&str> = line.split_whitespace().collect();
        let event = match words[0] {
            ":quit" => break,
            ":help" => {
                writeln!(out, "{HELP}")?;
                continue;
            }
            ":scene" => {
                for o in &session.world().scene.objects {
                    writeln!(out, "{} {} {:?} at {}", o.id, o.kind, o.attributes, o.position)?;
                }
                continue;
            }
            ":stack" => {
                let c = session.config();
                writeln!(out, "state {}", c.state)?;
                for f in &c.stack {
                    writeln!(out, "  {}", serde_json::to_string(f).unwrap_or_default())?;
                }
                continue;
            }
            ":reset" => {
                session.reset();
                continue;
            }
            ":learn" if words.len() == 2 => {
                match session.learn_gesture(words[1]) {
                    Ok((_, ack)) => writeln!(out, "{ack}")?,
                    Err(e) => writeln!(out, "[confusion] {e}")?,
                }
                continue;
            }
            ":point" => match numbers(&words[1..], 2) {
                Some(v) => {
                    let scene = &session.world().scene;
                    let origin = scene.human_viewpoint;
                    let target = Vec3::new(v[0], scene.ground_plane_height, v[1]);
                    Gesture::Deixis {
                        origin,
                        direction: target.sub(origin),
                    }
                }
                None => {
                    writeln!(out, "usage: :point X Z")?;
                    continue;
                }
            },
            ":ray" => match numbers(&words[1..], 6) {
                Some(v) => Gesture::Deixis {
                    origin: Vec3::new(v[0], v[1], v[2]),
                    direction: Vec3::new(v[3], v[4], v[5]),
                },
                None => {
                    writeln!(out, "usage: :ray OX OY OZ DX DY DZ")?;
                    continue;
                }
            },
            ":shape" if words.len() == 2 => Gesture::IconicStatic {
                shape_id: words[1].into(),
            },
            ":motion" if words.len() == 2 => Gesture::IconicDynamic {
                motion_id: words[1].into(),
            },
            ":yes" => Gesture::Head { polarity: Polarity::Yes },
            ":no" => Gesture::Head { polarity: Polarity::No },
            w if w.starts_with(':') => {
                writeln!(out, "unknown command; :help lists them")?;
                continue;
            }
            _ => {
                for m in session.handle(&InputEvent::utterance(time, line)).moves {
                    writeln!(out, "{m}")?;
                }
                continue;
            }
        };
        for m in session.handle(&InputEvent::gesture(time, event)).moves {
            writeln!(out, "{m}")?;
        }
    }
    Ok(session.world().gestures.clone())
}
