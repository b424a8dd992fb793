//! Trace replay, grammar fuzzing and the live-session wire protocol.

mod fuzz;
mod protocol;
mod term;
mod trace;

pub use fuzz::{check_invariants, fuzz, fuzz_scene, synthesize, FuzzReport, FUZZ_SHAPE};
pub use protocol::{ClientEnvelope, ClientMessage, Connection, ServerMessage, WireMove};
pub use term::{Term, TermError};
pub use trace::{
    config_digest, parse_trace, run_trace, Direction, ExpectedMove, HarnessError, ReplayOptions, TraceLine,
    TraceRecord, TraceReport, COORDINATE_TOLERANCE,
};
