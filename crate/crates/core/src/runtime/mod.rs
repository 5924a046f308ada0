//! The recursive execution engine: classifies each generated top sequence,
//! updates the context stack, and meters space, depth and steps.

mod classify;
mod config;
mod loops;
mod run;
mod stack;
mod trace;

pub use classify::{classify_output, GeneratorOutput, OutputKind};
pub use config::{AnswerFormat, InvalidLimit, Limits, RunConfig};
pub use loops::{detect_loop, LoopDetector};
pub use run::{
    run, run_observed, run_with_root, Bottom, FnGenerator, GenerationError, Generator, LimitKind,
    Outcome, RunResult, StepEvent, View,
};
pub use stack::{apply_transition, measure, ContextStack, Space, Transition};
pub use trace::{ResourceTrace, StepRecord, TraceParseError};
