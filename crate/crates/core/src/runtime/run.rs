use std::fmt;

use thiserror::Error;

use super::classify::{classify_output, OutputKind};
use super::config::RunConfig;
use super::loops::LoopDetector;
use super::stack::ContextStack;
use super::trace::{ResourceTrace, StepRecord};
use crate::token::{Symbol, Token};

/// What a generator sees on one invocation.
#[derive(Debug)]
pub struct View<'a, S> {
    /// The root problem, present when prompt prefixing applies to this step.
    pub root: Option<&'a [Token<S>]>,
    pub active: &'a [Token<S>],
    pub depth: usize,
    /// Zero-based invocation index.
    pub step: u64,
}

impl<S: Clone> View<'_, S> {
    /// The full context: root prefix (if shown) followed by the active frame.
    pub fn context(&self) -> Vec<Token<S>> {
        let mut v = self.root.map(<[_]>::to_vec).unwrap_or_default();
        v.extend_from_slice(self.active);
        v
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    /// The generator could not make sense of its input or produced junk.
    #[error("malformed: {0}")]
    Malformed(String),
    /// The generator itself failed (for example a network backend).
    #[error("generator failed: {0}")]
    Failed(String),
}

/// A next-block generator.
///
/// Returns the continuation only: the generated top sequence is the active
/// frame followed by the returned tokens.
pub trait Generator<S> {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError>;
}

impl<S, G: Generator<S> + ?Sized> Generator<S> for &mut G {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        (**self).generate(view)
    }
}

impl<S, G: Generator<S> + ?Sized> Generator<S> for Box<G> {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        (**self).generate(view)
    }
}

/// Adapts a closure over the full context into a generator.
pub struct FnGenerator<F>(pub F);

impl<S, F> Generator<S> for FnGenerator<F>
where
    S: Clone,
    F: FnMut(&[Token<S>]) -> Vec<Token<S>>,
{
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        Ok((self.0)(&view.context()))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LimitKind {
    LocalSpace,
    Depth,
    Steps,
}

/// Why a run produced no answer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Bottom {
    LoopDetected,
    LimitExceeded(LimitKind),
    MalformedOutput,
    GeneratorFailed,
}

impl fmt::Display for Bottom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bottom::LoopDetected => f.write_str("loop detected"),
            Bottom::LimitExceeded(LimitKind::LocalSpace) => f.write_str("local space limit exceeded"),
            Bottom::LimitExceeded(LimitKind::Depth) => f.write_str("depth limit exceeded"),
            Bottom::LimitExceeded(LimitKind::Steps) => f.write_str("step limit exceeded"),
            Bottom::MalformedOutput => f.write_str("malformed output"),
            Bottom::GeneratorFailed => f.write_str("generator failed"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Outcome<S> {
    Answer(Vec<Token<S>>),
    Bottom(Bottom),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RunResult<S> {
    pub outcome: Outcome<S>,
    pub trace: ResourceTrace,
    /// Human-readable context for a bottom outcome.
    pub detail: Option<String>,
}

impl<S> RunResult<S> {
    pub fn answer(&self) -> Option<&[Token<S>]> {
        match &self.outcome {
            Outcome::Answer(a) => Some(a),
            Outcome::Bottom(_) => None,
        }
    }

    pub fn bottom(&self) -> Option<Bottom> {
        match self.outcome {
            Outcome::Bottom(b) => Some(b),
            Outcome::Answer(_) => None,
        }
    }
}

/// Reported to an observer after every successful step.
#[derive(Debug)]
pub struct StepEvent<'a, S> {
    /// One-based index of the step just taken.
    pub step: u64,
    /// Depth at which the generator was invoked.
    pub depth: usize,
    /// The active frame the generator saw.
    pub active: &'a [Token<S>],
    pub continuation: &'a [Token<S>],
    pub kind: OutputKind,
    /// Stack after the transition (unchanged on the final return).
    pub stack: &'a ContextStack<S>,
}

/// Runs `generator` from the single-frame stack `[prompt]`; the prompt also
/// serves as the root problem.
pub fn run<S: Symbol, G: Generator<S> + ?Sized>(
    prompt: &[Token<S>],
    generator: &mut G,
    config: &RunConfig<S>,
) -> RunResult<S> {
    run_observed(None, prompt, generator, config, &mut |_| {})
}

/// Like [`run`] with a root problem distinct from the initial frame. The
/// root is shown from the first step when prompt prefixing is on.
pub fn run_with_root<S: Symbol, G: Generator<S> + ?Sized>(
    root: &[Token<S>],
    prompt: &[Token<S>],
    generator: &mut G,
    config: &RunConfig<S>,
) -> RunResult<S> {
    run_observed(Some(root), prompt, generator, config, &mut |_| {})
}

pub fn run_observed<S: Symbol, G: Generator<S> + ?Sized>(
    root: Option<&[Token<S>]>,
    prompt: &[Token<S>],
    generator: &mut G,
    config: &RunConfig<S>,
    observer: &mut dyn FnMut(&StepEvent<'_, S>),
) -> RunResult<S> {
    let limits = config.limits;
    let explicit_root = root.is_some();
    let root_tokens: &[Token<S>] = root.unwrap_or(prompt);
    let mut stack = ContextStack::new(prompt.to_vec());
    let mut trace = ResourceTrace::default();
    let mut loops = config.loop_detection.then(LoopDetector::new);

    let space = stack.measure();
    trace.observe(1, space.local, space.global);
    if config.record_steps {
        trace.steps.push(StepRecord {
            step: 0,
            depth: 1,
            local: space.local,
            global: space.global,
        });
    }
    if let Some(d) = loops.as_mut() {
        d.seen_before(&stack);
    }

    let bottom = |trace: ResourceTrace, b: Bottom, detail: String| RunResult {
        outcome: Outcome::Bottom(b),
        trace,
        detail: Some(detail),
    };

    if space.local > limits.max_local_space() {
        return bottom(
            trace,
            Bottom::LimitExceeded(LimitKind::LocalSpace),
            "prompt exceeds local space".into(),
        );
    }

    let mut step: u64 = 0;
    loop {
        if step >= limits.max_steps() {
            return bottom(
                trace,
                Bottom::LimitExceeded(LimitKind::Steps),
                format!("{step} steps taken"),
            );
        }
        let depth = stack.depth();
        let show_root = config.prompt_prefixing && (explicit_root || step > 0);
        let view = View {
            root: show_root.then_some(root_tokens),
            active: stack.active(),
            depth,
            step,
        };
        let cont = match generator.generate(&view) {
            Ok(c) => c,
            Err(GenerationError::Malformed(m)) => {
                return bottom(trace, Bottom::MalformedOutput, m);
            }
            Err(GenerationError::Failed(m)) => {
                return bottom(trace, Bottom::GeneratorFailed, m);
            }
        };
        step += 1;
        trace.total_steps = step;
        trace.total_tokens_emitted += cont.len() as u64;

        let active = stack.active();
        let mut y = Vec::with_capacity(active.len() + cont.len());
        y.extend_from_slice(active);
        y.extend_from_slice(&cont);
        trace.max_active_context = trace.max_active_context.max(y.len());
        let shown = if show_root { root_tokens.len() } else { 0 };
        trace.max_visible_context = trace.max_visible_context.max(shown + y.len());
        let out = classify_output(&y);
        let kind = out.kind;

        if y.len() > limits.max_local_space() {
            let (b, what) = match kind {
                OutputKind::Plain => (Bottom::MalformedOutput, "plain output"),
                _ => (Bottom::LimitExceeded(LimitKind::LocalSpace), "generated block"),
            };
            return bottom(trace, b, format!("{what} of {} tokens at step {step}", y.len()));
        }
        if kind == OutputKind::Call && depth + 1 > limits.max_depth() {
            return bottom(
                trace,
                Bottom::LimitExceeded(LimitKind::Depth),
                format!("call at depth {depth} on step {step}"),
            );
        }

        let active_before = stack.active().to_vec();
        let preservation = config.question_preservation.as_ref();
        if let Some(answer) = stack.apply(out, preservation) {
            observer(&StepEvent {
                step,
                depth,
                active: &active_before,
                continuation: &cont,
                kind,
                stack: &stack,
            });
            return RunResult {
                outcome: Outcome::Answer(answer),
                trace,
                detail: None,
            };
        }

        let space = stack.measure();
        if space.local > limits.max_local_space() {
            return bottom(
                trace,
                Bottom::LimitExceeded(LimitKind::LocalSpace),
                format!("frame of {} tokens at step {step}", space.local),
            );
        }
        trace.observe(stack.depth(), space.local, space.global);
        if config.record_steps {
            trace.steps.push(StepRecord {
                step,
                depth: stack.depth(),
                local: space.local,
                global: space.global,
            });
        }
        observer(&StepEvent {
            step,
            depth,
            active: &active_before,
            continuation: &cont,
            kind,
            stack: &stack,
        });
        if let Some(d) = loops.as_mut() {
            if d.seen_before(&stack) {
                return bottom(
                    trace,
                    Bottom::LoopDetected,
                    format!("stack state repeated at step {step}"),
                );
            }
        }
    }
}
