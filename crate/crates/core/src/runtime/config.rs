use thiserror::Error;

use crate::token::{text, Token};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{name} limit must be strictly positive")]
pub struct InvalidLimit {
    pub name: &'static str,
}

/// Resource caps enforced by the runtime. All three are strictly positive.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Limits {
    max_local_space: usize,
    max_depth: usize,
    max_steps: u64,
}

impl Limits {
    pub fn new(max_local_space: usize, max_depth: usize, max_steps: u64) -> Result<Self, InvalidLimit> {
        if max_local_space == 0 {
            return Err(InvalidLimit { name: "local space" });
        }
        if max_depth == 0 {
            return Err(InvalidLimit { name: "depth" });
        }
        if max_steps == 0 {
            return Err(InvalidLimit { name: "step" });
        }
        Ok(Limits {
            max_local_space,
            max_depth,
            max_steps,
        })
    }

    pub fn max_local_space(&self) -> usize {
        self.max_local_space
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_local_space: 1 << 16,
            max_depth: 10_000,
            max_steps: 1_000_000,
        }
    }
}

/// Tokens placed around a returned answer when question preservation is on.
///
/// The parent frame grows by `infix ∘ answer ∘ suffix` after the preserved
/// question. With both empty the answer is appended bare.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnswerFormat<S> {
    pub infix: Vec<Token<S>>,
    pub suffix: Vec<Token<S>>,
}

impl<S> AnswerFormat<S> {
    pub fn bare() -> Self {
        AnswerFormat {
            infix: Vec::new(),
            suffix: Vec::new(),
        }
    }
}

impl AnswerFormat<char> {
    /// `q. The answer is: a.` followed by a newline.
    pub fn text() -> Self {
        AnswerFormat {
            infix: text::tokenize(". The answer is: "),
            suffix: text::tokenize(".\n"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RunConfig<S> {
    /// Show the root problem to the generator on every step after the first.
    pub prompt_prefixing: bool,
    /// Keep each call's question in the caller frame, followed by the answer.
    pub question_preservation: Option<AnswerFormat<S>>,
    pub limits: Limits,
    pub loop_detection: bool,
    /// Keep a per-step record of depth and space in the trace.
    pub record_steps: bool,
}

impl<S> Default for RunConfig<S> {
    fn default() -> Self {
        RunConfig {
            prompt_prefixing: false,
            question_preservation: None,
            limits: Limits::default(),
            loop_detection: true,
            record_steps: false,
        }
    }
}

impl<S> RunConfig<S> {
    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_prompt_prefixing(mut self) -> Self {
        self.prompt_prefixing = true;
        self
    }

    pub fn with_question_preservation(mut self, format: AnswerFormat<S>) -> Self {
        self.question_preservation = Some(format);
        self
    }

    pub fn without_loop_detection(mut self) -> Self {
        self.loop_detection = false;
        self
    }

    pub fn recording_steps(mut self) -> Self {
        self.record_steps = true;
        self
    }
}
