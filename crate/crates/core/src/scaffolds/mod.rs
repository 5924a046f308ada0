//! Recursive agentic systems: scaffold programs that orchestrate generator
//! queries and recursive calls to scaffolds of the same system.
//!
//! A scaffold is a deterministic step program. Each invocation is resumed
//! with the answer to its previous query and either issues another query,
//! outputs a result, or fails. [`Session`] evaluates invocations with an
//! explicit stack, memoizes `(scaffold, input)` results, and returns ⊥ on a
//! query that revisits an invocation still in progress.

mod eval;
mod file;
pub mod fixtures;
mod generators;
mod programs;

pub use eval::{apply_operator, kleene_fixpoint, KleeneError, KleeneResult, Memo, OracleRef, QueryEvent, Session, SessionStats};
pub use file::{load_system, parse_system, SystemFile, SystemFileError};
pub use generators::{IdentityGenerator, KeepSuffix, LeftmostTransition, MajorityDenoiser, OverwriteTransition, Table};
pub use programs::{
    run_diffusion_loop, run_prover_verifier, run_summarization_loop, DiffusionLoop, Identity, ProofStatus, Prover,
    RecursiveModel, SelfCall, SummarizationLoop, Verifier,
};

use std::fmt;

use thiserror::Error;

use crate::runtime::Generator;
use crate::token::Token;

/// What an invocation does next.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Step<S> {
    /// Query generator `gen` on `query`.
    Generate { gen: usize, query: Vec<Token<S>> },
    /// Query the recursion oracle of scaffold `scaffold` on `query`.
    Recurse { scaffold: usize, query: Vec<Token<S>> },
    Output(Vec<Token<S>>),
    /// The program rejects its input or an oracle answer.
    Fail(String),
    /// The program noticed it can never halt (for example a repeated state).
    Diverge(String),
}

/// One running invocation of a scaffold program.
pub trait Invocation<S> {
    /// `None` on the first call, then the answer to the previous query.
    fn resume(&mut self, answer: Option<Vec<Token<S>>>) -> Step<S>;
    /// Work-state size in tokens.
    fn space(&self) -> usize;
}

pub trait Scaffold<S> {
    fn name(&self) -> &str;
    /// Generator indices this program may query.
    fn generators(&self) -> Vec<usize>;
    /// Scaffold indices this program may recurse into.
    fn recursions(&self) -> Vec<usize>;
    fn start<'s>(&'s self, input: &[Token<S>]) -> Box<dyn Invocation<S> + 's>
    where
        S: 's;
}

pub struct NamedGenerator<'a, S> {
    pub name: String,
    pub generator: Box<dyn Generator<S> + 'a>,
}

/// Generators and scaffolds of one system. Indices are positions in the two
/// lists.
pub struct ScaffoldSystem<'a, S> {
    generators: Vec<NamedGenerator<'a, S>>,
    scaffolds: Vec<Box<dyn Scaffold<S> + 'a>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("a system needs at least one scaffold")]
    Empty,
    #[error("scaffold {scaffold} refers to generator {index}, but there are {count}")]
    Generator { scaffold: String, index: usize, count: usize },
    #[error("scaffold {scaffold} refers to scaffold {index}, but there are {count}")]
    Scaffold { scaffold: String, index: usize, count: usize },
}

impl<'a, S> ScaffoldSystem<'a, S> {
    pub fn new(
        generators: Vec<NamedGenerator<'a, S>>,
        scaffolds: Vec<Box<dyn Scaffold<S> + 'a>>,
    ) -> Result<Self, SystemError> {
        if scaffolds.is_empty() {
            return Err(SystemError::Empty);
        }
        for s in &scaffolds {
            if let Some(&index) = s.generators().iter().find(|&&g| g >= generators.len()) {
                return Err(SystemError::Generator {
                    scaffold: s.name().to_string(),
                    index,
                    count: generators.len(),
                });
            }
            if let Some(&index) = s.recursions().iter().find(|&&j| j >= scaffolds.len()) {
                return Err(SystemError::Scaffold {
                    scaffold: s.name().to_string(),
                    index,
                    count: scaffolds.len(),
                });
            }
        }
        Ok(ScaffoldSystem { generators, scaffolds })
    }

    /// The one-scaffold, one-generator system that parses call and return
    /// blocks: the recursive model itself.
    pub fn recursive_model(generator: impl Generator<S> + 'a, program: RecursiveModel<S>) -> Self
    where
        S: crate::token::Symbol + 'a,
    {
        let g = NamedGenerator {
            name: "f".into(),
            generator: Box::new(generator),
        };
        ScaffoldSystem::new(vec![g], vec![Box::new(program)]).expect("indices are fixed")
    }

    pub fn scaffold_count(&self) -> usize {
        self.scaffolds.len()
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn scaffold_index(&self, name: &str) -> Option<usize> {
        self.scaffolds.iter().position(|s| s.name() == name)
    }

    pub fn scaffold_name(&self, index: usize) -> &str {
        self.scaffolds[index].name()
    }

    pub fn generator_name(&self, index: usize) -> &str {
        &self.generators[index].name
    }
}

/// Bounds for one evaluation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EvalBudget {
    space: usize,
    calls: u64,
    depth: usize,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("evaluation budgets must be positive")]
pub struct InvalidBudget;

impl EvalBudget {
    /// `space` bounds each invocation, `calls` the oracle queries of the
    /// whole evaluation, `depth` the nesting of recursive queries.
    pub fn new(space: usize, calls: u64, depth: usize) -> Result<Self, InvalidBudget> {
        if space == 0 || calls == 0 || depth == 0 {
            return Err(InvalidBudget);
        }
        Ok(EvalBudget { space, calls, depth })
    }

    pub fn space(&self) -> usize {
        self.space
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            space: 1 << 16,
            calls: 1_000_000,
            depth: 10_000,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BudgetKind {
    Calls,
    Depth,
}

/// Why an evaluation is undefined.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScaffoldBottom {
    /// A recursive query reached an invocation that is still running.
    #[error("cycle through scaffold {scaffold}")]
    Cycle { scaffold: usize },
    #[error("scaffold {scaffold} diverges: {reason}")]
    Diverged { scaffold: usize, reason: String },
    #[error("{0:?} budget exceeded")]
    BudgetExceeded(BudgetKind),
    #[error("invocation used {used} tokens of space, limit {limit}")]
    SpaceExceeded { limit: usize, used: usize },
    #[error("generator {generator} failed: {message}")]
    GeneratorFailed { generator: usize, message: String },
    #[error("scaffold {scaffold} failed: {message}")]
    ProgramFailed { scaffold: usize, message: String },
    #[error("scaffold {scaffold} queried an oracle it does not declare")]
    UndeclaredOracle { scaffold: usize },
}

impl fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetKind::Calls => "calls",
            BudgetKind::Depth => "depth",
        })
    }
}

/// Evaluates scaffold `r` on `x` in a fresh session.
pub fn evaluate<S: crate::token::Symbol>(
    sys: &mut ScaffoldSystem<'_, S>,
    r: usize,
    x: &[Token<S>],
    budget: EvalBudget,
) -> Result<Vec<Token<S>>, ScaffoldBottom> {
    Session::new(budget).evaluate(sys, r, x)
}
