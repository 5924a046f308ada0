//! SAT as a recursive workload: DIMACS input, a natural-language problem
//! statement, a DPLL policy over text frames, and training-trace export.

mod cnf;
mod dpll;
mod traces;

pub use cnf::{brute_force, parse_dimacs, random_3cnf, render_conditions, Band, CnfFormula, DimacsError};
pub use dpll::{analyze, Assignment, DpllGenerator, Verdict};
pub use traces::{gen_traces, read_jsonl, replay, write_jsonl, ReplayGenerator, TraceSample};

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::runtime::{run_with_root, AnswerFormat, RunConfig, RunResult};
use crate::token::text;

pub const DEFAULT_QUESTION: &str = "Is there a way to assign values so all these conditions are satisfied?";

/// A formula with the problem text shown to the solver.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SatInstance {
    pub formula: CnfFormula,
    pub root_problem: String,
    /// The root frame's task; the last line of the problem text.
    pub question: String,
}

impl SatInstance {
    /// Default problem statement listing the variables and conditions.
    pub fn from_formula(formula: CnfFormula) -> Self {
        let intro = format!(
            "There are {} variables: {}. Each one is either true or false.",
            formula.num_vars,
            formula.names.join(", ")
        );
        Self::with_narrative(formula, &intro, DEFAULT_QUESTION)
    }

    /// Problem text `narrative`, the rendered condition list, then `question`.
    pub fn with_narrative(formula: CnfFormula, narrative: &str, question: &str) -> Self {
        let root_problem = format!(
            "{narrative}\n\nConditions:\n{}\n{question}",
            render_conditions(&formula)
        );
        SatInstance {
            formula,
            root_problem,
            question: question.to_string(),
        }
    }

    /// Uses `text` verbatim; its last non-empty line is the question.
    pub fn with_problem_text(formula: CnfFormula, text: &str) -> Self {
        let text = text.trim_end_matches('\n');
        let question = text.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
        SatInstance {
            question: question.to_string(),
            root_problem: text.to_string(),
            formula,
        }
    }
}

/// Runtime settings for SAT: root prefixing and answer-preserving returns.
pub fn sat_config() -> RunConfig<char> {
    RunConfig::default()
        .with_prompt_prefixing()
        .with_question_preservation(AnswerFormat::text())
}

#[derive(Clone, Debug)]
pub struct SolveRun {
    /// `Some(true)` for "Yes", `Some(false)` for "No".
    pub satisfiable: Option<bool>,
    pub result: RunResult<char>,
}

pub fn solve(instance: &SatInstance, config: &RunConfig<char>) -> SolveRun {
    let mut g = DpllGenerator::new(&instance.formula, instance.question.clone());
    let result = run_with_root(
        &text::tokenize(&instance.root_problem),
        &text::tokenize(&instance.question),
        &mut g,
        config,
    );
    SolveRun {
        satisfiable: parse_answer(result.answer()),
        result,
    }
}

/// Reads a `Yes` or `No` answer.
pub fn parse_answer(a: Option<&[crate::token::Token<char>]>) -> Option<bool> {
    match text::render(a?).as_str() {
        "Yes" => Some(true),
        "No" => Some(false),
        _ => None,
    }
}

/// The five-scientists example instance shipped with the crate.
pub fn five_scientists() -> SatInstance {
    let f = parse_dimacs(include_str!("../../fixtures/five_scientists.cnf")).expect("valid fixture");
    SatInstance::with_problem_text(f, include_str!("../../fixtures/five_scientists.txt"))
}

/// Per-instance measurements for the band comparison.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SatMetrics {
    pub satisfiable: Option<bool>,
    /// Tokens generated across all steps.
    pub trajectory: u64,
    /// Largest per-step context in tokens: prompt, prefix and generated
    /// block together.
    pub max_context: usize,
    pub max_local_space: usize,
    pub max_depth: usize,
    pub steps: u64,
}

impl SatMetrics {
    pub fn ratio(&self) -> f64 {
        self.trajectory as f64 / self.max_context.max(1) as f64
    }
}

pub fn measure(instance: &SatInstance) -> SatMetrics {
    let (samples, result) = gen_traces(instance);
    let len = |s: &str| text::tokenize(s).len();
    let max_context = samples
        .iter()
        .map(|s| len(&s.user) + len(&s.assistant_prefix) + len(&s.assistant_content))
        .max()
        .unwrap_or(0);
    SatMetrics {
        satisfiable: parse_answer(result.answer()),
        trajectory: result.trace.total_tokens_emitted,
        max_context,
        max_local_space: result.trace.max_local_space,
        max_depth: result.trace.max_depth,
        steps: result.trace.total_steps,
    }
}

/// `count` random instances for `band`: variable counts uniform in `vars`,
/// clause counts uniform in the band's range. Each band draws from its own
/// generator seeded with `seed`, so a band's sample does not depend on which
/// other bands are requested.
pub fn sample_band(band: Band, count: usize, vars: RangeInclusive<usize>, seed: u64) -> Vec<SatInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(vars.clone());
            let m = rng.gen_range(band.clause_range());
            SatInstance::from_formula(random_3cnf(&mut rng, n, m))
        })
        .collect()
}
