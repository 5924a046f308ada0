use std::collections::HashSet;

use super::{evaluate, EvalBudget, Invocation, NamedGenerator, Scaffold, ScaffoldBottom, ScaffoldSystem, Step};
use crate::runtime::{classify_output, AnswerFormat, FnGenerator, Generator, OutputKind};
use crate::token::text::{self, TextToken};
use crate::token::{Symbol, Token};

/// Outputs its input.
pub struct Identity;

impl<S: Symbol> Scaffold<S> for Identity {
    fn name(&self) -> &str {
        "identity"
    }
    fn generators(&self) -> Vec<usize> {
        Vec::new()
    }
    fn recursions(&self) -> Vec<usize> {
        Vec::new()
    }
    fn start<'s>(&'s self, input: &[Token<S>]) -> Box<dyn Invocation<S> + 's>
    where
        S: 's,
    {
        let x = input.to_vec();
        Box::new(Once(Some(x)))
    }
}

struct Once<S>(Option<Vec<Token<S>>>);

impl<S> Invocation<S> for Once<S> {
    fn resume(&mut self, _: Option<Vec<Token<S>>>) -> Step<S> {
        Step::Output(self.0.take().unwrap_or_default())
    }
    fn space(&self) -> usize {
        0
    }
}

/// Asks scaffold `target` about its own input and outputs the answer.
pub struct SelfCall {
    pub name: String,
    pub target: usize,
}

impl<S: Symbol> Scaffold<S> for SelfCall {
    fn name(&self) -> &str {
        &self.name
    }
    fn generators(&self) -> Vec<usize> {
        Vec::new()
    }
    fn recursions(&self) -> Vec<usize> {
        vec![self.target]
    }
    fn start<'s>(&'s self, input: &[Token<S>]) -> Box<dyn Invocation<S> + 's>
    where
        S: 's,
    {
        Box::new(SelfCallRun {
            target: self.target,
            input: Some(input.to_vec()),
        })
    }
}

struct SelfCallRun<S> {
    target: usize,
    input: Option<Vec<Token<S>>>,
}

impl<S> Invocation<S> for SelfCallRun<S> {
    fn resume(&mut self, answer: Option<Vec<Token<S>>>) -> Step<S> {
        match (answer, self.input.take()) {
            (None, Some(query)) => Step::Recurse {
                scaffold: self.target,
                query,
            },
            (Some(a), _) => Step::Output(a),
            (None, None) => Step::Fail("resumed without an answer".into()),
        }
    }
    fn space(&self) -> usize {
        0
    }
}

/// The call/return scaffold: repeatedly extends its frame with the
/// generator's continuation, answers a trailing call block by recursing into
/// `me` on the payload, and outputs the payload of a trailing return block.
///
/// With a single generator and `me` pointing at itself this is the recursive
/// model: same frames, same generator queries in the same order.
pub struct RecursiveModel<S> {
    pub gen: usize,
    pub me: usize,
    /// Keep each call's question in the frame before its answer.
    pub preservation: Option<AnswerFormat<S>>,
    /// Treat a repeated frame within one invocation as divergence.
    pub loop_detection: bool,
}

impl<S> RecursiveModel<S> {
    pub fn new(gen: usize, me: usize) -> Self {
        RecursiveModel {
            gen,
            me,
            preservation: None,
            loop_detection: true,
        }
    }

    pub fn with_preservation(mut self, format: AnswerFormat<S>) -> Self {
        self.preservation = Some(format);
        self
    }

    pub fn without_loop_detection(mut self) -> Self {
        self.loop_detection = false;
        self
    }
}

impl<S: Symbol> Scaffold<S> for RecursiveModel<S> {
    fn name(&self) -> &str {
        "recursive_model"
    }
    fn generators(&self) -> Vec<usize> {
        vec![self.gen]
    }
    fn recursions(&self) -> Vec<usize> {
        vec![self.me]
    }
    fn start<'s>(&'s self, input: &[Token<S>]) -> Box<dyn Invocation<S> + 's>
    where
        S: 's,
    {
        let mut seen = HashSet::new();
        if self.loop_detection {
            seen.insert(input.to_vec());
        }
        Box::new(ModelRun {
            cfg: self,
            frame: input.to_vec(),
            awaiting_child: false,
            seen,
        })
    }
}

struct ModelRun<'s, S> {
    cfg: &'s RecursiveModel<S>,
    frame: Vec<Token<S>>,
    awaiting_child: bool,
    seen: HashSet<Vec<Token<S>>>,
}

impl<S: Symbol> ModelRun<'_, S> {
    fn next_query(&mut self) -> Step<S> {
        if self.cfg.loop_detection && !self.seen.insert(self.frame.clone()) {
            return Step::Diverge("frame repeated".into());
        }
        Step::Generate {
            gen: self.cfg.gen,
            query: self.frame.clone(),
        }
    }
}

impl<S: Symbol> Invocation<S> for ModelRun<'_, S> {
    fn resume(&mut self, answer: Option<Vec<Token<S>>>) -> Step<S> {
        let Some(a) = answer else {
            return Step::Generate {
                gen: self.cfg.gen,
                query: self.frame.clone(),
            };
        };
        if self.awaiting_child {
            self.awaiting_child = false;
            match &self.cfg.preservation {
                Some(fmt) => {
                    self.frame.extend(fmt.infix.iter().cloned());
                    self.frame.extend(a);
                    self.frame.extend(fmt.suffix.iter().cloned());
                }
                None => self.frame.extend(a),
            }
            return self.next_query();
        }
        let mut y = std::mem::take(&mut self.frame);
        y.extend(a);
        let out = classify_output(&y);
        match out.kind {
            OutputKind::Plain => {
                self.frame = out.prefix;
                self.next_query()
            }
            OutputKind::Return => Step::Output(out.payload),
            OutputKind::Call => {
                self.frame = out.prefix;
                if self.cfg.preservation.is_some() {
                    self.frame.extend(out.payload.iter().cloned());
                }
                self.awaiting_child = true;
                Step::Recurse {
                    scaffold: self.cfg.me,
                    query: out.payload,
                }
            }
        }
    }

    fn space(&self) -> usize {
        self.frame.len()
    }
}

/// Generate, and summarize whenever the generated sequence reaches
/// `max_len`, until the sequence ends with `stop`. Never recurses.
pub struct SummarizationLoop<S> {
    pub generator: usize,
    pub summarizer: usize,
    pub max_len: usize,
    pub stop: Vec<Token<S>>,
}

impl<S: Symbol> Scaffold<S> for SummarizationLoop<S> {
    fn name(&self) -> &str {
        "summarize"
    }
    fn generators(&self) -> Vec<usize> {
        vec![self.generator, self.summarizer]
    }
    fn recursions(&self) -> Vec<usize> {
        Vec::new()
    }
    fn start<'s>(&'s self, input: &[Token<S>]) -> Box<dyn Invocation<S> + 's>
    where
        S: 's,
    {
        Box::new(SummaryRun {
            cfg: self,
            x: input.to_vec(),
            summarizing: false,
            seen: HashSet::new(),
        })
    }
}

struct SummaryRun<'s, S> {
    cfg: &'s SummarizationLoop<S>,
    x: Vec<Token<S>>,
    summarizing: bool,
    seen: HashSet<Vec<Token<S>>>,
}

impl<S: Symbol> SummaryRun<'_, S> {
    fn advance(&mut self) -> Step<S> {
        if self.x.ends_with(&self.cfg.stop) {
            return Step::Output(self.x.clone());
        }
        if !self.seen.insert(self.x.clone()) {
            return Step::Diverge("sequence repeated".into());
        }
        Step::Generate {
            gen: self.cfg.generator,
            query: self.x.clone(),
        }
    }
}

impl<S: Symbol> Invocation<S> for SummaryRun<'_, S> {
    fn resume(&mut self, answer: Option<Vec<Token<S>>>) -> Step<S> {
        match answer {
            None => self.advance(),
            Some(s) if self.summarizing => {
                self.summarizing = false;
                self.x = s;
                self.advance()
            }
            Some(y) if y.len() >= self.cfg.max_len => {
                self.summarizing = true;
                Step::Generate {
                    gen: self.cfg.summarizer,
                    query: y,
                }
            }
            Some(y) => {
                self.x = y;
                self.advance()
            }
        }
    }

    fn space(&self) -> usize {
        self.x.len()
    }
}

/// Fixed-length refinement: the denoiser proposes a mask-free sequence, the
/// transition combines it with the current state (queried on
/// `state [SEP] proposal`), until no `mask` remains.
pub struct DiffusionLoop<S> {
    pub denoiser: usize,
    pub transition: usize,
    pub mask: Token<S>,
}

impl<S: Symbol> Scaffold<S> for DiffusionLoop<S> {
    fn name(&self) -> &str {
        "diffusion"
    }
    fn generators(&self) -> Vec<usize> {
        vec![self.denoiser, self.transition]
    }
    fn recursions(&self) -> Vec<usize> {
        Vec::new()
    }
    fn start<'s>(&'s self, input: &[Token<S>]) -> Box<dyn Invocation<S> + 's>
    where
        S: 's,
    {
        Box::new(DiffusionRun {
            cfg: self,
            x: input.to_vec(),
            denoised: false,
            seen: HashSet::new(),
        })
    }
}

struct DiffusionRun<'s, S> {
    cfg: &'s DiffusionLoop<S>,
    x: Vec<Token<S>>,
    denoised: bool,
    seen: HashSet<Vec<Token<S>>>,
}

impl<S: Symbol> DiffusionRun<'_, S> {
    fn advance(&mut self) -> Step<S> {
        if !self.x.contains(&self.cfg.mask) {
            return Step::Output(self.x.clone());
        }
        if !self.seen.insert(self.x.clone()) {
            return Step::Diverge("state repeated".into());
        }
        Step::Generate {
            gen: self.cfg.denoiser,
            query: self.x.clone(),
        }
    }
}

impl<S: Symbol> Invocation<S> for DiffusionRun<'_, S> {
    fn resume(&mut self, answer: Option<Vec<Token<S>>>) -> Step<S> {
        match answer {
            None => self.advance(),
            Some(next) if self.denoised => {
                self.denoised = false;
                if next.len() != self.x.len() {
                    return Step::Fail(format!("transition changed the length from {} to {}", self.x.len(), next.len()));
                }
                self.x = next;
                self.advance()
            }
            Some(y) => {
                if y.len() != self.x.len() {
                    return Step::Fail(format!("denoiser changed the length from {} to {}", self.x.len(), y.len()));
                }
                self.denoised = true;
                let mut query = self.x.clone();
                query.push(Token::Sep);
                query.extend(y);
                Step::Generate {
                    gen: self.cfg.transition,
                    query,
                }
            }
        }
    }

    fn space(&self) -> usize {
        self.x.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ProofStatus {
    Correct,
    Wrong,
}

impl ProofStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProofStatus::Correct => "correct",
            ProofStatus::Wrong => "wrong",
        }
    }

    pub fn tokens(self) -> Vec<TextToken> {
        text::tokenize(self.as_str())
    }

    pub fn parse(tokens: &[TextToken]) -> Option<Self> {
        match text::render(tokens).as_str() {
            "correct" => Some(ProofStatus::Correct),
            "wrong" => Some(ProofStatus::Wrong),
            _ => None,
        }
    }
}

fn join(a: &[TextToken], b: &[TextToken]) -> Vec<TextToken> {
    let mut v = a.to_vec();
    v.push(Token::Sep);
    v.extend_from_slice(b);
    v
}

/// Tries one proof per seed, querying the prover generator on
/// `goal [SEP] seed` and the verifier scaffold on `goal [SEP] proof`.
/// Outputs `correct` at the first verified proof, `wrong` when none is.
pub struct Prover {
    pub generator: usize,
    pub verifier: usize,
    pub seeds: Vec<Vec<TextToken>>,
}

impl Scaffold<char> for Prover {
    fn name(&self) -> &str {
        "prover"
    }
    fn generators(&self) -> Vec<usize> {
        vec![self.generator]
    }
    fn recursions(&self) -> Vec<usize> {
        vec![self.verifier]
    }
    fn start<'s>(&'s self, input: &[TextToken]) -> Box<dyn Invocation<char> + 's>
    where
        char: 's,
    {
        Box::new(ProverRun {
            cfg: self,
            goal: input.to_vec(),
            attempt: 0,
            verifying: false,
        })
    }
}

struct ProverRun<'s> {
    cfg: &'s Prover,
    goal: Vec<TextToken>,
    attempt: usize,
    verifying: bool,
}

impl ProverRun<'_> {
    fn propose(&mut self) -> Step<char> {
        match self.cfg.seeds.get(self.attempt) {
            Some(seed) => Step::Generate {
                gen: self.cfg.generator,
                query: join(&self.goal, seed),
            },
            None => Step::Output(ProofStatus::Wrong.tokens()),
        }
    }
}

impl Invocation<char> for ProverRun<'_> {
    fn resume(&mut self, answer: Option<Vec<TextToken>>) -> Step<char> {
        match answer {
            None => self.propose(),
            Some(verdict) if self.verifying => {
                self.verifying = false;
                match ProofStatus::parse(&verdict) {
                    Some(ProofStatus::Correct) => Step::Output(ProofStatus::Correct.tokens()),
                    Some(ProofStatus::Wrong) => {
                        self.attempt += 1;
                        self.propose()
                    }
                    None => Step::Fail(format!("verifier answered {:?}", text::render(&verdict))),
                }
            }
            Some(proof) => {
                self.verifying = true;
                Step::Recurse {
                    scaffold: self.cfg.verifier,
                    query: join(&self.goal, &proof),
                }
            }
        }
    }

    fn space(&self) -> usize {
        // attempt counter, written in binary
        usize::BITS as usize - self.attempt.leading_zeros() as usize
    }
}

/// Checks `goal [SEP] proof` with the verifier generator, which answers
/// `correct`, `wrong`, or `incomplete` followed by `[SEP] subgoal` for each
/// missing subgoal. Subgoals are handed to the prover scaffold; the output
/// is `correct` when every one of them is.
pub struct Verifier {
    pub generator: usize,
    pub prover: usize,
}

impl Scaffold<char> for Verifier {
    fn name(&self) -> &str {
        "verifier"
    }
    fn generators(&self) -> Vec<usize> {
        vec![self.generator]
    }
    fn recursions(&self) -> Vec<usize> {
        vec![self.prover]
    }
    fn start<'s>(&'s self, input: &[TextToken]) -> Box<dyn Invocation<char> + 's>
    where
        char: 's,
    {
        Box::new(VerifierRun {
            cfg: self,
            input: input.to_vec(),
            subgoals: None,
            next: 0,
            all_correct: true,
        })
    }
}

struct VerifierRun<'s> {
    cfg: &'s Verifier,
    input: Vec<TextToken>,
    subgoals: Option<Vec<Vec<TextToken>>>,
    next: usize,
    all_correct: bool,
}

impl VerifierRun<'_> {
    fn next_subgoal(&mut self) -> Step<char> {
        let goals = self.subgoals.as_ref().expect("set before proving subgoals");
        match goals.get(self.next) {
            Some(g) => {
                self.next += 1;
                Step::Recurse {
                    scaffold: self.cfg.prover,
                    query: g.clone(),
                }
            }
            None => {
                let status = if self.all_correct {
                    ProofStatus::Correct
                } else {
                    ProofStatus::Wrong
                };
                Step::Output(status.tokens())
            }
        }
    }
}

impl Invocation<char> for VerifierRun<'_> {
    fn resume(&mut self, answer: Option<Vec<TextToken>>) -> Step<char> {
        let Some(a) = answer else {
            return Step::Generate {
                gen: self.cfg.generator,
                query: self.input.clone(),
            };
        };
        if self.subgoals.is_some() {
            match ProofStatus::parse(&a) {
                Some(s) => self.all_correct &= s == ProofStatus::Correct,
                None => return Step::Fail(format!("prover answered {:?}", text::render(&a))),
            }
            return self.next_subgoal();
        }
        let mut parts = a.split(|t| *t == Token::Sep);
        let head = parts.next().unwrap_or_default();
        if let Some(status) = ProofStatus::parse(head) {
            return Step::Output(status.tokens());
        }
        if text::render(head) != "incomplete" {
            return Step::Fail(format!("verifier generator answered {:?}", text::render(&a)));
        }
        self.subgoals = Some(parts.map(<[_]>::to_vec).collect());
        self.next_subgoal()
    }

    fn space(&self) -> usize {
        self.subgoals
            .as_ref()
            .map_or(0, |g| g.iter().map(|s| s.len() + 1).sum::<usize>() + 1)
    }
}

/// Runs the summarization loop on `x` as a one-scaffold system.
pub fn run_summarization_loop<S, F, G>(
    x: &[Token<S>],
    generate: F,
    summarize: G,
    max_len: usize,
    stop: &[Token<S>],
    budget: EvalBudget,
) -> Result<Vec<Token<S>>, ScaffoldBottom>
where
    S: Symbol,
    F: FnMut(&[Token<S>]) -> Vec<Token<S>>,
    G: FnMut(&[Token<S>]) -> Vec<Token<S>>,
{
    let program = SummarizationLoop {
        generator: 0,
        summarizer: 1,
        max_len,
        stop: stop.to_vec(),
    };
    let mut sys = ScaffoldSystem::new(
        vec![named("generate", FnGenerator(generate)), named("summarize", FnGenerator(summarize))],
        vec![Box::new(program)],
    )
    .expect("indices are fixed");
    evaluate(&mut sys, 0, x, budget)
}

/// Runs the diffusion loop on `x` as a one-scaffold system.
pub fn run_diffusion_loop<S, F, G>(
    x: &[Token<S>],
    mask: Token<S>,
    denoise: F,
    transition: G,
    budget: EvalBudget,
) -> Result<Vec<Token<S>>, ScaffoldBottom>
where
    S: Symbol,
    F: Generator<S>,
    G: Generator<S>,
{
    let program = DiffusionLoop {
        denoiser: 0,
        transition: 1,
        mask,
    };
    let mut sys = ScaffoldSystem::new(
        vec![named("denoise", denoise), named("transition", transition)],
        vec![Box::new(program)],
    )
    .expect("indices are fixed");
    evaluate(&mut sys, 0, x, budget)
}

/// Runs the prover/verifier pair on `goal`. The prover is scaffold 0.
pub fn run_prover_verifier<P, V>(
    goal: &str,
    seeds: &[&str],
    prover: P,
    verifier: V,
    budget: EvalBudget,
) -> Result<ProofStatus, ScaffoldBottom>
where
    P: Generator<char>,
    V: Generator<char>,
{
    let p = Prover {
        generator: 0,
        verifier: 1,
        seeds: seeds.iter().map(|s| text::tokenize(s)).collect(),
    };
    let v = Verifier {
        generator: 1,
        prover: 0,
    };
    let mut sys = ScaffoldSystem::new(
        vec![named("f_p", prover), named("f_v", verifier)],
        vec![Box::new(p), Box::new(v)],
    )
    .expect("indices are fixed");
    let out = evaluate(&mut sys, 0, &text::tokenize(goal), budget)?;
    Ok(ProofStatus::parse(&out).expect("the prover outputs a status"))
}

fn named<'a, S, G: Generator<S> + 'a>(name: &str, g: G) -> NamedGenerator<'a, S> {
    NamedGenerator {
        name: name.into(),
        generator: Box::new(g),
    }
}
