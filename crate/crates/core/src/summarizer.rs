//! Simulating a Turing machine in bounded context by periodic
//! summarization.
//!
//! The run keeps two frames. The outer one only dispatches: it closes a
//! pending call prefix handed up from below, or returns a final bit. The
//! inner frame is `z [SEP] u`, a canonical configuration `z` followed by the
//! update tokens `u` produced since the last summary. Each step appends one
//! update token. Once `u` reaches the threshold the inner frame returns
//! `<call> canon(z u) [SEP]`, and the dispatcher closes that call, which
//! starts a fresh inner frame from the summary.

use crate::machine::{Configuration, SymbolId, TuringMachine, Verdict};
use crate::runtime::{run_observed, Generator, GenerationError, RunConfig, RunResult, StepEvent, View};
use crate::token::Token;
use crate::updates::{conf, embed, embed_len, fold, step_token, CfgSymbol, UpdateToken};

type SumToken = Token<CfgSymbol>;

/// Fixed token overhead per summary cycle beyond the summary itself, and for
/// the start and end of a run: the `<return>` wrapper, the trailing `[SEP]`
/// and the dispatcher's close marker per summary; one close marker plus two
/// three-token bit returns overall.
pub const CYCLE_OVERHEAD: usize = 5;
pub const FIXED_OVERHEAD: usize = 7;

pub struct SummarizerGenerator<'a> {
    tm: &'a TuringMachine,
    threshold: usize,
}

impl<'a> SummarizerGenerator<'a> {
    /// Summarizes after `threshold` update tokens.
    pub fn new(tm: &'a TuringMachine, threshold: usize) -> Self {
        assert!(threshold > 0, "summary threshold must be positive");
        SummarizerGenerator { tm, threshold }
    }

    fn malformed(msg: &str) -> GenerationError {
        GenerationError::Malformed(msg.to_string())
    }

    fn dispatch(&self, frame: &[SumToken]) -> Result<Vec<SumToken>, GenerationError> {
        if let [Token::Sym(CfgSymbol::Bit(b))] = frame {
            return Ok(vec![Token::RetOpen, Token::Sym(CfgSymbol::Bit(*b)), Token::RetClose]);
        }
        let open = frame
            .iter()
            .rposition(|t| *t == Token::CallOpen)
            .ok_or_else(|| Self::malformed("dispatcher frame has no pending call"))?;
        if frame[open + 1..].iter().any(Token::is_block_marker) {
            return Err(Self::malformed("pending call is not well formed"));
        }
        Ok(vec![Token::CallClose])
    }

    fn simulate(&self, frame: &[SumToken]) -> Result<Vec<SumToken>, GenerationError> {
        let sep = frame
            .iter()
            .position(|t| *t == Token::Sep)
            .ok_or_else(|| Self::malformed("simulation frame has no separator"))?;
        let updates = |part: &[SumToken]| -> Result<Vec<UpdateToken>, GenerationError> {
            part.iter()
                .map(|t| match t {
                    Token::Sym(CfgSymbol::Update(u)) => Ok(*u),
                    _ => Err(Self::malformed("simulation frame holds a non-update token")),
                })
                .collect()
        };
        let z = updates(&frame[..sep])?;
        let u = updates(&frame[sep + 1..])?;
        let sig = self.tm.signature();
        let c = fold(&conf(sig, &z), &u);
        if self.tm.is_halting(c.state) {
            let bit = Token::Sym(CfgSymbol::Bit(sig.is_accepting(c.state)));
            return Ok(vec![Token::RetOpen, bit, Token::RetClose]);
        }
        if u.len() < self.threshold {
            return Ok(vec![Token::Sym(CfgSymbol::Update(step_token(self.tm, &c)))]);
        }
        if u.len() > self.threshold {
            return Err(Self::malformed("simulation frame overshot the threshold"));
        }
        let mut out = vec![Token::RetOpen, Token::CallOpen];
        out.extend(embed(&c).into_iter().map(|u| Token::Sym(CfgSymbol::Update(u))));
        out.push(Token::Sep);
        out.push(Token::RetClose);
        Ok(out)
    }

    /// Next block for a frame of either kind, told apart by content.
    pub fn next_block(&self, frame: &[SumToken]) -> Result<Vec<SumToken>, GenerationError> {
        let dispatcher = frame.contains(&Token::CallOpen)
            || matches!(frame, [Token::Sym(CfgSymbol::Bit(_))]);
        if dispatcher {
            self.dispatch(frame)
        } else {
            self.simulate(frame)
        }
    }
}

impl Generator<CfgSymbol> for SummarizerGenerator<'_> {
    fn generate(&mut self, view: &View<'_, CfgSymbol>) -> Result<Vec<SumToken>, GenerationError> {
        self.next_block(view.active)
    }
}

/// Initial dispatcher frame for `c0`: a pending call `<call> embed(c0) [SEP]`.
pub fn initial_prompt(c0: &Configuration) -> Vec<SumToken> {
    let mut p = vec![Token::CallOpen];
    p.extend(embed(c0).into_iter().map(|u| Token::Sym(CfgSymbol::Update(u))));
    p.push(Token::Sep);
    p
}

/// Longest embedding over the configurations the machine visits on `input`
/// within `max_steps` steps.
pub fn max_embed_len(tm: &TuringMachine, input: &[SymbolId], max_steps: u64) -> usize {
    crate::machine::trajectory(tm, input, max_steps)
        .iter()
        .map(embed_len)
        .max()
        .unwrap_or(1)
}

#[derive(Clone, Debug)]
pub struct SummaryRun {
    pub verdict: Option<Verdict>,
    /// Bound on embedding length used to set the threshold.
    pub n: usize,
    pub threshold: usize,
    pub result: RunResult<CfgSymbol>,
}

/// Runs the summarizing simulation with threshold `factor * n`, where `n`
/// bounds the embedding length (computed from the machine's own run when
/// not given).
pub fn summarize(
    tm: &TuringMachine,
    input: &[SymbolId],
    factor: usize,
    n: Option<usize>,
    config: &RunConfig<CfgSymbol>,
) -> SummaryRun {
    summarize_observed(tm, input, factor, n, config, &mut |_| {})
}

pub fn summarize_observed(
    tm: &TuringMachine,
    input: &[SymbolId],
    factor: usize,
    n: Option<usize>,
    config: &RunConfig<CfgSymbol>,
    observer: &mut dyn FnMut(&StepEvent<'_, CfgSymbol>),
) -> SummaryRun {
    let n = n.unwrap_or_else(|| max_embed_len(tm, input, config.limits.max_steps()));
    let threshold = factor * n;
    let c0 = tm.initial_config(input);
    let mut generator = SummarizerGenerator::new(tm, threshold);
    let result = run_observed(None, &initial_prompt(&c0), &mut generator, config, observer);
    let verdict = match result.answer() {
        Some([Token::Sym(CfgSymbol::Bit(b))]) => Some(Verdict::from_bool(*b)),
        _ => None,
    };
    SummaryRun {
        verdict,
        n,
        threshold,
        result,
    }
}
