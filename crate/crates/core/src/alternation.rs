//! Evaluating an alternating machine's game value with the recursive
//! runtime.
//!
//! A frame holds the canonical embedding of a configuration followed by the
//! result bits collected so far. Each non-halting frame calls its two
//! successors in order and then returns the OR or AND of their bits;
//! halting frames return their verdict at once. Frames never exceed the
//! longest embedding plus two bits.

use crate::machine::{Mode, NormalizedAtm, SymbolId};
use crate::runtime::{run, Generator, GenerationError, RunConfig, RunResult, View};
use crate::token::Token;
use crate::updates::{conf, embed, CfgSymbol, UpdateToken};

pub type CfgToken = Token<CfgSymbol>;

pub fn frame_tokens(z: &[UpdateToken]) -> Vec<CfgToken> {
    z.iter().map(|u| Token::Sym(CfgSymbol::Update(*u))).collect()
}

/// Splits a frame into its update prefix and trailing result bits.
pub fn split_frame(frame: &[CfgToken]) -> Result<(Vec<UpdateToken>, Vec<bool>), GenerationError> {
    let mut updates = Vec::new();
    let mut bits = Vec::new();
    for t in frame {
        match t {
            Token::Sym(CfgSymbol::Update(u)) if bits.is_empty() => updates.push(*u),
            Token::Sym(CfgSymbol::Bit(b)) => bits.push(*b),
            other => {
                return Err(GenerationError::Malformed(format!(
                    "unexpected {other:?} in evaluation frame"
                )))
            }
        }
    }
    Ok((updates, bits))
}

/// The evaluation policy as a next-block generator.
pub struct EvalGenerator<'a> {
    atm: &'a NormalizedAtm,
}

impl<'a> EvalGenerator<'a> {
    pub fn new(atm: &'a NormalizedAtm) -> Self {
        EvalGenerator { atm }
    }

    pub fn next_block(&self, frame: &[CfgToken]) -> Result<Vec<CfgToken>, GenerationError> {
        let (z, bits) = split_frame(frame)?;
        let sig = self.atm.signature();
        let c = conf(sig, &z);
        let ret = |b: bool| vec![Token::RetOpen, Token::Sym(CfgSymbol::Bit(b)), Token::RetClose];
        if self.atm.is_halting(c.state) {
            return Ok(ret(sig.is_accepting(c.state)));
        }
        match bits.as_slice() {
            [] | [_] => {
                let succ = self.atm.successor(&c, bits.len());
                let mut out = vec![Token::CallOpen];
                out.extend(frame_tokens(&embed(&succ)));
                out.push(Token::CallClose);
                Ok(out)
            }
            [b0, b1] => Ok(ret(match self.atm.mode(c.state) {
                Mode::Existential => *b0 || *b1,
                Mode::Universal => *b0 && *b1,
            })),
            _ => Err(GenerationError::Malformed("more than two result bits".into())),
        }
    }
}

impl Generator<CfgSymbol> for EvalGenerator<'_> {
    fn generate(&mut self, view: &View<'_, CfgSymbol>) -> Result<Vec<CfgToken>, GenerationError> {
        self.next_block(view.active)
    }
}

#[derive(Clone, Debug)]
pub struct EvalRun {
    /// The value, or `None` when the run ended in a bottom outcome.
    pub value: Option<bool>,
    pub result: RunResult<CfgSymbol>,
}

/// Evaluates the machine on `input` from its initial configuration.
pub fn eval_atm(atm: &NormalizedAtm, input: &[SymbolId], config: &RunConfig<CfgSymbol>) -> EvalRun {
    let start = frame_tokens(&embed(&atm.initial_config(input)));
    let result = run(&start, &mut EvalGenerator::new(atm), config);
    let value = match result.answer() {
        Some([Token::Sym(CfgSymbol::Bit(b))]) => Some(*b),
        _ => None,
    };
    EvalRun { value, result }
}
