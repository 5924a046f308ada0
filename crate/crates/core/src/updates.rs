//! Update tokens and the canonical embedding of configurations as token
//! sequences.
//!
//! An update token `(q, w, d)` writes `w` under the head, enters `q` and
//! moves by `d`. Folding a sequence of them over the blank configuration
//! yields a configuration; [`embed`] produces a short sequence whose fold
//! reproduces a given configuration up to translation.

use std::fmt;

use crate::machine::{Configuration, Move, Signature, StateId, SymbolId, TuringMachine};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct UpdateToken {
    pub state: StateId,
    pub write: SymbolId,
    pub mv: Move,
}

impl fmt::Display for UpdateToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q{},s{},{})", self.state.0, self.write.0, self.mv)
    }
}

/// Data alphabet for configuration-level simulations: update tokens and the
/// result bits returned by subcomputations.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CfgSymbol {
    Update(UpdateToken),
    Bit(bool),
}

impl fmt::Display for CfgSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfgSymbol::Update(u) => u.fmt(f),
            CfgSymbol::Bit(b) => write!(f, "{}", u8::from(*b)),
        }
    }
}

pub fn update(c: &Configuration, u: &UpdateToken) -> Configuration {
    let mut next = c.clone();
    apply(&mut next, u);
    next
}

fn apply(c: &mut Configuration, u: &UpdateToken) {
    c.write(c.head, u.write);
    c.state = u.state;
    c.head += u.mv.delta();
}

/// Folds `tokens` over `start`.
pub fn fold<'a, I>(start: &Configuration, tokens: I) -> Configuration
where
    I: IntoIterator<Item = &'a UpdateToken>,
{
    let mut c = start.clone();
    for u in tokens {
        apply(&mut c, u);
    }
    c
}

/// The blank configuration: initial state, empty tape, head at 0.
pub fn blank_config(sig: &Signature) -> Configuration {
    Configuration::blank(sig.initial, sig.blank)
}

/// Configuration encoded by `tokens`, folded from the blank configuration.
pub fn conf<'a, I>(sig: &Signature, tokens: I) -> Configuration
where
    I: IntoIterator<Item = &'a UpdateToken>,
{
    fold(&blank_config(sig), tokens)
}

/// Canonical walk over the span `[L, R]` of `c` (non-blank cells and head).
///
/// Sweeps right writing every cell, then (unless the head is at `R`) walks
/// back left rewriting each cell until it stands on the head cell. Every
/// token carries the state of `c`. The result has length `R - L + 1` when
/// the head is at `R` and `2R - L - p` otherwise.
pub fn embed(c: &Configuration) -> Vec<UpdateToken> {
    let (lo, hi) = c.span();
    let p = c.head;
    let tok = |i: i64, mv| UpdateToken {
        state: c.state,
        write: c.read(i),
        mv,
    };
    let mut out = Vec::with_capacity((2 * (hi - lo) + 1) as usize);
    out.extend((lo..hi).map(|i| tok(i, Move::Right)));
    if p == hi {
        out.push(tok(hi, Move::Stay));
    } else {
        out.push(tok(hi, Move::Left));
        out.extend((p + 1..hi).rev().map(|i| tok(i, Move::Left)));
    }
    out
}

pub fn embed_len(c: &Configuration) -> usize {
    let (lo, hi) = c.span();
    if c.head == hi {
        (hi - lo + 1) as usize
    } else {
        (2 * hi - lo - c.head) as usize
    }
}

pub fn canon(sig: &Signature, tokens: &[UpdateToken]) -> Vec<UpdateToken> {
    embed(&conf(sig, tokens))
}

/// Two sequences are equivalent when they fold to the same configuration up
/// to translation.
pub fn equivalent(sig: &Signature, a: &[UpdateToken], b: &[UpdateToken]) -> bool {
    conf(sig, a).normalized() == conf(sig, b).normalized()
}

/// The update token that performs one machine step from `c`.
pub fn step_token(tm: &TuringMachine, c: &Configuration) -> UpdateToken {
    let act = tm.action(c.state, c.read_head());
    UpdateToken {
        state: act.next,
        write: act.write,
        mv: act.mv,
    }
}
