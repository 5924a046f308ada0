//! Deciding a Turing machine by mutual recursion over time.
//!
//! Five functions describe the computation on input `x`:
//!
//! * `STATE(t)`: the state after `t` steps,
//! * `POS(t)`: the head position after `t` steps,
//! * `CELL(t, p)`: the symbol in cell `p` after `t` steps,
//! * `SYMBOL(t)`: the symbol under the head after `t` steps,
//! * `RUN(t)`: the verdict, searching forward from step `t`.
//!
//! Each step of `t` is computed from the values at `t - 1` by calling
//! lower functions, so frames only hold the input, two binary numbers and a
//! few returned values. A frame reads
//! `F <sep> x <sep> bin(t) [<sep> ±bin(p)]` followed by `[SEP] value` for
//! each answer received; the number of `[SEP]`s is the phase.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;

use crate::machine::{Signature, StateId, SymbolId, TuringMachine, Verdict};
use crate::runtime::{
    run_observed, Generator, GenerationError, RunConfig, RunResult, View,
};
use crate::token::Token;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Func {
    State,
    Pos,
    Cell,
    Symbol,
    Run,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::State, Func::Pos, Func::Cell, Func::Symbol, Func::Run];

    pub fn name(self) -> &'static str {
        match self {
            Func::State => "STATE",
            Func::Pos => "POS",
            Func::Cell => "CELL",
            Func::Symbol => "SYMBOL",
            Func::Run => "RUN",
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Data alphabet of the construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RtmSymbol {
    Func(Func),
    /// Argument separator, distinct from the runtime's `[SEP]`.
    ArgSep,
    Bit(bool),
    /// Sign of a position: `true` for negative.
    Sign(bool),
    State(StateId),
    Tape(SymbolId),
}

impl fmt::Display for RtmSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RtmSymbol::Func(g) => write!(f, "{g}"),
            RtmSymbol::ArgSep => f.write_str("<sep>"),
            RtmSymbol::Bit(b) => write!(f, "{}", u8::from(*b)),
            RtmSymbol::Sign(neg) => f.write_str(if *neg { "-" } else { "+" }),
            RtmSymbol::State(q) => write!(f, "q{}", q.0),
            RtmSymbol::Tape(a) => write!(f, "s{}", a.0),
        }
    }
}

pub type RtmToken = Token<RtmSymbol>;

/// Renders tokens with machine names for states and symbols.
pub fn render_with(tokens: &[RtmToken], sig: &Signature) -> String {
    let mut out = String::new();
    for t in tokens {
        match t {
            Token::Sym(RtmSymbol::State(q)) => out.push_str(&format!("[{}]", sig.state_name(*q))),
            Token::Sym(RtmSymbol::Tape(a)) => out.push_str(sig.symbol_name(*a)),
            other => out.push_str(&other.to_string()),
        }
    }
    out
}

fn push_bits(out: &mut Vec<RtmToken>, n: u64) {
    if n == 0 {
        out.push(Token::Sym(RtmSymbol::Bit(false)));
        return;
    }
    for i in (0..64 - n.leading_zeros()).rev() {
        out.push(Token::Sym(RtmSymbol::Bit(n >> i & 1 == 1)));
    }
}

fn push_pos(out: &mut Vec<RtmToken>, p: i64) {
    out.push(Token::Sym(RtmSymbol::Sign(p < 0)));
    push_bits(out, p.unsigned_abs());
}

/// A value returned by one of the functions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    State(StateId),
    Tape(SymbolId),
    Pos(i64),
    Verdict(bool),
}

impl Value {
    fn push(&self, out: &mut Vec<RtmToken>) {
        match self {
            Value::State(q) => out.push(Token::Sym(RtmSymbol::State(*q))),
            Value::Tape(a) => out.push(Token::Sym(RtmSymbol::Tape(*a))),
            Value::Pos(p) => push_pos(out, *p),
            Value::Verdict(b) => out.push(Token::Sym(RtmSymbol::Bit(*b))),
        }
    }
}

/// A parsed frame.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Frame {
    pub func: Func,
    pub input: Vec<SymbolId>,
    pub t: u64,
    pub p: Option<i64>,
    pub results: Vec<Value>,
}

impl Frame {
    pub fn new(func: Func, input: &[SymbolId], t: u64, p: Option<i64>) -> Self {
        Frame {
            func,
            input: input.to_vec(),
            t,
            p,
            results: Vec::new(),
        }
    }

    /// The frame's header tokens (no results).
    pub fn tokens(&self) -> Vec<RtmToken> {
        header(self.func, &self.input, self.t, self.p)
    }

    fn key(&self) -> (Func, u64, i64) {
        (self.func, self.t, self.p.unwrap_or(0))
    }
}

fn header(func: Func, input: &[SymbolId], t: u64, p: Option<i64>) -> Vec<RtmToken> {
    let mut out = Vec::with_capacity(input.len() + 16);
    out.push(Token::Sym(RtmSymbol::Func(func)));
    out.push(Token::Sym(RtmSymbol::ArgSep));
    out.extend(input.iter().map(|a| Token::Sym(RtmSymbol::Tape(*a))));
    out.push(Token::Sym(RtmSymbol::ArgSep));
    push_bits(&mut out, t);
    if let Some(p) = p {
        out.push(Token::Sym(RtmSymbol::ArgSep));
        push_pos(&mut out, p);
    }
    out
}

fn bad(msg: impl Into<String>) -> GenerationError {
    GenerationError::Malformed(msg.into())
}

struct Cursor<'a> {
    toks: &'a [RtmToken],
    i: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&RtmToken> {
        self.toks.get(self.i)
    }

    fn sym(&mut self) -> Option<RtmSymbol> {
        match self.toks.get(self.i) {
            Some(Token::Sym(s)) => {
                self.i += 1;
                Some(*s)
            }
            _ => None,
        }
    }

    fn expect(&mut self, s: RtmSymbol) -> Result<(), GenerationError> {
        match self.sym() {
            Some(got) if got == s => Ok(()),
            other => Err(bad(format!("expected {s:?}, found {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<u64, GenerationError> {
        let mut n: u64 = 0;
        let mut len = 0;
        while let Some(Token::Sym(RtmSymbol::Bit(b))) = self.peek() {
            n = n
                .checked_mul(2)
                .ok_or_else(|| bad("number overflows"))?
                | u64::from(*b);
            self.i += 1;
            len += 1;
        }
        if len == 0 {
            return Err(bad("expected a binary number"));
        }
        Ok(n)
    }

    fn position(&mut self) -> Result<i64, GenerationError> {
        match self.sym() {
            Some(RtmSymbol::Sign(neg)) => {
                let m = i64::try_from(self.number()?).map_err(|_| bad("position overflows"))?;
                Ok(if neg { -m } else { m })
            }
            other => Err(bad(format!("expected a sign, found {other:?}"))),
        }
    }

    fn value(&mut self, func: Func) -> Result<Value, GenerationError> {
        match self.peek() {
            Some(Token::Sym(RtmSymbol::State(q))) => {
                let q = *q;
                self.i += 1;
                Ok(Value::State(q))
            }
            Some(Token::Sym(RtmSymbol::Tape(a))) => {
                let a = *a;
                self.i += 1;
                Ok(Value::Tape(a))
            }
            Some(Token::Sym(RtmSymbol::Sign(_))) => Ok(Value::Pos(self.position()?)),
            Some(Token::Sym(RtmSymbol::Bit(b))) if func == Func::Run => {
                let b = *b;
                self.i += 1;
                Ok(Value::Verdict(b))
            }
            other => Err(bad(format!("expected a value, found {other:?}"))),
        }
    }
}

pub fn parse_frame(toks: &[RtmToken]) -> Result<Frame, GenerationError> {
    let mut c = Cursor { toks, i: 0 };
    let func = match c.sym() {
        Some(RtmSymbol::Func(f)) => f,
        other => return Err(bad(format!("frame must start with a function tag, found {other:?}"))),
    };
    c.expect(RtmSymbol::ArgSep)?;
    let mut input = Vec::new();
    while let Some(Token::Sym(RtmSymbol::Tape(a))) = c.peek() {
        input.push(*a);
        c.i += 1;
    }
    c.expect(RtmSymbol::ArgSep)?;
    let t = c.number()?;
    let p = if func == Func::Cell {
        c.expect(RtmSymbol::ArgSep)?;
        Some(c.position()?)
    } else {
        None
    };
    let mut results = Vec::new();
    // results are separated by the runtime's [SEP]
    while let Some(tok) = c.peek() {
        if *tok != Token::Sep {
            return Err(bad(format!("unexpected {tok:?} in frame")));
        }
        c.i += 1;
        results.push(c.value(func)?);
    }
    Ok(Frame {
        func,
        input,
        t,
        p,
        results,
    })
}

/// What a frame does next.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Move {
    Call(Frame),
    Return(Value),
}

/// Per-function invocation counts and worst-case subtree sizes.
///
/// `worst[(F, t)]` is the largest number of invocations observed in the
/// subtree of any single evaluation of `F` at time `t` (itself included).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub invocations: BTreeMap<Func, u64>,
    pub worst: BTreeMap<(Func, u64), u64>,
    pub memo_hits: u64,
    counter: u64,
    starts: Vec<u64>,
}

impl CostLedger {
    pub fn total_invocations(&self) -> u64 {
        self.invocations.values().sum()
    }

    pub fn worst_case(&self, func: Func, t: u64) -> Option<u64> {
        self.worst.get(&(func, t)).copied()
    }

    /// Merges another ledger's worst cases and counts into this one.
    pub fn absorb(&mut self, other: &CostLedger) {
        for (k, v) in &other.invocations {
            *self.invocations.entry(*k).or_default() += v;
        }
        for (k, v) in &other.worst {
            let e = self.worst.entry(*k).or_default();
            *e = (*e).max(*v);
        }
        self.memo_hits += other.memo_hits;
    }

    fn enter(&mut self, depth: usize, func: Func) {
        if self.starts.len() < depth {
            self.starts.resize(depth, 0);
        }
        self.starts[depth - 1] = self.counter;
        self.counter += 1;
        *self.invocations.entry(func).or_default() += 1;
    }

    fn leave(&mut self, depth: usize, func: Func, t: u64) {
        let size = self.counter - self.starts[depth - 1];
        let e = self.worst.entry((func, t)).or_default();
        *e = (*e).max(size);
    }
}

/// The recursive decision procedure as a next-block generator.
pub struct RtmGenerator<'a> {
    tm: &'a TuringMachine,
    memo: Option<HashMap<(Func, u64, i64), Value>>,
    pub ledger: CostLedger,
}

impl<'a> RtmGenerator<'a> {
    pub fn new(tm: &'a TuringMachine, memoize: bool) -> Self {
        RtmGenerator {
            tm,
            memo: memoize.then(HashMap::new),
            ledger: CostLedger::default(),
        }
    }

    /// The next move of a frame, ignoring memoization.
    pub fn policy(&self, f: &Frame) -> Result<Move, GenerationError> {
        let tm = self.tm;
        let sig = tm.signature();
        let call = |func, t, p| Move::Call(Frame::new(func, &f.input, t, p));
        let state = |v: &Value| match v {
            Value::State(q) => Ok(*q),
            other => Err(bad(format!("expected a state, got {other:?}"))),
        };
        let sym = |v: &Value| match v {
            Value::Tape(a) => Ok(*a),
            other => Err(bad(format!("expected a symbol, got {other:?}"))),
        };
        let pos = |v: &Value| match v {
            Value::Pos(p) => Ok(*p),
            other => Err(bad(format!("expected a position, got {other:?}"))),
        };
        let r = &f.results;
        let t = f.t;
        let overlong = || Err(bad(format!("{} frame has too many results", f.func)));
        Ok(match f.func {
            Func::State => match r.len() {
                _ if t == 0 && r.is_empty() => Move::Return(Value::State(sig.initial)),
                0 => call(Func::State, t - 1, None),
                1 => call(Func::Symbol, t - 1, None),
                2 => Move::Return(Value::State(tm.action(state(&r[0])?, sym(&r[1])?).next)),
                _ => return overlong(),
            },
            Func::Pos => match r.len() {
                _ if t == 0 && r.is_empty() => Move::Return(Value::Pos(0)),
                0 => call(Func::State, t - 1, None),
                1 => call(Func::Symbol, t - 1, None),
                2 => call(Func::Pos, t - 1, None),
                3 => {
                    let d = tm.action(state(&r[0])?, sym(&r[1])?).mv.delta();
                    Move::Return(Value::Pos(pos(&r[2])? + d))
                }
                _ => return overlong(),
            },
            Func::Cell => {
                let p = f.p.ok_or_else(|| bad("CELL frame without a position"))?;
                match r.len() {
                    _ if t == 0 && r.is_empty() => {
                        let a = usize::try_from(p)
                            .ok()
                            .and_then(|i| f.input.get(i).copied())
                            .unwrap_or(sig.blank);
                        Move::Return(Value::Tape(a))
                    }
                    0 => call(Func::Pos, t - 1, None),
                    1 if pos(&r[0])? != p => call(Func::Cell, t - 1, Some(p)),
                    1 => call(Func::State, t - 1, None),
                    2 if pos(&r[0])? != p => Move::Return(Value::Tape(sym(&r[1])?)),
                    2 => call(Func::Symbol, t - 1, None),
                    3 => Move::Return(Value::Tape(tm.action(state(&r[1])?, sym(&r[2])?).write)),
                    _ => return overlong(),
                }
            }
            Func::Symbol => match r.len() {
                0 => call(Func::Pos, t, None),
                1 => call(Func::Cell, t, Some(pos(&r[0])?)),
                2 => Move::Return(Value::Tape(sym(&r[1])?)),
                _ => return overlong(),
            },
            Func::Run => match r.len() {
                0 => call(Func::State, t, None),
                1 => {
                    let q = state(&r[0])?;
                    if sig.is_accepting(q) {
                        Move::Return(Value::Verdict(true))
                    } else if sig.is_rejecting(q) {
                        Move::Return(Value::Verdict(false))
                    } else {
                        call(Func::Run, t + 1, None)
                    }
                }
                2 => match r[1] {
                    v @ Value::Verdict(_) => Move::Return(v),
                    other => return Err(bad(format!("expected a verdict, got {other:?}"))),
                },
                _ => return overlong(),
            },
        })
    }

    pub fn next_block(&mut self, active: &[RtmToken], depth: usize) -> Result<Vec<RtmToken>, GenerationError> {
        let frame = parse_frame(active)?;
        let fresh = frame.results.is_empty();
        if fresh {
            self.ledger.enter(depth, frame.func);
        }
        let key = frame.key();
        let cached = match (&self.memo, fresh, frame.func) {
            (Some(m), true, f) if f != Func::Run => m.get(&key).copied(),
            _ => None,
        };
        let mv = match cached {
            Some(v) => {
                self.ledger.memo_hits += 1;
                Move::Return(v)
            }
            None => self.policy(&frame)?,
        };
        Ok(match mv {
            Move::Call(child) => {
                let mut out = vec![Token::CallOpen];
                out.extend(child.tokens());
                out.push(Token::CallClose);
                out
            }
            Move::Return(v) => {
                if let Some(m) = self.memo.as_mut() {
                    if frame.func != Func::Run {
                        m.insert(key, v);
                    }
                }
                self.ledger.leave(depth, frame.func, frame.t);
                let mut out = vec![Token::RetOpen, Token::Sep];
                v.push(&mut out);
                out.push(Token::RetClose);
                out
            }
        })
    }
}

impl Generator<RtmSymbol> for RtmGenerator<'_> {
    fn generate(&mut self, view: &View<'_, RtmSymbol>) -> Result<Vec<RtmToken>, GenerationError> {
        self.next_block(view.active, view.depth)
    }
}

#[derive(Clone, Debug)]
pub struct RtmRun {
    /// The returned value, or `None` after a bottom outcome.
    pub value: Option<Value>,
    pub result: RunResult<RtmSymbol>,
    pub ledger: CostLedger,
}

impl RtmRun {
    pub fn verdict(&self) -> Option<Verdict> {
        match self.value {
            Some(Value::Verdict(b)) => Some(Verdict::from_bool(b)),
            _ => None,
        }
    }
}

/// Evaluates a single function call as the root frame.
pub fn evaluate(
    tm: &TuringMachine,
    root: &Frame,
    memoize: bool,
    config: &RunConfig<RtmSymbol>,
) -> RtmRun {
    let mut g = RtmGenerator::new(tm, memoize);
    let result = run_observed(None, &root.tokens(), &mut g, config, &mut |_| {});
    let value = result.answer().and_then(|a| {
        let mut c = Cursor { toks: a, i: 0 };
        (c.peek() == Some(&Token::Sep)).then_some(())?;
        c.i += 1;
        let v = c.value(root.func).ok()?;
        (c.i == a.len()).then_some(v)
    });
    RtmRun {
        value,
        result,
        ledger: g.ledger,
    }
}

/// Decides `tm` on `input` by evaluating `RUN(0)`.
pub fn decide(tm: &TuringMachine, input: &[SymbolId], memoize: bool, config: &RunConfig<RtmSymbol>) -> RtmRun {
    evaluate(tm, &Frame::new(Func::Run, input, 0, None), memoize, config)
}

/// Invocation bound from the cost recurrences: with `V(0) = C(0) = 1`,
/// `V(t) = 3V(t-1) + C(t-1) + 2` and `C(t) = 3V(t-1) + C(t-1) + 2`.
/// `V(t)` bounds the invocations of one `STATE(t)` or `POS(t)` evaluation,
/// `C(t)` those of one `CELL(t, p)`. The ratio `V(t) / V(t-1)` tends to 4.
pub fn cost_bound(t: u64) -> BigUint {
    cost_bounds(t).0
}

/// `(V(t), C(t))`.
pub fn cost_bounds(t: u64) -> (BigUint, BigUint) {
    let mut v = BigUint::from(1u32);
    let mut c = BigUint::from(1u32);
    for _ in 0..t {
        let next = &v * 3u32 + &c + 2u32;
        c = next.clone();
        v = next;
    }
    (v, c)
}

/// Bits needed for the largest time argument: `max(1, ⌈log2(t + 1)⌉)`.
pub fn time_bits(t: u64) -> usize {
    (64 - t.leading_zeros()).max(1) as usize
}

/// Longest stored frame the construction can build for input length `n`
/// when no time argument exceeds `t_max`: a `CELL` header with a returned
/// position and two one-token values.
pub fn frame_bound(n: usize, t_max: u64) -> usize {
    n + 3 * time_bits(t_max) + 11
}
