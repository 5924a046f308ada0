//! Line-oriented machine descriptors.
//!
//! ```text
//! kind: tm
//! alphabet: _ 0 1
//! blank: _
//! states: even odd accept reject
//! initial: even
//! accept: accept
//! reject: reject
//! delta: even 0 -> even 0 R
//! ```
//!
//! Alternating machines use `kind: atm`, list their `existential:` and
//! `universal:` states, and may give several `delta` lines per state and
//! symbol. Lines starting with `#` are comments. Rendering produces the
//! canonical form, which parses back to an identical machine.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

use super::{Action, AlternatingTm, Mode, Move, Signature, StateId, SymbolId, TuringMachine};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> DescriptorError {
    DescriptorError::Invalid(msg.into())
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Descriptor {
    Tm(TuringMachine),
    Atm(AlternatingTm),
}

impl Descriptor {
    pub fn into_tm(self) -> Result<TuringMachine, DescriptorError> {
        match self {
            Descriptor::Tm(tm) => Ok(tm),
            Descriptor::Atm(_) => Err(invalid("expected a deterministic machine (kind: tm)")),
        }
    }

    /// Alternating view. A deterministic machine becomes an alternating one
    /// whose states are all existential with one transition each.
    pub fn into_atm(self) -> Result<AlternatingTm, DescriptorError> {
        match self {
            Descriptor::Atm(a) => Ok(a),
            Descriptor::Tm(tm) => {
                let modes = vec![Mode::Existential; tm.sig.num_states()];
                let delta = tm.delta.iter().map(|a| a.iter().copied().collect()).collect();
                Ok(AlternatingTm::from_parts(tm.sig, modes, delta))
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Descriptor::Tm(tm) => render_tm(tm),
            Descriptor::Atm(atm) => render_atm(atm),
        }
    }
}

fn names(sig: &Signature, pick: impl Fn(usize) -> bool) -> String {
    let v: Vec<&str> = sig
        .states
        .iter()
        .enumerate()
        .filter(|(i, _)| pick(*i))
        .map(|(_, s)| s.as_str())
        .collect();
    v.join(" ")
}

fn header(out: &mut String, kind: &str, sig: &Signature) {
    let line = |out: &mut String, key: &str, val: &str| {
        if val.is_empty() {
            writeln!(out, "{key}:").unwrap();
        } else {
            writeln!(out, "{key}: {val}").unwrap();
        }
    };
    line(out, "kind", kind);
    line(out, "alphabet", &sig.symbols.join(" "));
    line(out, "blank", sig.symbol_name(sig.blank));
    line(out, "states", &sig.states.join(" "));
    line(out, "initial", sig.state_name(sig.initial));
    line(out, "accept", &names(sig, |i| sig.accepting[i]));
    line(out, "reject", &names(sig, |i| sig.rejecting[i]));
}

fn delta_line(out: &mut String, sig: &Signature, q: usize, a: usize, act: &Action) {
    writeln!(
        out,
        "delta: {} {} -> {} {} {}",
        sig.states[q],
        sig.symbols[a],
        sig.state_name(act.next),
        sig.symbol_name(act.write),
        act.mv.letter()
    )
    .unwrap();
}

fn render_tm(tm: &TuringMachine) -> String {
    let sig = &tm.sig;
    let mut out = String::new();
    header(&mut out, "tm", sig);
    let n = sig.num_symbols();
    for (i, act) in tm.delta.iter().enumerate() {
        if let Some(act) = act {
            delta_line(&mut out, sig, i / n, i % n, act);
        }
    }
    out
}

fn render_atm(atm: &AlternatingTm) -> String {
    let sig = &atm.sig;
    let mut out = String::new();
    header(&mut out, "atm", sig);
    let halting = |i: usize| sig.accepting[i] || sig.rejecting[i];
    let ex = names(sig, |i| !halting(i) && atm.modes[i] == Mode::Existential);
    let un = names(sig, |i| !halting(i) && atm.modes[i] == Mode::Universal);
    for (key, val) in [("existential", ex), ("universal", un)] {
        if val.is_empty() {
            writeln!(out, "{key}:").unwrap();
        } else {
            writeln!(out, "{key}: {val}").unwrap();
        }
    }
    let n = sig.num_symbols();
    for (i, row) in atm.delta.iter().enumerate() {
        for act in row {
            delta_line(&mut out, sig, i / n, i % n, act);
        }
    }
    out
}

impl TuringMachine {
    pub fn to_descriptor(&self) -> String {
        render_tm(self)
    }
}

impl AlternatingTm {
    pub fn to_descriptor(&self) -> String {
        render_atm(self)
    }
}

impl FromStr for TuringMachine {
    type Err = DescriptorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_descriptor(s)?.into_tm()
    }
}

impl FromStr for AlternatingTm {
    type Err = DescriptorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_descriptor(s)?.into_atm()
    }
}

fn parse_move(s: &str) -> Option<Move> {
    match s {
        "L" | "-1" => Some(Move::Left),
        "S" | "0" => Some(Move::Stay),
        "R" | "+1" | "1" => Some(Move::Right),
        _ => None,
    }
}

fn check_names(kind: &str, names: &[String]) -> Result<(), DescriptorError> {
    let mut seen = HashSet::new();
    for n in names {
        if n == "->" {
            return Err(invalid(format!("`->` is not a valid {kind} name")));
        }
        if !seen.insert(n) {
            return Err(invalid(format!("duplicate {kind} `{n}`")));
        }
    }
    if names.is_empty() {
        return Err(invalid(format!("at least one {kind} is required")));
    }
    Ok(())
}

/// Parses a descriptor into a validated machine.
pub fn parse_descriptor(text: &str) -> Result<Descriptor, DescriptorError> {
    let mut fields: HashMap<&str, (usize, Vec<String>)> = HashMap::new();
    let mut deltas: Vec<(usize, Vec<String>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| DescriptorError::Line {
            line: lineno,
            message: m.to_string(),
        };
        let (key, rest) = line.split_once(':').ok_or_else(|| err("expected `key: value`"))?;
        let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        let key = key.trim();
        match key {
            "delta" => deltas.push((lineno, words)),
            "kind" | "alphabet" | "blank" | "states" | "initial" | "accept" | "reject"
            | "existential" | "universal" => {
                if fields.insert(key, (lineno, words)).is_some() {
                    return Err(err(&format!("duplicate `{key}`")));
                }
            }
            _ => return Err(err(&format!("unknown key `{key}`"))),
        }
    }
    let get = |k: &str| -> Result<&Vec<String>, DescriptorError> {
        fields
            .get(k)
            .map(|(_, v)| v)
            .ok_or_else(|| invalid(format!("missing `{k}`")))
    };
    let single = |k: &str| -> Result<&String, DescriptorError> {
        let v = get(k)?;
        match v.as_slice() {
            [one] => Ok(one),
            _ => Err(invalid(format!("`{k}` takes exactly one name"))),
        }
    };
    let kind = single("kind")?.clone();
    if kind != "tm" && kind != "atm" {
        return Err(invalid(format!("unknown kind `{kind}`")));
    }
    let symbols = get("alphabet")?.clone();
    check_names("symbol", &symbols)?;
    let states = get("states")?.clone();
    check_names("state", &states)?;
    let sym_id = |n: &str| {
        symbols
            .iter()
            .position(|s| s == n)
            .map(|i| SymbolId(i as u16))
            .ok_or_else(|| invalid(format!("unknown symbol `{n}`")))
    };
    let state_id = |n: &str| {
        states
            .iter()
            .position(|s| s == n)
            .map(|i| StateId(i as u16))
            .ok_or_else(|| invalid(format!("unknown state `{n}`")))
    };
    let blank = sym_id(single("blank")?)?;
    let initial = state_id(single("initial")?)?;
    let flags = |k: &str| -> Result<Vec<bool>, DescriptorError> {
        let mut v = vec![false; states.len()];
        if let Some((_, names)) = fields.get(k) {
            for n in names {
                v[state_id(n)?.0 as usize] = true;
            }
        }
        Ok(v)
    };
    let accepting = flags("accept")?;
    let rejecting = flags("reject")?;
    if let Some(i) = (0..states.len()).find(|i| accepting[*i] && rejecting[*i]) {
        return Err(invalid(format!("state `{}` both accepts and rejects", states[i])));
    }
    let sig = Signature {
        symbols: symbols.clone(),
        blank,
        states: states.clone(),
        initial,
        accepting,
        rejecting,
    };
    let nsym = sig.num_symbols();
    let mut rows: Vec<Vec<Action>> = vec![Vec::new(); sig.num_states() * nsym];
    for (lineno, words) in &deltas {
        let err = |m: String| DescriptorError::Line {
            line: *lineno,
            message: m,
        };
        let [q, a, arrow, q2, a2, m] = words.as_slice() else {
            return Err(err("expected `q a -> q' a' move`".into()));
        };
        if arrow != "->" {
            return Err(err("expected `->`".into()));
        }
        let q = state_id(q).map_err(|e| err(e.to_string()))?;
        let a = sym_id(a).map_err(|e| err(e.to_string()))?;
        let act = Action {
            next: state_id(q2).map_err(|e| err(e.to_string()))?,
            write: sym_id(a2).map_err(|e| err(e.to_string()))?,
            mv: parse_move(m).ok_or_else(|| err(format!("bad move `{m}`")))?,
        };
        if sig.is_halting(q) {
            return Err(err(format!("halting state `{}` has a transition", sig.state_name(q))));
        }
        let row = &mut rows[q.0 as usize * nsym + a.0 as usize];
        if row.contains(&act) {
            return Err(err("duplicate transition".into()));
        }
        row.push(act);
    }

    if kind == "tm" {
        for k in ["existential", "universal"] {
            if fields.contains_key(k) {
                return Err(invalid(format!("`{k}` only applies to kind: atm")));
            }
        }
        let mut delta = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let (q, a) = (StateId((i / nsym) as u16), SymbolId((i % nsym) as u16));
            match (sig.is_halting(q), row.as_slice()) {
                (true, _) => delta.push(None),
                (false, [act]) => delta.push(Some(*act)),
                (false, []) => {
                    return Err(invalid(format!(
                        "no transition for ({}, {})",
                        sig.state_name(q),
                        sig.symbol_name(a)
                    )))
                }
                (false, _) => {
                    return Err(invalid(format!(
                        "several transitions for ({}, {}) in a deterministic machine",
                        sig.state_name(q),
                        sig.symbol_name(a)
                    )))
                }
            }
        }
        return Ok(Descriptor::Tm(TuringMachine::from_parts(sig, delta)));
    }

    let ex = flags("existential")?;
    let un = flags("universal")?;
    let mut modes = Vec::with_capacity(sig.num_states());
    for i in 0..sig.num_states() {
        let q = StateId(i as u16);
        let name = sig.state_name(q);
        modes.push(match (sig.is_halting(q), ex[i], un[i]) {
            (true, false, false) => Mode::Existential,
            (true, _, _) => return Err(invalid(format!("halting state `{name}` has a mode"))),
            (false, true, false) => Mode::Existential,
            (false, false, true) => Mode::Universal,
            (false, true, true) => return Err(invalid(format!("state `{name}` has two modes"))),
            (false, false, false) => return Err(invalid(format!("state `{name}` has no mode"))),
        });
    }
    Ok(Descriptor::Atm(AlternatingTm::from_parts(sig, modes, rows)))
}
