//! Deterministic and alternating single-tape Turing machines, their
//! configurations, direct simulation and game values.

mod atm;
mod config;
mod descriptor;
pub mod fixtures;
pub mod random;
mod tm;

pub use atm::{normalize_atm, reachable, step_atm, tree_size, win_value, AlternatingTm, Mode, NormalizedAtm, WinError};
pub use config::Configuration;
pub use descriptor::{parse_descriptor, Descriptor, DescriptorError};
pub use tm::{run_tm, step_tm, trajectory, TmRun, TuringMachine, Verdict};

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct StateId(pub u16);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SymbolId(pub u16);

/// Head movement. Ordered `Left < Stay < Right`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }

    pub fn from_delta(d: i64) -> Option<Move> {
        match d {
            -1 => Some(Move::Left),
            0 => Some(Move::Stay),
            1 => Some(Move::Right),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Stay => 'S',
            Move::Right => 'R',
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Left => f.write_str("-1"),
            Move::Stay => f.write_str("0"),
            Move::Right => f.write_str("+1"),
        }
    }
}

/// One transition target `(q', a', d)`. The derived order is the
/// lexicographic order used for successor indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Action {
    pub next: StateId,
    pub write: SymbolId,
    pub mv: Move,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("input may not contain the blank symbol")]
    BlankInInput,
    #[error("input symbols must be single characters to encode from text")]
    MultiCharSymbols,
}

/// Names and roles shared by deterministic and alternating machines.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Signature {
    pub symbols: Vec<String>,
    pub blank: SymbolId,
    pub states: Vec<String>,
    pub initial: StateId,
    pub accepting: Vec<bool>,
    pub rejecting: Vec<bool>,
}

impl Signature {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q.0 as usize]
    }

    pub fn is_rejecting(&self, q: StateId) -> bool {
        self.rejecting[q.0 as usize]
    }

    pub fn is_halting(&self, q: StateId) -> bool {
        self.is_accepting(q) || self.is_rejecting(q)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0 as usize]
    }

    pub fn symbol_name(&self, a: SymbolId) -> &str {
        &self.symbols[a.0 as usize]
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().position(|s| s == name).map(|i| SymbolId(i as u16))
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| StateId(i as u16))
    }

    /// Encodes text one character per symbol.
    pub fn encode(&self, input: &str) -> Result<Vec<SymbolId>, MachineError> {
        input
            .chars()
            .map(|c| {
                let id = self
                    .symbol(c.encode_utf8(&mut [0; 4]))
                    .ok_or_else(|| MachineError::UnknownSymbol(c.to_string()))?;
                if id == self.blank {
                    return Err(MachineError::BlankInInput);
                }
                Ok(id)
            })
            .collect()
    }

    pub fn decode(&self, input: &[SymbolId]) -> String {
        input.iter().map(|a| self.symbol_name(*a)).collect()
    }

    /// Every non-blank word over single-character symbols with length at
    /// most `max_len`, shortest first.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<SymbolId>> {
        let letters: Vec<SymbolId> = (0..self.num_symbols() as u16)
            .map(SymbolId)
            .filter(|a| *a != self.blank)
            .collect();
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for a in &letters {
                    let mut v: Vec<SymbolId> = w.clone();
                    v.push(*a);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    pub fn initial_config(&self, input: &[SymbolId]) -> Configuration {
        Configuration::initial(self.initial, self.blank, input)
    }
}
