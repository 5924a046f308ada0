use std::collections::BTreeMap;

use super::{StateId, SymbolId};

/// A single-tape configuration `(q, τ, p)`. The tape is sparse and never
/// stores the blank symbol, so equal configurations compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Configuration {
    pub state: StateId,
    pub head: i64,
    blank: SymbolId,
    tape: BTreeMap<i64, SymbolId>,
}

impl Configuration {
    /// The all-blank tape with the head at cell 0.
    pub fn blank(state: StateId, blank: SymbolId) -> Self {
        Configuration {
            state,
            head: 0,
            blank,
            tape: BTreeMap::new(),
        }
    }

    pub fn initial(state: StateId, blank: SymbolId, input: &[SymbolId]) -> Self {
        let mut c = Self::blank(state, blank);
        for (i, a) in input.iter().enumerate() {
            c.write(i as i64, *a);
        }
        c
    }

    pub fn blank_symbol(&self) -> SymbolId {
        self.blank
    }

    pub fn read(&self, pos: i64) -> SymbolId {
        self.tape.get(&pos).copied().unwrap_or(self.blank)
    }

    pub fn read_head(&self) -> SymbolId {
        self.read(self.head)
    }

    pub fn write(&mut self, pos: i64, a: SymbolId) {
        if a == self.blank {
            self.tape.remove(&pos);
        } else {
            self.tape.insert(pos, a);
        }
    }

    /// Non-blank cells in increasing position order.
    pub fn cells(&self) -> impl Iterator<Item = (i64, SymbolId)> + '_ {
        self.tape.iter().map(|(p, a)| (*p, *a))
    }

    /// Smallest interval containing every non-blank cell and the head.
    pub fn span(&self) -> (i64, i64) {
        let lo = self.tape.keys().next().map_or(self.head, |p| (*p).min(self.head));
        let hi = self.tape.keys().next_back().map_or(self.head, |p| (*p).max(self.head));
        (lo, hi)
    }

    /// Same content shifted by `offset` cells.
    pub fn translated(&self, offset: i64) -> Self {
        Configuration {
            state: self.state,
            head: self.head + offset,
            blank: self.blank,
            tape: self.tape.iter().map(|(p, a)| (p + offset, *a)).collect(),
        }
    }

    /// Translation-invariant key: the configuration shifted so its head is
    /// at cell 0.
    pub fn normalized(&self) -> Self {
        self.translated(-self.head)
    }
}
