use std::collections::HashSet;
use std::fmt;

use super::{Action, Configuration, Move, Signature, StateId, SymbolId};

/// A deterministic single-tape machine with a total transition function on
/// non-halting states. Halting states step to themselves.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TuringMachine {
    pub(crate) sig: Signature,
    pub(crate) delta: Vec<Option<Action>>,
}

impl TuringMachine {
    /// `delta[q * |Γ| + a]` must be `Some` exactly for non-halting `q`.
    pub(crate) fn from_parts(sig: Signature, delta: Vec<Option<Action>>) -> Self {
        TuringMachine { sig, delta }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn action(&self, q: StateId, a: SymbolId) -> Action {
        self.delta[q.0 as usize * self.sig.num_symbols() + a.0 as usize].unwrap_or(Action {
            next: q,
            write: a,
            mv: Move::Stay,
        })
    }

    pub fn is_halting(&self, q: StateId) -> bool {
        self.sig.is_halting(q)
    }

    pub fn encode(&self, input: &str) -> Result<Vec<SymbolId>, super::MachineError> {
        self.sig.encode(input)
    }

    pub fn initial_config(&self, input: &[SymbolId]) -> Configuration {
        self.sig.initial_config(input)
    }
}

/// Applies `δ` once. A halting configuration is returned unchanged.
pub fn step_tm(tm: &TuringMachine, c: &Configuration) -> Configuration {
    let mut next = c.clone();
    if tm.is_halting(c.state) {
        return next;
    }
    let act = tm.action(c.state, c.read_head());
    next.write(c.head, act.write);
    next.state = act.next;
    next.head += act.mv.delta();
    next
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Verdict {
    Accept,
    Reject,
    Timeout,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Timeout => "timeout",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TmRun {
    pub verdict: Verdict,
    /// Steps taken before reaching a halting state (or the cap).
    pub time: u64,
    /// Distinct cells visited by the head, including the start cell.
    pub space: usize,
    pub final_config: Configuration,
}

/// Direct simulation from the initial configuration on `input`.
pub fn run_tm(tm: &TuringMachine, input: &[SymbolId], max_steps: u64) -> TmRun {
    let mut c = tm.initial_config(input);
    let mut visited = HashSet::from([c.head]);
    let mut time = 0;
    while !tm.is_halting(c.state) && time < max_steps {
        c = step_tm(tm, &c);
        visited.insert(c.head);
        time += 1;
    }
    let verdict = if tm.sig.is_accepting(c.state) {
        Verdict::Accept
    } else if tm.sig.is_rejecting(c.state) {
        Verdict::Reject
    } else {
        Verdict::Timeout
    };
    TmRun {
        verdict,
        time,
        space: visited.len(),
        final_config: c,
    }
}

/// Configurations `c_0 .. c_T` up to and including the first halting one,
/// or `max_steps + 1` configurations if the machine does not halt in time.
pub fn trajectory(tm: &TuringMachine, input: &[SymbolId], max_steps: u64) -> Vec<Configuration> {
    let mut c = tm.initial_config(input);
    let mut out = vec![c.clone()];
    let mut t = 0;
    while !tm.is_halting(c.state) && t < max_steps {
        c = step_tm(tm, &c);
        out.push(c.clone());
        t += 1;
    }
    out
}
