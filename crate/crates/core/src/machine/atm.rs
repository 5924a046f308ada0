use std::collections::{HashMap, HashSet};
use std::ops::Deref;

use thiserror::Error;

use super::{Action, Configuration, Move, Signature, StateId, SymbolId};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    Existential,
    Universal,
}

/// An alternating machine: each non-halting state is existential or
/// universal and may have any number of transitions per symbol. Transition
/// lists are kept sorted, which fixes the successor order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlternatingTm {
    pub(crate) sig: Signature,
    pub(crate) modes: Vec<Mode>,
    pub(crate) delta: Vec<Vec<Action>>,
}

impl AlternatingTm {
    pub(crate) fn from_parts(sig: Signature, modes: Vec<Mode>, mut delta: Vec<Vec<Action>>) -> Self {
        for row in &mut delta {
            row.sort();
        }
        AlternatingTm { sig, modes, delta }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn mode(&self, q: StateId) -> Mode {
        self.modes[q.0 as usize]
    }

    pub fn is_halting(&self, q: StateId) -> bool {
        self.sig.is_halting(q)
    }

    /// Transitions available in state `q` reading `a`; empty when halting.
    pub fn actions(&self, q: StateId, a: SymbolId) -> &[Action] {
        if self.is_halting(q) {
            return &[];
        }
        &self.delta[q.0 as usize * self.sig.num_symbols() + a.0 as usize]
    }

    pub fn initial_config(&self, input: &[SymbolId]) -> Configuration {
        self.sig.initial_config(input)
    }
}

fn apply(c: &Configuration, act: &Action) -> Configuration {
    let mut next = c.clone();
    next.write(c.head, act.write);
    next.state = act.next;
    next.head += act.mv.delta();
    next
}

/// Successor configurations of `c` in transition order.
pub fn step_atm(atm: &AlternatingTm, c: &Configuration) -> Vec<Configuration> {
    atm.actions(c.state, c.read_head())
        .iter()
        .map(|a| apply(c, a))
        .collect()
}

/// An alternating machine in which every non-halting configuration has
/// exactly two successors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalizedAtm(AlternatingTm);

impl Deref for NormalizedAtm {
    type Target = AlternatingTm;

    fn deref(&self) -> &AlternatingTm {
        &self.0
    }
}

impl NormalizedAtm {
    /// The `i`-th successor (`i` in {0, 1}) of a non-halting configuration.
    pub fn successor(&self, c: &Configuration, i: usize) -> Configuration {
        apply(c, &self.0.actions(c.state, c.read_head())[i])
    }

    pub fn into_inner(self) -> AlternatingTm {
        self.0
    }

    /// Same machine with the two successors of every pair swapped.
    pub fn swapped(&self) -> NormalizedAtm {
        let mut m = self.0.clone();
        for row in &mut m.delta {
            row.reverse();
        }
        NormalizedAtm(m)
    }
}

struct Builder {
    sig: Signature,
    modes: Vec<Mode>,
    delta: Vec<Vec<Action>>,
}

impl Builder {
    fn fresh_state(&mut self, base: &str, mode: Mode, halting: Option<bool>) -> StateId {
        let mut name = base.to_string();
        let mut n = 0;
        while self.sig.states.contains(&name) {
            n += 1;
            name = format!("{base}{n}");
        }
        let id = StateId(self.sig.states.len() as u16);
        self.sig.states.push(name);
        self.sig.accepting.push(halting == Some(true));
        self.sig.rejecting.push(halting == Some(false));
        self.modes.push(mode);
        for _ in 0..self.sig.num_symbols() {
            self.delta.push(Vec::new());
        }
        id
    }

    fn sink(&mut self, accepting: bool) -> StateId {
        let roles = if accepting { &self.sig.accepting } else { &self.sig.rejecting };
        if let Some(i) = roles.iter().position(|b| *b) {
            return StateId(i as u16);
        }
        let base = if accepting { "accept_sink" } else { "reject_sink" };
        self.fresh_state(base, Mode::Existential, Some(accepting))
    }

    fn pad(&mut self, mode: Mode, a: SymbolId) -> Action {
        Action {
            next: self.sink(mode == Mode::Universal),
            write: a,
            mv: Move::Stay,
        }
    }

    /// Two actions equivalent (under `mode`) to the choice among `acts`.
    fn pair(&mut self, q: StateId, a: SymbolId, acts: &[Action]) -> Vec<Action> {
        let mode = self.modes[q.0 as usize];
        let mut out = match acts.len() {
            0 => vec![self.pad(mode, a), self.pad(mode, a)],
            1 => vec![acts[0], self.pad(mode, a)],
            2 => acts.to_vec(),
            k => {
                let (lo, hi) = acts.split_at(k.div_ceil(2));
                vec![self.branch(q, a, lo), self.branch(q, a, hi)]
            }
        };
        out.sort();
        out
    }

    fn branch(&mut self, q: StateId, a: SymbolId, acts: &[Action]) -> Action {
        if acts.len() == 1 {
            return acts[0];
        }
        let mode = self.modes[q.0 as usize];
        let base = format!("{}.{}", self.sig.states[q.0 as usize], self.sig.symbols[a.0 as usize]);
        let mid = self.fresh_state(&base, mode, None);
        let nsym = self.sig.num_symbols();
        for b in 0..nsym as u16 {
            let row = if b == a.0 {
                self.pair(mid, a, acts)
            } else {
                self.pair(mid, SymbolId(b), &[])
            };
            self.delta[mid.0 as usize * nsym + b as usize] = row;
        }
        Action {
            next: mid,
            write: a,
            mv: Move::Stay,
        }
    }
}

/// Rewrites `atm` so every non-halting configuration has exactly two
/// successors without changing the value of any original configuration.
///
/// Missing successors are padded with a non-moving transition into a
/// rejecting sink (existential states) or an accepting sink (universal
/// states). Wider branching becomes a balanced cascade of fresh states of
/// the same mode that leave the tape and head untouched.
pub fn normalize_atm(atm: &AlternatingTm) -> NormalizedAtm {
    let nstates = atm.sig.num_states();
    let nsym = atm.sig.num_symbols();
    let mut b = Builder {
        sig: atm.sig.clone(),
        modes: atm.modes.clone(),
        delta: atm.delta.clone(),
    };
    for q in 0..nstates as u16 {
        if atm.is_halting(StateId(q)) {
            continue;
        }
        for a in 0..nsym as u16 {
            let acts = atm.delta[q as usize * nsym + a as usize].clone();
            let row = b.pair(StateId(q), SymbolId(a), &acts);
            b.delta[q as usize * nsym + a as usize] = row;
        }
    }
    NormalizedAtm(AlternatingTm {
        sig: b.sig,
        modes: b.modes,
        delta: b.delta,
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WinError {
    #[error("more than {0} configurations explored")]
    BudgetExceeded(usize),
    #[error("configuration graph has a cycle: the machine is not a decider")]
    Cycle,
}

/// Game value of `c`: existential states take the OR of their successors,
/// universal states the AND, accepting halts are 1 and rejecting halts 0.
///
/// Explores at most `budget` distinct configurations. A cycle reachable
/// from `c` is reported as an error rather than assigned a value.
pub fn win_value(atm: &AlternatingTm, c: &Configuration, budget: usize) -> Result<bool, WinError> {
    struct Node {
        conf: Configuration,
        succ: Vec<Configuration>,
        next: usize,
        vals: Vec<bool>,
    }
    let combine = |n: &Node| match atm.mode(n.conf.state) {
        Mode::Existential => n.vals.iter().any(|v| *v),
        Mode::Universal => n.vals.iter().all(|v| *v),
    };
    if atm.is_halting(c.state) {
        return Ok(atm.sig.is_accepting(c.state));
    }
    let mut memo: HashMap<Configuration, bool> = HashMap::new();
    let mut on_path: HashSet<Configuration> = HashSet::from([c.clone()]);
    let mut stack = vec![Node {
        conf: c.clone(),
        succ: step_atm(atm, c),
        next: 0,
        vals: Vec::new(),
    }];
    while let Some(top) = stack.last_mut() {
        if top.next < top.succ.len() {
            let s = top.succ[top.next].clone();
            if let Some(v) = memo.get(&s) {
                top.vals.push(*v);
                top.next += 1;
                continue;
            }
            if on_path.contains(&s) {
                return Err(WinError::Cycle);
            }
            if memo.len() + on_path.len() >= budget {
                return Err(WinError::BudgetExceeded(budget));
            }
            if atm.is_halting(s.state) {
                let v = atm.sig.is_accepting(s.state);
                memo.insert(s, v);
                top.vals.push(v);
                top.next += 1;
                continue;
            }
            on_path.insert(s.clone());
            let succ = step_atm(atm, &s);
            stack.push(Node {
                conf: s,
                succ,
                next: 0,
                vals: Vec::new(),
            });
        } else {
            let v = combine(top);
            let done = stack.pop().expect("non-empty");
            on_path.remove(&done.conf);
            match stack.last_mut() {
                Some(parent) => {
                    memo.insert(done.conf, v);
                    parent.vals.push(v);
                    parent.next += 1;
                }
                None => return Ok(v),
            }
        }
    }
    unreachable!("the root frame returns")
}

/// Every configuration reachable from `c`, in breadth-first order.
pub fn reachable(atm: &AlternatingTm, c: &Configuration, budget: usize) -> Result<Vec<Configuration>, WinError> {
    let mut seen = HashSet::from([c.clone()]);
    let mut order = vec![c.clone()];
    let mut i = 0;
    while i < order.len() {
        for s in step_atm(atm, &order[i]) {
            if seen.insert(s.clone()) {
                if order.len() >= budget {
                    return Err(WinError::BudgetExceeded(budget));
                }
                order.push(s);
            }
        }
        i += 1;
    }
    Ok(order)
}

/// Number of nodes in the unshared computation tree below `c`, saturating.
/// Fails like [`win_value`] on cycles or budget overrun.
pub fn tree_size(atm: &AlternatingTm, c: &Configuration, budget: usize) -> Result<u64, WinError> {
    win_value(atm, c, budget)?;
    let mut memo: HashMap<Configuration, u64> = HashMap::new();
    // post-order over an acyclic graph
    let mut stack = vec![(c.clone(), false)];
    while let Some((conf, expanded)) = stack.pop() {
        if memo.contains_key(&conf) {
            continue;
        }
        let succ = step_atm(atm, &conf);
        if expanded || succ.is_empty() {
            let size = succ
                .iter()
                .fold(1u64, |acc, s| acc.saturating_add(memo[s]));
            memo.insert(conf, size);
        } else {
            stack.push((conf, true));
            for s in succ {
                if !memo.contains_key(&s) {
                    stack.push((s, false));
                }
            }
        }
    }
    Ok(memo[c])
}
