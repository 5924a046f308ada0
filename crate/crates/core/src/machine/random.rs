//! Random machines for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::atm::tree_size;
use super::{normalize_atm, win_value, Action, AlternatingTm, Mode, Move, NormalizedAtm, Signature};
use super::{StateId, SymbolId, TuringMachine};

fn signature(n_live: usize, n_symbols: usize) -> Signature {
    let mut states: Vec<String> = (0..n_live).map(|i| format!("q{i}")).collect();
    states.push("acc".into());
    states.push("rej".into());
    let mut symbols = vec!["_".to_string()];
    symbols.extend((1..n_symbols).map(|i| ((b'a' + (i - 1) as u8) as char).to_string()));
    let total = states.len();
    Signature {
        symbols,
        blank: SymbolId(0),
        states,
        initial: StateId(0),
        accepting: (0..total).map(|i| i == n_live).collect(),
        rejecting: (0..total).map(|i| i == n_live + 1).collect(),
    }
}

fn random_action<R: Rng + ?Sized>(rng: &mut R, sig: &Signature) -> Action {
    let mv = match rng.gen_range(0..10) {
        0..=1 => Move::Left,
        2..=3 => Move::Stay,
        _ => Move::Right,
    };
    Action {
        next: StateId(rng.gen_range(0..sig.num_states()) as u16),
        write: SymbolId(rng.gen_range(0..sig.num_symbols()) as u16),
        mv,
    }
}

/// `n_live` non-halting states plus `acc` and `rej`; symbols `_ a b ...`.
pub fn random_tm<R: Rng + ?Sized>(rng: &mut R, n_live: usize, n_symbols: usize) -> TuringMachine {
    let sig = signature(n_live, n_symbols);
    let delta = (0..sig.num_states() * n_symbols)
        .map(|i| (i / n_symbols < n_live).then(|| random_action(rng, &sig)))
        .collect();
    TuringMachine::from_parts(sig, delta)
}

/// Random alternating machine with up to `max_branch` distinct transitions
/// per live state and symbol.
pub fn random_atm<R: Rng + ?Sized>(
    rng: &mut R,
    n_live: usize,
    n_symbols: usize,
    max_branch: usize,
) -> AlternatingTm {
    let sig = signature(n_live, n_symbols);
    let modes = (0..sig.num_states())
        .map(|i| {
            if i < n_live && rng.gen_bool(0.5) {
                Mode::Universal
            } else {
                Mode::Existential
            }
        })
        .collect();
    let delta = (0..sig.num_states() * n_symbols)
        .map(|i| {
            if i / n_symbols >= n_live {
                return Vec::new();
            }
            let k = rng.gen_range(0..=max_branch);
            let mut row: Vec<Action> = Vec::new();
            while row.len() < k {
                let a = random_action(rng, &sig);
                if !row.contains(&a) {
                    row.push(a);
                }
            }
            row.shuffle(rng);
            row
        })
        .collect();
    AlternatingTm::from_parts(sig, modes, delta)
}

/// Draws normalized random machines until one decides every input of length
/// at most `max_input` within `budget` reachable configurations and with an
/// unshared computation tree of at most `max_tree` nodes.
pub fn random_decider<R: Rng + ?Sized>(
    rng: &mut R,
    max_input: usize,
    budget: usize,
    max_tree: u64,
) -> NormalizedAtm {
    loop {
        let n_live = rng.gen_range(2..=4);
        let atm = normalize_atm(&random_atm(rng, n_live, 3, 3));
        let ok = atm.signature().words_up_to(max_input).iter().all(|w| {
            let c = atm.initial_config(w);
            win_value(&atm, &c, budget).is_ok()
                && tree_size(&atm, &c, budget).is_ok_and(|n| n <= max_tree)
        });
        if ok {
            return atm;
        }
    }
}
