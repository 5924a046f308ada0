//! Machines shipped with the crate.

use super::{parse_descriptor, AlternatingTm, TuringMachine};

pub const PARITY: &str = include_str!("../../fixtures/parity.tm");
pub const INCREMENT: &str = include_str!("../../fixtures/increment.tm");
pub const PALINDROME: &str = include_str!("../../fixtures/palindrome.tm");
pub const COUNTDOWN: &str = include_str!("../../fixtures/countdown.tm");
pub const CNF_EVAL: &str = include_str!("../../fixtures/cnf_eval.atm");
pub const FOLLOWED: &str = include_str!("../../fixtures/followed.atm");

/// Every fixture by name, deterministic machines first.
pub const SOURCES: [(&str, &str); 6] = [
    ("parity", PARITY),
    ("increment", INCREMENT),
    ("palindrome", PALINDROME),
    ("countdown", COUNTDOWN),
    ("cnf_eval", CNF_EVAL),
    ("followed", FOLLOWED),
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

fn tm(text: &str) -> TuringMachine {
    parse_descriptor(text)
        .and_then(|d| d.into_tm())
        .expect("shipped fixture is valid")
}

fn atm(text: &str) -> AlternatingTm {
    parse_descriptor(text)
        .and_then(|d| d.into_atm())
        .expect("shipped fixture is valid")
}

/// Accepts words over {0,1} with an even number of 1s.
pub fn parity() -> TuringMachine {
    tm(PARITY)
}

/// Adds one to an MSB-first binary number; rejects on overflow.
pub fn increment() -> TuringMachine {
    tm(INCREMENT)
}

/// Accepts binary palindromes by erasing matching ends.
pub fn palindrome() -> TuringMachine {
    tm(PALINDROME)
}

/// Decrements an LSB-first binary counter to zero, then accepts. Runs for
/// time linear in the counter value within space fixed by its width.
pub fn countdown() -> TuringMachine {
    tm(COUNTDOWN)
}

/// Evaluates a monotone CNF: `#`-separated clauses of bits, true when every
/// clause contains a 1. Universal over clauses, existential over bits.
pub fn cnf_eval() -> AlternatingTm {
    atm(CNF_EVAL)
}

/// Over {a, b}: every `a` is immediately followed by `b`.
pub fn followed() -> AlternatingTm {
    atm(FOLLOWED)
}
