//! Token vocabulary shared by every generator and by the runtime.
//!
//! A token is either one of the five reserved markers or a data symbol drawn
//! from a generator-specific alphabet `S`. Text workloads use `Token<char>`,
//! structured workloads (Turing-machine simulations) use their own enums.

use std::fmt;
use std::hash::Hash;

/// Bound satisfied by every data alphabet.
pub trait Symbol: Clone + Eq + Hash + fmt::Debug {}

impl<T: Clone + Eq + Hash + fmt::Debug> Symbol for T {}

pub const CALL_OPEN_TEXT: &str = "<call>";
pub const CALL_CLOSE_TEXT: &str = "</call>";
pub const RET_OPEN_TEXT: &str = "<return>";
pub const RET_CLOSE_TEXT: &str = "</return>";
pub const SEP_TEXT: &str = "[SEP]";

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Token<S> {
    CallOpen,
    CallClose,
    RetOpen,
    RetClose,
    Sep,
    Sym(S),
}

impl<S> Token<S> {
    /// True for the four block delimiters (call/return open and close).
    pub fn is_block_marker(&self) -> bool {
        matches!(
            self,
            Token::CallOpen | Token::CallClose | Token::RetOpen | Token::RetClose
        )
    }

    pub fn is_reserved(&self) -> bool {
        !matches!(self, Token::Sym(_))
    }

    pub fn symbol(&self) -> Option<&S> {
        match self {
            Token::Sym(s) => Some(s),
            _ => None,
        }
    }
}

impl<S: fmt::Display> fmt::Display for Token<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::CallOpen => f.write_str(CALL_OPEN_TEXT),
            Token::CallClose => f.write_str(CALL_CLOSE_TEXT),
            Token::RetOpen => f.write_str(RET_OPEN_TEXT),
            Token::RetClose => f.write_str(RET_CLOSE_TEXT),
            Token::Sep => f.write_str(SEP_TEXT),
            Token::Sym(s) => s.fmt(f),
        }
    }
}

/// Wraps every element of `symbols` as a data token.
pub fn syms<S, I: IntoIterator<Item = S>>(symbols: I) -> Vec<Token<S>> {
    symbols.into_iter().map(Token::Sym).collect()
}

/// Renders a token sequence by concatenating the display form of each token.
pub fn render<S: fmt::Display>(tokens: &[Token<S>]) -> String {
    use fmt::Write;
    let mut out = String::new();
    for t in tokens {
        write!(out, "{t}").expect("writing to a String cannot fail");
    }
    out
}

/// Character-level text tokens: the alphabet used by the SAT traces and the
/// LLM backend.
pub mod text {
    use super::*;

    pub type TextToken = Token<char>;

    const MARKERS: [(&str, Token<char>); 5] = [
        (CALL_OPEN_TEXT, Token::CallOpen),
        (CALL_CLOSE_TEXT, Token::CallClose),
        (RET_OPEN_TEXT, Token::RetOpen),
        (RET_CLOSE_TEXT, Token::RetClose),
        (SEP_TEXT, Token::Sep),
    ];

    /// Splits UTF-8 text into tokens. The literal marker strings become
    /// reserved tokens, everything else becomes one token per `char`.
    pub fn tokenize(text: &str) -> Vec<TextToken> {
        let mut out = Vec::with_capacity(text.len());
        let mut rest = text;
        'outer: while let Some(c) = rest.chars().next() {
            if c == '<' || c == '[' {
                for (lit, tok) in &MARKERS {
                    if let Some(tail) = rest.strip_prefix(lit) {
                        out.push(tok.clone());
                        rest = tail;
                        continue 'outer;
                    }
                }
            }
            out.push(Token::Sym(c));
            rest = &rest[c.len_utf8()..];
        }
        out
    }

    pub fn render(tokens: &[TextToken]) -> String {
        super::render(tokens)
    }

    /// Renders only the data symbols, dropping reserved markers.
    pub fn plain(tokens: &[TextToken]) -> String {
        tokens.iter().filter_map(|t| t.symbol()).collect()
    }
}
