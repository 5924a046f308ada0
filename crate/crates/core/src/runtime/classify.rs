use crate::token::{Symbol, Token};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OutputKind {
    Call,
    Return,
    Plain,
}

/// A generated top sequence split into the part that stays in the frame and
/// the payload of its trailing block (empty for `Plain`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratorOutput<S> {
    pub kind: OutputKind,
    pub prefix: Vec<Token<S>>,
    pub payload: Vec<Token<S>>,
}

impl<S: Symbol> GeneratorOutput<S> {
    pub fn plain(y: Vec<Token<S>>) -> Self {
        GeneratorOutput {
            kind: OutputKind::Plain,
            prefix: y,
            payload: Vec::new(),
        }
    }
}

/// Locates the trailing block of `y`, if any.
///
/// Returns the kind and the index of the opening marker. The opener is the
/// nearest matching one scanning backwards from the end. A call payload may
/// not contain any block marker. A return payload may contain `CallOpen`
/// (a call prefix handed back to the caller) but no other block marker.
pub(crate) fn locate_block<S>(y: &[Token<S>]) -> Option<(OutputKind, usize)> {
    let (kind, opener) = match y.last()? {
        Token::CallClose => (OutputKind::Call, Token::CallOpen),
        Token::RetClose => (OutputKind::Return, Token::RetOpen),
        _ => return None,
    };
    let body_end = y.len() - 1;
    for i in (0..body_end).rev() {
        let t = &y[i];
        if std::mem::discriminant(t) == std::mem::discriminant(&opener) {
            return Some((kind, i));
        }
        let allowed = match t {
            Token::Sym(_) | Token::Sep => true,
            Token::CallOpen => kind == OutputKind::Return,
            _ => false,
        };
        if !allowed {
            return None;
        }
    }
    None
}

/// Splits a top sequence into prefix and trailing block.
///
/// A sequence whose final token is a closer without a well-nested opener is
/// classified as `Plain`.
pub fn classify_output<S: Symbol>(y: &[Token<S>]) -> GeneratorOutput<S> {
    match locate_block(y) {
        Some((kind, i)) => GeneratorOutput {
            kind,
            prefix: y[..i].to_vec(),
            payload: y[i + 1..y.len() - 1].to_vec(),
        },
        None => GeneratorOutput::plain(y.to_vec()),
    }
}
