//! Small deterministic generators for scaffold fixtures.

use std::collections::HashMap;

use crate::runtime::{GenerationError, Generator, View};
use crate::token::text::{self, TextToken};
use crate::token::{Symbol, Token};

/// A lookup table over whole queries, with an optional fallback answer.
#[derive(Clone, Default, Debug)]
pub struct Table {
    entries: HashMap<Vec<TextToken>, Vec<TextToken>>,
    default: Option<Vec<TextToken>>,
}

impl Table {
    pub fn new() -> Self {
        Table::default()
    }

    pub fn entry(mut self, query: &str, answer: &str) -> Self {
        self.insert(query, answer);
        self
    }

    pub fn insert(&mut self, query: &str, answer: &str) {
        self.entries.insert(text::tokenize(query), text::tokenize(answer));
    }

    pub fn with_default(mut self, answer: &str) -> Self {
        self.default = Some(text::tokenize(answer));
        self
    }

    pub fn lookup(&self, query: &[TextToken]) -> Option<&[TextToken]> {
        self.entries.get(query).or(self.default.as_ref()).map(Vec::as_slice)
    }
}

impl Generator<char> for Table {
    fn generate(&mut self, view: &View<'_, char>) -> Result<Vec<TextToken>, GenerationError> {
        self.lookup(view.active)
            .map(<[_]>::to_vec)
            .ok_or_else(|| GenerationError::Failed(format!("no entry for {:?}", text::render(view.active))))
    }
}

/// Answers every query with the query itself.
pub struct IdentityGenerator;

impl<S: Clone> Generator<S> for IdentityGenerator {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        Ok(view.active.to_vec())
    }
}

/// Keeps the last `n` tokens.
pub struct KeepSuffix(pub usize);

impl<S: Clone> Generator<S> for KeepSuffix {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        let a = view.active;
        Ok(a[a.len().saturating_sub(self.0)..].to_vec())
    }
}

/// Fills every mask with the most frequent unmasked token. Ties go to the
/// token that occurs first.
pub struct MajorityDenoiser<S> {
    pub mask: Token<S>,
}

impl<S: Symbol> Generator<S> for MajorityDenoiser<S> {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        let x = view.active;
        let mut counts: HashMap<&Token<S>, (usize, usize)> = HashMap::new();
        for (i, t) in x.iter().enumerate().filter(|(_, t)| **t != self.mask) {
            counts.entry(t).or_insert((0, i)).0 += 1;
        }
        let fill = counts
            .into_iter()
            .max_by_key(|(_, (n, first))| (*n, std::cmp::Reverse(*first)))
            .map(|(t, _)| t.clone())
            .ok_or_else(|| GenerationError::Malformed("nothing unmasked to vote with".into()))?;
        Ok(x.iter()
            .map(|t| if *t == self.mask { fill.clone() } else { t.clone() })
            .collect())
    }
}

fn split_state<'v, S: PartialEq>(q: &'v [Token<S>]) -> Result<(&'v [Token<S>], &'v [Token<S>]), GenerationError> {
    let i = q
        .iter()
        .position(|t| *t == Token::Sep)
        .ok_or_else(|| GenerationError::Malformed("expected state [SEP] proposal".into()))?;
    let (x, y) = (&q[..i], &q[i + 1..]);
    if x.len() != y.len() {
        return Err(GenerationError::Malformed("state and proposal differ in length".into()));
    }
    Ok((x, y))
}

/// Unmasks every masked position from the proposal.
pub struct OverwriteTransition<S> {
    pub mask: Token<S>,
}

impl<S: Symbol> Generator<S> for OverwriteTransition<S> {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        let (x, y) = split_state(view.active)?;
        Ok(x.iter()
            .zip(y)
            .map(|(a, b)| if *a == self.mask { b.clone() } else { a.clone() })
            .collect())
    }
}

/// Unmasks only the leftmost masked position.
pub struct LeftmostTransition<S> {
    pub mask: Token<S>,
}

impl<S: Symbol> Generator<S> for LeftmostTransition<S> {
    fn generate(&mut self, view: &View<'_, S>) -> Result<Vec<Token<S>>, GenerationError> {
        let (x, y) = split_state(view.active)?;
        let mut out = x.to_vec();
        if let Some(i) = x.iter().position(|t| *t == self.mask) {
            out[i] = y[i].clone();
        }
        Ok(out)
    }
}
