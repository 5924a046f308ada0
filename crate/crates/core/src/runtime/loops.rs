use std::collections::HashMap;

use std::sync::Arc;

use super::stack::{same_levels, ContextStack, Level};
use crate::token::Symbol;

/// Remembers every stack state seen in a run.
///
/// Lookup is by fingerprint; colliding entries are compared frame by frame,
/// so a hash collision can never produce a false positive.
#[derive(Debug)]
pub struct LoopDetector<S> {
    seen: HashMap<u64, Vec<Arc<Level<S>>>>,
}

impl<S: Symbol> Default for LoopDetector<S> {
    fn default() -> Self {
        LoopDetector {
            seen: HashMap::new(),
        }
    }
}

impl<S: Symbol> LoopDetector<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `stack` and reports whether it was already present.
    pub fn seen_before(&mut self, stack: &ContextStack<S>) -> bool {
        let bucket = self.seen.entry(stack.fingerprint()).or_default();
        let top = stack.top();
        let hit = bucket.iter().any(|snap| same_levels(snap, top));
        if !hit {
            bucket.push(top.clone());
        }
        hit
    }

    pub fn len(&self) -> usize {
        self.seen.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// True iff `stack` equals some element of `history`.
pub fn detect_loop<S: Symbol>(history: &[ContextStack<S>], stack: &ContextStack<S>) -> bool {
    history.iter().any(|h| h == stack)
}
