use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::classify::{GeneratorOutput, OutputKind};
use super::config::AnswerFormat;
use crate::token::{Symbol, Token};

/// An immutable frame with its content hash cached.
#[derive(Clone, Debug)]
pub(crate) struct Frame<S> {
    tokens: Arc<[Token<S>]>,
    hash: u64,
}

impl<S: Symbol> Frame<S> {
    fn new(tokens: Vec<Token<S>>) -> Self {
        let mut h = DefaultHasher::new();
        tokens.hash(&mut h);
        Frame {
            hash: h.finish(),
            tokens: tokens.into(),
        }
    }

    pub(crate) fn same(&self, other: &Self) -> bool {
        self.hash == other.hash
            && (Arc::ptr_eq(&self.tokens, &other.tokens) || self.tokens == other.tokens)
    }
}

/// One level of a persistent stack. Suspended levels are shared between
/// successive stack states, so snapshots are cheap.
#[derive(Debug)]
pub(crate) struct Level<S> {
    pub(crate) frame: Frame<S>,
    pub(crate) below: Option<Arc<Level<S>>>,
    depth: usize,
    global: usize,
    local: usize,
    fingerprint: u64,
}

impl<S: Symbol> Level<S> {
    fn new(frame: Frame<S>, below: Option<Arc<Level<S>>>) -> Arc<Self> {
        let (depth, global, local, fp) = match &below {
            Some(b) => (b.depth, b.global, b.local, b.fingerprint),
            None => (0, 0, 0, 0),
        };
        let mut h = DefaultHasher::new();
        (fp, frame.hash).hash(&mut h);
        let len = frame.tokens.len();
        Arc::new(Level {
            depth: depth + 1,
            global: global + len,
            local: local.max(len),
            fingerprint: h.finish(),
            frame,
            below,
        })
    }
}

impl<S> Drop for Level<S> {
    // unlink iteratively so dropping a deep stack cannot overflow
    fn drop(&mut self) {
        let mut next = self.below.take();
        while let Some(level) = next {
            match Arc::try_unwrap(level) {
                Ok(mut l) => next = l.below.take(),
                Err(_) => break,
            }
        }
    }
}

/// Structural equality of two persistent stacks, short-circuiting on shared
/// tails.
pub(crate) fn same_levels<S: Symbol>(a: &Arc<Level<S>>, b: &Arc<Level<S>>) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        if Arc::ptr_eq(a, b) {
            return true;
        }
        if a.depth != b.depth || a.fingerprint != b.fingerprint || !a.frame.same(&b.frame) {
            return false;
        }
        match (&a.below, &b.below) {
            (Some(x), Some(y)) => {
                a = x;
                b = y;
            }
            (None, None) => return true,
            _ => return false,
        }
    }
}

/// The context stack: a non-empty list of frames, the last one active.
#[derive(Clone, Debug)]
pub struct ContextStack<S> {
    top: Arc<Level<S>>,
}

/// Global and local space of a stack state.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Space {
    pub global: usize,
    pub local: usize,
}

/// Result of applying a classified output to a stack.
#[derive(Clone, Debug)]
pub enum Transition<S> {
    Continue(ContextStack<S>),
    /// A return at depth one: the run's final answer.
    Halt(Vec<Token<S>>),
}

impl<S: Symbol> ContextStack<S> {
    pub fn new(prompt: Vec<Token<S>>) -> Self {
        ContextStack {
            top: Level::new(Frame::new(prompt), None),
        }
    }

    pub fn depth(&self) -> usize {
        self.top.depth
    }

    pub fn active(&self) -> &[Token<S>] {
        &self.top.frame.tokens
    }

    /// Frames from the bottom (root) to the top (active).
    pub fn frames(&self) -> Vec<&[Token<S>]> {
        let mut out = Vec::with_capacity(self.depth());
        let mut cur = Some(&self.top);
        while let Some(l) = cur {
            out.push(&*l.frame.tokens);
            cur = l.below.as_ref();
        }
        out.reverse();
        out
    }

    pub(crate) fn top(&self) -> &Arc<Level<S>> {
        &self.top
    }

    /// Order-sensitive hash of the whole stack.
    pub(crate) fn fingerprint(&self) -> u64 {
        self.top.fingerprint
    }

    pub fn measure(&self) -> Space {
        Space {
            global: self.top.global,
            local: self.top.local,
        }
    }

    fn replace_top(&mut self, tokens: Vec<Token<S>>) {
        self.top = Level::new(Frame::new(tokens), self.top.below.clone());
    }

    /// Applies one step in place. On a return at depth one the stack is left
    /// unchanged and the answer is handed back.
    pub fn apply(
        &mut self,
        out: GeneratorOutput<S>,
        preservation: Option<&AnswerFormat<S>>,
    ) -> Option<Vec<Token<S>>> {
        let GeneratorOutput {
            kind,
            mut prefix,
            payload,
        } = out;
        match kind {
            OutputKind::Plain => self.replace_top(prefix),
            OutputKind::Call => {
                if preservation.is_some() {
                    prefix.extend(payload.iter().cloned());
                }
                self.replace_top(prefix);
                self.top = Level::new(Frame::new(payload), Some(self.top.clone()));
            }
            OutputKind::Return => {
                let Some(parent) = self.top.below.clone() else {
                    return Some(payload);
                };
                let mut tokens = parent.frame.tokens.to_vec();
                match preservation {
                    Some(fmt) => {
                        tokens.extend(fmt.infix.iter().cloned());
                        tokens.extend(payload);
                        tokens.extend(fmt.suffix.iter().cloned());
                    }
                    None => tokens.extend(payload),
                }
                self.top = Level::new(Frame::new(tokens), parent.below.clone());
            }
        }
        None
    }
}

impl<S: Symbol> PartialEq for ContextStack<S> {
    fn eq(&self, other: &Self) -> bool {
        same_levels(&self.top, &other.top)
    }
}

impl<S: Symbol> Eq for ContextStack<S> {}

/// Pure form of [`ContextStack::apply`].
pub fn apply_transition<S: Symbol>(
    stack: &ContextStack<S>,
    out: GeneratorOutput<S>,
    preservation: Option<&AnswerFormat<S>>,
) -> Transition<S> {
    let mut next = stack.clone();
    match next.apply(out, preservation) {
        Some(answer) => Transition::Halt(answer),
        None => Transition::Continue(next),
    }
}

pub fn measure<S: Symbol>(stack: &ContextStack<S>) -> Space {
    stack.measure()
}
