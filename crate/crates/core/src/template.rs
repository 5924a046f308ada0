//! The prompt wrapped around every text frame, and the convention for
//! splitting a text frame into its task and the reasoning produced so far.

use crate::token::{text, Token};

pub const INSTRUCTIONS: &str = "Solve problems recursively. Use <call> </call> to decompose the problem and <return> </return> to return the answer.";

/// Renders the prompt for one frame.
pub fn build_prompt(root_problem: &str, current_task: &str) -> String {
    format!("[Instructions]\n{INSTRUCTIONS}\n\n[Root Problem]\n{root_problem}\n\n[Current Task]\n{current_task}")
}

/// A text frame split at its first `[SEP]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TextFrame {
    pub task: String,
    /// Reasoning after the separator; `None` for a fresh frame.
    pub reasoning: Option<String>,
}

impl TextFrame {
    pub fn parse(active: &[Token<char>]) -> Self {
        match active.iter().position(|t| *t == Token::Sep) {
            Some(i) => TextFrame {
                task: text::render(&active[..i]),
                reasoning: Some(text::render(&active[i + 1..])),
            },
            None => TextFrame {
                task: text::render(active),
                reasoning: None,
            },
        }
    }

    pub fn prefix(&self) -> &str {
        self.reasoning.as_deref().unwrap_or("")
    }

    /// Tokens to append for generated `content`: a fresh frame first gets
    /// the separator that marks where its reasoning starts.
    pub fn continuation(&self, content: &str) -> Vec<Token<char>> {
        let mut out = Vec::new();
        if self.reasoning.is_none() {
            out.push(Token::Sep);
        }
        out.extend(text::tokenize(content));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_split_at_separator() {
        let f = TextFrame::parse(&text::tokenize("A=True"));
        assert_eq!(f.reasoning, None);
        assert_eq!(f.continuation("x")[0], Token::Sep);
        let f = TextFrame::parse(&text::tokenize("A=True[SEP]Given: A=True\n"));
        assert_eq!(f.task, "A=True");
        assert_eq!(f.prefix(), "Given: A=True\n");
        assert_eq!(f.continuation("x").len(), 1);
    }
}
