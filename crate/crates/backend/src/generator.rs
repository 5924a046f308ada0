use rcm_core::runtime::{GenerationError, Generator, View};
use rcm_core::template::{build_prompt, TextFrame};
use rcm_core::token::text::{self, TextToken};
use rcm_core::token::{CALL_CLOSE_TEXT, RET_CLOSE_TEXT};

use crate::client::{BackendError, Client};

/// Runtime generator that asks the endpoint for each next block.
///
/// Only the active frame and the root problem are sent. A frame's text
/// before its first `[SEP]` is the task; the rest is the reasoning so far,
/// sent as the assistant prefill.
pub struct LlmGenerator {
    client: Client,
    root: Option<String>,
    requests: u64,
    last_error: Option<BackendError>,
}

impl LlmGenerator {
    pub fn new(client: Client) -> Self {
        LlmGenerator {
            client,
            root: None,
            requests: 0,
            last_error: None,
        }
    }

    /// Root problem used when the runtime does not show one.
    pub fn with_root(mut self, root: impl Into<String>) -> Self {
        self.root = Some(root.into());
        self
    }

    pub fn requests(&self) -> u64 {
        self.requests
    }

    pub fn last_error(&self) -> Option<&BackendError> {
        self.last_error.as_ref()
    }

    pub fn take_error(&mut self) -> Option<BackendError> {
        self.last_error.take()
    }
}

impl Generator<char> for LlmGenerator {
    fn generate(&mut self, view: &View<'_, char>) -> Result<Vec<TextToken>, GenerationError> {
        let frame = TextFrame::parse(view.active);
        let root = match (view.root, &self.root) {
            (Some(r), _) => text::render(r),
            (None, Some(r)) => r.clone(),
            (None, None) => frame.task.clone(),
        };
        let prompt = build_prompt(&root, &frame.task);
        self.requests += 1;
        match self.client.complete_with_prefix(&prompt, frame.prefix()) {
            Ok(c) if c.finish_reason.as_deref() == Some("length") && !ends_with_closer(&c.text) => {
                Err(GenerationError::Malformed(format!(
                    "reply hit the token limit without a closing marker ({} chars)",
                    c.text.len()
                )))
            }
            Ok(c) => Ok(frame.continuation(&c.text)),
            Err(e) => {
                let msg = e.to_string();
                self.last_error = Some(e);
                Err(GenerationError::Failed(msg))
            }
        }
    }
}

fn ends_with_closer(s: &str) -> bool {
    s.ends_with(CALL_CLOSE_TEXT) || s.ends_with(RET_CLOSE_TEXT)
}
