use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-step record kept when step logging is on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub depth: usize,
    pub local: usize,
    pub global: usize,
}

/// Resource usage of one run.
///
/// `max_local_space`, `max_global_space` and `max_depth` range over the
/// stack states visited, including the initial one. `max_active_context`
/// is the longest generated top sequence the generator produced, and
/// `max_visible_context` adds the root prefix when it was shown.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ResourceTrace {
    pub max_local_space: usize,
    pub max_global_space: usize,
    pub max_depth: usize,
    pub total_steps: u64,
    pub total_tokens_emitted: u64,
    pub max_active_context: usize,
    pub max_visible_context: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
}

impl ResourceTrace {
    pub(crate) fn observe(&mut self, depth: usize, local: usize, global: usize) {
        self.max_depth = self.max_depth.max(depth);
        self.max_local_space = self.max_local_space.max(local);
        self.max_global_space = self.max_global_space.max(global);
    }

    /// Per-step log as CSV with a header row.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from("step,depth,ls,gs\n");
        for r in &self.steps {
            out.push_str(&format!("{},{},{},{}\n", r.step, r.depth, r.local, r.global));
        }
        out
    }
}

/// One-line summary, `key=value` pairs separated by spaces.
impl fmt::Display for ResourceTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "max_ls={} max_gs={} max_depth={} total_steps={} total_tokens={} max_active={} max_visible={}",
            self.max_local_space,
            self.max_global_space,
            self.max_depth,
            self.total_steps,
            self.total_tokens_emitted,
            self.max_active_context,
            self.max_visible_context
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceParseError {
    #[error("malformed field `{0}`")]
    Field(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    Missing(&'static str),
}

impl FromStr for ResourceTrace {
    type Err = TraceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut vals: [Option<u64>; 7] = [None; 7];
        const KEYS: [&str; 7] = [
            "max_ls",
            "max_gs",
            "max_depth",
            "total_steps",
            "total_tokens",
            "max_active",
            "max_visible",
        ];
        for field in s.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| TraceParseError::Field(field.to_string()))?;
            let idx = KEYS
                .iter()
                .position(|key| *key == k)
                .ok_or_else(|| TraceParseError::UnknownKey(k.to_string()))?;
            let n = v
                .parse::<u64>()
                .map_err(|_| TraceParseError::Field(field.to_string()))?;
            vals[idx] = Some(n);
        }
        let get = |i: usize| vals[i].ok_or(TraceParseError::Missing(KEYS[i]));
        Ok(ResourceTrace {
            max_local_space: get(0)? as usize,
            max_global_space: get(1)? as usize,
            max_depth: get(2)? as usize,
            total_steps: get(3)?,
            total_tokens_emitted: get(4)?,
            max_active_context: get(5)? as usize,
            max_visible_context: get(6)? as usize,
            steps: Vec::new(),
        })
    }
}
