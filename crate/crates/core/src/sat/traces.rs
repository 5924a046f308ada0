use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{parse_answer, sat_config, DpllGenerator, SatInstance};
use crate::runtime::{run_observed, run_with_root, GenerationError, Generator, RunConfig, RunResult, View};
use crate::template::{build_prompt, TextFrame};
use crate::token::{text, Token};

/// One supervised example: the prompt for a frame, the reasoning already
/// in that frame, and the block generated next.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TraceSample {
    pub user: String,
    pub assistant_prefix: String,
    pub assistant_content: String,
}

/// Runs the DPLL policy and records every generator invocation.
pub fn gen_traces(instance: &SatInstance) -> (Vec<TraceSample>, RunResult<char>) {
    let mut g = DpllGenerator::new(&instance.formula, instance.question.clone());
    let mut samples = Vec::new();
    let root = text::tokenize(&instance.root_problem);
    let result = run_observed(
        Some(&root),
        &text::tokenize(&instance.question),
        &mut g,
        &sat_config(),
        &mut |e| {
            let frame = TextFrame::parse(e.active);
            let content = match e.continuation.first() {
                Some(Token::Sep) if frame.reasoning.is_none() => &e.continuation[1..],
                _ => e.continuation,
            };
            samples.push(TraceSample {
                user: build_prompt(&instance.root_problem, &frame.task),
                assistant_prefix: frame.prefix().to_string(),
                assistant_content: text::render(content),
            });
        },
    );
    (samples, result)
}

/// A generator that answers from recorded samples, keyed by prompt and
/// prefix.
pub struct ReplayGenerator {
    root_problem: String,
    table: HashMap<(String, String), String>,
}

impl ReplayGenerator {
    pub fn new(root_problem: &str, samples: &[TraceSample]) -> Self {
        ReplayGenerator {
            root_problem: root_problem.to_string(),
            table: samples
                .iter()
                .map(|s| {
                    (
                        (s.user.clone(), s.assistant_prefix.clone()),
                        s.assistant_content.clone(),
                    )
                })
                .collect(),
        }
    }
}

impl Generator<char> for ReplayGenerator {
    fn generate(&mut self, view: &View<'_, char>) -> Result<Vec<Token<char>>, GenerationError> {
        let frame = TextFrame::parse(view.active);
        let key = (
            build_prompt(&self.root_problem, &frame.task),
            frame.prefix().to_string(),
        );
        let content = self
            .table
            .get(&key)
            .ok_or_else(|| GenerationError::Malformed(format!("no recorded step for task `{}`", frame.task)))?;
        Ok(frame.continuation(content))
    }
}

/// Re-runs an instance from its samples; returns the parsed answer.
pub fn replay(instance: &SatInstance, samples: &[TraceSample], config: &RunConfig<char>) -> Option<bool> {
    let mut g = ReplayGenerator::new(&instance.root_problem, samples);
    let r = run_with_root(
        &text::tokenize(&instance.root_problem),
        &text::tokenize(&instance.question),
        &mut g,
        config,
    );
    parse_answer(r.answer())
}

pub fn write_jsonl<W: Write>(mut w: W, samples: &[TraceSample]) -> io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> io::Result<Vec<TraceSample>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}
