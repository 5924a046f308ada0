//! DPLL as a next-block generator over text frames.
//!
//! A frame's task is either the root question or an assignment such as
//! `Alice=True, Carol=False`. A fresh frame gets a clause-by-clause
//! analysis under its assignment, ending in a return (conflict or all
//! satisfied) or a call that extends the assignment by one variable. After
//! a child answers, the frame either returns that answer or, when the
//! `True` branch failed, tries `False`.

use std::fmt::Write;

use super::cnf::CnfFormula;
use crate::runtime::{GenerationError, Generator, View};
use crate::template::TextFrame;
use crate::token::Token;

fn value_text(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

/// An ordered partial assignment.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    order: Vec<(usize, bool)>,
}

impl Assignment {
    pub fn get(&self, var: usize) -> Option<bool> {
        self.order.iter().find(|(v, _)| *v == var).map(|(_, b)| *b)
    }

    pub fn with(&self, var: usize, value: bool) -> Assignment {
        let mut a = self.clone();
        a.order.push((var, value));
        a
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `Alice=True, Carol=False`, in assignment order.
    pub fn render(&self, f: &CnfFormula) -> String {
        let parts: Vec<String> = self
            .order
            .iter()
            .map(|(v, b)| format!("{}={}", f.name(*v), value_text(*b)))
            .collect();
        parts.join(", ")
    }

    pub fn parse(text: &str, f: &CnfFormula) -> Result<Assignment, String> {
        let mut a = Assignment::default();
        for part in text.split(", ") {
            let (name, val) = part
                .split_once('=')
                .ok_or_else(|| format!("bad assignment `{part}`"))?;
            let var = f
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| format!("unknown variable `{name}`"))?
                + 1;
            let b = match val {
                "True" => true,
                "False" => false,
                _ => return Err(format!("bad value `{val}`")),
            };
            if a.get(var).is_some() {
                return Err(format!("`{name}` assigned twice"));
            }
            a.order.push((var, b));
        }
        Ok(a)
    }
}

/// What the clause scan concluded.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Conflict,
    Satisfied,
    Contradictory(usize),
    Unit(usize, bool),
    Branch(usize),
}

/// Clause-by-clause analysis text and its conclusion.
pub fn analyze(f: &CnfFormula, a: &Assignment) -> (String, Verdict) {
    let mut out = String::new();
    if !a.is_empty() {
        writeln!(out, "Given: {}", a.render(f)).unwrap();
    }
    let lit = |l: i32| {
        let name = f.name(l.unsigned_abs() as usize);
        if l > 0 {
            name.to_string()
        } else {
            format!("~{name}")
        }
    };
    let clause_text = |ls: &[i32]| {
        let v: Vec<String> = ls.iter().map(|l| lit(*l)).collect();
        format!("({})", v.join(" v "))
    };
    let mut units: Vec<(usize, bool)> = Vec::new();
    let mut open_vars: Vec<usize> = Vec::new();
    let mut all_sat = true;
    for (i, c) in f.clauses.iter().enumerate() {
        writeln!(out, "Condition {}:", i + 1).unwrap();
        writeln!(out, "  Clause: {}", clause_text(c)).unwrap();
        let truth = |l: &i32| a.get(l.unsigned_abs() as usize).map(|b| b == (*l > 0));
        if c.iter().any(|l| truth(l) == Some(true)) {
            out.push_str("  -> satisfied\n");
            continue;
        }
        all_sat = false;
        let rest: Vec<i32> = c.iter().copied().filter(|l| truth(l).is_none()).collect();
        if rest.is_empty() {
            out.push_str("  Simplify as: () -> CONFLICT\nContradiction!\n");
            return (out, Verdict::Conflict);
        }
        if rest.len() == c.len() {
            out.push_str("  (no simplification needed)\n");
        } else {
            writeln!(out, "  Simplify as: {}", clause_text(&rest)).unwrap();
        }
        if let [l] = rest.as_slice() {
            let v = l.unsigned_abs() as usize;
            writeln!(out, "  -> unit: {}={}", f.name(v), value_text(*l > 0)).unwrap();
            if !units.contains(&(v, *l > 0)) {
                units.push((v, *l > 0));
            }
        } else {
            out.push_str("  -> (not unit)\n");
        }
        for l in rest {
            let v = l.unsigned_abs() as usize;
            if !open_vars.contains(&v) {
                open_vars.push(v);
            }
        }
    }
    if all_sat {
        out.push_str("All conditions satisfied!\n");
        return (out, Verdict::Satisfied);
    }
    if let Some((v, _)) = units
        .iter()
        .find(|(v, b)| units.contains(&(*v, !*b)))
    {
        writeln!(out, "Contradiction! {} is forced to both True and False", f.name(*v)).unwrap();
        return (out, Verdict::Contradictory(*v));
    }
    if let Some((v, b)) = units.first() {
        writeln!(out, "Unit propagation: {}={}", f.name(*v), value_text(*b)).unwrap();
        return (out, Verdict::Unit(*v, *b));
    }
    open_vars.sort_unstable();
    let names: Vec<&str> = open_vars.iter().map(|v| f.name(*v)).collect();
    writeln!(out, "No unit clause found. Unassigned: [{}]", names.join(", ")).unwrap();
    (out, Verdict::Branch(open_vars[0]))
}

pub struct DpllGenerator<'a> {
    formula: &'a CnfFormula,
    question: String,
}

impl<'a> DpllGenerator<'a> {
    /// `question` is the root frame's task.
    pub fn new(formula: &'a CnfFormula, question: impl Into<String>) -> Self {
        DpllGenerator {
            formula,
            question: question.into(),
        }
    }

    fn assignment(&self, task: &str) -> Result<Assignment, GenerationError> {
        if task == self.question {
            return Ok(Assignment::default());
        }
        Assignment::parse(task, self.formula).map_err(GenerationError::Malformed)
    }

    fn call(&self, a: &Assignment) -> String {
        format!("<call>{}</call>", a.render(self.formula))
    }

    fn fresh(&self, a: &Assignment) -> String {
        let f = self.formula;
        let (mut out, verdict) = analyze(f, a);
        match verdict {
            Verdict::Conflict | Verdict::Contradictory(_) => out.push_str("<return>No</return>"),
            Verdict::Satisfied => out.push_str("<return>Yes</return>"),
            Verdict::Unit(v, b) => out.push_str(&self.call(&a.with(v, b))),
            Verdict::Branch(v) => {
                writeln!(out, "Try {} = True", f.name(v)).unwrap();
                out.push_str(&self.call(&a.with(v, true)));
            }
        }
        out
    }

    fn resume(&self, a: &Assignment, reasoning: &str) -> Result<String, GenerationError> {
        let malformed = || GenerationError::Malformed("frame does not end in an answered call".into());
        let mut lines = reasoning.lines().rev();
        let answer_line = lines.next().ok_or_else(malformed)?;
        let step_line = lines.next().ok_or_else(malformed)?;
        let answer = answer_line
            .rsplit_once(". The answer is: ")
            .and_then(|(_, r)| r.strip_suffix('.'))
            .ok_or_else(malformed)?;
        let ret = format!("<return>{answer}</return>");
        if step_line.starts_with("Unit propagation: ") {
            return Ok(ret);
        }
        let tried = step_line.strip_prefix("Try ").ok_or_else(malformed)?;
        let (name, value) = tried.split_once(" = ").ok_or_else(malformed)?;
        match (value, answer) {
            ("True", "No") => {
                let var = self
                    .formula
                    .names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(malformed)?
                    + 1;
                Ok(format!("Try {name} = False\n{}", self.call(&a.with(var, false))))
            }
            ("True", _) | ("False", _) => Ok(ret),
            _ => Err(malformed()),
        }
    }

    /// Generated content for a frame, without the leading separator.
    pub fn content(&self, frame: &TextFrame) -> Result<String, GenerationError> {
        let a = self.assignment(&frame.task)?;
        match &frame.reasoning {
            None => Ok(self.fresh(&a)),
            Some(r) => self.resume(&a, r),
        }
    }
}

impl Generator<char> for DpllGenerator<'_> {
    fn generate(&mut self, view: &View<'_, char>) -> Result<Vec<Token<char>>, GenerationError> {
        let frame = TextFrame::parse(view.active);
        let content = self.content(&frame)?;
        Ok(frame.continuation(&content))
    }
}
