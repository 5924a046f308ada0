//! A shared suite on which the one-scaffold call/return system and the
//! context-stack runtime are compared.

use super::{evaluate, EvalBudget, RecursiveModel, ScaffoldSystem};
use crate::alternation::{frame_tokens, EvalGenerator};
use crate::machine::{fixtures, normalize_atm};
use crate::rtm::{Frame, Func, RtmGenerator};
use crate::runtime::{run, AnswerFormat, FnGenerator, GenerationError, Generator, Limits, RunConfig, View};
use crate::token::text::{self, TextToken};
use crate::token::{Symbol, Token};
use crate::updates::embed;

/// Outcome of one fixture under both drivers. `None` is ⊥.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Comparison {
    pub runtime: Option<String>,
    pub scaffold: Option<String>,
    /// Whether the fixture is expected to have a defined answer.
    pub expect_answer: bool,
}

impl Comparison {
    pub fn agrees(&self) -> bool {
        self.runtime == self.scaffold && self.runtime.is_some() == self.expect_answer
    }
}

pub struct ModelFixture {
    pub name: &'static str,
    pub run: fn() -> Comparison,
}

/// Runs `prompt` through the runtime and through the one-scaffold system
/// built from the same configuration. Prompt prefixing must be off.
pub fn compare<S, G>(
    prompt: &[Token<S>],
    mut make: impl FnMut() -> G,
    cfg: &RunConfig<S>,
    budget: EvalBudget,
    expect_answer: bool,
) -> Comparison
where
    S: Symbol,
    G: Generator<S>,
{
    assert!(!cfg.prompt_prefixing, "the scaffold form has no root prefix");
    let show = |a: &[Token<S>]| format!("{a:?}");
    let runtime = run(prompt, &mut make(), cfg).answer().map(show);
    let mut program = RecursiveModel::new(0, 0);
    if let Some(fmt) = &cfg.question_preservation {
        program = program.with_preservation(fmt.clone());
    }
    if !cfg.loop_detection {
        program = program.without_loop_detection();
    }
    let mut sys = ScaffoldSystem::recursive_model(make(), program);
    let scaffold = evaluate(&mut sys, 0, prompt, budget).ok().map(|a| show(&a));
    Comparison {
        runtime,
        scaffold,
        expect_answer,
    }
}

fn rule(f: fn(&str) -> String) -> FnGenerator<impl FnMut(&[TextToken]) -> Vec<TextToken>> {
    FnGenerator(move |ctx: &[TextToken]| text::tokenize(&f(&text::render(ctx))))
}

fn text_case(prompt: &str, f: fn(&str) -> String, cfg: RunConfig<char>, expect: bool) -> Comparison {
    compare(&text::tokenize(prompt), || rule(f), &cfg, EvalBudget::default(), expect)
}

fn basic() -> RunConfig<char> {
    RunConfig::default()
}

fn preserving() -> RunConfig<char> {
    RunConfig::default().with_question_preservation(AnswerFormat::text())
}

/// Splits `c<k><rest>` into `k` and the rest.
fn counter(ctx: &str, tag: char) -> (u32, &str) {
    let body = ctx.strip_prefix(tag).unwrap_or(ctx);
    let end = body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len());
    (body[..end].parse().unwrap_or(0), &body[end..])
}

fn answers(rest: &str) -> Vec<&str> {
    rest.split("The answer is: ")
        .skip(1)
        .map(|s| s.split(".\n").next().unwrap_or(""))
        .collect()
}

fn countdown_basic(ctx: &str) -> String {
    let (k, rest) = counter(ctx, 'c');
    match (k, rest) {
        (0, _) => "<return>z</return>".into(),
        (_, "") => format!("<call>c{}</call>", k - 1),
        (_, ans) => format!("<return>{ans}s</return>"),
    }
}

fn countdown_preserving(ctx: &str) -> String {
    let (k, rest) = counter(ctx, 'c');
    match (k, answers(rest).first()) {
        (0, _) => "<return>z</return>".into(),
        (_, None) => format!("<call>c{}</call>", k - 1),
        (_, Some(ans)) => format!("<return>{ans}s</return>"),
    }
}

fn fibonacci(ctx: &str) -> String {
    let (k, rest) = counter(ctx, 'f');
    if k < 2 {
        return "<return>1</return>".into();
    }
    let got: Vec<u64> = answers(rest).iter().map(|a| a.parse().unwrap_or(0)).collect();
    match got.as_slice() {
        [] => format!("<call>f{}</call>", k - 1),
        [_] => format!("<call>f{}</call>", k - 2),
        [a, b, ..] => format!("<return>{}</return>", a + b),
    }
}

fn deep_chain(ctx: &str) -> String {
    let (k, rest) = counter(ctx, 'd');
    match (k, rest) {
        (60, _) => "<return>!</return>".into(),
        (_, "") => format!("<call>d{}</call>", k + 1),
        (_, ans) => format!("<return>{ans}.</return>"),
    }
}

struct Failing;

impl Generator<char> for Failing {
    fn generate(&mut self, view: &View<'_, char>) -> Result<Vec<TextToken>, GenerationError> {
        if view.active.len() > 3 {
            return Err(GenerationError::Malformed("unparseable frame".into()));
        }
        Ok(text::tokenize("<call>abcd</call>"))
    }
}

fn atm_case(which: &str, input: &str) -> Comparison {
    let atm = normalize_atm(&match which {
        "cnf_eval" => fixtures::cnf_eval(),
        _ => fixtures::followed(),
    });
    let w = atm.signature().encode(input).expect("fixture input");
    let prompt = frame_tokens(&embed(&atm.initial_config(&w)));
    compare(&prompt, || EvalGenerator::new(&atm), &RunConfig::default(), EvalBudget::default(), true)
}

fn rtm_case(tm: crate::machine::TuringMachine, input: &str) -> Comparison {
    let w = tm.signature().encode(input).expect("fixture input");
    let prompt = Frame::new(Func::Run, &w, 0, None).tokens();
    compare(&prompt, || RtmGenerator::new(&tm, true), &RunConfig::default(), EvalBudget::default(), true)
}

pub fn model_fixtures() -> Vec<ModelFixture> {
    vec![
        ModelFixture {
            name: "immediate return",
            run: || text_case("hello", |_| "<return>done</return>".into(), basic(), true),
        },
        ModelFixture {
            name: "plain steps then return",
            run: || {
                text_case(
                    "ab",
                    |c| if c.len() < 8 { ".".into() } else { format!("<return>{c}</return>") },
                    basic(),
                    true,
                )
            },
        },
        ModelFixture {
            name: "single call",
            run: || {
                text_case(
                    "task",
                    |c| match c {
                        "task" => "<call>sub</call>".into(),
                        "sub" => "<return>42</return>".into(),
                        s => format!("<return>{}</return>", &s[4..]),
                    },
                    basic(),
                    true,
                )
            },
        },
        ModelFixture {
            name: "countdown",
            run: || text_case("c5", countdown_basic, basic(), true),
        },
        ModelFixture {
            name: "countdown with question preservation",
            run: || text_case("c5", countdown_preserving, preserving(), true),
        },
        ModelFixture {
            name: "two calls per frame",
            run: || text_case("f7", fibonacci, preserving(), true),
        },
        ModelFixture {
            name: "stalled frame",
            run: || text_case("x", |_| String::new(), basic(), false),
        },
        ModelFixture {
            name: "call returning to the same frame",
            run: || {
                text_case(
                    "a",
                    |c| if c == "a" { "<call>b</call>".into() } else { "<return></return>".into() },
                    basic(),
                    false,
                )
            },
        },
        ModelFixture {
            name: "call on its own frame",
            run: || text_case("r", |_| "<call>r</call>".into(), basic(), false),
        },
        ModelFixture {
            name: "returned call prefix completed by the caller",
            run: || {
                text_case(
                    "p",
                    |c| match c {
                        "p" => "<call>q</call>".into(),
                        "q" => "<return>x<call>y</return>".into(),
                        "px<call>y" => "</call>".into(),
                        "y" => "<return>Y</return>".into(),
                        _ => "<return>done</return>".into(),
                    },
                    basic(),
                    true,
                )
            },
        },
        ModelFixture {
            name: "separators in payloads",
            run: || {
                text_case(
                    "s",
                    |c| match c {
                        "s" => "<call>a[SEP]b</call>".into(),
                        "a[SEP]b" => "<return>b[SEP]a</return>".into(),
                        s => format!("<return>{}</return>", &s[1..]),
                    },
                    basic(),
                    true,
                )
            },
        },
        ModelFixture {
            name: "block in the middle stays plain",
            run: || {
                text_case(
                    "m",
                    |c| if c == "m" { "<call>z</call>.".into() } else { format!("<return>{}</return>", c.len()) },
                    basic(),
                    true,
                )
            },
        },
        ModelFixture {
            name: "unmatched closer stays plain",
            run: || {
                text_case(
                    "k",
                    |c| if c == "k" { "x</return>".into() } else { "<return>ok</return>".into() },
                    basic(),
                    true,
                )
            },
        },
        ModelFixture {
            name: "generator failure",
            run: || compare(&text::tokenize("go"), || Failing, &basic(), EvalBudget::default(), false),
        },
        ModelFixture {
            name: "sixty levels deep",
            run: || text_case("d0", deep_chain, basic(), true),
        },
        ModelFixture {
            name: "frame grows without bound",
            run: || {
                let cfg = basic().with_limits(Limits::new(64, 100, 10_000).expect("positive limits"));
                let budget = EvalBudget::new(256, 10_000, 100).expect("positive budget");
                compare(&text::tokenize("g"), || rule(|_| "xx".into()), &cfg, budget, false)
            },
        },
        ModelFixture {
            name: "formula evaluation machine",
            run: || atm_case("cnf_eval", "10#01"),
        },
        ModelFixture {
            name: "followed-by machine",
            run: || atm_case("followed", "abba"),
        },
        ModelFixture {
            name: "parity machine by recursion",
            run: || rtm_case(fixtures::parity(), "1101"),
        },
        ModelFixture {
            name: "increment machine by recursion",
            run: || rtm_case(fixtures::increment(), "101"),
        },
    ]
}
