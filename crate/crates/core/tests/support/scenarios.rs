//! Scripted-generator scenarios for the context-stack runtime, each with a
//! hand-derived outcome, checked against a naive reference interpreter that
//! works on rendered token strings and keeps the full stack history.

use std::time::{Duration, Instant};

use rcm_core::runtime::{run, run_with_root, AnswerFormat, Bottom, GenerationError, Generator, LimitKind, Limits, RunConfig, RunResult, View};
use rcm_core::token::text::{self, TextToken};

pub type Script = Box<dyn FnMut(u64, &str) -> Result<String, GenerationError>>;

#[derive(Clone, Copy, Debug)]
pub struct Setup {
    pub prefix: bool,
    pub preserve: bool,
    pub loops: bool,
    pub limits: (usize, usize, u64),
}

impl Default for Setup {
    fn default() -> Self {
        let d = Limits::default();
        Setup {
            prefix: false,
            preserve: false,
            loops: true,
            limits: (d.max_local_space(), d.max_depth(), d.max_steps()),
        }
    }
}

impl Setup {
    fn config(&self) -> RunConfig<char> {
        let (s, d, t) = self.limits;
        let mut c = RunConfig::default().with_limits(Limits::new(s, d, t).unwrap());
        if self.prefix {
            c = c.with_prompt_prefixing();
        }
        if self.preserve {
            c = c.with_question_preservation(AnswerFormat::text());
        }
        if !self.loops {
            c = c.without_loop_detection();
        }
        c
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expect {
    Answer(String),
    Bottom(Bottom),
}

pub struct Scenario {
    pub name: &'static str,
    pub prompt: &'static str,
    pub root: Option<&'static str>,
    pub setup: Setup,
    pub script: fn() -> Script,
    pub expect: Expect,
}

/// What both interpreters report.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Observed {
    pub outcome: Expect,
    pub steps: u64,
    pub max_depth: usize,
    pub max_local: usize,
    pub max_global: usize,
    pub emitted: u64,
    pub max_active: usize,
    pub max_visible: usize,
}

struct ScriptGen(Script);

impl Generator<char> for ScriptGen {
    fn generate(&mut self, view: &View<'_, char>) -> Result<Vec<TextToken>, GenerationError> {
        (self.0)(view.step, &text::render(&view.context())).map(|s| text::tokenize(&s))
    }
}

pub fn run_runtime(sc: &Scenario) -> Observed {
    let cfg = sc.setup.config();
    let mut g = ScriptGen((sc.script)());
    let prompt = text::tokenize(sc.prompt);
    let r: RunResult<char> = match sc.root {
        Some(root) => run_with_root(&text::tokenize(root), &prompt, &mut g, &cfg),
        None => run(&prompt, &mut g, &cfg),
    };
    let t = &r.trace;
    Observed {
        outcome: match r.answer() {
            Some(a) => Expect::Answer(text::render(a)),
            None => Expect::Bottom(r.bottom().unwrap()),
        },
        steps: t.total_steps,
        max_depth: t.max_depth,
        max_local: t.max_local_space,
        max_global: t.max_global_space,
        emitted: t.total_tokens_emitted,
        max_active: t.max_active_context,
        max_visible: t.max_visible_context,
    }
}

// ---- reference interpreter ----

type Frame = Vec<String>;

fn toks(s: &str) -> Frame {
    text::tokenize(s).iter().map(|t| text::render(std::slice::from_ref(t))).collect()
}

fn is_marker(t: &str) -> bool {
    matches!(t, "<call>" | "</call>" | "<return>" | "</return>" | "[SEP]")
}

enum Kind {
    Plain,
    Call(usize),
    Return(usize),
}

fn classify(y: &[String]) -> Kind {
    let (opener, allowed): (&str, &[&str]) = match y.last().map(String::as_str) {
        Some("</call>") => ("<call>", &["[SEP]"]),
        Some("</return>") => ("<return>", &["[SEP]", "<call>"]),
        _ => return Kind::Plain,
    };
    for i in (0..y.len() - 1).rev() {
        let t = y[i].as_str();
        if t == opener {
            return if opener == "<call>" { Kind::Call(i) } else { Kind::Return(i) };
        }
        if is_marker(t) && !allowed.contains(&t) {
            return Kind::Plain;
        }
    }
    Kind::Plain
}

pub fn run_reference(sc: &Scenario) -> Observed {
    let s = sc.setup;
    let (max_local, max_depth, max_steps) = s.limits;
    let mut script = (sc.script)();
    let root = toks(sc.root.unwrap_or(sc.prompt));
    let (infix, suffix) = (toks(". The answer is: "), toks(".\n"));
    let mut stack: Vec<Frame> = vec![toks(sc.prompt)];
    let mut history: Vec<Vec<Frame>> = vec![stack.clone()];
    let local = |st: &Vec<Frame>| st.iter().map(Vec::len).max().unwrap_or(0);
    let global = |st: &Vec<Frame>| st.iter().map(Vec::len).sum::<usize>();
    let mut o = Observed {
        outcome: Expect::Answer(String::new()),
        steps: 0,
        max_depth: 1,
        max_local: local(&stack),
        max_global: global(&stack),
        emitted: 0,
        max_active: 0,
        max_visible: 0,
    };
    let done = |mut o: Observed, e: Expect| {
        o.outcome = e;
        o
    };
    if local(&stack) > max_local {
        return done(o, Expect::Bottom(Bottom::LimitExceeded(LimitKind::LocalSpace)));
    }
    loop {
        if o.steps >= max_steps {
            return done(o, Expect::Bottom(Bottom::LimitExceeded(LimitKind::Steps)));
        }
        let show_root = s.prefix && (sc.root.is_some() || o.steps > 0);
        let top = stack.last().unwrap().clone();
        let mut ctx = if show_root { root.clone() } else { Vec::new() };
        ctx.extend(top.iter().cloned());
        let cont = match script(o.steps, &ctx.concat()) {
            Ok(c) => toks(&c),
            Err(GenerationError::Malformed(_)) => return done(o, Expect::Bottom(Bottom::MalformedOutput)),
            Err(GenerationError::Failed(_)) => return done(o, Expect::Bottom(Bottom::GeneratorFailed)),
        };
        o.steps += 1;
        o.emitted += cont.len() as u64;
        let mut y = top.clone();
        y.extend(cont);
        o.max_active = o.max_active.max(y.len());
        o.max_visible = o.max_visible.max(y.len() + if show_root { root.len() } else { 0 });
        let kind = classify(&y);
        if y.len() > max_local {
            let b = match kind {
                Kind::Plain => Bottom::MalformedOutput,
                _ => Bottom::LimitExceeded(LimitKind::LocalSpace),
            };
            return done(o, Expect::Bottom(b));
        }
        match kind {
            Kind::Plain => *stack.last_mut().unwrap() = y,
            Kind::Call(i) => {
                if stack.len() + 1 > max_depth {
                    return done(o, Expect::Bottom(Bottom::LimitExceeded(LimitKind::Depth)));
                }
                let payload = y[i + 1..y.len() - 1].to_vec();
                let mut caller = y[..i].to_vec();
                if s.preserve {
                    caller.extend(payload.iter().cloned());
                }
                *stack.last_mut().unwrap() = caller;
                stack.push(payload);
            }
            Kind::Return(i) => {
                let payload = y[i + 1..y.len() - 1].to_vec();
                stack.pop();
                let Some(parent) = stack.last_mut() else {
                    return done(o, Expect::Answer(payload.concat()));
                };
                if s.preserve {
                    parent.extend(infix.iter().cloned());
                    parent.extend(payload);
                    parent.extend(suffix.iter().cloned());
                } else {
                    parent.extend(payload);
                }
            }
        }
        if local(&stack) > max_local {
            return done(o, Expect::Bottom(Bottom::LimitExceeded(LimitKind::LocalSpace)));
        }
        o.max_depth = o.max_depth.max(stack.len());
        o.max_local = o.max_local.max(local(&stack));
        o.max_global = o.max_global.max(global(&stack));
        if s.loops {
            if history.contains(&stack) {
                return done(o, Expect::Bottom(Bottom::LoopDetected));
            }
            history.push(stack.clone());
        }
    }
}

// ---- scripts ----

fn rule(f: fn(&str) -> String) -> Script {
    Box::new(move |_, c| Ok(f(c)))
}

fn seq(items: &'static [&'static str]) -> Script {
    Box::new(move |step, _| {
        items
            .get(step as usize)
            .map(|s| s.to_string())
            .ok_or_else(|| GenerationError::Failed("script exhausted".into()))
    })
}

fn ret(s: &str) -> String {
    format!("<return>{s}</return>")
}

fn call(s: &str) -> String {
    format!("<call>{s}</call>")
}

fn counter(ctx: &str, tag: char) -> (u32, &str) {
    let body = ctx.strip_prefix(tag).unwrap_or(ctx);
    let end = body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len());
    (body[..end].parse().unwrap_or(0), &body[end..])
}

fn answers(rest: &str) -> Vec<&str> {
    rest.split("The answer is: ").skip(1).map(|s| s.split(".\n").next().unwrap_or("")).collect()
}

fn countdown(c: &str) -> String {
    match counter(c, 'c') {
        (0, _) => ret("z"),
        (k, "") => call(&format!("c{}", k - 1)),
        (_, ans) => ret(&format!("{ans}s")),
    }
}

fn countdown_preserving(c: &str) -> String {
    let (k, rest) = counter(c, 'c');
    match (k, answers(rest).first()) {
        (0, _) => ret("z"),
        (_, None) => call(&format!("c{}", k - 1)),
        (_, Some(a)) => ret(&format!("{a}s")),
    }
}

fn fibonacci(c: &str) -> String {
    let (k, rest) = counter(c, 'f');
    if k < 2 {
        return ret("1");
    }
    let got: Vec<u64> = answers(rest).iter().map(|a| a.parse().unwrap()).collect();
    match got.as_slice() {
        [] => call(&format!("f{}", k - 1)),
        [_] => call(&format!("f{}", k - 2)),
        [a, b, ..] => ret(&(a + b).to_string()),
    }
}

fn chain(c: &str) -> String {
    match c {
        "a" => call("b"),
        "b" => call("c"),
        "c" => ret("C"),
        "bC" => ret("B"),
        "aB" => ret("A"),
        other => ret(&format!("unexpected {other}")),
    }
}

fn answer(s: &str) -> Expect {
    Expect::Answer(s.to_string())
}

fn bottom(b: Bottom) -> Expect {
    Expect::Bottom(b)
}

fn limits(local: usize, depth: usize, steps: u64) -> Setup {
    Setup {
        limits: (local, depth, steps),
        ..Setup::default()
    }
}

const B: Setup = Setup {
    prefix: false,
    preserve: false,
    loops: true,
    limits: (1 << 16, 10_000, 1_000_000),
};
const PREFIX: Setup = Setup { prefix: true, ..B };
const PRESERVE: Setup = Setup { preserve: true, ..B };
const NO_LOOPS: Setup = Setup { loops: false, ..B };

const SPACE: Bottom = Bottom::LimitExceeded(LimitKind::LocalSpace);
const DEPTH: Bottom = Bottom::LimitExceeded(LimitKind::Depth);
const STEPS: Bottom = Bottom::LimitExceeded(LimitKind::Steps);

macro_rules! sc {
    ($name:expr, $prompt:expr, $setup:expr, $script:expr, $expect:expr) => {
        Scenario {
            name: $name,
            prompt: $prompt,
            root: None,
            setup: $setup,
            script: $script,
            expect: $expect,
        }
    };
}

pub fn scenarios() -> Vec<Scenario> {
    let dots = format!("!{}", ".".repeat(60));
    vec![
        // plain steps, calls, returns
        sc!("immediate return", "q", B, || rule(|_| ret("a")), answer("a")),
        sc!("empty answer", "q", B, || rule(|_| ret("")), answer("")),
        sc!("plain steps then return", "ab", B, || rule(|c| if c.len() < 5 { ".".into() } else { ret(c) }), answer("ab...")),
        sc!("separator in plain text", "s", B, || seq(&["[SEP]x", "<return>done</return>"]), answer("done")),
        sc!(
            "single call",
            "task",
            B,
            || rule(|c| match c {
                "task" => call("sub"),
                "sub" => ret("42"),
                "task42" => ret("ok"),
                o => ret(&format!("? {o}")),
            }),
            answer("ok")
        ),
        sc!("three levels", "a", B, || rule(chain), answer("A")),
        sc!("countdown", "c5", B, || rule(countdown), answer("zsssss")),
        sc!(
            "text before the call stays in the caller",
            "p",
            B,
            || rule(|c| match c {
                "p" => format!("xy{}", call("q")),
                "q" => ret("1"),
                "pxy1" => ret("done"),
                o => ret(&format!("? {o}")),
            }),
            answer("done")
        ),
        sc!(
            "returned call prefix completed by the caller",
            "p",
            B,
            || rule(|c| match c {
                "p" => call("q"),
                "q" => "<return>x<call>y</return>".into(),
                "px<call>y" => "</call>".into(),
                "y" => ret("Y"),
                _ => ret("done"),
            }),
            answer("done")
        ),
        sc!(
            "block in the middle stays plain",
            "m",
            B,
            || rule(|c| if c == "m" { format!("{}.", call("z")) } else { ret(&text::tokenize(c).len().to_string()) }),
            answer("5")
        ),
        sc!(
            "unmatched closer stays plain",
            "k",
            B,
            || rule(|c| if c == "k" { "x</return>".into() } else { ret("ok") }),
            answer("ok")
        ),
        sc!(
            "innermost call is taken",
            "r",
            B,
            || rule(|c| match c {
                "r" => "<call>a<call>b</call>".into(),
                "b" => ret("B"),
                "r<call>aB" => "</call>".into(),
                "aB" => ret("X"),
                "rX" => ret("fin"),
                o => ret(&format!("? {o}")),
            }),
            answer("fin")
        ),
        sc!(
            "mismatched return block is plain",
            "m",
            B,
            || rule(|c| if c == "m" { "<return>a</call>".into() } else { ret(&text::tokenize(c).len().to_string()) }),
            answer("4")
        ),
        sc!(
            "call payload with separators",
            "s",
            B,
            || rule(|c| match c {
                "s" => call("a[SEP]b"),
                "a[SEP]b" => ret("b[SEP]a"),
                s => ret(&s[1..]),
            }),
            answer("b[SEP]a")
        ),
        sc!(
            "empty call payload",
            "e",
            B,
            || rule(|c| match c {
                "e" => call(""),
                "" => ret("E"),
                "eE" => ret("ok"),
                o => ret(&format!("? {o}")),
            }),
            answer("ok")
        ),
        sc!(
            "plain, call, plain, return",
            "s",
            B,
            || seq(&[".", "<call>q</call>", "<return>1</return>", ".", "<return>end</return>"]),
            answer("end")
        ),
        sc!(
            "sixty levels deep",
            "d0",
            B,
            || rule(|c| match counter(c, 'd') {
                (60, _) => ret("!"),
                (k, "") => call(&format!("d{}", k + 1)),
                (_, a) => ret(&format!("{a}.")),
            }),
            Expect::Answer(dots)
        ),
        sc!(
            "return at depth two appends to the parent",
            "p",
            B,
            || rule(|c| match c {
                "p" => call("q"),
                "q" => ret("abc"),
                o => ret(o),
            }),
            answer("pabc")
        ),
        // root prefixing
        sc!("prefix from the second step", "P", PREFIX, || rule(|c| if c == "P" { call("s") } else { ret(c) }), answer("PPPs")),
        Scenario {
            name: "explicit root shown from the first step",
            prompt: "t",
            root: Some("R"),
            setup: PREFIX,
            script: || rule(|c| match c {
                "Rt" => call("u"),
                "Ru" => ret("U"),
                o => ret(o),
            }),
            expect: answer("RtU"),
        },
        sc!("prefixing a plain step", "ab", PREFIX, || rule(|c| if c == "ab" { ".".into() } else { ret(c) }), answer("abab.")),
        sc!(
            "prefix with preservation",
            "Q",
            Setup { preserve: true, ..PREFIX },
            || rule(|c| match c {
                "Q" => call("s"),
                "Qs" => ret("A"),
                _ => ret("done"),
            }),
            answer("done")
        ),
        Scenario {
            name: "root is not counted as frame space",
            prompt: "t",
            root: Some("RRRRRRRRRR"),
            setup: Setup { limits: (8, 10, 10), ..PREFIX },
            script: || rule(|_| ret("ok")),
            expect: answer("ok"),
        },
        // question preservation
        sc!("countdown with preservation", "c5", PRESERVE, || rule(countdown_preserving), answer("zsssss")),
        sc!("two calls per frame", "f7", PRESERVE, || rule(fibonacci), answer("21")),
        sc!("final answer is not formatted", "q", PRESERVE, || rule(|_| ret("a")), answer("a")),
        sc!(
            "preserved question holds separators",
            "s",
            PRESERVE,
            || rule(|c| match c {
                "s" => call("a[SEP]b"),
                "a[SEP]b" => ret("r"),
                c if c == "sa[SEP]b. The answer is: r.\n" => ret("ok"),
                o => ret(&format!("? {o}")),
            }),
            answer("ok")
        ),
        sc!(
            "three preserved levels",
            "a",
            PRESERVE,
            || rule(|c| match c {
                "a" => call("b"),
                "b" => call("c"),
                "c" => ret("C"),
                c if c.starts_with("bc") => ret("B"),
                c if c.starts_with("ab") => ret("A"),
                o => ret(&format!("? {o}")),
            }),
            answer("A")
        ),
        // loop detection
        sc!("silent generator loops", "x", B, || rule(|_| String::new()), bottom(Bottom::LoopDetected)),
        sc!("self call grows to the depth limit", "r", limits(64, 20, 1000), || rule(|_| call("r")), bottom(DEPTH)),
        sc!(
            "call returning to the same frame",
            "a",
            B,
            || rule(|c| if c == "a" { call("b") } else { ret("") }),
            bottom(Bottom::LoopDetected)
        ),
        sc!(
            "three-step cycle",
            "a",
            B,
            || rule(|c| match c {
                "a" => call("b"),
                "b" => call("c"),
                _ => ret(""),
            }),
            bottom(Bottom::LoopDetected)
        ),
        sc!(
            "silent frame below the root",
            "a",
            B,
            || rule(|c| if c == "a" { call("b") } else { String::new() }),
            bottom(Bottom::LoopDetected)
        ),
        sc!(
            "detection off: silent generator",
            "x",
            Setup { limits: (64, 10, 25), ..NO_LOOPS },
            || rule(|_| String::new()),
            bottom(STEPS)
        ),
        sc!(
            "detection off: call-return cycle",
            "a",
            Setup { limits: (64, 10, 10), ..NO_LOOPS },
            || rule(|c| if c == "a" { call("b") } else { ret("") }),
            bottom(STEPS)
        ),
        sc!(
            "same frame at another depth is not a loop",
            "p",
            B,
            || seq(&["<call>p</call>", "<return>z</return>", "<return>done</return>"]),
            answer("done")
        ),
        // limits
        sc!("depth limit is inclusive", "a", limits(64, 3, 100), || rule(chain), answer("A")),
        sc!("one level too deep", "a", limits(64, 2, 100), || rule(chain), bottom(DEPTH)),
        sc!("plain output over the frame limit", "g", limits(6, 10, 100), || rule(|_| "xx".into()), bottom(Bottom::MalformedOutput)),
        sc!("oversized call block", "c", limits(6, 10, 100), || rule(|_| call("abcdef")), bottom(SPACE)),
        sc!(
            "return overflows the parent frame",
            "pppp",
            limits(6, 10, 100),
            || rule(|c| if c == "pppp" { call("") } else { ret("abcd") }),
            bottom(SPACE)
        ),
        sc!(
            "preserved answer overflows the parent frame",
            "ppp",
            Setup { preserve: true, ..limits(6, 10, 100) },
            || rule(|c| if c == "ppp" { call("q") } else { ret("ab") }),
            bottom(SPACE)
        ),
        sc!("prompt over the frame limit", "abcd", limits(3, 10, 100), || rule(|_| ret("x")), bottom(SPACE)),
        sc!("step limit", "s", limits(64, 10, 10), || rule(|_| ".".into()), bottom(STEPS)),
        sc!("exactly enough steps", "s", limits(64, 10, 3), || seq(&[".", ".", "<return>ok</return>"]), answer("ok")),
        sc!("one step short", "s", limits(64, 10, 2), || seq(&[".", ".", "<return>ok</return>"]), bottom(STEPS)),
        // generator errors
        sc!(
            "malformed generator output",
            "q",
            B,
            || Box::new(|_, _| Err(GenerationError::Malformed("junk".into()))),
            bottom(Bottom::MalformedOutput)
        ),
        sc!(
            "generator failure",
            "q",
            B,
            || Box::new(|_, _| Err(GenerationError::Failed("offline".into()))),
            bottom(Bottom::GeneratorFailed)
        ),
        sc!(
            "failure below the root",
            "a",
            B,
            || Box::new(|_, c| if c == "a" { Ok(call("b")) } else { Err(GenerationError::Failed("offline".into())) }),
            bottom(Bottom::GeneratorFailed)
        ),
        sc!(
            "preservation and the depth limit",
            "c5",
            Setup { preserve: true, ..limits(1024, 2, 100) },
            || rule(countdown_preserving),
            bottom(DEPTH)
        ),
    ]
}

/// Per-scenario failures; empty when everything agrees.
pub fn check_scenario(sc: &Scenario) -> Vec<String> {
    let mut bad = Vec::new();
    let a = run_runtime(sc);
    let r = run_reference(sc);
    if a.outcome != sc.expect {
        bad.push(format!("{}: runtime gave {:?}, expected {:?}", sc.name, a.outcome, sc.expect));
    }
    if r.outcome != sc.expect {
        bad.push(format!("{}: reference gave {:?}, expected {:?}", sc.name, r.outcome, sc.expect));
    }
    if a != r {
        bad.push(format!("{}: runtime {a:?} differs from reference {r:?}", sc.name));
    }
    if run_runtime(sc) != a {
        bad.push(format!("{}: rerun differs", sc.name));
    }
    bad
}

/// Every scenario and the total time taken.
pub fn check_all() -> (usize, Vec<String>, Duration) {
    let t = Instant::now();
    let all = scenarios();
    let bad: Vec<String> = all.iter().flat_map(check_scenario).collect();
    (all.len(), bad, t.elapsed())
}

/// Which bottom reasons and step kinds the suite covers.
pub fn coverage() -> Vec<Bottom> {
    let mut seen: Vec<Bottom> = Vec::new();
    for sc in scenarios() {
        if let Expect::Bottom(b) = sc.expect {
            if !seen.contains(&b) {
                seen.push(b);
            }
        }
    }
    seen
}
