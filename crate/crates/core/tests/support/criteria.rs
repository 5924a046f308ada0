//! End-to-end checks for the symbolic constructions. Each returns a short
//! summary on success and a description of the first failure otherwise.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcm_core::alternation::eval_atm;
use rcm_core::machine::random::random_decider;
use rcm_core::machine::{fixtures, normalize_atm, run_tm, win_value, Configuration, StateId, SymbolId, TuringMachine};
use rcm_core::rtm::{cost_bounds, decide, evaluate, frame_bound, Frame, Func};
use rcm_core::runtime::{OutputKind, RunConfig};
use rcm_core::sat::{brute_force, five_scientists, gen_traces, measure, read_jsonl, replay, sample_band, sat_config, solve, write_jsonl, Band};
use rcm_core::scaffolds::fixtures::model_fixtures;
use rcm_core::scaffolds::{
    apply_operator, kleene_fixpoint, EvalBudget, NamedGenerator, Prover, Scaffold, ScaffoldBottom, ScaffoldSystem,
    SelfCall, Session, Table, Verifier,
};
use rcm_core::summarizer::{summarize_observed, CYCLE_OVERHEAD, FIXED_OVERHEAD};
use rcm_core::token::text::{self, TextToken};
use rcm_core::token::Token;
use rcm_core::updates::{blank_config, canon, embed, fold};

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn tm_fixtures() -> [(&'static str, TuringMachine); 3] {
    [
        ("parity", fixtures::parity()),
        ("increment", fixtures::increment()),
        ("palindrome", fixtures::palindrome()),
    ]
}

/// Least-squares fit `y = a + b x`; returns `(b, r_squared)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    (b, sxy * sxy / (sxx * syy))
}

fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    a.to_string().parse::<f64>().unwrap() / b.to_string().parse::<f64>().unwrap()
}

// ---- recursive Turing machine ----

pub fn rtm_equivalence() -> Check {
    let cfg = RunConfig::default().without_loop_detection();
    let mut inputs = 0;
    for (name, tm) in tm_fixtures() {
        for w in tm.signature().words_up_to(6) {
            let direct = run_tm(&tm, &w, 10_000);
            let r = decide(&tm, &w, true, &cfg);
            ensure!(
                r.verdict() == Some(direct.verdict),
                "{name} on {:?}: recursive {:?}, direct {:?}",
                tm.signature().decode(&w),
                r.verdict(),
                direct.verdict
            );
            let bound = frame_bound(w.len(), direct.time);
            let used = r.result.trace.max_local_space;
            ensure!(used <= bound, "{name} on {:?}: frame of {used} tokens over {bound}", tm.signature().decode(&w));
            inputs += 1;
        }
    }
    Ok(format!("{inputs} inputs agree, frames within n + 3 log t + 11"))
}

pub fn rtm_linear_memo() -> Check {
    let tm = fixtures::countdown();
    let cfg = RunConfig::default().without_loop_detection();
    let mut seen = BTreeSet::new();
    let mut points = Vec::new();
    let mut worst = 0f64;
    for w in tm.signature().words_up_to(7) {
        let t = run_tm(&tm, &w, 10_000).time;
        if !(5..=200).contains(&t) || !seen.insert(t) {
            continue;
        }
        let r = decide(&tm, &w, true, &cfg);
        ensure!(r.verdict().is_some(), "countdown on {:?} gave no verdict", tm.signature().decode(&w));
        let inv = r.ledger.total_invocations() as f64;
        worst = worst.max(inv / t as f64);
        points.push((t as f64, inv));
    }
    ensure!(points.len() >= 20, "only {} distinct halting times in range", points.len());
    let (slope, r2) = linear_fit(&points);
    ensure!(r2 >= 0.99, "linear fit R^2 = {r2:.4} over {} points", points.len());
    Ok(format!("{} halting times, slope {slope:.1}, max invocations/T {worst:.1}, R^2 {r2:.4}", points.len()))
}

/// Flips the head cell forever without moving, so every cell query hits the
/// head and the unmemoized recursion takes its widest branch at each level.
const TOGGLE: &str = "kind: tm
alphabet: _ 0 1
blank: _
states: a b done
initial: a
accept: done
reject:
delta: a _ -> b 1 S
delta: a 0 -> b 1 S
delta: a 1 -> b 0 S
delta: b _ -> a 0 S
delta: b 0 -> a 1 S
delta: b 1 -> a 0 S
";

/// Unmemoized `STATE(t)` for `t <= t_max`: every recorded subtree must stay
/// within the recurrence bounds. Returns the measured `V(t)`.
fn unmemoized_costs(tm: &TuringMachine, input: &str, t_max: u64) -> Result<Vec<BigUint>, String> {
    let w = tm.signature().encode(input).unwrap();
    let cfg = RunConfig::default()
        .without_loop_detection()
        .with_limits(rcm_core::runtime::Limits::new(1 << 12, 1 << 12, 1 << 26).unwrap());
    let mut measured = Vec::new();
    for t in 0..=t_max {
        let r = evaluate(tm, &Frame::new(Func::State, &w, t, None), false, &cfg);
        ensure!(r.value.is_some(), "STATE({t}) on {input:?} gave no value: {:?}", r.result.bottom());
        for (&(f, s), &n) in &r.ledger.worst {
            let (v, c) = cost_bounds(s);
            let bound = match f {
                Func::Cell => c,
                Func::State | Func::Pos => v,
                _ => continue,
            };
            ensure!(BigUint::from(n) <= bound, "{f:?}({s}) on {input:?} took {n} invocations, bound {bound}");
        }
        measured.push(BigUint::from(r.ledger.worst_case(Func::State, t).unwrap()));
    }
    Ok(measured)
}

pub fn rtm_unmemoized_growth() -> Check {
    for (tm, x) in [(fixtures::parity(), "1011011"), (fixtures::palindrome(), "0110"), (fixtures::countdown(), "0000001")] {
        unmemoized_costs(&tm, x, 8)?;
    }
    let toggle = rcm_core::machine::parse_descriptor(TOGGLE).unwrap().into_tm().unwrap();
    let measured = unmemoized_costs(&toggle, "0", 10)?;
    let ratios: Vec<f64> = (4..=10).map(|t| ratio(&measured[t], &measured[t - 1])).collect();
    for (i, q) in ratios.iter().enumerate() {
        ensure!((3.4..=4.6).contains(q), "V({})/V({}) = {q:.3} outside 4 ± 15%", i + 4, i + 3);
    }
    Ok(format!(
        "bounds hold; V(10) = {} (bound {}), ratios t=4..10: {}",
        measured[10],
        cost_bounds(10).0,
        ratios.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>().join(" ")
    ))
}

// ---- alternating machines ----

fn random_config(rng: &mut ChaCha8Rng, states: usize, symbols: usize) -> Configuration {
    let mut c = Configuration::blank(StateId(rng.gen_range(0..states) as u16), SymbolId(0));
    c.head = rng.gen_range(-6..6);
    for _ in 0..rng.gen_range(0..8) {
        c.write(rng.gen_range(-8..8), SymbolId(rng.gen_range(0..symbols) as u16));
    }
    c
}

pub fn atm_equivalence() -> Check {
    const BUDGET: usize = 1 << 10;
    let cfg = RunConfig::default();
    let mut machines = vec![
        ("formula evaluation".to_string(), normalize_atm(&fixtures::cnf_eval())),
        ("followed-by".to_string(), normalize_atm(&fixtures::followed())),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..200 {
        machines.push((format!("random #{i}"), random_decider(&mut rng, 4, BUDGET, 20_000)));
    }
    let mut inputs = 0;
    for (name, atm) in &machines {
        for w in atm.signature().words_up_to(4) {
            let expected = win_value(atm, &atm.initial_config(&w), BUDGET).map_err(|e| format!("{name}: {e:?}"))?;
            let got = eval_atm(atm, &w, &cfg).value;
            ensure!(got == Some(expected), "{name} on {:?}: eval {got:?}, win {expected}", atm.signature().decode(&w));
            inputs += 1;
        }
    }
    let sig = fixtures::cnf_eval().signature().clone();
    let mut embeds = Vec::new();
    for _ in 0..1000 {
        let c = random_config(&mut rng, sig.num_states(), sig.num_symbols());
        let e = embed(&c);
        let back = fold(&blank_config(&sig), &e);
        ensure!(back.normalized() == c.normalized(), "fold of embed differs for {c:?}");
        embeds.push(e);
    }
    for e in &embeds {
        let once = canon(&sig, e);
        ensure!(canon(&sig, &once) == once, "canon not idempotent on {e:?}");
        ensure!(once == *e, "embedding is not canonical: {e:?}");
    }
    Ok(format!("{} machines, {inputs} inputs; 1000 embeds fold back and are canonical", machines.len()))
}

// ---- summarizer ----

pub fn summarizer() -> Check {
    let cfg = RunConfig::default();
    let mut emitted_k = 0usize;
    let mut runs = 0;
    let mut machines: Vec<(&str, TuringMachine)> = tm_fixtures().into_iter().collect();
    machines.push(("countdown", fixtures::countdown()));
    for (name, tm) in &machines {
        for w in tm.signature().words_up_to(6) {
            let direct = run_tm(tm, &w, 100_000);
            let mut frames_ok = Ok(());
            let mut payload_max = 0usize;
            let n = rcm_core::summarizer::max_embed_len(tm, &w, cfg.limits.max_steps());
            let mut obs = |e: &rcm_core::runtime::StepEvent<'_, _>| {
                if e.depth == 2 {
                    if let (OutputKind::Return, Some(Token::RetOpen)) = (e.kind, e.continuation.first()) {
                        payload_max = payload_max.max(e.continuation.len() - 2);
                    }
                    if e.active.len() > 3 * n + 1 && frames_ok.is_ok() {
                        frames_ok = Err(e.active.len());
                    }
                }
            };
            let s = summarize_observed(tm, &w, 2, Some(n), &cfg, &mut obs);
            let label = tm.signature().decode(&w);
            ensure!(s.verdict == Some(direct.verdict), "{name} on {label:?}: {:?} vs {:?}", s.verdict, direct.verdict);
            ensure!(s.result.trace.max_depth == 2, "{name} on {label:?}: depth {}", s.result.trace.max_depth);
            if let Err(len) = frames_ok {
                return Err(format!("{name} on {label:?}: depth-2 frame of {len} tokens over 3N+1 = {}", 3 * n + 1));
            }
            let t = direct.time as usize;
            let chunks = t.div_ceil(2 * n).max(1);
            let emitted = s.result.trace.total_tokens_emitted as usize;
            // smallest K with emitted <= T + chunks (N + K)
            let k = (emitted.saturating_sub(t)).div_ceil(chunks).saturating_sub(n);
            emitted_k = emitted_k.max(k).max(payload_max.saturating_sub(n));
            runs += 1;
        }
    }
    ensure!(emitted_k <= FIXED_OVERHEAD.max(CYCLE_OVERHEAD), "measured overhead K = {emitted_k}");
    Ok(format!("{runs} runs, depth 2, frames within 3N+1, measured K = {emitted_k}"))
}

// ---- SAT ----

pub const SEED: u64 = 7;
pub const VARS: std::ops::RangeInclusive<usize> = 5..=12;

pub fn sat_soundness(per_band: usize) -> Check {
    let cfg = sat_config();
    let mut total = 0;
    for band in Band::ALL {
        for (i, inst) in sample_band(band, per_band, VARS, SEED).iter().enumerate() {
            let expected = brute_force(&inst.formula).is_some();
            let got = solve(inst, &cfg).satisfiable;
            ensure!(got == Some(expected), "{} #{i}: solver {got:?}, brute force {expected}", band.name());
            let (samples, _) = gen_traces(inst);
            let mut buf = Vec::new();
            write_jsonl(&mut buf, &samples).map_err(|e| e.to_string())?;
            let back = read_jsonl(&buf[..]).map_err(|e| e.to_string())?;
            ensure!(replay(inst, &back, &cfg) == Some(expected), "{} #{i}: replay differs", band.name());
            total += 1;
        }
    }
    let fs = five_scientists();
    let r = solve(&fs, &cfg);
    ensure!(r.result.answer().map(text::render).as_deref() == Some("No"), "five scientists answered {:?}", r.result.answer().map(text::render));
    let (samples, _) = gen_traces(&fs);
    ensure!(replay(&fs, &samples, &cfg) == Some(false), "five-scientists replay differs");
    Ok(format!("{total} instances agree with brute force and replay; five scientists: No"))
}

#[derive(Clone, Copy, Debug)]
pub struct BandMeans {
    pub trajectory: f64,
    pub context: f64,
    pub ratio: f64,
}

pub fn band_means(per_band: usize) -> Vec<(Band, BandMeans)> {
    Band::ALL
        .iter()
        .map(|&band| {
            let m: Vec<_> = sample_band(band, per_band, VARS, SEED).iter().map(measure).collect();
            let mean = |f: &dyn Fn(&rcm_core::sat::SatMetrics) -> f64| m.iter().map(f).sum::<f64>() / m.len() as f64;
            let trajectory = mean(&|x| x.trajectory as f64);
            let context = mean(&|x| x.max_context as f64);
            (band, BandMeans { trajectory, context, ratio: trajectory / context })
        })
        .collect()
}

pub fn band_trend(per_band: usize) -> Check {
    let means = band_means(per_band);
    for pair in means.windows(2) {
        let ((a, x), (b, y)) = (pair[0], pair[1]);
        ensure!(y.trajectory > x.trajectory, "trajectory {} -> {}: {:.1} -> {:.1}", a.name(), b.name(), x.trajectory, y.trajectory);
        let growth = y.context / x.context;
        ensure!(growth < 2.0, "context {} -> {} grew by {growth:.3}", a.name(), b.name());
        ensure!(y.ratio > x.ratio, "ratio {} -> {}: {:.2} -> {:.2}", a.name(), b.name(), x.ratio, y.ratio);
    }
    Ok(means
        .iter()
        .map(|(b, m)| format!("{} traj {:.0} ctx {:.0} ratio {:.2}", b.name(), m.trajectory, m.context, m.ratio))
        .collect::<Vec<_>>()
        .join("; "))
}

// ---- scaffolds ----

fn t(s: &str) -> Vec<TextToken> {
    text::tokenize(s)
}

fn pv_system(fp: Table, fv: Table, seeds: &[&str]) -> ScaffoldSystem<'static, char> {
    let p = Prover { generator: 0, verifier: 1, seeds: seeds.iter().map(|s| t(s)).collect() };
    let v = Verifier { generator: 1, prover: 0 };
    ScaffoldSystem::new(
        vec![
            NamedGenerator { name: "prover".into(), generator: Box::new(fp) },
            NamedGenerator { name: "verifier".into(), generator: Box::new(fv) },
        ],
        vec![Box::new(p), Box::new(v)],
    )
    .unwrap()
}

fn conjunction_system(second: &str) -> ScaffoldSystem<'static, char> {
    let fp = Table::new().entry("thm[SEP]s1", "sketch").entry("lem1[SEP]s1", "p1").entry("lem2[SEP]s1", "p2");
    let fv = Table::new()
        .entry("thm[SEP]sketch", "incomplete[SEP]lem1[SEP]lem2")
        .entry("lem1[SEP]p1", "correct")
        .entry("lem2[SEP]p2", second);
    pv_system(fp, fv, &["s1"])
}

pub fn scaffolds() -> Check {
    let fixtures = model_fixtures();
    for f in &fixtures {
        let c = (f.run)();
        ensure!(c.agrees(), "{}: {c:?}", f.name);
    }
    let b = EvalBudget::default();
    let eval = |sys: &mut ScaffoldSystem<'static, char>, x: &str| Session::new(b).evaluate(sys, 0, &t(x));

    let mut sys = pv_system(Table::new().with_default("p"), Table::new().entry("g[SEP]p", "correct"), &["s1", "s2", "s3"]);
    ensure!(eval(&mut sys, "g") == Ok(t("correct")), "immediate proof not accepted");
    let mut sys = pv_system(Table::new().with_default("p"), Table::new().with_default("wrong"), &["s1", "s2", "s3"]);
    ensure!(eval(&mut sys, "g") == Ok(t("wrong")), "all-wrong proofs not reported wrong");
    let mut sys = conjunction_system("correct");
    ensure!(eval(&mut sys, "thm") == Ok(t("correct")), "conjunction of proved subgoals not accepted");
    let mut sys = conjunction_system("wrong");
    ensure!(eval(&mut sys, "thm") == Ok(t("wrong")), "conjunction with a failed subgoal accepted");

    let s = SelfCall { name: "loop".into(), target: 0 };
    let mut sys = ScaffoldSystem::new(vec![], vec![Box::new(s) as Box<dyn Scaffold<char>>]).unwrap();
    ensure!(eval(&mut sys, "x") == Err(ScaffoldBottom::Cycle { scaffold: 0 }), "self-cycle is not bottom");

    let mut sys = conjunction_system("correct");
    let mut first = Session::new(b);
    let out = first.evaluate(&mut sys, 0, &t("thm")).map_err(|e| e.to_string())?;
    let memo = first.into_memo();
    ensure!(apply_operator(&mut sys, &memo, b) == memo, "memo table is not a fixed point");
    let k = kleene_fixpoint(&mut sys, 0, &t("thm"), b, 64).map_err(|e| e.to_string())?;
    ensure!(k.value.as_ref() == Some(&out), "least fixpoint disagrees with evaluation");
    Ok(format!("{} shared fixtures agree; prover/verifier cases, self-cycle and memo fixed point hold", fixtures.len()))
}
