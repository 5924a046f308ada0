use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rcm_backend::{Client, LlmGenerator};
use rcm_core::alternation::eval_atm;
use rcm_core::machine::{fixtures, normalize_atm, parse_descriptor, run_tm, win_value, Descriptor, Verdict};
use rcm_core::rtm::{cost_bounds, decide, Func};
use rcm_core::runtime::{run, run_with_root, AnswerFormat, Bottom, ResourceTrace, RunConfig, RunResult};
use rcm_core::sat::{brute_force, gen_traces, parse_answer, parse_dimacs, random_3cnf, sat_config, solve, write_jsonl, SatInstance};
use rcm_core::scaffolds::{load_system, EvalBudget, OracleRef, Session};
use rcm_core::summarizer::summarize;
use rcm_core::token::text;
use serde_json::{json, Value};

use crate::bench::{dir_jobs, random_jobs, report, run_bench};
use crate::{AtmCommand, Command, CliError, FormulaArgs, MachineArgs, RunArgs, SatCommand, ScaffoldCommand, Settings, TmCommand};

type Out<'a> = &'a mut dyn Write;

/// Formulas with more variables than this are not checked by enumeration.
const BRUTE_FORCE_MAX_VARS: usize = 24;

pub(crate) fn execute(cmd: Command, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    match cmd {
        Command::Run(a) => run_prompt(a, s, out, err),
        Command::Tm(TmCommand::Direct(m)) => tm_direct(&m, s, out, err),
        Command::Tm(TmCommand::Win { m, budget }) => tm_win(&m, budget, out, err),
        Command::Tm(TmCommand::Recursive { m, memo, cost_report }) => {
            tm_recursive(&m, memo, cost_report.as_deref(), s, out, err)
        }
        Command::Tm(TmCommand::Summarize { m, factor, n }) => tm_summarize(&m, factor, n, s, out, err),
        Command::Atm(AtmCommand::Eval { m, budget }) => atm_eval(&m, budget, s, out, err),
        Command::Sat(SatCommand::Solve { f, backend, json, .. }) => sat_solve(&f, backend, json, s, out, err),
        Command::Sat(SatCommand::GenTraces { f, out: path }) => sat_traces(&f, path.as_deref(), out, err),
        Command::Sat(SatCommand::Bench {
            dir,
            report: path,
            summary,
            bands,
            ..
        }) => {
            let jobs = match dir {
                Some(d) => dir_jobs(&d)?,
                None => random_jobs(&bands, s.per_band, s.vars.clone(), s.seed),
            };
            writeln!(err, "benchmarking {} instances on {} workers", jobs.len(), s.workers)?;
            let rows = run_bench(&jobs, s.workers)?;
            let (rows_csv, summary_csv) = report(&rows)?;
            match path {
                Some(p) => std::fs::write(&p, rows_csv)?,
                None => out.write_all(rows_csv.as_bytes())?,
            }
            match summary {
                Some(p) => std::fs::write(&p, summary_csv)?,
                None => err.write_all(summary_csv.as_bytes())?,
            }
            let bad: Vec<_> = rows.iter().filter(|r| !r.agrees()).map(|r| r.id.as_str()).collect();
            if !bad.is_empty() {
                return Err(CliError::mismatch(format!("verdict differs from brute force on {}", bad.join(", "))));
            }
            Ok(())
        }
        Command::Sat(SatCommand::Random { vars, clauses, seed }) => {
            if vars < 3 {
                return Err(CliError::usage("a 3-CNF formula needs at least 3 variables"));
            }
            let f = random_3cnf(&mut ChaCha8Rng::seed_from_u64(seed), vars, clauses);
            out.write_all(f.to_dimacs().as_bytes())?;
            Ok(())
        }
        Command::Scaffold(ScaffoldCommand::Run {
            system,
            entry,
            input,
            space,
            calls,
            depth,
            log,
        }) => {
            let mut sys = load_system(&system).map_err(|e| CliError::usage(e.to_string()))?;
            let r = entry
                .parse::<usize>()
                .ok()
                .or_else(|| sys.scaffold_index(&entry))
                .filter(|&r| r < sys.scaffold_count())
                .ok_or_else(|| CliError::usage(format!("no scaffold {entry:?} in {}", system.display())))?;
            let budget = EvalBudget::new(space.unwrap_or(s.limits.max_local_space()), calls, depth)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let mut session = Session::new(budget);
            if log {
                session = session.logging();
            }
            let result = session.evaluate(&mut sys, r, &text::tokenize(&input));
            for e in session.log() {
                let oracle = match e.oracle {
                    OracleRef::Generator(g) => format!("generator {}", sys.generator_name(g)),
                    OracleRef::Scaffold(t) => format!("scaffold {}", sys.scaffold_name(t)),
                };
                writeln!(
                    err,
                    "[{}] {} asks {oracle}: {:?} -> {:?}",
                    e.depth,
                    sys.scaffold_name(e.caller),
                    text::render(&e.query),
                    text::render(&e.answer)
                )?;
            }
            let st = session.stats();
            writeln!(
                err,
                "invocations={} generator_queries={} recursive_queries={} memo_hits={} max_depth={} max_space={}",
                st.invocations, st.generator_queries, st.recursive_queries, st.memo_hits, st.max_depth, st.max_space
            )?;
            match result {
                Ok(a) => {
                    writeln!(out, "{}", text::render(&a))?;
                    Ok(())
                }
                Err(b) => Err(CliError::bottom(b.to_string())),
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))
}

fn load_machine(name: &str) -> Result<Descriptor, CliError> {
    let src = match fixtures::source(name) {
        Some(s) => s.to_string(),
        None => read(Path::new(name))?,
    };
    parse_descriptor(&src).map_err(|e| CliError::usage(format!("{name}: {e}")))
}

fn to_tm(m: &MachineArgs) -> Result<rcm_core::machine::TuringMachine, CliError> {
    load_machine(&m.machine)?
        .into_tm()
        .map_err(|e| CliError::usage(format!("{}: {e}", m.machine)))
}

fn to_atm(m: &MachineArgs) -> Result<rcm_core::machine::AlternatingTm, CliError> {
    load_machine(&m.machine)?
        .into_atm()
        .map_err(|e| CliError::usage(format!("{}: {e}", m.machine)))
}

fn encode(sig: &rcm_core::machine::Signature, input: &str) -> Result<Vec<rcm_core::machine::SymbolId>, CliError> {
    sig.encode(input).map_err(|e| CliError::usage(format!("input {input:?}: {e}")))
}

/// Prints `plain`, or the whole record with `json`. Without `json` the
/// record's trace goes to diagnostics.
fn emit(out: Out, err: Out, json: bool, plain: Option<&str>, record: &Value) -> Result<(), CliError> {
    if json {
        writeln!(out, "{record}")?;
    } else {
        if let Some(p) = plain {
            writeln!(out, "{p}")?;
        }
        if let Some(t) = record.get("trace") {
            writeln!(err, "trace: {t}")?;
        }
    }
    Ok(())
}

fn bottom_of<S>(r: &RunResult<S>) -> CliError {
    let b = r.bottom().map_or("no answer".to_string(), |b| b.to_string());
    match &r.detail {
        Some(d) => CliError::bottom(format!("{b}: {d}")),
        None => CliError::bottom(b),
    }
}

fn trace_json(t: &ResourceTrace) -> Value {
    serde_json::to_value(t).expect("trace serializes")
}

/// Trajectory length over the longest context the generator saw.
fn efficiency(t: &ResourceTrace) -> f64 {
    t.total_tokens_emitted as f64 / t.max_visible_context.max(t.max_active_context).max(1) as f64
}

fn check_oracle(name: &str, got: Option<Verdict>, oracle: Option<Verdict>) -> Result<(), CliError> {
    match (got, oracle) {
        (Some(g), Some(o)) if g != o => Err(CliError::mismatch(format!("{name} gave {g}, direct simulation gives {o}"))),
        _ => Ok(()),
    }
}

fn direct_oracle(tm: &rcm_core::machine::TuringMachine, w: &[rcm_core::machine::SymbolId], s: &Settings, err: Out) -> Result<Option<Verdict>, CliError> {
    let v = run_tm(tm, w, s.limits.max_steps()).verdict;
    if v == Verdict::Timeout {
        writeln!(err, "note: direct simulation did not halt within {} steps; no oracle check", s.limits.max_steps())?;
        return Ok(None);
    }
    Ok(Some(v))
}

fn tm_direct(m: &MachineArgs, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    let tm = to_tm(m)?;
    let w = encode(tm.signature(), &m.input)?;
    let r = run_tm(&tm, &w, s.limits.max_steps());
    writeln!(err, "time={} space={}", r.time, r.space)?;
    let verdict = r.verdict.to_string();
    emit(out, err, m.json, Some(&verdict), &json!({"verdict": verdict, "time": r.time, "space": r.space}))?;
    if r.verdict == Verdict::Timeout {
        return Err(CliError::bottom(format!("no halt within {} steps", s.limits.max_steps())));
    }
    Ok(())
}

fn tm_win(m: &MachineArgs, budget: usize, out: Out, err: Out) -> Result<(), CliError> {
    let atm = to_atm(m)?;
    let w = encode(atm.signature(), &m.input)?;
    let v = win_value(&atm, &atm.initial_config(&w), budget).map_err(|e| CliError::bottom(e.to_string()))?;
    let verdict = Verdict::from_bool(v).to_string();
    emit(out, err, m.json, Some(&verdict), &json!({"verdict": verdict}))
}

fn tm_recursive(m: &MachineArgs, memo: bool, cost_report: Option<&Path>, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    let tm = to_tm(m)?;
    let w = encode(tm.signature(), &m.input)?;
    let run = decide(&tm, &w, memo, &RunConfig::default().with_limits(s.limits));
    let ledger = &run.ledger;
    writeln!(
        err,
        "invocations={} memo_hits={} steps={} max_depth={} max_space={}",
        ledger.total_invocations(),
        ledger.memo_hits,
        run.result.trace.total_steps,
        run.result.trace.max_depth,
        run.result.trace.max_local_space
    )?;
    if let Some(path) = cost_report {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::usage(e.to_string()))?;
        w.write_record(["t", "v_measured", "c_measured", "v_bound", "c_bound"]).map_err(anyhow::Error::from)?;
        let mut times: Vec<u64> = ledger.worst.keys().map(|&(_, t)| t).collect();
        times.sort_unstable();
        times.dedup();
        for t in times {
            let v = [Func::State, Func::Pos].iter().filter_map(|&f| ledger.worst_case(f, t)).max();
            let c = ledger.worst_case(Func::Cell, t);
            let (vb, cb) = cost_bounds(t);
            let show = |x: Option<u64>| x.map_or(String::new(), |x| x.to_string());
            w.write_record([t.to_string(), show(v), show(c), vb.to_string(), cb.to_string()])
                .map_err(anyhow::Error::from)?;
        }
        w.flush()?;
    }
    let verdict = run.verdict();
    let record = json!({
        "verdict": verdict.map(|v| v.to_string()),
        "invocations": ledger.total_invocations(),
        "memo_hits": ledger.memo_hits,
        "trace": trace_json(&run.result.trace),
    });
    emit(out, err, m.json, verdict.map(|v| v.to_string()).as_deref(), &record)?;
    let Some(v) = verdict else {
        return Err(bottom_of(&run.result));
    };
    check_oracle("recursive evaluation", Some(v), direct_oracle(&tm, &w, s, err)?)
}

fn tm_summarize(m: &MachineArgs, factor: usize, n: Option<usize>, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    if factor == 0 || n == Some(0) {
        return Err(CliError::usage("--factor and --N must be positive"));
    }
    let tm = to_tm(m)?;
    let w = encode(tm.signature(), &m.input)?;
    let run = summarize(&tm, &w, factor, n, &RunConfig::default().with_limits(s.limits));
    let t = &run.result.trace;
    writeln!(err, "n={} threshold={} steps={} max_space={}", run.n, run.threshold, t.total_steps, t.max_local_space)?;
    let record = json!({
        "verdict": run.verdict.map(|v| v.to_string()),
        "n": run.n,
        "threshold": run.threshold,
        "efficiency": efficiency(t),
        "trace": trace_json(t),
    });
    emit(out, err, m.json, run.verdict.map(|v| v.to_string()).as_deref(), &record)?;
    if !m.json {
        writeln!(err, "efficiency={:.3}", efficiency(t))?;
    }
    let Some(v) = run.verdict else {
        return Err(bottom_of(&run.result));
    };
    check_oracle("summarizing simulation", Some(v), direct_oracle(&tm, &w, s, err)?)
}

fn atm_eval(m: &MachineArgs, budget: usize, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    let atm = to_atm(m)?;
    let w = encode(atm.signature(), &m.input)?;
    let run = eval_atm(&normalize_atm(&atm), &w, &RunConfig::default().with_limits(s.limits));
    let verdict = run.value.map(|b| Verdict::from_bool(b).to_string());
    let record = json!({"verdict": verdict, "trace": trace_json(&run.result.trace)});
    emit(out, err, m.json, verdict.as_deref(), &record)?;
    let Some(v) = run.value else {
        return Err(bottom_of(&run.result));
    };
    match win_value(&atm, &atm.initial_config(&w), budget) {
        Ok(o) if o != v => Err(CliError::mismatch(format!(
            "recursive evaluation gave {}, the game value is {}",
            Verdict::from_bool(v),
            Verdict::from_bool(o)
        ))),
        Ok(_) => Ok(()),
        Err(e) => {
            writeln!(err, "note: no oracle check: {e}")?;
            Ok(())
        }
    }
}

fn load_instance(f: &FormulaArgs) -> Result<SatInstance, CliError> {
    let formula = parse_dimacs(&read(&f.dimacs)?).map_err(|e| CliError::usage(format!("{}: {e}", f.dimacs.display())))?;
    Ok(match &f.problem {
        Some(p) => SatInstance::with_problem_text(formula, &read(p)?),
        None => SatInstance::from_formula(formula),
    })
}

fn yes_no(v: bool) -> &'static str {
    if v {
        "Yes"
    } else {
        "No"
    }
}

fn sat_solve(f: &FormulaArgs, backend: bool, json: bool, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    let inst = load_instance(f)?;
    let cfg = sat_config().with_limits(s.limits);
    let (answer, result) = if backend {
        let client = Client::new(s.backend_config()?).map_err(|e| CliError::backend(e.to_string()))?;
        let mut g = LlmGenerator::new(client);
        let r = run_with_root(&text::tokenize(&inst.root_problem), &text::tokenize(&inst.question), &mut g, &cfg);
        if r.bottom() == Some(Bottom::GeneratorFailed) {
            if let Some(e) = g.take_error() {
                return Err(CliError::backend(e.to_string()));
            }
        }
        writeln!(err, "requests={}", g.requests())?;
        (parse_answer(r.answer()), r)
    } else {
        let r = solve(&inst, &cfg);
        (r.satisfiable, r.result)
    };
    let record = json!({
        "answer": answer.map(yes_no),
        "raw": result.answer().map(text::render),
        "trace": trace_json(&result.trace),
    });
    emit(out, err, json, answer.map(yes_no), &record)?;
    let Some(a) = answer else {
        if let Some(raw) = result.answer() {
            return Err(CliError::bottom(format!("answer is neither Yes nor No: {:?}", text::render(raw))));
        }
        return Err(bottom_of(&result));
    };
    if inst.formula.num_vars > BRUTE_FORCE_MAX_VARS {
        writeln!(err, "note: more than {BRUTE_FORCE_MAX_VARS} variables; no oracle check")?;
        return Ok(());
    }
    let oracle = brute_force(&inst.formula).is_some();
    if a != oracle {
        return Err(CliError::mismatch(format!("answered {}, enumeration says {}", yes_no(a), yes_no(oracle))));
    }
    Ok(())
}

fn sat_traces(f: &FormulaArgs, path: Option<&Path>, out: Out, err: Out) -> Result<(), CliError> {
    let inst = load_instance(f)?;
    let (samples, result) = gen_traces(&inst);
    match path {
        Some(p) => write_jsonl(BufWriter::new(File::create(p)?), &samples)?,
        None => write_jsonl(&mut *out, &samples)?,
    }
    writeln!(err, "{} samples", samples.len())?;
    match parse_answer(result.answer()) {
        Some(_) => Ok(()),
        None => Err(bottom_of(&result)),
    }
}

fn run_prompt(a: RunArgs, s: &Settings, out: Out, err: Out) -> Result<(), CliError> {
    let prompt = match (&a.prompt, &a.prompt_file) {
        (Some(p), _) => p.clone(),
        (None, Some(f)) => read(f)?,
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let root = match (&a.root, &a.root_file) {
        (Some(r), _) => Some(r.clone()),
        (None, Some(f)) => Some(read(f)?),
        (None, None) => None,
    };
    if a.prefix && root.is_none() {
        return Err(CliError::usage("--prefix needs --root or --root-file"));
    }
    let mut cfg = RunConfig::default().with_limits(s.limits);
    if a.prefix {
        cfg = cfg.with_prompt_prefixing();
    }
    if a.preserve {
        cfg = cfg.with_question_preservation(AnswerFormat::text());
    }
    if a.no_loop_detection {
        cfg = cfg.without_loop_detection();
    }
    if a.steps_csv.is_some() {
        cfg = cfg.recording_steps();
    }
    let client = Client::new(s.backend_config()?).map_err(|e| CliError::backend(e.to_string()))?;
    let mut g = LlmGenerator::new(client);
    let task = text::tokenize(&prompt);
    let result = match (&root, a.prefix) {
        (Some(r), true) => run_with_root(&text::tokenize(r), &task, &mut g, &cfg),
        (Some(r), false) => {
            g = g.with_root(r.clone());
            run(&task, &mut g, &cfg)
        }
        (None, _) => run(&task, &mut g, &cfg),
    };
    if let Some(p) = &a.steps_csv {
        std::fs::write(p, result.trace.steps_csv())?;
    }
    writeln!(err, "requests={}", g.requests())?;
    let answer = result.answer().map(text::render);
    let record = json!({"answer": answer, "trace": trace_json(&result.trace)});
    emit(out, err, a.json, answer.as_deref(), &record)?;
    if answer.is_some() {
        return Ok(());
    }
    if result.bottom() == Some(Bottom::GeneratorFailed) {
        if let Some(e) = g.take_error() {
            return Err(CliError::backend(e.to_string()));
        }
    }
    Err(bottom_of(&result))
}
