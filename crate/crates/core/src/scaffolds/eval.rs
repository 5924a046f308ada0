use std::collections::{HashMap, HashSet};

use super::{BudgetKind, EvalBudget, Invocation, ScaffoldBottom, ScaffoldSystem, Step};
use crate::runtime::View;
use crate::token::{Symbol, Token};

/// Results of finished invocations, keyed by scaffold index and input.
pub type Memo<S> = HashMap<(usize, Vec<Token<S>>), Vec<Token<S>>>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OracleRef {
    Generator(usize),
    Scaffold(usize),
}

/// An answered oracle query, in the order answers were delivered.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QueryEvent<S> {
    pub caller: usize,
    /// Depth of the calling invocation; the entry invocation has depth 1.
    pub depth: usize,
    pub oracle: OracleRef,
    pub query: Vec<Token<S>>,
    pub answer: Vec<Token<S>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SessionStats {
    /// Scaffold invocations actually run (memo hits excluded).
    pub invocations: u64,
    pub generator_queries: u64,
    pub recursive_queries: u64,
    pub memo_hits: u64,
    pub max_depth: usize,
    /// Largest space any invocation used: input, work state, the pending
    /// query and its answer (or the output).
    pub max_space: usize,
}

struct Active<'s, S> {
    scaffold: usize,
    input: Vec<Token<S>>,
    inv: Box<dyn Invocation<S> + 's>,
    pending: Option<(OracleRef, Vec<Token<S>>)>,
}

/// One evaluation context. The memo outlives a single `evaluate` call, so a
/// session can be reused or seeded with a previous table.
pub struct Session<S> {
    budget: EvalBudget,
    memo: Memo<S>,
    stats: SessionStats,
    log: Option<Vec<QueryEvent<S>>>,
}

impl<S: Symbol> Session<S> {
    pub fn new(budget: EvalBudget) -> Self {
        Session {
            budget,
            memo: Memo::new(),
            stats: SessionStats::default(),
            log: None,
        }
    }

    pub fn with_memo(mut self, memo: Memo<S>) -> Self {
        self.memo = memo;
        self
    }

    pub fn logging(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn memo(&self) -> &Memo<S> {
        &self.memo
    }

    pub fn into_memo(self) -> Memo<S> {
        self.memo
    }

    pub fn stats(&self) -> SessionStats {
        self.stats
    }

    pub fn log(&self) -> &[QueryEvent<S>] {
        self.log.as_deref().unwrap_or(&[])
    }

    fn meter(&mut self, used: usize) -> Result<(), ScaffoldBottom> {
        self.stats.max_space = self.stats.max_space.max(used);
        if used > self.budget.space() {
            return Err(ScaffoldBottom::SpaceExceeded {
                limit: self.budget.space(),
                used,
            });
        }
        Ok(())
    }

    fn count_call(&mut self) -> Result<(), ScaffoldBottom> {
        if self.stats.generator_queries + self.stats.recursive_queries >= self.budget.calls() {
            return Err(ScaffoldBottom::BudgetExceeded(BudgetKind::Calls));
        }
        Ok(())
    }

    /// Evaluates scaffold `r` on `x`.
    pub fn evaluate(
        &mut self,
        sys: &mut ScaffoldSystem<'_, S>,
        r: usize,
        x: &[Token<S>],
    ) -> Result<Vec<Token<S>>, ScaffoldBottom> {
        assert!(r < sys.scaffolds.len(), "entry scaffold {r} out of range");
        if let Some(out) = self.memo.get(&(r, x.to_vec())) {
            self.stats.memo_hits += 1;
            return Ok(out.clone());
        }
        let ScaffoldSystem { generators, scaffolds } = sys;
        let scaffolds: &[Box<dyn super::Scaffold<S> + '_>] = scaffolds;
        let declared: Vec<(HashSet<usize>, HashSet<usize>)> = scaffolds
            .iter()
            .map(|s| (s.generators().into_iter().collect(), s.recursions().into_iter().collect()))
            .collect();

        let mut in_progress: HashSet<(usize, Vec<Token<S>>)> = HashSet::new();
        let mut stack: Vec<Active<'_, S>> = Vec::new();
        let mut gen_step = 0u64;

        in_progress.insert((r, x.to_vec()));
        stack.push(Active {
            scaffold: r,
            input: x.to_vec(),
            inv: scaffolds[r].start(x),
            pending: None,
        });
        self.stats.invocations += 1;
        self.stats.max_depth = self.stats.max_depth.max(1);
        let mut answer: Option<Vec<Token<S>>> = None;

        loop {
            let depth = stack.len();
            let top = stack.last_mut().expect("stack is non-empty while running");
            let j = top.scaffold;
            if let (Some((oracle, query)), Some(a)) = (top.pending.take(), answer.as_ref()) {
                if let Some(log) = &mut self.log {
                    log.push(QueryEvent {
                        caller: j,
                        depth,
                        oracle,
                        query,
                        answer: a.clone(),
                    });
                }
            }
            let step = top.inv.resume(answer.take());
            let base = top.input.len() + top.inv.space();
            match step {
                Step::Output(out) => {
                    self.meter(base + out.len())?;
                    let done = stack.pop().expect("top exists");
                    in_progress.remove(&(done.scaffold, done.input.clone()));
                    self.memo.insert((done.scaffold, done.input), out.clone());
                    if stack.is_empty() {
                        return Ok(out);
                    }
                    answer = Some(out);
                }
                Step::Fail(message) => return Err(ScaffoldBottom::ProgramFailed { scaffold: j, message }),
                Step::Diverge(reason) => return Err(ScaffoldBottom::Diverged { scaffold: j, reason }),
                Step::Generate { gen, query } => {
                    if !declared[j].0.contains(&gen) {
                        return Err(ScaffoldBottom::UndeclaredOracle { scaffold: j });
                    }
                    self.meter(base + query.len())?;
                    self.count_call()?;
                    self.stats.generator_queries += 1;
                    let view = View {
                        root: None,
                        active: &query,
                        depth,
                        step: gen_step,
                    };
                    gen_step += 1;
                    let a = generators[gen]
                        .generator
                        .generate(&view)
                        .map_err(|e| ScaffoldBottom::GeneratorFailed {
                            generator: gen,
                            message: e.to_string(),
                        })?;
                    self.meter(base + query.len() + a.len())?;
                    top.pending = Some((OracleRef::Generator(gen), query));
                    answer = Some(a);
                }
                Step::Recurse { scaffold, query } => {
                    if !declared[j].1.contains(&scaffold) {
                        return Err(ScaffoldBottom::UndeclaredOracle { scaffold: j });
                    }
                    self.meter(base + query.len())?;
                    self.count_call()?;
                    self.stats.recursive_queries += 1;
                    let key = (scaffold, query);
                    if let Some(out) = self.memo.get(&key).cloned() {
                        self.stats.memo_hits += 1;
                        self.meter(base + key.1.len() + out.len())?;
                        answer = Some(out);
                        top.pending = Some((OracleRef::Scaffold(scaffold), key.1));
                        continue;
                    }
                    if in_progress.contains(&key) {
                        return Err(ScaffoldBottom::Cycle { scaffold });
                    }
                    if depth + 1 > self.budget.depth() {
                        return Err(ScaffoldBottom::BudgetExceeded(BudgetKind::Depth));
                    }
                    top.pending = Some((OracleRef::Scaffold(scaffold), key.1.clone()));
                    in_progress.insert(key.clone());
                    let inv = scaffolds[scaffold].start(&key.1);
                    stack.push(Active {
                        scaffold,
                        input: key.1,
                        inv,
                        pending: None,
                    });
                    self.stats.invocations += 1;
                    self.stats.max_depth = self.stats.max_depth.max(depth + 1);
                }
            }
            // The caller's space with the returned answer on its oracle tape
            // is metered when the answer is delivered.
            if let (Some(a), Some(top)) = (&answer, stack.last()) {
                if let Some((OracleRef::Scaffold(_), q)) = &top.pending {
                    self.meter(top.input.len() + top.inv.space() + q.len() + a.len())?;
                }
            }
        }
    }
}

/// Runs one invocation of `j` on `u` with recursive queries answered from
/// `table`. Returns `Ok(None)` when the result is ⊥ under that table, and
/// collects every recursive query made into `queried`.
fn run_isolated<S: Symbol>(
    sys: &mut ScaffoldSystem<'_, S>,
    j: usize,
    u: &[Token<S>],
    table: &HashMap<(usize, Vec<Token<S>>), Option<Vec<Token<S>>>>,
    budget: EvalBudget,
    queried: &mut Vec<(usize, Vec<Token<S>>)>,
) -> Option<Vec<Token<S>>> {
    let ScaffoldSystem { generators, scaffolds } = sys;
    let mut inv = scaffolds[j].start(u);
    let mut answer = None;
    let declared_g = scaffolds[j].generators();
    let declared_r = scaffolds[j].recursions();
    for step in 0..budget.calls() {
        let s = inv.resume(answer.take());
        let base = u.len() + inv.space();
        match s {
            Step::Output(out) => return (base + out.len() <= budget.space()).then_some(out),
            Step::Fail(_) | Step::Diverge(_) => return None,
            Step::Generate { gen, query } => {
                if !declared_g.contains(&gen) {
                    return None;
                }
                let view = View {
                    root: None,
                    active: &query,
                    depth: 1,
                    step,
                };
                let a = generators[gen].generator.generate(&view).ok()?;
                if base + query.len() + a.len() > budget.space() {
                    return None;
                }
                answer = Some(a);
            }
            Step::Recurse { scaffold, query } => {
                if !declared_r.contains(&scaffold) {
                    return None;
                }
                let key = (scaffold, query);
                let a = table.get(&key).cloned().flatten();
                if !table.contains_key(&key) {
                    queried.push(key.clone());
                }
                let a = a?;
                if base + key.1.len() + a.len() > budget.space() {
                    return None;
                }
                answer = Some(a);
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct KleeneResult<S> {
    /// `None` is ⊥.
    pub value: Option<Vec<Token<S>>>,
    /// Approximation rounds until the table stopped changing.
    pub rounds: usize,
    /// Every `(scaffold, input)` pair reached, with its least-fixpoint value.
    pub table: HashMap<(usize, Vec<Token<S>>), Option<Vec<Token<S>>>>,
}

#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq, Eq)]
pub enum KleeneError {
    #[error("the reachable domain exceeded {0} entries")]
    Domain(usize),
    #[error("no fixpoint after {0} rounds")]
    Rounds(usize),
}

/// Computes the least-fixpoint value of scaffold `r` on `x` by Kleene
/// iteration from the everywhere-⊥ table. Each round re-runs every reached
/// `(scaffold, input)` pair with recursive queries answered by the previous
/// round. Invocations exceeding the space bound are ⊥.
pub fn kleene_fixpoint<S: Symbol>(
    sys: &mut ScaffoldSystem<'_, S>,
    r: usize,
    x: &[Token<S>],
    budget: EvalBudget,
    max_domain: usize,
) -> Result<KleeneResult<S>, KleeneError> {
    let mut domain: Vec<(usize, Vec<Token<S>>)> = vec![(r, x.to_vec())];
    let mut table: HashMap<_, Option<Vec<Token<S>>>> = HashMap::new();
    table.insert((r, x.to_vec()), None);
    let max_rounds = max_domain + 2;
    for round in 1..=max_rounds {
        let mut next = HashMap::with_capacity(table.len());
        let mut queried = Vec::new();
        for (j, u) in &domain {
            let v = run_isolated(sys, *j, u, &table, budget, &mut queried);
            next.insert((*j, u.clone()), v);
        }
        let mut grew = false;
        for key in queried {
            if !next.contains_key(&key) {
                next.insert(key.clone(), None);
                domain.push(key);
                grew = true;
            }
        }
        if domain.len() > max_domain {
            return Err(KleeneError::Domain(max_domain));
        }
        if !grew && next == table {
            let value = table[&(r, x.to_vec())].clone();
            return Ok(KleeneResult {
                value,
                rounds: round,
                table,
            });
        }
        table = next;
    }
    Err(KleeneError::Rounds(max_rounds))
}

/// One application of the system's one-step operator to a memo table read
/// as a partial function: every entry is recomputed with recursive queries
/// answered from the table, missing entries answering ⊥. Entries that come
/// out ⊥ are dropped. A table produced by a successful evaluation is a
/// fixed point.
pub fn apply_operator<S: Symbol>(sys: &mut ScaffoldSystem<'_, S>, memo: &Memo<S>, budget: EvalBudget) -> Memo<S> {
    let table: HashMap<_, _> = memo.iter().map(|(k, v)| (k.clone(), Some(v.clone()))).collect();
    let mut out = Memo::new();
    let mut scratch = Vec::new();
    for (j, u) in memo.keys() {
        if let Some(v) = run_isolated(sys, *j, u, &table, budget, &mut scratch) {
            out.insert((*j, u.clone()), v);
        }
    }
    out
}
