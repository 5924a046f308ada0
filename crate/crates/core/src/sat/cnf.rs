use std::fmt::Write;

use rand::Rng;
use thiserror::Error;

/// A CNF formula over variables `1..=num_vars`. Literals are DIMACS style:
/// `v` or `-v`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
    /// Display name of each variable, index `v - 1`.
    pub names: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: expected `p cnf <vars> <clauses>`")]
    Header(usize),
    #[error("clause before the `p cnf` header on line {0}")]
    MissingHeader(usize),
    #[error("line {line}: bad literal `{text}`")]
    Literal { line: usize, text: String },
    #[error("line {line}: literal {lit} exceeds the {vars} declared variables")]
    OutOfRange { line: usize, lit: i64, vars: usize },
    #[error("header declares {declared} clauses but {found} were given")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error("names comment lists {found} names for {vars} variables")]
    Names { found: usize, vars: usize },
}

const NAMES_TAG: &str = "names:";

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Self {
        CnfFormula {
            num_vars,
            clauses,
            names: (1..=num_vars).map(|v| format!("x{v}")).collect(),
        }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.num_vars, "one name per variable");
        self.names = names;
        self
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var - 1]
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|l| assignment[l.unsigned_abs() as usize - 1] == (*l > 0))
        })
    }

    /// Renders as DIMACS; custom names go in a `c names:` comment.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let default = CnfFormula::new(self.num_vars, Vec::new());
        if self.names != default.names {
            writeln!(out, "c {NAMES_TAG} {}", self.names.join(" ")).unwrap();
        }
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        for c in &self.clauses {
            for l in c {
                write!(out, "{l} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Parses DIMACS CNF. Clauses may span lines; a `%` line ends the body.
/// A comment `c names: A B C` assigns display names.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut names: Option<Vec<String>> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('c') {
            if let Some(list) = c.trim().strip_prefix(NAMES_TAG) {
                names = Some(list.split_whitespace().map(str::to_string).collect());
            }
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| DimacsError::Header(line_no))?;
                    let c = c.parse().map_err(|_| DimacsError::Header(line_no))?;
                    header = Some((v, c));
                }
                _ => return Err(DimacsError::Header(line_no)),
            }
            continue;
        }
        let (vars, _) = header.ok_or(DimacsError::MissingHeader(line_no))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| DimacsError::Literal {
                line: line_no,
                text: tok.to_string(),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(DimacsError::OutOfRange { line: line_no, lit, vars });
            } else {
                current.push(lit as i32);
            }
        }
    }
    let (vars, declared) = header.ok_or(DimacsError::MissingHeader(0))?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    let f = CnfFormula::new(vars, clauses);
    match names {
        Some(n) if n.len() != vars => Err(DimacsError::Names {
            found: n.len(),
            vars,
        }),
        Some(n) => Ok(f.with_names(n)),
        None => Ok(f),
    }
}

/// Exhaustive search; returns the first satisfying assignment in binary
/// counting order.
pub fn brute_force(f: &CnfFormula) -> Option<Vec<bool>> {
    assert!(f.num_vars <= 30, "brute force is limited to 30 variables");
    (0u64..1 << f.num_vars)
        .map(|bits| (0..f.num_vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
        .find(|a| f.satisfied_by(a))
}

fn literal_text(f: &CnfFormula, l: i32) -> String {
    let name = f.name(l.unsigned_abs() as usize);
    if l > 0 {
        name.to_string()
    } else {
        format!("not {name}")
    }
}

/// One numbered line per clause, each ending in a newline:
/// `Require x1.`, `Either x1 or not x2.`, `Either x1, x2, or not x3.`
pub fn render_conditions(f: &CnfFormula) -> String {
    let mut out = String::new();
    for (i, c) in f.clauses.iter().enumerate() {
        let lits: Vec<String> = c.iter().map(|l| literal_text(f, *l)).collect();
        let body = match lits.as_slice() {
            [] => "Contradiction.".to_string(),
            [a] => format!("Require {a}."),
            [a, b] => format!("Either {a} or {b}."),
            [init @ .., last] => format!("Either {}, or {last}.", init.join(", ")),
        };
        writeln!(out, "{}. {body}", i + 1).unwrap();
    }
    out
}

/// Uniform random 3-CNF: each clause has three distinct variables with
/// random signs. Needs `n >= 3`.
pub fn random_3cnf<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> CnfFormula {
    assert!(n >= 3, "3-CNF needs at least three variables");
    let clauses = (0..m)
        .map(|_| {
            let vars = rand::seq::index::sample(rng, n, 3);
            vars.iter()
                .map(|v| {
                    let v = v as i32 + 1;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses)
}

/// Difficulty bands by clause count.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Band {
    Easy,
    Medium,
    Hard,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Easy, Band::Medium, Band::Hard];

    pub fn clause_range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Band::Easy => 4..=19,
            Band::Medium => 20..=30,
            Band::Hard => 31..=50,
        }
    }

    pub fn of(clauses: usize) -> Option<Band> {
        Band::ALL.into_iter().find(|b| b.clause_range().contains(&clauses))
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Easy => "easy",
            Band::Medium => "medium",
            Band::Hard => "hard",
        }
    }
}

impl std::str::FromStr for Band {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Band::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown band `{s}` (expected easy, medium or hard)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Inverse of `render_conditions`, independent of the renderer.
    fn parse_conditions(text: &str, names: &[String]) -> Vec<Vec<i32>> {
        let lit = |s: &str| -> i32 {
            let (neg, name) = match s.strip_prefix("not ") {
                Some(n) => (true, n),
                None => (false, s),
            };
            let v = names.iter().position(|n| n == name).unwrap() as i32 + 1;
            if neg { -v } else { v }
        };
        text.lines()
            .map(|l| {
                let body = l.split_once(". ").unwrap().1.strip_suffix('.').unwrap();
                if let Some(a) = body.strip_prefix("Require ") {
                    return vec![lit(a)];
                }
                let body = body.strip_prefix("Either ").unwrap();
                body.replace(", or ", ", ")
                    .replace(" or ", ", ")
                    .split(", ")
                    .map(lit)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn dimacs_errors() {
        assert_eq!(parse_dimacs("1 2 0\n"), Err(DimacsError::MissingHeader(1)));
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(DimacsError::ClauseCount { declared: 2, found: 1 })
        );
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 3 0\n"), Err(DimacsError::OutOfRange { .. })));
        assert_eq!(parse_dimacs("p cnf 2 1\n1 2\n"), Err(DimacsError::Unterminated));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 x 0\n"), Err(DimacsError::Literal { .. })));
        assert!(matches!(parse_dimacs("p dnf 2 1\n"), Err(DimacsError::Header(1))));
    }

    #[test]
    fn multi_line_clauses_and_percent() {
        let f = parse_dimacs("c hi\np cnf 3 2\n1 -2\n3 0 -1\n0\n%\n0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![1, -2, 3], vec![-1]]);
    }

    #[test]
    fn brute_force_small() {
        let sat = CnfFormula::new(2, vec![vec![1], vec![-1, 2]]);
        assert_eq!(brute_force(&sat), Some(vec![true, true]));
        let unsat = CnfFormula::new(1, vec![vec![1], vec![-1]]);
        assert_eq!(brute_force(&unsat), None);
    }

    #[test]
    fn bands() {
        assert_eq!(Band::of(4), Some(Band::Easy));
        assert_eq!(Band::of(30), Some(Band::Medium));
        assert_eq!(Band::of(50), Some(Band::Hard));
        assert_eq!(Band::of(3), None);
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(seed in any::<u64>(), n in 3usize..12, m in 0usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_3cnf(&mut rng, n, m);
            prop_assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f.clone());
            let named = f.clone().with_names((0..n).map(|i| format!("V{i}")).collect());
            prop_assert_eq!(parse_dimacs(&named.to_dimacs()).unwrap(), named);
        }

        #[test]
        fn conditions_round_trip(seed in any::<u64>(), n in 3usize..10, m in 0usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = random_3cnf(&mut rng, n, m);
            f.clauses.push(vec![2]);
            f.clauses.push(vec![-1, 3]);
            prop_assert_eq!(parse_conditions(&render_conditions(&f), &f.names), f.clauses.clone());
        }
    }
}
