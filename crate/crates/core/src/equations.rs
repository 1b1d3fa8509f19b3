//! Bounded least fixed points of systems of recursive equations, the
//! built-in systems, and language differences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bounds::{Bounds, Budget};
use crate::compose::{ComposeOptions, Restriction};
use crate::expr::{Env, EquationSystem, EvalError, Evaluator, Expr};
use crate::grid::Word;

/// Odd squares of `a` with an `x` in the centre.
pub const SQUARES: &str = "\
Er = ((a *(e=w)) (se=ne) (a *(s=n))) (sw=ne) ((a *(e=w)) (nw=sw) (a *(s=n)))
Erect = (Er ((nw>ne)&(nw>sw)) a) ((se>ne)&(se>sw)) a
X = x + X ((n<s)&(e<w)&(s<n)&(w<e)) Erect
";

/// Hat-shaped components of the `F02ac.c` language.
pub const F02AC: &str = "\
X1 = c + c (sw=ne) X1
X2 = X1 (ne=nw) 2
X3 = c + c (se=nw) X3
X4 = X2 (ne=nw) X3
X5 = c (s<n)&!(sw#nw)&!(se#ne) X4
X6 = ((0 *(e=w)) (e=w) 2) (e=w) (a *(e=w))
X7 = (0 *(e=w))
X8 = (a *(e=w))
X9 = X5 + X6 (n<s)&(w<e)&(e<w) X9
X10 = X9 + X7 (n<s)&(w<e) X10
X11 = X10 + X8 (n<s)&(e<w) X11
";

const X5_GENERAL: &str = "X5 + X5 ((xne<xsw)&!((!x)nw#sw)) X5'";
const X9_GENERAL: &str = "X5' + X6 (n<s)&(w<e)&(e<w) X9";

pub fn builtin_squares() -> EquationSystem {
    EquationSystem::parse(SQUARES).expect("built-in system parses")
}

pub fn builtin_f02ac() -> EquationSystem {
    EquationSystem::parse(F02AC).expect("built-in system parses")
}

/// The hat-form system with `X5'` chaining hats through their bottom legs
/// and `X9` built on `X5'`.
pub fn builtin_f02ac_general() -> EquationSystem {
    let base = builtin_f02ac();
    let mut eqs = Vec::new();
    for (name, e) in base.equations() {
        if name == "X9" {
            eqs.push(("X5'".to_string(), Expr::parse(X5_GENERAL).expect("built-in expression")));
            eqs.push((name.clone(), Expr::parse(X9_GENERAL).expect("built-in expression")));
        } else {
            eqs.push((name.clone(), e.clone()));
        }
    }
    EquationSystem::new(eqs).expect("built-in system is well formed")
}

pub const BUILTIN_NAMES: [&str; 3] = ["squares", "f02ac", "f02ac-general"];

/// A built-in system by name, with its main variable.
pub fn builtin_system(name: &str) -> Option<(EquationSystem, &'static str)> {
    match name {
        "squares" => Some((builtin_squares(), "X")),
        "f02ac" => Some((builtin_f02ac(), "X11")),
        "f02ac-general" => Some((builtin_f02ac_general(), "X11")),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub values: BTreeMap<String, BTreeSet<Word>>,
    /// Rounds performed, the final unchanged round included.
    pub iterations: usize,
    /// False when the node budget ran out; the sets are then a partial
    /// under-approximation.
    pub saturated: bool,
}

impl Solution {
    pub fn get(&self, name: &str) -> Option<&BTreeSet<Word>> {
        self.values.get(name)
    }

    /// Re-evaluates every right-hand side under the solution and reports
    /// whether nothing changes.
    pub fn verify(&self, sys: &EquationSystem, bounds: &Bounds) -> Result<bool, EvalError> {
        let budget = Budget::new(u64::MAX);
        let ev = Evaluator::new(*bounds, ComposeOptions::default(), &budget);
        for (name, e) in sys.equations() {
            if ev.eval(e, &self.values)? != self.values[name] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Worker threads for evaluating right-hand sides within a round.
    pub jobs: usize,
    pub compose: ComposeOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { jobs: 1, compose: ComposeOptions::default() }
    }
}

/// An expression with variable-free subterms replaced by their values.
enum Plan {
    Const(Arc<BTreeSet<Word>>),
    Var(String),
    Sum(Vec<Plan>),
    Compose(Box<Plan>, Restriction, Box<Plan>),
    Star(Box<Plan>, Restriction),
}

impl Plan {
    fn build(e: &Expr, ev: &Evaluator) -> Result<Plan, EvalError> {
        if e.is_closed() {
            return Ok(Plan::Const(Arc::new(ev.eval(e, &Env::new())?)));
        }
        Ok(match e {
            Expr::Var(v) => Plan::Var(v.clone()),
            Expr::Sum(items) => Plan::Sum(items.iter().map(|x| Plan::build(x, ev)).collect::<Result<_, _>>()?),
            Expr::Compose(l, r, rt) => {
                Plan::Compose(Box::new(Plan::build(l, ev)?), r.clone(), Box::new(Plan::build(rt, ev)?))
            }
            Expr::Star(b, r) => Plan::Star(Box::new(Plan::build(b, ev)?), r.clone()),
            Expr::Atom(_) => unreachable!("atoms are closed"),
        })
    }

    fn eval(&self, ev: &Evaluator, env: &Env) -> Result<Arc<BTreeSet<Word>>, EvalError> {
        Ok(match self {
            Plan::Const(set) => set.clone(),
            Plan::Var(v) => Arc::new(env.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone()))?),
            Plan::Sum(items) => {
                let mut out = BTreeSet::new();
                for item in items {
                    out.extend(item.eval(ev, env)?.iter().cloned());
                }
                Arc::new(out)
            }
            Plan::Compose(l, r, rt) => {
                let left = l.eval(ev, env)?;
                if left.is_empty() {
                    return Ok(left);
                }
                let right = rt.eval(ev, env)?;
                Arc::new(ev.composer(r).compose_langs(left.iter(), right.iter())?)
            }
            Plan::Star(b, r) => Arc::new(ev.composer(r).star(&*b.eval(ev, env)?)?),
        })
    }
}

/// Least fixed point within `bounds` by Jacobi iteration from the empty
/// environment.
pub fn solve(sys: &EquationSystem, bounds: &Bounds) -> Solution {
    solve_with(sys, bounds, SolveOptions::default())
}

pub fn solve_with(sys: &EquationSystem, bounds: &Bounds, opts: SolveOptions) -> Solution {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build().expect("thread pool");
    pool.install(|| solve_in_pool(sys, bounds, opts))
}

fn solve_in_pool(sys: &EquationSystem, bounds: &Bounds, opts: SolveOptions) -> Solution {
    let budget = Budget::new(bounds.node_budget);
    let ev = Evaluator::new(*bounds, opts.compose, &budget);
    let mut values: Env = sys.names().map(|n| (n.to_string(), BTreeSet::new())).collect();
    let partial = |values: Env, iterations| Solution { values, iterations, saturated: false };

    let plans: Vec<(&str, Plan)> = match sys
        .equations()
        .par_iter()
        .map(|(n, e)| Plan::build(e, &ev).map(|p| (n.as_str(), p)))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(p) => p,
        Err(_) => return partial(values, 0),
    };

    let mut iterations = 0;
    loop {
        iterations += 1;
        let next: Result<Vec<_>, EvalError> =
            plans.par_iter().map(|(n, p)| p.eval(&ev, &values).map(|s| (*n, s))).collect();
        let next = match next {
            Ok(n) => n,
            Err(_) => return partial(values, iterations),
        };
        let mut changed = false;
        for (name, set) in next {
            let slot = values.get_mut(name).expect("declared variable");
            if *slot != *set {
                changed = true;
                *slot = Arc::try_unwrap(set).unwrap_or_else(|a| (*a).clone());
            }
        }
        if !changed {
            return Solution { values, iterations, saturated: true };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub only_left: usize,
    pub only_right: usize,
    pub left_witnesses: Vec<Word>,
    pub right_witnesses: Vec<Word>,
}

impl DiffReport {
    pub fn is_equal(&self) -> bool {
        self.only_left == 0 && self.only_right == 0
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sides = [("left", self.only_left, &self.left_witnesses), ("right", self.only_right, &self.right_witnesses)];
        for (side, count, witnesses) in sides {
            writeln!(f, "only in {side}: {count}")?;
            for w in witnesses {
                writeln!(f, "{}\n", w.render_ascii())?;
            }
        }
        Ok(())
    }
}

/// Symmetric difference with up to `k` smallest witnesses per side.
pub fn diff_languages(a: &BTreeSet<Word>, b: &BTreeSet<Word>, k: usize) -> DiffReport {
    let left: Vec<&Word> = a.difference(b).collect();
    let right: Vec<&Word> = b.difference(a).collect();
    DiffReport {
        only_left: left.len(),
        only_right: right.len(),
        left_witnesses: left.into_iter().take(k).cloned().collect(),
        right_witnesses: right.into_iter().take(k).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::star;
    use crate::grid::parse_words;

    fn texts(set: &BTreeSet<Word>) -> Vec<String> {
        set.iter().map(|w| w.render_ascii()).collect()
    }

    fn sys(text: &str) -> EquationSystem {
        EquationSystem::parse(text).unwrap()
    }

    #[test]
    fn single_letter_takes_two_rounds() {
        let s = solve(&sys("X = x"), &Bounds::rect(2, 2).unwrap());
        assert_eq!(texts(&s.values["X"]), vec!["x"]);
        assert_eq!(s.iterations, 2);
        assert!(s.saturated);
    }

    #[test]
    fn anti_diagonal_chains() {
        let system = sys("X1 = c + c (sw=ne) X1");
        let b = Bounds::rect(3, 3).unwrap();
        let s = solve(&system, &b);
        assert_eq!(texts(&s.values["X1"]), vec!["c", ".c\nc.", "..c\n.c.\nc.."]);
        assert!(s.verify(&system, &b).unwrap());
    }

    #[test]
    fn least_solution_matches_star() {
        let b = Bounds::rect(2, 4).unwrap();
        let s = solve(&sys("X = a + X (e=w) a"), &b);
        let a = BTreeSet::from([Word::letter('a').unwrap()]);
        assert_eq!(s.values["X"], star(&a, &Restriction::parse("e=w").unwrap(), &b).unwrap());
    }

    #[test]
    fn order_independent() {
        let system = builtin_f02ac();
        let b = Bounds::new(4, 4, 6).unwrap();
        assert_eq!(solve(&system, &b).values, solve(&system.reversed(), &b).values);
    }

    #[test]
    fn budget_exhaustion_is_partial() {
        let b = Bounds::new(4, 4, 8).unwrap().with_budget(10);
        let s = solve(&builtin_f02ac(), &b);
        assert!(!s.saturated);
    }

    #[test]
    fn builtins_parse_and_classify() {
        use crate::expr::ExprClass;
        assert_eq!(builtin_squares().len(), 3);
        let f = builtin_f02ac();
        assert_eq!(f.len(), 11);
        assert!(f.equations().iter().all(|(_, e)| e.classify() == ExprClass::N2re));
        let g = builtin_f02ac_general();
        assert_eq!(g.len(), 12);
        assert_eq!(g.get("X5'").unwrap().classify(), ExprClass::X2re);
        assert!(g.get("X9").unwrap().variables().contains("X5'"));
        assert!(builtin_squares().equations().iter().all(|(_, e)| e.classify() == ExprClass::N2re));
    }

    #[test]
    fn squares_at_small_bounds() {
        let s = solve(&builtin_squares(), &Bounds::new(1, 1, 1).unwrap());
        assert_eq!(texts(&s.values["X"]), vec!["x"]);
        let s = solve(&builtin_squares(), &Bounds::new(3, 3, 9).unwrap());
        assert_eq!(texts(&s.values["X"]), vec!["x", "aaa\naxa\naaa"]);
    }

    #[test]
    fn horizontal_bars() {
        let s = solve(&builtin_f02ac(), &Bounds::new(1, 4, 4).unwrap());
        let mut expected = BTreeSet::new();
        for zeros in 1..=2 {
            for aas in 1..=2 {
                if zeros + aas < 4 {
                    let text = format!("{}2{}", "0".repeat(zeros), "a".repeat(aas));
                    expected.extend(parse_words(&format!("1 {}\n{text}", text.len())).unwrap());
                }
            }
        }
        assert_eq!(s.values["X6"], expected);
    }

    #[test]
    fn diff_reports() {
        let a = BTreeSet::from([Word::letter('a').unwrap()]);
        let b = BTreeSet::from([Word::letter('b').unwrap()]);
        assert!(diff_languages(&BTreeSet::new(), &BTreeSet::new(), 3).is_equal());
        assert!(diff_languages(&a, &a, 3).is_equal());
        let d = diff_languages(&a, &b, 3);
        assert_eq!((d.only_left, d.only_right), (1, 1));
        assert_eq!(d.left_witnesses, vec![Word::letter('a').unwrap()]);
        assert_eq!(d.right_witnesses, vec![Word::letter('b').unwrap()]);
        assert!(diff_languages(&a, &b, 0).left_witnesses.is_empty());
    }
}
