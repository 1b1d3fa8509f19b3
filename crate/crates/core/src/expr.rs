//! Expression DSL: atoms, sums, restricted compositions, restricted
//! iterations and variables, plus systems of recursive equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bounds::{Bounds, Budget, BudgetExhausted};
use crate::compose::{parse_or, ComposeOptions, Composer, Restriction};
use crate::grid::Word;
use crate::syntax::{Cursor, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(char),
    Sum(Vec<Expr>),
    Compose(Box<Expr>, Restriction, Box<Expr>),
    Star(Box<Expr>, Restriction),
    Var(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprClass {
    N2re,
    X2re,
}

impl fmt::Display for ExprClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExprClass::N2re => "n2RE",
            ExprClass::X2re => "x2RE",
        })
    }
}

pub type Env = BTreeMap<String, BTreeSet<Word>>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
}

impl Expr {
    pub fn atom(c: char) -> Expr {
        Expr::Atom(c)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn compose(l: Expr, r: Restriction, rt: Expr) -> Expr {
        Expr::Compose(Box::new(l), r, Box::new(rt))
    }

    pub fn star(body: Expr, r: Restriction) -> Expr {
        Expr::Star(Box::new(body), r)
    }

    pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
        check_parens(text)?;
        let mut cur = Cursor::new(text);
        let e = parse_sum(&mut cur)?;
        cur.skip_ws();
        if !cur.at_end() {
            return cur.error("unexpected input after expression");
        }
        Ok(e)
    }

    pub fn classify(&self) -> ExprClass {
        let mut x = false;
        self.visit(&mut |e| match e {
            Expr::Compose(_, r, _) | Expr::Star(_, r) => x |= r.uses_extreme_cells(),
            _ => {}
        });
        if x {
            ExprClass::X2re
        } else {
            ExprClass::N2re
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn is_closed(&self) -> bool {
        self.variables().is_empty()
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Atom(_) | Expr::Var(_) => {}
            Expr::Sum(items) => items.iter().for_each(|e| e.visit(f)),
            Expr::Compose(l, _, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Star(b, _) => b.visit(f),
        }
    }

    /// Replaces every occurrence of variable `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == name => with.clone(),
            Expr::Atom(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(items) => Expr::Sum(items.iter().map(|e| e.substitute(name, with)).collect()),
            Expr::Compose(l, r, rt) => Expr::compose(l.substitute(name, with), r.clone(), rt.substitute(name, with)),
            Expr::Star(b, r) => Expr::star(b.substitute(name, with), r.clone()),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    Expr::parse(text)
}

fn check_parens(text: &str) -> Result<(), SyntaxError> {
    let mut open = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        i += 1;
        if b == b'-' && bytes.get(i) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let i = i - 1;
        match b {
            b'(' => open.push(i),
            b')' if open.pop().is_none() => {
                return Err(SyntaxError { offset: i, msg: "unbalanced ')'".into() });
            }
            _ => {}
        }
    }
    match open.pop() {
        Some(i) => Err(SyntaxError { offset: i, msg: "unbalanced '('".into() }),
        None => Ok(()),
    }
}

fn parse_sum(cur: &mut Cursor) -> Result<Expr, SyntaxError> {
    let mut terms = vec![parse_term(cur)?];
    while cur.eat(b'+') {
        terms.push(parse_term(cur)?);
    }
    Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
}

fn parse_term(cur: &mut Cursor) -> Result<Expr, SyntaxError> {
    let mut left = parse_factor(cur)?;
    loop {
        cur.skip_ws();
        if cur.peek() != Some(b'(') {
            return Ok(left);
        }
        let r = parse_or(cur)?;
        let right = parse_factor(cur)?;
        left = Expr::compose(left, r, right);
    }
}

fn parse_factor(cur: &mut Cursor) -> Result<Expr, SyntaxError> {
    let mut e = parse_primary(cur)?;
    while cur.eat(b'*') {
        cur.skip_ws();
        if cur.peek() != Some(b'(') {
            return cur.error("expected '(' after '*'");
        }
        let r = parse_or(cur)?;
        e = Expr::star(e, r);
    }
    Ok(e)
}

const RESERVED: &[u8] = b"()+*&|!=<>#;'-";

fn is_var_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'\''
}

fn parse_primary(cur: &mut Cursor) -> Result<Expr, SyntaxError> {
    cur.skip_ws();
    let start = cur.pos;
    match cur.peek() {
        None => cur.error("expected an expression but input ended"),
        Some(b'(') => {
            cur.bump();
            let e = parse_sum(cur)?;
            cur.expect(b')')?;
            Ok(e)
        }
        Some(b) if b.is_ascii_uppercase() => {
            while cur.peek().is_some_and(is_var_char) {
                cur.bump();
            }
            Ok(Expr::Var(cur.slice(start, cur.pos).to_string()))
        }
        Some(b) if b.is_ascii_graphic() && !RESERVED.contains(&b) && b != b'.' => {
            cur.bump();
            if cur.peek().is_some_and(|n| n.is_ascii_alphanumeric()) {
                return cur.error("atoms are single letters");
            }
            Ok(Expr::Atom(b as char))
        }
        Some(_) => cur.error("expected a letter, a variable or '('"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Sum(items) => {
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    wrap(f, e, matches!(e, Expr::Sum(_)))?;
                }
                Ok(())
            }
            Expr::Compose(l, r, rt) => {
                wrap(f, l, matches!(**l, Expr::Sum(_)))?;
                write!(f, " ({r}) ")?;
                wrap(f, rt, matches!(**rt, Expr::Sum(_) | Expr::Compose(..)))
            }
            Expr::Star(b, r) => {
                wrap(f, b, matches!(**b, Expr::Sum(_) | Expr::Compose(..)))?;
                write!(f, " *({r})")
            }
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Evaluates expressions within fixed bounds, charging one shared budget.
pub struct Evaluator<'a> {
    bounds: Bounds,
    opts: ComposeOptions,
    budget: &'a Budget,
}

impl<'a> Evaluator<'a> {
    pub fn new(bounds: Bounds, opts: ComposeOptions, budget: &'a Budget) -> Evaluator<'a> {
        Evaluator { bounds, opts, budget }
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn eval(&self, e: &Expr, env: &Env) -> Result<BTreeSet<Word>, EvalError> {
        self.eval_with(e, &|name| env.get(name))
    }

    pub(crate) fn eval_with<'e>(
        &self,
        e: &Expr,
        lookup: &dyn Fn(&str) -> Option<&'e BTreeSet<Word>>,
    ) -> Result<BTreeSet<Word>, EvalError> {
        match e {
            Expr::Atom(c) => {
                let w = Word::letter(*c).expect("atoms are valid letters");
                Ok(if self.bounds.fits(&w) { BTreeSet::from([w]) } else { BTreeSet::new() })
            }
            Expr::Var(v) => match lookup(v) {
                Some(set) => Ok(set.iter().filter(|w| self.bounds.fits(w)).cloned().collect()),
                None => Err(EvalError::Unbound(v.clone())),
            },
            Expr::Sum(items) => {
                let mut out = BTreeSet::new();
                for item in items {
                    out.extend(self.eval_with(item, lookup)?);
                }
                Ok(out)
            }
            Expr::Compose(l, r, rt) => {
                let left = self.eval_with(l, lookup)?;
                if left.is_empty() {
                    return Ok(left);
                }
                let right = self.eval_with(rt, lookup)?;
                Ok(self.composer(r).compose_langs(&left, &right)?)
            }
            Expr::Star(b, r) => {
                let body = self.eval_with(b, lookup)?;
                Ok(self.composer(r).star(&body)?)
            }
        }
    }

    pub(crate) fn composer(&self, r: &Restriction) -> Composer<'a> {
        Composer::new(r, self.bounds, self.opts, self.budget)
    }
}

pub fn eval(e: &Expr, env: &Env, bounds: &Bounds) -> Result<BTreeSet<Word>, EvalError> {
    let budget = Budget::new(bounds.node_budget);
    Evaluator::new(*bounds, ComposeOptions::default(), &budget).eval(e, env)
}

pub fn classify(e: &Expr) -> ExprClass {
    e.classify()
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("variable {0} is defined more than once")]
    Duplicate(String),
    #[error("variable {name} is used in the equation for {used_in} but never defined")]
    Undefined { name: String, used_in: String },
    #[error("no equations")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    equations: Vec<(String, Expr)>,
}

impl EquationSystem {
    pub fn new(equations: Vec<(String, Expr)>) -> Result<EquationSystem, SystemError> {
        if equations.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut names = BTreeSet::new();
        for (name, _) in &equations {
            if !names.insert(name.as_str()) {
                return Err(SystemError::Duplicate(name.clone()));
            }
        }
        for (name, e) in &equations {
            if let Some(missing) = e.variables().into_iter().find(|v| !names.contains(v.as_str())) {
                return Err(SystemError::Undefined { name: missing, used_in: name.clone() });
            }
        }
        Ok(EquationSystem { equations })
    }

    /// One `Name = expr` per statement; statements end at `;` or at a
    /// newline outside parentheses. `--` starts a comment.
    pub fn parse(text: &str) -> Result<EquationSystem, SystemError> {
        let mut equations = Vec::new();
        for (start, stmt) in statements(text) {
            equations.push(parse_equation(stmt).map_err(|e| SyntaxError { offset: e.offset + start, msg: e.msg })?);
        }
        EquationSystem::new(equations)
    }

    pub fn equations(&self) -> &[(String, Expr)] {
        &self.equations
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.equations.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.equations.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Replaces the right-hand side of `name`.
    pub fn with_equation(&self, name: &str, rhs: Expr) -> Result<EquationSystem, SystemError> {
        let mut eqs = self.equations.clone();
        match eqs.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = rhs,
            None => eqs.push((name.to_string(), rhs)),
        }
        EquationSystem::new(eqs)
    }

    pub fn reversed(&self) -> EquationSystem {
        EquationSystem { equations: self.equations.iter().rev().cloned().collect() }
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, e) in &self.equations {
            writeln!(f, "{name} = {e}")?;
        }
        Ok(())
    }
}

pub fn parse_system(text: &str) -> Result<EquationSystem, SystemError> {
    EquationSystem::parse(text)
}

/// Splits into non-blank statements with their byte offsets; comments are
/// blanked out so offsets stay valid.
fn statements(text: &str) -> Vec<(usize, &str)> {
    let is_stmt = |from: usize, to: usize| !is_blank(&text[from..to]);
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'-' if bytes.get(i + 1) == Some(&b'-') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'(' => depth += 1,
            b')' => depth -= 1,
            b';' => {
                if is_stmt(start, i) {
                    out.push((start, &text[start..i]));
                }
                start = i + 1;
            }
            b'\n' if depth <= 0 => {
                if is_stmt(start, i) {
                    out.push((start, &text[start..i]));
                }
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    if is_stmt(start, bytes.len()) {
        out.push((start, &text[start..]));
    }
    out
}

fn is_blank(stmt: &str) -> bool {
    stmt.lines().all(|l| l.split("--").next().unwrap_or("").trim().is_empty())
}

fn parse_equation(stmt: &str) -> Result<(String, Expr), SyntaxError> {
    let mut cur = Cursor::new(stmt);
    cur.skip_ws();
    let start = cur.pos;
    if !cur.peek().is_some_and(|b| b.is_ascii_uppercase()) {
        return cur.error("expected a variable name starting with an uppercase letter");
    }
    while cur.peek().is_some_and(is_var_char) {
        cur.bump();
    }
    let name = cur.slice(start, cur.pos).to_string();
    cur.expect(b'=')?;
    let rest_start = cur.pos;
    let body = &stmt[rest_start..];
    let e = Expr::parse(body).map_err(|e| SyntaxError { offset: e.offset + rest_start, msg: e.msg })?;
    Ok((name, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{parse_words, Position};

    fn p(text: &str) -> Expr {
        Expr::parse(text).unwrap()
    }

    fn r(text: &str) -> Restriction {
        Restriction::parse(text).unwrap()
    }

    fn texts(set: &BTreeSet<Word>) -> Vec<String> {
        set.iter().map(|w| w.render_ascii()).collect()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            p("c + c (sw=ne) X1"),
            Expr::Sum(vec![Expr::atom('c'), Expr::compose(Expr::atom('c'), r("sw=ne"), Expr::var("X1"))])
        );
        assert_eq!(p("(0 *(e=w))"), Expr::star(Expr::atom('0'), r("e=w")));
        let err = Expr::parse("a (").unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn parse_precedence() {
        // star binds tighter than composition, composition tighter than sum
        assert_eq!(
            p("a (e=w) b *(e=w) + c"),
            Expr::Sum(vec![
                Expr::compose(Expr::atom('a'), r("e=w"), Expr::star(Expr::atom('b'), r("e=w"))),
                Expr::atom('c'),
            ])
        );
        // composition is left-associative
        assert_eq!(
            p("a (e=w) b (e=w) c"),
            Expr::compose(Expr::compose(Expr::atom('a'), r("e=w"), Expr::atom('b')), r("e=w"), Expr::atom('c'))
        );
        // unparenthesized conjunction as a restriction
        assert_eq!(
            p("X6 (n<s)&(w<e)&(e<w) X9"),
            Expr::compose(Expr::var("X6"), r("(n<s)&(w<e)&(e<w)"), Expr::var("X9"))
        );
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "a +", "a (q=w) b", "a (e=w)", "ab", "a b", "a *e=w", ")", "a (e=w) b)"] {
            assert!(Expr::parse(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn print_round_trip() {
        for src in [
            "c + c (sw=ne) X1",
            "((0 *(e=w)) (e=w) 2) (e=w) (a *(e=w))",
            "X5 + X5 ((xne<xsw)&!((!x)nw#sw)) X5'",
            "(a + b) (e=w) (c + d)",
            "a (e=w) (b (e=w) c)",
            "(a (e=w) b) *(s=n) *(e=w)",
            "(a + b) + c",
        ] {
            let e = p(src);
            assert_eq!(p(&e.to_string()), e, "{src}");
        }
    }

    #[test]
    fn classification() {
        assert_eq!(p("a (e=w) b").classify(), ExprClass::N2re);
        assert_eq!(p("v (e>xw) w").classify(), ExprClass::X2re);
        assert_eq!(p("X5 + X5 ((xne<xsw)&!((!x)nw#sw)) X5'").classify(), ExprClass::X2re);
    }

    #[test]
    fn eval_examples() {
        let b = Bounds::rect(1, 3).unwrap();
        let env = Env::new();
        assert_eq!(texts(&eval(&p("a"), &env, &b).unwrap()), vec!["a"]);
        assert_eq!(texts(&eval(&p("a + b"), &env, &b).unwrap()), vec!["a", "b"]);
        assert_eq!(texts(&eval(&p("(0 *(e=w)) (e=w) 2"), &env, &b).unwrap()), vec!["02", "002"]);
        assert_eq!(eval(&p("X"), &env, &b), Err(EvalError::Unbound("X".into())));
        let env = Env::from([("X".to_string(), BTreeSet::from([Word::letter('q').unwrap()]))]);
        assert_eq!(texts(&eval(&p("X (e=w) X"), &env, &b).unwrap()), vec!["qq"]);
    }

    #[test]
    fn eval_filters_bindings_to_bounds() {
        let wide = parse_words("1 3\naaa").unwrap();
        let env = Env::from([("X".to_string(), wide.into_iter().collect())]);
        assert!(eval(&p("X"), &env, &Bounds::rect(1, 2).unwrap()).unwrap().is_empty());
        let _ = Position::new(0, 0);
    }

    #[test]
    fn systems() {
        let sys = EquationSystem::parse("X1 = c + c (sw=ne) X1\nX2 = X1 (ne=nw) 2 -- trailing\n-- note\n").unwrap();
        assert_eq!(sys.names().collect::<Vec<_>>(), vec!["X1", "X2"]);
        let multi = EquationSystem::parse("X = a (e=w\n) b; Y = X").unwrap();
        assert_eq!(multi.len(), 2);
        assert_eq!(
            EquationSystem::parse("X = x + E"),
            Err(SystemError::Undefined { name: "E".into(), used_in: "X".into() })
        );
        assert_eq!(EquationSystem::parse(""), Err(SystemError::Empty));
        assert_eq!(EquationSystem::parse("-- only a comment"), Err(SystemError::Empty));
        assert_eq!(EquationSystem::parse("X = a; X = b"), Err(SystemError::Duplicate("X".into())));
        let err = EquationSystem::parse("X = a\nY = b (").unwrap_err();
        assert_eq!(err, SystemError::Syntax(SyntaxError { offset: 12, msg: "unbalanced '('".into() }));
        assert_eq!(EquationSystem::parse(&sys.to_string()).unwrap(), sys);
    }
}
