//! Interactive modules: cells whose borders carry data, specified by
//! guarded relations from (west, north) to (east, south), and validation of
//! data-bearing scenarios with feedback links.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bounds::{Budget, BudgetExhausted};
use crate::syntax::{Cursor, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datum {
    /// A blank border.
    Empty,
    Int(i64),
    Sym(String),
    Pair(Box<Datum>, Box<Datum>),
    Set(BTreeSet<Datum>),
    /// Stream items from different modules, in order.
    Seq(Vec<Datum>),
}

impl Datum {
    pub fn sym(s: &str) -> Datum {
        Datum::Sym(s.to_string())
    }

    pub fn pair(a: Datum, b: Datum) -> Datum {
        Datum::Pair(Box::new(a), Box::new(b))
    }

    pub fn set(items: impl IntoIterator<Item = Datum>) -> Datum {
        Datum::Set(items.into_iter().collect())
    }

    pub fn parse(text: &str) -> Result<Datum, SyntaxError> {
        let mut cur = Cursor::new(text);
        let d = parse_datum(&mut cur)?;
        cur.skip_ws();
        if !cur.at_end() {
            return cur.error("unexpected input after datum");
        }
        Ok(d)
    }
}

fn is_bare_sym_char(b: u8) -> bool {
    b.is_ascii_graphic() && !b"(){},^_\"|<>=".contains(&b)
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Empty => f.write_str("_"),
            Datum::Int(i) => write!(f, "{i}"),
            Datum::Sym(s) => {
                let bare = !s.is_empty()
                    && s.bytes().all(is_bare_sym_char)
                    && !s.starts_with(|c: char| c.is_ascii_digit() || c == '-');
                if bare {
                    f.write_str(s)
                } else {
                    write!(f, "\"{s}\"")
                }
            }
            Datum::Pair(a, b) => write!(f, "({a},{b})"),
            Datum::Set(items) => {
                f.write_str("{")?;
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{d}")?;
                }
                f.write_str("}")
            }
            Datum::Seq(items) => {
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("^")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_datum(cur: &mut Cursor) -> Result<Datum, SyntaxError> {
    let first = parse_datum_item(cur)?;
    let mut items = vec![first];
    while cur.eat(b'^') {
        items.push(parse_datum_item(cur)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { Datum::Seq(items) })
}

fn parse_quoted(cur: &mut Cursor) -> Result<String, SyntaxError> {
    let start = cur.pos;
    cur.bump();
    let from = cur.pos;
    while cur.peek().is_some_and(|b| b != b'"') {
        cur.bump();
    }
    if cur.bump() != Some(b'"') {
        return cur.error_at(start, "unterminated quoted symbol");
    }
    Ok(cur.slice(from, cur.pos - 1).to_string())
}

fn parse_int(cur: &mut Cursor) -> Result<i64, SyntaxError> {
    let start = cur.pos;
    if cur.peek() == Some(b'-') {
        cur.bump();
    }
    while cur.peek().is_some_and(|b| b.is_ascii_digit()) {
        cur.bump();
    }
    cur.slice(start, cur.pos).parse().or_else(|_| cur.error_at(start, "bad integer"))
}

fn parse_datum_item(cur: &mut Cursor) -> Result<Datum, SyntaxError> {
    cur.skip_ws();
    match cur.peek() {
        None => cur.error("expected a datum but input ended"),
        Some(b'_') => {
            cur.bump();
            Ok(Datum::Empty)
        }
        Some(b'"') => Ok(Datum::Sym(parse_quoted(cur)?)),
        Some(b) if b.is_ascii_digit() || (b == b'-' && cur.rest().get(1).is_some_and(u8::is_ascii_digit)) => {
            Ok(Datum::Int(parse_int(cur)?))
        }
        Some(b'(') => {
            cur.bump();
            let a = parse_datum(cur)?;
            cur.expect(b',')?;
            let b = parse_datum(cur)?;
            cur.expect(b')')?;
            Ok(Datum::pair(a, b))
        }
        Some(b'{') => {
            cur.bump();
            let mut items = BTreeSet::new();
            if !cur.eat(b'}') {
                loop {
                    items.insert(parse_datum(cur)?);
                    if cur.eat(b'}') {
                        break;
                    }
                    cur.expect(b',')?;
                }
            }
            Ok(Datum::Set(items))
        }
        Some(b) if is_bare_sym_char(b) => {
            let start = cur.pos;
            while cur.peek().is_some_and(is_bare_sym_char) {
                cur.bump();
            }
            Ok(Datum::Sym(cur.slice(start, cur.pos).to_string()))
        }
        Some(_) => cur.error("expected a datum"),
    }
}

/// Rule patterns and templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Lit(Datum),
    Pair(Box<Term>, Box<Term>),
    SetLit(Vec<Term>),
    /// Integer addition or set union.
    Add(Box<Term>, Box<Term>),
    /// Integer subtraction or set difference.
    Sub(Box<Term>, Box<Term>),
    /// Least first component among the pairs of a set.
    MinIndex(Box<Term>),
}

impl Term {
    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Lit(_) => {}
            Term::Pair(a, b) | Term::Add(a, b) | Term::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Term::SetLit(items) => items.iter().for_each(|t| t.vars(out)),
            Term::MinIndex(t) => t.vars(out),
        }
    }

    fn is_ground(&self, b: &Bindings) -> bool {
        let mut vs = BTreeSet::new();
        self.vars(&mut vs);
        vs.iter().all(|v| b.contains_key(v))
    }

    /// Evaluates a term whose variables are all bound.
    fn eval(&self, b: &Bindings) -> Option<Datum> {
        Some(match self {
            Term::Var(v) => b.get(v)?.clone(),
            Term::Lit(d) => d.clone(),
            Term::Pair(x, y) => Datum::pair(x.eval(b)?, y.eval(b)?),
            Term::SetLit(items) => Datum::Set(items.iter().map(|t| t.eval(b)).collect::<Option<_>>()?),
            Term::Add(x, y) => match (x.eval(b)?, y.eval(b)?) {
                (Datum::Int(p), Datum::Int(q)) => Datum::Int(p.checked_add(q)?),
                (Datum::Set(p), Datum::Set(q)) => Datum::Set(p.union(&q).cloned().collect()),
                _ => return None,
            },
            Term::Sub(x, y) => match (x.eval(b)?, y.eval(b)?) {
                (Datum::Int(p), Datum::Int(q)) => Datum::Int(p.checked_sub(q)?),
                (Datum::Set(p), Datum::Set(q)) => Datum::Set(p.difference(&q).cloned().collect()),
                _ => return None,
            },
            Term::MinIndex(t) => match t.eval(b)? {
                Datum::Set(items) => items
                    .iter()
                    .map(|d| match d {
                        Datum::Pair(i, _) => Some((**i).clone()),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()?
                    .into_iter()
                    .min()?,
                _ => return None,
            },
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Lit(Datum::Sym(s)) => write!(f, "\"{s}\""),
            Term::Lit(d) => write!(f, "{d}"),
            Term::Pair(a, b) => write!(f, "({a},{b})"),
            Term::SetLit(items) => {
                f.write_str("{")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("}")
            }
            Term::Add(a, b) => write!(f, "{a}+{}", Paren(b)),
            Term::Sub(a, b) => write!(f, "{a}-{}", Paren(b)),
            Term::MinIndex(t) => write!(f, "minidx({t})"),
        }
    }
}

struct Paren<'a>(&'a Term);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Add(..) | Term::Sub(..) => write!(f, "({})", self.0),
            t => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    In(Term, Term),
    Eq(Term, Term),
    Ne(Term, Term),
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::In(a, b) => write!(f, "{a} in {b}"),
            Guard::Eq(a, b) => write!(f, "{a} = {b}"),
            Guard::Ne(a, b) => write!(f, "{a} != {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub west: Term,
    pub north: Term,
    pub east: Term,
    pub south: Term,
    pub guards: Vec<Guard>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{} | {}> -> <{} | {}>", self.west, self.north, self.east, self.south)?;
        for (i, g) in self.guards.iter().enumerate() {
            f.write_str(if i == 0 { " where " } else { ", " })?;
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

type Bindings = BTreeMap<String, Datum>;

#[derive(Debug, Clone)]
enum Constraint {
    Match(Term, Datum),
    In(Term, Term),
    Same(Term, Term),
    Differ(Term, Term),
}

/// Backtracking search for bindings satisfying every constraint.
/// Structural patterns bind variables; arithmetic and guards wait until
/// their variables are bound.
fn solve_constraints(b: Bindings, mut pending: Vec<Constraint>, found: &mut dyn FnMut(&Bindings) -> bool) -> bool {
    let mut b = b;
    loop {
        let mut progressed = false;
        let mut i = 0;
        while i < pending.len() {
            let step = match &pending[i] {
                Constraint::Match(t, d) => step_match(t, d, &mut b),
                Constraint::Same(x, y) => {
                    if x.is_ground(&b) {
                        match x.eval(&b) {
                            Some(v) => Step::Replace(vec![Constraint::Match(y.clone(), v)]),
                            None => Step::Fail,
                        }
                    } else if y.is_ground(&b) {
                        match y.eval(&b) {
                            Some(v) => Step::Replace(vec![Constraint::Match(x.clone(), v)]),
                            None => Step::Fail,
                        }
                    } else {
                        Step::Wait
                    }
                }
                Constraint::Differ(x, y) => {
                    if x.is_ground(&b) && y.is_ground(&b) {
                        match (x.eval(&b), y.eval(&b)) {
                            (Some(p), Some(q)) if p != q => Step::Replace(vec![]),
                            _ => Step::Fail,
                        }
                    } else {
                        Step::Wait
                    }
                }
                Constraint::In(x, s) => {
                    if !s.is_ground(&b) {
                        Step::Wait
                    } else {
                        match s.eval(&b) {
                            Some(Datum::Set(items)) => {
                                if x.is_ground(&b) {
                                    match x.eval(&b) {
                                        Some(v) if items.contains(&v) => Step::Replace(vec![]),
                                        _ => Step::Fail,
                                    }
                                } else {
                                    Step::Branch(x.clone(), items.into_iter().collect())
                                }
                            }
                            _ => Step::Fail,
                        }
                    }
                }
            };
            match step {
                Step::Fail => return false,
                Step::Wait => i += 1,
                Step::Replace(new) => {
                    pending.swap_remove(i);
                    pending.extend(new);
                    progressed = true;
                }
                Step::Branch(x, options) => {
                    pending.swap_remove(i);
                    for v in options {
                        let mut next = pending.clone();
                        next.push(Constraint::Match(x.clone(), v));
                        if solve_constraints(b.clone(), next, found) {
                            return true;
                        }
                    }
                    return false;
                }
            }
        }
        if pending.is_empty() {
            return found(&b);
        }
        if !progressed {
            return false;
        }
    }
}

enum Step {
    Fail,
    Wait,
    Replace(Vec<Constraint>),
    Branch(Term, Vec<Datum>),
}

fn step_match(t: &Term, d: &Datum, b: &mut Bindings) -> Step {
    match t {
        Term::Var(v) => match b.get(v) {
            Some(bound) if bound == d => Step::Replace(vec![]),
            Some(_) => Step::Fail,
            None => {
                b.insert(v.clone(), d.clone());
                Step::Replace(vec![])
            }
        },
        Term::Lit(l) => {
            if l == d {
                Step::Replace(vec![])
            } else {
                Step::Fail
            }
        }
        Term::Pair(x, y) => match d {
            Datum::Pair(p, q) => Step::Replace(vec![
                Constraint::Match((**x).clone(), (**p).clone()),
                Constraint::Match((**y).clone(), (**q).clone()),
            ]),
            _ => Step::Fail,
        },
        Term::SetLit(items) if !t.is_ground(b) => match d {
            Datum::Set(s) if items.len() == 1 && s.len() == 1 => {
                Step::Replace(vec![Constraint::Match(items[0].clone(), s.iter().next().unwrap().clone())])
            }
            Datum::Set(s) if items.is_empty() && s.is_empty() => Step::Replace(vec![]),
            Datum::Set(_) if items.len() > 1 => Step::Wait,
            _ => Step::Fail,
        },
        _ => {
            if t.is_ground(b) {
                match t.eval(b) {
                    Some(v) if &v == d => Step::Replace(vec![]),
                    _ => Step::Fail,
                }
            } else {
                Step::Wait
            }
        }
    }
}

impl Rule {
    fn guard_constraints(&self) -> Vec<Constraint> {
        self.guards
            .iter()
            .map(|g| match g {
                Guard::In(x, s) => Constraint::In(x.clone(), s.clone()),
                Guard::Eq(x, y) => Constraint::Same(x.clone(), y.clone()),
                Guard::Ne(x, y) => Constraint::Differ(x.clone(), y.clone()),
            })
            .collect()
    }

    pub fn check(&self, west: &Datum, north: &Datum, east: &Datum, south: &Datum) -> bool {
        let mut pending = vec![
            Constraint::Match(self.west.clone(), west.clone()),
            Constraint::Match(self.north.clone(), north.clone()),
        ];
        pending.extend(self.guard_constraints());
        pending.push(Constraint::Match(self.east.clone(), east.clone()));
        pending.push(Constraint::Match(self.south.clone(), south.clone()));
        solve_constraints(Bindings::new(), pending, &mut |_| true)
    }

    /// Every (east, south) pair the rule relates to the given inputs.
    pub fn outputs(&self, west: &Datum, north: &Datum) -> BTreeSet<(Datum, Datum)> {
        let mut pending = vec![
            Constraint::Match(self.west.clone(), west.clone()),
            Constraint::Match(self.north.clone(), north.clone()),
        ];
        pending.extend(self.guard_constraints());
        let mut out = BTreeSet::new();
        solve_constraints(Bindings::new(), pending, &mut |b| {
            if let (Some(e), Some(s)) = (self.east.eval(b), self.south.eval(b)) {
                out.insert((e, s));
            }
            false
        });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataModule {
    pub name: String,
    pub rules: Vec<Rule>,
}

impl DataModule {
    /// True when some rule relates the inputs to exactly these outputs.
    pub fn check_cell(&self, west: &Datum, north: &Datum, east: &Datum, south: &Datum) -> bool {
        self.rules.iter().any(|r| r.check(west, north, east, south))
    }

    pub fn successors(&self, west: &Datum, north: &Datum) -> BTreeSet<(Datum, Datum)> {
        self.rules.iter().flat_map(|r| r.outputs(west, north)).collect()
    }
}

pub fn check_cell(m: &DataModule, west: &Datum, north: &Datum, east: &Datum, south: &Datum) -> bool {
    m.check_cell(west, north, east, south)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InteractError {
    #[error("line {line}: {err}")]
    Syntax { line: usize, err: SyntaxError },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
}

/// Modules by name, in the `module NAME: <w | n> -> <e | s> where ...`
/// text format. A module with several rules has several lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Library {
    modules: BTreeMap<String, DataModule>,
}

impl Library {
    pub fn parse(text: &str) -> Result<Library, InteractError> {
        let mut lib = Library::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split("--").next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, rule) = parse_rule_line(line).map_err(|err| InteractError::Syntax { line: idx + 1, err })?;
            lib.add_rule(&name, rule);
        }
        Ok(lib)
    }

    pub fn add_rule(&mut self, name: &str, rule: Rule) {
        self.modules
            .entry(name.to_string())
            .or_insert_with(|| DataModule { name: name.to_string(), rules: Vec::new() })
            .rules
            .push(rule);
    }

    pub fn get(&self, name: &str) -> Option<&DataModule> {
        self.modules.get(name)
    }

    pub fn modules(&self) -> impl Iterator<Item = &DataModule> {
        self.modules.values()
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in self.modules.values() {
            for r in &m.rules {
                out.push_str(&format!("module {}: {r}\n", m.name));
            }
        }
        out
    }
}

fn parse_rule_line(line: &str) -> Result<(String, Rule), SyntaxError> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if !cur.rest().starts_with(b"module") {
        return cur.error("expected 'module'");
    }
    cur.pos += "module".len();
    cur.skip_ws();
    let start = cur.pos;
    while cur.peek().is_some_and(|b| b != b':' && !b.is_ascii_whitespace()) {
        cur.bump();
    }
    let name = cur.slice(start, cur.pos).to_string();
    if name.is_empty() {
        return cur.error("expected a module name");
    }
    cur.expect(b':')?;
    let (west, north) = parse_border_pair(&mut cur)?;
    cur.skip_ws();
    if !cur.rest().starts_with(b"->") {
        return cur.error("expected '->'");
    }
    cur.pos += 2;
    let (east, south) = parse_border_pair(&mut cur)?;
    let mut guards = Vec::new();
    cur.skip_ws();
    if cur.rest().starts_with(b"where") {
        cur.pos += "where".len();
        loop {
            guards.push(parse_guard(&mut cur)?);
            if !cur.eat(b',') {
                break;
            }
        }
    }
    cur.skip_ws();
    if !cur.at_end() {
        return cur.error("unexpected input after rule");
    }
    Ok((name, Rule { west, north, east, south, guards }))
}

fn parse_border_pair(cur: &mut Cursor) -> Result<(Term, Term), SyntaxError> {
    cur.expect(b'<')?;
    let a = parse_term(cur)?;
    cur.expect(b'|')?;
    let b = parse_term(cur)?;
    cur.expect(b'>')?;
    Ok((a, b))
}

fn parse_guard(cur: &mut Cursor) -> Result<Guard, SyntaxError> {
    let x = parse_term(cur)?;
    cur.skip_ws();
    let rest = cur.rest();
    if rest.starts_with(b"in") && !rest.get(2).is_some_and(|b| b.is_ascii_alphanumeric()) {
        cur.pos += 2;
        return Ok(Guard::In(x, parse_term(cur)?));
    }
    if rest.starts_with(b"!=") {
        cur.pos += 2;
        return Ok(Guard::Ne(x, parse_term(cur)?));
    }
    if rest.starts_with(b"=") {
        cur.pos += 1;
        return Ok(Guard::Eq(x, parse_term(cur)?));
    }
    cur.error("expected 'in', '=' or '!='")
}

fn parse_term(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    let mut left = parse_term_item(cur)?;
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(b'+') => {
                cur.bump();
                left = Term::Add(Box::new(left), Box::new(parse_term_item(cur)?));
            }
            Some(b'-') if cur.rest().get(1) != Some(&b'>') => {
                cur.bump();
                left = Term::Sub(Box::new(left), Box::new(parse_term_item(cur)?));
            }
            _ => return Ok(left),
        }
    }
}

fn parse_term_item(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    cur.skip_ws();
    match cur.peek() {
        None => cur.error("expected a term but input ended"),
        Some(b'_') => {
            cur.bump();
            Ok(Term::Lit(Datum::Empty))
        }
        Some(b'"') => Ok(Term::Lit(Datum::Sym(parse_quoted(cur)?))),
        Some(b) if b.is_ascii_digit() => Ok(Term::Lit(Datum::Int(parse_int(cur)?))),
        Some(b'(') => {
            cur.bump();
            let a = parse_term(cur)?;
            if cur.eat(b')') {
                return Ok(a);
            }
            cur.expect(b',')?;
            let b = parse_term(cur)?;
            cur.expect(b')')?;
            Ok(Term::Pair(Box::new(a), Box::new(b)))
        }
        Some(b'{') => {
            cur.bump();
            let mut items = Vec::new();
            if !cur.eat(b'}') {
                loop {
                    items.push(parse_term(cur)?);
                    if cur.eat(b'}') {
                        break;
                    }
                    cur.expect(b',')?;
                }
            }
            if items.iter().all(|t| matches!(t, Term::Lit(_))) {
                return Ok(Term::Lit(Datum::Set(
                    items.into_iter().map(|t| if let Term::Lit(d) = t { d } else { unreachable!() }).collect(),
                )));
            }
            Ok(Term::SetLit(items))
        }
        Some(b) if b.is_ascii_alphabetic() => {
            let start = cur.pos;
            while cur.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'\'') {
                cur.bump();
            }
            let name = cur.slice(start, cur.pos).to_string();
            if name == "minidx" {
                cur.expect(b'(')?;
                let t = parse_term(cur)?;
                cur.expect(b')')?;
                return Ok(Term::MinIndex(Box::new(t)));
            }
            if name == "in" || name == "where" {
                return cur.error_at(start, format!("{name:?} is reserved"));
            }
            Ok(Term::Var(name))
        }
        Some(_) => cur.error("expected a term"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataCell {
    pub module: String,
    pub west: Datum,
    pub north: Datum,
    pub east: Datum,
    pub south: Datum,
}

impl DataCell {
    pub fn new(module: &str) -> DataCell {
        DataCell {
            module: module.to_string(),
            west: Datum::Empty,
            north: Datum::Empty,
            east: Datum::Empty,
            south: Datum::Empty,
        }
    }
}

/// A feedback link from a cell's east border to the west border of a cell
/// in a later row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Link {
    pub from: (usize, usize),
    pub to: (usize, usize),
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}).e -> ({},{}).w", self.from.0, self.from.1, self.to.0, self.to.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataScenario {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<DataCell>,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    West,
    North,
    East,
    South,
}

impl Side {
    pub fn short(self) -> &'static str {
        match self {
            Side::West => "w",
            Side::North => "n",
            Side::East => "e",
            Side::South => "s",
        }
    }

    pub fn from_short(s: &str) -> Option<Side> {
        Some(match s {
            "w" => Side::West,
            "n" => Side::North,
            "e" => Side::East,
            "s" => Side::South,
            _ => return None,
        })
    }
}

impl DataScenario {
    pub fn new(rows: usize, cols: usize) -> DataScenario {
        DataScenario { rows, cols, cells: vec![DataCell::new("0"); rows * cols], links: Vec::new() }
    }

    pub fn cell(&self, row: usize, col: usize) -> &DataCell {
        &self.cells[row * self.cols + col]
    }

    pub fn cell_mut(&mut self, row: usize, col: usize) -> &mut DataCell {
        &mut self.cells[row * self.cols + col]
    }

    pub fn border(&self, row: usize, col: usize, side: Side) -> &Datum {
        let c = self.cell(row, col);
        match side {
            Side::West => &c.west,
            Side::North => &c.north,
            Side::East => &c.east,
            Side::South => &c.south,
        }
    }

    fn border_mut(&mut self, row: usize, col: usize, side: Side) -> &mut Datum {
        let c = self.cell_mut(row, col);
        match side {
            Side::West => &mut c.west,
            Side::North => &mut c.north,
            Side::East => &mut c.east,
            Side::South => &mut c.south,
        }
    }

    /// Sets one border datum, on both cells sharing it and across a link.
    pub fn set_border(&mut self, row: usize, col: usize, side: Side, value: Datum) {
        *self.border_mut(row, col, side) = value.clone();
        match side {
            Side::East if col + 1 < self.cols => *self.border_mut(row, col + 1, Side::West) = value.clone(),
            Side::West if col > 0 => *self.border_mut(row, col - 1, Side::East) = value.clone(),
            Side::South if row + 1 < self.rows => *self.border_mut(row + 1, col, Side::North) = value.clone(),
            Side::North if row > 0 => *self.border_mut(row - 1, col, Side::South) = value.clone(),
            _ => {}
        }
        for link in self.links.clone() {
            if side == Side::East && link.from == (row, col) {
                *self.border_mut(link.to.0, link.to.1, Side::West) = value.clone();
            }
            if side == Side::West && link.to == (row, col) {
                *self.border_mut(link.from.0, link.from.1, Side::East) = value.clone();
            }
        }
    }

    /// Cells touching the border, across links included.
    pub fn incident_cells(&self, row: usize, col: usize, side: Side) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::from([(row, col)]);
        match side {
            Side::East if col + 1 < self.cols => {
                out.insert((row, col + 1));
            }
            Side::West if col > 0 => {
                out.insert((row, col - 1));
            }
            Side::South if row + 1 < self.rows => {
                out.insert((row + 1, col));
            }
            Side::North if row > 0 => {
                out.insert((row - 1, col));
            }
            _ => {}
        }
        for link in &self.links {
            if side == Side::East && link.from == (row, col) {
                out.insert(link.to);
            }
            if side == Side::West && link.to == (row, col) {
                out.insert(link.from);
            }
        }
        out
    }

    /// Text form: a `size R C` line, one `cell` line per cell with its
    /// module and four borders, and `link` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("size {} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let cell = self.cell(r, c);
                out.push_str(&format!(
                    "cell {r} {c} {} w={} n={} e={} s={}\n",
                    cell.module, cell.west, cell.north, cell.east, cell.south
                ));
            }
        }
        for l in &self.links {
            out.push_str(&format!("link {l}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<DataScenario, InteractError> {
        let mut scenario: Option<DataScenario> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split("--").next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line_no = idx + 1;
            let fmt_err = |msg: &str| InteractError::Format { line: line_no, msg: msg.to_string() };
            let syn_err = |err| InteractError::Syntax { line: line_no, err };
            let mut words = line.split_whitespace();
            match words.next() {
                Some("size") => {
                    let nums: Vec<usize> =
                        words.map(|w| w.parse()).collect::<Result<_, _>>().map_err(|_| fmt_err("bad size"))?;
                    let [rows, cols] = nums[..] else { return Err(fmt_err("size needs rows and cols")) };
                    scenario = Some(DataScenario::new(rows, cols));
                }
                Some("cell") => {
                    let s = scenario.as_mut().ok_or_else(|| fmt_err("cell before size"))?;
                    let mut cur = Cursor::new(line);
                    cur.pos = 4;
                    let r = parse_index(&mut cur).map_err(syn_err)?;
                    let c = parse_index(&mut cur).map_err(syn_err)?;
                    if r >= s.rows || c >= s.cols {
                        return Err(fmt_err("cell outside the scenario"));
                    }
                    cur.skip_ws();
                    let start = cur.pos;
                    while cur.peek().is_some_and(|b| !b.is_ascii_whitespace()) {
                        cur.bump();
                    }
                    s.cell_mut(r, c).module = cur.slice(start, cur.pos).to_string();
                    loop {
                        cur.skip_ws();
                        if cur.at_end() {
                            break;
                        }
                        let side_start = cur.pos;
                        let side = cur.bump().map(|b| (b as char).to_string()).and_then(|s| Side::from_short(&s));
                        let Some(side) = side else { return Err(fmt_err("expected w=, n=, e= or s=")) };
                        if !cur.eat(b'=') {
                            return Err(syn_err(SyntaxError { offset: side_start, msg: "expected '='".into() }));
                        }
                        let d = parse_datum(&mut cur).map_err(syn_err)?;
                        *s.border_mut(r, c, side) = d;
                    }
                }
                Some("link") => {
                    let s = scenario.as_mut().ok_or_else(|| fmt_err("link before size"))?;
                    let link = parse_link(&line[4..]).ok_or_else(|| fmt_err("expected (r,c).e -> (r,c).w"))?;
                    s.links.push(link);
                }
                _ => return Err(fmt_err("expected size, cell or link")),
            }
        }
        scenario.ok_or(InteractError::Format { line: 0, msg: "missing size line".into() })
    }
}

fn parse_index(cur: &mut Cursor) -> Result<usize, SyntaxError> {
    cur.skip_ws();
    let start = cur.pos;
    while cur.peek().is_some_and(|b| b.is_ascii_digit()) {
        cur.bump();
    }
    cur.slice(start, cur.pos).parse().or_else(|_| cur.error_at(start, "expected an index"))
}

fn parse_link(text: &str) -> Option<Link> {
    let (a, b) = text.split_once("->")?;
    let pos = |s: &str, side: &str| -> Option<(usize, usize)> {
        let s = s.trim().strip_suffix(side)?.strip_prefix('(')?.strip_suffix(')')?;
        let (r, c) = s.split_once(',')?;
        Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
    };
    Some(Link { from: pos(a, ".e")?, to: pos(b, ".w")? })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// No rule of the cell's module relates its borders.
    CellRule { row: usize, col: usize, module: String },
    /// Two adjacent cells disagree on their common border.
    SharedBorder { a: (usize, usize), b: (usize, usize) },
    /// A feedback link's endpoints carry different data, or the link does
    /// not go forward in row order.
    Wiring { link: Link },
}

impl Violation {
    pub fn cells(&self) -> Vec<(usize, usize)> {
        match self {
            Violation::CellRule { row, col, .. } => vec![(*row, *col)],
            Violation::SharedBorder { a, b } => vec![*a, *b],
            Violation::Wiring { link } => vec![link.from, link.to],
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CellRule { row, col, module } => write!(f, "cell ({row},{col}) violates module {module}"),
            Violation::SharedBorder { a, b } => {
                write!(f, "cells ({},{}) and ({},{}) disagree on their common border", a.0, a.1, b.0, b.1)
            }
            Violation::Wiring { link } => write!(f, "link {link} carries different data at its ends"),
        }
    }
}

/// Every violation in the scenario; the scenario is valid iff the list is
/// empty.
pub fn validate_scenario(s: &DataScenario, lib: &Library) -> Result<Vec<Violation>, InteractError> {
    let mut out = Vec::new();
    for r in 0..s.rows {
        for c in 0..s.cols {
            let cell = s.cell(r, c);
            let m = lib.get(&cell.module).ok_or_else(|| InteractError::UnknownModule(cell.module.clone()))?;
            if !m.check_cell(&cell.west, &cell.north, &cell.east, &cell.south) {
                out.push(Violation::CellRule { row: r, col: c, module: cell.module.clone() });
            }
            if c + 1 < s.cols && cell.east != s.cell(r, c + 1).west {
                out.push(Violation::SharedBorder { a: (r, c), b: (r, c + 1) });
            }
            if r + 1 < s.rows && cell.south != s.cell(r + 1, c).north {
                out.push(Violation::SharedBorder { a: (r, c), b: (r + 1, c) });
            }
        }
    }
    for link in &s.links {
        let in_range = |(r, c): (usize, usize)| r < s.rows && c < s.cols;
        let ok = in_range(link.from)
            && in_range(link.to)
            && link.to.0 > link.from.0
            && s.cell(link.from.0, link.from.1).east == s.cell(link.to.0, link.to.1).west;
        if !ok {
            out.push(Violation::Wiring { link: *link });
        }
    }
    Ok(out)
}

/// Fills in a scenario's borders by running its modules row by row from
/// the given external west and north inputs, following links. Returns the
/// first completion found in rule order, or `None` if every branch blocks.
pub fn execute(
    shape: &DataScenario,
    lib: &Library,
    west_inputs: &[Datum],
    north_inputs: &[Datum],
    budget: &Budget,
) -> Result<Option<DataScenario>, InteractError> {
    for cell in &shape.cells {
        lib.get(&cell.module).ok_or_else(|| InteractError::UnknownModule(cell.module.clone()))?;
    }
    let mut s = shape.clone();
    let found = run_cell(&mut s, lib, west_inputs, north_inputs, 0, budget)?;
    Ok(found.then_some(s))
}

fn run_cell(
    s: &mut DataScenario,
    lib: &Library,
    west_inputs: &[Datum],
    north_inputs: &[Datum],
    idx: usize,
    budget: &Budget,
) -> Result<bool, InteractError> {
    if idx == s.rows * s.cols {
        return Ok(true);
    }
    budget.charge(1)?;
    let (r, c) = (idx / s.cols, idx % s.cols);
    let west = if c > 0 {
        s.cell(r, c - 1).east.clone()
    } else if let Some(link) = s.links.iter().find(|l| l.to == (r, c)) {
        s.cell(link.from.0, link.from.1).east.clone()
    } else {
        west_inputs.get(r).cloned().unwrap_or(Datum::Empty)
    };
    let north =
        if r > 0 { s.cell(r - 1, c).south.clone() } else { north_inputs.get(c).cloned().unwrap_or(Datum::Empty) };
    let module = lib.get(&s.cell(r, c).module).expect("checked above");
    for (east, south) in module.successors(&west, &north) {
        let cell = s.cell_mut(r, c);
        cell.west = west.clone();
        cell.north = north.clone();
        cell.east = east;
        cell.south = south;
        if run_cell(s, lib, west_inputs, north_inputs, idx + 1, budget)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The communication-protocol modules. `SR`, `End` and `0` are plumbing
/// cells the scenario uses without a rule of their own.
pub const PROTOCOL_MODULES: &str = r#"
module SK: <x | (i,Y)> -> <(i+1,x) | (i+1, Y+{(i+1,x)})>
module CY: <(i,x) | _> -> <(i,x) | _>
module CN: <(i,x) | _> -> <(i,"?") | _>
module RK: <(i,x) | (U,V)> -> <_ | (U, V+{(i,x)})> where x != "?"
module RK: <(i,"?") | (U,V)> -> <_ | (U+{i}, V)>
module SEnd: <_ | (i,U)> -> <(i,"end") | U>
module REnd: <(n,"end") | (U,V)> -> <i | (U-{i}, V)> where i in U
module REnd: <(n,"end") | ({},V)> -> <"OK" | V>
module RKR: <(i,x) | (U,V)> -> <j | (U-{j}, V+{(i,x)})> where j in U
module RKR: <(i,x) | ({},V)> -> <"OK" | V+{(i,x)}> where x != "?"
module RKR: <(i,"?") | (U,V)> -> <i | (U,V)>
module OS: <_ | V> -> <x | V-{(i,x)}> where (i,x) in V, i = minidx(V)
module SR: <j | Y> -> <(j,x) | Y> where (j,x) in Y
module End: <"OK" | Y> -> <_ | _>
module 0: <_ | _> -> <_ | _>
"#;

pub const PROTOCOL_MODULE_NAMES: [&str; 8] = ["SK", "CY", "CN", "RK", "SEnd", "REnd", "RKR", "OS"];

/// West inputs per row and north inputs per column of the protocol run.
pub fn protocol_inputs() -> (Vec<Datum>, Vec<Datum>) {
    let west = ["a", "b", "c"].iter().map(|s| Datum::sym(s)).collect();
    let north =
        vec![Datum::pair(Datum::Int(0), Datum::set([])), Datum::Empty, Datum::pair(Datum::set([]), Datum::set([]))];
    (west, north)
}

const PROTOCOL_SCENARIO: &str = r#"
size 8 3
cell 0 0 SK   w=a         n=(0,{})                 e=(1,a)    s=(1,{(1,a)})
cell 0 1 CY   w=(1,a)     n=_                      e=(1,a)    s=_
cell 0 2 RK   w=(1,a)     n=({},{})                e=_        s=({},{(1,a)})
cell 1 0 SK   w=b         n=(1,{(1,a)})            e=(2,b)    s=(2,{(1,a),(2,b)})
cell 1 1 CN   w=(2,b)     n=_                      e=(2,?)    s=_
cell 1 2 RK   w=(2,?)     n=({},{(1,a)})           e=_        s=({2},{(1,a)})
cell 2 0 SK   w=c         n=(2,{(1,a),(2,b)})      e=(3,c)    s=(3,{(1,a),(2,b),(3,c)})
cell 2 1 CY   w=(3,c)     n=_                      e=(3,c)    s=_
cell 2 2 RK   w=(3,c)     n=({2},{(1,a)})          e=_        s=({2},{(1,a),(3,c)})
cell 3 0 SEnd w=_         n=(3,{(1,a),(2,b),(3,c)}) e=(3,end) s={(1,a),(2,b),(3,c)}
cell 3 1 CY   w=(3,end)   n=_                      e=(3,end)  s=_
cell 3 2 REnd w=(3,end)   n=({2},{(1,a),(3,c)})    e=2        s=({},{(1,a),(3,c)})
cell 4 0 SR   w=2         n={(1,a),(2,b),(3,c)}    e=(2,b)    s={(1,a),(2,b),(3,c)}
cell 4 1 CY   w=(2,b)     n=_                      e=(2,b)    s=_
cell 4 2 RKR  w=(2,b)     n=({},{(1,a),(3,c)})     e=OK       s={(1,a),(2,b),(3,c)}
cell 5 0 End  w=OK        n={(1,a),(2,b),(3,c)}    e=_        s=_
cell 5 1 0    w=_         n=_                      e=_        s=_
cell 5 2 OS   w=_         n={(1,a),(2,b),(3,c)}    e=a        s={(2,b),(3,c)}
cell 6 0 0    w=_         n=_                      e=_        s=_
cell 6 1 0    w=_         n=_                      e=_        s=_
cell 6 2 OS   w=_         n={(2,b),(3,c)}          e=b        s={(3,c)}
cell 7 0 0    w=_         n=_                      e=_        s=_
cell 7 1 0    w=_         n=_                      e=_        s=_
cell 7 2 OS   w=_         n={(3,c)}                e=c        s={}
link (3,2).e -> (4,0).w
link (4,2).e -> (5,0).w
"#;

pub fn builtin_protocol() -> (Library, DataScenario) {
    let lib = Library::parse(PROTOCOL_MODULES).expect("built-in modules parse");
    let scenario = DataScenario::parse(PROTOCOL_SCENARIO).expect("built-in scenario parses");
    (lib, scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(text: &str) -> Datum {
        Datum::parse(text).unwrap()
    }

    fn module(lib: &Library, name: &str) -> DataModule {
        lib.get(name).unwrap().clone()
    }

    #[test]
    fn datum_syntax() {
        for text in ["_", "a", "(1,a)", "{(1,a),(2,b)}", "({2},{(1,a)})", "a^b^c", "\"x y\"", "?", "-3", "{}"] {
            let v = d(text);
            assert_eq!(d(&v.to_string()), v, "{text}");
        }
        assert_eq!(d("{(2,b),(1,a),(1,a)}"), Datum::set([d("(1,a)"), d("(2,b)")]));
        assert_eq!(d("a^b^c"), Datum::Seq(vec![d("a"), d("b"), d("c")]));
        assert!(Datum::parse("(1,").is_err());
        assert!(Datum::parse("{a").is_err());
    }

    #[test]
    fn send_and_keep() {
        let (lib, _) = builtin_protocol();
        let sk = module(&lib, "SK");
        assert!(sk.check_cell(&d("a"), &d("(0,{})"), &d("(1,a)"), &d("(1,{(1,a)})")));
        assert!(!sk.check_cell(&d("a"), &d("(0,{})"), &d("(0,a)"), &d("(1,{(0,a)})")));
        assert_eq!(sk.successors(&d("b"), &d("(1,{(1,a)})")), BTreeSet::from([(d("(2,b)"), d("(2,{(1,a),(2,b)})"))]));
    }

    #[test]
    fn receive_end() {
        let (lib, _) = builtin_protocol();
        let rend = module(&lib, "REnd");
        let v = d("{(1,a),(3,c)}");
        assert!(rend.check_cell(&d("(3,end)"), &Datum::pair(Datum::set([]), v.clone()), &d("OK"), &v));
        assert!(rend.check_cell(&d("(3,end)"), &d("({2},{(1,a),(3,c)})"), &d("2"), &d("({},{(1,a),(3,c)})")));
        assert!(!rend.check_cell(&d("(3,end)"), &d("({2},{(1,a),(3,c)})"), &d("3"), &d("({},{(1,a),(3,c)})")));
    }

    #[test]
    fn output_stream_takes_minimum() {
        let (lib, _) = builtin_protocol();
        let os = module(&lib, "OS");
        let v = d("{(1,a),(3,c),(2,b)}");
        assert!(os.check_cell(&Datum::Empty, &v, &d("a"), &d("{(3,c),(2,b)}")));
        assert!(!os.check_cell(&Datum::Empty, &v, &d("b"), &d("{(1,a),(3,c)}")));
        assert!(!os.check_cell(&Datum::Empty, &d("{}"), &d("a"), &d("{}")));
    }

    #[test]
    fn channel_modules() {
        let (lib, _) = builtin_protocol();
        assert!(module(&lib, "CN").check_cell(&d("(2,b)"), &Datum::Empty, &d("(2,?)"), &Datum::Empty));
        assert!(!module(&lib, "CN").check_cell(&d("(2,b)"), &Datum::Empty, &d("(2,b)"), &Datum::Empty));
        assert!(module(&lib, "CY").check_cell(&d("(2,b)"), &Datum::Empty, &d("(2,b)"), &Datum::Empty));
        // blank borders match blank patterns only
        assert!(!module(&lib, "CY").check_cell(&d("(2,b)"), &d("x"), &d("(2,b)"), &Datum::Empty));
    }

    #[test]
    fn library_shape() {
        let (lib, _) = builtin_protocol();
        for name in PROTOCOL_MODULE_NAMES {
            assert!(lib.get(name).is_some(), "{name}");
        }
        assert_eq!(lib.len(), PROTOCOL_MODULE_NAMES.len() + 3);
        assert_eq!(Library::parse(&lib.to_text()).unwrap(), lib);
    }

    #[test]
    fn protocol_scenario_is_valid() {
        let (lib, s) = builtin_protocol();
        assert_eq!(validate_scenario(&s, &lib).unwrap(), vec![]);
        assert_eq!(DataScenario::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn corrupted_south_flags_two_cells() {
        let (lib, mut s) = builtin_protocol();
        s.set_border(1, 0, Side::South, d("(2,{(1,a)})"));
        let v = validate_scenario(&s, &lib).unwrap();
        let cells: BTreeSet<_> = v.iter().flat_map(|x| x.cells()).collect();
        assert_eq!(cells, BTreeSet::from([(1, 0), (2, 0)]));
    }

    #[test]
    fn one_sided_change_is_a_shared_border_violation() {
        let (lib, mut s) = builtin_protocol();
        s.cell_mut(0, 1).south = d("x");
        let v = validate_scenario(&s, &lib).unwrap();
        assert!(v.contains(&Violation::SharedBorder { a: (0, 1), b: (1, 1) }));
    }

    #[test]
    fn broken_link_is_a_wiring_violation() {
        let (lib, mut s) = builtin_protocol();
        s.cell_mut(4, 0).west = d("3");
        let v = validate_scenario(&s, &lib).unwrap();
        assert!(v.contains(&Violation::Wiring { link: Link { from: (3, 2), to: (4, 0) } }));
        let mut back = builtin_protocol().1;
        back.links.push(Link { from: (4, 2), to: (1, 0) });
        assert!(validate_scenario(&back, &lib).unwrap().iter().any(|v| matches!(v, Violation::Wiring { .. })));
    }

    #[test]
    fn unknown_module_is_an_error() {
        let (lib, mut s) = builtin_protocol();
        s.cell_mut(0, 0).module = "XX".into();
        assert_eq!(validate_scenario(&s, &lib), Err(InteractError::UnknownModule("XX".into())));
    }

    #[test]
    fn every_rule_is_exercised() {
        let (lib, s) = builtin_protocol();
        let mut used: BTreeSet<(String, usize)> = BTreeSet::new();
        for cell in &s.cells {
            let m = lib.get(&cell.module).unwrap();
            for (i, r) in m.rules.iter().enumerate() {
                if r.check(&cell.west, &cell.north, &cell.east, &cell.south) {
                    used.insert((m.name.clone(), i));
                }
            }
        }
        // rules the scenario does not reach, instantiated with its data
        let extra = [
            ("RK", "(1,a)", "({},{})", "_", "({},{(1,a)})"),
            ("REnd", "(3,end)", "({},{(1,a),(2,b),(3,c)})", "OK", "{(1,a),(2,b),(3,c)}"),
            ("RKR", "(2,b)", "({3},{(1,a)})", "3", "({},{(1,a),(2,b)})"),
            ("RKR", "(2,?)", "({},{(1,a),(3,c)})", "2", "({},{(1,a),(3,c)})"),
        ];
        for (name, w, n, e, so) in extra {
            let m = lib.get(name).unwrap();
            for (i, r) in m.rules.iter().enumerate() {
                if r.check(&d(w), &d(n), &d(e), &d(so)) {
                    used.insert((name.to_string(), i));
                }
            }
        }
        for m in lib.modules() {
            for i in 0..m.rules.len() {
                assert!(used.contains(&(m.name.clone(), i)), "{} rule {i} never satisfied", m.name);
            }
        }
    }

    #[test]
    fn execution_reproduces_the_scenario() {
        let (lib, s) = builtin_protocol();
        let (west, north) = protocol_inputs();
        let got = execute(&s, &lib, &west, &north, &Budget::new(10_000)).unwrap().unwrap();
        assert_eq!(got, s);
        let outputs: Vec<Datum> = (5..8).map(|r| got.cell(r, 2).east.clone()).collect();
        assert_eq!(outputs, vec![d("a"), d("b"), d("c")]);
    }

    #[test]
    fn rule_text_round_trip() {
        let (lib, _) = builtin_protocol();
        let os = &lib.get("OS").unwrap().rules[0];
        assert_eq!(os.to_string(), "<_ | V> -> <x | V-{(i,x)}> where (i,x) in V, i = minidx(V)");
        assert!(Library::parse("module A <x | y> -> <x | y>").is_err());
        assert!(Library::parse("module A: <x | y> -> <x | y> where x").is_err());
    }
}
