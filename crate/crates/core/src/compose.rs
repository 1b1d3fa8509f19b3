//! Restricted composition of words: boolean formulas over contour
//! comparisons, placement search, and the lifts to languages.
//!
//! A restriction compares a selection from the left operand's contour with a
//! selection from the right operand's contour, both taken on the operands
//! alone and then placed in a common frame. Elements are compared by locus:
//! sides by edge regardless of w/e or n/s, corners by lattice point
//! regardless of land or golf.

use std::collections::BTreeSet;
use std::fmt;

use crate::bounds::{Bounds, Budget, BudgetExhausted};
use crate::grid::{ContourSelector, ElementKind, Extremeness, Locus, Word, FILLER};
use crate::syntax::{Cursor, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompareOp {
    /// `=`
    Equal,
    /// `<`: left selection included in right selection.
    Included,
    /// `>`: converse of `<`.
    Includes,
    /// `#`: non-empty intersection.
    Meets,
}

impl CompareOp {
    pub fn symbol(self) -> char {
        match self {
            CompareOp::Equal => '=',
            CompareOp::Included => '<',
            CompareOp::Includes => '>',
            CompareOp::Meets => '#',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparison {
    pub left: ContourSelector,
    pub op: CompareOp,
    pub right: ContourSelector,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.left, self.op.symbol(), self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Restriction {
    True,
    Atom(Comparison),
    Not(Box<Restriction>),
    And(Box<Restriction>, Box<Restriction>),
    Or(Box<Restriction>, Box<Restriction>),
}

impl Restriction {
    pub fn atom(left: ContourSelector, op: CompareOp, right: ContourSelector) -> Restriction {
        Restriction::Atom(Comparison { left, op, right })
    }

    pub fn and(a: Restriction, b: Restriction) -> Restriction {
        Restriction::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Restriction, b: Restriction) -> Restriction {
        Restriction::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Restriction) -> Restriction {
        Restriction::Not(Box::new(a))
    }

    pub fn parse(text: &str) -> Result<Restriction, SyntaxError> {
        let mut cur = Cursor::new(text);
        let r = parse_or(&mut cur)?;
        cur.skip_ws();
        if !cur.at_end() {
            return cur.error("unexpected trailing input");
        }
        Ok(r)
    }

    pub fn selectors(&self) -> BTreeSet<ContourSelector> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.insert(a.left);
            out.insert(a.right);
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Comparison)) {
        match self {
            Restriction::True => {}
            Restriction::Atom(a) => f(a),
            Restriction::Not(a) => a.visit_atoms(f),
            Restriction::And(a, b) | Restriction::Or(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// True if any selector carries an extremeness filter.
    pub fn uses_extreme_cells(&self) -> bool {
        self.selectors().iter().any(|s| s.filter != Extremeness::Any)
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::True => f.write_str("true"),
            Restriction::Atom(a) => write!(f, "{a}"),
            Restriction::Not(a) => write!(f, "!({a})"),
            Restriction::And(a, b) => {
                let wrap_a = matches!(**a, Restriction::Or(..));
                let wrap_b = matches!(**b, Restriction::Or(..) | Restriction::And(..));
                write_wrapped(f, a, wrap_a)?;
                f.write_str(" & ")?;
                write_wrapped(f, b, wrap_b)
            }
            Restriction::Or(a, b) => {
                write!(f, "{a} | ")?;
                write_wrapped(f, b, matches!(**b, Restriction::Or(..)))
            }
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, r: &Restriction, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({r})")
    } else {
        write!(f, "{r}")
    }
}

pub(crate) fn parse_or(cur: &mut Cursor) -> Result<Restriction, SyntaxError> {
    let mut left = parse_and(cur)?;
    while cur.eat(b'|') {
        let right = parse_and(cur)?;
        left = Restriction::or(left, right);
    }
    Ok(left)
}

fn parse_and(cur: &mut Cursor) -> Result<Restriction, SyntaxError> {
    let mut left = parse_unary(cur)?;
    while cur.eat(b'&') {
        let right = parse_unary(cur)?;
        left = Restriction::and(left, right);
    }
    Ok(left)
}

fn is_kind_start(b: Option<u8>) -> bool {
    matches!(b, Some(b'n' | b's' | b'e' | b'w'))
}

/// `!x` or `(!x)` immediately followed by an element kind marks a
/// non-extreme selector rather than a negation.
fn at_non_extreme_prefix(cur: &Cursor) -> Option<usize> {
    let rest = cur.rest();
    if rest.starts_with(b"!x") && is_kind_start(rest.get(2).copied()) {
        Some(2)
    } else if rest.starts_with(b"(!x)") {
        let mut i = 4;
        while rest.get(i).is_some_and(|b| b.is_ascii_whitespace()) {
            i += 1;
        }
        is_kind_start(rest.get(i).copied()).then_some(4)
    } else {
        None
    }
}

pub(crate) fn parse_unary(cur: &mut Cursor) -> Result<Restriction, SyntaxError> {
    cur.skip_ws();
    if at_non_extreme_prefix(cur).is_some() {
        return parse_comparison(cur);
    }
    match cur.peek() {
        Some(b'!') => {
            cur.bump();
            Ok(Restriction::not(parse_unary(cur)?))
        }
        Some(b'(') => {
            let open = cur.pos;
            cur.bump();
            let inner = parse_or(cur)?;
            if !cur.eat(b')') {
                if cur.at_end() {
                    return cur.error_at(open, "unbalanced parenthesis");
                }
                return cur.error("expected ')'");
            }
            Ok(inner)
        }
        None => cur.error("expected a restriction but input ended"),
        _ if cur.rest().starts_with(b"true") => {
            cur.pos += 4;
            Ok(Restriction::True)
        }
        _ => parse_comparison(cur),
    }
}

fn parse_comparison(cur: &mut Cursor) -> Result<Restriction, SyntaxError> {
    let left = parse_selector(cur)?;
    cur.skip_ws();
    let op = match cur.peek() {
        Some(b'=') => CompareOp::Equal,
        Some(b'<') => CompareOp::Included,
        Some(b'>') => CompareOp::Includes,
        Some(b'#') => CompareOp::Meets,
        _ => return cur.error("expected one of '=', '<', '>', '#'"),
    };
    cur.bump();
    let right = parse_selector(cur)?;
    Ok(Restriction::atom(left, op, right))
}

pub(crate) fn parse_selector(cur: &mut Cursor) -> Result<ContourSelector, SyntaxError> {
    cur.skip_ws();
    let filter = if let Some(len) = at_non_extreme_prefix(cur) {
        cur.pos += len;
        cur.skip_ws();
        Extremeness::NonExtreme
    } else if cur.peek() == Some(b'x') {
        cur.bump();
        Extremeness::Extreme
    } else {
        Extremeness::Any
    };
    let start = cur.pos;
    match cur.peek() {
        Some(b'n' | b's') => {
            cur.bump();
            if matches!(cur.peek(), Some(b'w' | b'e')) {
                cur.bump();
            }
        }
        Some(b'w' | b'e') => {
            cur.bump();
        }
        _ => return cur.error("expected a contour selector (w, n, e, s, nw, ne, sw, se, nw', ...)"),
    }
    if cur.peek() == Some(b'\'') {
        cur.bump();
    }
    let name = cur.slice(start, cur.pos);
    match ElementKind::from_name(name) {
        Some(kind) => Ok(ContourSelector { kind, filter }),
        None => cur.error_at(start, format!("unknown selector {name:?}")),
    }
}

/// A selection translated into a common frame.
#[derive(Clone, Copy)]
struct Placed<'a> {
    loci: &'a [Locus],
    dr: i32,
    dc: i32,
}

impl Placed<'_> {
    fn get(&self, i: usize) -> Locus {
        self.loci[i].shifted(self.dr, self.dc)
    }
}

fn set_equal(a: Placed, b: Placed) -> bool {
    a.loci.len() == b.loci.len() && (0..a.loci.len()).all(|i| a.get(i) == b.get(i))
}

/// Both selections are sorted and a uniform shift keeps them sorted, so the
/// comparisons are merge walks.
fn set_subset(a: Placed, b: Placed) -> bool {
    let mut j = 0;
    for i in 0..a.loci.len() {
        let x = a.get(i);
        while j < b.loci.len() && b.get(j) < x {
            j += 1;
        }
        if j == b.loci.len() || b.get(j) != x {
            return false;
        }
        j += 1;
    }
    true
}

fn set_meets(a: Placed, b: Placed) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.loci.len() && j < b.loci.len() {
        let (x, y) = (a.get(i), b.get(j));
        match x.cmp(&y) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Restriction with selectors replaced by slots of a per-word profile.
#[derive(Debug, Clone)]
enum Compiled {
    True,
    Atom { left: usize, op: CompareOp, right: usize },
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn new(r: &Restriction, slots: &[ContourSelector]) -> Compiled {
        let slot = |s: &ContourSelector| slots.iter().position(|x| x == s).expect("selector slot");
        match r {
            Restriction::True => Compiled::True,
            Restriction::Atom(a) => Compiled::Atom { left: slot(&a.left), op: a.op, right: slot(&a.right) },
            Restriction::Not(a) => Compiled::Not(Box::new(Compiled::new(a, slots))),
            Restriction::And(a, b) => {
                Compiled::And(Box::new(Compiled::new(a, slots)), Box::new(Compiled::new(b, slots)))
            }
            Restriction::Or(a, b) => Compiled::Or(Box::new(Compiled::new(a, slots)), Box::new(Compiled::new(b, slots))),
        }
    }

    fn eval(&self, v: &Profile, w: &Profile, dr: i32, dc: i32) -> bool {
        match self {
            Compiled::True => true,
            Compiled::Atom { left, op, right } => {
                let l = Placed { loci: &v.loci[*left], dr: 0, dc: 0 };
                let r = Placed { loci: &w.loci[*right], dr, dc };
                match op {
                    CompareOp::Equal => set_equal(l, r),
                    CompareOp::Included => set_subset(l, r),
                    CompareOp::Includes => set_subset(r, l),
                    CompareOp::Meets => set_meets(l, r),
                }
            }
            Compiled::Not(a) => !a.eval(v, w, dr, dc),
            Compiled::And(a, b) => a.eval(v, w, dr, dc) && b.eval(v, w, dr, dc),
            Compiled::Or(a, b) => a.eval(v, w, dr, dc) || b.eval(v, w, dr, dc),
        }
    }

    /// A superset of the offsets at which the formula can hold, when the
    /// formula pins the offset down; `None` means "no information".
    fn anchors(&self, v: &Profile, w: &Profile) -> Option<Vec<(i32, i32)>> {
        let diff = |a: &Locus, b: &Locus| (a.class == b.class).then_some((a.row - b.row, a.col - b.col));
        match self {
            Compiled::True | Compiled::Not(_) => None,
            Compiled::Atom { left, op, right } => {
                let (l, r) = (&v.loci[*left], &w.loci[*right]);
                match op {
                    CompareOp::Equal | CompareOp::Includes => match r.first() {
                        None if *op == CompareOp::Equal && !l.is_empty() => Some(Vec::new()),
                        None => None,
                        Some(r0) => Some(l.iter().filter_map(|x| diff(x, r0)).collect()),
                    },
                    CompareOp::Included => l.first().map(|l0| r.iter().filter_map(|y| diff(l0, y)).collect()),
                    CompareOp::Meets => Some(l.iter().flat_map(|x| r.iter().filter_map(move |y| diff(x, y))).collect()),
                }
            }
            Compiled::And(a, b) => match (a.anchors(v, w), b.anchors(v, w)) {
                (Some(x), Some(y)) => Some(if x.len() <= y.len() { x } else { y }),
                (x, None) => x,
                (None, y) => y,
            },
            Compiled::Or(a, b) => match (a.anchors(v, w), b.anchors(v, w)) {
                (Some(mut x), Some(y)) => {
                    x.extend(y);
                    Some(x)
                }
                _ => None,
            },
        }
    }
}

/// Sorted loci of each selector slot for one word.
#[derive(Debug, Clone)]
struct Profile {
    loci: Vec<Vec<Locus>>,
}

impl Profile {
    fn new(w: &Word, slots: &[ContourSelector]) -> Profile {
        Profile { loci: slots.iter().map(|s| w.select_loci(*s)).collect() }
    }
}

/// Evaluates a restriction for `w` placed with its origin at `offset` in
/// `v`'s frame. Disjointness and contact are not checked here.
pub fn eval_restriction(r: &Restriction, v: &Word, w: &Word, offset: (i32, i32)) -> bool {
    let slots: Vec<ContourSelector> = r.selectors().into_iter().collect();
    let compiled = Compiled::new(r, &slots);
    compiled.eval(&Profile::new(v, &slots), &Profile::new(w, &slots), offset.0, offset.1)
}

/// Edges and lattice points shared by the two operands' closed regions at a
/// given placement.
pub fn contact_loci(v: &Word, w: &Word, offset: (i32, i32)) -> BTreeSet<Locus> {
    let (dr, dc) = offset;
    let mut out = BTreeSet::new();
    let mut points_v = BTreeSet::new();
    for (p, _) in v.cells() {
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            points_v.insert((p.row + a, p.col + b));
        }
    }
    for (p, _) in w.cells() {
        let (r, c) = (p.row + dr, p.col + dc);
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            if points_v.contains(&(r + a, c + b)) {
                out.insert(Locus::point(r + a, c + b));
            }
        }
        if v.contains(r, c - 1) {
            out.insert(Locus::vertical(r, c));
        }
        if v.contains(r, c + 1) {
            out.insert(Locus::vertical(r, c + 1));
        }
        if v.contains(r - 1, c) {
            out.insert(Locus::horizontal(r, c));
        }
        if v.contains(r + 1, c) {
            out.insert(Locus::horizontal(r + 1, c));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeOptions {
    /// Require the operands' closed regions to share a lattice point.
    /// Turning this off makes composition range over every placement that
    /// fits the bounds.
    pub contact_required: bool,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions { contact_required: true }
    }
}

/// Restricted composition with fixed restriction, bounds and budget.
pub struct Composer<'a> {
    slots: Vec<ContourSelector>,
    compiled: Compiled,
    bounds: Bounds,
    opts: ComposeOptions,
    budget: &'a Budget,
}

impl<'a> Composer<'a> {
    pub fn new(r: &Restriction, bounds: Bounds, opts: ComposeOptions, budget: &'a Budget) -> Composer<'a> {
        let slots: Vec<ContourSelector> = r.selectors().into_iter().collect();
        let compiled = Compiled::new(r, &slots);
        Composer { slots, compiled, bounds, opts, budget }
    }

    fn profiles<'w>(&self, lang: impl IntoIterator<Item = &'w Word>) -> Vec<(&'w Word, Profile)> {
        lang.into_iter().map(|w| (w, Profile::new(w, &self.slots))).collect()
    }

    /// All results of composing every word of `left` with every word of
    /// `right`, within bounds.
    pub fn compose_langs<'w>(
        &self,
        left: impl IntoIterator<Item = &'w Word>,
        right: impl IntoIterator<Item = &'w Word>,
    ) -> Result<BTreeSet<Word>, BudgetExhausted> {
        let left = self.profiles(left);
        let right = self.profiles(right);
        let mut out = BTreeSet::new();
        let mut nodes = 0u64;
        for (v, pv) in &left {
            for (w, pw) in &right {
                if v.len() + w.len() > self.bounds.max_cells {
                    continue;
                }
                nodes += self.compose_pair(v, pv, w, pw, &mut |word| {
                    out.insert(word);
                });
                if nodes > 1 << 14 {
                    self.budget.charge(nodes)?;
                    nodes = 0;
                }
            }
        }
        self.budget.charge(nodes)?;
        Ok(out)
    }

    /// Least superset of `lang` closed under composing any two of its
    /// members, within bounds. Every bracketing of an iterated composition
    /// is included, which makes the operator idempotent.
    pub fn star(&self, lang: &BTreeSet<Word>) -> Result<BTreeSet<Word>, BudgetExhausted> {
        let mut all: BTreeSet<Word> = lang.iter().filter(|w| self.bounds.fits(w)).cloned().collect();
        let mut delta = all.clone();
        while !delta.is_empty() {
            let mut produced = self.compose_langs(&delta, &all)?;
            produced.extend(self.compose_langs(&all, &delta)?);
            delta = produced.into_iter().filter(|w| !all.contains(w)).collect();
            all.extend(delta.iter().cloned());
        }
        Ok(all)
    }

    fn offsets(&self, v: &Word, pv: &Profile, w: &Word, pw: &Profile) -> Vec<(i32, i32)> {
        let (vr, vc) = (v.rows() as i32, v.cols() as i32);
        let (wr, wc) = (w.rows() as i32, w.cols() as i32);
        let (rlo, rhi, clo, chi) = if self.opts.contact_required {
            (-wr, vr, -wc, vc)
        } else {
            let mr = self.bounds.max_rows.min(i32::MAX as usize / 4) as i32;
            let mc = self.bounds.max_cols.min(i32::MAX as usize / 4) as i32;
            (vr - mr, mr - wr, vc - mc, mc - wc)
        };
        match self.compiled.anchors(pv, pw) {
            Some(mut cands) => {
                cands.retain(|&(dr, dc)| dr >= rlo && dr <= rhi && dc >= clo && dc <= chi);
                cands.sort_unstable();
                cands.dedup();
                cands
            }
            None => {
                let mut all = Vec::new();
                for dr in rlo..=rhi {
                    for dc in clo..=chi {
                        all.push((dr, dc));
                    }
                }
                all
            }
        }
    }

    /// Returns the number of placements examined.
    fn compose_pair(&self, v: &Word, pv: &Profile, w: &Word, pw: &Profile, emit: &mut impl FnMut(Word)) -> u64 {
        let offsets = self.offsets(v, pv, w, pw);
        let n = offsets.len() as u64;
        let (vr, vc) = (v.rows() as i32, v.cols() as i32);
        let (wr, wc) = (w.rows() as i32, w.cols() as i32);
        for (dr, dc) in offsets {
            let top = dr.min(0);
            let left = dc.min(0);
            let rows = ((dr + wr).max(vr) - top) as usize;
            let cols = ((dc + wc).max(vc) - left) as usize;
            if !self.bounds.fits_dims(rows, cols, v.len() + w.len()) {
                continue;
            }
            let mut contact = !self.opts.contact_required;
            let mut overlap = false;
            for (p, _) in w.cells() {
                let (r, c) = (p.row + dr, p.col + dc);
                if v.contains(r, c) {
                    overlap = true;
                    break;
                }
                if !contact {
                    contact = (-1..=1).any(|a| (-1..=1).any(|b| v.contains(r + a, c + b)));
                }
            }
            if overlap || !contact || !self.compiled.eval(pv, pw, dr, dc) {
                continue;
            }
            let mut grid = vec![FILLER as u8; rows * cols];
            let put = |grid: &mut Vec<u8>, src: &Word, or: i32, oc: i32| {
                let raw = src.raw();
                for r in 0..src.rows() {
                    for c in 0..src.cols() {
                        let b = raw[r * src.cols() + c];
                        if b != FILLER as u8 {
                            grid[(r as i32 + or) as usize * cols + (c as i32 + oc) as usize] = b;
                        }
                    }
                }
            };
            put(&mut grid, v, -top, -left);
            put(&mut grid, w, dr - top, dc - left);
            emit(Word::from_normalized_grid(rows, cols, grid));
        }
        n
    }
}

/// All restricted compositions of two words, without size bounds.
pub fn compose_words(v: &Word, w: &Word, r: &Restriction) -> BTreeSet<Word> {
    let budget = Budget::new(u64::MAX);
    Composer::new(r, Bounds::unbounded(), ComposeOptions::default(), &budget)
        .compose_langs([v], [w])
        .expect("unlimited budget")
}

pub fn compose_langs(
    l1: &BTreeSet<Word>,
    l2: &BTreeSet<Word>,
    r: &Restriction,
    bounds: &Bounds,
) -> Result<BTreeSet<Word>, BudgetExhausted> {
    let budget = Budget::new(bounds.node_budget);
    Composer::new(r, *bounds, ComposeOptions::default(), &budget).compose_langs(l1, l2)
}

pub fn star(l: &BTreeSet<Word>, r: &Restriction, bounds: &Bounds) -> Result<BTreeSet<Word>, BudgetExhausted> {
    let budget = Budget::new(bounds.node_budget);
    Composer::new(r, *bounds, ComposeOptions::default(), &budget).star(l)
}
