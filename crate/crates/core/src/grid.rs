//! Lattice geometry of arbitrary-shape two-dimensional words.
//!
//! A cell `(row, col)` occupies the unit square whose north-west lattice point
//! is `(row, col)`. Rows grow southward and columns grow eastward, so "north"
//! means a smaller row index.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Glyph used for unoccupied positions inside a word's bounding box.
pub const FILLER: char = '.';

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub row: i32,
    pub col: i32,
}

impl Position {
    pub const fn new(row: i32, col: i32) -> Self {
        Position { row, col }
    }

    pub const fn offset(self, drow: i32, dcol: i32) -> Self {
        Position { row: self.row + drow, col: self.col + dcol }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Raw cell map in arbitrary (not necessarily normalized) coordinates.
pub type CellMap = BTreeMap<Position, char>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("a word needs at least one cell")]
    Empty,
    #[error("invalid letter {0:?}: letters are printable ASCII symbols other than '.'")]
    BadLetter(char),
    #[error("cell {0} given twice")]
    DuplicateCell(Position),
    #[error("word spans more than {} rows or columns", u16::MAX)]
    TooLarge,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub fn is_letter(c: char) -> bool {
    c.is_ascii_graphic() && c != FILLER
}

/// Translates a cell map so that its minimum row and column are both zero.
pub fn normalize(cells: &CellMap) -> Result<CellMap, GridError> {
    let min_row = cells.keys().map(|p| p.row).min().ok_or(GridError::Empty)?;
    let min_col = cells.keys().map(|p| p.col).min().ok_or(GridError::Empty)?;
    Ok(cells.iter().map(|(p, &l)| (p.offset(-min_row, -min_col), l)).collect())
}

/// A non-empty, translation-normalized two-dimensional word.
///
/// The cells are kept in a dense row-major grid of the bounding box, with
/// [`FILLER`] marking unoccupied positions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rows: u16,
    cols: u16,
    len: u16,
    grid: Box<[u8]>,
}

impl Word {
    /// Builds a word from cells at arbitrary coordinates, normalizing them.
    pub fn from_cells<I>(cells: I) -> Result<Word, GridError>
    where
        I: IntoIterator<Item = (Position, char)>,
    {
        let mut map = CellMap::new();
        for (p, l) in cells {
            if !is_letter(l) {
                return Err(GridError::BadLetter(l));
            }
            if map.insert(p, l).is_some() {
                return Err(GridError::DuplicateCell(p));
            }
        }
        let map = normalize(&map)?;
        let rows = map.keys().map(|p| p.row).max().unwrap_or(0) as i64 + 1;
        let cols = map.keys().map(|p| p.col).max().unwrap_or(0) as i64 + 1;
        if rows > u16::MAX as i64 || cols > u16::MAX as i64 || map.len() > u16::MAX as usize {
            return Err(GridError::TooLarge);
        }
        let mut grid = vec![FILLER as u8; (rows * cols) as usize];
        for (p, l) in &map {
            grid[p.row as usize * cols as usize + p.col as usize] = *l as u8;
        }
        Ok(Word { rows: rows as u16, cols: cols as u16, len: map.len() as u16, grid: grid.into() })
    }

    pub fn letter(l: char) -> Result<Word, GridError> {
        Word::from_cells([(Position::new(0, 0), l)])
    }

    /// Builds a word from a dense grid whose first row and column are known to
    /// be occupied. Used by the hot composition paths.
    pub(crate) fn from_normalized_grid(rows: usize, cols: usize, grid: Vec<u8>) -> Word {
        debug_assert_eq!(grid.len(), rows * cols);
        let len = grid.iter().filter(|&&b| b != FILLER as u8).count();
        Word { rows: rows as u16, cols: cols as u16, len: len as u16, grid: grid.into() }
    }

    pub fn rows(&self) -> usize {
        self.rows as usize
    }

    pub fn cols(&self) -> usize {
        self.cols as usize
    }

    /// Number of occupied cells.
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.grid
    }

    pub fn get(&self, p: Position) -> Option<char> {
        if p.row < 0 || p.col < 0 || p.row >= self.rows as i32 || p.col >= self.cols as i32 {
            return None;
        }
        let b = self.grid[p.row as usize * self.cols as usize + p.col as usize];
        (b != FILLER as u8).then_some(b as char)
    }

    #[inline]
    pub fn contains(&self, row: i32, col: i32) -> bool {
        row >= 0
            && col >= 0
            && row < self.rows as i32
            && col < self.cols as i32
            && self.grid[row as usize * self.cols as usize + col as usize] != FILLER as u8
    }

    /// Occupied cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Position, char)> + '_ {
        let cols = self.cols as usize;
        self.grid
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != FILLER as u8)
            .map(move |(i, &b)| (Position::new((i / cols) as i32, (i % cols) as i32), b as char))
    }

    pub fn positions(&self) -> BTreeSet<Position> {
        self.cells().map(|(p, _)| p).collect()
    }

    pub fn to_cell_map(&self) -> CellMap {
        self.cells().collect()
    }

    /// Letters of the occupied cells in row-major order.
    pub fn letters(&self) -> String {
        self.cells().map(|(_, l)| l).collect()
    }

    pub fn render_ascii(&self) -> String {
        let mut out = String::with_capacity(self.grid.len() + self.rows as usize);
        for (i, row) in self.grid.chunks(self.cols as usize).enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.extend(row.iter().map(|&b| b as char));
        }
        out
    }

    /// The word text format: a `rows cols` header followed by the ASCII grid.
    pub fn to_text(&self) -> String {
        format!("{} {}\n{}", self.rows, self.cols, self.render_ascii())
    }

    pub fn hv_components(&self) -> Vec<Vec<Position>> {
        hv_components(&self.positions())
    }

    pub fn is_hv_connected(&self) -> bool {
        self.hv_components().len() == 1
    }

    pub fn contour(&self) -> BTreeSet<ContourElement> {
        contour(&self.positions())
    }

    pub fn extreme_cells(&self) -> BTreeSet<Position> {
        extreme_cells(&self.positions())
    }

    /// Contour elements of the selected kind, filtered by the extremeness of
    /// their adjacent inside cells.
    pub fn select(&self, sel: ContourSelector) -> BTreeSet<ContourElement> {
        let extreme = match sel.filter {
            Extremeness::Any => BTreeSet::new(),
            _ => self.extreme_cells(),
        };
        self.contour()
            .into_iter()
            .filter(|e| e.kind == sel.kind)
            .filter(|e| {
                let inside = e.inside_cells(|p| self.contains(p.row, p.col));
                match sel.filter {
                    Extremeness::Any => true,
                    Extremeness::Extreme => inside.iter().all(|p| extreme.contains(p)),
                    Extremeness::NonExtreme => inside.iter().all(|p| !extreme.contains(p)),
                }
            })
            .collect()
    }

    /// Sorted loci of [`Word::select`], computed directly on the dense grid.
    pub fn select_loci(&self, sel: ContourSelector) -> Vec<Locus> {
        let rows = self.rows as i32;
        let cols = self.cols as i32;
        let inside = |r: i32, c: i32| self.contains(r, c);
        let extreme_at = |r: i32, c: i32| {
            let mut n = 0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if (dr != 0 || dc != 0) && inside(r + dr, c + dc) {
                        n += 1;
                    }
                }
            }
            n <= 1
        };
        let keep = |cells: &[(i32, i32)]| match sel.filter {
            Extremeness::Any => true,
            Extremeness::Extreme => cells.iter().all(|&(r, c)| !inside(r, c) || extreme_at(r, c)),
            Extremeness::NonExtreme => cells.iter().all(|&(r, c)| !inside(r, c) || !extreme_at(r, c)),
        };
        let mut out = Vec::new();
        use ElementKind::*;
        match sel.kind {
            SideW | SideN | SideE | SideS => {
                for r in 0..rows {
                    for c in 0..cols {
                        if !inside(r, c) {
                            continue;
                        }
                        let (out_cell, locus) = match sel.kind {
                            SideW => ((r, c - 1), Locus::vertical(r, c)),
                            SideE => ((r, c + 1), Locus::vertical(r, c + 1)),
                            SideN => ((r - 1, c), Locus::horizontal(r, c)),
                            _ => ((r + 1, c), Locus::horizontal(r + 1, c)),
                        };
                        if !inside(out_cell.0, out_cell.1) && keep(&[(r, c)]) {
                            out.push(locus);
                        }
                    }
                }
            }
            _ => {
                for r in 0..=rows {
                    for c in 0..=cols {
                        let quad = Quad {
                            tl: inside(r - 1, c - 1),
                            tr: inside(r - 1, c),
                            bl: inside(r, c - 1),
                            br: inside(r, c),
                        };
                        if quad.matches(sel.kind) && keep(&[(r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c)]) {
                            out.push(Locus::point(r, c));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

impl Ord for Word {
    /// Cell count first, then the row-major grid text, then the shape.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| self.grid.cmp(&other.grid)).then_with(|| self.rows.cmp(&other.rows))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({:?})", self.render_ascii().replace('\n', "/"))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_ascii())
    }
}

/// Parses one or more words in the word text format. Blocks are separated by
/// blank lines; lines starting with `#` are ignored.
pub fn parse_words(text: &str) -> Result<Vec<Word>, GridError> {
    let mut words = Vec::new();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim_start().starts_with('#'));
    while let Some((idx, header)) = lines.by_ref().find(|(_, l)| !l.trim().is_empty()) {
        let err = |line: usize, msg: &str| GridError::Parse { line: line + 1, msg: msg.into() };
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(idx, "expected `rows cols` header")))
            .collect::<Result<_, _>>()?;
        let [rows, cols] = dims[..] else {
            return Err(err(idx, "expected `rows cols` header"));
        };
        let mut cells = Vec::new();
        for r in 0..rows {
            let (li, line) = lines.next().ok_or_else(|| err(idx + r, "missing grid row"))?;
            let line = line.trim_end();
            if line.chars().count() != cols {
                return Err(err(li, &format!("expected {cols} columns")));
            }
            for (c, ch) in line.chars().enumerate() {
                if ch == FILLER {
                    continue;
                }
                if !is_letter(ch) {
                    return Err(GridError::BadLetter(ch));
                }
                cells.push((Position::new(r as i32, c as i32), ch));
            }
        }
        words.push(Word::from_cells(cells)?);
    }
    Ok(words)
}

/// Maximal 4-connected components, each sorted, listed by their first cell.
pub fn hv_components(cells: &BTreeSet<Position>) -> Vec<Vec<Position>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in cells {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for q in [p.offset(-1, 0), p.offset(1, 0), p.offset(0, -1), p.offset(0, 1)] {
                if cells.contains(&q) && seen.insert(q) {
                    comp.push(q);
                    stack.push(q);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Cells with at most one occupied cell among their eight neighbours.
pub fn extreme_cells(cells: &BTreeSet<Position>) -> BTreeSet<Position> {
    cells
        .iter()
        .copied()
        .filter(|p| {
            let mut n = 0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if (dr != 0 || dc != 0) && cells.contains(&p.offset(dr, dc)) {
                        n += 1;
                    }
                }
            }
            n <= 1
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    SideW,
    SideN,
    SideE,
    SideS,
    LandNw,
    LandNe,
    LandSw,
    LandSe,
    GolfNw,
    GolfNe,
    GolfSw,
    GolfSe,
}

impl ElementKind {
    pub const ALL: [ElementKind; 12] = [
        ElementKind::SideW,
        ElementKind::SideN,
        ElementKind::SideE,
        ElementKind::SideS,
        ElementKind::LandNw,
        ElementKind::LandNe,
        ElementKind::LandSw,
        ElementKind::LandSe,
        ElementKind::GolfNw,
        ElementKind::GolfNe,
        ElementKind::GolfSw,
        ElementKind::GolfSe,
    ];

    /// Short name as written in restrictions: `w`, `nw`, `nw'`, ...
    pub fn name(self) -> &'static str {
        use ElementKind::*;
        match self {
            SideW => "w",
            SideN => "n",
            SideE => "e",
            SideS => "s",
            LandNw => "nw",
            LandNe => "ne",
            LandSw => "sw",
            LandSe => "se",
            GolfNw => "nw'",
            GolfNe => "ne'",
            GolfSw => "sw'",
            GolfSe => "se'",
        }
    }

    pub fn from_name(name: &str) -> Option<ElementKind> {
        ElementKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_side(self) -> bool {
        matches!(self, ElementKind::SideW | ElementKind::SideN | ElementKind::SideE | ElementKind::SideS)
    }

    pub fn locus_class(self) -> LocusClass {
        match self {
            ElementKind::SideW | ElementKind::SideE => LocusClass::VerticalEdge,
            ElementKind::SideN | ElementKind::SideS => LocusClass::HorizontalEdge,
            _ => LocusClass::Point,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Occupancy of the four cells around a lattice point.
#[derive(Debug, Clone, Copy)]
struct Quad {
    tl: bool,
    tr: bool,
    bl: bool,
    br: bool,
}

impl Quad {
    fn matches(self, kind: ElementKind) -> bool {
        let Quad { tl, tr, bl, br } = self;
        use ElementKind::*;
        match kind {
            LandNw => br && !tl && !tr && !bl,
            LandNe => bl && !tl && !tr && !br,
            LandSw => tr && !tl && !bl && !br,
            LandSe => tl && !tr && !bl && !br,
            // Only three cells are constrained; the diagonal one is free.
            GolfNw => !br && tr && bl,
            GolfNe => !bl && tl && br,
            GolfSw => !tr && tl && br,
            GolfSe => !tl && tr && bl,
            _ => false,
        }
    }
}

/// A contour element. Corners sit on lattice points; a vertical edge is named
/// by its north endpoint and a horizontal edge by its west endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContourElement {
    pub kind: ElementKind,
    pub at: Position,
}

impl ContourElement {
    pub fn locus(self) -> Locus {
        Locus { class: self.kind.locus_class(), row: self.at.row, col: self.at.col }
    }

    /// Cells around the element that satisfy `inside`.
    pub fn inside_cells(self, inside: impl Fn(Position) -> bool) -> Vec<Position> {
        let Position { row: r, col: c } = self.at;
        let candidates: Vec<Position> = match self.kind {
            ElementKind::SideW | ElementKind::SideN => vec![Position::new(r, c)],
            ElementKind::SideE => vec![Position::new(r, c - 1)],
            ElementKind::SideS => vec![Position::new(r - 1, c)],
            _ => {
                vec![Position::new(r - 1, c - 1), Position::new(r - 1, c), Position::new(r, c - 1), Position::new(r, c)]
            }
        };
        candidates.into_iter().filter(|&p| inside(p)).collect()
    }

    pub fn translate(self, drow: i32, dcol: i32) -> ContourElement {
        ContourElement { kind: self.kind, at: self.at.offset(drow, dcol) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocusClass {
    VerticalEdge,
    HorizontalEdge,
    Point,
}

/// Geometric identity of a contour element, ignoring which side of the
/// boundary the word lies on and whether a corner is land or golf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Locus {
    pub class: LocusClass,
    pub row: i32,
    pub col: i32,
}

impl Locus {
    pub const fn vertical(row: i32, col: i32) -> Self {
        Locus { class: LocusClass::VerticalEdge, row, col }
    }

    pub const fn horizontal(row: i32, col: i32) -> Self {
        Locus { class: LocusClass::HorizontalEdge, row, col }
    }

    pub const fn point(row: i32, col: i32) -> Self {
        Locus { class: LocusClass::Point, row, col }
    }

    #[inline]
    pub fn shifted(self, drow: i32, dcol: i32) -> Self {
        Locus { class: self.class, row: self.row + drow, col: self.col + dcol }
    }
}

/// Full contour of a cell set at arbitrary coordinates.
pub fn contour(cells: &BTreeSet<Position>) -> BTreeSet<ContourElement> {
    let mut out = BTreeSet::new();
    let (Some(first), Some(_)) = (cells.first(), cells.last()) else {
        return out;
    };
    let inside = |r: i32, c: i32| cells.contains(&Position::new(r, c));
    for &p in cells {
        let (r, c) = (p.row, p.col);
        if !inside(r, c - 1) {
            out.insert(ContourElement { kind: ElementKind::SideW, at: Position::new(r, c) });
        }
        if !inside(r - 1, c) {
            out.insert(ContourElement { kind: ElementKind::SideN, at: Position::new(r, c) });
        }
        if !inside(r, c + 1) {
            out.insert(ContourElement { kind: ElementKind::SideE, at: Position::new(r, c + 1) });
        }
        if !inside(r + 1, c) {
            out.insert(ContourElement { kind: ElementKind::SideS, at: Position::new(r + 1, c) });
        }
    }
    let min_row = first.row;
    let max_row = cells.last().map(|p| p.row).unwrap_or(min_row);
    let min_col = cells.iter().map(|p| p.col).min().unwrap_or(0);
    let max_col = cells.iter().map(|p| p.col).max().unwrap_or(0);
    for r in min_row..=max_row + 1 {
        for c in min_col..=max_col + 1 {
            let quad = Quad { tl: inside(r - 1, c - 1), tr: inside(r - 1, c), bl: inside(r, c - 1), br: inside(r, c) };
            for kind in &ElementKind::ALL[4..] {
                if quad.matches(*kind) {
                    out.insert(ContourElement { kind: *kind, at: Position::new(r, c) });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Extremeness {
    #[default]
    Any,
    Extreme,
    NonExtreme,
}

/// An element kind plus an extremeness filter, written `nw`, `xnw`, `!xnw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContourSelector {
    pub kind: ElementKind,
    pub filter: Extremeness,
}

impl ContourSelector {
    pub const fn any(kind: ElementKind) -> Self {
        ContourSelector { kind, filter: Extremeness::Any }
    }
}

impl fmt::Display for ContourSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.filter {
            Extremeness::Any => {}
            Extremeness::Extreme => f.write_str("x")?,
            Extremeness::NonExtreme => f.write_str("!x")?,
        }
        f.write_str(self.kind.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(cells: &[(i32, i32, char)]) -> Word {
        Word::from_cells(cells.iter().map(|&(r, c, l)| (Position::new(r, c), l))).unwrap()
    }

    fn kinds(w: &Word, kind: ElementKind) -> usize {
        w.contour().iter().filter(|e| e.kind == kind).count()
    }

    #[test]
    fn normalize_examples() {
        let m: CellMap = [(Position::new(5, 7), 'a')].into();
        assert_eq!(normalize(&m).unwrap(), [(Position::new(0, 0), 'a')].into());
        let m: CellMap = [(Position::new(0, 0), 'a'), (Position::new(0, 1), 'b')].into();
        assert_eq!(normalize(&m).unwrap(), m);
        let m: CellMap = [(Position::new(-2, 3), 'a'), (Position::new(-1, 3), 'b')].into();
        assert_eq!(normalize(&m).unwrap(), [(Position::new(0, 0), 'a'), (Position::new(1, 0), 'b')].into());
        assert_eq!(normalize(&CellMap::new()), Err(GridError::Empty));
        assert_eq!(Word::from_cells([]), Err(GridError::Empty));
    }

    #[test]
    fn letters_are_validated() {
        assert_eq!(Word::letter('.'), Err(GridError::BadLetter('.')));
        assert_eq!(Word::letter(' '), Err(GridError::BadLetter(' ')));
        let p = Position::new(0, 0);
        assert_eq!(Word::from_cells([(p, 'a'), (p, 'b')]), Err(GridError::DuplicateCell(p)));
    }

    #[test]
    fn hv_component_counts() {
        assert_eq!(word(&[(0, 0, 'a')]).hv_components().len(), 1);
        assert_eq!(word(&[(0, 0, 'a'), (1, 1, 'a')]).hv_components().len(), 2);
        // One 8-connected piece without holes that falls into three
        // hv-components, as in a sample arbitrary-shape word.
        let w = word(&[(0, 0, 'a'), (1, 1, 'c'), (1, 2, 'b'), (2, 3, 'a')]);
        assert_eq!(w.hv_components().len(), 3);
    }

    #[test]
    fn contour_single_cell() {
        let w = word(&[(0, 0, 'a')]);
        let c = w.contour();
        assert_eq!(c.len(), 8);
        for k in &ElementKind::ALL[..8] {
            assert_eq!(kinds(&w, *k), 1, "{k}");
        }
    }

    #[test]
    fn contour_horizontal_bar() {
        let w = word(&[(0, 0, 'a'), (0, 1, 'b')]);
        assert_eq!(kinds(&w, ElementKind::SideW), 1);
        assert_eq!(kinds(&w, ElementKind::SideE), 1);
        assert_eq!(kinds(&w, ElementKind::SideN), 2);
        assert_eq!(kinds(&w, ElementKind::SideS), 2);
        let land = ElementKind::ALL[4..8].iter().map(|k| kinds(&w, *k)).sum::<usize>();
        let golf = ElementKind::ALL[8..].iter().map(|k| kinds(&w, *k)).sum::<usize>();
        assert_eq!((land, golf), (4, 0));
    }

    #[test]
    fn contour_l_shape_has_one_golf_corner() {
        let w = word(&[(0, 0, 'a'), (1, 0, 'a'), (1, 1, 'a')]);
        let golf: Vec<_> = w.contour().into_iter().filter(|e| e.kind >= ElementKind::GolfNw).collect();
        assert_eq!(golf, vec![ContourElement { kind: ElementKind::GolfSw, at: Position::new(1, 1) }]);
    }

    #[test]
    fn diagonal_touch_is_a_golf_corner_on_both_sides() {
        let w = word(&[(0, 1, 'a'), (1, 0, 'a')]);
        let at_touch: BTreeSet<_> = w
            .contour()
            .into_iter()
            .filter(|e| e.at == Position::new(1, 1) && !e.kind.is_side())
            .map(|e| e.kind)
            .collect();
        assert_eq!(at_touch, [ElementKind::GolfNw, ElementKind::GolfSe].into());
    }

    #[test]
    fn hole_boundaries_are_contour() {
        let mut cells = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                if (r, c) != (1, 1) {
                    cells.push((r, c, 'a'));
                }
            }
        }
        let w = word(&cells);
        // outer 3 + hole 1 for each side kind
        assert_eq!(kinds(&w, ElementKind::SideN), 4);
        assert_eq!(kinds(&w, ElementKind::SideS), 4);
        // hole corners are golf corners
        assert_eq!(ElementKind::ALL[8..].iter().map(|k| kinds(&w, *k)).sum::<usize>(), 4);
    }

    #[test]
    fn extreme_cells_examples() {
        let single = word(&[(0, 0, 'a')]);
        assert_eq!(single.extreme_cells(), [Position::new(0, 0)].into());
        let bar = word(&[(0, 0, 'a'), (0, 1, 'a'), (0, 2, 'a')]);
        assert_eq!(bar.extreme_cells(), [Position::new(0, 0), Position::new(0, 2)].into());
        let square = word(&[(0, 0, 'a'), (0, 1, 'a'), (1, 0, 'a'), (1, 1, 'a')]);
        assert!(square.extreme_cells().is_empty());
    }

    #[test]
    fn select_examples() {
        let bar = word(&[(0, 0, 'a'), (0, 1, 'a'), (0, 2, 'a')]);
        let xw = ContourSelector { kind: ElementKind::SideW, filter: Extremeness::Extreme };
        assert_eq!(bar.select(xw), [ContourElement { kind: ElementKind::SideW, at: Position::new(0, 0) }].into());
        let square = word(&[(0, 0, 'a'), (0, 1, 'a'), (1, 0, 'a'), (1, 1, 'a')]);
        let xnw = ContourSelector { kind: ElementKind::LandNw, filter: Extremeness::Extreme };
        assert!(square.select(xnw).is_empty());
        let single = word(&[(0, 0, 'a')]);
        assert_eq!(
            single.select(ContourSelector::any(ElementKind::LandSe)),
            [ContourElement { kind: ElementKind::LandSe, at: Position::new(1, 1) }].into()
        );
        // non-extreme north sides of the bar: only the middle cell's
        let nn = ContourSelector { kind: ElementKind::SideN, filter: Extremeness::NonExtreme };
        assert_eq!(bar.select(nn), [ContourElement { kind: ElementKind::SideN, at: Position::new(0, 1) }].into());
    }

    #[test]
    fn select_loci_matches_select() {
        let w = word(&[(0, 1, 'a'), (1, 0, 'a'), (1, 1, 'b'), (2, 1, 'a'), (2, 3, 'c')]);
        for kind in ElementKind::ALL {
            for filter in [Extremeness::Any, Extremeness::Extreme, Extremeness::NonExtreme] {
                let sel = ContourSelector { kind, filter };
                let slow: Vec<Locus> = w.select(sel).into_iter().map(|e| e.locus()).collect();
                assert_eq!(w.select_loci(sel), slow, "{sel}");
            }
        }
    }

    #[test]
    fn render_examples() {
        assert_eq!(word(&[(0, 0, 'a')]).render_ascii(), "a");
        assert_eq!(word(&[(0, 0, 'a'), (1, 1, 'b')]).render_ascii(), "a.\n.b");
        assert_eq!(word(&[(0, 0, 'a'), (0, 1, 'b')]).render_ascii(), "ab");
    }

    #[test]
    fn word_text_roundtrip() {
        let w = word(&[(0, 0, 'a'), (1, 1, 'b'), (2, 0, 'c')]);
        let text = format!("{}\n\n{}\n", w.to_text(), Word::letter('x').unwrap().to_text());
        let parsed = parse_words(&text).unwrap();
        assert_eq!(parsed, vec![w, Word::letter('x').unwrap()]);
        assert!(matches!(parse_words("2 2\nab\n"), Err(GridError::Parse { .. })));
        assert!(matches!(parse_words("1 2\na\n"), Err(GridError::Parse { .. })));
    }

    #[test]
    fn word_order_is_count_then_text() {
        let a = word(&[(0, 0, 'a')]);
        let ab = word(&[(0, 0, 'a'), (0, 1, 'b')]);
        let a_b = word(&[(0, 0, 'a'), (1, 0, 'b')]);
        assert!(a < ab);
        assert!(ab < a_b);
    }
}
