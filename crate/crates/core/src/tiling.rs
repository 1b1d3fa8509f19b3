//! Tiles, self-assembling tile systems and their recognized languages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{Bounds, Budget, BudgetExhausted};
use crate::grid::{is_letter, normalize, CellMap, GridError, Position, Word};

pub type Label = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    West,
    North,
    East,
    South,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::West, Direction::North, Direction::East, Direction::South];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short(self) -> char {
        match self {
            Direction::West => 'w',
            Direction::North => 'n',
            Direction::East => 'e',
            Direction::South => 's',
        }
    }

    /// Offset from a cell to its neighbour across this border.
    pub fn step(self) -> (i32, i32) {
        match self {
            Direction::West => (0, -1),
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::West => Direction::East,
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tile {
    pub letter: char,
    pub west: Label,
    pub north: Label,
    pub east: Label,
    pub south: Label,
}

impl Tile {
    pub fn new(letter: char, west: Label, north: Label, east: Label, south: Label) -> Tile {
        Tile { letter, west, north, east, south }
    }

    pub fn label(&self, dir: Direction) -> Label {
        match dir {
            Direction::West => self.west,
            Direction::North => self.north,
            Direction::East => self.east,
            Direction::South => self.south,
        }
    }

    /// The two-colour tile encoded by a hex digit: its bits, most significant
    /// first, are the west, north, east and south labels.
    pub fn from_hex_digit(d: char) -> Option<Tile> {
        let v = d.to_digit(16)?;
        let letter = std::char::from_digit(v, 16)?;
        Some(Tile::new(letter, (v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1))
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tile {} w={} n={} e={} s={}", self.letter, self.west, self.north, self.east, self.south)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("tile system notation must start with 'F': {0:?}")]
    MissingPrefix(String),
    #[error("invalid hex digit {0:?} in tile system notation")]
    BadDigit(char),
    #[error("tile {0:?} listed twice")]
    DuplicateTile(char),
    #[error("a tile system needs at least one tile")]
    NoTiles,
    #[error("invalid tile letter {0:?}")]
    BadLetter(char),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A self-assembling tile system: tiles plus admissible labels on each of the
/// four external borders of an accepting scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sats {
    tiles: Vec<Tile>,
    external: [BTreeSet<Label>; 4],
}

impl Sats {
    pub fn new(tiles: impl IntoIterator<Item = Tile>, external: [BTreeSet<Label>; 4]) -> Result<Sats, TilingError> {
        let tiles: BTreeSet<Tile> = tiles.into_iter().collect();
        if tiles.is_empty() {
            return Err(TilingError::NoTiles);
        }
        if let Some(t) = tiles.iter().find(|t| !is_letter(t.letter)) {
            return Err(TilingError::BadLetter(t.letter));
        }
        Ok(Sats { tiles: tiles.into_iter().collect(), external })
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn external(&self, dir: Direction) -> &BTreeSet<Label> {
        &self.external[dir.index()]
    }

    pub fn admits(&self, dir: Direction, label: Label) -> bool {
        self.external[dir.index()].contains(&label)
    }

    /// Parses the two-colour notation `Ft1t2...tk` with an optional `.z`
    /// suffix giving one external label per direction.
    pub fn parse_two_color(text: &str) -> Result<Sats, TilingError> {
        let text = text.trim();
        let body = text.strip_prefix('F').ok_or_else(|| TilingError::MissingPrefix(text.into()))?;
        let (digits, ext) = match body.split_once('.') {
            Some((d, z)) => (d, Some(z)),
            None => (body, None),
        };
        let mut tiles = Vec::new();
        let mut seen = BTreeSet::new();
        for ch in digits.chars() {
            let t = Tile::from_hex_digit(ch.to_ascii_lowercase()).ok_or(TilingError::BadDigit(ch))?;
            if !seen.insert(t.letter) {
                return Err(TilingError::DuplicateTile(t.letter));
            }
            tiles.push(t);
        }
        let external = match ext {
            None => std::array::from_fn(|_| BTreeSet::from([0, 1])),
            Some(z) => {
                let mut chars = z.chars();
                let (Some(ch), None) = (chars.next(), chars.next()) else {
                    return Err(TilingError::BadDigit(z.chars().nth(1).unwrap_or('.')));
                };
                let t = Tile::from_hex_digit(ch.to_ascii_lowercase()).ok_or(TilingError::BadDigit(ch))?;
                Direction::ALL.map(|d| BTreeSet::from([t.label(d)]))
            }
        };
        Sats::new(tiles, external)
    }

    /// Parses the tile-system text format:
    ///
    /// ```text
    /// tile a w=8 n=1 e=9 s=2
    /// accept w={7,8} n={1} e={9} s={2}
    /// ```
    ///
    /// or a single `sats F02ac.c` line. `#` and `--` start comments.
    pub fn parse_text(text: &str) -> Result<Sats, TilingError> {
        let mut tiles = Vec::new();
        let mut external: Option<[BTreeSet<Label>; 4]> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| TilingError::Parse { line: idx + 1, msg };
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match head {
                "sats" => return Sats::parse_two_color(rest),
                "tile" => {
                    let mut parts = rest.split_whitespace();
                    let letter_tok = parts.next().ok_or_else(|| err("missing tile letter".into()))?;
                    let mut letters = letter_tok.chars();
                    let (Some(letter), None) = (letters.next(), letters.next()) else {
                        return Err(err(format!("tile letter must be one symbol, got {letter_tok:?}")));
                    };
                    let mut labels = [None; 4];
                    for part in parts {
                        let (dir, val) = parse_assignment(part).ok_or_else(|| err(format!("bad field {part:?}")))?;
                        let val: Label = val.parse().map_err(|_| err(format!("bad label {val:?}")))?;
                        labels[dir.index()] = Some(val);
                    }
                    let [Some(w), Some(n), Some(e), Some(s)] = labels else {
                        return Err(err("tile needs w=, n=, e= and s= labels".into()));
                    };
                    tiles.push(Tile::new(letter, w, n, e, s));
                }
                "accept" => {
                    let mut sets: [Option<BTreeSet<Label>>; 4] = Default::default();
                    for part in split_fields(rest) {
                        let (dir, val) = parse_assignment(&part).ok_or_else(|| err(format!("bad field {part:?}")))?;
                        let inner = val
                            .strip_prefix('{')
                            .and_then(|v| v.strip_suffix('}'))
                            .ok_or_else(|| err(format!("label set must be braced: {val:?}")))?;
                        let set = inner
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse::<Label>().map_err(|_| err(format!("bad label {s:?}"))))
                            .collect::<Result<BTreeSet<_>, _>>()?;
                        sets[dir.index()] = Some(set);
                    }
                    let [Some(w), Some(n), Some(e), Some(s)] = sets else {
                        return Err(err("accept needs w=, n=, e= and s= sets".into()));
                    };
                    external = Some([w, n, e, s]);
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        let external = external.ok_or(TilingError::Parse { line: 0, msg: "missing accept line".into() })?;
        Sats::new(tiles, external)
    }

    /// Reads either two-colour notation or the text format.
    pub fn parse(text: &str) -> Result<Sats, TilingError> {
        let t = text.trim();
        if t.starts_with('F') && !t.contains(char::is_whitespace) {
            Sats::parse_two_color(t)
        } else {
            Sats::parse_text(text)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tiles {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out.push_str("accept");
        for d in Direction::ALL {
            let labels: Vec<String> = self.external(d).iter().map(|l| l.to_string()).collect();
            out.push_str(&format!(" {}={{{}}}", d.short(), labels.join(",")));
        }
        out.push('\n');
        out
    }

    /// True if the scenario uses only this system's tiles, agrees on shared
    /// borders and carries admissible labels on every external border.
    pub fn accepts_scenario(&self, s: &Scenario) -> bool {
        scenario_valid(&self.tiles, s) && accepting(self, s)
    }

    /// Finds an accepting scenario whose stripped word is `w`, trying tiles in
    /// row-major cell order.
    pub fn accepting_witness(&self, w: &Word) -> Option<Scenario> {
        let cells: Vec<(Position, char)> = w.cells().collect();
        let index: BTreeMap<Position, usize> = cells.iter().enumerate().map(|(i, (p, _))| (*p, i)).collect();
        let mut chosen: Vec<Tile> = Vec::with_capacity(cells.len());
        if self.witness_dfs(&cells, &index, &mut chosen) {
            Some(Scenario { cells: cells.iter().map(|(p, _)| *p).zip(chosen).collect() })
        } else {
            None
        }
    }

    fn witness_dfs(
        &self,
        cells: &[(Position, char)],
        index: &BTreeMap<Position, usize>,
        chosen: &mut Vec<Tile>,
    ) -> bool {
        let k = chosen.len();
        if k == cells.len() {
            return true;
        }
        let (p, letter) = cells[k];
        for t in self.tiles.iter().filter(|t| t.letter == letter) {
            let ok = Direction::ALL.iter().all(|&d| {
                let (dr, dc) = d.step();
                match index.get(&p.offset(dr, dc)) {
                    None => self.admits(d, t.label(d)),
                    Some(&j) if j < k => chosen[j].label(d.opposite()) == t.label(d),
                    Some(_) => true,
                }
            });
            if ok {
                chosen.push(*t);
                if self.witness_dfs(cells, index, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    pub fn accepts_word(&self, w: &Word) -> bool {
        self.accepting_witness(w).is_some()
    }
}

fn strip_comment(line: &str) -> &str {
    let cut = [line.find('#'), line.find("--")].into_iter().flatten().min();
    match cut {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_assignment(field: &str) -> Option<(Direction, &str)> {
    let (key, val) = field.split_once('=')?;
    let dir = match key.trim() {
        "w" => Direction::West,
        "n" => Direction::North,
        "e" => Direction::East,
        "s" => Direction::South,
        _ => return None,
    };
    Some((dir, val.trim()))
}

/// Splits `w={1, 2} n={3}` into fields, keeping braced groups together.
fn split_fields(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in text.chars() {
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                continue;
            }
            _ => {}
        }
        if !(ch.is_whitespace() && depth > 0) {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// A word whose cells are tiles. Stored translation-normalized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scenario {
    cells: BTreeMap<Position, Tile>,
}

impl Scenario {
    pub fn new(cells: impl IntoIterator<Item = (Position, Tile)>) -> Result<Scenario, TilingError> {
        let cells: BTreeMap<Position, Tile> = cells.into_iter().collect();
        let letters: CellMap = cells.iter().map(|(p, t)| (*p, t.letter)).collect();
        let normalized = normalize(&letters)?;
        let (dr, dc) = match (letters.keys().next(), normalized.keys().next()) {
            (Some(a), Some(b)) => (b.row - a.row, b.col - a.col),
            _ => (0, 0),
        };
        Ok(Scenario { cells: cells.into_iter().map(|(p, t)| (p.offset(dr, dc), t)).collect() })
    }

    pub fn cells(&self) -> &BTreeMap<Position, Tile> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn tile_at(&self, p: Position) -> Option<&Tile> {
        self.cells.get(&p)
    }

    /// Drops the border labels.
    pub fn strip(&self) -> Word {
        Word::from_cells(self.cells.iter().map(|(p, t)| (*p, t.letter)))
            .expect("scenarios are non-empty with valid letters")
    }

    /// Borders with no occupied cell on the other side.
    pub fn external_borders(&self) -> impl Iterator<Item = (Position, Direction, Label)> + '_ {
        self.cells.iter().flat_map(move |(p, t)| {
            Direction::ALL.into_iter().filter_map(move |d| {
                let (dr, dc) = d.step();
                (!self.cells.contains_key(&p.offset(dr, dc))).then_some((*p, d, t.label(d)))
            })
        })
    }
}

/// Every tile comes from `tiles` and every shared border carries one label.
pub fn scenario_valid(tiles: &[Tile], s: &Scenario) -> bool {
    s.cells.iter().all(|(p, t)| {
        tiles.contains(t)
            && [Direction::East, Direction::South].iter().all(|&d| {
                let (dr, dc) = d.step();
                s.cells.get(&p.offset(dr, dc)).is_none_or(|u| u.label(d.opposite()) == t.label(d))
            })
    })
}

/// Every external border carries an admissible label.
pub fn accepting(f: &Sats, s: &Scenario) -> bool {
    !s.is_empty() && s.external_borders().all(|(_, d, l)| f.admits(d, l))
}

pub fn strip(s: &Scenario) -> Word {
    s.strip()
}

/// Options for [`enumerate_language`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    /// Keep only hv-connected words, pruning disconnected branches early.
    pub connected_only: bool,
    /// Worker threads for independent search partitions.
    pub jobs: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { connected_only: false, jobs: 1 }
    }
}

/// Words of a recognized language, each with the first accepting scenario
/// found for it in row-major search order.
#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    pub words: BTreeMap<Word, Scenario>,
    pub nodes: u64,
}

impl Enumeration {
    pub fn language(&self) -> BTreeSet<Word> {
        self.words.keys().cloned().collect()
    }
}

/// Enumerates every accepted word whose bounding box fits the bounds.
///
/// Tiles are assigned cell by cell in row-major order over the bounding box,
/// with an "empty" choice per cell. Every shared border is checked as soon as
/// both cells are decided and every external border as soon as its outside
/// neighbour is known to be empty. Only placements touching row 0 and column 0
/// are kept, so each word is produced in its normalized position.
pub fn enumerate_language(f: &Sats, bounds: &Bounds, opts: EnumOptions) -> Result<Enumeration, TilingError> {
    let search = Search::new(f, bounds, opts.connected_only);
    let budget = Budget::new(bounds.node_budget);
    let total = search.rows * search.cols;

    // Split the search tree into independent prefixes; results are merged in
    // prefix order so witnesses do not depend on the thread count.
    let mut split_depth = 0;
    let mut tasks = vec![Task::Prefix(search.initial_state())];
    while split_depth < total && tasks.len() < 64 {
        split_depth = (split_depth + 2).min(total);
        tasks = search.split(&budget, split_depth)?;
    }

    let run = |task: &Task| -> Result<Vec<(Word, Scenario)>, BudgetExhausted> {
        match task {
            Task::Found(w, s) => Ok(vec![(w.clone(), s.clone())]),
            Task::Prefix(state) => {
                let mut state = state.clone();
                let mut out = Vec::new();
                let mut nodes = 0;
                let k = state.decided;
                search.dfs(&mut state, k, &mut nodes, &budget, &mut |t| {
                    if let Task::Found(w, s) = t {
                        out.push((w, s));
                    }
                })?;
                budget.charge(nodes)?;
                Ok(out)
            }
        }
    };
    let parts: Vec<Result<Vec<(Word, Scenario)>, BudgetExhausted>> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().expect("thread pool");
        pool.install(|| tasks.par_iter().map(run).collect())
    } else {
        tasks.iter().map(run).collect()
    };
    let mut words = BTreeMap::new();
    for part in parts {
        for (w, s) in part? {
            words.entry(w).or_insert(s);
        }
    }
    Ok(Enumeration { words, nodes: budget.used() })
}

#[derive(Debug, Clone)]
enum Task {
    Prefix(SearchState),
    Found(Word, Scenario),
}

#[derive(Debug, Clone)]
struct SearchState {
    /// Tile index per box cell, `EMPTY` when unoccupied.
    cells: Vec<u16>,
    decided: usize,
    placed: usize,
}

const EMPTY: u16 = u16::MAX;
const FLUSH_EVERY: u64 = 4096;

struct Search<'a> {
    f: &'a Sats,
    rows: usize,
    cols: usize,
    max_cells: usize,
    connected_only: bool,
    /// `admit[t][d]`: tile `t`'s label in direction `d` is admissible externally.
    admit: Vec<[bool; 4]>,
}

impl<'a> Search<'a> {
    fn new(f: &'a Sats, bounds: &Bounds, connected_only: bool) -> Search<'a> {
        let admit = f.tiles.iter().map(|t| Direction::ALL.map(|d| f.admits(d, t.label(d)))).collect();
        Search { f, rows: bounds.max_rows, cols: bounds.max_cols, max_cells: bounds.max_cells, connected_only, admit }
    }

    fn initial_state(&self) -> SearchState {
        SearchState { cells: vec![EMPTY; self.rows * self.cols], decided: 0, placed: 0 }
    }

    fn split(&self, budget: &Budget, depth: usize) -> Result<Vec<Task>, BudgetExhausted> {
        let mut state = self.initial_state();
        let mut tasks = Vec::new();
        let mut nodes = 0;
        self.dfs_until(&mut state, 0, Some(depth), &mut nodes, budget, &mut |t| tasks.push(t))?;
        Ok(tasks)
    }

    fn dfs(
        &self,
        state: &mut SearchState,
        k: usize,
        nodes: &mut u64,
        budget: &Budget,
        emit: &mut dyn FnMut(Task),
    ) -> Result<(), BudgetExhausted> {
        self.dfs_until(state, k, None, nodes, budget, emit)
    }

    fn dfs_until(
        &self,
        state: &mut SearchState,
        k: usize,
        stop_at: Option<usize>,
        nodes: &mut u64,
        budget: &Budget,
        emit: &mut dyn FnMut(Task),
    ) -> Result<(), BudgetExhausted> {
        *nodes += 1;
        if *nodes >= FLUSH_EVERY {
            budget.charge(*nodes)?;
            *nodes = 0;
        }
        let total = self.rows * self.cols;
        if k == total {
            if state.placed > 0 && self.col0_used(state) && (!self.connected_only || self.components(state) == 1) {
                emit(self.found(state));
            }
            return Ok(());
        }
        if stop_at == Some(k) {
            emit(Task::Prefix(state.clone()));
            return Ok(());
        }
        let (r, c) = (k / self.cols, k % self.cols);
        let west = if c > 0 { state.cells[k - 1] } else { EMPTY };
        let north = if r > 0 { state.cells[k - self.cols] } else { EMPTY };

        // Empty choice: neighbours to the west and north get external borders.
        let empty_ok = (west == EMPTY || self.admit[west as usize][Direction::East.index()])
            && (north == EMPTY || self.admit[north as usize][Direction::South.index()])
            && !(r == 0 && c == self.cols - 1 && state.placed == 0);
        if empty_ok {
            state.cells[k] = EMPTY;
            state.decided = k + 1;
            match self.after_empty(state, k) {
                Continuation::Prune => {}
                Continuation::Go => self.dfs_until(state, k + 1, stop_at, nodes, budget, emit)?,
                Continuation::Complete => {
                    if self.col0_used(state) {
                        emit(self.found(state));
                    }
                }
            }
        }

        if state.placed < self.max_cells {
            for (ti, t) in self.f.tiles.iter().enumerate() {
                let adm = &self.admit[ti];
                let w_ok = if west == EMPTY {
                    adm[Direction::West.index()]
                } else {
                    self.f.tiles[west as usize].east == t.west
                };
                let n_ok = if north == EMPTY {
                    adm[Direction::North.index()]
                } else {
                    self.f.tiles[north as usize].south == t.north
                };
                let e_ok = c + 1 < self.cols || adm[Direction::East.index()];
                let s_ok = r + 1 < self.rows || adm[Direction::South.index()];
                if w_ok && n_ok && e_ok && s_ok {
                    state.cells[k] = ti as u16;
                    state.placed += 1;
                    state.decided = k + 1;
                    let res = self.dfs_until(state, k + 1, stop_at, nodes, budget, emit);
                    state.placed -= 1;
                    state.cells[k] = EMPTY;
                    res?;
                }
            }
        }
        state.decided = k;
        Ok(())
    }

    /// In connected mode, leaving cell `(r-1, c)` behind may close off its
    /// component for good.
    fn after_empty(&self, state: &SearchState, k: usize) -> Continuation {
        if !self.connected_only || k < self.cols || state.cells[k - self.cols] == EMPTY {
            return Continuation::Go;
        }
        let comp = self.component_of(state, k - self.cols, k + 1);
        let alive = comp.iter().any(|&i| i + self.cols > k);
        if alive {
            Continuation::Go
        } else if comp.len() < state.placed {
            Continuation::Prune
        } else {
            Continuation::Complete
        }
    }

    fn component_of(&self, state: &SearchState, start: usize, decided: usize) -> Vec<usize> {
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (r, c) = (i / self.cols, i % self.cols);
            let mut nbrs = [usize::MAX; 4];
            if r > 0 {
                nbrs[0] = i - self.cols;
            }
            if r + 1 < self.rows {
                nbrs[1] = i + self.cols;
            }
            if c > 0 {
                nbrs[2] = i - 1;
            }
            if c + 1 < self.cols {
                nbrs[3] = i + 1;
            }
            for j in nbrs {
                if j < decided && state.cells[j] != EMPTY && !seen.contains(&j) {
                    seen.push(j);
                    stack.push(j);
                }
            }
        }
        seen
    }

    fn components(&self, state: &SearchState) -> usize {
        let total = self.rows * self.cols;
        let mut covered = vec![false; total];
        let mut count = 0;
        for i in 0..total {
            if state.cells[i] != EMPTY && !covered[i] {
                count += 1;
                for j in self.component_of(state, i, total) {
                    covered[j] = true;
                }
            }
        }
        count
    }

    fn col0_used(&self, state: &SearchState) -> bool {
        (0..state.decided.min(self.rows * self.cols)).step_by(self.cols).any(|i| state.cells[i] != EMPTY)
    }

    fn found(&self, state: &SearchState) -> Task {
        let cells: Vec<(Position, Tile)> = state.cells[..state.decided]
            .iter()
            .enumerate()
            .filter(|(_, &t)| t != EMPTY)
            .map(|(i, &t)| (Position::new((i / self.cols) as i32, (i % self.cols) as i32), self.f.tiles[t as usize]))
            .collect();
        let scenario = Scenario::new(cells).expect("non-empty");
        Task::Found(scenario.strip(), scenario)
    }
}

enum Continuation {
    Go,
    Prune,
    /// The only component is closed: emit now, place nothing further.
    Complete,
}

/// One placement of `w` relative to `v` in a scenario composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioPlacement {
    /// Position of `w`'s origin in `v`'s frame.
    pub offset: (i32, i32),
    pub shared_borders: usize,
    pub result: Scenario,
}

/// Every placement of `w` next to `v` without overlap, with the closed
/// regions sharing at least one lattice point and all shared borders agreeing.
pub fn scenario_placements(v: &Scenario, w: &Scenario) -> Vec<ScenarioPlacement> {
    let extent = |s: &Scenario| {
        let rows = s.cells.keys().map(|p| p.row).max().unwrap_or(-1) + 1;
        let cols = s.cells.keys().map(|p| p.col).max().unwrap_or(-1) + 1;
        (rows, cols)
    };
    let (vr, vc) = extent(v);
    let (wr, wc) = extent(w);
    let mut out = Vec::new();
    for dr in -wr..=vr {
        'offset: for dc in -wc..=vc {
            let mut contact = false;
            let mut shared = 0;
            for (p, t) in &w.cells {
                let q = p.offset(dr, dc);
                if v.cells.contains_key(&q) {
                    continue 'offset;
                }
                for d in Direction::ALL {
                    let (sr, sc) = d.step();
                    if let Some(u) = v.cells.get(&q.offset(sr, sc)) {
                        if u.label(d.opposite()) != t.label(d) {
                            continue 'offset;
                        }
                        shared += 1;
                    }
                }
                if !contact {
                    contact = (-1..=1).any(|a| (-1..=1).any(|b| v.cells.contains_key(&q.offset(a, b))));
                }
            }
            if !contact {
                continue;
            }
            let cells =
                v.cells.iter().map(|(p, t)| (*p, *t)).chain(w.cells.iter().map(|(p, t)| (p.offset(dr, dc), *t)));
            let result = Scenario::new(cells).expect("non-empty");
            out.push(ScenarioPlacement { offset: (dr, dc), shared_borders: shared, result });
        }
    }
    out
}

pub fn scenario_compose(v: &Scenario, w: &Scenario) -> BTreeSet<Scenario> {
    scenario_placements(v, w).into_iter().map(|p| p.result).collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("{0} has equal west and east labels, so it can grow horizontally")]
    EqualWestEast(Tile),
    #[error("{left} can sit west of {right}: horizontal growth is possible")]
    HorizontalAdjacency { left: Tile, right: Tile },
}

/// Nondeterministic finite automaton obtained by projecting a tile system on
/// the vertical dimension. States are north/south labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub initial: BTreeSet<Label>,
    pub accepting: BTreeSet<Label>,
    pub transitions: BTreeSet<(Label, char, Label)>,
}

impl Nfa {
    pub fn states(&self) -> BTreeSet<Label> {
        let mut s: BTreeSet<Label> = self.initial.union(&self.accepting).copied().collect();
        for (a, _, b) in &self.transitions {
            s.insert(*a);
            s.insert(*b);
        }
        s
    }

    pub fn alphabet(&self) -> BTreeSet<char> {
        self.transitions.iter().map(|t| t.1).collect()
    }

    fn step(&self, from: &BTreeSet<Label>, letter: char) -> BTreeSet<Label> {
        self.transitions.iter().filter(|(a, l, _)| *l == letter && from.contains(a)).map(|t| t.2).collect()
    }

    pub fn accepts(&self, word: &str) -> bool {
        let mut cur = self.initial.clone();
        for ch in word.chars() {
            cur = self.step(&cur, ch);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|s| self.accepting.contains(s))
    }

    /// Accepted non-empty words of length at most `max_len`, by breadth-first
    /// expansion of reachable state sets.
    pub fn language(&self, max_len: usize) -> BTreeSet<String> {
        let alphabet = self.alphabet();
        let mut out = BTreeSet::new();
        let mut layer: Vec<(String, BTreeSet<Label>)> = vec![(String::new(), self.initial.clone())];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (prefix, states) in &layer {
                for &l in &alphabet {
                    let s = self.step(states, l);
                    if s.is_empty() {
                        continue;
                    }
                    let mut word = prefix.clone();
                    word.push(l);
                    if s.iter().any(|q| self.accepting.contains(q)) {
                        out.insert(word.clone());
                    }
                    next.push((word, s));
                }
            }
            layer = next;
        }
        out
    }
}

/// Projects a tile system whose tiles cannot sit side by side onto a finite
/// automaton reading columns from top to bottom.
pub fn project_to_nfa(f: &Sats) -> Result<Nfa, ProjectionError> {
    if let Some(t) = f.tiles.iter().find(|t| t.west == t.east) {
        return Err(ProjectionError::EqualWestEast(*t));
    }
    for left in &f.tiles {
        if let Some(right) = f.tiles.iter().find(|r| r.west == left.east) {
            return Err(ProjectionError::HorizontalAdjacency { left: *left, right: *right });
        }
    }
    let transitions = f
        .tiles
        .iter()
        .filter(|t| f.admits(Direction::West, t.west) && f.admits(Direction::East, t.east))
        .map(|t| (t.north, t.letter, t.south))
        .collect();
    Ok(Nfa {
        initial: f.external(Direction::North).clone(),
        accepting: f.external(Direction::South).clone(),
        transitions,
    })
}
