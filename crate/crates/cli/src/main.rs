use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use t2d_core::bounds::{Bounds, Budget, DEFAULT_NODE_BUDGET};
use t2d_core::compose::ComposeOptions;
use t2d_core::equations::{builtin_system, diff_languages, solve_with, SolveOptions, BUILTIN_NAMES};
use t2d_core::expr::{EquationSystem, Evaluator, Expr};
use t2d_core::grid::{parse_words, Word};
use t2d_core::interact::{builtin_protocol, execute, validate_scenario, DataScenario, Library};
use t2d_core::tiling::{enumerate_language, project_to_nfa, EnumOptions, Sats, TilingError};

#[derive(Parser)]
#[command(
    name = "t2d",
    version,
    about = "Two-dimensional word languages: tile systems, restricted expressions, recursive equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the language of a tile system within bounds.
    Enum(EnumArgs),
    /// Evaluate an expression, or solve a system and print one variable.
    Eval(EvalArgs),
    /// Solve a system of recursive equations within bounds.
    Solve(SolveArgs),
    /// Compare a tile-system language with a system variable.
    Diff(DiffArgs),
    /// Validate a data-bearing scenario against a module library.
    Validate(ValidateArgs),
    /// Render words as ASCII grids.
    Render(RenderArgs),
    /// Project a vertical-only tile system to a finite automaton.
    ProjectNfa(ProjectArgs),
}

#[derive(Args, Clone)]
struct BoundArgs {
    /// Maximum bounding-box rows [default: --max-cells if given, else 4]
    #[arg(long)]
    max_rows: Option<usize>,
    /// Maximum bounding-box columns [default: --max-cells if given, else 4]
    #[arg(long)]
    max_cols: Option<usize>,
    /// Maximum number of cells [default: rows x cols]
    #[arg(long)]
    max_cells: Option<usize>,
    /// Search-node budget
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// Concurrent search partitions
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl BoundArgs {
    fn bounds(&self) -> Result<Bounds> {
        let side = self.max_cells.unwrap_or(4);
        let rows = self.max_rows.unwrap_or(side);
        let cols = self.max_cols.unwrap_or(side);
        let cells = self.max_cells.unwrap_or(rows.saturating_mul(cols)).min(rows.saturating_mul(cols));
        Ok(Bounds::new(rows, cols, cells)?.with_budget(self.node_budget))
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Ascii,
    Records,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    format: Format,
}

#[derive(Args)]
struct SystemArgs {
    /// Equation system file
    #[arg(long, conflicts_with = "system")]
    file: Option<String>,
    /// Built-in system: squares, f02ac or f02ac-general
    #[arg(long)]
    system: Option<String>,
    /// Variable whose language is printed [default: the system's main variable, else the last one]
    #[arg(long)]
    var: Option<String>,
}

impl SystemArgs {
    fn load(&self) -> Result<(EquationSystem, String)> {
        let (sys, main) = match (&self.file, &self.system) {
            (Some(path), _) => {
                let text = read(path)?;
                let sys = EquationSystem::parse(&text).with_context(|| format!("reading {path}"))?;
                let last = sys.equations().last().map(|(n, _)| n.clone()).unwrap_or_default();
                (sys, last)
            }
            (None, Some(name)) => {
                let (sys, main) = builtin_system(name)
                    .ok_or_else(|| anyhow!("unknown system {name:?}; built-ins are {}", BUILTIN_NAMES.join(", ")))?;
                (sys, main.to_string())
            }
            (None, None) => return Err(usage("give --file or --system")),
        };
        let var = self.var.clone().unwrap_or(main);
        if sys.get(&var).is_none() {
            bail!("variable {var} is not defined by the system");
        }
        Ok((sys, var))
    }
}

#[derive(Args)]
struct EnumArgs {
    /// Tile system: two-colour notation such as F02ac.c, or a file path
    #[arg(long)]
    sats: String,
    /// Keep only hv-connected words
    #[arg(long)]
    connected: bool,
    #[command(flatten)]
    bounds: BoundArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Expression; its variables are taken from the solved system
    expr: Option<String>,
    #[command(flatten)]
    system: OptionalSystemArgs,
    #[command(flatten)]
    bounds: BoundArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OptionalSystemArgs {
    #[arg(long, conflicts_with = "system")]
    file: Option<String>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    var: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    bounds: BoundArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DiffArgs {
    #[arg(long)]
    sats: String,
    /// Compare only the hv-connected words of the tile-system language
    #[arg(long)]
    connected: bool,
    /// Witnesses printed per side
    #[arg(long, default_value_t = 5)]
    witnesses: usize,
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    bounds: BoundArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Module library: `protocol` or a library file
    #[arg(long, default_value = "protocol")]
    modules: String,
    /// Scenario file [default: the built-in protocol scenario]
    #[arg(long)]
    file: Option<String>,
    /// Recompute every border from the external inputs instead of checking
    #[arg(long)]
    execute: bool,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
}

#[derive(Args)]
struct RenderArgs {
    /// Word file (blocks of `rows cols` plus grid lines)
    #[arg(long, conflicts_with_all = ["system", "sats"])]
    file: Option<String>,
    #[arg(long, conflicts_with = "sats")]
    system: Option<String>,
    #[arg(long)]
    var: Option<String>,
    #[arg(long)]
    sats: Option<String>,
    #[command(flatten)]
    bounds: BoundArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    sats: String,
    /// Also list accepted column words up to this length
    #[arg(long)]
    max_rows: Option<usize>,
}

fn fail(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(msg.into())
}

/// Missing or conflicting arguments that clap cannot express; exits 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {path}"))
}

fn load_sats(arg: &str) -> Result<Sats> {
    let t = arg.trim();
    if t.starts_with('F') && !t.contains(['/', '\\']) && fs::metadata(t).is_err() {
        return Ok(Sats::parse_two_color(t)?);
    }
    Ok(Sats::parse(&read(arg)?)?)
}

#[derive(Serialize)]
struct CellRecord {
    row: i32,
    col: i32,
    letter: char,
}

#[derive(Serialize)]
struct WordRecord {
    index: usize,
    rows: usize,
    cols: usize,
    cells: Vec<CellRecord>,
}

/// Words by cell count, then row-major letters, then grid.
fn sorted(words: &BTreeSet<Word>) -> Vec<&Word> {
    let mut v: Vec<&Word> = words.iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.letters().cmp(&b.letters())).then_with(|| a.cmp(b)));
    v
}

fn print_words(out: &mut impl Write, words: &BTreeSet<Word>, format: Format) -> Result<()> {
    for (index, w) in sorted(words).into_iter().enumerate() {
        match format {
            Format::Ascii => writeln!(out, "{}\n", w.render_ascii())?,
            Format::Records => {
                let rec = WordRecord {
                    index,
                    rows: w.rows(),
                    cols: w.cols(),
                    cells: w.cells().map(|(p, letter)| CellRecord { row: p.row, col: p.col, letter }).collect(),
                };
                writeln!(out, "{}", serde_json::to_string(&rec)?)?;
            }
        }
    }
    Ok(())
}

fn solve_system(sys: &EquationSystem, bounds: &BoundArgs) -> Result<t2d_core::equations::Solution> {
    let b = bounds.bounds()?;
    Ok(solve_with(sys, &b, SolveOptions { jobs: bounds.jobs, compose: ComposeOptions::default() }))
}

fn budget_failure(out: &mut impl Write) -> Result<()> {
    writeln!(out, "# partial: node budget exhausted")?;
    Err(fail("node budget exhausted; output above is partial"))
}

fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Enum(a) => {
            let f = load_sats(&a.sats)?;
            let b = a.bounds.bounds()?;
            let opts = EnumOptions { connected_only: a.connected, jobs: a.bounds.jobs };
            match enumerate_language(&f, &b, opts) {
                Ok(e) => print_words(out, &e.language(), a.out.format),
                Err(TilingError::Budget(_)) => budget_failure(out),
                Err(e) => Err(e.into()),
            }
        }
        Command::Eval(a) => {
            let b = a.bounds.bounds()?;
            let sys_args = SystemArgs { file: a.system.file, system: a.system.system, var: a.system.var };
            let has_system = sys_args.file.is_some() || sys_args.system.is_some();
            match (&a.expr, has_system) {
                (None, false) => Err(usage("give an expression, --file or --system")),
                (None, true) => {
                    let (sys, var) = sys_args.load()?;
                    let sol = solve_system(&sys, &a.bounds)?;
                    print_words(out, &sol.values[&var], a.out.format)?;
                    if !sol.saturated {
                        return budget_failure(out);
                    }
                    Ok(())
                }
                (Some(text), _) => {
                    let e = Expr::parse(text).map_err(|e| fail(format!("{e}")))?;
                    let env = if has_system {
                        let (sys, _) = sys_args.load()?;
                        let sol = solve_system(&sys, &a.bounds)?;
                        if !sol.saturated {
                            return budget_failure(out);
                        }
                        sol.values
                    } else {
                        Default::default()
                    };
                    let budget = Budget::new(b.node_budget);
                    let ev = Evaluator::new(b, ComposeOptions::default(), &budget);
                    match ev.eval(&e, &env) {
                        Ok(words) => print_words(out, &words, a.out.format),
                        Err(t2d_core::expr::EvalError::Budget(_)) => budget_failure(out),
                        Err(e) => Err(fail(e.to_string())),
                    }
                }
            }
        }
        Command::Solve(a) => {
            let (sys, var) = a.system.load()?;
            let sol = solve_system(&sys, &a.bounds)?;
            print_words(out, &sol.values[&var], a.out.format)?;
            eprintln!("{var}: {} words, {} iterations", sol.values[&var].len(), sol.iterations);
            if !sol.saturated {
                return budget_failure(out);
            }
            Ok(())
        }
        Command::Diff(a) => {
            let f = load_sats(&a.sats)?;
            let b = a.bounds.bounds()?;
            let (sys, var) = a.system.load()?;
            let opts = EnumOptions { connected_only: a.connected, jobs: a.bounds.jobs };
            let lang = match enumerate_language(&f, &b, opts) {
                Ok(e) => e.language(),
                Err(TilingError::Budget(_)) => return budget_failure(out),
                Err(e) => return Err(e.into()),
            };
            let sol = solve_system(&sys, &a.bounds)?;
            if !sol.saturated {
                return budget_failure(out);
            }
            let report = diff_languages(&sol.values[&var], &lang, a.witnesses);
            writeln!(out, "left: {var}, right: {}", a.sats)?;
            write!(out, "{report}")?;
            if report.is_equal() {
                Ok(())
            } else {
                Err(fail("languages differ"))
            }
        }
        Command::Validate(a) => {
            let (lib, builtin_scenario) = if a.modules == "protocol" {
                builtin_protocol()
            } else {
                let lib = Library::parse(&read(&a.modules)?)?;
                (lib, DataScenario::new(0, 0))
            };
            let scenario = match &a.file {
                Some(path) => DataScenario::parse(&read(path)?)?,
                None if a.modules == "protocol" => builtin_scenario,
                None => return Err(usage("give --file with a scenario")),
            };
            if a.execute {
                let west: Vec<_> = (0..scenario.rows).map(|r| scenario.cell(r, 0).west.clone()).collect();
                let north: Vec<_> = (0..scenario.cols).map(|c| scenario.cell(0, c).north.clone()).collect();
                let budget = Budget::new(a.node_budget);
                return match execute(&scenario, &lib, &west, &north, &budget) {
                    Ok(Some(done)) => {
                        write!(out, "{}", done.to_text())?;
                        Ok(())
                    }
                    Ok(None) => Err(fail("no completion exists")),
                    Err(t2d_core::interact::InteractError::Budget(_)) => budget_failure(out),
                    Err(e) => Err(e.into()),
                };
            }
            let violations = validate_scenario(&scenario, &lib)?;
            if violations.is_empty() {
                writeln!(out, "valid")?;
                return Ok(());
            }
            for v in &violations {
                writeln!(out, "{v}")?;
            }
            Err(fail(format!("{} violations", violations.len())))
        }
        Command::Render(a) => {
            let words: BTreeSet<Word> = if let Some(path) = &a.file {
                parse_words(&read(path)?)?.into_iter().collect()
            } else if let Some(sats) = &a.sats {
                let b = a.bounds.bounds()?;
                match enumerate_language(
                    &load_sats(sats)?,
                    &b,
                    EnumOptions { connected_only: false, jobs: a.bounds.jobs },
                ) {
                    Ok(e) => e.language(),
                    Err(TilingError::Budget(_)) => return budget_failure(out),
                    Err(e) => return Err(e.into()),
                }
            } else {
                let sys_args = SystemArgs { file: None, system: a.system.clone(), var: a.var.clone() };
                let (sys, var) = sys_args.load()?;
                let sol = solve_system(&sys, &a.bounds)?;
                if !sol.saturated {
                    print_words(out, &sol.values[&var], a.out.format)?;
                    return budget_failure(out);
                }
                sol.values[&var].clone()
            };
            print_words(out, &words, a.out.format)
        }
        Command::ProjectNfa(a) => {
            let f = load_sats(&a.sats)?;
            let nfa = project_to_nfa(&f).map_err(|e| fail(e.to_string()))?;
            let fmt_set = |s: &BTreeSet<u32>| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            writeln!(out, "initial {{{}}}", fmt_set(&nfa.initial))?;
            writeln!(out, "accepting {{{}}}", fmt_set(&nfa.accepting))?;
            for (p, c, q) in &nfa.transitions {
                writeln!(out, "{p} -{c}-> {q}")?;
            }
            if let Some(n) = a.max_rows {
                let mut lang: Vec<String> = nfa.language(n).into_iter().collect();
                lang.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
                for w in lang {
                    writeln!(out, "word {w}")?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.downcast_ref::<UsageError>().is_some() { 2 } else { 1 };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
