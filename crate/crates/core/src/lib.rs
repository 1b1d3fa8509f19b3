//! Two-dimensional word languages generated by self-assembling tile systems,
//! contour-restricted regular expressions over arbitrary-shape words, and
//! bounded least fixed points of recursive equation systems over them.

pub mod bounds;
pub mod compose;
pub mod equations;
pub mod expr;
pub mod grid;
pub mod interact;
pub mod syntax;
pub mod tiling;

pub use bounds::{Bounds, Budget, BudgetExhausted};
pub use compose::{CompareOp, Restriction};
pub use equations::{solve, Solution};
pub use expr::{EquationSystem, Expr, ExprClass};
pub use grid::{ContourElement, ContourSelector, ElementKind, Extremeness, Position, Word};
pub use tiling::{Sats, Scenario, Tile};
