//! Truncated-jet arithmetic in `ℝ[ε]/(ε^{K+1})`, points of a smooth space seen
//! from that algebra, lifted curvature tensors, and an FLRW scenario runner.

pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod rwfl;
pub mod space;
pub mod weil;

pub use error::{Error, Result};
pub use expr::{Node, Primitive, SmoothExpr};
pub use weil::{lift_expr, lift_expr_with, Tolerance, WeilElement, WeilVector};
