//! Structural partial differentiation.
//!
//! Only trivial constant folding is applied (`0 + a`, `1 * a`, `0 * a`, and
//! products/sums of literals), so derivative trees may still grow.

use super::{Node, Primitive, SmoothExpr};
use crate::error::{Error, Result};

fn c(v: f64) -> Node {
    Node::Const(v)
}

fn add(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => c(x + y),
        (Node::Const(z), other) | (other, Node::Const(z)) if z == 0.0 => other,
        (a, b) => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => c(x * y),
        (Node::Const(z), _) | (_, Node::Const(z)) if z == 0.0 => c(0.0),
        (Node::Const(o), other) | (other, Node::Const(o)) if o == 1.0 => other,
        (a, b) => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn prim(p: Primitive, a: &Node) -> Node {
    Node::Prim(p, Box::new(a.clone()))
}

fn pow(a: Node, n: i32) -> Node {
    match n {
        0 => c(1.0),
        1 => a,
        _ => Node::Pow(Box::new(a), n),
    }
}

/// Derivative of a primitive, as an expression in its argument.
fn primitive_derivative(p: Primitive, a: &Node) -> Node {
    match p {
        Primitive::Exp => prim(Primitive::Exp, a),
        Primitive::Log => prim(Primitive::Recip, a),
        Primitive::Sin => prim(Primitive::Cos, a),
        Primitive::Cos => mul(c(-1.0), prim(Primitive::Sin, a)),
        Primitive::Tan => add(c(1.0), pow(prim(Primitive::Tan, a), 2)),
        Primitive::Sqrt => mul(c(0.5), prim(Primitive::Recip, &prim(Primitive::Sqrt, a))),
        Primitive::Atan => prim(Primitive::Recip, &add(c(1.0), pow(a.clone(), 2))),
        Primitive::Tanh => add(c(1.0), mul(c(-1.0), pow(prim(Primitive::Tanh, a), 2))),
        Primitive::Recip => mul(c(-1.0), pow(prim(Primitive::Recip, a), 2)),
    }
}

pub(super) fn derive(node: &Node, i: usize) -> Node {
    match node {
        Node::Var(j) => c(if *j == i { 1.0 } else { 0.0 }),
        Node::Const(_) => c(0.0),
        Node::Add(a, b) => add(derive(a, i), derive(b, i)),
        Node::Mul(a, b) => add(
            mul(derive(a, i), (**b).clone()),
            mul((**a).clone(), derive(b, i)),
        ),
        Node::Pow(a, n) => {
            if *n == 0 {
                return c(0.0);
            }
            mul(mul(c(*n as f64), pow((**a).clone(), n - 1)), derive(a, i))
        }
        Node::Prim(p, a) => mul(primitive_derivative(*p, a), derive(a, i)),
        Node::Compose { outer, inner } => {
            // chain rule: Σ_j (∂_j outer)(inner) · ∂_i inner_j
            (1..=inner.len()).fold(c(0.0), |acc, j| {
                let d_inner = derive(&inner[j - 1], i);
                if d_inner == c(0.0) {
                    return acc;
                }
                let d_outer = match derive(outer, j) {
                    Node::Const(v) => Node::Const(v),
                    d => Node::Compose {
                        outer: Box::new(d),
                        inner: inner.clone(),
                    },
                };
                add(acc, mul(d_outer, d_inner))
            })
        }
    }
}

impl SmoothExpr {
    /// `∂f/∂x_i`, 1-based.
    pub fn partial(&self, i: usize) -> Result<SmoothExpr> {
        if i == 0 || i > self.arity {
            return Err(Error::VariableOutOfRange {
                index: i,
                arity: self.arity,
            });
        }
        Ok(SmoothExpr {
            arity: self.arity,
            root: derive(&self.root, i),
        })
    }

    /// `∂^order f / ∂x_i^order`.
    pub fn iterated_partial(&self, i: usize, order: usize) -> Result<SmoothExpr> {
        let mut f = self.clone();
        for _ in 0..order {
            f = f.partial(i)?;
        }
        Ok(f)
    }
}
