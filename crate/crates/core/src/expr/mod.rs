//! Smooth expressions over `n` generators.
//!
//! A [`SmoothExpr`] is a finite tree built from the generators `x1..xn`, real
//! constants, sums, products, integer powers and a closed set of smooth
//! [`Primitive`]s. Every primitive carries both a derivative rule (used by
//! [`SmoothExpr::partial`]) and a jet recurrence (used when lifting through
//! nilpotent arguments, see [`crate::weil`]), so the set is kept closed.

mod diff;
mod parser;

use std::fmt;
use std::ops;

use crate::error::{Error, Result};

/// Largest generator index expressible in the concrete syntax (`x999`).
pub const MAX_ARITY: usize = 999;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Primitive {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sqrt,
    Atan,
    Tanh,
    Recip,
}

impl Primitive {
    pub const ALL: [Primitive; 9] = [
        Primitive::Exp,
        Primitive::Log,
        Primitive::Sin,
        Primitive::Cos,
        Primitive::Tan,
        Primitive::Sqrt,
        Primitive::Atan,
        Primitive::Tanh,
        Primitive::Recip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Exp => "exp",
            Primitive::Log => "log",
            Primitive::Sin => "sin",
            Primitive::Cos => "cos",
            Primitive::Tan => "tan",
            Primitive::Sqrt => "sqrt",
            Primitive::Atan => "atan",
            Primitive::Tanh => "tanh",
            Primitive::Recip => "recip",
        }
    }

    pub fn from_name(name: &str) -> Option<Primitive> {
        Primitive::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Real evaluation with domain checks.
    pub fn eval(self, x: f64) -> Result<f64> {
        let domain = || Error::Domain {
            primitive: self.name(),
            value: x,
        };
        let y = match self {
            Primitive::Exp => x.exp(),
            Primitive::Log if x > 0.0 => x.ln(),
            Primitive::Log => return Err(domain()),
            Primitive::Sin => x.sin(),
            Primitive::Cos => x.cos(),
            Primitive::Tan if x.cos() != 0.0 => x.tan(),
            Primitive::Tan => return Err(domain()),
            Primitive::Sqrt if x >= 0.0 => x.sqrt(),
            Primitive::Sqrt => return Err(domain()),
            Primitive::Atan => x.atan(),
            Primitive::Tanh => x.tanh(),
            Primitive::Recip if x != 0.0 => x.recip(),
            Primitive::Recip => return Err(domain()),
        };
        if y.is_nan() {
            return Err(domain());
        }
        Ok(y)
    }
}

/// One node of an expression tree. Variable indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Var(usize),
    Const(f64),
    Add(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Prim(Primitive, Box<Node>),
    Pow(Box<Node>, i32),
    /// `outer(inner[0], …, inner[m-1])`: the variables of `outer` index into
    /// `inner`, which are themselves expressed over the enclosing generators.
    Compose {
        outer: Box<Node>,
        inner: Vec<Node>,
    },
}

impl Node {
    fn check_vars(&self, arity: usize) -> Result<()> {
        match self {
            Node::Var(i) if *i == 0 || *i > arity => {
                Err(Error::VariableOutOfRange { index: *i, arity })
            }
            Node::Var(_) | Node::Const(_) => Ok(()),
            Node::Add(a, b) | Node::Mul(a, b) => {
                a.check_vars(arity)?;
                b.check_vars(arity)
            }
            Node::Prim(_, a) | Node::Pow(a, _) => a.check_vars(arity),
            Node::Compose { outer, inner } => {
                outer.check_vars(inner.len())?;
                inner.iter().try_for_each(|n| n.check_vars(arity))
            }
        }
    }

    /// Replaces every variable `xi` by `args[i-1]`.
    fn substitute(&self, args: &[Node]) -> Node {
        match self {
            Node::Var(i) => args[i - 1].clone(),
            Node::Const(c) => Node::Const(*c),
            Node::Add(a, b) => {
                Node::Add(Box::new(a.substitute(args)), Box::new(b.substitute(args)))
            }
            Node::Mul(a, b) => {
                Node::Mul(Box::new(a.substitute(args)), Box::new(b.substitute(args)))
            }
            Node::Prim(p, a) => Node::Prim(*p, Box::new(a.substitute(args))),
            Node::Pow(a, n) => Node::Pow(Box::new(a.substitute(args)), *n),
            Node::Compose { outer, inner } => Node::Compose {
                outer: outer.clone(),
                inner: inner.iter().map(|n| n.substitute(args)).collect(),
            },
        }
    }

    fn inline(&self) -> Node {
        match self {
            Node::Var(_) | Node::Const(_) => self.clone(),
            Node::Add(a, b) => Node::Add(Box::new(a.inline()), Box::new(b.inline())),
            Node::Mul(a, b) => Node::Mul(Box::new(a.inline()), Box::new(b.inline())),
            Node::Prim(p, a) => Node::Prim(*p, Box::new(a.inline())),
            Node::Pow(a, n) => Node::Pow(Box::new(a.inline()), *n),
            Node::Compose { outer, inner } => {
                let inner: Vec<Node> = inner.iter().map(Node::inline).collect();
                outer.inline().substitute(&inner)
            }
        }
    }

    pub(crate) fn eval<S: Scalar>(&self, args: &[S], ctx: &S::Ctx) -> Result<S> {
        match self {
            Node::Var(i) => Ok(args[i - 1].clone()),
            Node::Const(c) => Ok(S::constant(*c, ctx)),
            Node::Add(a, b) => a.eval(args, ctx)?.add(&b.eval(args, ctx)?),
            Node::Mul(a, b) => a.eval(args, ctx)?.mul(&b.eval(args, ctx)?),
            Node::Prim(p, a) => a.eval(args, ctx)?.apply(*p, ctx),
            Node::Pow(a, n) => a.eval(args, ctx)?.powi(*n, ctx),
            Node::Compose { outer, inner } => {
                let values = inner
                    .iter()
                    .map(|n| n.eval(args, ctx))
                    .collect::<Result<Vec<_>>>()?;
                outer.eval(&values, ctx)
            }
        }
    }
}

/// Anything a [`SmoothExpr`] can be evaluated over: the reals, or a jet algebra.
pub(crate) trait Scalar: Clone + Sized {
    type Ctx;
    fn constant(c: f64, ctx: &Self::Ctx) -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn powi(&self, n: i32, ctx: &Self::Ctx) -> Result<Self>;
    fn apply(&self, prim: Primitive, ctx: &Self::Ctx) -> Result<Self>;
}

impl Scalar for f64 {
    type Ctx = ();

    fn constant(c: f64, _: &()) -> f64 {
        c
    }

    fn add(&self, other: &f64) -> Result<f64> {
        Ok(self + other)
    }

    fn mul(&self, other: &f64) -> Result<f64> {
        Ok(self * other)
    }

    fn powi(&self, n: i32, _: &()) -> Result<f64> {
        if n < 0 && *self == 0.0 {
            return Err(Error::Domain {
                primitive: "pow_int",
                value: *self,
            });
        }
        Ok(f64::powi(*self, n))
    }

    fn apply(&self, prim: Primitive, _: &()) -> Result<f64> {
        prim.eval(*self)
    }
}

/// An element `ω(x1, …, xn)` of the smooth ring generated by `n` generators.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothExpr {
    arity: usize,
    root: Node,
}

impl SmoothExpr {
    pub fn new(arity: usize, root: Node) -> Result<Self> {
        root.check_vars(arity)?;
        Ok(SmoothExpr { arity, root })
    }

    /// Parses the concrete syntax described in the crate docs.
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        let root = parser::parse(text, arity)?;
        Ok(SmoothExpr { arity, root })
    }

    /// The generator (projection) `xi`, 1-based.
    pub fn var(index: usize, arity: usize) -> Result<Self> {
        SmoothExpr::new(arity, Node::Var(index))
    }

    pub fn constant(value: f64, arity: usize) -> Self {
        SmoothExpr {
            arity,
            root: Node::Const(value),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval_real(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: point.len(),
            });
        }
        self.root.eval(point, &())
    }

    /// `theta ∘ (omegas[0], …, omegas[m-1])`, stored as a composition record.
    pub fn compose(theta: &SmoothExpr, omegas: &[SmoothExpr]) -> Result<SmoothExpr> {
        if theta.arity != omegas.len() {
            return Err(Error::ArityMismatch {
                expected: theta.arity,
                found: omegas.len(),
            });
        }
        let arity = omegas.first().map_or(0, |w| w.arity);
        if let Some(bad) = omegas.iter().find(|w| w.arity != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: bad.arity,
            });
        }
        Ok(SmoothExpr {
            arity,
            root: Node::Compose {
                outer: Box::new(theta.root.clone()),
                inner: omegas.iter().map(|w| w.root.clone()).collect(),
            },
        })
    }

    /// Expands every composition record by substitution.
    pub fn inline(&self) -> SmoothExpr {
        SmoothExpr {
            arity: self.arity,
            root: self.root.inline(),
        }
    }

    /// Applies a primitive to this expression.
    pub fn apply(&self, prim: Primitive) -> SmoothExpr {
        SmoothExpr {
            arity: self.arity,
            root: Node::Prim(prim, Box::new(self.root.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> SmoothExpr {
        SmoothExpr {
            arity: self.arity,
            root: Node::Pow(Box::new(self.root.clone()), n),
        }
    }

    /// The same tree viewed over a different (larger or equal) number of generators.
    pub fn with_arity(&self, arity: usize) -> Result<SmoothExpr> {
        SmoothExpr::new(arity, self.root.clone())
    }

    fn binary(&self, other: &SmoothExpr, make: fn(Box<Node>, Box<Node>) -> Node) -> SmoothExpr {
        assert_eq!(
            self.arity, other.arity,
            "cannot combine expressions of different arity"
        );
        SmoothExpr {
            arity: self.arity,
            root: make(Box::new(self.root.clone()), Box::new(other.root.clone())),
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl ops::$trait<&SmoothExpr> for &SmoothExpr {
            type Output = SmoothExpr;
            fn $method(self, rhs: &SmoothExpr) -> SmoothExpr {
                $body(self, rhs)
            }
        }
        impl ops::$trait<SmoothExpr> for SmoothExpr {
            type Output = SmoothExpr;
            fn $method(self, rhs: SmoothExpr) -> SmoothExpr {
                $body(&self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add, |a: &SmoothExpr, b: &SmoothExpr| a
    .binary(b, Node::Add));
impl_binop!(Mul, mul, |a: &SmoothExpr, b: &SmoothExpr| a
    .binary(b, Node::Mul));
impl_binop!(Sub, sub, |a: &SmoothExpr, b: &SmoothExpr| a + &(-b));
impl_binop!(Div, div, |a: &SmoothExpr, b: &SmoothExpr| a * &b
    .apply(Primitive::Recip));

impl ops::Neg for &SmoothExpr {
    type Output = SmoothExpr;
    fn neg(self) -> SmoothExpr {
        SmoothExpr::constant(-1.0, self.arity) * self.clone()
    }
}

impl ops::Neg for SmoothExpr {
    type Output = SmoothExpr;
    fn neg(self) -> SmoothExpr {
        -&self
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(i) => write!(f, "x{i}"),
            Node::Const(c) if c.is_sign_negative() => write!(f, "(-{:?})", c.abs()),
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Prim(p, a) => write!(f, "{}({a})", p.name()),
            Node::Pow(a, n) => write!(f, "({a} ^ {n})"),
            Node::Compose { .. } => write!(f, "{}", self.inline()),
        }
    }
}

impl fmt::Display for SmoothExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}
