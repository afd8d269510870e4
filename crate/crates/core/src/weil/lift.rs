//! Lifting smooth expressions through nilpotent arguments.
//!
//! Each primitive `ω` is propagated with the power-series recurrence for
//! `b = ω(a)` (coefficientwise from `b' = ω'(a)·a'`), which reproduces the
//! truncated Taylor sum `Σ_j ω^{(j)}(a₀) d^j / j!` in `O(K²)` per node.

use serde::{Deserialize, Serialize};

use super::{Tolerance, WeilElement};
use crate::error::{Error, Result};
use crate::expr::{Primitive, Scalar, SmoothExpr};

/// An argument tuple `(a₁, …, aₙ)` of uniform order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilVector {
    order: usize,
    components: Vec<WeilElement>,
}

impl WeilVector {
    pub fn new(components: Vec<WeilElement>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Shape(
                "use WeilVector::empty to give an empty vector an order".into(),
            ));
        };
        let order = first.order();
        if let Some(bad) = components.iter().find(|c| c.order() != order) {
            return Err(Error::OrderMismatch {
                left: order,
                right: bad.order(),
            });
        }
        Ok(WeilVector { order, components })
    }

    pub fn empty(order: usize) -> Self {
        WeilVector {
            order,
            components: Vec::new(),
        }
    }

    /// Real constants `(c₁, …, cₙ)` embedded at the given order.
    pub fn from_reals(values: &[f64], order: usize) -> Self {
        WeilVector {
            order,
            components: values
                .iter()
                .map(|&c| WeilElement::from_real(c, order))
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[WeilElement] {
        &self.components
    }

    pub fn truncate(&self, order: usize) -> Result<WeilVector> {
        if order > self.order {
            return Err(Error::TruncationOutOfRange {
                target: order,
                order: self.order,
            });
        }
        Ok(WeilVector {
            order,
            components: self
                .components
                .iter()
                .map(|c| c.truncate(order))
                .collect::<Result<_>>()?,
        })
    }
}

pub(crate) struct JetCtx {
    order: usize,
    tol: Tolerance,
}

/// Fills `b[1..]` from `k·b_k = Σ_{j=1}^{k} j·a_j·g_{k−j}` where `g = ω'(a)`
/// may depend on already-computed `b` coefficients.
fn integrate(a: &[f64], b: &mut [f64], mut g: impl FnMut(&[f64], usize) -> f64) {
    for k in 1..a.len() {
        let s: f64 = (1..=k).map(|j| j as f64 * a[j] * g(b, k - j)).sum();
        b[k] = s / k as f64;
    }
}

fn jet_primitive(prim: Primitive, a: &WeilElement, tol: Tolerance) -> Result<WeilElement> {
    let c = a.coeffs();
    let a0 = c[0];
    let order = a.order();
    let domain = || Error::Domain {
        primitive: prim.name(),
        value: a0,
    };
    let mut b = vec![0.0; order + 1];
    match prim {
        Primitive::Exp => {
            b[0] = a0.exp();
            integrate(c, &mut b, |b, m| b[m]);
        }
        Primitive::Log => {
            if a0 <= 0.0 {
                return Err(domain());
            }
            b[0] = a0.ln();
            for k in 1..=order {
                let s: f64 = (1..k).map(|m| m as f64 * b[m] * c[k - m]).sum();
                b[k] = (c[k] - s / k as f64) / a0;
            }
        }
        Primitive::Sin | Primitive::Cos => {
            let mut s = vec![0.0; order + 1];
            let mut co = vec![0.0; order + 1];
            s[0] = a0.sin();
            co[0] = a0.cos();
            for k in 1..=order {
                let (mut ds, mut dc) = (0.0, 0.0);
                for j in 1..=k {
                    ds += j as f64 * c[j] * co[k - j];
                    dc -= j as f64 * c[j] * s[k - j];
                }
                s[k] = ds / k as f64;
                co[k] = dc / k as f64;
            }
            b = if prim == Primitive::Sin { s } else { co };
        }
        Primitive::Tan | Primitive::Tanh => {
            // b' = (1 ± b²)·a'
            let sign = if prim == Primitive::Tan { 1.0 } else { -1.0 };
            b[0] = if prim == Primitive::Tan {
                if a0.cos() == 0.0 {
                    return Err(domain());
                }
                a0.tan()
            } else {
                a0.tanh()
            };
            integrate(c, &mut b, |b, m| {
                let sq: f64 = (0..=m).map(|i| b[i] * b[m - i]).sum();
                let one = if m == 0 { 1.0 } else { 0.0 };
                one + sign * sq
            });
        }
        Primitive::Atan => {
            let one = WeilElement::from_real(1.0, order);
            let g = (&one + &(a * a)).invert_with(tol)?;
            b[0] = a0.atan();
            integrate(c, &mut b, |_, m| g.coeffs()[m]);
        }
        Primitive::Sqrt => {
            if a0 < 0.0 || (a0 == 0.0 && order > 0) {
                return Err(domain());
            }
            b[0] = a0.sqrt();
            for k in 1..=order {
                let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
                b[k] = (c[k] - s) / (2.0 * b[0]);
            }
        }
        Primitive::Recip => return a.invert_with(tol),
    }
    if b.iter().any(|v| v.is_nan()) {
        return Err(domain());
    }
    WeilElement::new(b)
}

impl Scalar for WeilElement {
    type Ctx = JetCtx;

    fn constant(c: f64, ctx: &JetCtx) -> Self {
        WeilElement::from_real(c, ctx.order)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.try_add(other)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)
    }

    fn powi(&self, n: i32, ctx: &JetCtx) -> Result<Self> {
        self.powi_with(n, ctx.tol)
    }

    fn apply(&self, prim: Primitive, ctx: &JetCtx) -> Result<Self> {
        jet_primitive(prim, self, ctx.tol)
    }
}

impl WeilElement {
    /// Applies one primitive of the closed set.
    pub fn apply(&self, prim: Primitive) -> Result<WeilElement> {
        jet_primitive(prim, self, Tolerance::default())
    }
}

/// `f(a₁, …, aₙ)` in the jet algebra: the smooth-ring structure of `ℝ[ε^K]`.
pub fn lift_expr(f: &SmoothExpr, args: &WeilVector) -> Result<WeilElement> {
    lift_expr_with(f, args, Tolerance::default())
}

pub fn lift_expr_with(f: &SmoothExpr, args: &WeilVector, tol: Tolerance) -> Result<WeilElement> {
    if args.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: args.len(),
        });
    }
    let ctx = JetCtx {
        order: args.order(),
        tol,
    };
    f.root().eval(args.components(), &ctx)
}
