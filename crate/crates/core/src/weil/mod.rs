//! The truncated polynomial algebra `ℝ[ε]/(ε^{K+1}) = ℝ ⊕ D_K`.
//!
//! A [`WeilElement`] of order `K` is a dense coefficient vector
//! `(a₀, a₁, …, a_K)` standing for `a₀ + a₁ε + … + a_Kε^K`. Mixing orders is an
//! error rather than an implicit truncation; use [`WeilElement::truncate`] to
//! change stage explicitly.

mod lift;

use std::fmt;
use std::ops;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lift::{lift_expr, lift_expr_with, WeilVector};

/// Thresholds used to decide "zero real part" in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// `|a₀| ≤ nil` counts as nilpotent.
    pub nil: f64,
    /// `|a₀| ≤ inv` counts as non-invertible.
    pub inv: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            nil: 1e-12,
            inv: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Tolerance { nil: tol, inv: tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeilRepr", into = "WeilRepr")]
pub struct WeilElement {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeilRepr {
    order: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<WeilRepr> for WeilElement {
    type Error = Error;

    fn try_from(repr: WeilRepr) -> Result<Self> {
        if repr.coeffs.len() != repr.order + 1 {
            return Err(Error::Shape(format!(
                "order {} requires {} coefficients, got {}",
                repr.order,
                repr.order + 1,
                repr.coeffs.len()
            )));
        }
        Ok(WeilElement {
            coeffs: repr.coeffs,
        })
    }
}

impl From<WeilElement> for WeilRepr {
    fn from(a: WeilElement) -> Self {
        WeilRepr {
            order: a.order(),
            coeffs: a.coeffs,
        }
    }
}

impl WeilElement {
    /// Builds an element from `(a₀, …, a_K)`; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Shape("a Weil element needs at least a₀".into()));
        }
        Ok(WeilElement { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        WeilElement {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn from_real(c: f64, order: usize) -> Self {
        let mut a = WeilElement::zero(order);
        a.coeffs[0] = c;
        a
    }

    /// The class of `x`; at order 0 this is the zero element.
    pub fn epsilon(order: usize) -> Self {
        WeilElement::monomial(1, order)
    }

    /// `ε^degree` (zero when `degree > order`).
    pub fn monomial(degree: usize, order: usize) -> Self {
        let mut a = WeilElement::zero(order);
        if degree <= order {
            a.coeffs[degree] = 1.0;
        }
        a
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `ε^j`, zero beyond the order.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn real_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn nilpotent_part(&self) -> WeilElement {
        let mut d = self.clone();
        d.coeffs[0] = 0.0;
        d
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn check_order(&self, other: &WeilElement) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &WeilElement) -> Result<WeilElement> {
        self.check_order(other)?;
        Ok(WeilElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &WeilElement) -> Result<WeilElement> {
        self.check_order(other)?;
        Ok(WeilElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Cauchy product truncated at degree `K`.
    pub fn try_mul(&self, other: &WeilElement) -> Result<WeilElement> {
        self.check_order(other)?;
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..a.len())
            .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
            .collect();
        Ok(WeilElement { coeffs })
    }

    pub fn scale(&self, s: f64) -> WeilElement {
        WeilElement {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Smallest `m` with `d^{m+1} = 0`; equals `⌊K / v⌋` where `v` is the lowest
    /// degree carrying a nonzero coefficient.
    pub fn nilpotency_index(&self) -> Result<usize> {
        self.nilpotency_index_with(Tolerance::default())
    }

    pub fn nilpotency_index_with(&self, tol: Tolerance) -> Result<usize> {
        let real = self.real_part();
        if real.abs() > tol.nil {
            return Err(Error::NotNilpotent { real });
        }
        let order = self.order();
        Ok(match (1..=order).find(|&j| self.coeffs[j] != 0.0) {
            Some(v) => order / v,
            None => 0,
        })
    }

    pub fn invert(&self) -> Result<WeilElement> {
        self.invert_with(Tolerance::default())
    }

    /// `a⁻¹ = a₀⁻¹ Σ_{j=0}^{K} (−d/a₀)^j`, which terminates because `d^{K+1} = 0`.
    pub fn invert_with(&self, tol: Tolerance) -> Result<WeilElement> {
        let a0 = self.real_part();
        if a0.abs() <= tol.inv {
            return Err(Error::NotInvertible { real: a0 });
        }
        let order = self.order();
        let q = self.nilpotent_part().scale(-1.0 / a0);
        let mut term = WeilElement::from_real(1.0, order);
        let mut sum = term.clone();
        for _ in 0..order {
            term = &term * &q;
            sum = &sum + &term;
        }
        Ok(sum.scale(1.0 / a0))
    }

    /// Integer power; negative exponents go through [`WeilElement::invert_with`].
    pub fn powi_with(&self, n: i32, tol: Tolerance) -> Result<WeilElement> {
        let base = if n < 0 {
            self.invert_with(tol)?
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = WeilElement::from_real(1.0, self.order());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    pub fn powi(&self, n: i32) -> Result<WeilElement> {
        self.powi_with(n, Tolerance::default())
    }

    /// Stage change `ℝ[ε^K] → ℝ[ε^L]`, dropping coefficients above `L`.
    pub fn truncate(&self, order: usize) -> Result<WeilElement> {
        if order > self.order() {
            return Err(Error::TruncationOutOfRange {
                target: order,
                order: self.order(),
            });
        }
        Ok(WeilElement {
            coeffs: self.coeffs[..=order].to_vec(),
        })
    }

    /// Largest coefficientwise absolute difference; orders must agree.
    pub fn max_abs_diff(&self, other: &WeilElement) -> Result<f64> {
        self.check_order(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl ops::Add for &WeilElement {
    type Output = WeilElement;
    fn add(self, rhs: &WeilElement) -> WeilElement {
        self.try_add(rhs).expect("Weil order mismatch")
    }
}

impl ops::Sub for &WeilElement {
    type Output = WeilElement;
    fn sub(self, rhs: &WeilElement) -> WeilElement {
        self.try_sub(rhs).expect("Weil order mismatch")
    }
}

impl ops::Mul for &WeilElement {
    type Output = WeilElement;
    fn mul(self, rhs: &WeilElement) -> WeilElement {
        self.try_mul(rhs).expect("Weil order mismatch")
    }
}

impl ops::Neg for &WeilElement {
    type Output = WeilElement;
    fn neg(self) -> WeilElement {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl ops::$trait for WeilElement {
            type Output = WeilElement;
            fn $method(self, rhs: WeilElement) -> WeilElement {
                ops::$trait::$method(&self, &rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl ops::Neg for WeilElement {
    type Output = WeilElement;
    fn neg(self) -> WeilElement {
        -&self
    }
}

impl fmt::Display for WeilElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeffs[0])?;
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            if *c == 0.0 {
                continue;
            }
            let sign = if c.is_sign_negative() { '-' } else { '+' };
            match j {
                1 => write!(f, " {sign} {}ε", c.abs())?,
                _ => write!(f, " {sign} {}ε^{j}", c.abs())?,
            }
        }
        Ok(())
    }
}
