//! Points of a smooth space seen from the stage `ℝ[ε^K]`.
//!
//! For a space presented by `n` generators, a point `ρ = ev_p + v_p` is fixed by
//! where it sends each generator: `xᵢ ↦ pᵢ + vᵢ` with `vᵢ` nilpotent. Every
//! other function is then sent to its jet, `ρ(f) = f(p + v)`.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::SmoothExpr;
use crate::weil::{lift_expr_with, Tolerance, WeilElement, WeilVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct WeilPoint {
    base: Vec<f64>,
    displacement: WeilVector,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    base: Vec<f64>,
    #[serde(default)]
    displacement: Vec<WeilElement>,
}

impl TryFrom<PointRepr> for WeilPoint {
    type Error = Error;

    fn try_from(repr: PointRepr) -> Result<Self> {
        if repr.displacement.is_empty() {
            return Ok(WeilPoint::evaluation(repr.base, 0));
        }
        WeilPoint::new(repr.base, WeilVector::new(repr.displacement)?)
    }
}

impl From<WeilPoint> for PointRepr {
    fn from(p: WeilPoint) -> Self {
        PointRepr {
            base: p.base,
            displacement: p.displacement.components().to_vec(),
        }
    }
}

impl WeilPoint {
    pub fn new(base: Vec<f64>, displacement: WeilVector) -> Result<Self> {
        WeilPoint::new_with(base, displacement, Tolerance::default())
    }

    /// Validates that every displacement component is nilpotent (within `tol.nil`)
    /// and stores its exact nilpotent part.
    pub fn new_with(base: Vec<f64>, displacement: WeilVector, tol: Tolerance) -> Result<Self> {
        if base.len() != displacement.len() {
            return Err(Error::Shape(format!(
                "base has {} coordinates but displacement has {}",
                base.len(),
                displacement.len()
            )));
        }
        let order = displacement.order();
        let mut parts = Vec::with_capacity(base.len());
        for v in displacement.components() {
            let real = v.real_part();
            if real.abs() > tol.nil {
                return Err(Error::NotNilpotent { real });
            }
            parts.push(v.nilpotent_part());
        }
        let displacement = if parts.is_empty() {
            WeilVector::empty(order)
        } else {
            WeilVector::new(parts)?
        };
        Ok(WeilPoint { base, displacement })
    }

    /// `ev_p` at stage `order`: zero displacement.
    pub fn evaluation(base: Vec<f64>, order: usize) -> Self {
        let displacement = if base.is_empty() {
            WeilVector::empty(order)
        } else {
            WeilVector::from_reals(&vec![0.0; base.len()], order)
        };
        WeilPoint { base, displacement }
    }

    /// `ev_p + direction·ε` at stage `order`.
    pub fn along(base: Vec<f64>, direction: &[f64], order: usize) -> Result<Self> {
        if direction.len() != base.len() {
            return Err(Error::Shape("direction length differs from base".into()));
        }
        if base.is_empty() {
            return Ok(WeilPoint::evaluation(base, order));
        }
        let eps = WeilElement::epsilon(order);
        let v = WeilVector::new(direction.iter().map(|&d| eps.scale(d)).collect())?;
        WeilPoint::new(base, v)
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn displacement(&self) -> &WeilVector {
        &self.displacement
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn order(&self) -> usize {
        self.displacement.order()
    }

    /// The underlying evaluation `ev_p` at the same stage.
    pub fn real_point(&self) -> WeilPoint {
        WeilPoint::evaluation(self.base.clone(), self.order())
    }

    /// Same generator images viewed at another stage: truncated when lowering,
    /// zero-padded when raising.
    pub fn at_order(&self, order: usize) -> WeilPoint {
        if self.base.is_empty() {
            return WeilPoint::evaluation(Vec::new(), order);
        }
        let comps = self
            .displacement
            .components()
            .iter()
            .map(|v| {
                let mut c: Vec<f64> = v.coeffs().iter().copied().take(order + 1).collect();
                c.resize(order + 1, 0.0);
                WeilElement::new(c).expect("non-empty")
            })
            .collect();
        WeilPoint {
            base: self.base.clone(),
            displacement: WeilVector::new(comps).expect("uniform order"),
        }
    }

    /// Images of the generators, `pᵢ + vᵢ`.
    pub fn generator_values(&self) -> WeilVector {
        if self.base.is_empty() {
            return WeilVector::empty(self.order());
        }
        let comps = self
            .base
            .iter()
            .zip(self.displacement.components())
            .map(|(&p, v)| &WeilElement::from_real(p, self.order()) + v)
            .collect();
        WeilVector::new(comps).expect("uniform order")
    }

    fn check_shape(&self, other: &WeilPoint) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "points of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    /// Generator-wise difference `(σ − ρ)(xᵢ)` with `self = ρ`.
    fn difference(&self, other: &WeilPoint) -> Result<Vec<WeilElement>> {
        self.check_shape(other)?;
        Ok(other
            .generator_values()
            .components()
            .iter()
            .zip(self.generator_values().components())
            .map(|(s, r)| s - r)
            .collect())
    }
}

/// `f̄(ρ) = ρ(f)`.
pub fn evaluate(f: &SmoothExpr, rho: &WeilPoint) -> Result<WeilElement> {
    evaluate_with(f, rho, Tolerance::default())
}

pub fn evaluate_with(f: &SmoothExpr, rho: &WeilPoint, tol: Tolerance) -> Result<WeilElement> {
    lift_expr_with(f, &rho.generator_values(), tol)
}

/// Quasi-distance between points: an index in `0..=K`, or infinite when the
/// underlying real points differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QDist {
    Finite(usize),
    Infinite,
}

impl fmt::Display for QDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QDist::Finite(k) => write!(f, "{k}"),
            QDist::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for QDist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QDist::Finite(k) => s.serialize_u64(*k as u64),
            QDist::Infinite => s.serialize_str("inf"),
        }
    }
}

fn same_base(rho: &WeilPoint, sigma: &WeilPoint, tol: Tolerance) -> bool {
    rho.base
        .iter()
        .zip(&sigma.base)
        .all(|(a, b)| (a - b).abs() <= tol.nil)
}

pub fn qdist(rho: &WeilPoint, sigma: &WeilPoint) -> Result<QDist> {
    qdist_with(rho, sigma, Tolerance::default())
}

pub fn qdist_with(rho: &WeilPoint, sigma: &WeilPoint, tol: Tolerance) -> Result<QDist> {
    let diff = rho.difference(sigma)?;
    if !same_base(rho, sigma, tol) {
        return Ok(QDist::Infinite);
    }
    let mut worst = 0;
    for d in &diff {
        worst = worst.max(d.nilpotency_index_with(tol)?);
    }
    Ok(QDist::Finite(worst))
}

/// `ρ ∼_k σ`: the difference on every generator lies in `D_k`.
pub fn neighbour(rho: &WeilPoint, sigma: &WeilPoint, k: usize) -> Result<bool> {
    neighbour_with(rho, sigma, k, Tolerance::default())
}

pub fn neighbour_with(
    rho: &WeilPoint,
    sigma: &WeilPoint,
    k: usize,
    tol: Tolerance,
) -> Result<bool> {
    Ok(qdist_with(rho, sigma, tol)? <= QDist::Finite(k))
}

/// The `k`-monad `M_k(ρ)`, represented by its membership predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct Monad {
    center: WeilPoint,
    radius: usize,
}

impl Monad {
    pub fn new(center: WeilPoint, radius: usize) -> Result<Self> {
        if radius > center.order() {
            return Err(Error::Shape(format!(
                "monad radius {radius} exceeds stage order {}",
                center.order()
            )));
        }
        Ok(Monad { center, radius })
    }

    pub fn center(&self) -> &WeilPoint {
        &self.center
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Dimension of `D_k` inside `ℝ[ε^K]`, spanned by `ε, …, ε^k`.
    pub fn fibre_dim(&self) -> usize {
        self.radius
    }

    pub fn contains(&self, sigma: &WeilPoint) -> Result<bool> {
        neighbour(&self.center, sigma, self.radius)
    }

    pub fn contains_with(&self, sigma: &WeilPoint, tol: Tolerance) -> Result<bool> {
        neighbour_with(&self.center, sigma, self.radius, tol)
    }
}

pub fn monad_contains(m: &Monad, sigma: &WeilPoint) -> Result<bool> {
    m.contains(sigma)
}

/// `Ḡ(ρ) = ρ ∘ G*` for a smooth map `G = (G₁, …, G_m)` given in coordinates.
pub fn pushforward(map: &[SmoothExpr], rho: &WeilPoint) -> Result<WeilPoint> {
    let order = rho.order();
    let mut base = Vec::with_capacity(map.len());
    let mut disp = Vec::with_capacity(map.len());
    for g in map {
        if g.arity() != rho.dim() {
            return Err(Error::ArityMismatch {
                expected: rho.dim(),
                found: g.arity(),
            });
        }
        let image = evaluate(g, rho)?;
        base.push(g.eval_real(rho.base())?);
        disp.push(image.nilpotent_part());
    }
    let disp = if disp.is_empty() {
        WeilVector::empty(order)
    } else {
        WeilVector::new(disp)?
    };
    WeilPoint::new(base, disp)
}

/// A derivation `X = Σ aᵢ ∂ᵢ` with smooth coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    coeffs: Vec<SmoothExpr>,
}

impl Derivation {
    pub fn new(coeffs: Vec<SmoothExpr>) -> Result<Self> {
        let n = coeffs.len();
        if let Some(bad) = coeffs.iter().find(|c| c.arity() != n) {
            return Err(Error::ArityMismatch {
                expected: n,
                found: bad.arity(),
            });
        }
        Ok(Derivation { coeffs })
    }

    /// `∂ᵢ` on `n` generators.
    pub fn coordinate(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::VariableOutOfRange { index: i, arity: n });
        }
        let coeffs = (1..=n)
            .map(|j| SmoothExpr::constant(if j == i { 1.0 } else { 0.0 }, n))
            .collect();
        Ok(Derivation { coeffs })
    }

    pub fn coeffs(&self) -> &[SmoothExpr] {
        &self.coeffs
    }

    /// `Xf = Σᵢ aᵢ · ∂f/∂xᵢ`.
    pub fn apply(&self, f: &SmoothExpr) -> Result<SmoothExpr> {
        let n = self.coeffs.len();
        if f.arity() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: f.arity(),
            });
        }
        let mut acc = SmoothExpr::constant(0.0, n);
        for (i, a) in self.coeffs.iter().enumerate() {
            acc = acc + a * &f.partial(i + 1)?;
        }
        Ok(acc)
    }

    /// `X̄(f̄)(ρ) = ρ(Xf)`.
    pub fn lifted(&self, f: &SmoothExpr, rho: &WeilPoint) -> Result<WeilElement> {
        evaluate(&self.apply(f)?, rho)
    }
}

pub fn apply_derivation(x: &[SmoothExpr], f: &SmoothExpr) -> Result<SmoothExpr> {
    Derivation::new(x.to_vec())?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(text: &str, n: usize) -> SmoothExpr {
        SmoothExpr::parse(text, n).unwrap()
    }

    fn w(c: &[f64]) -> WeilElement {
        WeilElement::new(c.to_vec()).unwrap()
    }

    fn point(base: &[f64], disp: &[&[f64]]) -> WeilPoint {
        let v = WeilVector::new(disp.iter().map(|c| w(c)).collect()).unwrap();
        WeilPoint::new(base.to_vec(), v).unwrap()
    }

    #[test]
    fn evaluating_generators_and_polynomials() {
        let rho = point(&[3.0], &[&[0.0, 1.0]]);
        assert_eq!(evaluate(&e("x1", 1), &rho).unwrap(), w(&[3.0, 1.0]));

        let rho = point(&[2.0], &[&[0.0, 1.0, 1.0]]);
        assert_eq!(evaluate(&e("x1*x1", 1), &rho).unwrap(), w(&[4.0, 4.0, 5.0]));
    }

    #[test]
    fn zero_displacement_is_plain_evaluation() {
        let f = e("sin(x1)*exp(x2)", 2);
        let rho = WeilPoint::evaluation(vec![0.3, -0.2], 4);
        let val = evaluate(&f, &rho).unwrap();
        assert_eq!(
            val,
            WeilElement::from_real(f.eval_real(&[0.3, -0.2]).unwrap(), 4)
        );
    }

    #[test]
    fn displacement_must_be_nilpotent() {
        let v = WeilVector::new(vec![w(&[0.5, 1.0])]).unwrap();
        assert_eq!(
            WeilPoint::new(vec![0.0], v),
            Err(Error::NotNilpotent { real: 0.5 })
        );
    }

    #[test]
    fn neighbour_relation_examples() {
        let rho = point(&[1.0, 2.0], &[&[0.0; 6], &[0.0; 6]]);
        let sigma = point(&[1.0, 2.0], &[&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0], &[0.0; 6]]);
        for k in 0..=5 {
            assert!(neighbour(&rho, &rho, k).unwrap());
        }
        assert!(neighbour(&rho, &sigma, 2).unwrap());
        assert!(!neighbour(&rho, &sigma, 1).unwrap());
        assert_eq!(qdist(&rho, &sigma).unwrap(), QDist::Finite(2));
        assert_eq!(qdist(&rho, &rho).unwrap(), QDist::Finite(0));

        let far = point(&[1.5, 2.0], &[&[0.0; 6], &[0.0; 6]]);
        assert_eq!(qdist(&rho, &far).unwrap(), QDist::Infinite);
        assert!(!neighbour(&rho, &far, 5).unwrap());
        assert!(!neighbour(&rho, &far, usize::MAX).unwrap());
    }

    #[test]
    fn qdist_shape_errors() {
        let a = WeilPoint::evaluation(vec![0.0], 2);
        assert!(matches!(
            qdist(&a, &WeilPoint::evaluation(vec![0.0, 1.0], 2)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            qdist(&a, &WeilPoint::evaluation(vec![0.0], 3)),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn qdist_json() {
        assert_eq!(serde_json::to_string(&QDist::Finite(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&QDist::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn monads() {
        let center = point(&[0.0], &[&[0.0, 1.0, 0.0, 0.0]]);
        let other = point(&[0.0], &[&[0.0, 0.0, 0.0, 5.0]]);
        assert!(Monad::new(center.clone(), 3)
            .unwrap()
            .contains(&center)
            .unwrap());
        assert!(Monad::new(center.clone(), 3)
            .unwrap()
            .contains(&other)
            .unwrap());
        let m0 = Monad::new(center.clone(), 0).unwrap();
        assert!(m0.contains(&center).unwrap());
        assert!(!m0.contains(&other).unwrap());
        assert!(Monad::new(center, 4).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let rho = point(&[2.0], &[&[0.0, 1.0, 0.0]]);
        let sq = pushforward(&[e("x1*x1", 1)], &rho).unwrap();
        assert_eq!(sq.base(), &[4.0]);
        assert_eq!(sq.displacement().components(), &[w(&[0.0, 4.0, 1.0])]);

        let rho2 = point(&[0.5, -1.0], &[&[0.0, 1.0, 2.0], &[0.0, -3.0, 0.5]]);
        let id = pushforward(&[e("x1", 2), e("x2", 2)], &rho2).unwrap();
        assert_eq!(id, rho2);

        let constant = pushforward(&[e("7.5", 2)], &rho2).unwrap();
        assert_eq!(constant.base(), &[7.5]);
        assert!(constant.displacement().components()[0].is_zero());

        assert!(matches!(
            pushforward(&[e("x1", 1)], &rho2),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn derivations() {
        let d1 = Derivation::coordinate(1, 2).unwrap();
        let f = e("x1*x2", 2);
        let g = d1.apply(&f).unwrap();
        for p in [[1.0, 2.0], [-0.5, 3.25]] {
            assert_eq!(g.eval_real(&p).unwrap(), p[1]);
        }
        let x = Derivation::new(vec![e("sin(x1)", 2), e("x1*x2", 2)]).unwrap();
        let c = x.apply(&e("4.2", 2)).unwrap();
        assert_eq!(c.eval_real(&[0.3, 0.9]).unwrap(), 0.0);

        let euler = Derivation::new(vec![e("x1", 1)]).unwrap();
        let cubic = euler.apply(&e("x1^3", 1)).unwrap();
        for x in [-2.0, -0.3, 0.7, 1.9] {
            let want = 3.0 * f64::powi(x, 3);
            assert!((cubic.eval_real(&[x]).unwrap() - want).abs() <= 1e-10 * want.abs());
        }
    }

    #[test]
    fn lifted_derivation_is_evaluation_of_xf() {
        let x = Derivation::new(vec![e("x2", 2), e("-x1", 2)]).unwrap();
        let f = e("x1*x1 + x2*exp(x1)", 2);
        let rho = point(&[0.4, 1.1], &[&[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let lifted = x.lifted(&f, &rho).unwrap();
        let xf = x.apply(&f).unwrap();
        assert_eq!(lifted, evaluate(&xf, &rho).unwrap());
        assert_eq!(lifted.real_part(), xf.eval_real(&[0.4, 1.1]).unwrap());
    }

    #[test]
    fn point_json_roundtrip_and_validation() {
        let rho = point(&[1.0, 2.0], &[&[0.0, 1.0], &[0.0, -0.5]]);
        let text = serde_json::to_string(&rho).unwrap();
        assert_eq!(
            text,
            r#"{"base":[1.0,2.0],"displacement":[{"order":1,"coeffs":[0.0,1.0]},{"order":1,"coeffs":[0.0,-0.5]}]}"#
        );
        assert_eq!(serde_json::from_str::<WeilPoint>(&text).unwrap(), rho);
        let bad = r#"{"base":[1.0],"displacement":[{"order":1,"coeffs":[0.3,1.0]}]}"#;
        assert!(serde_json::from_str::<WeilPoint>(bad).is_err());
        let bare: WeilPoint = serde_json::from_str(r#"{"base":[1.0, 2.0]}"#).unwrap();
        assert_eq!(bare, WeilPoint::evaluation(vec![1.0, 2.0], 0));
    }

    #[test]
    fn restaging_points() {
        let rho = point(&[1.0], &[&[0.0, 1.0, 2.0]]);
        assert_eq!(rho.at_order(1), point(&[1.0], &[&[0.0, 1.0]]));
        assert_eq!(rho.at_order(3), point(&[1.0], &[&[0.0, 1.0, 2.0, 0.0]]));
    }
}
