//! Lifted semi-Riemannian geometry.
//!
//! Metric components are smooth expressions in the chart coordinates. Their
//! first and second partials are taken symbolically once, then every
//! geometric quantity is assembled from values lifted to a [`WeilPoint`], so
//! all tensors carry jet (Weil-valued) coefficients. The jet order is a pure
//! modelling parameter and never limits how many derivatives the curvature
//! chain needs.
//!
//! Curvature convention:
//! `R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km}Γ^m_{lj} − Γ^i_{lm}Γ^m_{kj}`,
//! `Ric_{jl} = R^k_{jkl}`, `ℛ = g^{jl} Ric_{jl}`.

mod tensor;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::SmoothExpr;
use crate::space::{evaluate_with, WeilPoint};
use crate::weil::{Tolerance, WeilElement};

pub use tensor::{RealTensor, TensorValue, Variance};

use Variance::{Down, Up};

/// A metric `g_{ij}` given by smooth expressions over `dim` coordinates.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    dim: usize,
    components: Vec<SmoothExpr>,
    signature: Option<Vec<i8>>,
    /// `∂_k g_{ij}` at `[(i*n + j)*n + k]`
    first: Vec<SmoothExpr>,
    /// `∂_l ∂_k g_{ij}` at `[((i*n + j)*n + k)*n + l]`, filled only for `i ≤ j`, `k ≤ l`
    second: Vec<Option<SmoothExpr>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    dim: usize,
    components: Vec<Vec<String>>,
    #[serde(default)]
    signature: Option<Vec<i8>>,
}

impl MetricSpec {
    pub fn new(components: Vec<Vec<SmoothExpr>>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Shape("metric needs at least one coordinate".into()));
        }
        for (i, row) in components.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "metric row {i} has {} entries",
                    row.len()
                )));
            }
            for (j, g) in row.iter().enumerate() {
                if g.arity() != n {
                    return Err(Error::ArityMismatch {
                        expected: n,
                        found: g.arity(),
                    });
                }
                if components[j][i] != *g {
                    return Err(Error::Shape(format!(
                        "metric is not symmetric: g[{i}][{j}] differs from g[{j}][{i}]"
                    )));
                }
            }
        }
        let flat: Vec<SmoothExpr> = components.into_iter().flatten().collect();
        let mut first = Vec::with_capacity(n * n * n);
        for g in &flat {
            for k in 1..=n {
                first.push(g.partial(k)?);
            }
        }
        let mut second = vec![None; n * n * n * n];
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    for l in k..n {
                        let d = first[(i * n + j) * n + k].partial(l + 1)?;
                        second[((i * n + j) * n + k) * n + l] = Some(d);
                    }
                }
            }
        }
        Ok(MetricSpec {
            dim: n,
            components: flat,
            signature: None,
            first,
            second,
        })
    }

    pub fn diagonal(entries: Vec<SmoothExpr>) -> Result<Self> {
        let n = entries.len();
        let rows = entries
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            d.clone()
                        } else {
                            SmoothExpr::constant(0.0, n)
                        }
                    })
                    .collect()
            })
            .collect();
        MetricSpec::new(rows)
    }

    /// Parses `{"dim": n, "components": [["expr", ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MetricFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("metric file: {e}")))?;
        if file.components.len() != file.dim {
            return Err(Error::Config(format!(
                "metric file declares dim {} but has {} rows",
                file.dim,
                file.components.len()
            )));
        }
        let rows = file
            .components
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| SmoothExpr::parse(s, file.dim))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MetricSpec::new(rows)?.with_signature(file.signature)
    }

    pub fn with_signature(mut self, signature: Option<Vec<i8>>) -> Result<Self> {
        if let Some(sig) = &signature {
            if sig.len() != self.dim || sig.iter().any(|s| s.abs() != 1) {
                return Err(Error::Config(
                    "signature must list ±1 per coordinate".into(),
                ));
            }
        }
        self.signature = signature;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> Option<&[i8]> {
        self.signature.as_deref()
    }

    pub fn component(&self, i: usize, j: usize) -> &SmoothExpr {
        &self.components[i * self.dim + j]
    }

    fn second(&self, i: usize, j: usize, k: usize, l: usize) -> &SmoothExpr {
        let (i, j) = (i.min(j), i.max(j));
        let (k, l) = (k.min(l), k.max(l));
        let n = self.dim;
        self.second[((i * n + j) * n + k) * n + l]
            .as_ref()
            .expect("upper-triangular second partials are precomputed")
    }
}

/// Sign of the `½ℛg` term and the cosmological constant in
/// `E = Ric + s·½ℛg + Λg`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convention {
    pub sign: f64,
    pub lambda: f64,
}

impl Default for Convention {
    /// The usual Einstein tensor, `s = −1`, `Λ = 0`.
    fn default() -> Self {
        Convention {
            sign: -1.0,
            lambda: 0.0,
        }
    }
}

impl Convention {
    pub fn new(paper_sign: bool, lambda: f64) -> Self {
        Convention {
            sign: if paper_sign { 1.0 } else { -1.0 },
            lambda,
        }
    }
}

fn sum_of(order: usize, terms: impl IntoIterator<Item = WeilElement>) -> WeilElement {
    terms
        .into_iter()
        .fold(WeilElement::zero(order), |acc, t| &acc + &t)
}

pub fn metric_at(g: &MetricSpec, rho: &WeilPoint) -> Result<TensorValue> {
    metric_at_with(g, rho, Tolerance::default())
}

pub fn metric_at_with(g: &MetricSpec, rho: &WeilPoint, tol: Tolerance) -> Result<TensorValue> {
    check_point(g, rho)?;
    let n = g.dim;
    let values = g
        .components
        .iter()
        .map(|c| evaluate_with(c, rho, tol))
        .collect::<Result<Vec<_>>>()?;
    TensorValue::from_entries(n, vec![Down, Down], values)
}

fn check_point(g: &MetricSpec, rho: &WeilPoint) -> Result<()> {
    if rho.dim() != g.dim {
        return Err(Error::Shape(format!(
            "metric has dimension {} but the point has {}",
            g.dim,
            rho.dim()
        )));
    }
    Ok(())
}

pub fn inverse_metric(metric: &TensorValue) -> Result<TensorValue> {
    inverse_metric_with(metric, Tolerance::default())
}

/// The real-part matrix counts as singular when `|det|` is below `tol.inv`
/// times the Hadamard bound `Π‖rowᵢ‖`.
///
/// Inverts the real-part matrix, then corrects for the nilpotent part with
/// the finite Neumann series `Σ_{j=0}^{K} (−G₀⁻¹N)^j G₀⁻¹`.
pub fn inverse_metric_with(metric: &TensorValue, tol: Tolerance) -> Result<TensorValue> {
    if metric.rank() != 2 {
        return Err(Error::Shape("inverse_metric needs a rank-2 tensor".into()));
    }
    let n = metric.dim();
    let order = metric.order();
    let real = DMatrix::from_fn(n, n, |i, j| metric.get(&[i, j]).real_part());
    let det = real.determinant();
    let hadamard: f64 = real.row_iter().map(|r| r.norm()).product();
    if det.is_nan() || det.abs() <= tol.inv * hadamard {
        return Err(Error::SingularMetric { det });
    }
    let real_inv = real.try_inverse().ok_or(Error::SingularMetric { det })?;
    let inv0: Vec<WeilElement> = (0..n * n)
        .map(|f| WeilElement::from_real(real_inv[(f / n, f % n)], order))
        .collect();
    let nil: Vec<WeilElement> = metric
        .entries()
        .iter()
        .map(|e| e.nilpotent_part())
        .collect();

    let matmul = |a: &[WeilElement], b: &[WeilElement]| -> Vec<WeilElement> {
        (0..n * n)
            .map(|f| {
                let (i, j) = (f / n, f % n);
                sum_of(order, (0..n).map(|m| &a[i * n + m] * &b[m * n + j]))
            })
            .collect()
    };

    let step: Vec<WeilElement> = matmul(&inv0, &nil).iter().map(|e| -e).collect();
    let identity: Vec<WeilElement> = (0..n * n)
        .map(|f| WeilElement::from_real(if f / n == f % n { 1.0 } else { 0.0 }, order))
        .collect();
    let mut term = identity.clone();
    let mut series = identity;
    for _ in 0..order {
        term = matmul(&term, &step);
        series = series.iter().zip(&term).map(|(a, b)| a + b).collect();
    }
    TensorValue::from_entries(n, vec![Up, Up], matmul(&series, &inv0))
}

/// Everything the curvature chain needs, lifted to one point.
struct Jets {
    n: usize,
    order: usize,
    g: TensorValue,
    ginv: TensorValue,
    /// `Γ^i_{jk}`
    gamma: Vec<WeilElement>,
    /// `∂_m Γ^i_{jk}` at `[((i*n + j)*n + k)*n + m]`
    dgamma: Vec<WeilElement>,
}

impl Jets {
    fn compute(spec: &MetricSpec, rho: &WeilPoint, tol: Tolerance) -> Result<Jets> {
        let n = spec.dim;
        let order = rho.order();
        let g = metric_at_with(spec, rho, tol)?;
        let ginv = inverse_metric_with(&g, tol)?;
        let eval = |f: &SmoothExpr| evaluate_with(f, rho, tol);
        let dg = spec.first.iter().map(eval).collect::<Result<Vec<_>>>()?;
        let d = |i: usize, j: usize, k: usize| &dg[(i * n + j) * n + k];

        let mut ddg = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        ddg.push(if i <= j && k <= l {
                            Some(eval(spec.second(i, j, k, l))?)
                        } else {
                            None
                        });
                    }
                }
            }
        }
        let dd = |i: usize, j: usize, k: usize, l: usize| {
            let (i, j) = (i.min(j), i.max(j));
            let (k, l) = (k.min(l), k.max(l));
            ddg[((i * n + j) * n + k) * n + l].as_ref().expect("filled")
        };

        // Christoffel symbols of the first kind and their partials.
        let mut first_kind = Vec::with_capacity(n * n * n);
        let mut d_first_kind = Vec::with_capacity(n.pow(4));
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = &(d(l, k, j) + d(j, l, k)) - d(j, k, l);
                    first_kind.push(s.scale(0.5));
                    for m in 0..n {
                        let s = &(dd(l, k, j, m) + dd(j, l, k, m)) - dd(j, k, l, m);
                        d_first_kind.push(s.scale(0.5));
                    }
                }
            }
        }
        let fk = |l: usize, j: usize, k: usize| &first_kind[(l * n + j) * n + k];
        let dfk =
            |l: usize, j: usize, k: usize, m: usize| &d_first_kind[((l * n + j) * n + k) * n + m];

        // ∂_m g^{il} = −g^{ia} ∂_m g_{ab} g^{bl}
        let mut dginv = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let s = sum_of(
                        order,
                        (0..n).flat_map(|a| {
                            let ginv = &ginv;
                            let d = &d;
                            (0..n)
                                .map(move |b| &(ginv.get(&[i, a]) * d(a, b, m)) * ginv.get(&[b, l]))
                        }),
                    );
                    dginv.push(-s);
                }
            }
        }

        let mut gamma = Vec::with_capacity(n * n * n);
        let mut dgamma = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    gamma.push(sum_of(
                        order,
                        (0..n).map(|l| ginv.get(&[i, l]) * fk(l, j, k)),
                    ));
                    for m in 0..n {
                        dgamma.push(sum_of(
                            order,
                            (0..n).map(|l| {
                                &(&dginv[(i * n + l) * n + m] * fk(l, j, k))
                                    + &(ginv.get(&[i, l]) * dfk(l, j, k, m))
                            }),
                        ));
                    }
                }
            }
        }
        Ok(Jets {
            n,
            order,
            g,
            ginv,
            gamma,
            dgamma,
        })
    }

    fn gamma(&self, i: usize, j: usize, k: usize) -> &WeilElement {
        &self.gamma[(i * self.n + j) * self.n + k]
    }

    fn dgamma(&self, i: usize, j: usize, k: usize, m: usize) -> &WeilElement {
        let n = self.n;
        &self.dgamma[((i * n + j) * n + k) * n + m]
    }

    fn christoffel(&self) -> TensorValue {
        TensorValue::from_entries(self.n, vec![Up, Down, Down], self.gamma.clone())
            .expect("n^3 entries")
    }

    fn riemann(&self) -> TensorValue {
        let n = self.n;
        TensorValue::from_fn(n, self.order, vec![Up, Down, Down, Down], |ix| {
            let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
            let quad = sum_of(
                self.order,
                (0..n).map(|m| {
                    &(self.gamma(i, k, m) * self.gamma(m, l, j))
                        - &(self.gamma(i, l, m) * self.gamma(m, k, j))
                }),
            );
            &(self.dgamma(i, l, j, k) - self.dgamma(i, k, j, l)) + &quad
        })
    }
}

fn ricci_from(riemann: &TensorValue) -> TensorValue {
    let n = riemann.dim();
    let order = riemann.order();
    TensorValue::from_fn(n, order, vec![Down, Down], |ix| {
        sum_of(
            order,
            (0..n).map(|k| riemann.get(&[k, ix[0], k, ix[1]]).clone()),
        )
    })
}

fn trace(ginv: &TensorValue, t: &TensorValue) -> WeilElement {
    let n = t.dim();
    sum_of(
        t.order(),
        (0..n * n).map(|f| ginv.get(&[f / n, f % n]) * t.get(&[f / n, f % n])),
    )
}

fn einstein_from(
    ricci: &TensorValue,
    scalar: &WeilElement,
    g: &TensorValue,
    conv: Convention,
) -> TensorValue {
    let coeff =
        &scalar.scale(0.5 * conv.sign) + &WeilElement::from_real(conv.lambda, scalar.order());
    TensorValue::from_fn(ricci.dim(), ricci.order(), vec![Down, Down], |ix| {
        ricci.get(ix) + &(&coeff * g.get(ix))
    })
}

/// `R_{ijkl} R^{ijkl}`, raising indices one at a time.
fn kretschmann_from(riemann: &TensorValue, g: &TensorValue, ginv: &TensorValue) -> WeilElement {
    let n = riemann.dim();
    let order = riemann.order();
    let lowered = TensorValue::from_fn(n, order, vec![Down; 4], |ix| {
        sum_of(
            order,
            (0..n).map(|a| g.get(&[ix[0], a]) * riemann.get(&[a, ix[1], ix[2], ix[3]])),
        )
    });
    let mut raised = riemann.clone();
    for slot in 1..4 {
        let src = raised;
        raised = TensorValue::from_fn(n, order, vec![Up; 4], |ix| {
            sum_of(
                order,
                (0..n).map(|b| {
                    let mut jx = [ix[0], ix[1], ix[2], ix[3]];
                    jx[slot] = b;
                    ginv.get(&[ix[slot], b]) * src.get(&jx)
                }),
            )
        });
    }
    sum_of(
        order,
        lowered
            .entries()
            .iter()
            .zip(raised.entries())
            .map(|(a, b)| a * b),
    )
}

pub fn christoffel(g: &MetricSpec, rho: &WeilPoint) -> Result<TensorValue> {
    Ok(Jets::compute(g, rho, Tolerance::default())?.christoffel())
}

pub fn riemann(g: &MetricSpec, rho: &WeilPoint) -> Result<TensorValue> {
    Ok(Jets::compute(g, rho, Tolerance::default())?.riemann())
}

pub fn ricci(g: &MetricSpec, rho: &WeilPoint) -> Result<TensorValue> {
    Ok(ricci_from(&riemann(g, rho)?))
}

pub fn scalar_curvature(g: &MetricSpec, rho: &WeilPoint) -> Result<WeilElement> {
    let jets = Jets::compute(g, rho, Tolerance::default())?;
    Ok(trace(&jets.ginv, &ricci_from(&jets.riemann())))
}

pub fn einstein_tensor(g: &MetricSpec, rho: &WeilPoint, conv: Convention) -> Result<TensorValue> {
    Ok(Curvature::compute(g, rho, conv)?.einstein)
}

/// `E / 8π`, the energy-momentum tensor read off from the field equations.
pub fn effective_stress(g: &MetricSpec, rho: &WeilPoint, conv: Convention) -> Result<TensorValue> {
    Ok(Curvature::compute(g, rho, conv)?.effective_stress())
}

pub fn kretschmann(g: &MetricSpec, rho: &WeilPoint) -> Result<WeilElement> {
    let jets = Jets::compute(g, rho, Tolerance::default())?;
    Ok(kretschmann_from(&jets.riemann(), &jets.g, &jets.ginv))
}

pub fn project_real(t: &TensorValue) -> RealTensor {
    t.project_real()
}

/// The whole lifted curvature chain at one point.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub metric: TensorValue,
    pub inverse: TensorValue,
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub scalar: WeilElement,
    pub einstein: TensorValue,
    pub kretschmann: WeilElement,
}

impl Curvature {
    pub fn compute(g: &MetricSpec, rho: &WeilPoint, conv: Convention) -> Result<Curvature> {
        Curvature::compute_with(g, rho, conv, Tolerance::default())
    }

    pub fn compute_with(
        g: &MetricSpec,
        rho: &WeilPoint,
        conv: Convention,
        tol: Tolerance,
    ) -> Result<Curvature> {
        let jets = Jets::compute(g, rho, tol)?;
        let christoffel = jets.christoffel();
        let riemann = jets.riemann();
        let ricci = ricci_from(&riemann);
        let scalar = trace(&jets.ginv, &ricci);
        let einstein = einstein_from(&ricci, &scalar, &jets.g, conv);
        let kretschmann = kretschmann_from(&riemann, &jets.g, &jets.ginv);
        Ok(Curvature {
            metric: jets.g,
            inverse: jets.ginv,
            christoffel,
            riemann,
            ricci,
            scalar,
            einstein,
            kretschmann,
        })
    }

    pub fn effective_stress(&self) -> TensorValue {
        let n = self.einstein.dim();
        TensorValue::from_fn(n, self.einstein.order(), vec![Down, Down], |ix| {
            self.einstein.get(ix).scale(1.0 / (8.0 * PI))
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "metric": self.metric.to_json(),
            "inverse": self.inverse.to_json(),
            "christoffel": self.christoffel.to_json(),
            "riemann": self.riemann.to_json(),
            "ricci": self.ricci.to_json(),
            "scalar": self.scalar,
            "einstein": self.einstein.to_json(),
            "kretschmann": self.kretschmann,
        })
    }
}
