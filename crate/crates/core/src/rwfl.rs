//! Robertson-Walker (FLRW) backward evolution towards the initial singularity.
//!
//! The scale factor is a smooth expression in `x1 = t`. Curvature invariants
//! are lifted to a probe point displaced by a nilpotent amount in time; when
//! `S(t)` drops to `s_min` the run switches to the monad-collapse schedule,
//! where the stage index `k` takes over as a discrete clock.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Primitive, SmoothExpr};
use crate::geometry::{Convention, Curvature, MetricSpec, TensorValue};
use crate::space::{Monad, WeilPoint};
use crate::weil::{Tolerance, WeilElement};

pub const CSV_HEADER: &str =
    "t,S,Sdot,R_re,R_eps1,kretschmann_re,kretschmann_eps1,density,pressure,phase,k";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// `S(t) = t^q`
    Power(f64),
    /// Any expression in `x1`
    Expr(String),
}

impl Scale {
    pub fn to_expr(&self) -> Result<SmoothExpr> {
        match self {
            Scale::Power(q) => {
                let t = SmoothExpr::var(1, 1)?;
                Ok((SmoothExpr::constant(*q, 1) * t.apply(Primitive::Log)).apply(Primitive::Exp))
            }
            Scale::Expr(text) => SmoothExpr::parse(text, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwflConfig {
    #[serde(default)]
    pub kappa: i64,
    pub scale: Scale,
    #[serde(default = "defaults::order")]
    pub order: usize,
    #[serde(default = "defaults::t_start")]
    pub t_start: f64,
    #[serde(default = "defaults::t_end")]
    pub t_end: f64,
    #[serde(default = "defaults::ratio")]
    pub ratio: f64,
    #[serde(default = "defaults::s_min")]
    pub s_min: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub paper_sign: bool,
    /// Spatial chart coordinates `(x, y, z)` of the probe.
    #[serde(default = "defaults::probe")]
    pub probe: [f64; 3],
    /// Coefficient of `ε` added to each generator `(t, x, y, z)`.
    #[serde(default = "defaults::probe_displacement")]
    pub probe_displacement: [f64; 4],
    /// First stage of the collapse schedule; `order` when absent.
    #[serde(default)]
    pub collapse_start_k: Option<usize>,
}

mod defaults {
    pub fn order() -> usize {
        1
    }
    pub fn t_start() -> f64 {
        1.0
    }
    pub fn t_end() -> f64 {
        1e-4
    }
    pub fn ratio() -> f64 {
        0.5
    }
    pub fn s_min() -> f64 {
        1e-6
    }
    pub fn probe() -> [f64; 3] {
        [1.0, 1.0, 1.0]
    }
    pub fn probe_displacement() -> [f64; 4] {
        [1.0, 0.0, 0.0, 0.0]
    }
}

impl RwflConfig {
    pub fn new(scale: Scale) -> Self {
        RwflConfig {
            kappa: 0,
            scale,
            order: defaults::order(),
            t_start: defaults::t_start(),
            t_end: defaults::t_end(),
            ratio: defaults::ratio(),
            s_min: defaults::s_min(),
            lambda: 0.0,
            paper_sign: false,
            probe: defaults::probe(),
            probe_displacement: defaults::probe_displacement(),
            collapse_start_k: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RwflConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RwflConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !matches!(self.kappa, -1..=1) {
            return bad(format!("kappa must be -1, 0 or 1, got {}", self.kappa));
        }
        if self.order < 1 {
            return bad("order must be at least 1".into());
        }
        if !(self.t_end > 0.0 && self.t_start > self.t_end && self.t_start.is_finite()) {
            return bad(format!(
                "need t_start > t_end > 0, got t_start = {}, t_end = {}",
                self.t_start, self.t_end
            ));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad(format!("ratio must lie in (0, 1), got {}", self.ratio));
        }
        if self.s_min.is_nan() || self.s_min <= 0.0 {
            return bad(format!("s_min must be positive, got {}", self.s_min));
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        if let Some(k) = self.collapse_start_k {
            if k > self.order {
                return bad(format!("collapse_start_k {k} exceeds order {}", self.order));
            }
        }
        if let Scale::Power(q) = self.scale {
            if !q.is_finite() {
                return bad("scale power must be finite".into());
            }
        }
        self.scale
            .to_expr()
            .map_err(|e| Error::Config(format!("scale: {e}")))?;
        Ok(())
    }

    pub fn convention(&self) -> Convention {
        Convention::new(self.paper_sign, self.lambda)
    }

    /// Descending geometric grid `t_start·rⁱ`, down to `t_end`.
    pub fn grid(&self) -> Vec<f64> {
        let floor = self.t_end * (1.0 - 1e-12);
        (0..)
            .map(|i| self.t_start * self.ratio.powi(i))
            .take_while(|&t| t >= floor)
            .collect()
    }
}

/// `−dt² + S²h_κ` on the chart `(t, x, y, z)`; hyperspherical angles for `κ = ±1`.
pub fn rwfl_metric(kappa: i64, scale: &SmoothExpr) -> Result<MetricSpec> {
    if scale.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: scale.arity(),
        });
    }
    let s = scale.with_arity(4)?;
    let s2 = s.powi(2);
    let var = |i| SmoothExpr::var(i, 4);
    let spatial = match kappa {
        0 => [s2.clone(), s2.clone(), s2],
        1 | -1 => {
            let f = var(2)?.apply(if kappa == 1 {
                Primitive::Sin
            } else {
                Primitive::Exp
            });
            let f = if kappa == 1 {
                f
            } else {
                // sinh x = (eˣ − e⁻ˣ)/2
                (f.clone() - f.apply(Primitive::Recip)) * SmoothExpr::constant(0.5, 4)
            };
            let f2 = f.powi(2);
            let sin_y2 = var(3)?.apply(Primitive::Sin).powi(2);
            [s2.clone(), &s2 * &f2, &(&s2 * &f2) * &sin_y2]
        }
        other => {
            return Err(Error::Config(format!(
                "kappa must be -1, 0 or 1, got {other}"
            )))
        }
    };
    let mut diag = vec![SmoothExpr::constant(-1.0, 4)];
    diag.extend(spatial);
    MetricSpec::diagonal(diag)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Macroscopic,
    Collapse,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Macroscopic => "macroscopic",
            Phase::Collapse => "collapse",
        }
    }
}

/// Real invariants from the same chain evaluated at the plain point `ev_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classical {
    pub scalar: f64,
    pub kretschmann: f64,
    pub density: f64,
    pub pressure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionRecord {
    pub t: f64,
    pub s: f64,
    pub sdot: f64,
    pub scalar: Option<WeilElement>,
    pub kretschmann: Option<WeilElement>,
    pub density: Option<f64>,
    pub pressure: Option<f64>,
    pub phase: Phase,
    pub k: usize,
    #[serde(skip)]
    pub classical: Option<Classical>,
}

impl EvolutionRecord {
    /// Largest gap between a lifted real part and its classical value.
    pub fn latency_defect(&self) -> Option<f64> {
        let c = self.classical?;
        let pairs = [
            (self.scalar.as_ref()?.real_part(), c.scalar),
            (self.kretschmann.as_ref()?.real_part(), c.kretschmann),
            (self.density?, c.density),
            (self.pressure?, c.pressure),
        ];
        Some(pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let part = |e: &Option<WeilElement>, j: usize| opt(e.as_ref().map(|e| e.coeff(j)));
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.s,
            self.sdot,
            part(&self.scalar, 0),
            part(&self.scalar, 1),
            part(&self.kretschmann, 0),
            part(&self.kretschmann, 1),
            opt(self.density),
            opt(self.pressure),
            self.phase.as_str(),
            self.k
        )
    }
}

pub fn to_csv(records: &[EvolutionRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// `E₀₀/8π` and `E₁₁/(8π g₁₁)`.
fn fluid(stress: &TensorValue, metric: &TensorValue) -> (f64, f64) {
    let density = stress.get(&[0, 0]).real_part();
    let pressure = stress.get(&[1, 1]).real_part() / metric.get(&[1, 1]).real_part();
    (density, pressure)
}

struct Model {
    cfg: RwflConfig,
    tol: Tolerance,
    scale: SmoothExpr,
    sdot: SmoothExpr,
    metric: MetricSpec,
}

impl Model {
    fn new(cfg: &RwflConfig, tol: Tolerance) -> Result<Model> {
        cfg.validate()?;
        let scale = cfg.scale.to_expr()?;
        let sdot = scale.partial(1)?;
        let metric = rwfl_metric(cfg.kappa, &scale)?;
        Ok(Model {
            cfg: cfg.clone(),
            tol,
            scale,
            sdot,
            metric,
        })
    }

    fn base(&self, t: f64) -> Vec<f64> {
        let [x, y, z] = self.cfg.probe;
        vec![t, x, y, z]
    }

    fn probe(&self, t: f64) -> Result<WeilPoint> {
        WeilPoint::along(self.base(t), &self.cfg.probe_displacement, self.cfg.order)
    }

    fn scale_at(&self, t: f64) -> Result<f64> {
        let s = self.scale.eval_real(&[t])?;
        if s.is_nan() || s <= 0.0 || s.is_infinite() {
            return Err(Error::Domain {
                primitive: "scale",
                value: s,
            });
        }
        Ok(s)
    }

    fn record(&self, t: f64) -> Result<EvolutionRecord> {
        let conv = self.cfg.convention();
        let s = self.scale_at(t)?;
        let sdot = self.sdot.eval_real(&[t])?;
        let lifted = Curvature::compute_with(&self.metric, &self.probe(t)?, conv, self.tol)?;
        let (density, pressure) = fluid(&lifted.effective_stress(), &lifted.metric);
        let plain = WeilPoint::evaluation(self.base(t), 0);
        let plain = Curvature::compute_with(&self.metric, &plain, conv, self.tol)?;
        let (c_density, c_pressure) = fluid(&plain.effective_stress(), &plain.metric);
        Ok(EvolutionRecord {
            t,
            s,
            sdot,
            scalar: Some(lifted.scalar),
            kretschmann: Some(lifted.kretschmann),
            density: Some(density),
            pressure: Some(pressure),
            phase: Phase::Macroscopic,
            k: self.cfg.order,
            classical: Some(Classical {
                scalar: plain.scalar.real_part(),
                kretschmann: plain.kretschmann.real_part(),
                density: c_density,
                pressure: c_pressure,
            }),
        })
    }
}

/// Steps backwards along the grid. Grid points are evaluated in parallel; the
/// result keeps descending-`t` order.
pub fn evolve_backwards(cfg: &RwflConfig) -> Result<Vec<EvolutionRecord>> {
    evolve_backwards_with(cfg, Tolerance::default())
}

pub fn evolve_backwards_with(cfg: &RwflConfig, tol: Tolerance) -> Result<Vec<EvolutionRecord>> {
    let model = Model::new(cfg, tol)?;
    let mut macroscopic = Vec::new();
    let mut trigger = None;
    for t in cfg.grid() {
        let s = model.scale_at(t)?;
        if s <= cfg.s_min {
            trigger = Some((t, s));
            break;
        }
        macroscopic.push(t);
    }
    let mut records = macroscopic
        .par_iter()
        .map(|&t| model.record(t))
        .collect::<Result<Vec<_>>>()?;
    if let Some((t, s)) = trigger {
        let sdot = model.sdot.eval_real(&[t])?;
        let start = cfg.collapse_start_k.unwrap_or(cfg.order);
        let center = WeilPoint::evaluation(model.base(t), cfg.order);
        for (k, _, _) in monad_collapse(start, &center)? {
            records.push(EvolutionRecord {
                t,
                s,
                sdot,
                scalar: None,
                kretschmann: None,
                density: None,
                pressure: None,
                phase: Phase::Collapse,
                k,
                classical: None,
            });
        }
    }
    Ok(records)
}

/// `(k, M_k(center), dim D_k)` for `k = start, …, 0`. The center is viewed at
/// stage `start` if it lives at a lower one.
pub fn monad_collapse(start: usize, center: &WeilPoint) -> Result<Vec<(usize, Monad, usize)>> {
    let center = if center.order() < start {
        center.at_order(start)
    } else {
        center.clone()
    };
    (0..=start)
        .rev()
        .map(|k| {
            let m = Monad::new(center.clone(), k)?;
            let dim = m.fibre_dim();
            Ok((k, m, dim))
        })
        .collect()
}

/// The singular point as an `n`-generator chart origin at stage `order`.
pub fn singular_center(dim: usize, order: usize) -> WeilPoint {
    WeilPoint::evaluation(vec![0.0; dim], order)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FriedmannRow {
    pub t: f64,
    pub density: f64,
    pub pressure: f64,
}

pub fn friedmann_report(cfg: &RwflConfig) -> Result<Vec<FriedmannRow>> {
    let rows: Vec<FriedmannRow> = evolve_backwards(cfg)?
        .iter()
        .filter(|r| r.phase == Phase::Macroscopic)
        .map(|r| FriedmannRow {
            t: r.t,
            density: r.density.unwrap_or_default(),
            pressure: r.pressure.unwrap_or_default(),
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Config("no macroscopic records on the grid".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::qdist;
    use crate::space::QDist;
    use crate::weil::WeilVector;

    fn power(q: f64) -> RwflConfig {
        RwflConfig::new(Scale::Power(q))
    }

    #[test]
    fn flat_static_metric_is_minkowski() {
        let g = rwfl_metric(0, &SmoothExpr::constant(1.0, 1)).unwrap();
        let p = WeilPoint::evaluation(vec![0.5, 0.0, 0.0, 0.0], 0);
        let m = crate::geometry::metric_at(&g, &p).unwrap().project_real();
        let mut expected = vec![0.0; 16];
        for (i, v) in [-1.0, 1.0, 1.0, 1.0].into_iter().enumerate() {
            expected[i * 5] = v;
        }
        assert_eq!(m.data, expected);
    }

    #[test]
    fn power_scale_substitution() {
        let s = Scale::Power(2.0 / 3.0).to_expr().unwrap();
        let g = rwfl_metric(0, &s).unwrap();
        let t: f64 = 0.37;
        let g11 = g.component(1, 1).eval_real(&[t, 0.0, 0.0, 0.0]).unwrap();
        assert!((g11 - t.powf(4.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn invalid_kappa() {
        assert!(matches!(
            rwfl_metric(2, &SmoothExpr::constant(1.0, 1)),
            Err(Error::Config(_))
        ));
        let mut cfg = power(0.5);
        cfg.kappa = -2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_config() {
        let cfg = RwflConfig::from_toml(
            "kappa = 1\nscale = { expr = \"2 + x1\" }\norder = 3\nt_end = 0.1\nratio = 0.25\n",
        )
        .unwrap();
        assert_eq!(cfg.kappa, 1);
        assert_eq!(cfg.scale, Scale::Expr("2 + x1".into()));
        assert_eq!(cfg.s_min, 1e-6);
        assert_eq!(cfg.grid(), vec![1.0, 0.25]);
        let p = RwflConfig::from_toml("scale = { power = 0.5 }").unwrap();
        assert_eq!(p.scale, Scale::Power(0.5));
        for bad in [
            "scale = { power = 0.5 }\nratio = 1.5",
            "scale = { power = 0.5 }\nt_end = 2.0",
            "scale = { power = 0.5 }\norder = 0",
            "scale = { power = 0.5 }\nbogus = 1",
            "scale = { expr = \"x2\" }",
            "order = 2",
        ] {
            assert!(
                matches!(RwflConfig::from_toml(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn grid_reaches_end() {
        let mut cfg = power(0.5);
        cfg.t_end = 0.125;
        assert_eq!(cfg.grid(), vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn minkowski_evolution_is_flat() {
        let recs = evolve_backwards(&RwflConfig::new(Scale::Expr("1".into()))).unwrap();
        assert!(recs.iter().all(|r| r.phase == Phase::Macroscopic));
        for r in &recs {
            assert!(r.scalar.as_ref().unwrap().is_zero());
            assert!(r.kretschmann.as_ref().unwrap().is_zero());
            assert_eq!(r.density, Some(0.0));
            assert_eq!(r.pressure, Some(0.0));
        }
    }

    #[test]
    fn dust_scalar_curvature_scaling() {
        let mut cfg = power(2.0 / 3.0);
        cfg.t_end = 1e-2;
        let recs = evolve_backwards(&cfg).unwrap();
        for w in recs.windows(2) {
            let ratio = w[1].scalar.as_ref().unwrap().real_part()
                / w[0].scalar.as_ref().unwrap().real_part();
            assert!((ratio - 4.0).abs() < 4e-6, "{ratio}");
        }
    }

    #[test]
    fn collapse_appended_below_threshold() {
        let mut cfg = power(2.0);
        cfg.order = 3;
        cfg.t_end = 1e-4;
        cfg.s_min = 1e-4;
        let recs = evolve_backwards(&cfg).map_err(|e| e.to_string()).unwrap();
        let collapse: Vec<_> = recs.iter().filter(|r| r.phase == Phase::Collapse).collect();
        assert_eq!(
            collapse.iter().map(|r| r.k).collect::<Vec<_>>(),
            vec![3, 2, 1, 0]
        );
        assert!(collapse.iter().all(|r| r.t == collapse[0].t && r.s <= 1e-4));
        assert!(recs
            .iter()
            .filter(|r| r.phase == Phase::Macroscopic)
            .all(|r| r.s > 1e-4 && r.k == 3));
        let csv = to_csv(&recs);
        assert!(csv.starts_with(&format!("{CSV_HEADER}\n")));
        assert!(csv.lines().last().unwrap().ends_with(",,,,,,collapse,0"));
    }

    #[test]
    fn collapse_schedule() {
        let seq = monad_collapse(3, &singular_center(1, 3)).unwrap();
        assert_eq!(
            seq.iter().map(|s| s.2).collect::<Vec<_>>(),
            vec![3, 2, 1, 0]
        );
        let center = singular_center(1, 4);
        let d = WeilElement::monomial(2, 4).scale(0.7);
        let sigma = WeilPoint::new(vec![0.0], WeilVector::new(vec![d]).unwrap()).unwrap();
        assert_eq!(qdist(&center, &sigma).unwrap(), QDist::Finite(2));
        let member: Vec<bool> = monad_collapse(4, &center)
            .unwrap()
            .iter()
            .map(|(_, m, _)| m.contains(&sigma).unwrap())
            .collect();
        assert_eq!(member, vec![true, true, true, false, false]);
        let only = monad_collapse(0, &singular_center(0, 0)).unwrap();
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].0, 0);
    }
}
