use weiljet::geometry::{
    christoffel, inverse_metric, metric_at, project_real, riemann, Convention, Curvature,
    MetricSpec,
};
use weiljet::space::WeilPoint;
use weiljet::SmoothExpr;

fn e(text: &str, n: usize) -> SmoothExpr {
    SmoothExpr::parse(text, n).unwrap()
}

/// A non-diagonal 3-metric with Lorentzian signature.
fn warped() -> MetricSpec {
    let rows = [
        ["-(1 + x2^2 / 4)", "0.2 * sin(x1)", "0"],
        ["0.2 * sin(x1)", "exp(0.3 * x1)", "0.1 * x3"],
        ["0", "0.1 * x3", "2 + cos(x2)"],
    ];
    MetricSpec::new(
        rows.iter()
            .map(|r| r.iter().map(|s| e(s, 3)).collect())
            .collect(),
    )
    .unwrap()
}

fn rho() -> WeilPoint {
    WeilPoint::along(vec![0.4, -0.3, 0.7], &[1.0, -0.5, 0.25], 3).unwrap()
}

#[test]
fn first_bianchi_identity() {
    let r = riemann(&warped(), &rho()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let s = &(r.get(&[i, j, k, l]) + r.get(&[i, k, l, j])) + r.get(&[i, l, j, k]);
                    assert!(s.coeffs().iter().all(|c| c.abs() < 1e-10), "{s}");
                    let anti = r.get(&[i, j, k, l]) + r.get(&[i, j, l, k]);
                    assert!(anti.coeffs().iter().all(|c| c.abs() < 1e-12));
                }
            }
        }
    }
}

#[test]
fn christoffel_symmetric_and_metric_compatible() {
    let g = warped();
    let p = rho();
    let gamma = christoffel(&g, &p).unwrap();
    let m = metric_at(&g, &p).unwrap();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let sym = gamma.get(&[k, i, j]) - gamma.get(&[k, j, i]);
                assert!(sym.is_zero());
                // ∂_k g_ij = Γ^m_{ki} g_mj + Γ^m_{kj} g_im
                let dg = weiljet::space::evaluate(&g.component(i, j).partial(k + 1).unwrap(), &p)
                    .unwrap();
                let mut rhs = weiljet::WeilElement::zero(3);
                for mm in 0..3 {
                    rhs = &rhs + &(gamma.get(&[mm, k, i]) * m.get(&[mm, j]));
                    rhs = &rhs + &(gamma.get(&[mm, k, j]) * m.get(&[i, mm]));
                }
                assert!(dg.max_abs_diff(&rhs).unwrap() < 1e-12);
            }
        }
    }
}

#[test]
fn real_projection_commutes_with_lifting() {
    let g = warped();
    let lifted = Curvature::compute(&g, &rho(), Convention::default()).unwrap();
    let plain = Curvature::compute(&g, &rho().real_point(), Convention::default()).unwrap();
    for (a, b) in [
        (&lifted.riemann, &plain.riemann),
        (&lifted.einstein, &plain.einstein),
        (&lifted.inverse, &plain.inverse),
    ] {
        assert_eq!(project_real(a).max_abs_diff(&project_real(b)), 0.0);
    }
    assert_eq!(
        lifted.kretschmann.real_part(),
        plain.kretschmann.real_part()
    );
}

#[test]
fn nilpotent_parts_track_the_derivative() {
    // 2-sphere of radius r in polar angle x1: Γ^1_22 = −sin x1 cos x1 = −sin(2x1)/2.
    let g = MetricSpec::diagonal(vec![e("9", 2), e("9 * sin(x1)^2", 2)]).unwrap();
    let x: f64 = 0.6;
    let p = WeilPoint::along(vec![x, 0.0], &[1.0, 0.0], 3).unwrap();
    let gamma = christoffel(&g, &p).unwrap();
    let c = gamma.get(&[0, 1, 1]).coeffs().to_vec();
    let expected = [
        -(2.0 * x).sin() / 2.0,
        -(2.0 * x).cos(),
        (2.0 * x).sin(),
        2.0 * (2.0 * x).cos() / 3.0,
    ];
    for (a, b) in c.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // Curvature of a round sphere is constant, so its jets carry no ε-part.
    let curv = Curvature::compute(&g, &p, Convention::default()).unwrap();
    assert!(curv
        .scalar
        .nilpotent_part()
        .coeffs()
        .iter()
        .all(|v| v.abs() < 1e-12));
}

#[test]
fn inverse_metric_multiplies_back() {
    let m = metric_at(&warped(), &rho()).unwrap();
    let inv = inverse_metric(&m).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let mut s = weiljet::WeilElement::zero(3);
            for k in 0..3 {
                s = &s + &(m.get(&[i, k]) * inv.get(&[k, j]));
            }
            let id = weiljet::WeilElement::from_real(if i == j { 1.0 } else { 0.0 }, 3);
            assert!(s.max_abs_diff(&id).unwrap() < 1e-12);
        }
    }
}

#[test]
fn sign_convention_and_lambda() {
    let g = MetricSpec::diagonal(vec![e("1", 2), e("sin(x1)^2", 2)]).unwrap();
    let p = WeilPoint::evaluation(vec![1.0, 0.0], 0);
    let std = Curvature::compute(&g, &p, Convention::default()).unwrap();
    let paper = Curvature::compute(&g, &p, Convention::new(true, 0.0)).unwrap();
    let lam = Curvature::compute(&g, &p, Convention::new(false, 0.5)).unwrap();
    // Ric = g on the unit sphere, ℛ = 2.
    let (s, pp, l) = (
        project_real(&std.einstein),
        project_real(&paper.einstein),
        project_real(&lam.einstein),
    );
    let g11 = 1.0_f64.sin().powi(2);
    assert!(s.get(&[0, 0]).abs() < 1e-12);
    assert!((pp.get(&[0, 0]) - 2.0).abs() < 1e-12);
    assert!((pp.get(&[1, 1]) - 2.0 * g11).abs() < 1e-12);
    assert!((l.get(&[1, 1]) - 0.5 * g11).abs() < 1e-12);
    let stress = project_real(&paper.effective_stress());
    assert!((stress.get(&[0, 0]) - 2.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-12);
}
