#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weiljet::{Primitive, SmoothExpr, WeilElement, WeilVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(v: f64, n: usize) -> SmoothExpr {
    SmoothExpr::constant(v, n)
}

/// A random expression built only from operations that are defined on all of
/// ℝⁿ, so it can be evaluated anywhere.
pub fn total_expr(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> SmoothExpr {
    if depth == 0 || rng.random_bool(0.2) {
        return if n > 0 && rng.random_bool(0.7) {
            SmoothExpr::var(rng.random_range(1..=n), n).unwrap()
        } else {
            c((rng.random_range(-200..=200) as f64) / 100.0, n)
        };
    }
    let sub = |rng: &mut ChaCha8Rng| total_expr(rng, n, depth - 1);
    match rng.random_range(0..14) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 | 3 => sub(rng) * sub(rng),
        4 => sub(rng).apply(Primitive::Sin),
        5 => sub(rng).apply(Primitive::Cos),
        6 => sub(rng).apply(Primitive::Atan),
        7 => sub(rng).apply(Primitive::Tanh),
        8 => sub(rng).apply(Primitive::Sin).apply(Primitive::Exp),
        9 => (c(1.0, n) + sub(rng).powi(2)).apply(Primitive::Log),
        10 => (c(2.0, n) + sub(rng).apply(Primitive::Sin)).apply(Primitive::Sqrt),
        11 => sub(rng) / (c(2.0, n) + sub(rng).apply(Primitive::Cos)),
        12 => (c(0.5, n) * sub(rng).apply(Primitive::Sin)).apply(Primitive::Tan),
        _ => (c(2.0, n) + sub(rng).apply(Primitive::Cos)).powi(-rng.random_range(1..=3)),
    }
}

pub fn point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn element(rng: &mut ChaCha8Rng, order: usize) -> WeilElement {
    WeilElement::new((0..=order).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn nilpotent(rng: &mut ChaCha8Rng, order: usize) -> WeilElement {
    let mut coeffs: Vec<f64> = (0..=order).map(|_| rng.random_range(-1.0..1.0)).collect();
    coeffs[0] = 0.0;
    WeilElement::new(coeffs).unwrap()
}

/// `pᵢ + vᵢ` with random nilpotent `vᵢ`.
pub fn jet_args(rng: &mut ChaCha8Rng, base: &[f64], order: usize) -> WeilVector {
    let parts: Vec<WeilElement> = base
        .iter()
        .map(|&p| &WeilElement::from_real(p, order) + &nilpotent(rng, order))
        .collect();
    if parts.is_empty() {
        WeilVector::empty(order)
    } else {
        WeilVector::new(parts).unwrap()
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

pub fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}
