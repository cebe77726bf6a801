#![allow(dead_code)]

use std::path::PathBuf;

use selfsim::{IfsModel, ProbabilityVector};

pub const THIRD: f64 = 1.0 / 3.0;

pub fn model(r: &[f64], p: &[f64]) -> IfsModel {
    IfsModel::new(r.to_vec(), ProbabilityVector::new(p.to_vec()).unwrap()).unwrap()
}

pub fn geometric(r: &[f64], p: &[f64], t: &[f64]) -> IfsModel {
    IfsModel::with_translations(r.to_vec(), ProbabilityVector::new(p.to_vec()).unwrap(), t.to_vec()).unwrap()
}

pub fn cantor() -> IfsModel {
    geometric(&[THIRD, THIRD], &[0.5, 0.5], &[0.0, 2.0 / 3.0])
}

pub fn asymmetric() -> IfsModel {
    geometric(&[THIRD, THIRD], &[0.25, 0.75], &[0.0, 2.0 / 3.0])
}

pub fn three_letter() -> IfsModel {
    geometric(&[0.5, 0.25, 0.2], &[0.2, 0.3, 0.5], &[0.0, 0.525, 0.8])
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Root of `Σ r_i^s = 1` by plain bisection, independent of the library solver.
pub fn bisect_similarity_dimension(ratios: &[f64]) -> f64 {
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 64.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
