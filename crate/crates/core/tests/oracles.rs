//! Cross-module agreement between the analytic solver and its brute-force
//! oracles.

mod common;

use common::*;
use selfsim::duality::{concave_conjugate, ExtendedReal};
use selfsim::geometry::{Geometric1D, Radius};
use selfsim::lq::{asymptotes, tau, variational_tau_grid, TauFunction};
use selfsim::multifractal::{constrained_variational_grid, f_alpha, spectrum_curve};
use selfsim::section::{empirical_tau, enumerate_section};
use selfsim::types::{enumerate_types, type_entropy_check};
use selfsim::{ProbabilityVector, Word};

#[test]
fn conjugate_of_tau_matches_spectrum() {
    for m in [asymmetric(), three_letter()] {
        let g = TauFunction::new(m.clone()).unwrap();
        let a = asymptotes(&m).unwrap();
        for j in 0..=10 {
            let alpha = a.kappa_min + f64::from(j) / 10.0 * (a.kappa_max - a.kappa_min);
            let via_duality = concave_conjugate(&g, alpha).unwrap().finite().unwrap();
            let direct = f_alpha(&m, alpha).unwrap().finite().unwrap();
            assert!((via_duality - direct).abs() < 1e-6, "α={alpha}: {via_duality} vs {direct}");
        }
        assert_eq!(concave_conjugate(&g, a.kappa_max + 0.1).unwrap(), ExtendedReal::NegInfinity);
    }
}

#[test]
fn grid_oracle_converges_from_above() {
    let m = three_letter();
    for q in [-3.0, 0.5, 2.0, 6.0] {
        let t = tau(&m, q).unwrap().tau;
        let gaps: Vec<f64> = [8, 32, 128].iter().map(|&n| variational_tau_grid(&m, q, n).unwrap().value - t).collect();
        assert!(gaps.iter().all(|g| *g >= -1e-12), "{gaps:?}");
        assert!(gaps[2] <= gaps[0] && gaps[2] < 5e-3, "q={q}: {gaps:?}");
    }
}

#[test]
fn constrained_grid_approaches_spectrum() {
    let m = asymmetric();
    let a = asymptotes(&m).unwrap();
    let alpha = 0.5 * (a.kappa_min + a.kappa_max);
    let f = f_alpha(&m, alpha).unwrap().finite().unwrap();
    let v = constrained_variational_grid(&m, alpha, 256, 0.01).unwrap().finite().unwrap();
    assert!((v - f).abs() < 0.01, "{v} vs {f}");
}

#[test]
fn empirical_tau_converges_for_unequal_ratios() {
    let m = three_letter();
    for q in [-1.0, 2.0] {
        let t = tau(&m, q).unwrap().tau;
        let gaps: Vec<f64> =
            [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&r| (empirical_tau(&m, q, r).unwrap() - t).abs()).collect();
        assert!(gaps[3] < gaps[0], "q={q}: {gaps:?}");
    }
}

#[test]
fn type_classes_cover_equal_ratio_sections() {
    let m = asymmetric();
    for k in [6, 10, 12] {
        let classes = enumerate_types(&m, 3f64.powi(-k)).unwrap();
        assert_eq!(classes.len(), k as usize + 1);
        let total: u128 = classes.iter().map(|c| c.class.multiplicity.exact.unwrap()).sum();
        assert_eq!(total, 1u128 << k);
        for c in &classes {
            let e = type_entropy_check(&c.class).unwrap();
            assert!(e.log_count_per_symbol <= e.entropy + 1e-12);
        }
    }
}

#[test]
fn spectrum_peak_and_tangency() {
    for m in [asymmetric(), three_letter()] {
        let grid: Vec<f64> = (-100..=100).map(|i| f64::from(i) / 10.0).collect();
        let curve = spectrum_curve(&m, &grid).unwrap();
        let peak = curve.samples.iter().map(|s| s.f).fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - curve.dim_attractor).abs() < 1e-9);
        let at_one = curve.samples.iter().find(|s| s.q == 1.0).unwrap();
        assert!((at_one.f - at_one.alpha).abs() < 1e-9);
        assert!((at_one.alpha - curve.dim_measure).abs() < 1e-9);
        for s in &curve.samples {
            assert!(s.f <= s.alpha + 1e-9, "f lies below the diagonal");
        }
    }
}

#[test]
fn geometric_and_symbolic_masses_agree() {
    let g = Geometric1D::new(three_letter()).unwrap();
    let s = enumerate_section(g.model(), 0.01).unwrap();
    for w in s.words.iter().step_by(7) {
        let i = g.project(&w.word).unwrap();
        // a ball just covering the cylinder holds exactly its mass under SSC
        let m = g.ball_measure(i.midpoint(), 0.5 * i.length()).unwrap();
        assert!((m.value() - w.prob).abs() < 1e-12 * w.prob.max(1e-300), "{}", w.word);
    }
}

#[test]
fn local_dimension_at_typical_point_of_the_measure() {
    // sampling with the model weights targets dim_H μ
    let g = Geometric1D::new(three_letter()).unwrap();
    let p = g.sample_point(&g.model().probs().clone(), 20_000, 11).unwrap();
    let deep = Radius::power(0.5, 2000.0).unwrap();
    let row = g.local_dimension_along(&p, &[deep]).unwrap()[0];
    let dim = selfsim::multifractal::dim_measure(g.model()).unwrap();
    assert!((row.quotient - dim).abs() < 0.05, "{} vs {dim}", row.quotient);
}

#[test]
fn point_mass_sampler_reaches_fixed_point() {
    let g = Geometric1D::new(cantor()).unwrap();
    let p = g.sample_point(&ProbabilityVector::point_mass(2, 1).unwrap(), 40, 3).unwrap();
    assert_eq!(p.word, Word::new(vec![1; 40]));
    assert!((p.x - 1.0).abs() < 1e-15);
}
