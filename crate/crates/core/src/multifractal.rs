//! The multifractal spectrum `f(α) = τ*(α)`, its parametric curve
//! `q ↦ (τ′(q), qτ′(q) − τ(q))`, the dimension formulas, and the constrained
//! variational oracle over rational compositions.

use rayon::prelude::*;
use serde::Serialize;

use crate::duality::ExtendedReal;
use crate::error::{Error, Result};
use crate::info::{cross_entropy, entropy, lyapunov};
use crate::lq::{asymptotes, same_kappa, tau, tau_prime, Q_CAP};
use crate::model::IfsModel;
use crate::roots::similarity_dimension;
use crate::simplex::{Compositions, ProbabilityVector};

/// Agreement required between the two routes to `f` on each curve sample.
pub const DUALITY_IDENTITY_TOL: f64 = 1e-9;

/// Target accuracy on `α` when inverting `τ′`.
pub const ALPHA_INVERSION_TOL: f64 = 1e-12;

/// `dim_H μ_p = H(p) / χ(p)`.
pub fn dim_measure(model: &IfsModel) -> Result<f64> {
    model.require_positive()?;
    Ok(entropy(model.probs()) / lyapunov(model.probs(), model)?)
}

/// `−τ(0)`, cross-checked against the root of `Σ r_i^s = 1`.
pub fn dim_attractor(model: &IfsModel) -> Result<f64> {
    let from_tau = -tau(model, 0.0)?.tau;
    let from_ratios = similarity_dimension(model.ratios())?;
    if (from_tau - from_ratios).abs() > 1e-10 {
        return Err(Error::Integrity(format!(
            "−τ(0) = {from_tau} disagrees with the similarity dimension {from_ratios}"
        )));
    }
    Ok(from_tau)
}

/// `f(α) = τ*(α)`.
///
/// Interior `α` are matched to `q` by bisection on the decreasing map `τ′`.
/// The endpoints `κ_min`, `κ_max` take their values `s_min`, `s_max` from the
/// restricted similarity equations.
pub fn f_alpha(model: &IfsModel, alpha: f64) -> Result<ExtendedReal> {
    let a = asymptotes(model)?;
    if a.is_degenerate() {
        return Ok(if same_kappa(alpha, a.kappa_min) {
            ExtendedReal::Finite(a.s_min)
        } else {
            ExtendedReal::NegInfinity
        });
    }
    if same_kappa(alpha, a.kappa_min) {
        return Ok(ExtendedReal::Finite(a.s_min));
    }
    if same_kappa(alpha, a.kappa_max) {
        return Ok(ExtendedReal::Finite(a.s_max));
    }
    if alpha < a.kappa_min || alpha > a.kappa_max {
        return Ok(ExtendedReal::NegInfinity);
    }
    let q = invert_tau_prime(model, alpha)?;
    Ok(ExtendedReal::Finite(q * alpha - tau(model, q)?.tau))
}

/// The `q` with `τ′(q) = α`, clamped to `[−Q_CAP, Q_CAP]` when `α` is closer to
/// an endpoint than `τ′(±Q_CAP)`.
pub fn invert_tau_prime(model: &IfsModel, alpha: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-Q_CAP, Q_CAP);
    // τ′ is decreasing: τ′(lo) ≥ α ≥ τ′(hi) after the straddle check
    if tau_prime(model, lo)? < alpha {
        return Ok(lo);
    }
    if tau_prime(model, hi)? > alpha {
        return Ok(hi);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let d = tau_prime(model, mid)? - alpha;
        if d.abs() <= ALPHA_INVERSION_TOL || hi - lo <= 1e-13 * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if d > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub q: f64,
    pub tau: f64,
    pub alpha: f64,
    pub f: f64,
    pub z: ProbabilityVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    /// One sample per grid point, in grid order.
    pub samples: Vec<SpectrumSample>,
    /// `(κ_min, s_min)`.
    pub left_endpoint: (f64, f64),
    /// `(κ_max, s_max)`.
    pub right_endpoint: (f64, f64),
    pub dim_measure: f64,
    pub dim_attractor: f64,
    pub degenerate: bool,
}

impl SpectrumCurve {
    /// `(α, f)` rows sorted by `α`, each endpoint once. A degenerate spectrum
    /// is the single point `(κ, dim_H K)`.
    pub fn plot_rows(&self) -> Vec<(f64, f64)> {
        if self.degenerate {
            return vec![(self.left_endpoint.0, self.dim_attractor)];
        }
        let mut rows = vec![self.left_endpoint];
        // α decreases in q, so walk the grid backwards
        rows.extend(self.samples.iter().rev().map(|s| (s.alpha, s.f)));
        rows.push(self.right_endpoint);
        rows
    }
}

/// Samples the spectrum along `q_grid` (finite, strictly increasing).
///
/// `f` is computed both as `qα − τ(q)` and as `H(z(q))/χ(z(q))`; the two must
/// agree to [`DUALITY_IDENTITY_TOL`].
pub fn spectrum_curve(model: &IfsModel, q_grid: &[f64]) -> Result<SpectrumCurve> {
    if q_grid.is_empty() {
        return Err(Error::InvalidArgument("empty q grid".into()));
    }
    if q_grid.iter().any(|q| !q.is_finite()) || q_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("q grid must be finite and strictly increasing".into()));
    }
    let a = asymptotes(model)?;
    let samples = q_grid
        .par_iter()
        .map(|&q| {
            let sol = tau(model, q)?;
            let f_legendre = q * sol.alpha - sol.tau;
            let f_entropy = entropy(&sol.z) / lyapunov(&sol.z, model)?;
            if (f_legendre - f_entropy).abs() > DUALITY_IDENTITY_TOL {
                return Err(Error::Integrity(format!(
                    "at q = {q}: qα − τ = {f_legendre} but H(z)/χ(z) = {f_entropy}"
                )));
            }
            Ok(SpectrumSample { q, tau: sol.tau, alpha: sol.alpha, f: f_legendre, z: sol.z })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumCurve {
        samples,
        left_endpoint: (a.kappa_min, a.s_min),
        right_endpoint: (a.kappa_max, a.s_max),
        dim_measure: dim_measure(model)?,
        dim_attractor: dim_attractor(model)?,
        degenerate: a.is_degenerate(),
    })
}

/// `max { H(w)/χ(w) : |H(w,p)/χ(w) − α| ≤ eps }` over compositions `w = k/n`;
/// `−∞` if nothing is feasible.
pub fn constrained_variational_grid(model: &IfsModel, alpha: f64, n: u32, eps: f64) -> Result<ExtendedReal> {
    model.require_positive()?;
    if n == 0 {
        return Err(Error::InvalidArgument("grid denominator must be at least 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("band {eps} must be positive")));
    }
    let mut best: Option<f64> = None;
    for counts in Compositions::new(n, model.alphabet_size())? {
        let w = ProbabilityVector::from_counts(&counts)?;
        let chi = lyapunov(&w, model)?;
        let u = cross_entropy(&w, model.probs())? / chi;
        if (u - alpha).abs() <= eps {
            let v = entropy(&w) / chi;
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    Ok(best.map_or(ExtendedReal::NegInfinity, ExtendedReal::Finite))
}
