//! The L^q-spectrum `τ(q)` as the root of `Σ p_i^q r_i^{−t} = 1`, the optimizer
//! path `z(q)`, the derivative `τ′(q)`, the affine asymptotes, and the
//! variational formula with its brute-force grid oracle.

use serde::Serialize;

use crate::duality::{ConcaveFunction, SlopeBounds};
use crate::error::{Error, Result};
use crate::info::{cross_entropy, entropy, lyapunov};
use crate::model::IfsModel;
use crate::roots::{bisect_increasing, expand_bracket, newton_polish, similarity_dimension};
use crate::simplex::{Compositions, ProbabilityVector};

/// Largest `|q|` accepted by [`tau`]. Beyond it `p_i^q` leaves double range and
/// the asymptote data is the right tool.
pub const Q_CAP: f64 = 1e3;

/// Bisection stopping width for the root `t` of `ψ(q, t) = 1`.
pub const ROOT_WIDTH: f64 = 1e-14;

/// Relative tolerance used to group letters into κ-classes.
pub const KAPPA_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LqSolution {
    pub q: f64,
    pub tau: f64,
    /// `z_i = p_i^q r_i^{−τ(q)}`.
    pub z: ProbabilityVector,
    /// `τ′(q) = H(z, p) / χ(z)`.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteData {
    /// Per-letter `κ_i = log p_i / log r_i`.
    pub kappa: Vec<f64>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// `lim_{q→+∞} z(q)`, supported on the κ_min class.
    pub z_plus_inf: ProbabilityVector,
    /// `lim_{q→−∞} z(q)`, supported on the κ_max class.
    pub z_minus_inf: ProbabilityVector,
}

impl AsymptoteData {
    /// All κ_i equal: τ is affine and the spectrum is a single point.
    pub fn is_degenerate(&self) -> bool {
        same_kappa(self.kappa_min, self.kappa_max)
    }

    /// The asymptote `q ↦ q·κ_min − s_min` at `+∞`.
    pub fn line_plus_inf(&self, q: f64) -> f64 {
        q * self.kappa_min - self.s_min
    }

    /// The asymptote `q ↦ q·κ_max − s_max` at `−∞`.
    pub fn line_minus_inf(&self, q: f64) -> f64 {
        q * self.kappa_max - self.s_max
    }
}

pub(crate) fn same_kappa(a: f64, b: f64) -> bool {
    (a - b).abs() <= KAPPA_REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Log-sum-exp of `q log p_i − t log r_i`, i.e. `log ψ(q, t)`.
fn ln_psi(ln_p: &[f64], ln_r: &[f64], q: f64, t: f64) -> f64 {
    let terms = ln_p.iter().zip(ln_r).map(|(lp, lr)| q * lp - t * lr);
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    max + terms.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ψ(q, t) = Σ p_i^q r_i^{−t}`, strictly increasing in `t` for fixed `q`.
pub fn psi(model: &IfsModel, q: f64, t: f64) -> Result<f64> {
    model.require_positive()?;
    Ok(model
        .probs()
        .entries()
        .iter()
        .zip(model.ratios())
        .map(|(p, r)| p.powf(q) * r.powf(-t))
        .sum())
}

/// Solves `ψ(q, τ) = 1` and returns the optimizer `z(q)` and slope `τ′(q)`.
pub fn tau(model: &IfsModel, q: f64) -> Result<LqSolution> {
    model.require_positive()?;
    if !q.is_finite() || q.abs() > Q_CAP {
        return Err(Error::QOutOfRange { q, cap: Q_CAP });
    }
    let ln_p: Vec<f64> = model.probs().entries().iter().map(|p| p.ln()).collect();
    let ln_r: Vec<f64> = model.ratios().iter().map(|r| r.ln()).collect();

    let g = |t: f64| ln_psi(&ln_p, &ln_r, q, t);
    // d/dt log ψ = χ(z(q, t)) where z is the normalized term vector
    let dg = |t: f64| {
        let base = g(t);
        ln_p.iter().zip(&ln_r).map(|(lp, lr)| -lr * (q * lp - t * lr - base).exp()).sum::<f64>()
    };

    let mean_kappa: f64 = model
        .probs()
        .entries()
        .iter()
        .zip(ln_p.iter().zip(&ln_r))
        .map(|(p, (lp, lr))| p * lp / lr)
        .sum();
    let start = q * mean_kappa;
    let bracket = expand_bracket(&g, start, 1.0f64.max(start.abs() * 0.5))?;
    let bracket = bisect_increasing(&g, bracket, ROOT_WIDTH)?;
    let t = newton_polish(&g, &dg, bracket);

    let z = ProbabilityVector::normalize(
        ln_p.iter().zip(&ln_r).map(|(lp, lr)| (q * lp - t * lr).exp()).collect(),
    )?;
    let alpha = cross_entropy(&z, model.probs())? / lyapunov(&z, model)?;
    Ok(LqSolution { q, tau: t, z, alpha })
}

/// `τ′(q) = H(z(q), p) / χ(z(q))`.
pub fn tau_prime(model: &IfsModel, q: f64) -> Result<f64> {
    Ok(tau(model, q)?.alpha)
}

/// Extreme per-letter dimensions and the restricted similarity equations.
pub fn asymptotes(model: &IfsModel) -> Result<AsymptoteData> {
    model.require_positive()?;
    let kappa: Vec<f64> = model
        .probs()
        .entries()
        .iter()
        .zip(model.ratios())
        .map(|(p, r)| p.ln() / r.ln())
        .collect();
    let kappa_min = kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let kappa_max = kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let restricted = |target: f64| -> Result<(f64, ProbabilityVector)> {
        let class: Vec<usize> = (0..kappa.len()).filter(|&i| same_kappa(kappa[i], target)).collect();
        let ratios: Vec<f64> = class.iter().map(|&i| model.ratios()[i]).collect();
        let s = similarity_dimension(&ratios)?;
        let mut z = vec![0.0; kappa.len()];
        for &i in &class {
            z[i] = model.ratios()[i].powf(s);
        }
        Ok((s, ProbabilityVector::normalize(z)?))
    };
    let (s_min, z_plus_inf) = restricted(kappa_min)?;
    let (s_max, z_minus_inf) = restricted(kappa_max)?;
    Ok(AsymptoteData { kappa, kappa_min, kappa_max, s_min, s_max, z_plus_inf, z_minus_inf })
}

/// `(q·H(w, p) − H(w)) / χ(w)`.
pub fn variational_objective(model: &IfsModel, q: f64, w: &ProbabilityVector) -> Result<f64> {
    model.require_positive()?;
    let chi = lyapunov(w, model)?;
    Ok((q * cross_entropy(w, model.probs())? - entropy(w)) / chi)
}

/// Membership in the level set `E(t, q) = {w : objective(q, w) ≤ t}`.
pub fn in_level_set(model: &IfsModel, q: f64, t: f64, w: &ProbabilityVector) -> Result<bool> {
    Ok(variational_objective(model, q, w)? <= t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub value: f64,
    pub argmin: ProbabilityVector,
    pub counts: Vec<u32>,
}

/// Exact minimum of the variational objective over the rational grid
/// `w = k / n`, `Σ k_i = n`. Zero entries are allowed for every `q`; ties go to
/// the lexicographically smallest composition.
pub fn variational_tau_grid(model: &IfsModel, q: f64, n: u32) -> Result<GridMinimum> {
    model.require_positive()?;
    if n == 0 {
        return Err(Error::InvalidArgument("grid denominator must be at least 1".into()));
    }
    let neg_ln_p: Vec<f64> = model.probs().entries().iter().map(|p| -p.ln()).collect();
    let neg_ln_r: Vec<f64> = model.ratios().iter().map(|r| -r.ln()).collect();
    let nf = f64::from(n);

    let mut best: Option<(f64, Vec<u32>)> = None;
    for counts in Compositions::new(n, model.alphabet_size())? {
        let (mut cross, mut ent, mut chi) = (0.0, 0.0, 0.0);
        for (i, &k) in counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let w = f64::from(k) / nf;
            cross += w * neg_ln_p[i];
            ent -= w * w.ln();
            chi += w * neg_ln_r[i];
        }
        let value = (q * cross - ent) / chi;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, counts));
        }
    }
    let (value, counts) = best.expect("at least one composition");
    Ok(GridMinimum { value, argmin: ProbabilityVector::from_counts(&counts)?, counts })
}

/// τ of a fixed model viewed as a concave function on `[−Q_CAP, Q_CAP]`.
#[derive(Debug, Clone)]
pub struct TauFunction {
    model: IfsModel,
    bounds: SlopeBounds,
    /// `(s_min, s_max)`: the intercepts of the asymptotes, negated.
    intercepts: (f64, f64),
}

impl TauFunction {
    pub fn new(model: IfsModel) -> Result<Self> {
        let a = asymptotes(&model)?;
        Ok(Self {
            model,
            bounds: SlopeBounds { at_plus_inf: a.kappa_min, at_minus_inf: a.kappa_max },
            intercepts: (a.s_min, a.s_max),
        })
    }

    pub fn model(&self) -> &IfsModel {
        &self.model
    }
}

impl ConcaveFunction for TauFunction {
    fn value(&self, q: f64) -> Result<f64> {
        Ok(tau(&self.model, q)?.tau)
    }

    fn domain(&self) -> (f64, f64) {
        (-Q_CAP, Q_CAP)
    }

    fn slope_bounds(&self) -> Option<SlopeBounds> {
        Some(self.bounds)
    }

    fn boundary_conjugates(&self) -> Option<(f64, f64)> {
        Some(self.intercepts)
    }
}
