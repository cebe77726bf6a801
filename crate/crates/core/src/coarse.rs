//! Coarse multifractal counting: how many section words carry mass
//! `r^{α+ε} ≤ p_word ≤ r^{α−ε}`.

use serde::Serialize;

use crate::duality::ExtendedReal;
use crate::error::Result;
use crate::model::IfsModel;
use crate::section::{enumerate_section, Section};

/// Relative slack on the band edges, in log-space.
const BAND_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoarseCount {
    pub r: f64,
    pub alpha: f64,
    pub eps: f64,
    pub count: u64,
    /// `log N / log(1/r)`, `−∞` when no word qualifies.
    pub estimate: ExtendedReal,
}

pub fn coarse_spectrum(model: &IfsModel, r: f64, alpha: f64, eps: f64) -> Result<CoarseCount> {
    let section = enumerate_section(model, r)?;
    Ok(coarse_on(&section, alpha, eps))
}

/// [`coarse_spectrum`] on an already enumerated section.
pub fn coarse_on(section: &Section, alpha: f64, eps: f64) -> CoarseCount {
    let ln_r = section.scale.ln();
    let lo = (alpha + eps) * ln_r;
    let hi = (alpha - eps) * ln_r;
    let slack = BAND_REL_TOL * ln_r.abs() * (alpha.abs() + eps.abs()).max(1.0);
    let count = section.words.iter().filter(|w| w.ln_prob >= lo - slack && w.ln_prob <= hi + slack).count() as u64;
    let estimate = if count == 0 {
        ExtendedReal::NegInfinity
    } else {
        ExtendedReal::Finite((count as f64).ln() / -ln_r)
    };
    CoarseCount { r: section.scale, alpha, eps, count, estimate }
}
