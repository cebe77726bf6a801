//! Numeric concave duality for functions of one real variable: one-sided
//! difference quotients, asymptotic slopes, and the concave conjugate
//! `g*(α) = inf_q (qα − g(q))`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Probes used when a function does not supply its asymptotic slopes.
pub const DEFAULT_PROBES: [f64; 7] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0];

/// Successive boundary-limit evaluations must agree to this before we accept.
pub const BOUNDARY_STABILITY: f64 = 1e-7;

/// A real number or `−∞`. The conjugate of a concave function is `−∞` off the
/// closed slope range, which we keep as a tag rather than a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    NegInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            Self::NegInfinity => None,
        }
    }

    pub fn is_neg_infinity(self) -> bool {
        matches!(self, Self::NegInfinity)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(x) => write!(f, "{x}"),
            Self::NegInfinity => f.write_str("-inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(x) => s.serialize_f64(*x),
            Self::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

/// `lim g(q)/q` at `+∞` (the smaller slope) and at `−∞` (the larger one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeBounds {
    pub at_plus_inf: f64,
    pub at_minus_inf: f64,
}

/// A concave function of one variable on an interval.
pub trait ConcaveFunction {
    fn value(&self, q: f64) -> Result<f64>;

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Known slopes at `±∞`, if the function can supply them exactly.
    fn slope_bounds(&self) -> Option<SlopeBounds> {
        None
    }

    /// Known limits of `q·s − g(q)` along the boundary slopes, as
    /// `(at +∞, at −∞)`. Without them the limit is probed numerically.
    fn boundary_conjugates(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Adapter turning a closure into a [`ConcaveFunction`].
pub struct FnConcave<F> {
    f: F,
    domain: (f64, f64),
    bounds: Option<SlopeBounds>,
}

impl<F: Fn(f64) -> f64> FnConcave<F> {
    pub fn new(f: F) -> Self {
        Self { f, domain: (f64::NEG_INFINITY, f64::INFINITY), bounds: None }
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    pub fn with_slope_bounds(mut self, bounds: SlopeBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }
}

impl<F: Fn(f64) -> f64> ConcaveFunction for FnConcave<F> {
    fn value(&self, q: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        if q < lo || q > hi {
            return Err(Error::DomainBoundary { q, lo, hi });
        }
        Ok((self.f)(q))
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn slope_bounds(&self) -> Option<SlopeBounds> {
        self.bounds
    }
}

/// Outer estimate `[lower, upper]` of `∂g(q) = [∂⁺g(q), ∂⁻g(q)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubdifferentialInterval {
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SubdifferentialInterval {
    pub fn contains(&self, alpha: f64, tol: f64) -> bool {
        alpha >= self.lower - tol && alpha <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn rounding_slack(values: &[f64], h: f64) -> f64 {
    64.0 * f64::EPSILON * values.iter().map(|v| v.abs()).sum::<f64>() / h + 1e-12
}

/// One-sided difference quotients `(g(q+h) − g(q))/h ≤ ∂⁺g(q)` and
/// `(g(q) − g(q−h))/h ≥ ∂⁻g(q)`.
pub fn subdifferential<G: ConcaveFunction + ?Sized>(g: &G, q: f64, h: f64) -> Result<SubdifferentialInterval> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let (lo, hi) = g.domain();
    if !(q - h >= lo && q + h <= hi) {
        return Err(Error::DomainBoundary { q, lo, hi });
    }
    let (gm, g0, gp) = (g.value(q - h)?, g.value(q)?, g.value(q + h)?);
    let lower = (gp - g0) / h;
    let upper = (g0 - gm) / h;
    if lower > upper {
        if lower - upper > rounding_slack(&[gm, g0, gp], h) {
            return Err(Error::Integrity(format!(
                "difference quotients at q = {q} are increasing ({upper} < {lower}); not concave"
            )));
        }
        // rounding noise on an affine piece
        let mid = 0.5 * (lower + upper);
        return Ok(SubdifferentialInterval { q, lower: mid, upper: mid });
    }
    Ok(SubdifferentialInterval { q, lower, upper })
}

/// [`subdifferential`] at `h` and `h/2`; the finer interval must nest inside the
/// coarser one, and is returned.
pub fn subdifferential_checked<G: ConcaveFunction + ?Sized>(g: &G, q: f64, h: f64) -> Result<SubdifferentialInterval> {
    let coarse = subdifferential(g, q, h)?;
    let fine = subdifferential(g, q, 0.5 * h)?;
    let slack = rounding_slack(&[g.value(q)?, 1.0], 0.5 * h);
    if fine.lower < coarse.lower - slack || fine.upper > coarse.upper + slack {
        return Err(Error::Integrity(format!(
            "difference quotients at q = {q} do not nest under halving: [{}, {}] vs [{}, {}]",
            fine.lower, fine.upper, coarse.lower, coarse.upper
        )));
    }
    Ok(fine)
}

/// Extrapolates `lim g(q)/q` at `±∞` from `g` at `±probes` (positive, increasing).
///
/// The secant slope between consecutive probes cancels the intercept of the
/// asymptote; successive secants must agree to `1e−8` relative.
pub fn asymptotic_slopes<G: ConcaveFunction + ?Sized>(g: &G, probes: &[f64]) -> Result<SlopeBounds> {
    if probes.len() < 3 || probes.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
        return Err(Error::InvalidArgument("need at least three increasing positive probes".into()));
    }
    let (lo, hi) = g.domain();
    let one_side = |sign: f64| -> Result<f64> {
        let qs: Vec<f64> = probes.iter().map(|p| sign * p).filter(|q| *q >= lo && *q <= hi).collect();
        if qs.len() < 3 {
            return Err(Error::InvalidArgument("fewer than three probes inside the domain".into()));
        }
        let vals = qs.iter().map(|&q| g.value(q)).collect::<Result<Vec<_>>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::RootFinding("non-finite value at a slope probe".into()));
        }
        let secants: Vec<f64> =
            (1..qs.len()).map(|k| (vals[k] - vals[k - 1]) / (qs[k] - qs[k - 1])).collect();
        let last = secants[secants.len() - 1];
        let prev = secants[secants.len() - 2];
        if (last - prev).abs() > 1e-8 * last.abs().max(1.0) {
            return Err(Error::RootFinding(format!(
                "slope probes do not settle at {}∞: secants {prev} then {last}",
                if sign > 0.0 { "+" } else { "−" }
            )));
        }
        Ok(last)
    };
    Ok(SlopeBounds { at_plus_inf: one_side(1.0)?, at_minus_inf: one_side(-1.0)? })
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `g*(α) = inf_q (qα − g(q))`.
///
/// Inside the open slope range the minimizer `q*` (with `α ∈ ∂g(q*)`) is found by
/// bisection on the decreasing slope map; at a boundary slope the limit of
/// `qα − g(q)` along `q = ±10·2^k` is taken; outside the closed range the value
/// is `−∞`.
pub fn concave_conjugate<G: ConcaveFunction + ?Sized>(g: &G, alpha: f64) -> Result<ExtendedReal> {
    let bounds = match g.slope_bounds() {
        Some(b) => b,
        None => asymptotic_slopes(g, &DEFAULT_PROBES)?,
    };
    if bounds.at_plus_inf > bounds.at_minus_inf && !near(bounds.at_plus_inf, bounds.at_minus_inf) {
        return Err(Error::Integrity(format!(
            "slope at +∞ ({}) exceeds slope at −∞ ({}); not concave",
            bounds.at_plus_inf, bounds.at_minus_inf
        )));
    }
    let known = g.boundary_conjugates();
    if near(alpha, bounds.at_plus_inf) {
        return match known {
            Some((v, _)) => Ok(ExtendedReal::Finite(v)),
            None => boundary_limit(g, alpha, 1.0).map(ExtendedReal::Finite),
        };
    }
    if near(alpha, bounds.at_minus_inf) {
        return match known {
            Some((_, v)) => Ok(ExtendedReal::Finite(v)),
            None => boundary_limit(g, alpha, -1.0).map(ExtendedReal::Finite),
        };
    }
    if alpha < bounds.at_plus_inf || alpha > bounds.at_minus_inf {
        return Ok(ExtendedReal::NegInfinity);
    }
    interior_conjugate(g, alpha).map(ExtendedReal::Finite)
}

fn boundary_limit<G: ConcaveFunction + ?Sized>(g: &G, alpha: f64, sign: f64) -> Result<f64> {
    let (lo, hi) = g.domain();
    let mut prev: Option<f64> = None;
    let mut q_abs = 10.0;
    loop {
        let q = sign * q_abs;
        if q < lo || q > hi {
            break;
        }
        let v = q * alpha - g.value(q)?;
        if let Some(p) = prev {
            if (v - p).abs() < BOUNDARY_STABILITY {
                return Ok(v);
            }
        }
        prev = Some(v);
        q_abs *= 2.0;
    }
    Err(Error::RootFinding(format!("q·α − g(q) did not stabilize for α = {alpha}")))
}

fn interior_conjugate<G: ConcaveFunction + ?Sized>(g: &G, alpha: f64) -> Result<f64> {
    let h = DEFAULT_STEP;
    let (dom_lo, dom_hi) = g.domain();
    let lo_limit = (dom_lo + 2.0 * h).max(-1e6);
    let hi_limit = (dom_hi - 2.0 * h).min(1e6);
    if !(lo_limit < hi_limit) {
        return Err(Error::InvalidArgument("domain too small for difference quotients".into()));
    }
    let slope = |q: f64| -> Result<f64> { Ok((g.value(q + h)? - g.value(q - h)?) / (2.0 * h)) };

    // α − slope(q) is increasing in q; find lo ≤ q* ≤ hi
    let start = 0.0f64.clamp(lo_limit, hi_limit);
    let s0 = slope(start)?;
    let (mut lo, mut hi) = (start, start);
    let mut step = 1.0;
    if s0 > alpha {
        loop {
            let cand = (start + step).min(hi_limit);
            if slope(cand)? <= alpha {
                hi = cand;
                break;
            }
            lo = cand;
            if cand >= hi_limit {
                return Ok(cand * alpha - g.value(cand)?);
            }
            step *= 2.0;
        }
    } else if s0 < alpha {
        loop {
            let cand = (start - step).max(lo_limit);
            if slope(cand)? >= alpha {
                lo = cand;
                break;
            }
            hi = cand;
            if cand <= lo_limit {
                return Ok(cand * alpha - g.value(cand)?);
            }
            step *= 2.0;
        }
    }

    let (s_lo, s_hi) = (slope(lo)?, slope(hi)?);
    if s_lo < s_hi {
        return Err(Error::Integrity(format!("slope map increases between {lo} and {hi}")));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if slope(mid)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q_star = 0.5 * (lo + hi);
    // the supporting line at q* must have slope α
    let sub = subdifferential(g, q_star, (1e3 * h).min(0.5 * (hi_limit - q_star)).min(0.5 * (q_star - lo_limit)))?;
    if !sub.contains(alpha, 1e-6 + 1e-3 * sub.width()) {
        return Err(Error::Integrity(format!(
            "α = {alpha} not bracketed by [{}, {}] at q* = {q_star}",
            sub.lower, sub.upper
        )));
    }
    Ok(q_star * alpha - g.value(q_star)?)
}

/// `inf_{x ∈ [lo, hi]} (q·x − g(x))` for concave `g`, by golden-section search.
pub fn conjugate_on_interval<G: ConcaveFunction + ?Sized>(g: &G, q: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    let phi = |x: f64| -> Result<f64> { Ok(q * x - g.value(x)?) };
    let inv_gold = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_gold * (b - a);
    let mut d = a + inv_gold * (b - a);
    let (mut fc, mut fd) = (phi(c)?, phi(d)?);
    while b - a > 1e-12 * a.abs().max(b.abs()).max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_gold * (b - a);
            fc = phi(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_gold * (b - a);
            fd = phi(d)?;
        }
    }
    let best = [phi(lo)?, phi(hi)?, fc, fd, phi(0.5 * (a + b))?];
    Ok(best.into_iter().fold(f64::INFINITY, f64::min))
}

/// `g*` restricted to the closed slope range, as a concave function in its own right.
pub struct Conjugate<'a, G: ?Sized> {
    inner: &'a G,
    bounds: SlopeBounds,
}

impl<'a, G: ConcaveFunction + ?Sized> Conjugate<'a, G> {
    pub fn new(inner: &'a G) -> Result<Self> {
        let bounds = match inner.slope_bounds() {
            Some(b) => b,
            None => asymptotic_slopes(inner, &DEFAULT_PROBES)?,
        };
        Ok(Self { inner, bounds })
    }

    /// `(g*)*(q) = inf_α (qα − g*(α))`, which recovers `g` for concave `g`.
    pub fn conjugate_at(&self, q: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        conjugate_on_interval(self, q, lo, hi)
    }
}

impl<G: ConcaveFunction + ?Sized> ConcaveFunction for Conjugate<'_, G> {
    fn value(&self, alpha: f64) -> Result<f64> {
        concave_conjugate(self.inner, alpha)?.finite().ok_or_else(|| {
            let (lo, hi) = self.domain();
            Error::DomainBoundary { q: alpha, lo, hi }
        })
    }

    fn domain(&self) -> (f64, f64) {
        (self.bounds.at_plus_inf, self.bounds.at_minus_inf)
    }
}

/// `αq − g(q) − g*(α) ≥ 0`, with equality exactly when `α ∈ ∂g(q)`.
/// `None` when `g*(α) = −∞`.
pub fn fenchel_gap<G: ConcaveFunction + ?Sized>(g: &G, q: f64, alpha: f64) -> Result<Option<f64>> {
    concave_conjugate(g, alpha)?
        .finite()
        .map(|c| Ok(alpha * q - g.value(q)? - c))
        .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(a: f64, b: f64) -> FnConcave<impl Fn(f64) -> f64> {
        FnConcave::new(move |q| a * q + b)
    }

    fn neg_square() -> FnConcave<impl Fn(f64) -> f64> {
        FnConcave::new(|q: f64| -q * q)
    }

    #[test]
    fn affine_subdifferential() {
        let g = affine(0.7, -0.7);
        for q in [-3.0, 0.0, 12.5] {
            let s = subdifferential(&g, q, DEFAULT_STEP).unwrap();
            assert!((s.lower - 0.7).abs() < 1e-9 && (s.upper - 0.7).abs() < 1e-9);
            assert!(s.lower <= s.upper);
        }
    }

    #[test]
    fn quadratic_subdifferential() {
        let s = subdifferential(&neg_square(), 0.0, 1e-4).unwrap();
        assert!((s.lower + 1e-4).abs() < 1e-15 && (s.upper - 1e-4).abs() < 1e-15);
        assert!(s.contains(0.0, 0.0));
        let s = subdifferential_checked(&neg_square(), 1.0, DEFAULT_STEP).unwrap();
        assert!(s.contains(-2.0, 0.0));
    }

    #[test]
    fn kink_subdifferential() {
        // min(q, 2q − 1): kink at q = 1 with ∂g(1) = [1, 2]
        let g = FnConcave::new(|q: f64| q.min(2.0 * q - 1.0));
        let s = subdifferential(&g, 1.0, 1e-3).unwrap();
        assert!((s.lower - 1.0).abs() < 1e-9 && (s.upper - 2.0).abs() < 1e-9);
    }

    #[test]
    fn convex_input_detected() {
        let g = FnConcave::new(|q: f64| q * q);
        assert!(matches!(subdifferential(&g, 0.0, 1e-2), Err(Error::Integrity(_))));
    }

    #[test]
    fn boundary_point_rejected() {
        let g = FnConcave::new(|q: f64| q).with_domain(0.0, 1.0);
        assert!(matches!(subdifferential(&g, 0.0, 1e-3), Err(Error::DomainBoundary { .. })));
    }

    #[test]
    fn affine_conjugate() {
        let s = 2f64.ln() / 3f64.ln();
        let g = affine(s, -s);
        assert!((asymptotic_slopes(&g, &DEFAULT_PROBES).unwrap().at_plus_inf - s).abs() < 1e-14);
        let v = concave_conjugate(&g, s).unwrap().finite().unwrap();
        assert!((v - s).abs() < 1e-12);
        assert!(concave_conjugate(&g, s + 0.01).unwrap().is_neg_infinity());
        assert!(concave_conjugate(&g, 0.5).unwrap().is_neg_infinity());
    }

    #[test]
    fn quadratic_conjugate() {
        // inf_q (qα + q²) = −α²/4, slopes unbounded on both sides
        let g = neg_square().with_slope_bounds(SlopeBounds { at_plus_inf: -1e12, at_minus_inf: 1e12 });
        for alpha in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            let v = concave_conjugate(&g, alpha).unwrap().finite().unwrap();
            assert!((v + alpha * alpha / 4.0).abs() < 1e-9, "α={alpha}: {v}");
        }
    }

    #[test]
    fn divergent_probes_rejected() {
        assert!(asymptotic_slopes(&neg_square(), &DEFAULT_PROBES).is_err());
        assert!(asymptotic_slopes(&affine(1.0, 0.0), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fenchel_equality_at_differentiable_point() {
        // g(q) = 1 − sqrt(1 + q²): slopes in (−1, 1)
        let g = FnConcave::new(|q: f64| 1.0 - (1.0 + q * q).sqrt())
            .with_slope_bounds(SlopeBounds { at_plus_inf: -1.0, at_minus_inf: 1.0 });
        for q in [-2.0f64, 0.0, 0.5, 3.0] {
            let alpha = -q / (1.0 + q * q).sqrt();
            let gap = fenchel_gap(&g, q, alpha).unwrap().unwrap();
            assert!(gap.abs() < 1e-9, "q={q} gap={gap}");
            let gap = fenchel_gap(&g, q, alpha * 0.5).unwrap().unwrap();
            assert!(gap >= -1e-12);
        }
        assert!(fenchel_gap(&g, 0.0, 1.5).unwrap().is_none());
    }

    #[test]
    fn display_tag() {
        assert_eq!(ExtendedReal::NegInfinity.to_string(), "-inf");
        assert_eq!(serde_json::to_string(&ExtendedReal::NegInfinity).unwrap(), "\"-inf\"");
        assert_eq!(serde_json::to_string(&ExtendedReal::Finite(0.5)).unwrap(), "0.5");
    }
}
