//! Bracketing root finders for monotone functions of one variable.

use crate::error::{Error, Result};

const MAX_EXPANSIONS: usize = 2000;
const MAX_BISECTIONS: usize = 4000;

/// An interval `[lo, hi]` on which an increasing function changes sign:
/// `f(lo) ≤ 0 ≤ f(hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }
}

/// Grows a bracket around `start` geometrically until the increasing function
/// `f` straddles zero.
pub fn expand_bracket<F: Fn(f64) -> f64>(f: &F, start: f64, initial_step: f64) -> Result<Bracket> {
    let mut step = initial_step.abs().max(1e-3);
    let f0 = f(start);
    if f0.is_nan() {
        return Err(Error::RootFinding(format!("function is NaN at {start}")));
    }
    if f0 == 0.0 {
        return Ok(Bracket { lo: start, hi: start });
    }
    let (mut lo, mut hi) = (start, start);
    for _ in 0..MAX_EXPANSIONS {
        if f0 < 0.0 {
            hi = start + step;
            let v = f(hi);
            if v >= 0.0 {
                return Ok(Bracket { lo, hi });
            }
            lo = hi;
        } else {
            lo = start - step;
            let v = f(lo);
            if v <= 0.0 {
                return Ok(Bracket { lo, hi });
            }
            hi = lo;
        }
        step *= 2.0;
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::RootFinding(format!("no sign change found from {start}")))
}

/// Bisects an increasing function on `bracket` until the width is at most
/// `width_tol` or the floats between the endpoints are exhausted.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: &F, bracket: Bracket, width_tol: f64) -> Result<Bracket> {
    let Bracket { mut lo, mut hi } = bracket;
    if !(lo <= hi) {
        return Err(Error::RootFinding(format!("inverted bracket [{lo}, {hi}]")));
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= width_tol {
            return Ok(Bracket { lo, hi });
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(Bracket { lo, hi });
        }
        let v = f(mid);
        if v.is_nan() {
            return Err(Error::RootFinding(format!("function is NaN at {mid}")));
        }
        if v == 0.0 {
            return Ok(Bracket { lo: mid, hi: mid });
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

/// One Newton step from the bracket midpoint, kept only if it stays inside the
/// bracket and does not increase `|f|`.
pub fn newton_polish<F, D>(f: &F, df: &D, bracket: Bracket) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let x = bracket.midpoint();
    let fx = f(x);
    let d = df(x);
    if fx == 0.0 || !(d.abs() > 0.0) || !d.is_finite() {
        return x;
    }
    let candidate = x - fx / d;
    if candidate >= bracket.lo && candidate <= bracket.hi {
        let fc = f(candidate);
        if fc.abs() <= fx.abs() {
            return candidate;
        }
    }
    x
}

/// Root of an increasing function: expand, bisect to `width_tol`, polish.
pub fn solve_increasing<F, D>(f: &F, df: &D, start: f64, step: f64, width_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let bracket = expand_bracket(f, start, step)?;
    let bracket = bisect_increasing(f, bracket, width_tol)?;
    Ok(newton_polish(f, df, bracket))
}

/// Solves `Σ r_i^s = 1` for `s ≥ 0`. A single ratio gives `s = 0`.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("no ratios".into()));
    }
    if ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidArgument("ratios must lie in (0, 1)".into()));
    }
    if ratios.len() == 1 {
        return Ok(0.0);
    }
    let lns: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let k = ratios.len() as f64;
    let r_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = ratios.iter().copied().fold(0.0, f64::max);
    // Σ r_i^s − 1 is decreasing; negate to use the increasing solver
    let g = |s: f64| 1.0 - lns.iter().map(|l| (s * l).exp()).sum::<f64>();
    let dg = |s: f64| -lns.iter().map(|l| l * (s * l).exp()).sum::<f64>();
    let bracket = Bracket { lo: k.ln() / -r_min.ln(), hi: k.ln() / -r_max.ln() };
    let bracket = bisect_increasing(&g, bracket, 1e-15)?;
    Ok(newton_polish(&g, &dg, bracket))
}
