//! One-dimensional realization `S_i(x) = r_i·x + t_i` of a model: SSC
//! certificate, cylinder intervals, exact ball measures, sampled points and
//! local-dimension quotients.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{IfsModel, Word};
use crate::simplex::ProbabilityVector;

/// Default truncation: cylinders shorter than `η·r` are left undecided.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Images closer than this fraction of the hull count as touching.
pub const TOUCH_REL_TOL: f64 = 1e-12;

/// Slack on ball containment, relative to `|x| + r`.
pub const CONTAIN_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Hull and first-level images in left-to-right order, with the smallest gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SscCertificate {
    pub hull: Interval,
    pub images: Vec<(usize, Interval)>,
    pub gap: f64,
}

/// Minimal invariant interval: spanned by the extreme fixed points.
pub fn invariant_hull(ratios: &[f64], translations: &[f64]) -> Interval {
    let fixed = ratios.iter().zip(translations).map(|(r, t)| t / (1.0 - r));
    let lo = fixed.clone().fold(f64::INFINITY, f64::min);
    let hi = fixed.fold(f64::NEG_INFINITY, f64::max);
    Interval { lo, hi }
}

pub fn certify_ssc(model: &IfsModel) -> Result<SscCertificate> {
    let translations = model
        .translations()
        .ok_or_else(|| Error::InvalidModel("geometric realization needs translations".into()))?;
    if model.alphabet_size() < 2 {
        return Err(Error::InvalidModel("geometric realization needs at least two maps".into()));
    }
    let hull = invariant_hull(model.ratios(), translations);
    let slack = TOUCH_REL_TOL * hull.length().max(f64::MIN_POSITIVE);
    let mut images: Vec<(usize, Interval)> = model
        .ratios()
        .iter()
        .zip(translations)
        .map(|(r, t)| Interval { lo: r * hull.lo + t, hi: r * hull.hi + t })
        .enumerate()
        .collect();
    for (i, img) in &images {
        if img.lo < hull.lo - slack || img.hi > hull.hi + slack {
            return Err(Error::Integrity(format!("image of map {i} leaves the hull")));
        }
    }
    images.sort_by(|a, b| a.1.lo.total_cmp(&b.1.lo));
    let mut gap = f64::INFINITY;
    for pair in images.windows(2) {
        let g = pair[1].1.lo - pair[0].1.hi;
        if g <= slack {
            return Err(Error::SscViolation { first: pair[0].0, second: pair[1].0 });
        }
        gap = gap.min(g);
    }
    Ok(SscCertificate { hull, images, gap })
}

/// Radius as its natural logarithm, so scales like `3^−3000` stay representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Radius(f64);

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius {r} must be positive and finite")));
        }
        Ok(Self(r.ln()))
    }

    pub fn from_ln(ln: f64) -> Result<Self> {
        if !ln.is_finite() {
            return Err(Error::InvalidArgument(format!("log-radius {ln} is not finite")));
        }
        Ok(Self(ln))
    }

    /// `base^exponent`.
    pub fn power(base: f64, exponent: f64) -> Result<Self> {
        if !(base > 0.0) {
            return Err(Error::InvalidArgument(format!("base {base} must be positive")));
        }
        Self::from_ln(exponent * base.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// The radius itself; underflows to 0 below about `1e−308`.
    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

/// Ball mass split into cylinders certainly inside and truncated ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallMeasure {
    pub contained: f64,
    pub undecided: f64,
}

impl BallMeasure {
    pub fn lower(&self) -> f64 {
        self.contained
    }

    pub fn upper(&self) -> f64 {
        self.contained + self.undecided
    }

    pub fn value(&self) -> f64 {
        self.contained + 0.5 * self.undecided
    }

    pub fn error_bound(&self) -> f64 {
        0.5 * self.undecided
    }
}

/// Ball measure reached through a point's word: `ln_prefix` is the log-mass of
/// the cylinders descended through, `local` the measure at the stopping level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordBallMeasure {
    pub level: usize,
    pub ln_prefix: f64,
    pub local: BallMeasure,
}

impl WordBallMeasure {
    pub fn ln_value(&self) -> f64 {
        self.ln_prefix + self.local.value().ln()
    }
}

/// `log μ(B(x,r)) / log r` at one scale; `+∞` marks an empty ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalDimensionRow {
    pub ln_r: f64,
    pub ln_measure: f64,
    pub quotient: f64,
}

fn quotient(ln_measure: f64, ln_r: f64) -> f64 {
    if ln_measure == f64::NEG_INFINITY {
        f64::INFINITY
    } else if ln_measure == 0.0 {
        0.0
    } else {
        ln_measure / ln_r
    }
}

/// Constants of the two-sided cylinder bracket
/// `c·p_w ≤ μ(B(x, δ·r_w)) ≤ p_w` for `x ∈ S_w(K)`.
///
/// With absolute gap `δ₀`, two distinct cylinders of the same parent `v` are at
/// least `δ₀·r_v ≥ δ₀·r_w` apart, so a ball of radius `δ₀·r_w/2` around a point
/// of `S_w(hull)` meets no other cylinder of `w`'s length: upper bound. The ball
/// also contains the depth-`N` refinement `wu` holding `x` once
/// `r_max^N·(b−a) ≤ δ₀/2`, whence the lower bound with `c = p_min^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderBracket {
    pub radius_factor: f64,
    pub refinement_depth: u32,
    pub lower_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometric1D {
    model: IfsModel,
    certificate: SscCertificate,
}

/// A sampled point: its coding word and the midpoint of its cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPoint {
    pub word: Word,
    pub x: f64,
}

impl Geometric1D {
    pub fn new(model: IfsModel) -> Result<Self> {
        let certificate = certify_ssc(&model)?;
        Ok(Self { model, certificate })
    }

    pub fn model(&self) -> &IfsModel {
        &self.model
    }

    pub fn hull(&self) -> Interval {
        self.certificate.hull
    }

    pub fn certificate(&self) -> &SscCertificate {
        &self.certificate
    }

    pub fn gap(&self) -> f64 {
        self.certificate.gap
    }

    fn translations(&self) -> &[f64] {
        self.model.translations().expect("checked at construction")
    }

    pub fn apply(&self, letter: usize, x: f64) -> f64 {
        self.model.ratios()[letter] * x + self.translations()[letter]
    }

    /// `S_word(hull)`, composed from the innermost letter outwards.
    pub fn project(&self, word: &Word) -> Result<Interval> {
        word.check_alphabet(self.model.alphabet_size())?;
        let h = self.hull();
        let (mut lo, mut hi) = (h.lo, h.hi);
        for &l in word.letters().iter().rev() {
            lo = self.apply(l as usize, lo);
            hi = self.apply(l as usize, hi);
        }
        Ok(Interval { lo, hi })
    }

    /// Positions of the cylinder midpoint in the local coordinates of every
    /// prefix: entry `k` is `S_{w_{k+1}} ∘ ⋯ ∘ S_{w_n}(mid hull)`, entry 0 is the
    /// point itself.
    pub fn local_coordinates(&self, word: &Word) -> Result<Vec<f64>> {
        word.check_alphabet(self.model.alphabet_size())?;
        let letters = word.letters();
        let mut ys = vec![0.0; letters.len() + 1];
        ys[letters.len()] = self.hull().midpoint();
        for k in (0..letters.len()).rev() {
            ys[k] = self.apply(letters[k] as usize, ys[k + 1]);
        }
        Ok(ys)
    }

    pub fn ball_measure(&self, x: f64, r: f64) -> Result<BallMeasure> {
        self.ball_measure_with(x, r, DEFAULT_ETA)
    }

    /// `μ(B(x, r))` by cylinder descent, truncated below length `eta·r`.
    pub fn ball_measure_with(&self, x: f64, r: f64, eta: f64) -> Result<BallMeasure> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidArgument(format!("truncation {eta} must be positive")));
        }
        let hull = self.hull();
        let slack = TOUCH_REL_TOL * hull.length() + CONTAIN_REL_TOL * (x.abs() + r);
        if !(x >= hull.lo - slack && x <= hull.hi + slack) {
            return Err(Error::InvalidArgument(format!("point {x} lies outside the hull [{}, {}]", hull.lo, hull.hi)));
        }
        let tol = CONTAIN_REL_TOL * (x.abs() + r);
        let (b_lo, b_hi) = (x - r, x + r);
        let cutoff = eta * r;
        let ratios = self.model.ratios();
        let probs = self.model.probs().entries();
        let t = self.translations();

        let mut out = BallMeasure { contained: 0.0, undecided: 0.0 };
        // cylinder image S_w(hull) = ratio·hull + shift, with its mass
        let mut stack = vec![(1.0f64, 0.0f64, 1.0f64)];
        while let Some((ratio, shift, mass)) = stack.pop() {
            let lo = ratio * hull.lo + shift;
            let hi = ratio * hull.hi + shift;
            if hi < b_lo || lo > b_hi || mass == 0.0 {
                continue;
            }
            if lo >= b_lo - tol && hi <= b_hi + tol {
                out.contained += mass;
                continue;
            }
            if hi - lo < cutoff {
                out.undecided += mass;
                continue;
            }
            for l in 0..ratios.len() {
                // S_w ∘ S_l (y) = ratio·(r_l·y + t_l) + shift
                stack.push((ratio * ratios[l], ratio * t[l] + shift, mass * probs[l]));
            }
        }
        Ok(out)
    }

    /// Ball measure around the cylinder midpoint of `word`, descending through
    /// the word while the ball stays inside a single first-level image, then
    /// evaluating geometrically in that cylinder's coordinates.
    pub fn ball_measure_along(&self, word: &Word, radius: Radius) -> Result<WordBallMeasure> {
        let ys = self.local_coordinates(word)?;
        self.ball_measure_along_coords(word, &ys, radius)
    }

    fn ball_measure_along_coords(&self, word: &Word, ys: &[f64], radius: Radius) -> Result<WordBallMeasure> {
        let letters = word.letters();
        let images = &self.certificate.images;
        let mut ln_rho = radius.ln();
        let mut ln_prefix = 0.0;
        let mut k = 0;
        while k < letters.len() {
            let c = letters[k] as usize;
            let rho = ln_rho.exp();
            let (lo, hi) = (ys[k] - rho, ys[k] + rho);
            if images.iter().any(|(j, img)| *j != c && img.hi >= lo && img.lo <= hi) {
                break;
            }
            ln_prefix += self.model.probs()[c].ln();
            ln_rho -= self.model.ratios()[c].ln();
            k += 1;
        }
        let rho = ln_rho.exp();
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radius e^{} is below the resolution of a depth-{} point",
                radius.ln(),
                letters.len()
            )));
        }
        let local = self.ball_measure(ys[k], rho)?;
        Ok(WordBallMeasure { level: k, ln_prefix, local })
    }

    /// Quotients `log μ(B(x,r)) / log r` at a float point, scales decreasing.
    pub fn local_dimension_estimate(&self, x: f64, scales: &[f64]) -> Result<Vec<LocalDimensionRow>> {
        check_decreasing(scales.iter().map(|r| r.ln()))?;
        scales
            .iter()
            .map(|&r| {
                let ln_measure = self.ball_measure(x, r)?.value().ln();
                Ok(LocalDimensionRow { ln_r: r.ln(), ln_measure, quotient: quotient(ln_measure, r.ln()) })
            })
            .collect()
    }

    /// [`Self::local_dimension_estimate`] resolved through the point's word, for
    /// scales far below float resolution around `x`.
    pub fn local_dimension_along(&self, point: &SampledPoint, scales: &[Radius]) -> Result<Vec<LocalDimensionRow>> {
        check_decreasing(scales.iter().map(|r| r.ln()))?;
        let ys = self.local_coordinates(&point.word)?;
        scales
            .iter()
            .map(|&r| {
                let ln_measure = self.ball_measure_along_coords(&point.word, &ys, r)?.ln_value();
                Ok(LocalDimensionRow { ln_r: r.ln(), ln_measure, quotient: quotient(ln_measure, r.ln()) })
            })
            .collect()
    }

    pub fn cylinder_bracket(&self) -> CylinderBracket {
        let delta = self.gap();
        let width = self.hull().length();
        let depth = ((delta / (2.0 * width)).ln() / self.model.max_ratio().ln()).ceil().max(1.0) as u32;
        let p_min = self.model.probs().entries().iter().copied().fold(f64::INFINITY, f64::min);
        CylinderBracket { radius_factor: 0.5 * delta, refinement_depth: depth, lower_constant: p_min.powi(depth as i32) }
    }

    /// Draws `depth` i.i.d. letters from `sampler` and returns the word with
    /// its cylinder midpoint.
    pub fn sample_point(&self, sampler: &ProbabilityVector, depth: usize, seed: u64) -> Result<SampledPoint> {
        self.sample_with(sampler, depth, ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent points; point `i` uses stream `i` of the generator seeded by `seed`.
    pub fn sample_points(
        &self,
        sampler: &ProbabilityVector,
        depth: usize,
        seed: u64,
        count: usize,
    ) -> Result<Vec<SampledPoint>> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                self.sample_with(sampler, depth, rng)
            })
            .collect()
    }

    fn sample_with(&self, sampler: &ProbabilityVector, depth: usize, mut rng: ChaCha8Rng) -> Result<SampledPoint> {
        if depth == 0 {
            return Err(Error::InvalidArgument("sampling depth must be at least 1".into()));
        }
        if sampler.len() != self.model.alphabet_size() {
            return Err(Error::LengthMismatch { expected: self.model.alphabet_size(), got: sampler.len() });
        }
        let dist = WeightedIndex::new(sampler.entries())
            .map_err(|e| Error::InvalidProbability(format!("sampler: {e}")))?;
        let word = Word::new((0..depth).map(|_| dist.sample(&mut rng) as u8).collect());
        let x = self.project(&word)?.midpoint();
        Ok(SampledPoint { word, x })
    }
}

fn check_decreasing(ln_scales: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::INFINITY;
    for s in ln_scales {
        if !(s < prev) {
            return Err(Error::InvalidArgument("scales must be strictly decreasing".into()));
        }
        prev = s;
    }
    Ok(())
}
