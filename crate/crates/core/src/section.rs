//! Sections `Λ_r = { i : r_i ≤ r < r_{i⁻} }` of the word tree and the
//! empirical moment sums `Σ_{i ∈ Λ_r} p_i^q`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::model::{IfsModel, Word};
use crate::roots::similarity_dimension;

/// Hard limit on section size.
pub const MAX_SECTION_WORDS: usize = 10_000_000;

/// Relative slack in `r_word ≤ r`, so that e.g. `(1/3)·(1/3)` counts as `≤ 1/9`
/// despite rounding in the product.
pub const SCALE_REL_TOL: f64 = 1e-12;

/// Above this `|q|` the moment sum is taken in log-space.
pub const LOG_SPACE_Q: f64 = 30.0;

pub(crate) fn at_or_below(ratio: f64, r: f64) -> bool {
    ratio <= r * (1.0 + SCALE_REL_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionWord {
    pub word: Word,
    pub ratio: f64,
    pub prob: f64,
    pub ln_ratio: f64,
    pub ln_prob: f64,
}

/// The words of `Λ_r` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub scale: f64,
    pub words: Vec<SectionWord>,
}

impl Section {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.words.iter().map(|w| w.word.len()).max().unwrap_or(0)
    }

    /// Checks the stopping rule, prefix-freeness, and `Σ r_word^{dim} = 1`.
    pub fn verify(&self, model: &IfsModel) -> Result<()> {
        let r = self.scale;
        for w in &self.words {
            if !at_or_below(w.ratio, r) {
                return Err(Error::Integrity(format!("{} has ratio {} > {r}", w.word, w.ratio)));
            }
            let parent = w.ratio / model.ratios()[*w.word.letters().last().expect("nonempty") as usize];
            if at_or_below(parent, r) {
                return Err(Error::Integrity(format!("parent of {} already has ratio {parent} ≤ {r}", w.word)));
            }
        }
        // in lexicographic order a prefix sits immediately before one of its extensions
        for pair in self.words.windows(2) {
            if pair[0].word >= pair[1].word {
                return Err(Error::Integrity("section words are not sorted".into()));
            }
            if pair[0].word.is_prefix_of(&pair[1].word) {
                return Err(Error::Integrity(format!("{} is a prefix of {}", pair[0].word, pair[1].word)));
            }
        }
        let dim = similarity_dimension(model.ratios())?;
        let total: f64 = self.words.iter().map(|w| w.ratio.powf(dim)).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Integrity(format!("Σ r_word^dim = {total}, expected 1")));
        }
        Ok(())
    }

    /// `Σ p_word^q`, as its natural logarithm.
    pub fn ln_moment(&self, q: f64) -> f64 {
        if q.abs() > LOG_SPACE_Q {
            let max = self.words.iter().map(|w| q * w.ln_prob).fold(f64::NEG_INFINITY, f64::max);
            max + self.words.iter().map(|w| (q * w.ln_prob - max).exp()).sum::<f64>().ln()
        } else {
            self.words.iter().map(|w| w.prob.powf(q)).sum::<f64>().ln()
        }
    }

    /// One word per line: letters, tab, `r_word`, tab, `p_word`.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for w in &self.words {
            writeln!(out, "{}\t{}\t{}", w.word, fmt_f64(w.ratio), fmt_f64(w.prob))?;
        }
        Ok(())
    }
}

/// Depth-first enumeration of `Λ_r` with an explicit stack.
pub fn enumerate_section(model: &IfsModel, r: f64) -> Result<Section> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("scale {r} is not in (0, 1)")));
    }
    let m = model.alphabet_size();
    // |Λ_r| ≥ r^{−dim}; refuse early when even the lower bound is too large
    let dim = similarity_dimension(model.ratios())?;
    let projected = r.powf(-dim);
    if projected > MAX_SECTION_WORDS as f64 {
        return Err(Error::ResourceLimit { what: "projected section size", count: projected, limit: MAX_SECTION_WORDS as f64 });
    }
    let ratios = model.ratios();
    let probs = model.probs().entries();

    let mut words = Vec::new();
    let mut stack: Vec<SectionWord> =
        vec![SectionWord { word: Word::empty(), ratio: 1.0, prob: 1.0, ln_ratio: 0.0, ln_prob: 0.0 }];
    while let Some(node) = stack.pop() {
        if !node.word.is_empty() && at_or_below(node.ratio, r) {
            if words.len() >= MAX_SECTION_WORDS {
                return Err(Error::ResourceLimit {
                    what: "section size",
                    count: (words.len() + 1) as f64,
                    limit: MAX_SECTION_WORDS as f64,
                });
            }
            words.push(node);
            continue;
        }
        for l in (0..m).rev() {
            let mut word = node.word.clone();
            word.push(l as u8);
            stack.push(SectionWord {
                word,
                ratio: node.ratio * ratios[l],
                prob: node.prob * probs[l],
                ln_ratio: node.ln_ratio + ratios[l].ln(),
                ln_prob: node.ln_prob + probs[l].ln(),
            });
        }
    }
    Ok(Section { scale: r, words })
}

/// `log(Σ_{Λ_r} p_word^q) / log r`.
pub fn empirical_tau(model: &IfsModel, q: f64, r: f64) -> Result<f64> {
    model.require_positive()?;
    let section = enumerate_section(model, r)?;
    Ok(empirical_tau_on(&section, q))
}

/// [`empirical_tau`] on an already enumerated section.
pub fn empirical_tau_on(section: &Section, q: f64) -> f64 {
    section.ln_moment(q) / section.scale.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lq::tau;
    use crate::simplex::ProbabilityVector;

    const THIRD: f64 = 1.0 / 3.0;

    fn model(r: &[f64], p: &[f64]) -> IfsModel {
        IfsModel::new(r.to_vec(), ProbabilityVector::new(p.to_vec()).unwrap()).unwrap()
    }

    fn words(s: &Section) -> Vec<String> {
        s.words.iter().map(|w| w.word.to_string()).collect()
    }

    #[test]
    fn cantor_sections() {
        let m = model(&[THIRD, THIRD], &[0.5, 0.5]);
        let s = enumerate_section(&m, 1.0 / 9.0).unwrap();
        assert_eq!(words(&s), ["00", "01", "10", "11"]);
        let s = enumerate_section(&m, 0.25).unwrap();
        assert_eq!(words(&s), ["00", "01", "10", "11"]);
        s.verify(&m).unwrap();
        for k in 1..=10 {
            let s = enumerate_section(&m, 3f64.powi(-k)).unwrap();
            assert_eq!(s.len(), 1 << k);
            assert!(s.words.iter().all(|w| w.word.len() == k as usize));
        }
    }

    #[test]
    fn unequal_ratio_section() {
        let m = model(&[0.5, 0.25], &[0.5, 0.5]);
        let s = enumerate_section(&m, 0.25).unwrap();
        assert_eq!(words(&s), ["00", "01", "1"]);
        let ratios: Vec<f64> = s.words.iter().map(|w| w.ratio).collect();
        assert_eq!(ratios, [0.25, 0.125, 0.25]);
        s.verify(&m).unwrap();
    }

    #[test]
    fn bad_scales() {
        let m = model(&[THIRD, THIRD], &[0.5, 0.5]);
        assert!(enumerate_section(&m, 0.0).is_err());
        assert!(enumerate_section(&m, 1.0).is_err());
        assert!(matches!(enumerate_section(&m, 1e-20), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn verify_catches_corruption() {
        let m = model(&[0.5, 0.25], &[0.5, 0.5]);
        let mut s = enumerate_section(&m, 0.1).unwrap();
        s.words.pop();
        assert!(s.verify(&m).is_err());
    }

    #[test]
    fn empirical_tau_examples() {
        let cantor = model(&[THIRD, THIRD], &[0.5, 0.5]);
        let v = empirical_tau(&cantor, 2.0, 1.0 / 9.0).unwrap();
        assert!((v - 2f64.ln() / 3f64.ln()).abs() < 1e-14);
        let m = model(&[0.5, 0.25, 0.2], &[0.2, 0.3, 0.5]);
        for r in [0.1, 0.01, 0.003] {
            assert!(empirical_tau(&m, 1.0, r).unwrap().abs() < 1e-12);
        }
        let asym = model(&[THIRD, THIRD], &[0.25, 0.75]);
        let v = empirical_tau(&asym, 0.0, 3f64.powi(-12)).unwrap();
        assert!((v + 0.630930).abs() < 0.08);
    }

    #[test]
    fn log_space_matches_direct() {
        let m = model(&[0.5, 0.25, 0.2], &[0.2, 0.3, 0.5]);
        let s = enumerate_section(&m, 0.01).unwrap();
        for q in [-25.0, 3.0, 29.0] {
            let max = s.words.iter().map(|w| q * w.ln_prob).fold(f64::NEG_INFINITY, f64::max);
            let lse = max + s.words.iter().map(|w| (q * w.ln_prob - max).exp()).sum::<f64>().ln();
            assert!((lse - s.ln_moment(q)).abs() < 1e-9 * lse.abs().max(1.0));
        }
        // extreme q stays finite
        assert!(s.ln_moment(900.0).is_finite());
        assert!(s.ln_moment(-900.0).is_finite());
        let t = tau(&m, 40.0).unwrap().tau;
        assert!((empirical_tau_on(&s, 40.0) - t).abs() < 1.0);
    }

    #[test]
    fn depth_bounds() {
        let m = model(&[0.5, 0.25, 0.2], &[0.2, 0.3, 0.5]);
        for r in [0.1, 0.01, 0.001] {
            let s = enumerate_section(&m, r).unwrap();
            let lo = (r.ln() / m.min_ratio().ln()).ceil() as usize;
            let hi = (r.ln() / m.max_ratio().ln()).ceil() as usize;
            for w in &s.words {
                assert!(w.word.len() >= lo && w.word.len() <= hi, "{} at r={r}", w.word);
            }
        }
    }

    #[test]
    fn dump_format() {
        let m = model(&[0.5, 0.25], &[0.5, 0.5]);
        let s = enumerate_section(&m, 0.25).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "00\t0.25\t0.25\n01\t0.125\t0.25\n1\t0.25\t0.5\n");
    }
}
