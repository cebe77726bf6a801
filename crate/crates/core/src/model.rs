//! Weighted iterated function systems and finite words over their alphabet.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// Largest supported alphabet; letters render as base-36 digits.
pub const MAX_ALPHABET: usize = 36;

/// Contraction ratios, weights, and optional 1-D translations.
///
/// The pair `(ratios, probs)` determines every spectrum; translations only
/// matter for the geometric realization in [`crate::geometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct IfsModel {
    ratios: Vec<f64>,
    probs: ProbabilityVector,
    translations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    ratios: Vec<f64>,
    probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    translations: Option<Vec<f64>>,
}

impl IfsModel {
    pub fn new(ratios: Vec<f64>, probs: ProbabilityVector) -> Result<Self> {
        Self::build(ratios, probs, None)
    }

    pub fn with_translations(ratios: Vec<f64>, probs: ProbabilityVector, translations: Vec<f64>) -> Result<Self> {
        Self::build(ratios, probs, Some(translations))
    }

    fn build(ratios: Vec<f64>, probs: ProbabilityVector, translations: Option<Vec<f64>>) -> Result<Self> {
        let m = ratios.len();
        if !(2..=MAX_ALPHABET).contains(&m) {
            return Err(Error::InvalidModel(format!("alphabet size {m} outside [2, {MAX_ALPHABET}]")));
        }
        if let Some((i, r)) = ratios.iter().enumerate().find(|(_, r)| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::InvalidModel(format!("ratio {i} = {r} is not in (0, 1)")));
        }
        if probs.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: probs.len() });
        }
        if let Some(t) = &translations {
            if t.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: t.len() });
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel("translations must be finite".into()));
            }
        }
        Ok(Self { ratios, probs, translations })
    }

    /// Parses the strict JSON schema `{"ratios": [...], "probs": [...], "translations": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        let probs = ProbabilityVector::new(doc.probs)?;
        Self::build(doc.ratios, probs, doc.translations)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            ratios: self.ratios.clone(),
            probs: self.probs.entries().to_vec(),
            translations: self.translations.clone(),
        };
        serde_json::to_string(&doc).expect("model document always serializes")
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn translations(&self) -> Option<&[f64]> {
        self.translations.as_deref()
    }

    pub fn alphabet_size(&self) -> usize {
        self.ratios.len()
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    /// Same IFS with different weights.
    pub fn reweighted(&self, probs: ProbabilityVector) -> Result<Self> {
        Self::build(self.ratios.clone(), probs, self.translations.clone())
    }

    /// Relabels letters jointly in ratios, probs and translations:
    /// new letter `i` is old letter `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.alphabet_size();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&j| j >= m || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::InvalidArgument("not a permutation of the alphabet".into()));
        }
        Self::build(
            perm.iter().map(|&j| self.ratios[j]).collect(),
            self.probs.permuted(perm),
            self.translations.as_ref().map(|t| perm.iter().map(|&j| t[j]).collect()),
        )
    }

    /// Fails with [`Error::ZeroProbability`] unless every weight is positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.probs.entries().iter().position(|&p| p <= 0.0) {
            Some(index) => Err(Error::ZeroProbability { index }),
            None => Ok(()),
        }
    }
}

/// A finite word over the alphabet `{0, …, m−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Parses base-36 letters, e.g. `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad letter {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) -> Option<u8> {
        self.0.pop()
    }

    /// The word with its last letter removed.
    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Letter counts over an alphabet of size `m`.
    pub fn counts(&self, m: usize) -> Vec<u32> {
        let mut c = vec![0u32; m];
        for &l in &self.0 {
            c[l as usize] += 1;
        }
        c
    }

    pub fn check_alphabet(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l as usize >= m) {
            Some(l) => Err(Error::InvalidArgument(format!("letter {l} outside alphabet of size {m}"))),
            None => Ok(()),
        }
    }

    /// `r_word = ∏ r_i`; the empty word has ratio 1.
    pub fn ratio(&self, model: &IfsModel) -> f64 {
        self.0.iter().map(|&l| model.ratios()[l as usize]).product()
    }

    /// `p_word = ∏ p_i`; the empty word has weight 1.
    pub fn prob(&self, model: &IfsModel) -> f64 {
        self.0.iter().map(|&l| model.probs()[l as usize]).product()
    }

    pub fn ln_ratio(&self, model: &IfsModel) -> f64 {
        self.0.iter().map(|&l| model.ratios()[l as usize].ln()).sum()
    }

    pub fn ln_prob(&self, model: &IfsModel) -> f64 {
        self.0.iter().map(|&l| model.probs()[l as usize].ln()).sum()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            let c = char::from_digit(u32::from(l), 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Derived quantities of a nonempty word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordStats {
    pub ratio: f64,
    pub prob: f64,
    pub word_type: ProbabilityVector,
}

pub fn word_stats(word: &Word, model: &IfsModel) -> Result<WordStats> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    word.check_alphabet(model.alphabet_size())?;
    Ok(WordStats {
        ratio: word.ratio(model),
        prob: word.prob(model),
        word_type: ProbabilityVector::from_counts(&word.counts(model.alphabet_size()))?,
    })
}
