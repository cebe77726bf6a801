//! Method of types: letter-count classes of section words and their
//! multinomial sizes.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::info::entropy;
use crate::model::IfsModel;
use crate::section::{at_or_below, enumerate_section, Section};
use crate::simplex::ProbabilityVector;

/// Word lengths up to this are counted exactly; longer ones through `ln Γ`.
pub const EXACT_LENGTH_LIMIT: u32 = 20;

/// `n! / ∏ k_i!`, exactly for short words and always as a logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multiplicity {
    pub exact: Option<u128>,
    pub ln: f64,
}

/// Exact multinomial coefficient as a product of binomials, `None` on overflow.
pub fn multinomial_exact(counts: &[u32]) -> Option<u128> {
    let mut total: u128 = 1;
    let mut n: u128 = 0;
    for &k in counts {
        for j in 1..=u128::from(k) {
            n += 1;
            // total · n / j stays integral: it is C(n, j) times earlier factors
            total = total.checked_mul(n)? / j;
        }
    }
    Some(total)
}

/// `ln n! − Σ ln k_i!` through the log-gamma function.
pub fn ln_multinomial_lgamma(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    ln_gamma(f64::from(n) + 1.0) - counts.iter().map(|&k| ln_gamma(f64::from(k) + 1.0)).sum::<f64>()
}

pub fn multiplicity(counts: &[u32]) -> Multiplicity {
    let n: u32 = counts.iter().sum();
    if n <= EXACT_LENGTH_LIMIT {
        let exact = multinomial_exact(counts).expect("n ≤ 20 fits in u128");
        Multiplicity { exact: Some(exact), ln: (exact as f64).ln() }
    } else {
        Multiplicity { exact: None, ln: ln_multinomial_lgamma(counts) }
    }
}

/// All words of one length with the given letter counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeClass {
    pub length: u32,
    pub counts: Vec<u32>,
    pub multiplicity: Multiplicity,
    pub word_type: ProbabilityVector,
}

impl TypeClass {
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        let length: u32 = counts.iter().sum();
        Ok(Self {
            length,
            counts: counts.to_vec(),
            multiplicity: multiplicity(counts),
            word_type: ProbabilityVector::from_counts(counts)?,
        })
    }
}

/// A type class together with how many of its words lie in a section.
///
/// With equal ratios every word of a class shares its parent's ratio, so
/// `members` equals the multinomial multiplicity. With unequal ratios the
/// parent ratio depends on the last letter and a class can be split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionClass {
    pub class: TypeClass,
    pub members: u64,
}

/// Groups the words of `Λ_r` by `(length, counts)`.
pub fn enumerate_types(model: &IfsModel, r: f64) -> Result<Vec<SectionClass>> {
    let section = enumerate_section(model, r)?;
    types_of(&section, model.alphabet_size())
}

pub fn types_of(section: &Section, alphabet: usize) -> Result<Vec<SectionClass>> {
    let mut groups: BTreeMap<(u32, Vec<u32>), u64> = BTreeMap::new();
    for w in &section.words {
        *groups.entry((w.word.len() as u32, w.word.counts(alphabet))).or_default() += 1;
    }
    groups
        .into_iter()
        .map(|((_, counts), members)| Ok(SectionClass { class: TypeClass::from_counts(&counts)?, members }))
        .collect()
}

/// Number of words with these counts that belong to `Λ_r`, by counting last
/// letters: a word of the class is in the section iff its ratio is `≤ r` and its
/// parent (the class with one fewer copy of the last letter) has ratio `> r`.
pub fn section_class_size(model: &IfsModel, r: f64, counts: &[u32]) -> Result<u128> {
    if counts.len() != model.alphabet_size() {
        return Err(Error::LengthMismatch { expected: model.alphabet_size(), got: counts.len() });
    }
    let ratio: f64 = counts.iter().zip(model.ratios()).map(|(&k, &ri)| ri.powi(k as i32)).product();
    if counts.iter().all(|&k| k == 0) || !at_or_below(ratio, r) {
        return Ok(0);
    }
    let mut total = 0u128;
    for (l, &k) in counts.iter().enumerate() {
        if k == 0 || at_or_below(ratio / model.ratios()[l], r) {
            continue;
        }
        let mut rest = counts.to_vec();
        rest[l] -= 1;
        total += multinomial_exact(&rest).ok_or_else(|| Error::ResourceLimit {
            what: "exact multinomial",
            count: f64::INFINITY,
            limit: u128::MAX as f64,
        })?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeEntropyCheck {
    pub log_count_per_symbol: f64,
    pub entropy: f64,
    pub gap: f64,
}

/// Compares `log(multiplicity)/n` with `H(type)`.
pub fn type_entropy_check(class: &TypeClass) -> Result<TypeEntropyCheck> {
    if class.length == 0 {
        return Err(Error::EmptyWord);
    }
    let per_symbol = class.multiplicity.ln / f64::from(class.length);
    let h = entropy(&class.word_type);
    Ok(TypeEntropyCheck { log_count_per_symbol: per_symbol, entropy: h, gap: (per_symbol - h).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THIRD: f64 = 1.0 / 3.0;

    fn model(r: &[f64], p: &[f64]) -> IfsModel {
        IfsModel::new(r.to_vec(), ProbabilityVector::new(p.to_vec()).unwrap()).unwrap()
    }

    fn factorial(n: u32) -> u128 {
        (1..=u128::from(n)).product()
    }

    #[test]
    fn exact_multinomials() {
        assert_eq!(multinomial_exact(&[2, 2]), Some(6));
        assert_eq!(multinomial_exact(&[0, 0]), Some(1));
        assert_eq!(multinomial_exact(&[3, 2, 1]), Some(60));
        for counts in [[5u32, 7, 8], [20, 0, 0], [1, 1, 18], [10, 5, 5]] {
            let n: u32 = counts.iter().sum();
            let expected = factorial(n) / counts.iter().map(|&k| factorial(k)).product::<u128>();
            assert_eq!(multinomial_exact(&counts), Some(expected));
        }
        assert_eq!(multinomial_exact(&[200, 200]), None);
    }

    #[test]
    fn lgamma_agrees_with_exact_on_overlap() {
        for n in 10..=20u32 {
            for k in 0..=n {
                let counts = [k, n - k];
                let exact = multinomial_exact(&counts).unwrap() as f64;
                assert!((ln_multinomial_lgamma(&counts) - exact.ln()).abs() < 1e-9, "n={n} k={k}");
            }
            let counts = [n / 3, n / 3, n - 2 * (n / 3)];
            let exact = multinomial_exact(&counts).unwrap() as f64;
            assert!((ln_multinomial_lgamma(&counts) - exact.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn multiplicity_switches_paths() {
        assert!(multiplicity(&[10, 10]).exact.is_some());
        let m = multiplicity(&[10, 11]);
        assert!(m.exact.is_none());
        let exact = multinomial_exact(&[10, 11]).unwrap() as f64;
        assert!((m.ln - exact.ln()).abs() < 1e-9);
    }

    #[test]
    fn cantor_classes() {
        let m = model(&[THIRD, THIRD], &[0.5, 0.5]);
        let classes = enumerate_types(&m, 1.0 / 9.0).unwrap();
        let got: Vec<(Vec<u32>, u64)> = classes.iter().map(|c| (c.class.counts.clone(), c.members)).collect();
        assert_eq!(got, vec![(vec![0, 2], 1), (vec![1, 1], 2), (vec![2, 0], 1)]);
        for n in 1..=12 {
            let classes = enumerate_types(&m, 3f64.powi(-n)).unwrap();
            assert_eq!(classes.len() as i32, n + 1);
            assert!(classes.len() as i32 <= (n + 1) * (n + 1));
            for c in &classes {
                assert_eq!(Some(u128::from(c.members)), c.class.multiplicity.exact);
            }
        }
    }

    #[test]
    fn class_count_bound_and_partition() {
        let m = model(&[0.5, 0.25, 0.2], &[0.2, 0.3, 0.5]);
        for r in [0.05, 0.005, 0.0007] {
            let s = enumerate_section(&m, r).unwrap();
            let classes = types_of(&s, 3).unwrap();
            let total: u64 = classes.iter().map(|c| c.members).sum();
            assert_eq!(total as usize, s.len());
            let bound = (s.max_depth() as f64 + 1.0).powi(3);
            assert!((classes.len() as f64) <= bound);
            for c in &classes {
                assert_eq!(u128::from(c.members), section_class_size(&m, r, &c.class.counts).unwrap());
            }
        }
    }

    #[test]
    fn split_class_with_unequal_ratios() {
        // Λ_{1/4} for r = (1/2, 1/4) is {00, 01, 1}: 10 is excluded because its parent 1 already stops
        let m = model(&[0.5, 0.25], &[0.5, 0.5]);
        let classes = enumerate_types(&m, 0.25).unwrap();
        let mixed = classes.iter().find(|c| c.class.counts == [1, 1]).unwrap();
        assert_eq!(mixed.members, 1);
        assert_eq!(mixed.class.multiplicity.exact, Some(2));
    }

    #[test]
    fn entropy_gap() {
        let c = TypeClass::from_counts(&[1, 1]).unwrap();
        let e = type_entropy_check(&c).unwrap();
        assert!((e.log_count_per_symbol - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!((e.gap - 0.3466).abs() < 1e-4);
        let e = type_entropy_check(&TypeClass::from_counts(&[50, 50]).unwrap()).unwrap();
        assert!(e.gap < 0.03);
        let e = type_entropy_check(&TypeClass::from_counts(&[7, 0]).unwrap()).unwrap();
        assert_eq!(TypeClass::from_counts(&[7, 0]).unwrap().multiplicity.exact, Some(1));
        assert_eq!((e.entropy, e.gap), (0.0, 0.0));
        assert_eq!(TypeClass::from_counts(&[2, 2]).unwrap().multiplicity.exact, Some(6));
    }

    #[test]
    fn entropy_gap_shrinks_with_length() {
        let gaps: Vec<f64> = [4u32, 16, 64, 256, 1024]
            .iter()
            .map(|&n| type_entropy_check(&TypeClass::from_counts(&[n / 4, 3 * n / 4]).unwrap()).unwrap().gap)
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }
}
