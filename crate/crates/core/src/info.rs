//! Entropy, cross entropy, Kullback–Leibler divergence and Lyapunov exponent.
//!
//! All quantities are in nats, with the convention `0·log 0 = 0`.

use crate::error::{Error, Result};
use crate::model::IfsModel;
use crate::simplex::ProbabilityVector;

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected: a, got: b })
    }
}

/// `H(w) = −Σ w_i log w_i`.
pub fn entropy(w: &ProbabilityVector) -> f64 {
    w.entries().iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// `H(w, p) = Σ w_i log(1/p_i)`, infinite (an error) if `w_i > 0 = p_i`.
pub fn cross_entropy(w: &ProbabilityVector, p: &ProbabilityVector) -> Result<f64> {
    same_len(w.len(), p.len())?;
    let mut total = 0.0;
    for (index, (&wi, &pi)) in w.entries().iter().zip(p.entries()).enumerate() {
        if wi > 0.0 {
            if pi <= 0.0 {
                return Err(Error::InfiniteCrossEntropy { index, weight: wi });
            }
            total -= wi * pi.ln();
        }
    }
    Ok(total)
}

/// `D(w‖p) = H(w, p) − H(w)`, summed termwise so it stays nonnegative to rounding.
pub fn kl_divergence(w: &ProbabilityVector, p: &ProbabilityVector) -> Result<f64> {
    same_len(w.len(), p.len())?;
    let mut total = 0.0;
    for (index, (&wi, &pi)) in w.entries().iter().zip(p.entries()).enumerate() {
        if wi > 0.0 {
            if pi <= 0.0 {
                return Err(Error::InfiniteCrossEntropy { index, weight: wi });
            }
            total += wi * (wi / pi).ln();
        }
    }
    Ok(total.max(0.0))
}

/// `χ(w) = Σ w_i log(1/r_i)`.
pub fn lyapunov(w: &ProbabilityVector, model: &IfsModel) -> Result<f64> {
    same_len(model.alphabet_size(), w.len())?;
    Ok(w.entries().iter().zip(model.ratios()).map(|(&wi, &ri)| -wi * ri.ln()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&pv(&[0.5, 0.5])) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&pv(&[1.0, 0.0])), 0.0);
        // −(¼ log ¼ + ¾ log ¾)
        assert!((entropy(&pv(&[0.25, 0.75])) - 0.562335144618).abs() < 1e-11);
    }

    #[test]
    fn cross_entropy_examples() {
        let h = cross_entropy(&pv(&[0.5, 0.5]), &pv(&[0.25, 0.75])).unwrap();
        assert!((h - (0.5 * 4f64.ln() + 0.5 * (4.0f64 / 3.0).ln())).abs() < 1e-15);
        assert!((h - 0.836988).abs() < 1e-6);
        let h = cross_entropy(&pv(&[1.0, 0.0]), &pv(&[0.25, 0.75])).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-15);
        let w = pv(&[0.5, 0.5]);
        assert!((cross_entropy(&w, &w).unwrap() - entropy(&w)).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_infinite() {
        let err = cross_entropy(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::InfiniteCrossEntropy { index: 1, .. }));
        assert!(kl_divergence(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).is_err());
        // zero weight where p vanishes is fine
        assert_eq!(cross_entropy(&pv(&[1.0, 0.0]), &pv(&[1.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn kl_examples() {
        let w = pv(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&w, &w).unwrap(), 0.0);
        let d = kl_divergence(&pv(&[0.5, 0.5]), &pv(&[0.25, 0.75])).unwrap();
        assert!((d - 0.143841).abs() < 1e-6);
        // ¼ log(¼/½) + ¾ log(¾/½)
        let d = kl_divergence(&pv(&[0.25, 0.75]), &pv(&[0.5, 0.5])).unwrap();
        assert!((d - (0.25 * 0.5f64.ln() + 0.75 * 1.5f64.ln())).abs() < 1e-15);
        assert!((d - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn lyapunov_examples() {
        let third = 1.0 / 3.0;
        let m = IfsModel::new(vec![third, third], pv(&[0.5, 0.5])).unwrap();
        assert!((lyapunov(&pv(&[0.2, 0.8]), &m).unwrap() - 3f64.ln()).abs() < 1e-15);
        let m = IfsModel::new(vec![0.5, 0.25], pv(&[0.5, 0.5])).unwrap();
        assert!((lyapunov(&pv(&[0.5, 0.5]), &m).unwrap() - 1.5 * 2f64.ln()).abs() < 1e-15);
        let m = IfsModel::new(vec![third, 1.0 / 9.0], pv(&[0.5, 0.5])).unwrap();
        assert!((lyapunov(&pv(&[1.0, 0.0]), &m).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(lyapunov(&pv(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]), &m).is_err());
    }
}
