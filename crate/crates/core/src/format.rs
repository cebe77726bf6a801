//! Locale-independent number formatting for output files.

/// Shortest representation that round-trips (at most 17 significant digits),
/// with `.` as decimal separator. Plain notation for magnitudes in
/// `[1e−5, 1e16)`, exponent notation otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // normalize −0
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = x.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.3333333333333333");
        assert_eq!(fmt_f64(3f64.powi(-40)), "8.225263339969959e-20");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        for x in [0.1 + 0.2, 1e-300, 123456.789, -2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
