//! Locale-free float formatting for CSV and JSON outputs.
//!
//! Values are rounded to 12 significant digits, so outputs stay byte-stable
//! across platforms and last-ulp noise in the solvers never reaches a golden
//! file.

/// Significant digits kept in every written float.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits, in plain notation when the
/// magnitude is moderate and scientific notation otherwise. Non-finite
/// values print as `inf`, `-inf` and `NaN`.
pub fn float(x: f64) -> String {
    let r = round(x);
    if !r.is_finite() {
        return format!("{r}");
    }
    let a = r.abs();
    if r == 0.0 || (1e-6..1e15).contains(&a) {
        // Shortest round-trip representation of the rounded value.
        format!("{}", if r == 0.0 { 0.0 } else { r })
    } else {
        let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, r);
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

/// `x` rounded to 12 significant digits.
pub fn round(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Rounds every entry of a vector.
pub fn round_vec(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round).collect()
}
