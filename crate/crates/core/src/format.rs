//! Fixed number formatting shared by every report and table.

/// Formats `x` with 6 significant digits, `.` as decimal separator.
///
/// Magnitudes in `[1e-4, 1e6)` are printed positionally, everything else in
/// scientific notation, so identical inputs always produce identical text.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mag = x.abs();
    if (1e-4..1e6).contains(&mag) {
        // Round first so that e.g. 9.999999 does not print seven digits.
        let sci = format!("{:.5e}", x);
        let (_, exp) = sci.split_once('e').unwrap();
        let exp: i32 = exp.parse().unwrap();
        let decimals = (5 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.5e}", x)
    }
}

#[cfg(test)]
mod tests {
    use super::fmt6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt6(9.9), "9.90000");
        assert_eq!(fmt6(129.78), "129.780");
        assert_eq!(fmt6(-0.0012345678), "-0.00123457");
        assert_eq!(fmt6(9.9999999), "10.0000");
        assert_eq!(fmt6(123456.7), "123457");
        assert_eq!(fmt6(1.2e-55), "1.20000e-55");
        assert_eq!(fmt6(0.0), "0.00000");
        assert_eq!(fmt6(f64::INFINITY), "inf");
    }
}
