//! Number formatting shared by every CSV and key-value writer.

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0" and keep one canonical spelling
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// Half-integer quantum number: `4`, `-1`, `3/2`.
pub fn fmt_half(twice: i32) -> String {
    if twice % 2 == 0 {
        (twice / 2).to_string()
    } else {
        format!("{twice}/2")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(7.422e9), "7.42200000000e9");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn half_integers() {
        assert_eq!(fmt_half(8), "4");
        assert_eq!(fmt_half(-2), "-1");
        assert_eq!(fmt_half(3), "3/2");
    }
}
