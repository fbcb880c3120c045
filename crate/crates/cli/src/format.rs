/// Full-precision scientific notation (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Protocol label made safe for a file name: `1:0.5` becomes `1-0.5`.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '-' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -0.0, 1.1, 1.0 / 3.0, 6.02e23, -1e-300, f64::MIN_POSITIVE, f64::MAX] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(num(1.37), "1.3700000000000001e0");
    }

    #[test]
    fn stems() {
        assert_eq!(file_stem("1:0.5"), "1-0.5");
        assert_eq!(file_stem("a b/c"), "a-b-c");
    }
}
