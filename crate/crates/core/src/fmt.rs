/// Shortest text that parses back to the same `f64`, in positional form for
/// moderate magnitudes and exponent form otherwise.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::format_float;

    #[test]
    fn round_trips() {
        for x in [0.0, -0.0, 1.0, -150.0, 0.1, 1e-4, 9.99e-5, 8.012906503734038e-10, 1e15, 3.3e300, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(8.5e-10), "8.5e-10");
        assert_eq!(format_float(-149.5), "-149.5");
    }
}
