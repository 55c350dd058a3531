//! Round-trip decimal formatting shared by every text output.

/// Shortest representation that parses back to the identical `f64`.
///
/// Uses positional notation for moderate magnitudes and exponent notation
/// otherwise, always with '.' as the decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
