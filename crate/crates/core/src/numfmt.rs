/// Formats a real with 17 significant digits so that CSV output round-trips
/// bit-for-bit. Non-finite values print as `inf`, `-inf` and `NaN`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
