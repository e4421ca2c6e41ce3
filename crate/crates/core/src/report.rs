//! Number formatting shared by every CSV writer.

/// 17 significant digits; `inf`, `-inf` and `nan` spelled literally.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}
