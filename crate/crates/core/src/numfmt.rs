//! Fixed-precision number formatting for reports and data files.

/// 17 significant digits in scientific notation, so values round-trip and
/// identical inputs give byte-identical text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}
