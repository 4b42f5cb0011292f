//! Number rendering shared by rule text and reports.

/// Shortest round-trip rendering with a mandatory fractional part, switching
/// to `d.dddE±x` outside [1e-3, 1e7): `15.0`, `0.916438051`, `3.8E-67`.
pub fn double_string(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Infinity".into() } else { "-Infinity".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let abs = x.abs();
    if (1e-3..1e7).contains(&abs) {
        let s = format!("{x}");
        if s.contains('.') {
            s
        } else {
            s + ".0"
        }
    } else {
        let s = format!("{x:e}");
        let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
        if mantissa.contains('.') {
            format!("{mantissa}E{exp}")
        } else {
            format!("{mantissa}.0E{exp}")
        }
    }
}

/// Two significant digits in E-notation, e.g. `3.8E-67`.
pub fn p_value_string(p: f64) -> String {
    format!("{p:.1E}")
}
