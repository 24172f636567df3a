//! Number formatting shared by the printed tables.

/// `"< 0.001"` below the threshold, three decimals otherwise.
pub fn format_p_value(p: f64) -> String {
    if p.is_nan() {
        "NA".into()
    } else if p < 0.001 {
        "< 0.001".into()
    } else {
        format!("{p:.3}")
    }
}

/// Three decimals, used for coefficients and hazard ratios.
pub fn format_coef(x: f64) -> String {
    format!("{x:.3}")
}

/// Integers print bare; other values keep up to two decimals.
pub fn format_number(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Proportion as a percentage with at most one decimal.
pub fn format_percent(p: f64) -> String {
    let s = format!("{:.1}", p * 100.0);
    format!("{}%", s.strip_suffix(".0").unwrap_or(&s))
}
