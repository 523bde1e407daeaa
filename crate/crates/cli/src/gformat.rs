//! Compact float formatting with `%g` semantics: fixed notation for
//! moderate exponents, scientific otherwise, trailing zeros trimmed.

/// Format `value` with `significant` significant digits, printf-`%g`
/// style (the trajectory CSV contract uses 10).
pub fn format_g(value: f64, significant: usize) -> String {
    let significant = significant.max(1);
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    if value == 0.0 {
        return "0".to_string();
    }

    // Round to the requested precision first, then read the exponent off
    // the scientific form so boundary cases (9.99e-5 -> 1e-4) land on the
    // right side.
    let sci = format!("{:.*e}", significant - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");

    if exp < -4 || exp >= significant as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (significant as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{value:.decimals$}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0');
        t.trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g_reference_cases() {
        // Reference strings from printf("%.10g").
        assert_eq!(format_g(0.0, 10), "0");
        assert_eq!(format_g(1.0, 10), "1");
        assert_eq!(format_g(-1.5, 10), "-1.5");
        assert_eq!(format_g(0.1, 10), "0.1");
        assert_eq!(format_g(0.0001, 10), "0.0001");
        assert_eq!(format_g(0.00001, 10), "1e-05");
        assert_eq!(format_g(1234.5, 10), "1234.5");
        assert_eq!(format_g(123456789012.0, 10), "1.23456789e+11");
        assert_eq!(format_g(9999999999.0, 10), "9999999999");
        assert_eq!(format_g(10000000000.0, 10), "1e+10");
        assert_eq!(format_g(core::f64::consts::PI, 10), "3.141592654");
        assert_eq!(format_g(-2.5e-7, 10), "-2.5e-07");
    }

    #[test]
    fn rounding_can_promote_the_exponent() {
        // 9.9999999996e-5 rounds to 1e-4 at 10 significant digits, which
        // is then printed in fixed notation.
        assert_eq!(format_g(9.9999999996e-5, 10), "0.0001");
    }

    #[test]
    fn non_finite_values() {
        assert_eq!(format_g(f64::NAN, 10), "nan");
        assert_eq!(format_g(f64::INFINITY, 10), "inf");
        assert_eq!(format_g(f64::NEG_INFINITY, 10), "-inf");
    }

    #[test]
    fn lower_precision() {
        assert_eq!(format_g(core::f64::consts::PI, 4), "3.142");
        assert_eq!(format_g(12345.0, 4), "1.234e+04");
    }
}
