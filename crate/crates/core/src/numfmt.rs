//! C `printf`-compatible number formatting (`%.4e`, `%.17g`).

/// Splits Rust's `{:e}` output into mantissa and exponent.
fn split_exp(s: &str) -> (&str, i32) {
    let (m, e) = s.split_once('e').expect("exponent marker");
    (m, e.parse().expect("integer exponent"))
}

fn c_exponent(e: i32) -> String {
    let sign = if e < 0 { '-' } else { '+' };
    format!("{sign}{:02}", e.abs())
}

fn non_finite(x: f64) -> Option<String> {
    if x.is_nan() {
        Some("nan".into())
    } else if x.is_infinite() {
        Some(if x > 0.0 { "inf".into() } else { "-inf".into() })
    } else {
        None
    }
}

/// Equivalent of C `%.{prec}e`.
pub fn fmt_e(x: f64, prec: usize) -> String {
    if let Some(s) = non_finite(x) {
        return s;
    }
    let s = format!("{x:.prec$e}");
    let (m, e) = split_exp(&s);
    format!("{m}e{}", c_exponent(e))
}

/// Equivalent of C `%.4e`, used for table cells.
pub fn fmt_e4(x: f64) -> String {
    fmt_e(x, 4)
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Equivalent of C `%.{prec}g`.
pub fn fmt_g(x: f64, prec: usize) -> String {
    if let Some(s) = non_finite(x) {
        return s;
    }
    let prec = prec.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.p$e}", p = prec - 1);
    let (m, e) = split_exp(&sci);
    if e < -4 || e >= prec as i32 {
        format!("{}e{}", strip_zeros(m), c_exponent(e))
    } else {
        let decimals = (prec as i32 - 1 - e) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

/// Equivalent of C `%.17g`: round-trips every `f64`.
pub fn fmt_g17(x: f64) -> String {
    fmt_g(x, 17)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e4_matches_printf() {
        assert_eq!(fmt_e4(0.5), "5.0000e-01");
        assert_eq!(fmt_e4(0.0), "0.0000e+00");
        assert_eq!(fmt_e4(-1234.5678), "-1.2346e+03");
        assert_eq!(fmt_e4(1e-300), "1.0000e-300");
        assert_eq!(fmt_e4(f64::NAN), "nan");
    }

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5e-7), "-2.4999999999999999e-07");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(0.0001), "0.0001");
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[
            std::f64::consts::PI,
            -1.0 / 3.0,
            6.02e23,
            1e-310,
            std::f64::consts::FRAC_1_SQRT_2,
        ] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
