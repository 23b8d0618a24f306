//! Canonical real-number rendering shared by the digest, CSV export and frames.

/// Renders `x` with 17 significant digits in the style of C's `%.17g`:
/// trailing zeros are trimmed and exponent notation is used outside
/// `1e-5 <= |x| < 1e17`. The output parses back to the identical `f64`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", m, sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Parses what [`g17`] renders, including the non-finite spellings.
pub fn parse_g17(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn familiar_values() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(-2.25), "-2.25");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(100.0), "100");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(g17(f64::INFINITY), "inf");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = g17(x);
            let back = parse_g17(&s).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits(), "{}", s);
        }
    }
}
