/// Six significant digits, `%g` style: fixed notation for decimal exponents
/// in `[-4, 6)`, scientific otherwise, trailing zeros removed.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the value [`fmt_sig6`] prints.
pub fn round_sig6(x: f64) -> f64 {
    fmt_sig6(x).parse().expect("formatter output parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(52.42), "52.42");
        assert_eq!(fmt_sig6(58.6612345), "58.6612");
        assert_eq!(fmt_sig6(-2.5), "-2.5");
        assert_eq!(fmt_sig6(123456789.0), "1.23457e8");
        assert_eq!(fmt_sig6(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig6(0.0000123456789), "1.23457e-5");
        assert_eq!(fmt_sig6(99999.96), "100000");
        assert_eq!(fmt_sig6(999999.5), "1e6");
        assert_eq!(fmt_sig6(30.0), "30");
    }

    proptest! {
        #[test]
        fn formatting_is_idempotent(x in prop::num::f64::NORMAL) {
            let once = fmt_sig6(x);
            let again = fmt_sig6(once.parse::<f64>().unwrap());
            prop_assert_eq!(&once, &again);
            let rel = ((round_sig6(x) - x) / x).abs();
            prop_assert!(rel <= 5e-6, "{} -> {}", x, once);
        }
    }
}
