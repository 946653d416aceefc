//! Fixed-precision number formatting shared by every text export.

/// Formats `x` with 17 significant digits using the rules of C's `%.17g`:
/// fixed notation for decimal exponents in `[-4, 17)`, scientific otherwise,
/// trailing zeros removed. Every finite `f64` round-trips through the output.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if (-4..17).contains(&exp) {
        let body = if exp >= 0 {
            let split = exp as usize + 1;
            let (int, frac) = digits.split_at(split);
            join_fixed(int, frac)
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            join_fixed("0", &format!("{zeros}{digits}"))
        };
        format!("{sign}{body}")
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        let exp_sign = if exp < 0 { '-' } else { '+' };
        if rest.is_empty() {
            format!("{sign}{lead}e{exp_sign}{:02}", exp.abs())
        } else {
            format!("{sign}{lead}.{rest}e{exp_sign}{:02}", exp.abs())
        }
    }
}

fn join_fixed(int: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}
