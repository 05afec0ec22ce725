//! Number rendering shared by every subcommand: 17 significant digits,
//! trailing zeros dropped, plain decimals for moderate magnitudes.

pub fn number(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.16e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if v < 0.0 { "-" } else { "" };
    if !(-5..16).contains(&exp) {
        return format!("{sign}{}e{exp}", trim_fraction(mantissa));
    }
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let (int, frac) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), "0".repeat((-exp - 1) as usize) + &digits)
    };
    format!("{sign}{}", trim_fraction(&format!("{int}.{frac}")))
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return format!("{s}.0");
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

/// `{"value": v}`.
pub fn value_json(v: f64) -> String {
    format!("{{\"value\": {}}}", number(v))
}
