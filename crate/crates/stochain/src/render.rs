//! Fixed-width numeric rendering for report output.
//!
//! All serialized reals carry 12 significant digits so that identical runs
//! produce byte-identical files.

/// Render `x` with 12 significant digits, `%g`-style.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

/// Render `x` with `digits` significant digits.
///
/// Uses fixed notation when the decimal exponent is in `[-4, digits)` and
/// scientific notation otherwise, mirroring C's `%g` but keeping trailing
/// zeros so the width is stable.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // the scientific rendering rounds first, so its exponent already
    // accounts for a rounding carry (e.g. 9999.5 at 4 digits -> 1.000e4)
    let sci = format!("{:.*e}", digits - 1, x);
    let e_at = sci.find('e').expect("scientific format");
    let exp: i32 = sci[e_at + 1..].parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        sci
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    }
}

/// Escape a string for embedding in a JSON document.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
