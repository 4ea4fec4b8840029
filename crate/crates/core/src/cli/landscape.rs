//! Landscape CSV: header `chart,re,im,payoff_usd`, LF line endings,
//! coordinates with 9 significant digits and payoffs with 6 decimals.

use std::fmt::Write as _;

use super::report::format_dollars;
use crate::market::LandscapeSample;

pub const CSV_HEADER: &str = "chart,re,im,payoff_usd";

/// Fixed-point rendering with 9 significant digits (`1.00000000`,
/// `-0.0200000000`, `123.456789`). Zero prints as `0.00000000`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    // scientific formatting rounds the mantissa first, so the exponent is
    // already correct for values like 9.9999999996
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    let decimals = (8 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn emit_landscape_csv(samples: &[LandscapeSample]) -> String {
    let mut out = String::with_capacity(40 * (samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in samples {
        writeln!(
            out,
            "{},{},{},{}",
            s.chart,
            format_sig9(s.re),
            format_sig9(s.im),
            format_dollars(s.payoff)
        )
        .expect("writing to a String cannot fail");
    }
    out
}
