//! Angle reduction and the `pi/6`-style literal parser used by the CLI.

use std::f64::consts::{PI, TAU};

/// Reduce to `[0, 2π)`.
pub fn reduce_tau(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce to the eigenphase range `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let r = reduce_tau(angle);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest signed distance from `b` to `a` on the circle, in `(-π, π]`.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    wrap_pi(a - b)
}

/// Parse an angle in radians. Accepts plain floats and π-multiples such as
/// `pi`, `-pi/4`, `2pi/3`, `2*pi/3`, `pi*0.5`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text
        .trim()
        .to_ascii_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("angle '{text}' is not finite"))
        };
    }
    let bad = || format!("cannot parse angle '{text}'");
    let (numerator, denominator) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s.as_str(), None),
    };
    let idx = numerator.find("pi").ok_or_else(bad)?;
    let (before, after) = (&numerator[..idx], &numerator[idx + 2..]);
    let before = before.strip_suffix('*').unwrap_or(before);
    let coeff_before = match before {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let coeff_after = match after {
        "" => 1.0,
        c => c.strip_prefix('*').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    let mut value = coeff_before * coeff_after * PI;
    if let Some(d) = denominator {
        let d: f64 = d.parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(format!("division by zero in angle '{text}'"));
        }
        value /= d;
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}
