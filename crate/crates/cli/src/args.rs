//! Flag value parsers. Reals accept `pi` multiples such as `-pi/2`, `3pi/2` or `2*pi`.

use std::f64::consts::PI;

use abc_orbits::diagnostics::{Axis, Orientation};
use abc_orbits::{Params, Point};

fn plain(s: &str) -> Option<f64> {
    if !s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    s.parse().ok()
}

fn term(t: &str) -> Option<f64> {
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let v = match body.find("pi") {
        None => plain(body)?,
        Some(i) => {
            let coef = body[..i].strip_suffix('*').unwrap_or(&body[..i]);
            let rest = &body[i + 2..];
            let rest = rest.strip_prefix('*').unwrap_or(rest);
            let c = if coef.is_empty() { 1.0 } else { plain(coef)? };
            let r = if rest.is_empty() { 1.0 } else { plain(rest)? };
            c * r * PI
        }
    };
    Some(sign * v)
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let err = || format!("invalid number `{s}` (expected e.g. 0.5, -pi/2, 3pi/2, 2*pi)");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t.as_str(), None),
    };
    let mut v = term(num).ok_or_else(err)?;
    if let Some(d) = den {
        let d = term(d).ok_or_else(err)?;
        if d == 0.0 {
            return Err(err());
        }
        v /= d;
    }
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err())
    }
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got `{s}`"));
    }
    Ok([parse_real(parts[0])?, parse_real(parts[1])?, parse_real(parts[2])?])
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    parse_triple(s).map(Point::from)
}

pub fn parse_params(s: &str) -> Result<Params, String> {
    let [a, b, c] = parse_triple(s)?;
    Params::new(a, b, c).map_err(|e| e.to_string())
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    match parse_real(s)? {
        v if v > 0.0 => Ok(v),
        v => Err(format!("expected a positive value, got {v}")),
    }
}

/// `x=level`, `y=level` or `z=level`.
pub fn parse_plane(s: &str) -> Result<(Axis, f64), String> {
    let (axis, level) = s.split_once('=').ok_or_else(|| format!("expected AXIS=LEVEL, got `{s}`"))?;
    let axis = match axis.trim() {
        "x" => Axis::X,
        "y" => Axis::Y,
        "z" => Axis::Z,
        other => return Err(format!("unknown axis `{other}`")),
    };
    Ok((axis, parse_real(level)?))
}

pub fn parse_orientation(s: &str) -> Result<Orientation, String> {
    match s {
        "positive" | "+" => Ok(Orientation::Positive),
        "negative" | "-" => Ok(Orientation::Negative),
        "both" => Ok(Orientation::Both),
        _ => Err(format!("expected positive, negative or both, got `{s}`")),
    }
}
