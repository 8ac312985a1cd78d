//! Text formats: rationals (`p/q` or decimals), weights (`1/2,1/2,-1/2`),
//! θ vectors and `key=value` configuration files.

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::lattice::Weight;
use crate::Q;

const MAX_TOKEN_LEN: usize = 256;

fn parse_err(what: &str, s: &str) -> Error {
    let shown: String = s.chars().take(40).collect();
    Error::Parse(format!("invalid {what}: {shown:?}"))
}

/// Parses `p`, `p/q` or a plain decimal like `0.75` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if t.is_empty() || t.len() > MAX_TOKEN_LEN {
        return Err(parse_err("rational", s));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_int(n.trim()).ok_or_else(|| parse_err("rational", s))?;
        let d = parse_int(d.trim()).ok_or_else(|| parse_err("rational", s))?;
        if d.is_zero() {
            return Err(parse_err("rational (zero denominator)", s));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if (int_digits.is_empty() && frac.is_empty())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(parse_err("rational", s));
        }
        let digits = format!("{int_digits}{frac}");
        let mag: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| parse_err("rational", s))?
        };
        let scale = num::pow(BigInt::from(10u32), frac.len());
        let q = BigRational::new(mag, scale);
        return Ok(if negative { -q } else { q });
    }
    parse_int(t)
        .map(BigRational::from_integer)
        .ok_or_else(|| parse_err("rational", s))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a rational that must fit a 64-bit numerator and denominator.
pub fn parse_small_rational(s: &str) -> Result<Q> {
    let q = parse_rational(s)?;
    let n: i64 = q.numer().try_into().map_err(|_| parse_err("coordinate", s))?;
    let d: i64 = q.denom().try_into().map_err(|_| parse_err("coordinate", s))?;
    // Keep headroom so weight arithmetic cannot overflow on sane inputs.
    if n.unsigned_abs() > 1 << 40 || d > 1 << 20 {
        return Err(parse_err("coordinate (too large)", s));
    }
    Ok(Q::new(n, d))
}

fn strip_brackets(s: &str) -> &str {
    let t = s.trim();
    for (open, close) in [('(', ')'), ('[', ']')] {
        if let Some(inner) = t.strip_prefix(open).and_then(|r| r.strip_suffix(close)) {
            return inner.trim();
        }
    }
    t
}

/// Parses a weight written as comma-separated `ε`-coordinates, optionally
/// wrapped in parentheses or brackets.
pub fn parse_weight(s: &str) -> Result<Weight> {
    let inner = strip_brackets(s);
    if inner.is_empty() {
        return Err(parse_err("weight", s));
    }
    let coords = inner
        .split(',')
        .map(parse_small_rational)
        .collect::<Result<Vec<Q>>>()?;
    if coords.len() > 64 {
        return Err(parse_err("weight (too many coordinates)", s));
    }
    Ok(Weight::new(coords))
}

/// Parses a comma-separated list of rationals (a θ vector).
pub fn parse_theta(s: &str) -> Result<Vec<BigRational>> {
    let inner = strip_brackets(s);
    if inner.is_empty() {
        return Err(parse_err("theta", s));
    }
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() > 64 {
        return Err(parse_err("theta (too many entries)", s));
    }
    parts.into_iter().map(parse_rational).collect()
}

/// Renders a rational as `num/den`, or `num` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses a `key=value` configuration file. Blank lines and lines starting
/// with `#` are skipped; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        let key = k.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::Parse(format!("line {}: invalid key", lineno + 1)));
        }
        let key = key.replace('_', "-");
        let value = v.trim().to_string();
        out.retain(|(k, _)| *k != key);
        out.push((key, value));
    }
    Ok(out)
}
