//! Open intervals with rational (or infinite) endpoints.
//!
//! Finite endpoints are stored as `f64`; every finite double is a dyadic
//! rational, and the parser accepts `p/q` literals which are converted once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The open interval `(lo, hi)`; `lo` may be `-inf`, `hi` may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(JsonEndpoint, JsonEndpoint)", into = "(JsonEndpoint, JsonEndpoint)")]
pub struct RationalInterval {
    lo: f64,
    hi: f64,
}

impl RationalInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidInterval("NaN endpoint".into()));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval(format!("({lo}, {hi}) is empty")));
        }
        if lo >= hi {
            return Err(Error::InvalidInterval(format!("need lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn whole_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn has_finite_lo(&self) -> bool {
        self.lo.is_finite()
    }

    pub fn has_finite_hi(&self) -> bool {
        self.hi.is_finite()
    }

    /// Strict membership `lo < x < hi`.
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// `self ⊆ other` as open intervals.
    pub fn is_subinterval_of(&self, other: &RationalInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// JSON has no infinities: finite endpoints are numbers, infinite ones the
/// strings `"-inf"` / `"inf"`. Rational strings like `"1/3"` are accepted.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonEndpoint {
    Num(f64),
    Str(String),
}

impl JsonEndpoint {
    fn value(&self) -> Result<f64> {
        match self {
            JsonEndpoint::Num(x) => Ok(*x),
            JsonEndpoint::Str(s) => parse_rational(s),
        }
    }
}

impl From<f64> for JsonEndpoint {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            JsonEndpoint::Num(x)
        } else {
            JsonEndpoint::Str(fmt_endpoint(x))
        }
    }
}

impl TryFrom<(JsonEndpoint, JsonEndpoint)> for RationalInterval {
    type Error = Error;

    fn try_from((lo, hi): (JsonEndpoint, JsonEndpoint)) -> Result<Self> {
        Self::new(lo.value()?, hi.value()?)
    }
}

impl From<RationalInterval> for (JsonEndpoint, JsonEndpoint) {
    fn from(iv: RationalInterval) -> Self {
        (iv.lo.into(), iv.hi.into())
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_endpoint(self.lo), fmt_endpoint(self.hi))
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Parses a rational literal: `inf`, `-inf`, a decimal, or `p/q`.
pub fn parse_rational(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let bad = || Error::InvalidInterval(format!("cannot parse endpoint `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(p as f64 / q as f64);
    }
    let x: f64 = s.parse().map_err(|_| bad())?;
    if x.is_nan() {
        return Err(bad());
    }
    Ok(x)
}

impl FromStr for RationalInterval {
    type Err = Error;

    /// Accepts `r,s` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| Error::InvalidInterval(format!("expected `r,s`, got `{s}`")))?;
        Self::new(parse_rational(lo)?, parse_rational(hi)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_infinities() {
        let iv: RationalInterval = "-inf,1/2".parse().unwrap();
        assert_eq!(iv.lo(), f64::NEG_INFINITY);
        assert_eq!(iv.hi(), 0.5);
        let iv: RationalInterval = "(0.25, inf)".parse().unwrap();
        assert!(iv.contains(1e9));
        assert!(!iv.contains(0.25));
    }

    #[test]
    fn rejects_empty_intervals() {
        assert!(RationalInterval::new(1.0, 1.0).is_err());
        assert!(RationalInterval::new(f64::INFINITY, f64::INFINITY).is_err());
        assert!("3,2".parse::<RationalInterval>().is_err());
        assert!("1/0,2".parse::<RationalInterval>().is_err());
    }

    #[test]
    fn json_uses_strings_for_infinite_endpoints() {
        let iv = RationalInterval::new(f64::NEG_INFINITY, 1.5).unwrap();
        let text = serde_json::to_string(&iv).unwrap();
        assert_eq!(text, r#"["-inf",1.5]"#);
        let back: RationalInterval = serde_json::from_str(&text).unwrap();
        assert_eq!(back, iv);
        let third: RationalInterval = serde_json::from_str(r#"["1/3", "inf"]"#).unwrap();
        assert_eq!(third.lo(), 1.0 / 3.0);
    }
}
