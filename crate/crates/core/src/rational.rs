//! Exact rationals. Every verdict in this crate is decided on these, never on
//! floating point.

use std::fmt;

use num_rational::Ratio;

/// Exact rational used for ratios and thresholds.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `p/q` or a bare integer `p`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: s.to_string(),
        reason,
    };
    let s_trim = s.trim();
    let (num, den) = match s_trim.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s_trim, "1"),
    };
    if num.contains('.') || den.contains('.') {
        return Err(err("decimal notation is not accepted, use p/q"));
    }
    let n: i64 = num.parse().map_err(|_| err("numerator is not an integer"))?;
    let d: i64 = den.parse().map_err(|_| err("denominator is not an integer"))?;
    if d == 0 {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Parses a strictly positive rational.
pub fn parse_positive_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let r = parse_rational(s)?;
    if r <= Rational::from_integer(0) {
        return Err(ParseRationalError {
            input: s.to_string(),
            reason: "must be positive",
        });
    }
    Ok(r)
}

/// Canonical `p/q` text, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Wrapper that displays as `p/q`.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Serde adapter writing rationals as `p/q` strings.
pub mod serde_pq {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/5").unwrap(), Rational::new(1, 5));
        assert_eq!(parse_rational("4/8").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert_eq!(format_rational(&Rational::new(2, 10)), "1/5");
        assert_eq!(format_rational(&Rational::from_integer(2)), "2/1");
    }

    #[test]
    fn rejects_decimals_and_zero_denominator() {
        assert!(parse_rational("0.2").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_positive_rational("-1/2").is_err());
        assert!(parse_positive_rational("0").is_err());
    }
}
