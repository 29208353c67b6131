use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SewError};

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(SewError::InvalidExponent(format!("{p} is below 1")));
        }
        if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// Even integer exponents make `|f|^p` a polynomial, so quadrature stays exact.
    pub fn is_even_integer(self) -> bool {
        match self {
            Exponent::Finite(p) => p.fract() == 0.0 && (p as u64) % 2 == 0,
            Exponent::Infinity => false,
        }
    }

    pub fn is_two(self) -> bool {
        self == Exponent::Finite(2.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = SewError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| SewError::InvalidExponent(format!("cannot parse '{s}'")))?;
        Exponent::new(p)
    }
}

impl From<Exponent> for String {
    fn from(p: Exponent) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = SewError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::Finite(2.0).conjugate(), Exponent::Finite(2.0));
        assert_eq!(Exponent::Finite(1.0).conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::Finite(1.0));
        assert_eq!(Exponent::Finite(4.0).conjugate(), Exponent::Finite(4.0 / 3.0));
    }

    #[test]
    fn parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("4".parse::<Exponent>().unwrap(), Exponent::Finite(4.0));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("x".parse::<Exponent>().is_err());
    }

    #[test]
    fn even_integers() {
        assert!(Exponent::Finite(4.0).is_even_integer());
        assert!(!Exponent::Finite(3.0).is_even_integer());
        assert!(!Exponent::Finite(2.5).is_even_integer());
        assert!(!Exponent::Infinity.is_even_integer());
    }

    #[test]
    fn serde_uses_labels() {
        let v = serde_json::to_string(&[Exponent::Finite(2.5), Exponent::Infinity]).unwrap();
        assert_eq!(v, r#"["2.5","inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Exponent::Finite(2.5), Exponent::Infinity]);
    }
}
