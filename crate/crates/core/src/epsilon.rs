// SPDX-License-Identifier: Apache-2.0

//! Exact rational noise parameter.
//!
//! Every integrality condition in the adversary constructions (`εMT`,
//! `εM/5`, `4/ε`, `Mε/4`) is decided on the rational value, so `ε` is kept
//! as a reduced fraction and only converted to `f64` for sampling.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A noise rate `ε ∈ [0, 1/2]`, stored as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Epsilon(Ratio<u64>);

impl Epsilon {
    pub const ZERO: Epsilon = Epsilon(Ratio::new_raw(0, 1));
    pub const HALF: Epsilon = Epsilon(Ratio::new_raw(1, 2));

    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParameter(
                "epsilon denominator is zero".into(),
            ));
        }
        Self::from_ratio(Ratio::new(numer, denom))
    }

    pub fn from_ratio(r: Ratio<u64>) -> Result<Self> {
        if r > Ratio::new(1, 2) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1/2], got {r}"
            )));
        }
        Ok(Epsilon(r))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn numer(self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(self) -> u64 {
        *self.0.denom()
    }

    pub fn as_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn is_zero(self) -> bool {
        self.numer() == 0
    }

    /// `1 − ε` as an exact fraction.
    pub fn complement(self) -> Ratio<u64> {
        Ratio::from_integer(1) - self.0
    }

    /// `ε · n`, returned only if it is an integer.
    pub fn times_integral(self, n: u64) -> Option<u64> {
        let v = self.0 * Ratio::from_integer(n);
        v.is_integer().then(|| v.to_integer())
    }

    /// `⌊ε · n⌋`.
    pub fn times_floor(self, n: u64) -> u64 {
        ((self.numer() as u128 * n as u128) / self.denom() as u128) as u64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts `"p/q"`, a plain integer, or a finite decimal such as `"0.2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse epsilon from {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Epsilon::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let denom = 10u64.pow(frac.len() as u32);
            let frac: u64 = if frac.is_empty() {
                0
            } else {
                frac.parse().map_err(|_| bad())?
            };
            let numer = int
                .checked_mul(denom)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(bad)?;
            return Epsilon::new(numer, denom);
        }
        let n: u64 = s.parse().map_err(|_| bad())?;
        Epsilon::new(n, 1)
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EpsVisitor;

        impl Visitor<'_> for EpsVisitor {
            type Value = Epsilon;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a fraction string like \"1/4\" or a number in [0, 1/2]")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Epsilon, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Epsilon, E> {
                Epsilon::new(v, 1).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Epsilon, E> {
                if v < 0 {
                    return Err(E::custom("epsilon must be non-negative"));
                }
                self.visit_u64(v as u64)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Epsilon, E> {
                // Shortest round-trip decimal, then exact parse.
                format!("{v}").parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(EpsVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal() {
        assert_eq!(
            "1/4".parse::<Epsilon>().unwrap(),
            Epsilon::new(1, 4).unwrap()
        );
        assert_eq!(
            "0.2".parse::<Epsilon>().unwrap(),
            Epsilon::new(1, 5).unwrap()
        );
        assert_eq!("0".parse::<Epsilon>().unwrap(), Epsilon::ZERO);
        assert_eq!(".5".parse::<Epsilon>().unwrap(), Epsilon::HALF);
        assert!("0.6".parse::<Epsilon>().is_err());
        assert!("1/0".parse::<Epsilon>().is_err());
        assert!("abc".parse::<Epsilon>().is_err());
    }

    #[test]
    fn serde_accepts_numbers_and_strings() {
        let e: Epsilon = serde_json::from_str("0.0078125").unwrap();
        assert_eq!(e, Epsilon::new(1, 128).unwrap());
        let e: Epsilon = serde_json::from_str("\"1/128\"").unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"1/128\"");
    }

    #[test]
    fn integrality_helpers() {
        let e = Epsilon::new(1, 5).unwrap();
        assert_eq!(e.times_integral(100), Some(20));
        assert_eq!(e.times_integral(7), None);
        assert_eq!(e.times_floor(7), 1);
    }
}
