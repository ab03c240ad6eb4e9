//! Exact rationals at serialization boundaries.
//!
//! Certified inequalities are compared in `BigRational` arithmetic and
//! serialized as `{"num": "...", "den": "..."}` with decimal-string digits,
//! so certificates survive JSON round-trips without any floating-point loss.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::str::FromStr;

/// A `BigRational` wrapper with the `{"num","den"}` wire format.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        Rat(BigRational::new(num, den))
    }

    pub fn from_u64(num: u64, den: u64) -> Self {
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Double-precision shadow of the exact value.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Quotient of shadows for magnitudes outside the f64 range.
            let n = self.0.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.0.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(r)
    }
}

impl std::fmt::Display for Rat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[derive(Serialize, Deserialize)]
struct RatWire {
    num: String,
    den: String,
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RatWire {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = RatWire::deserialize(d)?;
        let num = BigInt::from_str(&w.num).map_err(serde::de::Error::custom)?;
        let den = BigInt::from_str(&w.den).map_err(serde::de::Error::custom)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rat(BigRational::new(num, den)))
    }
}

/// `num/den` as an exact rational, from unsigned integers.
pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `v` as an exact rational.
pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_round_trip() {
        let r = Rat::from_u64(123456789012345678, 987654321098765432);
        let s = serde_json::to_string(&r).unwrap();
        let back: Rat = serde_json::from_str(&s).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn zero_denominator_rejected() {
        let s = r#"{"num":"1","den":"0"}"#;
        assert!(serde_json::from_str::<Rat>(s).is_err());
    }

    #[test]
    fn negative_values() {
        let r = Rat(BigRational::new(BigInt::from(-3), BigInt::from(4)));
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("-3"));
        let back: Rat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
