//! Exact natural and rational numbers plus their text encodings.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Nat = BigUint;
pub type Ratio = BigRational;

pub fn nat(v: u64) -> Nat {
    Nat::from(v)
}

/// `num / den` as an exact rational. `den` must be nonzero.
pub fn ratio(num: &Nat, den: &Nat) -> Ratio {
    Ratio::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn ratio_u(num: u64, den: u64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_nat(v: &Nat) -> Ratio {
    Ratio::from_integer(BigInt::from(v.clone()))
}

/// `base^-exp` exactly.
pub fn inv_pow2(exp: u64) -> Ratio {
    Ratio::new(BigInt::one(), BigInt::one() << exp as usize)
}

pub fn to_u64(v: &Nat) -> Option<u64> {
    let digits = v.to_u64_digits();
    match digits.len() {
        0 => Some(0),
        1 => Some(digits[0]),
        _ => None,
    }
}

pub fn ratio_to_string(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `a`, `a/b` into an exact rational.
pub fn parse_ratio(s: &str) -> Option<Ratio> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                None
            } else {
                Some(Ratio::new(a, b))
            }
        }
        None => s.parse::<BigInt>().ok().map(Ratio::from_integer),
    }
}

/// Serde adapter: naturals as decimal strings.
pub mod nat_str {
    use super::Nat;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Nat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Nat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serde adapter: optional naturals as decimal strings or null.
pub mod opt_nat {
    use super::Nat;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Nat>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|n| n.to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Nat>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| s.parse().map_err(D::Error::custom)).transpose()
    }
}

/// Serde adapter: rationals as `[numerator, denominator]` integer strings.
pub mod ratio_pair {
    use super::Ratio;
    use num_bigint::BigInt;
    use num_traits::Zero;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Ratio, s: S) -> Result<S::Ok, S::Error> {
        [v.numer().to_string(), v.denom().to_string()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        let [n, m] = <[String; 2]>::deserialize(d)?;
        let n: BigInt = n.parse().map_err(D::Error::custom)?;
        let m: BigInt = m.parse().map_err(D::Error::custom)?;
        if m.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        let r = Ratio::new(n.clone(), m.clone());
        // reject non-canonical pairs so that parse∘serialize is the identity
        if r.numer() != &n || r.denom() != &m {
            return Err(D::Error::custom("rational not in lowest terms"));
        }
        Ok(r)
    }
}

pub mod ratio_vec {
    use super::Ratio;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "super::ratio_pair")] Ratio);

    pub fn serialize<S: Serializer>(v: &[Ratio], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| W(r.clone())).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Ratio>, D::Error> {
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

pub mod nat_vec {
    use super::Nat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "super::nat_str")] Nat);

    pub fn serialize<S: Serializer>(v: &[Nat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| W(r.clone())).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Nat>, D::Error> {
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

/// `u64`-keyed maps with string keys on the wire; plain `u64` keys do not
/// survive the buffering inside internally tagged enums.
pub mod u64_keyed {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, V: Serialize>(m: &BTreeMap<u64, V>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D, V>(d: D) -> Result<BTreeMap<u64, V>, D::Error>
    where
        D: Deserializer<'de>,
        V: Deserialize<'de>,
    {
        BTreeMap::<String, V>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(|_| D::Error::custom(format!("bad key `{k}`"))))
            .collect()
    }
}

pub fn zero_ratio() -> Ratio {
    Ratio::zero()
}
