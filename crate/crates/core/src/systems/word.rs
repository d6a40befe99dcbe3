use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{nat, Nat};

/// A finite sequence of naturals, an element of ωⁿ with domain `{0,…,n−1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<Nat>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn zeros(len: u64) -> Self {
        Word(vec![Nat::zero(); len as usize])
    }

    pub fn constant(value: &Nat, len: u64) -> Self {
        Word(vec![value.clone(); len as usize])
    }

    pub fn from_u64s(v: &[u64]) -> Self {
        Word(v.iter().map(|&x| nat(x)).collect())
    }

    pub fn len(&self) -> u64 {
        self.0.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: u64) -> Option<&Nat> {
        self.0.get(i as usize)
    }

    pub fn entries(&self) -> &[Nat] {
        &self.0
    }

    pub fn push(&mut self, v: Nat) {
        self.0.push(v);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self ⌢ value ⌢ 0…0` with total length `len`.
    pub fn extend_padded(&self, value: Nat, len: u64) -> Word {
        let mut v = self.0.clone();
        v.push(value);
        v.resize(len as usize, Nat::zero());
        Word(v)
    }

    /// Restriction to `[a, b)`, re-indexed from 0.
    pub fn restrict(&self, a: u64, b: u64) -> Result<Word> {
        if a > b || b > self.len() {
            return Err(Error::OutOfRange { start: a, end: b, len: self.len() });
        }
        Ok(Word(self.0[a as usize..b as usize].to_vec()))
    }

    pub fn prefix(&self, n: u64) -> Result<Word> {
        self.restrict(0, n)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.len() <= other.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// One of the two extends the other.
    pub fn compatible(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn max_entry(&self) -> Option<&Nat> {
        self.0.iter().max()
    }
}

impl From<Vec<Nat>> for Word {
    fn from(v: Vec<Nat>) -> Self {
        Word(v)
    }
}

/// Run-length text form: `3,0*120,5`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i + 1;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if j - i > 1 {
                write!(f, "{}*{}", self.0[i], j - i)?;
            } else {
                write!(f, "{}", self.0[i])?;
            }
            i = j;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        let mut out = Vec::new();
        if s.is_empty() {
            return Ok(Word(out));
        }
        let bad = || Error::Parse(format!("bad word `{s}`"));
        for run in s.split(',') {
            let (v, count) = match run.split_once('*') {
                Some((v, c)) => (v, c.trim().parse::<usize>().map_err(|_| bad())?),
                None => (run, 1),
            };
            if count == 0 {
                return Err(bad());
            }
            let v: Nat = v.trim().parse().map_err(|_| bad())?;
            out.extend(std::iter::repeat_n(v, count));
        }
        Ok(Word(out))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn restrict_reindexes() {
        let w = Word::from_u64s(&[5, 6, 7]);
        assert_eq!(w.restrict(1, 3).unwrap(), Word::from_u64s(&[6, 7]));
        assert!(matches!(w.restrict(1, 4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rle_text() {
        let mut v = vec![3];
        v.extend(std::iter::repeat_n(0, 120));
        v.push(5);
        let w = Word::from_u64s(&v);
        assert_eq!(w.to_string(), "3,0*120,5");
        assert_eq!("3,0*120,5".parse::<Word>().unwrap(), w);
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
    }

    proptest! {
        #[test]
        fn text_round_trip(v in proptest::collection::vec(0u64..4, 0..40)) {
            let w = Word::from_u64s(&v);
            prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        }

        #[test]
        fn compatibility_is_symmetric(a in proptest::collection::vec(0u64..2, 0..6),
                                      b in proptest::collection::vec(0u64..2, 0..6)) {
            let (a, b) = (Word::from_u64s(&a), Word::from_u64s(&b));
            prop_assert_eq!(a.compatible(&b), b.compatible(&a));
        }
    }
}
