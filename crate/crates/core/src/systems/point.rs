use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::num::{nat, Nat};
use crate::systems::word::Word;

/// A finitely presented element of ω^ω.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Point {
    Constant {
        #[serde(with = "crate::num::nat_str")]
        value: Nat,
    },
    /// `head ⌢ period ⌢ period ⌢ …`; `period` must be nonempty.
    Periodic { head: Word, period: Word },
    /// `n ↦ slope·n + offset`
    Affine { slope: u64, offset: u64 },
    /// `prefix` on `[0, |prefix|)`, then `tail(n)` at the same absolute index `n`.
    Prefixed { prefix: Word, tail: Box<Point> },
}

impl Point {
    pub fn zero() -> Self {
        Point::Constant { value: Nat::zero() }
    }

    pub fn constant(v: u64) -> Self {
        Point::Constant { value: nat(v) }
    }

    pub fn periodic(head: &[u64], period: &[u64]) -> Self {
        assert!(!period.is_empty(), "empty period");
        Point::Periodic { head: Word::from_u64s(head), period: Word::from_u64s(period) }
    }

    /// `prefix ⌢ 0̄`
    pub fn eventually_zero(prefix: Word) -> Self {
        Point::Prefixed { prefix, tail: Box::new(Point::zero()) }
    }

    pub fn identity() -> Self {
        Point::Affine { slope: 1, offset: 0 }
    }

    pub fn at(&self, n: u64) -> Nat {
        match self {
            Point::Constant { value } => value.clone(),
            Point::Periodic { head, period } => match head.get(n) {
                Some(v) => v.clone(),
                None => period.0[((n - head.len()) % period.len()) as usize].clone(),
            },
            Point::Affine { slope, offset } => nat(*slope) * nat(n) + nat(*offset),
            Point::Prefixed { prefix, tail } => match prefix.get(n) {
                Some(v) => v.clone(),
                None => tail.at(n),
            },
        }
    }

    /// `x↾[a, b)`, re-indexed from 0.
    pub fn restrict(&self, a: u64, b: u64) -> Word {
        Word((a..b).map(|n| self.at(n)).collect())
    }

    /// `x↾n`
    pub fn prefix(&self, n: u64) -> Word {
        self.restrict(0, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_evaluation() {
        let x = Point::periodic(&[], &[1, 2]);
        assert_eq!(x.restrict(1, 4), Word::from_u64s(&[2, 1, 2]));
        let y = Point::periodic(&[7], &[0, 1]);
        assert_eq!(y.prefix(5), Word::from_u64s(&[7, 0, 1, 0, 1]));
    }

    #[test]
    fn prefixed_uses_absolute_index() {
        let x = Point::Prefixed { prefix: Word::from_u64s(&[9, 9]), tail: Box::new(Point::identity()) };
        assert_eq!(x.prefix(5), Word::from_u64s(&[9, 9, 2, 3, 4]));
    }

    #[test]
    fn zero_restriction() {
        assert_eq!(Point::zero().restrict(3, 6), Word::zeros(3));
    }
}
