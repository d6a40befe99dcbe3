//! A bijective enumeration `n ↦ q_n` of the eventually-zero points of ω^ω.
//!
//! `q_0 = 0̄`. For `n > 0` read the binary digits of `n` from the least
//! significant end; they split uniquely as `1^{s_0} 0 1^{s_1} 0 … 0 1^{s_m}`
//! with `s_m ≥ 1`, and `q_n = (s_0, …, s_m) ⌢ 0̄`.

use num_traits::{One, ToPrimitive, Zero};

use crate::num::Nat;
use crate::systems::word::Word;

/// The canonical word (no trailing zeros) of `q_n`.
pub fn unrank(n: &Nat) -> Word {
    let mut out = Vec::new();
    if n.is_zero() {
        return Word(out);
    }
    let bits = n.bits();
    let mut run = 0u64;
    for i in 0..bits {
        if n.bit(i) {
            run += 1;
        } else {
            out.push(Nat::from(run));
            run = 0;
        }
    }
    out.push(Nat::from(run));
    Word(out)
}

/// The index of `w ⌢ 0̄`; trailing zeros of `w` are ignored.
pub fn rank(w: &Word) -> Nat {
    let entries = w.entries();
    let last = match entries.iter().rposition(|v| !v.is_zero()) {
        None => return Nat::zero(),
        Some(i) => i,
    };
    let mut n = Nat::zero();
    let mut pos = 0u64;
    for (i, v) in entries[..=last].iter().enumerate() {
        let s = v.to_u64().expect("entry too large to rank");
        for _ in 0..s {
            n.set_bit(pos, true);
            pos += 1;
        }
        if i < last {
            pos += 1;
        }
    }
    n
}

/// `q_n↾len`
pub fn rational_prefix(n: &Nat, len: u64) -> Word {
    let w = unrank(n);
    let mut v = w.0;
    v.resize(len as usize, Nat::zero());
    Word(v)
}

/// Whether `q_n↾len` and `sigma` are compatible, without materializing `q_n↾len`.
pub fn prefix_compatible(n: &Nat, len: &Nat, sigma: &Word) -> bool {
    let q = unrank(n);
    let upto = match len.to_u64() {
        Some(l) => l.min(sigma.len()),
        None => sigma.len(),
    };
    (0..upto).all(|i| match q.get(i) {
        Some(v) => sigma.0[i as usize] == *v,
        None => sigma.0[i as usize].is_zero(),
    })
}

/// Every eventually-zero point with support below `support` and values below
/// `value_bound` has index below the returned bound.
pub fn index_bound(support: u64, value_bound: u64) -> Nat {
    Nat::one() << (support * value_bound.max(1) + support) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::nat;
    use std::collections::HashSet;

    #[test]
    fn small_indices() {
        assert_eq!(unrank(&nat(0)), Word::empty());
        assert_eq!(unrank(&nat(1)), Word::from_u64s(&[1]));
        assert_eq!(unrank(&nat(2)), Word::from_u64s(&[0, 1]));
        assert_eq!(unrank(&nat(3)), Word::from_u64s(&[2]));
        assert_eq!(unrank(&nat(127)), Word::from_u64s(&[7]));
    }

    #[test]
    fn bijective_on_prefix() {
        let mut seen = HashSet::new();
        for n in 0..5000u64 {
            let w = unrank(&nat(n));
            assert_eq!(rank(&w), nat(n));
            assert!(w.0.last().is_none_or(|v| !v.is_zero()));
            assert!(seen.insert(w));
        }
    }

    #[test]
    fn bounded_words_fall_below_index_bound() {
        let bound = index_bound(3, 4);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    assert!(rank(&Word::from_u64s(&[a, b, c])) < bound);
                }
            }
        }
    }
}
