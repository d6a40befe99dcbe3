//! The envelope systems behind `cof(f𝓝(Fin)) ≤ 𝔡` and `add(f𝓝(Fin)) ≥ 𝔟`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::num::{nat, Nat};
use crate::param::Rule;
use crate::systems::{Levels, PrefixSystem};

/// `S^f_n = {σ ∈ ωⁿ : σ(i) ≤ f(i)}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub f: Rule,
    pub system: PrefixSystem,
}

pub fn dominating_envelope(f: &Rule) -> Envelope {
    Envelope { f: f.clone(), system: PrefixSystem::fin(Levels::Box { bound: f.clone() }) }
}

impl Envelope {
    /// `Π_{i<n} (f(i)+1)`
    pub fn size(&self, n: u64) -> Nat {
        (0..n).fold(Nat::one(), |acc, i| acc * (self.f.eval(i) + 1u32))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeFailure {
    pub level: u64,
    pub coordinate: u64,
    #[serde(with = "crate::num::nat_str")]
    pub value: Nat,
    #[serde(with = "crate::num::nat_str")]
    pub bound: Nat,
}

/// First coordinate `i < n` where some word of `S_n` exceeds `bound(i)`.
fn first_excess(levels: &Levels, n: u64, bound: impl Fn(u64) -> Nat, ceiling: u64) -> Result<Option<EnvelopeFailure>> {
    for i in 0..n {
        if let Some(v) = levels.max_at(n, i, ceiling)? {
            let b = bound(i);
            if v > b {
                return Ok(Some(EnvelopeFailure { level: n, coordinate: i, value: v, bound: b }));
            }
        }
    }
    Ok(None)
}

/// The least `N ≤ depth` with `T_n ⊆ S^f_n` for `N ≤ n ≤ depth`, or the
/// violation at level `depth` when none exists.
pub fn envelope_contains(
    opponent: &PrefixSystem,
    f: &Rule,
    depth: u64,
    ceiling: u64,
) -> Result<std::result::Result<u64, EnvelopeFailure>> {
    let mut threshold = 0;
    for n in 0..=depth {
        if let Some(fail) = first_excess(&opponent.levels, n, |i| f.eval(i), ceiling)? {
            if n == depth {
                return Ok(Err(fail));
            }
            threshold = n + 1;
        }
    }
    Ok(Ok(threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingMerge {
    /// `f_α(n) = max{x(k) : x ∈ S^α_{n+1}, k ≤ n}` for `n < depth`, empty maxima as 0
    pub f_alpha: Vec<Vec<Nat>>,
    /// `f(n) = max_α f_α(n) + 1` below `depth`, constant afterwards
    pub f: Rule,
    /// `T_n = {σ ∈ ωⁿ : σ(i) < f(n)}`
    pub merged: PrefixSystem,
    /// least `N` with `S^α_n ⊆ T_n` on `[N, depth)`; `None` when level `depth − 1` fails
    pub thresholds: Vec<Option<u64>>,
    pub depth: u64,
}

pub fn bounding_merge(opponents: &[PrefixSystem], depth: u64, ceiling: u64) -> Result<BoundingMerge> {
    let depth = depth.max(1);
    let mut f_alpha = Vec::with_capacity(opponents.len());
    for s in opponents {
        let mut row = Vec::with_capacity(depth as usize);
        for n in 0..depth {
            let mut top = Nat::zero();
            for k in 0..=n {
                if let Some(v) = s.levels.max_at(n + 1, k, ceiling)? {
                    top = top.max(v);
                }
            }
            row.push(top);
        }
        f_alpha.push(row);
    }
    let values: Vec<Nat> = (0..depth as usize)
        .map(|n| f_alpha.iter().map(|row| row[n].clone()).max().unwrap_or_else(Nat::zero) + 1u32)
        .collect();
    let last = values.last().cloned().unwrap_or_else(|| nat(1));
    let f = Rule::table(values.clone(), Rule::Constant { value: last });
    let merged = PrefixSystem::fin(Levels::Uniform { bound: f.clone() });
    let mut thresholds = Vec::with_capacity(opponents.len());
    for s in opponents {
        let mut threshold = Some(0);
        for n in 0..depth {
            let strict = |_: u64| values[n as usize].clone() - 1u32;
            if first_excess(&s.levels, n, strict, ceiling)?.is_some() {
                threshold = (n + 1 < depth).then_some(n + 1);
            }
        }
        thresholds.push(threshold);
    }
    Ok(BoundingMerge { f_alpha, f, merged, thresholds, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_size_formula() {
        let e = dominating_envelope(&Rule::poly(&[0, 1]));
        assert_eq!(e.size(3), nat(6));
        assert_eq!(e.system.levels.size(3, 1000).unwrap(), nat(6));
    }

    #[test]
    fn envelope_thresholds() {
        let zeros = PrefixSystem::fin(Levels::Zeros { from: 0 });
        assert_eq!(envelope_contains(&zeros, &Rule::constant(0), 8, 1000).unwrap(), Ok(0));
        let f = Rule::table(vec![nat(9), nat(9), nat(5)], Rule::constant(9));
        let opp =
            PrefixSystem::fin(Levels::Box { bound: Rule::table(vec![nat(0), nat(0), nat(7)], Rule::constant(0)) });
        let fail = envelope_contains(&opp, &f, 6, 1000).unwrap().unwrap_err();
        assert_eq!((fail.coordinate, fail.value.clone(), fail.bound.clone()), (2, nat(7), nat(5)));
    }

    #[test]
    fn merge_of_two_boxes() {
        let a = PrefixSystem::fin(Levels::Box { bound: Rule::constant(3) });
        let b = PrefixSystem::fin(Levels::Box { bound: Rule::constant(5) });
        let m = bounding_merge(&[a, b], 6, 1000).unwrap();
        assert!((0..6).all(|n| m.f.eval(n) >= nat(6)));
        assert_eq!(m.thresholds, vec![Some(0), Some(0)]);
        let empty = bounding_merge(&[], 4, 1000).unwrap();
        assert_eq!(empty.f.eval(2), nat(1));
    }
}
