use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::diagonal::DiagonalPlan;
use crate::error::{Error, Result};
use crate::num::{nat, to_u64, Nat};
use crate::param::{ParamFunction, Rule, SparseLevels, WeightLedger};
use crate::systems::point::Point;
use crate::systems::rationals::rational_prefix;
use crate::systems::word::Word;

/// The weight side of a covering system: a parameter `h` or the Fin marker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weight {
    Param { h: ParamFunction },
    Fin,
}

impl Weight {
    pub fn param(&self) -> Option<&ParamFunction> {
        match self {
            Weight::Param { h } => Some(h),
            Weight::Fin => None,
        }
    }
}

/// Levels `S_{L_n} = {q_n↾L_n}` with `L_n = h(k_n)` along sparse levels `k_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalLevels {
    pub h: ParamFunction,
    pub sparse: SparseLevels,
}

impl RationalLevels {
    /// `L_n` when it is at most `cap`; `None` if larger or not computable.
    /// Uses `L_n ≥ 2ⁿ·L_0`, which the doubling condition guarantees.
    pub fn length_upto(&self, n: u64, cap: &Nat) -> Option<Nat> {
        if n > cap.bits() {
            return None;
        }
        let k = self.sparse.index(n)?;
        let len = self.h.eval(k);
        (len <= *cap).then_some(len)
    }

    /// The `n` with `L_n = len`, if any.
    pub fn index_of_length(&self, len: u64) -> Option<u64> {
        let cap = nat(len);
        let mut n = 0;
        while let Some(l) = self.length_upto(n, &cap) {
            if l == cap {
                return Some(n);
            }
            n += 1;
        }
        None
    }
}

/// Level rules `n ↦ S_n ⊆ ωⁿ`, generated on demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Levels {
    /// finitely many nonempty levels
    Explicit {
        #[serde(with = "crate::num::u64_keyed")]
        levels: BTreeMap<u64, Vec<Word>>,
    },
    /// `S_n = {0ⁿ}` for `n ≥ from`
    Zeros {
        from: u64,
    },
    /// `S_n = {σ ∈ ωⁿ : σ(i) ≤ bound(i) for i < n}`
    Box {
        bound: Rule,
    },
    /// `S_n = {σ ∈ ωⁿ : σ(i) < bound(n) for i < n}`
    Uniform {
        bound: Rule,
    },
    /// `S_n = ⋃ {S^k_n : activation_k ≤ n}`
    Union {
        parts: Vec<(u64, Levels)>,
    },
    Rationals(RationalLevels),
    Plan(Box<DiagonalPlan>),
}

impl Levels {
    pub fn empty() -> Self {
        Levels::Explicit { levels: BTreeMap::new() }
    }

    pub fn explicit(levels: impl IntoIterator<Item = (u64, Vec<Word>)>) -> Self {
        let mut map: BTreeMap<u64, Vec<Word>> = BTreeMap::new();
        for (n, ws) in levels {
            let entry = map.entry(n).or_default();
            for w in ws {
                assert_eq!(w.len(), n, "word of the wrong length at level {n}");
                if !entry.contains(&w) {
                    entry.push(w);
                }
            }
            entry.sort();
        }
        map.retain(|_, v| !v.is_empty());
        Levels::Explicit { levels: map }
    }

    pub fn contains(&self, n: u64, w: &Word) -> bool {
        if w.len() != n {
            return false;
        }
        match self {
            Levels::Explicit { levels } => levels.get(&n).is_some_and(|ws| ws.binary_search(w).is_ok()),
            Levels::Zeros { from } => n >= *from && w.entries().iter().all(Zero::is_zero),
            Levels::Box { bound } => w.entries().iter().enumerate().all(|(i, v)| *v <= bound.eval(i as u64)),
            Levels::Uniform { bound } => {
                let b = bound.eval(n);
                w.entries().iter().all(|v| *v < b)
            }
            Levels::Union { parts } => parts.iter().any(|(act, l)| *act <= n && l.contains(n, w)),
            Levels::Rationals(r) => match r.index_of_length(n) {
                Some(i) => rational_prefix(&nat(i), n) == *w,
                None => false,
            },
            Levels::Plan(p) => p.contains(n, w),
        }
    }

    /// `x↾n ∈ S_n`
    pub fn hit(&self, n: u64, x: &Point) -> bool {
        match self {
            Levels::Box { bound } => (0..n).all(|i| x.at(i) <= bound.eval(i)),
            Levels::Uniform { bound } => {
                let b = bound.eval(n);
                (0..n).all(|i| x.at(i) < b)
            }
            _ => self.contains(n, &x.prefix(n)),
        }
    }

    /// `|S_n|`; unions are counted exactly by enumeration under `ceiling`.
    pub fn size(&self, n: u64, ceiling: u64) -> Result<Nat> {
        Ok(match self {
            Levels::Explicit { levels } => nat(levels.get(&n).map_or(0, |ws| ws.len() as u64)),
            Levels::Zeros { from } => nat((n >= *from) as u64),
            Levels::Box { bound } => (0..n).fold(Nat::one(), |acc, i| acc * (bound.eval(i) + 1u32)),
            Levels::Uniform { bound } => num_traits::pow(bound.eval(n), n as usize),
            Levels::Union { .. } => nat(self.words(n, ceiling)?.len() as u64),
            Levels::Rationals(r) => nat(r.index_of_length(n).is_some() as u64),
            Levels::Plan(p) => p.level_size(n),
        })
    }

    /// All of `S_n` in increasing order.
    pub fn words(&self, n: u64, ceiling: u64) -> Result<Vec<Word>> {
        let overflow = || Error::LedgerOverflowCeiling { what: format!("level {n}"), ceiling };
        match self {
            Levels::Explicit { levels } => Ok(levels.get(&n).cloned().unwrap_or_default()),
            Levels::Zeros { from } => Ok(if n >= *from { vec![Word::zeros(n)] } else { vec![] }),
            Levels::Box { .. } | Levels::Uniform { .. } => {
                let size = self.size(n, ceiling)?;
                if size > nat(ceiling) {
                    return Err(overflow());
                }
                let bounds: Vec<u64> = (0..n)
                    .map(|i| match self {
                        Levels::Box { bound } => to_u64(&bound.eval(i)).map(|b| b + 1),
                        Levels::Uniform { bound } => to_u64(&bound.eval(n)),
                        _ => unreachable!(),
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(overflow)?;
                Ok(product_words(&bounds))
            }
            Levels::Union { parts } => {
                let mut all = BTreeSet::new();
                for (act, l) in parts {
                    if *act <= n {
                        all.extend(l.words(n, ceiling)?);
                        if all.len() as u64 > ceiling {
                            return Err(overflow());
                        }
                    }
                }
                Ok(all.into_iter().collect())
            }
            Levels::Rationals(r) => Ok(match r.index_of_length(n) {
                Some(i) => vec![rational_prefix(&nat(i), n)],
                None => vec![],
            }),
            Levels::Plan(p) => p.words(n, ceiling),
        }
    }

    /// `{τ(|prefix|) : τ ∈ S_n, prefix ⊆ τ}` for `|prefix| < n`.
    pub fn next_values(&self, n: u64, prefix: &Word, ceiling: u64) -> Result<BTreeSet<Nat>> {
        let k = prefix.len();
        if k >= n {
            return Ok(BTreeSet::new());
        }
        let overflow = || Error::LedgerOverflowCeiling { what: format!("values at level {n}"), ceiling };
        match self {
            Levels::Box { bound } => {
                if !prefix.entries().iter().enumerate().all(|(i, v)| *v <= bound.eval(i as u64)) {
                    return Ok(BTreeSet::new());
                }
                let top = to_u64(&bound.eval(k)).filter(|&b| b < ceiling).ok_or_else(overflow)?;
                Ok((0..=top).map(nat).collect())
            }
            Levels::Uniform { bound } => {
                let b = bound.eval(n);
                if !prefix.entries().iter().all(|v| *v < b) {
                    return Ok(BTreeSet::new());
                }
                let top = to_u64(&b).filter(|&b| b <= ceiling).ok_or_else(overflow)?;
                Ok((0..top).map(nat).collect())
            }
            Levels::Zeros { from } => Ok(if n >= *from && prefix.entries().iter().all(Zero::is_zero) {
                BTreeSet::from([Nat::zero()])
            } else {
                BTreeSet::new()
            }),
            Levels::Union { parts } => {
                let mut out = BTreeSet::new();
                for (act, l) in parts {
                    if *act <= n {
                        out.extend(l.next_values(n, prefix, ceiling)?);
                    }
                }
                Ok(out)
            }
            Levels::Plan(p) => p.next_values(n, prefix, ceiling),
            _ => Ok(self
                .words(n, ceiling)?
                .into_iter()
                .filter(|w| prefix.is_prefix_of(w))
                .map(|w| w.0[k as usize].clone())
                .collect()),
        }
    }

    /// `max{σ(coord) : σ ∈ S_n}`, `None` for an empty level.
    pub fn max_at(&self, n: u64, coord: u64, ceiling: u64) -> Result<Option<Nat>> {
        if coord >= n {
            return Ok(None);
        }
        match self {
            Levels::Box { bound } => Ok(Some(bound.eval(coord))),
            Levels::Uniform { bound } => {
                let b = bound.eval(n);
                Ok((!b.is_zero()).then(|| b - 1u32))
            }
            Levels::Zeros { from } => Ok((n >= *from).then(Nat::zero)),
            Levels::Union { parts } => {
                let mut best: Option<Nat> = None;
                for (act, l) in parts {
                    if *act <= n {
                        if let Some(v) = l.max_at(n, coord, ceiling)? {
                            best = Some(best.map_or(v.clone(), |b| b.max(v)));
                        }
                    }
                }
                Ok(best)
            }
            _ => Ok(self.words(n, ceiling)?.into_iter().map(|w| w.0[coord as usize].clone()).max()),
        }
    }

    /// Largest level index carrying data, for finite presentations.
    pub fn last_explicit_level(&self) -> Option<u64> {
        match self {
            Levels::Explicit { levels } => levels.keys().next_back().copied(),
            _ => None,
        }
    }
}

/// All words `σ` with `σ(i) < bounds[i]`, lexicographically.
pub fn product_words(bounds: &[u64]) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for &b in bounds {
        let mut next = Vec::with_capacity(out.len() * b as usize);
        for w in &out {
            for v in 0..b {
                let mut w2 = w.clone();
                w2.push(nat(v));
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

/// A level system `(S_n)` with its weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixSystem {
    pub weight: Weight,
    pub levels: Levels,
}

impl PrefixSystem {
    pub fn new(weight: Weight, levels: Levels) -> Self {
        PrefixSystem { weight, levels }
    }

    pub fn fin(levels: Levels) -> Self {
        PrefixSystem { weight: Weight::Fin, levels }
    }

    pub fn with_h(h: ParamFunction, levels: Levels) -> Self {
        PrefixSystem { weight: Weight::Param { h }, levels }
    }

    pub fn hit(&self, n: u64, x: &Point) -> bool {
        self.levels.hit(n, x)
    }

    pub fn sizes(&self, n_max: u64, ceiling: u64) -> Result<Vec<Nat>> {
        (0..=n_max).map(|n| self.levels.size(n, ceiling)).collect()
    }

    /// Ledger `|S_n|/h(n)` for `1 ≤ n ≤ n_max`.
    pub fn ledger(&self, n_max: u64, ceiling: u64) -> Result<WeightLedger> {
        let h =
            self.weight.param().ok_or_else(|| Error::PreconditionFailed("Fin system has no weight ledger".into()))?;
        crate::param::partial_weight(&self.sizes(n_max, ceiling)?, h.rule(), n_max)
    }

    /// Per-level finiteness report for Fin systems: the sizes as machine integers.
    pub fn finite_sizes(&self, n_max: u64, ceiling: u64) -> Result<Vec<u64>> {
        self.sizes(n_max, ceiling)?
            .iter()
            .map(|s| s.to_u64().ok_or_else(|| Error::LedgerOverflowCeiling { what: "level size".into(), ceiling }))
            .collect()
    }
}
