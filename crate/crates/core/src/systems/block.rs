use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{nat, to_u64, Nat};
use crate::param::WeightLedger;
use crate::systems::partition::{tri_start, IntervalPartition};
use crate::systems::point::Point;
use crate::systems::prefix::Weight;
use crate::systems::word::Word;

/// `∃^∞` (small-style) or `∀^∞` (E-style) block hitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantifier {
    Infinitely,
    AllButFinitely,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockFilter {
    All,
    Odd,
    Even,
    From { start: u64 },
}

impl BlockFilter {
    pub fn admits(&self, n: u64) -> bool {
        match self {
            BlockFilter::All => true,
            BlockFilter::Odd => !n.is_multiple_of(2),
            BlockFilter::Even => n.is_multiple_of(2),
            BlockFilter::From { start } => n >= *start,
        }
    }
}

/// Pattern rules `n ↦ J_n ⊆ ω^{I_n}`; words are re-indexed from 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Patterns {
    Explicit {
        #[serde(with = "crate::num::u64_keyed")]
        blocks: BTreeMap<u64, Vec<Word>>,
    },
    /// `J_n = {c̄↾I_n : c ∈ values}` on admitted blocks, `∅` elsewhere
    Constants {
        #[serde(with = "crate::num::nat_vec")]
        values: Vec<Nat>,
        filter: BlockFilter,
    },
    /// `J_n = {(e, 0, …, 0) : e < bounds[n]}` for `n < bounds.len()`, `∅` beyond
    LeadingBelow {
        #[serde(with = "crate::num::nat_vec")]
        bounds: Vec<Nat>,
    },
    /// `∅` for `n ≤ through`, `inner` beyond
    Emptied { through: u64, inner: Box<Patterns> },
    /// concatenations `x_j ∪ … ∪ x_{j′}` over the inner blocks of group `n`
    /// (see [`IntervalPartition::Grouped`]); `partition` is the inner partition
    Grouped { inner: Box<Patterns>, partition: IntervalPartition },
}

impl Patterns {
    pub fn explicit(blocks: impl IntoIterator<Item = (u64, Vec<Word>)>) -> Self {
        let mut map: BTreeMap<u64, Vec<Word>> = BTreeMap::new();
        for (n, ws) in blocks {
            let e = map.entry(n).or_default();
            e.extend(ws);
            e.sort();
            e.dedup();
        }
        map.retain(|_, v| !v.is_empty());
        Patterns::Explicit { blocks: map }
    }

    pub fn contains(&self, n: u64, len: u64, w: &Word) -> bool {
        if w.len() != len {
            return false;
        }
        match self {
            Patterns::Explicit { blocks } => blocks.get(&n).is_some_and(|ws| ws.binary_search(w).is_ok()),
            Patterns::Constants { values, filter } => {
                filter.admits(n)
                    && match w.entries().first() {
                        None => !values.is_empty(),
                        Some(c) => values.contains(c) && w.entries().iter().all(|v| v == c),
                    }
            }
            Patterns::LeadingBelow { bounds } => match bounds.get(n as usize) {
                None => false,
                Some(b) => match w.entries().split_first() {
                    None => !b.is_zero(),
                    Some((e, rest)) => e < b && rest.iter().all(Zero::is_zero),
                },
            },
            Patterns::Emptied { through, inner } => n > *through && inner.contains(n, len, w),
            Patterns::Grouped { inner, partition } => {
                let base = partition.start(tri_start(n));
                (tri_start(n)..tri_start(n + 1)).all(|j| {
                    let (a, b) = (partition.start(j) - base, partition.end(j) - base);
                    w.restrict(a, b).is_ok_and(|piece| inner.contains(j, b - a, &piece))
                })
            }
        }
    }

    pub fn size(&self, n: u64) -> Nat {
        match self {
            Patterns::Explicit { blocks } => nat(blocks.get(&n).map_or(0, |ws| ws.len() as u64)),
            Patterns::Constants { values, filter } => nat(if filter.admits(n) { values.len() as u64 } else { 0 }),
            Patterns::LeadingBelow { bounds } => bounds.get(n as usize).cloned().unwrap_or_default(),
            Patterns::Emptied { through, inner } => {
                if n <= *through {
                    Nat::zero()
                } else {
                    inner.size(n)
                }
            }
            Patterns::Grouped { inner, .. } => {
                (tri_start(n)..tri_start(n + 1)).fold(Nat::from(1u32), |acc, j| acc * inner.size(j))
            }
        }
    }

    pub fn words(&self, n: u64, len: u64, ceiling: u64) -> Result<Vec<Word>> {
        match self {
            Patterns::Explicit { blocks } => Ok(blocks.get(&n).cloned().unwrap_or_default()),
            Patterns::Constants { values, filter } => Ok(if filter.admits(n) {
                let mut ws: Vec<Word> = values.iter().map(|c| Word::constant(c, len)).collect();
                ws.sort();
                ws
            } else {
                vec![]
            }),
            Patterns::LeadingBelow { bounds } => {
                let b = bounds.get(n as usize).cloned().unwrap_or_default();
                let b = to_u64(&b)
                    .filter(|&b| b <= ceiling)
                    .ok_or_else(|| Error::LedgerOverflowCeiling { what: format!("block {n}"), ceiling })?;
                Ok((0..b).map(|e| Word::zeros(len).extend_first(nat(e))).collect())
            }
            Patterns::Emptied { through, inner } => {
                if n <= *through {
                    Ok(vec![])
                } else {
                    inner.words(n, len, ceiling)
                }
            }
            Patterns::Grouped { inner, partition } => {
                if self.size(n) > nat(ceiling) {
                    return Err(Error::LedgerOverflowCeiling { what: format!("grouped block {n}"), ceiling });
                }
                let mut out = vec![Word::empty()];
                for j in tri_start(n)..tri_start(n + 1) {
                    let pieces = inner.words(j, partition.len(j), ceiling)?;
                    out = out.iter().flat_map(|w| pieces.iter().map(move |p| w.concat(p))).collect();
                }
                out.sort();
                Ok(out)
            }
        }
    }
}

impl Word {
    fn extend_first(mut self, v: Nat) -> Word {
        if let Some(first) = self.0.first_mut() {
            *first = v;
        }
        self
    }
}

/// An interval partition with pattern sets and a quantifier tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSystem {
    pub partition: IntervalPartition,
    pub patterns: Patterns,
    pub quantifier: Quantifier,
    pub weight: Weight,
}

impl BlockSystem {
    pub fn contains(&self, n: u64, w: &Word) -> bool {
        self.patterns.contains(n, self.partition.len(n), w)
    }

    /// `x↾I_n ∈ J_n`
    pub fn hit(&self, n: u64, x: &Point) -> bool {
        let (a, b) = (self.partition.start(n), self.partition.end(n));
        self.contains(n, &x.restrict(a, b))
    }

    pub fn size(&self, n: u64) -> Nat {
        self.patterns.size(n)
    }

    pub fn words(&self, n: u64, ceiling: u64) -> Result<Vec<Word>> {
        self.patterns.words(n, self.partition.len(n), ceiling)
    }

    /// Ledger `|J_n|/h(|I_n|)` for `0 ≤ n < blocks`.
    pub fn ledger(&self, blocks: u64) -> Result<WeightLedger> {
        let h =
            self.weight.param().ok_or_else(|| Error::PreconditionFailed("Fin system has no weight ledger".into()))?;
        let sizes: Vec<Nat> = (0..blocks).map(|n| self.size(n)).collect();
        let weights: Vec<Nat> = (0..blocks).map(|n| h.eval(self.partition.len(n))).collect();
        WeightLedger::from_sizes(0, &sizes, &weights)
    }
}
