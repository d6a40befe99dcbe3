use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::num::{nat, to_u64, Nat};
use crate::systems::word::Word;

/// A rule `ω^{<ω} → ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeValue {
    Constant {
        #[serde(with = "crate::num::nat_str")]
        value: Nat,
    },
    /// `σ ↦ |σ|`
    Length,
    /// `σ ↦ max σ + 1`, with `max ∅ = 0`
    MaxPlusOne,
}

impl NodeValue {
    pub fn apply(&self, sigma: &Word) -> Nat {
        match self {
            NodeValue::Constant { value } => value.clone(),
            NodeValue::Length => nat(sigma.len()),
            NodeValue::MaxPlusOne => sigma.max_entry().cloned().unwrap_or_default() + 1u32,
        }
    }
}

/// A rule `ω^{<ω} → ω^{<ω}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeExtension {
    Constant {
        word: Word,
    },
    /// `σ ↦ a₁(σ) ⌢ a₂(σ⌢a₁(σ)) ⌢ …`
    Composed {
        parts: Vec<NodeExtension>,
    },
    /// `σ ↦ 0̄↾(max{|inner(σ↾k)| : k ≤ |σ|} + max σ + 1)`, with `max ∅ = 0`
    ZeroBarrier {
        inner: Box<NodeExtension>,
    },
}

impl NodeExtension {
    pub fn constant(word: Word) -> Self {
        NodeExtension::Constant { word }
    }

    pub fn apply(&self, sigma: &Word) -> Word {
        match self {
            NodeExtension::Constant { word } => word.clone(),
            NodeExtension::Composed { parts } => {
                let mut node = sigma.clone();
                let mut out = Word::empty();
                for part in parts {
                    let piece = part.apply(&node);
                    node = node.concat(&piece);
                    out = out.concat(&piece);
                }
                out
            }
            NodeExtension::ZeroBarrier { inner } => {
                let longest = inner.lengths_along(sigma).into_iter().max().unwrap_or(0);
                let top = sigma.max_entry().cloned().unwrap_or_else(Nat::zero);
                let top = to_u64(&top).expect("entry too large for a barrier length");
                Word::zeros(longest + top + 1)
            }
        }
    }

    /// `|self(x↾k)|` for every `k ≤ |x|`, in one pass over the prefixes for a barrier.
    pub fn lengths_along(&self, x: &Word) -> Vec<u64> {
        match self {
            NodeExtension::ZeroBarrier { inner } => {
                let inner = inner.lengths_along(x);
                let mut longest = 0;
                let mut top = 0;
                (0..=x.len())
                    .map(|k| {
                        longest = longest.max(inner[k as usize]);
                        if k > 0 {
                            let v = to_u64(&x.0[k as usize - 1]).expect("entry too large for a barrier length");
                            top = top.max(v);
                        }
                        longest + top + 1
                    })
                    .collect()
            }
            _ => (0..=x.len()).map(|k| self.apply(&Word(x.0[..k as usize].to_vec())).len()).collect(),
        }
    }

    /// [`Self::extension_inside`] at every prefix `x↾k` of `x`, for zero-valued
    /// extensions such as barriers.
    pub fn zero_events_along(&self, x: &Word) -> Vec<Option<bool>> {
        let lens = self.lengths_along(x);
        // next[k] = least j ≥ k with x(j) ≠ 0, or |x|
        let mut next = vec![x.len(); x.len() as usize + 1];
        for k in (0..x.len()).rev() {
            next[k as usize] = if x.0[k as usize].is_zero() { next[k as usize + 1] } else { k };
        }
        (0..=x.len())
            .map(|k| {
                let end = k + lens[k as usize];
                let first_nonzero = next[k as usize];
                if first_nonzero < end.min(x.len()) {
                    Some(false)
                } else if end <= x.len() {
                    Some(true)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Whether `σ ⌢ self(σ)` is an initial segment of `x`, where `x` is
    /// known on `[0, |x|)`; `None` if the segment runs past the known part.
    pub fn extension_inside(&self, sigma: &Word, x: &Word) -> Option<bool> {
        if !sigma.is_prefix_of(x) {
            return Some(false);
        }
        let ext = self.apply(sigma);
        let end = sigma.len() + ext.len();
        let known = end.min(x.len());
        let agrees = (sigma.len()..known).all(|i| x.0[i as usize] == ext.0[(i - sigma.len()) as usize]);
        if !agrees {
            Some(false)
        } else if end <= x.len() {
            Some(true)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_of_empty_map() {
        let b = NodeExtension::ZeroBarrier { inner: Box::new(NodeExtension::constant(Word::empty())) };
        assert_eq!(b.apply(&Word::from_u64s(&[2, 5, 1])), Word::zeros(6));
        assert_eq!(b.apply(&Word::empty()), Word::zeros(1));
    }

    #[test]
    fn composition_feeds_the_extended_node() {
        let a = NodeExtension::Composed {
            parts: vec![
                NodeExtension::constant(Word::from_u64s(&[0])),
                NodeExtension::ZeroBarrier { inner: Box::new(NodeExtension::constant(Word::empty())) },
            ],
        };
        // second part sees σ⌢0 = (3,0): zeros of length 3+1
        assert_eq!(a.apply(&Word::from_u64s(&[3])), Word::from_u64s(&[0, 0, 0, 0, 0]));
    }

    #[test]
    fn lengths_along_match_apply() {
        let inner = NodeExtension::Composed {
            parts: vec![
                NodeExtension::constant(Word::from_u64s(&[0])),
                NodeExtension::ZeroBarrier { inner: Box::new(NodeExtension::constant(Word::from_u64s(&[1, 1]))) },
            ],
        };
        let b = NodeExtension::ZeroBarrier { inner: Box::new(inner) };
        let x = Word::from_u64s(&[2, 0, 0, 0, 0, 0, 0, 0, 0, 5, 0, 0, 1]);
        let lens = b.lengths_along(&x);
        let events = b.zero_events_along(&x);
        for k in 0..=x.len() {
            let sigma = Word(x.0[..k as usize].to_vec());
            assert_eq!(lens[k as usize], b.apply(&sigma).len());
            assert_eq!(events[k as usize], b.extension_inside(&sigma, &x));
        }
    }

    #[test]
    fn node_values() {
        let s = Word::from_u64s(&[4, 1]);
        assert_eq!(NodeValue::Length.apply(&s), nat(2));
        assert_eq!(NodeValue::MaxPlusOne.apply(&s), nat(5));
        assert_eq!(NodeValue::Constant { value: nat(5) }.apply(&s), nat(5));
    }
}
