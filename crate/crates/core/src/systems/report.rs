use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::num::{to_u64, Nat};
use crate::systems::block::BlockSystem;
use crate::systems::partition::IntervalPartition;
use crate::systems::point::Point;
use crate::systems::prefix::{Levels, PrefixSystem};
use crate::systems::word::Word;

/// `{x : ∀^∞n, x↾I_n ≠ x_F↾I_n}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinusWitness {
    pub pattern: Point,
    pub partition: IntervalPartition,
}

impl MinusWitness {
    /// `x↾I_n = x_F↾I_n`, i.e. the avoidance event fails at block `n`.
    pub fn matches(&self, n: u64, x: &Point) -> bool {
        let (a, b) = (self.partition.start(n), self.partition.end(n));
        (a..b).all(|i| x.at(i) == self.pattern.at(i))
    }
}

#[derive(Clone, Copy, Debug)]
pub enum SystemRef<'a> {
    Prefix(&'a PrefixSystem),
    Block(&'a BlockSystem),
    Minus(&'a MinusWitness),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// supplied by a construction, never by truncation
    CertifiedIn {
        source: String,
    },
    CertifiedOut {
        source: String,
    },
    HitsAtDepth {
        hits: u64,
        depth: u64,
    },
}

/// Finite-depth record of a tail-quantified membership question.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub depth: u64,
    pub burn_in: u64,
    pub hits: Vec<u64>,
    pub misses: u64,
    pub verdict: Verdict,
}

impl MembershipReport {
    pub fn from_stages(depth: u64, burn_in: u64, stages: impl Iterator<Item = (u64, bool)>) -> Self {
        let mut hits = Vec::new();
        let mut misses = 0;
        for (n, hit) in stages {
            if hit {
                hits.push(n);
            } else {
                misses += 1;
            }
        }
        let verdict = Verdict::HitsAtDepth { hits: hits.len() as u64, depth };
        MembershipReport { depth, burn_in, hits, misses, verdict }
    }

    pub fn checked_stages(&self) -> u64 {
        self.hits.len() as u64 + self.misses
    }

    /// Attaches a construction-supplied certificate.
    pub fn certify(mut self, inside: bool, source: impl Into<String>) -> Self {
        let source = source.into();
        self.verdict = if inside { Verdict::CertifiedIn { source } } else { Verdict::CertifiedOut { source } };
        self
    }
}

impl fmt::Display for MembershipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::HitsAtDepth { hits, depth } => write!(f, "{hits} hits at depth {depth}")?,
            Verdict::CertifiedIn { source } => write!(f, "certified in ({source})")?,
            Verdict::CertifiedOut { source } => write!(f, "certified out ({source})")?,
        }
        let shown: Vec<String> = self.hits.iter().take(40).map(u64::to_string).collect();
        write!(f, "; hits [{}]", shown.join(","))?;
        if self.hits.len() > 40 {
            write!(f, ",…")?;
        }
        Ok(())
    }
}

/// Stage-by-stage hits of `x` against a system. Prefix systems are checked at
/// levels `burn_in ≤ n ≤ depth`; block systems and 𝓜₋ witnesses at blocks
/// `n ≥ burn_in` with `I_n ⊆ [0, depth)`.
pub fn membership_report(system: SystemRef<'_>, x: &Point, depth: u64, burn_in: u64) -> MembershipReport {
    match system {
        SystemRef::Prefix(s) => {
            // one evaluation of the prefix, reused across levels
            let full = x.prefix(depth);
            let stages = (burn_in..=depth).map(|n| {
                let hit = match &s.levels {
                    Levels::Box { .. } | Levels::Uniform { .. } => s.hit(n, x),
                    l => l.contains(n, &Word(full.0[..n as usize].to_vec())),
                };
                (n, hit)
            });
            MembershipReport::from_stages(depth, burn_in, stages)
        }
        SystemRef::Block(b) => {
            let blocks = b.partition.blocks_within(depth);
            MembershipReport::from_stages(depth, burn_in, (burn_in..blocks).map(|n| (n, b.hit(n, x))))
        }
        SystemRef::Minus(m) => {
            let blocks = m.partition.blocks_within(depth);
            MembershipReport::from_stages(depth, burn_in, (burn_in..blocks).map(|n| (n, m.matches(n, x))))
        }
    }
}

/// Whether some word of some `S_n` with `n ≤ depth` is compatible with `sigma`.
pub fn cylinder_meets_union(system: &PrefixSystem, sigma: &Word, depth: &Nat, ceiling: u64) -> Result<bool> {
    if let Levels::Rationals(r) = &system.levels {
        // at most bits(depth)+1 levels fit below depth, since L_n ≥ 2ⁿ
        let mut n = 0u64;
        while let Some(len) = r.length_upto(n, depth) {
            if crate::systems::rationals::prefix_compatible(&Nat::from(n), &len, sigma) {
                return Ok(true);
            }
            n += 1;
        }
        return Ok(false);
    }
    let depth = match to_u64(depth) {
        Some(d) => d,
        None => return Err(crate::error::Error::SearchCeilingExceeded { what: "cylinder depth".into(), ceiling }),
    };
    for n in 0..=depth {
        if n <= sigma.len() {
            let pre = Word(sigma.0[..n as usize].to_vec());
            if system.levels.contains(n, &pre) {
                return Ok(true);
            }
        } else if system.levels.words(n, ceiling)?.iter().any(|w| sigma.is_prefix_of(w)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `x↾[a, b)` for a point, or for a word with `b ≤ |w|`.
pub enum Restrictable<'a> {
    Point(&'a Point),
    Word(&'a Word),
}

pub fn word_restrict(x: Restrictable<'_>, a: u64, b: u64) -> Result<Word> {
    match x {
        Restrictable::Point(p) => Ok(p.restrict(a, b)),
        Restrictable::Word(w) => w.restrict(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::nat;
    use crate::systems::block::{BlockFilter, Patterns, Quantifier};
    use crate::systems::prefix::Weight;

    #[test]
    fn constant_disagreement_has_no_hits() {
        let m = MinusWitness { pattern: Point::zero(), partition: IntervalPartition::unit() };
        let r = membership_report(SystemRef::Minus(&m), &Point::constant(1), 100, 0);
        assert!(r.hits.is_empty());
        assert_eq!(r.to_string(), "0 hits at depth 100; hits []");
    }

    #[test]
    fn zero_levels_hit_everywhere() {
        let s = PrefixSystem::fin(Levels::Zeros { from: 0 });
        let r = membership_report(SystemRef::Prefix(&s), &Point::zero(), 50, 0);
        assert_eq!(r.hits, (0..=50).collect::<Vec<_>>());
    }

    #[test]
    fn alternating_point_misses_triangular_zero_blocks() {
        let b = BlockSystem {
            partition: IntervalPartition::Triangular,
            patterns: Patterns::Constants { values: vec![nat(0)], filter: BlockFilter::All },
            quantifier: Quantifier::Infinitely,
            weight: Weight::Fin,
        };
        let r = membership_report(SystemRef::Block(&b), &Point::periodic(&[], &[0, 1]), 45, 0);
        // only the length-one block I_0 = {0} sits inside a run of zeros
        assert_eq!(r.hits, vec![0]);
        let r = membership_report(SystemRef::Block(&b), &Point::periodic(&[], &[0, 1]), 45, 1);
        assert!(r.hits.is_empty());
    }

    #[test]
    fn cylinder_checks() {
        let empty = PrefixSystem::fin(Levels::empty());
        assert!(!cylinder_meets_union(&empty, &Word::from_u64s(&[3]), &nat(10), 100).unwrap());
        let one = PrefixSystem::fin(Levels::explicit([(1, vec![Word::from_u64s(&[0])])]));
        assert!(!cylinder_meets_union(&one, &Word::from_u64s(&[1]), &nat(10), 100).unwrap());
        assert!(cylinder_meets_union(&one, &Word::from_u64s(&[0, 4]), &nat(10), 100).unwrap());
    }

    #[test]
    fn restrictions() {
        assert_eq!(word_restrict(Restrictable::Point(&Point::zero()), 3, 6).unwrap(), Word::zeros(3));
        let w = Word::from_u64s(&[5, 6, 7]);
        assert_eq!(word_restrict(Restrictable::Word(&w), 1, 3).unwrap(), Word::from_u64s(&[6, 7]));
        assert!(word_restrict(Restrictable::Word(&w), 1, 4).is_err());
    }
}
