//! f𝓢(h) against Fin and 𝓜₋: a small set outside f𝓝(Fin), the set
//! `{x : ∃^∞n, x(n) = 0}`, orthogonality to 𝓜₋, and the escape showing that
//! f𝓝(Fin) is not orthogonal to 𝓜₋.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Check;
use crate::error::{Error, Result};
use crate::num::{ratio_to_string, Nat, Ratio};
use crate::param::{select_sparse_levels, ParamFunction, SparseLevels, WeightLedger};
use crate::systems::{
    membership_report, BlockFilter, BlockSystem, IntervalPartition, Levels, MembershipReport, MinusWitness, Patterns,
    Point, PrefixSystem, Quantifier, SystemRef, Weight, Word,
};

fn level_max(levels: &Levels, n: u64, coord: u64, ceiling: u64) -> Result<Nat> {
    Ok(levels.max_at(n, coord, ceiling)?.unwrap_or_else(Nat::zero))
}

/// Levels `1 ≤ n ≤ len` at which `y↾n ∈ S_n`.
fn caught_levels(levels: &Levels, y: &Word) -> Vec<u64> {
    (1..=y.len()).filter(|&n| levels.contains(n, &Word(y.0[..n as usize].to_vec()))).collect()
}

fn zero_constant_blocks(partition: IntervalPartition, filter: BlockFilter, weight: Weight) -> BlockSystem {
    BlockSystem {
        partition,
        patterns: Patterns::Constants { values: vec![Nat::zero()], filter },
        quantifier: Quantifier::Infinitely,
        weight,
    }
}

/// `|I_{2n}| = 1`, `|I_{2n+1}| = k_n`, `J_{2n} = ∅`, `J_{2n+1} = {0̄}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SNotInFin {
    pub sparse: SparseLevels,
    pub a: BlockSystem,
    pub ledger: WeightLedger,
}

pub fn s_not_in_fin(h: &ParamFunction, budget: &Ratio, count: usize, ceiling: u64) -> Result<SNotInFin> {
    let sparse = select_sparse_levels(h, budget, count, ceiling)?;
    let lengths: Vec<u64> = sparse.indices.iter().flat_map(|&k| [1, k]).chain([1]).collect();
    let a = zero_constant_blocks(
        IntervalPartition::from_lengths(&lengths),
        BlockFilter::Odd,
        Weight::Param { h: h.clone() },
    );
    let ledger = sparse.ledger();
    Ok(SNotInFin { sparse, a, ledger })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SEscape {
    pub point: Point,
    pub report: MembershipReport,
    pub checks: Vec<Check>,
}

impl SNotInFin {
    pub fn pairs(&self) -> u64 {
        self.sparse.indices.len() as u64
    }

    /// `y(a) = max{t(a) : t ∈ S_j, a < j ≤ max I_{2n+1} + 1} + 1` on `I_{2n} = {a}`, zero on `I_{2n+1}`.
    pub fn escape(&self, opponent: &PrefixSystem, ceiling: u64) -> Result<SEscape> {
        let p = &self.a.partition;
        let end = p.end(2 * self.pairs() - 1);
        let mut y = Word::zeros(end);
        for n in 0..self.pairs() {
            let a = p.start(2 * n);
            let mut top = Nat::zero();
            for j in a + 1..=p.end(2 * n + 1) {
                top = top.max(level_max(&opponent.levels, j, a, ceiling)?);
            }
            y.0[a as usize] = top + 1u32;
        }
        let point = Point::eventually_zero(y.clone());
        let report = membership_report(SystemRef::Block(&self.a), &point, end, 0);
        let odd: Vec<u64> = (0..self.pairs()).map(|n| 2 * n + 1).collect();
        let caught = caught_levels(&opponent.levels, &y);
        let checks = vec![
            Check::new("hits-every-odd-block", report.hits == odd, report.to_string()),
            Check::new("escapes-levels", caught.is_empty(), format!("levels 1..={end}, caught at {caught:?}")),
        ];
        Ok(SEscape { point, report, checks })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictEscape {
    /// `"nontrivial"` when some checked block has length > 1, else `"singleton-only"`
    pub branch: String,
    pub point: Point,
    pub zero_report: MembershipReport,
    pub checks: Vec<Check>,
}

/// A point of `{x : ∃^∞n, x(n) = 0}` outside the opponent on every checked block.
pub fn s_fin_strict_escape(opponent: &BlockSystem, depth: u64, ceiling: u64) -> Result<StrictEscape> {
    if opponent.weight.param().is_none() {
        return Err(Error::PreconditionFailed("opponent needs a weight h".into()));
    }
    let blocks = opponent.partition.blocks_within(depth);
    let end = if blocks == 0 { 0 } else { opponent.partition.end(blocks - 1) };
    let mut y = Word::zeros(end);
    for n in 0..blocks {
        let (lo, hi) = (opponent.partition.start(n), opponent.partition.end(n));
        let words = opponent.words(n, ceiling)?;
        if words.is_empty() {
            continue;
        }
        // the first coordinate stays 0 when the block has room to differ elsewhere
        let bump = if hi - lo > 1 { 1 } else { 0 };
        let top = words.iter().map(|w| w.0[bump as usize].clone()).max().expect("nonempty");
        y.0[(lo + bump) as usize] = top + 1u32;
    }
    let point = Point::eventually_zero(y.clone());
    let zeros = zero_constant_blocks(IntervalPartition::unit(), BlockFilter::All, Weight::Fin);
    let zero_report = membership_report(SystemRef::Block(&zeros), &point, end, 0);
    let caught: Vec<u64> = (0..blocks).filter(|&n| opponent.hit(n, &point)).collect();
    let zeroless: Vec<u64> = (0..blocks)
        .filter(|&n| opponent.partition.len(n) > 1)
        .filter(|&n| (opponent.partition.start(n)..opponent.partition.end(n)).all(|k| !y.0[k as usize].is_zero()))
        .collect();
    let long_blocks = (0..blocks).any(|n| opponent.partition.len(n) > 1);
    let branch = if long_blocks { "nontrivial" } else { "singleton-only" };
    let checks = vec![
        Check::new("avoids-every-checked-block", caught.is_empty(), format!("{blocks} blocks, hit at {caught:?}")),
        Check::new("zero-in-every-long-block", zeroless.is_empty(), format!("missing at {zeroless:?}")),
    ];
    Ok(StrictEscape { branch: branch.into(), point, zero_report, checks })
}

/// `A = {x : ∃^∞n, x↾I_n = 0̄↾I_n}` with `|I_n| = k_n`; its complement is the 𝓜₋ set of `(0̄, I_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SOrthMinus {
    pub sparse: SparseLevels,
    pub a: BlockSystem,
    pub complement: MinusWitness,
    pub ledger: WeightLedger,
}

pub fn s_orth_minus(h: &ParamFunction, budget: &Ratio, count: usize, ceiling: u64) -> Result<SOrthMinus> {
    let sparse = select_sparse_levels(h, budget, count, ceiling)?;
    let partition = if sparse.unit_step_tail {
        IntervalPartition::Arithmetic { first: sparse.indices[0], step: 1 }
    } else {
        IntervalPartition::from_lengths(&sparse.indices)
    };
    let a = zero_constant_blocks(partition.clone(), BlockFilter::All, Weight::Param { h: h.clone() });
    let complement = MinusWitness { pattern: Point::zero(), partition };
    let ledger = sparse.ledger();
    Ok(SOrthMinus { sparse, a, complement, ledger })
}

impl SOrthMinus {
    /// Block hits of `A` and pattern matches of the complement coincide, so
    /// avoidance stages are exactly the non-hits.
    pub fn complement_check(&self, x: &Point, depth: u64) -> Check {
        let hits = membership_report(SystemRef::Block(&self.a), x, depth, 0);
        let matches = membership_report(SystemRef::Minus(&self.complement), x, depth, 0);
        Check::new(
            "complement-stages",
            hits.hits == matches.hits && hits.misses == matches.misses,
            format!("{} hits, {} avoidances", hits.hits.len(), matches.misses),
        )
    }

    pub fn ledger_check(&self) -> Result<Check> {
        let blocks = self.a.ledger(self.sparse.indices.len() as u64)?;
        let total = self.ledger.total_bound().expect("sparse ledger has a tail");
        Ok(Check::new(
            "ledger-within-budget",
            blocks.partial_sum == self.ledger.partial_sum && total <= self.sparse.budget,
            format!("{} <= {}", ratio_to_string(&total), ratio_to_string(&self.sparse.budget)),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotOrthEscape {
    pub point: Point,
    pub report: MembershipReport,
    pub checks: Vec<Check>,
}

/// `y` is zero on every `I_{2m+1} = [a_m+1, b_m]`, beats `S_{k+1}` at
/// coordinates before `a_m`, and beats `S_{a_m+1}, …, S_{b_m+1}` at `a_m`.
pub fn n_fin_not_orth_escape(
    f: &MinusWitness,
    opponent: &PrefixSystem,
    depth: u64,
    ceiling: u64,
) -> Result<NotOrthEscape> {
    let p = &f.partition;
    // at least one odd block, more while they fit below depth
    let mut odd = 1u64;
    while p.end(2 * odd + 1) <= depth {
        odd += 1;
    }
    let end = p.end(2 * odd - 1);
    if let Some(k) = (0..end).find(|&k| !f.pattern.at(k).is_zero()) {
        return Err(Error::PreconditionFailed(format!("pattern is nonzero at {k}")));
    }
    let mut y = Word::zeros(end);
    let mut from = 0u64;
    for m in 0..odd {
        let a = p.start(2 * m + 1) - 1;
        let b = p.end(2 * m + 1) - 1;
        for k in from..a {
            y.0[k as usize] = level_max(&opponent.levels, k + 1, k, ceiling)? + Nat::one();
        }
        let mut top = Nat::zero();
        for i in a + 1..=b + 1 {
            top = top.max(level_max(&opponent.levels, i, a, ceiling)?);
        }
        y.0[a as usize] = top + 1u32;
        from = b + 1;
    }
    let point = Point::eventually_zero(y.clone());
    let report = membership_report(SystemRef::Minus(f), &point, end, 0);
    let odd_blocks: Vec<u64> = (0..odd).map(|m| 2 * m + 1).collect();
    let matched = odd_blocks.iter().all(|n| report.hits.contains(n));
    let caught = caught_levels(&opponent.levels, &y);
    let checks = vec![
        Check::new("matches-every-odd-block", matched, report.to_string()),
        Check::new("escapes-levels", caught.is_empty(), format!("levels 1..={end}, caught at {caught:?}")),
    ];
    Ok(NotOrthEscape { point, report, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{nat, ratio_u};

    #[test]
    fn s_not_in_fin_for_powers_of_two() {
        let h = ParamFunction::parse("exp 2").unwrap();
        let s = s_not_in_fin(&h, &ratio_u(1, 1), 4, 1000).unwrap();
        let p = &s.a.partition;
        assert_eq!((p.len(1), p.len(3), p.len(5)), (1, 2, 3));
        let e = s.escape(&PrefixSystem::fin(Levels::empty()), 1000).unwrap();
        assert_eq!(e.point.at(0), nat(1));
        assert_eq!(e.point.at(1), nat(0));
        assert!(crate::witnesses::all_passed(&e.checks));
        let e = s.escape(&PrefixSystem::fin(Levels::Zeros { from: 0 }), 1000).unwrap();
        assert!(crate::witnesses::all_passed(&e.checks));
    }

    #[test]
    fn strict_escape_bumps_second_coordinate() {
        let opp = BlockSystem {
            partition: IntervalPartition::Constant { len: 2 },
            patterns: Patterns::Constants { values: vec![nat(0)], filter: BlockFilter::All },
            quantifier: Quantifier::Infinitely,
            weight: Weight::Param { h: ParamFunction::parse("exp 2").unwrap() },
        };
        let e = s_fin_strict_escape(&opp, 10, 1000).unwrap();
        assert_eq!(e.point.prefix(4), Word::from_u64s(&[0, 1, 0, 1]));
        assert_eq!(e.zero_report.hits, vec![0, 2, 4, 6, 8]);
        assert_eq!(e.branch, "nontrivial");
        assert!(crate::witnesses::all_passed(&e.checks));
    }

    #[test]
    fn orth_minus_stages_are_complements() {
        let h = ParamFunction::parse("exp 2").unwrap();
        let s = s_orth_minus(&h, &ratio_u(1, 1), 6, 1000).unwrap();
        assert!(s.ledger_check().unwrap().passed);
        for x in [Point::zero(), Point::constant(1), Point::periodic(&[], &[0, 0, 1])] {
            assert!(s.complement_check(&x, 60).passed);
        }
        let r = membership_report(SystemRef::Block(&s.a), &Point::constant(1), 60, 0);
        assert!(r.hits.is_empty());
    }

    #[test]
    fn not_orth_escape_examples() {
        let f = MinusWitness { pattern: Point::zero(), partition: IntervalPartition::unit() };
        let e = n_fin_not_orth_escape(&f, &PrefixSystem::fin(Levels::empty()), 10, 1000).unwrap();
        assert_eq!(e.point.prefix(6), Word::from_u64s(&[1, 0, 1, 0, 1, 0]));
        assert!(crate::witnesses::all_passed(&e.checks));
        let one = PrefixSystem::fin(Levels::Box { bound: crate::param::Rule::constant(5) });
        let e = n_fin_not_orth_escape(&f, &one, 10, 1_000_000).unwrap();
        assert!((0..10).step_by(2).all(|k| e.point.at(k) >= nat(6)));
        assert!(crate::witnesses::all_passed(&e.checks));
    }
}
