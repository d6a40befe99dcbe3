//! Comeager members of f𝓝(h), 𝓜₋-positive nowhere dense sets, the parity
//! classes `A_f`, and the 𝓜₋ set outside 𝓓_ω.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Check;
use crate::error::{Error, Result};
use crate::num::{nat, ratio, to_u64, Nat, Ratio};
use crate::param::{select_sparse_levels, ParamFunction, SparseLevels, TailJustification, WeightLedger};
use crate::systems::prefix::product_words;
use crate::systems::rationals::{prefix_compatible, rank, unrank};
use crate::systems::{
    cylinder_meets_union, membership_report, IntervalPartition, Levels, MembershipReport, MinusWitness, NodeExtension,
    NodeValue, Point, PrefixSystem, RationalLevels, SystemRef, Word,
};

/// `F = {x : ∃^∞n, x↾L_n = q_n↾L_n}` with `L_n = h(k_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comeager {
    pub sparse: SparseLevels,
    pub system: PrefixSystem,
    /// `Σ 1/h(L_n)` over the computed levels, with a tail when certified
    pub ledger: WeightLedger,
    #[serde(with = "crate::num::ratio_pair")]
    pub budget: Ratio,
}

pub fn comeager_fakenull(h: &ParamFunction, budget: &Ratio, count: usize, ceiling: u64) -> Result<Comeager> {
    let sparse = select_sparse_levels(h, budget, count, ceiling)?;
    let mut weights = Vec::with_capacity(sparse.values.len());
    for len in &sparse.values {
        let l = to_u64(len)
            .filter(|l| *l <= ceiling)
            .ok_or_else(|| Error::LedgerOverflowCeiling { what: format!("level length {len}"), ceiling })?;
        weights.push(h.eval(l));
    }
    let ones = vec![Nat::one(); weights.len()];
    let mut ledger = WeightLedger::from_sizes(0, &ones, &weights)?;
    if h.rule().is_nondecreasing() && h.rule().dominates_identity() {
        // h(L_m) ≥ L_m = h(k_m), so the tail sits below the sparse doubling tail
        let last = sparse.values.last().expect("nonempty prefix");
        ledger = ledger.with_tail(ratio(&Nat::one(), last), TailJustification::Doubling);
    }
    let system =
        PrefixSystem::with_h(h.clone(), Levels::Rationals(RationalLevels { h: h.clone(), sparse: sparse.clone() }));
    Ok(Comeager { sparse, system, ledger, budget: budget.clone() })
}

impl Comeager {
    pub fn checks(&self) -> Vec<Check> {
        let within = match self.ledger.total_bound() {
            Some(total) => Check::new(
                "ledger-within-budget",
                total <= self.budget,
                format!("{} <= {}", crate::num::ratio_to_string(&total), crate::num::ratio_to_string(&self.budget)),
            ),
            None => Check::new("ledger-within-budget", false, "no certified tail"),
        };
        vec![within]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub max_len: u64,
    pub max_entry: u64,
    pub words: u64,
    /// words also confirmed by a direct scan of the levels
    pub scanned: u64,
    pub failures: Vec<Word>,
}

/// Every word `σ` with `|σ| ≤ max_len` and entries `≤ max_entry` meets the
/// union: `q_{rank σ} = σ ⌢ 0̄` sits at level `L_{rank σ}`. Small ranks are
/// also confirmed by [`cylinder_meets_union`].
pub fn density_check(c: &Comeager, max_len: u64, max_entry: u64, ceiling: u64) -> Result<DensityCheck> {
    const SCAN_BELOW: u64 = 256;
    let mut out = DensityCheck { max_len, max_entry, words: 0, scanned: 0, failures: Vec::new() };
    for len in 0..=max_len {
        for sigma in product_words(&vec![max_entry + 1; len as usize]) {
            out.words += 1;
            let n = rank(&sigma);
            let level = to_u64(&n).and_then(|i| c.sparse.index(i).map(|k| (i, k)));
            let Some((i, k)) = level else {
                out.failures.push(sigma);
                continue;
            };
            if !prefix_compatible(&n, &nat(sigma.len()), &sigma) || unrank(&n).len() > sigma.len() {
                out.failures.push(sigma);
                continue;
            }
            if i < SCAN_BELOW {
                let depth = c.sparse.values.get(i as usize).cloned().unwrap_or_else(|| c.system_h().eval(k));
                if !cylinder_meets_union(&c.system, &sigma, &depth, ceiling)? {
                    out.failures.push(sigma);
                    continue;
                }
                out.scanned += 1;
            }
        }
    }
    Ok(out)
}

impl Comeager {
    fn system_h(&self) -> &ParamFunction {
        match &self.system.levels {
            Levels::Rationals(r) => &r.h,
            _ => unreachable!("comeager system carries rational levels"),
        }
    }
}

/// `B = {x : ∀σ, σ⌢b(σ) ⊄ x} ∖ A` for `A = {x : ∀^∞σ, σ⌢a(σ) ⊄ x}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NowhereDense {
    pub a: NodeExtension,
    pub b: NodeExtension,
}

pub fn minus_positive_nwd(a: NodeExtension) -> NowhereDense {
    let b = NodeExtension::ZeroBarrier { inner: Box::new(a.clone()) };
    NowhereDense { a, b }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NwdStage {
    /// `ξ_n`
    pub node: Word,
    /// `m_n`
    pub block: u64,
    /// `i_n = max I_{m_n} + 1`
    pub i: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NwdEscape {
    pub stages: Vec<NwdStage>,
    /// `ξ_N`; every check runs inside it
    pub prefix: Word,
    pub point: Point,
    pub report: MembershipReport,
    pub checks: Vec<Check>,
}

impl NowhereDense {
    /// Builds `ξ_0 ⊆ … ⊆ ξ_stages` and checks the result inside `ξ_stages`.
    pub fn escape(&self, f: &MinusWitness, stages: u64, ceiling: u64) -> Result<NwdEscape> {
        let mut xi = Word::empty();
        let mut recorded = Vec::with_capacity(stages as usize);
        for _ in 0..stages {
            let ext = xi.concat(&self.a.apply(&xi));
            let l = ext.len();
            let m = f.partition.block_of(l + 1) + 1;
            let (lo, hi) = (f.partition.start(m), f.partition.end(m));
            if hi + 1 > ceiling {
                return Err(Error::SearchCeilingExceeded {
                    what: format!("escape node of length {}", hi + 1),
                    ceiling,
                });
            }
            let mut next = ext.0;
            next.push(nat(hi));
            next.resize(lo as usize, Nat::one());
            next.extend((lo..hi).map(|c| f.pattern.at(c)));
            next.push(Nat::one());
            recorded.push(NwdStage { node: xi, block: m, i: hi });
            xi = Word(next);
        }
        let point = Point::eventually_zero(xi.clone());
        let depth = xi.len();

        let not_in_a = recorded.iter().all(|s| self.a.extension_inside(&s.node, &xi) == Some(true));
        let matched: Vec<u64> = recorded.iter().filter(|s| f.matches(s.block, &point)).map(|s| s.block).collect();
        let b_events: Vec<u64> = self
            .b
            .zero_events_along(&xi)
            .into_iter()
            .zip(0..depth)
            .filter(|(e, _)| *e != Some(false))
            .map(|(_, k)| k)
            .collect();
        let checks = vec![
            Check::new("extends-a-at-every-node", not_in_a, format!("{} nodes", recorded.len())),
            Check::new(
                "matches-pattern-on-chosen-blocks",
                matched.len() == recorded.len(),
                format!("blocks {matched:?}"),
            ),
            Check::new(
                "avoids-b-everywhere",
                b_events.is_empty(),
                format!("{depth} nodes, undecided or hit at {b_events:?}"),
            ),
        ];
        let report = membership_report(SystemRef::Minus(f), &point, depth, 0);
        Ok(NwdEscape { stages: recorded, prefix: xi, point, report, checks })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub set: NowhereDense,
    pub escapes: Vec<NwdEscape>,
}

/// A point of a later member shown outside an earlier member's `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub point_of: usize,
    pub excluded_from: usize,
    /// some `σ ⊆ x` with `σ ⌢ b(σ) ⊆ x`
    pub node: Option<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointFamily {
    pub members: Vec<FamilyMember>,
    pub cross: Vec<CrossCheck>,
    pub checks: Vec<Check>,
}

/// Member `j+1` uses `a_{j+1} = a_j ⌢ b_j`, so its `A` contains every earlier member.
pub fn disjoint_positive_family(
    count: usize,
    base_a: NodeExtension,
    opponents: &[MinusWitness],
    stages: u64,
    ceiling: u64,
) -> Result<DisjointFamily> {
    if count == 0 {
        return Err(Error::PreconditionFailed("count must be at least 1".into()));
    }
    let mut members: Vec<FamilyMember> = Vec::with_capacity(count);
    let mut a = base_a;
    for _ in 0..count {
        let set = minus_positive_nwd(a);
        let escapes = opponents.iter().map(|f| set.escape(f, stages, ceiling)).collect::<Result<Vec<_>>>()?;
        a = NodeExtension::Composed { parts: vec![set.a.clone(), set.b.clone()] };
        members.push(FamilyMember { set, escapes });
    }
    let mut cross = Vec::new();
    for (j, later) in members.iter().enumerate() {
        for (i, earlier) in members.iter().enumerate().take(j) {
            for e in &later.escapes {
                let x = &e.prefix;
                let node = earlier
                    .set
                    .b
                    .zero_events_along(x)
                    .iter()
                    .position(|e| *e == Some(true))
                    .map(|k| Word(x.0[..k].to_vec()));
                cross.push(CrossCheck { point_of: j, excluded_from: i, node });
            }
        }
    }
    let mut checks = vec![Check::new(
        "later-points-leave-earlier-members",
        cross.iter().all(|c| c.node.is_some()),
        format!("{} pairs", cross.len()),
    )];
    for (j, m) in members.iter().enumerate() {
        let ok = m.escapes.iter().all(|e| super::all_passed(&e.checks));
        checks.push(Check::new(&format!("member-{j}-escapes"), ok, format!("{} opponents", m.escapes.len())));
    }
    Ok(DisjointFamily { members, cross, checks })
}

/// Coordinates `n < depth` with `2 | x(n) + f(n)`; `x ∈ A_f` needs all of them.
pub fn parity_class_report(parity: &Point, x: &Point, depth: u64) -> MembershipReport {
    let two = nat(2);
    let stages = (0..depth).map(|n| (n, ((x.at(n) + parity.at(n)) % &two).is_zero()));
    MembershipReport::from_stages(depth, 0, stages)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityEscape {
    #[serde(with = "crate::num::nat_vec")]
    pub values: Vec<Nat>,
    pub point: Point,
    pub checks: Vec<Check>,
}

/// `y(n) = 2·max{σ(n) : σ ∈ S_{n+1}} + 2 − f(n)`, with an empty level counting as 0.
pub fn parity_escape(parity: &Point, opponent: &PrefixSystem, depth: u64, ceiling: u64) -> Result<ParityEscape> {
    let mut values = Vec::with_capacity(depth as usize);
    for n in 0..depth {
        let f = parity.at(n);
        if f > Nat::one() {
            return Err(Error::PreconditionFailed(format!("parity value {f} at {n}")));
        }
        let top = opponent.levels.max_at(n + 1, n, ceiling)?.unwrap_or_else(Nat::zero);
        values.push(top * 2u32 + 2u32 - f);
    }
    let y = Word(values.clone());
    let point = Point::Prefixed { prefix: y.clone(), tail: Box::new(parity.clone()) };
    let report = parity_class_report(parity, &point, depth);
    let caught: Vec<u64> =
        (1..=depth).filter(|&n| opponent.levels.contains(n, &Word(y.0[..n as usize].to_vec()))).collect();
    let checks = vec![
        Check::new("prescribed-parity", report.misses == 0, report.to_string()),
        Check::new("escapes-levels", caught.is_empty(), format!("levels 1..={depth}, caught at {caught:?}")),
    ];
    Ok(ParityEscape { values, point, checks })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomegaEscape {
    /// pattern `0̄` on the pairs `{2n, 2n+1}`
    pub witness: MinusWitness,
    pub point: Point,
    pub checks: Vec<Check>,
}

/// `x(2n) = f(x↾2n)`, `x(2n+1) = x(2n) + 1`.
pub fn minus_not_domega(f: &NodeValue, depth: u64) -> DomegaEscape {
    let witness = MinusWitness { pattern: Point::zero(), partition: IntervalPartition::Constant { len: 2 } };
    let pairs = depth.div_ceil(2);
    let mut x = Word::empty();
    for _ in 0..pairs {
        let v = f.apply(&x);
        x.push(v.clone());
        x.push(v + 1u32);
    }
    let point = Point::Periodic { head: x.clone(), period: Word::from_u64s(&[0, 1]) };
    let unequal = (0..pairs).all(|n| point.at(2 * n) != point.at(2 * n + 1));
    let diagonal = (0..pairs).all(|n| x.0[2 * n as usize] == f.apply(&Word(x.0[..2 * n as usize].to_vec())));
    let report = membership_report(SystemRef::Minus(&witness), &point, 2 * pairs, 0);
    let checks = vec![
        Check::new("pairs-differ", unequal, format!("{pairs} pairs")),
        Check::new("diagonal-values", diagonal, format!("{pairs} even stages")),
        Check::new("never-matches-witness", report.hits.is_empty(), report.to_string()),
    ];
    DomegaEscape { witness, point, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio_u;

    #[test]
    fn comeager_levels_for_powers_of_two() {
        let h = ParamFunction::parse("exp 2").unwrap();
        let c = comeager_fakenull(&h, &ratio_u(1, 1), 4, 1_000_000).unwrap();
        assert_eq!(c.sparse.indices, vec![1, 2, 3, 4]);
        assert_eq!(c.sparse.values, vec![nat(2), nat(4), nat(8), nat(16)]);
        assert!(crate::witnesses::all_passed(&c.checks()));
        let d = density_check(&c, 2, 3, 1_000_000).unwrap();
        assert_eq!(d.words, 1 + 4 + 16);
        assert!(d.failures.is_empty());
        assert!(cylinder_meets_union(&c.system, &Word::empty(), &nat(2), 100).unwrap());
        // q_127 = ⟨7⟩ is the first rational starting with 7
        assert!(cylinder_meets_union(&c.system, &Word::from_u64s(&[7]), &(Nat::one() << 128usize), 100).unwrap());
        assert!(!cylinder_meets_union(&c.system, &Word::from_u64s(&[7]), &(Nat::one() << 127usize), 100).unwrap());
    }

    #[test]
    fn barrier_of_constant_map() {
        let nwd = minus_positive_nwd(NodeExtension::constant(Word::empty()));
        assert_eq!(nwd.b.apply(&Word::from_u64s(&[4, 1])), Word::zeros(5));
    }

    #[test]
    fn nwd_escape_against_unit_zero_pattern() {
        let nwd = minus_positive_nwd(NodeExtension::constant(Word::from_u64s(&[0])));
        let f = MinusWitness { pattern: Point::zero(), partition: IntervalPartition::unit() };
        let e = nwd.escape(&f, 5, 1_000_000).unwrap();
        // ξ_0⌢a = ⟨0⟩, so min I_m > 2 gives m_0 = 3, i_0 = 4 and ξ_1 = ⟨0,4,1,0,1⟩
        assert_eq!(e.stages[0].block, 3);
        assert_eq!(e.stages[0].i, 4);
        assert_eq!(e.stages[1].node, Word::from_u64s(&[0, 4, 1, 0, 1]));
        assert!(crate::witnesses::all_passed(&e.checks), "{:?}", e.checks);
        let blocks: Vec<u64> = e.stages.iter().map(|s| s.block).collect();
        for b in blocks {
            assert!(e.report.hits.contains(&b));
        }
    }

    #[test]
    fn family_members_are_separated() {
        let f = MinusWitness { pattern: Point::zero(), partition: IntervalPartition::unit() };
        let g = MinusWitness { pattern: Point::constant(3), partition: IntervalPartition::Constant { len: 3 } };
        let fam =
            disjoint_positive_family(3, NodeExtension::constant(Word::from_u64s(&[0])), &[f, g], 3, 1_000_000).unwrap();
        assert_eq!(fam.members.len(), 3);
        assert_eq!(fam.cross.len(), 2 * 3);
        assert!(crate::witnesses::all_passed(&fam.checks), "{:?}", fam.checks);
    }

    #[test]
    fn parity_examples() {
        let zeros = PrefixSystem::fin(Levels::Zeros { from: 0 });
        let e = parity_escape(&Point::zero(), &zeros, 10, 1000).unwrap();
        assert!(e.values.iter().all(|v| *v == nat(2)));
        assert!(crate::witnesses::all_passed(&e.checks));
        let e = parity_escape(&Point::constant(1), &PrefixSystem::fin(Levels::empty()), 10, 1000).unwrap();
        assert!(e.values.iter().all(|v| *v == nat(1)));
        let other = parity_class_report(&Point::zero(), &e.point, 10);
        assert!(other.hits.is_empty());
        assert!(parity_escape(&Point::constant(2), &zeros, 3, 1000).is_err());
    }

    #[test]
    fn domega_examples() {
        let e = minus_not_domega(&NodeValue::Constant { value: nat(5) }, 6);
        assert_eq!(e.point.prefix(6), Word::from_u64s(&[5, 6, 5, 6, 5, 6]));
        let e = minus_not_domega(&NodeValue::Length, 6);
        assert_eq!(e.point.prefix(6), Word::from_u64s(&[0, 1, 2, 3, 4, 5]));
        assert!(crate::witnesses::all_passed(&e.checks));
    }
}
