//! f𝓔(h) is not an ideal, and f𝓔(n ↦ n²) ⊄ f𝓝(p) for polynomials `p`.

use std::collections::HashSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Check;
use crate::error::{Error, Result};
use crate::num::{inv_pow2, nat, ratio, ratio_to_string, Nat, Ratio};
use crate::param::{ParamFunction, Rule, WeightLedger};
use crate::systems::partition::tri_start;
use crate::systems::{
    membership_report, BlockFilter, BlockSystem, IntervalPartition, Patterns, Point, PrefixSystem, Quantifier,
    SystemRef, Weight, Word,
};

/// One row of the interleaved recursion; `E(a_n)` is only known one step later.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursionState {
    pub step: u64,
    pub a: u64,
    pub b: u64,
    #[serde(with = "crate::num::opt_nat")]
    pub e_a: Option<Nat>,
    #[serde(with = "crate::num::opt_nat")]
    pub e_b: Option<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ENotIdeal {
    pub h: ParamFunction,
    pub trace: Vec<RecursionState>,
    pub a_system: BlockSystem,
    pub b_system: BlockSystem,
}

/// `min{l > prev : e·2ⁿ < h(l − prev)}`
fn next_point(h: &ParamFunction, prev: u64, e: &Nat, n: u64, ceiling: u64) -> Result<u64> {
    let target = e << n as usize;
    (1..=ceiling)
        .find(|&d| h.eval(d) > target)
        .map(|d| prev + d)
        .ok_or_else(|| Error::SearchCeilingExceeded { what: format!("recursion point at step {n}"), ceiling })
}

pub fn e_not_ideal(h: &ParamFunction, steps: u64, ceiling: u64) -> Result<ENotIdeal> {
    if !h.rule().is_strictly_increasing() {
        return Err(Error::NotIncreasing(h.to_string()));
    }
    if steps == 0 {
        return Err(Error::PreconditionFailed("at least one step".into()));
    }
    let mut a = vec![0u64];
    let mut b = vec![0u64, 1];
    let mut e_a = vec![h.eval(1)];
    a.push(next_point(h, 0, &e_a[0], 1, ceiling)?);
    let mut e_b = vec![None, Some(h.eval(a[1]))];
    for n in 2..=steps {
        let bn = next_point(h, b[n as usize - 1], e_b[n as usize - 1].as_ref().expect("set"), n, ceiling)?;
        b.push(bn);
        e_a.push(h.eval(bn));
        let an = next_point(h, a[n as usize - 1], &e_a[n as usize - 1], n, ceiling)?;
        a.push(an);
        e_b.push(Some(h.eval(an)));
    }
    let trace = (0..=steps)
        .map(|n| RecursionState {
            step: n,
            a: a[n as usize],
            b: b[n as usize],
            e_a: e_a.get(n as usize).cloned(),
            e_b: e_b[n as usize].clone(),
        })
        .collect();
    // block 0 of B has no E(b_0); it admits only the zero value
    let mut b_bounds: Vec<Nat> = vec![Nat::one()];
    b_bounds.extend(e_b[1..steps as usize].iter().map(|e| e.clone().expect("set")));
    let system = |points: &[u64], bounds: Vec<Nat>| BlockSystem {
        partition: IntervalPartition::Explicit { breakpoints: points.to_vec(), tail_len: 1 },
        patterns: Patterns::LeadingBelow { bounds },
        quantifier: Quantifier::AllButFinitely,
        weight: Weight::Param { h: h.clone() },
    };
    let a_system = system(&a, e_a[..steps as usize].to_vec());
    let b_system = system(&b, b_bounds);
    Ok(ENotIdeal { h: h.clone(), trace, a_system, b_system })
}

impl ENotIdeal {
    pub fn steps(&self) -> u64 {
        self.trace.len() as u64 - 1
    }

    /// Re-runs every min-search from scratch by a plain scan over `l`.
    pub fn rescan(&self) -> bool {
        let h = &self.h;
        let least = |prev: u64, e: &Nat, n: u64, stored: u64| {
            let ok = |l: u64| ratio(e, &h.eval(l - prev)) < inv_pow2(n);
            stored > prev && ok(stored) && (prev + 1..stored).all(|l| !ok(l))
        };
        let t = &self.trace;
        if t[0].a != 0 || t[0].b != 0 || t.get(1).is_some_and(|r| r.b != 1) {
            return false;
        }
        if t[0].e_a.as_ref() != Some(&h.eval(1)) {
            return false;
        }
        for n in 1..t.len() {
            let ea = t[n - 1].e_a.as_ref().expect("set");
            if !least(t[n - 1].a, ea, n as u64, t[n].a) || t[n].e_b.as_ref() != Some(&h.eval(t[n].a)) {
                return false;
            }
            if n >= 2 {
                let eb = t[n - 1].e_b.as_ref().expect("set");
                if !least(t[n - 1].b, eb, n as u64, t[n].b) || t[n - 1].e_a.as_ref() != Some(&h.eval(t[n].b)) {
                    return false;
                }
            }
        }
        true
    }

    /// Partial sums of both ledgers against `Σ_{n≤N} 2^{−(n+1)}`; `B` from block 1.
    pub fn ledger_checks(&self) -> Result<Vec<Check>> {
        let blocks = self.steps();
        let mut out = Vec::new();
        for (name, sys, from) in [("a", &self.a_system, 0usize), ("b", &self.b_system, 1usize)] {
            let ledger: WeightLedger = sys.ledger(blocks)?;
            let mut acc = Ratio::zero();
            let mut bound = Ratio::zero();
            let mut ok = true;
            for (n, t) in ledger.terms.iter().enumerate().skip(from) {
                acc += t;
                bound += inv_pow2(n as u64 + 1);
                ok &= acc <= bound;
            }
            out.push(Check::new(
                &format!("ledger-{name}-below-geometric"),
                ok,
                format!("{} <= {}", ratio_to_string(&acc), ratio_to_string(&bound)),
            ));
        }
        Ok(out)
    }

    /// A point of `A ∖ C` (or `B ∖ C`) over the blocks of `C` inside `[0, a_steps)`.
    pub fn escape(&self, c: &BlockSystem, ceiling: u64) -> Result<EEscape> {
        let h = &self.h;
        let steps = self.steps() as usize;
        let ea: Vec<u64> = self.trace.iter().map(|r| r.a).collect();
        let eb: Vec<u64> = self.trace.iter().map(|r| r.b).collect();
        let depth = ea[steps].min(eb[steps]);
        let blocks = c.partition.blocks_within(depth);
        let last_in = |set: &[u64], lo: u64, hi: u64| set.iter().rposition(|&p| lo <= p && p < hi);
        let mut tried = Vec::new();
        for (branch, mine, other) in [("A", &ea, &eb), ("B", &eb, &ea)] {
            let mut chosen = Vec::new();
            let mut guard_failures = 0u64;
            for n in 0..blocks {
                let (lo, hi) = (c.partition.start(n), c.partition.end(n));
                let Some(k) = last_in(mine, lo, hi) else { continue };
                if last_in(other, lo, hi).is_some_and(|j| other[j] >= mine[k]) {
                    continue;
                }
                if k >= steps {
                    continue;
                }
                let size = c.size(n);
                if size >= h.eval(hi - lo) {
                    guard_failures += 1;
                    continue;
                }
                let bound = self.free_bound(branch, k).expect("k below steps");
                let coord = mine[k];
                let used: HashSet<Nat> =
                    c.words(n, ceiling)?.into_iter().map(|w| w.0[(coord - lo) as usize].clone()).collect();
                let mut e = Nat::zero();
                while used.contains(&e) {
                    e += 1u32;
                }
                if e >= bound {
                    return Err(Error::CaseNotApplicable(format!(
                        "branch {branch}: no free value below {bound} at coordinate {coord}"
                    )));
                }
                chosen.push((n, coord, e));
            }
            if !chosen.is_empty() {
                return Ok(self.finish_escape(branch, c, depth, chosen));
            }
            tried.push(format!("branch {branch}: no block in range ({guard_failures} failed the size guard)"));
        }
        Err(Error::CaseNotApplicable(tried.join("; ")))
    }

    fn free_bound(&self, branch: &str, k: usize) -> Option<Nat> {
        let row = &self.trace[k];
        match branch {
            "A" => row.e_a.clone(),
            _ if k == 0 => Some(Nat::one()),
            _ => row.e_b.clone(),
        }
    }

    fn finish_escape(&self, branch: &str, c: &BlockSystem, depth: u64, chosen: Vec<(u64, u64, Nat)>) -> EEscape {
        let mut w = Word::zeros(depth);
        for (_, coord, e) in &chosen {
            w.0[*coord as usize] = e.clone();
        }
        let point = Point::eventually_zero(w);
        let own = if branch == "A" { &self.a_system } else { &self.b_system };
        let report = membership_report(SystemRef::Block(own), &point, depth, 0);
        let missed: Vec<u64> = chosen.iter().filter(|(n, _, _)| c.hit(*n, &point)).map(|(n, _, _)| *n).collect();
        let checks = vec![
            Check::new(&format!("in-{branch}-at-every-block"), report.misses == 0, report.to_string()),
            Check::new("avoids-opponent-on-chosen-blocks", missed.is_empty(), format!("hit at {missed:?}")),
        ];
        EEscape {
            branch: branch.into(),
            blocks: chosen.iter().map(|c| c.0).collect(),
            values: chosen.into_iter().map(|(_, coord, e)| (coord, e)).collect(),
            point,
            checks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EEscape {
    /// which of `A`, `B` the point lies in
    pub branch: String,
    /// the blocks `n ∈ N` of the opponent
    pub blocks: Vec<u64>,
    pub values: Vec<(u64, Nat)>,
    pub point: Point,
    pub checks: Vec<Check>,
}

/// `m_k = T(T(k))` with `T(k) = k(k+1)/2`; `[m_k, m_{k+1})` is the union of
/// the triangular blocks `I_j` for `T(k) ≤ j < T(k+1)`.
pub fn super_start(k: u64) -> u64 {
    tri_start(tri_start(k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ESquare {
    pub p: Rule,
    /// `{x : ∀^∞k, x↾I_k ∈ {0̄, 1̄}}` over the triangular partition, weight `n²`
    pub a: BlockSystem,
    /// first `k` of the constructed range with `r(j) < 2^{j+1}` throughout
    pub k_start: u64,
    pub blocks: u64,
    /// `r(k) = Σ_{1≤j≤m_{k+2}} p(j)` for `k` in the constructed range
    #[serde(with = "crate::num::nat_vec")]
    pub r: Vec<Nat>,
}

pub fn e_square_vs_poly(p: &Rule, blocks: u64, ceiling: u64) -> Result<ESquare> {
    if !matches!(p, Rule::Polynomial { .. }) {
        return Err(Error::PreconditionFailed(format!("{p} is not a polynomial")));
    }
    let blocks = blocks.max(1);
    // cumulative sums of p, extended on demand
    let mut cum: Vec<Nat> = vec![Nat::zero()];
    let mut r_at = |k: u64| -> Result<Nat> {
        let m = super_start(k + 2);
        if m > ceiling {
            return Err(Error::SearchCeilingExceeded { what: "K with r(k) < 2^(k+1)".into(), ceiling });
        }
        while (cum.len() as u64) <= m {
            let j = cum.len() as u64;
            let next = cum.last().expect("nonempty") + p.eval(j);
            cum.push(next);
        }
        Ok(cum[m as usize].clone())
    };
    let mut k = 0u64;
    loop {
        let mut r = Vec::with_capacity(blocks as usize);
        let mut restart = None;
        for j in k..k + blocks {
            let v = r_at(j)?;
            if v >= Nat::one() << (j + 1) as usize {
                restart = Some(j + 1);
                break;
            }
            r.push(v);
        }
        if let Some(next) = restart {
            k = next;
            continue;
        }
        let h = ParamFunction::new(Rule::monomial(2))?;
        let a = BlockSystem {
            partition: IntervalPartition::Triangular,
            patterns: Patterns::Constants { values: vec![nat(0), nat(1)], filter: BlockFilter::All },
            quantifier: Quantifier::AllButFinitely,
            weight: Weight::Param { h },
        };
        return Ok(ESquare { p: p.clone(), a, k_start: k, blocks, r });
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ESquareEscape {
    /// `(k, σ_k)` with `σ_k` as one 0/1 choice per triangular block
    pub choices: Vec<(u64, Vec<u8>)>,
    pub point: Point,
    pub checks: Vec<Check>,
}

impl ESquare {
    fn k_end(&self) -> u64 {
        self.k_start + self.blocks
    }

    pub fn escape(&self, opponent: &PrefixSystem, ceiling: u64) -> Result<ESquareEscape> {
        let top = super_start(self.k_end() + 1);
        if top > ceiling {
            return Err(Error::SearchCeilingExceeded { what: format!("levels up to {top}"), ceiling });
        }
        let mut x = Word::zeros(super_start(self.k_end()));
        let mut choices = Vec::new();
        for k in self.k_start..self.k_end() {
            let (lo, hi) = (super_start(k), super_start(k + 1));
            let first = tri_start(k);
            let count = k + 1;
            if count > 120 {
                return Err(Error::SearchCeilingExceeded { what: format!("choices for super-block {k}"), ceiling });
            }
            let mut seen: HashSet<u128> = HashSet::new();
            for j in hi + 1..=super_start(k + 2) {
                for tau in opponent.levels.words(j, ceiling)? {
                    if let Some(mask) = block_mask(&tau.0[lo as usize..hi as usize], lo, first, count) {
                        seen.insert(mask);
                    }
                }
            }
            let mask =
                (0u128..1u128 << count).find(|m| !seen.contains(m)).ok_or(Error::CounterexampleSearchFailed { k })?;
            let bits: Vec<u8> = (0..count).map(|i| ((mask >> i) & 1) as u8).collect();
            for (i, bit) in bits.iter().enumerate() {
                let blk = first + i as u64;
                for c in tri_start(blk)..tri_start(blk + 1) {
                    x.0[c as usize] = nat(*bit as u64);
                }
            }
            choices.push((k, bits));
        }
        let point = Point::eventually_zero(x.clone());
        let full = point.prefix(top);
        let window = super_start(self.k_start + 1) + 1..=top;
        let caught: Vec<u64> =
            window.clone().filter(|&j| opponent.levels.contains(j, &Word(full.0[..j as usize].to_vec()))).collect();
        let over: Vec<u64> = (1..=top)
            .filter(|&j| opponent.levels.size(j, ceiling).map(|s| s > self.p.eval(j)).unwrap_or(true))
            .collect();
        let report = membership_report(SystemRef::Block(&self.a), &point, super_start(self.k_end()), 0);
        let checks = vec![
            Check::new(
                "opponent-within-p",
                over.is_empty(),
                format!("levels over budget {:?}", &over[..over.len().min(10)]),
            ),
            Check::new("block-hits-a", report.misses == 0, report.to_string()),
            Check::new(
                "escapes-opponent-on-window",
                caught.is_empty(),
                format!("levels {}..={}, caught at {caught:?}", window.start(), window.end()),
            ),
        ];
        Ok(ESquareEscape { choices, point, checks })
    }
}

/// The 0/1 choice per triangular block that `w` (covering `[lo, …)`) makes, if any.
fn block_mask(w: &[Nat], lo: u64, first: u64, count: u64) -> Option<u128> {
    let mut mask = 0u128;
    for i in 0..count {
        let blk = first + i;
        let (a, b) = (tri_start(blk) - lo, tri_start(blk + 1) - lo);
        let v = &w[a as usize];
        if *v > Nat::one() || w[a as usize..b as usize].iter().any(|u| u != v) {
            return None;
        }
        if v.is_one() {
            mask |= 1 << i;
        }
    }
    Some(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Levels;

    #[test]
    fn recursion_for_powers_of_two() {
        let h = ParamFunction::parse("exp 2").unwrap();
        let e = e_not_ideal(&h, 3, 1_000_000).unwrap();
        assert_eq!(e.trace[0].e_a, Some(nat(2)));
        assert_eq!(e.trace[1].a, 3);
        assert_eq!(e.trace[1].e_b, Some(nat(8)));
        assert_eq!(e.trace[2].b, 7);
        assert!(e.rescan());
        assert!(crate::witnesses::all_passed(&e.ledger_checks().unwrap()));
    }

    #[test]
    fn recursion_rejects_non_increasing() {
        let h = ParamFunction::parse("log2").unwrap();
        assert!(matches!(e_not_ideal(&h, 3, 1000), Err(Error::NotIncreasing(_))));
    }

    #[test]
    fn escape_from_empty_opponent() {
        let h = ParamFunction::parse("exp 2").unwrap();
        let e = e_not_ideal(&h, 3, 1_000_000).unwrap();
        let c = BlockSystem {
            partition: IntervalPartition::Constant { len: 4 },
            patterns: Patterns::explicit(Vec::<(u64, Vec<Word>)>::new()),
            quantifier: Quantifier::AllButFinitely,
            weight: Weight::Param { h },
        };
        let x = e.escape(&c, 1000).unwrap();
        assert_eq!(x.branch, "A");
        assert!(x.values.iter().all(|(_, v)| v.is_zero()));
        assert!(crate::witnesses::all_passed(&x.checks));
    }

    #[test]
    fn super_blocks() {
        assert_eq!((super_start(1), super_start(2), super_start(3)), (1, 6, 21));
    }

    #[test]
    fn empty_opponent_gets_zero_choices() {
        let e = e_square_vs_poly(&Rule::poly(&[0]), 3, 1_000_000).unwrap();
        assert_eq!(e.k_start, 0);
        let x = e.escape(&PrefixSystem::fin(Levels::empty()), 1_000_000).unwrap();
        assert!(x.choices.iter().all(|(_, bits)| bits.iter().all(|b| *b == 0)));
        assert!(crate::witnesses::all_passed(&x.checks));
    }
}
