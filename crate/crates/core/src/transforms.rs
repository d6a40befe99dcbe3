//! Conversions between covering systems. Each returns the target together
//! with an exact ledger comparison and a stage map that tests can replay.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{nat, ratio, Nat, Ratio};
use crate::param::{check_supermultiplicative, ParamFunction, Rule, TailJustification, WeightLedger};
use crate::systems::partition::{tri_start, IntervalPartition};
use crate::systems::{BlockSystem, Levels, MinusWitness, Patterns, Point, PrefixSystem, Quantifier, Weight, Word};

/// A stage predicate on points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Stage {
    /// `x↾n ∈ S_n` in prefix system `input`
    Level { input: usize, n: u64 },
    /// `x↾I_n ∈ J_n` in block system `input`, or `x↾I_n = x_F↾I_n` for a 𝓜₋ witness
    Block { input: usize, n: u64 },
    /// `x↾I_i ∈ J_i` for every `from ≤ i ≤ to`
    BlockRange { input: usize, from: u64, to: u64 },
    /// `σ_index ⊆ x`
    Cover { index: usize },
    /// `x(n) = pattern(n)`
    Agree { n: u64 },
}

/// One side of a stage map.
#[derive(Clone, Copy, Debug)]
pub enum Side<'a> {
    Prefix(&'a [PrefixSystem]),
    Block(&'a [BlockSystem]),
    Minus(&'a MinusWitness),
    Cover(&'a [Word]),
    Pattern(&'a Point),
}

impl Side<'_> {
    pub fn fires(&self, stage: &Stage, x: &Point) -> Result<bool> {
        let mismatch = || Error::PreconditionFailed(format!("stage {stage:?} does not apply to {self:?}"));
        Ok(match (self, *stage) {
            (Side::Prefix(v), Stage::Level { input, n }) => v.get(input).ok_or_else(mismatch)?.hit(n, x),
            (Side::Block(v), Stage::Block { input, n }) => v.get(input).ok_or_else(mismatch)?.hit(n, x),
            (Side::Block(v), Stage::BlockRange { input, from, to }) => {
                let b = v.get(input).ok_or_else(mismatch)?;
                (from..=to).all(|i| b.hit(i, x))
            }
            (Side::Minus(m), Stage::Block { n, .. }) => m.matches(n, x),
            (Side::Cover(ws), Stage::Cover { index }) => {
                let w = ws.get(index).ok_or_else(mismatch)?;
                x.prefix(w.len()) == *w
            }
            (Side::Pattern(p), Stage::Agree { n }) => x.at(n) == p.at(n),
            _ => return Err(mismatch()),
        })
    }
}

/// Stage map `source ⇒ target`; with `biconditional` the converse holds too.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCertificate {
    pub transform: String,
    pub map: Vec<(Stage, Stage)>,
    pub biconditional: bool,
}

impl CoverageCertificate {
    fn new(transform: &str, map: Vec<(Stage, Stage)>) -> Self {
        CoverageCertificate { transform: transform.into(), map, biconditional: false }
    }

    /// Pairs of the map that `x` violates.
    pub fn violations(&self, source: &Side<'_>, target: &Side<'_>, x: &Point) -> Result<Vec<(Stage, Stage)>> {
        let mut out = Vec::new();
        for (s, t) in &self.map {
            let (a, b) = (source.fires(s, x)?, target.fires(t, x)?);
            if (a && !b) || (self.biconditional && b && !a) {
                out.push((*s, *t));
            }
        }
        Ok(out)
    }
}

/// `lhs ≤ rhs` for one stage of a ledger comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCheck {
    pub stage: u64,
    #[serde(with = "crate::num::ratio_pair")]
    pub lhs: Ratio,
    #[serde(with = "crate::num::ratio_pair")]
    pub rhs: Ratio,
}

/// `target ≤ constant · source`, together with per-stage inequalities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerComparison {
    pub source: WeightLedger,
    pub target: WeightLedger,
    #[serde(with = "crate::num::ratio_pair")]
    pub constant: Ratio,
    pub terms: Vec<TermCheck>,
}

impl LedgerComparison {
    pub fn holds(&self) -> bool {
        self.source.recheck()
            && self.target.recheck()
            && self.target.partial_sum <= &self.constant * &self.source.partial_sum
            && self.terms.iter().all(|t| t.lhs <= t.rhs)
    }

    fn checked(self) -> Result<Self> {
        match self.terms.iter().find(|t| t.lhs > t.rhs) {
            Some(t) => Err(Error::VerificationFailed(format!("ledger inequality fails at stage {}", t.stage))),
            None if !self.holds() => Err(Error::VerificationFailed("ledger totals do not compare".into())),
            None => Ok(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transformed<T> {
    pub target: T,
    /// a parameter function produced by the transform
    pub h: Option<ParamFunction>,
    pub comparison: Option<LedgerComparison>,
    pub certificate: CoverageCertificate,
}

fn weight_term(size: &Nat, w: &Nat, level: u64) -> Result<Ratio> {
    if size.is_zero() {
        Ok(Ratio::zero())
    } else if w.is_zero() {
        Err(Error::DivisionByZeroWeight { level, size: size.to_string() })
    } else {
        Ok(ratio(size, w))
    }
}

fn need_h(w: &Weight) -> Result<&ParamFunction> {
    w.param().ok_or_else(|| Error::PreconditionFailed("the system carries the Fin marker, not a weight".into()))
}

fn need_supermultiplicative(h: &ParamFunction) -> Result<()> {
    if check_supermultiplicative(h.rule(), 2).is_certificate() {
        Ok(())
    } else {
        Err(Error::MissingSupermultiplicativeCertificate)
    }
}

/// `S_n = {σ in the list : |σ| = n}`.
pub fn cover_to_levels(sigmas: &[Word], h: &ParamFunction) -> Result<Transformed<PrefixSystem>> {
    let source_terms =
        sigmas.iter().map(|s| weight_term(&Nat::one(), &h.eval(s.len()), s.len())).collect::<Result<Vec<_>>>()?;
    let levels = Levels::explicit(sigmas.iter().map(|s| (s.len(), vec![s.clone()])));
    let max = sigmas.iter().map(Word::len).max().unwrap_or(0);
    let target_terms =
        (0..=max).map(|n| weight_term(&levels.size(n, u64::MAX)?, &h.eval(n), n)).collect::<Result<Vec<_>>>()?;
    let terms = (0..=max)
        .map(|n| TermCheck {
            stage: n,
            lhs: target_terms[n as usize].clone(),
            rhs: sigmas.iter().zip(&source_terms).filter(|(s, _)| s.len() == n).map(|(_, t)| t.clone()).sum(),
        })
        .collect();
    let comparison = LedgerComparison {
        source: WeightLedger::new(0, source_terms).with_tail(Ratio::zero(), TailJustification::Finite),
        target: WeightLedger::new(0, target_terms).with_tail(Ratio::zero(), TailJustification::Finite),
        constant: Ratio::one(),
        terms,
    }
    .checked()?;
    let map = sigmas
        .iter()
        .enumerate()
        .map(|(i, s)| (Stage::Cover { index: i }, Stage::Level { input: 0, n: s.len() }))
        .collect();
    Ok(Transformed {
        target: PrefixSystem::with_h(h.clone(), levels),
        h: None,
        comparison: Some(comparison),
        certificate: CoverageCertificate::new("cover-to-levels", map),
    })
}

/// The ledger `|S_n|/h(n)` for `1 ≤ n ≤ depth` with a certified tail, for the
/// level shapes that carry one.
pub fn certified_ledger(system: &PrefixSystem, depth: u64, ceiling: u64) -> Result<WeightLedger> {
    let h = need_h(&system.weight)?;
    match &system.levels {
        Levels::Explicit { levels } => {
            let last = levels.keys().next_back().copied().unwrap_or(0).max(depth);
            Ok(system.ledger(last, ceiling)?.with_tail(Ratio::zero(), TailJustification::Finite))
        }
        Levels::Zeros { .. } => match h.rule() {
            Rule::Exponential { base } if *base >= nat(2) => {
                // Σ_{n>N} b^{-n} = 1/((b−1)·b^N)
                let tail = ratio(&Nat::one(), &((base - 1u32) * num_traits::pow(base.clone(), depth as usize)));
                Ok(system.ledger(depth, ceiling)?.with_tail(tail, TailJustification::Geometric))
            }
            _ => Err(Error::NoCertifiedTail),
        },
        Levels::Rationals(r) => {
            // h(L_m) ≥ h(k_m) once L_m = h(k_m) ≥ k_m and h is nondecreasing, so the
            // doubling tail of Σ 1/h(k_m) bounds the remaining terms
            if !(h.rule().is_nondecreasing() && h.rule().dominates_identity()) {
                return Err(Error::NoCertifiedTail);
            }
            let ledger = system.ledger(depth, ceiling)?;
            let cap = nat(depth);
            let mut last = None;
            let mut m = 0;
            while r.length_upto(m, &cap).is_some() {
                last = Some(r.sparse.index(m).ok_or(Error::NoCertifiedTail)?);
                m += 1;
            }
            let k = match last {
                Some(k) => k,
                None => r.sparse.index(0).ok_or(Error::NoCertifiedTail)?,
            };
            let first_missing = if last.is_some() { h.eval(k) * nat(2) } else { h.eval(k) };
            // Σ_{m' ≥ m} 1/h(k_{m'}) ≤ 2/h(k_m) ≤ 2/first_missing
            Ok(ledger.with_tail(ratio(&nat(2), &first_missing), TailJustification::Doubling))
        }
        _ => Err(Error::NoCertifiedTail),
    }
}

/// Output of [`levels_to_cover`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverList {
    /// levels `n > cut` are emitted
    pub cut: u64,
    /// emitted levels stop here; beyond it the cover continues with the same rule
    pub emitted_through: u64,
    pub words: Vec<Word>,
    /// `Σ_{cut<n≤emitted_through} |S_n|/h(n) + tail`, strictly below `eps`
    #[serde(with = "crate::num::ratio_pair")]
    pub bound: Ratio,
    pub continues: bool,
}

/// All words of the levels past the least cut whose tail weight is below `eps`.
pub fn levels_to_cover(system: &PrefixSystem, eps: &Ratio, depth: u64, ceiling: u64) -> Result<CoverList> {
    if *eps <= Ratio::zero() {
        return Err(Error::PreconditionFailed("eps must be positive".into()));
    }
    let ledger = certified_ledger(system, depth, ceiling)?;
    let tail = ledger.tail.as_ref().map(|t| t.bound.clone()).ok_or(Error::NoCertifiedTail)?;
    let last = ledger.start + ledger.terms.len() as u64 - 1;
    // suffix[i] = Σ_{j ≥ i} terms[j] + tail
    let mut suffix = vec![tail.clone(); ledger.terms.len() + 1];
    for i in (0..ledger.terms.len()).rev() {
        suffix[i] = &suffix[i + 1] + &ledger.terms[i];
    }
    // cut N ≥ 0 keeps levels > N, i.e. terms from index N (levels start at 1)
    let cut = (0..=ledger.terms.len())
        .find(|&i| suffix[i] < *eps)
        .ok_or_else(|| Error::SearchCeilingExceeded { what: "cut with tail below eps".into(), ceiling: depth })?;
    let mut words = Vec::new();
    for n in cut as u64 + 1..=last {
        words.extend(system.levels.words(n, ceiling)?);
    }
    Ok(CoverList {
        cut: cut as u64,
        emitted_through: last,
        words,
        bound: suffix[cut].clone(),
        continues: !tail.is_zero(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum NormalizeMode {
    /// empty an initial segment so that every ratio is below `c`
    ToC {
        #[serde(with = "crate::num::ratio_pair")]
        c: Ratio,
    },
    /// merge `k+1` consecutive blocks into block `k`, from ratios at most `c`
    ToSummable {
        #[serde(with = "crate::num::ratio_pair")]
        c: Ratio,
    },
}

fn block_ratios(system: &BlockSystem, blocks: u64) -> Result<Vec<Ratio>> {
    let h = need_h(&system.weight)?;
    (0..blocks).map(|n| weight_term(&system.size(n), &h.eval(system.partition.len(n)), n)).collect()
}

/// Rewrites a `∀^∞` block system between the summable and the ratio-below-`c`
/// forms. `blocks` is the number of source blocks (to-c) or merged blocks
/// (to-summable) that are checked.
pub fn normalize_c(system: &BlockSystem, mode: &NormalizeMode, blocks: u64) -> Result<Transformed<BlockSystem>> {
    if system.quantifier != Quantifier::AllButFinitely {
        return Err(Error::PreconditionFailed("normalization applies to ∀^∞ block systems".into()));
    }
    let h = need_h(&system.weight)?;
    match mode {
        NormalizeMode::ToC { c } => {
            if *c <= Ratio::zero() {
                return Err(Error::PreconditionFailed("c must be positive".into()));
            }
            let ratios = block_ratios(system, blocks)?;
            let through = ratios.iter().rposition(|r| r >= c).map(|i| i as u64);
            let target = match through {
                None => system.clone(),
                Some(t) => BlockSystem {
                    patterns: Patterns::Emptied { through: t, inner: Box::new(system.patterns.clone()) },
                    ..system.clone()
                },
            };
            let after = block_ratios(&target, blocks)?;
            if let Some((n, r)) = after.iter().enumerate().find(|(_, r)| *r >= c) {
                return Err(Error::RatioNotBelowC {
                    block: n as u64,
                    ratio: crate::num::ratio_to_string(r),
                    c: crate::num::ratio_to_string(c),
                });
            }
            let terms = after
                .iter()
                .zip(&ratios)
                .enumerate()
                .map(|(n, (a, b))| TermCheck { stage: n as u64, lhs: a.clone(), rhs: b.clone() })
                .collect();
            let start = through.map_or(0, |t| t + 1);
            let map = (start..blocks).map(|n| (Stage::Block { input: 0, n }, Stage::Block { input: 0, n })).collect();
            Ok(Transformed {
                target,
                h: None,
                comparison: Some(
                    LedgerComparison {
                        source: WeightLedger::new(0, ratios),
                        target: WeightLedger::new(0, after),
                        constant: Ratio::one(),
                        terms,
                    }
                    .checked()?,
                ),
                certificate: CoverageCertificate::new("normalize-to-c", map),
            })
        }
        NormalizeMode::ToSummable { c } => {
            if *c <= Ratio::zero() || *c >= Ratio::one() {
                return Err(Error::PreconditionFailed("c must lie in (0, 1)".into()));
            }
            need_supermultiplicative(h)?;
            let inner_blocks = tri_start(blocks);
            let ratios = block_ratios(system, inner_blocks)?;
            if let Some((n, r)) = ratios.iter().enumerate().find(|(_, r)| *r > c) {
                return Err(Error::RatioNotBelowC {
                    block: n as u64,
                    ratio: crate::num::ratio_to_string(r),
                    c: crate::num::ratio_to_string(c),
                });
            }
            let target = BlockSystem {
                partition: IntervalPartition::Grouped { inner: Box::new(system.partition.clone()) },
                patterns: Patterns::Grouped {
                    inner: Box::new(system.patterns.clone()),
                    partition: system.partition.clone(),
                },
                quantifier: Quantifier::AllButFinitely,
                weight: system.weight.clone(),
            };
            let merged = block_ratios(&target, blocks)?;
            let mut terms = Vec::new();
            let mut ck = Ratio::one();
            for (k, r) in merged.iter().enumerate() {
                terms.push(TermCheck { stage: k as u64, lhs: r.clone(), rhs: ck.clone() });
                ck *= c;
            }
            // Σ_{k ≥ K} c^k = c^K/(1−c)
            let geometric = WeightLedger::new(0, terms.iter().map(|t| t.rhs.clone()).collect());
            let tail = &ck / (Ratio::one() - c);
            let map = (0..blocks)
                .map(|k| {
                    let (from, to) = (tri_start(k), tri_start(k + 1) - 1);
                    (Stage::BlockRange { input: 0, from, to }, Stage::Block { input: 0, n: k })
                })
                .collect();
            Ok(Transformed {
                target,
                h: None,
                comparison: Some(
                    LedgerComparison {
                        source: geometric.with_tail(tail.clone(), TailJustification::Geometric),
                        target: WeightLedger::new(0, merged).with_tail(tail, TailJustification::Geometric),
                        constant: Ratio::one(),
                        terms,
                    }
                    .checked()?,
                ),
                certificate: CoverageCertificate::new("normalize-to-summable", map),
            })
        }
    }
}

/// Cumulative products `J_0 × … × J_k` at lengths `b_{k+1}` for `k < blocks`.
fn cumulative_products(system: &BlockSystem, blocks: u64, ceiling: u64) -> Result<BTreeMap<u64, Vec<Word>>> {
    let mut out = BTreeMap::new();
    let mut current = vec![Word::empty()];
    let mut last_len = 0;
    for k in 0..blocks {
        let len = system.partition.end(k);
        assert!(len > last_len, "cumulative lengths must increase");
        last_len = len;
        let size = nat(current.len() as u64) * system.size(k);
        if size > nat(ceiling) {
            return Err(Error::LedgerOverflowCeiling { what: format!("product through block {k}"), ceiling });
        }
        let pieces = system.words(k, ceiling)?;
        current = current.iter().flat_map(|w| pieces.iter().map(move |p| w.concat(p))).collect();
        if current.is_empty() {
            break;
        }
        out.insert(len, current.clone());
    }
    Ok(out)
}

fn product_map(blocks: u64, partition: &IntervalPartition) -> Vec<(Stage, Stage)> {
    (0..blocks)
        .map(|k| (Stage::BlockRange { input: 0, from: 0, to: k }, Stage::Level { input: 0, n: partition.end(k) }))
        .collect()
}

/// `S_n` = concatenations `J_0 × … × J_k` at `n = Σ_{i≤k} |I_i|`, `∅` elsewhere.
pub fn e_to_n(system: &BlockSystem, blocks: u64, ceiling: u64) -> Result<Transformed<PrefixSystem>> {
    let h = need_h(&system.weight)?;
    need_supermultiplicative(h)?;
    let ratios = block_ratios(system, blocks)?;
    let constant = ratios.iter().filter(|r| **r > Ratio::one()).fold(Ratio::one(), |acc, r| acc * r);
    let levels = cumulative_products(system, blocks, ceiling)?;
    let last = system.partition.end(blocks.saturating_sub(1)).max(1);
    let mut target_terms = vec![Ratio::zero(); last as usize];
    let mut terms = Vec::new();
    for k in 0..blocks {
        let n = system.partition.end(k);
        let size = nat(levels.get(&n).map_or(0, |v| v.len() as u64));
        let t = weight_term(&size, &h.eval(n), n)?;
        target_terms[n as usize - 1] = t.clone();
        terms.push(TermCheck { stage: n, lhs: t, rhs: &constant * &ratios[k as usize] });
    }
    let comparison = LedgerComparison {
        source: WeightLedger::new(0, ratios),
        target: WeightLedger::new(1, target_terms),
        constant,
        terms,
    }
    .checked()?;
    Ok(Transformed {
        target: PrefixSystem::with_h(h.clone(), Levels::Explicit { levels }),
        h: None,
        comparison: Some(comparison),
        certificate: CoverageCertificate::new("e-to-n", product_map(blocks, &system.partition)),
    })
}

/// [`e_to_n`] without weights.
pub fn fin_e_to_fin_n(system: &BlockSystem, blocks: u64, ceiling: u64) -> Result<Transformed<PrefixSystem>> {
    let levels = cumulative_products(system, blocks, ceiling)?;
    Ok(Transformed {
        target: PrefixSystem::fin(Levels::Explicit { levels }),
        h: None,
        comparison: None,
        certificate: CoverageCertificate::new("fin-e-to-fin-n", product_map(blocks, &system.partition)),
    })
}

/// Unit intervals with `J_n = {⟨σ(n)⟩ : σ ∈ S_{n+1}}` for `n < depth`.
pub fn fin_n_to_fin_s(system: &PrefixSystem, depth: u64, ceiling: u64) -> Result<Transformed<BlockSystem>> {
    let mut blocks = Vec::new();
    for n in 0..depth {
        let ws: Vec<Word> =
            system.levels.words(n + 1, ceiling)?.into_iter().map(|w| Word(vec![w.0[n as usize].clone()])).collect();
        blocks.push((n, ws));
    }
    let map = (0..depth).map(|n| (Stage::Level { input: 0, n: n + 1 }, Stage::Block { input: 0, n })).collect();
    Ok(Transformed {
        target: BlockSystem {
            partition: IntervalPartition::unit(),
            patterns: Patterns::explicit(blocks),
            quantifier: Quantifier::Infinitely,
            weight: Weight::Fin,
        },
        h: None,
        comparison: None,
        certificate: CoverageCertificate::new("fin-n-to-fin-s", map),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "kebab-case")]
pub enum Merged {
    N { system: PrefixSystem },
    S { system: BlockSystem },
}

/// Level `n` of the merge is `⋃_{k ≤ n} S^k_n`.
pub fn fin_sigma_merge_n(systems: &[PrefixSystem], depth: u64) -> Transformed<PrefixSystem> {
    let parts = systems.iter().enumerate().map(|(k, s)| (k as u64, s.levels.clone())).collect();
    let mut map = Vec::new();
    for k in 0..systems.len() {
        for n in k as u64..=depth {
            map.push((Stage::Level { input: k, n }, Stage::Level { input: 0, n }));
        }
    }
    Transformed {
        target: PrefixSystem::fin(Levels::Union { parts }),
        h: None,
        comparison: None,
        certificate: CoverageCertificate::new("fin-sigma-merge-n", map),
    }
}

/// Block `n` of the merge is `⋃_{k ≤ n} J^k_n`, over unit intervals.
pub fn fin_sigma_merge_s(systems: &[BlockSystem], depth: u64, ceiling: u64) -> Result<Transformed<BlockSystem>> {
    if systems.iter().any(|s| s.partition != IntervalPartition::unit()) {
        return Err(Error::PreconditionFailed("S-style merge needs unit intervals".into()));
    }
    let mut blocks = Vec::new();
    let mut map = Vec::new();
    for n in 0..depth {
        let mut ws = Vec::new();
        for (k, s) in systems.iter().enumerate().take(n as usize + 1) {
            ws.extend(s.words(n, ceiling)?);
            map.push((Stage::Block { input: k, n }, Stage::Block { input: 0, n }));
        }
        blocks.push((n, ws));
    }
    Ok(Transformed {
        target: BlockSystem {
            partition: IntervalPartition::unit(),
            patterns: Patterns::explicit(blocks),
            quantifier: Quantifier::Infinitely,
            weight: Weight::Fin,
        },
        h: None,
        comparison: None,
        certificate: CoverageCertificate::new("fin-sigma-merge-s", map),
    })
}

/// `h(n) = |S_n|·2ⁿ`, with `h(n) = 2ⁿ` on empty levels. Level sizes must have
/// a closed form beyond `depth`: explicit levels ending by `depth`, or zero words.
pub fn fin_to_param(system: &PrefixSystem, depth: u64, ceiling: u64) -> Result<Transformed<PrefixSystem>> {
    let closed = match &system.levels {
        Levels::Explicit { levels } => levels.keys().next_back().is_none_or(|&l| l <= depth),
        Levels::Zeros { .. } => true,
        _ => false,
    };
    if !closed {
        return Err(Error::PreconditionFailed("level sizes beyond the depth have no closed form".into()));
    }
    let sizes = system.sizes(depth, ceiling)?;
    let prefix: Vec<Nat> = sizes
        .iter()
        .enumerate()
        .map(|(n, s)| {
            let p = Nat::one() << n;
            if s.is_zero() {
                p
            } else {
                s * p
            }
        })
        .collect();
    // beyond the depth sizes are 0 or 1, so h(n) = 2ⁿ there
    let h = ParamFunction::new(Rule::table(prefix, Rule::exp(2)))?;
    let target = PrefixSystem::with_h(h.clone(), system.levels.clone());
    let ledger = target.ledger(depth, ceiling)?;
    let tail = crate::num::inv_pow2(depth);
    let terms = (1..=depth)
        .map(|n| TermCheck {
            stage: n,
            lhs: ledger.term(n).cloned().unwrap_or_default(),
            rhs: if sizes[n as usize].is_zero() { Ratio::zero() } else { crate::num::inv_pow2(n) },
        })
        .collect();
    let bound = WeightLedger::new(1, (1..=depth).map(crate::num::inv_pow2).collect())
        .with_tail(tail.clone(), TailJustification::Geometric);
    let comparison = LedgerComparison {
        source: bound,
        target: ledger.with_tail(tail, TailJustification::Geometric),
        constant: Ratio::one(),
        terms,
    }
    .checked()?;
    let map = (0..=depth).map(|n| (Stage::Level { input: 0, n }, Stage::Level { input: 0, n })).collect();
    Ok(Transformed {
        target,
        h: Some(h),
        comparison: Some(comparison),
        certificate: CoverageCertificate { biconditional: true, ..CoverageCertificate::new("fin-to-param", map) },
    })
}

/// `J_n = ⋃_{k∈I_{n+1}} {σ↾I_n : σ ∈ S_k}` on triangular intervals, weighed by
/// `block_h(|I_n|) = block_h(n+1)`. Requires `block_h(n+1) ≥ h(k)` on `I_{n+1}`.
fn regroup(
    system: &PrefixSystem,
    block_h: &ParamFunction,
    blocks: u64,
    ceiling: u64,
    name: &str,
) -> Result<Transformed<BlockSystem>> {
    let h = need_h(&system.weight)?;
    let part = IntervalPartition::Triangular;
    let mut patterns = Vec::new();
    let mut source_terms = Vec::new();
    let mut target_terms = Vec::new();
    let mut terms = Vec::new();
    let mut map = Vec::new();
    for n in 0..blocks {
        let (a, b) = (part.start(n), part.end(n));
        let mut js = Vec::new();
        let mut rhs = Ratio::zero();
        for k in part.start(n + 1)..part.end(n + 1) {
            let ws = system.levels.words(k, ceiling)?;
            let t = weight_term(&nat(ws.len() as u64), &h.eval(k), k)?;
            rhs += &t;
            source_terms.push((k, t));
            for w in ws {
                js.push(w.restrict(a, b)?);
            }
            map.push((Stage::Level { input: 0, n: k }, Stage::Block { input: 0, n }));
        }
        js.sort();
        js.dedup();
        let lhs = weight_term(&nat(js.len() as u64), &block_h.eval(n + 1), n)?;
        target_terms.push(lhs.clone());
        terms.push(TermCheck { stage: n, lhs, rhs });
        patterns.push((n, js));
    }
    let first = source_terms.first().map_or(1, |(k, _)| *k);
    let comparison = LedgerComparison {
        source: WeightLedger::new(first, source_terms.into_iter().map(|(_, t)| t).collect()),
        target: WeightLedger::new(0, target_terms),
        constant: Ratio::one(),
        terms,
    }
    .checked()?;
    Ok(Transformed {
        target: BlockSystem {
            partition: part,
            patterns: Patterns::explicit(patterns),
            quantifier: Quantifier::Infinitely,
            weight: Weight::Param { h: block_h.clone() },
        },
        h: Some(block_h.clone()),
        comparison: Some(comparison),
        certificate: CoverageCertificate::new(name, map),
    })
}

/// `h′(n) = max{h(k) : k ∈ I_n}` on triangular intervals.
pub fn block_max(h: &ParamFunction) -> Result<ParamFunction> {
    ParamFunction::new(Rule::BlockMax { inner: Box::new(h.rule().clone()) })
}

/// Regroups a weighted level system into a `∃^∞` block system weighed by `h′`.
pub fn regroup_n_to_s(system: &PrefixSystem, blocks: u64, ceiling: u64) -> Result<Transformed<BlockSystem>> {
    let h_prime = block_max(need_h(&system.weight)?)?;
    regroup(system, &h_prime, blocks, ceiling, "regroup-n-to-s")
}

/// `h′(k) = h(n)` for `k ∈ I_n` (triangular).
pub fn refit_param(h: &ParamFunction) -> Result<ParamFunction> {
    ParamFunction::new(Rule::Refit { inner: Box::new(h.rule().clone()) })
}

/// Regroups a system weighed by `refit_param(h)` into a block system weighed by `h`.
pub fn refit_regroup(
    system: &PrefixSystem,
    h: &ParamFunction,
    blocks: u64,
    ceiling: u64,
) -> Result<Transformed<BlockSystem>> {
    let expected = refit_param(h)?;
    if need_h(&system.weight)? != &expected {
        return Err(Error::PreconditionFailed("the system is not weighed by the refitted parameter".into()));
    }
    regroup(system, h, blocks, ceiling, "refit-regroup")
}

/// `K_x = {y : ∀^∞n, y(n) ≠ x(n)}` as the 𝓜₋ witness with pattern `x` on unit intervals.
pub fn ioe_to_minus(x: &Point, depth: u64) -> Transformed<MinusWitness> {
    let map = (0..depth).map(|n| (Stage::Agree { n }, Stage::Block { input: 0, n })).collect();
    Transformed {
        target: MinusWitness { pattern: x.clone(), partition: IntervalPartition::unit() },
        h: None,
        comparison: None,
        certificate: CoverageCertificate { biconditional: true, ..CoverageCertificate::new("ioe-to-minus", map) },
    }
}

/// Outcome of the check `max{h(k) : k ∈ I_n} ≤ 2·log n` for `h = ⌊log⌋`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRemark {
    pub base: String,
    pub from: u64,
    pub to: u64,
    /// `n` in range with `h′(n) > 2 log n`
    pub failures: Vec<u64>,
    /// `n ≥ 2` below `from` where the intermediate bound `(n+1)(n+2)/2 ≤ n²` is false
    pub intermediate_false_at: Vec<u64>,
    /// `n ≥ 2` below `from` where `h′(n) ≤ 2 log n` holds anyway
    pub holds_below_from: Vec<u64>,
}

impl LogRemark {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `h′(n) ≤ 2·log n` exactly as `h′(n) ≤ ⌊log n²⌋` (both sides are
/// integers) for `from ≤ n ≤ to`, where `h′` is the triangular block maximum of
/// `h = ⌊log⌋`.
pub fn log_remark(h: &Rule, from: u64, to: u64) -> Result<LogRemark> {
    let base = match h {
        Rule::FloorLog2 => "2",
        Rule::FloorLn => "e",
        _ => return Err(Error::PreconditionFailed("the remark concerns floor logarithms".into())),
    };
    let h_prime = Rule::BlockMax { inner: Box::new(h.clone()) };
    let ok = |n: u64| h_prime.eval(n) <= h.eval(n.checked_mul(n).expect("n² fits in u64"));
    let failures = (from.max(1)..=to).filter(|&n| !ok(n)).collect();
    let intermediate_false_at = (2..from).filter(|&n| (n + 1) * (n + 2) / 2 > n * n).collect();
    let holds_below_from = (2..from).filter(|&n| ok(n)).collect();
    Ok(LogRemark { base: base.into(), from, to, failures, intermediate_false_at, holds_below_from })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio_u;

    fn two() -> ParamFunction {
        ParamFunction::new(Rule::exp(2)).unwrap()
    }

    fn w(v: &[u64]) -> Word {
        Word::from_u64s(v)
    }

    fn all_points(alphabet: u64, len: u64) -> Vec<Point> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            out = out.iter().flat_map(|p| (0..alphabet).map(move |v| p.extend_padded(nat(v), p.len() + 1))).collect();
        }
        out.into_iter().map(Point::eventually_zero).collect()
    }

    #[test]
    fn cover_to_levels_examples() {
        let t = cover_to_levels(&[w(&[0]), w(&[1, 1])], &two()).unwrap();
        assert_eq!(t.comparison.as_ref().unwrap().target.partial_sum, ratio_u(3, 4));
        assert!(t.target.levels.contains(1, &w(&[0])) && t.target.levels.contains(2, &w(&[1, 1])));
        let t = cover_to_levels(&[], &two()).unwrap();
        assert!(t.comparison.unwrap().target.partial_sum.is_zero());
        let t = cover_to_levels(&[w(&[0, 0, 0]), w(&[0, 0, 1])], &two()).unwrap();
        assert_eq!(t.target.levels.size(3, 10).unwrap(), nat(2));
        assert_eq!(t.comparison.unwrap().target.partial_sum, ratio_u(2, 8));
    }

    #[test]
    fn levels_to_cover_examples() {
        let zeros = PrefixSystem::with_h(two(), Levels::Zeros { from: 0 });
        let c = levels_to_cover(&zeros, &ratio_u(1, 4), 10, 100).unwrap();
        assert_eq!(c.cut, 3);
        assert_eq!(c.words.first(), Some(&Word::zeros(4)));
        assert_eq!(c.bound, ratio_u(1, 8));
        assert!(c.continues);
        let empty = PrefixSystem::with_h(two(), Levels::empty());
        assert!(levels_to_cover(&empty, &ratio_u(1, 4), 5, 100).unwrap().words.is_empty());
        let one = PrefixSystem::with_h(two(), Levels::explicit([(5, vec![Word::zeros(5)])]));
        let c = levels_to_cover(&one, &ratio_u(1, 16), 0, 100).unwrap();
        assert!(c.cut < 5);
        assert_eq!(c.words, vec![Word::zeros(5)]);
        let boxed = PrefixSystem::with_h(two(), Levels::Box { bound: Rule::constant(1) });
        assert!(matches!(levels_to_cover(&boxed, &ratio_u(1, 4), 5, 100), Err(Error::NoCertifiedTail)));
    }

    fn explicit_blocks(part: IntervalPartition, blocks: Vec<(u64, Vec<Word>)>) -> BlockSystem {
        BlockSystem {
            partition: part,
            patterns: Patterns::explicit(blocks),
            quantifier: Quantifier::AllButFinitely,
            weight: Weight::Param { h: two() },
        }
    }

    #[test]
    fn e_to_n_example() {
        let sys = explicit_blocks(
            IntervalPartition::Constant { len: 2 },
            vec![(0, vec![w(&[0, 0]), w(&[0, 1])]), (1, vec![w(&[0, 0])])],
        );
        let t = e_to_n(&sys, 2, 100).unwrap();
        assert_eq!(t.target.levels.size(2, 10).unwrap(), nat(2));
        assert_eq!(t.target.levels.words(4, 10).unwrap(), vec![w(&[0, 0, 0, 0]), w(&[0, 1, 0, 0])]);
        assert_eq!(t.comparison.as_ref().unwrap().target.partial_sum, ratio_u(5, 8));
        for x in all_points(2, 4) {
            assert!(t
                .certificate
                .violations(
                    &Side::Block(std::slice::from_ref(&sys)),
                    &Side::Prefix(std::slice::from_ref(&t.target)),
                    &x
                )
                .unwrap()
                .is_empty());
        }
        let single = explicit_blocks(IntervalPartition::Constant { len: 3 }, vec![(0, vec![w(&[1, 2, 3])])]);
        let t = e_to_n(&single, 1, 100).unwrap();
        assert_eq!(t.comparison.unwrap().target.partial_sum, ratio_u(1, 8));
        let sq = BlockSystem { weight: Weight::Param { h: ParamFunction::new(Rule::monomial(2)).unwrap() }, ..single };
        assert!(matches!(e_to_n(&sq, 1, 100), Err(Error::MissingSupermultiplicativeCertificate)));
    }

    #[test]
    fn normalize_examples() {
        let unit = IntervalPartition::unit();
        // ratios 1/2, 1/4, 1/8 with h = 2ⁿ over blocks of lengths 1, 2, 3
        let part = IntervalPartition::from_lengths(&[1, 2, 3]);
        let sys = explicit_blocks(part, vec![(0, vec![w(&[0])]), (1, vec![w(&[0, 0])]), (2, vec![w(&[0, 0, 0])])]);
        let t = normalize_c(&sys, &NormalizeMode::ToC { c: ratio_u(1, 3) }, 3).unwrap();
        let cmp = t.comparison.unwrap();
        assert_eq!(cmp.target.terms, vec![ratio_u(0, 1), ratio_u(1, 4), ratio_u(1, 8)]);

        let halves: Vec<(u64, Vec<Word>)> = (0..10).map(|n| (n, vec![w(&[n % 3])])).collect();
        let sys = explicit_blocks(unit.clone(), halves);
        let t = normalize_c(&sys, &NormalizeMode::ToSummable { c: ratio_u(1, 2) }, 4).unwrap();
        let cmp = t.comparison.unwrap();
        for k in 1..4u64 {
            assert!(cmp.target.terms[k as usize] <= crate::num::inv_pow2(k));
        }
        let empty = explicit_blocks(unit, vec![]);
        for mode in [NormalizeMode::ToC { c: ratio_u(1, 2) }, NormalizeMode::ToSummable { c: ratio_u(1, 2) }] {
            let t = normalize_c(&empty, &mode, 3).unwrap();
            assert!((0..3).all(|n| t.target.size(n).is_zero()));
        }
    }

    #[test]
    fn fin_transforms() {
        let s = PrefixSystem::fin(Levels::explicit([(2, vec![w(&[3, 5]), w(&[3, 6])]), (1, vec![w(&[9])])]));
        let t = fin_n_to_fin_s(&s, 3, 100).unwrap();
        assert_eq!(t.target.words(1, 100).unwrap(), vec![w(&[5]), w(&[6])]);
        assert_eq!(t.target.words(0, 100).unwrap(), vec![w(&[9])]);
        for x in all_points(3, 3) {
            assert!(t
                .certificate
                .violations(&Side::Prefix(std::slice::from_ref(&s)), &Side::Block(std::slice::from_ref(&t.target)), &x)
                .unwrap()
                .is_empty());
        }
        let parts = [
            PrefixSystem::fin(Levels::explicit([(5, vec![Word::zeros(5)])])),
            PrefixSystem::fin(Levels::explicit([(5, vec![w(&[1, 0, 0, 0, 0])])])),
            PrefixSystem::fin(Levels::Zeros { from: 7 }),
        ];
        let m = fin_sigma_merge_n(&parts, 8);
        assert_eq!(m.target.levels.size(5, 100).unwrap(), nat(2));
        assert_eq!(m.target.levels.size(8, 100).unwrap(), nat(1));
    }

    #[test]
    fn fin_to_param_examples() {
        let t = fin_to_param(&PrefixSystem::fin(Levels::Zeros { from: 0 }), 6, 100).unwrap();
        assert_eq!(t.h.as_ref().unwrap().eval(5), nat(32));
        assert_eq!(t.comparison.unwrap().target.terms[2], ratio_u(1, 8));
        let five: Vec<Word> = (0..5).map(|i| w(&[i, 0, 0])).collect();
        let t = fin_to_param(&PrefixSystem::fin(Levels::explicit([(3, five)])), 4, 100).unwrap();
        assert_eq!(t.h.as_ref().unwrap().eval(3), nat(40));
        assert_eq!(t.comparison.unwrap().target.partial_sum, ratio_u(1, 8));
        let t = fin_to_param(&PrefixSystem::fin(Levels::empty()), 4, 100).unwrap();
        assert_eq!(t.h.unwrap().eval(3), nat(8));
    }

    #[test]
    fn regroup_examples() {
        let sigma = w(&[1, 2, 3, 4]);
        let sys = PrefixSystem::with_h(two(), Levels::explicit([(4, vec![sigma.clone()])]));
        let t = regroup_n_to_s(&sys, 4, 100).unwrap();
        assert_eq!(t.target.words(1, 100).unwrap(), vec![w(&[2, 3])]);
        assert!((0..4).filter(|&n| n != 1).all(|n| t.target.size(n).is_zero()));
        let empty = PrefixSystem::with_h(two(), Levels::empty());
        assert!((0..5).all(|n| regroup_n_to_s(&empty, 5, 10).unwrap().target.size(n).is_zero()));

        let h2 = refit_param(&two()).unwrap();
        assert_eq!(h2.eval(4), nat(4));
        let fact = ParamFunction::new(Rule::Factorial { mul: 1, sub: 0 }).unwrap();
        assert_eq!(refit_param(&fact).unwrap().eval(7), nat(6));
        assert!(ParamFunction::new(Rule::constant(3)).is_err());
        let refitted = PrefixSystem::with_h(h2, Levels::Zeros { from: 0 });
        let t = refit_regroup(&refitted, &two(), 5, 100).unwrap();
        assert!(t.comparison.unwrap().holds());
        for x in all_points(2, 6) {
            assert!(t
                .certificate
                .violations(
                    &Side::Prefix(std::slice::from_ref(&refitted)),
                    &Side::Block(std::slice::from_ref(&t.target)),
                    &x
                )
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn log_remark_small_range() {
        let r = log_remark(&Rule::FloorLog2, 4, 5000).unwrap();
        assert!(r.holds());
        assert_eq!(r.intermediate_false_at, vec![2, 3]);
        assert_eq!(r.holds_below_from, vec![2, 3]);
        assert!(log_remark(&Rule::FloorLn, 4, 5000).unwrap().holds());
    }

    #[test]
    fn ioe_coincides_stagewise() {
        let x = Point::periodic(&[], &[1, 2]);
        let t = ioe_to_minus(&x, 6);
        assert_eq!(t.target.pattern, x);
        for y in all_points(3, 6) {
            assert!(t.certificate.violations(&Side::Pattern(&x), &Side::Minus(&t.target), &y).unwrap().is_empty());
        }
    }
}
