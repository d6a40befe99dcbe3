//! Finitely presented parameter functions ω→ω and exact weight ledgers.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{nat, nat_vec, ratio, ratio_nat, ratio_pair, ratio_to_string, ratio_vec, Nat, Ratio};
use crate::systems::partition::{tri_index, tri_start};

pub const DEFAULT_CEILING: u64 = 1_000_000;

/// A finitely presented infinite subset of ω.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexSet {
    /// `{ n : n ≡ residue (mod modulus) }`
    Residue { modulus: u64, residue: u64 },
}

impl IndexSet {
    pub fn residue(modulus: u64, residue: u64) -> Self {
        assert!(modulus > 0 && residue < modulus, "residue class out of range");
        IndexSet::Residue { modulus, residue }
    }

    pub fn evens() -> Self {
        Self::residue(2, 0)
    }

    pub fn odds() -> Self {
        Self::residue(2, 1)
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::Residue { modulus, residue } => n % modulus == *residue,
        }
    }

    /// The `i`-th element in increasing order.
    pub fn nth(&self, i: u64) -> u64 {
        match self {
            IndexSet::Residue { modulus, residue } => residue + i * modulus,
        }
    }

    /// Decides whether `self ∩ other` is infinite (residue classes meet in
    /// either nothing or a residue class, by CRT).
    pub fn meets_infinitely(&self, other: &IndexSet) -> bool {
        let (IndexSet::Residue { modulus: m1, residue: r1 }, IndexSet::Residue { modulus: m2, residue: r2 }) =
            (self, other);
        let g = num_integer::gcd(*m1, *m2);
        r1 % g == r2 % g
    }

    /// Elements of `self ∖ other` below `bound`.
    pub fn difference_below(&self, other: &IndexSet, bound: u64) -> Vec<u64> {
        (0..bound).filter(|&n| self.contains(n) && !other.contains(n)).collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Residue { modulus, residue } => write!(f, "{{n ≡ {residue} mod {modulus}}}"),
        }
    }
}

/// Closed constructor set for functions ω→ω.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rule {
    /// `Σ coeffs[i] n^i`
    Polynomial {
        #[serde(with = "nat_vec")]
        coeffs: Vec<Nat>,
    },
    /// `base^n`
    Exponential {
        #[serde(with = "crate::num::nat_str")]
        base: Nat,
    },
    /// `⌊n^(num/den)⌋`
    FloorPower {
        num: u64,
        den: u64,
    },
    /// `⌊log₂ n⌋`, 0 at 0 and 1
    FloorLog2,
    /// `⌊ln n⌋`, 0 at 0 and 1
    FloorLn,
    /// `(mul·n − sub)!`, and 0 where `mul·n < sub`
    Factorial {
        mul: u64,
        sub: u64,
    },
    Product {
        left: Box<Rule>,
        right: Box<Rule>,
    },
    Constant {
        #[serde(with = "crate::num::nat_str")]
        value: Nat,
    },
    /// `on(n)` for `n ∈ set`, `off(n)` otherwise
    Indicator {
        set: IndexSet,
        off: Box<Rule>,
        on: Box<Rule>,
    },
    /// `values[i]` on `[breakpoints[i], breakpoints[i+1])`; the last value extends forever
    Step {
        breakpoints: Vec<u64>,
        #[serde(with = "nat_vec")]
        values: Vec<Nat>,
    },
    /// `prefix[n]` for `n < prefix.len()`, `tail(n)` afterwards
    Table {
        #[serde(with = "nat_vec")]
        prefix: Vec<Nat>,
        tail: Box<Rule>,
    },
    /// `max { inner(k) : k ∈ I_n }` over the triangular partition
    BlockMax {
        inner: Box<Rule>,
    },
    /// `inner(n)` for `k ∈ I_n` of the triangular partition
    Refit {
        inner: Box<Rule>,
    },
    /// `values[i]` at `points[i]`, 0 elsewhere; `points` strictly increasing
    Sparse {
        points: Vec<u64>,
        #[serde(with = "nat_vec")]
        values: Vec<Nat>,
    },
}

fn factorial(n: u64) -> Nat {
    (2..=n).fold(Nat::one(), |acc, k| acc * nat(k))
}

/// Rational enclosure `[lo, hi]` of e from the first `terms` series terms.
fn e_bounds(terms: u64) -> (Ratio, Ratio) {
    let mut sum = Ratio::zero();
    let mut fact = Nat::one();
    for k in 0..terms {
        if k > 0 {
            fact *= nat(k);
        }
        sum += ratio(&Nat::one(), &fact);
    }
    // remainder ≤ 2 / terms!
    let hi = &sum + ratio(&nat(2), &(fact * nat(terms)));
    (sum, hi)
}

fn e_bounds_cached() -> &'static (Ratio, Ratio) {
    static E: OnceLock<(Ratio, Ratio)> = OnceLock::new();
    E.get_or_init(|| e_bounds(60))
}

/// `⌈e^k⌉` for every `k ≥ 1` with `e^k < 2^64`; `e^k` is irrational, so
/// `⌊ln n⌋ = #{k ≥ 1 : ⌈e^k⌉ ≤ n}`.
fn ln_thresholds() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let limit = Ratio::from_integer(BigInt::from(u64::MAX));
        let mut out = Vec::new();
        let mut terms = 60;
        let mut bounds = e_bounds_cached().clone();
        let mut k = 1usize;
        loop {
            let lo = num_traits::pow(bounds.0.clone(), k);
            let hi = num_traits::pow(bounds.1.clone(), k);
            if lo >= limit {
                return out;
            }
            if lo.floor() != hi.floor() {
                terms *= 2;
                bounds = e_bounds(terms);
                continue;
            }
            let ceil: BigInt = lo.floor().to_integer() + 1;
            match ceil.to_u64() {
                Some(c) => out.push(c),
                None => return out,
            }
            k += 1;
        }
    })
}

fn floor_ln(n: u64) -> u64 {
    ln_thresholds().partition_point(|&t| t <= n) as u64
}

impl Rule {
    pub fn poly(coeffs: &[u64]) -> Self {
        Rule::Polynomial { coeffs: coeffs.iter().map(|&c| nat(c)).collect() }
    }

    /// `n^d`
    pub fn monomial(d: usize) -> Self {
        let mut c = vec![0; d + 1];
        c[d] = 1;
        Self::poly(&c)
    }

    pub fn exp(base: u64) -> Self {
        Rule::Exponential { base: nat(base) }
    }

    pub fn constant(v: u64) -> Self {
        Rule::Constant { value: nat(v) }
    }

    pub fn floor_power(num: u64, den: u64) -> Self {
        let g = num_integer::gcd(num, den).max(1);
        Rule::FloorPower { num: num / g, den: den / g }
    }

    pub fn product(left: Rule, right: Rule) -> Self {
        Rule::Product { left: Box::new(left), right: Box::new(right) }
    }

    pub fn table(prefix: Vec<Nat>, tail: Rule) -> Self {
        Rule::Table { prefix, tail: Box::new(tail) }
    }

    pub fn eval(&self, n: u64) -> Nat {
        match self {
            Rule::Polynomial { coeffs } => {
                let x = nat(n);
                coeffs.iter().rev().fold(Nat::zero(), |acc, c| acc * &x + c)
            }
            Rule::Exponential { base } => num_traits::pow(base.clone(), n as usize),
            Rule::FloorPower { num, den } => num_traits::pow(nat(n), *num as usize).nth_root(*den as u32),
            Rule::FloorLog2 => {
                if n < 2 {
                    Nat::zero()
                } else {
                    nat(63 - n.leading_zeros() as u64)
                }
            }
            Rule::FloorLn => nat(floor_ln(n)),
            Rule::Factorial { mul, sub } => {
                let m = mul.saturating_mul(n);
                if m < *sub {
                    Nat::zero()
                } else {
                    factorial(m - sub)
                }
            }
            Rule::Product { left, right } => left.eval(n) * right.eval(n),
            Rule::Constant { value } => value.clone(),
            Rule::Indicator { set, off, on } => {
                if set.contains(n) {
                    on.eval(n)
                } else {
                    off.eval(n)
                }
            }
            Rule::Step { breakpoints, values } => {
                let idx = breakpoints.partition_point(|&b| b <= n);
                if idx == 0 {
                    Nat::zero()
                } else {
                    values[idx - 1].clone()
                }
            }
            Rule::Table { prefix, tail } => match prefix.get(n as usize) {
                Some(v) => v.clone(),
                None => tail.eval(n),
            },
            Rule::BlockMax { inner } => {
                let (start, end) = (tri_start(n), tri_start(n + 1));
                if inner.is_nondecreasing() {
                    inner.eval(end - 1)
                } else {
                    (start..end).map(|k| inner.eval(k)).max().unwrap_or_default()
                }
            }
            Rule::Refit { inner } => inner.eval(tri_index(n)),
            Rule::Sparse { points, values } => match points.binary_search(&n) {
                Ok(i) => values[i].clone(),
                Err(_) => Nat::zero(),
            },
        }
    }

    /// Whether the rule is provably nondecreasing on all of ω.
    pub fn is_nondecreasing(&self) -> bool {
        match self {
            Rule::Polynomial { .. }
            | Rule::FloorPower { .. }
            | Rule::FloorLog2
            | Rule::FloorLn
            | Rule::Factorial { .. }
            | Rule::Constant { .. } => true,
            Rule::Exponential { base } => !base.is_zero(),
            Rule::Product { left, right } => left.is_nondecreasing() && right.is_nondecreasing(),
            Rule::Indicator { .. } => false,
            Rule::Sparse { values, .. } => values.iter().all(Zero::is_zero),
            Rule::Step { values, .. } => values.windows(2).all(|w| w[0] <= w[1]),
            Rule::Table { prefix, tail } => {
                prefix.windows(2).all(|w| w[0] <= w[1])
                    && tail.is_nondecreasing()
                    && prefix.last().is_none_or(|last| *last <= tail.eval(prefix.len() as u64))
            }
            Rule::BlockMax { inner } | Rule::Refit { inner } => inner.is_nondecreasing(),
        }
    }

    /// Whether the rule is provably strictly increasing on all of ω.
    pub fn is_strictly_increasing(&self) -> bool {
        match self {
            Rule::Polynomial { coeffs } => coeffs.iter().skip(1).any(|c| !c.is_zero()),
            Rule::Exponential { base } => *base >= nat(2),
            _ => false,
        }
    }

    /// Whether `h(k) ≥ k` holds for every `k`, by a per-rule argument.
    pub fn dominates_identity(&self) -> bool {
        match self {
            Rule::Polynomial { coeffs } => coeffs.iter().skip(1).any(|c| !c.is_zero()),
            Rule::Exponential { base } => *base >= nat(2),
            Rule::FloorPower { num, den } => num >= den && *den > 0,
            Rule::Factorial { mul, sub: 0 } => *mul >= 1,
            Rule::Product { left, right } => {
                (left.dominates_identity() && right.eval(0) >= Nat::one() && right.is_nondecreasing())
                    || (right.dominates_identity() && left.eval(0) >= Nat::one() && left.is_nondecreasing())
            }
            _ => false,
        }
    }

    /// The `n`-th index of a strictly increasing sequence along which the
    /// rule tends to infinity, or `None` if the rule carries no such
    /// certificate (or the index overflows).
    pub fn limsup_index(&self, n: u64) -> Option<u64> {
        match self {
            Rule::Polynomial { coeffs } => coeffs.iter().skip(1).any(|c| !c.is_zero()).then_some(n + 1),
            Rule::Exponential { base } => (*base >= nat(2)).then_some(n),
            Rule::FloorPower { num, den } => (*num > 0 && *den > 0).then_some(n + 1),
            Rule::FloorLog2 => 1u64.checked_shl(n as u32).filter(|_| n < 64),
            Rule::FloorLn => 3u64.checked_pow(n as u32),
            Rule::Factorial { mul, sub } => {
                if *mul == 0 {
                    return None;
                }
                Some(n + sub.div_ceil(*mul) + 2)
            }
            Rule::Product { left, right } => {
                if !(left.is_nondecreasing() && right.is_nondecreasing()) {
                    return None;
                }
                let base = left.limsup_index(n).or_else(|| right.limsup_index(n))?;
                let positive = (0..1000).find(|&k| !left.eval(k).is_zero() && !right.eval(k).is_zero())?;
                base.checked_add(positive)
            }
            Rule::Constant { .. } | Rule::Step { .. } | Rule::Sparse { .. } => None,
            Rule::Indicator { set, on, .. } => {
                if !on.is_nondecreasing() {
                    return None;
                }
                on.limsup_index(0)?;
                Some(set.nth(n))
            }
            Rule::Table { prefix, tail } => {
                let len = prefix.len() as u64;
                let mut skip = 0u64;
                while tail.limsup_index(skip)? < len {
                    skip += 1;
                }
                tail.limsup_index(n + skip)
            }
            Rule::BlockMax { inner } => {
                // the block of k_m carries at least h(k_m); keep the first block of each run
                let mut last = None;
                let mut seen = 0u64;
                for m in 0.. {
                    let b = tri_index(inner.limsup_index(m)?);
                    if last != Some(b) {
                        if seen == n {
                            return Some(b);
                        }
                        seen += 1;
                        last = Some(b);
                    }
                }
                None
            }
            Rule::Refit { inner } => inner.limsup_index(n).map(tri_start),
        }
    }

    pub fn has_limsup_certificate(&self) -> bool {
        self.limsup_index(0).is_some() && self.limsup_index(1).is_some()
    }

    /// Parses the CLI notation, e.g. `poly n^3`, `exp 2`, `pow 3/2`, `log2`,
    /// `ln`, `fact 3`, `fact 3 2`, `const 5`, `nexp 2` (n·2ⁿ).
    pub fn parse(s: &str) -> Result<Rule> {
        let s = s.trim();
        let (head, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let rest = rest.trim();
        let bad = || Error::Parse(format!("cannot parse rule `{s}`"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match head {
            "poly" => parse_poly(rest).ok_or_else(bad),
            "exp" => Ok(Rule::exp(num(rest)?)),
            "nexp" => Ok(Rule::product(Rule::monomial(1), Rule::exp(num(rest)?))),
            "pow" => {
                let (a, b) = rest.split_once('/').unwrap_or((rest, "1"));
                Ok(Rule::floor_power(num(a)?, num(b)?))
            }
            "log2" => Ok(Rule::FloorLog2),
            "ln" => Ok(Rule::FloorLn),
            "fact" => {
                let mut it = rest.split_whitespace();
                let mul = num(it.next().unwrap_or("1"))?;
                let sub = num(it.next().unwrap_or("0"))?;
                Ok(Rule::Factorial { mul, sub })
            }
            "const" => Ok(Rule::constant(num(rest)?)),
            _ => Err(bad()),
        }
    }
}

fn parse_poly(s: &str) -> Option<Rule> {
    let mut coeffs: Vec<u64> = Vec::new();
    for term in s.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return None;
        }
        let (c, deg) = match term.find('n') {
            None => (term.parse().ok()?, 0usize),
            Some(pos) => {
                let c = if pos == 0 { 1 } else { term[..pos].trim_end_matches('*').parse().ok()? };
                let d = match term[pos + 1..].strip_prefix('^') {
                    Some(d) => d.parse().ok()?,
                    None if term.len() == pos + 1 => 1,
                    None => return None,
                };
                (c, d)
            }
        };
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] += c;
    }
    Some(Rule::poly(&coeffs))
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Polynomial { coeffs } => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(d, c)| match (d, c.is_one()) {
                        (0, _) => c.to_string(),
                        (1, true) => "n".into(),
                        (1, false) => format!("{c}n"),
                        (_, true) => format!("n^{d}"),
                        (_, false) => format!("{c}n^{d}"),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join("+"))
                }
            }
            Rule::Exponential { base } => write!(f, "{base}^n"),
            Rule::FloorPower { num, den } => write!(f, "floor(n^({num}/{den}))"),
            Rule::FloorLog2 => write!(f, "floor(log2 n)"),
            Rule::FloorLn => write!(f, "floor(ln n)"),
            Rule::Factorial { mul, sub } => write!(f, "({mul}n-{sub})!"),
            Rule::Product { left, right } => write!(f, "({left})*({right})"),
            Rule::Constant { value } => write!(f, "{value}"),
            Rule::Indicator { set, off, on } => write!(f, "[{on} on {set}, {off} off]"),
            Rule::Step { breakpoints, .. } => write!(f, "step({} pieces)", breakpoints.len()),
            Rule::Table { prefix, tail } => write!(f, "table({} entries) then {tail}", prefix.len()),
            Rule::BlockMax { inner } => write!(f, "blockmax({inner})"),
            Rule::Refit { inner } => write!(f, "refit({inner})"),
            Rule::Sparse { points, .. } => write!(f, "sparse({} points)", points.len()),
        }
    }
}

/// A rule for `h` together with its limsup certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Rule", into = "Rule")]
pub struct ParamFunction {
    rule: Rule,
}

impl TryFrom<Rule> for ParamFunction {
    type Error = Error;

    fn try_from(rule: Rule) -> Result<Self> {
        ParamFunction::new(rule)
    }
}

impl From<ParamFunction> for Rule {
    fn from(p: ParamFunction) -> Rule {
        p.rule
    }
}

impl ParamFunction {
    pub fn new(rule: Rule) -> Result<Self> {
        if !rule.has_limsup_certificate() {
            return Err(Error::NoLimsupCertificate(rule.to_string()));
        }
        Ok(ParamFunction { rule })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(Rule::parse(s)?)
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn eval(&self, n: u64) -> Nat {
        self.rule.eval(n)
    }

    /// `k_n` of the limsup certificate.
    pub fn limsup_index(&self, n: u64) -> Option<u64> {
        self.rule.limsup_index(n)
    }
}

impl fmt::Display for ParamFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rule.fmt(f)
    }
}

/// A size profile `s : ω → ω`; zero values allowed, no certificate needed.
pub type SizeProfile = Rule;

/// Result of [`check_supermultiplicative`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Supermultiplicativity {
    Certificate { reason: String },
    Counterexample { a: u64, b: u64 },
    UnfalsifiedUpTo { bound: u64 },
}

impl Supermultiplicativity {
    pub fn is_certificate(&self) -> bool {
        matches!(self, Supermultiplicativity::Certificate { .. })
    }
}

/// Checks `h(a+b) ≥ h(a)·h(b)`: per-rule analytic certificates where one
/// exists, otherwise an exhaustive scan over `a ≤ b ≤ range_bound` ordered by
/// `(a+b, a)`.
pub fn check_supermultiplicative(h: &Rule, range_bound: u64) -> Supermultiplicativity {
    match h {
        Rule::Exponential { .. } => {
            return Supermultiplicativity::Certificate { reason: "b^(a+b) = b^a * b^b".into() };
        }
        Rule::Factorial { mul, sub: 0 } if *mul >= 1 => {
            return Supermultiplicativity::Certificate {
                reason: format!("({mul}a+{mul}b)!/(({mul}a)!({mul}b)!) is a binomial coefficient >= 1"),
            };
        }
        _ => {}
    }
    let values: Vec<Nat> = (0..=2 * range_bound).map(|k| h.eval(k)).collect();
    for sum in 0..=2 * range_bound {
        for a in 0..=sum / 2 {
            let b = sum - a;
            if b > range_bound {
                continue;
            }
            if values[sum as usize] < &values[a as usize] * &values[b as usize] {
                return Supermultiplicativity::Counterexample { a, b };
            }
        }
    }
    Supermultiplicativity::UnfalsifiedUpTo { bound: range_bound }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailJustification {
    /// no nonzero terms beyond the listed ones
    Finite,
    /// terms dominated by a geometric series
    Geometric,
    /// terms dominated by a telescoping series
    Telescoping,
    /// successive chosen weights at least double
    Doubling,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBound {
    #[serde(with = "ratio_pair")]
    pub bound: Ratio,
    pub justification: TailJustification,
}

/// Exact record of `Σ size/weight` over consecutive indices starting at `start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightLedger {
    pub start: u64,
    #[serde(with = "ratio_vec")]
    pub terms: Vec<Ratio>,
    #[serde(with = "ratio_pair")]
    pub partial_sum: Ratio,
    pub tail: Option<TailBound>,
}

impl WeightLedger {
    pub fn new(start: u64, terms: Vec<Ratio>) -> Self {
        let partial_sum = terms.iter().fold(Ratio::zero(), |acc, t| acc + t);
        WeightLedger { start, terms, partial_sum, tail: None }
    }

    /// Builds the ledger of `sizes[i] / weights[i]`, rejecting a positive size
    /// over a zero weight.
    pub fn from_sizes(start: u64, sizes: &[Nat], weights: &[Nat]) -> Result<Self> {
        let mut terms = Vec::with_capacity(sizes.len());
        for (i, (s, w)) in sizes.iter().zip(weights).enumerate() {
            if s.is_zero() {
                terms.push(Ratio::zero());
            } else if w.is_zero() {
                return Err(Error::DivisionByZeroWeight { level: start + i as u64, size: s.to_string() });
            } else {
                terms.push(ratio(s, w));
            }
        }
        Ok(Self::new(start, terms))
    }

    pub fn with_tail(mut self, bound: Ratio, justification: TailJustification) -> Self {
        self.tail = Some(TailBound { bound, justification });
        self
    }

    /// `partial_sum + tail`, when a tail bound is certified.
    pub fn total_bound(&self) -> Option<Ratio> {
        self.tail.as_ref().map(|t| &self.partial_sum + &t.bound)
    }

    pub fn term(&self, index: u64) -> Option<&Ratio> {
        index.checked_sub(self.start).and_then(|i| self.terms.get(i as usize))
    }

    /// Running partial sums, one per term.
    pub fn prefix_sums(&self) -> Vec<Ratio> {
        let mut acc = Ratio::zero();
        self.terms
            .iter()
            .map(|t| {
                acc += t;
                acc.clone()
            })
            .collect()
    }

    pub fn recheck(&self) -> bool {
        self.terms.iter().all(|t| *t >= Ratio::zero())
            && self.terms.iter().fold(Ratio::zero(), |acc, t| acc + t) == self.partial_sum
    }
}

impl fmt::Display for WeightLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sum = {}", ratio_to_string(&self.partial_sum))?;
        if let Some(t) = &self.tail {
            write!(f, " (+ tail <= {} {:?})", ratio_to_string(&t.bound), t.justification)?;
        }
        Ok(())
    }
}

/// Exact partial sum `Σ_{1≤n≤N} sizes(n)/h(n)`. Level 0 holds at most the
/// empty word and never contributes.
pub fn partial_weight(sizes: &[Nat], h: &Rule, n_max: u64) -> Result<WeightLedger> {
    if (sizes.len() as u64) <= n_max {
        return Err(Error::PreconditionFailed(format!("sizes given up to {} but N = {n_max}", sizes.len() as i64 - 1)));
    }
    let weights: Vec<Nat> = (1..=n_max).map(|n| h.eval(n)).collect();
    WeightLedger::from_sizes(1, &sizes[1..=n_max as usize], &weights)
}

pub fn partial_weight_profile(sizes: &SizeProfile, h: &Rule, n_max: u64) -> Result<WeightLedger> {
    let s: Vec<Nat> = (0..=n_max).map(|n| sizes.eval(n)).collect();
    partial_weight(&s, h, n_max)
}

/// Sparse increasing levels `k_n` with `h(k_{n+1}) ≥ 2 h(k_n)` and
/// `Σ 1/h(k_n) ≤ 2/h(k_0) ≤ budget`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseLevels {
    pub indices: Vec<u64>,
    #[serde(with = "nat_vec")]
    pub values: Vec<Nat>,
    #[serde(with = "ratio_pair")]
    pub budget: Ratio,
    /// `k_{n+1} = k_n + 1` holds for every `n` (exponential rules).
    pub unit_step_tail: bool,
}

impl SparseLevels {
    /// `k_n`, using the closed-form tail beyond the computed prefix when available.
    pub fn index(&self, n: u64) -> Option<u64> {
        match self.indices.get(n as usize) {
            Some(k) => Some(*k),
            None if self.unit_step_tail => Some(self.indices[0] + n),
            None => None,
        }
    }

    /// Ledger of `1/h(k_n)` over the computed prefix with the doubling tail bound.
    pub fn ledger(&self) -> WeightLedger {
        let terms = self.values.iter().map(|v| ratio(&Nat::one(), v)).collect();
        let last = self.values.last().expect("nonempty prefix");
        // Σ_{m > last} 1/h(k_m) ≤ Σ_j 1/(2^j · 2h(k_last)) = 1/h(k_last)
        WeightLedger::new(0, terms).with_tail(ratio(&Nat::one(), last), TailJustification::Doubling)
    }
}

/// Chooses `count ≥ 1` sparse levels for `h` under `budget`.
pub fn select_sparse_levels(h: &ParamFunction, budget: &Ratio, count: usize, ceiling: u64) -> Result<SparseLevels> {
    if *budget <= Ratio::zero() {
        return Err(Error::PreconditionFailed("budget must be positive".into()));
    }
    let count = count.max(1);
    let two = Ratio::from_integer(BigInt::from(2));
    let mut indices = Vec::with_capacity(count);
    let mut values: Vec<Nat> = Vec::with_capacity(count);
    let mut k = 1u64;
    while indices.len() < count {
        let ok = |v: &Nat| match values.last() {
            None => ratio_nat(v) * budget >= two,
            Some(prev) => *v >= prev * nat(2),
        };
        loop {
            if k > ceiling {
                return Err(Error::SearchCeilingExceeded {
                    what: format!("sparse level {} of {}", indices.len(), h),
                    ceiling,
                });
            }
            let v = h.eval(k);
            if ok(&v) {
                indices.push(k);
                values.push(v);
                k += 1;
                break;
            }
            k += 1;
        }
    }
    let unit_step_tail = matches!(h.rule(), Rule::Exponential { base } if *base >= nat(2))
        && indices.windows(2).all(|w| w[1] == w[0] + 1);
    Ok(SparseLevels { indices, values, budget: budget.clone(), unit_step_tail })
}

/// Coarse growth class used by the per-rule convergence certificates.
#[derive(Clone, Debug, PartialEq)]
enum Growth {
    /// `Θ(n^deg)`, or `Θ(n^deg · log n)` when `log` is set (`deg` may be 0)
    Poly {
        deg: Ratio,
        log: bool,
    },
    Exp {
        base: Nat,
    },
    Factorial,
}

fn growth(rule: &Rule) -> Option<Growth> {
    let poly = |deg: Ratio, log| Some(Growth::Poly { deg, log });
    match rule {
        Rule::Polynomial { coeffs } => {
            let d = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
            poly(crate::num::ratio_u(d as u64, 1), false)
        }
        Rule::Exponential { base } if *base >= nat(2) => Some(Growth::Exp { base: base.clone() }),
        Rule::Exponential { .. } | Rule::Constant { .. } => poly(Ratio::zero(), false),
        Rule::FloorPower { num, den } => poly(crate::num::ratio_u(*num, *den), false),
        Rule::FloorLog2 | Rule::FloorLn => poly(Ratio::zero(), true),
        Rule::Factorial { mul, .. } if *mul >= 1 => Some(Growth::Factorial),
        _ => None,
    }
}

fn positive_from_one(g: &Rule) -> bool {
    match g {
        Rule::Polynomial { coeffs } => coeffs.iter().any(|c| !c.is_zero()),
        Rule::Exponential { base } => !base.is_zero(),
        Rule::FloorPower { num, den } => *num > 0 && *den > 0,
        Rule::Factorial { mul, sub } => mul >= sub,
        Rule::Constant { value } => !value.is_zero(),
        _ => false,
    }
}

/// Per-rule certificate that `Σ_{n≥1} f(n)/g(n) < ∞`.
pub fn certify_summable(f: &Rule, g: &Rule) -> Result<String> {
    let fail = || Error::PreconditionFailed(format!("no summability certificate for sum of ({f})/({g})"));
    if !positive_from_one(g) {
        return Err(fail());
    }
    match (growth(f).ok_or_else(fail)?, growth(g).ok_or_else(fail)?) {
        (Growth::Poly { .. }, Growth::Exp { .. }) => Ok("polynomial over exponential".into()),
        (Growth::Exp { base: a }, Growth::Exp { base: b }) if a < b => Ok(format!("geometric with ratio {a}/{b}")),
        (Growth::Poly { deg: a, .. }, Growth::Poly { deg: b, log: false }) if b.clone() - a.clone() > Ratio::one() => {
            Ok(format!("p-series with exponent {}", ratio_to_string(&(b - a))))
        }
        (Growth::Poly { .. } | Growth::Exp { .. }, Growth::Factorial) => Ok("dominated by a factorial".into()),
        _ => Err(fail()),
    }
}

/// Per-rule certificate that `f(n)/g(n) → 0`.
pub fn certify_limit_zero(f: &Rule, g: &Rule) -> Result<String> {
    let fail = || Error::PreconditionFailed(format!("no limit-zero certificate for ({f})/({g})"));
    if !positive_from_one(g) {
        return Err(fail());
    }
    match (growth(f).ok_or_else(fail)?, growth(g).ok_or_else(fail)?) {
        (Growth::Poly { .. }, Growth::Exp { .. }) => Ok("polynomial over exponential".into()),
        (Growth::Exp { base: a }, Growth::Exp { base: b }) if a < b => Ok(format!("ratio ({a}/{b})^n")),
        (Growth::Poly { deg: a, .. }, Growth::Poly { deg: b, log: false }) if a < b => {
            Ok(format!("ratio n^-{}", ratio_to_string(&(b - a))))
        }
        (Growth::Poly { deg: a, log: false }, Growth::Poly { deg: b, log: true }) if a <= b => {
            Ok("ratio 1/log n".into())
        }
        (Growth::Poly { .. } | Growth::Exp { .. }, Growth::Factorial) => Ok("dominated by a factorial".into()),
        _ => Err(fail()),
    }
}
