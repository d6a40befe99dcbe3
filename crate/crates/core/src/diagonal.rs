//! The diagonal system builder and escape engine, plus the separation
//! drivers built on it.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{nat, ratio, ratio_nat, ratio_u, Nat, Ratio};
use crate::param::{
    certify_limit_zero, certify_summable, IndexSet, ParamFunction, Rule, SizeProfile, TailJustification, WeightLedger,
};
use crate::systems::{Levels, Point, PrefixSystem, Word};

/// Upper bound on `Σ_{1≤j≤v} |T_j|` that the plan is built against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OpponentBound {
    /// `Σ_{1≤j≤v} t(j)`
    PerLevel { t: SizeProfile },
    /// `Σ_{1≤j≤v} (s(j) − 1)`, clipped at zero
    Predecessor { s: SizeProfile },
    /// `⌊budget · max_{j≤v} f(j)⌋`, the cumulative bound available when `Σ |T_j|/f(j) ≤ budget`
    BudgetTimesMax {
        f: Rule,
        #[serde(with = "crate::num::ratio_pair")]
        budget: Ratio,
    },
}

impl OpponentBound {
    /// Cumulative bounds for `v = 0..=depth`.
    pub fn cumulative(&self, depth: u64) -> Vec<Nat> {
        let mut out = Vec::with_capacity(depth as usize + 1);
        match self {
            OpponentBound::PerLevel { t } => {
                let mut acc = Nat::zero();
                out.push(acc.clone());
                for j in 1..=depth {
                    acc += t.eval(j);
                    out.push(acc.clone());
                }
            }
            OpponentBound::Predecessor { s } => {
                let mut acc = Nat::zero();
                out.push(acc.clone());
                for j in 1..=depth {
                    let v = s.eval(j);
                    if !v.is_zero() {
                        acc += v - 1u32;
                    }
                    out.push(acc.clone());
                }
            }
            OpponentBound::BudgetTimesMax { f, budget } => {
                let mut max = Nat::zero();
                for j in 0..=depth {
                    max = max.max(f.eval(j));
                    let b = ratio_nat(&max) * budget;
                    out.push(b.floor().numer().to_biguint().unwrap_or_default());
                }
            }
        }
        out
    }

    /// Per-level bound `t(n)` where one exists.
    pub fn level_bound(&self, n: u64) -> Option<Nat> {
        match self {
            OpponentBound::PerLevel { t } => Some(t.eval(n)),
            OpponentBound::Predecessor { s } => {
                let v = s.eval(n);
                Some(if v.is_zero() { v } else { v - 1u32 })
            }
            OpponentBound::BudgetTimesMax { .. } => None,
        }
    }
}

/// The least `N ≤ ceiling` with `Σ_{k≤i≤N} s(i) > bound(N)`, for each `k ≤ k_max`.
pub fn check_hypothesis(s: &SizeProfile, t: &OpponentBound, k_max: u64, ceiling: u64) -> Result<Vec<(u64, u64)>> {
    let cum = t.cumulative(ceiling);
    let mut out = Vec::new();
    for k in 0..=k_max {
        let mut acc = Nat::zero();
        let mut found = None;
        for n in k..=ceiling {
            acc += s.eval(n);
            if acc > cum[n as usize] {
                found = Some(n);
                break;
            }
        }
        match found {
            Some(n) => out.push((k, n)),
            None => return Err(Error::SearchCeilingExceeded { what: format!("hypothesis at k = {k}"), ceiling }),
        }
    }
    Ok(out)
}

/// The block of levels `(lo, hi]` serving slot `slot` of level `parent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub parent: u64,
    pub slot: u64,
    pub lo: u64,
    pub hi: u64,
}

#[derive(Debug)]
struct Cache {
    s: Vec<Nat>,
    /// `Σ_{1≤j≤n} s(j)`
    prefix: Vec<Nat>,
    window_of_level: Vec<Option<usize>>,
    first_window: BTreeMap<u64, usize>,
}

/// A built diagonal system. Level `j` of the root holds `0^{j−1}⌢i`; a level
/// `j` inside the window of `(k, i)` holds `σ^k_i ⌢ p ⌢ 0…0` for payloads `p`
/// in its cumulative range.
#[derive(Debug, Serialize, Deserialize)]
pub struct DiagonalPlan {
    pub s: SizeProfile,
    pub t: OpponentBound,
    pub requested_depth: u64,
    /// levels `≤ built_depth` are complete
    pub built_depth: u64,
    /// `s(0)` when it was positive and level 0 was dropped
    #[serde(with = "crate::num::opt_nat")]
    pub dropped_level_zero: Option<Nat>,
    pub root: Option<u64>,
    pub windows: Vec<Window>,
    #[serde(skip)]
    cache: OnceLock<Cache>,
}

impl Clone for DiagonalPlan {
    fn clone(&self) -> Self {
        DiagonalPlan {
            s: self.s.clone(),
            t: self.t.clone(),
            requested_depth: self.requested_depth,
            built_depth: self.built_depth,
            dropped_level_zero: self.dropped_level_zero.clone(),
            root: self.root,
            windows: self.windows.clone(),
            cache: OnceLock::new(),
        }
    }
}

impl PartialEq for DiagonalPlan {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s
            && self.t == other.t
            && self.requested_depth == other.requested_depth
            && self.built_depth == other.built_depth
            && self.dropped_level_zero == other.dropped_level_zero
            && self.root == other.root
            && self.windows == other.windows
    }
}

/// Builds the diagonal plan for sizes `s` against the opponent bound `t` up to `depth`.
pub fn build_diagonal(s: &SizeProfile, t: &OpponentBound, depth: u64, ceiling: u64) -> Result<DiagonalPlan> {
    if depth > ceiling {
        return Err(Error::SearchCeilingExceeded { what: format!("plan depth {depth}"), ceiling });
    }
    let s0 = s.eval(0);
    let dropped_level_zero = (!s0.is_zero()).then_some(s0);
    let sizes: Vec<Nat> = (0..=depth).map(|j| if j == 0 { Nat::zero() } else { s.eval(j) }).collect();
    let cum = t.cumulative(depth);
    let root = (1..=depth).find(|&j| !sizes[j as usize].is_zero());
    let mut windows = Vec::new();
    let mut cur = root.unwrap_or(depth);
    if let Some(r) = root {
        let mut k = r;
        'levels: while k <= cur {
            let slots = sizes[k as usize].to_u64().unwrap_or(u64::MAX);
            for slot in 0..slots {
                let mut acc = Nat::zero();
                let mut v = cur;
                loop {
                    v += 1;
                    if v > depth {
                        break 'levels;
                    }
                    acc += &sizes[v as usize];
                    if acc > cum[v as usize] {
                        break;
                    }
                }
                windows.push(Window { parent: k, slot, lo: cur, hi: v });
                cur = v;
            }
            k += 1;
        }
    }
    let built_depth = if root.is_some() { cur } else { depth };
    Ok(DiagonalPlan {
        s: s.clone(),
        t: t.clone(),
        requested_depth: depth,
        built_depth,
        dropped_level_zero,
        root,
        windows,
        cache: OnceLock::new(),
    })
}

/// Outcome of the structural checks on a plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCheck {
    pub levels_checked: u64,
    pub windows_checked: u64,
    /// windows whose payloads were enumerated word by word
    pub windows_enumerated: u64,
}

impl DiagonalPlan {
    fn cache(&self) -> &Cache {
        self.cache.get_or_init(|| {
            let s: Vec<Nat> =
                (0..=self.built_depth).map(|j| if j == 0 { Nat::zero() } else { self.s.eval(j) }).collect();
            let mut prefix = Vec::with_capacity(s.len());
            let mut acc = Nat::zero();
            for v in &s {
                acc += v;
                prefix.push(acc.clone());
            }
            let mut window_of_level = vec![None; s.len()];
            let mut first_window = BTreeMap::new();
            for (i, w) in self.windows.iter().enumerate() {
                for j in w.lo + 1..=w.hi {
                    window_of_level[j as usize] = Some(i);
                }
                first_window.entry(w.parent).or_insert(i);
            }
            Cache { s, prefix, window_of_level, first_window }
        })
    }

    pub fn s_at(&self, j: u64) -> Nat {
        self.cache().s.get(j as usize).cloned().unwrap_or_default()
    }

    /// `|S_j|`; levels beyond the built depth are empty.
    pub fn level_size(&self, j: u64) -> Nat {
        if j > self.built_depth {
            return Nat::zero();
        }
        let c = self.cache();
        if Some(j) == self.root || c.window_of_level[j as usize].is_some() {
            c.s[j as usize].clone()
        } else {
            Nat::zero()
        }
    }

    pub fn window_of_level(&self, j: u64) -> Option<&Window> {
        self.cache().window_of_level.get(j as usize).copied().flatten().map(|i| &self.windows[i])
    }

    /// The window serving slot `slot` of level `k`, if it was built.
    pub fn window_of_slot(&self, k: u64, slot: u64) -> Option<&Window> {
        let first = *self.cache().first_window.get(&k)?;
        self.windows.get(first + slot as usize).filter(|w| w.parent == k && w.slot == slot)
    }

    /// Lowest payload at level `j` inside its window.
    pub fn payload_lo(&self, j: u64) -> Option<Nat> {
        let w = self.window_of_level(j)?;
        let c = self.cache();
        Some(&c.prefix[j as usize - 1] - &c.prefix[w.lo as usize])
    }

    /// Total payload count `Σ_{lo<j≤hi} s(j)` of a window.
    pub fn window_payloads(&self, w: &Window) -> Nat {
        let c = self.cache();
        &c.prefix[w.hi as usize] - &c.prefix[w.lo as usize]
    }

    /// The `idx`-th word of level `j`.
    pub fn word(&self, j: u64, idx: u64) -> Option<Word> {
        if nat(idx) >= self.level_size(j) {
            return None;
        }
        if Some(j) == self.root {
            return Some(Word::zeros(j - 1).extend_padded(nat(idx), j));
        }
        let w = self.window_of_level(j)?;
        let parent = self.word(w.parent, w.slot)?;
        Some(parent.extend_padded(self.payload_lo(j)? + nat(idx), j))
    }

    /// Index of `w` within level `|w|`, if it is a word of the plan.
    pub fn index_of(&self, w: &[Nat]) -> Option<u64> {
        let j = w.len() as u64;
        if j == 0 || j > self.built_depth {
            return None;
        }
        if Some(j) == self.root {
            let (last, head) = w.split_last()?;
            return (head.iter().all(Zero::is_zero) && *last < self.s_at(j)).then(|| last.to_u64()).flatten();
        }
        let win = self.window_of_level(j)?;
        let k = win.parent as usize;
        if !w[k + 1..].iter().all(Zero::is_zero) {
            return None;
        }
        let lo = self.payload_lo(j)?;
        let p = &w[k];
        if *p < lo || *p >= &lo + self.s_at(j) {
            return None;
        }
        (self.index_of(&w[..k])? == win.slot).then(|| (p - lo).to_u64()).flatten()
    }

    pub fn contains(&self, j: u64, w: &Word) -> bool {
        w.len() == j && self.index_of(w.entries()).is_some()
    }

    pub fn words(&self, j: u64, ceiling: u64) -> Result<Vec<Word>> {
        let size = self.level_size(j);
        if size > nat(ceiling) {
            return Err(Error::LedgerOverflowCeiling { what: format!("plan level {j}"), ceiling });
        }
        let n = size.to_u64().unwrap_or(0);
        Ok((0..n).filter_map(|i| self.word(j, i)).collect())
    }

    /// `{τ(|prefix|) : τ ∈ S_j, prefix ⊆ τ}`.
    pub fn next_values(&self, j: u64, prefix: &Word, ceiling: u64) -> Result<std::collections::BTreeSet<Nat>> {
        use std::collections::BTreeSet;
        let k = prefix.len();
        let size = self.level_size(j);
        if k >= j || size.is_zero() {
            return Ok(BTreeSet::new());
        }
        let range = |lo: Nat| -> Result<BTreeSet<Nat>> {
            let n = size
                .to_u64()
                .filter(|&n| n <= ceiling)
                .ok_or_else(|| Error::LedgerOverflowCeiling { what: format!("payloads of plan level {j}"), ceiling })?;
            Ok((0..n).map(|i| &lo + nat(i)).collect())
        };
        // (coordinate of the payload, common part of every word, lowest payload)
        let (coord, head, lo) = if Some(j) == self.root {
            (j - 1, Word::zeros(j - 1), Nat::zero())
        } else {
            let win = match self.window_of_level(j) {
                Some(w) => w,
                None => return Ok(BTreeSet::new()),
            };
            let parent = self.word(win.parent, win.slot).expect("parent word exists");
            (win.parent, parent, self.payload_lo(j).expect("windowed level"))
        };
        if k < coord {
            return Ok(if prefix.is_prefix_of(&head) {
                BTreeSet::from([head.0[k as usize].clone()])
            } else {
                BTreeSet::new()
            });
        }
        if !head.is_prefix_of(prefix) {
            return Ok(BTreeSet::new());
        }
        if k == coord {
            return range(lo);
        }
        let p = &prefix.0[coord as usize];
        let in_range = *p >= lo && *p < &lo + &size && prefix.0[coord as usize + 1..].iter().all(Zero::is_zero);
        Ok(if in_range { BTreeSet::from([Nat::zero()]) } else { BTreeSet::new() })
    }

    /// Size fidelity, breakpoint inequality and the extension property.
    pub fn verify(&self, ceiling: u64) -> Result<PlanCheck> {
        let c = self.cache();
        for j in 1..=self.built_depth {
            if self.level_size(j) != c.s[j as usize] {
                return Err(Error::VerificationFailed(format!("size fidelity fails at level {j}")));
            }
            if c.s[j as usize] <= nat(ceiling.min(64)) {
                let ws = self.words(j, ceiling)?;
                let distinct: std::collections::BTreeSet<&Word> = ws.iter().collect();
                if nat(distinct.len() as u64) != c.s[j as usize] || !ws.iter().all(|w| self.contains(j, w)) {
                    return Err(Error::VerificationFailed(format!("level {j} words disagree with its size")));
                }
            }
        }
        let cum = self.t.cumulative(self.built_depth);
        let mut enumerated = 0;
        for (wi, w) in self.windows.iter().enumerate() {
            let total = self.window_payloads(w);
            if total <= cum[w.hi as usize] {
                return Err(Error::VerificationFailed(format!("breakpoint inequality fails at window {wi}")));
            }
            let parent = self
                .word(w.parent, w.slot)
                .ok_or_else(|| Error::VerificationFailed(format!("window {wi} has no parent word")))?;
            if total <= nat(ceiling) {
                // every payload p < total occurs exactly once as parent⌢p⌢0…0
                let mut seen = vec![0u8; total.to_usize().unwrap_or(0)];
                for j in w.lo + 1..=w.hi {
                    for tau in self.words(j, ceiling)? {
                        if !parent.is_prefix_of(&tau) || !tau.0[w.parent as usize + 1..].iter().all(Zero::is_zero) {
                            return Err(Error::VerificationFailed(format!("level {j} word off its parent")));
                        }
                        let p = tau.0[w.parent as usize].to_usize().filter(|&p| p < seen.len());
                        match p {
                            Some(p) => seen[p] += 1,
                            None => return Err(Error::VerificationFailed(format!("payload out of range at {j}"))),
                        }
                    }
                }
                if seen.iter().any(|&c| c != 1) {
                    return Err(Error::VerificationFailed(format!("extension property fails at window {wi}")));
                }
                enumerated += 1;
            } else {
                // payload ranges tile [0, total) by construction of the prefix sums
                let mut next = Nat::zero();
                for j in w.lo + 1..=w.hi {
                    if self.payload_lo(j) != Some(next.clone()) {
                        return Err(Error::VerificationFailed(format!("payload ranges broken at level {j}")));
                    }
                    next += &c.s[j as usize];
                }
                if next != total {
                    return Err(Error::VerificationFailed(format!("payload ranges short at window {wi}")));
                }
            }
        }
        Ok(PlanCheck {
            levels_checked: self.built_depth,
            windows_checked: self.windows.len() as u64,
            windows_enumerated: enumerated,
        })
    }

    pub fn system(&self, weight: crate::systems::Weight) -> PrefixSystem {
        PrefixSystem::new(weight, Levels::Plan(Box::new(self.clone())))
    }
}

/// One pigeonhole step of an escape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeStage {
    /// `n_m`, the level of the current word and the decision coordinate
    pub level: u64,
    pub slot: u64,
    pub window: (u64, u64),
    #[serde(with = "crate::num::nat_str")]
    pub chosen: Nat,
    /// `n_{m+1}`
    pub next_level: u64,
    pub next_slot: u64,
    /// competing opponent values at the decision coordinate
    #[serde(with = "crate::num::nat_vec")]
    pub excluded: Vec<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeCertificate {
    pub n0: u64,
    pub start_slot: u64,
    pub stages: Vec<EscapeStage>,
    /// levels `n_m` with `x↾n_m ∈ S_{n_m}`
    pub hits: Vec<u64>,
    /// avoidance is certified on `(n0, checked_depth]`
    pub checked_depth: u64,
    pub prefix: Word,
}

impl EscapeCertificate {
    pub fn point(&self) -> Point {
        Point::eventually_zero(self.prefix.clone())
    }
}

/// Runs `stages` pigeonhole steps against `opponent`, starting at the first
/// plan level `≥ burn_in`.
pub fn escape(
    plan: &DiagonalPlan,
    opponent: &PrefixSystem,
    stages: u64,
    burn_in: u64,
    ceiling: u64,
) -> Result<(Point, EscapeCertificate)> {
    let n0 = (burn_in.max(1)..=plan.built_depth)
        .find(|&j| !plan.level_size(j).is_zero())
        .ok_or(Error::DepthExhausted { stage: 0, depth: plan.built_depth })?;
    let (mut level, mut slot) = (n0, 0u64);
    let mut current = plan.word(level, slot).expect("first word exists");
    let mut trace = Vec::new();
    let mut hits = vec![n0];
    for m in 0..stages {
        let win = plan
            .window_of_slot(level, slot)
            .ok_or(Error::DepthExhausted { stage: m + 1, depth: plan.built_depth })?
            .clone();
        let mut excluded = std::collections::BTreeSet::new();
        for k in level + 1..=win.hi {
            excluded.extend(opponent.levels.next_values(k, &current, ceiling)?);
        }
        let total = plan.window_payloads(&win);
        let mut p = Nat::zero();
        for e in &excluded {
            if *e == p {
                p += 1u32;
            } else if *e > p {
                break;
            }
        }
        if p >= total {
            return Err(Error::HypothesisViolated {
                stage: m + 1,
                detail: format!("{} competing values exhaust {} payloads at level {level}", excluded.len(), total),
            });
        }
        let next_level = (win.lo + 1..=win.hi)
            .find(|&j| {
                let lo = plan.payload_lo(j).expect("windowed level");
                p >= lo && p < lo + plan.s_at(j)
            })
            .expect("payload lies in its window");
        let next_slot = (&p - plan.payload_lo(next_level).unwrap()).to_u64().expect("slot fits");
        let next = plan.word(next_level, next_slot).expect("word exists");
        debug_assert!(current.is_prefix_of(&next));
        trace.push(EscapeStage {
            level,
            slot,
            window: (win.lo, win.hi),
            chosen: p,
            next_level,
            next_slot,
            excluded: excluded.into_iter().collect(),
        });
        level = next_level;
        slot = next_slot;
        current = next;
        hits.push(level);
    }
    let cert = EscapeCertificate { n0, start_slot: 0, stages: trace, hits, checked_depth: level, prefix: current };
    Ok((cert.point(), cert))
}

/// Re-checks an escape certificate from scratch.
pub fn verify_escape(
    plan: &DiagonalPlan,
    opponent: &PrefixSystem,
    cert: &EscapeCertificate,
    ceiling: u64,
) -> Result<()> {
    let x = cert.point();
    let bad = |m: String| Err(Error::VerificationFailed(m));
    for &n in &cert.hits {
        if !plan.contains(n, &x.prefix(n)) {
            return bad(format!("no hit at recorded level {n}"));
        }
    }
    for k in cert.n0 + 1..=cert.checked_depth {
        if opponent.levels.contains(k, &x.prefix(k)) {
            return bad(format!("opponent hit at level {k}"));
        }
    }
    for st in &cert.stages {
        if st.excluded.contains(&st.chosen) || x.at(st.level) != st.chosen {
            return bad(format!("stage at level {} chose a competing value", st.level));
        }
        let pre = x.prefix(st.level);
        for k in st.level + 1..=st.window.1 {
            let vals = opponent.levels.next_values(k, &pre, ceiling)?;
            if vals.iter().any(|v| st.excluded.binary_search(v).is_err()) {
                return bad(format!("stage at level {} missed a competitor at level {k}", st.level));
            }
        }
    }
    Ok(())
}

/// A plan separating `fN(g)` from `fN(f)` when `Σ f/g < ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub certificate: String,
    pub plan: DiagonalPlan,
    pub ledger: WeightLedger,
}

pub fn separate_summable(f: &ParamFunction, g: &ParamFunction, depth: u64, ceiling: u64) -> Result<Separation> {
    let certificate = certify_summable(f.rule(), g.rule())?;
    let plan = build_diagonal(f.rule(), &OpponentBound::Predecessor { s: f.rule().clone() }, depth, ceiling)?;
    let sizes: Vec<Nat> = (0..=plan.built_depth).map(|j| plan.level_size(j)).collect();
    let ledger = crate::param::partial_weight(&sizes, g.rule(), plan.built_depth)?;
    Ok(Separation { certificate, plan, ledger })
}

/// Output of [`strict_inclusion`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictInclusion {
    pub certificate: String,
    /// `n_0 = 0, n_{k+1} = min{j > n_k : g(j) > g(n_k)}` up to the depth
    pub base: Vec<u64>,
    /// the subsequence with `max f(≤n_k)/g(n_k) < 1/(k·2^k)` for `k ≥ 1`
    pub refined: Vec<u64>,
    /// `h(n_k) = k·max{f(j) : j ≤ n_k}`, 0 elsewhere
    pub h: Rule,
    /// `Σ h(n_k)/g(n_k)` over the computed `n_k`, each term below `2^{-k}`
    pub ledger: WeightLedger,
    #[serde(with = "crate::num::ratio_pair")]
    pub opponent_budget: Ratio,
    pub plan: DiagonalPlan,
}

/// Builds the step function `h` between `f` and `g` and its diagonal plan,
/// against opponents with `Σ |T_n|/f(n) ≤ budget`.
pub fn strict_inclusion(
    f: &ParamFunction,
    g: &ParamFunction,
    budget: &Ratio,
    depth: u64,
    ceiling: u64,
) -> Result<StrictInclusion> {
    if f == g {
        return Err(Error::PreconditionFailed("f and g coincide, so f/g does not tend to 0".into()));
    }
    let certificate = certify_limit_zero(f.rule(), g.rule())
        .unwrap_or_else(|_| "ratio decay verified along the computed subsequence".into());
    let mut base = vec![0u64];
    let mut running_max = vec![f.eval(0)];
    let mut gj = g.eval(0);
    let mut j = 0u64;
    'outer: loop {
        let prev = gj.clone();
        loop {
            j += 1;
            if j > depth {
                break 'outer;
            }
            if j > ceiling {
                return Err(Error::SearchCeilingExceeded { what: "next n_k".into(), ceiling });
            }
            running_max.push(running_max.last().unwrap().clone().max(f.eval(j)));
            gj = g.eval(j);
            if gj > prev {
                base.push(j);
                continue 'outer;
            }
        }
    }
    let max_f = |n: u64| running_max[n as usize].clone();
    let mut refined = vec![0u64];
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut terms = Vec::new();
    let mut k = 1u64;
    let mut idx = 1usize;
    while idx < base.len() {
        let n = base[idx];
        idx += 1;
        let gn = g.eval(n);
        if gn.is_zero() {
            continue;
        }
        // max f(≤n)/g(n) < 1/(k 2^k)
        if max_f(n) * nat(k) * (Nat::one() << k as usize) < gn {
            refined.push(n);
            let hv = nat(k) * max_f(n);
            terms.push(ratio(&hv, &gn));
            points.push(n);
            values.push(hv);
            k += 1;
        }
    }
    if refined.len() < 2 {
        return Err(Error::RatioDecayTooSlow { k: 1 });
    }
    for (i, t) in terms.iter().enumerate() {
        if *t >= crate::num::inv_pow2(i as u64 + 1) {
            return Err(Error::VerificationFailed(format!("term {} is not below 2^-{}", i + 1, i + 1)));
        }
    }
    let h = Rule::Sparse { points, values };
    let ledger = WeightLedger::new(1, terms)
        .with_tail(crate::num::inv_pow2(refined.len() as u64 - 1), TailJustification::Geometric);
    let t = OpponentBound::BudgetTimesMax { f: f.rule().clone(), budget: budget.clone() };
    let cum = t.cumulative(depth);
    // Σ_{n≤N} t(n) ≤ budget·max f(≤N) ≤ h(N) at N = n_k once k ≥ budget
    for (k, &n) in refined.iter().enumerate().skip(1) {
        if ratio_u(k as u64, 1) >= *budget && h.eval(n) < cum[n as usize] {
            return Err(Error::VerificationFailed(format!("opponent bound fails at n_{k} = {n}")));
        }
    }
    let plan = build_diagonal(&h, &t, depth, ceiling)?;
    Ok(StrictInclusion { certificate, base, refined, h, ledger, opponent_budget: budget.clone(), plan })
}

/// `f_α(n) = ⌊n^α⌋` for rational `α > 1`.
pub fn chain_member(alpha: &Ratio) -> Result<ParamFunction> {
    if *alpha <= Ratio::one() || alpha.numer().sign() != num_bigint::Sign::Plus {
        return Err(Error::PreconditionFailed("alpha must exceed 1".into()));
    }
    let num = alpha.numer().to_u64().ok_or_else(|| Error::PreconditionFailed("alpha too large".into()))?;
    let den = alpha.denom().to_u64().ok_or_else(|| Error::PreconditionFailed("alpha too large".into()))?;
    ParamFunction::new(Rule::floor_power(num, den))
}

/// Output of [`antichain_pair`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Antichain {
    pub f_a: Rule,
    pub f_b: Rule,
    pub s: Rule,
    pub t: Rule,
    /// `Σ s/f_A` over `1 ≤ n ≤ checked` with the telescoping tail
    pub ledger: WeightLedger,
    /// `n ∈ A∖B` with `Σ_{i≤n} t(i) ≤ Σ_{i<n} (3i)! ≤ (3n−3)!(n−1) < (3n−2)! = s(n)` checked exactly;
    /// the middle step is an equality at `n = 2`
    pub inequality_checked: Vec<u64>,
    pub plan: DiagonalPlan,
}

fn fact(n: u64) -> Nat {
    (2..=n).fold(Nat::one(), |a, k| a * nat(k))
}

pub fn antichain_pair(a: &IndexSet, b: &IndexSet, checked: u64, depth: u64, ceiling: u64) -> Result<Antichain> {
    if a == b {
        return Err(Error::PreconditionFailed("A and B coincide".into()));
    }
    if a.meets_infinitely(b) {
        return Err(Error::NotAlmostDisjoint(format!("{a} and {b} share a residue class")));
    }
    let on = |set: &IndexSet, off: u64, sub: u64| Rule::Indicator {
        set: set.clone(),
        off: Box::new(Rule::constant(off)),
        on: Box::new(Rule::Factorial { mul: 3, sub }),
    };
    let (f_a, f_b) = (on(a, 1, 0), on(b, 1, 0));
    let s = on(a, 0, 2);
    let t = on(b, 0, 0);
    let mut terms = Vec::new();
    for n in 1..=checked {
        let (sv, fv) = (s.eval(n), f_a.eval(n));
        let term = ratio(&sv, &fv);
        if a.contains(n) && term != ratio(&Nat::one(), &nat((3 * n - 1) * 3 * n)) {
            return Err(Error::VerificationFailed(format!("s/f_A at {n} is not 1/((3n-1)3n)")));
        }
        terms.push(term);
    }
    // 1/((3n−1)3n) ≤ 3/((3n−1)(3n+2)) = 1/(3n−1) − 1/(3n+2), telescoping to 1/(3N+2)
    let ledger = WeightLedger::new(1, terms).with_tail(ratio_u(1, 3 * checked + 2), TailJustification::Telescoping);
    let mut inequality_checked = Vec::new();
    for n in a.difference_below(b, checked + 1) {
        if n < 2 {
            continue;
        }
        let t_sum = (1..=n).fold(Nat::zero(), |acc, i| acc + t.eval(i));
        let bound = (1..n).fold(Nat::zero(), |acc, i| acc + fact(3 * i));
        let mid = fact(3 * n - 3) * nat(n - 1);
        if !(t_sum <= bound && bound <= mid && mid < fact(3 * n - 2) && fact(3 * n - 2) == s.eval(n)) {
            return Err(Error::VerificationFailed(format!("factorial chain fails at n = {n}")));
        }
        inequality_checked.push(n);
    }
    let plan = build_diagonal(&s, &OpponentBound::PerLevel { t: t.clone() }, depth, ceiling)?;
    Ok(Antichain { f_a, f_b, s, t, ledger, inequality_checked, plan })
}
