//! Serialized witness bundles: the request that produced them, the constructed
//! objects, and the finite checks. Verification rebuilds from the request.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::diagonal::{self, antichain_pair, separate_summable, strict_inclusion, DiagonalPlan};
use crate::error::{Error, Result};
use crate::num::{ratio_to_string, Ratio};
use crate::param::{IndexSet, ParamFunction, Rule, WeightLedger};
use crate::systems::{BlockSystem, MinusWitness, NodeExtension, NodeValue, Point, PrefixSystem};
use crate::transforms::log_remark;
use crate::witnesses::{self as w, Check};

pub const BUNDLE_VERSION: u32 = 1;

/// Parameters of one construction, tagged by theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "kebab-case")]
pub enum WitnessRequest {
    ComeagerFakenull {
        h: ParamFunction,
        #[serde(with = "crate::num::ratio_pair")]
        budget: Ratio,
        count: usize,
        density_len: u64,
        density_entry: u64,
    },
    MinusPositiveNwd {
        a: NodeExtension,
        opponents: Vec<MinusWitness>,
        stages: u64,
    },
    DisjointPositiveFamily {
        count: usize,
        a: NodeExtension,
        opponents: Vec<MinusWitness>,
        stages: u64,
    },
    ParityEscape {
        parity: Point,
        opponent: PrefixSystem,
        depth: u64,
    },
    MinusNotDomega {
        f: NodeValue,
        depth: u64,
    },
    ENotIdeal {
        h: ParamFunction,
        steps: u64,
        opponent: Option<BlockSystem>,
    },
    ESquareVsPoly {
        p: Rule,
        blocks: u64,
        opponent: PrefixSystem,
    },
    SNotInFin {
        h: ParamFunction,
        #[serde(with = "crate::num::ratio_pair")]
        budget: Ratio,
        count: usize,
        opponent: PrefixSystem,
    },
    SFinStrictEscape {
        opponent: BlockSystem,
        depth: u64,
    },
    SOrthMinus {
        h: ParamFunction,
        #[serde(with = "crate::num::ratio_pair")]
        budget: Ratio,
        count: usize,
        probes: Vec<Point>,
        depth: u64,
    },
    NFinNotOrth {
        f: MinusWitness,
        opponent: PrefixSystem,
        depth: u64,
    },
    DominatingEnvelope {
        f: Rule,
        opponent: PrefixSystem,
        depth: u64,
    },
    BoundingMerge {
        opponents: Vec<PrefixSystem>,
        depth: u64,
    },
    LogRemark {
        h: Rule,
        from: u64,
        to: u64,
    },
    DiagonalSeparate {
        f: ParamFunction,
        g: ParamFunction,
        depth: u64,
        escape: EscapeParams,
    },
    DiagonalStrict {
        f: ParamFunction,
        g: ParamFunction,
        #[serde(with = "crate::num::ratio_pair")]
        budget: Ratio,
        depth: u64,
        escape: EscapeParams,
    },
    DiagonalAntichain {
        a: IndexSet,
        b: IndexSet,
        checked: u64,
        depth: u64,
        escape: EscapeParams,
    },
}

/// Escape run against one opponent on a built plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeParams {
    pub opponent: PrefixSystem,
    pub stages: u64,
    pub burn_in: u64,
}

impl WitnessRequest {
    pub fn tag(&self) -> &'static str {
        match self {
            WitnessRequest::ComeagerFakenull { .. } => "comeager-fakenull",
            WitnessRequest::MinusPositiveNwd { .. } => "minus-positive-nwd",
            WitnessRequest::DisjointPositiveFamily { .. } => "disjoint-positive-family",
            WitnessRequest::ParityEscape { .. } => "parity-escape",
            WitnessRequest::MinusNotDomega { .. } => "minus-not-domega",
            WitnessRequest::ENotIdeal { .. } => "e-not-ideal",
            WitnessRequest::ESquareVsPoly { .. } => "e-square-vs-poly",
            WitnessRequest::SNotInFin { .. } => "s-not-in-fin",
            WitnessRequest::SFinStrictEscape { .. } => "s-fin-strict-escape",
            WitnessRequest::SOrthMinus { .. } => "s-orth-minus",
            WitnessRequest::NFinNotOrth { .. } => "n-fin-not-orth",
            WitnessRequest::DominatingEnvelope { .. } => "dominating-envelope",
            WitnessRequest::BoundingMerge { .. } => "bounding-merge",
            WitnessRequest::LogRemark { .. } => "log-remark",
            WitnessRequest::DiagonalSeparate { .. } => "diagonal-separate",
            WitnessRequest::DiagonalStrict { .. } => "diagonal-strict",
            WitnessRequest::DiagonalAntichain { .. } => "diagonal-antichain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub theorem: String,
    pub ceiling: u64,
    pub params: WitnessRequest,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub systems: BTreeMap<String, Value>,
    pub points: BTreeMap<String, Point>,
    pub ledgers: BTreeMap<String, WeightLedger>,
    pub certificates: BTreeMap<String, Value>,
    pub claims: Vec<Check>,
    pub notes: Vec<String>,
    pub trace: Vec<String>,
}

impl Body {
    fn system(&mut self, name: impl Into<String>, v: &impl Serialize) -> Result<()> {
        let v = serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))?;
        self.systems.insert(name.into(), v);
        Ok(())
    }

    fn certificate(&mut self, name: impl Into<String>, v: &impl Serialize) -> Result<()> {
        let v = serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))?;
        self.certificates.insert(name.into(), v);
        Ok(())
    }

    fn point(&mut self, name: impl Into<String>, p: &Point) {
        self.points.insert(name.into(), p.clone());
    }

    fn claims(&mut self, prefix: &str, checks: &[Check]) {
        for c in checks {
            let mut c = c.clone();
            if !prefix.is_empty() {
                c.name = format!("{prefix}/{}", c.name);
            }
            self.claims.push(c);
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn trace(&mut self, s: impl Into<String>) {
        self.trace.push(s.into());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessBundle {
    pub header: Header,
    pub body: Body,
    /// sha256 of the canonical JSON of `(header, body)`
    pub checksum: String,
}

fn checksum(header: &Header, body: &Body) -> Result<String> {
    let bytes = serde_json::to_vec(&(header, body)).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl WitnessBundle {
    pub fn passed(&self) -> bool {
        w::all_passed(&self.body.claims)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn build(request: &WitnessRequest, ceiling: u64) -> Result<WitnessBundle> {
    let mut b = Body::default();
    match request {
        WitnessRequest::ComeagerFakenull { h, budget, count, density_len, density_entry } => {
            let c = w::comeager_fakenull(h, budget, *count, ceiling)?;
            let d = w::density_check(&c, *density_len, *density_entry, ceiling)?;
            b.system("F", &c.system)?;
            b.ledgers.insert("F".into(), c.ledger.clone());
            b.claims("", &c.checks());
            b.claims.push(Check::new(
                "density",
                d.failures.is_empty(),
                format!("{} words, {} confirmed by level scan, {} failures", d.words, d.scanned, d.failures.len()),
            ));
            b.note("F is the limsup of the cylinders [q_n↾h(k_n)], a dense G_δ, so comeager");
            b.note("F lies in f𝓝(h) with S_{h(k_n)} = {q_n↾h(k_n)}, hence f𝓝(h) ⊥ 𝓜");
            for (n, (k, l)) in c.sparse.indices.iter().zip(&c.sparse.values).enumerate() {
                b.trace(format!("n={n} k_n={k} level={l}"));
            }
        }
        WitnessRequest::MinusPositiveNwd { a, opponents, stages } => {
            let nwd = w::minus_positive_nwd(a.clone());
            b.system("a", &nwd.a)?;
            b.system("b", &nwd.b)?;
            for (i, f) in opponents.iter().enumerate() {
                let e = nwd.escape(f, *stages, ceiling)?;
                b.system(format!("F{i}"), f)?;
                b.point(format!("x{i}"), &e.point);
                b.claims(&format!("F{i}"), &e.checks);
                for (n, s) in e.stages.iter().enumerate() {
                    b.trace(format!("F{i} n={n} |xi|={} m={} i={}", s.node.len(), s.block, s.i));
                }
            }
            b.note("B = {x : ∀σ σ⌢b(σ) ⊄ x} ∖ A is nowhere dense and disjoint from A");
            b.note("each x lies in B and meets its 𝓜₋ witness infinitely often, so B ∉ 𝓜₋");
        }
        WitnessRequest::DisjointPositiveFamily { count, a, opponents, stages } => {
            let fam = w::disjoint_positive_family(*count, a.clone(), opponents, *stages, ceiling)?;
            for (j, m) in fam.members.iter().enumerate() {
                b.system(format!("a{j}"), &m.set.a)?;
                for (i, e) in m.escapes.iter().enumerate() {
                    b.point(format!("x{j}.{i}"), &e.point);
                    b.claims(&format!("M{j}/F{i}"), &e.checks);
                }
            }
            for (i, f) in opponents.iter().enumerate() {
                b.system(format!("F{i}"), f)?;
            }
            b.claims("", &fam.checks);
            for c in &fam.cross {
                let node = c.node.as_ref().map_or("none".into(), |n| n.len().to_string());
                b.trace(format!("point of M{} leaves M{} at node length {node}", c.point_of, c.excluded_from));
            }
            b.note("pairwise disjoint meager 𝓜₋-positive sets; 𝓜₋ is not add(𝓜)-cc");
        }
        WitnessRequest::ParityEscape { parity, opponent, depth } => {
            let e = w::parity_escape(parity, opponent, *depth, ceiling)?;
            b.system("S", opponent)?;
            b.point("y", &e.point);
            b.claims("", &e.checks);
            b.trace(format!("y↾{depth} = {}", crate::systems::Word(e.values.clone())));
            b.note("y ∈ A_f but y↾n ∉ S_n, so A_f ∉ f𝓝(Fin); the A_f are pairwise disjoint, so f𝓝(Fin) is not 𝔠-cc");
        }
        WitnessRequest::MinusNotDomega { f, depth } => {
            let e = w::minus_not_domega(f, *depth);
            b.system("F", &e.witness)?;
            b.point("x", &e.point);
            b.claims("", &e.checks);
            b.note("x(2n+1) ≠ x(2n) puts x in F ∈ 𝓜₋ while x(2n) = f(x↾2n) keeps x out of D_f, so 𝓜₋ ⊄ 𝓓_ω");
        }
        WitnessRequest::ENotIdeal { h, steps, opponent } => {
            let e = w::e_not_ideal(h, *steps, ceiling)?;
            b.system("A", &e.a_system)?;
            b.system("B", &e.b_system)?;
            b.ledgers.insert("A".into(), e.a_system.ledger(*steps)?);
            b.ledgers.insert("B".into(), e.b_system.ledger(*steps)?);
            b.claims.push(Check::new("recursion-rescan", e.rescan(), format!("{steps} steps")));
            b.claims("", &e.ledger_checks()?);
            for r in &e.trace {
                let show = |v: &Option<crate::num::Nat>| v.as_ref().map_or("-".into(), |v| v.to_string());
                b.trace(format!("n={} a={} b={} E(a)={} E(b)={}", r.step, r.a, r.b, show(&r.e_a), show(&r.e_b)));
            }
            if let Some(c) = opponent {
                let x = e.escape(c, ceiling)?;
                b.system("C", c)?;
                b.point("x", &x.point);
                b.claims("", &x.checks);
                b.trace(format!("branch {} on blocks {:?}", x.branch, x.blocks));
            }
            b.note("A, B ∈ f𝓔(h), and no C ∈ f𝓔(h) covers A ∪ B, so f𝓔(h) is not an ideal");
        }
        WitnessRequest::ESquareVsPoly { p, blocks, opponent } => {
            let e = w::e_square_vs_poly(p, *blocks, ceiling)?;
            let x = e.escape(opponent, ceiling)?;
            b.system("A", &e.a)?;
            b.system("S", opponent)?;
            b.point("x", &x.point);
            b.claims("", &x.checks);
            b.trace(format!("K={}", e.k_start));
            for (k, bits) in &x.choices {
                let s: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
                b.trace(format!("k={k} sigma={s}"));
            }
            b.note("x ∈ A ∈ f𝓔(n ↦ n²) while x↾j ∉ S_j on the window, so f𝓔(n ↦ n²) ⊄ f𝓝(p)");
        }
        WitnessRequest::SNotInFin { h, budget, count, opponent } => {
            let s = w::s_not_in_fin(h, budget, *count, ceiling)?;
            let x = s.escape(opponent, ceiling)?;
            b.system("A", &s.a)?;
            b.system("S", opponent)?;
            b.ledgers.insert("A".into(), s.ledger.clone());
            let total = s.ledger.total_bound().expect("sparse ledger has a tail");
            b.claims.push(Check::new(
                "ledger-within-budget",
                total <= *budget,
                format!("{} <= {}", ratio_to_string(&total), ratio_to_string(budget)),
            ));
            b.point("y", &x.point);
            b.claims("", &x.checks);
            b.note("y ∈ A ∈ f𝓢(h) and y↾k ∉ S_k, so f𝓢(h) ⊄ f𝓝(Fin)");
        }
        WitnessRequest::SFinStrictEscape { opponent, depth } => {
            let e = w::s_fin_strict_escape(opponent, *depth, ceiling)?;
            b.system("C", opponent)?;
            b.point("x", &e.point);
            b.claims("", &e.checks);
            b.trace(format!("branch {}; zero coordinates: {}", e.branch, e.zero_report));
            b.note("x has infinitely many zeros yet avoids C, so {x : ∃^∞n x(n) = 0} lies outside every f𝓢(h)");
        }
        WitnessRequest::SOrthMinus { h, budget, count, probes, depth } => {
            let s = w::s_orth_minus(h, budget, *count, ceiling)?;
            b.system("A", &s.a)?;
            b.system("complement", &s.complement)?;
            b.ledgers.insert("A".into(), s.ledger.clone());
            b.claims.push(s.ledger_check()?);
            for (i, x) in probes.iter().enumerate() {
                b.point(format!("probe{i}"), x);
                b.claims(&format!("probe{i}"), &[s.complement_check(x, *depth)]);
            }
            b.note("A ∈ f𝓢(h) and its complement is in 𝓜₋, so f𝓢(h) ⊥ 𝓜₋");
        }
        WitnessRequest::NFinNotOrth { f, opponent, depth } => {
            let e = w::n_fin_not_orth_escape(f, opponent, *depth, ceiling)?;
            b.system("F", f)?;
            b.system("S", opponent)?;
            b.point("y", &e.point);
            b.claims("", &e.checks);
            b.note("y ∉ F and y ∉ A for the given pair, so no F ∈ 𝓜₋ has complement in f𝓝(Fin)");
        }
        WitnessRequest::DominatingEnvelope { f, opponent, depth } => {
            let env = w::dominating_envelope(f);
            b.system("envelope", &env.system)?;
            b.system("T", opponent)?;
            let sizes_ok = (0..=(*depth).min(5))
                .all(|n| env.system.levels.size(n, ceiling).map(|s| s == env.size(n)).unwrap_or(false));
            b.claims.push(Check::new("size-formula", sizes_ok, "levels 0..=5"));
            match w::envelope_contains(opponent, f, *depth, ceiling)? {
                Ok(t) => b.claims.push(Check::new("contained", true, format!("T_n ⊆ S^f_n for {t} ≤ n ≤ {depth}"))),
                Err(fail) => b.claims.push(Check::new(
                    "contained",
                    false,
                    format!("level {} coordinate {}: {} > {}", fail.level, fail.coordinate, fail.value, fail.bound),
                )),
            }
            b.note("every F ∈ f𝓝(Fin) sits inside the envelope of a dominating function, so cof(f𝓝(Fin)) ≤ 𝔡");
        }
        WitnessRequest::BoundingMerge { opponents, depth } => {
            let m = w::bounding_merge(opponents, *depth, ceiling)?;
            b.system("T", &m.merged)?;
            for (i, (s, t)) in opponents.iter().zip(&m.thresholds).enumerate() {
                b.system(format!("S{i}"), s)?;
                let detail = t.map_or("fails at the last checked level".into(), |t| format!("from level {t}"));
                b.claims.push(Check::new(&format!("S{i}-inside-T"), t.is_some(), detail));
            }
            let f: Vec<String> = (0..m.depth).map(|n| m.f.eval(n).to_string()).collect();
            b.trace(format!("f = [{}]", f.join(",")));
            b.note("a bound on the f_α gives one system absorbing every S^α, so add(f𝓝(Fin)) ≥ 𝔟");
        }
        WitnessRequest::LogRemark { h, from, to } => {
            let r = log_remark(h, *from, *to)?;
            b.claims.push(Check::new(
                "bound-holds-in-range",
                r.holds(),
                format!("h′(n) ≤ h(n²) for {}..={}; failures {:?}", r.from, r.to, r.failures),
            ));
            b.note("the block maximum of a floor logarithm is at most twice the logarithm");
            b.note(format!(
                "below {} the intermediate step (n+1)(n+2)/2 ≤ n² is false at {:?}; h′(n) ≤ ⌊log n²⌋ still holds at {:?}",
                r.from, r.intermediate_false_at, r.holds_below_from
            ));
        }
        WitnessRequest::DiagonalSeparate { f, g, depth, escape } => {
            let sep = separate_summable(f, g, *depth, ceiling)?;
            b.trace(format!("Σ g/f: {}", sep.certificate));
            b.ledgers.insert("S".into(), sep.ledger.clone());
            b.claims.push(Check::new("ledger-recheck", sep.ledger.recheck(), sep.ledger.to_string()));
            plan_and_escape(&mut b, &sep.plan, escape, ceiling)?;
            b.note("S ∈ f𝓝(g) and no f𝓝(f) system covers S, so f𝓝(g) ⊄ f𝓝(f)");
        }
        WitnessRequest::DiagonalStrict { f, g, budget, depth, escape } => {
            let st = strict_inclusion(f, g, budget, *depth, ceiling)?;
            b.trace(format!("f/g → 0: {}", st.certificate));
            b.trace(format!("n_k = {:?}", st.refined));
            b.system("h", &st.h)?;
            b.ledgers.insert("S".into(), st.ledger.clone());
            b.claims.push(Check::new("ledger-recheck", st.ledger.recheck(), st.ledger.to_string()));
            plan_and_escape(&mut b, &st.plan, escape, ceiling)?;
            b.note("S ∈ f𝓝(g) escapes f𝓝(f) systems within the opponent budget");
        }
        WitnessRequest::DiagonalAntichain { a, b: set_b, checked, depth, escape } => {
            let ac = antichain_pair(a, set_b, *checked, *depth, ceiling)?;
            b.system("f_A", &ac.f_a)?;
            b.system("f_B", &ac.f_b)?;
            b.ledgers.insert("S".into(), ac.ledger.clone());
            b.claims.push(Check::new("ledger-recheck", ac.ledger.recheck(), ac.ledger.to_string()));
            b.trace(format!("size inequality checked at {:?}", ac.inequality_checked));
            plan_and_escape(&mut b, &ac.plan, escape, ceiling)?;
            b.note("S ∈ f𝓝(f_A) ∖ f𝓝(f_B), one half of the antichain pair");
        }
    }
    let header = Header { version: BUNDLE_VERSION, theorem: request.tag().into(), ceiling, params: request.clone() };
    let checksum = checksum(&header, &b)?;
    Ok(WitnessBundle { header, body: b, checksum })
}

fn plan_and_escape(b: &mut Body, plan: &DiagonalPlan, e: &EscapeParams, ceiling: u64) -> Result<()> {
    b.system("S", plan)?;
    b.system("T", &e.opponent)?;
    let pc = plan.verify(ceiling);
    b.claims.push(Check::new(
        "plan-structure",
        pc.is_ok(),
        match &pc {
            Ok(c) => format!(
                "{} levels, {} windows, {} enumerated",
                c.levels_checked, c.windows_checked, c.windows_enumerated
            ),
            Err(err) => err.to_string(),
        },
    ));
    let (x, cert) = diagonal::escape(plan, &e.opponent, e.stages, e.burn_in, ceiling)?;
    let ve = diagonal::verify_escape(plan, &e.opponent, &cert, ceiling);
    b.claims.push(Check::new(
        "escape",
        ve.is_ok(),
        ve.err().map_or(format!("x ∈ S at levels {:?}, x ∉ T up to {}", cert.hits, cert.checked_depth), |e| {
            e.to_string()
        }),
    ));
    b.claims.push(Check::new(
        "escape-stages",
        cert.stages.len() as u64 == e.stages,
        format!("{} of {} stages", cert.stages.len(), e.stages),
    ));
    b.trace(format!("hits {:?}", cert.hits));
    b.point("x", &x);
    b.certificate("escape", &cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub checksum_ok: bool,
    pub rebuilt_matches: bool,
    pub failed_claims: Vec<String>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checksum_ok && self.rebuilt_matches && self.failed_claims.is_empty()
    }
}

/// Re-runs the construction from the header and compares.
pub fn verify(bundle: &WitnessBundle) -> Result<Verification> {
    if bundle.header.version != BUNDLE_VERSION {
        return Err(Error::VerificationFailed(format!("unknown bundle version {}", bundle.header.version)));
    }
    let checksum_ok = checksum(&bundle.header, &bundle.body)? == bundle.checksum;
    let rebuilt = build(&bundle.header.params, bundle.header.ceiling)?;
    let failed_claims = rebuilt.body.claims.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    Ok(Verification { checksum_ok, rebuilt_matches: rebuilt.body == bundle.body, failed_claims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio_u;
    use crate::systems::{IntervalPartition, Levels, Word};

    fn parity_request() -> WitnessRequest {
        WitnessRequest::ParityEscape {
            parity: Point::periodic(&[], &[0, 1]),
            opponent: PrefixSystem::fin(Levels::Zeros { from: 0 }),
            depth: 12,
        }
    }

    #[test]
    fn round_trip_and_verify() {
        let bundle = build(&parity_request(), 1000).unwrap();
        assert!(bundle.passed());
        let back = WitnessBundle::from_json(&bundle.to_json().unwrap()).unwrap();
        assert_eq!(back, bundle);
        assert!(verify(&back).unwrap().passed());
    }

    #[test]
    fn tampering_is_detected() {
        let mut bundle = build(&parity_request(), 1000).unwrap();
        bundle.body.points.insert("y".into(), Point::zero());
        let v = verify(&bundle).unwrap();
        assert!(!v.checksum_ok && !v.rebuilt_matches);
    }

    #[test]
    fn log_remark_bundle_records_small_cases() {
        let bundle = build(&WitnessRequest::LogRemark { h: Rule::FloorLog2, from: 4, to: 200 }, 1000).unwrap();
        assert!(bundle.passed());
        assert!(bundle.body.notes[1].contains("false at [2, 3]"), "{:?}", bundle.body.notes);
    }

    #[test]
    fn every_tag_builds() {
        let h = ParamFunction::parse("exp 2").unwrap();
        let unit = MinusWitness { pattern: Point::zero(), partition: IntervalPartition::unit() };
        let zeros = PrefixSystem::fin(Levels::Zeros { from: 0 });
        let requests = vec![
            WitnessRequest::ComeagerFakenull {
                h: h.clone(),
                budget: ratio_u(1, 1),
                count: 4,
                density_len: 2,
                density_entry: 2,
            },
            WitnessRequest::MinusPositiveNwd {
                a: NodeExtension::constant(Word::from_u64s(&[0])),
                opponents: vec![unit.clone()],
                stages: 3,
            },
            WitnessRequest::MinusNotDomega { f: NodeValue::Length, depth: 10 },
            WitnessRequest::ENotIdeal { h: h.clone(), steps: 3, opponent: None },
            WitnessRequest::SNotInFin { h: h.clone(), budget: ratio_u(1, 1), count: 3, opponent: zeros.clone() },
            WitnessRequest::SOrthMinus {
                h: h.clone(),
                budget: ratio_u(1, 1),
                count: 4,
                probes: vec![Point::zero(), Point::constant(1)],
                depth: 30,
            },
            WitnessRequest::NFinNotOrth { f: unit, opponent: zeros.clone(), depth: 10 },
            WitnessRequest::DominatingEnvelope { f: Rule::constant(0), opponent: zeros.clone(), depth: 6 },
            WitnessRequest::BoundingMerge { opponents: vec![zeros], depth: 6 },
        ];
        for r in requests {
            let bundle = build(&r, 1_000_000).unwrap();
            assert!(bundle.passed(), "{}: {:?}", r.tag(), bundle.body.claims);
            assert_eq!(bundle.header.theorem, r.tag());
        }
    }

    #[test]
    fn separate_bundle_depth_limits_stages() {
        let r = |stages| WitnessRequest::DiagonalSeparate {
            f: ParamFunction::parse("poly n").unwrap(),
            g: ParamFunction::parse("poly n^3").unwrap(),
            depth: 500,
            escape: EscapeParams { opponent: PrefixSystem::fin(Levels::Zeros { from: 2 }), stages, burn_in: 0 },
        };
        let bundle = build(&r(2), 1_000_000).unwrap();
        assert!(bundle.passed(), "{:?}", bundle.body.claims);
        assert!(verify(&bundle).unwrap().passed());
        // windows for s(j) = j close only at hi > lo(lo+1)/2
        assert!(matches!(build(&r(10), 1_000_000), Err(Error::DepthExhausted { stage: 3, .. })));
    }
}
