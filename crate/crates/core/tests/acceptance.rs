//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line and
//! asserts the same condition; tolerances are the pinned desk-scale ones.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use fakeideal::bundle::{self, WitnessBundle, WitnessRequest};
use fakeideal::cli::{random_block_system, random_prefix_system};
use fakeideal::diagonal::{
    antichain_pair, build_diagonal, chain_member, check_hypothesis, escape, strict_inclusion, verify_escape,
    OpponentBound,
};
use fakeideal::num::{nat, ratio, ratio_u, Nat, Ratio};
use fakeideal::param::{IndexSet, ParamFunction, Rule};
use fakeideal::systems::{
    BlockSystem, IntervalPartition, Levels, NodeValue, Patterns, Point, PrefixSystem, Quantifier, Weight, Word,
};
use fakeideal::transforms::{e_to_n, log_remark, Side};
use fakeideal::witnesses::{
    bounding_merge, comeager_fakenull, density_check, dominating_envelope, e_not_ideal, parity_escape,
};

fn report(n: u32, ok: bool, detail: impl AsRef<str>) {
    println!("criterion {n}: {} {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    assert!(ok, "criterion {n}: {}", detail.as_ref());
}

fn exp2() -> ParamFunction {
    ParamFunction::parse("exp 2").unwrap()
}

#[test]
fn criterion_01_diagonal_end_to_end() {
    let start = Instant::now();
    let s = Rule::Step { breakpoints: vec![0, 1], values: vec![nat(0), nat(2)] };
    let t = OpponentBound::PerLevel { t: Rule::constant(1) };
    let opponent = PrefixSystem::fin(Levels::Zeros { from: 1 });
    let mut problems = Vec::new();
    match build_diagonal(&s, &t, 2000, 1_000_000) {
        Err(e) => problems.push(format!("build: {e}")),
        Ok(plan) => {
            if plan.built_depth < 2000 {
                problems.push(format!("plan complete only through level {}", plan.built_depth));
            }
            if let Some(j) = (1..=plan.built_depth).find(|&j| plan.level_size(j) != nat(2)) {
                problems.push(format!("|S_{j}| != 2"));
            }
            match plan.verify(1_000_000) {
                Ok(c) if c.windows_enumerated == c.windows_checked => {}
                Ok(c) => problems.push(format!("{} of {} windows enumerated", c.windows_enumerated, c.windows_checked)),
                Err(e) => problems.push(format!("structure: {e}")),
            }
            match escape(&plan, &opponent, 20, 0, 1_000_000) {
                Err(e) => problems.push(format!("escape: {e}")),
                Ok((_, cert)) => {
                    if cert.hits.len() < 20 {
                        problems.push(format!("{} hits", cert.hits.len()));
                    }
                    if cert.checked_depth < 2000 {
                        problems.push(format!("opponent avoidance checked only to {}", cert.checked_depth));
                    }
                    if let Err(e) = verify_escape(&plan, &opponent, &cert, 1_000_000) {
                        problems.push(e.to_string());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        problems.push(format!("runtime {elapsed:?}"));
    }
    report(1, problems.is_empty(), format!("s=(0,2,2,…) t≡1 depth 2000 stages 20: {problems:?}"));
}

#[test]
fn criterion_02_corollary_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    for trial in 0..1000 {
        let values: Vec<u64> = (0..64).map(|_| rng.gen_range(1..=10)).collect();
        let s = Rule::table(values.iter().map(|&v| nat(v)).collect(), Rule::constant(values[63]));
        let at = |i: u64| values.get(i as usize).copied().unwrap_or(values[63]);
        let least = check_hypothesis(&s, &OpponentBound::Predecessor { s: s.clone() }, 20, 1000).unwrap();
        for k in 0..=20u64 {
            let n = (0..=k).map(at).sum::<u64>() + 1;
            // Σ_{k≤i≤N} s(i) against Σ_{1≤j≤N} (s(j) − 1)
            let lhs: u64 = (k..=n).map(at).sum();
            let rhs: u64 = (1..=n).map(|j| at(j) - 1).sum();
            if lhs <= rhs || least[k as usize].1 > n {
                bad.push((trial, k));
            }
        }
    }
    report(2, bad.is_empty(), format!("1000 profiles, k ≤ 20, violations {bad:?}"));
}

fn random_e_system(rng: &mut ChaCha8Rng) -> BlockSystem {
    let blocks = rng.gen_range(1..=6);
    let lengths: Vec<u64> = (0..blocks).map(|_| rng.gen_range(1..=3)).collect();
    let patterns = lengths.iter().enumerate().map(|(n, &len)| {
        let count = rng.gen_range(1..=4);
        let words = (0..count).map(|_| Word::from_u64s(&(0..len).map(|_| rng.gen_range(0..3)).collect::<Vec<_>>()));
        (n as u64, words.collect::<Vec<_>>())
    });
    BlockSystem {
        partition: IntervalPartition::from_lengths(&lengths),
        patterns: Patterns::explicit(patterns),
        quantifier: Quantifier::AllButFinitely,
        weight: Weight::Param { h: exp2() },
    }
}

#[test]
fn criterion_03_e_to_n_weight_and_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<Point> = (0..729u64)
        .map(|mut i| {
            let w: Vec<u64> = (0..6)
                .map(|_| {
                    let d = i % 3;
                    i /= 3;
                    d
                })
                .collect();
            Point::eventually_zero(Word::from_u64s(&w))
        })
        .collect();
    let mut bad = Vec::new();
    for trial in 0..100 {
        let sys = random_e_system(&mut rng);
        let Patterns::Explicit { blocks: pats } = &sys.patterns else { unreachable!() };
        let blocks = pats.keys().max().map_or(1, |m| m + 1);
        let t = match e_to_n(&sys, blocks, 1_000_000) {
            Ok(t) => t,
            Err(e) => {
                bad.push(format!("{trial}: {e}"));
                continue;
            }
        };
        // oracle: |S_{end(k)}| = Π_{i≤k} |J_i|, weights 2^{-n}
        let mut source = Ratio::zero();
        let mut target = Ratio::zero();
        let mut constant = Ratio::one();
        let mut product = Nat::one();
        for k in 0..blocks {
            let j = nat(pats.get(&k).map_or(0, |v| v.len() as u64));
            let len = sys.partition.len(k);
            let r = ratio(&j, &(Nat::one() << len as usize));
            if r > Ratio::one() {
                constant *= &r;
            }
            source += r;
            product *= j;
            target += ratio(&product, &(Nat::one() << sys.partition.end(k) as usize));
        }
        let cmp = t.comparison.as_ref().expect("weighted transform");
        if target > &constant * &source || cmp.constant != constant || !cmp.holds() {
            bad.push(format!("{trial}: weights"));
        }
        let src = [sys.clone()];
        let tgt = [t.target.clone()];
        for x in &points {
            let v = t.certificate.violations(&Side::Block(&src), &Side::Prefix(&tgt), x).unwrap();
            let direct = (0..blocks).any(|k| (0..=k).all(|i| sys.hit(i, x)) && !t.target.hit(sys.partition.end(k), x));
            if !v.is_empty() || direct {
                bad.push(format!("{trial}: coverage at {}", x.prefix(6)));
                break;
            }
        }
    }
    report(3, bad.is_empty(), format!("100 systems, 3^6 points each, failures {bad:?}"));
}

#[test]
fn criterion_04_non_ideal_recursion() {
    let h = exp2();
    let e = e_not_ideal(&h, 12, 1_000_000).unwrap();
    // for h = 2ⁿ, E(x) = 2^{log E} and e/h(d) < 2^{-n} iff d > log e + n
    let (mut a, mut b) = (vec![0u64], vec![0u64, 1]);
    let mut log_ea = vec![1u64];
    let mut log_eb = vec![0u64];
    a.push(a[0] + log_ea[0] + 2);
    log_eb.push(a[1]);
    for n in 2..=12u64 {
        let i = n as usize;
        b.push(b[i - 1] + log_eb[i - 1] + n + 1);
        log_ea.push(b[i]);
        a.push(a[i - 1] + log_ea[i - 1] + n + 1);
        log_eb.push(a[i]);
    }
    let pow = |k: u64| BigUint::one() << k as usize;
    let mut problems = Vec::new();
    for (n, row) in e.trace.iter().enumerate() {
        if row.a != a[n] || row.b != b[n] {
            problems.push(format!("step {n}: ({}, {}) vs oracle ({}, {})", row.a, row.b, a[n], b[n]));
        }
        if n >= 1 && row.e_b != Some(pow(log_eb[n])) {
            problems.push(format!("E(b_{n})"));
        }
    }
    let spot = (e.trace[1].a, e.trace[1].e_b.clone(), e.trace[2].b);
    if spot != (3, Some(nat(8)), 7) {
        problems.push(format!("a_1, E(b_1), b_2 = {spot:?}"));
    }
    if !e.rescan() {
        problems.push("rescan".into());
    }
    for c in e.ledger_checks().unwrap() {
        if !c.passed {
            problems.push(format!("{}: {}", c.name, c.detail));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut escaped = 0;
    let mut not_applicable = 0;
    for _ in 0..20 {
        let c = random_block_system(&mut rng, 40, 3);
        match e.escape(&c, 1_000_000) {
            Ok(x) => {
                let own = if x.branch == "A" { &e.a_system } else { &e.b_system };
                let caught: Vec<u64> = x.blocks.iter().copied().filter(|&n| c.hit(n, &x.point)).collect();
                let depth = x.values.iter().map(|v| v.0).max().unwrap_or(0);
                let outside = (0..own.partition.blocks_within(depth)).filter(|&n| !own.hit(n, &x.point)).count();
                if !caught.is_empty() || outside > 0 || x.checks.iter().any(|c| !c.passed) {
                    problems.push(format!("escape caught at {caught:?}, {outside} own blocks missed"));
                }
                escaped += 1;
            }
            Err(fakeideal::error::Error::CaseNotApplicable(_)) => not_applicable += 1,
            Err(err) => problems.push(err.to_string()),
        }
    }
    report(
        4,
        problems.is_empty(),
        format!("12 steps; {escaped} escapes, {not_applicable} without an applicable block; {problems:?}"),
    );
}

#[test]
fn criterion_05_orthogonality_witness() {
    let start = Instant::now();
    let c = comeager_fakenull(&exp2(), &ratio_u(1, 1), 4, 1_000_000).unwrap();
    let total = c.ledger.total_bound().expect("tail certified");
    let d = density_check(&c, 6, 6, 1_000_000).unwrap();
    let elapsed = start.elapsed();
    let ok = total <= ratio_u(1, 1) && d.failures.is_empty() && elapsed < Duration::from_secs(5);
    report(5, ok, format!("ledger {total} ≤ 1, {} cylinders, {} failures, {elapsed:?}", d.words, d.failures.len()));
}

#[test]
fn criterion_06_parity_non_cc() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    for trial in 0..100 {
        let opponent = random_prefix_system(&mut rng, 30, 9, 3);
        let bits: Vec<u64> = (0..30).map(|_| rng.gen_range(0..2)).collect();
        let parity = Point::eventually_zero(Word::from_u64s(&bits));
        let y = parity_escape(&parity, &opponent, 30, 1_000_000).unwrap().point;
        let parity_ok = (0..30).all(|n| y.at(n) % 2u32 == nat(bits[n as usize]));
        let avoids = (0..=30).all(|n| !opponent.levels.contains(n, &y.prefix(n)));
        if !parity_ok || !avoids {
            bad.push(trial);
        }
    }
    report(6, bad.is_empty(), format!("100 opponents, failing trials {bad:?}"));
}

#[test]
fn criterion_07_envelope_and_merge() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    for _ in 0..50 {
        let f: Vec<u64> = (0..5).map(|_| rng.gen_range(0..=3)).collect();
        let env = dominating_envelope(&Rule::table(f.iter().map(|&v| nat(v)).collect(), Rule::constant(0)));
        for n in 0..=5u64 {
            let brute = (0..4u64.pow(n as u32))
                .filter(|&code| (0..n).all(|i| (code / 4u64.pow(i as u32)) % 4 <= f[i as usize]))
                .count() as u64;
            if env.size(n) != nat(brute) || env.system.levels.size(n, 10_000).unwrap() != nat(brute) {
                bad.push(format!("envelope f={f:?} n={n}"));
            }
        }
    }
    // levels stop at 8, so an inclusion certified on [N, 10) holds for every n ≥ N
    let depth = 10;
    let mut unresolved = 0;
    for trial in 0..100 {
        let pair = [random_prefix_system(&mut rng, 8, 5, 2), random_prefix_system(&mut rng, 8, 5, 2)];
        assert!(pair.iter().all(|s| s.levels.last_explicit_level().is_none_or(|l| l + 1 < depth)));
        let m = bounding_merge(&pair, depth, 1_000_000).unwrap();
        for (s, threshold) in pair.iter().zip(&m.thresholds) {
            let Some(from) = threshold else {
                unresolved += 1;
                continue;
            };
            for n in *from..depth {
                let bound = m.f.eval(n);
                for w in s.levels.words(n, 1_000_000).unwrap() {
                    if !m.merged.levels.contains(n, &w) || w.entries().iter().any(|v| *v >= bound) {
                        bad.push(format!("merge trial {trial} level {n}"));
                    }
                }
            }
        }
    }
    report(
        7,
        bad.is_empty() && unresolved == 0,
        format!("envelope n ≤ 5, f ≤ 3; 100 merge pairs, {unresolved} thresholds unresolved; failures {bad:?}"),
    );
}

/// Levels `n` with `⌊f(n)·2^{-(i+1)}⌋` random words for the i-th chosen level.
fn budget_opponent(rng: &mut ChaCha8Rng, f: &ParamFunction, depth: u64) -> (PrefixSystem, Ratio) {
    let mut levels = BTreeMap::new();
    let mut weight = Ratio::zero();
    let mut i = 0;
    for n in 2..=depth {
        if rng.gen_bool(0.3) {
            let want = (f.eval(n) >> (i + 1) as usize).min(nat(6));
            i += 1;
            let mut words: Vec<Word> = Vec::new();
            while nat(words.len() as u64) < want {
                let w = Word::from_u64s(&(0..n).map(|_| rng.gen_range(0..3)).collect::<Vec<_>>());
                if !words.contains(&w) {
                    words.push(w);
                }
            }
            if !words.is_empty() {
                weight += ratio(&nat(words.len() as u64), &f.eval(n));
                levels.insert(n, words);
            }
        }
    }
    (PrefixSystem::fin(Levels::Explicit { levels }), weight)
}

#[test]
fn criterion_08_strict_inclusion_and_antichain() {
    let f = chain_member(&ratio_u(3, 2)).unwrap();
    let g = chain_member(&ratio_u(2, 1)).unwrap();
    let st = strict_inclusion(&f, &g, &ratio_u(1, 1), 300, 1_000_000).unwrap();
    let mut problems = Vec::new();
    if st.refined.len() < 3 || !st.ledger.recheck() {
        problems.push(format!("n_k = {:?}", st.refined));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..10 {
        let (opp, weight) = budget_opponent(&mut rng, &f, st.plan.built_depth);
        if weight > ratio_u(1, 1) {
            problems.push(format!("opponent {trial} over budget"));
            continue;
        }
        match escape(&st.plan, &opp, 1, 0, 1_000_000) {
            Ok((_, cert)) => {
                if let Err(e) = verify_escape(&st.plan, &opp, &cert, 1_000_000) {
                    problems.push(format!("opponent {trial}: {e}"));
                }
            }
            Err(e) => problems.push(format!("opponent {trial}: {e}")),
        }
    }
    let ac = antichain_pair(&IndexSet::evens(), &IndexSet::odds(), 8, 60, 1_000_000).unwrap();
    let fact = |n: u64| (2..=n).fold(BigUint::one(), |a, k| a * k);
    for &n in &ac.inequality_checked {
        let lhs: BigUint = (1..=n).map(|i| ac.t.eval(i)).sum();
        let mid: BigUint = (1..n).map(|i| fact(3 * i)).sum();
        let ok = lhs <= mid && mid <= fact(3 * n - 3) * (n - 1) && fact(3 * n - 3) * (n - 1) < fact(3 * n - 2);
        if !ok || ac.s.eval(n) != fact(3 * n - 2) {
            problems.push(format!("factorial chain at {n}"));
        }
    }
    if ac.inequality_checked != vec![2, 4, 6, 8] {
        problems.push(format!("checked {:?}", ac.inequality_checked));
    }
    report(
        8,
        problems.is_empty(),
        format!("n_k = {:?}, 10 budget opponents at 1 stage, antichain n ≤ 8; {problems:?}", st.refined),
    );
}

#[test]
fn criterion_09_log_remark() {
    let start = Instant::now();
    let r = log_remark(&Rule::FloorLog2, 4, 1_000_000).unwrap();
    let b = bundle::build(&WitnessRequest::LogRemark { h: Rule::FloorLog2, from: 4, to: 100 }, 1000).unwrap();
    let noted = b.body.notes.iter().any(|n| n.contains("false at [2, 3]"));
    let elapsed = start.elapsed();
    let ok = r.holds() && r.intermediate_false_at == [2, 3] && noted && elapsed < Duration::from_secs(30);
    report(
        9,
        ok,
        format!(
            "4 ≤ n ≤ 10^6 failures {:?}, false at {:?}, noted {noted}, {elapsed:?}",
            r.failures, r.intermediate_false_at
        ),
    );
}

fn random_request(rng: &mut ChaCha8Rng) -> WitnessRequest {
    match rng.gen_range(0..6) {
        0 => WitnessRequest::ParityEscape {
            parity: Point::eventually_zero(Word::from_u64s(&(0..12).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>())),
            opponent: random_prefix_system(rng, 12, 9, 2),
            depth: 12,
        },
        1 => WitnessRequest::DominatingEnvelope {
            f: Rule::constant(rng.gen_range(3..7)),
            opponent: random_prefix_system(rng, 6, 3, 2),
            depth: 6,
        },
        2 => WitnessRequest::LogRemark { h: Rule::FloorLog2, from: 4, to: rng.gen_range(10..200) },
        3 => WitnessRequest::MinusNotDomega {
            f: [NodeValue::Length, NodeValue::MaxPlusOne, NodeValue::Constant { value: nat(rng.gen_range(0..5)) }]
                [rng.gen_range(0..3)]
            .clone(),
            depth: rng.gen_range(4..20),
        },
        4 => WitnessRequest::SNotInFin {
            h: exp2(),
            budget: ratio_u(1, 1),
            count: 3,
            opponent: random_prefix_system(rng, 10, 4, 2),
        },
        _ => WitnessRequest::ENotIdeal { h: exp2(), steps: rng.gen_range(2..5), opponent: None },
    }
}

fn leaves(v: &Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| {
            path.push(k.clone());
            leaves(x, path, out);
            path.pop();
        }),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| {
            path.push(i.to_string());
            leaves(x, path, out);
            path.pop();
        }),
        _ => out.push(path.clone()),
    }
}

fn mutate(v: &mut Value, path: &[String]) {
    let mut cur = v;
    for k in path {
        cur = match cur {
            Value::Object(m) => m.get_mut(k).unwrap(),
            Value::Array(a) => &mut a[k.parse::<usize>().unwrap()],
            _ => unreachable!(),
        };
    }
    *cur = match cur.take() {
        Value::Bool(b) => Value::Bool(!b),
        Value::Number(n) => Value::from(n.as_u64().map_or(1, |x| x + 1)),
        Value::String(s) => Value::String(format!("{s}1")),
        Value::Null => Value::from(0),
        other => other,
    };
}

fn rejected(json: &str) -> bool {
    match WitnessBundle::from_json(json) {
        Err(_) => true,
        Ok(b) => bundle::verify(&b).map_or(true, |v| !v.passed()),
    }
}

#[test]
fn criterion_10_serialization() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut problems = Vec::new();
    let mut mutations = 0;
    for trial in 0..50 {
        let r = random_request(&mut rng);
        let b = bundle::build(&r, 1_000_000).unwrap_or_else(|e| panic!("{r:?}: {e}"));
        let text = b.to_json().unwrap();
        let back = WitnessBundle::from_json(&text).unwrap();
        if back.to_json().unwrap() != text || back != b {
            problems.push(format!("{trial}: round trip"));
        }
        if rejected(&text) {
            problems.push(format!("{trial}: untampered {} bundle rejected", r.tag()));
        }
        let value: Value = serde_json::from_str(&text).unwrap();
        let mut paths = Vec::new();
        leaves(&value, &mut Vec::new(), &mut paths);
        for _ in 0..12 {
            let p = &paths[rng.gen_range(0..paths.len())];
            let mut m = value.clone();
            mutate(&mut m, p);
            mutations += 1;
            if !rejected(&m.to_string()) {
                problems.push(format!("{trial}: mutation at {} accepted", p.join(".")));
            }
        }
    }
    report(10, problems.is_empty(), format!("50 bundles, {mutations} single-field mutations; {problems:?}"));
}
