//! Command-line front end. [`run`] returns the text and structured renderings
//! plus the exit status; `main` only prints them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::{self, EscapeParams, WitnessBundle, WitnessRequest};
use crate::diagonal::{self, build_diagonal, DiagonalPlan, OpponentBound};
use crate::error::{Error, Result};
use crate::num::{parse_ratio, Nat, Ratio};
use crate::param::{check_supermultiplicative, IndexSet, ParamFunction, Rule};
use crate::systems::{
    membership_report, BlockFilter, BlockSystem, IntervalPartition, Levels, MinusWitness, NodeExtension, NodeValue,
    Patterns, Point, PrefixSystem, Quantifier, SystemRef, Weight, Word,
};
use crate::transforms::{self as tf, NormalizeMode};

#[derive(Parser, Debug)]
#[command(name = "fakeideal", version, about = "Covering systems, diagonalization and witness bundles on Baire space")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    #[arg(long, global = true)]
    pub depth: Option<u64>,
    #[arg(long, global = true)]
    pub stages: Option<u64>,
    /// bound on every search and enumeration
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub ceiling: u64,
    #[arg(long = "burn-in", global = true, default_value_t = 0)]
    pub burn_in: u64,
    /// also write the structured output here
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// draws random opponents where none is given
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a parameter function on 0..=depth
    EvalH {
        #[arg(long)]
        h: String,
    },
    /// Report monotonicity, domination and supermultiplicativity of a rule
    CheckH {
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 16)]
        range: u64,
    },
    /// Finite-depth membership report for a point against a system
    Membership {
        #[arg(long)]
        system: String,
        #[arg(long)]
        point: String,
    },
    /// Convert a system and emit the coverage certificate
    Transform(TransformArgs),
    #[command(subcommand)]
    Diagonal(DiagonalCommand),
    /// Build a witness bundle for one theorem
    Witness(WitnessArgs),
    /// Rebuild a bundle from its header and compare
    Verify { bundle: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    CoverToLevels,
    LevelsToCover,
    CertifiedLedger,
    NormalizeToC,
    NormalizeToSummable,
    EToN,
    FinEToFinN,
    FinNToFinS,
    FinToParam,
    MergeN,
    MergeS,
    RegroupNToS,
    RefitRegroup,
    BlockMax,
    RefitParam,
    IoeToMinus,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(value_enum)]
    pub kind: TransformKind,
    /// system file (JSON) or `zeros[:FROM]` / `empty`; repeat for merges
    #[arg(long = "input")]
    pub inputs: Vec<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    /// cover word in run-length form, e.g. `0,3*2`; repeatable
    #[arg(long = "word")]
    pub words: Vec<String>,
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum DiagonalCommand {
    /// Build a plan for size profile `s` against an opponent bound
    Build {
        #[arg(long)]
        s: String,
        /// per-level opponent sizes `t`
        #[arg(long, conflicts_with_all = ["predecessor", "budget"])]
        t: Option<String>,
        /// opponent sizes `s − 1`
        #[arg(long)]
        predecessor: bool,
        /// with `--f`: cumulative bound `budget · max f`
        #[arg(long, requires = "f")]
        budget: Option<String>,
        #[arg(long)]
        f: Option<String>,
    },
    /// Run the escape engine on a stored plan
    Escape {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        opponent: Option<String>,
    },
    /// `f𝓝(g) ⊄ f𝓝(f)` for `Σ f/g < ∞`
    Separate {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        opponent: Option<String>,
    },
    /// strict inclusion for `f/g → 0`
    Strict {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value = "1")]
        budget: String,
        #[arg(long)]
        opponent: Option<String>,
    },
    /// incomparable pair from almost disjoint residue classes
    Antichain {
        #[arg(long, default_value = "evens")]
        a: String,
        #[arg(long, default_value = "odds")]
        b: String,
        #[arg(long, default_value_t = 8)]
        checked: u64,
        #[arg(long)]
        opponent: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessTag {
    ComeagerFakenull,
    MinusPositiveNwd,
    DisjointPositiveFamily,
    ParityEscape,
    MinusNotDomega,
    ENotIdeal,
    ESquareVsPoly,
    SNotInFin,
    SFinStrictEscape,
    SOrthMinus,
    NFinNotOrth,
    DominatingEnvelope,
    BoundingMerge,
    LogRemark,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(value_enum)]
    pub tag: WitnessTag,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub blocks: Option<u64>,
    /// polynomial bound for e-square-vs-poly
    #[arg(long)]
    pub p: Option<String>,
    /// rule, node value or minus-witness file, depending on the tag
    #[arg(long)]
    pub f: Option<String>,
    /// base extension word for the nowhere dense constructions
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub parity: Option<String>,
    /// repeatable
    #[arg(long = "opponent")]
    pub opponents: Vec<String>,
    /// repeatable
    #[arg(long = "probe")]
    pub probes: Vec<String>,
    #[arg(long = "density-len")]
    pub density_len: Option<u64>,
    #[arg(long = "density-entry")]
    pub density_entry: Option<u64>,
    #[arg(long)]
    pub from: Option<u64>,
    #[arg(long)]
    pub to: Option<u64>,
}

/// A system file: `{"prefix": …}`, `{"block": …}` or `{"minus": …}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemFile {
    Prefix(PrefixSystem),
    Block(BlockSystem),
    Minus(MinusWitness),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub structured: Value,
    pub exit: i32,
}

fn to_value(v: &impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn ratio_arg(s: &str) -> Result<Ratio> {
    parse_ratio(s).ok_or_else(|| Error::Parse(format!("bad rational `{s}`")))
}

fn param(s: &str) -> Result<ParamFunction> {
    ParamFunction::parse(s)
}

/// `zero`, `const V`, `id`, `affine S O`, `word W`, `periodic HEAD|PERIOD`, or JSON.
pub fn parse_point(s: &str) -> Result<Point> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
    }
    let bad = || Error::Parse(format!("bad point `{s}`"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let (head, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
    match head {
        "zero" => Ok(Point::zero()),
        "id" => Ok(Point::identity()),
        "const" => Ok(Point::constant(num(rest)?)),
        "affine" => {
            let (a, b) = rest.trim().split_once(char::is_whitespace).ok_or_else(bad)?;
            Ok(Point::Affine { slope: num(a)?, offset: num(b)? })
        }
        "word" => Ok(Point::eventually_zero(rest.parse()?)),
        "periodic" => {
            let (h, p) = rest.split_once('|').ok_or_else(bad)?;
            let period: Word = p.parse()?;
            if period.is_empty() {
                return Err(bad());
            }
            Ok(Point::Periodic { head: h.parse()?, period })
        }
        _ => Err(bad()),
    }
}

/// `length`, `max+1`, `const V`.
pub fn parse_node_value(s: &str) -> Result<NodeValue> {
    match s.trim().split_once(char::is_whitespace) {
        Some(("const", v)) => Ok(NodeValue::Constant {
            value: v.trim().parse::<Nat>().map_err(|_| Error::Parse(format!("bad node value `{s}`")))?,
        }),
        _ => match s.trim() {
            "length" => Ok(NodeValue::Length),
            "max+1" => Ok(NodeValue::MaxPlusOne),
            _ => Err(Error::Parse(format!("bad node value `{s}`"))),
        },
    }
}

/// `evens`, `odds`, `M:R`.
pub fn parse_index_set(s: &str) -> Result<IndexSet> {
    match s.trim() {
        "evens" => Ok(IndexSet::evens()),
        "odds" => Ok(IndexSet::odds()),
        t => {
            let bad = || Error::Parse(format!("bad index set `{s}`"));
            let (m, r) = t.split_once(':').ok_or_else(bad)?;
            let (m, r) = (m.parse::<u64>().map_err(|_| bad())?, r.parse::<u64>().map_err(|_| bad())?);
            if m == 0 || r >= m {
                return Err(bad());
            }
            Ok(IndexSet::residue(m, r))
        }
    }
}

/// A system file path, or the shorthands `empty` and `zeros[:FROM]`.
pub fn load_system(s: &str) -> Result<SystemFile> {
    if s == "empty" {
        return Ok(SystemFile::Prefix(PrefixSystem::fin(Levels::empty())));
    }
    if let Some(rest) = s.strip_prefix("zeros") {
        let from = match rest.strip_prefix(':') {
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad system `{s}`")))?,
            None if rest.is_empty() => 0,
            None => return Err(Error::Parse(format!("bad system `{s}`"))),
        };
        return Ok(SystemFile::Prefix(PrefixSystem::fin(Levels::Zeros { from })));
    }
    serde_json::from_str(&read(Path::new(s))?).map_err(|e| Error::Parse(format!("{s}: {e}")))
}

fn prefix_system(s: &str) -> Result<PrefixSystem> {
    match load_system(s)? {
        SystemFile::Prefix(p) => Ok(p),
        _ => Err(Error::PreconditionFailed(format!("{s} is not a level system"))),
    }
}

fn block_system(s: &str) -> Result<BlockSystem> {
    match load_system(s)? {
        SystemFile::Block(b) => Ok(b),
        _ => Err(Error::PreconditionFailed(format!("{s} is not a block system"))),
    }
}

fn minus_witness(s: &str) -> Result<MinusWitness> {
    match load_system(s)? {
        SystemFile::Minus(m) => Ok(m),
        _ => Err(Error::PreconditionFailed(format!("{s} is not a 𝓜₋ witness"))),
    }
}

/// Finite level system with at most `max_words` words per level `1..=depth`
/// and entries `≤ max_entry`.
pub fn random_prefix_system(rng: &mut impl Rng, depth: u64, max_entry: u64, max_words: usize) -> PrefixSystem {
    let levels = (1..=depth).map(|n| {
        let k = rng.gen_range(0..=max_words);
        let words = (0..k).map(|_| Word::from_u64s(&(0..n).map(|_| rng.gen_range(0..=max_entry)).collect::<Vec<_>>()));
        (n, words.collect())
    });
    PrefixSystem::fin(Levels::explicit(levels))
}

/// Singleton-pattern block system over blocks of lengths 1..=3 with weight `2ⁿ`.
pub fn random_block_system(rng: &mut impl Rng, blocks: u64, max_entry: u64) -> BlockSystem {
    let lengths: Vec<u64> = (0..blocks).map(|_| rng.gen_range(1..=3)).collect();
    let patterns = lengths.iter().enumerate().map(|(n, &len)| {
        let w = Word::from_u64s(&(0..len).map(|_| rng.gen_range(0..=max_entry)).collect::<Vec<_>>());
        (n as u64, vec![w])
    });
    BlockSystem {
        partition: IntervalPartition::from_lengths(&lengths),
        patterns: Patterns::explicit(patterns),
        quantifier: Quantifier::AllButFinitely,
        weight: Weight::Param { h: ParamFunction::new(Rule::exp(2)).expect("2ⁿ is a parameter function") },
    }
}

fn opponent_or_default(g: &Global, given: Option<&String>, fallback: PrefixSystem) -> Result<PrefixSystem> {
    match (given, g.seed) {
        (Some(s), _) => prefix_system(s),
        (None, Some(seed)) => {
            Ok(random_prefix_system(&mut ChaCha8Rng::seed_from_u64(seed), g.depth.unwrap_or(30).min(30), 9, 2))
        }
        (None, None) => Ok(fallback),
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    let out = match &cli.command {
        Command::EvalH { h } => eval_h(g, h)?,
        Command::CheckH { h, range } => check_h(h, *range)?,
        Command::Membership { system, point } => membership(g, system, point)?,
        Command::Transform(t) => transform(g, t)?,
        Command::Diagonal(d) => diagonal_cmd(g, d)?,
        Command::Witness(w) => bundle_output(&bundle::build(&witness_request(g, w)?, g.ceiling)?)?,
        Command::Verify { bundle: path } => verify(path)?,
    };
    if let Some(path) = &g.out {
        let s = serde_json::to_string_pretty(&out.structured).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, s + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(out)
}

fn eval_h(g: &Global, h: &str) -> Result<Output> {
    let rule = Rule::parse(h)?;
    let depth = g.depth.unwrap_or(10);
    let values: Vec<String> = (0..=depth).map(|n| rule.eval(n).to_string()).collect();
    let text = values.iter().enumerate().map(|(n, v)| format!("h({n}) = {v}\n")).collect();
    Ok(Output { text, structured: json!({ "rule": rule.to_string(), "values": values }), exit: 0 })
}

fn check_h(h: &str, range: u64) -> Result<Output> {
    let rule = Rule::parse(h)?;
    let sm = check_supermultiplicative(&rule, range);
    let parameter = ParamFunction::new(rule.clone()).is_ok();
    let structured = json!({
        "rule": rule.to_string(),
        "parameter": parameter,
        "nondecreasing": rule.is_nondecreasing(),
        "strictly_increasing": rule.is_strictly_increasing(),
        "dominates_identity": rule.dominates_identity(),
        "limsup_certificate": rule.has_limsup_certificate(),
        "supermultiplicative": to_value(&sm)?,
    });
    let mut text = String::new();
    for key in ["parameter", "nondecreasing", "strictly_increasing", "dominates_identity", "limsup_certificate"] {
        let _ = writeln!(text, "{key}: {}", structured[key]);
    }
    let _ = writeln!(text, "supermultiplicative: {sm:?}");
    Ok(Output { text, structured, exit: 0 })
}

fn membership(g: &Global, system: &str, point: &str) -> Result<Output> {
    let sys = load_system(system)?;
    let x = parse_point(point)?;
    let depth = g.depth.unwrap_or(30);
    let r = match &sys {
        SystemFile::Prefix(p) => membership_report(SystemRef::Prefix(p), &x, depth, g.burn_in),
        SystemFile::Block(b) => membership_report(SystemRef::Block(b), &x, depth, g.burn_in),
        SystemFile::Minus(m) => membership_report(SystemRef::Minus(m), &x, depth, g.burn_in),
    };
    Ok(Output { text: format!("{r}\n"), structured: to_value(&r)?, exit: 0 })
}

fn transformed_text<T: Serialize>(kind: &str, t: &tf::Transformed<T>) -> Result<String> {
    let mut s = format!("transform {kind}: {} stage pairs", t.certificate.map.len());
    if t.certificate.biconditional {
        s.push_str(" (biconditional)");
    }
    s.push('\n');
    if let Some(h) = &t.h {
        let _ = writeln!(s, "h = {h}");
    }
    if let Some(c) = &t.comparison {
        let _ = writeln!(s, "ledger comparison holds: {}", c.holds());
    }
    let _ = writeln!(s, "{}", serde_json::to_string(&t.target).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(s)
}

fn transform(g: &Global, t: &TransformArgs) -> Result<Output> {
    let depth = g.depth.unwrap_or(20);
    let first = || t.inputs.first().ok_or_else(|| Error::PreconditionFailed("--input is required".into()));
    let need_h = || param(t.h.as_deref().ok_or_else(|| Error::PreconditionFailed("--h is required".into()))?);
    let need_c = || ratio_arg(t.c.as_deref().unwrap_or("1"));
    let name = format!("{:?}", t.kind);
    macro_rules! emit {
        ($tr:expr) => {{
            let tr = $tr;
            Output { text: transformed_text(&name, &tr)?, structured: to_value(&tr)?, exit: 0 }
        }};
    }
    let out = match t.kind {
        TransformKind::CoverToLevels => {
            let words = t.words.iter().map(|w| w.parse()).collect::<Result<Vec<Word>>>()?;
            emit!(tf::cover_to_levels(&words, &need_h()?)?)
        }
        TransformKind::LevelsToCover => {
            let eps = ratio_arg(t.eps.as_deref().unwrap_or("1"))?;
            let c = tf::levels_to_cover(&prefix_system(first()?)?, &eps, depth, g.ceiling)?;
            let words: Vec<String> = c.words.iter().map(|w| w.to_string()).collect();
            let text = format!(
                "levels {}..={} (continues: {}), bound {}\n{}\n",
                c.cut + 1,
                c.emitted_through,
                c.continues,
                crate::num::ratio_to_string(&c.bound),
                words.join("\n")
            );
            Output { text, structured: to_value(&c)?, exit: 0 }
        }
        TransformKind::CertifiedLedger => {
            let l = tf::certified_ledger(&prefix_system(first()?)?, depth, g.ceiling)?;
            Output { text: format!("{l}\n"), structured: to_value(&l)?, exit: 0 }
        }
        TransformKind::NormalizeToC => {
            emit!(tf::normalize_c(&block_system(first()?)?, &NormalizeMode::ToC { c: need_c()? }, depth)?)
        }
        TransformKind::NormalizeToSummable => {
            emit!(tf::normalize_c(&block_system(first()?)?, &NormalizeMode::ToSummable { c: need_c()? }, depth)?)
        }
        TransformKind::EToN => emit!(tf::e_to_n(&block_system(first()?)?, depth, g.ceiling)?),
        TransformKind::FinEToFinN => emit!(tf::fin_e_to_fin_n(&block_system(first()?)?, depth, g.ceiling)?),
        TransformKind::FinNToFinS => emit!(tf::fin_n_to_fin_s(&prefix_system(first()?)?, depth, g.ceiling)?),
        TransformKind::FinToParam => emit!(tf::fin_to_param(&prefix_system(first()?)?, depth, g.ceiling)?),
        TransformKind::MergeN => {
            let systems = t.inputs.iter().map(|s| prefix_system(s)).collect::<Result<Vec<_>>>()?;
            emit!(tf::fin_sigma_merge_n(&systems, depth))
        }
        TransformKind::MergeS => {
            let systems = t.inputs.iter().map(|s| block_system(s)).collect::<Result<Vec<_>>>()?;
            emit!(tf::fin_sigma_merge_s(&systems, depth, g.ceiling)?)
        }
        TransformKind::RegroupNToS => emit!(tf::regroup_n_to_s(&prefix_system(first()?)?, depth, g.ceiling)?),
        TransformKind::RefitRegroup => {
            emit!(tf::refit_regroup(&prefix_system(first()?)?, &need_h()?, depth, g.ceiling)?)
        }
        TransformKind::BlockMax | TransformKind::RefitParam => {
            let h = need_h()?;
            let r = if t.kind == TransformKind::BlockMax { tf::block_max(&h)? } else { tf::refit_param(&h)? };
            Output { text: format!("{r}\n"), structured: to_value(&r)?, exit: 0 }
        }
        TransformKind::IoeToMinus => {
            let x = parse_point(t.point.as_deref().unwrap_or("zero"))?;
            emit!(tf::ioe_to_minus(&x, depth))
        }
    };
    Ok(out)
}

fn escape_params(g: &Global, opponent: Option<&String>, stages: u64) -> Result<EscapeParams> {
    Ok(EscapeParams {
        opponent: opponent_or_default(g, opponent, PrefixSystem::fin(Levels::Zeros { from: 2 }))?,
        stages: g.stages.unwrap_or(stages),
        burn_in: g.burn_in,
    })
}

fn diagonal_cmd(g: &Global, d: &DiagonalCommand) -> Result<Output> {
    let depth = g.depth.unwrap_or(200);
    match d {
        DiagonalCommand::Build { s, t, predecessor, budget, f } => {
            let s = Rule::parse(s)?;
            let bound = match (t, predecessor, budget, f) {
                (Some(t), false, None, _) => OpponentBound::PerLevel { t: Rule::parse(t)? },
                (None, true, None, _) => OpponentBound::Predecessor { s: s.clone() },
                (None, false, Some(b), Some(f)) => {
                    OpponentBound::BudgetTimesMax { f: Rule::parse(f)?, budget: ratio_arg(b)? }
                }
                _ => return Err(Error::PreconditionFailed("give exactly one of --t, --predecessor, --budget".into())),
            };
            let plan = build_diagonal(&s, &bound, depth, g.ceiling)?;
            let check = plan.verify(g.ceiling);
            let text = format!(
                "built through level {} of {} with {} windows\nstructure: {}\n",
                plan.built_depth,
                plan.requested_depth,
                plan.windows.len(),
                match &check {
                    Ok(c) => format!("ok ({} levels, {} windows)", c.levels_checked, c.windows_checked),
                    Err(e) => e.to_string(),
                }
            );
            let exit = if check.is_ok() { 0 } else { 4 };
            let check = check.ok();
            Ok(Output { text, structured: json!({ "plan": to_value(&plan)?, "check": to_value(&check)? }), exit })
        }
        DiagonalCommand::Escape { plan, opponent } => {
            let v: Value = serde_json::from_str(&read(plan)?).map_err(|e| Error::Parse(e.to_string()))?;
            let plan: DiagonalPlan =
                serde_json::from_value(v.get("plan").cloned().unwrap_or(v)).map_err(|e| Error::Parse(e.to_string()))?;
            let e = escape_params(g, opponent.as_ref(), 2)?;
            let (x, cert) = diagonal::escape(&plan, &e.opponent, e.stages, e.burn_in, g.ceiling)?;
            let verified = diagonal::verify_escape(&plan, &e.opponent, &cert, g.ceiling);
            let text = format!(
                "hits {:?}\nno opponent hit in ({}, {}]\nprefix {}\nverified: {}\n",
                cert.hits,
                cert.n0,
                cert.checked_depth,
                x.prefix(cert.checked_depth),
                verified.as_ref().map_or_else(|e| e.to_string(), |_| "ok".into())
            );
            let exit = if verified.is_ok() { 0 } else { 4 };
            Ok(Output { text, structured: json!({ "certificate": to_value(&cert)?, "verified": exit == 0 }), exit })
        }
        DiagonalCommand::Separate { f, g: gg, opponent } => {
            let r = WitnessRequest::DiagonalSeparate {
                f: param(f)?,
                g: param(gg)?,
                depth,
                escape: escape_params(g, opponent.as_ref(), 2)?,
            };
            bundle_output(&bundle::build(&r, g.ceiling)?)
        }
        DiagonalCommand::Strict { f, g: gg, budget, opponent } => {
            let r = WitnessRequest::DiagonalStrict {
                f: param(f)?,
                g: param(gg)?,
                budget: ratio_arg(budget)?,
                depth,
                escape: escape_params(g, opponent.as_ref(), 1)?,
            };
            bundle_output(&bundle::build(&r, g.ceiling)?)
        }
        DiagonalCommand::Antichain { a, b, checked, opponent } => {
            let r = WitnessRequest::DiagonalAntichain {
                a: parse_index_set(a)?,
                b: parse_index_set(b)?,
                checked: *checked,
                depth,
                escape: escape_params(g, opponent.as_ref(), 2)?,
            };
            bundle_output(&bundle::build(&r, g.ceiling)?)
        }
    }
}

fn default_minus() -> MinusWitness {
    MinusWitness { pattern: Point::zero(), partition: IntervalPartition::unit() }
}

fn witness_request(g: &Global, w: &WitnessArgs) -> Result<WitnessRequest> {
    let h = || param(w.h.as_deref().unwrap_or("exp 2"));
    let budget = || ratio_arg(w.budget.as_deref().unwrap_or("1"));
    let depth = |d: u64| g.depth.unwrap_or(d);
    let opponent = || opponent_or_default(g, w.opponents.first(), PrefixSystem::fin(Levels::Zeros { from: 0 }));
    let base = || -> Result<NodeExtension> { Ok(NodeExtension::constant(w.a.as_deref().unwrap_or("0").parse()?)) };
    let minus_opponents = || -> Result<Vec<MinusWitness>> {
        if w.opponents.is_empty() {
            Ok(vec![default_minus()])
        } else {
            w.opponents.iter().map(|s| minus_witness(s)).collect()
        }
    };
    Ok(match w.tag {
        WitnessTag::ComeagerFakenull => WitnessRequest::ComeagerFakenull {
            h: h()?,
            budget: budget()?,
            count: w.count.unwrap_or(4),
            density_len: w.density_len.unwrap_or(4),
            density_entry: w.density_entry.unwrap_or(4),
        },
        WitnessTag::MinusPositiveNwd => WitnessRequest::MinusPositiveNwd {
            a: base()?,
            opponents: minus_opponents()?,
            stages: g.stages.unwrap_or(3),
        },
        WitnessTag::DisjointPositiveFamily => WitnessRequest::DisjointPositiveFamily {
            count: w.count.unwrap_or(3),
            a: base()?,
            opponents: minus_opponents()?,
            stages: g.stages.unwrap_or(3),
        },
        WitnessTag::ParityEscape => WitnessRequest::ParityEscape {
            parity: parse_point(w.parity.as_deref().unwrap_or("periodic |0,1"))?,
            opponent: opponent()?,
            depth: depth(30),
        },
        WitnessTag::MinusNotDomega => WitnessRequest::MinusNotDomega {
            f: parse_node_value(w.f.as_deref().unwrap_or("length"))?,
            depth: depth(30),
        },
        WitnessTag::ENotIdeal => WitnessRequest::ENotIdeal {
            h: h()?,
            steps: w.steps.unwrap_or(6),
            opponent: match (w.opponents.first(), g.seed) {
                (Some(s), _) => Some(block_system(s)?),
                (None, Some(seed)) => Some(random_block_system(&mut ChaCha8Rng::seed_from_u64(seed), 6, 4)),
                (None, None) => None,
            },
        },
        WitnessTag::ESquareVsPoly => WitnessRequest::ESquareVsPoly {
            p: Rule::parse(w.p.as_deref().unwrap_or("poly 1"))?,
            blocks: w.blocks.unwrap_or(1),
            opponent: opponent_or_default(g, w.opponents.first(), PrefixSystem::fin(Levels::empty()))?,
        },
        WitnessTag::SNotInFin => {
            WitnessRequest::SNotInFin { h: h()?, budget: budget()?, count: w.count.unwrap_or(3), opponent: opponent()? }
        }
        WitnessTag::SFinStrictEscape => WitnessRequest::SFinStrictEscape {
            opponent: match w.opponents.first() {
                Some(s) => block_system(s)?,
                None => BlockSystem {
                    partition: IntervalPartition::unit(),
                    patterns: Patterns::Constants { values: vec![Nat::from(0u32)], filter: BlockFilter::All },
                    quantifier: Quantifier::Infinitely,
                    weight: Weight::Param { h: h()? },
                },
            },
            depth: depth(30),
        },
        WitnessTag::SOrthMinus => WitnessRequest::SOrthMinus {
            h: h()?,
            budget: budget()?,
            count: w.count.unwrap_or(4),
            probes: if w.probes.is_empty() {
                vec![Point::zero(), Point::constant(1), Point::identity()]
            } else {
                w.probes.iter().map(|p| parse_point(p)).collect::<Result<_>>()?
            },
            depth: depth(30),
        },
        WitnessTag::NFinNotOrth => WitnessRequest::NFinNotOrth {
            f: match &w.f {
                Some(s) => minus_witness(s)?,
                None => default_minus(),
            },
            opponent: opponent()?,
            depth: depth(30),
        },
        WitnessTag::DominatingEnvelope => WitnessRequest::DominatingEnvelope {
            f: Rule::parse(w.f.as_deref().unwrap_or("const 1"))?,
            opponent: opponent()?,
            depth: depth(6),
        },
        WitnessTag::BoundingMerge => WitnessRequest::BoundingMerge {
            opponents: if w.opponents.is_empty() {
                vec![opponent()?]
            } else {
                w.opponents.iter().map(|s| prefix_system(s)).collect::<Result<_>>()?
            },
            depth: depth(6),
        },
        WitnessTag::LogRemark => WitnessRequest::LogRemark {
            h: Rule::parse(w.h.as_deref().unwrap_or("log2"))?,
            from: w.from.unwrap_or(4),
            to: w.to.unwrap_or(1000),
        },
    })
}

fn bundle_text(b: &WitnessBundle) -> String {
    let mut s = format!("theorem {}  checksum {}\n", b.header.theorem, &b.checksum[..16]);
    for c in &b.body.claims {
        let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for (name, l) in &b.body.ledgers {
        let _ = writeln!(s, "ledger {name}: {l}");
    }
    for (name, p) in &b.body.points {
        let _ = writeln!(s, "point {name}↾24 = {}", p.prefix(24));
    }
    for t in &b.body.trace {
        let _ = writeln!(s, "  {t}");
    }
    for n in &b.body.notes {
        let _ = writeln!(s, "# {n}");
    }
    s
}

fn bundle_output(b: &WitnessBundle) -> Result<Output> {
    Ok(Output { text: bundle_text(b), structured: to_value(b)?, exit: if b.passed() { 0 } else { 4 } })
}

fn verify(path: &Path) -> Result<Output> {
    let b = WitnessBundle::from_json(&read(path)?)?;
    let v = bundle::verify(&b)?;
    let text = format!(
        "checksum: {}\nrebuilt body matches: {}\nfailed claims: {:?}\n{}\n",
        v.checksum_ok,
        v.rebuilt_matches,
        v.failed_claims,
        if v.passed() { "verified" } else { "REJECTED" }
    );
    Ok(Output { text, structured: to_value(&v)?, exit: if v.passed() { 0 } else { 4 } })
}

/// Structured error report printed on failure.
pub fn error_value(e: &Error) -> Value {
    json!({ "error": e.name(), "message": e.to_string(), "exit": e.exit_code() })
}
