use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use steiner_core::extremal::{
    all_sandwiches_satisfy_star, check_conditions, extensions_keeping_criterion, sandwich_count,
    sampled_sandwiches_satisfy_star,
};
use steiner_core::geometry::{Mode, SpaceDescriptor};
use steiner_core::io::{parse_points, points_to_strings, FamilyInput, SignedSetsInput, StarInput};
use steiner_core::l1l2::{
    claims_certify, interval_failure, node_degree_bound, parse_lambda, steiner_star_check_enumerated, Context,
};
use steiner_core::oracle::{
    compare_with_star, enumerate_topologies, minimize_topology_exact, seed_from_env, smt_length, star_length,
    OracleOptions, DECISION_MARGIN,
};
use steiner_core::parens::{count_rooted, count_unrooted, for_each_rooted, for_each_unrooted, labels};
use steiner_core::signed_set::{SignedSet, SignedSetJson};
use steiner_core::verifier::{
    verify_differentiable, verify_node_star_with, verify_steiner_star_with, Route, StarInstance, Verdict,
    VerifyOptions,
};
use steiner_core::zspace::{
    antichain_equilateral, extremal_family, face_point, max_degree, star_criterion, ExtremalVariant, StarVerdict,
};
use steiner_core::{Error, Rational, Result};

use crate::report::{Format, RunReport};

#[derive(Parser, Debug)]
#[command(name = "steiner-local", version, about = "Decide whether stars are Steiner minimal trees in normed spaces")]
pub struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Worker-count hint; computations currently run on one thread.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also run an independent cross-check and include it in the report.
    #[arg(long, global = true)]
    pub validate: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Is the star an SMT of its center and endpoints?
    VerifyNode(StarArgs),
    /// Is the star an SMT of its endpoints, with the center as Steiner point?
    VerifySteiner(StarArgs),
    /// The signed-set criterion for a family of faces of the Z dual ball.
    ZCriterion(SignedArgs),
    /// Largest degree of a node of an SMT in the Z space of dimension n.
    MaxDegree {
        #[arg(long)]
        n: usize,
    },
    /// Signed sets and points of a largest star accepted by the criterion.
    ExtremalFamily {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "low")]
        variant: String,
    },
    /// Equilateral set from the middle level antichain.
    Antichain {
        #[arg(long)]
        n: usize,
    },
    /// Numbers of rooted and unrooted parenthesizations of k operands.
    CountParens {
        #[arg(long)]
        k: usize,
    },
    /// Lists parenthesizations by canonical key.
    EnumerateParens {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        unrooted: bool,
        /// Keys printed at most.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Numerical SMT over all topologies.
    Oracle(OracleArgs),
    /// Interval procedure for the star on ±e_i under the l1 + λ·l2 norm.
    L1l2Check {
        #[arg(long)]
        n: usize,
        /// A rational or a + b*sqrt(n).
        #[arg(long)]
        lambda: String,
    },
    /// Forbidden-pattern checks for a family of subsets.
    Conditions(FamilyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyNode(_) => "verify-node",
            Command::VerifySteiner(_) => "verify-steiner",
            Command::ZCriterion(_) => "z-criterion",
            Command::MaxDegree { .. } => "max-degree",
            Command::ExtremalFamily { .. } => "extremal-family",
            Command::Antichain { .. } => "antichain",
            Command::CountParens { .. } => "count-parens",
            Command::EnumerateParens { .. } => "enumerate-parens",
            Command::Oracle(_) => "oracle",
            Command::L1l2Check { .. } => "l1l2-check",
            Command::Conditions(_) => "conditions",
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum RouteArg {
    Auto,
    Criterion,
    Lp,
}

#[derive(Args, Debug)]
pub struct StarArgs {
    /// `z:3`, `l1:2`, `linf:2`, `l2:2` or `l1l2:2:7/2`.
    #[arg(long)]
    pub space: Option<String>,
    /// JSON array of points (or an object with a "points" field); `-` reads stdin.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// JSON object with "space", "points" and optional "center".
    #[arg(long, conflicts_with_all = ["space", "points"])]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub route: RouteArg,
}

#[derive(Args, Debug)]
pub struct SignedArgs {
    /// JSON object {"m": .., "sets": [{"pos": [..], "neg": [..]}, ..]}.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Semicolon-separated sets like `+{1}-{2,3};+{2}-{1}`.
    #[arg(long, conflicts_with = "input", requires = "m")]
    pub sets: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// JSON object {"m": .., "sets": [[..], ..]}.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Semicolon-separated sets like `1,2;1,3;2`.
    #[arg(long, conflicts_with = "input", requires = "m")]
    pub sets: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub space: Option<String>,
    /// Terminals.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["space", "points"])]
    pub input: Option<PathBuf>,
    /// Seed for restarts; defaults to STEINER_LOCAL_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

fn read_source(path: &PathBuf) -> Result<String> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

fn load_star(input: &Option<PathBuf>, space: &Option<String>, points: &Option<PathBuf>) -> Result<StarInput> {
    if let Some(p) = input {
        return StarInput::from_json(&read_source(p)?);
    }
    let (Some(space), Some(points)) = (space, points) else {
        return Err(Error::InvalidArgument("give --input, or both --space and --points".into()));
    };
    Ok(StarInput { space: space.parse()?, points: parse_points(&read_source(points)?)?, center: None })
}

fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Rational::to_f64).collect()
}

pub fn dispatch(cli: &Cli) -> Result<RunReport> {
    let mut rep = RunReport::new(cli.command.name());
    match &cli.command {
        Command::VerifyNode(a) => verify(&mut rep, a, Mode::Node, cli.validate)?,
        Command::VerifySteiner(a) => verify(&mut rep, a, Mode::Steiner, cli.validate)?,
        Command::ZCriterion(a) => z_criterion(&mut rep, a, cli.validate)?,
        Command::MaxDegree { n } => {
            let d = max_degree(*n)?;
            rep.result = json!({ "n": n, "max_degree": d });
            if cli.validate {
                let fam = rep.timed("validate", || extremal_family(*n, ExtremalVariant::Low))?;
                let ok = star_criterion(&fam)?.is_smt();
                rep.validation = Some(json!({ "extremal_size": fam.len(), "criterion_accepts": ok,
                    "agrees": ok && fam.len() as u128 == d }));
            }
        }
        Command::ExtremalFamily { n, variant } => {
            let v: ExtremalVariant = variant.parse()?;
            let fam = extremal_family(*n, v)?;
            let pts: Vec<Vec<Rational>> = fam.iter().map(|x| face_point(x).coords().to_vec()).collect();
            rep.space = Some(SpaceDescriptor::ZNorm(*n));
            rep.result = json!({
                "size": fam.len(),
                "sets": fam.iter().map(SignedSetJson::from).collect::<Vec<_>>(),
                "points": points_to_strings(&pts),
            });
            if cli.validate {
                let accepts = star_criterion(&fam)?.is_smt();
                let maximal = if *n <= 5 {
                    Some(rep.timed("validate", || extensions_keeping_criterion(*n, v))?.is_empty())
                } else {
                    None
                };
                rep.validation = Some(json!({ "criterion_accepts": accepts, "locally_maximal": maximal }));
            }
        }
        Command::Antichain { n } => {
            let pts: Vec<Vec<Rational>> = antichain_equilateral(*n)?.iter().map(|p| p.coords().to_vec()).collect();
            rep.space = Some(SpaceDescriptor::ZNorm(*n));
            rep.result = json!({ "size": pts.len(), "points": points_to_strings(&pts) });
            if cli.validate {
                let sp = SpaceDescriptor::ZNorm(*n);
                let moore = steiner_core::verifier::moore_check(&sp, &pts)?;
                rep.validation = Some(json!({ "pairwise_distance_two": moore }));
            }
        }
        Command::CountParens { k } => {
            let rooted = count_rooted(*k)?;
            let unrooted = if *k >= 2 { Some(count_unrooted(*k)?) } else { None };
            rep.result = json!({ "rooted": rooted, "unrooted": unrooted });
            if cli.validate {
                if *k > 9 {
                    return Err(Error::TooLarge(format!("enumeration check for k = {k}")));
                }
                let r = rep.timed("validate", || count_walk(*k, false))?;
                let u = if *k >= 2 { Some(rep.timed("validate", || count_walk(*k, true))?) } else { None };
                rep.validation = Some(json!({ "enumerated_rooted": r, "enumerated_unrooted": u,
                    "agrees": r == rooted && u == unrooted }));
            }
        }
        Command::EnumerateParens { k, unrooted, limit } => {
            if *k > 10 {
                return Err(Error::TooLarge(format!("enumeration for k = {k}")));
            }
            let mut keys = Vec::new();
            let mut count: u128 = 0;
            let mut visit = |t: &steiner_core::parens::ParenTree| {
                if keys.len() < *limit {
                    keys.push(t.canonical_key());
                }
                count += 1;
                true
            };
            rep.timed("enumerate", || {
                if *unrooted {
                    for_each_unrooted(&labels(*k), &mut visit)
                } else {
                    for_each_rooted(&labels(*k), &mut visit)
                }
            })?;
            rep.result = json!({ "count": count, "trees": keys, "truncated": count > keys.len() as u128 });
            if cli.validate {
                let formula = if *unrooted { count_unrooted(*k)? } else { count_rooted(*k)? };
                rep.validation = Some(json!({ "formula": formula, "agrees": formula == count }));
            }
        }
        Command::Oracle(a) => oracle(&mut rep, a, cli.validate)?,
        Command::L1l2Check { n, lambda } => {
            let lam = parse_lambda(lambda)?;
            let ctx = Context::new(*n, lam.clone())?;
            let fail = rep.timed("intervals", || interval_failure(&ctx));
            let threshold = Context::threshold(*n)?.map(|t| t.to_string());
            rep.result = json!({
                "steiner_star_2n": fail.is_none(),
                "n": n,
                "lambda": lam.to_string(),
                "threshold": threshold,
                "failure": fail,
            });
            if cli.validate {
                if *n > 4 {
                    return Err(Error::TooLarge(format!("per-tree validation for n = {n}")));
                }
                let per_tree = rep.timed("validate", || steiner_star_check_enumerated(*n, &lam))?;
                let claims = rep.timed("validate", || claims_certify(*n, &lam))?;
                rep.validation = Some(json!({ "per_tree": per_tree, "claims_certify": claims,
                    "agrees": per_tree == fail.is_none() && (!claims || per_tree) }));
            }
        }
        Command::Conditions(a) => {
            let fam = match (&a.input, &a.sets, a.m) {
                (Some(p), _, _) => FamilyInput::from_json(&read_source(p)?)?,
                (None, Some(s), Some(m)) => FamilyInput { m, sets: parse_index_lists(s)? },
                _ => return Err(Error::InvalidArgument("give --input, or --sets with --m".into())),
            }
            .family()?;
            let c = check_conditions(&fam);
            rep.result = serde_json::to_value(c).expect("conditions serialize");
            if cli.validate {
                rep.validation = Some(json!({ "star_is_conjunction": c.star == (c.distinct && c.no3chain && c.nobutterfly) }));
            }
        }
    }
    Ok(rep)
}

fn count_walk(k: usize, unrooted: bool) -> Result<u128> {
    let mut c: u128 = 0;
    let mut visit = |_: &steiner_core::parens::ParenTree| {
        c += 1;
        true
    };
    if unrooted {
        for_each_unrooted(&labels(k), &mut visit)?;
    } else {
        for_each_rooted(&labels(k), &mut visit)?;
    }
    Ok(c)
}

fn parse_index_lists(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad index {x:?} in {p:?}"))))
                .collect()
        })
        .collect()
}

fn verify(rep: &mut RunReport, a: &StarArgs, mode: Mode, validate: bool) -> Result<()> {
    let input = load_star(&a.input, &a.space, &a.points)?;
    let inst = input.instance()?;
    rep.space = Some(inst.space.clone());
    let opts = VerifyOptions {
        route: match a.route {
            RouteArg::Auto => Route::Auto,
            RouteArg::Criterion => Route::Criterion,
            RouteArg::Lp => Route::Lp,
        },
        ..VerifyOptions::default()
    };
    match &inst.space {
        SpaceDescriptor::L2(_) => {
            let norming: Vec<Vec<f64>> = inst
                .rays
                .iter()
                .map(|r| {
                    let f = to_f64(r);
                    let len = f.iter().map(|x| x * x).sum::<f64>().sqrt();
                    f.iter().map(|x| x / len).collect()
                })
                .collect();
            let v = rep.timed("verify", || verify_differentiable(&inst.space, &norming, mode))?;
            rep.result = json!({ "is_smt": v.is_smt });
            rep.verdicts.push(v);
        }
        SpaceDescriptor::L1PlusLambdaL2(n, lambda) => {
            if mode == Mode::Steiner {
                return Err(Error::UnsupportedSpace(
                    "verify-steiner does not cover l1l2; l1l2-check handles the ±e_i star".into(),
                ));
            }
            let b = node_degree_bound(&inst.rays, *n, lambda)?;
            rep.result = json!({ "bound": b });
        }
        _ => {
            let v = rep.timed("verify", || match mode {
                Mode::Node => verify_node_star_with(&inst, &opts),
                Mode::Steiner => verify_steiner_star_with(&inst, &opts),
            })?;
            rep.result = json!({ "is_smt": v.is_smt });
            rep.verdicts.push(v);
        }
    }
    if validate {
        let mut val = serde_json::Map::new();
        let main = rep.verdicts.first().map(|v| v.is_smt);
        if matches!(inst.space, SpaceDescriptor::ZNorm(_)) && mode == Mode::Node {
            let other = if matches!(rep.verdicts[0].method, steiner_core::verifier::Method::Criterion) {
                Route::Lp
            } else {
                Route::Criterion
            };
            let v2 = rep.timed("validate", || verify_node_star_with(&inst, &VerifyOptions { route: other, ..opts }))?;
            val.insert("other_route".into(), json!({ "route": format!("{other:?}").to_lowercase(), "is_smt": v2.is_smt }));
            val.insert("routes_agree".into(), json!(Some(v2.is_smt) == main));
            rep.verdicts.push(v2);
        }
        if let Some(main) = main {
            let terminals = inst.k() + usize::from(mode == Mode::Node);
            if terminals <= 6 {
                let cmp = rep.timed("oracle", || oracle_vs_star(&inst, mode))?;
                val.insert("oracle_agrees".into(), json!(cmp["star_is_smt"] == json!(main)));
                val.insert("oracle".into(), cmp);
            } else {
                val.insert("oracle".into(), json!(format!("skipped: {terminals} terminals")));
            }
        }
        rep.validation = Some(Value::Object(val));
    }
    Ok(())
}

fn oracle_vs_star(inst: &StarInstance, mode: Mode) -> Result<Value> {
    let opts = OracleOptions::default();
    let points = inst.points();
    match mode {
        Mode::Node => {
            let c = compare_with_star(&inst.space, &inst.center, &points, &opts)?;
            Ok(json!({ "star_length": c.star_length, "smt_length": c.smt_length, "star_is_smt": c.star_is_smt }))
        }
        Mode::Steiner => {
            let pts: Vec<Vec<f64>> = points.iter().map(|p| to_f64(p)).collect();
            let star = star_length(&to_f64(&inst.center), &pts, &inst.space);
            let (len, _) = smt_length(&pts, &inst.space, &opts)?;
            Ok(json!({ "star_length": star, "smt_length": len,
                "star_is_smt": len >= star * (1.0 - DECISION_MARGIN) }))
        }
    }
}

fn z_criterion(rep: &mut RunReport, a: &SignedArgs, validate: bool) -> Result<()> {
    let sets: Vec<SignedSet> = match (&a.input, &a.sets, a.m) {
        (Some(p), _, _) => SignedSetsInput::from_json(&read_source(p)?)?.signed_sets()?,
        (None, Some(s), Some(m)) => {
            s.split(';').map(str::trim).filter(|t| !t.is_empty()).map(|t| SignedSet::parse(t, m)).collect::<Result<_>>()?
        }
        _ => return Err(Error::InvalidArgument("give --input, or --sets with --m".into())),
    };
    if let Some(x) = sets.first() {
        rep.space = Some(SpaceDescriptor::ZNorm(x.ground() - 1));
    }
    let verdict = rep.timed("criterion", || star_criterion(&sets))?;
    let witness = match verdict {
        StarVerdict::Smt => Value::Null,
        StarVerdict::NotSmt(q) => serde_json::to_value(q).expect("quadruple serializes"),
    };
    rep.result = json!({ "is_smt": verdict.is_smt(), "witness": witness, "k": sets.len() });
    if validate {
        let exhaustive_limit = 1u128 << 17;
        let (how, ok) = if sandwich_count(&sets) <= exhaustive_limit {
            ("exhaustive", rep.timed("validate", || all_sandwiches_satisfy_star(&sets, exhaustive_limit))?)
        } else {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed_from_env(0x5eed));
            ("sampled", rep.timed("validate", || sampled_sandwiches_satisfy_star(&sets, 2000, &mut rng))?)
        };
        // Sampling can only confirm a violation, never rule one out.
        let agrees = if how == "exhaustive" { ok == verdict.is_smt() } else { !verdict.is_smt() || ok };
        rep.validation = Some(json!({ "set_families": how, "all_satisfy_star": ok, "agrees": agrees }));
    }
    Ok(())
}

fn oracle(rep: &mut RunReport, a: &OracleArgs, validate: bool) -> Result<()> {
    let input = load_star(&a.input, &a.space, &a.points)?;
    let space = input.space.clone();
    for p in &input.points {
        space.check_point(p)?;
    }
    rep.space = Some(space.clone());
    let opts = OracleOptions {
        restarts: a.restarts,
        seed: a.seed.unwrap_or_else(|| seed_from_env(0x5eed)),
        ..OracleOptions::default()
    };
    let terminals: Vec<Vec<f64>> = input.points.iter().map(|p| to_f64(p)).collect();
    let (len, tree) = rep.timed("minimize", || smt_length(&terminals, &space, &opts))?;
    rep.result = json!({ "smt_length": len, "tree": tree });
    if validate {
        if !space.is_polyhedral() || terminals.len() > 6 {
            rep.validation = Some(json!("skipped: exact check needs a polyhedral space and at most 6 terminals"));
            return Ok(());
        }
        let exact = rep.timed("validate", || -> Result<Rational> {
            let mut best: Option<Rational> = None;
            for t in enumerate_topologies(terminals.len())? {
                let v = minimize_topology_exact(&t, &input.points, &space)?;
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
            Ok(best.expect("at least one topology"))
        })?;
        let e = exact.to_f64();
        rep.validation = Some(json!({ "exact_length": exact.to_string(),
            "agrees": (len - e).abs() <= DECISION_MARGIN * e.max(1.0) }));
    }
    Ok(())
}

#[allow(dead_code)]
fn verdict_summary(v: &Verdict) -> Value {
    json!({ "is_smt": v.is_smt, "method": v.method })
}
