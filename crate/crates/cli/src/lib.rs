//! Subcommands of the `dualperiods` binary. Each produces a [`Report`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use dualperiods::check::{Check, Verdict};
use dualperiods::dualpair::{random_pair, DualPair, Side};
use dualperiods::exactla::format_rational;
use dualperiods::geometry::ChamberView;
use dualperiods::periods::{
    self, beta_function, build_side, special_branches, Comparison, IdentityReport, SideComputation, WeightSystem,
};
use dualperiods::quadrature::QuadSpec;
use dualperiods::{verify, Error, PairInput};

#[derive(Parser, Debug)]
#[command(name = "dualperiods", version, about = "Dual hyperplane arrangements and their period determinants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print the full JSON report instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dimensions, admissibility and beta invariants of both sides.
    Info(InputArgs),
    /// Flats, parallelisms, discrete volumes and the Tutte polynomial.
    Matroid(SideArgs),
    /// The dual matrix, the completion and both Plücker vectors.
    Dual(InputArgs),
    /// Chambers, bounded chambers and their bases.
    Chambers(SideArgs),
    /// The beta function of one side.
    Betafn(SideArgs),
    /// Period matrix, determinant and Gamma-side quantities of one side.
    Periods(PeriodArgs),
    /// Checks the duality identities and determinant formulas.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Pair file with fields `k`, `B` and optional `alpha`.
    pub file: Option<PathBuf>,
    /// Use a random pair of shape `k,n` instead of a file.
    #[arg(long, value_name = "K,N", conflicts_with = "file")]
    pub random: Option<String>,
    /// Seed for `--random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SideArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = SideArg::Primal)]
    pub side: SideArg,
}

#[derive(Args, Debug, Clone)]
pub struct QuadArgs {
    /// Gauss points per dimension.
    #[arg(long, default_value_t = QuadSpec::default().degree)]
    pub quad_degree: usize,
    /// Maximum bisection depth of adaptive refinement.
    #[arg(long, default_value_t = QuadSpec::default().max_subdiv)]
    pub quad_subdiv: usize,
    /// Verification tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

impl QuadArgs {
    fn spec(&self) -> QuadSpec {
        QuadSpec { degree: self.quad_degree, max_subdiv: self.quad_subdiv, ..QuadSpec::default() }
    }
}

#[derive(Args, Debug, Clone)]
pub struct PeriodArgs {
    #[command(flatten)]
    pub side: SideArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,
    /// Restrict `evaluation` to one side.
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideArg {
    Primal,
    Dual,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Primal => Side::Primal,
            SideArg::Dual => Side::Dual,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Matroid,
    Minors,
    Plucker,
    Weak,
    Evaluation,
    Main,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: Value,
    pub pass: Verdict,
}

impl Report {
    /// Exit status: 0 unless a verdict failed, 1 for failed checks, 2 when
    /// the command could not run.
    pub fn exit_code(&self) -> i32 {
        match self.pass {
            Verdict::Fail if self.results.get("error").is_some() => 2,
            Verdict::Fail => 1,
            _ => 0,
        }
    }
}

struct Loaded {
    input: PairInput,
    pair: DualPair,
    digest: String,
}

fn digest(input: &PairInput) -> String {
    let canonical = serde_json::to_string(input).expect("serializable");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

fn parse_shape(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Input(format!("expected K,N with positive integers, got {s:?}"));
    let (k, n) = s.split_once(',').ok_or_else(bad)?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if k == 0 || n == 0 {
        return Err(bad());
    }
    Ok((k, n))
}

fn load(args: &InputArgs) -> Result<Loaded, (String, Error)> {
    let input = match (&args.file, &args.random) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| (String::new(), Error::Input(format!("{}: {e}", path.display()))))?;
            PairInput::from_json(&text).map_err(|e| (String::new(), e))?
        }
        (None, Some(shape)) => {
            let (k, n) = parse_shape(shape).map_err(|e| (String::new(), e))?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            PairInput::from_pair(&random_pair(&mut rng, k, n, 3), None)
        }
        _ => return Err((String::new(), Error::Input("give a pair file or --random K,N".into()))),
    };
    let d = digest(&input);
    let pair = input.pair().map_err(|e| (d.clone(), e))?;
    Ok(Loaded { input, pair, digest: d })
}

fn weights(l: &Loaded) -> Result<WeightSystem, Error> {
    l.input.weights(l.pair.num_hyperplanes())
}

fn error_report(command: &str, digest: String, e: &Error) -> Report {
    Report {
        command: command.into(),
        inputs_digest: digest,
        results: json!({ "error": e.to_string(), "kind": error_kind(e) }),
        pass: Verdict::Fail,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::LinAlg(_) => "linear_algebra",
        Error::Matroid(_) => "matroid",
        Error::Pair(_) => "admissibility",
        Error::Geometry(_) => "geometry",
        Error::Basis(_) => "basis",
        Error::Period(_) => "periods",
        Error::Input(_) => "input",
    }
}

/// Runs one command. Errors become reports with a `fail` verdict.
pub fn run(command: &Command) -> Report {
    let (name, input) = match command {
        Command::Info(a) | Command::Dual(a) => (command_name(command), a),
        Command::Matroid(a) | Command::Chambers(a) | Command::Betafn(a) => (command_name(command), &a.input),
        Command::Periods(a) => (command_name(command), &a.side.input),
        Command::Verify(a) => (command_name(command), &a.input),
    };
    let loaded = match load(input) {
        Ok(l) => l,
        Err((d, e)) => return error_report(name, d, &e),
    };
    let outcome = match command {
        Command::Info(_) => info(&loaded),
        Command::Matroid(a) => matroid(&loaded, a.side.into()),
        Command::Dual(_) => dual(&loaded),
        Command::Chambers(a) => chambers(&loaded, a.side.into()),
        Command::Betafn(a) => betafn(&loaded, a.side.into()),
        Command::Periods(a) => periods_cmd(&loaded, a.side.side.into(), &a.quad),
        Command::Verify(a) => verify_cmd(&loaded, a),
    };
    match outcome {
        Ok((results, pass)) => Report { command: name.into(), inputs_digest: loaded.digest, results, pass },
        Err(e) => error_report(name, loaded.digest, &e),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Info(_) => "info",
        Command::Matroid(_) => "matroid",
        Command::Dual(_) => "dual",
        Command::Chambers(_) => "chambers",
        Command::Betafn(_) => "betafn",
        Command::Periods(_) => "periods",
        Command::Verify(_) => "verify",
    }
}

type Outcome = Result<(Value, Verdict), Error>;

fn info(l: &Loaded) -> Outcome {
    let d = &l.pair;
    let mut sides = serde_json::Map::new();
    for side in [Side::Primal, Side::Dual] {
        let m = d.matroid(side)?;
        sides.insert(
            side.to_string(),
            json!({ "dim": d.dim(side), "rank": m.rank(), "beta": m.beta() }),
        );
    }
    Ok((
        json!({
            "k": d.dim(Side::Primal),
            "n": d.dim(Side::Dual),
            "numHyperplanes": d.num_hyperplanes(),
            "admissible": true,
            "sides": sides,
        }),
        Verdict::NotApplicable,
    ))
}

fn matroid(l: &Loaded, side: Side) -> Outcome {
    let m = l.pair.matroid(side)?;
    let flats: Vec<Value> = m
        .flats()
        .iter()
        .map(|f| {
            json!({
                "flat": m.labels_of(f.flat),
                "rank": m.rank_of(f.flat),
                "length": f.length,
                "width": f.width,
                "volume": f.volume,
            })
        })
        .collect();
    let parallelisms: Vec<Value> = m
        .parallelisms()
        .iter()
        .map(|p| json!({ "flat": m.labels_of(p.flat), "a": p.a, "b": p.b, "width": p.width, "volume": p.volume }))
        .collect();
    Ok((
        json!({
            "side": side,
            "rank": m.rank(),
            "beta": m.beta(),
            "tutte": m.tutte(),
            "flats": flats,
            "parallelisms": parallelisms,
        }),
        Verdict::NotApplicable,
    ))
}

fn dual(l: &Loaded) -> Outcome {
    let d = &l.pair;
    Ok((
        json!({
            "B": d.primal().b().to_strings(),
            "C": d.c().to_strings(),
            "completion": d.primal().completion().to_strings(),
            "detCompletion": format_rational(d.det_b()),
            "plucker": { "primal": d.plucker(Side::Primal), "dual": d.plucker(Side::Dual) },
        }),
        Verdict::NotApplicable,
    ))
}

fn chambers(l: &Loaded, side: Side) -> Outcome {
    let w = weights(l)?;
    let sc = build_side(&l.pair, &w, side)?;
    let all = dualperiods::geometry::AffineArrangement::from_pair(&l.pair, side)?.chambers()?;
    let forms: Vec<Value> = sc
        .arrangement
        .forms
        .iter()
        .map(|f| json!({ "grad": f.grad.iter().map(format_rational).collect::<Vec<_>>(), "constant": format_rational(&f.constant) }))
        .collect();
    Ok((
        json!({
            "side": side,
            "dim": sc.arrangement.dim,
            "forms": forms,
            "chambers": all.iter().map(ChamberView::from).collect::<Vec<_>>(),
            "bounded": sc.chambers.len(),
            "bases": sc.views(),
        }),
        Verdict::NotApplicable,
    ))
}

fn betafn(l: &Loaded, side: Side) -> Outcome {
    let w = weights(l)?;
    let b = beta_function(&l.pair.matroid(side)?, &w)?;
    Ok((json!({ "side": side, "logBeta": b.log, "beta": b.log.exp(), "terms": b.terms }), Verdict::NotApplicable))
}

fn periods_cmd(l: &Loaded, side: Side, q: &QuadArgs) -> Outcome {
    let w = weights(l)?;
    let sc = build_side(&l.pair, &w, side)?;
    let ba = special_branches(&sc)?;
    let comp = SideComputation::compute(sc, ba, &w, &q.spec())?;
    let rhs = comp.evaluation_rhs(&w)?;
    Ok((
        json!({
            "side": side,
            "matrix": comp.matrix,
            "determinant": [comp.det.re, comp.det.im],
            "condition": comp.matrix.condition(),
            "betaFunction": comp.beta_fn,
            "branches": comp.branches,
            "evaluationRhs": rhs,
        }),
        Verdict::NotApplicable,
    ))
}

#[derive(Serialize)]
struct Group {
    name: &'static str,
    verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<Value>,
}

impl Group {
    fn exact(name: &'static str, checks: Vec<Check>) -> Group {
        let verdict = Verdict::from_bool(checks.iter().all(|c| c.passed));
        Group { name, verdict, checks, comparisons: vec![], detail: None }
    }

    fn numeric(name: &'static str, r: &IdentityReport, detail: Value) -> Group {
        let mut comparisons = r.comparisons.clone();
        comparisons.push(r.exact_phase.clone());
        Group { name, verdict: Verdict::from_bool(r.pass()), checks: vec![], comparisons, detail: Some(detail) }
    }

    fn failed(name: &'static str, e: &Error) -> Group {
        Group {
            name,
            verdict: Verdict::Fail,
            checks: vec![Check::fail(name, e.to_string())],
            comparisons: vec![],
            detail: None,
        }
    }
}

fn group(name: &'static str, r: Result<Vec<Check>, Error>) -> Group {
    r.map_or_else(|e| Group::failed(name, &e), |c| Group::exact(name, c))
}

fn verify_cmd(l: &Loaded, a: &VerifyArgs) -> Outcome {
    let d = &l.pair;
    let w = weights(l)?;
    let spec = a.quad.spec();
    let tol = a.quad.tol;
    let wants = |g: Which| a.which == g || a.which == Which::All;
    let mut groups = Vec::new();
    if wants(Which::Matroid) {
        let mut checks = verify::matroid_checks(d);
        if let Ok(c) = checks.as_mut() {
            match verify::geometry_checks(d) {
                Ok(g) => c.extend(g),
                Err(e) => c.push(Check::fail("geometry", e.to_string())),
            }
        }
        groups.push(group("matroid", checks));
    }
    if wants(Which::Minors) {
        groups.push(group("minors", verify::minor_checks(d)));
    }
    if wants(Which::Plucker) {
        groups.push(group("plucker", Ok(verify::plucker_checks(d))));
    }
    if wants(Which::Weak) {
        groups.push(group("weak", verify::weak_checks(d)));
    }
    if wants(Which::Evaluation) {
        let sides = match a.side {
            Some(s) => vec![Side::from(s)],
            None => vec![Side::Primal, Side::Dual],
        };
        for side in sides {
            let name = if side == Side::Primal { "evaluation_primal" } else { "evaluation_dual" };
            groups.push(match evaluation(d, &w, side, &spec, tol) {
                Ok((r, detail)) => Group::numeric(name, &r, detail),
                Err(e) => Group::failed(name, &e),
            });
        }
    }
    if wants(Which::Main) {
        groups.push(group("critical_values", verify::branch_checks(d, &w)));
        groups.push(match periods::verify_main(d, &w, &spec, tol) {
            Ok(r) => Group::numeric(
                "main",
                &r.identity,
                json!({ "beta": r.beta, "primalDet": [r.primal_det.re, r.primal_det.im], "dualDet": [r.dual_det.re, r.dual_det.im] }),
            ),
            Err(e) => Group::failed("main", &e.into()),
        });
    }
    let verdict = groups.iter().fold(Verdict::NotApplicable, |v, g| v.combine(g.verdict));
    Ok((json!({ "tolerance": tol, "quadrature": spec, "groups": groups }), verdict))
}

fn evaluation(d: &DualPair, w: &WeightSystem, side: Side, spec: &QuadSpec, tol: f64) -> Result<(IdentityReport, Value), Error> {
    let sc = build_side(d, w, side)?;
    let ba = special_branches(&sc)?;
    let comp = SideComputation::compute(sc, ba, w, spec)?;
    let r = comp.evaluation_report(w, tol)?;
    let detail = json!({ "condition": comp.matrix.condition(), "converged": comp.matrix.converged });
    Ok((r, detail))
}

/// Human-readable summary of a report.
pub fn summary(r: &Report) -> String {
    let mut out = format!("{} [{}] inputs {}\n", r.command, verdict_str(r.pass), r.inputs_digest.get(..12).unwrap_or(""));
    if let Some(e) = r.results.get("error") {
        out.push_str(&format!("error: {}\n", e.as_str().unwrap_or_default()));
        return out;
    }
    match r.command.as_str() {
        "verify" => {
            for g in r.results["groups"].as_array().into_iter().flatten() {
                out.push_str(&format!("{:<6} {}\n", g["verdict"].as_str().unwrap_or("?"), g["name"].as_str().unwrap_or("?")));
                for c in g.get("checks").and_then(Value::as_array).into_iter().flatten() {
                    let mark = if c["passed"].as_bool() == Some(true) { "ok" } else { "FAILED" };
                    out.push_str(&format!("         {:<40} {:>8} cases  {mark}", c["name"].as_str().unwrap_or("?"), c["cases"]));
                    if let Some(f) = c.get("failure").and_then(Value::as_str) {
                        out.push_str(&format!("  ({f})"));
                    }
                    out.push('\n');
                }
                for c in g.get("comparisons").and_then(Value::as_array).into_iter().flatten() {
                    out.push_str(&format!(
                        "         {:<24} value {:<24} reference {:<10} tol {:<8} {}\n",
                        c["name"].as_str().unwrap_or("?"),
                        c["value"],
                        c["reference"],
                        c["tolerance"],
                        c["verdict"].as_str().unwrap_or("?")
                    ));
                }
            }
        }
        _ => {
            out.push_str(&serde_json::to_string_pretty(&r.results).expect("serializable"));
            out.push('\n');
        }
    }
    out
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::NotApplicable => "n/a",
    }
}
