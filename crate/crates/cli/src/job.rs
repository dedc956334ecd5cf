//! Job files: `{"command": ..., "params": {...}, "out": ...}`.
//!
//! Parameters are decoded per command with field paths in error messages;
//! every report is wrapped as `{"command", "status", "result"}`.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use phicert_core::admissibility::{
    admissible_candidates, alignment_check_with, keylemma_scan, newton_above_hodge, AlignmentOutcome, Hypothesis,
    PhiModuleDatum, ScanGrid,
};
use phicert_core::lattice_core::{LocalDatum, WeightTable, WeylType};
use phicert_core::local_symbols::{hilbert, product_formula, relevant_places, waldspurger_sign_product, Place, QuadExtElem, WaldInstance};
use phicert_core::principal_series::{completely_refinable, UnramChar};
use phicert_core::replay::{
    replay_orthogonal, replay_symplectic, verify_certificate, Certificate, ReplayError, ReplayOptions,
};
use phicert_core::satake::{classicality_general, classicality_sp, RefinedSlopes, RefinementConvention};
use phicert_core::scalar::scalar_str;
use phicert_core::{Rat, Scalar, SmallRat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ReplaySp,
    ReplaySo,
    KeylemmaScan,
    Admissible,
    Classicality,
    PsIrreducible,
    Hilbert,
    WaldSign,
    VerifyCert,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn empty_object() -> Value {
    json!({})
}

pub struct RunContext {
    pub seed: u64,
    pub paper_sign: bool,
}

pub enum Failure {
    /// Bad input; exit 1, no report.
    Input(String),
    /// The mathematics did not come out as expected; exit 2, report kept.
    Math { report: Value, reason: String },
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn params<T: DeserializeOwned>(v: &Value) -> Result<T, Failure> {
    serde_path_to_error::deserialize(v.clone())
        .map_err(|e| Failure::Input(format!("params: at `{}`: {}", e.path(), e.inner())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

struct Outcome {
    result: Value,
    /// `Some(reason)` marks a mathematical failure.
    failed: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, failed: None }
    }
}

pub fn run(spec: &JobSpec, ctx: &RunContext) -> Result<Value, Failure> {
    let p = &spec.params;
    let outcome = match spec.command {
        Command::ReplaySp => replay(WeylType::C, params(p)?, ctx)?,
        Command::ReplaySo => replay(WeylType::D, params(p)?, ctx)?,
        Command::KeylemmaScan => scan(params(p)?)?,
        Command::Admissible => admissible(params(p)?)?,
        Command::Classicality => classicality(params(p)?)?,
        Command::PsIrreducible => ps_irreducible(params(p)?)?,
        Command::Hilbert => hilbert_job(params(p)?)?,
        Command::WaldSign => wald(params(p)?)?,
        Command::VerifyCert => verify(params(p)?)?,
    };
    let status = if outcome.failed.is_some() { "failed" } else { "ok" };
    let report = json!({ "command": spec.command, "status": status, "result": outcome.result });
    match outcome.failed {
        None => Ok(report),
        Some(reason) => Err(Failure::Math { report, reason }),
    }
}

// replay-sp / replay-so

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomSeeds {
    count: usize,
    #[serde(default = "default_numerator")]
    max_numerator: i64,
    #[serde(default = "default_denominator")]
    max_denominator: i64,
}

fn default_numerator() -> i64 {
    12
}

fn default_denominator() -> i64 {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplayParams {
    n: usize,
    places: Vec<LocalDatum>,
    /// One slope vector per place, or a single one used at every place.
    /// Defaults to zero slopes.
    #[serde(default)]
    seeds: Option<Vec<RefinedSlopes<Rat>>>,
    #[serde(default)]
    radius: Option<u64>,
    #[serde(default)]
    skip_step1: bool,
    /// Replace `seeds` with this many random slope vectors.
    #[serde(default)]
    random: Option<RandomSeeds>,
}

fn replay_once(kind: WeylType, n: usize, places: &[LocalDatum], seeds: &[RefinedSlopes<Rat>], opts: &ReplayOptions) -> Result<Certificate, ReplayError> {
    match kind {
        WeylType::C => replay_symplectic(n, places, seeds, opts),
        WeylType::D => replay_orthogonal(n, places, seeds, opts),
    }
}

fn replay(kind: WeylType, p: ReplayParams, ctx: &RunContext) -> Result<Outcome, Failure> {
    if p.places.is_empty() {
        return Err(input("params: at `places`: at least one place is required"));
    }
    let rank = if kind == WeylType::C { p.n } else { 2 * p.n };
    let mut opts = ReplayOptions { skip_step1: p.skip_step1, ..ReplayOptions::default() };
    if let Some(r) = p.radius {
        opts.radius = r;
    }
    if ctx.paper_sign {
        opts.convention = RefinementConvention::PaperSign;
    }
    let broadcast = |s: Vec<RefinedSlopes<Rat>>| if s.len() == 1 { vec![s[0].clone(); p.places.len()] } else { s };

    let Some(random) = p.random else {
        let seeds = broadcast(p.seeds.unwrap_or_else(|| vec![RefinedSlopes::zero(rank)]));
        return match replay_once(kind, p.n, &p.places, &seeds, &opts) {
            Ok(cert) => Ok(Outcome::ok(to_value(&cert))),
            Err(ReplayError::Invalid(msg)) => Err(Failure::Input(msg)),
            Err(ReplayError::VerdictFailed { certificate, survivors }) => Ok(Outcome {
                result: to_value(&*certificate),
                failed: Some(format!("unexpected verdict, surviving splittings {survivors:?}")),
            }),
            Err(e) => Ok(Outcome { result: json!({ "error": e.to_string() }), failed: Some(e.to_string()) }),
        };
    };

    if p.seeds.is_some() {
        return Err(input("params: `seeds` and `random` are mutually exclusive"));
    }
    if random.max_numerator < 0 || random.max_denominator < 1 {
        return Err(input("params: at `random`: need max_numerator >= 0 and max_denominator >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let batches: Vec<Vec<RefinedSlopes<Rat>>> = (0..random.count)
        .map(|_| {
            p.places
                .iter()
                .map(|_| {
                    RefinedSlopes::new(
                        (0..rank)
                            .map(|_| {
                                let num = rng.gen_range(-random.max_numerator..=random.max_numerator);
                                Rat::from_frac(num, rng.gen_range(1..=random.max_denominator))
                            })
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let results: Vec<Result<Certificate, ReplayError>> =
        batches.par_iter().map(|seeds| replay_once(kind, p.n, &p.places, seeds, &opts)).collect();
    if let Some(Err(ReplayError::Invalid(msg))) = results.iter().find(|r| matches!(r, Err(ReplayError::Invalid(_)))) {
        return Err(Failure::Input(msg.clone()));
    }
    let failures: Vec<Value> = results
        .iter()
        .zip(&batches)
        .enumerate()
        .filter_map(|(i, (r, seeds))| r.as_ref().err().map(|e| json!({ "run": i, "seeds": seeds, "error": e.to_string() })))
        .collect();
    let certified = random.count - failures.len();
    let failed = (!failures.is_empty()).then(|| format!("{} of {} random replays failed", failures.len(), random.count));
    Ok(Outcome {
        result: json!({
            "schema": kind,
            "rank": rank,
            "runs": random.count,
            "certified": certified,
            "seed": ctx.seed,
            "failures": failures,
        }),
        failed,
    })
}

// keylemma-scan

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanParams {
    max_rank: usize,
    ef: Vec<(u32, u32)>,
    weight_min: i64,
    weight_max: i64,
    #[serde(default = "one", with = "scalar_str")]
    band_factor: SmallRat,
    #[serde(default)]
    independent_rows: bool,
    #[serde(default = "default_cap")]
    cap: u64,
}

fn one() -> SmallRat {
    SmallRat::from_int(1)
}

fn default_cap() -> u64 {
    100_000_000
}

fn scan(p: ScanParams) -> Result<Outcome, Failure> {
    // the grid is materialised per weight row before the cap applies
    if p.weight_max.saturating_sub(p.weight_min) > 64 || p.max_rank > 12 {
        return Err(input("params: weight range wider than 64 or max_rank above 12"));
    }
    let grid = ScanGrid {
        max_rank: p.max_rank,
        ef: p.ef,
        weight_min: p.weight_min,
        weight_max: p.weight_max,
        band_factor: p.band_factor,
        independent_rows: p.independent_rows,
        cap: p.cap,
    };
    let summary = keylemma_scan(&grid).map_err(input)?;
    // beyond the standard band, misaligned candidates are the expected outcome
    let failed = (summary.counterexamples > 0 && grid.band_factor <= one())
        .then(|| format!("{} misaligned candidates inside the hypothesis band", summary.counterexamples));
    Ok(Outcome { result: to_value(&summary), failed })
}

// admissible

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdmissibleParams {
    e: u32,
    f: u32,
    #[serde(with = "scalar_str::vec")]
    slopes: Vec<Rat>,
    weights: Vec<Vec<i64>>,
    /// Treat the eigenvalues as distinct even when slopes repeat.
    #[serde(default)]
    relaxed: bool,
    #[serde(default = "one_rat", with = "scalar_str")]
    band_factor: Rat,
}

fn one_rat() -> Rat {
    Rat::from_int(1)
}

fn admissible(p: AdmissibleParams) -> Result<Outcome, Failure> {
    let datum = if p.relaxed {
        PhiModuleDatum::relaxed(p.e, p.f, p.slopes, p.weights)
    } else {
        PhiModuleDatum::new(p.e, p.f, p.slopes, p.weights)
    }
    .map_err(input)?;
    if datum.rank() > 10 {
        return Err(input("params: rank above 10 is not supported"));
    }
    if p.band_factor < Rat::from_int(0) {
        return Err(input("params: at `band_factor`: must be nonnegative"));
    }
    let candidates = admissible_candidates(&datum).map_err(input)?;
    let hyp = if p.band_factor == one_rat() { Hypothesis::Standard } else { Hypothesis::Scaled(p.band_factor) };
    let mut alignment = Vec::new();
    let mut misaligned = Vec::new();
    for tau in 0..datum.embeddings() {
        match alignment_check_with(&datum, tau, &hyp) {
            Ok(out) => {
                if matches!(out, AlignmentOutcome::CounterExample { .. }) {
                    misaligned.push(tau);
                }
                alignment.push(json!({ "tau": tau, "outcome": out }));
            }
            Err(e) => alignment.push(json!({ "tau": tau, "skipped": e.to_string() })),
        }
    }
    let failed = (!misaligned.is_empty() && hyp == Hypothesis::Standard)
        .then(|| format!("misaligned admissible candidate at embeddings {misaligned:?}"));
    Ok(Outcome {
        result: json!({
            "datum": datum,
            "newton_above_hodge": newton_above_hodge(&datum),
            "candidates": candidates,
            "alignment": alignment,
        }),
        failed,
    })
}

// classicality

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootDatum {
    n_alpha: u64,
    #[serde(with = "scalar_str")]
    v: Rat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalityParams {
    #[serde(with = "scalar_str::vec")]
    mu: Vec<Rat>,
    /// Symplectic form: one place and its weights.
    #[serde(default)]
    place: Option<LocalDatum>,
    #[serde(default)]
    weights: Option<WeightTable>,
    /// General form: simple roots grouped per slope.
    #[serde(default)]
    groups: Option<Vec<Vec<RootDatum>>>,
}

fn classicality(p: ClassicalityParams) -> Result<Outcome, Failure> {
    let (criterion, classical) = match (p.place, p.weights, p.groups) {
        (Some(place), Some(weights), None) => ("sp", classicality_sp(&place, &weights, &p.mu).map_err(input)?),
        (None, None, Some(groups)) => {
            let groups: Vec<Vec<(u64, Rat)>> =
                groups.into_iter().map(|g| g.into_iter().map(|r| (r.n_alpha, r.v)).collect()).collect();
            ("general", classicality_general(&groups, &p.mu).map_err(input)?)
        }
        _ => return Err(input("params: give either `place` with `weights`, or `groups`")),
    };
    Ok(Outcome::ok(json!({ "criterion": criterion, "classical": classical })))
}

// ps-irreducible

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PsParams {
    group: WeylType,
    q: u64,
    #[serde(with = "scalar_str::vec")]
    values: Vec<Rat>,
}

fn ps_irreducible(p: PsParams) -> Result<Outcome, Failure> {
    let chars = p.values.into_iter().map(|v| UnramChar::new(v, p.q)).collect::<Result<Vec<_>, _>>().map_err(input)?;
    let holds = completely_refinable(&chars, p.group).map_err(input)?;
    let criterion = match p.group {
        WeylType::C => "irreducible",
        WeylType::D => "sufficient",
    };
    Ok(Outcome::ok(json!({ "group": p.group, "criterion": criterion, "completely_refinable": holds })))
}

// hilbert

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HilbertParams {
    #[serde(with = "scalar_str")]
    a: Rat,
    #[serde(with = "scalar_str")]
    b: Rat,
    /// A single place; otherwise every place where the symbol can be -1.
    #[serde(default)]
    place: Option<Place>,
}

fn hilbert_job(p: HilbertParams) -> Result<Outcome, Failure> {
    let places = match p.place {
        Some(v) => vec![v],
        None => {
            hilbert(&p.a, &p.b, Place::Infinity).map_err(input)?;
            relevant_places(&p.a, &p.b)
        }
    };
    let mut symbols = Vec::new();
    for v in places {
        let s = hilbert(&p.a, &p.b, v).map_err(input)?;
        symbols.push(json!({ "place": v, "value": s }));
    }
    let product = product_formula(&p.a, &p.b).map_err(input)?;
    Ok(Outcome {
        result: json!({
            "a": phicert_core::scalar::rat_to_string(&p.a),
            "b": phicert_core::scalar::rat_to_string(&p.b),
            "symbols": symbols,
            "product_formula": product,
        }),
        failed: (!product).then(|| "product formula fails".to_string()),
    })
}

// wald-sign

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldElem {
    d: i64,
    #[serde(with = "scalar_str")]
    a: Rat,
    #[serde(with = "scalar_str")]
    b: Rat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaldParams {
    p: u64,
    #[serde(default, with = "scalar_str::vec")]
    split: Vec<Rat>,
    #[serde(default)]
    field: Vec<FieldElem>,
}

fn wald(p: WaldParams) -> Result<Outcome, Failure> {
    let field = p
        .field
        .into_iter()
        .map(|x| QuadExtElem::new(x.d, x.a, x.b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?;
    let inst = WaldInstance::new(p.p, p.split, field).map_err(input)?;
    let report = waldspurger_sign_product(&inst).map_err(input)?;
    let broken = report.factors.iter().any(|f| !f.norm_identity_holds) || report.sign != report.predicted;
    Ok(Outcome {
        result: to_value(&report),
        failed: broken.then(|| "sign does not match its norm decomposition".to_string()),
    })
}

// verify-cert

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyParams {
    #[serde(default)]
    certificate: Option<Value>,
    /// A certificate file or a replay report.
    #[serde(default)]
    path: Option<PathBuf>,
}

fn verify(p: VerifyParams) -> Result<Outcome, Failure> {
    let (raw, at) = match (p.certificate, p.path) {
        (Some(c), None) => (c, "params.certificate".to_string()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            match v.get("result") {
                Some(inner) if v.get("command").is_some() => (inner.clone(), format!("{}: result", path.display())),
                _ => (v, path.display().to_string()),
            }
        }
        _ => return Err(input("params: give exactly one of `certificate` and `path`")),
    };
    let cert: Certificate = serde_path_to_error::deserialize(raw)
        .map_err(|e| Failure::Input(format!("{at}: at `{}`: {}", e.path(), e.inner())))?;
    let (valid, failed) = match verify_certificate(&cert) {
        Err(e) => (false, Some(format!("certificate does not verify: {e}"))),
        Ok(()) if !cert.has_expected_verdict() => (true, Some(format!("valid record of an unexpected verdict {:?}", cert.verdict))),
        Ok(()) => (true, None),
    };
    Ok(Outcome {
        result: json!({
            "valid": valid,
            "schema": cert.schema,
            "rank": cert.rank,
            "places": cert.places.len(),
            "verdict": cert.verdict,
            "error": failed,
        }),
        failed,
    })
}
