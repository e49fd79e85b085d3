//! Validation, staged execution and artifact rendering.

use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use nilseq_core::exactnum::{classify_entropy, GeneratorSet, IntMatrix, IntegralPolynomial, PhasePolynomial, PhaseScalar};
use nilseq_core::mobius::{cache_dir_from_env, correlate, default_checkpoints, load_or_sieve, mertens, SieveOptions};
use nilseq_core::nctorus::{state_seq, Automorphism, ThetaMatrix, WeylElement, WeylWord};
use nilseq_core::nilseq::{heisenberg_seq, indicator, poly_exp, quadratic_seq, SequenceStream};
use nilseq_core::spectral::{decompose, GPolynomial, ShiftPhaseOperator, SparseVector};
use nilseq_core::torus::{
    character_seq, monomial, orbit_point, rational_period_check, verify_polynomial_form, weyl_test, Character,
    TorusPoint,
};

use crate::config::{
    CorrelateConfig, DecomposeConfig, ExperimentConfig, Kind, NcSeqConfig, SiteEntry, TorusSeqConfig, VectorConfig,
    WeylConfig,
};
use crate::expr;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("stage `{stage}` failed: {message}")]
    Computation { stage: String, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Computation { .. } | CliError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Computation { .. } => "computation",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> Value {
        let stage = match self {
            CliError::Computation { stage, .. } => Some(stage.as_str()),
            _ => None,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "stage": stage,
                "message": self.to_string(),
            },
            "exit_code": self.exit_code(),
        })
    }
}

fn invalid(ctx: &str) -> impl Fn(nilseq_core::Error) -> CliError + '_ {
    move |e| CliError::Validation(format!("{ctx}: {e}"))
}

/// Validated, fully parsed experiment.
pub struct Model {
    pub config: ExperimentConfig,
    classify: Option<IntMatrix>,
    torus: Option<TorusModel>,
    nc: Option<NcModel>,
    decomp: Option<DecompModel>,
    corr: Option<CorrModel>,
    weyl: Option<WeylModel>,
}

struct TorusModel {
    a: IntMatrix,
    x: TorusPoint,
    v: Character,
    range: (i64, i64),
}

struct NcModel {
    auto: Automorphism,
    u: WeylElement,
    w: SparseVector,
    range: (i64, i64),
}

struct DecompModel {
    g: GPolynomial,
    u: SparseVector,
    v: SparseVector,
    range: (i64, i64),
}

enum Source {
    Stream(SequenceStream),
    TorusSeq,
    NcSeq,
    Decompose,
}

struct CorrModel {
    source: Source,
    limit: u64,
    checkpoints: Vec<u64>,
}

struct WeylModel {
    p: PhasePolynomial,
    harmonics: Vec<i64>,
    checkpoints: Vec<u64>,
    period: Option<(u64, u64)>,
}

fn matrix(rows: &[Vec<i64>], ctx: &str) -> Result<IntMatrix, CliError> {
    let m = IntMatrix::from_rows(rows).map_err(invalid(ctx))?;
    m.require_gl().map_err(invalid(ctx))?;
    Ok(m)
}

fn range(r: [i64; 2], ctx: &str) -> Result<(i64, i64), CliError> {
    if r[0] > r[1] {
        return Err(CliError::Validation(format!("{ctx}: empty range {r:?}")));
    }
    if r[1] - r[0] > 10_000_000 {
        return Err(CliError::Validation(format!("{ctx}: range {r:?} longer than 10^7")));
    }
    Ok((r[0], r[1]))
}

fn scalars(gens: &GeneratorSet, lits: &[String], ctx: &str) -> Result<Vec<PhaseScalar>, CliError> {
    lits.iter().map(|s| gens.parse(s).map_err(invalid(ctx))).collect()
}

fn sites(entries: &[SiteEntry]) -> SparseVector {
    SparseVector::from_sites(entries.iter().map(|e| (e.site.clone(), Complex64::new(e.re, e.im))))
}

fn normalized(v: SparseVector, normalize: bool, ctx: &str) -> Result<SparseVector, CliError> {
    if !normalize {
        return Ok(v);
    }
    let n = v.norm();
    if n == 0.0 {
        return Err(CliError::Validation(format!("{ctx}: cannot normalize the zero vector")));
    }
    Ok(v.scale(Complex64::new(1.0 / n, 0.0)))
}

fn vector(gens: &GeneratorSet, cfg: &VectorConfig, dim: usize, ctx: &str) -> Result<SparseVector, CliError> {
    if let Some(e) = cfg.sites.iter().find(|e| e.site.len() != dim) {
        return Err(CliError::Validation(format!("{ctx}: site {:?} is not in Z^{dim}", e.site)));
    }
    let mut v = sites(&cfg.sites);
    for a in &cfg.atoms {
        let phases = scalars(gens, &a.eigenphases, ctx)?;
        v.add_atom(a.id, Complex64::new(a.re, a.im), phases).map_err(invalid(ctx))?;
    }
    normalized(v, cfg.normalize, ctx)
}

fn torus_model(gens: &GeneratorSet, c: &TorusSeqConfig) -> Result<TorusModel, CliError> {
    let a = matrix(&c.s, "torus_seq.S")?;
    let coords = scalars(gens, &c.point, "torus_seq.point")?;
    if coords.len() != a.dim() || c.character.len() != a.dim() {
        return Err(CliError::Validation(format!(
            "torus_seq: point and character must have {} entries",
            a.dim()
        )));
    }
    Ok(TorusModel {
        a,
        x: TorusPoint::new(coords),
        v: Character(c.character.clone()),
        range: range(c.range, "torus_seq.range")?,
    })
}

fn nc_model(gens: &GeneratorSet, c: &NcSeqConfig) -> Result<NcModel, CliError> {
    let s = matrix(&c.s, "nc_seq.S")?;
    let rows = c
        .theta
        .iter()
        .map(|r| scalars(gens, r, "nc_seq.theta"))
        .collect::<Result<Vec<_>, _>>()?;
    let theta = ThetaMatrix::new(rows).map_err(invalid("nc_seq.theta"))?;
    let auto = Automorphism::new(s, theta).map_err(invalid("nc_seq"))?;
    let d = auto.dim();
    if c.word.exponents.len() != d {
        return Err(CliError::Validation(format!("nc_seq.word: expected {d} exponents")));
    }
    let phase = gens.parse(&c.word.phase).map_err(invalid("nc_seq.word.phase"))?;
    let word = WeylWord::from_i64(phase, &c.word.exponents);
    let u = WeylElement::from_word(&word).map_err(invalid("nc_seq.word"))?;
    if let Some(e) = c.state_vector.iter().find(|e| e.site.len() != d) {
        return Err(CliError::Validation(format!("nc_seq.state_vector: site {:?} is not in Z^{d}", e.site)));
    }
    let w = normalized(sites(&c.state_vector), c.normalize, "nc_seq.state_vector")?;
    Ok(NcModel {
        auto,
        u,
        w,
        range: range(c.range, "nc_seq.range")?,
    })
}

fn decomp_model(gens: &GeneratorSet, c: &DecomposeConfig) -> Result<DecompModel, CliError> {
    let ops = c
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let ctx = format!("decompose.generators[{i}]");
            let phase = gens.parse(&g.phase).map_err(invalid(&ctx))?;
            let form = scalars(gens, &g.form, &ctx)?;
            ShiftPhaseOperator::new(g.shift.clone(), phase, form).map_err(invalid(&ctx))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let exps = c.exponents.iter().map(|e| IntegralPolynomial::from_i64(e)).collect();
    let g = GPolynomial::new(c.dim, ops, exps).map_err(invalid("decompose"))?;
    Ok(DecompModel {
        g,
        u: vector(gens, &c.u, c.dim, "decompose.u")?,
        v: vector(gens, &c.v, c.dim, "decompose.v")?,
        range: range(c.range, "decompose.range")?,
    })
}

fn stream_from_expr(gens: &GeneratorSet, src: &str) -> Result<Source, CliError> {
    let call = expr::parse(src).map_err(|e| CliError::Validation(format!("correlate.sequence: {e}")))?;
    let bad = |e: String| CliError::Validation(format!("correlate.sequence: {e}"));
    let scalar = |key: &str| -> Result<PhaseScalar, CliError> {
        gens.parse(call.arg(key).map_err(bad)?).map_err(invalid("correlate.sequence"))
    };
    let stream = match call.name.as_str() {
        "nc_seq" | "torus_seq" | "decompose" if !call.args.is_empty() => {
            return Err(bad(format!("`{}` takes no arguments", call.name)));
        }
        "nc_seq" => return Ok(Source::NcSeq),
        "torus_seq" => return Ok(Source::TorusSeq),
        "decompose" => return Ok(Source::Decompose),
        "one" => {
            call.only(&[]).map_err(bad)?;
            SequenceStream::constant(Complex64::new(1.0, 0.0))
        }
        "quadratic" => {
            call.only(&["t"]).map_err(bad)?;
            quadratic_seq(&scalar("t")?)
        }
        "heisenberg" => {
            call.only(&["alpha", "beta"]).map_err(bad)?;
            heisenberg_seq(scalar("alpha")?.to_f64(), scalar("beta")?.to_f64())
        }
        "indicator" => {
            call.only(&["support"]).map_err(bad)?;
            let support = call
                .arg("support")
                .map_err(bad)?
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|e| bad(format!("support: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            indicator(&support)
        }
        "poly_exp" => {
            let mut coeffs = Vec::new();
            for (k, _) in &call.args {
                let j: usize = k
                    .strip_prefix('c')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| bad(format!("poly_exp arguments are c0, c1, ...; got `{k}`")))?;
                if j >= coeffs.len() {
                    coeffs.resize(j + 1, PhaseScalar::zero());
                }
                coeffs[j] = scalar(k)?;
            }
            poly_exp(&monomial(coeffs))
        }
        other => return Err(bad(format!("unknown constructor `{other}`"))),
    };
    Ok(Source::Stream(stream))
}

fn corr_model(gens: &GeneratorSet, c: &CorrelateConfig) -> Result<CorrModel, CliError> {
    let source = stream_from_expr(gens, &c.sequence)?;
    if let Some(cps) = &c.checkpoints {
        if cps.contains(&0) {
            return Err(CliError::Validation("correlate.checkpoints must be positive".into()));
        }
    }
    let max_cp = c.checkpoints.as_ref().and_then(|c| c.iter().copied().max());
    let limit = match (c.limit, max_cp) {
        (Some(l), Some(m)) if m > l => {
            return Err(CliError::Validation(format!("checkpoint {m} exceeds limit {l}")));
        }
        (Some(l), _) => l,
        (None, Some(m)) => m,
        (None, None) if c.checkpoints.is_some() => 1,
        (None, None) => return Err(CliError::Validation("correlate needs `limit` or `checkpoints`".into())),
    };
    if limit == 0 || limit > nilseq_core::mobius::DEFAULT_CAP {
        return Err(CliError::Validation(format!("correlate.limit {limit} outside 1..=10^9")));
    }
    let checkpoints = c.checkpoints.clone().unwrap_or_else(|| default_checkpoints(limit));
    Ok(CorrModel {
        source,
        limit,
        checkpoints,
    })
}

fn weyl_model(gens: &GeneratorSet, c: &WeylConfig) -> Result<WeylModel, CliError> {
    let p = monomial(scalars(gens, &c.coeffs, "weyl.coeffs")?);
    if c.harmonics.is_empty() || c.harmonics.contains(&0) {
        return Err(CliError::Validation("weyl.harmonics must be nonempty and nonzero".into()));
    }
    if c.checkpoints.iter().any(|&n| n > 50_000_000) {
        return Err(CliError::Validation("weyl.checkpoints above 5*10^7".into()));
    }
    Ok(WeylModel {
        p,
        harmonics: c.harmonics.clone(),
        checkpoints: c.checkpoints.clone(),
        period: c.period_check.as_ref().map(|pc| (pc.repeats, pc.max_period)),
    })
}

/// Parses every literal and checks the static structure of the config. No
/// computation beyond building the exact objects happens here.
pub fn validate(config: ExperimentConfig) -> Result<Model, CliError> {
    let mut gens = GeneratorSet::new();
    for line in &config.generators {
        gens.declare(line).map_err(invalid("generators"))?;
    }
    for line in &config.products {
        gens.declare_product(line).map_err(invalid("products"))?;
    }
    let classify = config.classify.as_ref().map(|c| matrix(&c.s, "classify.S")).transpose()?;
    let torus = config.torus_seq.as_ref().map(|c| torus_model(&gens, c)).transpose()?;
    let nc = config.nc_seq.as_ref().map(|c| nc_model(&gens, c)).transpose()?;
    let decomp = config.decompose.as_ref().map(|c| decomp_model(&gens, c)).transpose()?;
    let corr = config.correlate.as_ref().map(|c| corr_model(&gens, c)).transpose()?;
    let weyl = config.weyl.as_ref().map(|c| weyl_model(&gens, c)).transpose()?;

    let missing = |table: &str| CliError::Validation(format!("kind `{}` needs a [{table}] table", config.kind.name()));
    match config.kind {
        Kind::Classify if classify.is_none() => return Err(missing("classify")),
        Kind::TorusSeq if torus.is_none() => return Err(missing("torus_seq")),
        Kind::NcSeq if nc.is_none() => return Err(missing("nc_seq")),
        Kind::Decompose if decomp.is_none() => return Err(missing("decompose")),
        Kind::Weyl if weyl.is_none() => return Err(missing("weyl")),
        Kind::Correlate => match corr.as_ref().map(|c| &c.source) {
            None => return Err(missing("correlate")),
            Some(Source::NcSeq) if nc.is_none() => return Err(missing("nc_seq")),
            Some(Source::TorusSeq) if torus.is_none() => return Err(missing("torus_seq")),
            Some(Source::Decompose) if decomp.is_none() => return Err(missing("decompose")),
            _ => {}
        },
        _ => {}
    }
    Ok(Model {
        config,
        classify,
        torus,
        nc,
        decomp,
        corr,
        weyl,
    })
}

/// A file produced by a successful run, relative to the output directory.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub report: Value,
    pub timings: Value,
    pub artifacts: Vec<Artifact>,
    pub failure: Option<CliError>,
}

struct Runner {
    stages: Vec<Value>,
    timings: Vec<Value>,
    artifacts: Vec<Artifact>,
}

type StageResult<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

impl Runner {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> StageResult<(T, Value)>) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f();
        self.timings.push(json!({ "stage": name, "seconds": start.elapsed().as_secs_f64() }));
        match out {
            Ok((v, result)) => {
                self.stages.push(json!({ "name": name, "status": "ok", "result": result }));
                Ok(v)
            }
            Err(message) => {
                self.stages.push(json!({ "name": name, "status": "failed", "error": message }));
                Err(CliError::Computation {
                    stage: name.to_string(),
                    message,
                })
            }
        }
    }

    fn artifact(&mut self, name: &str, bytes: Vec<u8>) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            bytes,
        });
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s.into_bytes()
}

/// `n,re,im` rows.
pub fn seq_csv(lo: i64, vals: &[Complex64]) -> Vec<u8> {
    let mut s = String::from("n,re,im\n");
    for (i, v) in vals.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", lo + i as i64, v.re, v.im);
    }
    s.into_bytes()
}

fn values(lo: i64, hi: i64, f: impl Fn(i64) -> Complex64 + Sync + Send) -> Vec<Complex64> {
    (lo..=hi).into_par_iter().map(&f).collect()
}

/// `n,a_re,a_im,b_re,b_im,c_re,c_im,hit` rows.
fn decomposition_csv(
    lo: i64,
    hi: i64,
    a: impl Fn(i64) -> Complex64 + Sync,
    b: impl Fn(i64) -> Complex64 + Sync,
    c: impl Fn(i64) -> Complex64 + Sync,
    hit: impl Fn(i64) -> bool + Sync,
) -> Vec<u8> {
    let rows: Vec<String> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let (a, b, c) = (a(n), b(n), c(n));
            format!("{n},{},{},{},{},{},{},{}\n", a.re, a.im, b.re, b.im, c.re, c.im, hit(n) as u8)
        })
        .collect();
    let mut s = String::from("n,a_re,a_im,b_re,b_im,c_re,c_im,hit\n");
    rows.iter().for_each(|r| s.push_str(r));
    s.into_bytes()
}

fn run_classify(r: &mut Runner, s: &IntMatrix) -> Result<(), CliError> {
    r.stage("classify", || {
        let rep = classify_entropy(s).map_err(err)?;
        let v = json!({ "matrix": s.to_string(), "report": to_value(&rep) });
        Ok(((), v))
    })
}

fn run_torus(r: &mut Runner, t: &TorusModel, plot: bool) -> Result<Option<SequenceStream>, CliError> {
    let seq = r.stage("character_seq", || {
        let cs = character_seq(&t.a, &t.x, &t.v).map_err(err)?;
        let v = json!({
            "m": cs.m,
            "tag": cs.stream.tag().to_string(),
            "residue_polys": cs.residue_polys.as_ref().map(|p| p.iter().map(ToString::to_string).collect::<Vec<_>>()),
        });
        Ok((cs, v))
    })?;
    if seq.m.is_some() {
        r.stage("verify_polynomial_form", || {
            let rep = verify_polynomial_form(&t.a, &t.x, &t.v, t.range.0..=t.range.1).map_err(err)?;
            Ok(((), to_value(&rep)))
        })?;
    }
    if plot {
        let (lo, hi) = t.range;
        let vals = r.stage("dump", || {
            let vals = values(lo, hi, |n| seq.stream.at(n));
            Ok((vals, json!({ "range": [lo, hi] })))
        })?;
        r.artifact("seq.csv", seq_csv(lo, &vals));
        let orbit = r.stage("orbit", || {
            let mut s = String::from("n");
            for j in 1..=t.x.dim() {
                let _ = write!(s, ",x{j}");
            }
            s.push('\n');
            for n in lo..=hi {
                let p = orbit_point(&t.a, &t.x, n).map_err(err)?;
                let _ = write!(s, "{n}");
                for c in p.coords() {
                    let _ = write!(s, ",{}", c.frac_f64());
                }
                s.push('\n');
            }
            Ok((s, json!({ "points": hi - lo + 1 })))
        })?;
        r.artifact("orbit.csv", orbit.into_bytes());
    }
    Ok(Some(seq.stream))
}

fn run_nc(r: &mut Runner, m: &NcModel, plot: bool) -> Result<SequenceStream, CliError> {
    let seq = r.stage("state_seq", || {
        let seq = state_seq(&m.auto, &m.u, &m.w).map_err(err)?;
        let v = json!({
            "m": seq.m,
            "phase_polys": seq.reports.iter().map(|(c, rep)| json!({
                "coeff": [c.re, c.im],
                "rho": rep.rho.iter().map(BigInt::to_string).collect::<Vec<_>>(),
                "forms": to_value(&rep.to_json()),
            })).collect::<Vec<_>>(),
            "per_residue": seq.per_residue.iter().map(|d| to_value(&d.to_json())).collect::<Vec<_>>(),
        });
        Ok((seq, v))
    })?;
    let stream = seq.stream().map_err(|e| CliError::Computation {
        stage: "state_seq".into(),
        message: e.to_string(),
    })?;
    if plot {
        let (lo, hi) = m.range;
        let m_ = seq.m as i64;
        let hit = |n: i64| seq.per_residue[n.rem_euclid(m_) as usize].is_hit(n.div_euclid(m_));
        let csv = decomposition_csv(lo, hi, |n| seq.at(n), |n| seq.b(n), |n| seq.c(n), hit);
        r.artifact("decomposition.csv", csv);
        r.artifact("seq.csv", seq_csv(lo, &values(lo, hi, |n| seq.at(n))));
    }
    Ok(stream)
}

fn run_decompose(r: &mut Runner, m: &DecompModel, plot: bool) -> Result<SequenceStream, CliError> {
    let d = r.stage("decompose", || {
        let d = decompose(&m.g, &m.u, &m.v).map_err(err)?;
        let v = to_value(&d.to_json());
        Ok((d, v))
    })?;
    if plot {
        let (lo, hi) = m.range;
        r.artifact("terms.json", pretty(&to_value(&d.to_json())));
        let mut s = String::from("n,re,im,hit\n");
        for n in lo..=hi {
            let c = d.c(n);
            let _ = writeln!(s, "{n},{},{},{}", c.re, c.im, d.is_hit(n) as u8);
        }
        r.artifact("residual.csv", s.into_bytes());
        let csv = decomposition_csv(lo, hi, |n| d.a(n), |n| d.b(n), |n| d.c(n), |n| d.is_hit(n));
        r.artifact("decomposition.csv", csv);
    }
    Ok(d.a_stream())
}

fn run_correlate(r: &mut Runner, model: &Model, c: &CorrModel) -> Result<(), CliError> {
    let xi = match &c.source {
        Source::Stream(s) => s.clone(),
        Source::TorusSeq => run_torus(r, model.torus.as_ref().expect("validated"), false)?.expect("stream"),
        Source::NcSeq => run_nc(r, model.nc.as_ref().expect("validated"), false)?,
        Source::Decompose => run_decompose(r, model.decomp.as_ref().expect("validated"), false)?,
    };
    let table = r.stage("sieve", || {
        let t = load_or_sieve(c.limit, cache_dir_from_env().as_deref(), SieveOptions::default()).map_err(err)?;
        let m = mertens(&t, &c.checkpoints).map_err(err)?;
        let rows: Vec<Value> = c.checkpoints.iter().zip(&m).map(|(n, m)| json!({ "N": n, "M": m })).collect();
        Ok((t, json!({ "limit": c.limit, "mertens": rows })))
    })?;
    let rep = r.stage("correlate", || {
        let rep = correlate(&table, &xi, &c.checkpoints, model.config.sum_method).map_err(err)?;
        let v = json!({ "sequence": xi.note(), "tag": xi.tag().to_string(), "rows": to_value(&rep.rows) });
        Ok((rep, v))
    })?;
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    r.artifact("correlation.csv", csv);
    Ok(())
}

fn run_weyl(r: &mut Runner, w: &WeylModel, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let rep = r.stage("weyl", || {
        let rep = weyl_test(&w.p, &w.harmonics, &w.checkpoints, cfg.precision, cfg.sum_method).map_err(err)?;
        let v = to_value(&rep);
        Ok((rep, v))
    })?;
    if let Some((repeats, max_period)) = w.period {
        if w.p.is_rational() {
            r.stage("period_check", || {
                let reps = w
                    .harmonics
                    .iter()
                    .map(|&k| rational_period_check(&w.p, k, repeats, max_period).map(|p| to_value(&p)))
                    .collect::<nilseq_core::Result<Vec<_>>>()
                    .map_err(err)?;
                Ok(((), Value::Array(reps)))
            })?;
        }
    }
    let mut s = String::from("k,N,re,im,abs_avg\n");
    for h in &rep.harmonics {
        for row in &h.rows {
            let _ = writeln!(s, "{},{},{},{},{}", h.k, row.n, row.re, row.im, row.abs_avg);
        }
    }
    r.artifact("weyl.csv", s.into_bytes());
    Ok(())
}

/// Runs every stage of the experiment. Artifacts are only returned when all
/// stages succeed; the report is always produced.
pub fn run(model: &Model) -> RunOutput {
    let cfg = &model.config;
    let mut r = Runner {
        stages: Vec::new(),
        timings: Vec::new(),
        artifacts: Vec::new(),
    };
    let outcome = match cfg.kind {
        Kind::Classify => run_classify(&mut r, model.classify.as_ref().expect("validated")),
        Kind::TorusSeq => run_torus(&mut r, model.torus.as_ref().expect("validated"), cfg.plotdata).map(|_| ()),
        Kind::NcSeq => run_nc(&mut r, model.nc.as_ref().expect("validated"), cfg.plotdata).map(|_| ()),
        Kind::Decompose => run_decompose(&mut r, model.decomp.as_ref().expect("validated"), cfg.plotdata).map(|_| ()),
        Kind::Correlate => run_correlate(&mut r, model, model.corr.as_ref().expect("validated")),
        Kind::Weyl => run_weyl(&mut r, model.weyl.as_ref().expect("validated"), cfg),
    };
    let failure = outcome.err();
    if failure.is_some() {
        r.artifacts.clear();
    }
    let mut names: Vec<String> = r.artifacts.iter().map(|a| a.name.clone()).collect();
    names.sort();
    let report = json!({
        "kind": cfg.kind.name(),
        "status": if failure.is_some() { "failed" } else { "ok" },
        "config": to_value(cfg),
        "stages": r.stages,
        "failure": failure.as_ref().map(|f| f.to_json()["error"].clone()),
        "artifacts": names,
    });
    RunOutput {
        report,
        timings: json!({ "stages": r.timings }),
        artifacts: r.artifacts,
        failure,
    }
}

/// `report.json` bytes.
pub fn report_bytes(out: &RunOutput) -> Vec<u8> {
    pretty(&out.report)
}

/// `timings.json` bytes.
pub fn timings_bytes(out: &RunOutput) -> Vec<u8> {
    pretty(&out.timings)
}
