//! Command-line front end.
//!
//! Exit codes: 0 certified or all checks passed, 2 refuted or a violation
//! found, 3 inconclusive, 1 usage, input or runtime error. A report is
//! written for codes 0, 2 and 3, to `--out` or else to standard output.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use loewner_core::cert::{certify_with, loewner_matrix_1d, verify_certificate, Certification, Method, RefutationStatus};
use loewner_core::linalg::{GradedSpace, Hermitian, Tolerances};
use loewner_core::realization::cauchy::{mu_resolvent_norm, reduce_to_cauchy, CauchyRealization};
use loewner_core::realization::measure::{bpoint_sum, from_discrete_measure, herglotz_eval, Support};
use loewner_core::realization::selfadjoint::{choose_tau, synthesize, transfer_ft};
use loewner_core::tuple::Direction;
use loewner_core::{c64, C64};
use rand::Rng;
use serde_json::{json, Value};

use crate::harness::{self, exi1_pair, intermediate_search, relaxed_midpoint_check, trial_rng, Bounds, Mode, TrialConfig, TupleFunction};
use crate::io::{self, complex_json, complex_vec_json, matrix_json, num, realization_json, Realization};

#[derive(Parser, Debug)]
#[command(name = "loewner", version, about = "Certify, evaluate and stress-test multivariable matrix monotone functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Decide membership of a sampled function in the finite-point Löwner class.
    Certify,
    /// Evaluate a realization or measure at points and check its positivity properties.
    Eval,
    /// Build self-adjoint and Cauchy realizations from a unitary transfer realization.
    Synth,
    /// Run seeded randomized monotonicity trials.
    Fuzz,
    /// Re-emit a report canonically and exit with its status code.
    Report,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct Options {
    /// Input JSON file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Residual tolerance (certify), violation tolerance (fuzz, eval, synth).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of trials or probes; the search budget in intermediate mode.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, value_enum, global = true)]
    pub mode: Option<FuzzMode>,
    /// Exponent of the geometric mean.
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Box as "a1,b1;a2,b2".
    #[arg(long = "box", global = true, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Simpson panels in path mode.
    #[arg(long, global = true)]
    pub panels: Option<usize>,
    /// Evaluation point as "re,im;re,im", one coordinate per block; repeatable.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// Unimodular parameter as "re,im" (synth), or boundary point (eval on a circle measure).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tau: Option<String>,
    /// Splitting scheme used by certify.
    #[arg(long, value_enum, global = true, default_value_t = MethodArg::DouglasRachford)]
    pub method: MethodArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuzzMode {
    Global,
    Local,
    Geomean,
    Intermediate,
    Path,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodArg {
    #[default]
    DouglasRachford,
    Dykstra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Certified,
    Pass,
    /// A negative outcome of an exploratory (unproven) check.
    Explored,
    Refuted,
    Violation,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Certified | Status::Pass | Status::Explored => 0,
            Status::Refuted | Status::Violation => 2,
            Status::Inconclusive => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Pass => "pass",
            Status::Explored => "explored",
            Status::Refuted => "refuted",
            Status::Violation => "violation",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [Status::Certified, Status::Pass, Status::Explored, Status::Refuted, Status::Violation, Status::Inconclusive]
            .into_iter()
            .find(|st| st.as_str() == s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Harness(#[from] harness::HarnessError),
    #[error(transparent)]
    Core(#[from] loewner_core::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((report, status)) => match emit(&cli.opts, &report) {
            Ok(()) => status.code(),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn emit(opts: &Options, report: &Value) -> Result<()> {
    match &opts.out {
        Some(path) => io::write_file(path, report)?,
        None => print!("{}", io::to_canonical_string(report)),
    }
    Ok(())
}

/// Runs a parsed command, returning the report and its status.
pub fn execute(cli: &Cli) -> Result<(Value, Status)> {
    let (mut report, status) = match cli.command {
        Command::Certify => certify_cmd(&cli.opts)?,
        Command::Eval => eval_cmd(&cli.opts)?,
        Command::Synth => synth_cmd(&cli.opts)?,
        Command::Fuzz => fuzz_cmd(&cli.opts)?,
        Command::Report => return report_cmd(&cli.opts),
    };
    let obj = report.as_object_mut().expect("reports are objects");
    obj.insert("status".into(), json!(status.as_str()));
    obj.insert("exit_code".into(), json!(status.code()));
    Ok((report, status))
}

fn input_value(opts: &Options) -> Result<Value> {
    let path = opts.input.as_ref().ok_or_else(|| usage("--input is required"))?;
    Ok(io::parse(&io::read_file(path)?)?)
}

fn tolerances(opts: &Options) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(t) = opts.tol {
        tol.tol_residual = t;
    }
    if let Some(m) = opts.max_iter {
        tol.max_iter = m;
    }
    tol.validate().map_err(|e| usage(e.to_string()))?;
    Ok(tol)
}

fn tolerances_json(tol: &Tolerances) -> Value {
    json!({
        "tol_herm": num(tol.tol_herm),
        "tol_psd": num(tol.tol_psd),
        "tol_commute": num(tol.tol_commute),
        "tol_residual": num(tol.tol_residual),
        "max_iter": tol.max_iter,
    })
}

fn hermitians_json(ms: &[Hermitian]) -> Value {
    Value::Array(ms.iter().map(|m| matrix_json(m.matrix())).collect())
}

fn direction_json(d: Option<&Direction>) -> Value {
    d.map_or(Value::Null, |d| hermitians_json(d.matrices()))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn certify_cmd(opts: &Options) -> Result<(Value, Status)> {
    let sf = io::load_sampled_function(&input_value(opts)?)?;
    let tol = tolerances(opts)?;
    let method = match opts.method {
        MethodArg::DouglasRachford => Method::DouglasRachford,
        MethodArg::Dykstra => Method::Dykstra,
    };
    let (cert, _) = certify_with(&sf, &tol, method)?;
    let mut report = json!({
        "command": "certify",
        "method": match method { Method::DouglasRachford => "douglas-rachford", Method::Dykstra => "dykstra" },
        "n": sf.n(),
        "d": sf.d(),
        "tolerances": tolerances_json(&tol),
        "certificate": Value::Null,
        "refutation": Value::Null,
    });
    if sf.d() == 1 {
        report["loewner_matrix_min_eig"] = num(loewner_matrix_1d(&sf)?.min_eigenvalue());
    }
    let status = match &cert {
        Certification::Certified(c) => {
            let v = verify_certificate(&sf, &c.kernels, &tol)?;
            report["iterations"] = json!(c.iterations);
            report["certificate"] = json!({
                "kernels": hermitians_json(&c.kernels),
                "min_psd_eig": io::real_vec_json(&c.residuals.min_psd_eig),
                "max_constraint_violation": num(c.residuals.max_constraint_violation),
                "verified": v.passed(),
            });
            Status::Certified
        }
        Certification::Refuted(r) => {
            report["iterations"] = json!(r.iterations);
            report["refutation"] = json!({
                "kind": match r.status { RefutationStatus::Infeasible => "infeasible", RefutationStatus::Inconclusive => "inconclusive" },
                "K": r.k.as_ref().map_or(Value::Null, matrix_json),
                "witness": direction_json(r.witness.as_ref()),
                "witness_min_eig": opt_num(r.witness_min_eig),
                "raw_witness": direction_json(r.raw_witness.as_ref()),
                "raw_min_eig": opt_num(r.raw_min_eig),
                "final_distance": num(r.final_distance),
            });
            match r.status {
                RefutationStatus::Infeasible => Status::Refuted,
                RefutationStatus::Inconclusive => Status::Inconclusive,
            }
        }
    };
    Ok((report, status))
}

/// `"re,im;re,im"` as complex coordinates.
pub fn parse_point(s: &str) -> Result<Vec<C64>> {
    s.split(';')
        .map(|part| {
            let nums: Vec<f64> = part
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{x}' in point '{s}'"))))
                .collect::<Result<_>>()?;
            match nums.as_slice() {
                [re] => Ok(c64(*re, 0.0)),
                [re, im] => Ok(c64(*re, *im)),
                _ => Err(usage(format!("coordinate '{part}' must be 're' or 're,im'"))),
            }
        })
        .collect()
}

/// `"a1,b1;a2,b2"` as intervals.
pub fn parse_box(s: &str) -> Result<Bounds> {
    let bounds = s
        .split(';')
        .map(|part| {
            let nums: Vec<f64> = part
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{x}' in box '{s}'"))))
                .collect::<Result<_>>()?;
            match nums.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(usage(format!("interval '{part}' must be 'a,b'"))),
            }
        })
        .collect::<Result<Bounds>>()?;
    harness::validate_bounds(&bounds)?;
    Ok(bounds)
}

fn probe_points(opts: &Options, d: usize, sample: impl Fn(&mut rand_chacha::ChaCha8Rng) -> C64) -> Result<Vec<Vec<C64>>> {
    if !opts.at.is_empty() {
        let pts = opts.at.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>>>()?;
        if let Some(p) = pts.iter().find(|p| p.len() != d) {
            return Err(usage(format!("point has {} coordinates, expected {d}", p.len())));
        }
        return Ok(pts);
    }
    let mut rng = trial_rng(opts.seed.unwrap_or(0), 0);
    Ok((0..opts.trials.unwrap_or(20)).map(|_| (0..d).map(|_| sample(&mut rng)).collect()).collect())
}

fn upper(rng: &mut rand_chacha::ChaCha8Rng) -> C64 {
    c64(rng.gen_range(-2.0..2.0), rng.gen_range(0.05..2.0))
}

fn disk(rng: &mut rand_chacha::ChaCha8Rng) -> C64 {
    C64::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn eval_cmd(opts: &Options) -> Result<(Value, Status)> {
    let v = input_value(opts)?;
    let tol = opts.tol.unwrap_or(1e-9);
    let mut ok = true;
    let mut rows = Vec::new();
    let mut extra = json!({});
    if v.get("support").is_some() {
        let mu = io::load_measure(&v)?;
        extra["input"] = io::measure_json(&mu);
        match mu.support() {
            Support::Line => {
                let cr = from_discrete_measure(&mu)?;
                for z in probe_points(opts, 1, upper)? {
                    let f = cr.eval(&z)?;
                    let pick = f.im >= -tol;
                    ok &= pick;
                    rows.push(json!({ "z": complex_vec_json(&z), "value": complex_json(f), "pick": pick }));
                }
            }
            Support::Circle => {
                for z in probe_points(opts, 1, disk)? {
                    let h = herglotz_eval(&mu, z[0])?;
                    let positive = h.re >= -tol;
                    ok &= positive;
                    rows.push(json!({ "lambda": complex_json(z[0]), "value": complex_json(h), "positive_real_part": positive }));
                }
                if let Some(t) = &opts.tau {
                    let tau = single(parse_point(t)?)?;
                    extra["bpoint_sum"] = match bpoint_sum(&mu, tau) {
                        Ok(s) => json!({ "tau": complex_json(tau), "sum": num(s) }),
                        Err(loewner_core::Error::AtomAtTau { index }) => json!({ "tau": complex_json(tau), "sum": Value::Null, "atom": index }),
                        Err(e) => return Err(e.into()),
                    };
                }
            }
        }
    } else {
        let r = io::load_realization(&v)?;
        extra["input"] = realization_json(&r);
        let d = r.grading().d();
        match &r {
            Realization::Transfer(tr) => {
                for z in probe_points(opts, d, disk)? {
                    let phi = tr.eval(&z)?;
                    let bounded = phi.norm() <= 1.0 + tol;
                    ok &= bounded;
                    rows.push(json!({ "lambda": complex_vec_json(&z), "value": complex_json(phi), "bounded": bounded }));
                }
            }
            Realization::SelfAdjoint(sr) => {
                for z in probe_points(opts, d, upper)? {
                    let f = sr.eval(&z)?;
                    let pick = f.im >= -tol;
                    ok &= pick;
                    rows.push(json!({ "z": complex_vec_json(&z), "value": complex_json(f), "pick": pick }));
                }
            }
            Realization::Cauchy(cr) => {
                for z in probe_points(opts, d, upper)? {
                    let f = cr.eval(&z)?;
                    let min_im = z.iter().map(|w| w.im.abs()).fold(f64::INFINITY, f64::min);
                    let norm = mu_resolvent_norm(&cr.x, &cr.grading, &z)?;
                    let in_half = z.iter().all(|w| w.im > 0.0);
                    let pick = !in_half || f.im >= -tol;
                    let bound = min_im == 0.0 || norm <= 1.0 / min_im + tol;
                    ok &= pick && bound;
                    rows.push(json!({
                        "z": complex_vec_json(&z),
                        "value": complex_json(f),
                        "resolvent_norm": num(norm),
                        "pick": pick,
                        "resolvent_bound": bound,
                    }));
                }
            }
        }
    }
    extra["command"] = json!("eval");
    extra["points"] = Value::Array(rows);
    Ok((extra, if ok { Status::Pass } else { Status::Violation }))
}

fn single(p: Vec<C64>) -> Result<C64> {
    match p.as_slice() {
        [z] => Ok(*z),
        _ => Err(usage("expected a single complex number 're,im'")),
    }
}

fn synth_cmd(opts: &Options) -> Result<(Value, Status)> {
    let r = io::load_realization(&input_value(opts)?)?;
    let Realization::Transfer(tr) = r else {
        return Err(usage("synth needs a transfer realization"));
    };
    let tol = opts.tol.unwrap_or(1e-8);
    let tau = match &opts.tau {
        Some(t) => single(parse_point(t)?)?,
        None => choose_tau(&tr),
    };
    let d = tr.grading().d();
    let z0 = if opts.at.is_empty() { vec![C64::i(); d] } else { parse_point(&opts.at[0])? };
    let sr = synthesize(&tr, &z0, tau, io::LOAD_TOL)?;
    let cr = reduce_to_cauchy(&sr, 1e-8)?;
    let mut rng = trial_rng(opts.seed.unwrap_or(0), 0);
    let (mut eqd2, mut equiv, mut min_im): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for _ in 0..opts.trials.unwrap_or(20) {
        let z: Vec<C64> = (0..d).map(|_| upper(&mut rng)).collect();
        let s = sr.eval(&z)?;
        eqd2 = eqd2.max((transfer_ft(&tr, sr.t, &z)? - s).norm());
        equiv = equiv.max((cr.eval(&z)? - s).norm());
        min_im = min_im.min(s.im);
    }
    let ok = eqd2 <= tol && equiv <= tol && min_im >= -1e-9;
    let report = json!({
        "command": "synth",
        "tau": complex_json(tau),
        "t": num(sr.t),
        "z0": complex_vec_json(&z0),
        "selfadjoint": realization_json(&Realization::SelfAdjoint(sr)),
        "cauchy": realization_json(&Realization::Cauchy(cr)),
        "realization_residual": num(eqd2),
        "cauchy_residual": num(equiv),
        "min_imag_part": num(min_im),
    });
    Ok((report, if ok { Status::Pass } else { Status::Violation }))
}

/// `X = [[0, 1], [1, 0]]`, grading `(1, 1)`, `v1 = e_1`, `C = 0`, whose
/// function is `-z^2 / (z^1 z^2 - 1)`.
pub fn default_cauchy() -> CauchyRealization {
    let x = Hermitian::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).expect("symmetric literal");
    CauchyRealization::new(0.0, x, vec![c64(1.0, 0.0), c64(0.0, 0.0)], GradedSpace::scalar(2)).expect("consistent literal")
}

fn fuzz_function(opts: &Options) -> Result<TupleFunction> {
    let Some(_) = &opts.input else {
        return Ok(TupleFunction::Cauchy(default_cauchy()));
    };
    let v = input_value(opts)?;
    if v.get("nodes").is_some() {
        return Err(usage("fuzz needs a realization, not sampled values"));
    }
    Ok(match io::load_realization(&v)? {
        Realization::Cauchy(c) => TupleFunction::Cauchy(c),
        Realization::SelfAdjoint(s) => TupleFunction::Cauchy(reduce_to_cauchy(&s, 1e-8)?),
        Realization::Transfer(tr) => {
            let sr = synthesize(&tr, &vec![C64::i(); tr.grading().d()], choose_tau(&tr), io::LOAD_TOL)?;
            TupleFunction::Cauchy(reduce_to_cauchy(&sr, 1e-8)?)
        }
    })
}

fn fuzz_cmd(opts: &Options) -> Result<(Value, Status)> {
    let seed = opts.seed.ok_or_else(|| usage("fuzz requires --seed"))?;
    let mode = opts.mode.ok_or_else(|| usage("fuzz requires --mode"))?;
    if mode == FuzzMode::Intermediate {
        return intermediate_cmd(opts, seed);
    }
    let (mode, f) = match mode {
        FuzzMode::Geomean => (Mode::Geomean { s: opts.s.unwrap_or(0.5) }, None),
        FuzzMode::Global => (Mode::Global, Some(fuzz_function(opts)?)),
        FuzzMode::Local => (Mode::Local, Some(fuzz_function(opts)?)),
        FuzzMode::Path => (Mode::Path, Some(fuzz_function(opts)?)),
        FuzzMode::Intermediate => unreachable!("handled above"),
    };
    let d = f.as_ref().map_or(2, |f| f.dim());
    let bounds = match &opts.bounds {
        Some(b) => parse_box(b)?,
        None if matches!(mode, Mode::Geomean { .. }) => vec![(0.25, 4.0); 2],
        None => vec![(-0.4, 0.4); d],
    };
    let mut cfg = TrialConfig::new(mode, seed, opts.trials.unwrap_or(100), bounds);
    if let Some(p) = opts.panels {
        cfg.panels = p;
    }
    if let Some(t) = opts.tol {
        cfg.violation_tol = t;
    }
    let report = harness::run_trials(&cfg, f.as_ref())?;
    let status = match (report.all_passed(), mode.asserted()) {
        (true, _) => Status::Pass,
        (false, true) => Status::Violation,
        (false, false) => Status::Explored,
    };
    let mut out = json!({
        "command": "fuzz",
        "mode": mode.name(),
        "seed": seed,
        "trials": report.trials,
        "passes": report.passes,
        "failures": report.failures,
        "worst_violation": num(report.worst_violation),
        "asserted": mode.asserted(),
        "box": cfg.bounds.iter().map(|&(a, b)| json!([num(a), num(b)])).collect::<Vec<_>>(),
        "n_range": [cfg.n_range.0, cfg.n_range.1],
        "violation_tol": num(cfg.violation_tol),
        "failure_examples": report.failure_examples.iter().map(|e| json!({
            "index": e.index,
            "S": hermitians_json(&e.s),
            "T": hermitians_json(&e.t),
            "value": opt_num(e.value),
            "error": e.error.as_deref().map_or(Value::Null, |s| json!(s)),
        })).collect::<Vec<_>>(),
    });
    if let Mode::Geomean { s } = mode {
        out["s"] = num(s);
    }
    if let Some(e) = report.worst_integral_error {
        out["worst_integral_error"] = num(e);
        out["panels"] = json!(cfg.panels);
        out["integral_tol"] = num(cfg.integral_tol);
    }
    if let Some(TupleFunction::Cauchy(c)) = &f {
        out["function"] = realization_json(&Realization::Cauchy(c.clone()));
    }
    Ok((out, status))
}

fn intermediate_cmd(opts: &Options, seed: u64) -> Result<(Value, Status)> {
    let (s, t) = exi1_pair();
    let budget = opts.trials.unwrap_or(100_000);
    let r = intermediate_search(&s, &t, budget, &mut trial_rng(seed, 0))?;
    let relaxed = relaxed_midpoint_check(&s, &t)?;
    let report = json!({
        "command": "fuzz",
        "mode": "intermediate",
        "seed": seed,
        "budget": budget,
        "evaluations": r.evaluations,
        "S": hermitians_json(s.matrices()),
        "T": hermitians_json(t.matrices()),
        "found": r.found,
        "best_candidate": hermitians_json(&r.best_candidate),
        "distance_from_endpoints": num(r.distance_from_endpoints),
        "min_far_penalty": num(r.min_far_penalty),
        "feasibility_tol": num(harness::FEASIBILITY_TOL),
        "endpoint_distance": num(harness::ENDPOINT_DISTANCE),
        "relaxed_midpoint": {
            "order_holds": relaxed.order_holds,
            "distance_from_endpoints": num(relaxed.distance_from_endpoints),
            "commutator_norm": num(relaxed.commutator_norm),
        },
    });
    Ok((report, if r.found { Status::Violation } else { Status::Pass }))
}

fn report_cmd(opts: &Options) -> Result<(Value, Status)> {
    let v = input_value(opts)?;
    let cursor = io::Cursor::root(&v);
    let node = cursor.field("status")?;
    let status = Status::parse(node.str()?).ok_or_else(|| node.error("unknown status"))?;
    Ok((v, status))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_boxes() {
        assert_eq!(parse_point("0,1;2").unwrap(), vec![c64(0.0, 1.0), c64(2.0, 0.0)]);
        assert!(parse_point("1,2,3").is_err());
        assert_eq!(parse_box("-0.4,0.4;0.5,2").unwrap(), vec![(-0.4, 0.4), (0.5, 2.0)]);
        assert!(parse_box("1,1").is_err());
        assert!(parse_box("1").is_err());
    }

    #[test]
    fn status_codes() {
        for (s, c) in [(Status::Certified, 0), (Status::Pass, 0), (Status::Refuted, 2), (Status::Violation, 2), (Status::Inconclusive, 3)] {
            assert_eq!(s.code(), c);
            assert_eq!(Status::parse(s.as_str()), Some(s));
        }
    }

    #[test]
    fn fuzz_without_seed_is_an_error() {
        let cli = Cli::try_parse_from(["loewner", "fuzz", "--mode", "geomean"]).unwrap();
        assert!(matches!(execute(&cli), Err(CliError::Usage(_))));
        assert_eq!(run(["loewner", "fuzz", "--mode", "geomean"]), 1);
        assert_eq!(run(["loewner", "frobnicate"]), 1);
    }
}
