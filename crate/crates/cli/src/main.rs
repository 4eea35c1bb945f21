mod args;
mod report;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rowsketch::algorithms::{
    approx_gram, approx_product, approx_regression, estimate_spectral_norm, sparse_reconstruct, SketchConfig,
};
use rowsketch::bounds::{budget, BudgetShape};
use rowsketch::generate::{generate_matrix, random_orthonormal, MatrixSpec};
use rowsketch::io::{read_matrix, write_matrix, Format};
use rowsketch::matrix_core::{norms, spectral_norm};
use rowsketch::rng::derive_seed;
use rowsketch::verify::{monte_carlo, TrialParams, TrialTask};
use rowsketch::{Error, Matrix};

use args::*;
use report::{parameters, ErrorInfo, RunReport, Status};

const EXIT_USAGE: u8 = 2;
const EXIT_TASK: u8 = 3;
const EXIT_GATE: u8 = 4;

enum Failure {
    Usage(String),
    Task(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Task(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn format_for(path: &Path, over: Option<FormatArg>) -> Format {
    match over {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Bin) => Format::Bin,
        None => Format::from_path(path),
    }
}

fn load(path: Option<&Path>, flag: &str, over: Option<FormatArg>) -> std::result::Result<Matrix, Failure> {
    match path {
        Some(p) => Ok(read_matrix(p, format_for(p, over))?),
        None => usage(format!("--{flag} is required")),
    }
}

fn load_vector(path: Option<&Path>, over: Option<FormatArg>) -> std::result::Result<Vec<f64>, Failure> {
    let m = load(path, "y", over)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::DimensionMismatch(format!("y must be a vector, got {}×{}", m.rows(), m.cols())).into());
    }
    Ok(m.into_vec())
}

fn check_method(given: Option<Method>, expected: Method) -> Outcome {
    match given {
        Some(m) if m != expected => usage(format!("this command samples with {expected:?}, not {m:?}")),
        _ => Ok(()),
    }
}

fn config(acc: &Accuracy, sk: &Sketching, default_beta: f64) -> std::result::Result<SketchConfig, Failure> {
    let mut cfg = SketchConfig::new(acc.eps, acc.delta, sk.beta.unwrap_or(default_beta), sk.seed)?;
    if let Some(r) = sk.rows {
        cfg = cfg.with_rows(r)?;
    }
    Ok(cfg)
}

fn run_budget(a: &BudgetArgs, rep: &mut RunReport) -> Outcome {
    let need = |v: Option<f64>, flag: &str| v.map_or_else(|| usage(format!("--{flag} is required")), Ok);
    let need_d = |v: Option<u64>, flag: &str| v.map_or_else(|| usage(format!("--{flag} is required")), Ok);
    let shape = match a.kind {
        KindArg::Symmetric => BudgetShape::Symmetric { rho: need(a.rho, "rho")?, d: need_d(a.d, "d")? },
        KindArg::Asymmetric => BudgetShape::Asymmetric {
            rho1: need(a.rho, "rho")?,
            rho2: need(a.rho2, "rho2")?,
            d1: need_d(a.d, "d")?,
            d2: need_d(a.d2, "d2")?,
        },
        KindArg::Leverage => BudgetShape::Leverage { d: need_d(a.d, "d")? },
        KindArg::Regression => BudgetShape::Regression { d: need_d(a.d, "d")? },
    };
    let b = budget(shape, a.acc.eps, a.acc.delta, a.beta)?;
    rep.metric("formula_value", b.formula_value());
    rep.metric("tail_at_budget", b.tail_at(b.r));
    rep.budget = Some(b);
    Ok(())
}

fn run_gram(a: &GramArgs, rep: &mut RunReport) -> Outcome {
    check_method(a.sk.method, Method::Rownorm)?;
    let m = load(a.io.input.as_deref(), "in", a.io.format)?;
    let cfg = config(&a.acc, &a.sk, 1.0)?;
    let g = approx_gram(&m, &cfg)?;
    let err = spectral_norm(&m.gram().sub(&g.gram)?)?;
    let n2 = spectral_norm(&m)?.powi(2);
    rep.metric("spectral_error", err);
    rep.metric("spectral_norm_sq", n2);
    rep.metric("relative_error", if n2 > 0.0 { err / n2 } else { 0.0 });
    rep.metric("target", a.acc.eps * n2);
    rep.metric("sample_rows", g.sketch.r as f64);
    rep.budget = Some(g.budget);
    Ok(())
}

fn run_matmul(a: &MatmulArgs, rep: &mut RunReport) -> Outcome {
    check_method(a.sk.method, Method::Asym)?;
    let x = load(a.io.input.as_deref(), "in", a.io.format)?;
    let y = load(a.in2.as_deref(), "in2", a.io.format)?;
    let cfg = config(&a.acc, &a.sk, 1.0)?;
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch(format!("row counts {} and {}", x.rows(), y.rows())).into());
    }
    let (na, nb) = (spectral_norm(&x)?, spectral_norm(&y)?);
    let p = approx_product(&x, &y, &cfg, na * na, nb * nb)?;
    let err = spectral_norm(&x.t_matmul(&y)?.sub(&p.product)?)?;
    rep.metric("spectral_error", err);
    rep.metric("norm_product", na * nb);
    rep.metric("relative_error", err / (na * nb));
    rep.metric("target", a.acc.eps * na * nb);
    rep.metric("sample_rows", p.sketch.r as f64);
    rep.budget = Some(p.budget);
    Ok(())
}

fn run_reconstruct(a: &ReconstructArgs, rep: &mut RunReport) -> Outcome {
    check_method(a.sk.method, Method::Leverage)?;
    let m = load(a.io.input.as_deref(), "in", a.io.format)?;
    let cfg = config(&a.acc, &a.sk, 1.0)?;
    let rec = sparse_reconstruct(&m, a.k, &cfg)?;
    let factor = ((1.0 + a.acc.eps) / (1.0 - a.acc.eps)).sqrt();
    rep.metric("error", rec.err);
    rep.metric("optimal_error", rec.opt_err);
    if rec.opt_err > 0.0 {
        rep.metric("ratio", rec.err / rec.opt_err);
    }
    rep.metric("target_factor", factor);
    rep.metric("sample_rows", rec.sketch.r as f64);
    rep.budget = Some(rec.budget);
    Ok(())
}

fn run_regress(a: &RegressArgs, rep: &mut RunReport) -> Outcome {
    check_method(a.sk.method, Method::Regression)?;
    let m = load(a.io.input.as_deref(), "in", a.io.format)?;
    let y = load_vector(a.y.as_deref(), a.io.format)?;
    let cfg = config(&a.acc, &a.sk, 1.0 / 3.0)?;
    let res = approx_regression(&m, &y, &cfg)?;
    let eps = a.acc.eps;
    rep.metric("residual_norm", res.residual_norm);
    rep.metric("optimal_residual_norm", res.optimal_residual_norm);
    if res.optimal_residual_norm > 0.0 {
        rep.metric("ratio", res.residual_norm / res.optimal_residual_norm);
    }
    rep.metric("target_factor", 1.0 + eps + eps * ((1.0 + eps) / (1.0 - eps)).sqrt());
    rep.metric("sample_rows", res.sketch.r as f64);
    rep.budget = Some(res.budget);
    Ok(())
}

fn run_specnorm(a: &SpecnormArgs, rep: &mut RunReport) -> Outcome {
    let m = load(a.io.input.as_deref(), "in", a.io.format)?;
    let est = estimate_spectral_norm(&m, a.delta, a.seed)?;
    let exact = spectral_norm(&m)?.powi(2);
    rep.metric("estimate", est.value);
    rep.metric("spectral_norm_sq", exact);
    rep.metric("ratio", if exact > 0.0 { est.value / exact } else { 0.0 });
    rep.metric("iterations", est.iterations as f64);
    rep.metric("sample_rows", est.sketch_rows as f64);
    Ok(())
}

/// Input matrices for a trials run: from files when given, otherwise
/// generated from `--m`, `--d` (and `--d2`, `--spectrum`) with seeds derived
/// from `--seed` apart from the per-trial ones.
fn trial_task(a: &TrialsArgs) -> std::result::Result<TrialTask, Failure> {
    let data_seed = |j: u64| derive_seed(a.sk.seed, u64::MAX - j);
    let dims = || match (a.m, a.d) {
        (Some(m), Some(d)) => Ok((m, d)),
        _ => usage("either --in or both --m and --d are required"),
    };
    let primary = || -> std::result::Result<Matrix, Failure> {
        if a.io.input.is_some() {
            return load(a.io.input.as_deref(), "in", a.io.format);
        }
        let (m, d) = dims()?;
        let spec = match &a.spectrum {
            Some(s) => MatrixSpec::planted(m, d, s.clone(), data_seed(0)),
            None => MatrixSpec::gaussian(m, d, data_seed(0)),
        };
        Ok(generate_matrix(&spec)?)
    };
    Ok(match a.task {
        TaskArg::Isometry => {
            let u = if a.io.input.is_some() {
                load(a.io.input.as_deref(), "in", a.io.format)?
            } else {
                let (m, d) = dims()?;
                random_orthonormal(m, d, data_seed(0))?
            };
            TrialTask::Isometry { u }
        }
        TaskArg::Gram => TrialTask::Gram { a: primary()? },
        TaskArg::Specnorm => TrialTask::SpecNorm { a: primary()? },
        TaskArg::Reconstruct => TrialTask::Reconstruct { a: primary()? },
        TaskArg::Product => {
            let x = primary()?;
            let y = if a.in2.is_some() {
                load(a.in2.as_deref(), "in2", a.io.format)?
            } else {
                generate_matrix(&MatrixSpec::gaussian(x.rows(), a.d2.unwrap_or(x.cols()), data_seed(1)))?
            };
            TrialTask::Product { a: x, b: y }
        }
        TaskArg::Regress => {
            let x = primary()?;
            let y = if a.y.is_some() {
                load_vector(a.y.as_deref(), a.io.format)?
            } else {
                generate_matrix(&MatrixSpec::gaussian(x.rows(), 1, data_seed(1)))?.into_vec()
            };
            TrialTask::Regress { a: x, y }
        }
    })
}

fn run_trials(a: &TrialsArgs, rep: &mut RunReport) -> Outcome {
    let expected = match a.task {
        TaskArg::Gram => Some(Method::Rownorm),
        TaskArg::Product => Some(Method::Asym),
        TaskArg::Isometry | TaskArg::Reconstruct => Some(Method::Leverage),
        TaskArg::Regress => Some(Method::Regression),
        TaskArg::Specnorm => None,
    };
    if let Some(m) = expected {
        check_method(a.sk.method, m)?;
    }
    let task = trial_task(a)?;
    let default_beta = if a.task == TaskArg::Regress { 1.0 / 3.0 } else { 1.0 };
    let params = TrialParams {
        eps: a.acc.eps,
        delta: a.acc.delta,
        beta: a.sk.beta.unwrap_or(default_beta),
        r_override: a.sk.rows,
    };
    config(&a.acc, &a.sk, default_beta)?;
    let tr = monte_carlo(&task, &params, a.trials, a.sk.seed)?;
    rep.metric("failures", tr.failures as f64);
    rep.metric("gate", tr.gate() as f64);
    rep.metric("failure_rate", tr.failure_rate);
    rep.metric("failure_rate_upper95", tr.failure_rate_upper95);
    rep.metric("sample_rows", tr.sample_rows as f64);
    if let Some(max) = tr.error_samples.iter().copied().reduce(f64::max) {
        rep.metric("max_error_ratio", max);
        rep.metric("mean_error_ratio", tr.error_samples.iter().sum::<f64>() / tr.error_samples.len() as f64);
    }
    if !tr.passes_gate() {
        rep.status = Status::GateFailed;
    }
    rep.trial_report = Some(tr);
    Ok(())
}

fn run_gen(a: &GenArgs, rep: &mut RunReport) -> Outcome {
    let spec = match a.kind {
        GenKind::Gaussian => MatrixSpec::gaussian(a.m, a.d, a.seed),
        GenKind::Planted => match &a.spectrum {
            Some(s) => MatrixSpec::planted(a.m, a.d, s.clone(), a.seed),
            None => return usage("--spectrum is required for planted matrices"),
        },
        GenKind::Lowrank => match (&a.spectrum, a.noise) {
            (Some(s), Some(n)) => MatrixSpec::low_rank_plus_noise(a.m, a.d, s.clone(), n, a.seed),
            _ => return usage("--spectrum and --noise are required for low-rank matrices"),
        },
    };
    let m = generate_matrix(&spec)?;
    write_matrix(&a.out, &m, format_for(&a.out, a.format))?;
    let n = norms(&m)?;
    rep.metric("rows", m.rows() as f64);
    rep.metric("cols", m.cols() as f64);
    rep.metric("spectral_norm", n.spectral);
    rep.metric("frobenius_norm", n.frobenius);
    rep.metric("stable_rank", n.stable_rank);
    Ok(())
}

fn emit(rep: &RunReport, out: Option<&Path>) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(rep).expect("report serializes");
    match out {
        Some(p) => fs::write(p, json + "\n"),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cmd = &cli.command;
    let (params, out) = match cmd {
        Command::Budget(a) => (parameters(a), a.out.as_deref()),
        Command::Matmul(a) => (parameters(a), a.io.out.as_deref()),
        Command::Gram(a) => (parameters(a), a.io.out.as_deref()),
        Command::Reconstruct(a) => (parameters(a), a.io.out.as_deref()),
        Command::Regress(a) => (parameters(a), a.io.out.as_deref()),
        Command::Specnorm(a) => (parameters(a), a.io.out.as_deref()),
        Command::Trials(a) => (parameters(a), a.io.out.as_deref()),
        // `--out` is the matrix destination; the report goes to stdout.
        Command::Gen(a) => (parameters(a), None),
    };
    let mut rep = RunReport::new(cmd.name(), params);
    let start = Instant::now();
    let result = match cmd {
        Command::Budget(a) => run_budget(a, &mut rep),
        Command::Matmul(a) => run_matmul(a, &mut rep),
        Command::Gram(a) => run_gram(a, &mut rep),
        Command::Reconstruct(a) => run_reconstruct(a, &mut rep),
        Command::Regress(a) => run_regress(a, &mut rep),
        Command::Specnorm(a) => run_specnorm(a, &mut rep),
        Command::Trials(a) => run_trials(a, &mut rep),
        Command::Gen(a) => run_gen(a, &mut rep),
    };
    rep.runtime_seconds = start.elapsed().as_secs_f64();

    let code = match result {
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Task(e)) => {
            eprintln!("error: {e}");
            rep.status = Status::TaskError;
            rep.error = Some(ErrorInfo { name: e.name().to_string(), message: e.to_string() });
            EXIT_TASK
        }
        Ok(()) if rep.status == Status::GateFailed => {
            let tr = rep.trial_report.as_ref().expect("gate implies trial report");
            eprintln!("gate failed: {} failures in {} trials, allowed {}", tr.failures, tr.trials, tr.gate());
            EXIT_GATE
        }
        Ok(()) => 0,
    };
    if let Err(e) = emit(&rep, out) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_TASK);
    }
    ExitCode::from(code)
}
