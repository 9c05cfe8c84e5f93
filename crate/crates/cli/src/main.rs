mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use semistab::decaylab::*;
use semistab::fraccalc::{verify_contour_identity, ContourSpec};
use semistab::linalg::{c, spectral_norm, C64};
use semistab::multiplier::*;
use semistab::numcore::format_complex;
use semistab::resolvent::{fit_growth_profile, probe_resolvent_norms};
use semistab::verify::{contour_battery, run_battery, VerifyOptions, PQ_PAIRS};

use config::{AnalysisConfig, ConfigError, SymbolSpec};
use report::{num, opt_num, Report, Row};

#[derive(Parser)]
#[command(name = "semistab", version, about = "Decay rates of operator semigroups from resolvent growth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe, fit, measure, predict and check consistency.
    Analyze(Common),
    /// Decay measurements for every configured (sigma, tau).
    Decay(Common),
    /// Contour quadrature against the closed-form identity.
    Frac(Common),
    /// Lower and upper bounds for (L^p, L^q) multiplier norms.
    Mult(Common),
    /// Run the bundled reproduction battery.
    VerifyExamples(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, env = "SEMISTAB_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `tolerances.consistency_tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated criterion ids or tags (verify-examples).
    #[arg(long)]
    only: Option<String>,
    /// Shifts every expected exponent of the battery (mutation check).
    #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
    inject_exponent_offset: f64,
}

enum Failure {
    Config(ConfigError),
    Stage(String, String),
    Checks(Vec<String>),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn stage<T>(name: &str, r: semistab::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Stage(name.to_string(), e.to_string()))
}

struct Run {
    cfg: AnalysisConfig,
    opts: Common,
    report: Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts) = match &cli.command {
        Command::Analyze(o) => ("analyze", o),
        Command::Decay(o) => ("decay", o),
        Command::Frac(o) => ("frac", o),
        Command::Mult(o) => ("mult", o),
        Command::VerifyExamples(o) => ("verify-examples", o),
    };
    match execute(name, opts.clone()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(s, e)) => {
            eprintln!("error: stage `{s}` failed: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Checks(list)) => {
            eprintln!("FAIL: {} failure(s)", list.len());
            for f in list {
                eprintln!("  {f}");
            }
            ExitCode::from(1)
        }
    }
}

fn execute(name: &str, opts: Common) -> Result<(), Failure> {
    let mut cfg = match &opts.config {
        Some(p) => config::load(p)?,
        None => AnalysisConfig::default(),
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(t) = opts.tol {
        cfg.tolerances.consistency_tol = t;
    }
    if opts.threads == Some(0) {
        return Err(ConfigError { field: "--threads".into(), message: "must be at least 1".into() }.into());
    }
    cfg.validate()?;
    let threads = opts
        .threads
        .or(cfg.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out_dir = opts
        .out_dir
        .clone()
        .or(cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("semistab-out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Stage("thread pool".into(), e.to_string()))?;
    let mut run = Run {
        report: Report::new(name, &cfg),
        cfg,
        opts,
    };
    let outcome = pool.install(|| match name {
        "analyze" => analyze(&mut run),
        "decay" => decay(&mut run),
        "frac" => frac(&mut run),
        "mult" => mult(&mut run),
        _ => verify(&mut run),
    });
    outcome?;
    run.report
        .write(&out_dir, threads)
        .map_err(|e| Failure::Stage("write reports".into(), e.to_string()))?;
    let failures = run.report.failures();
    if failures.is_empty() {
        println!("PASS ({name}); reports in {}", out_dir.display());
        Ok(())
    } else {
        Err(Failure::Checks(failures))
    }
}

fn index_case(sigma: f64, tau: f64) -> String {
    format!("sigma={sigma},tau={tau}")
}

fn measurement_rows(report: &mut Report, m: &DecayMeasurement) {
    let case = index_case(m.sigma, m.tau);
    for (t, v) in m.t_grid.nodes.iter().zip(&m.norms) {
        report.row(
            "decay",
            Row {
                case: case.clone(),
                t_or_xi: num(*t),
                value: num(*v),
                fit_exponent: num(m.rho_hat),
                predicted: String::new(),
                source: "measured".into(),
                verdict: String::new(),
            },
        );
    }
}

fn measure_all(run: &mut Run) -> Result<Vec<DecayMeasurement>, Failure> {
    let model = run.cfg.model()?;
    let grid = run.cfg.t_grid()?;
    let mut indices = run.cfg.indices.clone();
    if indices.is_empty() {
        indices.push(config::IndexPair { sigma: 0.0, tau: 0.0 });
    }
    let mut out = Vec::new();
    for ix in indices {
        let t0 = Instant::now();
        let name = format!("measure_decay({})", index_case(ix.sigma, ix.tau));
        let m = stage(&name, measure_decay(&model, ix.sigma, ix.tau, &grid))?;
        run.report.time(&name, t0);
        measurement_rows(&mut run.report, &m);
        if m.classification == DecayClass::Polynomial {
            if let Some(f) = &m.fit {
                run.report.check(
                    format!("fit residual {}", index_case(m.sigma, m.tau)),
                    f.residual,
                    format!("<= {}", run.cfg.tolerances.fit_tol),
                    f.residual <= run.cfg.tolerances.fit_tol,
                );
            }
        }
        out.push(m);
    }
    Ok(out)
}

fn decay(run: &mut Run) -> Result<(), Failure> {
    let ms = measure_all(run)?;
    run.report.set("measurements", serde_json::to_value(&ms).expect("serializable"));
    Ok(())
}

fn analyze(run: &mut Run) -> Result<(), Failure> {
    let model = run.cfg.model()?;
    let xi = run.cfg.xi_grid()?;
    let t0 = Instant::now();
    let probes = probe_resolvent_norms(&model, &xi, 0.0);
    run.report.time("probe", t0);
    let t0 = Instant::now();
    let profile = stage("fit_growth_profile", fit_growth_profile(&probes))?;
    run.report.time("fit_growth_profile", t0);
    for p in &probes {
        run.report.row(
            "probes",
            Row {
                case: format!("eta={}", p.eta),
                t_or_xi: num(p.xi),
                value: opt_num(p.envelope),
                fit_exponent: num(if p.xi.abs() < profile.split { profile.alpha_hat } else { profile.beta_hat }),
                predicted: String::new(),
                source: "probed".into(),
                verdict: p.status.clone(),
            },
        );
    }
    let (alpha, beta) = (profile.alpha_hat, profile.beta_hat);
    let grid = run.cfg.t_grid()?;
    let semigroup = stage("measure_decay(semigroup)", measure_decay(&model, 0.0, 0.0, &grid))?;
    let mu = (-semigroup.rho_hat).max(0.0);
    let ms = measure_all(run)?;
    let g = run.cfg.geometry;
    let tol = run.cfg.tolerances.consistency_tol;
    let mut preds = Vec::new();
    for m in &ms {
        let (s, t) = (m.sigma, m.tau);
        let mut list = vec![
            predict_rate_general(alpha, beta, s, t),
            predict_rate_fourier_type(alpha, beta, s, t, &g),
            predict_rate_type_cotype(alpha, beta, s, t, &g),
        ];
        list.extend(predict_rate_lattice(alpha, beta, s, t, &g));
        let ga = predict_rate_growth_aware(alpha, beta, s, t, mu);
        list.push(ga.corollary.clone());
        list.extend(ga.scaling.clone());
        for p in list {
            let r = check_consistency(m, &p, tol);
            let verdict = match r.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::NotApplicable => "NOT-APPLICABLE",
            };
            run.report.row(
                "predictions",
                Row {
                    case: index_case(s, t),
                    t_or_xi: String::new(),
                    value: num(m.rho_hat),
                    fit_exponent: num(m.rho_hat),
                    predicted: opt_num(p.rho),
                    source: p.source.clone(),
                    verdict: verdict.into(),
                },
            );
            if r.verdict == Verdict::Fail {
                run.report.fail(format!("consistency {} {}: predicted {} measured {}", index_case(s, t), p.source, opt_num(p.rho), num(m.rho_hat)));
            }
            preds.push(json!({ "sigma": s, "tau": t, "prediction": p, "consistency": r }));
        }
    }
    run.report.set("profile", serde_json::to_value(&profile).expect("serializable"));
    run.report.set("semigroup_growth_mu", json!(mu));
    run.report.set("measurements", serde_json::to_value(&ms).expect("serializable"));
    run.report.set("predictions", Value::Array(preds));
    Ok(())
}

fn frac(run: &mut Run) -> Result<(), Failure> {
    let spec = run.cfg.frac.clone().unwrap_or_default();
    let mut contour = ContourSpec::default();
    if let Some(n) = spec.nodes_per_ray {
        contour = contour.with_nodes(n);
    }
    let tuples: Vec<(f64, f64, f64, C64)> = match &spec.tuples {
        Some(v) => v.iter().map(|t| (t.alpha, t.beta, t.eta, c(t.lambda[0], t.lambda[1]))).collect(),
        None => contour_battery(),
    };
    let tol = run.cfg.tolerances.quad_tol;
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for (i, &(a, b, e, l)) in tuples.iter().enumerate() {
        let r = verify_contour_identity(a, b, e, l, &contour)
            .map_err(|err| Failure::Config(ConfigError { field: format!("frac.tuples[{i}]"), message: err.to_string() }))?;
        let case = format!("alpha={a},beta={b},eta={e},lambda={}", format_complex(l));
        let ok = r.rel_error < tol;
        if !ok {
            run.report.fail(format!("{case}: rel_error {}", r.rel_error));
        }
        run.report.row(
            "frac",
            Row {
                case: case.clone(),
                t_or_xi: String::new(),
                value: num(r.rel_error),
                fit_exponent: String::new(),
                predicted: format_complex(r.closed_form),
                source: "contour".into(),
                verdict: if ok { "PASS" } else { "FAIL" }.into(),
            },
        );
        rows.push(json!({
            "alpha": a, "beta": b, "eta": e, "lambda": format_complex(l),
            "quadrature": format_complex(r.quadrature),
            "closed_form": format_complex(r.closed_form),
            "rel_error": r.rel_error,
        }));
    }
    run.report.time("contour battery", t0);
    run.report.set("contour", json!({ "spec": contour, "tuples": rows }));
    Ok(())
}

fn mult(run: &mut Run) -> Result<(), Failure> {
    let spec = match run.cfg.mult.clone() {
        Some(s) => s,
        None => config::MultSpec { symbol: SymbolSpec::ScalarResolvent { a: 1.0 }, pairs: None, trials: 32 },
    };
    let grid = run.cfg.grids.fourier_grid;
    let symbol: Box<dyn Symbol> = match spec.symbol {
        SymbolSpec::Resolvent { k } => Box::new(ResolventPowerSymbol::new(&run.cfg.dense_model()?, k)),
        SymbolSpec::ScalarResolvent { a } => {
            if !(a > 0.0) {
                return Err(ConfigError { field: "mult.symbol.a".into(), message: format!("must be positive, got {a}") }.into());
            }
            Box::new(ScalarSymbol(move |xi: f64| c(1.0, 0.0) / c(a, xi)))
        }
        SymbolSpec::InverseSquare { scale } => Box::new(ScalarSymbol(move |xi: f64| c(scale / (1.0 + xi.abs()).powi(2), 0.0))),
    };
    let pairs: Vec<(f64, f64)> = match &spec.pairs {
        Some(v) => v.iter().map(|p| (p.p, p.q)).collect(),
        None => PQ_PAIRS.to_vec(),
    };
    let t0 = Instant::now();
    let samples = stage("sample_symbol", sample_symbol(symbol.as_ref(), &grid))?;
    let norms: Vec<f64> = samples.iter().map(spectral_norm).collect();
    let mut out = Vec::new();
    for (p, q) in pairs {
        let mut est = stage("estimate_pq_norm_lower", estimate_pq_norm_lower(symbol.as_ref(), p, q, &grid, spec.trials, run.cfg.seed))?;
        let bound = match hilbert_constants(p, q) {
            Some(fc) => Some(stage("upper_bound", upper_bound_pq_norm_fourier_type(&norms, &grid, p, q, fc))?),
            None => None,
        };
        est.upper_bound = bound;
        let case = format!("p={},q={}", num(p), num(q));
        let verdict = match bound {
            Some(u) if est.lower_bound <= u + 1e-6 => "PASS",
            Some(_) => {
                run.report.fail(format!("{case}: lower bound exceeds upper bound"));
                "FAIL"
            }
            None => "NOT-APPLICABLE",
        };
        run.report.row(
            "mult",
            Row {
                case,
                t_or_xi: String::new(),
                value: num(est.lower_bound),
                fit_exponent: String::new(),
                predicted: opt_num(bound),
                source: est.method.clone(),
                verdict: verdict.into(),
            },
        );
        out.push(est);
    }
    run.report.time("multiplier bounds", t0);
    run.report.set("grid", serde_json::to_value(grid).expect("serializable"));
    run.report.set("estimates", serde_json::to_value(&out).expect("serializable"));
    Ok(())
}

fn verify(run: &mut Run) -> Result<(), Failure> {
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        only: run.opts.only.clone(),
        seed: run.opts.seed.unwrap_or(defaults.seed),
        exponent_offset: run.opts.inject_exponent_offset,
    };
    let results = run_battery(&opts);
    if results.is_empty() {
        return Err(ConfigError { field: "--only".into(), message: "selects no criteria".into() }.into());
    }
    for r in &results {
        println!("{}", r.line());
        run.report.seconds(&format!("criterion {}", r.id), r.seconds);
        for ch in &r.checks {
            run.report.row(
                "verify",
                Row {
                    case: format!("{}: {}", r.id, ch.case),
                    t_or_xi: String::new(),
                    value: num(ch.value),
                    fit_exponent: String::new(),
                    predicted: ch.target.clone(),
                    source: format!("criterion {}", r.id),
                    verdict: if ch.passed { "PASS" } else { "FAIL" }.into(),
                },
            );
        }
        if !r.passed() {
            run.report.fail(r.line());
        }
    }
    run.report.set("criteria", serde_json::to_value(&results).expect("serializable"));
    Ok(())
}
