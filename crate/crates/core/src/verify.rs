//! The bundled reproduction battery: ten numbered criteria, each a list
//! of named checks with a runtime budget.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decaylab::*;
use crate::error::Result;
use crate::fraccalc::{
    contour_fractional_apply, phi_scalar, verify_contour_identity, ContourSpec, FractionalIndex,
};
use crate::linalg::{c, inverse, spectral_norm, CMat, CVec, C64};
use crate::multiplier::*;
use crate::numcore::{fit_exponential_rate, geometric_grid, log_stable_exp_sum};
use crate::operators::*;
use crate::resolvent::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub case: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub tags: Vec<String>,
    pub checks: Vec<Check>,
    /// Stage error that stopped the criterion early.
    pub error: Option<String>,
    pub budget_seconds: f64,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn checks_passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn within_budget(&self) -> bool {
        self.seconds <= self.budget_seconds
    }

    pub fn passed(&self) -> bool {
        self.checks_passed() && self.within_budget()
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{verdict} criterion {:>2} {} ({} checks, {:.2}s of {:.0}s)",
            self.id,
            self.name,
            self.checks.len(),
            self.seconds,
            self.budget_seconds
        );
        if let Some(e) = &self.error {
            s.push_str(&format!("; error: {e}"));
        }
        for f in self.failures() {
            s.push_str(&format!("; failed {} = {:.6} (want {})", f.case, f.value, f.target));
        }
        if !self.within_budget() {
            s.push_str("; over runtime budget");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Comma-separated ids or tags; `None` runs everything.
    pub only: Option<String>,
    pub seed: u64,
    /// Added to every expected exponent; nonzero values make the battery fail.
    pub exponent_offset: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            only: None,
            seed: 20190101,
            exponent_offset: 0.0,
        }
    }
}

struct Sink {
    checks: Vec<Check>,
}

impl Sink {
    fn new() -> Self {
        Sink { checks: Vec::new() }
    }

    fn within(&mut self, case: impl Into<String>, value: f64, want: f64, tol: f64) {
        self.checks.push(Check {
            case: case.into(),
            value,
            target: format!("{want} +- {tol}"),
            passed: (value - want).abs() <= tol,
        });
    }

    fn below(&mut self, case: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check {
            case: case.into(),
            value,
            target: format!("<= {bound:e}"),
            passed: value <= bound,
        });
    }

    fn above(&mut self, case: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check {
            case: case.into(),
            value,
            target: format!(">= {bound:e}"),
            passed: value >= bound,
        });
    }

    fn holds(&mut self, case: impl Into<String>, ok: bool) {
        self.checks.push(Check {
            case: case.into(),
            value: ok as u8 as f64,
            target: "1".into(),
            passed: ok,
        });
    }
}

pub struct CriterionSpec {
    pub id: u32,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub budget_seconds: f64,
    run: fn(&VerifyOptions, &mut Sink) -> Result<()>,
}

pub fn criteria() -> Vec<CriterionSpec> {
    vec![
        CriterionSpec { id: 1, name: "stable exponential sum bounds", tags: &["appendix", "numcore"], budget_seconds: 1.0, run: c1 },
        CriterionSpec { id: 2, name: "scalar contour identity", tags: &["appendix", "fraccalc"], budget_seconds: 5.0, run: c2 },
        CriterionSpec { id: 3, name: "fractional powers by contour", tags: &["fraccalc"], budget_seconds: 10.0, run: c3 },
        CriterionSpec { id: 4, name: "sobolev diagonal multiplication", tags: &["examples", "sobolev", "decaylab"], budget_seconds: 30.0, run: c4 },
        CriterionSpec { id: 5, name: "operator matrix growth", tags: &["examples", "operator-matrix", "decaylab"], budget_seconds: 30.0, run: c5 },
        CriterionSpec { id: 6, name: "jordan sum optimality", tags: &["examples", "jordan", "resolvent"], budget_seconds: 60.0, run: c6 },
        CriterionSpec { id: 7, name: "laplace and convolution identities", tags: &["multiplier", "laplace"], budget_seconds: 20.0, run: c7 },
        CriterionSpec { id: 8, name: "multiplier norm bounds", tags: &["multiplier"], budget_seconds: 30.0, run: c8 },
        CriterionSpec { id: 9, name: "predictor algebra", tags: &["predictors", "decaylab"], budget_seconds: 10.0, run: c9 },
        CriterionSpec { id: 10, name: "growth bound versus tempered abscissa", tags: &["spectral", "resolvent"], budget_seconds: 60.0, run: c10 },
    ]
}

fn selected(spec: &CriterionSpec, only: &Option<String>) -> bool {
    match only {
        None => true,
        Some(f) => f.split(',').map(str::trim).filter(|s| !s.is_empty()).any(|t| {
            t == spec.id.to_string() || spec.tags.contains(&t) || spec.name == t
        }),
    }
}

/// Runs one criterion and times it.
pub fn run_criterion(spec: &CriterionSpec, opts: &VerifyOptions) -> CriterionResult {
    let start = Instant::now();
    let mut sink = Sink::new();
    let error = (spec.run)(opts, &mut sink).err().map(|e| e.to_string());
    CriterionResult {
        id: spec.id,
        name: spec.name.into(),
        tags: spec.tags.iter().map(|s| s.to_string()).collect(),
        checks: sink.checks,
        error,
        budget_seconds: spec.budget_seconds,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the selected criteria in order.
pub fn run_battery(opts: &VerifyOptions) -> Vec<CriterionResult> {
    criteria()
        .iter()
        .filter(|s| selected(s, &opts.only))
        .map(|s| run_criterion(s, opts))
        .collect()
}

fn c1(_: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    for m in 1..=500i64 {
        let l = log_stable_exp_sum::<f64>(m)?;
        let base = m as f64 - 0.25 * (m as f64).ln();
        worst_low = worst_low.min(l - (base - 2.0));
        worst_high = worst_high.min(base - l);
    }
    s.above("lower bound slack over m = 1..500", worst_low, 0.0);
    s.above("upper bound slack over m = 1..500", worst_high, 0.0);
    Ok(())
}

/// Contour identity battery: every combination of the index sets.
pub fn contour_battery() -> Vec<(f64, f64, f64, C64)> {
    let mut v = Vec::new();
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        for beta in [0.5, 1.0, 2.0] {
            for eta in [0.5, 1.0] {
                for lambda in [c(0.0, 1.0), c(0.0, 2.0), c(0.5, 1.0)] {
                    v.push((alpha, beta, eta, lambda));
                }
            }
        }
    }
    v
}

fn c2(_: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let spec = ContourSpec::default();
    let battery = contour_battery();
    let mut worst: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    for &(a, b, e, l) in &battery {
        let r = verify_contour_identity(a, b, e, l, &spec)?;
        worst = worst.max(r.rel_error);
        let mut prev = verify_contour_identity(a, b, e, l, &spec.with_nodes(64))?.rel_error;
        let mut nodes = 128;
        while prev >= 1e-10 && nodes <= 16384 {
            let next = verify_contour_identity(a, b, e, l, &spec.with_nodes(nodes))?.rel_error;
            if next >= 1e-10 {
                worst_ratio = worst_ratio.min(prev / next);
            }
            prev = next;
            nodes *= 2;
        }
        if prev >= 1e-10 {
            worst_ratio = 0.0;
        }
    }
    s.above("battery size", battery.len() as f64, 20.0);
    s.below("max relative error at default contour", worst, 1e-6);
    s.above("min error ratio per node doubling above 1e-10", worst_ratio, 4.0);
    Ok(())
}

fn rel(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn c3(_: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let spec = ContourSpec::default();
    let values = vec![c(0.5, 0.0), c(1.0, 2.0), c(3.0, -1.0), c(10.0, 0.0), c(0.01, 0.005)];
    let diag = OperatorModel::Diagonal(DiagonalModel::from_values(values.clone())?);
    // V diag(mu) V^{-1} with a fixed well-conditioned V
    let n = 4;
    let mu = [c(0.7, 0.3), c(2.0, -1.5), c(5.0, 0.0), c(0.2, 0.1)];
    let v = CMat::from_fn(n, n, |i, j| {
        if i == j {
            c(1.0, 0.0)
        } else {
            c(0.2 * ((i + 2 * j) as f64).sin(), 0.1 * ((3 * i + j) as f64).cos())
        }
    });
    let vinv = inverse(&v).ok_or_else(|| crate::error::Error::Numerical("V singular".into()))?;
    let a = &v * CMat::from_diagonal(&CVec::from_row_slice(&mu)) * &vinv;
    let dense = OperatorModel::Dense(DenseModel::new(a)?);
    let x5 = CVec::from_fn(5, |i, _| c(1.0 + i as f64, 0.5 - i as f64));
    let x4 = CVec::from_fn(4, |i, _| c(0.3 * i as f64 - 1.0, 1.0));
    let indices = [(0.5, 0.5, 1.0), (0.3, 1.2, 1.0), (1.5, 0.7, 0.5), (0.0, 0.5, 1.0), (2.0, 1.0, 1.0)];
    let mut worst: f64 = 0.0;
    for &(alpha, beta, eta) in &indices {
        let idx = FractionalIndex { alpha, beta, eta };
        let got = contour_fractional_apply(&diag, &idx, &x5, &spec)?;
        let want = CVec::from_fn(5, |i, _| phi_scalar(values[i], alpha, beta, eta) * x5[i]);
        worst = worst.max(rel(&got, &want));
        let got = contour_fractional_apply(&dense, &idx, &x4, &spec)?;
        let f = CMat::from_diagonal(&CVec::from_fn(n, |i, _| phi_scalar(mu[i], alpha, beta, eta)));
        let want = &v * f * &vinv * &x4;
        worst = worst.max(rel(&got, &want));
    }
    s.below("contour vs eigenvalue closed forms", worst, 1e-8);
    let mut worst_law: f64 = 0.0;
    let phi = |m: &OperatorModel, a: f64, b: f64, x: &CVec| {
        contour_fractional_apply(m, &FractionalIndex { alpha: a, beta: b, eta: 1.0 }, x, &spec)
    };
    for &((s1, t1), (s2, t2)) in &[((0.5, 0.5), (0.3, 1.0)), ((1.2, 0.4), (0.6, 0.9)), ((0.0, 0.7), (0.5, 0.3))] {
        for (m, x) in [(&diag, &x5), (&dense, &x4)] {
            let lhs = phi(m, s1, t1, &phi(m, s2, t2, x)?)?;
            let rhs = phi(m, s1 + s2, t1 + t2, x)?;
            worst_law = worst_law.max(rel(&lhs, &rhs));
        }
    }
    s.below("Phi semigroup law", worst_law, 1e-8);
    Ok(())
}

/// Sobolev diagonal model with `(a, b) = (1, 1/2)`.
pub fn sobolev_model() -> Result<OperatorModel> {
    Ok(OperatorModel::Diagonal(DiagonalModel::sobolev_default(1.0, 0.5)?))
}

fn c4(o: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let (a, b) = (1.0, 0.5);
    let model = sobolev_model()?;
    let probes = probe_resolvent_norms(&model, &geometric_grid(1e-3, 1e3, 97)?, 0.0);
    let prof = fit_growth_profile(&probes)?;
    let beta = (b - 1.0 + 2.0 * a) / b;
    s.within("beta_hat", prof.beta_hat, beta + o.exponent_offset, 0.1);
    let grid = geometric_grid(10.0, 1e5, 41)?;
    let hilbert = GeometryDescriptor::hilbert();
    for tau in [0.0, 1.0, 2.0, 3.0, 6.0] {
        let m = measure_decay(&model, 0.0, tau, &grid)?;
        if tau <= 2.0 {
            let want = (1.0 - b + b * tau) / a - 1.0 + o.exponent_offset;
            s.within(format!("decay exponent tau={tau}"), m.rho_hat, want, 0.05);
        }
        let p = predict_rate_fourier_type(0.0, beta, 0.0, tau, &hilbert);
        if p.applicable() {
            let r = check_consistency(&m, &p, 0.05);
            s.holds(format!("hilbert consistency tau={tau} margin={:.4}", r.margin), r.verdict == Verdict::Pass);
        }
    }
    Ok(())
}

fn c5(o: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let n = 3;
    let model = OperatorModel::OperatorMatrix(OperatorMatrixModel::analytic(n, 64)?);
    let grid = geometric_grid(10.0, 1e4, 41)?;
    for m in 0..n as u32 {
        let d = measure_decay_map(&model, DecayMap::GeneratorPower { m }, &grid)?;
        let e = d.fit.as_ref().map(|f| f.exponent).unwrap_or(f64::NAN);
        s.within(format!("growth exponent m={m}"), e, (n as f64 - 1.0 - m as f64) + o.exponent_offset, 0.05);
        if m == n as u32 - 1 {
            s.holds("T(t)A^{n-1} bounded-not-decaying", d.classification == DecayClass::BoundedNotDecaying);
        }
    }
    Ok(())
}

fn band(v: &[f64]) -> f64 {
    let mx = v.iter().cloned().fold(0.0, f64::max);
    let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
    mx / mn
}

fn c6(o: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let n_max = 10_000;
    let j = JordanSumModel::new(0.5, 0.5, n_max)?;
    let beta0 = j.beta0();
    let model = OperatorModel::JordanSum(j);
    let probes = probe_resolvent_norms(&model, &geometric_grid(1e-2, 1e4, 97)?, 0.0);
    let prof = fit_growth_profile(&probes)?;
    s.within("beta_hat (0.5, 0.5)", prof.beta_hat, beta0 + o.exponent_offset, 0.1);

    let (gamma, delta) = (0.5, 0.9);
    let j = JordanSumModel::new(gamma, delta, n_max)?;
    let top = j.max_block_size() as f64 - 1.0;
    let tc = j.critical_tau();
    let model = OperatorModel::JordanSum(j);
    let ts: Vec<f64> = (0..41).map(|i| 5.0 + (top - 5.0) * i as f64 / 40.0).collect();
    let norms = |sigma: f64, tau: f64| -> Result<Vec<f64>> {
        ts.iter().map(|&t| model.fractional_norm(t, sigma, tau).map(|v| v.value)).collect()
    };
    let g = norms(0.0, 0.0)?;
    let rate = fit_exponential_rate(&ts, &g, Some(0..ts.len()))?.rate;
    s.within("log-growth slope of ||T(t)||", rate, 1.0 - gamma + o.exponent_offset, 0.05);
    let at = norms(0.0, tc)?;
    s.below("band of ||T(t)||_{X_tau -> X} at tau = (1-gamma)/log(1/delta)", band(&at), 10.0);
    let half = norms(0.0, 0.5 * tc)?;
    s.above("growth at half that tau", half[half.len() - 1] / half[0], 10.0);
    Ok(())
}

/// Stable non-normal 4x4 test matrix.
pub fn dense_stable_4() -> Result<DenseModel> {
    DenseModel::from_real(
        4,
        &[2.0, 1.0, 0.0, 0.5, -1.0, 1.5, 0.3, 0.0, 0.0, 0.2, 1.0, 2.0, 0.1, 0.0, -1.0, 3.0],
    )
}

fn c7(_: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let model = dense_stable_4()?;
    let grid = FourierGridSpec::new(100.0, 1 << 14)?;
    let x = CVec::from_row_slice(&[c(1.0, 0.0), c(0.0, 1.0), c(-0.5, 0.0), c(0.3, 0.2)]);
    for n in 0..3 {
        let r = verify_laplace_identity(&model, n, &x, &grid)?;
        s.below(format!("laplace n={n}"), r.max_rel_error, 1e-3);
    }
    let f = CMat::from_fn(grid.samples, 4, |j, i| x[i] * (-0.5 * (grid.time(j) + 10.0).powi(2)).exp());
    for k in 0..3 {
        let sk = convolution_s_k(&model, k, &f, &grid)?;
        let mm = apply_multiplier(&ResolventPowerSymbol::new(&model, k), &f, &grid)?;
        s.below(format!("S_k vs multiplier k={k}"), (&sk - &mm).norm() / mm.norm(), 1e-3);
    }
    Ok(())
}

/// Symbols on Hilbert models used by the norm battery.
pub fn symbol_battery() -> Result<Vec<(String, Box<dyn Symbol>)>> {
    let dense = dense_stable_4()?;
    let normal = DenseModel::new(CMat::from_diagonal(&CVec::from_row_slice(&[
        c(1.0, 2.0),
        c(0.5, 0.0),
        c(2.0, -1.0),
    ])))?;
    Ok(vec![
        ("scalar 1/(i xi + 1)".to_string(), Box::new(ScalarSymbol(|xi: f64| c(1.0, 0.0) / c(1.0, xi))) as Box<dyn Symbol>),
        ("scalar 1/(1+|xi|)^2".to_string(), Box::new(ScalarSymbol(|xi: f64| c((1.0 + xi.abs()).powi(-2), 0.0)))),
        ("dense resolvent".to_string(), Box::new(ResolventPowerSymbol::new(&dense, 0))),
        ("dense resolvent squared".to_string(), Box::new(ResolventPowerSymbol::new(&dense, 1))),
        ("normal resolvent".to_string(), Box::new(ResolventPowerSymbol::new(&normal, 0))),
    ])
}

pub const PQ_PAIRS: [(f64, f64); 5] = [(2.0, 2.0), (1.0, f64::INFINITY), (1.0, 2.0), (2.0, f64::INFINITY), (1.5, 3.0)];

fn c8(o: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let grid = FourierGridSpec::new(200.0, 1 << 12)?;
    for (name, sym) in symbol_battery()? {
        let samples = sample_symbol(sym.as_ref(), &grid)?;
        let norms: Vec<f64> = samples.iter().map(spectral_norm).collect();
        let exact = exact_l2_norm(sym.as_ref(), &grid)?;
        for &(p, q) in &PQ_PAIRS {
            let est = estimate_pq_norm_lower(sym.as_ref(), p, q, &grid, 32, o.seed)?;
            if p == 2.0 && q == 2.0 {
                s.above(format!("{name}: plancherel ratio"), est.lower_bound / exact, 0.95);
                s.below(format!("{name}: lower <= exact l2"), est.lower_bound - exact, 1e-6);
            }
            if let Some(fc) = hilbert_constants(p, q) {
                let ub = upper_bound_pq_norm_fourier_type(&norms, &grid, p, q, fc)?;
                s.below(format!("{name}: lower - upper at (p,q)=({p},{q})"), est.lower_bound - ub, 1e-6);
            }
        }
    }
    Ok(())
}

fn rand_index(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    if u < 0.1 {
        0.0
    } else if u < 0.2 {
        (rng.gen_range(0..=(2.0 * hi) as i64) as f64) * 0.5
    } else {
        rng.gen_range(0.0..hi)
    }
}

fn same(a: &RatePrediction, b: &RatePrediction) -> bool {
    a.rho == b.rho
        && a.strict == b.strict
        && a.conditions.iter().map(|c| c.passed).eq(b.conditions.iter().map(|c| c.passed))
}

fn predictor_ranks(alpha: f64, beta: f64, sigma: f64, tau: f64, g: &GeometryDescriptor) -> Vec<f64> {
    let mut tc = *g;
    tc.r_resolvent_growth_asserted = true;
    vec![
        rank(predict_rate_general(alpha, beta, sigma, tau).rho),
        rank(predict_rate_fourier_type(alpha, beta, sigma, tau, g).rho),
        rank(predict_rate_fourier_type(alpha, beta, sigma, tau, &GeometryDescriptor::hilbert()).rho),
        rank(predict_rate_type_cotype(alpha, beta, sigma, tau, &tc).rho),
        rank(predict_rate_asymptotically_analytic(alpha, sigma, true).rho),
        rank(predict_rate_growth_aware(alpha, beta, sigma, tau, 0.5).corollary.rho),
        rank(predict_rate_growth_aware(alpha, beta, sigma, tau, 0.5).scaling.and_then(|p| p.rho)),
    ]
}

fn c9(o: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let p1 = GeometryDescriptor {
        fourier_type: 1.0,
        type_p: 1.0,
        cotype: f64::INFINITY,
        hilbert: false,
        lattice: None,
        positive_semigroup: false,
        r_resolvent_growth_asserted: false,
    };
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let (a, b, sg, t) = (rand_index(&mut rng, 3.0), rand_index(&mut rng, 3.0), rand_index(&mut rng, 6.0), rand_index(&mut rng, 6.0));
        if !same(&predict_rate_fourier_type(a, b, sg, t, &p1), &predict_rate_general(a, b, sg, t)) {
            mismatches += 1;
        }
    }
    s.below("fourier type 1 vs general mismatches in 10^4 tuples", mismatches as f64, 0.0);

    let mut violations = 0;
    let mut hilbert_dominance = 0;
    for _ in 0..2_000 {
        let (a, b, sg, t) = (rand_index(&mut rng, 3.0), rand_index(&mut rng, 3.0), rand_index(&mut rng, 6.0), rand_index(&mut rng, 6.0));
        let p: f64 = rng.gen_range(1.0..=2.0);
        let u = rng.gen_range(1.0..6.0);
        let mut g = GeometryDescriptor::lebesgue(u)?;
        g.fourier_type = p.min(g.fourier_type);
        let base = predictor_ranks(a, b, sg, t, &g);
        let d = rng.gen_range(0.0..1.0);
        let moves = [
            predictor_ranks(a, b, sg + d, t, &g),
            predictor_ranks(a, b, sg, t + d, &g),
        ];
        for m in &moves {
            violations += base.iter().zip(m).filter(|(x, y)| y < x).count();
        }
        let moves = [
            predictor_ranks(a + d, b, sg, t, &g),
            predictor_ranks(a, b + d, sg, t, &g),
        ];
        for m in &moves {
            violations += base.iter().zip(m).filter(|(x, y)| y > x).count();
        }
        let h = GeometryDescriptor::hilbert();
        let hil = rank(predict_rate_fourier_type(a, b, sg, t, &h).rho);
        let mut others = vec![
            rank(predict_rate_general(a, b, sg, t).rho),
            rank(predict_rate_type_cotype(a, b, sg, t, &h).rho),
        ];
        if let Some(l) = predict_rate_lattice(a, b, sg, t, &h) {
            others.push(rank(l.rho));
        }
        if b == 0.0 {
            others.push(rank(predict_rate_asymptotically_analytic(a, sg, true).rho));
        }
        hilbert_dominance += others.iter().filter(|&&r| r > hil).count();
    }
    s.below("monotonicity violations", violations as f64, 0.0);
    s.below("hilbert dominance violations", hilbert_dominance as f64, 0.0);

    let model = sobolev_model()?;
    let grid = geometric_grid(10.0, 1e5, 41)?;
    let m1 = measure_decay(&model, 0.0, 4.0, &grid)?;
    let m2 = measure_decay(&model, 0.0, 2.0, &grid)?;
    let mid = interpolate_rates(
        RatePoint { sigma: 0.0, tau: 4.0, rho: m1.rho_hat },
        RatePoint { sigma: 0.0, tau: 2.0, rho: m2.rho_hat },
        0.5,
    )?;
    let mm = measure_decay(&model, mid.sigma, mid.tau, &grid)?;
    s.within("interpolation midpoint exponent", mm.rho_hat, mid.rho + o.exponent_offset, 0.05);
    Ok(())
}

/// `U diag(mu) U^{-1}` with `U = I + 0.3 G / sqrt(n)`, `Re mu` in
/// `[shift, shift + 3]`, `Im mu` in `[-5, 5]`.
pub fn random_stable_model(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Result<DenseModel> {
    let g = CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let u = CMat::identity(n, n) + g * c(0.3 / (n as f64).sqrt(), 0.0);
    let uinv = inverse(&u).ok_or_else(|| crate::error::Error::Numerical("U singular".into()))?;
    let mu = CVec::from_fn(n, |_, _| c(shift + rng.gen_range(0.0..3.0), rng.gen_range(-5.0..5.0)));
    DenseModel::new(&u * CMat::from_diagonal(&mu) * uinv)
}

fn c10(o: &VerifyOptions, s: &mut Sink) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 0x5eed);
    let xi = geometric_grid(1e-2, 1e2, 25)?;
    let ts: Vec<f64> = (0..41).map(|i| i as f64 * 0.5).collect();
    let mut worst = f64::NEG_INFINITY;
    for case in 0..20 {
        let n = rng.gen_range(2..=50);
        let shift = rng.gen_range(0.1..1.0);
        let model = OperatorModel::Dense(random_stable_model(&mut rng, n, shift)?);
        let s0 = spectral_abscissa(&model)?;
        let etas: Vec<f64> = (0..9).map(|i| s0 - 0.5 + 0.25 * i as f64).collect();
        for beta in [0.0, 1.0] {
            let sb = tempered_abscissa(&model, &xi, &etas, beta, 1e-2)
                .ok_or_else(|| crate::error::Error::Numerical("no bounded line".into()))?;
            let norms: Vec<f64> = ts
                .iter()
                .map(|&t| model.fractional_norm(t, 0.0, beta + 1.0).map(|v| v.value))
                .collect::<Result<_>>()?;
            let w = fit_exponential_rate(&ts, &norms, None)?.rate;
            worst = worst.max(w - sb);
            if w > sb + 0.05 {
                s.holds(format!("model {case} (n={n}) beta={beta}: abscissa {w:.4} vs s_beta {sb:.4}"), false);
            }
        }
    }
    s.below("max fitted abscissa minus s_beta over 20 models", worst, 0.05);
    Ok(())
}

/// Constants used by the report: `1/pi` for `m = (1+|xi|)^{-2}` at `p = 1, q = inf`.
pub fn reference_bound_inverse_square() -> f64 {
    1.0 / PI
}
