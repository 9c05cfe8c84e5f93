//! Operator-valued Fourier multipliers on a periodic time window.
//!
//! Transform convention: `F f(xi) = int e^{-i xi t} f(t) dt`, discretized on
//! `t_j = -L/2 + j L/N` with frequencies `xi_k = 2 pi k / L`, `k` in `[-N/2, N/2)`.
//! Spectra are stored in natural order, row `r` holding `k = r - N/2`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{c, expm, inverse, spectral_norm, top_singular, CMat, CVec, C64};
use crate::operators::DenseModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGridSpec {
    pub period: f64,
    pub samples: usize,
}

impl FourierGridSpec {
    pub fn new(period: f64, samples: usize) -> Result<Self> {
        let g = FourierGridSpec { period, samples };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return domain(format!("period must be positive, got {}", self.period));
        }
        if self.samples < 4 || !self.samples.is_power_of_two() {
            return domain(format!("samples must be a power of two >= 4, got {}", self.samples));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.period / self.samples as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn time(&self, j: usize) -> f64 {
        -0.5 * self.period + j as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|j| self.time(j)).collect()
    }

    /// Integer frequency index of spectrum row `r`.
    pub fn k(&self, r: usize) -> i64 {
        r as i64 - (self.samples / 2) as i64
    }

    pub fn xi(&self, r: usize) -> f64 {
        self.k(r) as f64 * self.dxi()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.samples).map(|r| self.xi(r)).collect()
    }

    /// Index of `t = 0`.
    pub fn origin(&self) -> usize {
        self.samples / 2
    }

    /// Warning text when `scale` (the finest time scale of interest) is
    /// not resolved by the grid or the window is shorter than `scale`.
    pub fn resolution_warning(&self, scale: f64) -> Option<String> {
        if self.dt() > 0.1 * scale {
            Some(format!("time step {} does not resolve scale {scale}", self.dt()))
        } else if self.period < 10.0 * scale {
            Some(format!("window {} is short for scale {scale}", self.period))
        } else {
            None
        }
    }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Column-wise `F f` for samples stored as an `N x d` matrix.
pub fn forward(f: &CMat, grid: &FourierGridSpec) -> Result<CMat> {
    let n = grid.samples;
    if f.nrows() != n {
        return Err(Error::Shape {
            expected: n,
            got: f.nrows(),
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let dt = grid.dt();
    let mut out = CMat::zeros(n, f.ncols());
    let mut buf = vec![C64::default(); n];
    for col in 0..f.ncols() {
        buf.copy_from_slice(f.column(col).as_slice());
        fft.process(&mut buf);
        for r in 0..n {
            let k = grid.k(r);
            out[(r, col)] = buf[k.rem_euclid(n as i64) as usize] * (dt * sign(k));
        }
    }
    Ok(out)
}

/// Column-wise inverse of [`forward`].
pub fn inverse_transform(spec: &CMat, grid: &FourierGridSpec) -> Result<CMat> {
    let n = grid.samples;
    if spec.nrows() != n {
        return Err(Error::Shape {
            expected: n,
            got: spec.nrows(),
        });
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = CMat::zeros(n, spec.ncols());
    let mut buf = vec![C64::default(); n];
    for col in 0..spec.ncols() {
        for r in 0..n {
            let k = grid.k(r);
            buf[k.rem_euclid(n as i64) as usize] = spec[(r, col)] * sign(k);
        }
        fft.process(&mut buf);
        for j in 0..n {
            out[(j, col)] = buf[j] / grid.period;
        }
    }
    Ok(out)
}

/// Operator-valued symbol `xi -> m(xi)` acting on `C^dim`.
pub trait Symbol: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, xi: f64) -> Result<CMat>;
    /// Whether a failure at `xi = 0` is an isolated singularity to be zeroed.
    fn singular_at_zero(&self) -> bool {
        false
    }
}

/// Scalar symbol from a closure.
pub struct ScalarSymbol<F>(pub F);

impl<F: Fn(f64) -> C64 + Sync> Symbol for ScalarSymbol<F> {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, xi: f64) -> Result<CMat> {
        let v = (self.0)(xi);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(CMat::from_element(1, 1, v))
        } else {
            Err(Error::Numerical(format!("symbol is not finite at {xi}")))
        }
    }
}

/// Matrix-valued symbol from a closure.
pub struct MatrixSymbol<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64) -> Result<CMat> + Sync> Symbol for MatrixSymbol<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, xi: f64) -> Result<CMat> {
        (self.f)(xi)
    }
}

/// `k! (i xi + A)^{-k-1}`.
pub struct ResolventPowerSymbol {
    pub a: CMat,
    pub k: u32,
    singular_zero: bool,
}

impl ResolventPowerSymbol {
    pub fn new(model: &DenseModel, k: u32) -> Self {
        let singular_zero = model.dist_to_spectrum(c(0.0, 0.0)) < 1e-12;
        ResolventPowerSymbol {
            a: model.a.clone(),
            k,
            singular_zero,
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Symbol for ResolventPowerSymbol {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn eval(&self, xi: f64) -> Result<CMat> {
        let n = self.a.nrows();
        let m = CMat::identity(n, n) * c(0.0, xi) + &self.a;
        let r = inverse(&m).ok_or(Error::NearSingular {
            lambda: c(0.0, -xi),
            dist: 0.0,
        })?;
        if !r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NearSingular {
                lambda: c(0.0, -xi),
                dist: 0.0,
            });
        }
        let mut p = r.clone();
        for _ in 0..self.k {
            p = &p * &r;
        }
        Ok(p * c(factorial(self.k), 0.0))
    }

    fn singular_at_zero(&self) -> bool {
        self.singular_zero
    }
}

/// Symbol values at every grid frequency (natural order).
pub fn sample_symbol(symbol: &dyn Symbol, grid: &FourierGridSpec) -> Result<Vec<CMat>> {
    grid.validate()?;
    let d = symbol.dim();
    let vals: Vec<Result<CMat>> = (0..grid.samples)
        .into_par_iter()
        .map(|r| {
            let xi = grid.xi(r);
            match symbol.eval(xi) {
                Ok(m) if m.nrows() == d && m.ncols() == d => Ok(m),
                Ok(m) => Err(Error::Shape {
                    expected: d,
                    got: m.nrows(),
                }),
                Err(_) if xi == 0.0 && symbol.singular_at_zero() => Ok(CMat::zeros(d, d)),
                Err(_) => Err(Error::Singularity { index: r, xi }),
            }
        })
        .collect();
    vals.into_iter().collect()
}

fn apply_sampled(samples: &[CMat], f: &CMat, grid: &FourierGridSpec) -> Result<CMat> {
    let d = samples.first().map(|m| m.nrows()).unwrap_or(0);
    if f.ncols() != d {
        return Err(Error::Shape {
            expected: d,
            got: f.ncols(),
        });
    }
    let spec = forward(f, grid)?;
    let mut out = CMat::zeros(spec.nrows(), d);
    for (r, m) in samples.iter().enumerate() {
        let v = m * spec.row(r).transpose();
        out.row_mut(r).copy_from(&v.transpose());
    }
    inverse_transform(&out, grid)
}

/// `F^{-1}(m F f)` for `f` sampled as an `N x dim` matrix.
pub fn apply_multiplier(symbol: &dyn Symbol, f: &CMat, grid: &FourierGridSpec) -> Result<CMat> {
    let samples = sample_symbol(symbol, grid)?;
    apply_sampled(&samples, f, grid)
}

/// Relative size of the kernel at the window end that counts as a tail.
pub const TAIL_TOL: f64 = 1e-6;

/// `t^k T(t)` at `t = l dt`, `l = 0..count`, by repeated stepping.
fn kernel_samples(model: &DenseModel, k: u32, dt: f64, count: usize) -> Result<Vec<CMat>> {
    let n = model.a.nrows();
    let step = expm(&(&model.a * c(-dt, 0.0)))?;
    let mut cur = CMat::identity(n, n);
    let mut out = Vec::with_capacity(count);
    for l in 0..count {
        let t = l as f64 * dt;
        out.push(&cur * c(t.powi(k as i32), 0.0));
        cur = &step * cur;
    }
    Ok(out)
}

fn check_tail(norms: &[f64], what: &str) -> Result<()> {
    let peak = norms.iter().cloned().fold(0.0, f64::max);
    let last = *norms.last().unwrap_or(&0.0);
    if !(last <= TAIL_TOL * peak) {
        return Err(Error::Window(format!(
            "{what}: tail {last:e} exceeds {TAIL_TOL:e} of peak {peak:e}"
        )));
    }
    Ok(())
}

/// `S_k f(s) = int_0^inf t^k T(t) f(s - t) dt` by the trapezoid rule on the
/// time grid, as a circular convolution on the window.
pub fn convolution_s_k(model: &DenseModel, k: u32, f: &CMat, grid: &FourierGridSpec) -> Result<CMat> {
    grid.validate()?;
    let n = grid.samples;
    let d = model.a.nrows();
    if f.nrows() != n || f.ncols() != d {
        return Err(Error::Shape {
            expected: n * d,
            got: f.nrows() * f.ncols(),
        });
    }
    let dt = grid.dt();
    let kernel = kernel_samples(model, k, dt, n)?;
    let knorms: Vec<f64> = kernel.iter().map(spectral_norm).collect();
    check_tail(&knorms, "kernel t^k T(t)")?;
    // circular convolution through unnormalized DFTs
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fhat: Vec<Vec<C64>> = Vec::with_capacity(d);
    for col in 0..d {
        let mut buf: Vec<C64> = f.column(col).iter().cloned().collect();
        fwd.process(&mut buf);
        fhat.push(buf);
    }
    let mut khat = vec![vec![vec![C64::default(); n]; d]; d];
    for (i, row) in khat.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            for l in 0..n {
                let w = if l == 0 { 0.5 } else { 1.0 };
                entry[l] = kernel[l][(i, j)] * (w * dt);
            }
            fwd.process(entry);
        }
    }
    let mut out = CMat::zeros(n, d);
    for i in 0..d {
        let mut acc = vec![C64::default(); n];
        for j in 0..d {
            for q in 0..n {
                acc[q] += khat[i][j][q] * fhat[j][q];
            }
        }
        inv.process(&mut acc);
        for q in 0..n {
            out[(q, i)] = acc[q] / n as f64;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceCheck {
    pub n: u32,
    pub max_rel_error: f64,
    pub frequencies: usize,
}

/// Taylor coefficients `g^{(j)}(0)`, `j <= J`, from a degree-`K` polynomial
/// through the first `K + 1` samples.
fn boundary_derivatives(g: &CMat, dt: f64) -> Result<Vec<CVec>> {
    const K: usize = 8;
    let v = CMat::from_fn(K + 1, K + 1, |l, j| c((l as f64).powi(j as i32), 0.0));
    let rhs = g.rows(0, K + 1).into_owned();
    let a = v
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("boundary interpolation is singular".into()))?;
    let mut fact = 1.0;
    Ok((0..=ALIAS_TERMS)
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            a.row(j).transpose() * c(fact / dt.powi(j as i32), 0.0)
        })
        .collect())
}

const ALIAS_TERMS: usize = 5;

/// `sum_{p != 0} (xi + p w)^{-m}`.
fn alias_sum(xi: f64, w: f64, m: i32) -> f64 {
    if m == 1 {
        let u = PI * xi / w;
        return if xi == 0.0 { 0.0 } else { PI / w / u.tan() - 1.0 / xi };
    }
    const P: i32 = 64;
    let mut s = 0.0;
    for p in 1..=P {
        s += (xi + p as f64 * w).powi(-m) + (xi - p as f64 * w).powi(-m);
    }
    let tail = |x: f64| x.powi(1 - m) / ((m - 1) as f64 * w);
    let edge = (P as f64 + 0.5) * w;
    s + tail(edge + xi) + if m % 2 == 0 { tail(edge - xi) } else { -tail(edge - xi) }
}

/// Compares the transform of `t -> t^n T(t) x` with `n! (i xi + A)^{-n-1} x`
/// for `|k| <= N/4`. The transform is the trapezoid rule on `[0, L/2]` with
/// the aliased images `F g(xi + 2 pi p / dt)`, `p != 0`, removed through
/// the large-frequency expansion `sum_j g^{(j)}(0) / (i w)^{j+1}`.
pub fn verify_laplace_identity(model: &DenseModel, n: u32, x: &CVec, grid: &FourierGridSpec) -> Result<LaplaceCheck> {
    grid.validate()?;
    let d = model.a.nrows();
    if x.len() != d {
        return Err(Error::Shape {
            expected: d,
            got: x.len(),
        });
    }
    let big_n = grid.samples;
    let half = big_n / 2;
    let dt = grid.dt();
    let step = expm(&(&model.a * c(-dt, 0.0)))?;
    let mut v = x.clone();
    let mut g = CMat::zeros(big_n, d);
    let mut norms = Vec::with_capacity(half + 1);
    for l in 0..=half {
        let t = l as f64 * dt;
        let gl = &v * c(t.powi(n as i32), 0.0);
        norms.push(gl.norm());
        if l < half {
            g.row_mut(l).copy_from(&gl.transpose());
        }
        v = &step * v;
    }
    check_tail(&norms, "orbit t^n T(t) x")?;
    let derivs = boundary_derivatives(&g, dt)?;
    let fft = FftPlanner::new().plan_fft_forward(big_n);
    let mut dft = Vec::with_capacity(d);
    for col in 0..d {
        let mut buf: Vec<C64> = g.column(col).iter().cloned().collect();
        buf[0] *= 0.5;
        fft.process(&mut buf);
        dft.push(buf);
    }
    let sym = ResolventPowerSymbol::new(model, n);
    let w = 2.0 * PI / dt;
    let kmax = (big_n / 4) as i64;
    let errs: Vec<Result<f64>> = (-kmax..=kmax)
        .into_par_iter()
        .map(|k| {
            let xi = k as f64 * grid.dxi();
            let idx = k.rem_euclid(big_n as i64) as usize;
            let mut approx = CVec::from_iterator(d, (0..d).map(|col| dft[col][idx] * dt));
            for (j, dj) in derivs.iter().enumerate() {
                let m = j as i32 + 1;
                let coef = c(0.0, 1.0).powi(-m) * alias_sum(xi, w, m);
                approx -= dj * coef;
            }
            let exact = sym.eval(xi)? * x;
            let en = exact.norm();
            Ok(if en > 0.0 { (approx - &exact).norm() / en } else { approx.norm() })
        })
        .collect();
    let mut worst: f64 = 0.0;
    for e in errs {
        worst = worst.max(e?);
    }
    Ok(LaplaceCheck {
        n,
        max_rel_error: worst,
        frequencies: (2 * kmax + 1) as usize,
    })
}

/// Discrete `L^p` norm with left-endpoint weights; `p = inf` is the maximum.
pub fn lp_norm(f: &CMat, p: f64, dt: f64) -> f64 {
    let mags = (0..f.nrows()).map(|j| f.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    if p.is_infinite() {
        mags.fold(0.0, f64::max)
    } else {
        (dt * mags.map(|m| m.powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PqNormEstimate {
    pub p: f64,
    #[serde(serialize_with = "crate::decaylab::ser_ext")]
    pub q: f64,
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    pub method: String,
}

const SCALES: usize = 8;
const MODULATIONS: usize = 8;

fn unit_vector(v: CVec) -> CVec {
    let n = v.norm();
    if n > 0.0 {
        v / c(n, 0.0)
    } else {
        let mut e = CVec::zeros(v.len());
        e[0] = c(1.0, 0.0);
        e
    }
}

fn bump(grid: &FourierGridSpec, width: f64, xi: f64, dir: &CVec) -> CMat {
    let d = dir.len();
    let mut f = CMat::zeros(grid.samples, d);
    for j in 0..grid.samples {
        let t = grid.time(j);
        let a = (-0.5 * (t / width).powi(2)).exp();
        if a < 1e-300 {
            continue;
        }
        let z = c(0.0, xi * t).exp() * a;
        for i in 0..d {
            f[(j, i)] = dir[i] * z;
        }
    }
    f
}

fn random_band_limited(grid: &FourierGridSpec, d: usize, seed: u64, trial: u64) -> Result<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = grid.samples;
    let kmax_cap = (n / 8).max(1) as f64;
    let band = kmax_cap.powf(rng.gen::<f64>()).round().max(1.0) as i64;
    let centre = rng.gen_range(-(n as i64) / 8..=(n as i64) / 8);
    let mut spec = CMat::zeros(n, d);
    for r in 0..n {
        let k = grid.k(r);
        if (k - centre).abs() <= band {
            for i in 0..d {
                spec[(r, i)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    inverse_transform(&spec, grid)
}

/// Largest `||T_m f||_q / ||f||_p` over a fixed witness family (Gaussian
/// bumps at 8 widths and 8 modulations) plus `trials` seeded random
/// band-limited inputs.
pub fn estimate_pq_norm_lower(
    symbol: &dyn Symbol,
    p: f64,
    q: f64,
    grid: &FourierGridSpec,
    trials: usize,
    seed: u64,
) -> Result<PqNormEstimate> {
    if !(p >= 1.0 && p.is_finite()) {
        return domain(format!("p must lie in [1, inf), got {p}"));
    }
    if !(q >= p) {
        return domain(format!("q must be >= p, got p = {p}, q = {q}"));
    }
    let samples = sample_symbol(symbol, grid)?;
    let d = symbol.dim();
    let norms: Vec<f64> = samples.iter().map(spectral_norm).collect();
    let peak = (0..norms.len()).fold(0, |b, r| if norms[r] > norms[b] { r } else { b });
    let xi_peak = grid.xi(peak);
    let xi_top = grid.xi(grid.samples - 1) / 8.0;
    let mut mods = vec![0.0, xi_peak];
    let lo = grid.dxi() * 4.0;
    for i in 0..MODULATIONS - 2 {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        mods.push(s * lo * (xi_top / lo).powf(i as f64 / (MODULATIONS - 3) as f64));
    }
    let w_lo = 4.0 * grid.dt();
    let w_hi = grid.period / 8.0;
    let widths: Vec<f64> = (0..SCALES)
        .map(|i| w_lo * (w_hi / w_lo).powf(i as f64 / (SCALES - 1) as f64))
        .collect();
    let dirs: Vec<CVec> = mods
        .iter()
        .map(|&xi| {
            let r = ((xi / grid.dxi()).round() as i64 + (grid.samples / 2) as i64)
                .clamp(0, grid.samples as i64 - 1) as usize;
            if d == 1 {
                CVec::from_element(1, c(1.0, 0.0))
            } else {
                unit_vector(top_singular(&samples[r]).1)
            }
        })
        .collect();
    let total = SCALES * MODULATIONS + trials;
    let dt = grid.dt();
    let ratios: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let f = if i < SCALES * MODULATIONS {
                let (s, m) = (i / MODULATIONS, i % MODULATIONS);
                bump(grid, widths[s], mods[m], &dirs[m])
            } else {
                random_band_limited(grid, d, seed, (i - SCALES * MODULATIONS) as u64)?
            };
            let g = apply_sampled(&samples, &f, grid)?;
            let den = lp_norm(&f, p, dt);
            Ok(if den > 0.0 { lp_norm(&g, q, dt) / den } else { 0.0 })
        })
        .collect();
    let mut best: f64 = 0.0;
    for r in ratios {
        best = best.max(r?);
    }
    Ok(PqNormEstimate {
        p,
        q,
        lower_bound: best,
        upper_bound: None,
        method: "witness-search".into(),
    })
}

/// Maximum spectral norm of the symbol over the grid frequencies.
pub fn exact_l2_norm(symbol: &dyn Symbol, grid: &FourierGridSpec) -> Result<f64> {
    Ok(sample_symbol(symbol, grid)?
        .iter()
        .map(spectral_norm)
        .fold(0.0, f64::max))
}

/// Fourier-type constant of a Hilbert space under this transform
/// convention: `(2 pi)^{1/p'}`.
pub fn hilbert_fourier_constant(p: f64) -> f64 {
    (2.0 * PI).powf(1.0 - 1.0 / p)
}

/// `(F_p, F_q')` for a Hilbert space, when `p <= 2 <= q`.
pub fn hilbert_constants(p: f64, q: f64) -> Option<(f64, f64)> {
    if !(1.0..=2.0).contains(&p) || q < 2.0 {
        return None;
    }
    let q_conj_inv = if q.is_infinite() { 1.0 } else { 1.0 - 1.0 / q };
    Some((hilbert_fourier_constant(p), (2.0 * PI).powf(1.0 - q_conj_inv)))
}

/// `(1/2pi) F_p F_q' ||m||_{L^r}` with `1/r = 1/p - 1/q`, the `L^r` norm
/// taken as a Riemann sum with weights `2 pi / L`.
pub fn upper_bound_pq_norm_fourier_type(
    norm_samples: &[f64],
    grid: &FourierGridSpec,
    p: f64,
    q: f64,
    fourier_constants: (f64, f64),
) -> Result<f64> {
    if !(q >= p) {
        return domain(format!("1/r = 1/p - 1/q is negative for p = {p}, q = {q}"));
    }
    let inv_r = 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
    let lr = if inv_r == 0.0 {
        norm_samples.iter().cloned().fold(0.0, f64::max)
    } else {
        let r = 1.0 / inv_r;
        (grid.dxi() * norm_samples.iter().map(|s| s.powf(r)).sum::<f64>()).powf(inv_r)
    };
    Ok(fourier_constants.0 * fourier_constants.1 * lr / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_column(grid: &FourierGridSpec, f: impl Fn(f64) -> C64) -> CMat {
        CMat::from_iterator(grid.samples, 1, grid.times().into_iter().map(f))
    }

    #[test]
    fn round_trip_and_parseval() {
        let grid = FourierGridSpec::new(20.0, 256).unwrap();
        let f = scalar_column(&grid, |t| c((-t * t).exp(), (t * 0.3).sin()));
        let back = inverse_transform(&forward(&f, &grid).unwrap(), &grid).unwrap();
        assert!((back - &f).norm() < 1e-12 * f.norm());
        let spec = forward(&f, &grid).unwrap();
        let lhs = grid.dxi() * spec.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let rhs = 2.0 * PI * grid.dt() * f.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
    }

    #[test]
    fn gaussian_transform_convention() {
        let grid = FourierGridSpec::new(40.0, 1024).unwrap();
        let f = scalar_column(&grid, |t| c((-0.5 * t * t).exp(), 0.0));
        let spec = forward(&f, &grid).unwrap();
        for r in 0..grid.samples {
            let xi = grid.xi(r);
            let want = (2.0 * PI).sqrt() * (-0.5 * xi * xi).exp();
            assert!((spec[(r, 0)] - c(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_and_shift() {
        let grid = FourierGridSpec::new(20.0, 256).unwrap();
        let f = scalar_column(&grid, |t| c((-(t - 1.0).powi(2)).exp(), 0.0));
        let id = apply_multiplier(&ScalarSymbol(|_| c(1.0, 0.0)), &f, &grid).unwrap();
        assert!((id - &f).norm() < 1e-12);
        let h = 8.0 * grid.dt();
        let sh = apply_multiplier(&ScalarSymbol(move |xi: f64| c(0.0, -xi * h).exp()), &f, &grid).unwrap();
        for j in 0..grid.samples {
            let want = f[((j + grid.samples - 8) % grid.samples, 0)];
            assert!((sh[(j, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_symbol_names_node() {
        let grid = FourierGridSpec::new(20.0, 64).unwrap();
        let f = CMat::zeros(64, 1);
        let e = apply_multiplier(&ScalarSymbol(|xi: f64| c(1.0 / xi, 0.0)), &f, &grid).unwrap_err();
        assert_eq!(e, Error::Singularity { index: 32, xi: 0.0 });
    }

    #[test]
    fn scalar_laplace_window() {
        let m = DenseModel::from_real(1, &[1.0]).unwrap();
        let x = CVec::from_element(1, c(1.0, 0.0));
        let short = FourierGridSpec::new(5.0, 1024).unwrap();
        assert!(matches!(verify_laplace_identity(&m, 0, &x, &short), Err(Error::Window(_))));
    }

    #[test]
    fn upper_bound_zero_symbol() {
        let grid = FourierGridSpec::new(10.0, 64).unwrap();
        assert_eq!(upper_bound_pq_norm_fourier_type(&[0.0; 64], &grid, 1.0, f64::INFINITY, (1.0, 1.0)).unwrap(), 0.0);
        assert!(upper_bound_pq_norm_fourier_type(&[0.0; 64], &grid, 2.0, 1.5, (1.0, 1.0)).is_err());
    }

    #[test]
    fn hilbert_constants_values() {
        assert_eq!(hilbert_fourier_constant(1.0), 1.0);
        assert!((hilbert_fourier_constant(2.0) - (2.0 * PI).sqrt()).abs() < 1e-15);
        let (a, b) = hilbert_constants(1.0, f64::INFINITY).unwrap();
        assert_eq!((a, b), (1.0, 1.0));
        assert!(hilbert_constants(2.0, 1.5).is_none());
    }
}
