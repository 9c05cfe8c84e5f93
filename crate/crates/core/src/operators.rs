//! Concrete operators `A` with semigroup `T(t) = e^{-tA}`, resolvent and
//! norm actions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fraccalc;
use crate::linalg::{self, c, CMat, CVec, EigenDecomposition, C64};
use crate::numcore::{geometric_grid, golden_max};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    /// The supremum was attained at a truncation edge of the model.
    pub edge_dominated: bool,
}

impl NormValue {
    fn new(value: f64, edge_dominated: bool) -> Self {
        NormValue {
            value,
            edge_dominated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMap {
    /// `T(t)`
    Semigroup(f64),
    /// `R(lambda, A)`
    Resolvent(C64),
    /// `T(t) A^sigma (1+A)^{-sigma-tau}`
    Phi { t: f64, sigma: f64, tau: f64 },
    /// `T(t) A^m`
    GeneratorPower { t: f64, m: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelMeta {
    pub kind: &'static str,
    pub dimension: usize,
    pub injective: bool,
    pub invertible: bool,
    /// `None` when the model is not sectorial.
    pub sectorial_angle: Option<f64>,
    pub known_growth: Option<(f64, f64)>,
}

// ---------------------------------------------------------------------------
// Taylor coefficient helpers for functions of `c - B`, `B` nilpotent shift.

/// Coefficients of `(z + h)^p` in powers of `h`.
pub(crate) fn power_taylor(z: C64, p: f64, m: usize) -> Result<Vec<C64>> {
    let mut out = vec![c(0.0, 0.0); m];
    if m == 0 {
        return Ok(out);
    }
    if z.norm() == 0.0 {
        if p >= 0.0 && p.fract() == 0.0 {
            let k = p as usize;
            if k < m {
                out[k] = c(1.0, 0.0);
            }
            return Ok(out);
        }
        return domain(format!("non-integer power {p} at the origin"));
    }
    out[0] = z.powf(p);
    for k in 0..m - 1 {
        out[k + 1] = out[k] * ((p - k as f64) / ((k + 1) as f64)) / z;
    }
    Ok(out)
}

fn convolve(a: &[C64], b: &[C64], m: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); m];
    for (i, &x) in a.iter().enumerate().take(m) {
        if x == c(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(m - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `e^{tB}` scaled by `e^{log_scale}`.
fn exp_coeffs(t: f64, log_scale: f64, m: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); m];
    if m == 0 {
        return out;
    }
    if t == 0.0 {
        out[0] = c(log_scale.exp(), 0.0);
        return out;
    }
    let lt = t.ln();
    let mut lf = 0.0;
    for (k, o) in out.iter_mut().enumerate() {
        if k > 0 {
            lf += (k as f64).ln();
        }
        *o = c((k as f64 * lt - lf + log_scale).exp(), 0.0);
    }
    out
}

/// Coefficients in powers of `B` of `f(c - B)` given the Taylor
/// coefficients of `f` at `c`.
fn reflect(coeffs: Vec<C64>) -> Vec<C64> {
    coeffs
        .into_iter()
        .enumerate()
        .map(|(k, a)| if k % 2 == 1 { -a } else { a })
        .collect()
}

/// Coefficients of `Phi^sigma_tau(c - B) = (c-B)^sigma (1+c-B)^{-sigma-tau}`.
fn phi_block_coeffs(cc: C64, sigma: f64, tau: f64, m: usize) -> Result<Vec<C64>> {
    let left = power_taylor(cc, sigma, m)?;
    let right = power_taylor(cc + 1.0, -sigma - tau, m)?;
    Ok(reflect(convolve(&left, &right, m)))
}

/// Coefficients (in `B`) of the map applied to the block `c - B`.
fn block_map_coeffs(cc: C64, map: NormMap, m: usize) -> Result<Vec<C64>> {
    let semigroup = |t: f64| exp_coeffs(t, -t * cc.re, m);
    match map {
        NormMap::Semigroup(t) => Ok(semigroup(t)),
        NormMap::Resolvent(lambda) => {
            // (lambda - c + B)^{-1} = sum (-B)^k / w^{k+1}
            let w = lambda - cc;
            let mut out = Vec::with_capacity(m);
            let mut p = w.inv();
            for k in 0..m {
                out.push(if k % 2 == 1 { -p } else { p });
                p /= w;
            }
            Ok(out)
        }
        NormMap::Phi { t, sigma, tau } => {
            Ok(convolve(&semigroup(t), &phi_block_coeffs(cc, sigma, tau, m)?, m))
        }
        NormMap::GeneratorPower { t, m: p } => {
            let pw = reflect(power_taylor(cc, p as f64, m)?);
            Ok(convolve(&semigroup(t), &pw, m))
        }
    }
}

pub(crate) fn toeplitz_upper(coeffs: &[C64]) -> CMat {
    let m = coeffs.len();
    CMat::from_fn(m, m, |i, j| if j >= i { coeffs[j - i] } else { c(0.0, 0.0) })
}

fn toeplitz_apply(coeffs: &[C64], x: &[C64]) -> Vec<C64> {
    let m = x.len();
    (0..m)
        .map(|i| {
            let mut s = c(0.0, 0.0);
            for j in i..m {
                s += coeffs[j - i] * x[j];
            }
            s
        })
        .collect()
}

fn toeplitz_norm(coeffs: &[C64]) -> f64 {
    linalg::spectral_norm(&toeplitz_upper(coeffs))
}

fn l1(coeffs: &[C64]) -> f64 {
    coeffs.iter().map(|z| z.norm()).sum()
}

/// Norm of the last column, a lower bound for the Toeplitz norm.
fn last_column(coeffs: &[C64]) -> f64 {
    coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("time must be nonnegative and finite, got {t}"));
    }
    Ok(())
}

fn check_phi(sigma: f64, tau: f64) -> Result<()> {
    if !(sigma >= 0.0 && tau >= 0.0) {
        return domain(format!("fractional indices must be nonnegative, got ({sigma}, {tau})"));
    }
    Ok(())
}

fn check_map(map: NormMap) -> Result<()> {
    match map {
        NormMap::Semigroup(t) | NormMap::GeneratorPower { t, .. } => check_t(t),
        NormMap::Phi { t, sigma, tau } => {
            check_t(t)?;
            check_phi(sigma, tau)
        }
        NormMap::Resolvent(l) if !(l.re.is_finite() && l.im.is_finite()) => {
            domain("non-finite spectral parameter")
        }
        NormMap::Resolvent(_) => Ok(()),
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DenseModel {
    pub a: CMat,
    spectrum: Vec<C64>,
    eigen: Option<EigenDecomposition>,
}

/// Eigen-decompositions above this condition number are not used for
/// closed-form functions.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

impl DenseModel {
    pub fn new(a: CMat) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::Shape {
                expected: a.nrows().max(1),
                got: a.ncols(),
            });
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("dense matrix has non-finite entries");
        }
        let eigen = linalg::eigen_decomposition(&a).ok();
        let spectrum = match &eigen {
            Some(e) => e.values.clone(),
            None => linalg::eigenvalues(&a)?,
        };
        Ok(DenseModel { a, spectrum, eigen })
    }

    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape {
                expected: n * n,
                got: entries.len(),
            });
        }
        Self::new(CMat::from_row_iterator(n, n, entries.iter().map(|&x| c(x, 0.0))))
    }

    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    /// Eigen-decomposition when it is well conditioned.
    pub fn eigen(&self) -> Option<&EigenDecomposition> {
        self.eigen
            .as_ref()
            .filter(|e| e.condition.is_finite() && e.condition < EIGEN_CONDITION_LIMIT)
    }

    fn scale(&self) -> f64 {
        linalg::norm1(&self.a).max(1.0)
    }

    pub fn dist_to_spectrum(&self, lambda: C64) -> f64 {
        self.spectrum
            .iter()
            .map(|&mu| (lambda - mu).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn semigroup_matrix(&self, t: f64) -> Result<CMat> {
        check_t(t)?;
        linalg::expm(&self.a.map(|z| -z * t))
    }

    pub fn resolvent_matrix(&self, lambda: C64) -> Result<CMat> {
        let n = self.a.nrows();
        let m = CMat::identity(n, n).map(|z| z * lambda) - &self.a;
        let dist = self.dist_to_spectrum(lambda);
        let fail = Error::NearSingular { lambda, dist };
        if dist < 1e-12 * self.scale() {
            return Err(fail);
        }
        let inv = linalg::inverse(&m).ok_or(fail.clone())?;
        if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(fail);
        }
        Ok(inv)
    }

    /// `A^sigma (1+A)^{-sigma-tau}` as a matrix.
    pub fn phi_matrix(&self, sigma: f64, tau: f64) -> Result<CMat> {
        check_phi(sigma, tau)?;
        let n = self.a.nrows();
        if sigma == 0.0 && tau == 0.0 {
            return Ok(CMat::identity(n, n));
        }
        if sigma > 0.0 && !self.is_injective() {
            return Err(Error::NotInjective("A^sigma with sigma > 0 needs an injective model".into()));
        }
        if sigma.fract() == 0.0 && tau.fract() == 0.0 && sigma + tau <= 64.0 {
            let shifted = linalg::inverse(&(CMat::identity(n, n) + &self.a))
                .ok_or_else(|| Error::NearSingular {
                    lambda: c(-1.0, 0.0),
                    dist: self.dist_to_spectrum(c(-1.0, 0.0)),
                })?;
            let mut out = CMat::identity(n, n);
            for _ in 0..sigma as u32 {
                out = &out * &self.a;
            }
            for _ in 0..(sigma + tau) as u32 {
                out = &out * &shifted;
            }
            return Ok(out);
        }
        if let Some(e) = self.eigen() {
            return Ok(e.apply_fn(|mu| fraccalc::phi_scalar(mu, sigma, tau, 1.0)));
        }
        let model = OperatorModel::Dense(self.clone());
        fraccalc::contour_fractional_matrix(
            &model,
            &fraccalc::FractionalIndex {
                alpha: sigma,
                beta: tau,
                eta: 1.0,
            },
            &fraccalc::ContourSpec::default(),
        )
    }

    pub fn is_injective(&self) -> bool {
        self.spectrum
            .iter()
            .all(|mu| mu.norm() > 1e-12 * self.scale())
    }

    fn sectorial_angle(&self) -> Option<f64> {
        let mut angle: f64 = 0.0;
        for mu in &self.spectrum {
            if mu.norm() <= 1e-12 * self.scale() {
                continue;
            }
            angle = angle.max(mu.arg().abs());
        }
        (angle < PI - 1e-9).then_some(angle)
    }

    fn norm(&self, map: NormMap) -> Result<NormValue> {
        let m = match map {
            NormMap::Semigroup(t) => self.semigroup_matrix(t)?,
            NormMap::Resolvent(l) => self.resolvent_matrix(l)?,
            NormMap::Phi { t, sigma, tau } => {
                self.semigroup_matrix(t)? * self.phi_matrix(sigma, tau)?
            }
            NormMap::GeneratorPower { t, m } => {
                let mut out = self.semigroup_matrix(t)?;
                for _ in 0..m {
                    out = &out * &self.a;
                }
                out
            }
        };
        Ok(NormValue::new(linalg::spectral_norm(&m), false))
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DiagonalSymbol {
    /// `phi(s) = s^{-a} + i s^b` on a geometric grid over `(1, s_max]`.
    Power { a: f64, b: f64 },
    /// Finitely many explicit eigenvalues.
    Values(Vec<C64>),
}

#[derive(Debug, Clone)]
pub struct DiagonalModel {
    pub symbol: DiagonalSymbol,
    /// Grid in `s` (power symbol) or indices (explicit values).
    pub nodes: Vec<f64>,
    pub sobolev: bool,
    values: Vec<C64>,
}

pub const DEFAULT_S_MAX: f64 = 1e8;
pub const DEFAULT_S_COUNT: usize = 4096;

impl DiagonalModel {
    pub fn power(a: f64, b: f64, s_start: f64, s_max: f64, count: usize, sobolev: bool) -> Result<Self> {
        if !(a > 0.0) {
            return domain(format!("symbol exponent a must be positive, got {a}"));
        }
        if !(b > 0.0 && b < 1.0) {
            return domain(format!("symbol exponent b must lie in (0,1), got {b}"));
        }
        if a + b < 1.0 {
            return domain(format!("symbol exponents need a + b >= 1, got {}", a + b));
        }
        if !(s_start > 1.0) {
            return domain(format!("symbol grid must start above 1, got {s_start}"));
        }
        let grid = geometric_grid(s_start, s_max, count)?;
        let symbol = DiagonalSymbol::Power { a, b };
        let values = grid.nodes.iter().map(|&s| power_phi(a, b, s)).collect();
        Ok(DiagonalModel {
            symbol,
            nodes: grid.nodes,
            sobolev,
            values,
        })
    }

    /// The default Sobolev-multiplication surrogate on `(1, 1e8]`.
    pub fn sobolev_default(a: f64, b: f64) -> Result<Self> {
        Self::power(a, b, 1.0 + 1e-9, DEFAULT_S_MAX, DEFAULT_S_COUNT, true)
    }

    pub fn from_values(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return domain("diagonal model needs at least one value");
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("diagonal model has non-finite values");
        }
        let nodes = (0..values.len()).map(|i| i as f64).collect();
        Ok(DiagonalModel {
            symbol: DiagonalSymbol::Values(values.clone()),
            nodes,
            sobolev: false,
            values,
        })
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn ab(&self) -> Option<(f64, f64)> {
        match self.symbol {
            DiagonalSymbol::Power { a, b } => Some((a, b)),
            DiagonalSymbol::Values(_) => None,
        }
    }

    /// Supremum of `max(|g|, |g'|)` (Sobolev mode) or `|g|` over the
    /// grid, refined by golden section in `log s` and around `hints`.
    fn sup_symbol<F>(&self, f: F, hints: &[(f64, f64)]) -> NormValue
    where
        F: Fn(f64) -> (f64, f64),
    {
        let obj = |s: f64| {
            let (g, dg) = f(s);
            let v = if self.sobolev { g.max(dg) } else { g };
            if v.is_nan() {
                0.0
            } else {
                v
            }
        };
        if self.ab().is_none() {
            let v = self
                .nodes
                .iter()
                .map(|&s| obj(s))
                .fold(0.0, f64::max);
            return NormValue::new(v, false);
        }
        let n = self.nodes.len();
        let (lo, hi) = (self.nodes[0], self.nodes[n - 1]);
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, &s) in self.nodes.iter().enumerate() {
            let v = obj(s);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let mut edge = best_i == 0 || best_i == n - 1;
        let l0 = self.nodes[best_i.saturating_sub(1)].ln();
        let l1 = self.nodes[(best_i + 1).min(n - 1)].ln();
        let (_, v) = golden_max(|u: f64| obj(u.exp()), l0, l1, 1e-12);
        best = best.max(v);
        for &(center, width) in hints {
            if !(center > lo && center < hi) || !(width > 0.0) {
                continue;
            }
            let a = (center - 40.0 * width).max(lo);
            let b = (center + 40.0 * width).min(hi);
            let k = 241;
            let mut bi = 0;
            let mut bv = f64::NEG_INFINITY;
            let pts: Vec<f64> = (0..k).map(|j| a + (b - a) * j as f64 / (k - 1) as f64).collect();
            for (j, &s) in pts.iter().enumerate() {
                let v = obj(s);
                if v > bv {
                    bv = v;
                    bi = j;
                }
            }
            let (_, v) = golden_max(
                &obj,
                pts[bi.saturating_sub(1)],
                pts[(bi + 1).min(k - 1)],
                1e-14 * center,
            );
            let local = bv.max(v);
            if local > best {
                best = local;
                edge = false;
            }
        }
        NormValue::new(best, edge)
    }

    fn phi_at(&self, s: f64) -> (C64, C64) {
        let (a, b) = self.ab().expect("power symbol");
        (power_phi(a, b, s), power_dphi(a, b, s))
    }

    fn norm(&self, map: NormMap) -> Result<NormValue> {
        if self.ab().is_none() {
            return self.norm_values(map);
        }
        match map {
            NormMap::Semigroup(t) => self.norm(NormMap::Phi {
                t,
                sigma: 0.0,
                tau: 0.0,
            }),
            NormMap::Phi { t, sigma, tau } => Ok(self.sup_symbol(
                |s| {
                    let (p, dp) = self.phi_at(s);
                    let e = (-t * p).exp();
                    let h = p.powf(sigma) * (1.0 + p).powf(-sigma - tau);
                    let g = e * h;
                    // g'/g = phi' (-t + sigma/phi - (sigma+tau)/(1+phi))
                    let lg = dp * (-t + sigma / p - (sigma + tau) / (1.0 + p));
                    (g.norm(), (g * lg).norm())
                },
                &[],
            )),
            NormMap::GeneratorPower { t, m } => Ok(self.sup_symbol(
                |s| {
                    let (p, dp) = self.phi_at(s);
                    let g = (-t * p).exp() * p.powi(m as i32);
                    let lg = dp * (-t + m as f64 / p);
                    (g.norm(), (g * lg).norm())
                },
                &[],
            )),
            NormMap::Resolvent(lambda) => {
                let dist = self.dist_to_spectrum(lambda);
                if dist < 1e-12 * (1.0 + lambda.norm()) {
                    return Err(Error::NearSingular { lambda, dist });
                }
                Ok(self.sup_symbol(
                    |s| {
                        let (p, dp) = self.phi_at(s);
                        let g = (lambda - p).inv();
                        (g.norm(), (dp * g * g).norm())
                    },
                    &self.resonance_hint(lambda),
                ))
            }
        }
    }

    /// Location and width of the resonance of `(lambda - phi(s))^{-1}`.
    fn resonance_hint(&self, lambda: C64) -> Vec<(f64, f64)> {
        let Some((a, b)) = self.ab() else {
            return vec![];
        };
        if !(lambda.im > 0.0) {
            return vec![];
        }
        let sr = lambda.im.powf(1.0 / b);
        let gap = (lambda.re - sr.powf(-a)).abs().max(1e-300);
        let width = gap / (b * sr.powf(b - 1.0));
        vec![(sr, width)]
    }

    pub fn dist_to_spectrum(&self, lambda: C64) -> f64 {
        let mut d = self
            .values
            .iter()
            .map(|&p| (lambda - p).norm())
            .fold(f64::INFINITY, f64::min);
        if let Some((a, b)) = self.ab() {
            for (sr, w) in self.resonance_hint(lambda) {
                let lo = (sr - 40.0 * w).max(self.nodes[0]);
                let hi = (sr + 40.0 * w).min(*self.nodes.last().unwrap());
                if lo < hi {
                    let (_, v) = golden_max(|s| -(lambda - power_phi(a, b, s)).norm(), lo, hi, 1e-14 * sr);
                    d = d.min(-v);
                }
            }
        }
        d
    }

    fn norm_values(&self, map: NormMap) -> Result<NormValue> {
        let mut best: f64 = 0.0;
        for &mu in &self.values {
            let v = match map {
                NormMap::Semigroup(t) => (-t * mu).exp(),
                NormMap::Resolvent(lambda) => {
                    let d = lambda - mu;
                    if d.norm() < 1e-12 * (1.0 + lambda.norm()) {
                        return Err(Error::NearSingular {
                            lambda,
                            dist: self.dist_to_spectrum(lambda),
                        });
                    }
                    d.inv()
                }
                NormMap::Phi { t, sigma, tau } => {
                    (-t * mu).exp() * fraccalc::phi_scalar(mu, sigma, tau, 1.0)
                }
                NormMap::GeneratorPower { t, m } => (-t * mu).exp() * mu.powi(m as i32),
            };
            best = best.max(v.norm());
        }
        Ok(NormValue::new(best, false))
    }

    fn sectorial_angle(&self) -> Option<f64> {
        let a = self
            .values
            .iter()
            .filter(|z| z.norm() > 0.0)
            .map(|z| z.arg().abs())
            .fold(0.0, f64::max);
        (a < PI - 1e-9).then_some(a)
    }
}

pub fn power_phi(a: f64, b: f64, s: f64) -> C64 {
    c(s.powf(-a), s.powf(b))
}

pub fn power_dphi(a: f64, b: f64, s: f64) -> C64 {
    c(-a * s.powf(-a - 1.0), b * s.powf(b - 1.0))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct JordanSumModel {
    pub gamma: f64,
    pub delta: f64,
    pub n0: usize,
    pub n_max: usize,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    /// (m, first n, last n) for each block size.
    groups: Vec<(usize, usize, usize)>,
}

pub fn jordan_block_size(n: usize, delta: f64) -> usize {
    ((n as f64).ln() / (1.0 / delta).ln() + 1e-12).floor().max(0.0) as usize
}

pub fn jordan_first_index(delta: f64) -> usize {
    let mut n = 1;
    while jordan_block_size(n, delta) < 2 {
        n += 1;
    }
    n
}

impl JordanSumModel {
    pub fn new(gamma: f64, delta: f64, n_max: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return domain(format!("gamma must lie in (0,1), got {gamma}"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return domain(format!("delta must lie in (0,1), got {delta}"));
        }
        let n0 = jordan_first_index(delta);
        if n_max < n0 {
            return domain(format!("truncation index {n_max} is below the first block index {n0}"));
        }
        let mut dims = Vec::with_capacity(n_max - n0 + 1);
        let mut offsets = Vec::with_capacity(n_max - n0 + 2);
        let mut groups: Vec<(usize, usize, usize)> = Vec::new();
        let mut off = 0;
        for n in n0..=n_max {
            let m = jordan_block_size(n, delta);
            dims.push(m);
            offsets.push(off);
            off += m;
            match groups.last_mut() {
                Some(g) if g.0 == m => g.2 = n,
                _ => groups.push((m, n, n)),
            }
        }
        offsets.push(off);
        Ok(JordanSumModel {
            gamma,
            delta,
            n0,
            n_max,
            dims,
            offsets,
            groups,
        })
    }

    pub fn dimension(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block_size(&self, n: usize) -> usize {
        self.dims[n - self.n0]
    }

    pub fn block_range(&self, n: usize) -> std::ops::Range<usize> {
        let i = n - self.n0;
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn max_block_size(&self) -> usize {
        self.groups.last().unwrap().0
    }

    /// Diagonal entry `gamma - i n` of block `n`.
    pub fn block_center(&self, n: usize) -> C64 {
        c(self.gamma, -(n as f64))
    }

    /// `ln(1/gamma)/ln(1/delta)`.
    pub fn beta0(&self) -> f64 {
        (1.0 / self.gamma).ln() / (1.0 / self.delta).ln()
    }

    /// Smallest smoothness for which `T(t)` is bounded on the fractional domain.
    pub fn critical_tau(&self) -> f64 {
        (1.0 - self.gamma) / (1.0 / self.delta).ln()
    }

    fn apply_blocks<F>(&self, x: &CVec, f: F) -> Result<CVec>
    where
        F: Fn(usize, usize) -> Result<(C64, Vec<C64>)>,
    {
        if x.len() != self.dimension() {
            return Err(Error::Shape {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        let mut y = CVec::zeros(x.len());
        for n in self.n0..=self.n_max {
            let r = self.block_range(n);
            let (phase, coeffs) = f(n, r.len())?;
            let xs: Vec<C64> = x.as_slice()[r.clone()].to_vec();
            let out = toeplitz_apply(&coeffs, &xs);
            for (k, v) in out.into_iter().enumerate() {
                y[r.start + k] = v * phase;
            }
        }
        Ok(y)
    }

    fn norm(&self, map: NormMap) -> Result<NormValue> {
        match map {
            NormMap::Resolvent(lambda) => self.resolvent_norm(lambda),
            NormMap::Semigroup(_) => {
                // block norms increase with the block size
                let (m, n, _) = *self.groups.last().unwrap();
                let coeffs = block_map_coeffs(self.block_center(n), map, m)?;
                Ok(NormValue::new(toeplitz_norm(&coeffs), true))
            }
            _ => self.group_norm(map),
        }
    }

    /// Maximum over block sizes, each evaluated at the first block of its
    /// size; candidates are pruned with the l1 bound on Toeplitz norms.
    fn group_norm(&self, map: NormMap) -> Result<NormValue> {
        let mut cands = Vec::with_capacity(self.groups.len());
        for (gi, &(m, n, _)) in self.groups.iter().enumerate() {
            let coeffs = block_map_coeffs(self.block_center(n), map, m)?;
            cands.push((l1(&coeffs), last_column(&coeffs), gi, coeffs));
        }
        let mut best = cands.iter().map(|c| c.1).fold(0.0, f64::max);
        let mut best_g = usize::MAX;
        cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        for (upper, _, gi, coeffs) in &cands {
            if *upper <= best && best_g != usize::MAX {
                break;
            }
            let v = toeplitz_norm(coeffs);
            if v > best || best_g == usize::MAX {
                best = best.max(v);
                best_g = *gi;
            }
        }
        Ok(NormValue::new(best, best_g == self.groups.len() - 1))
    }

    fn resolvent_norm(&self, lambda: C64) -> Result<NormValue> {
        let dist = self.dist_to_spectrum(lambda);
        if dist < 1e-12 * (1.0 + lambda.norm()) {
            return Err(Error::NearSingular { lambda, dist });
        }
        // visit blocks outward from the nearest center
        let near = (-lambda.im).round().clamp(self.n0 as f64, self.n_max as f64) as usize;
        let mmax = self.max_block_size();
        let bound = |n: usize| {
            let w = (lambda - self.block_center(n)).norm();
            (0..mmax).map(|k| w.powi(-(k as i32) - 1)).sum::<f64>()
        };
        let eval = |n: usize| -> Result<f64> {
            let coeffs = block_map_coeffs(self.block_center(n), NormMap::Resolvent(lambda), self.block_size(n))?;
            Ok(toeplitz_norm(&coeffs))
        };
        let mut best = eval(near)?;
        let mut best_n = near;
        let (mut lo, mut hi) = (near, near);
        loop {
            let mut progressed = false;
            if lo > self.n0 && bound(lo - 1) > best {
                lo -= 1;
                let v = eval(lo)?;
                if v > best {
                    best = v;
                    best_n = lo;
                }
                progressed = true;
            }
            if hi < self.n_max && bound(hi + 1) > best {
                hi += 1;
                let v = eval(hi)?;
                if v > best {
                    best = v;
                    best_n = hi;
                }
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        let edge = self.block_size(best_n) == mmax && best_n == self.n_max;
        Ok(NormValue::new(best, edge))
    }

    pub fn dist_to_spectrum(&self, lambda: C64) -> f64 {
        let n = (-lambda.im).round().clamp(self.n0 as f64, self.n_max as f64) as usize;
        (lambda - self.block_center(n)).norm()
    }

    pub fn to_dense(&self) -> CMat {
        let d = self.dimension();
        let mut a = CMat::zeros(d, d);
        for n in self.n0..=self.n_max {
            let r = self.block_range(n);
            for i in r.clone() {
                a[(i, i)] = self.block_center(n);
                if i + 1 < r.end {
                    a[(i, i + 1)] = c(-1.0, 0.0);
                }
            }
        }
        a
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OperatorMatrixModel {
    pub n: usize,
    /// Fiber positions in `(0,1)`.
    pub nodes: Vec<f64>,
    /// Norms as exact suprema over `s in [0,1]` rather than grid maxima.
    pub analytic: bool,
}

impl OperatorMatrixModel {
    pub fn new(n: usize, nodes: Vec<f64>, analytic: bool) -> Result<Self> {
        if n < 2 {
            return domain(format!("nilpotency size must be at least 2, got {n}"));
        }
        if nodes.is_empty() || nodes.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
            return domain("operator-matrix fiber nodes must lie in (0,1)");
        }
        Ok(OperatorMatrixModel { n, nodes, analytic })
    }

    /// Analytic-supremum model with `k` evenly spaced midpoint fibers.
    pub fn analytic(n: usize, k: usize) -> Result<Self> {
        let nodes = (0..k).map(|j| (j as f64 + 0.5) / k as f64).collect();
        Self::new(n, nodes, true)
    }

    pub fn discretized(n: usize, nodes: Vec<f64>) -> Result<Self> {
        Self::new(n, nodes, false)
    }

    pub fn dimension(&self) -> usize {
        self.n * self.nodes.len()
    }

    fn fiber_norm(&self, s: f64, map: NormMap) -> Result<f64> {
        Ok(toeplitz_norm(&block_map_coeffs(c(s, 0.0), map, self.n)?))
    }

    fn norm(&self, map: NormMap) -> Result<NormValue> {
        if let NormMap::Resolvent(lambda) = map {
            let dist = self.dist_to_spectrum(lambda);
            if dist < 1e-12 * (1.0 + lambda.norm()) {
                return Err(Error::NearSingular { lambda, dist });
            }
        }
        if !self.analytic {
            let mut best: f64 = 0.0;
            for &s in &self.nodes {
                best = best.max(self.fiber_norm(s, map)?);
            }
            return Ok(NormValue::new(best, false));
        }
        let needs_positive = matches!(map, NormMap::Phi { sigma, .. } if sigma.fract() != 0.0);
        let mut pts: Vec<f64> = geometric_grid(1e-12, 1.0, 481)?.nodes;
        if !needs_positive {
            pts.insert(0, 0.0);
        }
        if let NormMap::Resolvent(lambda) = map {
            if lambda.re > 0.0 && lambda.re < 1.0 {
                pts.push(lambda.re);
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            }
        }
        let mut vals = Vec::with_capacity(pts.len());
        for &s in &pts {
            vals.push(self.fiber_norm(s, map)?);
        }
        let (mut bi, mut best) = (0, f64::NEG_INFINITY);
        for (i, &v) in vals.iter().enumerate() {
            if v > best {
                best = v;
                bi = i;
            }
        }
        let lo = pts[bi.saturating_sub(1)];
        let hi = pts[(bi + 1).min(pts.len() - 1)];
        if hi > lo {
            let (_, v) = golden_max(
                |s: f64| self.fiber_norm(s, map).unwrap_or(0.0),
                lo,
                hi,
                1e-13 * hi,
            );
            best = best.max(v);
        }
        Ok(NormValue::new(best, false))
    }

    pub fn dist_to_spectrum(&self, lambda: C64) -> f64 {
        if self.analytic {
            let x = lambda.re.clamp(0.0, 1.0);
            (lambda - c(x, 0.0)).norm()
        } else {
            self.nodes
                .iter()
                .map(|&s| (lambda - c(s, 0.0)).norm())
                .fold(f64::INFINITY, f64::min)
        }
    }

    fn apply_fibers<F>(&self, x: &CVec, f: F) -> Result<CVec>
    where
        F: Fn(f64) -> Result<Vec<C64>>,
    {
        if x.len() != self.dimension() {
            return Err(Error::Shape {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        let n = self.n;
        let mut y = CVec::zeros(x.len());
        for (j, &s) in self.nodes.iter().enumerate() {
            let coeffs = f(s)?;
            let out = toeplitz_apply(&coeffs, &x.as_slice()[j * n..(j + 1) * n]);
            for (i, v) in out.into_iter().enumerate() {
                y[j * n + i] = v;
            }
        }
        Ok(y)
    }

    /// Block matrix `diag(s_j) (x) I - I (x) N` of the discretized model.
    pub fn to_dense(&self) -> CMat {
        let n = self.n;
        let d = self.dimension();
        let mut a = CMat::zeros(d, d);
        for (j, &s) in self.nodes.iter().enumerate() {
            for i in 0..n {
                a[(j * n + i, j * n + i)] = c(s, 0.0);
                if i + 1 < n {
                    a[(j * n + i, j * n + i + 1)] = c(-1.0, 0.0);
                }
            }
        }
        a
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum OperatorModel {
    Dense(DenseModel),
    Diagonal(DiagonalModel),
    JordanSum(JordanSumModel),
    OperatorMatrix(OperatorMatrixModel),
}

impl OperatorModel {
    pub fn dimension(&self) -> usize {
        match self {
            OperatorModel::Dense(d) => d.a.nrows(),
            OperatorModel::Diagonal(d) => d.values.len(),
            OperatorModel::JordanSum(j) => j.dimension(),
            OperatorModel::OperatorMatrix(o) => o.dimension(),
        }
    }

    pub fn meta(&self) -> ModelMeta {
        let dimension = self.dimension();
        match self {
            OperatorModel::Dense(d) => {
                let inj = d.is_injective();
                ModelMeta {
                    kind: "dense-matrix",
                    dimension,
                    injective: inj,
                    invertible: inj,
                    sectorial_angle: d.sectorial_angle(),
                    known_growth: None,
                }
            }
            OperatorModel::Diagonal(d) => {
                let inj = d.values.iter().all(|z| z.norm() > 0.0);
                let known = match d.symbol {
                    DiagonalSymbol::Power { a, b } if d.sobolev => Some((0.0, (b - 1.0 + 2.0 * a) / b)),
                    _ => None,
                };
                ModelMeta {
                    kind: "diagonal-symbol",
                    dimension,
                    injective: inj,
                    invertible: inj,
                    sectorial_angle: d.sectorial_angle(),
                    known_growth: known,
                }
            }
            OperatorModel::JordanSum(j) => ModelMeta {
                kind: "jordan-sum",
                dimension,
                injective: true,
                invertible: true,
                sectorial_angle: Some(PI / 2.0),
                known_growth: Some((0.0, j.beta0())),
            },
            OperatorModel::OperatorMatrix(o) => ModelMeta {
                kind: "operator-matrix",
                dimension,
                injective: true,
                invertible: false,
                sectorial_angle: None,
                known_growth: Some((o.n as f64, 0.0)),
            },
        }
    }

    fn check_len(&self, x: &CVec) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::Shape {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `T(t) x`.
    pub fn semigroup_apply(&self, t: f64, x: &CVec) -> Result<CVec> {
        check_t(t)?;
        self.check_len(x)?;
        match self {
            OperatorModel::Dense(d) => Ok(d.semigroup_matrix(t)? * x),
            OperatorModel::Diagonal(d) => Ok(CVec::from_iterator(
                x.len(),
                d.values.iter().zip(x.iter()).map(|(&p, &v)| (-t * p).exp() * v),
            )),
            OperatorModel::JordanSum(j) => j.apply_blocks(x, |n, m| {
                let phase = c(0.0, (n as f64) * t).exp();
                Ok((phase, exp_coeffs(t, -j.gamma * t, m)))
            }),
            OperatorModel::OperatorMatrix(o) => {
                o.apply_fibers(x, |s| Ok(exp_coeffs(t, -t * s, o.n)))
            }
        }
    }

    /// `R(lambda, A) x = (lambda - A)^{-1} x`.
    pub fn resolvent_apply(&self, lambda: C64, x: &CVec) -> Result<CVec> {
        self.check_len(x)?;
        let dist = self.dist_to_spectrum(lambda);
        if dist < 1e-12 * (1.0 + lambda.norm()) {
            return Err(Error::NearSingular { lambda, dist });
        }
        match self {
            OperatorModel::Dense(d) => Ok(d.resolvent_matrix(lambda)? * x),
            OperatorModel::Diagonal(d) => Ok(CVec::from_iterator(
                x.len(),
                d.values.iter().zip(x.iter()).map(|(&p, &v)| v / (lambda - p)),
            )),
            OperatorModel::JordanSum(j) => j.apply_blocks(x, |n, m| {
                Ok((c(1.0, 0.0), block_map_coeffs(j.block_center(n), NormMap::Resolvent(lambda), m)?))
            }),
            OperatorModel::OperatorMatrix(o) => o.apply_fibers(x, |s| {
                block_map_coeffs(c(s, 0.0), NormMap::Resolvent(lambda), o.n)
            }),
        }
    }

    /// `A x`.
    pub fn generator_apply(&self, x: &CVec) -> Result<CVec> {
        self.check_len(x)?;
        match self {
            OperatorModel::Dense(d) => Ok(&d.a * x),
            OperatorModel::Diagonal(d) => Ok(CVec::from_iterator(
                x.len(),
                d.values.iter().zip(x.iter()).map(|(&p, &v)| p * v),
            )),
            OperatorModel::JordanSum(j) => j.apply_blocks(x, |n, m| {
                let mut co = vec![c(0.0, 0.0); m];
                co[0] = j.block_center(n);
                if m > 1 {
                    co[1] = c(-1.0, 0.0);
                }
                Ok((c(1.0, 0.0), co))
            }),
            OperatorModel::OperatorMatrix(o) => o.apply_fibers(x, |s| {
                let mut co = vec![c(0.0, 0.0); o.n];
                co[0] = c(s, 0.0);
                co[1] = c(-1.0, 0.0);
                Ok(co)
            }),
        }
    }

    /// `Phi^sigma_tau(A) x` from closed forms; `None` when the model has none.
    pub fn phi_closed_form(&self, sigma: f64, tau: f64, x: &CVec) -> Option<Result<CVec>> {
        if let Err(e) = check_phi(sigma, tau).and_then(|_| self.check_len(x)) {
            return Some(Err(e));
        }
        if sigma > 0.0 && !self.meta().injective {
            return Some(Err(Error::NotInjective(
                "A^sigma with sigma > 0 needs an injective model".into(),
            )));
        }
        match self {
            OperatorModel::Dense(d) => {
                let e = d.eigen()?;
                Some(Ok(e.apply_fn(|mu| fraccalc::phi_scalar(mu, sigma, tau, 1.0)) * x))
            }
            OperatorModel::Diagonal(d) => Some(Ok(CVec::from_iterator(
                x.len(),
                d.values
                    .iter()
                    .zip(x.iter())
                    .map(|(&p, &v)| fraccalc::phi_scalar(p, sigma, tau, 1.0) * v),
            ))),
            OperatorModel::JordanSum(j) => Some(j.apply_blocks(x, |n, m| {
                Ok((c(1.0, 0.0), phi_block_coeffs(j.block_center(n), sigma, tau, m)?))
            })),
            OperatorModel::OperatorMatrix(o) => Some(o.apply_fibers(x, |s| {
                phi_block_coeffs(c(s, 0.0), sigma, tau, o.n)
            })),
        }
    }

    pub fn dist_to_spectrum(&self, lambda: C64) -> f64 {
        match self {
            OperatorModel::Dense(d) => d.dist_to_spectrum(lambda),
            OperatorModel::Diagonal(d) => d.dist_to_spectrum(lambda),
            OperatorModel::JordanSum(j) => j.dist_to_spectrum(lambda),
            OperatorModel::OperatorMatrix(o) => o.dist_to_spectrum(lambda),
        }
    }

    pub fn operator_norm(&self, map: NormMap) -> Result<NormValue> {
        check_map(map)?;
        if let NormMap::Phi { sigma, .. } = map {
            if sigma > 0.0 && !self.meta().injective {
                return Err(Error::NotInjective(
                    "A^sigma with sigma > 0 needs an injective model".into(),
                ));
            }
        }
        match self {
            OperatorModel::Dense(d) => d.norm(map),
            OperatorModel::Diagonal(d) => d.norm(map),
            OperatorModel::JordanSum(j) => j.norm(map),
            OperatorModel::OperatorMatrix(o) => o.norm(map),
        }
    }

    /// `||T(t) Phi^sigma_tau(A)||`.
    pub fn fractional_norm(&self, t: f64, sigma: f64, tau: f64) -> Result<NormValue> {
        self.operator_norm(NormMap::Phi { t, sigma, tau })
    }

    /// Dense matrix of a finite model, if it has one.
    pub fn to_dense(&self) -> Option<CMat> {
        match self {
            OperatorModel::Dense(d) => Some(d.a.clone()),
            OperatorModel::Diagonal(d) => Some(CMat::from_diagonal(&CVec::from_vec(d.values.clone()))),
            OperatorModel::JordanSum(j) => Some(j.to_dense()),
            OperatorModel::OperatorMatrix(o) => Some(o.to_dense()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> OperatorModel {
        OperatorModel::Dense(DenseModel::from_real(1, &[v]).unwrap())
    }

    #[test]
    fn dense_scalar_semigroup() {
        let m = scalar(1.0);
        let y = m.semigroup_apply(1.0, &CVec::from_element(1, c(1.0, 0.0))).unwrap();
        assert!((y[0].re - (-1f64).exp()).abs() < 1e-15);
        let n = m.operator_norm(NormMap::Semigroup(2.0)).unwrap();
        assert!((n.value - (-2f64).exp()).abs() < 1e-15);
        assert!(m.semigroup_apply(-1.0, &CVec::from_element(1, c(1.0, 0.0))).is_err());
        assert!(matches!(
            m.semigroup_apply(1.0, &CVec::zeros(2)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn diagonal_single_node_resolvent() {
        let m = OperatorModel::Diagonal(DiagonalModel::from_values(vec![c(2.0, 0.0)]).unwrap());
        let x = CVec::from_element(1, c(0.3, -0.2));
        let y = m.resolvent_apply(c(3.0, 0.0), &x).unwrap();
        assert!((y - &x).norm() < 1e-15);
        assert!(matches!(
            m.resolvent_apply(c(2.0, 0.0), &x),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn jordan_last_basis_vector_orbit() {
        let j = JordanSumModel::new(0.5, 0.5, 40).unwrap();
        let model = OperatorModel::JordanSum(j.clone());
        let n = 20;
        let m = j.block_size(n);
        let mut x = CVec::zeros(model.dimension());
        x[j.block_range(n).end - 1] = c(1.0, 0.0);
        let t = 3.0;
        let y = model.semigroup_apply(t, &x).unwrap();
        let mut s = 0.0;
        let mut f = 1.0;
        for k in 0..m {
            if k > 0 {
                f *= k as f64;
            }
            s += (t.powi(k as i32) / f).powi(2);
        }
        let want = (-0.5 * t).exp() * s.sqrt();
        assert!((y.norm() - want).abs() < 1e-13 * want);
    }

    #[test]
    fn jordan_blocks_match_dense_exponential() {
        let j = JordanSumModel::new(0.4, 0.6, 12).unwrap();
        let model = OperatorModel::JordanSum(j.clone());
        let dense = OperatorModel::Dense(DenseModel::new(j.to_dense()).unwrap());
        let x = CVec::from_fn(model.dimension(), |i, _| c((i as f64).sin(), (i as f64 * 0.3).cos()));
        for t in [0.0, 0.7, 3.0] {
            let a = model.semigroup_apply(t, &x).unwrap();
            let b = dense.semigroup_apply(t, &x).unwrap();
            assert!((&a - &b).norm() <= 1e-10 * b.norm(), "t = {t}");
        }
    }

    #[test]
    fn block_sizes() {
        assert_eq!(jordan_first_index(0.5), 4);
        assert_eq!(jordan_first_index(0.9), 2);
        assert_eq!(jordan_block_size(10_000, 0.5), 13);
        assert_eq!(jordan_block_size(10_000, 0.9), 87);
        assert_eq!(jordan_block_size(8, 0.5), 3);
    }

    #[test]
    fn operator_matrix_resolvent_matches_dense_solve() {
        let o = OperatorMatrixModel::discretized(2, vec![0.1, 0.35, 0.8]).unwrap();
        let model = OperatorModel::OperatorMatrix(o.clone());
        let dense = o.to_dense();
        let x = CVec::from_fn(6, |i, _| c(1.0 + i as f64, -(i as f64)));
        for lambda in [c(-0.5, 0.2), c(1.5, 0.0), c(0.5, 2.0)] {
            let y = model.resolvent_apply(lambda, &x).unwrap();
            let m = CMat::identity(6, 6).map(|z| z * lambda) - &dense;
            let z = linalg::solve(&m, &x).unwrap();
            assert!((&y - &z).norm() < 1e-12 * z.norm());
        }
    }

    #[test]
    fn taylor_of_power() {
        let co = power_taylor(c(2.0, 0.0), 3.0, 5).unwrap();
        let want = [8.0, 12.0, 6.0, 1.0, 0.0];
        for (a, b) in co.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
        let co = power_taylor(c(0.0, 0.0), 2.0, 4).unwrap();
        assert_eq!(co[2], c(1.0, 0.0));
        assert!(power_taylor(c(0.0, 0.0), 0.5, 3).is_err());
    }
}
