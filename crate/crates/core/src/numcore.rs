//! Shared numerics: geometric grids, the log-domain exponential sum,
//! least-squares power-law fits and a golden-section maximizer.

use std::fmt::{Debug, Display};
use std::ops::Range;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Scalar type accepted by the generic numerics.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Formats a complex number as `re+imi` (or `re-imi`).
pub fn format_complex<T: Real>(z: Complex<T>) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrid<T> {
    pub start: T,
    pub stop: T,
    pub count: usize,
    pub nodes: Vec<T>,
}

impl<T: Real> LogGrid<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Constant ratio between consecutive nodes.
    pub fn ratio(&self) -> T {
        (self.stop / self.start).powf(T::one() / T::from_usize(self.count - 1).unwrap())
    }

    /// Same range with twice as many intervals.
    pub fn refined(&self) -> LogGrid<T> {
        geometric_grid(self.start, self.stop, 2 * self.count - 1).expect("valid grid")
    }
}

pub fn geometric_grid<T: Real>(start: T, stop: T, count: usize) -> Result<LogGrid<T>> {
    if !(start > T::zero()) || !start.is_finite() || !stop.is_finite() {
        return domain(format!("grid start must be positive and finite, got {start}"));
    }
    if !(start < stop) {
        return domain(format!("grid requires start < stop, got [{start}, {stop}]"));
    }
    if count < 2 {
        return domain(format!("grid count must be at least 2, got {count}"));
    }
    let (l0, l1) = (start.ln(), stop.ln());
    let last = T::from_usize(count - 1).unwrap();
    let mut nodes: Vec<T> = (0..count)
        .map(|i| {
            let s = T::from_usize(i).unwrap() / last;
            (l0 + (l1 - l0) * s).exp()
        })
        .collect();
    nodes[0] = start;
    nodes[count - 1] = stop;
    Ok(LogGrid {
        start,
        stop,
        count,
        nodes,
    })
}

/// Natural log of `(sum_{j=0}^m (m^j/j!)^2)^{1/2}`.
pub fn log_stable_exp_sum<T: Real>(m: i64) -> Result<T> {
    if m < 1 {
        return domain(format!("stable_exp_sum requires m >= 1, got {m}"));
    }
    let lm = T::from_i64(m).unwrap().ln();
    let two = T::lit(2.0);
    let mut log_fact = T::zero();
    // running maximum and scaled accumulator
    let mut top = T::zero();
    let mut acc = T::one();
    for j in 1..=m {
        let jf = T::from_i64(j).unwrap();
        log_fact = log_fact + jf.ln();
        let term = two * (jf * lm - log_fact);
        if term > top {
            acc = acc * (top - term).exp() + T::one();
            top = term;
        } else {
            acc = acc + (term - top).exp();
        }
    }
    Ok((top + acc.ln()) / two)
}

/// `(sum_{j=0}^m (m^j/j!)^2)^{1/2}`; overflows to infinity past the
/// range of `T`, use [`log_stable_exp_sum`] there.
pub fn stable_exp_sum<T: Real>(m: i64) -> Result<T> {
    log_stable_exp_sum::<T>(m).map(|l| l.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit<T> {
    pub exponent: T,
    pub constant: T,
    pub residual: T,
    /// Half-open index range of the nodes used.
    pub window: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFactorFit<T> {
    pub exponent: T,
    pub log_exponent: T,
    pub constant: T,
    pub residual: T,
    pub window: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpFit<T> {
    pub rate: T,
    pub constant: T,
    pub residual: T,
    pub window: Range<usize>,
}

/// Indices kept by the default 10% trim on each side.
pub fn default_window(n: usize) -> Range<usize> {
    let k = n / 10;
    k..n - k
}

fn check_window(n: usize, window: Option<Range<usize>>) -> Result<Range<usize>> {
    let w = window.unwrap_or_else(|| default_window(n));
    if w.end > n || w.start > w.end {
        return domain(format!("window {:?} outside 0..{n}", w));
    }
    if w.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: w.len(),
        });
    }
    Ok(w)
}

fn log_values<T: Real>(values: &[T], w: &Range<usize>) -> Result<Vec<T>> {
    values[w.clone()]
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > T::zero() && v.is_finite() {
                Ok(v.ln())
            } else {
                domain(format!("value at index {} must be positive and finite, got {v}", w.start + i))
            }
        })
        .collect()
}

/// Ordinary least squares `y ~ c0 + c1 x`; returns (c0, c1, rms residual).
fn ols_line<T: Real>(x: &[T], y: &[T]) -> (T, T, T) {
    let n = T::from_usize(x.len()).unwrap();
    let mx = x.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(T::zero(), |a, &b| a + b) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let icpt = my - slope * mx;
    let ss = x
        .iter()
        .zip(y)
        .fold(T::zero(), |a, (&u, &v)| {
            let r = v - icpt - slope * u;
            a + r * r
        });
    (icpt, slope, (ss / n).sqrt())
}

/// Least squares `log v ~ log C + p log t` over `window` (default: the
/// 10%-trimmed interior).
pub fn fit_power_law<T: Real>(
    grid: &LogGrid<T>,
    values: &[T],
    window: Option<Range<usize>>,
) -> Result<PowerFit<T>> {
    fit_power_law_nodes(&grid.nodes, values, window)
}

pub fn fit_power_law_nodes<T: Real>(
    nodes: &[T],
    values: &[T],
    window: Option<Range<usize>>,
) -> Result<PowerFit<T>> {
    if nodes.len() != values.len() {
        return Err(Error::Shape {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    let w = check_window(nodes.len(), window)?;
    let y = log_values(values, &w)?;
    let x = log_values(nodes, &w)?;
    let (c0, c1, res) = ols_line(&x, &y);
    Ok(PowerFit {
        exponent: c1,
        constant: c0.exp(),
        residual: res,
        window: w,
    })
}

/// Least squares `log v ~ log C + p log t + q log log t`. Needs nodes > 1.
pub fn fit_power_law_with_log_factor<T: Real>(
    nodes: &[T],
    values: &[T],
    window: Option<Range<usize>>,
) -> Result<LogFactorFit<T>> {
    if nodes.len() != values.len() {
        return Err(Error::Shape {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    let w = check_window(nodes.len(), window)?;
    if w.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: w.len(),
        });
    }
    let y = log_values(values, &w)?;
    let x1 = log_values(nodes, &w)?;
    if x1.iter().any(|&v| !(v > T::zero())) {
        return domain("log-factor fit needs nodes greater than 1");
    }
    let x2: Vec<T> = x1.iter().map(|v| v.ln()).collect();
    // 3x3 normal equations, centered for conditioning
    let n = T::from_usize(y.len()).unwrap();
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (m1, m2, my) = (mean(&x1), mean(&x2), mean(&y));
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..y.len() {
        let (a, b, c) = (x1[i] - m1, x2[i] - m2, y[i] - my);
        s11 = s11 + a * a;
        s12 = s12 + a * b;
        s22 = s22 + b * b;
        s1y = s1y + a * c;
        s2y = s2y + b * c;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > T::epsilon() * s11 * s22) {
        return Err(Error::Numerical("log-factor regressors are collinear".into()));
    }
    let p = (s1y * s22 - s2y * s12) / det;
    let q = (s11 * s2y - s12 * s1y) / det;
    let c0 = my - p * m1 - q * m2;
    let ss = (0..y.len()).fold(T::zero(), |a, i| {
        let r = y[i] - c0 - p * x1[i] - q * x2[i];
        a + r * r
    });
    Ok(LogFactorFit {
        exponent: p,
        log_exponent: q,
        constant: c0.exp(),
        residual: (ss / n).sqrt(),
        window: w,
    })
}

/// Least squares `log v ~ log C + w t`.
pub fn fit_exponential_rate<T: Real>(
    nodes: &[T],
    values: &[T],
    window: Option<Range<usize>>,
) -> Result<ExpFit<T>> {
    if nodes.len() != values.len() {
        return Err(Error::Shape {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    let w = check_window(nodes.len(), window)?;
    let y = log_values(values, &w)?;
    let (c0, c1, res) = ols_line(&nodes[w.clone()], &y);
    Ok(ExpFit {
        rate: c1,
        constant: c0.exp(),
        residual: res,
        window: w,
    })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` over sampled points, refined by golden section between
/// the neighbours of the best sample.
pub fn refine_max<T: Real, F: FnMut(T) -> T>(mut f: F, samples: &[T], tol: T) -> (T, T) {
    let mut best = 0;
    let mut vals = Vec::with_capacity(samples.len());
    for (i, &x) in samples.iter().enumerate() {
        let v = f(x);
        if i == 0 || v > vals[best] {
            best = i;
        }
        vals.push(v);
    }
    let mut out = (samples[best], vals[best]);
    if samples.len() >= 3 {
        let lo = samples[best.saturating_sub(1)];
        let hi = samples[(best + 1).min(samples.len() - 1)];
        let (x, v) = golden_max(&mut f, lo, hi, tol * (hi - lo).abs().max(T::min_positive_value()));
        if v > out.1 {
            out = (x, v);
        }
    }
    out
}
