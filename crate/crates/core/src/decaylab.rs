//! Decay measurements on fractional domains and guaranteed decay rates
//! from resolvent growth and space geometry.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::numcore::{default_window, fit_power_law, LogGrid, PowerFit};
use crate::operators::{NormMap, OperatorModel};

/// Serializes `f64::INFINITY` as the string `"inf"`.
pub fn ser_ext<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() && *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

pub fn ser_opt_ext<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_infinite() && *v > 0.0 => s.serialize_str("inf"),
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_none(),
    }
}

pub fn de_ext<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Str(String),
    }
    match Ext::deserialize(d)? {
        Ext::Num(v) => Ok(v),
        Ext::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
        Ext::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub p_convex: f64,
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    pub q_concave: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryDescriptor {
    pub fourier_type: f64,
    #[serde(rename = "type")]
    pub type_p: f64,
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    pub cotype: f64,
    pub hilbert: bool,
    #[serde(default)]
    pub lattice: Option<LatticeGeometry>,
    #[serde(default)]
    pub positive_semigroup: bool,
    #[serde(default)]
    pub r_resolvent_growth_asserted: bool,
}

impl GeometryDescriptor {
    pub fn hilbert() -> Self {
        GeometryDescriptor {
            fourier_type: 2.0,
            type_p: 2.0,
            cotype: 2.0,
            hilbert: true,
            lattice: Some(LatticeGeometry {
                p_convex: 2.0,
                q_concave: 2.0,
            }),
            positive_semigroup: false,
            r_resolvent_growth_asserted: true,
        }
    }

    /// `L^u` on a measure space, `1 <= u < inf`.
    pub fn lebesgue(u: f64) -> Result<Self> {
        if !(u >= 1.0 && u.is_finite()) {
            return domain(format!("Lebesgue exponent must lie in [1, inf), got {u}"));
        }
        let conj = if u == 1.0 { f64::INFINITY } else { u / (u - 1.0) };
        Ok(GeometryDescriptor {
            fourier_type: u.min(conj),
            type_p: u.min(2.0),
            cotype: u.max(2.0),
            hilbert: u == 2.0,
            lattice: Some(LatticeGeometry {
                p_convex: u.min(2.0),
                q_concave: u.max(2.0),
            }),
            positive_semigroup: false,
            r_resolvent_growth_asserted: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let in12 = |x: f64| (1.0..=2.0).contains(&x);
        if !in12(self.fourier_type) {
            return domain(format!("fourier_type must lie in [1,2], got {}", self.fourier_type));
        }
        if !in12(self.type_p) {
            return domain(format!("type must lie in [1,2], got {}", self.type_p));
        }
        if !(self.cotype >= 2.0) {
            return domain(format!("cotype must lie in [2,inf], got {}", self.cotype));
        }
        if let Some(l) = self.lattice {
            if !in12(l.p_convex) {
                return domain(format!("lattice.p_convex must lie in [1,2], got {}", l.p_convex));
            }
            if !(l.q_concave >= 2.0 && l.q_concave.is_finite()) {
                return domain(format!("lattice.q_concave must lie in [2,inf), got {}", l.q_concave));
            }
        }
        if self.hilbert && (self.fourier_type != 2.0 || self.type_p != 2.0 || self.cotype != 2.0) {
            return domain("a Hilbert space has fourier_type = type = cotype = 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    /// Hypothesis taken on trust from the caller.
    pub asserted: bool,
}

fn cond(name: &str, passed: bool) -> Condition {
    Condition {
        name: name.into(),
        passed,
        asserted: false,
    }
}

fn asserted(name: &str, passed: bool) -> Condition {
    Condition {
        name: name.into(),
        passed,
        asserted: true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePrediction {
    /// `None` when a hypothesis fails; `Some(inf)` in the exponential regime.
    #[serde(serialize_with = "ser_opt_ext")]
    pub rho: Option<f64>,
    pub strict: bool,
    /// Smoothing index `r`; `inf` means `1/r = 0`.
    #[serde(serialize_with = "ser_ext")]
    pub r: f64,
    pub source: String,
    pub conditions: Vec<Condition>,
    #[serde(default)]
    pub log_factor: bool,
}

impl RatePrediction {
    pub fn applicable(&self) -> bool {
        self.rho.is_some()
    }
}

/// `num / den` with `x/0 = inf` for `x >= 0`, including `0/0`.
pub fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn inv_to_r(inv_r: f64) -> f64 {
    if inv_r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv_r
    }
}

fn indices_ok(alpha: f64, beta: f64, sigma: f64, tau: f64) -> Condition {
    cond(
        "indices are nonnegative",
        [alpha, beta, sigma, tau].iter().all(|x| *x >= 0.0),
    )
}

fn finish(
    conditions: Vec<Condition>,
    rho: impl FnOnce() -> (f64, bool),
    inv_r: f64,
    source: &str,
) -> RatePrediction {
    let ok = conditions.iter().all(|c| c.passed);
    let (rho, strict) = if ok { let (r, s) = rho(); (Some(r), s) } else { (None, true) };
    RatePrediction {
        rho,
        strict,
        r: inv_to_r(inv_r),
        source: source.into(),
        conditions,
        log_factor: false,
    }
}

/// Shared shape: `min((sigma+1)/alpha - 1, (tau - 1/r)/beta - 1)` under
/// `sigma > alpha - 1` and `tau > beta + 1/r` (or `>=` when `closed`).
fn smoothing_rate(alpha: f64, beta: f64, sigma: f64, tau: f64, inv_r: f64, closed: bool, source: &str) -> RatePrediction {
    let mut conditions = vec![indices_ok(alpha, beta, sigma, tau), cond("sigma > alpha - 1", sigma > alpha - 1.0)];
    if closed {
        conditions.push(cond("tau >= beta + 1/r", tau >= beta + inv_r));
    } else {
        conditions.push(cond("tau > beta + 1/r", tau > beta + inv_r));
    }
    finish(
        conditions,
        || {
            let a_branch = ratio(sigma + 1.0, alpha) - 1.0;
            let b_branch = ratio(tau - inv_r, beta) - 1.0;
            if closed {
                // the beta branch is attained, the alpha branch is open
                (a_branch.min(b_branch), a_branch <= b_branch)
            } else {
                (a_branch.min(b_branch), true)
            }
        },
        inv_r,
        source,
    )
}

/// Rate on an arbitrary Banach space.
pub fn predict_rate_general(alpha: f64, beta: f64, sigma: f64, tau: f64) -> RatePrediction {
    smoothing_rate(alpha, beta, sigma, tau, 1.0, false, "general")
}

/// Rate on a space of Fourier type `p`; `p = 2` takes the Hilbert branch.
pub fn predict_rate_fourier_type(alpha: f64, beta: f64, sigma: f64, tau: f64, geometry: &GeometryDescriptor) -> RatePrediction {
    let p = geometry.fourier_type;
    if !(1.0..=2.0).contains(&p) {
        return finish(vec![cond("fourier type in [1,2]", false)], || (0.0, true), 1.0, "fourier-type");
    }
    if p == 2.0 {
        smoothing_rate(alpha, beta, sigma, tau, 0.0, true, "fourier-type-hilbert")
    } else {
        smoothing_rate(alpha, beta, sigma, tau, 2.0 / p - 1.0, false, "fourier-type")
    }
}

/// Rate under R-resolvent growth from type and cotype, or from lattice
/// convexity when available; the larger guaranteed rate is returned.
pub fn predict_rate_type_cotype(alpha: f64, beta: f64, sigma: f64, tau: f64, geometry: &GeometryDescriptor) -> RatePrediction {
    let gate = asserted("R-resolvent growth asserted", geometry.r_resolvent_growth_asserted);
    if !gate.passed {
        let mut p = finish(vec![gate], || (0.0, true), 1.0, "type-cotype");
        p.conditions[0].name = "R-boundedness not asserted".into();
        return p;
    }
    let (pt, qc) = (geometry.type_p, geometry.cotype);
    let with_gate = |mut p: RatePrediction| {
        p.conditions.insert(0, gate.clone());
        p
    };
    if pt == 2.0 && qc == 2.0 {
        let mut h = GeometryDescriptor::hilbert();
        h.r_resolvent_growth_asserted = true;
        let mut p = predict_rate_fourier_type(alpha, beta, sigma, tau, &h);
        p.source = "type-cotype-hilbert".into();
        return with_gate(p);
    }
    let inv_r = 1.0 / pt - if qc.is_infinite() { 0.0 } else { 1.0 / qc };
    let tc = with_gate(smoothing_rate(alpha, beta, sigma, tau, inv_r, false, "type-cotype"));
    match predict_rate_lattice(alpha, beta, sigma, tau, geometry) {
        Some(l) if rank(l.rho) > rank(tc.rho) => l,
        _ => tc,
    }
}

/// Lattice branch: `1/r = 1/p - 1/q` for a p-convex, q-concave lattice,
/// with the endpoint `tau = beta + 1/r` admitted.
pub fn predict_rate_lattice(alpha: f64, beta: f64, sigma: f64, tau: f64, geometry: &GeometryDescriptor) -> Option<RatePrediction> {
    let l = geometry.lattice?;
    let gate = asserted("R-resolvent growth asserted", geometry.r_resolvent_growth_asserted);
    let inv_r = 1.0 / l.p_convex - 1.0 / l.q_concave;
    let mut p = smoothing_rate(alpha, beta, sigma, tau, inv_r, true, "lattice");
    if !gate.passed {
        p.rho = None;
    }
    p.conditions.insert(0, gate);
    Some(p)
}

/// Rate for asymptotically analytic semigroups; independent of `tau`.
pub fn predict_rate_asymptotically_analytic(alpha: f64, sigma: f64, zeta_negative_asserted: bool) -> RatePrediction {
    let conditions = vec![
        asserted("non-analytic growth bound < 0 asserted", zeta_negative_asserted),
        cond("indices are nonnegative", alpha >= 0.0 && sigma >= 0.0),
        cond("sigma > alpha - 1", sigma > alpha - 1.0),
    ];
    finish(conditions, || (ratio(sigma + 1.0, alpha) - 1.0, true), 0.0, "asymptotically-analytic")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stronger {
    Corollary,
    Scaling,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthAwarePrediction {
    pub corollary: RatePrediction,
    pub scaling: Option<RatePrediction>,
    pub stronger: Stronger,
    /// For `alpha = 0`: whether the Hilbert-branch rate beats the scaling rate.
    pub hilbert_stronger: Option<bool>,
}

/// Rates for a semigroup with `||T(t)|| ~ t^mu`.
pub fn predict_rate_growth_aware(alpha: f64, beta: f64, sigma: f64, tau: f64, mu: f64) -> GrowthAwarePrediction {
    let base = vec![indices_ok(alpha, beta, sigma, tau), cond("mu >= 0", mu >= 0.0)];
    let corollary = finish(
        base.clone(),
        || (ratio(sigma, alpha).min(ratio(tau, beta)) - mu, true),
        0.0,
        "growth-aware",
    );
    let scaling = (alpha == 0.0).then(|| {
        let mut p = finish(base, || (ratio(tau, beta) - mu, true), 0.0, "scaling");
        p.log_factor = true;
        p
    });
    let stronger = match &scaling {
        None => Stronger::Corollary,
        Some(s) => match rank(corollary.rho).partial_cmp(&rank(s.rho)) {
            Some(std::cmp::Ordering::Greater) => Stronger::Corollary,
            Some(std::cmp::Ordering::Less) => Stronger::Scaling,
            _ => Stronger::Tie,
        },
    };
    let hilbert_stronger = scaling.as_ref().map(|s| {
        let h = predict_rate_fourier_type(alpha, beta, sigma, tau, &GeometryDescriptor::hilbert());
        rank(h.rho) > rank(s.rho)
    });
    GrowthAwarePrediction {
        corollary,
        scaling,
        stronger,
        hilbert_stronger,
    }
}

/// Total order no-rate < finite < infinite, as a comparable real.
pub fn rank(rho: Option<f64>) -> f64 {
    rho.unwrap_or(f64::NEG_INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub sigma: f64,
    pub tau: f64,
    pub rho: f64,
}

/// Convex interpolation for `theta` in `[0,1]`, scaling for `theta >= 1`.
pub fn interpolate_rates(rate1: RatePoint, rate2: RatePoint, theta: f64) -> Result<RatePoint> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return domain(format!("theta must be a finite number >= 0, got {theta}"));
    }
    if theta > 1.0 {
        return Ok(RatePoint {
            sigma: theta * rate1.sigma,
            tau: theta * rate1.tau,
            rho: theta * rate1.rho,
        });
    }
    if rate1.sigma < rate2.sigma || rate1.tau < rate2.tau {
        return domain(format!(
            "interpolation needs sigma1 >= sigma2 and tau1 >= tau2, got ({}, {}) and ({}, {})",
            rate1.sigma, rate1.tau, rate2.sigma, rate2.tau
        ));
    }
    let mix = |a: f64, b: f64| {
        if theta == 0.0 {
            b
        } else if theta == 1.0 {
            a
        } else {
            theta * a + (1.0 - theta) * b
        }
    };
    Ok(RatePoint {
        sigma: mix(rate1.sigma, rate2.sigma),
        tau: mix(rate1.tau, rate2.tau),
        rho: mix(rate1.rho, rate2.rho),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessIndex {
    pub index: f64,
    pub source: String,
}

/// Smallest fractional-domain index for which the spectral bound controls
/// the growth bound of smooth orbits.
pub fn exponential_smoothness_index(geometry: &GeometryDescriptor) -> SmoothnessIndex {
    if geometry.hilbert {
        return SmoothnessIndex {
            index: 0.0,
            source: "hilbert".into(),
        };
    }
    let inv = |q: f64| if q.is_infinite() { 0.0 } else { 1.0 / q };
    let mut best = (2.0 / geometry.fourier_type - 1.0, "fourier-type");
    let mut consider = |v: f64, s: &'static str| {
        if v < best.0 {
            best = (v, s);
        }
    };
    if geometry.r_resolvent_growth_asserted {
        consider(1.0 / geometry.type_p - inv(geometry.cotype), "type-cotype-r-bounded");
    }
    consider(2.0 / geometry.type_p - 2.0 * inv(geometry.cotype), "type-cotype");
    if let (true, Some(l)) = (geometry.positive_semigroup, geometry.lattice) {
        consider(1.0 / l.p_convex - 1.0 / l.q_concave, "positive-lattice");
    }
    SmoothnessIndex {
        index: best.0.max(0.0),
        source: best.1.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Polynomial,
    SuperPolynomial,
    BoundedNotDecaying,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayMap {
    /// `T(t) Phi^sigma_tau(A)`.
    Fractional { sigma: f64, tau: f64 },
    /// `T(t) A^m`.
    GeneratorPower { m: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayMeasurement {
    pub map: DecayMap,
    pub sigma: f64,
    pub tau: f64,
    pub t_grid: LogGrid<f64>,
    pub norms: Vec<f64>,
    pub fit: Option<PowerFit<f64>>,
    /// Fitted decay exponent (positive for decay).
    pub rho_hat: f64,
    pub growth_mu_hat: Option<f64>,
    pub classification: DecayClass,
    pub edge_dominated: usize,
}

/// Below this the norm counts as underflowed.
const UNDERFLOW: f64 = 1e-250;
/// Exponents within this band count as flat.
pub const FLAT: f64 = 0.05;

fn local_slope(t: &[f64], v: &[f64], i: usize, j: usize) -> f64 {
    (v[j].ln() - v[i].ln()) / (t[j].ln() - t[i].ln())
}

fn classify(grid: &[f64], norms: &[f64], fit: Option<&PowerFit<f64>>) -> DecayClass {
    if norms.iter().any(|&v| v < UNDERFLOW) {
        return DecayClass::SuperPolynomial;
    }
    let w = default_window(norms.len());
    if w.len() >= 6 {
        let k = w.len() / 3;
        let first = local_slope(grid, norms, w.start, w.start + k);
        let last = local_slope(grid, norms, w.end - 1 - k, w.end - 1);
        if last < -5.0 && last.abs() > 2.0 * first.abs() + 1.0 {
            return DecayClass::SuperPolynomial;
        }
    }
    let e = fit.map(|f| f.exponent).unwrap_or(0.0);
    if e.abs() <= FLAT {
        DecayClass::BoundedNotDecaying
    } else if e > 0.0 {
        DecayClass::Growing
    } else {
        DecayClass::Polynomial
    }
}

fn norm_series(model: &OperatorModel, grid: &LogGrid<f64>, map: &(dyn Fn(f64) -> NormMap + Sync)) -> Result<(Vec<f64>, usize)> {
    let vals: Vec<Result<(f64, bool)>> = grid
        .nodes
        .par_iter()
        .map(|&t| model.operator_norm(map(t)).map(|v| (v.value, v.edge_dominated)))
        .collect();
    let mut norms = Vec::with_capacity(vals.len());
    let mut edges = 0;
    for v in vals {
        let (n, e) = v?;
        norms.push(n);
        edges += e as usize;
    }
    Ok((norms, edges))
}

fn positive_prefix_fit(grid: &LogGrid<f64>, norms: &[f64]) -> Option<PowerFit<f64>> {
    let k = norms.iter().position(|&v| v < UNDERFLOW).unwrap_or(norms.len());
    if k == norms.len() {
        return fit_power_law(grid, norms, None).ok();
    }
    if k < 3 {
        return None;
    }
    let sub = LogGrid {
        start: grid.start,
        stop: grid.nodes[k - 1],
        count: k,
        nodes: grid.nodes[..k].to_vec(),
    };
    fit_power_law(&sub, &norms[..k], Some(0..k)).ok()
}

pub fn measure_decay_map(model: &OperatorModel, map: DecayMap, t_grid: &LogGrid<f64>) -> Result<DecayMeasurement> {
    let (sigma, tau) = match map {
        DecayMap::Fractional { sigma, tau } => (sigma, tau),
        DecayMap::GeneratorPower { m } => (m as f64, 0.0),
    };
    let f: Box<dyn Fn(f64) -> NormMap + Sync> = match map {
        DecayMap::Fractional { sigma, tau } => Box::new(move |t| NormMap::Phi { t, sigma, tau }),
        DecayMap::GeneratorPower { m } => Box::new(move |t| NormMap::GeneratorPower { t, m }),
    };
    let (norms, edges) = norm_series(model, t_grid, &*f)?;
    let fit = positive_prefix_fit(t_grid, &norms);
    let classification = classify(&t_grid.nodes, &norms, fit.as_ref());
    let rho_hat = match classification {
        DecayClass::SuperPolynomial => f64::INFINITY,
        _ => -fit.as_ref().map(|f| f.exponent).unwrap_or(0.0),
    };
    let growth_mu_hat = if sigma == 0.0 && tau == 0.0 {
        fit.as_ref().map(|f| f.exponent.max(0.0))
    } else {
        let (g, _) = norm_series(model, t_grid, &|t| NormMap::Semigroup(t))?;
        positive_prefix_fit(t_grid, &g).map(|f| f.exponent.max(0.0))
    };
    Ok(DecayMeasurement {
        map,
        sigma,
        tau,
        t_grid: t_grid.clone(),
        norms,
        fit,
        rho_hat,
        growth_mu_hat,
        classification,
        edge_dominated: edges,
    })
}

/// `||T(t)||` from the fractional domain of index `(sigma, tau)` to `X`.
pub fn measure_decay(model: &OperatorModel, sigma: f64, tau: f64, t_grid: &LogGrid<f64>) -> Result<DecayMeasurement> {
    if sigma < 0.0 || tau < 0.0 {
        return domain(format!("fractional indices must be nonnegative, got ({sigma}, {tau})"));
    }
    if sigma > 0.0 && !model.meta().injective {
        return Err(Error::NotInjective(format!("sigma = {sigma} needs an injective operator")));
    }
    measure_decay_map(model, DecayMap::Fractional { sigma, tau }, t_grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "ser_ext")]
    pub margin: f64,
    #[serde(serialize_with = "ser_opt_ext")]
    pub predicted: Option<f64>,
    #[serde(serialize_with = "ser_ext")]
    pub measured: f64,
    pub source: String,
    pub tol: f64,
}

/// Guaranteed rates are exponent lower bounds: PASS iff `rho_hat >= rho - tol`.
pub fn check_consistency(measurement: &DecayMeasurement, prediction: &RatePrediction, tol: f64) -> ConsistencyReport {
    let measured = measurement.rho_hat;
    let super_poly = measurement.classification == DecayClass::SuperPolynomial;
    let (verdict, margin) = match prediction.rho {
        None => (Verdict::NotApplicable, f64::NAN),
        Some(_) if super_poly => (Verdict::Pass, f64::INFINITY),
        Some(r) if r.is_infinite() => (Verdict::Fail, f64::NEG_INFINITY),
        Some(r) => {
            let m = measured - r;
            (if m >= -tol { Verdict::Pass } else { Verdict::Fail }, m)
        }
    };
    ConsistencyReport {
        verdict,
        margin,
        predicted: prediction.rho,
        measured,
        source: prediction.source.clone(),
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_examples() {
        let p = predict_rate_general(0.0, 1.0, 0.0, 3.0);
        assert_eq!(p.rho, Some(1.0));
        assert!(p.strict);
        assert_eq!(predict_rate_general(0.0, 0.0, 0.0, 3.0).rho, Some(f64::INFINITY));
        assert_eq!(predict_rate_general(1.0, 0.0, 2.0, 1.5).rho, Some(2.0));
        let bad = predict_rate_general(0.0, 1.0, 0.0, 2.0);
        assert_eq!(bad.rho, None);
        assert!(bad.conditions.iter().any(|c| !c.passed && c.name.starts_with("tau")));
    }

    #[test]
    fn hilbert_examples() {
        let h = GeometryDescriptor::hilbert();
        let p = predict_rate_fourier_type(0.0, 2.0, 0.0, 4.0, &h);
        assert_eq!(p.rho, Some(1.0));
        assert!(!p.strict);
        assert_eq!(p.r, f64::INFINITY);
        assert_eq!(predict_rate_fourier_type(0.0, 2.0, 0.0, 2.0, &h).rho, Some(0.0));
        // tau = beta = 0 gives the exponential regime via 0/0 = inf
        assert_eq!(predict_rate_fourier_type(0.0, 0.0, 0.0, 0.0, &h).rho, Some(f64::INFINITY));
    }

    #[test]
    fn fourier_type_one_is_general() {
        let mut g = GeometryDescriptor::lebesgue(1.0).unwrap();
        assert_eq!(g.fourier_type, 1.0);
        g.fourier_type = 1.0;
        let a = predict_rate_fourier_type(0.5, 1.5, 2.0, 4.0, &g);
        let b = predict_rate_general(0.5, 1.5, 2.0, 4.0);
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.r, 1.0);
    }

    #[test]
    fn type_cotype_gating_and_lattice() {
        let mut g = GeometryDescriptor::lebesgue(4.0).unwrap();
        let p = predict_rate_type_cotype(0.0, 1.0, 0.0, 3.0, &g);
        assert_eq!(p.rho, None);
        assert_eq!(p.conditions[0].name, "R-boundedness not asserted");
        g.r_resolvent_growth_asserted = true;
        let p = predict_rate_type_cotype(0.0, 1.0, 0.0, 3.0, &g);
        // lattice 1/r = 1/2 - 1/4 beats fourier-type 1/r = 2/(4/3) - 1 = 1/2
        assert!((1.0 / p.r - 0.25).abs() < 1e-15);
        let f = predict_rate_fourier_type(0.0, 1.0, 0.0, 3.0, &g);
        assert!((1.0 / f.r - 0.5).abs() < 1e-15);
        assert!(p.rho.unwrap() > f.rho.unwrap());
        let mut h = GeometryDescriptor::hilbert();
        h.lattice = None;
        let p = predict_rate_type_cotype(0.0, 2.0, 0.0, 4.0, &h);
        assert_eq!(p.rho, Some(1.0));
        assert!(!p.strict);
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(predict_rate_asymptotically_analytic(1.0, 2.5, true).rho, Some(2.5));
        assert_eq!(predict_rate_asymptotically_analytic(0.0, 0.0, true).rho, Some(f64::INFINITY));
        assert_eq!(predict_rate_asymptotically_analytic(2.0, 1.0, true).rho, None);
        assert_eq!(predict_rate_asymptotically_analytic(1.0, 1.0, false).rho, None);
    }

    #[test]
    fn growth_aware_examples() {
        let g = predict_rate_growth_aware(0.0, 1.0, 0.0, 3.0, 1.0);
        let s = g.scaling.unwrap();
        assert_eq!(s.rho, Some(2.0));
        assert!(s.log_factor);
        let g = predict_rate_growth_aware(1.0, 2.0, 1.5, 2.0, 0.0);
        assert_eq!(g.corollary.rho, Some(1.0));
        assert!(g.scaling.is_none());
        // Hilbert beats the scaling rate exactly when mu > 1
        let h = GeometryDescriptor::hilbert();
        for mu in [1.0, 1.5, 3.0] {
            let hil = predict_rate_fourier_type(0.0, 1.0, 0.0, 3.0, &h).rho.unwrap();
            let sc = predict_rate_growth_aware(0.0, 1.0, 0.0, 3.0, mu).scaling.unwrap().rho.unwrap();
            assert_eq!(hil > sc, mu > 1.0);
        }
    }

    #[test]
    fn interpolation_examples() {
        let r1 = RatePoint { sigma: 1.0, tau: 4.0, rho: 2.0 };
        let r2 = RatePoint { sigma: 0.0, tau: 2.0, rho: 0.0 };
        assert_eq!(interpolate_rates(r1, r2, 0.0).unwrap(), r2);
        let m = interpolate_rates(r1, r2, 0.5).unwrap();
        assert_eq!((m.sigma, m.tau, m.rho), (0.5, 3.0, 1.0));
        let s = interpolate_rates(RatePoint { sigma: 0.5, tau: 2.0, rho: 1.0 }, r2, 2.0).unwrap();
        assert_eq!((s.sigma, s.tau, s.rho), (1.0, 4.0, 2.0));
        assert!(interpolate_rates(r2, r1, 0.5).is_err());
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(exponential_smoothness_index(&GeometryDescriptor::hilbert()).index, 0.0);
        let g = GeometryDescriptor {
            fourier_type: 1.0,
            type_p: 1.0,
            cotype: f64::INFINITY,
            hilbert: false,
            lattice: None,
            positive_semigroup: false,
            r_resolvent_growth_asserted: false,
        };
        assert_eq!(exponential_smoothness_index(&g).index, 1.0);
        let q = 4.0;
        let g = GeometryDescriptor {
            cotype: q,
            lattice: Some(LatticeGeometry { p_convex: 1.0, q_concave: q }),
            positive_semigroup: true,
            ..g
        };
        let s = exponential_smoothness_index(&g);
        assert_eq!(s.index, 1.0 - 1.0 / q);
        assert_eq!(s.source, "positive-lattice");
    }

    fn fake(rho_hat: f64, class: DecayClass) -> DecayMeasurement {
        DecayMeasurement {
            map: DecayMap::Fractional { sigma: 0.0, tau: 0.0 },
            sigma: 0.0,
            tau: 0.0,
            t_grid: crate::numcore::geometric_grid(1.0, 10.0, 3).unwrap(),
            norms: vec![1.0; 3],
            fit: None,
            rho_hat,
            growth_mu_hat: None,
            classification: class,
            edge_dominated: 0,
        }
    }

    #[test]
    fn consistency_examples() {
        let p = |r: f64| RatePrediction {
            rho: Some(r),
            strict: true,
            r: 1.0,
            source: "test".into(),
            conditions: vec![],
            log_factor: false,
        };
        assert_eq!(check_consistency(&fake(1.0, DecayClass::Polynomial), &p(1.0), 0.05).verdict, Verdict::Pass);
        assert_eq!(
            check_consistency(&fake(f64::INFINITY, DecayClass::SuperPolynomial), &p(f64::INFINITY), 0.05).verdict,
            Verdict::Pass
        );
        let r = check_consistency(&fake(0.5, DecayClass::Polynomial), &p(2.0), 0.05);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!((r.margin + 1.5).abs() < 1e-15);
    }

    #[test]
    fn scalar_decay_is_super_polynomial() {
        let m = OperatorModel::Dense(crate::operators::DenseModel::from_real(1, &[1.0]).unwrap());
        let g = crate::numcore::geometric_grid(1.0, 1e3, 40).unwrap();
        let d = measure_decay(&m, 0.5, 1.0, &g).unwrap();
        assert_eq!(d.classification, DecayClass::SuperPolynomial);
        assert_eq!(d.rho_hat, f64::INFINITY);
    }
}
