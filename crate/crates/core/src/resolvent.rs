//! Resolvent probing along vertical lines, resolvent-growth fits and
//! spectral-bound estimates. All results are "probed", never certified.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::linalg::{c, C64};
use crate::numcore::{fit_exponential_rate, fit_power_law_nodes, LogGrid, PowerFit};
use crate::operators::{NormMap, OperatorModel};

pub const PROBED: &str = "probed";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub xi: f64,
    pub eta: f64,
    /// `||(lambda + A)^{-1}||` at `lambda = eta + i xi`.
    pub norm: Option<f64>,
    /// Maximum over the probe and the resonance peaks inside its cell.
    pub envelope: Option<f64>,
    pub edge_dominated: bool,
    pub status: String,
}

/// `-xi_n, ..., -xi_1, xi_1, ..., xi_n`.
pub fn mirrored(grid: &LogGrid<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = grid.nodes.iter().rev().map(|x| -x).collect();
    v.extend(grid.nodes.iter().cloned());
    v
}

/// Frequencies inside `[lo, hi]` (both signs handled by the caller) where
/// `||(eta + i xi + A)^{-1}||` peaks.
fn peak_frequencies(model: &OperatorModel, lo: f64, hi: f64) -> Vec<f64> {
    match model {
        OperatorModel::Dense(d) => d
            .spectrum()
            .iter()
            .map(|mu| -mu.im)
            .filter(|&x| x >= lo && x <= hi)
            .collect(),
        OperatorModel::JordanSum(j) => {
            // block norms at exact resonance grow with the block index
            let top = hi.floor().min(j.n_max as f64);
            if top >= lo.max(j.n0 as f64) {
                vec![top]
            } else {
                vec![]
            }
        }
        _ => vec![],
    }
}

fn shifted_resolvent_norm(model: &OperatorModel, lambda: C64) -> Result<(f64, bool)> {
    model
        .operator_norm(NormMap::Resolvent(-lambda))
        .map(|v| (v.value, v.edge_dominated))
}

fn probe_one(model: &OperatorModel, xi: f64, eta: f64, cell: (f64, f64)) -> ProbeRecord {
    let lambda = c(eta, xi);
    match shifted_resolvent_norm(model, lambda) {
        Ok((v, edge)) => {
            let mut env = Some(v);
            let mut edge_env = edge;
            let mut status = "ok".to_string();
            for p in peak_frequencies(model, cell.0, cell.1) {
                match shifted_resolvent_norm(model, c(eta, p)) {
                    Ok((w, e)) => {
                        if env.is_some_and(|x| w > x) {
                            env = Some(w);
                            edge_env = e;
                        }
                    }
                    Err(err) => {
                        env = None;
                        status = format!("peak at xi = {p}: {err}");
                    }
                }
            }
            ProbeRecord {
                xi,
                eta,
                norm: Some(v),
                envelope: env,
                edge_dominated: edge || edge_env,
                status,
            }
        }
        Err(e) => ProbeRecord {
            xi,
            eta,
            norm: None,
            envelope: None,
            edge_dominated: false,
            status: e.to_string(),
        },
    }
}

/// Probes `||(eta + i xi + A)^{-1}||` for `xi` in the mirrored grid.
pub fn probe_resolvent_norms(model: &OperatorModel, xi_grid: &LogGrid<f64>, eta: f64) -> Vec<ProbeRecord> {
    let pos = &xi_grid.nodes;
    let n = pos.len();
    // log-midpoint cells around each positive node
    let cells: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let lo = if i == 0 { pos[0] } else { (pos[i - 1] * pos[i]).sqrt() };
            let hi = if i + 1 == n { pos[n - 1] } else { (pos[i] * pos[i + 1]).sqrt() };
            (lo, hi)
        })
        .collect();
    let mut jobs: Vec<(f64, (f64, f64))> = Vec::with_capacity(2 * n);
    for i in (0..n).rev() {
        jobs.push((-pos[i], (-cells[i].1, -cells[i].0)));
    }
    for i in 0..n {
        jobs.push((pos[i], cells[i]));
    }
    jobs.par_iter()
        .map(|&(xi, cell)| probe_one(model, xi, eta, cell))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventGrowthProfile {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    #[serde(rename = "M_constant")]
    pub m_constant: f64,
    pub low_fit: PowerFit<f64>,
    pub high_fit: PowerFit<f64>,
    pub split: f64,
    pub label: &'static str,
}

/// Slopes below this magnitude are reported as zero.
pub const SNAP: f64 = 0.05;

fn snap(x: f64) -> f64 {
    if x.abs() < SNAP {
        0.0
    } else {
        x.max(0.0)
    }
}

/// Fits the growth pair from imaginary-axis probes, split at `|xi| = split`.
pub fn fit_growth_profile_split(probes: &[ProbeRecord], split: f64) -> Result<ResolventGrowthProfile> {
    if !(split > 0.0) {
        return domain(format!("split point must be positive, got {split}"));
    }
    // envelope per |xi|, maximum over both signs
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for p in probes.iter().filter(|p| p.eta == 0.0) {
        if let Some(v) = p.envelope {
            pts.push((p.xi.abs(), v));
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (x, v) in pts {
        match merged.last_mut() {
            Some(last) if (last.0 - x).abs() <= 1e-12 * x => last.1 = last.1.max(v),
            _ => merged.push((x, v)),
        }
    }
    let low: Vec<(f64, f64)> = merged.iter().cloned().filter(|p| p.0 <= split && p.0 > 0.0).collect();
    let high: Vec<(f64, f64)> = merged.iter().cloned().filter(|p| p.0 >= split).collect();
    for side in [&low, &high] {
        if side.len() < 8 {
            return Err(Error::InsufficientData {
                needed: 8,
                got: side.len(),
            });
        }
    }
    let fit = |s: &[(f64, f64)]| {
        let x: Vec<f64> = s.iter().map(|p| p.0).collect();
        let y: Vec<f64> = s.iter().map(|p| p.1).collect();
        fit_power_law_nodes(&x, &y, None)
    };
    let low_fit = fit(&low)?;
    let high_fit = fit(&high)?;
    let alpha_hat = snap(-low_fit.exponent);
    let beta_hat = snap(high_fit.exponent);
    let m_constant = growth_constant(probes, alpha_hat, beta_hat);
    Ok(ResolventGrowthProfile {
        alpha_hat,
        beta_hat,
        m_constant,
        low_fit,
        high_fit,
        split,
        label: PROBED,
    })
}

pub fn fit_growth_profile(probes: &[ProbeRecord]) -> Result<ResolventGrowthProfile> {
    fit_growth_profile_split(probes, 1.0)
}

/// `sup |lambda|^alpha (1+|lambda|)^{-alpha-beta} ||(lambda+A)^{-1}||` over probes.
pub fn growth_constant(probes: &[ProbeRecord], alpha: f64, beta: f64) -> f64 {
    probes
        .iter()
        .filter_map(|p| {
            let l = c(p.eta, p.xi).norm();
            p.envelope
                .map(|v| l.powf(alpha) * (1.0 + l).powf(-alpha - beta) * v)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sectoriality {
    #[serde(rename = "M")]
    pub m: f64,
    /// `pi - arcsin(1/M)`.
    pub angle: f64,
    pub edge_dominated: bool,
    pub label: &'static str,
}

/// `M(A) = sup_{lambda > 0} ||lambda (lambda + A)^{-1}||` over the grid.
pub fn sectoriality_constant(model: &OperatorModel, lambda_grid: &LogGrid<f64>) -> Result<Sectoriality> {
    let vals: Vec<Result<(f64, bool)>> = lambda_grid
        .nodes
        .par_iter()
        .map(|&l| shifted_resolvent_norm(model, c(l, 0.0)).map(|(v, e)| (l * v, e)))
        .collect();
    let mut m: f64 = 0.0;
    let mut edge = false;
    for (v, &l) in vals.into_iter().zip(&lambda_grid.nodes) {
        let (v, e) = v.map_err(|e| Error::Domain(format!("probe lambda = {l} is not in the resolvent set: {e}")))?;
        if v > m {
            m = v;
            edge = e;
        }
    }
    let angle = PI - (1.0 / m.max(1.0)).asin();
    Ok(Sectoriality {
        m,
        angle,
        edge_dominated: edge,
        label: PROBED,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub s_minus_a: f64,
    /// `(beta, s_beta)` pairs; `None` when no probed line was bounded.
    pub s_beta: Vec<(f64, Option<f64>)>,
    pub omega0_hat: f64,
    pub label: &'static str,
}

/// `s(-A) = sup Re sigma(-A)` from the known spectrum.
pub fn spectral_abscissa(model: &OperatorModel) -> Result<f64> {
    match model {
        OperatorModel::Dense(d) => Ok(d
            .spectrum()
            .iter()
            .map(|mu| -mu.re)
            .fold(f64::NEG_INFINITY, f64::max)),
        OperatorModel::Diagonal(d) => match d.symbol {
            crate::operators::DiagonalSymbol::Values(ref v) => {
                Ok(v.iter().map(|mu| -mu.re).fold(f64::NEG_INFINITY, f64::max))
            }
            _ => Err(Error::Unsupported(
                "exact spectrum of a sampled symbol on a half-line".into(),
            )),
        },
        OperatorModel::JordanSum(j) => Ok(-j.gamma),
        OperatorModel::OperatorMatrix(_) => Ok(0.0),
    }
}

/// Supremum over the mirrored grid of `(1+|lambda|)^{-beta} ||(lambda+A)^{-1}||`
/// on the line `Re lambda = eta`; `None` if a probe hits the spectrum.
pub fn line_supremum(model: &OperatorModel, xi_grid: &LogGrid<f64>, eta: f64, beta: f64) -> Option<f64> {
    let probes = probe_resolvent_norms(model, xi_grid, eta);
    let mut zero = probe_one(model, 0.0, eta, (0.0, 0.0));
    if let OperatorModel::Dense(_) = model {
        // peaks near xi = 0 belong to the zero probe
        let lo = xi_grid.nodes[0];
        let z = probe_one(model, 0.0, eta, (-lo, lo));
        zero = z;
    }
    let mut best: f64 = 0.0;
    for p in probes.iter().chain(std::iter::once(&zero)) {
        let v = p.envelope?;
        let l = c(eta, p.xi).norm();
        best = best.max((1.0 + l).powf(-beta) * v);
    }
    Some(best)
}

/// Lines `Re lambda = -Re mu` through the known spectrum of `-A`.
pub fn spectral_lines(model: &OperatorModel) -> Vec<f64> {
    let mut v: Vec<f64> = match model {
        OperatorModel::Dense(d) => d.spectrum().iter().map(|mu| -mu.re).collect(),
        OperatorModel::Diagonal(d) => match d.symbol {
            crate::operators::DiagonalSymbol::Values(ref vals) => vals.iter().map(|mu| -mu.re).collect(),
            _ => vec![],
        },
        OperatorModel::JordanSum(j) => vec![-j.gamma],
        OperatorModel::OperatorMatrix(m) => {
            if m.analytic {
                vec![0.0]
            } else {
                m.nodes.iter().map(|s| -s).collect()
            }
        }
    };
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Bisection on `eta` for the abscissa beyond which the tempered resolvent
/// stays bounded on the half-plane `Re lambda >= eta`. The half-plane is
/// probed through the line `eta`, the grid lines and the spectral lines to
/// its right; "bounded" means at most `1e4` times the value on the
/// rightmost grid line.
pub fn tempered_abscissa(
    model: &OperatorModel,
    xi_grid: &LogGrid<f64>,
    eta_grid: &[f64],
    beta: f64,
    tol: f64,
) -> Option<f64> {
    let cap_factor = 1e4;
    let mut etas = eta_grid.to_vec();
    etas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let top = *etas.last()?;
    let reference = line_supremum(model, xi_grid, top, beta)?;
    let cap = cap_factor * reference.max(f64::MIN_POSITIVE);
    let memo = std::cell::RefCell::new(std::collections::HashMap::<u64, bool>::new());
    let line_ok = |eta: f64| {
        if let Some(&v) = memo.borrow().get(&eta.to_bits()) {
            return v;
        }
        let v = line_supremum(model, xi_grid, eta, beta).is_some_and(|v| v <= cap);
        memo.borrow_mut().insert(eta.to_bits(), v);
        v
    };
    let mut fixed: Vec<f64> = spectral_lines(model)
        .into_iter()
        .filter(|&l| l <= top)
        .chain(etas.iter().cloned())
        .collect();
    fixed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bounded = |eta: f64| line_ok(eta) && fixed.iter().filter(|&&f| f >= eta).all(|&f| line_ok(f));
    // smallest grid line from which the half-plane is bounded
    let mut k = etas.len() - 1;
    while k > 0 && bounded(etas[k - 1]) {
        k -= 1;
    }
    if k == 0 {
        return Some(etas[0]);
    }
    let (mut lo, mut hi) = (etas[k - 1], etas[k]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if bounded(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

pub fn spectral_bounds(
    model: &OperatorModel,
    t_grid: &[f64],
    eta_grid: &[f64],
    xi_grid: &LogGrid<f64>,
    betas: &[f64],
) -> Result<SpectralBounds> {
    let s_minus_a = spectral_abscissa(model)?;
    let norms: Vec<Result<f64>> = t_grid
        .par_iter()
        .map(|&t| model.operator_norm(NormMap::Semigroup(t)).map(|v| v.value))
        .collect();
    let norms: Vec<f64> = norms.into_iter().collect::<Result<_>>()?;
    let floor = norms.iter().cloned().fold(0.0, f64::max) * 1e-300;
    let clipped: Vec<f64> = norms.iter().map(|&v| v.max(floor).max(f64::MIN_POSITIVE)).collect();
    let omega0_hat = fit_exponential_rate(t_grid, &clipped, None)?.rate;
    let s_beta = betas
        .iter()
        .map(|&b| (b, tempered_abscissa(model, xi_grid, eta_grid, b, 1e-2)))
        .collect();
    Ok(SpectralBounds {
        s_minus_a,
        s_beta,
        omega0_hat,
        label: PROBED,
    })
}
