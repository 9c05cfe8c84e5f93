//! Fractional powers `A^alpha (eta + A)^{-alpha-beta}` by trapezoidal
//! quadrature over the sector boundary `{r e^{+-i theta}}`.

use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{c, CMat, CVec, C64};
use crate::numcore::Real;
use crate::operators::OperatorModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub theta: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub nodes_per_ray: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            theta: 0.75 * PI,
            r_min: 1e-8,
            r_max: 1e8,
            nodes_per_ray: 2048,
        }
    }
}

/// Minimum gap between the contour angle and the sectorial angle.
pub const ANGLE_MARGIN: f64 = 0.1;

impl ContourSpec {
    pub fn with_nodes(self, nodes_per_ray: usize) -> Self {
        ContourSpec {
            nodes_per_ray,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < PI) {
            return domain(format!("contour angle must lie in (0, pi), got {}", self.theta));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return domain(format!(
                "contour radii need 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            ));
        }
        if self.nodes_per_ray < 8 {
            return domain(format!("contour needs at least 8 nodes per ray, got {}", self.nodes_per_ray));
        }
        Ok(())
    }

    /// Log-radius step.
    pub fn step(&self) -> f64 {
        (self.r_max / self.r_min).ln() / (self.nodes_per_ray - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalIndex {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

impl FractionalIndex {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return domain(format!("fractional indices must be nonnegative, got ({}, {})", self.alpha, self.beta));
        }
        if !(self.eta > 0.0) {
            return domain(format!("eta must be positive, got {}", self.eta));
        }
        Ok(())
    }
}

/// `mu^alpha (eta + mu)^{-alpha-beta}` on the principal branch.
pub fn phi_scalar(mu: C64, alpha: f64, beta: f64, eta: f64) -> C64 {
    phi_scalar_generic(mu, alpha, beta, eta)
}

pub fn phi_scalar_generic<T: Real>(mu: Complex<T>, alpha: T, beta: T, eta: T) -> Complex<T> {
    let head = if alpha == T::zero() {
        Complex::new(T::one(), T::zero())
    } else if mu.norm() == T::zero() {
        Complex::new(T::zero(), T::zero())
    } else {
        mu.powf(alpha)
    };
    head * (mu + eta).powf(-alpha - beta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureReport {
    /// Share of the result carried by the outermost 10% of nodes.
    pub tail_fraction: f64,
    /// Bound `r_min^alpha / alpha` on the neglected piece near the origin,
    /// reported when `alpha` lies in `(0, 1)`.
    pub origin_tail_bound: Option<f64>,
    pub warnings: Vec<String>,
}

/// Trapezoid in `u = ln r` on both rays with power-law end corrections.
/// `g(z)` is the integrand without `dz`; the result is
/// `(1/2 pi i) int_0^inf [g(r e^{-i theta}) e^{-i theta} - g(r e^{i theta}) e^{i theta}] dr`.
pub fn sector_quadrature<F>(
    spec: &ContourSpec,
    decay: f64,
    g: F,
) -> Result<(CMat, QuadratureReport)>
where
    F: Fn(C64) -> Result<CMat> + Sync,
{
    spec.validate()?;
    let n = spec.nodes_per_ray;
    let h = spec.step();
    let l0 = spec.r_min.ln();
    let up = C64::from_polar(1.0, spec.theta);
    let down = up.conj();
    let vals: Vec<Result<CMat>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let r = if j == n - 1 { spec.r_max } else { (l0 + h * j as f64).exp() };
            let a = g(down * r)? * down;
            let b = g(up * r)? * up;
            Ok((a - b) * c(r, 0.0))
        })
        .collect();
    let vals: Vec<CMat> = vals.into_iter().collect::<Result<_>>()?;
    let mut total = vals[0].scale(0.5) + vals[n - 1].scale(0.5);
    for v in &vals[1..n - 1] {
        total += v;
    }
    total *= c(h, 0.0);
    let tail_start = n - n / 10;
    let mut tail = vals[n - 1].scale(0.5);
    for v in &vals[tail_start..n - 1] {
        tail += v;
    }
    tail *= c(h, 0.0);
    // origin: G(r) ~ G(r_min) (r/r_min)^p with p estimated from two nodes;
    // in u the summand behaves like e^{(p+1)u}
    let (g0, g1) = (&vals[0], &vals[1]);
    let p = ((g1.norm() / g0.norm().max(f64::MIN_POSITIVE)).ln() / h - 1.0).max(-0.999);
    if p.is_finite() && g0.norm() > 0.0 {
        total += g0.scale(1.0 / (p + 1.0) + h * h * (p + 1.0) / 12.0);
    }
    // infinity: G(r) ~ G(r_max) (r/r_max)^{-decay-1}, summand ~ e^{-decay u}
    if decay > 0.0 {
        total += vals[n - 1].scale(1.0 / decay + h * h * decay / 12.0);
    }
    let scale = C64::new(0.0, -1.0 / (2.0 * PI));
    let total = total * scale;
    let tail = tail * scale;
    let rn = total.norm();
    let tail_fraction = if rn > 0.0 { tail.norm() / rn } else { 0.0 };
    let mut warnings = Vec::new();
    if tail_fraction > 1e-8 {
        warnings.push(format!(
            "quadrature tail: outer 10% of nodes carry {tail_fraction:.2e} of the result"
        ));
    }
    Ok((
        total,
        QuadratureReport {
            tail_fraction,
            origin_tail_bound: None,
            warnings,
        },
    ))
}

fn check_contour_for(model: &OperatorModel, idx: &FractionalIndex, spec: &ContourSpec) -> Result<()> {
    idx.validate()?;
    if !(idx.beta > 0.0) {
        return Err(Error::Contour("contour representation needs beta > 0".into()));
    }
    spec.validate()?;
    let meta = model.meta();
    let angle = meta
        .sectorial_angle
        .ok_or_else(|| Error::Contour(format!("{} model is not sectorial", meta.kind)))?;
    if spec.theta < angle + ANGLE_MARGIN {
        return Err(Error::Contour(format!(
            "contour angle {:.4} is within {ANGLE_MARGIN} of the sectorial angle {angle:.4}",
            spec.theta
        )));
    }
    if idx.alpha + idx.beta <= 0.0 {
        return domain("contour evaluation needs alpha + beta > 0");
    }
    if idx.alpha == 0.0 && !meta.invertible {
        return domain("alpha = 0 requires an invertible model");
    }
    if idx.alpha > 0.0 && !meta.injective {
        return Err(Error::NotInjective("A^alpha with alpha > 0 needs an injective model".into()));
    }
    Ok(())
}

fn resolvent_columns(model: &OperatorModel, z: C64, x: &CMat) -> Result<CMat> {
    let map_err = |e: Error| match e {
        Error::NearSingular { lambda, dist } => Error::Contour(format!(
            "contour node {lambda} is within {dist:e} of the spectrum"
        )),
        other => other,
    };
    if let OperatorModel::Dense(d) = model {
        return Ok(d.resolvent_matrix(z).map_err(map_err)? * x);
    }
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        let col: CVec = x.column(j).into_owned();
        let y = model.resolvent_apply(z, &col).map_err(map_err)?;
        out.set_column(j, &y);
    }
    Ok(out)
}

fn weight(idx: &FractionalIndex, z: C64) -> C64 {
    let head = if idx.alpha == 0.0 { c(1.0, 0.0) } else { z.powf(idx.alpha) };
    head * (z + idx.eta).powf(-idx.alpha - idx.beta)
}

/// Quadrature for `A^alpha (eta+A)^{-alpha-beta}` applied to the columns of `x`.
pub fn contour_fractional_apply_columns(
    model: &OperatorModel,
    idx: &FractionalIndex,
    x: &CMat,
    spec: &ContourSpec,
) -> Result<(CMat, QuadratureReport)> {
    check_contour_for(model, idx, spec)?;
    let (out, mut rep) = sector_quadrature(spec, idx.beta, |z| {
        Ok(resolvent_columns(model, z, x)? * weight(idx, z))
    })?;
    if idx.alpha > 0.0 && idx.alpha < 1.0 {
        let b = spec.r_min.powf(idx.alpha) / idx.alpha;
        rep.origin_tail_bound = Some(b);
        rep.warnings
            .push(format!("origin truncation at r_min: neglected piece bounded by {b:.2e}"));
    }
    Ok((out, rep))
}

pub fn contour_fractional_apply(
    model: &OperatorModel,
    idx: &FractionalIndex,
    x: &CVec,
    spec: &ContourSpec,
) -> Result<CVec> {
    if x.len() != model.dimension() {
        return Err(Error::Shape {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    let xm = CMat::from_column_slice(x.len(), 1, x.as_slice());
    let (out, _) = contour_fractional_apply_columns(model, idx, &xm, spec)?;
    Ok(out.column(0).into_owned())
}

/// The full matrix of `A^alpha (eta+A)^{-alpha-beta}` by quadrature.
pub fn contour_fractional_matrix(
    model: &OperatorModel,
    idx: &FractionalIndex,
    spec: &ContourSpec,
) -> Result<CMat> {
    let d = model.dimension();
    let (out, _) = contour_fractional_apply_columns(model, idx, &CMat::identity(d, d), spec)?;
    Ok(out)
}

/// `Phi^alpha_beta(A) x = A^alpha (1+A)^{-alpha-beta} x`: closed form where
/// the model has one, quadrature otherwise.
pub fn phi_apply(model: &OperatorModel, alpha: f64, beta: f64, x: &CVec) -> Result<CVec> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return domain(format!("fractional indices must be nonnegative, got ({alpha}, {beta})"));
    }
    if x.len() != model.dimension() {
        return Err(Error::Shape {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    if alpha == 0.0 && beta == 0.0 {
        return Ok(x.clone());
    }
    if let Some(r) = model.phi_closed_form(alpha, beta, x) {
        return r;
    }
    contour_fractional_apply(
        model,
        &FractionalIndex {
            alpha,
            beta,
            eta: 1.0,
        },
        x,
        &ContourSpec::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourCheck {
    pub quadrature: C64,
    pub closed_form: C64,
    pub rel_error: f64,
}

/// Whether `lambda` lies in the closed right half-plane outside the sector
/// `S_phi` for some admissible `phi > pi - theta`.
pub fn in_identity_domain(lambda: C64, theta: f64) -> bool {
    lambda.re >= 0.0 && lambda.norm() > 0.0 && lambda.arg().abs() > PI - theta
}

/// Scalar contour identity: quadrature of
/// `z^alpha (eta+z)^{-alpha-beta} / (z + lambda + eta - 1)` against its
/// closed form `(1-eta-lambda)^alpha / (1-lambda)^{alpha+beta}`.
pub fn verify_contour_identity(
    alpha: f64,
    beta: f64,
    eta: f64,
    lambda: C64,
    spec: &ContourSpec,
) -> Result<ContourCheck> {
    if !(alpha >= 0.0) || !(beta > 0.0) {
        return domain(format!("identity needs alpha >= 0 and beta > 0, got ({alpha}, {beta})"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return domain(format!("identity needs eta in (0, 1], got {eta}"));
    }
    spec.validate()?;
    if !in_identity_domain(lambda, spec.theta) {
        return domain(format!(
            "lambda = {lambda} is outside the admissible region for theta = {:.4}",
            spec.theta
        ));
    }
    let idx = FractionalIndex { alpha, beta, eta };
    let shift = lambda + eta - 1.0;
    let (q, _) = sector_quadrature(spec, beta, |z| {
        Ok(CMat::from_element(1, 1, weight(&idx, z) / (z + shift)))
    })?;
    let quadrature = q[(0, 0)];
    let closed_form = closed_form_identity(alpha, beta, eta, lambda);
    let rel_error = (quadrature - closed_form).norm() / closed_form.norm();
    Ok(ContourCheck {
        quadrature,
        closed_form,
        rel_error,
    })
}

pub fn closed_form_identity<T: Real>(alpha: T, beta: T, eta: T, lambda: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    let mu = one - lambda - eta;
    let head = if alpha == T::zero() { one } else { mu.powf(alpha) };
    head * (one - lambda).powf(-alpha - beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{DenseModel, DiagonalModel};

    #[test]
    fn closed_form_examples() {
        let z = closed_form_identity(1.0, 1.0, 1.0, c(0.0, 1.0));
        assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        let z = closed_form_identity(0.0, 1.0, 1.0, c(0.0, 1.0));
        assert!((z - c(0.5, 0.5)).norm() < 1e-15);
        let z = closed_form_identity(1.0f32, 1.0, 1.0, Complex::new(0.0, 1.0));
        assert!((z.re - 0.5).abs() < 1e-6);
    }

    #[test]
    fn identity_quadrature_examples() {
        let s = ContourSpec::default();
        for (a, b, e, l) in [
            (1.0, 1.0, 1.0, c(0.0, 1.0)),
            (0.0, 1.0, 1.0, c(0.0, 1.0)),
            (2.0, 0.5, 0.5, c(0.0, 2.0)),
        ] {
            let r = verify_contour_identity(a, b, e, l, &s).unwrap();
            assert!(r.rel_error < 1e-6, "{a} {b} {e} {l}: {}", r.rel_error);
        }
        assert!(verify_contour_identity(1.0, 1.0, 1.0, c(-0.5, 1.0), &s).is_err());
        assert!(verify_contour_identity(1.0, 1.0, 1.0, c(1.0, 0.0), &s).is_err());
    }

    #[test]
    fn diagonal_eigenvalue_factors() {
        let m = OperatorModel::Diagonal(DiagonalModel::from_values(vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap());
        let x = CVec::from_element(2, c(1.0, 0.0));
        let idx = FractionalIndex {
            alpha: 0.5,
            beta: 0.5,
            eta: 1.0,
        };
        let y = contour_fractional_apply(&m, &idx, &x, &ContourSpec::default()).unwrap();
        assert!((y[0] - c(0.5, 0.0)).norm() < 1e-8);
        let idx = FractionalIndex {
            alpha: 1.0,
            beta: 0.5,
            eta: 1.0,
        };
        let y = contour_fractional_apply(&m, &idx, &x, &ContourSpec::default()).unwrap();
        assert!((y[1].re - 2.0 * 3f64.powf(-1.5)).abs() < 1e-8);
    }

    #[test]
    fn alpha_zero_is_shifted_resolvent() {
        let d = DenseModel::from_real(2, &[2.0, 1.0, 0.0, 3.0]).unwrap();
        let m = OperatorModel::Dense(d);
        let x = CVec::from_vec(vec![c(1.0, 0.0), c(-2.0, 1.0)]);
        let idx = FractionalIndex {
            alpha: 0.0,
            beta: 1.0,
            eta: 1.0,
        };
        let y = contour_fractional_apply(&m, &idx, &x, &ContourSpec::default()).unwrap();
        let want = -m.resolvent_apply(c(-1.0, 0.0), &x).unwrap();
        assert!((y - &want).norm() < 1e-8 * want.norm());
    }

    #[test]
    fn phi_identity_and_injectivity() {
        let m = OperatorModel::Dense(DenseModel::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap());
        let x = CVec::from_element(2, c(1.0, 0.0));
        assert_eq!(phi_apply(&m, 0.0, 0.0, &x).unwrap(), x);
        assert!(matches!(phi_apply(&m, 0.5, 0.5, &x), Err(Error::NotInjective(_))));
    }

    #[test]
    fn non_sectorial_model_rejected() {
        let m = OperatorModel::Dense(DenseModel::from_real(1, &[-1.0]).unwrap());
        let x = CVec::from_element(1, c(1.0, 0.0));
        let idx = FractionalIndex {
            alpha: 0.5,
            beta: 0.5,
            eta: 1.0,
        };
        assert!(matches!(
            contour_fractional_apply(&m, &idx, &x, &ContourSpec::default()),
            Err(Error::Contour(_))
        ));
    }
}
