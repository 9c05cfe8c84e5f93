//! Dense complex linear algebra: matrix exponential, spectral norms,
//! eigen-decomposition and linear solves.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn scale(m: &CMat, s: f64) -> CMat {
    m.map(|z| z * s)
}

fn expm_pade(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scale(a, 0.5f64.powi(s));
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]))
        + scale(&a6, b[7])
        + scale(&a4, b[5])
        + scale(&a2, b[3])
        + scale(&id, b[1]);
    let u = &a * u_inner;
    let v = &a6 * (scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]))
        + scale(&a6, b[6])
        + scale(&a4, b[4])
        + scale(&a2, b[2])
        + scale(&id, b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn mat_pow(m: &CMat, mut k: u64) -> CMat {
    let n = m.nrows();
    let mut out = CMat::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            out = &out * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    out
}

/// `exp(a)` by Pade(13) scaling and squaring; arguments with 1-norm above
/// 1e3 are split into equal substeps.
pub fn expm(a: &CMat) -> Result<CMat> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("matrix exponential of non-finite matrix".into()));
    }
    let nrm = norm1(a);
    if nrm > 1e3 {
        let k = (nrm / 1e3).ceil() as u64;
        let step = expm_pade(&scale(a, 1.0 / k as f64))?;
        Ok(mat_pow(&step, k))
    } else {
        expm_pade(a)
    }
}

pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    if a.nrows() == 1 || a.ncols() == 1 {
        return a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Largest singular value with its right singular vector.
pub fn top_singular(a: &CMat) -> (f64, CVec) {
    let svd = SVD::new(a.clone(), false, true);
    let (mut k, mut best) = (0, -1.0);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > best {
            best = s;
            k = i;
        }
    }
    let vt = svd.v_t.expect("requested");
    let v = vt.row(k).adjoint();
    (best, v)
}

pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    Schur::try_new(a.clone(), 1e-15, 100_000)
        .map(|s| s.unpack())
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    if a.nrows() == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let (_, t) = schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    pub vectors: CMat,
    pub inverse: CMat,
    pub condition: f64,
}

/// Eigenvectors by back substitution on the triangular Schur factor.
pub fn eigen_decomposition(a: &CMat) -> Result<EigenDecomposition> {
    let n = a.nrows();
    let (q, t) = if n == 1 {
        (CMat::identity(1, 1), a.clone())
    } else {
        schur(a)?
    };
    let tn = norm1(&t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tn;
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let lk = t[(k, k)];
        y[(k, k)] = c(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = c(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut d = t[(j, j)] - lk;
            if d.norm() < small {
                d = c(small, 0.0);
            }
            y[(j, k)] = -s / d;
        }
        let nrm = y.column(k).norm();
        y.column_mut(k).unscale_mut(nrm);
    }
    let vectors = q * y;
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvector matrix is singular".into()))?;
    let condition = spectral_norm(&vectors) * spectral_norm(&inverse);
    Ok(EigenDecomposition {
        values: (0..n).map(|i| t[(i, i)]).collect(),
        vectors,
        inverse,
        condition,
    })
}

impl EigenDecomposition {
    /// `V f(D) V^{-1}`.
    pub fn apply_fn<F: Fn(C64) -> C64>(&self, f: F) -> CMat {
        let mut vd = self.vectors.clone();
        for (j, &mu) in self.values.iter().enumerate() {
            let fj = f(mu);
            for i in 0..vd.nrows() {
                vd[(i, j)] *= fj;
            }
        }
        vd * &self.inverse
    }
}

pub fn solve(a: &CMat, b: &CVec) -> Option<CVec> {
    a.clone().lu().solve(b)
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

/// Smallest singular value.
pub fn min_singular(a: &CMat) -> f64 {
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_scalar_and_nilpotent() {
        let a = CMat::from_element(1, 1, c(-1.0, 0.0));
        assert!((expm(&a).unwrap()[(0, 0)].re - (-1f64).exp()).abs() < 1e-15);
        let mut n = CMat::zeros(3, 3);
        n[(0, 1)] = c(1.0, 0.0);
        n[(1, 2)] = c(1.0, 0.0);
        let e = expm(&scale(&n, 2.0)).unwrap();
        assert!((e[(0, 2)].re - 2.0).abs() < 1e-14);
        assert!((e[(0, 1)].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn expm_rotation_large_argument() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = c(-1.0, 0.0);
        a[(1, 0)] = c(1.0, 0.0);
        let t = 5000.0;
        let e = expm(&scale(&a, t)).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-9);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-9);
    }

    #[test]
    fn eigen_roundtrip() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(1.0, 0.5),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(3.0, 1.0),
                c(1.0, 0.0),
                c(0.5, 0.0),
                c(0.0, 0.0),
                c(1.0, -1.0),
            ],
        );
        let e = eigen_decomposition(&a).unwrap();
        let back = e.apply_fn(|z| z);
        assert!((back - &a).norm() < 1e-12 * a.norm());
    }
}
