//! Example values with independent oracles. Frozen numbers were computed
//! separately at 40 digits.

use std::f64::consts::PI;

use semistab::decaylab::*;
use semistab::fraccalc::{phi_scalar, verify_contour_identity, ContourSpec};
use semistab::linalg::{c, CMat, CVec};
use semistab::multiplier::*;
use semistab::numcore::{fit_power_law, geometric_grid, stable_exp_sum};
use semistab::operators::*;
use semistab::resolvent::*;
use semistab::verify::{dense_stable_4, sobolev_model};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn stable_exp_sum_values() {
    assert!(close(stable_exp_sum::<f64>(1).unwrap(), 1.414_213_562_373_095, 1e-14));
    assert!(close(stable_exp_sum::<f64>(2).unwrap(), 3.0, 1e-14));
    let v = stable_exp_sum::<f64>(10).unwrap();
    assert!(close(v, 5301.274_445_941_183, 1e-12));
    let e10 = 10f64.exp();
    assert!(e10 / (10f64.powf(0.25) * 2f64.exp().powi(1)) <= v && v <= e10 / 10f64.powf(0.25));
}

#[test]
fn noisy_power_law() {
    let g = geometric_grid(1.0, 1e3, 60).unwrap();
    let vals: Vec<f64> = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &x): (usize, &f64)| 3.0 * x.powf(1.5) * (1.0 + 1e-6 * ((i * 7919) as f64).sin()))
        .collect();
    let f = fit_power_law(&g, &vals, None).unwrap();
    assert!((f.exponent - 1.5).abs() < 1e-4);
}

#[test]
fn jordan_orbit_of_last_block_vector() {
    let j = JordanSumModel::new(0.5, 0.5, 64).unwrap();
    let n = 40;
    assert_eq!(j.block_size(n), 5);
    let r = j.block_range(n);
    let model = OperatorModel::JordanSum(j.clone());
    let mut x = CVec::zeros(model.dimension());
    x[r.end - 1] = c(1.0, 0.0);
    let y = model.semigroup_apply(2.5, &x).unwrap();
    assert!(close(y.norm(), 1.473_381_506_864_210_5, 1e-12));
    let mut z = CVec::zeros(model.dimension());
    z[r.start] = c(1.0, 0.0);
    let w = model.semigroup_apply(2.5, &z).unwrap();
    assert!(close(w.norm(), (-1.25f64).exp(), 1e-12));
}

#[test]
fn operator_matrix_resolvent_matches_dense_solve() {
    let o = OperatorMatrixModel::discretized(2, vec![0.1, 0.4, 0.7, 0.95]).unwrap();
    let dense = o.to_dense();
    let model = OperatorModel::OperatorMatrix(o);
    let x = CVec::from_fn(model.dimension(), |i, _| c(1.0 + i as f64, -(i as f64) * 0.5));
    for lambda in [c(-1.0, 0.0), c(2.0, 0.5), c(0.5, 1.0)] {
        let got = model.resolvent_apply(lambda, &x).unwrap();
        let n = dense.nrows();
        let m = CMat::identity(n, n) * lambda - &dense;
        let want = m.lu().solve(&x).unwrap();
        assert!((got - &want).norm() <= 1e-12 * want.norm());
    }
}

#[test]
fn operator_matrix_growth() {
    let model = OperatorModel::OperatorMatrix(OperatorMatrixModel::analytic(3, 64).unwrap());
    let g = geometric_grid(10.0, 1e4, 41).unwrap();
    let vals: Vec<f64> = g
        .nodes
        .iter()
        .map(|&t| model.operator_norm(NormMap::Semigroup(t)).unwrap().value)
        .collect();
    let f = fit_power_law(&g, &vals, None).unwrap();
    assert!((f.exponent - 2.0).abs() < 0.05, "{}", f.exponent);
}

#[test]
fn jordan_growth_slope() {
    let j = JordanSumModel::new(0.5, 0.9, 10_000).unwrap();
    let top = j.max_block_size() as f64 - 1.0;
    let model = OperatorModel::JordanSum(j);
    let ts: Vec<f64> = (0..41).map(|i| 1.0 + (top - 1.0) * i as f64 / 40.0).collect();
    let vals: Vec<f64> = ts
        .iter()
        .map(|&t| model.operator_norm(NormMap::Semigroup(t)).unwrap().value)
        .collect();
    let r = semistab::numcore::fit_exponential_rate(&ts, &vals, None).unwrap();
    assert!((r.rate - 0.5).abs() < 0.05, "{}", r.rate);
}

#[test]
fn sobolev_decay_exponents() {
    let model = sobolev_model().unwrap();
    let g = geometric_grid(10.0, 1e5, 41).unwrap();
    for (tau, want) in [(0.0, -0.5), (1.0, 0.0), (2.0, 0.5), (3.0, 1.0)] {
        let m = measure_decay(&model, 0.0, tau, &g).unwrap();
        assert!((m.rho_hat - want).abs() < 0.05, "tau {tau}: {}", m.rho_hat);
    }
}

#[test]
fn jordan_smoothness_threshold() {
    let j = JordanSumModel::new(0.5, 0.9, 10_000).unwrap();
    let top = j.max_block_size() as f64 - 1.0;
    let b0 = j.beta0();
    let tc = j.critical_tau();
    let model = OperatorModel::JordanSum(j);
    let ratio = |tau: f64| {
        let a = model.fractional_norm(5.0, 0.0, tau).unwrap().value;
        let b = model.fractional_norm(top, 0.0, tau).unwrap().value;
        b / a
    };
    assert!(ratio(b0) < 10.0);
    assert!(ratio(0.5 * tc) > 10.0);
}

#[test]
fn phi_of_two() {
    let v = phi_scalar(c(2.0, 0.0), 1.0, 0.5, 1.0);
    assert!((v - c(0.384_900_179_459_750_5, 0.0)).norm() < 1e-14);
}

#[test]
fn contour_identity_examples() {
    let spec = ContourSpec::default();
    let r = verify_contour_identity(1.0, 1.0, 1.0, c(0.0, 1.0), &spec).unwrap();
    assert!((r.closed_form - c(0.5, 0.0)).norm() < 1e-14);
    assert!((r.quadrature - c(0.5, 0.0)).norm() < 1e-6);
    let r = verify_contour_identity(0.0, 1.0, 1.0, c(0.0, 1.0), &spec).unwrap();
    assert!((r.closed_form - c(0.5, 0.5)).norm() < 1e-14);
    let r = verify_contour_identity(2.0, 0.5, 0.5, c(0.0, 2.0), &spec).unwrap();
    assert!(r.rel_error < 1e-6);
}

#[test]
fn jordan_block_neumann_bound() {
    let j = JordanSumModel::new(0.5, 0.5, 200).unwrap();
    let model = OperatorModel::JordanSum(j.clone());
    for z in [c(0.3, 17.0), c(0.0, 64.0), c(1.0, -3.0)] {
        // ||(z + A)^{-1}|| against the per-block Neumann sums
        let v = model.operator_norm(NormMap::Resolvent(-z)).unwrap().value;
        let bound = (j.n0..=j.n_max)
            .map(|n| {
                let w = (z - c(0.0, n as f64) + 0.5).norm();
                (0..j.block_size(n)).map(|k| w.powi(-(k as i32) - 1)).sum::<f64>()
            })
            .fold(0.0, f64::max);
        assert!(v <= bound * (1.0 + 1e-12), "{v} vs {bound}");
    }
}

#[test]
fn growth_profiles() {
    let jm = OperatorModel::JordanSum(JordanSumModel::new(0.5, 0.5, 10_000).unwrap());
    let p = fit_growth_profile(&probe_resolvent_norms(&jm, &geometric_grid(1e-2, 1e4, 97).unwrap(), 0.0)).unwrap();
    assert!((p.beta_hat - 1.0).abs() < 0.1, "{}", p.beta_hat);
    let sm = sobolev_model().unwrap();
    let p = fit_growth_profile(&probe_resolvent_norms(&sm, &geometric_grid(1e-3, 1e3, 97).unwrap(), 0.0)).unwrap();
    assert!((p.beta_hat - 3.0).abs() < 0.1, "{}", p.beta_hat);
    assert_eq!(p.alpha_hat, 0.0);
}

#[test]
fn sector_angle_of_normal_matrix() {
    let theta: f64 = 1.0;
    let mus = [c(1.0, 0.0), c(theta.cos(), theta.sin()) * 3.0, c(theta.cos(), -theta.sin()) * 0.5];
    let d = DenseModel::new(CMat::from_diagonal(&CVec::from_row_slice(&mus))).unwrap();
    let s = sectoriality_constant(&OperatorModel::Dense(d), &geometric_grid(1e-3, 1e3, 121).unwrap()).unwrap();
    assert!(s.angle >= theta - 0.05, "{}", s.angle);
    let s = sectoriality_constant(&sobolev_model().unwrap(), &geometric_grid(1e-3, 1e3, 61).unwrap()).unwrap();
    assert!(s.m.is_finite() && s.m > 0.99, "{}", s.m);
}

#[test]
fn nilpotent_transient_bound() {
    let m = OperatorModel::Dense(DenseModel::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap());
    let ts: Vec<f64> = (0..41).map(|i| 50.0 + 10.0 * i as f64).collect();
    let xi = geometric_grid(1e-2, 1e2, 25).unwrap();
    let b = spectral_bounds(&m, &ts, &[-1.5, -1.0, -0.5, 0.0], &xi, &[0.0]).unwrap();
    assert_eq!(b.s_minus_a, -1.0);
    assert!((b.omega0_hat + 1.0).abs() < 0.05, "{}", b.omega0_hat);
    let t = 3.0;
    let v = m.operator_norm(NormMap::Semigroup(t)).unwrap().value;
    // e^{-t} ||I - tN||, ||[[1,-t],[0,1]]|| = (t + sqrt(t^2+4))/2
    assert!(close(v, (-t).exp() * (t + (t * t + 4.0).sqrt()) / 2.0, 1e-12));
}

fn hilbert_like() -> GeometryDescriptor {
    GeometryDescriptor::hilbert()
}

#[test]
fn predictor_examples() {
    let p = predict_rate_general(0.0, 1.0, 0.0, 3.0);
    assert_eq!(p.rho, Some(1.0));
    assert!(p.strict);
    let p = predict_rate_general(1.0, 0.0, 2.0, 1.5);
    assert_eq!(p.rho, Some(2.0));
    assert!(p.strict);
    let p = predict_rate_fourier_type(0.0, 2.0, 0.0, 4.0, &hilbert_like());
    assert_eq!(p.rho, Some(1.0));
    assert!(!p.strict);
    let p = predict_rate_fourier_type(0.0, 2.0, 0.0, 2.0, &hilbert_like());
    assert_eq!(p.rho, Some(0.0));
    let mut g = hilbert_like();
    g.r_resolvent_growth_asserted = true;
    let tc = predict_rate_type_cotype(0.0, 2.0, 0.0, 4.0, &g);
    let h = predict_rate_fourier_type(0.0, 2.0, 0.0, 4.0, &hilbert_like());
    assert_eq!(tc.rho, h.rho);
    let a = predict_rate_asymptotically_analytic(1.0, 0.7, true);
    assert_eq!(a.rho, Some(0.7));
}

#[test]
fn fourier_type_one_is_general() {
    let g = GeometryDescriptor {
        fourier_type: 1.0,
        type_p: 1.0,
        cotype: f64::INFINITY,
        hilbert: false,
        lattice: None,
        positive_semigroup: false,
        r_resolvent_growth_asserted: false,
    };
    for (a, b, s, t) in [(0.0, 1.0, 0.0, 3.0), (1.0, 2.0, 0.5, 1.0), (0.5, 0.0, 2.0, 0.0)] {
        let x = predict_rate_fourier_type(a, b, s, t, &g);
        let y = predict_rate_general(a, b, s, t);
        assert_eq!(x.rho, y.rho);
        assert_eq!(x.strict, y.strict);
    }
}

#[test]
fn lattice_smaller_than_fourier_type() {
    for u in [3.0, 4.0, 10.0] {
        let g = GeometryDescriptor::lebesgue(u).unwrap();
        let l = g.lattice.unwrap();
        let inv_lattice = 1.0 / l.p_convex - 1.0 / l.q_concave;
        assert!((inv_lattice - (0.5 - 1.0 / u)).abs() < 1e-15);
        let uc = u / (u - 1.0);
        assert!(inv_lattice < 2.0 / u.min(uc) - 1.0);
    }
}

#[test]
fn growth_aware_scaling() {
    let g = predict_rate_growth_aware(0.0, 1.0, 0.0, 3.0, 1.0);
    let s = g.scaling.unwrap();
    assert_eq!(s.rho, Some(2.0));
    assert!(s.log_factor);
    // Hilbert rate tau/beta - 1 beats tau/beta - mu only for mu > 1
    for (mu, want) in [(1.0, false), (1.5, true), (3.0, true)] {
        let g = predict_rate_growth_aware(0.0, 1.0, 0.0, 3.0, mu);
        assert_eq!(g.hilbert_stronger, Some(want), "mu {mu}");
    }
    assert_eq!(predict_rate_growth_aware(1.0, 1.0, 2.0, 3.0, 1.0).hilbert_stronger, None);
}

#[test]
fn interpolation_scaling() {
    let r = interpolate_rates(
        RatePoint { sigma: 0.5, tau: 1.0, rho: 1.0 },
        RatePoint { sigma: 0.0, tau: 0.0, rho: 0.0 },
        2.0,
    )
    .unwrap();
    assert_eq!((r.sigma, r.tau, r.rho), (1.0, 2.0, 2.0));
}

#[test]
fn smoothness_indices() {
    assert_eq!(exponential_smoothness_index(&hilbert_like()).index, 0.0);
    let g = GeometryDescriptor {
        positive_semigroup: true,
        lattice: Some(LatticeGeometry { p_convex: 1.0, q_concave: 4.0 }),
        fourier_type: 1.0,
        type_p: 1.0,
        cotype: f64::INFINITY,
        hilbert: false,
        r_resolvent_growth_asserted: false,
    };
    assert!((exponential_smoothness_index(&g).index - 0.75).abs() < 1e-15);
}

#[test]
fn hilbert_prediction_against_measurement() {
    let model = sobolev_model().unwrap();
    let g = geometric_grid(10.0, 1e5, 41).unwrap();
    let p = predict_rate_fourier_type(0.0, 3.0, 0.0, 6.0, &hilbert_like());
    assert_eq!(p.rho, Some(1.0));
    let m = measure_decay(&model, 0.0, 3.0, &g).unwrap();
    assert!((m.rho_hat - 1.0).abs() < 0.05);
    let r = check_consistency(&m, &p, 0.05);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.margin.abs() < 0.05);
}

fn column(grid: &FourierGridSpec, f: impl Fn(f64) -> f64) -> CMat {
    CMat::from_iterator(grid.samples, 1, grid.times().into_iter().map(|t| c(f(t), 0.0)))
}

#[test]
fn scalar_multiplier_is_causal_convolution() {
    let a = 1.0;
    let grid = FourierGridSpec::new(200.0 / a, 1 << 14).unwrap();
    let f = column(&grid, |t| (-0.5 * (t + 10.0).powi(2)).exp());
    let y = apply_multiplier(&ScalarSymbol(|xi: f64| c(1.0, 0.0) / c(a, xi)), &f, &grid).unwrap();
    // Simpson quadrature of int_0^40 e^{-u} f(s - u) du at grid nodes
    let oracle = |s: f64| {
        let n = 40_000;
        let h = 40.0 / n as f64;
        let g = |u: f64| (-u).exp() * (-0.5 * (s - u + 10.0).powi(2)).exp();
        let mut acc = g(0.0) + g(40.0);
        for i in 1..n {
            acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let mut err = 0.0;
    let mut norm = 0.0;
    for j in (0..grid.samples).step_by(64) {
        let want = oracle(grid.time(j));
        err += (y[(j, 0)] - want).norm_sqr();
        norm += want * want;
    }
    assert!((err / norm).sqrt() < 1e-3, "{}", (err / norm).sqrt());
    // the quadrature itself against the frozen value at s = -10
    assert!((oracle(-10.0) - 0.655_679_542_418_798_5).abs() < 1e-9);
}

#[test]
fn pulse_reproduces_orbit() {
    let model = dense_stable_4().unwrap();
    let grid = FourierGridSpec::new(60.0, 1 << 13).unwrap();
    let x = CVec::from_row_slice(&[c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, -1.0)]);
    let w = 0.02;
    let f = CMat::from_fn(grid.samples, 4, |j, i| {
        x[i] * ((-0.5 * (grid.time(j) / w).powi(2)).exp() / (w * (2.0 * PI).sqrt()))
    });
    for k in 0..3u32 {
        let sk = convolution_s_k(&model, k, &f, &grid).unwrap();
        for s in [0.5, 1.0, 2.0] {
            let j = ((s - grid.time(0)) / grid.dt()).round() as usize;
            let t = grid.time(j);
            let want = model.semigroup_matrix(t).unwrap() * &x * c(t.powi(k as i32), 0.0);
            let got = sk.row(j).transpose();
            assert!((got - &want).norm() < 2e-2 * want.norm().max(1e-3), "k {k} s {s}");
        }
    }
}

#[test]
fn scalar_laplace_identity() {
    let m = DenseModel::from_real(1, &[1.0]).unwrap();
    let grid = FourierGridSpec::new(100.0, 1 << 14).unwrap();
    let x = CVec::from_row_slice(&[c(1.0, 0.0)]);
    for n in [0, 2] {
        let r = verify_laplace_identity(&m, n, &x, &grid).unwrap();
        assert!(r.max_rel_error < 1e-3, "n {n}: {}", r.max_rel_error);
    }
}

#[test]
fn plancherel_and_young_oracles() {
    let grid = FourierGridSpec::new(200.0, 1 << 12).unwrap();
    let sym = ScalarSymbol(|xi: f64| c(1.0, 0.0) / c(1.0, xi));
    let est = estimate_pq_norm_lower(&sym, 2.0, 2.0, &grid, 16, 3).unwrap();
    assert!(est.lower_bound > 0.95 && est.lower_bound <= 1.0 + 1e-9);

    let model = dense_stable_4().unwrap();
    let sym = ResolventPowerSymbol::new(&model, 0);
    let est = estimate_pq_norm_lower(&sym, 1.0, f64::INFINITY, &grid, 16, 3).unwrap();
    let ts: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
    let norms: Vec<f64> = ts.iter().map(|&t| spectral_norm_of(&model.semigroup_matrix(t).unwrap())).collect();
    let sup = norms.iter().cloned().fold(0.0, f64::max);
    let integral = 0.01 * norms.iter().sum::<f64>();
    assert!(est.lower_bound <= sup + 1e-6);
    assert!(est.lower_bound <= integral + 1e-6);
}

fn spectral_norm_of(m: &CMat) -> f64 {
    semistab::linalg::spectral_norm(m)
}

#[test]
fn normal_resolvent_supremum() {
    let d = DenseModel::new(CMat::from_diagonal(&CVec::from_row_slice(&[c(1.0, 2.0), c(0.5, 0.0), c(2.0, -1.0)]))).unwrap();
    let grid = FourierGridSpec::new(200.0, 1 << 12).unwrap();
    let v = exact_l2_norm(&ResolventPowerSymbol::new(&d, 0), &grid).unwrap();
    assert!(close(v, 2.0, 1e-12));
}

#[test]
fn inverse_square_bound() {
    let grid = FourierGridSpec::new(200.0, 1 << 12).unwrap();
    let top = (grid.samples / 2) as f64 * grid.dxi();
    let fc = hilbert_constants(1.0, f64::INFINITY).unwrap();
    assert_eq!(fc, (1.0, 1.0));
    for scale in [1.0, 2.0] {
        let sym = ScalarSymbol(move |xi: f64| c(scale / (1.0 + xi.abs()).powi(2), 0.0));
        let norms: Vec<f64> = sample_symbol(&sym, &grid).unwrap().iter().map(spectral_norm_of).collect();
        let ub = upper_bound_pq_norm_fourier_type(&norms, &grid, 1.0, f64::INFINITY, fc).unwrap();
        // truncated integral of scale (1+|xi|)^{-2} over [-top, top]
        let want = scale * 2.0 * (1.0 - 1.0 / (1.0 + top)) / (2.0 * PI);
        assert!(close(ub, want, 2e-3), "{ub} vs {want}");
        assert!(close(ub, scale / PI, 0.02));
        let est = estimate_pq_norm_lower(&sym, 1.0, f64::INFINITY, &grid, 16, 3).unwrap();
        assert!(est.lower_bound <= ub + 1e-6);
    }
}
