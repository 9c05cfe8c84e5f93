use proptest::prelude::*;

use semistab::decaylab::*;
use semistab::fraccalc::{contour_fractional_apply, phi_scalar, ContourSpec, FractionalIndex};
use semistab::linalg::{c, spectral_norm, CMat, CVec};
use semistab::multiplier::*;
use semistab::numcore::{fit_power_law, geometric_grid};
use semistab::operators::*;
use semistab::resolvent::*;

fn dense_from(entries: &[f64], n: usize, shift: f64) -> DenseModel {
    let mut a = CMat::from_fn(n, n, |i, j| c(entries[i * n + j], entries[n * n + i * n + j]));
    for i in 0..n {
        a[(i, i)] += c(shift, 0.0);
    }
    DenseModel::new(a).unwrap()
}

fn stable_dense() -> impl Strategy<Value = DenseModel> {
    (2usize..5).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |e| dense_from(&e, n, 2.0 * n as f64))
    })
}

fn index() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), Just(2.0), 0.0f64..4.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_law(m in stable_dense(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let a = m.semigroup_matrix(s).unwrap() * m.semigroup_matrix(t).unwrap();
        let b = m.semigroup_matrix(s + t).unwrap();
        prop_assert!((a - &b).norm() <= 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn resolvent_identity(m in stable_dense(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let (l1, l2) = (c(1.0, x), c(0.5, y));
        let r1 = m.resolvent_matrix(l1).unwrap();
        let r2 = m.resolvent_matrix(l2).unwrap();
        let lhs = &r1 - &r2;
        let rhs = (&r1 * &r2) * (l2 - l1);
        prop_assert!((lhs - &rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn resolvent_norm_dominates_inverse_distance(m in stable_dense(), x in -10.0f64..10.0, eta in -1.0f64..3.0) {
        let model = OperatorModel::Dense(m.clone());
        let lambda = c(eta, x);
        let v = model.operator_norm(NormMap::Resolvent(lambda)).unwrap().value;
        prop_assert!(v >= 1.0 / m.dist_to_spectrum(lambda) - 1e-8);
    }

    #[test]
    fn contour_matches_diagonal(v in prop::collection::vec((0.05f64..20.0, -2.0f64..2.0), 1..5),
                                alpha in 0.0f64..2.0, beta in 0.2f64..2.0) {
        let vals: Vec<_> = v.iter().map(|&(r, i)| c(r, i * r.min(1.0))).collect();
        let model = OperatorModel::Diagonal(DiagonalModel::from_values(vals.clone()).unwrap());
        let x = CVec::from_element(vals.len(), c(1.0, 0.0));
        let idx = FractionalIndex { alpha, beta, eta: 1.0 };
        let got = contour_fractional_apply(&model, &idx, &x, &ContourSpec::default()).unwrap();
        for (k, &mu) in vals.iter().enumerate() {
            let want = phi_scalar(mu, alpha, beta, 1.0);
            prop_assert!((got[k] - want).norm() <= 1e-7 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn predictors_monotone(a in index(), b in index(), s in index(), t in index(), d in 0.0f64..1.0, p in 1.0f64..=2.0) {
        let g = GeometryDescriptor { fourier_type: p, ..GeometryDescriptor::lebesgue(2.0 / p).unwrap() };
        let base = rank(predict_rate_fourier_type(a, b, s, t, &g).rho);
        prop_assert!(rank(predict_rate_fourier_type(a, b, s + d, t, &g).rho) >= base);
        prop_assert!(rank(predict_rate_fourier_type(a, b, s, t + d, &g).rho) >= base);
        prop_assert!(rank(predict_rate_fourier_type(a + d, b, s, t, &g).rho) <= base);
        prop_assert!(rank(predict_rate_fourier_type(a, b + d, s, t, &g).rho) <= base);
        let gen = rank(predict_rate_general(a, b, s, t).rho);
        prop_assert!(rank(predict_rate_general(a, b, s + d, t).rho) >= gen);
        prop_assert!(rank(predict_rate_general(a, b, s, t + d).rho) >= gen);
    }

    #[test]
    fn fourier_type_one_is_general(a in index(), b in index(), s in index(), t in index()) {
        let g = GeometryDescriptor {
            fourier_type: 1.0,
            type_p: 1.0,
            cotype: f64::INFINITY,
            hilbert: false,
            lattice: None,
            positive_semigroup: false,
            r_resolvent_growth_asserted: false,
        };
        let x = predict_rate_fourier_type(a, b, s, t, &g);
        let y = predict_rate_general(a, b, s, t);
        prop_assert_eq!(x.rho, y.rho);
        prop_assert_eq!(x.strict, y.strict);
    }

    #[test]
    fn hilbert_branch_dominates(a in index(), b in index(), s in index(), t in index(), u in 1.0f64..8.0) {
        let h = rank(predict_rate_fourier_type(a, b, s, t, &GeometryDescriptor::hilbert()).rho);
        let g = GeometryDescriptor::lebesgue(u).unwrap();
        prop_assert!(rank(predict_rate_general(a, b, s, t).rho) <= h);
        prop_assert!(rank(predict_rate_fourier_type(a, b, s, t, &g).rho) <= h);
        let mut gr = g;
        gr.r_resolvent_growth_asserted = true;
        prop_assert!(rank(predict_rate_type_cotype(a, b, s, t, &gr).rho) <= h);
    }

    #[test]
    fn power_fit_exact(e in -4.0f64..4.0, k in 0.1f64..10.0) {
        let g = geometric_grid(1.0f64, 1e4, 33).unwrap();
        let vals: Vec<f64> = g.nodes.iter().map(|&x| k * x.powf(e)).collect();
        let f = fit_power_law(&g, &vals, None).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-9);
        let fine = g.refined();
        let vals: Vec<f64> = fine.nodes.iter().map(|&x| k * x.powf(e)).collect();
        let f2 = fit_power_law(&fine, &vals, None).unwrap();
        prop_assert!((f2.exponent - f.exponent).abs() < 1e-9);
    }

    #[test]
    fn dft_round_trip_and_parseval(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)) {
        let grid = FourierGridSpec::new(8.0, 64).unwrap();
        let f = CMat::from_iterator(64, 1, v.iter().map(|&(a, b)| c(a, b)));
        let spec = forward(&f, &grid).unwrap();
        let back = inverse_transform(&spec, &grid).unwrap();
        prop_assert!((&back - &f).norm() <= 1e-12 * (1.0 + f.norm()));
        let lhs = grid.dt() * f.norm_squared();
        let rhs = grid.dxi() / (2.0 * std::f64::consts::PI) * spec.norm_squared();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lower_bound_below_upper(m in stable_dense(), seed in 0u64..1000) {
        let grid = FourierGridSpec::new(100.0, 1 << 10).unwrap();
        let sym = ResolventPowerSymbol::new(&m, 0);
        let norms: Vec<f64> = sample_symbol(&sym, &grid).unwrap().iter().map(spectral_norm).collect();
        for &(p, q) in &[(2.0, 2.0), (1.0, f64::INFINITY), (1.5, 3.0)] {
            let lo = estimate_pq_norm_lower(&sym, p, q, &grid, 4, seed).unwrap().lower_bound;
            let ub = upper_bound_pq_norm_fourier_type(&norms, &grid, p, q, hilbert_constants(p, q).unwrap()).unwrap();
            prop_assert!(lo <= ub + 1e-6, "({p},{q}): {lo} > {ub}");
        }
    }

    #[test]
    fn growth_constant_stable_under_refinement(shift in 0.5f64..3.0, skew in -2.0f64..2.0) {
        let model = OperatorModel::Dense(DenseModel::from_real(2, &[shift, skew, 0.0, shift + 1.0]).unwrap());
        let g = geometric_grid(1e-2, 1e2, 33).unwrap();
        let p1 = fit_growth_profile(&probe_resolvent_norms(&model, &g, 0.0)).unwrap();
        let p2 = fit_growth_profile(&probe_resolvent_norms(&model, &g.refined(), 0.0)).unwrap();
        prop_assert!((p1.m_constant - p2.m_constant).abs() <= 0.05 * p1.m_constant);
    }
}
