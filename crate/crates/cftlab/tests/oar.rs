use cftlab::lattice::{build_spec, ground_state, Sector};
use cftlab::linalg::{self, CMat};
use cftlab::oar::{self, OarError, RgScheme};
use cftlab::quadratic::{annihilator, creator, QuadraticOperator};
use cftlab::linalg::c;

fn d4_reference() -> Vec<f64> {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
}

#[test]
fn haar_and_d4_coefficients() {
    let h = oar::daubechies_filter(2).unwrap();
    for x in h.coefficients() {
        assert!((x - 0.5f64.sqrt()).abs() < 1e-15);
    }
    let d4 = oar::daubechies_filter(4).unwrap();
    for (a, b) in d4.coefficients().iter().zip(d4_reference()) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}

#[test]
fn filters_are_orthonormal_with_vanishing_moments() {
    for k in oar::SUPPORTED_ORDERS {
        let f = oar::daubechies_filter(k).unwrap();
        assert_eq!(f.coefficients().len(), k);
        assert!(f.sum_defect() < 1e-12, "K={k}");
        assert!(f.orthonormality_defect() < 1e-12, "K={k}");
        // Σ (-1)^l l^p c_l = 0 for p < K/2
        for p in 0..k / 2 {
            let m: f64 = f
                .coefficients()
                .iter()
                .enumerate()
                .map(|(l, c)| if l % 2 == 0 { 1.0 } else { -1.0 } * (l as f64).powi(p as i32) * c)
                .sum();
            assert!(m.abs() < 1e-9 * 10f64.powi(p as i32), "K={k} p={p} m={m}");
        }
    }
}

#[test]
fn unsupported_orders_are_rejected() {
    for k in [0, 1, 3, 14] {
        assert_eq!(oar::daubechies_filter(k), Err(OarError::UnsupportedOrder(k)));
    }
}

#[test]
fn wavelet_isometry_is_isometric_and_composes() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        for k in [2, 4, 6] {
            let f = oar::daubechies_filter(k).unwrap();
            let a = build_spec(2, 1.0, 0.0, sector).unwrap();
            let b = build_spec(3, 1.0, 0.0, sector).unwrap();
            let cc = build_spec(4, 1.0, 0.0, sector).unwrap();
            let v1 = oar::wavelet_isometry(&f, &a, &b).unwrap();
            let v2 = oar::wavelet_isometry(&f, &b, &cc).unwrap();
            let id = CMat::identity(a.modes(), a.modes());
            assert!(linalg::max_abs_diff(&(v1.adjoint() * &v1), &id) < 1e-13);
            let direct = oar::wavelet_two_step_isometry(&f, &a, &cc).unwrap();
            assert!(linalg::max_abs_diff(&(&v2 * &v1), &direct) < 1e-13);
        }
    }
}

#[test]
fn filter_wider_than_lattice_is_rejected() {
    let f = oar::daubechies_filter(6).unwrap();
    let a = build_spec(0, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let b = build_spec(1, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    assert!(matches!(oar::wavelet_isometry(&f, &a, &b), Err(OarError::FilterTooWide { .. })));
}

#[test]
fn momentum_fixed_point_is_exact() {
    let fine = build_spec(6, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let coarse = build_spec(4, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let d = oar::fixed_point_deviation(&fine, &coarse, &RgScheme::Momentum).unwrap();
    assert!(d.max_deviation < 1e-10, "{d:?}");
    assert!(d.purity_defect < 1e-10);
}

#[test]
fn massive_ground_state_is_not_fixed() {
    let fine = build_spec(5, 1.0, 1.0, Sector::NeveuSchwarz).unwrap();
    let coarse = build_spec(3, 1.0, 1.0, Sector::NeveuSchwarz).unwrap();
    let d = oar::fixed_point_deviation(&fine, &coarse, &RgScheme::Momentum).unwrap();
    assert!(d.max_deviation > 1e-3, "{d:?}");
}

#[test]
fn wavelet_fixed_point_improves_with_order() {
    let fine = build_spec(6, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let coarse = build_spec(5, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for k in oar::SUPPORTED_ORDERS {
        let f = oar::daubechies_filter(k).unwrap();
        let d = oar::fixed_point_deviation(&fine, &coarse, &RgScheme::Wavelet(f)).unwrap();
        assert!(d.band_deviation < last.0, "K={k} {d:?}");
        assert!(d.purity_defect < last.1, "K={k} {d:?}");
        last = (d.band_deviation, d.purity_defect);
    }
    assert!(last.0 < 0.05);
}

#[test]
fn scale_order_is_enforced() {
    let a = build_spec(3, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let b = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let op = QuadraticOperator::zero(a.modes());
    assert!(matches!(oar::momentum_scaling_map(&a, &b, &op), Err(OarError::ScaleOrderViolation { .. })));
    assert!(matches!(oar::momentum_amplitude(4, 2), Err(OarError::ScaleOrderViolation { .. })));
    assert!((oar::momentum_amplitude(2, 6).unwrap() - 4.0).abs() < 1e-15);
}

#[test]
fn number_operator_maps_to_projected_number_operator() {
    let f = oar::daubechies_filter(2).unwrap();
    let a = build_spec(1, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let b = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let mut n = QuadraticOperator::zero(a.modes());
    for j in 0..a.modes() {
        n.add_product(c(1.0, 0.0), &creator(a.modes(), j), &annihilator(a.modes(), j));
    }
    let img = oar::wavelet_scaling_map(&f, &n, &a, &b).unwrap();
    let v = oar::wavelet_isometry(&f, &a, &b).unwrap();
    let p = &v * v.adjoint();
    assert!(linalg::max_abs_diff(&img.a(), &p) < 1e-14);
    assert!(img.b().iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn haar_cascade_is_the_box() {
    let f = oar::daubechies_filter(2).unwrap();
    let s = oar::cascade(&f, 8).unwrap();
    let g = s.grid();
    for (x, v) in g.iter().zip(&s.values) {
        let expect = if *x < 1.0 { 1.0 } else { 0.0 };
        assert!((v - expect).abs() < 1e-12);
    }
}

#[test]
fn cascade_converges_and_integrates_to_one() {
    for k in oar::SUPPORTED_ORDERS {
        let f = oar::daubechies_filter(k).unwrap();
        let s = oar::cascade(&f, 10).unwrap();
        assert!(s.residual <= 1e-8, "K={k} residual {}", s.residual);
        let h = 1.0 / 1024.0;
        let integral: f64 = s.values.iter().sum::<f64>() * h;
        assert!((integral - 1.0).abs() < 1e-6, "K={k} integral {integral}");
        for (xi, z) in s.frequencies.iter().zip(&s.fourier) {
            let m = xi / (2.0 * std::f64::consts::PI);
            if (m.round() - m).abs() < 1e-9 && m.round() != 0.0 && m.abs() <= 2.0 {
                assert!(z.norm() < 1e-12, "K={k} xi={xi}");
            }
            if *xi == 0.0 {
                assert!((z - c(1.0, 0.0)).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn cascade_resolution_limit() {
    let f = oar::daubechies_filter(4).unwrap();
    assert_eq!(oar::cascade(&f, 17).unwrap_err(), OarError::ResolutionTooHigh(17));
}

#[test]
fn ground_state_survives_wavelet_coarse_graining_as_valid_state() {
    let f = oar::daubechies_filter(4).unwrap();
    let fine = build_spec(4, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let coarse = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let gs = ground_state(&fine).unwrap();
    let cg = oar::coarse_grain_state(&gs, &fine, &coarse, &RgScheme::Wavelet(f)).unwrap();
    // Hermitian with spectrum in [0, 1]
    let (vals, _) = linalg::heigh(cg.covariance());
    assert!(vals.iter().all(|&x| x > -1e-12 && x < 1.0 + 1e-12));
}
