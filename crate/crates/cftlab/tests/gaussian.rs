mod common;

use cftlab::fock::{self, SparseMatrix};
use cftlab::gaussian::{self, ConformalFlow, GaussianError, Observable};
use cftlab::lattice::{self, build_spec, GaussianState, LatticeSpec, Sector};
use cftlab::linalg::{self, c, CMat, C64};
use cftlab::quadratic::{annihilator, creator, QuadraticOperator};
use cftlab::virasoro::{self, Chirality};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec4() -> LatticeSpec {
    build_spec(1, 1.0, 0.0, Sector::NeveuSchwarz).unwrap()
}

/// Random Hermitian quadratic operator with pairing terms.
fn random_quadratic(modes: usize, rng: &mut ChaCha8Rng) -> QuadraticOperator {
    let mut op = QuadraticOperator::zero(modes);
    for i in 0..modes {
        for j in 0..modes {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            op.add_product_hc(z * 0.5, &creator(modes, i), &annihilator(modes, j));
            if i < j {
                let w = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                op.add_product_hc(w, &creator(modes, i), &creator(modes, j));
            }
        }
    }
    op
}

/// Ground state of a generic quadratic operator, from the negative
/// eigenspace of its Nambu matrix: `Γ = conj(P_-)`.
fn gaussian_ground_state(op: &QuadraticOperator) -> GaussianState {
    let (vals, vecs) = linalg::heigh(op.nambu());
    let n = vals.len();
    let mut p = CMat::zeros(n, n);
    for (e, &v) in vals.iter().enumerate() {
        if v < 0.0 {
            let col = vecs.column(e);
            p += &col * col.adjoint();
        }
    }
    GaussianState::from_covariance(p.map(|z| z.conj()))
}

fn dense_monomial_expectation(modes: usize, idx: &[usize], v: &[C64]) -> C64 {
    common::state_expectation(&fock::monomial_matrix(modes, idx), v)
}

#[test]
fn two_point_is_covariance_entry() {
    let spec = spec4();
    let st = lattice::ground_state(&spec).unwrap();
    let m = spec.modes();
    for p in 0..m {
        for q in 0..m {
            let got = gaussian::expectation(&st, &[Observable::monomial(m, &[m + p, q])]);
            assert!((got - st.covariance()[(p, q)]).norm() < 1e-15);
        }
    }
}

#[test]
fn odd_products_vanish_exactly() {
    let spec = spec4();
    let st = lattice::ground_state(&spec).unwrap();
    let m = spec.modes();
    for idx in [vec![0], vec![1, 2, m + 3], vec![0, 1, 2, 3, m]] {
        assert_eq!(gaussian::expectation(&st, &[Observable::monomial(m, &idx)]), c(0.0, 0.0));
    }
}

#[test]
fn four_point_matches_fock_ground_vector() {
    let spec = spec4();
    let st = lattice::ground_state(&spec).unwrap();
    let (_, v, _) = fock::ground_eigenpair(&common::hamiltonian_fock(&spec));
    let m = spec.modes();
    for (p, q, r, s) in [(0, 1, 2, 3), (0, 3, 5, 2), (7, 7, 1, 6), (2, 5, 4, 0)] {
        let idx = [m + p, q, m + r, s];
        let wick = gaussian::expectation(&st, &[Observable::monomial(m, &idx)]);
        let dense = dense_monomial_expectation(m, &idx, &v);
        assert!((wick - dense).norm() < 1e-10, "{idx:?}: {wick} vs {dense}");
    }
}

#[test]
fn quadratic_products_match_fock() {
    let spec = spec4();
    let st = lattice::ground_state(&spec).unwrap();
    let (_, v, _) = fock::ground_eigenpair(&common::hamiltonian_fock(&spec));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_quadratic(spec.modes(), &mut rng);
    let y = random_quadratic(spec.modes(), &mut rng);
    let (fx, fy) = (fock::fock_matrix(&x), fock::fock_matrix(&y));
    let one = gaussian::expectation(&st, &[Observable::Quadratic(x.clone())]);
    assert!((one - common::state_expectation(&fx, &v)).norm() < 1e-10);
    let two = gaussian::expectation(&st, &[Observable::Quadratic(x.clone()), Observable::Quadratic(y.clone())]);
    assert!((two - common::state_expectation(&fx.mul(&fy), &v)).norm() < 1e-9);
    let m = spec.modes();
    let mixed = gaussian::expectation(&st, &[Observable::monomial(m, &[m + 1, 2]), Observable::Quadratic(x.clone())]);
    let dense = common::state_expectation(&fock::monomial_matrix(m, &[m + 1, 2]).mul(&fx), &v);
    assert!((mixed - dense).norm() < 1e-9);
}

#[test]
fn variance_of_hamiltonian_vanishes_in_ground_state() {
    let spec = build_spec(3, 1.0, 0.4, Sector::NeveuSchwarz).unwrap();
    let st = lattice::ground_state(&spec).unwrap();
    let h = lattice::build_staggered_hamiltonian(&spec);
    assert!(gaussian::variance(&st, &h).abs() < 1e-9);
}

#[test]
fn evolution_at_zero_time_is_identity() {
    let spec = spec4();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_quadratic(spec.modes(), &mut rng);
    let op = random_quadratic(spec.modes(), &mut rng);
    assert!(gaussian::evolve(&op, &g, 0.0).unwrap().distance(&op) < 1e-13);
}

#[test]
fn hamiltonian_is_conserved_by_its_own_flow() {
    let spec = build_spec(2, 1.0, 0.3, Sector::NeveuSchwarz).unwrap();
    let h = lattice::build_staggered_hamiltonian(&spec);
    for t in [0.1, 1.0, 7.5] {
        assert!(gaussian::evolve(&h, &h, t).unwrap().distance(&h) < 1e-10);
    }
}

#[test]
fn evolution_has_group_property() {
    let spec = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let g = virasoro::hermitian_generator(&spec, 2, 0.3, Chirality::Left).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let op = random_quadratic(spec.modes(), &mut rng);
    let back = gaussian::evolve(&gaussian::evolve(&op, &g, 0.8).unwrap(), &g, -0.8).unwrap();
    assert!(back.distance(&op) < 1e-10);
    let u = gaussian::propagator(&g, 0.8).unwrap();
    let id = CMat::identity(u.nrows(), u.nrows());
    assert!(linalg::max_abs_diff(&(u.adjoint() * &u), &id) < 1e-10);
}

#[test]
fn non_hermitian_generator_is_rejected() {
    let spec = spec4();
    let lk = virasoro::koo_saleur(&spec, 1, 0.0, Chirality::Left).unwrap().payload;
    let op = QuadraticOperator::zero(spec.modes());
    assert!(matches!(gaussian::evolve(&op, &lk, 0.5), Err(GaussianError::NonHermitianGenerator(_))));
}

#[test]
fn heisenberg_evolution_matches_dense_exponential() {
    let spec = spec4();
    let m = spec.modes();
    let g = virasoro::hermitian_generator(&spec, 1, 0.0, Chirality::Left).unwrap();
    let gf = fock::fock_matrix(&g).to_dense();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let b = random_quadratic(m, &mut rng);
    let t = 0.7;
    let u = linalg::unitary_exp(&gf, t);
    let bt_dense = u.adjoint() * fock::fock_matrix(&b).to_dense() * &u;
    let bt = gaussian::evolve(&b, &g, t).unwrap();
    assert!(linalg::max_abs_diff(&fock::fock_matrix(&bt).to_dense(), &bt_dense) < 1e-10);
    // monomials evolve through the transposed propagator
    let uo = gaussian::propagator(&g, t).unwrap();
    let mono = Observable::monomial(m, &[m + 2, 5]);
    let evolved = gaussian::evolve_observable(&mono, &uo);
    let mono_dense = u.adjoint() * fock::monomial_matrix(m, &[m + 2, 5]).to_dense() * &u;
    let st = lattice::ground_state(&spec).unwrap();
    let (_, v, _) = fock::ground_eigenpair(&common::hamiltonian_fock(&spec));
    let dense = common::state_expectation(&SparseMatrix::from_dense(&mono_dense), &v);
    assert!((gaussian::expectation(&st, &[evolved]) - dense).norm() < 1e-10);
}

#[test]
fn conformal_correlator_matches_dense_propagator() {
    let spec = spec4();
    let m = spec.modes();
    let st = lattice::ground_state(&spec).unwrap();
    let (_, v, _) = fock::ground_eigenpair(&common::hamiltonian_fock(&spec));
    let a = Observable::monomial(m, &[1, m + 4]);
    let b = Observable::monomial(m, &[m + 3, 6]);
    for k in [0, 1, -1] {
        let g = virasoro::hermitian_generator(&spec, k, 0.0, Chirality::Left).unwrap();
        let gf = fock::fock_matrix(&g).to_dense();
        for t in [0.0, 0.25, 1.0] {
            let u = linalg::unitary_exp(&gf, t);
            let bt = u.adjoint() * fock::monomial_matrix(m, &[m + 3, 6]).to_dense() * &u;
            let op = fock::monomial_matrix(m, &[1, m + 4]).to_dense() * bt;
            let dense = common::state_expectation(&SparseMatrix::from_dense(&op), &v);
            let got = gaussian::conformal_correlator(&spec, &st, &a, &b, ConformalFlow::new(k), t).unwrap();
            assert!((got.norm() - dense.norm()).abs() < 1e-9 && (got - dense).norm() < 1e-9, "k={k} t={t}");
        }
    }
}

#[test]
fn zero_mode_flow_is_half_hamiltonian_evolution() {
    let spec = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let m = spec.modes();
    let st = lattice::ground_state(&spec).unwrap();
    let h = lattice::build_staggered_hamiltonian(&spec);
    let a = Observable::monomial(m, &[3, m + 8]);
    let b = Observable::monomial(m, &[m + 5, 10]);
    let t = 0.6;
    let flow = gaussian::conformal_correlator(&spec, &st, &a, &b, ConformalFlow::new(0), t).unwrap();
    let u = gaussian::propagator(&h, 0.5 * t).unwrap();
    let direct = gaussian::expectation(&st, &[a, gaussian::evolve_observable(&b, &u)]);
    assert!((flow - direct).norm() < 1e-12);
}

#[test]
fn correlator_of_adjoint_pair_is_nonnegative_at_zero_time() {
    let spec = spec4();
    let m = spec.modes();
    let st = lattice::ground_state(&spec).unwrap();
    let a = Observable::monomial(m, &[2, m + 5]);
    let z = gaussian::conformal_correlator(&spec, &st, &a, &a.adjoint(), ConformalFlow::new(1), 0.0).unwrap();
    assert!(z.im.abs() < 1e-14 && z.re >= -1e-14);
}

#[test]
fn correlator_scan_is_ordered_and_exported() {
    let spec = spec4();
    let m = spec.modes();
    let st = lattice::ground_state(&spec).unwrap();
    let a = Observable::monomial(m, &[0, m + 1]);
    let rows = gaussian::correlator_scan(&spec, &st, &a, &a.adjoint(), &[-1, 0, 1], &[0.0, 0.5], 0.0).unwrap();
    let order: Vec<(i64, f64)> = rows.iter().map(|r| (r.k, r.t)).collect();
    assert_eq!(order, vec![(-1, 0.0), (-1, 0.5), (0, 0.0), (0, 0.5), (1, 0.0), (1, 0.5)]);
    let csv = gaussian::correlator_csv(&rows);
    assert!(csv.starts_with("k,t,re,im\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn state_evolution_is_dual_to_heisenberg_evolution() {
    let spec = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let g = virasoro::hermitian_generator(&spec, 3, 1.1, Chirality::Left).unwrap();
    let st = lattice::ground_state(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let o = random_quadratic(spec.modes(), &mut rng);
    let s_t = gaussian::evolve_state(&st, &g, 0.9).unwrap();
    let o_t = gaussian::evolve(&o, &g, 0.9).unwrap();
    let lhs = gaussian::expectation_quadratic(&s_t, &o);
    let rhs = gaussian::expectation_quadratic(&st, &o_t);
    assert!((lhs - rhs).norm() < 1e-10);
    assert!(s_t.purity_defect() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wick_matches_fock_for_random_states(seed in any::<u64>(), modes in 3usize..=5, order in prop::sample::select(vec![4usize, 6])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_quadratic(modes, &mut rng);
        let st = gaussian_ground_state(&h);
        let (_, v, _) = fock::ground_eigenpair(&fock::fock_matrix(&h));
        let idx: Vec<usize> = (0..order).map(|_| rng.random_range(0..2 * modes)).collect();
        let wick = gaussian::expectation(&st, &[Observable::monomial(modes, &idx)]);
        let dense = dense_monomial_expectation(modes, &idx, &v);
        prop_assert!((wick - dense).norm() < 1e-9, "{:?}: {} vs {}", idx, wick, dense);
    }

    #[test]
    fn evolution_preserves_purity(seed in any::<u64>(), t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = gaussian_ground_state(&random_quadratic(4, &mut rng));
        let g = random_quadratic(4, &mut rng);
        let s_t = gaussian::evolve_state(&st, &g, t).unwrap();
        prop_assert!(s_t.purity_defect() < 1e-10);
    }

    #[test]
    fn correlator_is_conjugate_symmetric(seed in any::<u64>(), t in 0.0f64..1.0, k in -1i64..=1) {
        let spec = spec4();
        let m = spec.modes();
        let st = lattice::ground_state(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Observable::Quadratic(random_quadratic(m, &mut rng).scaled(c(0.3, 0.7)));
        let b = Observable::monomial(m, &[rng.random_range(0..2 * m), rng.random_range(0..2 * m)]);
        let g = virasoro::hermitian_generator(&spec, k, 0.0, Chirality::Left).unwrap();
        let u = gaussian::propagator(&g, t).unwrap();
        let bt = gaussian::evolve_observable(&b, &u);
        let lhs = gaussian::expectation(&st, &[a.clone(), bt.clone()]);
        let rhs = gaussian::expectation(&st, &[bt.adjoint(), a.adjoint()]).conj();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }
}
