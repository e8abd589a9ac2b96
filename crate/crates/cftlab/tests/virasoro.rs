mod common;

use cftlab::fock;
use cftlab::gaussian;
use cftlab::lattice::{self, build_spec, Sector};
use cftlab::linalg::{self, c, C64, I};
use cftlab::virasoro::{self, CentralSector, Chirality, VirasoroError};
use proptest::prelude::*;

fn ns(n: u32) -> cftlab::LatticeSpec {
    build_spec(n, 1.0, 0.0, Sector::NeveuSchwarz).unwrap()
}

#[test]
fn zero_density_mode_is_the_hamiltonian() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        for n in 0..4 {
            let spec = build_spec(n, 1.0, 0.0, sector).unwrap();
            let h0 = virasoro::hamiltonian_density_modes(&spec, 0).unwrap();
            let h = lattice::build_staggered_hamiltonian(&spec);
            assert!(h0.distance(&h) < 1e-12);
        }
    }
}

#[test]
fn density_modes_are_mutually_adjoint() {
    let spec = ns(2);
    for k in 1..4 {
        let hk = virasoro::hamiltonian_density_modes(&spec, k).unwrap();
        let hmk = virasoro::hamiltonian_density_modes(&spec, -k).unwrap();
        assert!(hk.adjoint().distance(&hmk) < 1e-12);
    }
}

#[test]
fn density_mode_matches_fock_construction() {
    let spec = ns(1);
    for k in [-1, 1] {
        let hk = virasoro::hamiltonian_density_modes(&spec, k).unwrap();
        let oracle = common::density_modes_fock(&spec, k as f64 * std::f64::consts::PI);
        assert!(fock::fock_matrix(&hk).max_abs_diff(&oracle) < 1e-12);
    }
}

#[test]
fn massive_density_is_rejected() {
    let spec = build_spec(2, 1.0, 0.5, Sector::NeveuSchwarz).unwrap();
    assert_eq!(
        virasoro::hamiltonian_density_modes(&spec, 1).unwrap_err(),
        VirasoroError::MassiveDensityUnsupported(0.5)
    );
    assert!(virasoro::koo_saleur(&spec, 1, 0.0, Chirality::Left).is_err());
}

#[test]
fn nyquist_bound_is_enforced() {
    let spec = ns(2);
    assert!(virasoro::koo_saleur(&spec, 3, 0.0, Chirality::Left).is_ok());
    for k in [4, -4, 9] {
        assert!(matches!(
            virasoro::koo_saleur(&spec, k, 0.0, Chirality::Left),
            Err(VirasoroError::NyquistViolation { .. })
        ));
        assert!(virasoro::koo_saleur_momentum_block(&spec, k).is_err());
    }
}

#[test]
fn zero_mode_is_half_hamiltonian_plus_offset() {
    let spec = ns(3);
    let h = lattice::build_staggered_hamiltonian(&spec);
    for cc in [0.0, 0.5, 1.0] {
        let g = virasoro::koo_saleur(&spec, 0, cc, Chirality::Left).unwrap();
        assert!(g.payload.is_hermitian(1e-12));
        let mut expect = h.scaled(c(0.5, 0.0));
        expect.add_constant(c(cc / 24.0, 0.0));
        assert!(g.payload.distance(&expect) < 1e-12);
    }
}

#[test]
fn koo_saleur_adjoint_relation() {
    for n in 1..5 {
        let spec = ns(n);
        let bound = spec.cells_per_half() as i64;
        for k in 1..bound.min(5) {
            for chir in [Chirality::Left, Chirality::Right] {
                let lk = virasoro::koo_saleur(&spec, k, 0.0, chir).unwrap().payload;
                let lmk = virasoro::koo_saleur(&spec, -k, 0.0, chir).unwrap().payload;
                assert!(lk.adjoint().distance(&lmk) < 1e-10, "N={n} k={k}");
            }
            let bk = virasoro::koo_saleur_momentum_block(&spec, k).unwrap();
            let bmk = virasoro::koo_saleur_momentum_block(&spec, -k).unwrap();
            assert!(bk.adjoint().distance(&bmk) < 1e-10);
        }
    }
}

#[test]
fn commutator_and_block_forms_agree() {
    for n in 1..=4 {
        let spec = ns(n);
        let bound = spec.cells_per_half() as i64;
        for k in -4i64..=4 {
            if k == 0 || k.abs() >= bound {
                continue;
            }
            let ks = virasoro::koo_saleur(&spec, k, 0.0, Chirality::Left).unwrap().payload;
            let block = virasoro::koo_saleur_momentum_block(&spec, k).unwrap();
            assert!(ks.distance(&block) < 1e-10, "N={n} k={k}: {}", ks.distance(&block));
        }
    }
}

#[test]
fn block_kernel_on_the_diagonal_at_zero_momentum() {
    let eps = 0.37;
    for l in [-2.5, 0.5, 1.5, 7.5] {
        let m = virasoro::block_kernel(eps, 0.0, l, l);
        let s = (eps * l).sin();
        let h = (eps * l / 2.0).sin();
        let expect = [[c(-s, 0.0) * 0.5, -I * h], [I * h, c(-s, 0.0) * 0.5]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((m[a][b] - expect[a][b]).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn chiral_zero_modes_add_up_to_the_hamiltonian() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        let spec = build_spec(3, 1.0, 0.0, sector).unwrap();
        let l0 = virasoro::koo_saleur_momentum_block(&spec, 0).unwrap();
        let lb0 = virasoro::right_zero_block(&spec).unwrap();
        let h = lattice::build_staggered_hamiltonian(&spec);
        let sum = l0.plus(&lb0);
        // additive convention: compare without the scalar part
        let diff = linalg::max_abs_diff(sum.nambu(), h.nambu());
        assert!(diff < 1e-12, "{sector:?}: {diff}");
        let herm = virasoro::hermitian_generator(&spec, 0, 0.0, Chirality::Left).unwrap();
        let avg = sum.scaled(c(0.5, 0.0));
        assert!(linalg::max_abs_diff(avg.nambu(), herm.nambu()) < 1e-12);
    }
}

#[test]
fn spatial_parity_commutes_with_hamiltonian() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        let spec = build_spec(2, 1.0, 0.0, sector).unwrap();
        let p = virasoro::spatial_parity(&spec);
        let h = lattice::build_staggered_hamiltonian(&spec);
        let x = h.nambu();
        assert!(linalg::max_abs_diff(&(&p * x), &(x * &p)) < 1e-12);
    }
}

#[test]
fn vacuum_expectation_of_first_generator_vanishes() {
    // translation by one cell maps L_1 to a phase times itself, so the value
    // is zero at every N rather than decaying
    for n in 2..=7 {
        let spec = ns(n);
        let st = lattice::ground_state(&spec).unwrap();
        let l1 = virasoro::koo_saleur_momentum_block(&spec, 1).unwrap();
        assert!(gaussian::expectation_quadratic(&st, &l1).norm() < 1e-10, "N={n}");
    }
}

#[test]
fn non_central_commutators_vanish_in_the_vacuum() {
    let spec = ns(4);
    let st = lattice::ground_state(&spec).unwrap();
    for (k, l) in [(1i64, 2i64), (2, 1), (3, -1), (-2, 3)] {
        let lk = virasoro::koo_saleur(&spec, k, 0.0, Chirality::Left).unwrap().payload;
        let ll = virasoro::koo_saleur(&spec, l, 0.0, Chirality::Left).unwrap().payload;
        let lkl = virasoro::koo_saleur(&spec, k + l, 0.0, Chirality::Left).unwrap().payload;
        let r = lk.commutator(&ll).minus(&lkl.scaled(c((k - l) as f64, 0.0)));
        assert!(gaussian::expectation_quadratic(&st, &r).norm() < 1e-10);
    }
}

#[test]
fn central_charge_half_converges() {
    let mut last = f64::INFINITY;
    for n in 3..=6 {
        let est = virasoro::central_charge_estimate(&ns(n), 2, CentralSector::Half).unwrap();
        let dev = (est.projected - 0.5).abs();
        assert!(dev < last, "N={n}: {dev}");
        last = dev;
    }
    assert!(last < 0.5);
}

#[test]
fn central_charge_dirac_and_defining_sectors() {
    let est = virasoro::central_charge_estimate(&ns(5), 3, CentralSector::One).unwrap();
    assert!((est.projected - 1.0).abs() < 0.05, "{est:?}");
    let zero = virasoro::central_charge_estimate(&ns(6), 2, CentralSector::Zero).unwrap();
    assert!(zero.projected.abs() < 1e-2);
}

#[test]
fn central_charge_is_even_in_k() {
    let spec = ns(4);
    for sector in [CentralSector::Half, CentralSector::One] {
        let a = virasoro::central_charge_estimate(&spec, 3, sector).unwrap();
        let b = virasoro::central_charge_estimate(&spec, -3, sector).unwrap();
        assert!((a.projected - b.projected).abs() < 1e-10);
        assert!((a.raw - b.raw).abs() < 1e-10);
    }
}

#[test]
fn central_charge_preconditions() {
    let spec = ns(3);
    for k in [-1, 0, 1] {
        assert_eq!(
            virasoro::central_charge_estimate(&spec, k, CentralSector::Half).unwrap_err(),
            VirasoroError::UndefinedForUnitK(k)
        );
    }
    let r = build_spec(3, 1.0, 0.0, Sector::Ramond).unwrap();
    assert_eq!(
        virasoro::central_charge_estimate(&r, 2, CentralSector::Half).unwrap_err(),
        VirasoroError::NeedsNeveuSchwarz
    );
    assert_eq!("c12".parse::<CentralSector>().unwrap(), CentralSector::Half);
    assert!("c3".parse::<CentralSector>().is_err());
}

#[test]
fn continuum_block_zero_mode_counts_momentum() {
    let b = virasoro::continuum_virasoro_block(0, 3, 0.0);
    for (i, &r) in b.labels().iter().enumerate() {
        assert_eq!(b.matrix()[(i, i)], c(r, 0.0));
    }
}

#[test]
fn continuum_block_adjoint_and_mobius_relation() {
    let m = 4;
    for k in 1..5 {
        let b = virasoro::continuum_virasoro_block(k, m, 0.5);
        let bm = virasoro::continuum_virasoro_block(-k, m, 0.5);
        assert!(linalg::max_abs_diff(&b.matrix().adjoint(), bm.matrix()) < 1e-15);
    }
    let b1 = virasoro::continuum_virasoro_block(1, m, 0.5);
    let bm1 = virasoro::continuum_virasoro_block(-1, m, 0.5);
    let b0 = virasoro::continuum_virasoro_block(0, m, 0.5);
    let comm = b1.matrix() * bm1.matrix() - bm1.matrix() * b1.matrix();
    let n = b0.labels().len();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let want = b0.matrix()[(i, j)] * 2.0;
            assert!((comm[(i, j)] - want).norm() < 1e-10);
        }
    }
}

#[test]
fn continuum_block_virasoro_commutator_on_interior() {
    let m = 4;
    let top = (1 << m) as f64;
    for (k, l) in [(2i64, -1i64), (3, 1), (-2, -1), (2, -2)] {
        let bk = virasoro::continuum_virasoro_block(k, m, 1.0);
        let bl = virasoro::continuum_virasoro_block(l, m, 1.0);
        let bkl = virasoro::continuum_virasoro_block(k + l, m, 1.0);
        let comm = bk.matrix() * bl.matrix() - bl.matrix() * bk.matrix();
        let labels = bk.labels();
        let margin = (k.abs() + l.abs()) as f64;
        for (i, &ri) in labels.iter().enumerate() {
            for (j, &rj) in labels.iter().enumerate() {
                if ri.abs() < top - margin && rj.abs() < top - margin {
                    let want: C64 = bkl.matrix()[(i, j)] * (k - l) as f64;
                    assert!((comm[(i, j)] - want).norm() < 1e-10, "({k},{l}) at ({ri},{rj})");
                }
            }
        }
    }
}

#[test]
fn generator_csv_lists_block_entries() {
    let spec = ns(1);
    let l1 = virasoro::koo_saleur_momentum_block(&spec, 1).unwrap();
    let csv = virasoro::generator_csv(&spec, &l1);
    assert!(csv.starts_with("block,l_prime,l,re,im\n"));
    assert!(csv.lines().count() > 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn adjoint_relation_holds_everywhere(n in 1u32..=4, k in 1i64..8, phase in -3.0f64..3.0) {
        let spec = ns(n);
        prop_assume!((k as f64) < spec.cells_per_half());
        let lk = virasoro::koo_saleur(&spec, k, 0.0, Chirality::Left).unwrap().payload;
        let lmk = virasoro::koo_saleur(&spec, -k, 0.0, Chirality::Left).unwrap().payload;
        prop_assert!(lk.adjoint().distance(&lmk) < 1e-10);
        let g = virasoro::hermitian_generator(&spec, k, phase, Chirality::Left).unwrap();
        prop_assert!(g.is_hermitian(1e-10));
    }
}
