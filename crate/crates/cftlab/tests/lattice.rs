mod common;

use cftlab::fock;
use cftlab::gaussian;
use cftlab::lattice::{self, build_spec, LatticeError, LatticeSpec, MemoryCap, Parity, Sector};
use cftlab::linalg::{self, c};
use std::f64::consts::PI;

#[test]
fn spec_sizes_follow_scale() {
    let s = build_spec(0, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    assert_eq!(s.sites(), 2);
    assert_eq!(s.momentum_grid().len(), 4);
    let s = build_spec(6, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    assert_eq!(s.sites(), 128);
    assert!((s.spacing() * s.cells_per_half() - s.l()).abs() < 1e-15);
    assert_eq!(s.momentum_grid().len(), s.modes());
}

#[test]
fn neveu_schwarz_grid_is_half_integer() {
    let s = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    for k in s.momentum_grid() {
        let lbl = s.momentum_label(k);
        assert!((lbl - lbl.floor() - 0.5).abs() < 1e-12, "{lbl}");
        assert!(k.abs() <= PI / s.fine_spacing() + 1e-12);
    }
    let r = s.with_sector(Sector::Ramond);
    let g = r.momentum_grid();
    assert!(g.iter().any(|&k| k == 0.0));
    assert!((g.last().unwrap() - PI / r.fine_spacing()).abs() < 1e-12);
}

#[test]
fn memory_cap_rejects_large_scales() {
    let cap = MemoryCap { max_modes: 64 };
    assert!(lattice::build_spec_with_cap(4, 1.0, 0.0, Sector::NeveuSchwarz, cap).is_ok());
    assert!(matches!(
        lattice::build_spec_with_cap(5, 1.0, 0.0, Sector::NeveuSchwarz, cap),
        Err(LatticeError::ExceedsMemoryCap { modes: 128, cap: 64 })
    ));
    assert!(build_spec(1, -1.0, 0.0, Sector::Ramond).is_err());
}

#[test]
fn config_round_trip_and_diagnostics() {
    let s = build_spec(3, 2.0, 0.25, Sector::Ramond).unwrap();
    let back = LatticeSpec::from_config_str(&s.to_config_string()).unwrap();
    assert_eq!(s, back);
    let err = LatticeSpec::from_config_str("N = 2\n# comment\nlambda = x\n").unwrap_err();
    assert!(matches!(err, LatticeError::Config { line: 3, .. }), "{err}");
    let err = LatticeSpec::from_config_str("N = 2\nmass = 1\n").unwrap_err();
    assert!(err.to_string().contains("unknown key 'mass'"));
}

#[test]
fn hamiltonian_matches_term_by_term_expansion() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        for lambda in [0.0, 1.0, -0.4] {
            let spec = build_spec(1, 1.0, lambda, sector).unwrap();
            let h = lattice::build_staggered_hamiltonian(&spec);
            assert!(h.is_hermitian(1e-12));
            assert!(h.structure_defect() < 1e-14);
            let oracle = common::hamiltonian_fock(&spec);
            assert!(fock::fock_matrix(&h).max_abs_diff(&oracle) < 1e-12, "{sector:?} {lambda}");
        }
    }
}

#[test]
fn mass_term_is_staggered() {
    let spec = build_spec(1, 1.0, 1.0, Sector::NeveuSchwarz).unwrap();
    let massless = lattice::build_staggered_hamiltonian(&spec.with_mass(0.0));
    let massive = lattice::build_staggered_hamiltonian(&spec);
    let d = massive.minus(&massless);
    let p = spec.hamiltonian_prefactor();
    let a = d.a();
    for j in 0..spec.modes() {
        // ψ¹ sits on even modes; ψ²ψ²† = 1 - a†a on odd modes gives +λ too
        assert!((a[(j, j)] - c(p, 0.0)).norm() < 1e-13);
    }
    assert!((d.constant() - c(-p * spec.sites() as f64, 0.0)).norm() < 1e-12);
}

#[test]
fn diagonalization_reconstructs_hamiltonian() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        for lambda in [0.0, 0.7, -1.3] {
            for n in 0..5 {
                let spec = build_spec(n, 1.0, lambda, sector).unwrap();
                let data = lattice::diagonalize(&spec);
                let h = lattice::build_staggered_hamiltonian(&spec);
                let err = data.reconstruction_error(&spec, &h);
                assert!(err < 1e-10, "{sector:?} λ={lambda} N={n}: {err}");
                assert!(data.omega.iter().all(|&w| w >= 0.0));
            }
        }
    }
}

#[test]
fn one_particle_spectrum_matches_dense_eigensolve() {
    let spec = build_spec(2, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let h = lattice::build_staggered_hamiltonian(&spec);
    let (vals, _) = linalg::heigh(h.nambu());
    let data = lattice::diagonalize(&spec);
    let mut expect: Vec<f64> = data.omega.iter().flat_map(|&w| [w, -w]).collect();
    expect.sort_by(f64::total_cmp);
    for (a, b) in vals.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(data.min_omega() > 0.0);
    for (i, &j) in data.partner.iter().enumerate() {
        assert!((data.omega[i] - data.omega[j]).abs() < 1e-12);
    }
}

#[test]
fn ramond_massless_has_zero_mode_and_needs_parity() {
    let spec = build_spec(2, 1.0, 0.0, Sector::Ramond).unwrap();
    let data = lattice::diagonalize(&spec);
    let k0 = spec.momentum_index(0.0).unwrap();
    assert!(data.zero_modes.contains(&k0));
    assert!(matches!(lattice::ground_state(&spec), Err(LatticeError::DegenerateGroundState { zero_modes: 2 })));
    let h = lattice::build_staggered_hamiltonian(&spec);
    for parity in [Parity::Even, Parity::Odd] {
        let st = lattice::ground_state_with_parity(&spec, parity).unwrap();
        assert!((st.parity() - parity.sign() as f64).abs() < 1e-10);
        let e = gaussian::expectation_quadratic(&st, &h).re;
        assert!((e - data.offset).abs() < 1e-10);
    }
}

#[test]
fn ground_energy_matches_fock_diagonalization() {
    for sector in [Sector::NeveuSchwarz, Sector::Ramond] {
        for lambda in [0.0, 0.5, -0.8] {
            let spec = build_spec(1, 1.0, lambda, sector).unwrap();
            let data = lattice::diagonalize(&spec);
            let (e0, _, _) = fock::ground_eigenpair(&common::hamiltonian_fock(&spec));
            assert!((e0 - data.offset).abs() < 1e-10, "{sector:?} {lambda}: {e0} vs {}", data.offset);
        }
    }
    let spec = build_spec(1, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let data = lattice::diagonalize(&spec);
    let half_sum: f64 = 0.5 * data.omega.iter().sum::<f64>();
    assert!((data.offset + half_sum).abs() < 1e-12);
}

#[test]
fn ground_state_is_pure_eigenstate() {
    for lambda in [0.0, 0.3] {
        let spec = build_spec(2, 1.0, lambda, Sector::NeveuSchwarz).unwrap();
        let st = lattice::ground_state(&spec).unwrap();
        assert!(st.is_pure(1e-10));
        assert!(st.occupations().iter().all(|&x| x > -1e-10 && x < 1.0 + 1e-10));
        let h = lattice::build_staggered_hamiltonian(&spec);
        let data = lattice::diagonalize(&spec);
        assert!((gaussian::expectation_quadratic(&st, &h).re - data.offset).abs() < 1e-10);
        assert!(gaussian::variance(&st, &h).abs() < 1e-9);
        assert!((st.parity() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ground_state_matches_fock_ground_vector() {
    let spec = build_spec(1, 1.0, 0.4, Sector::NeveuSchwarz).unwrap();
    let st = lattice::ground_state(&spec).unwrap();
    let (_, v, _) = fock::ground_eigenpair(&common::hamiltonian_fock(&spec));
    let m = spec.modes();
    for i in 0..2 * m {
        for j in 0..2 * m {
            let op = fock::nambu_matrix(m, linalg::tau_index(i, m)).mul(&fock::nambu_matrix(m, j));
            let dense = common::state_expectation(&op, &v);
            assert!((dense - st.covariance()[(i, j)]).norm() < 1e-10);
        }
    }
}

#[test]
fn equal_time_pairing_matches_continuum_kernel() {
    // ⟨a†_i a†_j⟩ = 1 / (M sin(π (j - i) / M)) for odd j - i, zero otherwise
    for n in 1..5 {
        let spec = build_spec(n, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
        let st = lattice::ground_state(&spec).unwrap();
        let m = spec.modes();
        for i in 0..m {
            for j in 0..m {
                let p = j as f64 - i as f64;
                let expect = if (j + m - i) % 2 == 1 { 1.0 / (m as f64 * (PI * p / m as f64).sin()) } else { 0.0 };
                let got = st.pair(m + i, m + j);
                assert!((got - c(expect, 0.0)).norm() < 1e-12, "N={n} ({i},{j}): {got} vs {expect}");
            }
        }
    }
}

#[test]
fn covariance_csv_has_momentum_header() {
    let spec = build_spec(0, 1.0, 0.0, Sector::NeveuSchwarz).unwrap();
    let st = lattice::ground_state(&spec).unwrap();
    let csv = lattice::covariance_csv(&spec, &st);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "row_op,row_k_over_pi_L,col_op,col_k_over_pi_L,re,im");
    assert!(lines.count() >= 4);
}
