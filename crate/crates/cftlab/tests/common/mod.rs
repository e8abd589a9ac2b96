#![allow(dead_code)]

use cftlab::fock::{self, SparseMatrix};
use cftlab::lattice::LatticeSpec;
use cftlab::linalg::{c, C64};

/// `ψ^{(comp)}_m` (or its adjoint) written directly as a Fock matrix.
pub fn psi_fock(spec: &LatticeSpec, comp: u8, m: i64, dag: bool) -> SparseMatrix {
    let cells = spec.sites() as i64;
    let modes = spec.modes();
    let site = m.rem_euclid(cells) as usize;
    let outside = !(0..cells).contains(&m);
    let sign = if outside { spec.sector().wrap_sign() } else { 1.0 };
    let j = 2 * site + (comp as usize - 1);
    let base = match (comp, dag) {
        (1, false) | (2, true) => fock::annihilation_matrix(modes, j),
        _ => fock::creation_matrix(modes, j),
    };
    base.scaled(c(sign, 0.0))
}

/// Lattice Hamiltonian expanded term by term on Fock space.
pub fn hamiltonian_fock(spec: &LatticeSpec) -> SparseMatrix {
    let dim = 1usize << spec.modes();
    let pref = spec.l() / (std::f64::consts::PI * spec.spacing());
    let mut h = SparseMatrix::zeros(dim);
    for m in 0..spec.sites() as i64 {
        let t1 = psi_fock(spec, 1, m + 1, true).mul(&psi_fock(spec, 2, m, false));
        let t2 = psi_fock(spec, 1, m, true).mul(&psi_fock(spec, 2, m, false));
        let hop = t1.minus(&t2);
        h = h.plus(&hop).plus(&hop.adjoint());
        let n1 = psi_fock(spec, 1, m, true).mul(&psi_fock(spec, 1, m, false));
        let n2 = psi_fock(spec, 2, m, true).mul(&psi_fock(spec, 2, m, false));
        h = h.plus(&n1.minus(&n2).scaled(c(spec.mass(), 0.0)));
    }
    h.scaled(c(pref, 0.0))
}

/// Footnote density modes `H_k` on Fock space (half the printed density).
pub fn density_modes_fock(spec: &LatticeSpec, k: f64) -> SparseMatrix {
    let dim = 1usize << spec.modes();
    let pref = 0.5 * spec.l() / (std::f64::consts::PI * spec.spacing());
    let mut h = SparseMatrix::zeros(dim);
    for (m, x) in spec.site_grid().into_iter().enumerate() {
        let m = m as i64;
        let t = psi_fock(spec, 1, m + 1, true)
            .mul(&psi_fock(spec, 2, m, false))
            .minus(&psi_fock(spec, 1, m, true).mul(&psi_fock(spec, 2, m, false)))
            .plus(&psi_fock(spec, 2, m - 1, true).mul(&psi_fock(spec, 1, m, false)))
            .minus(&psi_fock(spec, 2, m, true).mul(&psi_fock(spec, 1, m, false)));
        let dens = t.plus(&t.adjoint());
        h = h.plus(&dens.scaled(C64::from_polar(pref, k * x)));
    }
    h
}

pub fn state_expectation(op: &SparseMatrix, v: &[C64]) -> C64 {
    op.braket(v, v)
}
