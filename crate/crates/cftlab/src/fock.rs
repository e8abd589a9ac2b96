//! Brute-force Fock-space representation, used only as an oracle.
//!
//! Basis state `s` has mode `j` occupied iff bit `j` of `s` is set. Fermion
//! signs follow `a_j |s⟩ = (-1)^{#occupied modes below j} |s - e_j⟩`.

use std::collections::BTreeMap;

use crate::linalg::{CMat, C64, ONE, ZERO};
use crate::quadratic::QuadraticOperator;

/// Largest mode count accepted by the oracle.
pub const MAX_FOCK_MODES: usize = 14;

/// Row-compressed complex matrix with deterministic entry order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, rows: (0..dim).map(|i| vec![(i, ONE)]).collect() }
    }

    /// Accumulates `(row, col, value)` triplets; duplicates add up.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (i, j, z) in triplets {
            *acc[i].entry(j).or_insert(ZERO) += z;
        }
        let rows = acc
            .into_iter()
            .map(|r| r.into_iter().filter(|(_, z)| *z != ZERO).collect())
            .collect();
        Self { dim, rows }
    }

    pub fn from_dense(m: &CMat) -> Self {
        let dim = m.nrows();
        let trip = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).filter_map(|(i, j)| {
            let z = m[(i, j)];
            (z != ZERO).then_some((i, j, z))
        });
        Self::from_triplets(dim, trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, z)| (i, j, z)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[i].iter().find(|(c, _)| *c == j).map(|(_, z)| *z).unwrap_or(ZERO)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            rows: self.rows.iter().map(|r| r.iter().map(|&(j, z)| (j, z * s)).collect()).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-ONE))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(i, j, z)| (j, i, z.conj())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut rows = Vec::with_capacity(self.dim);
        for r in &self.rows {
            let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
            for &(k, a) in r {
                for &(j, b) in &other.rows[k] {
                    *acc.entry(j).or_insert(ZERO) += a * b;
                }
            }
            rows.push(acc.into_iter().filter(|(_, z)| *z != ZERO).collect());
        }
        Self { dim: self.dim, rows }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).minus(&other.mul(self))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        self.rows.iter().map(|r| r.iter().map(|&(j, z)| z * v[j]).sum()).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.minus(other).triplets().fold(0.0, |acc, (_, _, z)| acc.max(z.norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().fold(0.0, |acc, (_, _, z)| acc.max(z.norm()))
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (i, j, z) in self.triplets() {
            m[(i, j)] += z;
        }
        m
    }

    /// `⟨u|M|v⟩`.
    pub fn braket(&self, u: &[C64], v: &[C64]) -> C64 {
        let mv = self.apply(v);
        u.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

fn sign_below(state: usize, j: usize) -> f64 {
    if (state & ((1usize << j) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_j` acting on basis state `s`: `None` if mode `j` is empty.
pub fn annihilate(s: usize, j: usize) -> Option<(usize, f64)> {
    if s & (1 << j) == 0 {
        None
    } else {
        Some((s ^ (1 << j), sign_below(s, j)))
    }
}

/// `a†_j` acting on basis state `s`: `None` if mode `j` is full.
pub fn create(s: usize, j: usize) -> Option<(usize, f64)> {
    if s & (1 << j) != 0 {
        None
    } else {
        Some((s | (1 << j), sign_below(s, j)))
    }
}

fn check_modes(modes: usize) -> usize {
    assert!(modes <= MAX_FOCK_MODES, "Fock oracle limited to {MAX_FOCK_MODES} modes");
    1usize << modes
}

pub fn annihilation_matrix(modes: usize, j: usize) -> SparseMatrix {
    let dim = check_modes(modes);
    SparseMatrix::from_triplets(
        dim,
        (0..dim).filter_map(|s| annihilate(s, j).map(|(t, sg)| (t, s, C64::new(sg, 0.0)))),
    )
}

pub fn creation_matrix(modes: usize, j: usize) -> SparseMatrix {
    annihilation_matrix(modes, j).adjoint()
}

/// Matrix of the Nambu component `α_i`.
pub fn nambu_matrix(modes: usize, i: usize) -> SparseMatrix {
    if i < modes {
        annihilation_matrix(modes, i)
    } else {
        creation_matrix(modes, i - modes)
    }
}

/// `(-1)^F`.
pub fn parity_matrix(modes: usize) -> SparseMatrix {
    let dim = check_modes(modes);
    SparseMatrix::from_triplets(
        dim,
        (0..dim).map(|s| (s, s, C64::new(if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0))),
    )
}

/// Fock matrix of a quadratic operator, built from its normal-ordered blocks.
pub fn fock_matrix(op: &QuadraticOperator) -> SparseMatrix {
    let m = op.modes();
    let dim = check_modes(m);
    let (a, b, cc) = (op.a(), op.b(), op.c());
    let constant = op.constant();
    let mut trip = Vec::new();
    let nz = |mat: &CMat| -> Vec<(usize, usize, C64)> {
        let mut v = Vec::new();
        for p in 0..m {
            for q in 0..m {
                if mat[(p, q)].norm() > 0.0 {
                    v.push((p, q, mat[(p, q)]));
                }
            }
        }
        v
    };
    let (an, bn, cn) = (nz(&a), nz(&b), nz(&cc));
    for s in 0..dim {
        if constant != ZERO {
            trip.push((s, s, constant));
        }
        for &(p, q, z) in &an {
            if let Some((t, s1)) = annihilate(s, q) {
                if let Some((u, s2)) = create(t, p) {
                    trip.push((u, s, z * s1 * s2));
                }
            }
        }
        for &(p, q, z) in &bn {
            if let Some((t, s1)) = create(s, q) {
                if let Some((u, s2)) = create(t, p) {
                    trip.push((u, s, z * 0.5 * s1 * s2));
                }
            }
        }
        for &(p, q, z) in &cn {
            if let Some((t, s1)) = annihilate(s, q) {
                if let Some((u, s2)) = annihilate(t, p) {
                    trip.push((u, s, z * 0.5 * s1 * s2));
                }
            }
        }
    }
    SparseMatrix::from_triplets(dim, trip)
}

/// Fock matrix of a monomial `α_{i_1} α_{i_2} ⋯` in Nambu indices.
pub fn monomial_matrix(modes: usize, indices: &[usize]) -> SparseMatrix {
    let dim = check_modes(modes);
    let mut out = SparseMatrix::identity(dim);
    for &i in indices {
        out = out.mul(&nambu_matrix(modes, i));
    }
    out
}

/// Lowest eigenpair of a Hermitian sparse matrix via dense diagonalization.
pub fn ground_eigenpair(h: &SparseMatrix) -> (f64, Vec<C64>, Vec<f64>) {
    let (vals, vecs) = crate::linalg::heigh(&h.to_dense());
    let v: Vec<C64> = vecs.column(0).iter().cloned().collect();
    (vals[0], v, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::quadratic::{annihilator, creator};

    #[test]
    fn car_relations_hold() {
        let m = 3;
        for i in 0..m {
            for j in 0..m {
                let ai = annihilation_matrix(m, i);
                let aj = creation_matrix(m, j);
                let ac = ai.mul(&aj).plus(&aj.mul(&ai));
                let expect = if i == j { SparseMatrix::identity(8) } else { SparseMatrix::zeros(8) };
                assert!(ac.max_abs_diff(&expect) < 1e-15);
            }
        }
    }

    #[test]
    fn quadratic_operator_matches_product_of_matrices() {
        let m = 3;
        let mut op = QuadraticOperator::zero(m);
        op.add_product(c(0.7, 0.2), &creator(m, 0), &annihilator(m, 2));
        op.add_product(c(-0.3, 1.1), &annihilator(m, 1), &annihilator(m, 0));
        op.add_product(c(0.5, 0.0), &annihilator(m, 1), &creator(m, 1));
        let direct = creation_matrix(m, 0)
            .mul(&annihilation_matrix(m, 2))
            .scaled(c(0.7, 0.2))
            .plus(&annihilation_matrix(m, 1).mul(&annihilation_matrix(m, 0)).scaled(c(-0.3, 1.1)))
            .plus(&annihilation_matrix(m, 1).mul(&creation_matrix(m, 1)).scaled(c(0.5, 0.0)));
        assert!(fock_matrix(&op).max_abs_diff(&direct) < 1e-14);
    }
}
