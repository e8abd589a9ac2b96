//! Fermion bilinears stored as one-particle Nambu matrices.
//!
//! With `α = (a_0, …, a_{m-1}, a†_0, …, a†_{m-1})` an operator is
//! `O = ½ α† X α + shift`, where `X = [[A, B], [C, -Aᵀ]]` with `B`, `C`
//! antisymmetric. In normal order this reads
//! `Σ A_pq a†_p a_q + ½ Σ (B_pq a†_p a†_q + C_pq a_p a_q) + constant`
//! with `constant = shift + ½ tr A`.
//!
//! Hermiticity is not assumed: the lattice Virasoro generators are not
//! Hermitian for `k ≠ 0`. Hermitian operators satisfy `X = X†` and a real
//! shift.

use crate::linalg::{self, c, tau_index, CMat, CVec, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticOperator {
    modes: usize,
    x: CMat,
    shift: C64,
}

/// Linear combination `Σ u_i α_i` of Nambu components.
pub type LinearForm = CVec;

pub fn annihilator(modes: usize, j: usize) -> LinearForm {
    let mut u = CVec::zeros(2 * modes);
    u[j] = linalg::ONE;
    u
}

pub fn creator(modes: usize, j: usize) -> LinearForm {
    let mut u = CVec::zeros(2 * modes);
    u[modes + j] = linalg::ONE;
    u
}

/// Hermitian conjugate of a linear form: `(u·α)† = conj(τu)·α`.
pub fn dagger(u: &LinearForm) -> LinearForm {
    let m = u.len() / 2;
    CVec::from_fn(u.len(), |i, _| u[tau_index(i, m)].conj())
}

/// Anticommutator `{u·α, v·α}` (a c-number).
pub fn anticommutator(u: &LinearForm, v: &LinearForm) -> C64 {
    let m = u.len() / 2;
    (0..u.len()).map(|i| u[i] * v[tau_index(i, m)]).sum()
}

impl QuadraticOperator {
    pub fn zero(modes: usize) -> Self {
        Self { modes, x: CMat::zeros(2 * modes, 2 * modes), shift: ZERO }
    }

    pub fn identity(modes: usize) -> Self {
        Self { modes, x: CMat::zeros(2 * modes, 2 * modes), shift: linalg::ONE }
    }

    /// Builds from a Nambu matrix and the Nambu shift. The matrix is projected
    /// onto the particle-hole symmetric form `X = -τXᵀτ`.
    pub fn from_nambu(x: CMat, shift: C64) -> Self {
        let n = x.nrows();
        assert_eq!(n, x.ncols(), "Nambu matrix must be square");
        assert_eq!(n % 2, 0, "Nambu matrix must have even dimension");
        let m = n / 2;
        let mut sym = x.clone();
        for i in 0..n {
            for j in 0..n {
                let mirrored = -x[(tau_index(j, m), tau_index(i, m))];
                sym[(i, j)] = (x[(i, j)] + mirrored) * 0.5;
            }
        }
        Self { modes: m, x: sym, shift }
    }

    /// Builds from normal-ordered blocks; `b` and `cc` must be antisymmetric.
    pub fn from_blocks(a: &CMat, b: &CMat, cc: &CMat, constant: C64) -> Self {
        let m = a.nrows();
        let mut x = CMat::zeros(2 * m, 2 * m);
        x.view_mut((0, 0), (m, m)).copy_from(a);
        x.view_mut((0, m), (m, m)).copy_from(b);
        x.view_mut((m, 0), (m, m)).copy_from(cc);
        x.view_mut((m, m), (m, m)).copy_from(&(-a.transpose()));
        let shift = constant + linalg::trace(a) * 0.5;
        Self::from_nambu(x, shift)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nambu(&self) -> &CMat {
        &self.x
    }

    pub fn shift(&self) -> C64 {
        self.shift
    }

    /// Hopping block `A`.
    pub fn a(&self) -> CMat {
        self.x.view((0, 0), (self.modes, self.modes)).into_owned()
    }

    /// Creation pairing block `B` (coefficient of `½ a†_p a†_q`).
    pub fn b(&self) -> CMat {
        self.x.view((0, self.modes), (self.modes, self.modes)).into_owned()
    }

    /// Annihilation pairing block `C` (coefficient of `½ a_p a_q`).
    pub fn c(&self) -> CMat {
        self.x.view((self.modes, 0), (self.modes, self.modes)).into_owned()
    }

    /// Scalar in normal-ordered form.
    pub fn constant(&self) -> C64 {
        let tr: C64 = (0..self.modes).map(|i| self.x[(i, i)]).sum();
        self.shift - tr * 0.5
    }

    /// Adds `coef · (u·α)(v·α)`.
    pub fn add_product(&mut self, coef: C64, u: &LinearForm, v: &LinearForm) {
        let m = self.modes;
        let n = 2 * m;
        for i in 0..n {
            let tu = u[tau_index(i, m)];
            let tv = v[tau_index(i, m)];
            if tu == ZERO && tv == ZERO {
                continue;
            }
            for j in 0..n {
                let d = tu * v[j] - tv * u[j];
                if d != ZERO {
                    self.x[(i, j)] += coef * d;
                }
            }
        }
        self.shift += coef * 0.5 * anticommutator(u, v);
    }

    /// Adds `coef · (u·α)(v·α) + h.c.`.
    pub fn add_product_hc(&mut self, coef: C64, u: &LinearForm, v: &LinearForm) {
        self.add_product(coef, u, v);
        self.add_product(coef.conj(), &dagger(v), &dagger(u));
    }

    pub fn add_constant(&mut self, z: C64) {
        self.shift += z;
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self { modes: self.modes, x: &self.x * z, shift: self.shift * z }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes, "mode count mismatch");
        Self { modes: self.modes, x: &self.x + &other.x, shift: self.shift + other.shift }
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(c(-1.0, 0.0)))
    }

    /// `[self, other] = ½ α† [X, Y] α`; the commutator carries no c-number.
    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes, "mode count mismatch");
        let xy = linalg::smart_mul(&self.x, &other.x);
        let yx = linalg::smart_mul(&other.x, &self.x);
        Self { modes: self.modes, x: xy - yx, shift: ZERO }
    }

    pub fn adjoint(&self) -> Self {
        Self { modes: self.modes, x: self.x.adjoint(), shift: self.shift.conj() }
    }

    /// Largest entry of `O - O†` in one-particle form, including the scalar.
    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.x).max(self.shift.im.abs())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Largest violation of `B = -Bᵀ`, `C = -Cᵀ` and the Nambu block relation.
    pub fn structure_defect(&self) -> f64 {
        let m = self.modes;
        let mut worst = 0.0_f64;
        for i in 0..2 * m {
            for j in 0..2 * m {
                let mirrored = -self.x[(tau_index(j, m), tau_index(i, m))];
                worst = worst.max((self.x[(i, j)] - mirrored).norm());
            }
        }
        worst
    }

    /// One-particle distance: max entry of the Nambu difference, plus the
    /// difference of normal-ordered constants.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.x, &other.x).max((self.constant() - other.constant()).norm())
    }

    /// Conjugates the mode basis: if `β = W α` with `W` a Nambu-unitary
    /// (Bogoliubov) transformation, returns the Nambu matrix in the `β` basis.
    pub fn in_basis(&self, w: &CMat) -> CMat {
        let wx = linalg::smart_mul(w, &self.x);
        linalg::smart_mul(&wx, &w.adjoint())
    }

    /// Restricts the one-particle matrix by a Nambu projector `P`:
    /// `X ↦ P X P`. Shift is kept only when `keep_shift`.
    pub fn projected(&self, p: &CMat, keep_shift: bool) -> Self {
        let x = p * &self.x * p;
        Self { modes: self.modes, x, shift: if keep_shift { self.shift } else { ZERO } }
    }
}
