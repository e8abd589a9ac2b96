//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the Hermitian part of `h` is used.
pub fn heigh(h: &CMat) -> (Vec<f64>, CMat) {
    let herm = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.nrows();
    let mut vecs = CMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `exp(-i t h)` for Hermitian `h`, through its eigendecomposition.
pub fn unitary_exp(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = heigh(h);
    let mut scaled = vecs.clone();
    for (j, &w) in vals.iter().enumerate() {
        let ph = cis(-w * t);
        for v in scaled.column_mut(j).iter_mut() {
            *v *= ph;
        }
    }
    scaled * vecs.adjoint()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Product that skips the zero entries of `a`; cheap when `a` is sparse.
pub fn sparse_left_mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..b.ncols() {
                let bkj = b[(k, j)];
                if bkj != ZERO {
                    out[(i, j)] += aik * bkj;
                }
            }
        }
    }
    out
}

pub fn density(m: &CMat) -> f64 {
    let nnz = m.iter().filter(|z| **z != ZERO).count();
    nnz as f64 / (m.nrows() * m.ncols()).max(1) as f64
}

/// Matrix product choosing the sparse kernel when either factor is mostly zero.
pub fn smart_mul(a: &CMat, b: &CMat) -> CMat {
    const SPARSE: f64 = 0.05;
    if a.nrows() >= 64 {
        if density(a) < SPARSE {
            return sparse_left_mul(a, b);
        }
        if density(b) < SPARSE {
            return sparse_left_mul(&b.transpose(), &a.transpose()).transpose();
        }
    }
    a * b
}

/// Pfaffian of a complex antisymmetric matrix by Parlett-Reid elimination
/// with partial pivoting.
pub fn pfaffian(a: &CMat) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "pfaffian needs a square matrix");
    if n == 0 {
        return ONE;
    }
    if n % 2 == 1 {
        return ZERO;
    }
    let mut m = a.clone();
    let mut pf = ONE;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].norm();
        for i in (k + 2)..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if m[(k + 1, k)] == ZERO {
            return ZERO;
        }
        let pivot = m[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<C64> = ((k + 2)..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<C64> = ((k + 2)..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut s = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let aik = a[(i, k)];
            if aik != ZERO {
                s += aik * b[(k, i)];
            }
        }
    }
    s
}

/// Swap of the two halves of a Nambu index set: `i <-> i ± m`.
#[inline]
pub fn tau_index(i: usize, m: usize) -> usize {
    if i < m {
        i + m
    } else {
        i - m
    }
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfaffian_of_two_by_two_is_upper_entry() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = c(1.5, -0.5);
        a[(1, 0)] = -a[(0, 1)];
        assert!((pfaffian(&a) - c(1.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let n = 6;
        let mut a = CMat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = c((i * 3 + j) as f64 * 0.37 - 1.0, (j * 5 + i) as f64 * 0.11 - 0.4);
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&a);
        let det = a.clone().determinant();
        assert!((pf * pf - det).norm() < 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn unitary_exp_is_unitary() {
        let h = CMat::from_fn(5, 5, |i, j| {
            if i == j {
                c(i as f64, 0.0)
            } else if i < j {
                c(0.3, 0.1 * (i + j) as f64)
            } else {
                c(0.3, -0.1 * (i + j) as f64)
            }
        });
        let u = unitary_exp(&h, 0.7);
        let id = CMat::identity(5, 5);
        assert!(max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn sparse_kernel_matches_dense() {
        let mut a = CMat::zeros(70, 70);
        for i in 0..70 {
            a[(i, (i + 1) % 70)] = c(1.0, 0.5);
        }
        let b = CMat::from_fn(70, 70, |i, j| c((i + 2 * j) as f64, (i as f64) - (j as f64)));
        assert!(max_abs_diff(&smart_mul(&a, &b), &(&a * &b)) < 1e-9);
        assert!(max_abs_diff(&smart_mul(&b, &a), &(&b * &a)) < 1e-9);
    }
}
