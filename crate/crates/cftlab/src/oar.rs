//! Operator-algebraic renormalization: wavelet and momentum scaling maps on
//! bilinears, dual coarse-graining of Gaussian states, and Daubechies
//! scaling functions.
//!
//! A scaling map from a coarse lattice to a finer one is stored as a real or
//! complex isometry `V` (fine modes × coarse modes) sending each coarse
//! annihilator to a combination of fine annihilators:
//! `a_j ↦ Σ_i V_ij a'_i`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::lattice::{self, GaussianState, LatticeSpec};
use crate::linalg::{self, c, cis, CMat, C64, ONE, ZERO};
use crate::quadratic::QuadraticOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OarError {
    #[error("unsupported Daubechies order {0} (supported: 2, 4, 6, 8, 10, 12)")]
    UnsupportedOrder(usize),
    #[error("filter with {taps} taps does not fit on {cells} fine cells")]
    FilterTooWide { taps: usize, cells: usize },
    #[error("scale order violated: cannot map from scale {from} to scale {to}")]
    ScaleOrderViolation { from: u32, to: u32 },
    #[error("cascade did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("cascade resolution {0} exceeds the limit of 16")]
    ResolutionTooHigh(u32),
    #[error("lattices differ in length or sector")]
    IncompatibleLattices,
    #[error("operator has {got} modes, expected {expected}")]
    ModeMismatch { got: usize, expected: usize },
}

pub const SUPPORTED_ORDERS: [usize; 6] = [2, 4, 6, 8, 10, 12];

/// Orthogonal low-pass filter `{c_l}`, `l = 0..K-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    order: usize,
    coeffs: Vec<f64>,
}

impl WaveletFilter {
    pub fn from_coefficients(coeffs: Vec<f64>) -> Self {
        Self { order: coeffs.len(), coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `|Σ c_l - √2|`.
    pub fn sum_defect(&self) -> f64 {
        (self.coeffs.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs()
    }

    /// `max_m |Σ_l c_l c_{l-2m} - δ_{m0}|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.coeffs.len() as i64;
        let mut worst = 0.0_f64;
        let mut m = 0;
        while 2 * m < k {
            let s: f64 = (0..k)
                .filter(|&l| l - 2 * m >= 0)
                .map(|l| self.coeffs[l as usize] * self.coeffs[(l - 2 * m) as usize])
                .sum();
            let target = if m == 0 { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
            m += 1;
        }
        worst
    }

    /// Filter symbol `m_0(ω) = 2^{-1/2} Σ_l c_l e^{-ilω}`, with `m_0(0) = 1`.
    pub fn symbol(&self, omega: f64) -> C64 {
        let s: C64 = self.coeffs.iter().enumerate().map(|(l, &cl)| cis(-(l as f64) * omega) * cl).sum();
        s / std::f64::consts::SQRT_2
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,c_l\n");
        for (l, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!("{l},{c:.17e}\n"));
        }
        s
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Real roots and complex-conjugate pairs of a real polynomial given by
/// ascending coefficients, via companion-matrix eigenvalues.
fn polynomial_roots(coeffs: &[f64]) -> Vec<C64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = nalgebra::DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    comp.complex_eigenvalues().iter().map(|z| C64::new(z.re, z.im)).collect()
}

/// Minimal-phase Daubechies filter with `K/2` vanishing moments, obtained by
/// spectral factorization of `|m_0|² = cos^{K}(ω/2) P(sin²(ω/2))`.
pub fn daubechies_filter(order: usize) -> Result<WaveletFilter, OarError> {
    if !SUPPORTED_ORDERS.contains(&order) {
        return Err(OarError::UnsupportedOrder(order));
    }
    let p = order / 2;
    // P(y) = Σ_{j<p} C(p-1+j, j) y^j
    let pc: Vec<f64> = (0..p).map(|j| binomial(p - 1 + j, j)).collect();
    // each root y of P gives z + 1/z = 2 - 4y; keep the root inside the circle
    let mut zeros: Vec<C64> = Vec::new();
    for y in polynomial_roots(&pc) {
        let b = c(2.0, 0.0) - y * 4.0;
        let disc = (b * b - c(4.0, 0.0)).sqrt();
        let z1 = (b + disc) * 0.5;
        let z2 = (b - disc) * 0.5;
        zeros.push(if z1.norm() < z2.norm() { z1 } else { z2 });
    }
    // polynomial in z: (1 + z)^p Π (z - r)
    let mut poly = vec![ONE];
    let mut mul = |root: C64| {
        let mut next = vec![ZERO; poly.len() + 1];
        for (i, &a) in poly.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * root;
        }
        poly = next;
    };
    for _ in 0..p {
        mul(c(-1.0, 0.0));
    }
    for &r in &zeros {
        mul(r);
    }
    let mut coeffs: Vec<f64> = poly.iter().map(|z| z.re).collect();
    let total: f64 = coeffs.iter().sum();
    for x in coeffs.iter_mut() {
        *x *= std::f64::consts::SQRT_2 / total;
    }
    // largest coefficients first in the minimal-phase ordering
    coeffs.reverse();
    Ok(WaveletFilter { order, coeffs })
}

/// Filter of the two-step map: `h2[p] = Σ_{2l + l' = p} c_l c_{l'}`.
pub fn two_scale_filter(filter: &WaveletFilter) -> Vec<f64> {
    let c = filter.coefficients();
    let mut h = vec![0.0; 3 * (c.len() - 1) + 1];
    for (l, &a) in c.iter().enumerate() {
        for (lp, &b) in c.iter().enumerate() {
            h[2 * l + lp] += a * b;
        }
    }
    h
}

fn check_pair(coarse: &LatticeSpec, fine: &LatticeSpec) -> Result<(), OarError> {
    if (coarse.l() - fine.l()).abs() > 1e-12 || coarse.sector() != fine.sector() {
        return Err(OarError::IncompatibleLattices);
    }
    if fine.sites() <= coarse.sites() {
        return Err(OarError::ScaleOrderViolation {
            from: coarse.scale().unwrap_or(0),
            to: fine.scale().unwrap_or(0),
        });
    }
    Ok(())
}

/// Isometry of a filter with upsampling factor `2^steps`:
/// `ψ^{(j)}_m ↦ Σ_p h[p] ψ^{(j)}_{2^steps m + p}` with the sector sign on wraps.
fn filter_isometry(h: &[f64], steps: u32, coarse: &LatticeSpec, fine: &LatticeSpec) -> Result<CMat, OarError> {
    let fine_cells = fine.sites();
    if h.len() > fine_cells {
        return Err(OarError::FilterTooWide { taps: h.len(), cells: fine_cells });
    }
    let stride = 1usize << steps;
    let mut v = CMat::zeros(fine.modes(), coarse.modes());
    for m in 0..coarse.sites() {
        for (p, &hp) in h.iter().enumerate() {
            let target = stride * m + p;
            let wraps = target / fine_cells;
            let sign = if wraps % 2 == 0 { 1.0 } else { fine.sector().wrap_sign() };
            let cell = target % fine_cells;
            for comp in 0..2 {
                v[(2 * cell + comp, 2 * m + comp)] += c(sign * hp, 0.0);
            }
        }
    }
    Ok(v)
}

/// `V_N` for one wavelet step between `coarse` (scale N) and `fine` (N+1):
/// `α(ψ^{(j)}_x) = Σ_l c_l ψ^{(j)}_{x + l ε_{N+1}}`.
pub fn wavelet_isometry(filter: &WaveletFilter, coarse: &LatticeSpec, fine: &LatticeSpec) -> Result<CMat, OarError> {
    check_pair(coarse, fine)?;
    if fine.sites() != 2 * coarse.sites() {
        return Err(OarError::ScaleOrderViolation {
            from: coarse.scale().unwrap_or(0),
            to: fine.scale().unwrap_or(0),
        });
    }
    filter_isometry(filter.coefficients(), 1, coarse, fine)
}

/// Direct two-step isometry built from [`two_scale_filter`].
pub fn wavelet_two_step_isometry(
    filter: &WaveletFilter,
    coarse: &LatticeSpec,
    fine: &LatticeSpec,
) -> Result<CMat, OarError> {
    check_pair(coarse, fine)?;
    if fine.sites() != 4 * coarse.sites() {
        return Err(OarError::ScaleOrderViolation {
            from: coarse.scale().unwrap_or(0),
            to: fine.scale().unwrap_or(0),
        });
    }
    filter_isometry(&two_scale_filter(filter), 2, coarse, fine)
}

/// Nambu lift `diag(V, V̄)`.
pub fn nambu_lift(v: &CMat) -> CMat {
    let (r, cc) = v.shape();
    let mut out = CMat::zeros(2 * r, 2 * cc);
    out.view_mut((0, 0), (r, cc)).copy_from(v);
    out.view_mut((r, cc), (r, cc)).copy_from(&v.map(|z| z.conj()));
    out
}

/// Image of a bilinear under `a_j ↦ Σ_i V_ij a'_i`: `X ↦ Ṽ̄ X Ṽᵀ`.
pub fn apply_isometry(op: &QuadraticOperator, v: &CMat) -> Result<QuadraticOperator, OarError> {
    if op.modes() != v.ncols() {
        return Err(OarError::ModeMismatch { got: op.modes(), expected: v.ncols() });
    }
    let vt = nambu_lift(v);
    let x = vt.map(|z| z.conj()) * op.nambu() * vt.transpose();
    Ok(QuadraticOperator::from_nambu(x, op.shift()))
}

/// Dual map on states: `Γ ↦ Ṽᵀ Γ Ṽ̄`.
pub fn pull_back_state(state: &GaussianState, v: &CMat) -> Result<GaussianState, OarError> {
    if state.modes() != v.nrows() {
        return Err(OarError::ModeMismatch { got: state.modes(), expected: v.nrows() });
    }
    let vt = nambu_lift(v);
    let cov = vt.transpose() * state.covariance() * vt.map(|z| z.conj());
    Ok(GaussianState::from_covariance(cov))
}

pub fn wavelet_scaling_map(
    filter: &WaveletFilter,
    op: &QuadraticOperator,
    coarse: &LatticeSpec,
    fine: &LatticeSpec,
) -> Result<QuadraticOperator, OarError> {
    apply_isometry(op, &wavelet_isometry(filter, coarse, fine)?)
}

/// Isometry of several consecutive wavelet steps from `coarse` to `fine`.
pub fn wavelet_cascade_isometry(
    filter: &WaveletFilter,
    coarse: &LatticeSpec,
    fine: &LatticeSpec,
) -> Result<CMat, OarError> {
    check_pair(coarse, fine)?;
    let mut cur = coarse.clone();
    let mut v = CMat::identity(coarse.modes(), coarse.modes());
    while cur.sites() < fine.sites() {
        let next = LatticeSpec::with_cells(
            2 * cur.sites(),
            cur.l(),
            cur.mass(),
            cur.sector(),
            lattice::MemoryCap { max_modes: usize::MAX },
        )
        .map_err(|_| OarError::IncompatibleLattices)?;
        v = wavelet_isometry(filter, &cur, &next)? * v;
        cur = next;
    }
    if cur.sites() != fine.sites() {
        return Err(OarError::IncompatibleLattices);
    }
    Ok(v)
}

/// Momentum-space map `α_N^M`: each single-component Fourier mode of the
/// coarse lattice (the full two-component zone `|k| ≤ π L_M / L`) goes to
/// the normalized mode with the same momentum on the fine lattice. For the
/// unnormalized transforms this is the factor `2^{(N-M)/2}`.
pub fn momentum_isometry(coarse: &LatticeSpec, fine: &LatticeSpec) -> Result<CMat, OarError> {
    if coarse.sites() == fine.sites() && coarse.l() == fine.l() && coarse.sector() == fine.sector() {
        return Ok(CMat::identity(coarse.modes(), coarse.modes()));
    }
    check_pair(coarse, fine)?;
    let tc = lattice::fourier_nambu(coarse);
    let tf = lattice::fourier_nambu(fine);
    let (mc, mf) = (coarse.modes(), fine.modes());
    // v_ij = Σ_k conj(F_f[k, i]) F_c[k, j] over coarse momenta k
    let mut v = CMat::zeros(mf, mc);
    for (kc, &k) in coarse.momentum_grid().iter().enumerate() {
        let kf = fine.momentum_index(k).ok_or(OarError::IncompatibleLattices)?;
        for i in 0..mf {
            let a = tf[(kf, i)].conj();
            for j in 0..mc {
                v[(i, j)] += a * tc[(kc, j)];
            }
        }
    }
    Ok(v)
}

/// Amplitude factor of the unnormalized Fourier modes, `2^{(N-M)/2}`.
pub fn momentum_amplitude(m: u32, n: u32) -> Result<f64, OarError> {
    if m > n {
        return Err(OarError::ScaleOrderViolation { from: m, to: n });
    }
    Ok(2f64.powf(0.5 * (n - m) as f64))
}

pub fn momentum_scaling_map(
    coarse: &LatticeSpec,
    fine: &LatticeSpec,
    op: &QuadraticOperator,
) -> Result<QuadraticOperator, OarError> {
    scale_order(coarse, fine)?;
    apply_isometry(op, &momentum_isometry(coarse, fine)?)
}

fn scale_order(coarse: &LatticeSpec, fine: &LatticeSpec) -> Result<(), OarError> {
    if coarse.sites() > fine.sites() {
        return Err(OarError::ScaleOrderViolation {
            from: fine.scale().unwrap_or(0),
            to: coarse.scale().unwrap_or(0),
        });
    }
    Ok(())
}

/// Which renormalization flavour to use for coarse-graining.
#[derive(Debug, Clone, PartialEq)]
pub enum RgScheme {
    Momentum,
    Wavelet(WaveletFilter),
}

/// Schrödinger-picture coarse-graining of a state on `fine` to `coarse`.
pub fn coarse_grain_state(
    state: &GaussianState,
    fine: &LatticeSpec,
    coarse: &LatticeSpec,
    scheme: &RgScheme,
) -> Result<GaussianState, OarError> {
    if coarse.sites() >= fine.sites() {
        return Err(OarError::ScaleOrderViolation {
            from: fine.scale().unwrap_or(0),
            to: coarse.scale().unwrap_or(0),
        });
    }
    let v = match scheme {
        RgScheme::Momentum => momentum_isometry(coarse, fine)?,
        RgScheme::Wavelet(f) => wavelet_cascade_isometry(f, coarse, fine)?,
    };
    pull_back_state(state, &v)
}

/// Dyadic samples of a scaling function and of its Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFunctionSamples {
    pub order: usize,
    pub resolution: u32,
    /// `s(i 2^{-J})` for `i = 0..=(K-1) 2^J`.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// `max |s(x) - √2 Σ c_l s(2x - l)|` on the grid.
    pub residual: f64,
    pub frequencies: Vec<f64>,
    pub fourier: Vec<C64>,
    /// Bound on the error from truncating the infinite product.
    pub product_tail_bound: f64,
}

pub const CASCADE_TOLERANCE: f64 = 1e-8;
pub const CASCADE_MAX_ITERATIONS: usize = 4000;
/// Number of factors kept in `ŝ(ξ) = Π_j m_0(ξ/2^j)`.
pub const PRODUCT_FACTORS: u32 = 25;
/// Frequency window `|ξ| ≤ 2^12` of the stored Fourier samples.
pub const FOURIER_WINDOW: f64 = 4096.0;
/// Fourier samples per `2π`.
pub const FOURIER_SAMPLES_PER_PERIOD: usize = 8;

impl ScalingFunctionSamples {
    pub fn grid(&self) -> Vec<f64> {
        let h = 1.0 / (1u64 << self.resolution) as f64;
        (0..self.values.len()).map(|i| i as f64 * h).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,s\n");
        for (x, v) in self.grid().iter().zip(&self.values) {
            s.push_str(&format!("{x:.10},{v:.17e}\n"));
        }
        s
    }

    pub fn fourier_csv(&self) -> String {
        let mut s = String::from("xi,re,im\n");
        for (x, v) in self.frequencies.iter().zip(&self.fourier) {
            s.push_str(&format!("{x:.10},{:.17e},{:.17e}\n", v.re, v.im));
        }
        s
    }
}

fn refine(filter: &WaveletFilter, s: &[f64], j: u32) -> Vec<f64> {
    let scale = 1usize << j;
    let c = filter.coefficients();
    let n = s.len();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (l, &cl) in c.iter().enumerate() {
                let idx = 2 * i as i64 - (l * scale) as i64;
                if idx >= 0 && (idx as usize) < n {
                    acc += cl * s[idx as usize];
                }
            }
            std::f64::consts::SQRT_2 * acc
        })
        .collect()
}

/// `ŝ(ξ)` from the truncated product of filter symbols.
pub fn scaling_fourier(filter: &WaveletFilter, xi: f64, factors: u32) -> C64 {
    let mut z = ONE;
    let mut w = xi;
    for _ in 0..factors {
        w *= 0.5;
        z *= filter.symbol(w);
    }
    z
}

/// Fixed-point iteration of the refinement operator from the box function.
pub fn cascade(filter: &WaveletFilter, resolution: u32) -> Result<ScalingFunctionSamples, OarError> {
    if resolution > 16 {
        return Err(OarError::ResolutionTooHigh(resolution));
    }
    let scale = 1usize << resolution;
    let n = (filter.order() - 1) * scale + 1;
    let mut s: Vec<f64> = (0..n).map(|i| if i < scale { 1.0 } else { 0.0 }).collect();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < CASCADE_MAX_ITERATIONS {
        let next = refine(filter, &s, resolution);
        residual = next.iter().zip(&s).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        s = next;
        iterations += 1;
        if residual <= CASCADE_TOLERANCE {
            break;
        }
    }
    if residual > CASCADE_TOLERANCE {
        return Err(OarError::NonConvergence { iterations, residual });
    }
    let check = refine(filter, &s, resolution);
    residual = check.iter().zip(&s).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));

    let step = 2.0 * PI / FOURIER_SAMPLES_PER_PERIOD as f64;
    let half = (FOURIER_WINDOW / step).floor() as i64;
    let frequencies: Vec<f64> = (-half..=half).map(|i| i as f64 * step).collect();
    let fourier = frequencies.iter().map(|&x| scaling_fourier(filter, x, PRODUCT_FACTORS)).collect();
    let moment: f64 = filter.coefficients().iter().enumerate().map(|(l, c)| l as f64 * c.abs()).sum();
    let product_tail_bound =
        moment / std::f64::consts::SQRT_2 * FOURIER_WINDOW / 2f64.powi(PRODUCT_FACTORS as i32);
    Ok(ScalingFunctionSamples {
        order: filter.order(),
        resolution,
        values: s,
        iterations,
        residual,
        frequencies,
        fourier,
        product_tail_bound,
    })
}

/// Comparison of a coarse-grained ground state with the ground state built
/// directly on the coarse lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointDeviation {
    /// Largest covariance entry difference in the position basis.
    pub max_deviation: f64,
    /// Largest difference among momentum-basis entries with both momenta in
    /// the lower half of the coarse band, `|k| < π L_M / (2L)`.
    pub band_deviation: f64,
    /// `‖Γ² - Γ‖_max` of the coarse-grained state.
    pub purity_defect: f64,
}

pub fn fixed_point_deviation(
    fine: &LatticeSpec,
    coarse: &LatticeSpec,
    scheme: &RgScheme,
) -> Result<FixedPointDeviation, OarError> {
    let gs_f = lattice::ground_state(fine).map_err(|_| OarError::IncompatibleLattices)?;
    let gs_c = lattice::ground_state(coarse).map_err(|_| OarError::IncompatibleLattices)?;
    let cg = coarse_grain_state(&gs_f, fine, coarse, scheme)?;
    let d = cg.covariance() - gs_c.covariance();
    let t = lattice::fourier_nambu(coarse);
    let dh = t.map(|z| z.conj()) * &d * t.transpose();
    let m = coarse.modes();
    let band = coarse.sites() as f64 / 4.0;
    let inside: Vec<bool> = coarse
        .momentum_grid()
        .iter()
        .map(|&k| coarse.momentum_label(k).abs() < band)
        .collect();
    let mut band_deviation = 0.0_f64;
    for i in 0..2 * m {
        for j in 0..2 * m {
            if inside[i % m] && inside[j % m] {
                band_deviation = band_deviation.max(dh[(i, j)].norm());
            }
        }
    }
    Ok(FixedPointDeviation {
        max_deviation: linalg::max_abs(&d),
        band_deviation,
        purity_defect: cg.purity_defect(),
    })
}
