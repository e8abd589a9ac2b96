//! Koo-Saleur lattice Virasoro generators, their momentum-space block form,
//! continuum reference blocks and central-charge estimates.
//!
//! Momenta are passed as integers in units of π/L.

use std::f64::consts::PI;
use std::str::FromStr;

use thiserror::Error;

use crate::lattice::{self, GaussianState, LatticeSpec, Sector, StaggeredField};
use crate::linalg::{self, c, cis, CMat, C64, I, ONE, ZERO};
use crate::quadratic::{annihilator, creator, QuadraticOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VirasoroError {
    #[error("the Hamiltonian density is only defined for λ = 0 (got {0})")]
    MassiveDensityUnsupported(f64),
    #[error("|k| = {k} π/L is not below the Nyquist bound {bound} π/L")]
    NyquistViolation { k: i64, bound: f64 },
    #[error("central charge estimate is undefined for |k| <= 1 (got k = {0})")]
    UndefinedForUnitK(i64),
    #[error("central charge estimate needs the Neveu-Schwarz sector")]
    NeedsNeveuSchwarz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    Left,
    Right,
}

/// Which realization of the free-fermion CFT is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CentralSector {
    /// Defining representation on the ψ Fock vacuum.
    Zero,
    /// Real chiral component, obtained by a Majorana sublattice projection.
    Half,
    /// Complex (Dirac) fermion.
    One,
}

impl CentralSector {
    pub fn value(self) -> f64 {
        match self {
            CentralSector::Zero => 0.0,
            CentralSector::Half => 0.5,
            CentralSector::One => 1.0,
        }
    }
}

impl FromStr for CentralSector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c0" | "0" => Ok(CentralSector::Zero),
            "c12" | "0.5" | "1/2" | "half" => Ok(CentralSector::Half),
            "c1" | "1" | "one" => Ok(CentralSector::One),
            other => Err(format!("unknown central-charge sector '{other}' (use c0, c12 or c1)")),
        }
    }
}

/// A lattice Virasoro generator with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct KooSaleurGenerator {
    pub k: i64,
    pub chirality: Chirality,
    pub central_charge: f64,
    pub payload: QuadraticOperator,
}

fn momentum(spec: &LatticeSpec, k: i64) -> f64 {
    k as f64 * PI / spec.l()
}

fn check_nyquist(spec: &LatticeSpec, k: i64) -> Result<(), VirasoroError> {
    let bound = spec.cells_per_half();
    if (k.unsigned_abs() as f64) >= bound {
        return Err(VirasoroError::NyquistViolation { k, bound });
    }
    Ok(())
}

fn check_massless(spec: &LatticeSpec) -> Result<(), VirasoroError> {
    if spec.mass() != 0.0 {
        return Err(VirasoroError::MassiveDensityUnsupported(spec.mass()));
    }
    Ok(())
}

/// `H_k = ε_N (L/π) Σ_x e^{ikx} h_x` with the density symmetric around `x`,
/// normalized so that `H_0` is the lattice Hamiltonian.
pub fn hamiltonian_density_modes(spec: &LatticeSpec, k: i64) -> Result<QuadraticOperator, VirasoroError> {
    check_massless(spec)?;
    Ok(density_modes(spec, momentum(spec, k)))
}

fn density_modes(spec: &LatticeSpec, k: f64) -> QuadraticOperator {
    let field = StaggeredField::new(spec);
    let pref = 0.5 * spec.l() / (PI * spec.spacing());
    let mut h = QuadraticOperator::zero(spec.modes());
    for (m, x) in spec.site_grid().into_iter().enumerate() {
        let m = m as i64;
        let z = cis(k * x) * pref;
        let terms = [
            (ONE, field.psi(1, m + 1, true), field.psi(2, m, false)),
            (-ONE, field.psi(1, m, true), field.psi(2, m, false)),
            (ONE, field.psi(2, m - 1, true), field.psi(1, m, false)),
            (-ONE, field.psi(2, m, true), field.psi(1, m, false)),
        ];
        for (s, u, v) in terms.iter() {
            h.add_product(z * s, u, v);
            h.add_product(z * s.conj(), &crate::quadratic::dagger(v), &crate::quadratic::dagger(u));
        }
    }
    h
}

/// `f_k = π ε_N / (2 L sin(ε_N k / 2))`.
fn ks_factor(spec: &LatticeSpec, k: f64) -> f64 {
    PI * spec.spacing() / (2.0 * spec.l() * (0.5 * spec.spacing() * k).sin())
}

/// Commutator form
/// `L_k = ½(H_k + f_k [H_k, H_0]) + (c/24) δ_{k,0}`; the right chirality is
/// `L̄_k = ½(H_{-k} + f_k [H_{-k}, H_0]) + (c/24) δ_{k,0}`.
pub fn koo_saleur(
    spec: &LatticeSpec,
    k: i64,
    central_charge: f64,
    chirality: Chirality,
) -> Result<KooSaleurGenerator, VirasoroError> {
    check_massless(spec)?;
    check_nyquist(spec, k)?;
    let half = c(0.5, 0.0);
    let payload = if k == 0 {
        let mut op = density_modes(spec, 0.0).scaled(half);
        op.add_constant(c(central_charge / 24.0, 0.0));
        op
    } else {
        let kk = momentum(spec, k);
        let hk = match chirality {
            Chirality::Left => density_modes(spec, kk),
            Chirality::Right => density_modes(spec, -kk),
        };
        let h0 = density_modes(spec, 0.0);
        let comm = hk.commutator(&h0).scaled(c(ks_factor(spec, kk), 0.0));
        hk.plus(&comm).scaled(half)
    };
    Ok(KooSaleurGenerator { k, chirality, central_charge, payload })
}

/// Hermitian generator used for dynamics: `e^{iφ} L_k + e^{-iφ} L_{-k}` for
/// `k ≠ 0` and `L_0` itself at `k = 0` (so `k = 0` evolves with `½H_0`).
pub fn hermitian_generator(
    spec: &LatticeSpec,
    k: i64,
    phase: f64,
    chirality: Chirality,
) -> Result<QuadraticOperator, VirasoroError> {
    if k == 0 {
        return Ok(koo_saleur(spec, 0, 0.0, chirality)?.payload);
    }
    let lk = koo_saleur(spec, k, 0.0, chirality)?.payload;
    let lmk = koo_saleur(spec, -k, 0.0, chirality)?.payload;
    Ok(lk.scaled(cis(phase)).plus(&lmk.scaled(cis(-phase))))
}

/// Entries of the 2×2 kernel `ℓ_k(l', l)` at lattice spacing `eps`.
///
/// The lower-left entry is written in terms of `l` so that it remains valid on
/// the umklapp branch `l' = l + k ± 2π/ε_N`.
pub fn block_kernel(eps: f64, k: f64, l_prime: f64, l: f64) -> [[C64; 2]; 2] {
    let e = cis(eps * k / 4.0);
    let eb = e.conj();
    let s_l = (eps * l / 2.0).sin();
    let s_lk = (eps * (l + k) / 2.0).sin();
    let l11 = -e * (eps * (l + k / 2.0)).sin();
    let l12 = -I * (e * s_l + eb * s_lk);
    let l21 = I * (e * s_l + eb * s_lk);
    let l22 = -eb * (eps * (l + l_prime) / 2.0).sin();
    [[l11 * 0.5, l12 * 0.5], [l21 * 0.5, l22 * 0.5]]
}

/// Momentum pairs `(l', l)` with `l' - l ≡ k mod 2π/ε_N`, as grid indices.
fn block_pairs(spec: &LatticeSpec, k: f64) -> Vec<(usize, usize)> {
    let grid = spec.momentum_grid();
    let period = 2.0 * PI / spec.spacing();
    let mut out = Vec::new();
    for (il, &l) in grid.iter().enumerate() {
        for shift in [-1.0, 0.0, 1.0] {
            if let Some(ilp) = spec.momentum_index(l + k + shift * period) {
                let lp = grid[ilp];
                let d = (lp - l - k) / period;
                if (d - d.round()).abs() < 1e-9 && !out.contains(&(ilp, il)) {
                    out.push((ilp, il));
                }
            }
        }
    }
    out
}

/// Explicit momentum-space form
/// `L_k = e^{-iε_N k/4}/(8π) Σ D†_{l'} ℓ_k(l', l) D_l` with
/// `D_l = (â_l, â†_{-l})`, `â_l = Σ_j e^{-ilx_j} a_j`, returned in the
/// position basis. At `k = 0` this is the chiral `L_0` without `c/24`.
pub fn koo_saleur_momentum_block(spec: &LatticeSpec, k: i64) -> Result<QuadraticOperator, VirasoroError> {
    check_massless(spec)?;
    check_nyquist(spec, k)?;
    let hat = momentum_block_hat(spec, momentum(spec, k));
    let t = lattice::fourier_nambu(spec);
    let x = t.adjoint() * linalg::smart_mul(hat.nambu(), &t);
    Ok(QuadraticOperator::from_nambu(x, hat.shift()))
}

/// The block form in the normalized momentum Nambu basis `α̂ = T α`.
pub fn momentum_block_hat(spec: &LatticeSpec, k: f64) -> QuadraticOperator {
    let m = spec.modes();
    let grid = spec.momentum_grid();
    let eps = spec.spacing();
    let pref = cis(-eps * k / 4.0) * (m as f64 / (8.0 * PI));
    let idx = |q: f64| spec.momentum_index(q).expect("momentum on grid");
    let mut op = QuadraticOperator::zero(m);
    for (ilp, il) in block_pairs(spec, k) {
        let (lp, l) = (grid[ilp], grid[il]);
        let ell = block_kernel(eps, k, lp, l);
        let left = [creator(m, ilp), annihilator(m, idx(-lp))];
        let right = [annihilator(m, il), creator(m, idx(-l))];
        for a in 0..2 {
            for b in 0..2 {
                if ell[a][b] != ZERO {
                    op.add_product(pref * ell[a][b], &left[a], &right[b]);
                }
            }
        }
    }
    op
}

/// Right-chirality `L̄_0` in block form, the spatial reflection of the chiral
/// block `L_0`.
pub fn right_zero_block(spec: &LatticeSpec) -> Result<QuadraticOperator, VirasoroError> {
    let l0 = koo_saleur_momentum_block(spec, 0)?;
    let p = spatial_parity(spec);
    let x = &p * l0.nambu() * p.transpose();
    Ok(QuadraticOperator::from_nambu(x, l0.shift()))
}

/// Nambu matrix of the reflection `x ↦ -x`, `a_j ↦ (-1)^j a_{-j}` with the
/// sector sign on the seam. It commutes with the lattice Hamiltonian.
pub fn spatial_parity(spec: &LatticeSpec) -> CMat {
    let m = spec.modes();
    let mut p = CMat::zeros(2 * m, 2 * m);
    for j in 0..m {
        let t = (m - j) % m;
        let mut s = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 {
            s *= spec.sector().wrap_sign();
        }
        p[(t, j)] = c(s, 0.0);
        p[(m + t, m + j)] = c(s, 0.0);
    }
    p
}

/// Block entries `(l', l, Re, Im)` of an operator's hopping block in the
/// normalized momentum basis, momenta in units of π/L.
pub fn generator_csv(spec: &LatticeSpec, op: &QuadraticOperator) -> String {
    let t = lattice::fourier_nambu(spec);
    let xh = linalg::smart_mul(&t, op.nambu()) * t.adjoint();
    let grid = spec.momentum_grid();
    let m = spec.modes();
    let mut s = String::from("block,l_prime,l,re,im\n");
    for (name, r0, c0) in [("hop", 0, 0), ("pair", 0, m), ("pair_dag", m, 0)] {
        for i in 0..m {
            for j in 0..m {
                let z = xh[(r0 + i, c0 + j)];
                if z.norm() > 1e-14 {
                    s.push_str(&format!(
                        "{name},{},{},{:.16e},{:.16e}\n",
                        spec.momentum_label(grid[i]),
                        spec.momentum_label(grid[j]),
                        z.re,
                        z.im
                    ));
                }
            }
        }
    }
    s
}

/// Continuum free-fermion Virasoro generator on one chiral real fermion.
///
/// Modes are `r ∈ ℤ + ½` with `|r| ≤ 2^M`; `ψ_r` with `r > 0` annihilates a
/// quasiparticle of energy `r` and `ψ_{-r} = ψ_r†`. The one-particle matrix
/// sends `ψ_r` to `ψ_{r-k}` with weight `r - k/2`, so that
/// `L_k = ½ Σ_r (r - k/2) ψ_{k-r} ψ_r`. For `c = 1` two identical copies are
/// present.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumVirasoroBlock {
    pub k: i64,
    pub cutoff_scale: u32,
    pub central_charge: f64,
    /// Multiplies every entry when comparing with lattice amplitudes.
    pub normalization: f64,
    labels: Vec<f64>,
    matrix: CMat,
}

pub fn continuum_virasoro_block(k: i64, cutoff_scale: u32, central_charge: f64) -> ContinuumVirasoroBlock {
    let top = (1u64 << cutoff_scale) as f64;
    let mut labels = Vec::new();
    let mut r = -top + 0.5;
    while r < top {
        labels.push(r);
        r += 1.0;
    }
    let n = labels.len();
    let kf = k as f64;
    let mut matrix = CMat::zeros(n, n);
    for (j, &r) in labels.iter().enumerate() {
        let s = r - kf;
        if let Some(i) = labels.iter().position(|&x| (x - s).abs() < 1e-9) {
            matrix[(i, j)] = c(r - kf / 2.0, 0.0);
        }
    }
    ContinuumVirasoroBlock { k, cutoff_scale, central_charge, normalization: 1.0, labels, matrix }
}

impl ContinuumVirasoroBlock {
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Unnormalized one-particle matrix (exact Virasoro structure constants).
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn with_normalization(mut self, gamma: f64) -> Self {
        self.normalization = gamma;
        self
    }

    /// Number of identical chiral real-fermion copies.
    pub fn copies(&self) -> usize {
        if self.central_charge >= 0.75 {
            2
        } else {
            1
        }
    }

    /// Amplitude of `b†_s b_r` for energies `r, s > 0`.
    pub fn scattering(&self, s: f64, r: f64) -> f64 {
        if ((r - s) - self.k as f64).abs() < 1e-9 {
            self.normalization * (r - self.k as f64 / 2.0)
        } else {
            0.0
        }
    }

    /// Amplitude of `b†_{e1} b†_{e2}` for energies `e1, e2 > 0`.
    pub fn pair(&self, e1: f64, e2: f64) -> f64 {
        if (e1 + e2 + self.k as f64).abs() < 1e-9 {
            self.normalization * 0.5 * (e1 - e2)
        } else {
            0.0
        }
    }
}

/// Central-charge estimate with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralChargeEstimate {
    pub k: i64,
    /// Level-projected estimate (see [`central_charge_estimate`]).
    pub projected: f64,
    /// Estimate from the bare vacuum commutator.
    pub raw: f64,
}

/// Nambu projector onto one Majorana sublattice: `γ^x_j` on even sites and
/// `γ^y_j` on odd sites, `γ^x = a + a†`, `γ^y = -i(a - a†)`.
pub fn majorana_projector(modes: usize) -> CMat {
    let m = modes;
    let mut p = CMat::zeros(2 * m, 2 * m);
    for j in 0..m {
        // row of Ω for the kept Majorana, as (coef on a_j, coef on a†_j)
        let (u, v) = if j % 2 == 0 { (ONE, ONE) } else { (-I, I) };
        let idx = [j, m + j];
        let row = [u, v];
        for a in 0..2 {
            for b in 0..2 {
                p[(idx[a], idx[b])] += row[a].conj() * row[b] * 0.5;
            }
        }
    }
    p
}

fn psi_fock_vacuum(spec: &LatticeSpec) -> GaussianState {
    let m = spec.modes();
    let mut cov = CMat::zeros(2 * m, 2 * m);
    for j in 0..m {
        if j % 2 == 1 {
            cov[(j, j)] = ONE;
        } else {
            cov[(m + j, m + j)] = ONE;
        }
    }
    GaussianState::from_covariance(cov)
}

/// `ĉ(N, k)` from the vacuum two-point structure of `L_{±k}`.
///
/// `raw` is `12(⟨[L_k, L_{-k}]⟩ - 2k⟨L_0 - c/24⟩)/(k³ - k)` with the bare
/// commutator and `L_0` normal-ordered against the lattice vacuum, so the
/// second term drops out; the unordered `½E_0` grows like `ε_N^{-2}`. The lattice commutator also contains pair excitations far
/// above level `k`, which spoil convergence, so `projected` keeps only the
/// two-quasiparticle components of `L_{∓k}|Ω⟩` with total energy within ½ of
/// `|k|`: `12(‖P L_{-k}Ω‖² - ‖P L_kΩ‖²)/(k³ - k)`. For `c = 0` both values use
/// the ψ Fock vacuum, which every density term annihilates.
pub fn central_charge_estimate(
    spec: &LatticeSpec,
    k: i64,
    sector: CentralSector,
) -> Result<CentralChargeEstimate, VirasoroError> {
    if k.abs() <= 1 {
        return Err(VirasoroError::UndefinedForUnitK(k));
    }
    if spec.sector() != Sector::NeveuSchwarz {
        return Err(VirasoroError::NeedsNeveuSchwarz);
    }
    check_massless(spec)?;
    let kk = k as f64;
    let denom = kk.powi(3) - kk;
    let lk = koo_saleur(spec, k, 0.0, Chirality::Left)?.payload;
    let lmk = koo_saleur(spec, -k, 0.0, Chirality::Left)?.payload;
    if sector == CentralSector::Zero {
        let vac = psi_fock_vacuum(spec);
        let comm = crate::gaussian::expectation_quadratic(&vac, &lk.commutator(&lmk));
        let raw = 12.0 * comm.re / denom;
        return Ok(CentralChargeEstimate { k, projected: raw, raw });
    }

    let gs = lattice::ground_state(spec).map_err(|_| VirasoroError::NeedsNeveuSchwarz)?;
    let data = lattice::diagonalize(spec);
    let (xk, xmk) = match sector {
        CentralSector::Half => {
            let p = majorana_projector(spec.modes());
            (&p * lk.nambu() * &p, &p * lmk.nambu() * &p)
        }
        _ => (lk.nambu().clone(), lmk.nambu().clone()),
    };
    let comm = QuadraticOperator::from_nambu(&xk * &xmk - &xmk * &xk, ZERO);
    let raw = 12.0 * crate::gaussian::expectation_quadratic(&gs, &comm).re / denom;

    let w = data.quasiparticle_nambu(spec);
    let created = |x: &CMat| -> f64 {
        let xq = linalg::smart_mul(&w, x) * w.adjoint();
        let m = spec.modes();
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                if (data.omega[a] + data.omega[b] - kk.abs()).abs() <= 0.5 {
                    s += xq[(a, m + b)].norm_sqr();
                }
            }
        }
        0.5 * s
    };
    let projected = 12.0 * (created(&xmk) - created(&xk)) / denom;
    Ok(CentralChargeEstimate { k, projected, raw })
}
