//! Lattice geometry, the staggered fermion Hamiltonian and its exact
//! diagonalization.
//!
//! All operators live on the single-component index set: mode `j` sits at
//! `x_j = -L + j ε_{N+1}` with `a_{2m} = ψ¹_m` and `a_{2m+1} = ψ²_m†`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{self, c, cis, CMat, C64, I, ONE, ZERO};
use crate::quadratic::{annihilator, creator, LinearForm, QuadraticOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("scale must satisfy N >= 0 and L > 0 (got L = {0})")]
    InvalidGeometry(f64),
    #[error("lattice needs at least one cell")]
    NoCells,
    #[error("{modes} modes exceed the configured cap of {cap}")]
    ExceedsMemoryCap { modes: usize, cap: usize },
    #[error("ground state is degenerate ({zero_modes} zero modes); choose a parity sector")]
    DegenerateGroundState { zero_modes: usize },
    #[error("parity {requested} is not reachable: no zero mode to flip")]
    ParityUnreachable { requested: i8 },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

/// Fermion boundary condition around the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// Antiperiodic fermions, half-integer momenta.
    NeveuSchwarz,
    /// Periodic fermions, integer momenta.
    Ramond,
}

impl Sector {
    /// Sign picked up by a fermion field translated once around the circle.
    pub fn wrap_sign(self) -> f64 {
        match self {
            Sector::NeveuSchwarz => -1.0,
            Sector::Ramond => 1.0,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::NeveuSchwarz => write!(f, "NS"),
            Sector::Ramond => write!(f, "R"),
        }
    }
}

impl FromStr for Sector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ns" | "neveu-schwarz" | "neveuschwarz" | "antiperiodic" => Ok(Sector::NeveuSchwarz),
            "r" | "ramond" | "periodic" => Ok(Sector::Ramond),
            other => Err(format!("unknown sector '{other}'")),
        }
    }
}

/// Upper bound on the single-component mode count of a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryCap {
    pub max_modes: usize,
}

impl Default for MemoryCap {
    /// `N <= 12`.
    fn default() -> Self {
        Self { max_modes: 1 << 14 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    scale: Option<u32>,
    cells: usize,
    half_circumference: f64,
    mass: f64,
    sector: Sector,
}

pub fn build_spec(n: u32, l: f64, lambda: f64, sector: Sector) -> Result<LatticeSpec, LatticeError> {
    build_spec_with_cap(n, l, lambda, sector, MemoryCap::default())
}

pub fn build_spec_with_cap(
    n: u32,
    l: f64,
    lambda: f64,
    sector: Sector,
    cap: MemoryCap,
) -> Result<LatticeSpec, LatticeError> {
    if n >= 40 {
        return Err(LatticeError::ExceedsMemoryCap { modes: usize::MAX, cap: cap.max_modes });
    }
    let cells = 1usize << (n + 1);
    let mut spec = LatticeSpec::with_cells(cells, l, lambda, sector, cap)?;
    spec.scale = Some(n);
    Ok(spec)
}

impl LatticeSpec {
    /// Lattice with an arbitrary number of two-component cells on `[-L, L)`.
    /// Used for small non-dyadic checks; RG maps need a dyadic scale.
    pub fn with_cells(
        cells: usize,
        l: f64,
        lambda: f64,
        sector: Sector,
        cap: MemoryCap,
    ) -> Result<Self, LatticeError> {
        if !(l > 0.0) || !l.is_finite() || !lambda.is_finite() {
            return Err(LatticeError::InvalidGeometry(l));
        }
        if cells == 0 {
            return Err(LatticeError::NoCells);
        }
        if 2 * cells > cap.max_modes {
            return Err(LatticeError::ExceedsMemoryCap { modes: 2 * cells, cap: cap.max_modes });
        }
        Ok(Self { scale: None, cells, half_circumference: l, mass: lambda, sector })
    }

    pub fn scale(&self) -> Option<u32> {
        self.scale
    }

    /// Dyadic scale; panics for lattices built with [`LatticeSpec::with_cells`].
    pub fn n(&self) -> u32 {
        self.scale.expect("lattice has no dyadic scale")
    }

    /// Number of sites `n` of Λ_N (two-component cells).
    pub fn sites(&self) -> usize {
        self.cells
    }

    /// Number of single-component modes `2n`.
    pub fn modes(&self) -> usize {
        2 * self.cells
    }

    pub fn l(&self) -> f64 {
        self.half_circumference
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn with_mass(&self, lambda: f64) -> Self {
        Self { mass: lambda, ..self.clone() }
    }

    pub fn with_sector(&self, sector: Sector) -> Self {
        Self { sector, ..self.clone() }
    }

    /// ε_N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_circumference / self.cells as f64
    }

    /// ε_{N+1}.
    pub fn fine_spacing(&self) -> f64 {
        0.5 * self.spacing()
    }

    /// L_N, the number of cells per half circumference.
    pub fn cells_per_half(&self) -> f64 {
        self.cells as f64 / 2.0
    }

    /// Λ_N as positions.
    pub fn site_grid(&self) -> Vec<f64> {
        (0..self.cells).map(|m| -self.half_circumference + m as f64 * self.spacing()).collect()
    }

    /// Positions of the single-component modes on Λ_{N+1}.
    pub fn mode_positions(&self) -> Vec<f64> {
        (0..self.modes()).map(|j| -self.half_circumference + j as f64 * self.fine_spacing()).collect()
    }

    /// Γ_{N+1} in ascending order, one momentum per single-component mode.
    pub fn momentum_grid(&self) -> Vec<f64> {
        let n = self.cells as i64;
        let unit = std::f64::consts::PI / self.half_circumference;
        match self.sector {
            Sector::NeveuSchwarz => (-n..n).map(|m| unit * (m as f64 + 0.5)).collect(),
            Sector::Ramond => ((-n + 1)..=n).map(|m| unit * m as f64).collect(),
        }
    }

    /// Momentum in units of π/L, which labels Γ_{N+1} exactly.
    pub fn momentum_label(&self, k: f64) -> f64 {
        k * self.half_circumference / std::f64::consts::PI
    }

    /// Index into [`Self::momentum_grid`] of momentum `k`, reduced into the
    /// Brillouin zone of width 2π/ε_{N+1}.
    pub fn momentum_index(&self, k: f64) -> Option<usize> {
        let n = self.cells as f64;
        let mut lbl = self.momentum_label(k);
        let period = 2.0 * n;
        let lo = match self.sector {
            Sector::NeveuSchwarz => -n,
            Sector::Ramond => -n + 1.0,
        };
        lbl = (lbl - lo).rem_euclid(period) + lo;
        let idx = match self.sector {
            Sector::NeveuSchwarz => lbl - 0.5 + n,
            Sector::Ramond => lbl + n - 1.0,
        };
        let r = idx.round();
        if (idx - r).abs() > 1e-6 || r < 0.0 || r >= period {
            return None;
        }
        Some(r as usize)
    }

    /// Prefactor ε_N^{-1} L/π of the lattice Hamiltonian.
    pub fn hamiltonian_prefactor(&self) -> f64 {
        self.half_circumference / (std::f64::consts::PI * self.spacing())
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        if let Some(n) = self.scale {
            s.push_str(&format!("N = {n}\n"));
        } else {
            s.push_str(&format!("cells = {}\n", self.cells));
        }
        s.push_str(&format!("L = {}\n", self.half_circumference));
        s.push_str(&format!("lambda = {}\n", self.mass));
        s.push_str(&format!("sector = {}\n", self.sector));
        s
    }

    /// Parses flat `key = value` text with keys `N`, `L`, `lambda`, `sector`.
    /// Lines starting with `#` are comments; unknown keys are rejected.
    pub fn from_config_str(text: &str) -> Result<Self, LatticeError> {
        let mut n: Option<u32> = None;
        let mut cells: Option<usize> = None;
        let mut l = 1.0;
        let mut lambda = 0.0;
        let mut sector = Sector::NeveuSchwarz;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| LatticeError::Config { line: lineno + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "N" => n = Some(value.parse().map_err(|e| err(format!("key N: {e}")))?),
                "cells" => cells = Some(value.parse().map_err(|e| err(format!("key cells: {e}")))?),
                "L" => l = value.parse().map_err(|e| err(format!("key L: {e}")))?,
                "lambda" => lambda = value.parse().map_err(|e| err(format!("key lambda: {e}")))?,
                "sector" => sector = value.parse().map_err(|e: String| err(format!("key sector: {e}")))?,
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        match (n, cells) {
            (Some(n), None) => build_spec(n, l, lambda, sector),
            (None, Some(cells)) => Self::with_cells(cells, l, lambda, sector, MemoryCap::default()),
            (None, None) => Err(LatticeError::Config { line: 0, message: "missing key N".into() }),
            (Some(_), Some(_)) => {
                Err(LatticeError::Config { line: 0, message: "keys N and cells are exclusive".into() })
            }
        }
    }
}

/// Two-component view of the single-component modes.
pub struct StaggeredField<'a> {
    spec: &'a LatticeSpec,
}

impl<'a> StaggeredField<'a> {
    pub fn new(spec: &'a LatticeSpec) -> Self {
        Self { spec }
    }

    /// Linear form of `ψ^{(comp)}_m` (or its adjoint) for any integer cell
    /// index; indices outside Λ_N wrap with the sector sign.
    pub fn psi(&self, comp: u8, m: i64, dag: bool) -> LinearForm {
        assert!(comp == 1 || comp == 2, "component must be 1 or 2");
        let cells = self.spec.cells as i64;
        let wraps = m.div_euclid(cells);
        let site = m.rem_euclid(cells) as usize;
        let sign = if wraps % 2 == 0 { 1.0 } else { self.spec.sector.wrap_sign() };
        let modes = self.spec.modes();
        let j = 2 * site + (comp as usize - 1);
        let is_creator = (comp == 2) ^ dag;
        let mut u = if is_creator { creator(modes, j) } else { annihilator(modes, j) };
        u *= c(sign, 0.0);
        u
    }
}

/// H_0^{(N)} of the staggered lattice, prefactor ε_N^{-1} L/π.
pub fn build_staggered_hamiltonian(spec: &LatticeSpec) -> QuadraticOperator {
    let field = StaggeredField::new(spec);
    let pref = c(spec.hamiltonian_prefactor(), 0.0);
    let mut h = QuadraticOperator::zero(spec.modes());
    for m in 0..spec.cells as i64 {
        h.add_product_hc(pref, &field.psi(1, m + 1, true), &field.psi(2, m, false));
        h.add_product_hc(-pref, &field.psi(1, m, true), &field.psi(2, m, false));
        if spec.mass != 0.0 {
            let lm = pref * spec.mass;
            h.add_product(lm, &field.psi(1, m, true), &field.psi(1, m, false));
            h.add_product(-lm, &field.psi(2, m, true), &field.psi(2, m, false));
        }
    }
    h
}

/// Nambu matrix `T` of the discrete Fourier transform, `α̂ = T α`, with
/// `â_k = (2n)^{-1/2} Σ_j e^{-i k x_j} a_j`.
pub fn fourier_nambu(spec: &LatticeSpec) -> CMat {
    let m = spec.modes();
    let xs = spec.mode_positions();
    let ks = spec.momentum_grid();
    let norm = 1.0 / (m as f64).sqrt();
    let mut t = CMat::zeros(2 * m, 2 * m);
    for (p, &k) in ks.iter().enumerate() {
        for (j, &x) in xs.iter().enumerate() {
            let z = cis(-k * x) * norm;
            t[(p, j)] = z;
            t[(m + p, m + j)] = z.conj();
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Γ_{N+1}, ascending.
    pub momenta: Vec<f64>,
    /// ω(k) ≥ 0 per momentum.
    pub omega: Vec<f64>,
    /// Bogoliubov angle θ(k), odd in k.
    pub theta: Vec<f64>,
    /// Index of the momentum `-k` (reduced into the zone).
    pub partner: Vec<usize>,
    /// Ground energy of the diagonal form.
    pub offset: f64,
    /// Indices of modes with ω(k) = 0.
    pub zero_modes: Vec<usize>,
    /// Self-paired modes whose quasiparticle is the hole of `â_k` (λ < 0).
    pub flipped: Vec<usize>,
}

const ZERO_MODE_TOL: f64 = 1e-12;

/// Fourier transform followed by a Bogoliubov rotation per pair `(k, -k)`:
/// `b_k = cos θ_k â_k - i sin θ_k â†_{-k}` with `θ_k = ½ atan2(2 sin(k ε_{N+1}), λ)`.
pub fn diagonalize(spec: &LatticeSpec) -> SpectralData {
    let momenta = spec.momentum_grid();
    let p = spec.hamiltonian_prefactor();
    let lam = spec.mass;
    let ep = spec.fine_spacing();
    let mut omega = Vec::with_capacity(momenta.len());
    let mut theta = Vec::with_capacity(momenta.len());
    let mut partner = Vec::with_capacity(momenta.len());
    let mut zero_modes = Vec::new();
    let mut flipped = Vec::new();
    let mut offset = -p * lam * spec.cells as f64;
    for (i, &k) in momenta.iter().enumerate() {
        let j = spec.momentum_index(-k).expect("grid is closed under negation");
        partner.push(j);
        let s = (k * ep).sin();
        if j == i {
            omega.push(p * lam.abs());
            theta.push(0.0);
            if lam < 0.0 {
                flipped.push(i);
                offset += p * lam;
            }
        } else {
            let w = p * (lam * lam + 4.0 * s * s).sqrt();
            omega.push(w);
            theta.push(0.5 * (2.0 * s).atan2(lam));
            if k > 0.0 {
                offset += p * lam - w;
            }
        }
        if omega[i] <= ZERO_MODE_TOL * p.max(1.0) {
            zero_modes.push(i);
        }
    }
    SpectralData { momenta, omega, theta, partner, offset, zero_modes, flipped }
}

impl SpectralData {
    /// Nambu matrix of the Bogoliubov rotation in the momentum basis,
    /// `β = R α̂`.
    pub fn bogoliubov_nambu(&self) -> CMat {
        let m = self.momenta.len();
        let mut r = CMat::zeros(2 * m, 2 * m);
        for i in 0..m {
            let j = self.partner[i];
            if self.flipped.contains(&i) {
                r[(i, m + i)] = ONE;
                r[(m + i, i)] = ONE;
                continue;
            }
            let (sn, cs) = self.theta[i].sin_cos();
            r[(i, i)] = c(cs, 0.0);
            r[(m + i, m + i)] = c(cs, 0.0);
            if j != i {
                r[(i, m + j)] = -I * sn;
                r[(m + i, j)] = I * sn;
            }
        }
        r
    }

    /// Full quasiparticle transformation `β = W α` with `W = R T`.
    pub fn quasiparticle_nambu(&self, spec: &LatticeSpec) -> CMat {
        self.bogoliubov_nambu() * fourier_nambu(spec)
    }

    /// `‖X - W† diag(ω, -ω) W‖` relative to `‖X‖`, in one-particle max norm.
    pub fn reconstruction_error(&self, spec: &LatticeSpec, h: &QuadraticOperator) -> f64 {
        let m = self.momenta.len();
        let w = self.quasiparticle_nambu(spec);
        let mut d = CMat::zeros(2 * m, 2 * m);
        for i in 0..m {
            d[(i, i)] = c(self.omega[i], 0.0);
            d[(m + i, m + i)] = c(-self.omega[i], 0.0);
        }
        let rebuilt = w.adjoint() * d * &w;
        let scale = linalg::max_abs(h.nambu()).max(1e-300);
        linalg::max_abs_diff(&rebuilt, h.nambu()) / scale
    }

    pub fn min_omega(&self) -> f64 {
        self.omega.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Parity sector for resolving zero-mode degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

/// Fermionic Gaussian state stored through `Γ_ij = ⟨α†_i α_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cov: CMat,
}

impl GaussianState {
    pub fn from_covariance(cov: CMat) -> Self {
        assert_eq!(cov.nrows(), cov.ncols());
        assert_eq!(cov.nrows() % 2, 0);
        Self { cov }
    }

    /// Fock vacuum of the `a` modes.
    pub fn vacuum(modes: usize) -> Self {
        let mut cov = CMat::zeros(2 * modes, 2 * modes);
        for i in 0..modes {
            cov[(modes + i, modes + i)] = ONE;
        }
        Self { cov }
    }

    /// Tracial state.
    pub fn maximally_mixed(modes: usize) -> Self {
        Self { cov: CMat::identity(2 * modes, 2 * modes) * c(0.5, 0.0) }
    }

    pub fn modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn covariance(&self) -> &CMat {
        &self.cov
    }

    /// `max |Γ² - Γ|`; zero for pure states.
    pub fn purity_defect(&self) -> f64 {
        linalg::max_abs_diff(&(&self.cov * &self.cov), &self.cov)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.purity_defect() <= tol
    }

    /// Eigenvalues of Γ (mode occupations and their complements).
    pub fn occupations(&self) -> Vec<f64> {
        linalg::heigh(&self.cov).0
    }

    /// `⟨α_i α_j⟩ = Γ_{τi, j}`.
    pub fn pair(&self, i: usize, j: usize) -> C64 {
        self.cov[(linalg::tau_index(i, self.modes()), j)]
    }

    /// `⟨(-1)^F⟩` through the Pfaffian of Majorana two-point functions.
    pub fn parity(&self) -> f64 {
        let m = self.modes();
        let n = 2 * m;
        // γ_{2j} = a_j + a†_j, γ_{2j+1} = -i (a_j - a†_j)
        let form = |a: usize| -> Vec<(usize, C64)> {
            let j = a / 2;
            if a % 2 == 0 {
                vec![(j, ONE), (m + j, ONE)]
            } else {
                vec![(j, -I), (m + j, I)]
            }
        };
        let mut g = CMat::zeros(n, n);
        for a in 0..n {
            for b in (a + 1)..n {
                let mut z = ZERO;
                for &(i, ui) in &form(a) {
                    for &(j, vj) in &form(b) {
                        z += ui * vj * self.pair(i, j);
                    }
                }
                g[(a, b)] = z;
                g[(b, a)] = -z;
            }
        }
        let pf = linalg::pfaffian(&g);
        let phase = I.powi(-(m as i32));
        (phase * pf).re
    }
}

/// Covariance of the Bogoliubov vacuum. Fails on zero modes.
pub fn ground_state(spec: &LatticeSpec) -> Result<GaussianState, LatticeError> {
    let data = diagonalize(spec);
    if !data.zero_modes.is_empty() {
        return Err(LatticeError::DegenerateGroundState { zero_modes: data.zero_modes.len() });
    }
    Ok(state_from_spectral(spec, &data, &[]))
}

/// Ground state in a fixed parity sector. Zero modes are left empty for even
/// parity; odd parity occupies the first zero mode.
pub fn ground_state_with_parity(spec: &LatticeSpec, parity: Parity) -> Result<GaussianState, LatticeError> {
    let data = diagonalize(spec);
    let base_parity = if data.flipped.len() % 2 == 0 { Parity::Even } else { Parity::Odd };
    let fill: Vec<usize> = if parity == base_parity {
        Vec::new()
    } else if let Some(&z) = data.zero_modes.first() {
        vec![z]
    } else {
        return Err(LatticeError::ParityUnreachable { requested: parity.sign() });
    };
    Ok(state_from_spectral(spec, &data, &fill))
}

fn state_from_spectral(spec: &LatticeSpec, data: &SpectralData, filled: &[usize]) -> GaussianState {
    let m = spec.modes();
    let mut g_beta = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        if filled.contains(&i) {
            g_beta[(i, i)] = ONE;
        } else {
            g_beta[(m + i, m + i)] = ONE;
        }
    }
    let w = data.quasiparticle_nambu(spec);
    let cov = w.transpose() * g_beta * w.map(|z| z.conj());
    GaussianState::from_covariance(cov)
}

/// Covariance in the momentum Nambu basis as CSV, long format.
pub fn covariance_csv(spec: &LatticeSpec, state: &GaussianState) -> String {
    let t = fourier_nambu(spec);
    let g = t.map(|z| z.conj()) * state.covariance() * t.transpose();
    let ks = spec.momentum_grid();
    let m = ks.len();
    let label = |i: usize| {
        let k = spec.momentum_label(ks[i % m]);
        if i < m {
            ("a", k)
        } else {
            ("a_dag", k)
        }
    };
    let mut out = String::from("row_op,row_k_over_pi_L,col_op,col_k_over_pi_L,re,im\n");
    for i in 0..2 * m {
        for j in 0..2 * m {
            let z = g[(i, j)];
            if z.norm() < 1e-15 {
                continue;
            }
            let (ri, ki) = label(i);
            let (rj, kj) = label(j);
            out.push_str(&format!("{ri},{ki},{rj},{kj},{:.16e},{:.16e}\n", z.re, z.im));
        }
    }
    out
}
