//! Error bounds between lattice Koo-Saleur generators and continuum Virasoro
//! generators on cutoff one-particle subspaces, wavelet Sobolev factors and
//! convergence-rate fits.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{self, LatticeSpec, Sector, SpectralData};
use crate::linalg::{cis, C64, I, ZERO};
use crate::oar::{self, WaveletFilter};
use crate::virasoro;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErrorAnalysisError {
    #[error("simulation scale M = {m} must lie below every UV scale (got N = {n})")]
    ScaleOrderViolation { m: u32, n: u32 },
    #[error("δ = {delta} is outside (0, {cap}) for D{order}")]
    DeltaOutOfRange { order: usize, delta: f64, cap: f64 },
    #[error("fit needs at least 4 positive points above 1e-13 (got {0} usable)")]
    DegenerateFit(usize),
    #[error("unsupported Daubechies order {0}")]
    UnsupportedOrder(usize),
    #[error("UV scale {0} is above the analytic limit of 12")]
    ScaleTooLarge(u32),
}

/// Analytic quasiparticle matrix elements of the block-form `L_k` on the
/// massless NS lattice, `L_k = Σ E†_{l'} K(l', l) E_l` with
/// `E_l = (b_l, b†_{-l})`. Momenta are labels in units of π/L.
pub struct QuasiparticleAmplitudes {
    spec: LatticeSpec,
    data: SpectralData,
    k: f64,
    pref: C64,
}

impl QuasiparticleAmplitudes {
    pub fn new(spec: &LatticeSpec, k: i64) -> Self {
        let data = lattice::diagonalize(spec);
        let kk = k as f64 * PI / spec.l();
        let pref = cis(-spec.spacing() * kk / 4.0) * (spec.modes() as f64 / (8.0 * PI));
        Self { spec: spec.clone(), data, k: kk, pref }
    }

    fn index(&self, label: f64) -> usize {
        self.spec.momentum_index(label * PI / self.spec.l()).expect("label on the momentum grid")
    }

    fn rotation(&self, idx: usize) -> [[C64; 2]; 2] {
        let (s, c) = self.data.theta[idx].sin_cos();
        [[C64::new(c, 0.0), -I * s], [-I * s, C64::new(c, 0.0)]]
    }

    /// `K(l', l)`, zero unless `l' - l ≡ k` modulo the umklapp period.
    pub fn kernel(&self, lp: f64, l: f64) -> [[C64; 2]; 2] {
        let (ip, il) = (self.index(lp), self.index(l));
        let (qp, q) = (self.data.momenta[ip], self.data.momenta[il]);
        let period = 2.0 * PI / self.spec.spacing();
        let d = (qp - q - self.k) / period;
        if (d - d.round()).abs() > 1e-9 {
            return [[ZERO; 2]; 2];
        }
        let ell = virasoro::block_kernel(self.spec.spacing(), self.k, qp, q);
        let (rp, r) = (self.rotation(ip), self.rotation(il));
        let mut out = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut z = ZERO;
                for x in 0..2 {
                    for y in 0..2 {
                        z += rp[a][x] * ell[x][y] * r[b][y].conj();
                    }
                }
                out[a][b] = z * self.pref;
            }
        }
        out
    }

    /// Coefficient of `b†_a b_c`.
    pub fn scattering(&self, a: f64, c: f64) -> C64 {
        self.kernel(a, c)[0][0] - self.kernel(-c, -a)[1][1]
    }

    /// Antisymmetric coefficient `B_ab` of `½ Σ B_ab b†_a b†_b`.
    pub fn pair(&self, a: f64, b: f64) -> C64 {
        self.kernel(a, -b)[0][1] - self.kernel(b, -a)[0][1]
    }

    /// Antisymmetric coefficient `C_ab` of `½ Σ C_ab b_a b_b`.
    pub fn annihilation(&self, a: f64, b: f64) -> C64 {
        self.kernel(-a, b)[1][0] - self.kernel(-b, a)[1][0]
    }

    /// Global phase `e^{-iε_N k/4}` of the block form.
    pub fn phase(&self) -> C64 {
        cis(-self.spec.spacing() * self.k / 4.0)
    }
}

/// Dirac cone of a lattice momentum label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cone {
    Zero,
    Pi,
}

impl Cone {
    /// Label of the chiral quasiparticle of energy `e` in this cone.
    pub fn label(self, e: f64, period: f64) -> f64 {
        match self {
            Cone::Zero => -e,
            Cone::Pi => period - e,
        }
    }

    /// Phase relating lattice pair amplitudes to the continuum ones.
    fn pair_phase(self) -> C64 {
        match self {
            Cone::Zero => I,
            Cone::Pi => -I,
        }
    }
}

/// Cone and energy of a chiral label; `None` for the opposite chirality.
pub fn chiral_energy(label: f64, period: f64) -> Option<(Cone, f64)> {
    if label.abs() < period / 2.0 {
        (label < 0.0).then_some((Cone::Zero, -label))
    } else {
        (label > 0.0).then_some((Cone::Pi, period - label))
    }
}

/// Reduces a label into `(-P, P)` with period `2P`.
fn wrap_label(label: f64, period: f64) -> f64 {
    (label + period).rem_euclid(2.0 * period) - period
}

fn candidates(base: f64, period: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(2);
    for j in [0.0, 1.0] {
        let x = wrap_label(base + j * period, period);
        if !out.iter().any(|&y| (y - x).abs() < 1e-9) {
            out.push(x);
        }
    }
    out
}

fn same_energy(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Kept chiral quasiparticles `(cone, energy)` up to the scale `M` cutoff.
pub fn kept_modes(m: u32, central_charge: f64) -> Vec<(Cone, f64)> {
    let top = (1u64 << m) as usize;
    let cones: &[Cone] = if central_charge >= 0.75 { &[Cone::Zero, Cone::Pi] } else { &[Cone::Zero] };
    cones.iter().flat_map(|&c| (0..top).map(move |j| (c, j as f64 + 0.5))).collect()
}

impl QuasiparticleAmplitudes {
    fn period(&self) -> f64 {
        self.spec.sites() as f64
    }

    fn k_label(&self) -> f64 {
        self.spec.momentum_label(self.k)
    }

    /// ℓ² norm of `(L_k^lat - L_k) b†_e|Ω⟩` restricted to the
    /// number-conserving part, for the kept mode `(cone, e)`.
    pub fn column_error(&self, cone: Cone, e: f64) -> f64 {
        let p = self.period();
        let k = self.k_label();
        let q = cone.label(e, p);
        let ph = self.phase();
        let mut acc = 0.0;
        for a in candidates(q + k, p) {
            let lat = self.scattering(a, q) / ph;
            let reference = match chiral_energy(a, p) {
                Some((c2, e2)) if c2 == cone && same_energy(e2, e - k) => e - k / 2.0,
                _ => 0.0,
            };
            acc += (lat - reference).norm_sqr();
        }
        acc.sqrt()
    }

    /// Squared Hilbert-Schmidt norms of the pair rows of a kept mode, split
    /// into the deviation on chiral partners and the weight on partners of
    /// the opposite chirality (which the chiral continuum block lacks).
    pub fn pair_row_error_sqr(&self, cone: Cone, e: f64) -> (f64, f64) {
        let p = self.period();
        let k = self.k_label();
        let a = cone.label(e, p);
        let ph = self.phase();
        let mut chiral = 0.0;
        let mut mixing = 0.0;
        let mut add = |b: f64, lat: C64, total: f64| match chiral_energy(b, p) {
            Some((c2, eb)) => {
                let reference = if c2 == cone && same_energy(e + eb, total) {
                    cone.pair_phase() * (0.5 * (e - eb))
                } else {
                    ZERO
                };
                chiral += (lat - reference).norm_sqr();
            }
            None => mixing += lat.norm_sqr(),
        };
        for b in candidates(k - a, p) {
            add(b, self.pair(a, b) / ph, -k);
        }
        for b in candidates(-k - a, p) {
            add(b, self.annihilation(a, b) / ph, k);
        }
        (chiral, mixing)
    }
}

/// Largest UV scale handled by the analytic error curves.
pub const MAX_ANALYTIC_SCALE: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// Largest column ℓ² deviation of the number-conserving part.
    L2Diagonal,
    /// Hilbert-Schmidt deviation of the pair creation/annihilation rows
    /// within the chiral sector.
    HsOffDiagonal,
    /// Hilbert-Schmidt weight of pairs made of one kept mode and one mode of
    /// the opposite chirality.
    ChiralityMixing,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L2Diagonal => "L2diagonal",
            NormKind::HsOffDiagonal => "HSoffdiagonal",
            NormKind::ChiralityMixing => "LRmixing",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "l2diagonal" | "diagonal" => Ok(NormKind::L2Diagonal),
            "hs" | "hsoffdiagonal" | "offdiagonal" => Ok(NormKind::HsOffDiagonal),
            "lr" | "lrmixing" | "mixing" => Ok(NormKind::ChiralityMixing),
            other => Err(format!("unknown norm '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveRg {
    Momentum,
    Wavelet { order: usize, delta: f64, rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub scales: Vec<u32>,
    pub values: Vec<f64>,
    pub k: i64,
    pub m: u32,
    pub norm: NormKind,
    pub rg: CurveRg,
    pub central_charge: f64,
    /// Scales `N ≥ M + 1` where the value went up; increases below
    /// [`FIT_FLOOR`] are roundoff and are not recorded.
    pub violations: Vec<u32>,
}

impl ErrorCurve {
    fn new(scales: Vec<u32>, values: Vec<f64>, k: i64, m: u32, norm: NormKind, rg: CurveRg, c: f64) -> Self {
        let mut violations = Vec::new();
        for i in 1..scales.len() {
            let noise = values[i] < FIT_FLOOR;
            if scales[i - 1] > m && !noise && values[i] > values[i - 1] * (1.0 + 1e-12) {
                violations.push(scales[i]);
            }
        }
        Self { scales, values, k, m, norm, rg, central_charge: c, violations }
    }

    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,value\n");
        for (n, v) in self.scales.iter().zip(&self.values) {
            s.push_str(&format!("{n},{v:.16e}\n"));
        }
        s
    }

    /// Plain-text `key = value` sidecar.
    pub fn metadata(&self) -> String {
        let rg = match self.rg {
            CurveRg::Momentum => "momentum".to_string(),
            CurveRg::Wavelet { order, delta, rate } => format!("wavelet(D{order}, delta={delta}, rate={rate})"),
        };
        let violations: Vec<String> = self.violations.iter().map(u32::to_string).collect();
        format!(
            "k = {}\nM = {}\nnorm = {}\nrg = {}\nc = {}\nmonotone = {}\nviolations = [{}]\n",
            self.k,
            self.m,
            self.norm.name(),
            rg,
            self.central_charge,
            self.is_monotone(),
            violations.join(", ")
        )
    }

    pub fn gnuplot_script(&self, csv_name: &str) -> String {
        gnuplot_script(csv_name, &format!("{} error, k = {}, M = {}", self.norm.name(), self.k, self.m), true)
    }

    pub fn fit_decay(&self) -> Result<DecayFit, ErrorAnalysisError> {
        fit_decay(&self.scales, &self.values)
    }
}

/// Gnuplot script plotting column 2 against column 1 of a CSV file.
pub fn gnuplot_script(csv_name: &str, title: &str, log_y: bool) -> String {
    let mut s = String::from("set datafile separator ','\nset key off\nset xlabel 'N'\n");
    if log_y {
        s.push_str("set logscale y\n");
    }
    s.push_str(&format!("set title '{title}'\nplot '{csv_name}' every ::1 using 1:2 with linespoints\npause -1\n"));
    s
}

fn check_scales(m: u32, n_range: &[u32]) -> Result<(), ErrorAnalysisError> {
    for &n in n_range {
        if n <= m {
            return Err(ErrorAnalysisError::ScaleOrderViolation { m, n });
        }
    }
    Ok(())
}

/// Lattice-vs-continuum deviation of `L_k` at UV scale `n` on the modes kept
/// at scale `m`. The continuum block carries its exact normalization.
pub fn momentum_error(k: i64, m: u32, n: u32, norm: NormKind, central_charge: f64) -> Result<f64, ErrorAnalysisError> {
    check_scales(m, &[n])?;
    if n > MAX_ANALYTIC_SCALE {
        return Err(ErrorAnalysisError::ScaleTooLarge(n));
    }
    let spec = lattice::build_spec(n, 1.0, 0.0, Sector::NeveuSchwarz).expect("dyadic massless lattice");
    let amp = QuasiparticleAmplitudes::new(&spec, k);
    let kept = kept_modes(m, central_charge);
    Ok(match norm {
        NormKind::L2Diagonal => kept.iter().map(|&(c, e)| amp.column_error(c, e)).fold(0.0, f64::max),
        NormKind::HsOffDiagonal => kept.iter().map(|&(c, e)| amp.pair_row_error_sqr(c, e).0).sum::<f64>().sqrt(),
        NormKind::ChiralityMixing => kept.iter().map(|&(c, e)| amp.pair_row_error_sqr(c, e).1).sum::<f64>().sqrt(),
    })
}

/// Error of the momentum-space `L_k` against the continuum over `n_range`.
pub fn momentum_error_curve(
    k: i64,
    m: u32,
    n_range: &[u32],
    norm: NormKind,
    central_charge: f64,
) -> Result<ErrorCurve, ErrorAnalysisError> {
    check_scales(m, n_range)?;
    let values = n_range
        .par_iter()
        .map(|&n| momentum_error(k, m, n, norm, central_charge))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ErrorCurve::new(n_range.to_vec(), values, k, m, norm, CurveRg::Momentum, central_charge))
}

/// Sobolev regularity exponents of the Daubechies scaling functions.
pub const SOBOLEV_CAPS: [(usize, f64); 6] =
    [(2, 0.5), (4, 1.0), (6, 1.415), (8, 1.775), (10, 2.096), (12, 2.388)];

pub fn sobolev_exponent_cap(order: usize) -> Result<f64, ErrorAnalysisError> {
    SOBOLEV_CAPS
        .iter()
        .find(|(o, _)| *o == order)
        .map(|&(_, c)| c)
        .ok_or(ErrorAnalysisError::UnsupportedOrder(order))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevOptions {
    /// Simpson nodes per unit frequency.
    pub points_per_unit: usize,
    /// Quadrature runs over `|ξ| ≤ 2^octaves`.
    pub octaves: u32,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self { points_per_unit: 8, octaves: 14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorm {
    pub delta: f64,
    /// `‖s‖_{H^δ}`, infinite when divergent.
    pub value: f64,
    /// Squared norm integrated over the window.
    pub window: f64,
    /// Geometric estimate of the squared norm beyond the window.
    pub tail: f64,
    /// Mean ratio of successive octave integrals at the window edge.
    pub tail_ratio: f64,
    pub divergent: bool,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn sobolev_norm(filter: &WaveletFilter, delta: f64) -> SobolevNorm {
    sobolev_norm_with(filter, delta, SobolevOptions::default())
}

/// `‖s‖²_{H^δ} = (2π)^{-1} ∫ |ŝ(ξ)|² (1 + ξ²)^δ dξ` by octave-wise Simpson
/// quadrature plus a geometric tail whose ratio is the mean decay over the
/// last four octaves.
pub fn sobolev_norm_with(filter: &WaveletFilter, delta: f64, opts: SobolevOptions) -> SobolevNorm {
    let integrand = |xi: f64| oar::scaling_fourier(filter, xi, oar::PRODUCT_FACTORS).norm_sqr() * (1.0 + xi * xi).powf(delta);
    let mut edges = vec![0.0, 1.0];
    for j in 1..=opts.octaves {
        edges.push((1u64 << j) as f64);
    }
    let pieces: Vec<f64> = edges
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| simpson(integrand, w[0], w[1], ((w[1] - w[0]) * opts.points_per_unit as f64) as usize) / PI)
        .collect();
    let window: f64 = pieces.iter().sum();
    let last = &pieces[pieces.len() - 5..];
    let tail_ratio = (last[4] / last[0]).powf(0.25);
    let divergent = !(tail_ratio < 1.0) || !window.is_finite();
    let tail = if divergent { f64::INFINITY } else { last[4] * tail_ratio / (1.0 - tail_ratio) };
    let value = if divergent { f64::INFINITY } else { (window + tail).sqrt() };
    SobolevNorm { delta, value, window, tail, tail_ratio, divergent }
}

/// Default exponent multiplier in the scale factor `2^{-rate·δ·(N-M)}`.
pub const WAVELET_RATE: f64 = 1.0;

/// Factorized bound `‖s‖_{H^δ} 2^{-rate·δ·(N-M)}` on the wavelet
/// approximation error of `L_0` at `c = 0`.
pub fn wavelet_error_curve(order: usize, m: u32, n_range: &[u32], delta: f64) -> Result<ErrorCurve, ErrorAnalysisError> {
    wavelet_error_curve_with_rate(order, m, n_range, delta, WAVELET_RATE)
}

pub fn wavelet_error_curve_with_rate(
    order: usize,
    m: u32,
    n_range: &[u32],
    delta: f64,
    rate: f64,
) -> Result<ErrorCurve, ErrorAnalysisError> {
    let cap = sobolev_exponent_cap(order)?;
    if !(delta > 0.0 && delta < cap) {
        return Err(ErrorAnalysisError::DeltaOutOfRange { order, delta, cap });
    }
    check_scales(m, n_range)?;
    let filter = oar::daubechies_filter(order).map_err(|_| ErrorAnalysisError::UnsupportedOrder(order))?;
    let norm = sobolev_norm(&filter, delta);
    if norm.divergent {
        return Err(ErrorAnalysisError::DeltaOutOfRange { order, delta, cap });
    }
    let values = n_range.iter().map(|&n| norm.value * 2f64.powf(-rate * delta * (n - m) as f64)).collect();
    Ok(ErrorCurve::new(
        n_range.to_vec(),
        values,
        0,
        m,
        NormKind::L2Diagonal,
        CurveRg::Wavelet { order, delta, rate },
        0.0,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Slope of `log(error)` against `log(n)` with `n = 2^{N+1}`.
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in natural-log units.
    pub residual: f64,
}

/// Values below this are treated as numerical zeros by [`fit_decay`].
pub const FIT_FLOOR: f64 = 1e-13;

pub fn fit_decay(scales: &[u32], values: &[f64]) -> Result<DecayFit, ErrorAnalysisError> {
    let usable = values.iter().filter(|&&v| v >= FIT_FLOOR && v.is_finite()).count();
    if scales.len() != values.len() || values.len() < 4 || usable < values.len() {
        return Err(ErrorAnalysisError::DegenerateFit(usable));
    }
    let xs: Vec<f64> = scales.iter().map(|&n| (n as f64 + 1.0) * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let cnt = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / cnt;
    let my = ys.iter().sum::<f64>() / cnt;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    Ok(DecayFit { exponent, intercept, residual: (ss / cnt).sqrt() })
}

/// Momentum profile `f̂(l) = exp(-(l - 2)²/2)` of the smeared field.
pub fn smearing_profile(label: f64) -> f64 {
    (-(label - 2.0).powi(2) / 2.0).exp()
}

/// `⟨Ω| Ψ_f(t) Ψ_f† |Ω⟩` with `Ψ_f = Σ_l f̂(l) â_l` on the lattice ground state.
pub fn lattice_smeared_two_point(spec: &LatticeSpec, t: f64) -> C64 {
    let data = lattice::diagonalize(spec);
    let mut z = ZERO;
    for (i, &q) in data.momenta.iter().enumerate() {
        let f = smearing_profile(spec.momentum_label(q));
        let cs = data.theta[i].cos();
        z += cis(-data.omega[i] * t) * (f * f * cs * cs);
    }
    z
}

/// Continuum value `½ Σ_l f̂(l)² e^{-i|l|t}` over half-integer labels.
pub fn continuum_smeared_two_point(t: f64) -> C64 {
    let mut z = ZERO;
    for j in -64i32..64 {
        let l = j as f64 + 0.5;
        let f = smearing_profile(l);
        z += cis(-l.abs() * t) * (0.5 * f * f);
    }
    z
}

/// Time at which the smeared two-point function is compared.
pub const TWO_POINT_TIME: f64 = 1.0;

/// `|G_N(t) - G(t)|` over UV scales, massless NS sector.
pub fn two_point_error_scan(n_range: &[u32], t: f64) -> Vec<f64> {
    let cont = continuum_smeared_two_point(t);
    n_range
        .iter()
        .map(|&n| {
            let spec = lattice::build_spec(n, 1.0, 0.0, Sector::NeveuSchwarz).expect("dyadic massless lattice");
            (lattice_smeared_two_point(&spec, t) - cont).norm()
        })
        .collect()
}
