//! Exact free-fermion engine: Heisenberg evolution of bilinears, Wick
//! contractions and expectation values against covariance matrices.

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{GaussianState, LatticeSpec};
use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::quadratic::{LinearForm, QuadraticOperator};
use crate::virasoro::{self, Chirality, VirasoroError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("generator is not Hermitian (defect {0:.3e})")]
    NonHermitianGenerator(f64),
    #[error("mode count mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
}

/// Relative tolerance for accepting a generator as Hermitian.
const HERMITIAN_TOL: f64 = 1e-9;

/// Observable accepted by the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Quadratic(QuadraticOperator),
    /// Ordered product of linear forms in the Nambu components.
    Product(Vec<LinearForm>),
}

impl Observable {
    /// Ordered product `α_{i_1} α_{i_2} ⋯` of Nambu components.
    pub fn monomial(modes: usize, indices: &[usize]) -> Self {
        Observable::Product(
            indices
                .iter()
                .map(|&i| {
                    let mut u = LinearForm::zeros(2 * modes);
                    u[i] = ONE;
                    u
                })
                .collect(),
        )
    }

    pub fn modes(&self) -> Option<usize> {
        match self {
            Observable::Quadratic(q) => Some(q.modes()),
            Observable::Product(v) => v.first().map(|u| u.len() / 2),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Observable::Quadratic(q) => Observable::Quadratic(q.adjoint()),
            Observable::Product(v) => {
                Observable::Product(v.iter().rev().map(crate::quadratic::dagger).collect())
            }
        }
    }

    /// Expands into `(coefficient, product of linear forms)` terms.
    fn terms(&self) -> Vec<(C64, Vec<LinearForm>)> {
        match self {
            Observable::Product(v) => vec![(ONE, v.clone())],
            Observable::Quadratic(q) => {
                let n = 2 * q.modes();
                let m = q.modes();
                let x = q.nambu();
                let mut out = vec![(q.shift(), Vec::new())];
                for i in 0..n {
                    for j in 0..n {
                        let z = x[(i, j)];
                        if z == ZERO {
                            continue;
                        }
                        let mut u = LinearForm::zeros(n);
                        u[linalg::tau_index(i, m)] = ONE;
                        let mut v = LinearForm::zeros(n);
                        v[j] = ONE;
                        out.push((z * 0.5, vec![u, v]));
                    }
                }
                out
            }
        }
    }
}

/// `⟨O⟩ = ½ Σ X_ij Γ_ij + shift`.
pub fn expectation_quadratic(state: &GaussianState, op: &QuadraticOperator) -> C64 {
    let g = state.covariance();
    let x = op.nambu();
    let mut s = ZERO;
    for (a, b) in x.iter().zip(g.iter()) {
        s += a * b;
    }
    s * 0.5 + op.shift()
}

/// `⟨α_i α_j⟩` as a matrix.
pub fn pair_matrix(state: &GaussianState) -> CMat {
    let m = state.modes();
    let g = state.covariance();
    CMat::from_fn(2 * m, 2 * m, |i, j| g[(linalg::tau_index(i, m), j)])
}

/// Wick evaluation of an ordered product of linear forms.
pub fn expectation_product(state: &GaussianState, forms: &[LinearForm]) -> C64 {
    expectation_product_with(&pair_matrix(state), forms)
}

fn expectation_product_with(pairs: &CMat, forms: &[LinearForm]) -> C64 {
    let n = forms.len();
    if n == 0 {
        return ONE;
    }
    if n % 2 == 1 {
        return ZERO;
    }
    let mv: Vec<LinearForm> = forms.iter().map(|v| pairs * v).collect();
    let mut k = CMat::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let z = forms[a].transpose() * &mv[b];
            k[(a, b)] = z[(0, 0)];
            k[(b, a)] = -z[(0, 0)];
        }
    }
    linalg::pfaffian(&k)
}

/// Expectation of the ordered product of `ops`.
pub fn expectation(state: &GaussianState, ops: &[Observable]) -> C64 {
    match ops {
        [] => ONE,
        [Observable::Quadratic(q)] => expectation_quadratic(state, q),
        [Observable::Quadratic(x), Observable::Quadratic(y)] => {
            expectation_quadratic(state, x) * expectation_quadratic(state, y) + connected(state, x, y)
        }
        _ if ops.iter().all(|o| matches!(o, Observable::Product(_))) => {
            let forms: Vec<LinearForm> = ops
                .iter()
                .flat_map(|o| match o {
                    Observable::Product(v) => v.clone(),
                    Observable::Quadratic(_) => unreachable!(),
                })
                .collect();
            expectation_product(state, &forms)
        }
        _ => {
            let pairs = pair_matrix(state);
            let mut acc = vec![(ONE, Vec::<LinearForm>::new())];
            for o in ops {
                let terms = o.terms();
                let mut next = Vec::with_capacity(acc.len() * terms.len());
                for (c0, f0) in &acc {
                    for (c1, f1) in &terms {
                        let mut f = f0.clone();
                        f.extend(f1.iter().cloned());
                        next.push((c0 * c1, f));
                    }
                }
                acc = next;
            }
            acc.par_iter().map(|(c0, f)| c0 * expectation_product_with(&pairs, f)).collect::<Vec<_>>().into_iter().sum()
        }
    }
}

/// `⟨O_X O_Y⟩ - ⟨O_X⟩⟨O_Y⟩ = ½ tr(X (1 - Q) Y Q)` with `Q = Γᵀ`.
pub fn connected(state: &GaussianState, x: &QuadraticOperator, y: &QuadraticOperator) -> C64 {
    let q = state.covariance().transpose();
    let n = q.nrows();
    let iq = CMat::identity(n, n) - &q;
    let left = linalg::smart_mul(x.nambu(), &iq);
    let right = linalg::smart_mul(y.nambu(), &q);
    linalg::trace_of_product(&left, &right) * 0.5
}

/// `⟨H²⟩ - ⟨H⟩²`.
pub fn variance(state: &GaussianState, op: &QuadraticOperator) -> f64 {
    connected(state, op, op).re
}

/// One-particle propagator `U = exp(-i 𝒢 t)` of a Hermitian generator.
pub fn propagator(generator: &QuadraticOperator, t: f64) -> Result<CMat, GaussianError> {
    let scale = linalg::max_abs(generator.nambu()).max(1.0);
    let defect = linalg::hermitian_defect(generator.nambu());
    if defect > HERMITIAN_TOL * scale {
        return Err(GaussianError::NonHermitianGenerator(defect));
    }
    Ok(linalg::unitary_exp(generator.nambu(), t))
}

/// Heisenberg picture `e^{iGt} O e^{-iGt}`; Nambu components evolve as
/// `α ↦ U α` with `U = exp(-i𝒢t)`.
pub fn evolve(
    op: &QuadraticOperator,
    generator: &QuadraticOperator,
    t: f64,
) -> Result<QuadraticOperator, GaussianError> {
    if op.modes() != generator.modes() {
        return Err(GaussianError::ModeMismatch(op.modes(), generator.modes()));
    }
    let u = propagator(generator, t)?;
    Ok(evolve_with(op, &u))
}

/// Heisenberg evolution by a precomputed propagator.
pub fn evolve_with(op: &QuadraticOperator, u: &CMat) -> QuadraticOperator {
    let x = u.adjoint() * op.nambu() * u;
    QuadraticOperator::from_nambu(x, op.shift())
}

pub fn evolve_observable(obs: &Observable, u: &CMat) -> Observable {
    match obs {
        Observable::Quadratic(q) => Observable::Quadratic(evolve_with(q, u)),
        Observable::Product(v) => {
            let ut = u.transpose();
            Observable::Product(v.iter().map(|f| &ut * f).collect())
        }
    }
}

/// Schrödinger picture `e^{-iGt} ρ e^{iGt}`: `Γ ↦ Ū Γ Uᵀ`.
pub fn evolve_state(
    state: &GaussianState,
    generator: &QuadraticOperator,
    t: f64,
) -> Result<GaussianState, GaussianError> {
    if state.modes() != generator.modes() {
        return Err(GaussianError::ModeMismatch(state.modes(), generator.modes()));
    }
    let u = propagator(generator, t)?;
    let cov = u.map(|z| z.conj()) * state.covariance() * u.transpose();
    Ok(GaussianState::from_covariance(cov))
}

/// Parameters of the Hermitian Virasoro generator driving a correlator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalFlow {
    /// Momentum in units of π/L.
    pub k: i64,
    /// Phase `φ` of `e^{iφ} L_k + e^{-iφ} L_{-k}`.
    pub phase: f64,
    pub chirality: Chirality,
}

impl ConformalFlow {
    pub fn new(k: i64) -> Self {
        Self { k, phase: 0.0, chirality: Chirality::Left }
    }
}

/// `⟨Ω| A B_t |Ω⟩` with `B_t = e^{itG} B e^{-itG}`.
pub fn conformal_correlator(
    spec: &LatticeSpec,
    state: &GaussianState,
    a: &Observable,
    b: &Observable,
    flow: ConformalFlow,
    t: f64,
) -> Result<C64, GaussianError> {
    let g = virasoro::hermitian_generator(spec, flow.k, flow.phase, flow.chirality)?;
    let u = propagator(&g, t)?;
    let bt = evolve_observable(b, &u);
    Ok(expectation(state, &[a.clone(), bt]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorRow {
    pub k: i64,
    pub t: f64,
    pub value: C64,
}

/// Correlators over a `(k, t)` grid; rows come out in `ks`-major order.
pub fn correlator_scan(
    spec: &LatticeSpec,
    state: &GaussianState,
    a: &Observable,
    b: &Observable,
    ks: &[i64],
    ts: &[f64],
    phase: f64,
) -> Result<Vec<CorrelatorRow>, GaussianError> {
    let grid: Vec<(i64, f64)> = ks.iter().flat_map(|&k| ts.iter().map(move |&t| (k, t))).collect();
    grid.par_iter()
        .map(|&(k, t)| {
            let flow = ConformalFlow { k, phase, chirality: Chirality::Left };
            conformal_correlator(spec, state, a, b, flow, t).map(|value| CorrelatorRow { k, t, value })
        })
        .collect()
}

pub fn correlator_csv(rows: &[CorrelatorRow]) -> String {
    let mut s = String::from("k,t,re,im\n");
    for r in rows {
        s.push_str(&format!("{},{},{:.16e},{:.16e}\n", r.k, r.t, r.value.re, r.value.im));
    }
    s
}
