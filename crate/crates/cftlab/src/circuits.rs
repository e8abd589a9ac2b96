//! Jordan-Wigner encoding, circuit synthesis and a small statevector
//! simulator that checks the circuits against the Gaussian engine.
//!
//! Encoding: `a_j = σ^x_0 ⋯ σ^x_{j-1} · ½(σ^z_j + iσ^y_j)` on the
//! single-component modes, so `n_j = (1 + σ^x_j)/2` and `(-1)^F = Πσ^x`.
//!
//! Simulator basis. On mode qubit `j` the computational state `|b⟩` stands
//! for the occupation state `φ_b` with `φ_0 = |−⟩` and `φ_1 = (−1)^j |+⟩`
//! (written in the σ^z basis). The product state `⊗|←⟩` is then `|0⋯0⟩` and
//! Fock vectors from [`crate::fock`] are statevectors without conversion.
//! Ancilla qubits use the ordinary σ^z basis. Gates are specified by their
//! physical Pauli content and converted by the simulator.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fock::{self, SparseMatrix};
use crate::gaussian::{self, ConformalFlow, GaussianError, Observable};
use crate::lattice::{self, GaussianState, LatticeError, LatticeSpec, Sector};
use crate::linalg::{self, c, cis, tau_index, C64, I, ONE, ZERO};
use crate::quadratic::{dagger, LinearForm, QuadraticOperator};
use crate::virasoro::{self, VirasoroError};

/// Largest register the statevector simulator accepts.
pub const MAX_SIM_QUBITS: usize = 20;

/// Coefficients below this are dropped from Pauli decompositions.
const PAULI_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("{0} qubits exceed the simulator limit of {MAX_SIM_QUBITS}")]
    TooManyQubits(usize),
    #[error("gate acts on qubit {qubit} but the circuit has {qubits}")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("two-mode gate needs adjacent mode qubits, got ({0}, {1})")]
    NotAdjacent(usize, usize),
    #[error("gate `{0}` must act on ancilla qubits")]
    AncillaRequired(&'static str),
    #[error("Pauli string has length {got}, circuit has {expected} qubits")]
    LengthMismatch { got: usize, expected: usize },
    #[error("non-finite gate parameter")]
    NonFinite,
    #[error("rotation generator is not Hermitian")]
    NonHermitianString,
    #[error("observable is not Hermitian (defect {0:.3e})")]
    NonHermitianObservable(f64),
    #[error("state has {got} amplitudes, expected {expected}")]
    StateSize { got: usize, expected: usize },
    #[error("circuit synthesis needs the NS sector")]
    UnsupportedSector,
    #[error("{0} modes is not a power of two")]
    NonDyadic(usize),
    #[error("momentum label {0} is not on the lattice grid")]
    MomentumOffGrid(f64),
    #[error("field component must be 1 or 2, got {0}")]
    InvalidComponent(u8),
    #[error("Trotter order must be 1 or 2, got {0}")]
    InvalidOrder(u8),
    #[error("Trotter step count must be at least 1")]
    InvalidSteps,
    #[error("postselection outcome has zero probability")]
    ZeroProbability,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

// ---------------------------------------------------------------------------
// Pauli strings

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self · other = i^power · letter`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'I' | 'i' | '_' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Action on a basis state: `(flips, factor)`. Mode qubits use the
    /// occupation basis (σ^x ↦ −Z, σ^y ↦ sY, σ^z ↦ sX with `s = (−1)^q`).
    fn action(self, q: usize, mode: bool, bit: bool) -> (bool, C64) {
        let s = if q % 2 == 0 { 1.0 } else { -1.0 };
        let ybit = if bit { -I } else { I };
        let zsign = if bit { -1.0 } else { 1.0 };
        match (self, mode) {
            (Pauli::I, _) => (false, ONE),
            (Pauli::X, true) => (false, c(-zsign, 0.0)),
            (Pauli::Y, true) => (true, ybit * s),
            (Pauli::Z, true) => (true, c(s, 0.0)),
            (Pauli::X, false) => (true, ONE),
            (Pauli::Y, false) => (true, ybit),
            (Pauli::Z, false) => (false, c(zsign, 0.0)),
        }
    }
}

/// Tensor product of Pauli letters times a phase `i^power`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
    power: u8,
}

impl PauliString {
    pub fn identity(qubits: usize) -> Self {
        Self { letters: vec![Pauli::I; qubits], power: 0 }
    }

    pub fn from_letters(letters: Vec<Pauli>) -> Self {
        Self { letters, power: 0 }
    }

    pub fn single(qubits: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(qubits);
        s.letters[q] = p;
        s
    }

    /// `σ^x_0 ⋯ σ^x_{q-1} p_q`, the Jordan-Wigner string ending at `q`.
    pub fn jw(qubits: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(qubits);
        for l in s.letters.iter_mut().take(q) {
            *l = Pauli::X;
        }
        s.letters[q] = p;
        s
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn power(&self) -> u8 {
        self.power
    }

    pub fn phase(&self) -> C64 {
        [ONE, I, -ONE, -I][self.power as usize % 4]
    }

    pub fn with_power(mut self, power: u8) -> Self {
        self.power = power % 4;
        self
    }

    /// Same letters, phase removed.
    pub fn unphased(&self) -> Self {
        Self { letters: self.letters.clone(), power: 0 }
    }

    pub fn is_hermitian(&self) -> bool {
        self.power % 2 == 0
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.letters[q] != Pauli::I).collect()
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.len(), other.len(), "Pauli string length mismatch");
        let mut power = self.power + other.power;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.mul(b);
                power += p;
                l
            })
            .collect();
        Self { letters, power: power % 4 }
    }

    /// Inverse of a Pauli string (its adjoint).
    pub fn adjoint(&self) -> PauliString {
        Self { letters: self.letters.clone(), power: (4 - self.power % 4) % 4 }
    }

    /// Pads with identities up to `qubits`.
    pub fn extended(&self, qubits: usize) -> PauliString {
        assert!(qubits >= self.len());
        let mut s = self.clone();
        s.letters.resize(qubits, Pauli::I);
        s
    }

    /// Image of basis state `s` in the simulator basis: `P|s⟩ = z |t⟩`.
    fn apply_basis(&self, s: usize, modes: usize) -> (usize, C64) {
        let mut t = s;
        let mut z = self.phase();
        for (q, &p) in self.letters.iter().enumerate() {
            if p == Pauli::I {
                continue;
            }
            let (flip, f) = p.action(q, q < modes, s >> q & 1 == 1);
            if flip {
                t ^= 1 << q;
            }
            z *= f;
        }
        (t, z)
    }

    /// Sparse matrix in the simulator basis; the first `modes` qubits are
    /// mode qubits.
    pub fn sparse_matrix(&self, modes: usize) -> SparseMatrix {
        let dim = 1usize << self.len();
        SparseMatrix::from_triplets(
            dim,
            (0..dim).map(|s| {
                let (t, z) = self.apply_basis(s, modes);
                (t, s, z)
            }),
        )
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ph = ["+", "+i", "-", "-i"][self.power as usize % 4];
        write!(f, "{ph}")?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (power, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let letters = rest
            .chars()
            .map(|ch| Pauli::from_char(ch).ok_or_else(|| format!("bad Pauli letter '{ch}'")))
            .collect::<Result<Vec<_>, _>>()?;
        if letters.is_empty() {
            return Err("empty Pauli string".into());
        }
        Ok(Self { letters, power })
    }
}

/// Weighted sum `Σ c_s P_s`; strings are stored without phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    qubits: usize,
    terms: Vec<(C64, PauliString)>,
}

impl PauliSum {
    pub fn zero(qubits: usize) -> Self {
        Self { qubits, terms: Vec::new() }
    }

    /// Merges duplicate strings and drops negligible coefficients.
    pub fn from_terms(qubits: usize, terms: impl IntoIterator<Item = (C64, PauliString)>) -> Self {
        let mut map: BTreeMap<Vec<Pauli>, C64> = BTreeMap::new();
        for (z, s) in terms {
            assert_eq!(s.len(), qubits, "Pauli string length mismatch");
            *map.entry(s.letters.clone()).or_insert(ZERO) += z * s.phase();
        }
        let scale = map.values().fold(0.0_f64, |a, z| a.max(z.norm())).max(1.0);
        let terms = map
            .into_iter()
            .filter(|(_, z)| z.norm() > PAULI_TOL * scale)
            .map(|(l, z)| (z, PauliString::from_letters(l)))
            .collect();
        Self { qubits, terms }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &PauliSum) -> PauliSum {
        Self::from_terms(self.qubits, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scaled(&self, z: C64) -> PauliSum {
        Self::from_terms(self.qubits, self.terms.iter().map(|(w, s)| (w * z, s.clone())))
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                out.push((a * b, p.mul(q)));
            }
        }
        Self::from_terms(self.qubits, out)
    }

    /// Coefficient of the identity string.
    pub fn identity_coefficient(&self) -> C64 {
        self.terms.iter().filter(|(_, s)| s.is_identity()).map(|(z, _)| *z).sum()
    }

    /// Largest imaginary part of a coefficient; zero for Hermitian sums.
    pub fn max_imaginary(&self) -> f64 {
        self.terms.iter().fold(0.0, |a, (z, _)| a.max(z.im.abs()))
    }

    pub fn max_locality(&self) -> usize {
        self.terms.iter().map(|(_, s)| s.weight()).max().unwrap_or(0)
    }

    /// Pads every string to `qubits`.
    pub fn extended(&self, qubits: usize) -> PauliSum {
        Self { qubits, terms: self.terms.iter().map(|(z, s)| (*z, s.extended(qubits))).collect() }
    }

    /// Sparse matrix in the simulator basis.
    pub fn sparse_matrix(&self, modes: usize) -> SparseMatrix {
        let dim = 1usize << self.qubits;
        let mut trip = Vec::with_capacity(dim * self.terms.len());
        for (z, p) in &self.terms {
            for s in 0..dim {
                let (t, w) = p.apply_basis(s, modes);
                trip.push((t, s, z * w));
            }
        }
        SparseMatrix::from_triplets(dim, trip)
    }
}

/// `(coef, string)` pairs for the Nambu component `α_i` on `m` modes.
fn jw_component(m: usize, i: usize) -> [(C64, PauliString); 2] {
    let (q, sign) = if i < m { (i, 1.0) } else { (i - m, -1.0) };
    [
        (c(0.5, 0.0), PauliString::jw(m, q, Pauli::Z)),
        (c(0.0, 0.5 * sign), PauliString::jw(m, q, Pauli::Y)),
    ]
}

/// Pauli decomposition of a quadratic operator on its `m` mode qubits.
pub fn jordan_wigner(op: &QuadraticOperator) -> PauliSum {
    let m = op.modes();
    let x = op.nambu();
    let comps: Vec<[(C64, PauliString); 2]> = (0..2 * m).map(|i| jw_component(m, i)).collect();
    let mut terms = vec![(op.shift(), PauliString::identity(m))];
    for i in 0..2 * m {
        for j in 0..2 * m {
            let z = x[(i, j)];
            if z == ZERO {
                continue;
            }
            for (a, p) in &comps[tau_index(i, m)] {
                for (b, q) in &comps[j] {
                    terms.push((z * 0.5 * a * b, p.mul(q)));
                }
            }
        }
    }
    PauliSum::from_terms(m, terms)
}

/// Pauli decomposition of a linear form `Σ u_i α_i`.
pub fn jordan_wigner_linear(u: &LinearForm) -> PauliSum {
    let m = u.len() / 2;
    let mut terms = Vec::new();
    for i in 0..2 * m {
        if u[i] == ZERO {
            continue;
        }
        for (a, p) in jw_component(m, i) {
            terms.push((u[i] * a, p));
        }
    }
    PauliSum::from_terms(m, terms)
}

/// The spin-chain Hamiltonian written directly in Pauli form: bulk bonds
/// `(L/2πε)(σ^zσ^z − σ^yσ^y)` around the ring, mass `(L/2πε)λσ^x`, and the
/// boundary correction `−½ε^{-1}(L/π)(1 + s(−1)^F)` on the wrap bond, with
/// `s` the sector wrap sign.
pub fn spin_chain_hamiltonian(spec: &LatticeSpec) -> PauliSum {
    let m = spec.modes();
    let half = 0.5 * spec.hamiltonian_prefactor();
    let bond = |a: usize, b: usize| -> PauliSum {
        let zz = PauliString::single(m, a, Pauli::Z).mul(&PauliString::single(m, b, Pauli::Z));
        let yy = PauliString::single(m, a, Pauli::Y).mul(&PauliString::single(m, b, Pauli::Y));
        PauliSum::from_terms(m, [(c(half, 0.0), zz), (c(-half, 0.0), yy)])
    };
    let mut terms = Vec::new();
    for j in 0..m {
        terms.extend(bond(j, (j + 1) % m).terms);
        if spec.mass() != 0.0 {
            terms.push((c(half * spec.mass(), 0.0), PauliString::single(m, j, Pauli::X)));
        }
    }
    let wrap = bond(m - 1, 0);
    let parity = PauliString::from_letters(vec![Pauli::X; m]);
    let s = spec.sector().wrap_sign();
    for (z, p) in wrap.terms() {
        terms.push((-z, p.clone()));
        terms.push((-z * s, parity.mul(p)));
    }
    PauliSum::from_terms(m, terms)
}

// ---------------------------------------------------------------------------
// Gates and circuits

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(−iθσ/2)` on one qubit.
    Rotation { axis: Axis, angle: f64, qubit: usize },
    Hadamard { qubit: usize },
    /// `exp(iθ(a†_p a†_{p+1} + a_{p+1} a_p))` on mode qubits `(p, p+1)`.
    Bogoliubov { theta: f64, qubit: usize },
    /// Two-mode butterfly on adjacent mode qubits:
    /// `a†_u ↦ (a†_u + a†_w)/√2`, `a†_w ↦ e^{iφ}(a†_u − a†_w)/√2`.
    Fourier { upper: usize, lower: usize, twiddle: f64, adjoint: bool },
    /// Fermionic swap of mode qubits `(p, p+1)`; `|11⟩ ↦ −|11⟩`.
    Fswap { qubit: usize },
    /// `exp(−iθP/2)` for a Hermitian string `P`.
    PauliRotation { string: PauliString, angle: f64 },
    /// Applies `string` when the ancilla `control` is in `|value⟩`.
    ControlledString { control: usize, value: bool, string: PauliString },
    /// `diag(1, 1, 1, e^{iθ})` on two ancillas.
    ControlledPhase { control: usize, target: usize, angle: f64 },
    /// `exp(−i t O)` on the mode register when the ancilla is `|1⟩`.
    ControlledEvolution { control: usize, time: f64, generator: PauliSum },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rotation { axis: Axis::X, .. } => "rx",
            Gate::Rotation { axis: Axis::Y, .. } => "ry",
            Gate::Rotation { axis: Axis::Z, .. } => "rz",
            Gate::Hadamard { .. } => "h",
            Gate::Bogoliubov { .. } => "bog",
            Gate::Fourier { adjoint: false, .. } => "fourier",
            Gate::Fourier { adjoint: true, .. } => "fourier_dg",
            Gate::Fswap { .. } => "fswap",
            Gate::PauliRotation { .. } => "prot",
            Gate::ControlledString { .. } => "cstring",
            Gate::ControlledPhase { .. } => "cphase",
            Gate::ControlledEvolution { .. } => "cevol",
        }
    }

    pub fn inverse(&self) -> Gate {
        match self.clone() {
            Gate::Rotation { axis, angle, qubit } => Gate::Rotation { axis, angle: -angle, qubit },
            Gate::Bogoliubov { theta, qubit } => Gate::Bogoliubov { theta: -theta, qubit },
            Gate::Fourier { upper, lower, twiddle, adjoint } => {
                Gate::Fourier { upper, lower, twiddle, adjoint: !adjoint }
            }
            Gate::PauliRotation { string, angle } => Gate::PauliRotation { string, angle: -angle },
            Gate::ControlledString { control, value, string } => {
                Gate::ControlledString { control, value, string: string.adjoint() }
            }
            Gate::ControlledPhase { control, target, angle } => {
                Gate::ControlledPhase { control, target, angle: -angle }
            }
            Gate::ControlledEvolution { control, time, generator } => {
                Gate::ControlledEvolution { control, time: -time, generator }
            }
            g @ (Gate::Hadamard { .. } | Gate::Fswap { .. }) => g,
        }
    }

    /// Qubits the gate touches.
    pub fn qubits(&self, total: usize, modes: usize) -> Vec<usize> {
        match self {
            Gate::Rotation { qubit, .. } | Gate::Hadamard { qubit } => vec![*qubit],
            Gate::Bogoliubov { qubit, .. } | Gate::Fswap { qubit } => vec![*qubit, qubit + 1],
            Gate::Fourier { upper, lower, .. } => vec![*upper, *lower],
            Gate::PauliRotation { string, .. } => string.support(),
            Gate::ControlledString { control, string, .. } => {
                let mut v = string.support();
                v.push(*control);
                v
            }
            Gate::ControlledPhase { control, target, .. } => vec![*control, *target],
            Gate::ControlledEvolution { control, .. } => {
                let mut v: Vec<usize> = (0..modes.min(total)).collect();
                v.push(*control);
                v
            }
        }
    }

    fn params_finite(&self) -> bool {
        match self {
            Gate::Rotation { angle, .. }
            | Gate::PauliRotation { angle, .. }
            | Gate::ControlledPhase { angle, .. } => angle.is_finite(),
            Gate::Bogoliubov { theta, .. } => theta.is_finite(),
            Gate::Fourier { twiddle, .. } => twiddle.is_finite(),
            Gate::ControlledEvolution { time, generator, .. } => {
                time.is_finite() && generator.terms().iter().all(|(z, _)| z.re.is_finite() && z.im.is_finite())
            }
            Gate::Hadamard { .. } | Gate::Fswap { .. } | Gate::ControlledString { .. } => true,
        }
    }

    fn to_line(&self) -> String {
        let name = self.name();
        match self {
            Gate::Rotation { angle, qubit, .. } => format!("{name} {qubit} {angle:?}"),
            Gate::Hadamard { qubit } => format!("{name} {qubit}"),
            Gate::Bogoliubov { theta, qubit } => format!("{name} {qubit} {} {theta:?}", qubit + 1),
            Gate::Fourier { upper, lower, twiddle, .. } => format!("{name} {upper} {lower} {twiddle:?}"),
            Gate::Fswap { qubit } => format!("{name} {qubit} {}", qubit + 1),
            Gate::PauliRotation { string, angle } => format!("{name} {angle:?} {string}"),
            Gate::ControlledString { control, value, string } => {
                format!("{name} {control} {} {string}", u8::from(*value))
            }
            Gate::ControlledPhase { control, target, angle } => format!("{name} {control} {target} {angle:?}"),
            Gate::ControlledEvolution { control, time, generator } => {
                let terms: Vec<String> = generator.terms().iter().map(|(z, s)| format!("{:?}:{}", z.re, s)).collect();
                format!("{name} {control} {time:?} {}", terms.join(","))
            }
        }
    }
}

/// Gate list on `modes` mode qubits followed by `ancillas` ancilla qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    modes: usize,
    ancillas: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(modes: usize, ancillas: usize) -> Self {
        Self { modes, ancillas, gates: Vec::new() }
    }

    pub fn qubit_count(&self) -> usize {
        self.modes + self.ancillas
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn count(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.name() == name).count()
    }

    fn check_qubit(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.qubit_count() {
            Err(CircuitError::QubitOutOfRange { qubit: q, qubits: self.qubit_count() })
        } else {
            Ok(())
        }
    }

    fn check_string(&self, s: &PauliString) -> Result<(), CircuitError> {
        if s.len() != self.qubit_count() {
            return Err(CircuitError::LengthMismatch { got: s.len(), expected: self.qubit_count() });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), CircuitError> {
        if a.max(b) >= self.modes || a.abs_diff(b) != 1 {
            return Err(CircuitError::NotAdjacent(a, b));
        }
        Ok(())
    }

    fn check_ancilla(&self, q: usize, gate: &'static str) -> Result<(), CircuitError> {
        self.check_qubit(q)?;
        if q < self.modes {
            return Err(CircuitError::AncillaRequired(gate));
        }
        Ok(())
    }

    pub fn validate(&self, g: &Gate) -> Result<(), CircuitError> {
        if !g.params_finite() {
            return Err(CircuitError::NonFinite);
        }
        match g {
            Gate::Rotation { qubit, .. } | Gate::Hadamard { qubit } => self.check_qubit(*qubit),
            Gate::Bogoliubov { qubit, .. } | Gate::Fswap { qubit } => self.check_pair(*qubit, qubit + 1),
            Gate::Fourier { upper, lower, .. } => self.check_pair(*upper, *lower),
            Gate::PauliRotation { string, .. } => {
                self.check_string(string)?;
                if !string.is_hermitian() {
                    return Err(CircuitError::NonHermitianString);
                }
                Ok(())
            }
            Gate::ControlledString { control, string, .. } => {
                self.check_ancilla(*control, "cstring")?;
                self.check_string(string)?;
                if string.letter(*control) != Pauli::I {
                    return Err(CircuitError::AncillaRequired("cstring"));
                }
                Ok(())
            }
            Gate::ControlledPhase { control, target, .. } => {
                self.check_ancilla(*control, "cphase")?;
                self.check_ancilla(*target, "cphase")
            }
            Gate::ControlledEvolution { control, generator, .. } => {
                self.check_ancilla(*control, "cevol")?;
                if generator.qubits() != self.modes {
                    return Err(CircuitError::LengthMismatch { got: generator.qubits(), expected: self.modes });
                }
                if generator.max_imaginary() > 1e-12 {
                    return Err(CircuitError::NonHermitianString);
                }
                Ok(())
            }
        }
    }

    pub fn push(&mut self, g: Gate) -> Result<(), CircuitError> {
        self.validate(&g)?;
        self.gates.push(g);
        Ok(())
    }

    /// Appends the gates of `other`, which must have the same registers.
    pub fn append(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        if other.qubit_count() != self.qubit_count() || other.modes != self.modes {
            return Err(CircuitError::LengthMismatch { got: other.qubit_count(), expected: self.qubit_count() });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Same gates on a register with `ancillas` extra qubits. Pauli strings
    /// are padded with identities.
    pub fn with_ancillas(&self, ancillas: usize) -> Circuit {
        let total = self.modes + ancillas;
        let pad = |s: &PauliString| if s.len() < total { s.extended(total) } else { s.clone() };
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::PauliRotation { string, angle } => Gate::PauliRotation { string: pad(string), angle: *angle },
                Gate::ControlledString { control, value, string } => {
                    Gate::ControlledString { control: *control, value: *value, string: pad(string) }
                }
                other => other.clone(),
            })
            .collect();
        Circuit { modes: self.modes, ancillas, gates }
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { modes: self.modes, ancillas: self.ancillas, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    /// Greedy layer count: each gate starts after the last gate sharing a qubit.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.qubit_count()];
        let mut depth = 0;
        for g in &self.gates {
            let qs = g.qubits(self.qubit_count(), self.modes);
            let d = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in qs {
                level[q] = d;
            }
            depth = depth.max(d);
        }
        depth
    }

    /// Line-oriented text form. Header lines `cftlab-circuit 1`,
    /// `modes <m>` and `ancillas <a>`, then one gate per line:
    ///
    /// ```text
    /// rx|ry|rz <q> <angle>
    /// h <q>
    /// bog <p> <p+1> <theta>
    /// fourier|fourier_dg <upper> <lower> <twiddle>
    /// fswap <p> <p+1>
    /// prot <angle> <string>
    /// cstring <control> <0|1> <string>
    /// cphase <control> <target> <angle>
    /// cevol <control> <time> <coef>:<string>,<coef>:<string>,...
    /// ```
    ///
    /// Strings carry a phase prefix (`+`, `-`, `+i`, `-i`) and one letter
    /// per qubit, qubit 0 first. Lines starting with `#` are comments.
    pub fn to_text(&self) -> String {
        let mut s = format!("cftlab-circuit 1\nmodes {}\nancillas {}\n", self.modes, self.ancillas);
        for g in &self.gates {
            s.push_str(&g.to_line());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit, CircuitError> {
        let mut modes = None;
        let mut ancillas = None;
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| CircuitError::Parse { line, message };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let words: Vec<&str> = t.split_whitespace().collect();
            let num = |i: usize| -> Result<f64, CircuitError> {
                words
                    .get(i)
                    .ok_or_else(|| err(format!("missing field {i}")))?
                    .parse::<f64>()
                    .map_err(|e| err(e.to_string()))
            };
            let idx_at = |i: usize| -> Result<usize, CircuitError> {
                words
                    .get(i)
                    .ok_or_else(|| err(format!("missing field {i}")))?
                    .parse::<usize>()
                    .map_err(|e| err(e.to_string()))
            };
            let string_at = |i: usize| -> Result<PauliString, CircuitError> {
                words.get(i).ok_or_else(|| err(format!("missing field {i}")))?.parse::<PauliString>().map_err(err)
            };
            match words[0] {
                "cftlab-circuit" => {
                    if words.get(1) != Some(&"1") {
                        return Err(err("unsupported format version".into()));
                    }
                    continue;
                }
                "modes" => {
                    modes = Some(idx_at(1)?);
                    continue;
                }
                "ancillas" => {
                    ancillas = Some(idx_at(1)?);
                    continue;
                }
                _ => {}
            }
            if circuit.is_none() {
                let m = modes.ok_or_else(|| err("gate before `modes` header".into()))?;
                circuit = Some(Circuit::new(m, ancillas.unwrap_or(0)));
            }
            let circ = circuit.as_mut().expect("initialized above");
            let pair = |a: usize, b: usize| -> Result<usize, CircuitError> {
                if b != a + 1 {
                    return Err(err(CircuitError::NotAdjacent(a, b).to_string()));
                }
                Ok(a)
            };
            let gate = match words[0] {
                "rx" | "ry" | "rz" => {
                    let axis = match words[0] {
                        "rx" => Axis::X,
                        "ry" => Axis::Y,
                        _ => Axis::Z,
                    };
                    Gate::Rotation { axis, qubit: idx_at(1)?, angle: num(2)? }
                }
                "h" => Gate::Hadamard { qubit: idx_at(1)? },
                "bog" => Gate::Bogoliubov { qubit: pair(idx_at(1)?, idx_at(2)?)?, theta: num(3)? },
                "fourier" | "fourier_dg" => Gate::Fourier {
                    upper: idx_at(1)?,
                    lower: idx_at(2)?,
                    twiddle: num(3)?,
                    adjoint: words[0] == "fourier_dg",
                },
                "fswap" => Gate::Fswap { qubit: pair(idx_at(1)?, idx_at(2)?)? },
                "prot" => Gate::PauliRotation { angle: num(1)?, string: string_at(2)? },
                "cstring" => {
                    let value = match words.get(2) {
                        Some(&"0") => false,
                        Some(&"1") => true,
                        _ => return Err(err("control value must be 0 or 1".into())),
                    };
                    Gate::ControlledString { control: idx_at(1)?, value, string: string_at(3)? }
                }
                "cphase" => Gate::ControlledPhase { control: idx_at(1)?, target: idx_at(2)?, angle: num(3)? },
                "cevol" => {
                    let list = words.get(3).ok_or_else(|| err("missing generator".into()))?;
                    let mut terms = Vec::new();
                    for item in list.split(',') {
                        let (z, s) = item.split_once(':').ok_or_else(|| err(format!("bad term '{item}'")))?;
                        let z: f64 = z.parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
                        let s: PauliString = s.parse().map_err(err)?;
                        terms.push((c(z, 0.0), s));
                    }
                    let qubits = terms.first().map(|(_, s)| s.len()).unwrap_or(circ.modes);
                    if terms.iter().any(|(_, s)| s.len() != qubits) {
                        return Err(err("generator strings differ in length".into()));
                    }
                    Gate::ControlledEvolution {
                        control: idx_at(1)?,
                        time: num(2)?,
                        generator: PauliSum::from_terms(qubits, terms),
                    }
                }
                other => return Err(err(format!("unknown gate '{other}'"))),
            };
            circ.push(gate).map_err(|e| err(e.to_string()))?;
        }
        match circuit {
            Some(c) => Ok(c),
            None => {
                let m = modes.ok_or(CircuitError::Parse { line: 0, message: "missing `modes` header".into() })?;
                Ok(Circuit::new(m, ancillas.unwrap_or(0)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Statevector simulation

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    modes: usize,
    ancillas: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `⊗|←⟩` on the mode qubits, ancillas in `|0⟩`.
    pub fn vacuum(modes: usize, ancillas: usize) -> Result<Self, CircuitError> {
        let n = modes + ancillas;
        if n > MAX_SIM_QUBITS {
            return Err(CircuitError::TooManyQubits(n));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { modes, ancillas, amps })
    }

    pub fn from_amplitudes(modes: usize, ancillas: usize, amps: Vec<C64>) -> Result<Self, CircuitError> {
        let n = modes + ancillas;
        if n > MAX_SIM_QUBITS {
            return Err(CircuitError::TooManyQubits(n));
        }
        if amps.len() != 1 << n {
            return Err(CircuitError::StateSize { got: amps.len(), expected: 1 << n });
        }
        Ok(Self { modes, ancillas, amps })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn qubit_count(&self) -> usize {
        self.modes + self.ancillas
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Tensor product with `extra` ancillas in `|0⟩`.
    pub fn with_ancillas(&self, extra: usize) -> Result<Self, CircuitError> {
        let n = self.qubit_count() + extra;
        if n > MAX_SIM_QUBITS {
            return Err(CircuitError::TooManyQubits(n));
        }
        let mut amps = self.amps.clone();
        amps.resize(1 << n, ZERO);
        Ok(Self { modes: self.modes, ancillas: self.ancillas + extra, amps })
    }

    /// `⟨(-1)^F⟩` over the mode qubits.
    pub fn parity(&self) -> f64 {
        let mask = (1usize << self.modes) - 1;
        self.amps
            .iter()
            .enumerate()
            .map(|(s, z)| if (s & mask).count_ones() % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
            .sum()
    }

    /// `⟨ψ|O|ψ⟩` for an operator on the mode register (no ancillas).
    pub fn expectation(&self, op: &SparseMatrix) -> C64 {
        assert_eq!(op.dim(), self.amps.len(), "operator dimension mismatch");
        op.braket(&self.amps, &self.amps)
    }

    /// Projects ancilla `q` onto `|+⟩` and removes it. Returns the normalized
    /// remainder and the outcome probability.
    pub fn postselect_plus(&self, q: usize) -> Result<Postselection, CircuitError> {
        if q < self.modes || q >= self.qubit_count() {
            return Err(CircuitError::AncillaRequired("postselect"));
        }
        let n = self.qubit_count();
        let low = (1usize << q) - 1;
        let mut out = vec![ZERO; 1 << (n - 1)];
        for (r, v) in out.iter_mut().enumerate() {
            let s0 = (r & low) | ((r & !low) << 1);
            let s1 = s0 | (1 << q);
            *v = (self.amps[s0] + self.amps[s1]) * FRAC_1_SQRT_2;
        }
        let p: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        if p <= 0.0 {
            return Err(CircuitError::ZeroProbability);
        }
        let scale = 1.0 / p.sqrt();
        for z in &mut out {
            *z *= scale;
        }
        Ok(Postselection {
            state: Statevector { modes: self.modes, ancillas: self.ancillas - 1, amps: out },
            probability: p,
        })
    }

    /// Marginal distribution of the listed qubits; bit `i` of the outcome is
    /// qubit `qubits[i]`.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << qubits.len()];
        for (s, z) in self.amps.iter().enumerate() {
            let mut key = 0;
            for (i, &q) in qubits.iter().enumerate() {
                key |= (s >> q & 1) << i;
            }
            out[key] += z.norm_sqr();
        }
        out
    }

    fn apply_single(&mut self, q: usize, u: [[C64; 2]; 2]) {
        let u = if q < self.modes { to_occupation(q, u) } else { u };
        let bit = 1usize << q;
        for s in 0..self.amps.len() {
            if s & bit != 0 {
                continue;
            }
            let (a, b) = (self.amps[s], self.amps[s | bit]);
            self.amps[s] = u[0][0] * a + u[0][1] * b;
            self.amps[s | bit] = u[1][0] * a + u[1][1] * b;
        }
    }

    /// 4×4 matrix on qubits `(p, p+1)` with local index `b_p + 2 b_{p+1}`.
    fn apply_pair(&mut self, p: usize, u: &[[C64; 4]; 4]) {
        let mask = 3usize << p;
        for s in 0..self.amps.len() {
            if s & mask != 0 {
                continue;
            }
            let idx = [s, s | 1 << p, s | 2 << p, s | mask];
            let v = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = (0..4).map(|c| u[r][c] * v[c]).sum();
            }
        }
    }

    fn apply_string(&self, p: &PauliString) -> Vec<C64> {
        let mut out = vec![ZERO; self.amps.len()];
        for (s, &z) in self.amps.iter().enumerate() {
            if z == ZERO {
                continue;
            }
            let (t, w) = p.apply_basis(s, self.modes);
            out[t] += w * z;
        }
        out
    }

    pub fn apply(&mut self, g: &Gate) {
        match g {
            Gate::Rotation { axis, angle, qubit } => {
                let (sn, cs) = (0.5 * angle).sin_cos();
                let pm = pauli_matrix(axis.pauli());
                let mut u = [[ZERO; 2]; 2];
                for r in 0..2 {
                    for k in 0..2 {
                        u[r][k] = pm[r][k] * (-I * sn) + if r == k { c(cs, 0.0) } else { ZERO };
                    }
                }
                self.apply_single(*qubit, u);
            }
            Gate::Hadamard { qubit } => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                self.apply_single(*qubit, [[h, h], [h, -h]]);
            }
            Gate::Bogoliubov { theta, qubit } => {
                let (sn, cs) = theta.sin_cos();
                let mut u = [[ZERO; 4]; 4];
                u[0][0] = c(cs, 0.0);
                u[3][3] = c(cs, 0.0);
                u[0][3] = I * sn;
                u[3][0] = I * sn;
                u[1][1] = ONE;
                u[2][2] = ONE;
                self.apply_pair(*qubit, &u);
            }
            Gate::Fourier { upper, lower, twiddle, adjoint } => {
                let r = c(FRAC_1_SQRT_2, 0.0);
                let e = cis(*twiddle);
                // Columns are the images of a†_upper, a†_lower.
                let mut gm = [[r, e * r], [r, -e * r]];
                if *adjoint {
                    gm = [[gm[0][0].conj(), gm[1][0].conj()], [gm[0][1].conj(), gm[1][1].conj()]];
                }
                if upper > lower {
                    gm = [[gm[1][1], gm[1][0]], [gm[0][1], gm[0][0]]];
                }
                self.apply_pair(*upper.min(lower), &mode_pair_unitary(gm));
            }
            Gate::Fswap { qubit } => {
                self.apply_pair(*qubit, &mode_pair_unitary([[ZERO, ONE], [ONE, ZERO]]));
            }
            Gate::PauliRotation { string, angle } => {
                let (sn, cs) = (0.5 * angle).sin_cos();
                let pv = self.apply_string(string);
                for (a, p) in self.amps.iter_mut().zip(pv) {
                    *a = *a * cs - I * sn * p;
                }
            }
            Gate::ControlledString { control, value, string } => {
                let bit = 1usize << control;
                let pv = self.apply_string(string);
                for (s, (a, p)) in self.amps.iter_mut().zip(pv).enumerate() {
                    if (s & bit != 0) == *value {
                        *a = p;
                    }
                }
            }
            Gate::ControlledPhase { control, target, angle } => {
                let mask = (1usize << control) | (1usize << target);
                let ph = cis(*angle);
                for (s, a) in self.amps.iter_mut().enumerate() {
                    if s & mask == mask {
                        *a *= ph;
                    }
                }
            }
            Gate::ControlledEvolution { control, time, generator } => {
                let dense = generator.sparse_matrix(self.modes).to_dense();
                let u = linalg::unitary_exp(&dense, *time);
                let block = 1usize << self.modes;
                let bit = 1usize << control;
                for start in (0..self.amps.len()).step_by(block) {
                    if start & bit == 0 {
                        continue;
                    }
                    let v = nalgebra::DVector::from_column_slice(&self.amps[start..start + block]);
                    let w = &u * v;
                    self.amps[start..start + block].copy_from_slice(w.as_slice());
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Postselection {
    pub state: Statevector,
    pub probability: f64,
}

impl Postselection {
    /// Mean number of attempts until success.
    pub fn expected_repetitions(&self) -> f64 {
        1.0 / self.probability
    }
}

fn pauli_matrix(p: Pauli) -> [[C64; 2]; 2] {
    match p {
        Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
        Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
        Pauli::Y => [[ZERO, -I], [I, ZERO]],
        Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// `Φ† U Φ` with `Φ = [φ_0 φ_1]` for mode qubit `q`.
fn to_occupation(q: usize, u: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let s = if q % 2 == 0 { 1.0 } else { -1.0 };
    let h = FRAC_1_SQRT_2;
    let phi = [[c(h, 0.0), c(s * h, 0.0)], [c(-h, 0.0), c(s * h, 0.0)]];
    let mut out = [[ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for r in 0..2 {
                for k in 0..2 {
                    out[a][b] += phi[r][a].conj() * u[r][k] * phi[k][b];
                }
            }
        }
    }
    out
}

/// Fock action of a number-conserving two-mode transformation whose
/// one-particle matrix `g` (columns: images of `a†_p`, `a†_{p+1}`).
fn mode_pair_unitary(g: [[C64; 2]; 2]) -> [[C64; 4]; 4] {
    let mut u = [[ZERO; 4]; 4];
    u[0][0] = ONE;
    u[1][1] = g[0][0];
    u[2][1] = g[1][0];
    u[1][2] = g[0][1];
    u[2][2] = g[1][1];
    u[3][3] = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    u
}

/// Runs `circuit` on `input`.
pub fn statevector_simulate(circuit: &Circuit, input: &Statevector) -> Result<Statevector, CircuitError> {
    if circuit.qubit_count() > MAX_SIM_QUBITS {
        return Err(CircuitError::TooManyQubits(circuit.qubit_count()));
    }
    if input.modes != circuit.modes || input.ancillas != circuit.ancillas {
        return Err(CircuitError::StateSize { got: input.amps.len(), expected: 1 << circuit.qubit_count() });
    }
    let mut state = input.clone();
    for g in &circuit.gates {
        state.apply(g);
    }
    Ok(state)
}

// ---------------------------------------------------------------------------
// Ground-state preparation

/// Fourier network `U_FT` together with the slot layout it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierNetwork {
    pub circuit: Circuit,
    /// `slot[i]`: qubit holding momentum `momentum_grid()[i]` before `U_FT`.
    pub slot: Vec<usize>,
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Odd-even transposition sort of `perm` by `rank`, emitting fswaps.
fn route(circuit: &mut Circuit, perm: &mut [usize], rank: impl Fn(usize) -> usize) {
    let n = perm.len();
    let mut sorted = false;
    let mut phase = 0;
    while !sorted {
        sorted = true;
        for p in 0..2 {
            let start = (phase + p) % 2;
            let mut q = start;
            while q + 1 < n {
                if rank(perm[q]) > rank(perm[q + 1]) {
                    circuit.gates.push(Gate::Fswap { qubit: q });
                    perm.swap(q, q + 1);
                    sorted = false;
                }
                q += 2;
            }
        }
        phase ^= 1;
    }
}

/// Fermionic FFT mapping slot `slot[i]` onto the momentum mode `â_{k_i}`:
/// `U_FT a†_{slot[i]} U_FT† = e^{ik_iL} â†_{k_i}`.
///
/// Momentum pairs `(k, −k)` with `k > 0` sit on qubits `(2i, 2i+1)`. The
/// network sorts the slots into bit-reversed order for each radix-2 stage
/// with fswaps, applies the butterflies, sorts back into position order and
/// ends with the phases `e^{iπj/2n}` (up to a global phase).
pub fn fourier_network(spec: &LatticeSpec) -> Result<FourierNetwork, CircuitError> {
    if spec.sector() != Sector::NeveuSchwarz {
        return Err(CircuitError::UnsupportedSector);
    }
    let m = spec.modes();
    if !m.is_power_of_two() {
        return Err(CircuitError::NonDyadic(m));
    }
    let bits = m.trailing_zeros();
    let cells = spec.sites() as i64;
    // Residue r = label - ½ (mod m) of grid index i.
    let residue = |i: usize| ((i as i64 - cells).rem_euclid(m as i64)) as usize;
    let mut slot = vec![0; m];
    let mut perm = vec![0; m];
    for i in 0..cells as usize {
        let pos = cells as usize + i;
        let neg = cells as usize - 1 - i;
        slot[pos] = 2 * i;
        slot[neg] = 2 * i + 1;
        perm[2 * i] = bit_reverse(residue(pos), bits);
        perm[2 * i + 1] = bit_reverse(residue(neg), bits);
    }
    let mut circuit = Circuit::new(m, 0);
    for s in 1..=bits {
        let span = 1usize << s;
        let half = span / 2;
        let mut order = Vec::with_capacity(m);
        for b in (0..m).step_by(span) {
            for t in 0..half {
                order.push(b + t);
                order.push(b + t + half);
            }
        }
        let mut rank = vec![0; m];
        for (r, &p) in order.iter().enumerate() {
            rank[p] = r;
        }
        route(&mut circuit, &mut perm, |p| rank[p]);
        for q in (0..m).step_by(2) {
            let t = perm[q] % span;
            let twiddle = 2.0 * PI * t as f64 / span as f64;
            circuit.gates.push(Gate::Fourier { upper: q, lower: q + 1, twiddle, adjoint: false });
        }
    }
    route(&mut circuit, &mut perm, |p| p);
    for j in 1..m {
        circuit.gates.push(Gate::Rotation { axis: Axis::X, angle: -PI * j as f64 / m as f64, qubit: j });
    }
    Ok(FourierNetwork { circuit, slot })
}

/// `U_FT U_B` acting on `⊗|←⟩`: one layer of Bogoliubov blocks on the
/// momentum pairs followed by the Fourier network.
pub fn ground_state_prep_circuit(spec: &LatticeSpec) -> Result<Circuit, CircuitError> {
    let net = fourier_network(spec)?;
    let data = lattice::diagonalize(spec);
    if !data.zero_modes.is_empty() {
        return Err(LatticeError::DegenerateGroundState { zero_modes: data.zero_modes.len() }.into());
    }
    let cells = spec.sites();
    let mut circuit = Circuit::new(spec.modes(), 0);
    for i in 0..cells {
        circuit.gates.push(Gate::Bogoliubov { theta: data.theta[cells + i], qubit: 2 * i });
    }
    circuit.gates.extend(net.circuit.gates);
    Ok(circuit)
}

// ---------------------------------------------------------------------------
// Field-operator gadget

/// Circuit on the mode register plus one ancilla (the last qubit).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGadget {
    pub circuit: Circuit,
    pub ancilla: usize,
    /// Momentum slot of `k` inside the Fourier network.
    pub slot: usize,
    /// Linear form of the operator realized on postselection.
    pub operator: LinearForm,
}

/// Gadget realizing `ψ̂_k^{(j)}` on postselecting the ancilla on `X = +1`:
/// `j = 1` applies `â_k` and `j = 2` applies `â†_k` (up to a phase), where
/// `â_k` is the momentum mode of the single-component field.
///
/// Gates: Hadamard on the ancilla, `U_FT†`, the controlled strings
/// `σ^x ⋯ σ^x σ^z_k` on `|0⟩` and `−(−1)^j i σ^x ⋯ σ^x σ^y_k` on `|1⟩`, then
/// `U_FT`.
pub fn field_operator_gadget(spec: &LatticeSpec, k_label: f64, j: u8) -> Result<FieldGadget, CircuitError> {
    if j != 1 && j != 2 {
        return Err(CircuitError::InvalidComponent(j));
    }
    let net = fourier_network(spec)?;
    let k = k_label * PI / spec.l();
    let idx = spec.momentum_index(k).filter(|&i| (spec.momentum_label(spec.momentum_grid()[i]) - k_label).abs() < 1e-9);
    let idx = idx.ok_or(CircuitError::MomentumOffGrid(k_label))?;
    let m = spec.modes();
    let anc = m;
    let slot = net.slot[idx];
    let uft = net.circuit.with_ancillas(1);
    let mut circuit = Circuit::new(m, 1);
    circuit.push(Gate::Hadamard { qubit: anc })?;
    circuit.append(&uft.inverse())?;
    let z = PauliString::jw(m, slot, Pauli::Z).extended(m + 1);
    let y = PauliString::jw(m, slot, Pauli::Y).extended(m + 1).with_power(if j == 1 { 1 } else { 3 });
    circuit.push(Gate::ControlledString { control: anc, value: false, string: z })?;
    circuit.push(Gate::ControlledString { control: anc, value: true, string: y })?;
    circuit.append(&uft)?;
    let row = lattice::fourier_nambu(spec).row(idx).transpose();
    let operator = if j == 1 { row } else { dagger(&row) };
    Ok(FieldGadget { circuit, ancilla: anc, slot, operator })
}

// ---------------------------------------------------------------------------
// Trotterization

fn hermitian_terms(op: &QuadraticOperator) -> Result<PauliSum, CircuitError> {
    let scale = linalg::max_abs(op.nambu()).max(1.0);
    let defect = op.hermitian_defect();
    if defect > 1e-9 * scale || op.shift().im.abs() > 1e-9 * scale {
        return Err(CircuitError::NonHermitianObservable(defect));
    }
    Ok(jordan_wigner(op))
}

/// Product-formula circuit for `exp(−itG)` with `G` Hermitian, as Pauli
/// rotations on the mode register (plus `ancillas` idle qubits). Order 1 is
/// Lie-Trotter, order 2 the symmetric Strang splitting. The identity term
/// is a global phase and is omitted.
pub fn trotterize(
    generator: &QuadraticOperator,
    ancillas: usize,
    t: f64,
    steps: usize,
    order: u8,
) -> Result<Circuit, CircuitError> {
    if order != 1 && order != 2 {
        return Err(CircuitError::InvalidOrder(order));
    }
    if steps == 0 {
        return Err(CircuitError::InvalidSteps);
    }
    if !t.is_finite() {
        return Err(CircuitError::NonFinite);
    }
    let m = generator.modes();
    let mut circuit = Circuit::new(m, ancillas);
    if t == 0.0 {
        return Ok(circuit);
    }
    let sum = hermitian_terms(generator)?;
    let terms: Vec<(f64, PauliString)> = sum
        .terms()
        .iter()
        .filter(|(_, s)| !s.is_identity())
        .map(|(z, s)| (z.re, s.extended(m + ancillas)))
        .collect();
    let dt = t / steps as f64;
    for _ in 0..steps {
        if order == 1 {
            for (z, s) in &terms {
                circuit.gates.push(Gate::PauliRotation { string: s.clone(), angle: 2.0 * z * dt });
            }
        } else {
            for (z, s) in terms.iter().chain(terms.iter().rev()) {
                circuit.gates.push(Gate::PauliRotation { string: s.clone(), angle: z * dt });
            }
        }
    }
    Ok(circuit)
}

/// [`trotterize`] applied to the Hermitian generator of a conformal flow.
pub fn trotterize_flow(
    spec: &LatticeSpec,
    flow: ConformalFlow,
    t: f64,
    steps: usize,
    order: u8,
) -> Result<Circuit, CircuitError> {
    let g = virasoro::hermitian_generator(spec, flow.k, flow.phase, flow.chirality)?;
    trotterize(&g, 0, t, steps, order)
}

// ---------------------------------------------------------------------------
// Phase estimation

/// How readout bitstrings map to eigenvalue estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSchema {
    /// Number of readout qubits `r`; ancilla `j` holds bit `r − 1 − j` of
    /// the integer outcome `m`.
    pub bits: usize,
    /// Eigenvalue assigned to `m = 0`.
    pub offset: f64,
    /// Eigenvalue spacing per unit of `m` (the quantization step).
    pub resolution: f64,
}

impl ReadoutSchema {
    pub fn estimate(&self, m: usize) -> f64 {
        self.offset + m as f64 * self.resolution
    }

    /// Outcome distribution over `m` from a final statevector.
    pub fn distribution(&self, state: &Statevector) -> Vec<f64> {
        let qubits: Vec<usize> = (0..self.bits).rev().map(|j| state.modes() + j).collect();
        state.marginal(&qubits)
    }

    /// Mean eigenvalue estimate under `distribution`.
    pub fn mean(&self, distribution: &[f64]) -> f64 {
        distribution.iter().enumerate().map(|(m, p)| p * self.estimate(m)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimationPlan {
    pub circuit: Circuit,
    pub schema: ReadoutSchema,
}

/// Textbook phase estimation of `exp(iτ(O − E_min))` with `r` readout
/// ancillas. The spectrum `[E_min, E_max]` comes from the one-particle
/// eigenvalues, and `τ` is chosen so that every eigenvalue fits below one
/// full turn.
pub fn phase_estimation_plan(observable: &QuadraticOperator, r: usize) -> Result<PhaseEstimationPlan, CircuitError> {
    let sum = hermitian_terms(observable)?;
    let m = observable.modes();
    let (vals, _) = linalg::heigh(observable.nambu());
    let width: f64 = 0.5 * vals.iter().map(|v| v.abs()).sum::<f64>();
    let low = observable.shift().re - 0.5 * width;
    let span = width.max(1e-12) * (1.0 + 2.0_f64.powi(1 - r as i32));
    let tau = 2.0 * PI / span;
    let shifted = sum.plus(&PauliSum::from_terms(m, [(c(-low, 0.0), PauliString::identity(m))]));
    let mut circuit = Circuit::new(m, r);
    for j in 0..r {
        circuit.push(Gate::Hadamard { qubit: m + j })?;
    }
    for j in 0..r {
        let time = -tau * 2.0_f64.powi(j as i32);
        circuit.push(Gate::ControlledEvolution { control: m + j, time, generator: shifted.clone() })?;
    }
    for j in (0..r).rev() {
        for jp in (j + 1)..r {
            let angle = -2.0 * PI / 2.0_f64.powi((jp - j + 1) as i32);
            circuit.push(Gate::ControlledPhase { control: m + jp, target: m + j, angle })?;
        }
        circuit.push(Gate::Hadamard { qubit: m + j })?;
    }
    let resolution = span / 2.0_f64.powi(r as i32);
    Ok(PhaseEstimationPlan { circuit, schema: ReadoutSchema { bits: r, offset: low, resolution } })
}

// ---------------------------------------------------------------------------
// End-to-end pipeline

/// Gadget operator, flow and observable for an end-to-end comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Momentum label of the inserted field (units of π/L).
    pub field_label: f64,
    pub component: u8,
    pub flow: ConformalFlow,
    pub t: f64,
    pub steps: usize,
    pub order: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineResult {
    /// `⟨Φ(t)|H_0|Φ(t)⟩` from the statevector.
    pub statevector: f64,
    /// The same quantity from the Gaussian engine.
    pub gaussian: f64,
    /// Postselection success probability.
    pub probability: f64,
    /// Parity of the prepared ground state.
    pub ground_parity: f64,
    /// Parity after the gadget.
    pub gadget_parity: f64,
}

impl PipelineResult {
    pub fn discrepancy(&self) -> f64 {
        (self.statevector - self.gaussian).abs()
    }
}

/// Prepare `|Ω⟩`, apply the field gadget, evolve with the Trotterized flow
/// and measure `H_0`, both on the statevector and with the Gaussian engine.
pub fn pipeline(spec: &LatticeSpec, cfg: &PipelineConfig) -> Result<PipelineResult, CircuitError> {
    let m = spec.modes();
    let prep = ground_state_prep_circuit(spec)?;
    let omega = statevector_simulate(&prep, &Statevector::vacuum(m, 0)?)?;
    let gadget = field_operator_gadget(spec, cfg.field_label, cfg.component)?;
    let after = statevector_simulate(&gadget.circuit, &omega.with_ancillas(1)?)?;
    let post = after.postselect_plus(gadget.ancilla)?;
    let h0 = lattice::build_staggered_hamiltonian(spec);
    let generator = virasoro::hermitian_generator(spec, cfg.flow.k, cfg.flow.phase, cfg.flow.chirality)?;
    let evo = trotterize(&generator, 0, cfg.t, cfg.steps, cfg.order)?;
    let evolved = statevector_simulate(&evo, &post.state)?;
    let sv = evolved.expectation(&fock::fock_matrix(&h0)).re;
    let gaussian = gaussian_reference(spec, &gadget.operator, &generator, &h0, cfg.t)?;
    Ok(PipelineResult {
        statevector: sv,
        gaussian,
        probability: post.probability,
        ground_parity: omega.parity(),
        gadget_parity: post.state.parity(),
    })
}

/// `⟨Ω|u† O_t u|Ω⟩ / ⟨Ω|u† u|Ω⟩` with `O_t = e^{iGt} O e^{−iGt}`.
pub fn gaussian_reference(
    spec: &LatticeSpec,
    u: &LinearForm,
    generator: &QuadraticOperator,
    observable: &QuadraticOperator,
    t: f64,
) -> Result<f64, CircuitError> {
    let state: GaussianState = lattice::ground_state(spec)?;
    let ot = gaussian::evolve(observable, generator, t)?;
    let ud = Observable::Product(vec![dagger(u)]);
    let uo = Observable::Product(vec![u.clone()]);
    let num = gaussian::expectation(&state, &[ud.clone(), Observable::Quadratic(ot), uo.clone()]);
    let den = gaussian::expectation(&state, &[ud, uo]);
    Ok((num / den).re)
}

/// Trotter error scan of the pipeline over step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterScan {
    pub steps: Vec<usize>,
    pub errors: Vec<f64>,
    /// Fitted slope of `ln error` against `ln steps` (negated order).
    pub exponent: f64,
    /// Largest `error · steps^order / t^{order+1}` over the scan.
    pub constant: f64,
    pub order: u8,
    pub t: f64,
}

impl TrotterScan {
    /// `C t^{order+1} / steps^order`.
    pub fn bound(&self, steps: usize) -> f64 {
        let p = self.order as i32;
        self.constant * self.t.powi(p + 1) / (steps as f64).powi(p)
    }
}

pub fn trotter_scan(spec: &LatticeSpec, cfg: &PipelineConfig, steps: &[usize]) -> Result<TrotterScan, CircuitError> {
    use rayon::prelude::*;
    let errors: Vec<f64> = steps
        .par_iter()
        .map(|&s| pipeline(spec, &PipelineConfig { steps: s, ..*cfg }).map(|r| r.discrepancy()))
        .collect::<Result<_, _>>()?;
    let xs: Vec<f64> = steps.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let p = cfg.order as i32;
    let constant = steps
        .iter()
        .zip(&errors)
        .map(|(&s, &e)| e * (s as f64).powi(p) / cfg.t.abs().powi(p + 1))
        .fold(0.0, f64::max);
    Ok(TrotterScan { steps: steps.to_vec(), errors, exponent, constant, order: cfg.order, t: cfg.t })
}
