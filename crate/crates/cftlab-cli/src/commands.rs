use std::f64::consts::PI;
use std::str::FromStr;

use cftlab::circuits::{self, PipelineConfig};
use cftlab::erroranalysis::{self, ErrorCurve, NormKind};
use cftlab::gaussian::{self, ConformalFlow, Observable};
use cftlab::lattice::{self, build_spec, LatticeSpec, MemoryCap, Parity, Sector};
use cftlab::linalg::{self, cis};
use cftlab::oar::{self, RgScheme};
use cftlab::virasoro::{self, CentralSector, Chirality};
use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::output::{Output, WideTable};

/// Integer list: `5..10` (inclusive), `5..=10`, `-2..2`, `1,3,4` or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct IntList(pub Vec<i64>);

impl FromStr for IntList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let int = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("`{t}` is not an integer"));
        if let Some((a, b)) = s.split_once("..") {
            let (lo, hi) = (int(a)?, int(b.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty range {s}"));
            }
            return Ok(IntList((lo..=hi).collect()));
        }
        let v = s.split(',').map(int).collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(IntList(v))
    }
}

impl IntList {
    fn scales(&self) -> Result<Vec<u32>, CliError> {
        self.0
            .iter()
            .map(|&n| u32::try_from(n).map_err(|_| CliError::Argument(format!("scale {n} is negative"))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rg {
    Momentum,
    Wavelet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    /// Scale; the lattice has 2^(N+1) cells.
    #[arg(long = "N", default_value_t = 4)]
    pub n: u32,
    /// Half circumference.
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// ns or r.
    #[arg(long, default_value = "ns")]
    pub sector: Sector,
}

impl LatticeArgs {
    fn spec(&self) -> Result<LatticeSpec, CliError> {
        Ok(build_spec(self.n, self.l, self.lambda, self.sector)?)
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
}

pub fn spectrum(a: &SpectrumArgs, out: &mut Output) -> Result<String, CliError> {
    let spec = a.lattice.spec()?;
    let data = lattice::diagonalize(&spec);
    let mut s = String::from("k_over_pi_L,omega,theta\n");
    for ((k, w), t) in data.momenta.iter().zip(&data.omega).zip(&data.theta) {
        s.push_str(&format!("{},{},{}\n", spec.momentum_label(*k), fmt_f(*w), fmt_f(*t)));
    }
    out.write("spectrum.csv", &s)?;
    out.script("spectrum.csv", |f| erroranalysis::gnuplot_script(f, "single-particle dispersion", false))?;
    Ok(format!(
        "spectrum: E0 = {:.12} gap = {:.6e} zero modes = {} ({} momenta)",
        data.offset,
        data.min_omega(),
        data.zero_modes.len(),
        data.momenta.len()
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct GroundStateArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Fermion parity sector, required when the ground state is degenerate.
    #[arg(long)]
    pub parity: Option<ParityArg>,
}

pub fn ground_state(a: &GroundStateArgs, out: &mut Output) -> Result<String, CliError> {
    let spec = a.lattice.spec()?;
    let state = match a.parity {
        None => lattice::ground_state(&spec)?,
        Some(ParityArg::Even) => lattice::ground_state_with_parity(&spec, Parity::Even)?,
        Some(ParityArg::Odd) => lattice::ground_state_with_parity(&spec, Parity::Odd)?,
    };
    let h = lattice::build_staggered_hamiltonian(&spec);
    let energy = gaussian::expectation_quadratic(&state, &h).re;
    out.write("ground_state.csv", &lattice::covariance_csv(&spec, &state))?;
    Ok(format!(
        "ground-state: E0 = {energy:.12} parity = {:+.0} purity defect = {:.2e}",
        state.parity(),
        state.purity_defect()
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct CorrelatorArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Flow momenta in units of π/L.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub k: IntList,
    #[arg(long = "t-max", default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long = "t-points", default_value_t = 11)]
    pub t_points: usize,
    /// Phase φ of e^{iφ} L_k + e^{-iφ} L_{-k}.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phase: f64,
    /// Mode of the annihilator a_i on the left.
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    /// Mode of the creator a†_j that is evolved.
    #[arg(long, default_value_t = 0)]
    pub j: usize,
}

pub fn correlator(a: &CorrelatorArgs, out: &mut Output) -> Result<String, CliError> {
    let spec = a.lattice.spec()?;
    let m = spec.modes();
    if a.i >= m || a.j >= m {
        return Err(CliError::Argument(format!("mode index must be below {m}")));
    }
    if a.t_points == 0 {
        return Err(CliError::Argument("t-points must be at least 1".into()));
    }
    let ts: Vec<f64> = if a.t_points == 1 {
        vec![a.t_max]
    } else {
        (0..a.t_points).map(|i| a.t_max * i as f64 / (a.t_points - 1) as f64).collect()
    };
    let state = lattice::ground_state(&spec)?;
    let left = Observable::monomial(m, &[a.i]);
    let right = Observable::monomial(m, &[m + a.j]);
    let rows = gaussian::correlator_scan(&spec, &state, &left, &right, &a.k.0, &ts, a.phase)?;
    out.write("correlator.csv", &gaussian::correlator_csv(&rows))?;
    let last = rows.last().expect("non-empty grid");
    Ok(format!(
        "correlator: {} rows, <a_{} a^dag_{}(t)> at k = {}, t = {} is {:.12} {:+.12}i",
        rows.len(),
        a.i,
        a.j,
        last.k,
        last.t,
        last.value.re,
        last.value.im
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct VirasoroCheckArgs {
    /// Largest scale checked; all N from 0 up to this value are used.
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    /// Largest |k| in units of π/L.
    #[arg(long, default_value_t = 4)]
    pub kmax: i64,
    /// Random (N, k, φ) probes of the Hermitian generator, drawn from --seed.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn commutator_vs_block(spec: &LatticeSpec, k: i64) -> Result<f64, CliError> {
    Ok(if k == 0 {
        let l0 = virasoro::koo_saleur_momentum_block(spec, 0)?;
        let lb0 = virasoro::right_zero_block(spec)?;
        let avg = l0.plus(&lb0).scaled(linalg::c(0.5, 0.0));
        let ks = virasoro::hermitian_generator(spec, 0, 0.0, Chirality::Left)?;
        linalg::max_abs_diff(avg.nambu(), ks.nambu())
    } else {
        let ks = virasoro::koo_saleur(spec, k, 0.0, Chirality::Left)?.payload;
        ks.distance(&virasoro::koo_saleur_momentum_block(spec, k)?)
    })
}

pub fn virasoro_check(a: &VirasoroCheckArgs, seed: u64, out: &mut Output) -> Result<String, CliError> {
    let mut s = String::from("kind,N,k,phase,difference\n");
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for n in 0..=a.n {
        let spec = build_spec(n, 1.0, 0.0, Sector::NeveuSchwarz)?;
        let bound = spec.cells_per_half() as i64;
        for k in -a.kmax..=a.kmax {
            if k.abs() >= bound {
                continue;
            }
            let d = commutator_vs_block(&spec, k)?;
            worst = worst.max(d);
            pairs += 1;
            s.push_str(&format!("block,{n},{k},0,{}\n", fmt_f(d)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..a.samples {
        let n = rng.random_range(1..=a.n.max(1));
        let spec = build_spec(n, 1.0, 0.0, Sector::NeveuSchwarz)?;
        let top = a.kmax.min(spec.cells_per_half() as i64 - 1).max(1);
        let k = rng.random_range(1..=top) * if rng.random::<bool>() { 1 } else { -1 };
        let phase = rng.random_range(0.0..2.0 * PI);
        let g = virasoro::hermitian_generator(&spec, k, phase, Chirality::Left)?;
        let bk = virasoro::koo_saleur_momentum_block(&spec, k)?;
        let bmk = virasoro::koo_saleur_momentum_block(&spec, -k)?;
        let d = g.distance(&bk.scaled(cis(phase)).plus(&bmk.scaled(cis(-phase))));
        worst = worst.max(d);
        s.push_str(&format!("sample,{n},{k},{phase:.17e},{}\n", fmt_f(d)));
    }
    out.write("virasoro_check.csv", &s)?;
    let line = format!(
        "virasoro-check: max difference {worst:.3e} over {pairs} (N, k) pairs and {} samples (tol {:.0e})",
        a.samples, a.tol
    );
    if worst > a.tol {
        return Err(CliError::CheckFailed(line));
    }
    Ok(line)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct CentralChargeArgs {
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    /// Momentum in units of π/L, |k| >= 2.
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    pub k: i64,
    /// c0, c12 or c1.
    #[arg(long, default_value = "c12")]
    pub sector: CentralSector,
}

pub fn central_charge(a: &CentralChargeArgs, out: &mut Output) -> Result<String, CliError> {
    let spec = build_spec(a.n, 1.0, 0.0, Sector::NeveuSchwarz)?;
    let est = virasoro::central_charge_estimate(&spec, a.k, a.sector)?;
    let c = a.sector.value();
    out.write(
        "central_charge.csv",
        &format!("N,k,c,projected,raw\n{},{},{c},{},{}\n", a.n, a.k, fmt_f(est.projected), fmt_f(est.raw)),
    )?;
    Ok(format!(
        "central-charge: c_hat = {:.10} (target {c}, deviation {:.3e}, raw {:.6}) at N = {}, k = {}",
        est.projected,
        (est.projected - c).abs(),
        est.raw,
        a.n,
        a.k
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct RgFlowArgs {
    /// Fine scale.
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    /// Coarsest scale; every scale from M to N-1 is compared.
    #[arg(long = "M", default_value_t = 3)]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = Rg::Momentum)]
    pub rg: Rg,
    /// Daubechies order for the wavelet scheme.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
}

pub fn rg_flow(a: &RgFlowArgs, out: &mut Output) -> Result<String, CliError> {
    if a.m >= a.n {
        return Err(CliError::Argument(format!("need M < N (got M = {}, N = {})", a.m, a.n)));
    }
    let scheme = match a.rg {
        Rg::Momentum => RgScheme::Momentum,
        Rg::Wavelet => RgScheme::Wavelet(oar::daubechies_filter(a.order)?),
    };
    let fine = build_spec(a.n, 1.0, 0.0, Sector::NeveuSchwarz)?;
    let mut s = String::from("M,max_deviation,band_deviation,purity_defect\n");
    let mut first = None;
    for m in a.m..a.n {
        let coarse = build_spec(m, 1.0, 0.0, Sector::NeveuSchwarz)?;
        let d = oar::fixed_point_deviation(&fine, &coarse, &scheme)?;
        first.get_or_insert(d);
        s.push_str(&format!(
            "{m},{},{},{}\n",
            fmt_f(d.max_deviation),
            fmt_f(d.band_deviation),
            fmt_f(d.purity_defect)
        ));
    }
    out.write("rg_flow.csv", &s)?;
    let d = first.expect("M < N");
    Ok(format!(
        "rg-flow: N = {} -> M = {} covariance deviation {:.3e} (low band {:.3e})",
        a.n, a.m, d.max_deviation, d.band_deviation
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct WaveletCascadeArgs {
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Dyadic resolution J of the samples s(i 2^-J).
    #[arg(long, default_value_t = 8)]
    pub resolution: u32,
}

pub fn wavelet_cascade(a: &WaveletCascadeArgs, out: &mut Output) -> Result<String, CliError> {
    let filter = oar::daubechies_filter(a.order)?;
    let samples = oar::cascade(&filter, a.resolution)?;
    out.write("filter.csv", &filter.to_csv())?;
    out.write("scaling_function.csv", &samples.to_csv())?;
    out.write("scaling_fourier.csv", &samples.fourier_csv())?;
    out.script("scaling_function.csv", |f| {
        erroranalysis::gnuplot_script(f, &format!("D{} scaling function", a.order), false)
    })?;
    Ok(format!(
        "wavelet-cascade: D{} converged in {} iterations, residual {:.3e}, {} samples",
        a.order,
        samples.iterations,
        samples.residual,
        samples.values.len()
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct ErrorCurvesArgs {
    #[arg(long, value_enum, default_value_t = Rg::Momentum)]
    pub rg: Rg,
    /// Virasoro index in units of π/L (momentum scheme only).
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub k: i64,
    /// Simulation scale.
    #[arg(long = "M", default_value_t = 4)]
    pub m: u32,
    /// UV scales, e.g. 5..10.
    #[arg(long = "N", default_value = "5..10")]
    pub n: IntList,
    /// Central charge of the kept sector (momentum scheme only).
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Daubechies order (wavelet scheme only).
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Sobolev exponent δ (wavelet scheme only).
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = erroranalysis::WAVELET_RATE)]
    pub rate: f64,
}

fn fit_text(curve: &ErrorCurve) -> String {
    match curve.fit_decay() {
        Ok(f) => format!("{:.4}", f.exponent),
        Err(_) => "n/a".into(),
    }
}

pub fn error_curves(a: &ErrorCurvesArgs, out: &mut Output) -> Result<String, CliError> {
    let scales = a.n.scales()?;
    let index: Vec<i64> = a.n.0.clone();
    match a.rg {
        Rg::Momentum => {
            let norms = [NormKind::L2Diagonal, NormKind::HsOffDiagonal];
            let curves = norms
                .iter()
                .map(|&norm| erroranalysis::momentum_error_curve(a.k, a.m, &scales, norm, a.c))
                .collect::<Result<Vec<_>, _>>()?;
            let mut table = WideTable::new("N", index);
            for c in &curves {
                table.push(c.norm.name(), c.values.clone());
            }
            out.write("error_curves.csv", &table.to_csv())?;
            let meta: Vec<String> = curves.iter().map(|c| c.metadata()).collect();
            out.write("error_curves.meta", &meta.join("\n"))?;
            out.script("error_curves.csv", |f| {
                table.gnuplot_script(f, &format!("momentum RG error, k = {}, M = {}", a.k, a.m), false)
            })?;
            let monotone = curves.iter().all(|c| c.is_monotone());
            Ok(format!(
                "error-curves: momentum k = {} M = {} c = {}: L2 max {:.3e} (exponent {}), HS max {:.3e}, monotone = {monotone}",
                a.k,
                a.m,
                a.c,
                curves[0].max_value(),
                fit_text(&curves[0]),
                curves[1].max_value()
            ))
        }
        Rg::Wavelet => {
            let curve = erroranalysis::wavelet_error_curve_with_rate(a.order, a.m, &scales, a.delta, a.rate)?;
            let mut table = WideTable::new("N", index);
            table.push("bound", curve.values.clone());
            out.write("error_curves.csv", &table.to_csv())?;
            out.write("error_curves.meta", &curve.metadata())?;
            out.script("error_curves.csv", |f| curve.gnuplot_script(f))?;
            Ok(format!(
                "error-curves: wavelet D{} M = {} delta = {}: max {:.3e} (exponent {}), monotone = {}",
                a.order,
                a.m,
                a.delta,
                curve.max_value(),
                fit_text(&curve),
                curve.is_monotone()
            ))
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct CircuitSimArgs {
    /// Lattice cells; must be a power of two.
    #[arg(long, default_value_t = 4)]
    pub sites: usize,
    /// Flow momentum in units of π/L.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub k: i64,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    /// Trotter order, 1 or 2.
    #[arg(long, default_value_t = 2)]
    pub order: u8,
    /// Momentum label of the inserted field, in units of π/L.
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub field: f64,
    /// Field component: 1 inserts an annihilator, 2 a creator.
    #[arg(long, default_value_t = 2)]
    pub component: u8,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phase: f64,
}

pub fn circuit_sim(a: &CircuitSimArgs, out: &mut Output) -> Result<String, CliError> {
    let spec = LatticeSpec::with_cells(a.sites, 1.0, 0.0, Sector::NeveuSchwarz, MemoryCap::default())?;
    let cfg = PipelineConfig {
        field_label: a.field,
        component: a.component,
        flow: ConformalFlow { k: a.k, phase: a.phase, chirality: Chirality::Left },
        t: a.t,
        steps: a.steps,
        order: a.order,
    };
    // The Trotter constant is fitted on coarser step counts than the run.
    let mut fit_steps: Vec<usize> = [16, 8, 4, 2].iter().map(|d| a.steps / d).filter(|&s| s >= 1).collect();
    fit_steps.dedup();
    if fit_steps.len() < 2 {
        return Err(CliError::Argument(format!("steps must be at least 4 to fit a bound (got {})", a.steps)));
    }
    let scan = circuits::trotter_scan(&spec, &cfg, &fit_steps)?;
    let run = circuits::pipeline(&spec, &cfg)?;
    let bound = scan.bound(a.steps);

    let mut s = String::from("steps,discrepancy,bound\n");
    for (st, e) in scan.steps.iter().zip(&scan.errors) {
        s.push_str(&format!("{st},{},{}\n", fmt_f(*e), fmt_f(scan.bound(*st))));
    }
    s.push_str(&format!("{},{},{}\n", a.steps, fmt_f(run.discrepancy()), fmt_f(bound)));
    out.write("circuit_sim.csv", &s)?;
    let prep = circuits::ground_state_prep_circuit(&spec)?;
    out.write("ground_state_prep.circuit", &prep.to_text())?;
    out.write(
        "circuit_sim.meta",
        &format!(
            "statevector = {:.16e}\ngaussian = {:.16e}\nprobability = {:.16e}\nground_parity = {}\ngadget_parity = {}\nfitted_order = {:.6}\nconstant = {:.16e}\n",
            run.statevector,
            run.gaussian,
            run.probability,
            run.ground_parity,
            run.gadget_parity,
            -scan.exponent,
            scan.constant
        ),
    )?;
    let line = format!(
        "circuit-sim: |statevector - gaussian| = {:.3e}, Trotter bound {:.3e}, fitted order {:.3}, postselection probability {:.4}",
        run.discrepancy(),
        bound,
        -scan.exponent,
        run.probability
    );
    if run.discrepancy() > bound {
        return Err(CliError::CheckFailed(line));
    }
    Ok(line)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct SupplementArgs {
    /// Largest UV scale of the momentum curves.
    #[arg(long = "N-max", default_value_t = 10)]
    pub n_max: u32,
    /// Largest UV scale of the wavelet bounds.
    #[arg(long = "wavelet-N-max", default_value_t = 12)]
    pub wavelet_n_max: u32,
}

const SUPPLEMENT_M: u32 = 3;
const SUPPLEMENT_DELTA: f64 = 0.4;

pub fn reproduce_supplement(a: &SupplementArgs, out: &mut Output) -> Result<String, CliError> {
    let m = SUPPLEMENT_M;
    if a.n_max <= m + 1 || a.wavelet_n_max <= m + 1 {
        return Err(CliError::Argument(format!("scale ranges must extend past M + 1 = {}", m + 1)));
    }
    let wscales: Vec<u32> = (m + 1..=a.wavelet_n_max).collect();
    let windex: Vec<i64> = wscales.iter().map(|&n| n as i64).collect();
    let mut summary = Vec::new();

    // S1: one bound per Daubechies order at a common δ.
    let mut t = WideTable::new("N", windex.clone());
    for order in oar::SUPPORTED_ORDERS {
        let c = erroranalysis::wavelet_error_curve(order, m, &wscales, SUPPLEMENT_DELTA)?;
        t.push(&format!("D{order}"), c.values);
    }
    emit(out, "supplement/S1_wavelet_L0_orders.csv", &t, "wavelet L0 bound, c = 0", true)?;

    // S2: D10 at several δ below its Sobolev cap.
    let mut t = WideTable::new("N", windex);
    for delta in [0.25, 0.5, 1.0, 1.5, 2.0] {
        let c = erroranalysis::wavelet_error_curve(10, m, &wscales, delta)?;
        t.push(&format!("delta_{delta}"), c.values);
    }
    emit(out, "supplement/S2_wavelet_L0_delta.csv", &t, "D10 wavelet L0 bounds", true)?;

    let mscales: Vec<u32> = (m + 2..=a.n_max).collect();
    let mindex: Vec<i64> = mscales.iter().map(|&n| n as i64).collect();

    // S3: diagonal L0 error for c = 1/2 and c = 1 at several simulation scales.
    let mut t = WideTable::new("N", mindex.clone());
    for c in [0.5, 1.0] {
        for mm in 2..=m + 1 {
            let curve = erroranalysis::momentum_error_curve(0, mm, &mscales, NormKind::L2Diagonal, c)?;
            t.push(&format!("c{c}_M{mm}"), curve.values);
        }
    }
    emit(out, "supplement/S3_momentum_L0_l2.csv", &t, "momentum RG L0 error", true)?;

    // S4 and S5: L_k for k = 0..4 in the diagonal and pair norms.
    let mut diag = WideTable::new("N", mindex.clone());
    let mut hs = WideTable::new("N", mindex);
    let mut moebius: f64 = 0.0;
    for k in 0..=4i64 {
        let d = erroranalysis::momentum_error_curve(k, m + 1, &mscales, NormKind::L2Diagonal, 0.5)?;
        let h = erroranalysis::momentum_error_curve(k, m + 1, &mscales, NormKind::HsOffDiagonal, 0.5)?;
        if k <= 1 {
            moebius = moebius.max(h.max_value());
        }
        diag.push(&format!("k{k}"), d.values);
        hs.push(&format!("k{k}"), h.values);
    }
    emit(out, "supplement/S4_momentum_Lk_l2.csv", &diag, "momentum RG L_k diagonal error", true)?;
    emit(out, "supplement/S5_momentum_Lk_hs.csv", &hs, "momentum RG L_k pair error", false)?;
    summary.push(format!("Moebius pair error max {moebius:.2e}"));

    Ok(format!("reproduce-supplement: 5 curve files in supplement/, {}", summary.join(", ")))
}

fn emit(out: &mut Output, name: &str, table: &WideTable, title: &str, log_y: bool) -> Result<(), CliError> {
    out.write(name, &table.to_csv())?;
    out.script(name, |f| table.gnuplot_script(f, title, log_y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists() {
        assert_eq!("5..10".parse::<IntList>().unwrap().0, vec![5, 6, 7, 8, 9, 10]);
        assert_eq!("5..=7".parse::<IntList>().unwrap().0, vec![5, 6, 7]);
        assert_eq!("-2..1".parse::<IntList>().unwrap().0, vec![-2, -1, 0, 1]);
        assert_eq!("1, 4".parse::<IntList>().unwrap().0, vec![1, 4]);
        assert_eq!("3".parse::<IntList>().unwrap().0, vec![3]);
        assert!("7..5".parse::<IntList>().is_err());
        assert!("a..5".parse::<IntList>().is_err());
        assert!(IntList(vec![-1]).scales().is_err());
    }
}
