//! State transfer on pure states, mixed (deviation) states and Bell pairs.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::numerics::scan_and_refine_max;
use crate::propagator::{
    propagate_analytic, propagate_c, propagate_d, transfer_propagator, transfer_times, Direction, TransferTimes,
};
use crate::spin::{
    build_c, build_d, labels_from_str, pauli_coefficient, pauli_decompose, pauli_product, significant_terms, Axis,
    ChainParams, DensityOperator, PauliLabel, PauliString,
};

const NORM_TOL: f64 = 1e-12;
const SHORTCUT_TOL: f64 = 1e-10;

/// Initial condition of a transfer experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// `(α|0⟩ + β|1⟩)₁ ⊗ |s2 s3⟩`, with `spectators = 2·s2 + s3`.
    Pure { alpha: Complex64, beta: Complex64, spectators: u8 },
    /// A single `σ_axis` on `site` in the deviation convention.
    DeviationPauli { axis: Axis, site: u8 },
}

impl InitialState {
    pub fn pure(alpha: Complex64, beta: Complex64, spectators: u8) -> Result<Self> {
        let state = InitialState::Pure { alpha, beta, spectators };
        state.validate()?;
        Ok(state)
    }

    pub fn deviation(axis: Axis, site: u8) -> Result<Self> {
        let state = InitialState::DeviationPauli { axis, site };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialState::Pure { alpha, beta, spectators } => {
                let norm = alpha.norm_sqr() + beta.norm_sqr();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::InvalidState(format!("|α|²+|β|² = {norm}, expected 1")));
                }
                if spectators > 3 {
                    return Err(Error::InvalidState(format!("spectator basis index {spectators} out of range 0..=3")));
                }
                Ok(())
            }
            InitialState::DeviationPauli { site, .. } => {
                if (1..=3).contains(&site) {
                    Ok(())
                } else {
                    Err(Error::InvalidSite(site))
                }
            }
        }
    }

    /// Amplitudes in the computational basis; pure states only.
    pub fn state_vector(&self) -> Result<Vec<Complex64>> {
        self.validate()?;
        match *self {
            InitialState::Pure { alpha, beta, spectators } => {
                let mut v = vec![Complex64::new(0.0, 0.0); 8];
                v[spectators as usize] = alpha;
                v[4 + spectators as usize] = beta;
                Ok(v)
            }
            InitialState::DeviationPauli { .. } => {
                Err(Error::InvalidState("a deviation operator has no state vector".into()))
            }
        }
    }

    /// The deviation operator `σ_axis^site`; deviation states only.
    pub fn operator(&self) -> Result<DensityOperator> {
        self.validate()?;
        match *self {
            InitialState::DeviationPauli { axis, site } => {
                let mut labels = [PauliLabel::I; 3];
                labels[site as usize - 1] = axis.label();
                Ok(DensityOperator::pauli(labels))
            }
            InitialState::Pure { .. } => Err(Error::InvalidState("expected a deviation Pauli operator".into())),
        }
    }
}

/// `U(t)|ψ⟩` for a pure initial state.
pub fn evolve_pure(p: ChainParams, state: &InitialState, t: f64) -> Result<Vec<Complex64>> {
    let psi = state.state_vector()?;
    propagate_analytic(p, t).apply(&psi)
}

/// Removes the global phase by making the largest amplitude real and positive.
/// Among amplitudes of equal magnitude the first one wins.
pub fn normalize_global_phase(v: &[Complex64]) -> Vec<Complex64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match v.iter().find(|z| z.norm() >= max - 1e-12) {
        Some(pivot) if max > 0.0 => {
            let phase = pivot.conj() / pivot.norm();
            v.iter().map(|z| z * phase).collect()
        }
        _ => v.to_vec(),
    }
}

/// Outcome of the forward transfer for one spectator basis state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTransfer {
    /// Initial `|s2 s3⟩` as `[s2, s3]`.
    pub spectators: [u8; 2],
    /// Final 4×4 density block on sites 1 and 2.
    pub block: ComplexMatrix,
    /// Final single-qubit density operator on site 3.
    pub transferred: ComplexMatrix,
}

impl ConditionalTransfer {
    /// Sign relating the transferred coherence to the initial one.
    pub fn coherence_sign(&self, alpha: Complex64, beta: Complex64) -> f64 {
        let initial = alpha * beta.conj();
        if initial.norm() == 0.0 {
            return 1.0;
        }
        (self.transferred.get(0, 1) / initial).re.signum()
    }
}

fn trace_out_last(rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            out.set(i, j, rho.get(2 * i, 2 * j) + rho.get(2 * i + 1, 2 * j + 1));
        }
    }
    out
}

fn trace_out_first_two(rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let sum = (0..4).map(|m| rho.get(2 * m + i, 2 * m + j)).sum();
            out.set(i, j, sum);
        }
    }
    out
}

/// Forward (1 → 3) transfer of `α|0⟩ + β|1⟩` for each of the four spectator
/// basis states, computed by conjugating the full density matrix.
pub fn conditional_transfer_table(
    p: ChainParams,
    alpha: Complex64,
    beta: Complex64,
) -> Result<Vec<ConditionalTransfer>> {
    let u = transfer_propagator(p, Direction::OneToThree);
    (0..4u8)
        .map(|spectators| {
            let psi = InitialState::pure(alpha, beta, spectators)?.state_vector()?;
            let rho = outer(&psi);
            let out = rho.conjugate_by(&u)?;
            let block = trace_out_last(&out);
            let transferred = trace_out_first_two(&out);
            let product = crate::linalg::kron(&block, &transferred)?;
            let defect = (&product - &out).max_abs();
            if defect > SHORTCUT_TOL {
                return Err(Error::CheckFailed {
                    what: "transferred state does not factor as block ⊗ qubit".into(),
                    deviation: defect,
                    tolerance: SHORTCUT_TOL,
                });
            }
            Ok(ConditionalTransfer { spectators: [spectators >> 1, spectators & 1], block, transferred })
        })
        .collect()
}

fn outer(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, v[i] * v[j].conj());
        }
    }
    m
}

/// `U(t) P U(t)†` for a deviation Pauli operator.
///
/// When `P` commutes with one of the two commuting parts of `H`, the evolution
/// under the other part alone is computed as well and must agree.
pub fn evolve_deviation(p: ChainParams, state: &InitialState, t: f64) -> Result<DensityOperator> {
    let initial = state.operator()?;
    let pm = initial.matrix();
    let full = pm.conjugate_by(&propagate_analytic(p, t))?;

    let commutes = |g: ComplexMatrix| g.commutator(pm).map(|c| c.max_abs() < 1e-14);
    let shortcut = if commutes(build_d(p))? {
        Some(("C", propagate_c(p, t)))
    } else if commutes(build_c(p))? {
        Some(("D", propagate_d(p, t)))
    } else {
        None
    };
    if let Some((name, u)) = shortcut {
        let short = pm.conjugate_by(&u)?;
        let deviation = (&short - &full).frobenius_norm();
        if deviation > SHORTCUT_TOL {
            return Err(Error::CheckFailed {
                what: format!("evolution under {name} alone disagrees with full propagator"),
                deviation,
                tolerance: SHORTCUT_TOL,
            });
        }
    }
    DensityOperator::deviation(full)
}

/// The three Pauli strings tracked for an initial `σ_axis` on site 3.
pub fn tracked_strings(axis: Axis) -> [[PauliLabel; 3]; 3] {
    let names = match axis {
        Axis::X => ["IIX", "IYZ", "XZZ"],
        Axis::Y => ["IIY", "IXZ", "YZZ"],
        Axis::Z => ["IIZ", "IZI", "ZII"],
    };
    names.map(|n| labels_from_str(n).expect("static label"))
}

/// One sample of a transfer trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub c_source: f64,
    pub c_middle: f64,
    pub c_target: f64,
}

/// Progress of the transfer of `σ_axis` from site 3 to site 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub lambda: f64,
    pub axis: Axis,
    pub times: TransferTimes,
    pub source: String,
    pub middle: String,
    pub target: String,
    pub trace: Vec<TraceRow>,
    /// Non-negligible Pauli terms at the last grid time.
    pub final_pauli_expansion: Vec<PauliString>,
}

pub const CSV_HEADER: &str = "t,c_source,c_middle,c_target";

impl TransferReport {
    /// Grid points where `|c_target|` has a local maximum (plateaus report
    /// their first point; interior points only).
    pub fn target_peaks(&self) -> Vec<f64> {
        let mags: Vec<f64> = self.trace.iter().map(|r| r.c_target.abs()).collect();
        let mut peaks = Vec::new();
        for i in 1..mags.len().saturating_sub(1) {
            if mags[i] > mags[i - 1] && mags[i] >= mags[i + 1] {
                peaks.push(self.trace[i].t);
            }
        }
        peaks
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.trace {
            writeln!(out, "{:.11e},{:.11e},{:.11e},{:.11e}", r.t, r.c_source, r.c_middle, r.c_target)
                .expect("writing to String");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if let Some(bad) = t_grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidParameter(format!("time grid entry {bad} is not a finite nonnegative number")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Pauli coefficients of the source, middle and target strings along `t_grid`.
pub fn overlap_trace(p: ChainParams, axis: Axis, t_grid: &[f64]) -> Result<TransferReport> {
    validate_grid(t_grid)?;
    let state = InitialState::deviation(axis, 3)?;
    let [source, middle, target] = tracked_strings(axis);
    let mut trace = Vec::with_capacity(t_grid.len());
    let mut last = None;
    for &t in t_grid {
        let rho = evolve_deviation(p, &state, t)?;
        let m = rho.matrix();
        trace.push(TraceRow {
            t,
            c_source: pauli_coefficient(m, source).re,
            c_middle: pauli_coefficient(m, middle).re,
            c_target: pauli_coefficient(m, target).re,
        });
        last = Some(rho);
    }
    let final_rho = last.expect("grid is nonempty");
    let name = |l: [PauliLabel; 3]| PauliString::new(l, Complex64::new(1.0, 0.0)).name();
    Ok(TransferReport {
        lambda: p.lambda,
        axis,
        times: transfer_times(p),
        source: name(source),
        middle: name(middle),
        target: name(target),
        trace,
        final_pauli_expansion: significant_terms(&pauli_decompose(&final_rho), 1e-10),
    })
}

/// Time in `(0, π/k]` maximizing `|c_target|`, from a dense scan refined by
/// golden-section search.
pub fn target_argmax(p: ChainParams, axis: Axis) -> Result<f64> {
    let state = InitialState::deviation(axis, 3)?;
    let target = pauli_product(tracked_strings(axis)[2]);
    let magnitude = |t: f64| {
        let u = propagate_analytic(p, t);
        let rho = state.operator().expect("valid").into_matrix().conjugate_by(&u).expect("8x8");
        let c = target.entries().iter().zip(rho.entries()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / 8.0;
        c.re.abs()
    };
    let period = transfer_times(p).period;
    Ok(scan_and_refine_max(magnitude, 1e-9, period, 10_000, 1e-13))
}

/// The two-qubit Bell states on a pair of sites, amplitudes ordered `00, 01, 10, 11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
    /// `(|00⟩ − |11⟩)/√2`
    PhiMinus,
    /// `(|01⟩ + |10⟩)/√2`
    PsiPlus,
    /// `(|01⟩ − |10⟩)/√2`
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellLabel::PhiPlus => [h, z, z, h],
            BellLabel::PhiMinus => [h, z, z, -h],
            BellLabel::PsiPlus => [z, h, h, z],
            BellLabel::PsiMinus => [z, h, -h, z],
        }
    }

    /// The state expected on sites 1, 2 after the forward transfer.
    pub fn transferred(self) -> BellLabel {
        match self {
            BellLabel::PhiPlus => BellLabel::PhiMinus,
            BellLabel::PhiMinus => BellLabel::PhiPlus,
            other => other,
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "(|00>+|11>)/sqrt2",
            BellLabel::PhiMinus => "(|00>-|11>)/sqrt2",
            BellLabel::PsiPlus => "(|01>+|10>)/sqrt2",
            BellLabel::PsiMinus => "(|01>-|10>)/sqrt2",
        })
    }
}

/// Result of moving a Bell pair from sites 2, 3 to sites 1, 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellRecord {
    pub input: BellLabel,
    pub output: BellLabel,
    /// Component of the final state with site 3 in `|0⟩`, as amplitudes on sites 1, 2.
    pub state: [Complex64; 4],
    /// `⟨output|state⟩`.
    pub phase: Complex64,
    /// Norm of the component with site 3 in `|1⟩`.
    pub leakage: f64,
}

/// `(λ² − 4 + 4iλ)/(λ² + 4)`, the phase acquired by `(|01⟩ + |10⟩)/√2`.
pub fn bell_phase(p: ChainParams) -> Complex64 {
    let l2 = p.lambda * p.lambda;
    Complex64::new(l2 - 4.0, 4.0 * p.lambda) / (l2 + 4.0)
}

/// Applies the forward transfer propagator to `|0⟩₁ ⊗ Bell₂₃` for all four Bell states.
pub fn bell_transfer(p: ChainParams) -> Vec<BellRecord> {
    bell_transfer_with(p, Direction::OneToThree)
}

/// As [`bell_transfer`] with an explicit propagator direction.
pub fn bell_transfer_with(p: ChainParams, direction: Direction) -> Vec<BellRecord> {
    let u = transfer_propagator(p, direction);
    BellLabel::ALL
        .into_iter()
        .map(|input| {
            // site 1 is |0⟩, so the pair amplitudes fill indices 0..4
            let mut psi = vec![Complex64::new(0.0, 0.0); 8];
            psi[..4].copy_from_slice(&input.amplitudes());
            let out = u.apply(&psi).expect("8x8");
            let state = [out[0], out[2], out[4], out[6]];
            let leakage = [out[1], out[3], out[5], out[7]].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let output = input.transferred();
            let phase = output.amplitudes().iter().zip(&state).map(|(e, s)| e.conj() * s).sum();
            BellRecord { input, output, state, phase, leakage }
        })
        .collect()
}
