//! Operators of the three-spin register.
//!
//! Basis ordering is `|q1 q2 q3⟩` with `q1` most significant, i.e. basis index
//! `4·q1 + 2·q2 + q3`. Chain Hamiltonians are dimensionless (ħ = 1, two-body
//! coupling = 1); NMR Hamiltonians are in rad/s.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, pauli2, ComplexMatrix, HERMITIAN_TOL};

/// Cartesian axis of a Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> PauliLabel {
        match self {
            Axis::X => PauliLabel::X,
            Axis::Y => PauliLabel::Y,
            Axis::Z => PauliLabel::Z,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis '{other}'"))),
        }
    }
}

/// Dimensionless chain parameters. `k = sqrt(2 + λ²/4)` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub lambda: f64,
}

impl ChainParams {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn k(&self) -> f64 {
        (2.0 + self.lambda * self.lambda / 4.0).sqrt()
    }

    /// The same chain with sites 1 and 3 exchanged, which flips the sign of λ.
    pub fn mirrored(&self) -> Self {
        Self { lambda: -self.lambda }
    }
}

/// Chemical shifts and scalar couplings of the physical register, all in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmrParams {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub j12: f64,
    pub j23: f64,
    pub j13: f64,
    pub delta_nu13: f64,
}

impl Default for NmrParams {
    /// Carbon-13 labelled trichloroethylene. Only Δν13 and the couplings are
    /// sample constants; the carbon offsets are placed symmetrically about the
    /// carbon carrier and the proton sits on resonance.
    fn default() -> Self {
        let delta_nu13 = 905.3;
        Self {
            nu1: delta_nu13 / 2.0,
            nu2: 0.0,
            nu3: -delta_nu13 / 2.0,
            j12: 200.9,
            j23: 9.16,
            j13: 103.1,
            delta_nu13,
        }
    }
}

impl NmrParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.nu1, self.nu2, self.nu3, self.j12, self.j23, self.j13, self.delta_nu13];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("NMR parameters must be finite".into()));
        }
        if self.j12 == 0.0 || self.j23 == 0.0 {
            return Err(Error::InvalidParameter("J12 and J23 must be nonzero".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: NmrParams = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }
}

/// One factor of a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            PauliLabel::I => pauli2::identity(),
            PauliLabel::X => pauli2::x(),
            PauliLabel::Y => pauli2::y(),
            PauliLabel::Z => pauli2::z(),
        }
    }

    fn as_char(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }
}

/// A weighted three-site Pauli product, labels ordered (site 1, site 2, site 3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub labels: [PauliLabel; 3],
    pub coefficient: Complex64,
}

impl PauliString {
    pub fn new(labels: [PauliLabel; 3], coefficient: Complex64) -> Self {
        Self { labels, coefficient }
    }

    pub fn name(&self) -> String {
        self.labels.iter().map(|l| l.as_char()).collect()
    }

    /// The bare operator `P1 ⊗ P2 ⊗ P3` without the coefficient.
    pub fn operator(&self) -> ComplexMatrix {
        pauli_product(self.labels)
    }
}

/// `P1 ⊗ P2 ⊗ P3`.
pub fn pauli_product(labels: [PauliLabel; 3]) -> ComplexMatrix {
    let a = kron(&labels[0].matrix(), &labels[1].matrix()).expect("4x4");
    kron(&a, &labels[2].matrix()).expect("8x8")
}

/// Parses names like `"XZZ"`.
pub fn labels_from_str(name: &str) -> Result<[PauliLabel; 3]> {
    let chars: Vec<char> = name.chars().collect();
    if chars.len() != 3 {
        return Err(Error::InvalidParameter(format!("Pauli string '{name}' must have 3 labels")));
    }
    let mut out = [PauliLabel::I; 3];
    for (slot, ch) in out.iter_mut().zip(chars) {
        *slot = match ch.to_ascii_uppercase() {
            'I' => PauliLabel::I,
            'X' => PauliLabel::X,
            'Y' => PauliLabel::Y,
            'Z' => PauliLabel::Z,
            other => return Err(Error::InvalidParameter(format!("bad Pauli label '{other}'"))),
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Trace-one density matrix.
    Full,
    /// Traceless part only; unit operators on superposed qubits are dropped.
    Deviation,
}

/// An 8×8 density operator tagged with its trace convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    convention: Convention,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, convention: Convention) -> Result<Self> {
        if matrix.dim() != 8 {
            return Err(Error::UnsupportedDimension(matrix.dim()));
        }
        matrix.ensure_hermitian(HERMITIAN_TOL)?;
        let expected = match convention {
            Convention::Full => 1.0,
            Convention::Deviation => 0.0,
        };
        let tr = matrix.trace();
        if (tr - Complex64::new(expected, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.3e}{:+.3e}i does not match {convention:?} convention",
                tr.re, tr.im
            )));
        }
        Ok(Self { matrix, convention })
    }

    pub fn deviation(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, Convention::Deviation)
    }

    /// Deviation operator consisting of a single Pauli string with coefficient 1.
    pub fn pauli(labels: [PauliLabel; 3]) -> Self {
        assert!(labels != [PauliLabel::I; 3], "identity is not a deviation operator");
        Self { matrix: pauli_product(labels), convention: Convention::Deviation }
    }

    /// `I/8 + ε·Δ` for a deviation operator `Δ`, i.e. the high-temperature state.
    pub fn to_full(&self, polarization: f64) -> Result<Self> {
        match self.convention {
            Convention::Full => Ok(self.clone()),
            Convention::Deviation => {
                let m = &ComplexMatrix::identity(8).scale_real(1.0 / 8.0) + &self.matrix.scale_real(polarization);
                Self::new(m, Convention::Full)
            }
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

fn check_site(site: u8) -> Result<usize> {
    if (1..=3).contains(&site) {
        Ok(site as usize - 1)
    } else {
        Err(Error::InvalidSite(site))
    }
}

/// `σ_axis` acting on `site` (1..=3), identity elsewhere.
pub fn pauli_at(site: u8, axis: Axis) -> Result<ComplexMatrix> {
    let idx = check_site(site)?;
    let mut labels = [PauliLabel::I; 3];
    labels[idx] = axis.label();
    Ok(pauli_product(labels))
}

fn term(name: &str) -> ComplexMatrix {
    pauli_product(labels_from_str(name).expect("static label"))
}

/// XY chain plus the three-spin term:
/// `σx¹σx² + σy¹σy² + σx²σx³ + σy²σy³ + (λ/2)(σx¹σz²σy³ − σy¹σz²σx³)`.
pub fn build_h_xy3(p: ChainParams) -> ComplexMatrix {
    let two_body = &(&term("XXI") + &term("YYI")) + &(&term("IXX") + &term("IYY"));
    let three_body = (&term("XZY") - &term("YZX")).scale_real(p.lambda / 2.0);
    &two_body + &three_body
}

/// `C = σx¹σx² + σy²σy³ + (λ/2)σx¹σz²σy³`.
pub fn build_c(p: ChainParams) -> ComplexMatrix {
    &(&term("XXI") + &term("IYY")) + &term("XZY").scale_real(p.lambda / 2.0)
}

/// `D = σy¹σy² + σx²σx³ − (λ/2)σy¹σz²σx³`.
pub fn build_d(p: ChainParams) -> ComplexMatrix {
    &(&term("YYI") + &term("IXX")) - &term("YZX").scale_real(p.lambda / 2.0)
}

/// Weak-coupling NMR Hamiltonian in rad/s:
/// `−π Σ νᵢσzⁱ + (π/2)J12 σz¹σz² + (π/2)J23 σz²σz³`.
pub fn build_h_nmr_weak(p: &NmrParams) -> ComplexMatrix {
    let zeeman = [(p.nu1, "ZII"), (p.nu2, "IZI"), (p.nu3, "IIZ")]
        .iter()
        .fold(ComplexMatrix::zeros(8), |acc, (nu, name)| &acc + &term(name).scale_real(-PI * nu));
    let couplings = &term("ZZI").scale_real(PI / 2.0 * p.j12) + &term("IZZ").scale_real(PI / 2.0 * p.j23);
    &zeeman + &couplings
}

/// Weak Hamiltonian plus the isotropic carbon-carbon coupling
/// `(π/2)J13(σx¹σx³ + σy¹σy³ + σz¹σz³)`.
pub fn build_h_nmr_strong(p: &NmrParams) -> ComplexMatrix {
    let iso = &(&term("XIX") + &term("YIY")) + &term("ZIZ");
    &build_h_nmr_weak(p) + &iso.scale_real(PI / 2.0 * p.j13)
}

/// All 64 three-site Pauli strings in lexicographic (I, X, Y, Z) order.
pub fn all_pauli_labels() -> impl Iterator<Item = [PauliLabel; 3]> {
    PauliLabel::ALL.into_iter().flat_map(|a| {
        PauliLabel::ALL
            .into_iter()
            .flat_map(move |b| PauliLabel::ALL.into_iter().map(move |c| [a, b, c]))
    })
}

/// Coefficient `tr(P†·m)/8` of one Pauli string.
pub fn pauli_coefficient(m: &ComplexMatrix, labels: [PauliLabel; 3]) -> Complex64 {
    let p = pauli_product(labels);
    // P is Hermitian, so tr(P† m) = Σ_ij conj(P_ij) m_ij
    p.entries().iter().zip(m.entries()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / 8.0
}

/// Expands an 8×8 operator in the 64-element Pauli basis.
pub fn pauli_decompose_matrix(m: &ComplexMatrix) -> Vec<PauliString> {
    all_pauli_labels().map(|labels| PauliString::new(labels, pauli_coefficient(m, labels))).collect()
}

pub fn pauli_decompose(rho: &DensityOperator) -> Vec<PauliString> {
    pauli_decompose_matrix(rho.matrix())
}

/// `Σ c_P · P`.
pub fn reassemble(terms: &[PauliString]) -> ComplexMatrix {
    terms
        .iter()
        .fold(ComplexMatrix::zeros(8), |acc, t| &acc + &t.operator().scale(t.coefficient))
}

/// Terms whose coefficient magnitude exceeds `tol`.
pub fn significant_terms(terms: &[PauliString], tol: f64) -> Vec<PauliString> {
    terms.iter().copied().filter(|t| t.coefficient.norm() > tol).collect()
}
