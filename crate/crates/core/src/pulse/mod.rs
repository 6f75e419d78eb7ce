//! Compilation of the commuting propagator factors `U_C(t)` and `U_D(t)` into
//! NMR instruction streams, with ideal replay and a duration model.
//!
//! Ops inside a [`PulseSequence`] are stored in application order: the first
//! op acts first, so the replayed unitary is `G_{n−1} ⋯ G_1 G_0`.

mod compile;
mod duration;
mod format;
mod simulate;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spin::{labels_from_str, pauli_product, ChainParams};

pub use compile::{
    compile_transfer, compile_uc, compile_ud, compile_with_exchange, concatenate, exchange_sites, lower_selective_rotation,
    lower_sequence, lower_zzz, lower_zzz_core,
};
pub use duration::{
    delays, estimate_duration, estimate_duration_with, schedule_delays, DurationConfig, DurationEstimate,
    StepDuration, C1_SELECTIVE_PI_SECONDS, C3_SELECTIVE_PI_SECONDS,
};
pub use format::{parse_sequence, write_sequence};
pub use simulate::{op_unitary, simulate_sequence, target_unitary, verify_replay};

/// Direction of a hard pulse in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RotationAxis {
    #[serde(rename = "x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
}

impl RotationAxis {
    pub fn label(self) -> &'static str {
        match self {
            RotationAxis::PlusX => "x",
            RotationAxis::MinusX => "-x",
            RotationAxis::PlusY => "y",
            RotationAxis::MinusY => "-y",
        }
    }

    pub fn is_negative(self) -> bool {
        matches!(self, RotationAxis::MinusX | RotationAxis::MinusY)
    }

    pub fn is_x(self) -> bool {
        matches!(self, RotationAxis::PlusX | RotationAxis::MinusX)
    }
}

impl fmt::Display for RotationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RotationAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "+x" => Ok(RotationAxis::PlusX),
            "-x" => Ok(RotationAxis::MinusX),
            "y" | "+y" => Ok(RotationAxis::PlusY),
            "-y" => Ok(RotationAxis::MinusY),
            other => Err(Error::MalformedOp(format!("unknown rotation axis '{other}'"))),
        }
    }
}

/// Nonempty subset of the sites 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct SiteSet(u8);

impl SiteSet {
    pub fn new(sites: &[u8]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::MalformedOp("empty target set".into()));
        }
        let mut mask = 0u8;
        for &s in sites {
            if !(1..=3).contains(&s) {
                return Err(Error::InvalidSite(s));
            }
            mask |= 1 << (s - 1);
        }
        Ok(SiteSet(mask))
    }

    pub fn single(site: u8) -> Result<Self> {
        Self::new(&[site])
    }

    /// Both carbons, the pair addressed by nonselective carbon pulses.
    pub fn carbons() -> Self {
        SiteSet(0b101)
    }

    pub fn sites(self) -> impl Iterator<Item = u8> {
        (1..=3u8).filter(move |s| self.0 & (1 << (s - 1)) != 0)
    }

    pub fn contains(self, site: u8) -> bool {
        (1..=3).contains(&site) && self.0 & (1 << (site - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Image under the exchange of sites 1 and 3.
    pub fn exchanged(self) -> Self {
        let b = self.0;
        SiteSet((b & 0b010) | ((b & 0b001) << 2) | ((b & 0b100) >> 2))
    }
}

impl TryFrom<Vec<u8>> for SiteSet {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        SiteSet::new(&v)
    }
}

impl From<SiteSet> for Vec<u8> {
    fn from(s: SiteSet) -> Self {
        s.sites().collect()
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.sites().map(|s| s.to_string()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for SiteSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sites = s
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|_| Error::MalformedOp(format!("bad site '{t}'"))))
            .collect::<Result<Vec<u8>>>()?;
        SiteSet::new(&sites)
    }
}

/// Coupled neighbours. The 1–3 coupling is never used, so it is not representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoupledPair {
    #[serde(rename = "12")]
    OneTwo,
    #[serde(rename = "23")]
    TwoThree,
}

impl CoupledPair {
    pub fn sites(self) -> (u8, u8) {
        match self {
            CoupledPair::OneTwo => (1, 2),
            CoupledPair::TwoThree => (2, 3),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CoupledPair::OneTwo => "12",
            CoupledPair::TwoThree => "23",
        }
    }

    pub fn exchanged(self) -> Self {
        match self {
            CoupledPair::OneTwo => CoupledPair::TwoThree,
            CoupledPair::TwoThree => CoupledPair::OneTwo,
        }
    }
}

impl FromStr for CoupledPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "12" | "1-2" | "1,2" => Ok(CoupledPair::OneTwo),
            "23" | "2-3" | "2,3" => Ok(CoupledPair::TwoThree),
            other => Err(Error::MalformedOp(format!("pair '{other}' is not a coupled neighbour pair"))),
        }
    }
}

/// What a zz evolution is for; drives the hardware delay it is mapped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRole {
    /// The two 1–2 evolutions wrapping the core of a three-spin term.
    ZzzLink,
    /// The 2–3 evolution carrying the three-spin angle.
    ZzzCore,
    /// Tilts the rotation axis away from the transverse plane.
    Tilt,
    /// The time-dependent evolution.
    Central,
}

impl CouplingRole {
    pub fn label(self) -> &'static str {
        match self {
            CouplingRole::ZzzLink => "link",
            CouplingRole::ZzzCore => "core",
            CouplingRole::Tilt => "tilt",
            CouplingRole::Central => "central",
        }
    }
}

impl FromStr for CouplingRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "link" => Ok(CouplingRole::ZzzLink),
            "core" => Ok(CouplingRole::ZzzCore),
            "tilt" => Ok(CouplingRole::Tilt),
            "central" => Ok(CouplingRole::Central),
            other => Err(Error::MalformedOp(format!("unknown coupling role '{other}'"))),
        }
    }
}

/// One instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PulseOp {
    /// `exp(−i(angle/2) Σ_targets σ_axis)`.
    HardRotation { targets: SiteSet, axis: RotationAxis, angle: f64 },
    /// `exp(−i(angle/2) σ_z)` on one site.
    ZRotation { site: u8, angle: f64 },
    /// `exp(−i(angle/2) σ_z σ_z)` on a coupled pair.
    #[serde(rename = "zz_evolution")]
    ZZEvolution {
        pair: CoupledPair,
        angle: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        role: Option<CouplingRole>,
    },
    /// `exp(+i(angle/2) σ_z¹σ_z²σ_z³)`.
    #[serde(rename = "zzz_evolution")]
    ZZZEvolution { angle: f64 },
    /// Free precession; does not enter ideal replay.
    Delay { seconds: f64, note: String },
}

impl PulseOp {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::MalformedOp(format!("{what} {x} is not finite")))
            }
        };
        match self {
            PulseOp::HardRotation { targets, angle, .. } => {
                if targets.is_empty() {
                    return Err(Error::MalformedOp("rotation without targets".into()));
                }
                finite(*angle, "rotation angle")
            }
            PulseOp::ZRotation { site, angle } => {
                if !(1..=3).contains(site) {
                    return Err(Error::InvalidSite(*site));
                }
                finite(*angle, "z-rotation angle")
            }
            PulseOp::ZZEvolution { angle, .. } => finite(*angle, "zz angle"),
            PulseOp::ZZZEvolution { angle } => finite(*angle, "zzz angle"),
            PulseOp::Delay { seconds, .. } => {
                finite(*seconds, "delay")?;
                if *seconds < 0.0 {
                    return Err(Error::MalformedOp(format!("negative delay {seconds}")));
                }
                Ok(())
            }
        }
    }

    /// Image under the exchange of sites 1 and 3.
    pub fn exchanged(&self) -> PulseOp {
        match self.clone() {
            PulseOp::HardRotation { targets, axis, angle } => {
                PulseOp::HardRotation { targets: targets.exchanged(), axis, angle }
            }
            PulseOp::ZRotation { site, angle } => PulseOp::ZRotation { site: 4 - site, angle },
            PulseOp::ZZEvolution { pair, angle, role } => PulseOp::ZZEvolution { pair: pair.exchanged(), angle, role },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignVariant {
    Plus,
    Minus,
}

impl SignVariant {
    pub fn sign(self) -> f64 {
        match self {
            SignVariant::Plus => 1.0,
            SignVariant::Minus => -1.0,
        }
    }
}

impl fmt::Display for SignVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignVariant::Plus => "plus",
            SignVariant::Minus => "minus",
        })
    }
}

impl FromStr for SignVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(SignVariant::Plus),
            "minus" | "-" => Ok(SignVariant::Minus),
            other => Err(Error::InvalidParameter(format!("sign variant '{other}' (expected plus or minus)"))),
        }
    }
}

/// What a sequence implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// `e^{−itC}`
    UC,
    /// `e^{−itD}`
    UD,
    /// `U_C U_D = U(t)`, concatenated with the junction fused.
    Transfer,
    /// A lowered three-spin exponential.
    Zzz,
    /// A lowered single-qubit rotation.
    Rotation,
}

impl Target {
    pub fn label(self) -> &'static str {
        match self {
            Target::UC => "uc",
            Target::UD => "ud",
            Target::Transfer => "transfer",
            Target::Zzz => "zzz",
            Target::Rotation => "rotation",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uc" | "u_c" => Ok(Target::UC),
            "ud" | "u_d" => Ok(Target::UD),
            "transfer" | "u" => Ok(Target::Transfer),
            "zzz" => Ok(Target::Zzz),
            "rotation" => Ok(Target::Rotation),
            other => Err(Error::InvalidParameter(format!("unknown target '{other}'"))),
        }
    }
}

/// A numbered compound operation and the ops that realize it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSpan {
    pub step: u8,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub ops: Vec<PulseOp>,
    pub sign_variant: SignVariant,
    pub target: Target,
    /// Chain time; zero for sequences that do not depend on it.
    pub t: f64,
    /// Three-spin coupling; zero for sequences that do not depend on it.
    pub lambda: f64,
    /// Step numbers dropped because their operation is the identity.
    #[serde(default)]
    pub omitted_steps: Vec<u8>,
    #[serde(default)]
    pub steps: Vec<StepSpan>,
}

impl PulseSequence {
    pub fn new(target: Target, sign_variant: SignVariant, t: f64, lambda: f64) -> Self {
        Self { ops: Vec::new(), sign_variant, target, t, lambda, omitted_steps: Vec::new(), steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends `ops` as numbered step `step`.
    pub fn push_step(&mut self, step: u8, ops: impl IntoIterator<Item = PulseOp>) {
        let start = self.ops.len();
        self.ops.extend(ops);
        self.steps.push(StepSpan { step, start, len: self.ops.len() - start });
    }

    /// Step number owning op `index`, if any.
    pub fn step_of(&self, index: usize) -> Option<u8> {
        self.steps.iter().find(|s| (s.start..s.start + s.len).contains(&index)).map(|s| s.step)
    }

    pub fn zz_pairs(&self) -> impl Iterator<Item = CoupledPair> + '_ {
        self.ops.iter().filter_map(|op| match op {
            PulseOp::ZZEvolution { pair, .. } => Some(*pair),
            _ => None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let seq: PulseSequence = serde_json::from_str(s)?;
        for op in &seq.ops {
            op.validate()?;
        }
        Ok(seq)
    }
}

/// Which commuting part of the Hamiltonian an angular-momentum triple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    C,
    D,
}

/// `(θ_c, θ_d)` with `tan θ_c = 2√2/λ`, `θ_c ∈ (0, π)`, and `θ_d = π − θ_c`.
pub fn rotation_frame_angles(p: ChainParams) -> (f64, f64) {
    let theta_c = (2.0 * SQRT_2).atan2(p.lambda);
    (theta_c, PI - theta_c)
}

/// Half the tilt angle, `½[π/2 − arctan(2√2/λ)]`; zero at λ = 0.
pub fn tilt_angle(p: ChainParams) -> f64 {
    0.5 * (PI / 2.0 - rotation_frame_angles(p).0)
}

/// `(L_x, L_y, L_z)` spanned by the two-spin and three-spin terms of `C` or `D`.
pub fn angular_momentum(flavor: Flavor) -> [ComplexMatrix; 3] {
    let names = match flavor {
        Flavor::C => ["XXI", "IYY", "XZY"],
        Flavor::D => ["IXX", "YYI", "YZX"],
    };
    names.map(|n| pauli_product(labels_from_str(n).expect("static label")).scale_real(0.5))
}
