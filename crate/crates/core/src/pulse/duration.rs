use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{lower_sequence, tilt_angle, CoupledPair, CouplingRole, PulseOp, PulseSequence};
use crate::error::{Error, Result};
use crate::spin::{ChainParams, NmrParams};

/// Shaped (RE-BURP) selective π pulse on C1.
pub const C1_SELECTIVE_PI_SECONDS: f64 = 6.2649e-3;
/// Shaped (Gauss) selective π pulse on C3.
pub const C3_SELECTIVE_PI_SECONDS: f64 = 2.8252e-3;

/// Occurrence model for turning zz evolutions into wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationConfig {
    /// Delay segments per zz evolution; segments are separated by refocusing pulses.
    pub delay_multiplicity: u32,
    /// Shaped selective π pulses spent per zz evolution to decouple the third spin.
    pub refocus_pulses_per_evolution: u32,
    /// Charge the shaped pulse widths; hard pulses are always free.
    pub shaped_pulses: bool,
}

impl Default for DurationConfig {
    fn default() -> Self {
        Self { delay_multiplicity: 4, refocus_pulses_per_evolution: 2, shaped_pulses: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDuration {
    pub step: u8,
    pub delay_seconds: f64,
    pub pulse_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationEstimate {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    pub delay_seconds: f64,
    pub pulse_seconds: f64,
    pub total_seconds: f64,
    pub breakdown: Vec<StepDuration>,
}

/// The six delay lengths, in seconds, for coupling `λ ≥ 0` and chain time `t`.
pub fn delays(p: ChainParams, t: f64, nmr: &NmrParams) -> Result<[f64; 6]> {
    if p.lambda < 0.0 {
        return Err(Error::NegativeLambda(p.lambda));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("chain time {t} must be finite and nonnegative")));
    }
    for (name, j) in [("J12", nmr.j12), ("J23", nmr.j23)] {
        if !(j.is_finite() && j > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} = {j} Hz must be positive")));
        }
    }
    let g = tilt_angle(p);
    let tk = t * p.k();
    let (j12, j23) = (nmr.j12, nmr.j23);
    Ok([
        9.0 / (8.0 * j12),
        1.0 / (16.0 * j23),
        g / (2.0 * PI * j23),
        (tk + 2.0 * PI) / (2.0 * PI * j12),
        (PI - g) / (2.0 * PI * j12),
        tk / (2.0 * PI * j23),
    ])
}

/// Which of the six delays realizes a zz evolution.
fn delay_index(pair: CoupledPair, role: CouplingRole) -> usize {
    match (role, pair) {
        (CouplingRole::ZzzLink, _) => 0,
        (CouplingRole::ZzzCore, _) => 1,
        (CouplingRole::Tilt, CoupledPair::TwoThree) => 2,
        (CouplingRole::Central, CoupledPair::OneTwo) => 3,
        (CouplingRole::Tilt, CoupledPair::OneTwo) => 4,
        (CouplingRole::Central, CoupledPair::TwoThree) => 5,
    }
}

fn refocus_pulse(pair: CoupledPair) -> f64 {
    // a 1–2 evolution decouples C3, a 2–3 evolution decouples C1
    match pair {
        CoupledPair::OneTwo => C3_SELECTIVE_PI_SECONDS,
        CoupledPair::TwoThree => C1_SELECTIVE_PI_SECONDS,
    }
}

pub fn estimate_duration(seq: &PulseSequence, nmr: &NmrParams) -> Result<DurationEstimate> {
    estimate_duration_with(seq, nmr, &DurationConfig::default())
}

/// Wall-clock estimate of a sequence. Three-spin terms are lowered first;
/// existing Delay ops are ignored so scheduled sequences are not counted twice.
pub fn estimate_duration_with(
    seq: &PulseSequence,
    nmr: &NmrParams,
    config: &DurationConfig,
) -> Result<DurationEstimate> {
    nmr.validate()?;
    let d = delays(ChainParams::new(seq.lambda), seq.t, nmr)?;
    let lowered = lower_sequence(seq)?;
    let mut per_step: BTreeMap<u8, (f64, f64)> = BTreeMap::new();
    for (i, op) in lowered.ops.iter().enumerate() {
        let PulseOp::ZZEvolution { pair, angle, role } = op else { continue };
        let (a, b) = pair.sites();
        let j = if (a, b) == (1, 2) { nmr.j12 } else { nmr.j23 };
        // without a role, fall back to the bare precession time θ/(2πJ)
        let segment = match role {
            Some(r) => d[delay_index(*pair, *r)],
            None => (angle / 2.0).abs() / (2.0 * PI * j),
        };
        let delay = segment * f64::from(config.delay_multiplicity);
        let pulses = if config.shaped_pulses {
            refocus_pulse(*pair) * f64::from(config.refocus_pulses_per_evolution)
        } else {
            0.0
        };
        let entry = per_step.entry(lowered.step_of(i).unwrap_or(0)).or_default();
        entry.0 += delay;
        entry.1 += pulses;
    }
    let breakdown: Vec<StepDuration> = per_step
        .into_iter()
        .map(|(step, (delay_seconds, pulse_seconds))| StepDuration { step, delay_seconds, pulse_seconds })
        .collect();
    let delay_seconds: f64 = breakdown.iter().map(|s| s.delay_seconds).sum();
    let pulse_seconds: f64 = breakdown.iter().map(|s| s.pulse_seconds).sum();
    Ok(DurationEstimate {
        d1: d[0],
        d2: d[1],
        d3: d[2],
        d4: d[3],
        d5: d[4],
        d6: d[5],
        delay_seconds,
        pulse_seconds,
        total_seconds: delay_seconds + pulse_seconds,
        breakdown,
    })
}

/// Lowers the sequence and puts a Delay op, annotated with its refocusing
/// pulses, in front of every zz evolution.
pub fn schedule_delays(seq: &PulseSequence, nmr: &NmrParams, config: &DurationConfig) -> Result<PulseSequence> {
    let d = delays(ChainParams::new(seq.lambda), seq.t, nmr)?;
    let lowered = lower_sequence(seq)?;
    let mut out = PulseSequence { ops: Vec::new(), steps: Vec::new(), ..lowered.clone() };
    let mut current: Option<u8> = None;
    let mut buffer = Vec::new();
    let flush = |out: &mut PulseSequence, step: Option<u8>, buffer: &mut Vec<PulseOp>| {
        if buffer.is_empty() {
            return;
        }
        match step {
            Some(s) => out.push_step(s, buffer.drain(..)),
            None => out.ops.append(buffer),
        }
    };
    for (i, op) in lowered.ops.iter().enumerate() {
        let step = lowered.step_of(i);
        if step != current {
            flush(&mut out, current, &mut buffer);
            current = step;
        }
        if let PulseOp::ZZEvolution { pair, role: Some(role), .. } = op {
            let idx = delay_index(*pair, *role);
            let refocused = if *pair == CoupledPair::OneTwo { "C3" } else { "C1" };
            buffer.push(PulseOp::Delay {
                seconds: d[idx] * f64::from(config.delay_multiplicity),
                note: format!(
                    "{}x d{} J{} {} refocus {} pi pulses on {}",
                    config.delay_multiplicity,
                    idx + 1,
                    pair.label(),
                    role.label(),
                    config.refocus_pulses_per_evolution,
                    refocused
                ),
            });
        }
        buffer.push(op.clone());
    }
    flush(&mut out, current, &mut buffer);
    Ok(out)
}
