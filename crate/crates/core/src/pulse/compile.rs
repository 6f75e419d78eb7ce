use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;

use super::{
    tilt_angle, CoupledPair, CouplingRole, Flavor, PulseOp, PulseSequence, RotationAxis, SignVariant, SiteSet, StepSpan,
    Target,
};
use crate::error::{Error, Result};
use crate::linalg::{pauli2, ComplexMatrix};
use crate::spin::ChainParams;

// Builders in the `e^{iθσ}` notation used by the decompositions; each returns
// the equivalent op in the `e^{−i(angle/2)…}` op convention.

fn site(s: u8) -> SiteSet {
    SiteSet::single(s).expect("static site")
}

fn rx(targets: SiteSet, theta: f64) -> PulseOp {
    let axis = if theta > 0.0 { RotationAxis::MinusX } else { RotationAxis::PlusX };
    PulseOp::HardRotation { targets, axis, angle: 2.0 * theta.abs() }
}

fn ry(targets: SiteSet, theta: f64) -> PulseOp {
    let axis = if theta > 0.0 { RotationAxis::MinusY } else { RotationAxis::PlusY };
    PulseOp::HardRotation { targets, axis, angle: 2.0 * theta.abs() }
}

fn rz(s: u8, theta: f64) -> PulseOp {
    PulseOp::ZRotation { site: s, angle: -2.0 * theta }
}

fn zz(pair: CoupledPair, theta: f64, role: CouplingRole) -> PulseOp {
    PulseOp::ZZEvolution { pair, angle: -2.0 * theta, role: Some(role) }
}

fn zzz(theta: f64) -> PulseOp {
    PulseOp::ZZZEvolution { angle: 2.0 * theta }
}

/// Turns a product written left to right (last-applied factor first) into
/// application order.
fn applied(mut written: Vec<PulseOp>) -> Vec<PulseOp> {
    written.reverse();
    written
}

fn check_inputs(p: ChainParams, t: f64) -> Result<()> {
    if !p.lambda.is_finite() || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("λ = {}, t = {t} must be finite", p.lambda)));
    }
    if p.lambda < 0.0 {
        return Err(Error::NegativeLambda(p.lambda));
    }
    Ok(())
}

/// Builds a five-step sequence from factor groups given in written order.
/// Groups flagged as tilts are dropped when the tilt angle vanishes.
fn assemble(
    target: Target,
    p: ChainParams,
    t: f64,
    sign: SignVariant,
    first_step: u8,
    written_groups: [(Vec<PulseOp>, bool); 5],
) -> PulseSequence {
    let skip_tilts = tilt_angle(p) == 0.0;
    let mut seq = PulseSequence::new(target, sign, t, p.lambda);
    for (offset, (group, is_tilt)) in written_groups.into_iter().rev().enumerate() {
        let step = first_step + offset as u8;
        if is_tilt && skip_tilts {
            seq.omitted_steps.push(step);
        } else {
            seq.push_step(step, applied(group));
        }
    }
    seq
}

/// `U_C(t) = e^{−itC}` as steps 1–5.
pub fn compile_uc(p: ChainParams, t: f64, sign: SignVariant) -> Result<PulseSequence> {
    check_inputs(p, t)?;
    let s = sign.sign() * FRAC_PI_4;
    let g = tilt_angle(p);
    let tk = t * p.k();
    use CoupledPair::{OneTwo, TwoThree};
    let groups = [
        (vec![ry(site(1), -s), rx(site(3), s), zzz(-FRAC_PI_8)], false),
        (vec![rx(site(2), -s), zz(TwoThree, -g, CouplingRole::Tilt), rx(site(2), s)], true),
        (vec![ry(site(2), -s), zz(OneTwo, -tk, CouplingRole::Central), ry(site(2), s)], false),
        (vec![rx(site(2), s), zz(TwoThree, -g, CouplingRole::Tilt), rx(site(2), -s)], true),
        (vec![zzz(FRAC_PI_8), ry(site(1), s), rx(site(3), -s)], false),
    ];
    Ok(assemble(Target::UC, p, t, sign, 1, groups))
}

/// `U_D(t) = e^{−itD}` as steps 6–10.
pub fn compile_ud(p: ChainParams, t: f64, sign: SignVariant) -> Result<PulseSequence> {
    check_inputs(p, t)?;
    let s = sign.sign() * FRAC_PI_4;
    let g = tilt_angle(p);
    let tk = t * p.k();
    use CoupledPair::{OneTwo, TwoThree};
    let groups = [
        (vec![rx(site(1), -s), ry(site(3), s), zzz(-FRAC_PI_8)], false),
        (vec![rx(site(2), -s), zz(OneTwo, -g, CouplingRole::Tilt), rx(site(2), s)], true),
        (vec![ry(site(2), s), zz(TwoThree, -tk, CouplingRole::Central), ry(site(2), -s)], false),
        (vec![rx(site(2), s), zz(OneTwo, -g, CouplingRole::Tilt), rx(site(2), -s)], true),
        (vec![zzz(FRAC_PI_8), rx(site(1), s), ry(site(3), -s)], false),
    ];
    Ok(assemble(Target::UD, p, t, sign, 6, groups))
}

/// Full transfer propagator `U(t)`: `U_C` followed by `U_D` with the junction fused.
pub fn compile_transfer(p: ChainParams, t: f64, sign: SignVariant) -> Result<PulseSequence> {
    concatenate(&compile_uc(p, t, sign)?, &compile_ud(p, t, sign)?)
}

/// Relabels sites 1 ↔ 3 in every op.
pub fn exchange_sites(seq: &PulseSequence) -> PulseSequence {
    PulseSequence { ops: seq.ops.iter().map(PulseOp::exchanged).collect(), ..seq.clone() }
}

fn renumber(mut seq: PulseSequence, shift: i16) -> PulseSequence {
    let moved = |s: u8| (s as i16 + shift) as u8;
    seq.omitted_steps = seq.omitted_steps.iter().map(|&s| moved(s)).collect();
    for span in &mut seq.steps {
        span.step = moved(span.step);
    }
    seq
}

/// Compiles for either sign of λ. Negative λ uses the exchange symmetry
/// `C(λ) = S13 D(−λ) S13`: the mirrored sequence for `−λ` with sites 1 and 3
/// relabelled.
pub fn compile_with_exchange(target: Target, p: ChainParams, t: f64, sign: SignVariant) -> Result<PulseSequence> {
    if p.lambda >= 0.0 {
        return match target {
            Target::UC => compile_uc(p, t, sign),
            Target::UD => compile_ud(p, t, sign),
            Target::Transfer => compile_transfer(p, t, sign),
            other => Err(Error::InvalidParameter(format!("cannot compile target '{other}' from chain parameters"))),
        };
    }
    let mirrored = p.mirrored();
    let retarget = |seq: PulseSequence, target: Target, shift: i16| {
        let mut out = renumber(exchange_sites(&seq), shift);
        out.target = target;
        out.lambda = p.lambda;
        out
    };
    match target {
        Target::UC => Ok(retarget(compile_ud(mirrored, t, sign)?, Target::UC, -5)),
        Target::UD => Ok(retarget(compile_uc(mirrored, t, sign)?, Target::UD, 5)),
        Target::Transfer => {
            let uc = compile_with_exchange(Target::UC, p, t, sign)?;
            let ud = compile_with_exchange(Target::UD, p, t, sign)?;
            concatenate(&uc, &ud)
        }
        other => Err(Error::InvalidParameter(format!("cannot compile target '{other}' from chain parameters"))),
    }
}

fn spans_from_labels(labels: &[Option<u8>]) -> Vec<StepSpan> {
    let mut spans: Vec<StepSpan> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let Some(step) = *label else { continue };
        match spans.last_mut() {
            Some(last) if last.step == step && last.start + last.len == i => last.len += 1,
            _ => spans.push(StepSpan { step, start: i, len: 1 }),
        }
    }
    spans
}

fn carbon_rotation(op: &PulseOp) -> Option<(u8, ComplexMatrix)> {
    let PulseOp::HardRotation { targets, axis, angle } = op else { return None };
    if targets.len() != 1 {
        return None;
    }
    let s = targets.sites().next()?;
    if s == 2 {
        return None;
    }
    let sigma = if axis.is_x() { pauli2::x() } else { pauli2::y() };
    let phi = if axis.is_negative() { -angle / 2.0 } else { angle / 2.0 };
    let (sn, cs) = phi.sin_cos();
    let m = &pauli2::identity().scale_real(cs) + &sigma.scale(Complex64::new(0.0, -sn));
    Some((s, m))
}

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Writes `m = e^{iφ} e^{iαZ} e^{i(π/4)X} e^{iβZ}` and returns `(α, β)`.
fn zxz_split(m: &ComplexMatrix) -> Result<(f64, f64)> {
    let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
    let v = m.scale(det.sqrt().inv());
    let (v00, v01) = (v.get(0, 0), v.get(0, 1));
    let deviation = (v00.norm() - std::f64::consts::FRAC_1_SQRT_2).abs();
    if deviation > 1e-10 {
        return Err(Error::CheckFailed {
            what: "junction rotation is not a π/2 pulse about x up to z-rotations".into(),
            deviation,
            tolerance: 1e-10,
        });
    }
    let sum = v00.arg();
    let diff = v01.arg() - FRAC_PI_2;
    Ok((wrap(0.5 * (sum + diff)), wrap(0.5 * (sum - diff))))
}

/// Concatenates `U_C` and `U_D`, fusing the carbon rotations at the junction
/// into one nonselective `[−π/2]_x` pulse on both carbons framed by
/// chemical-shift z-rotations.
pub fn concatenate(uc: &PulseSequence, ud: &PulseSequence) -> Result<PulseSequence> {
    if uc.target != Target::UC || ud.target != Target::UD {
        return Err(Error::InvalidParameter(format!(
            "concatenation expects (uc, ud) sequences, got ({}, {})",
            uc.target, ud.target
        )));
    }
    if uc.lambda != ud.lambda || uc.t != ud.t || uc.sign_variant != ud.sign_variant {
        return Err(Error::InvalidParameter("concatenated sequences must share λ, t and sign variant".into()));
    }

    let tail = uc.ops.iter().rev().take_while(|op| carbon_rotation(op).is_some()).count();
    let head = ud.ops.iter().take_while(|op| carbon_rotation(op).is_some()).count();
    let mut junction = [pauli2::identity(), pauli2::identity()];
    for op in uc.ops[uc.ops.len() - tail..].iter().chain(&ud.ops[..head]) {
        let (s, m) = carbon_rotation(op).expect("filtered above");
        let slot = &mut junction[usize::from(s == 3)];
        *slot = m.matmul(slot)?;
    }
    let (a1, b1) = zxz_split(&junction[0])?;
    let (a3, b3) = zxz_split(&junction[1])?;
    let mut fused = Vec::new();
    for (s, angle) in [(1, b1), (3, b3)] {
        if angle.abs() > 1e-12 {
            fused.push(rz(s, angle));
        }
    }
    fused.push(PulseOp::HardRotation { targets: SiteSet::carbons(), axis: RotationAxis::MinusX, angle: FRAC_PI_2 });
    for (s, angle) in [(1, a1), (3, a3)] {
        if angle.abs() > 1e-12 {
            fused.push(rz(s, angle));
        }
    }

    let keep_uc = uc.ops.len() - tail;
    let junction_step = ud.step_of(0).or_else(|| uc.step_of(uc.ops.len().saturating_sub(1)));
    let mut ops = Vec::with_capacity(keep_uc + fused.len() + ud.ops.len() - head);
    let mut labels = Vec::with_capacity(ops.capacity());
    for (i, op) in uc.ops[..keep_uc].iter().enumerate() {
        ops.push(op.clone());
        labels.push(uc.step_of(i));
    }
    for op in fused {
        ops.push(op);
        labels.push(junction_step);
    }
    for (j, op) in ud.ops.iter().enumerate().skip(head) {
        ops.push(op.clone());
        labels.push(ud.step_of(j));
    }

    let mut omitted = uc.omitted_steps.clone();
    omitted.extend(&ud.omitted_steps);
    Ok(PulseSequence {
        ops,
        sign_variant: uc.sign_variant,
        target: Target::Transfer,
        t: uc.t,
        lambda: uc.lambda,
        omitted_steps: omitted,
        steps: spans_from_labels(&labels),
    })
}

/// `e^{i(η/2)σz¹σz²σz³}` as rotations on site 2 and zz evolutions on the
/// coupled pairs, in application order.
pub fn lower_zzz_core(eta: f64) -> Vec<PulseOp> {
    let h = site(2);
    let link = |theta| zz(CoupledPair::OneTwo, theta, CouplingRole::ZzzLink);
    applied(vec![
        rx(h, FRAC_PI_4),
        link(-FRAC_PI_4),
        ry(h, FRAC_PI_4),
        zz(CoupledPair::TwoThree, eta / 2.0, CouplingRole::ZzzCore),
        ry(h, FRAC_PI_4),
        link(-FRAC_PI_4),
        ry(h, -FRAC_PI_2),
        rx(h, -FRAC_PI_4),
    ])
}

/// `e^{iηL_z}` for the C flavour (`L_z = σx¹σz²σy³/2`) or the D flavour
/// (`L_z = σy¹σz²σx³/2`), by rotating the three-spin zzz term.
pub fn lower_zzz(eta: f64, flavor: Flavor, sign: SignVariant) -> PulseSequence {
    let s = sign.sign() * FRAC_PI_4;
    let (pre, post) = match flavor {
        Flavor::C => (vec![ry(site(1), -s), rx(site(3), s)], vec![ry(site(1), s), rx(site(3), -s)]),
        Flavor::D => (vec![rx(site(1), s), ry(site(3), -s)], vec![rx(site(1), -s), ry(site(3), s)]),
    };
    let mut seq = PulseSequence::new(Target::Zzz, sign, 0.0, 0.0);
    seq.ops.extend(applied(post));
    seq.ops.extend(lower_zzz_core(eta));
    seq.ops.extend(applied(pre));
    seq
}

fn selective_ops(s: u8, axis: RotationAxis) -> Vec<PulseOp> {
    // the op is e^{−i(π/4)σ}; written as e^{i·sign·(π/4)σ}
    let sign = if axis.is_negative() { FRAC_PI_4 } else { -FRAC_PI_4 };
    let carbons = SiteSet::carbons();
    if axis.is_x() {
        applied(vec![ry(carbons, -sign), rz(s, FRAC_PI_4), ry(carbons, sign)])
    } else {
        applied(vec![rx(carbons, sign), rz(s, FRAC_PI_4), rx(carbons, -sign)])
    }
}

/// A π/2 pulse selective for carbon `site` (1 or 3), rewritten as nonselective
/// carbon pulses around a z-rotation of that site.
pub fn lower_selective_rotation(site: u8, axis: RotationAxis) -> Result<PulseSequence> {
    match site {
        1 | 3 => {}
        2 => {
            return Err(Error::InvalidParameter(
                "site 2 is the proton; its hard pulses are already selective".into(),
            ))
        }
        other => return Err(Error::InvalidSite(other)),
    }
    let mut seq = PulseSequence::new(Target::Rotation, SignVariant::Plus, 0.0, 0.0);
    seq.ops = selective_ops(site, axis);
    Ok(seq)
}

/// Expands three-spin evolutions and selective carbon π/2 pulses into
/// hardware primitives. Other ops and all metadata are kept.
pub fn lower_sequence(seq: &PulseSequence) -> Result<PulseSequence> {
    let mut ops = Vec::new();
    let mut labels = Vec::new();
    for (i, op) in seq.ops.iter().enumerate() {
        op.validate()?;
        let expanded = match op {
            PulseOp::ZZZEvolution { angle } => lower_zzz_core(*angle),
            PulseOp::HardRotation { targets, axis, angle }
                if targets.len() == 1 && !targets.contains(2) && (angle.abs() - FRAC_PI_2).abs() < 1e-12 =>
            {
                let s = targets.sites().next().expect("one site");
                let axis = match (*angle < 0.0, *axis) {
                    (false, a) => a,
                    (true, RotationAxis::PlusX) => RotationAxis::MinusX,
                    (true, RotationAxis::MinusX) => RotationAxis::PlusX,
                    (true, RotationAxis::PlusY) => RotationAxis::MinusY,
                    (true, RotationAxis::MinusY) => RotationAxis::PlusY,
                };
                selective_ops(s, axis)
            }
            other => vec![other.clone()],
        };
        labels.extend(std::iter::repeat_n(seq.step_of(i), expanded.len()));
        ops.extend(expanded);
    }
    Ok(PulseSequence { ops, steps: spans_from_labels(&labels), ..seq.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist_up_to_global_phase, expm_hermitian_generator};
    use crate::propagator::{propagate_analytic, propagate_c, propagate_d, transfer_times};
    use crate::pulse::{simulate_sequence, verify_replay};
    use crate::spin::{labels_from_str, pauli_at, pauli_product, Axis};

    const SIGNS: [SignVariant; 2] = [SignVariant::Plus, SignVariant::Minus];

    fn replay_dist(seq: &PulseSequence, want: &ComplexMatrix) -> f64 {
        dist_up_to_global_phase(&simulate_sequence(seq).unwrap(), want).unwrap()
    }

    #[test]
    fn uc_and_ud_replay() {
        for lambda in [0.0, 0.4, 1.5, 4.0] {
            let p = ChainParams::new(lambda);
            for t in [0.0, 0.2, 0.7, transfer_times(p).t_3to1, 2.9] {
                for sign in SIGNS {
                    let uc = compile_uc(p, t, sign).unwrap();
                    assert!(replay_dist(&uc, &propagate_c(p, t)) <= 1e-9, "uc λ={lambda} t={t} {sign}");
                    let ud = compile_ud(p, t, sign).unwrap();
                    assert!(replay_dist(&ud, &propagate_d(p, t)) <= 1e-9, "ud λ={lambda} t={t} {sign}");
                }
            }
        }
    }

    #[test]
    fn step_structure() {
        let uc = compile_uc(ChainParams::new(1.5), 0.3, SignVariant::Plus).unwrap();
        let steps: Vec<u8> = uc.steps.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![1, 2, 3, 4, 5]);
        assert!(uc.omitted_steps.is_empty());
        assert_eq!(uc.ops.len(), 15);
        let zzz_angles: Vec<f64> = uc
            .ops
            .iter()
            .filter_map(|op| match op {
                PulseOp::ZZZEvolution { angle } => Some(*angle),
                _ => None,
            })
            .collect();
        assert_eq!(zzz_angles, vec![FRAC_PI_4, -FRAC_PI_4]);

        let uc0 = compile_uc(ChainParams::new(0.0), 0.3, SignVariant::Plus).unwrap();
        assert_eq!(uc0.omitted_steps, vec![2, 4]);
        assert_eq!(uc0.ops.len(), 9);
        let ud0 = compile_ud(ChainParams::new(0.0), 0.3, SignVariant::Minus).unwrap();
        assert_eq!(ud0.omitted_steps, vec![7, 9]);
        let all = compile_transfer(ChainParams::new(0.0), 0.3, SignVariant::Plus).unwrap();
        assert_eq!(all.omitted_steps, vec![2, 4, 7, 9]);
    }

    #[test]
    fn central_angle() {
        let p = ChainParams::new(1.5);
        let t = 0.7;
        let uc = compile_uc(p, t, SignVariant::Plus).unwrap();
        let central: Vec<_> = uc
            .ops
            .iter()
            .filter(|op| matches!(op, PulseOp::ZZEvolution { role: Some(CouplingRole::Central), .. }))
            .collect();
        assert_eq!(central.len(), 1);
        match central[0] {
            PulseOp::ZZEvolution { pair, angle, .. } => {
                assert_eq!(*pair, CoupledPair::OneTwo);
                assert!((angle - 2.0 * t * p.k()).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_time_collapses_to_identity() {
        let uc = compile_uc(ChainParams::new(4.0), 0.0, SignVariant::Plus).unwrap();
        assert!(replay_dist(&uc, &ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn negative_lambda_rejected_but_exchange_compiles() {
        let p = ChainParams::new(-1.5);
        assert!(matches!(compile_uc(p, 0.3, SignVariant::Plus), Err(Error::NegativeLambda(_))));
        assert!(compile_ud(p, 0.3, SignVariant::Plus).is_err());
        for sign in SIGNS {
            for (target, want) in [
                (Target::UC, propagate_c(p, 0.3)),
                (Target::UD, propagate_d(p, 0.3)),
                (Target::Transfer, propagate_analytic(p, 0.3)),
            ] {
                let seq = compile_with_exchange(target, p, 0.3, sign).unwrap();
                assert_eq!(seq.lambda, -1.5);
                assert!(replay_dist(&seq, &want) <= 1e-9, "{target} {sign}");
                assert!(verify_replay(&seq).unwrap() <= 1e-9);
            }
        }
        let uc = compile_with_exchange(Target::UC, p, 0.3, SignVariant::Plus).unwrap();
        assert_eq!(uc.steps.first().unwrap().step, 1);
    }

    #[test]
    fn concatenation_fuses_junction() {
        for lambda in [0.0, 1.5, 4.0] {
            let p = ChainParams::new(lambda);
            for sign in SIGNS {
                let uc = compile_uc(p, 0.6, sign).unwrap();
                let ud = compile_ud(p, 0.6, sign).unwrap();
                let all = concatenate(&uc, &ud).unwrap();
                assert!(replay_dist(&all, &propagate_analytic(p, 0.6)) <= 1e-9);
                let carbon_pulses: Vec<_> = all
                    .ops
                    .iter()
                    .filter(|op| matches!(op, PulseOp::HardRotation { targets, .. } if *targets == SiteSet::carbons()))
                    .collect();
                assert_eq!(
                    carbon_pulses,
                    vec![&PulseOp::HardRotation {
                        targets: SiteSet::carbons(),
                        axis: RotationAxis::MinusX,
                        angle: FRAC_PI_2
                    }]
                );
                // two boundary rotations from each side are replaced by the fused block
                let hard = |s: &PulseSequence| s.ops.iter().filter(|o| matches!(o, PulseOp::HardRotation { .. })).count();
                assert_eq!(hard(&all), hard(&uc) + hard(&ud) - 3);
            }
        }
        let uc = compile_uc(ChainParams::new(1.0), 0.6, SignVariant::Plus).unwrap();
        assert!(concatenate(&uc, &uc).is_err());
        let ud = compile_ud(ChainParams::new(1.0), 0.5, SignVariant::Plus).unwrap();
        assert!(concatenate(&uc, &ud).is_err());
    }

    #[test]
    fn zzz_lowering() {
        let zzz = pauli_product([crate::spin::PauliLabel::Z; 3]);
        for eta in [0.0, 0.3, -1.2, FRAC_PI_2] {
            let mut seq = PulseSequence::new(Target::Zzz, SignVariant::Plus, 0.0, 0.0);
            seq.ops = lower_zzz_core(eta);
            let want = expm_hermitian_generator(&zzz, -eta / 2.0).unwrap();
            assert!(replay_dist(&seq, &want) <= 1e-10);
            assert!(seq.zz_pairs().all(|p| matches!(p, CoupledPair::OneTwo | CoupledPair::TwoThree)));
        }
        for (flavor, name) in [(Flavor::C, "XZY"), (Flavor::D, "YZX")] {
            let p3 = pauli_product(labels_from_str(name).unwrap());
            for eta in [0.0, FRAC_PI_2, 0.77] {
                let want = expm_hermitian_generator(&p3, -eta / 2.0).unwrap();
                for sign in SIGNS {
                    let seq = lower_zzz(eta, flavor, sign);
                    assert!(replay_dist(&seq, &want) <= 1e-10, "{flavor:?} η={eta} {sign}");
                }
            }
        }
    }

    #[test]
    fn selective_rotation_lowering() {
        let axes = [RotationAxis::PlusX, RotationAxis::MinusX, RotationAxis::PlusY, RotationAxis::MinusY];
        for s in [1u8, 3] {
            for axis in axes {
                let seq = lower_selective_rotation(s, axis).unwrap();
                let sigma = pauli_at(s, if axis.is_x() { Axis::X } else { Axis::Y }).unwrap();
                let phi = if axis.is_negative() { -FRAC_PI_4 } else { FRAC_PI_4 };
                let want = expm_hermitian_generator(&sigma, phi).unwrap();
                assert!(replay_dist(&seq, &want) <= 1e-12, "site {s} {axis}");
                assert!(seq.ops.iter().all(|op| match op {
                    PulseOp::HardRotation { targets, .. } => *targets == SiteSet::carbons(),
                    PulseOp::ZRotation { site, .. } => *site == s,
                    _ => false,
                }));

                let mut round = seq.clone();
                let inverse = match axis {
                    RotationAxis::PlusX => RotationAxis::MinusX,
                    RotationAxis::MinusX => RotationAxis::PlusX,
                    RotationAxis::PlusY => RotationAxis::MinusY,
                    RotationAxis::MinusY => RotationAxis::PlusY,
                };
                round.ops.extend(lower_selective_rotation(s, inverse).unwrap().ops);
                assert!(replay_dist(&round, &ComplexMatrix::identity(8)) <= 1e-12);
            }
        }
        assert!(lower_selective_rotation(2, RotationAxis::PlusX).is_err());
        assert!(lower_selective_rotation(4, RotationAxis::PlusX).is_err());
    }

    #[test]
    fn lowered_sequences_still_replay() {
        let p = ChainParams::new(1.5);
        let t = transfer_times(p).t_3to1;
        for sign in SIGNS {
            let seq = compile_transfer(p, t, sign).unwrap();
            let low = lower_sequence(&seq).unwrap();
            assert!(low.ops.iter().all(|op| !matches!(op, PulseOp::ZZZEvolution { .. })));
            assert!(low.ops.iter().all(|op| match op {
                PulseOp::HardRotation { targets, .. } => targets.contains(2) || *targets == SiteSet::carbons(),
                _ => true,
            }));
            assert!(replay_dist(&low, &propagate_analytic(p, t)) <= 1e-9);
            let labelled: usize = low.steps.iter().map(|s| s.len).sum();
            assert_eq!(labelled, low.ops.len());
        }
    }

    #[test]
    fn only_neighbour_pairs() {
        for lambda in [0.0, 1.5, -2.0] {
            let seq = compile_with_exchange(Target::Transfer, ChainParams::new(lambda), 0.4, SignVariant::Minus).unwrap();
            let low = lower_sequence(&seq).unwrap();
            assert!(low.zz_pairs().any(|p| p == CoupledPair::OneTwo));
            assert!(low.zz_pairs().any(|p| p == CoupledPair::TwoThree));
        }
        assert!(serde_json::from_str::<CoupledPair>("\"13\"").is_err());
        assert!("13".parse::<CoupledPair>().is_err());
    }
}
