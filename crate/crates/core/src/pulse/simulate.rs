use num_complex::Complex64;

use super::{PulseOp, PulseSequence, Target};
use crate::error::{Error, Result};
use crate::linalg::{dist_up_to_global_phase, ComplexMatrix};
use crate::propagator::{propagate_analytic, propagate_c, propagate_d};
use crate::spin::{pauli_product, ChainParams, PauliLabel};

/// `cos(φ) I − i sin(φ) P` for an involutory `P`, i.e. `e^{−iφP}`.
fn rotor(p: &ComplexMatrix, phi: f64) -> ComplexMatrix {
    let (s, c) = phi.sin_cos();
    &ComplexMatrix::identity(p.dim()).scale_real(c) + &p.scale(Complex64::new(0.0, -s))
}

fn single(site: u8, label: PauliLabel) -> ComplexMatrix {
    let mut labels = [PauliLabel::I; 3];
    labels[site as usize - 1] = label;
    pauli_product(labels)
}

/// Exact 8×8 unitary of one op.
pub fn op_unitary(op: &PulseOp) -> Result<ComplexMatrix> {
    op.validate()?;
    Ok(match op {
        PulseOp::HardRotation { targets, axis, angle } => {
            let label = if axis.is_x() { PauliLabel::X } else { PauliLabel::Y };
            let phi = if axis.is_negative() { -angle / 2.0 } else { angle / 2.0 };
            // distinct sites commute, so the product is the exponential of the sum
            targets
                .sites()
                .map(|s| rotor(&single(s, label), phi))
                .try_fold(ComplexMatrix::identity(8), |acc, r| acc.matmul(&r))?
        }
        PulseOp::ZRotation { site, angle } => rotor(&single(*site, PauliLabel::Z), angle / 2.0),
        PulseOp::ZZEvolution { pair, angle, .. } => {
            let mut labels = [PauliLabel::I; 3];
            let (a, b) = pair.sites();
            labels[a as usize - 1] = PauliLabel::Z;
            labels[b as usize - 1] = PauliLabel::Z;
            rotor(&pauli_product(labels), angle / 2.0)
        }
        PulseOp::ZZZEvolution { angle } => rotor(&pauli_product([PauliLabel::Z; 3]), -angle / 2.0),
        PulseOp::Delay { .. } => ComplexMatrix::identity(8),
    })
}

/// Ideal replay: `G_{n−1} ⋯ G_0` for ops `G_0, …, G_{n−1}` in application order.
pub fn simulate_sequence(seq: &PulseSequence) -> Result<ComplexMatrix> {
    seq.ops.iter().try_fold(ComplexMatrix::identity(8), |acc, op| op_unitary(op)?.matmul(&acc))
}

/// The analytic unitary a chain sequence is meant to implement.
pub fn target_unitary(seq: &PulseSequence) -> Result<ComplexMatrix> {
    let p = ChainParams::new(seq.lambda);
    match seq.target {
        Target::UC => Ok(propagate_c(p, seq.t)),
        Target::UD => Ok(propagate_d(p, seq.t)),
        Target::Transfer => Ok(propagate_analytic(p, seq.t)),
        other => Err(Error::InvalidParameter(format!("sequence target '{other}' has no analytic reference"))),
    }
}

/// Distance up to global phase between the replay and the analytic target.
pub fn verify_replay(seq: &PulseSequence) -> Result<f64> {
    dist_up_to_global_phase(&simulate_sequence(seq)?, &target_unitary(seq)?)
}
