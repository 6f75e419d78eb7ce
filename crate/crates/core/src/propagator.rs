//! Closed-form time evolution of the three-spin chain.
//!
//! Because `C² = D² = k²I` and `[C, D] = 0`, the propagator is
//! `U(t) = (cos kt − i sin kt C/k)(cos kt − i sin kt D/k)`, periodic with
//! `τ = π/k`. Its matrix elements are written out explicitly below; the
//! excitation number (popcount of the basis index) is conserved.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::numerics::bisect;
use crate::spin::ChainParams;

/// `π/(2√2)`, the transfer time of the bare XY chain.
pub const T0: f64 = PI / 2.0 * FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "1to3")]
    OneToThree,
    #[serde(rename = "3to1")]
    ThreeToOne,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::OneToThree => Direction::ThreeToOne,
            Direction::ThreeToOne => Direction::OneToThree,
        }
    }
}

/// Transfer times in chain units (ħ = 1, two-body coupling = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferTimes {
    pub t_3to1: f64,
    pub t_1to3: f64,
    pub period: f64,
    pub t0: f64,
}

impl TransferTimes {
    pub fn get(&self, direction: Direction) -> f64 {
        match direction {
            Direction::OneToThree => self.t_1to3,
            Direction::ThreeToOne => self.t_3to1,
        }
    }

    /// The longer of the two one-way transfers.
    pub fn slower(&self) -> f64 {
        self.t_3to1.max(self.t_1to3)
    }
}

/// Real and imaginary building blocks of the closed-form propagator.
struct Amplitudes {
    /// `((2kc)² − (λs)²)/(4k²)`
    stay: f64,
    /// `(k² − 4s²)/k²`
    middle: f64,
    /// `(2kcs + λs²)/k²`
    hop_plus: f64,
    /// `(2kcs − λs²)/k²`
    hop_minus: f64,
    /// `(kλcs − 2s²)/k²`
    jump_a: f64,
    /// `−(2s² + kλcs)/k²`
    jump_b: f64,
}

impl Amplitudes {
    fn new(p: ChainParams, t: f64) -> Self {
        let (lambda, k) = (p.lambda, p.k());
        let (s, c) = (k * t).sin_cos();
        let k2 = k * k;
        Self {
            stay: ((2.0 * k * c).powi(2) - (lambda * s).powi(2)) / (4.0 * k2),
            middle: (k2 - 4.0 * s * s) / k2,
            hop_plus: (2.0 * k * c * s + lambda * s * s) / k2,
            hop_minus: (2.0 * k * c * s - lambda * s * s) / k2,
            jump_a: (k * lambda * c * s - 2.0 * s * s) / k2,
            jump_b: -(2.0 * s * s + k * lambda * c * s) / k2,
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn neg_im(x: f64) -> Complex64 {
    Complex64::new(0.0, -x)
}

/// `U(t) = e^{−iH t}` assembled entry by entry from its closed form.
pub fn propagate_analytic(p: ChainParams, t: f64) -> ComplexMatrix {
    let a = Amplitudes::new(p, t);
    let mut u = ComplexMatrix::zeros(8);
    u.set(0, 0, re(1.0));
    u.set(7, 7, re(1.0));

    // one excitation: |001⟩, |010⟩, |100⟩
    u.set(1, 1, re(a.stay));
    u.set(1, 2, neg_im(a.hop_plus));
    u.set(1, 4, re(a.jump_a));
    u.set(2, 1, neg_im(a.hop_minus));
    u.set(2, 2, re(a.middle));
    u.set(2, 4, neg_im(a.hop_plus));
    u.set(4, 1, re(a.jump_b));
    u.set(4, 2, neg_im(a.hop_minus));
    u.set(4, 4, re(a.stay));

    // two excitations: |011⟩, |101⟩, |110⟩
    u.set(3, 3, re(a.stay));
    u.set(3, 5, neg_im(a.hop_minus));
    u.set(3, 6, re(a.jump_b));
    u.set(5, 3, neg_im(a.hop_plus));
    u.set(5, 5, re(a.middle));
    u.set(5, 6, neg_im(a.hop_minus));
    u.set(6, 3, re(a.jump_a));
    u.set(6, 5, neg_im(a.hop_plus));
    u.set(6, 6, re(a.stay));
    u
}

/// `e^{−itC} = cos(kt) I − i sin(kt)/k · C`.
pub fn propagate_c(p: ChainParams, t: f64) -> ComplexMatrix {
    rotor(&crate::spin::build_c(p), p.k(), t)
}

/// `e^{−itD} = cos(kt) I − i sin(kt)/k · D`.
pub fn propagate_d(p: ChainParams, t: f64) -> ComplexMatrix {
    rotor(&crate::spin::build_d(p), p.k(), t)
}

fn rotor(generator: &ComplexMatrix, k: f64, t: f64) -> ComplexMatrix {
    let (s, c) = (k * t).sin_cos();
    &ComplexMatrix::identity(8).scale_real(c) + &generator.scale(Complex64::new(0.0, -s / k))
}

/// Transfer times. For λ ≥ 0 the faster transfer runs 3 → 1.
pub fn transfer_times(p: ChainParams) -> TransferTimes {
    let (lambda, k) = (p.lambda, p.k());
    let l2 = lambda * lambda;
    let fast = ((8.0 + l2) / (8.0 + 2.0 * l2)).sqrt().asin() / k;
    let period = PI / k;
    let slow = period - fast;
    let (t_3to1, t_1to3) = if lambda >= 0.0 { (fast, slow) } else { (slow, fast) };
    TransferTimes { t_3to1, t_1to3, period, t0: T0 }
}

/// Closed-form `U` at the transfer time of `direction`.
pub fn transfer_propagator(p: ChainParams, direction: Direction) -> ComplexMatrix {
    let l2 = p.lambda * p.lambda;
    let a = re((l2 - 4.0) / (l2 + 4.0));
    let b = 4.0 * p.lambda / (l2 + 4.0);
    let one = re(1.0);
    let mut u = ComplexMatrix::zeros(8);
    u.set(0, 0, one);
    u.set(7, 7, one);
    match direction {
        Direction::OneToThree => {
            let ib = Complex64::new(0.0, b);
            u.set(1, 4, -one);
            u.set(2, 1, ib);
            u.set(2, 2, a);
            u.set(3, 5, ib);
            u.set(3, 6, a);
            u.set(4, 1, a);
            u.set(4, 2, ib);
            u.set(5, 5, a);
            u.set(5, 6, ib);
            u.set(6, 3, -one);
        }
        Direction::ThreeToOne => {
            let ib = Complex64::new(0.0, -b);
            u.set(1, 2, ib);
            u.set(1, 4, a);
            u.set(2, 2, a);
            u.set(2, 4, ib);
            u.set(3, 6, -one);
            u.set(4, 1, -one);
            u.set(5, 3, ib);
            u.set(5, 5, a);
            u.set(6, 3, a);
            u.set(6, 5, ib);
        }
    }
    u
}

/// Positive λ at which the slower one-way transfer becomes as fast as the
/// bare chain, `max(t_3to1, t_1to3)(λ) = t0`.
pub fn find_speedup_threshold() -> f64 {
    let excess = |lambda: f64| transfer_times(ChainParams::new(lambda)).slower() - T0;
    bisect(excess, 2.0, 4.0, 1e-10).expect("slower transfer time crosses t0 inside [2, 4]")
}

/// Permutation exchanging qubits 1 and 3, `S13 = S12 S23 S12`.
pub fn swap_13() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(8);
    for b in 0..8usize {
        let (q1, q2, q3) = ((b >> 2) & 1, (b >> 1) & 1, b & 1);
        s.set((q3 << 2) | (q2 << 1) | q1, b, re(1.0));
    }
    s
}
