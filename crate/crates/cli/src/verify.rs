use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use xy3::propagator::{propagate_c, propagate_d};
use xy3::pulse::{compile_with_exchange, estimate_duration, verify_replay, SignVariant, Target};
use xy3::spin::{build_c, build_d, build_h_xy3};
use xy3::transfer::{bell_phase, bell_transfer, conditional_transfer_table, overlap_trace, target_argmax, BellLabel};
use xy3::{
    expm_hermitian_generator, find_speedup_threshold, transfer_propagator, transfer_times, Axis, ChainParams,
    ComplexMatrix, Direction, NmrParams, T0,
};

use crate::commands::num;

/// Threshold value quoted for the speed-up crossover.
pub const LAMBDA_STAR: f64 = 2.71199;

pub type Propagator = fn(ChainParams, f64) -> ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub distance: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Non-gating checks are reported but never fail the run.
    pub gating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub lambdas: Vec<f64>,
    pub checks: Vec<CheckResult>,
    pub failures: Vec<String>,
    pub passed: bool,
}

pub const VERIFY_HEADER: &str = "name,lambda,distance,tolerance,passed,gating";

impl VerifySummary {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{VERIFY_HEADER}\n");
        for c in &self.checks {
            let lambda = c.lambda.map(num).unwrap_or_default();
            writeln!(out, "{},{},{},{},{},{}", c.name, lambda, num(c.distance), num(c.tolerance), c.passed, c.gating)
                .unwrap();
        }
        out
    }

    pub fn check(&self, name: &str, lambda: Option<f64>) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name && c.lambda == lambda)
    }
}

fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).frobenius_norm()
}

fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.matmul(b).expect("8x8 product")
}

fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect()
}

/// Runs the numerical invariants against a propagator `U(λ, t)`.
pub struct Verifier {
    propagator: Propagator,
    checks: Vec<CheckResult>,
}

impl Default for Verifier {
    fn default() -> Self {
        Self::new(xy3::propagate_analytic)
    }
}

impl Verifier {
    pub fn new(propagator: Propagator) -> Self {
        Verifier { propagator, checks: Vec::new() }
    }

    fn record(&mut self, name: &str, lambda: Option<f64>, distance: f64, tolerance: f64, gating: bool) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            lambda,
            distance,
            tolerance,
            passed: distance.is_finite() && distance <= tolerance,
            gating,
        });
    }

    fn gate(&mut self, name: &str, lambda: f64, distance: f64, tolerance: f64) {
        self.record(name, Some(lambda), distance, tolerance, true);
    }

    pub fn run(mut self, lambdas: &[f64]) -> VerifySummary {
        for &lambda in lambdas {
            self.run_lambda(ChainParams::new(lambda));
        }
        self.run_global();
        let failures: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.gating && !c.passed)
            .map(|c| match c.lambda {
                Some(l) => format!("{} (λ = {l})", c.name),
                None => c.name.clone(),
            })
            .collect();
        VerifySummary { lambdas: lambdas.to_vec(), passed: failures.is_empty(), failures, checks: self.checks }
    }

    fn run_lambda(&mut self, p: ChainParams) {
        let u = self.propagator;
        let lambda = p.lambda;
        let k = p.k();
        let tt = transfer_times(p);
        let grid = linspace(0.0, 2.0 * std::f64::consts::PI / k, 50);
        let h = build_h_xy3(p);
        let (c, d) = (build_c(p), build_d(p));
        let id = ComplexMatrix::identity(8);

        let oracle = grid
            .iter()
            .map(|&t| dist(&u(p, t), &expm_hermitian_generator(&h, t).expect("Hermitian")))
            .fold(0.0, f64::max);
        self.gate("oracle", lambda, oracle, 1e-10);

        let split =
            grid.iter().map(|&t| dist(&u(p, t), &mul(&propagate_c(p, t), &propagate_d(p, t)))).fold(0.0, f64::max);
        self.gate("commuting_split", lambda, split, 1e-10);

        self.gate("commutator_cd", lambda, c.commutator(&d).expect("8x8").frobenius_norm(), 1e-12);
        let k2 = id.scale_real(k * k);
        let squares = dist(&mul(&c, &c), &k2).max(dist(&mul(&d, &d), &k2));
        self.gate("squares_k2", lambda, squares, 1e-12);

        self.gate("periodicity", lambda, dist(&u(p, tt.period), &id), 1e-10);

        let group = [(0.3, 0.55), (1.1, 2.4), (tt.t_3to1, tt.t_1to3)]
            .iter()
            .map(|&(a, b)| dist(&mul(&u(p, a), &u(p, b)), &u(p, a + b)))
            .fold(0.0, f64::max);
        self.gate("group", lambda, group, 1e-10);

        let unitarity = grid.iter().map(|&t| u(p, t).unitarity_defect()).fold(0.0, f64::max);
        self.gate("unitarity", lambda, unitarity, 1e-10);

        let closed = [Direction::ThreeToOne, Direction::OneToThree]
            .iter()
            .map(|&dir| dist(&transfer_propagator(p, dir), &u(p, tt.get(dir))))
            .fold(0.0, f64::max);
        self.gate("transfer_propagator", lambda, closed, 1e-10);

        // 3 → 1 is read off the site-3 trace; 1 → 3 is the same trace in the mirrored chain.
        let rel = |found: f64, expected: f64| ((found - expected) / expected).abs();
        let argmax_31 = target_argmax(p, Axis::X).map(|t| rel(t, tt.t_3to1)).unwrap_or(f64::INFINITY);
        self.gate("argmax_3to1", lambda, argmax_31, 1e-6);
        let argmax_13 = target_argmax(p.mirrored(), Axis::X).map(|t| rel(t, tt.t_1to3)).unwrap_or(f64::INFINITY);
        self.gate("argmax_1to3", lambda, argmax_13, 1e-6);

        self.gate("transfer_algebra", lambda, transfer_algebra_distance(p), 1e-10);

        let trace_grid = linspace(0.0, tt.period, 100);
        for (name, axis) in [("x_trace_norm", Axis::X), ("y_trace_norm", Axis::Y)] {
            let deviation = overlap_trace(p, axis, &trace_grid)
                .map(|r| {
                    r.trace
                        .iter()
                        .map(|row| (row.c_source.powi(2) + row.c_middle.powi(2) + row.c_target.powi(2) - 1.0).abs())
                        .fold(0.0, f64::max)
                })
                .unwrap_or(f64::INFINITY);
            self.gate(name, lambda, deviation, 1e-10);
        }
        let z_target = overlap_trace(p, Axis::Z, &[tt.t_3to1])
            .map(|r| {
                let (s, cs) = ((k * tt.t_3to1).sin(), (k * tt.t_3to1).cos());
                let expected = (2.0 * s * s + k * lambda * cs * s).powi(2) / k.powi(4);
                (r.trace[0].c_target - expected).abs()
            })
            .unwrap_or(f64::INFINITY);
        self.gate("z_trace_target", lambda, z_target, 1e-10);

        let mut replay: f64 = 0.0;
        for t in [tt.t_3to1, 0.2, 0.7] {
            for sign in [SignVariant::Plus, SignVariant::Minus] {
                for target in [Target::UC, Target::UD, Target::Transfer] {
                    let d = compile_with_exchange(target, p, t, sign)
                        .and_then(|seq| verify_replay(&seq))
                        .unwrap_or(f64::INFINITY);
                    replay = replay.max(d);
                }
            }
        }
        self.gate("compiler_replay", lambda, replay, 1e-9);

        self.gate("bell", lambda, bell_distance(p), 1e-12);
    }

    fn run_global(&mut self) {
        let star = find_speedup_threshold();
        self.record("threshold", None, (star - LAMBDA_STAR).abs(), 1e-4, true);
        let ratio = transfer_times(ChainParams::new(LAMBDA_STAR)).slower() / T0;
        self.record("threshold_time_ratio", None, (ratio - 1.0).abs(), 1e-4, true);

        // Soft target: reported for comparison with the measured sequence lengths.
        let p = ChainParams::new(1.5);
        let t = transfer_times(p).t_3to1;
        let nmr = NmrParams::default();
        let mut relative: f64 = 0.0;
        for (target, reference) in [(Target::UC, 0.340), (Target::UD, 0.420)] {
            let total = compile_with_exchange(target, p, t, SignVariant::Plus)
                .and_then(|seq| estimate_duration(&seq, &nmr))
                .map(|e| e.total_seconds)
                .unwrap_or(f64::INFINITY);
            relative = relative.max(((total - reference) / reference).abs());
        }
        self.record("duration_soft", Some(1.5), relative, 0.3, false);
    }
}

/// Largest deviation of the spectator-01 and -10 blocks from their closed forms.
fn transfer_algebra_distance(p: ChainParams) -> f64 {
    let (alpha, beta) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let Ok(table) = conditional_transfer_table(p, alpha, beta) else { return f64::INFINITY };
    let l = p.lambda;
    let l2 = l * l;
    let den = (l2 + 4.0).powi(2);
    let b2 = Complex64::new(16.0 * l2 / den, 0.0);
    let a2 = Complex64::new((l2 - 4.0).powi(2) / den, 0.0);
    let ab = Complex64::new(0.0, 4.0 * l * (l2 - 4.0) / den);
    let b01 = &table[1].block;
    let b10 = &table[2].block;
    [
        b01.get(1, 1) - b2,
        b01.get(2, 2) - a2,
        b01.get(1, 2) - ab,
        b10.get(1, 1) - a2,
        b10.get(2, 2) - b2,
        b10.get(1, 2) + ab,
    ]
    .iter()
    .map(|z| z.norm())
    .fold(0.0, f64::max)
}

fn bell_distance(p: ChainParams) -> f64 {
    let phi = bell_phase(p);
    let mut worst = (phi.norm() - 1.0).abs();
    for record in bell_transfer(p) {
        let expected = match record.input {
            BellLabel::PhiPlus | BellLabel::PhiMinus => Complex64::new(1.0, 0.0),
            BellLabel::PsiPlus => phi,
            BellLabel::PsiMinus => -phi.conj(),
        };
        worst = worst.max((record.phase - expected).norm()).max(record.leakage);
    }
    worst
}
