//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is printed by a plain `cargo test`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use xy3::pulse::{
    compile_transfer, compile_uc, compile_ud, estimate_duration, simulate_sequence, DurationConfig, SignVariant,
};
use xy3::spin::{build_c, build_d, pauli_decompose};
use xy3::transfer::{bell_transfer, conditional_transfer_table, evolve_deviation, overlap_trace, target_argmax, BellLabel};
use xy3::{
    find_speedup_threshold, propagate_analytic, swap_13, transfer_propagator, transfer_times, Axis, ChainParams,
    ComplexMatrix, Direction, InitialState, NmrParams, T0,
};

const LAMBDAS: [f64; 6] = [-2.0, 0.0, 0.5, 1.5, 2.71199, 4.0];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.matmul(b).unwrap()
}

fn add(a: &ComplexMatrix, b: &ComplexMatrix, factor: Complex64) -> ComplexMatrix {
    let entries = a.entries().iter().zip(b.entries()).map(|(x, y)| x + factor * y).collect();
    ComplexMatrix::from_row_major(a.dim(), entries).unwrap()
}

fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    add(a, b, c(-1.0, 0.0)).frobenius_norm()
}

/// `min_φ ‖a − e^{iφ} b‖`, aligning on the overlap phase.
fn phase_dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap: Complex64 = b.entries().iter().zip(a.entries()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    add(a, b, -phase).frobenius_norm()
}

fn pauli(ch: char) -> [[Complex64; 2]; 2] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match ch {
        'I' => [[l, o], [o, l]],
        'X' => [[o, l], [l, o]],
        'Y' => [[o, -i], [i, o]],
        'Z' => [[l, o], [o, -l]],
        _ => unreachable!(),
    }
}

/// Three-site Pauli string, built entry by entry: `⟨a|P|b⟩ = Π_s σ_s[a_s][b_s]`.
fn string(name: &str) -> ComplexMatrix {
    let factors: Vec<_> = name.chars().map(pauli).collect();
    let mut m = ComplexMatrix::zeros(8);
    for a in 0..8 {
        for b in 0..8 {
            let bit = |x: usize, s: usize| (x >> (2 - s)) & 1;
            let v = (0..3).map(|s| factors[s][bit(a, s)][bit(b, s)]).product();
            m.set(a, b, v);
        }
    }
    m
}

fn combo(terms: &[(&str, f64)]) -> ComplexMatrix {
    terms.iter().fold(ComplexMatrix::zeros(8), |acc, (n, w)| add(&acc, &string(n), c(*w, 0.0)))
}

fn hamiltonian(l: f64) -> ComplexMatrix {
    combo(&[("XXI", 1.0), ("YYI", 1.0), ("IXX", 1.0), ("IYY", 1.0), ("XZY", l / 2.0), ("YZX", -l / 2.0)])
}

fn part_c(l: f64) -> ComplexMatrix {
    combo(&[("XXI", 1.0), ("IYY", 1.0), ("XZY", l / 2.0)])
}

fn part_d(l: f64) -> ComplexMatrix {
    combo(&[("YYI", 1.0), ("IXX", 1.0), ("YZX", -l / 2.0)])
}

/// `e^{−iht}` by scaling and squaring a truncated Taylor series.
fn expm(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let a = h.scale(c(0.0, -t));
    let norm = a.frobenius_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = a.scale_real(0.5f64.powi(squarings));
    let mut sum = ComplexMatrix::identity(8);
    let mut term = ComplexMatrix::identity(8);
    for n in 1..=30 {
        term = mul(&term, &a).scale_real(1.0 / n as f64);
        sum = add(&sum, &term, c(1.0, 0.0));
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

fn coefficient(m: &ComplexMatrix, name: &str) -> Complex64 {
    mul(&string(name), m).trace() / 8.0
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// The closed-form coefficients `(A, B, F)` of the propagator entries at chain time `t`.
fn closed(l: f64, t: f64) -> (f64, f64, f64) {
    let k = (2.0 + l * l / 4.0).sqrt();
    let (s, co) = ((k * t).sin(), (k * t).cos());
    let a = ((2.0 * k * co).powi(2) - (l * s).powi(2)) / (4.0 * k * k);
    let b = (2.0 * k * co * s - l * s * s) / (k * k);
    let f = (2.0 * s * s + k * l * co * s) / (k * k);
    (a, b, f)
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("[{}] {id:>2} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn soft(&mut self, id: &str, title: &str, ok: bool, detail: String) {
        println!("[{}] {id:>2} {title}: {detail}", if ok { "SOFT PASS" } else { "SOFT MISS" });
    }
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn oracle_equivalence(r: &mut Report) {
    let cases: Vec<(f64, Vec<f64>)> = LAMBDAS
        .iter()
        .map(|&l| (l, linspace(0.0, 2.0 * PI / ChainParams::new(l).k(), 50)))
        .collect();
    let start = Instant::now();
    let analytic: Vec<Vec<ComplexMatrix>> = cases
        .iter()
        .map(|(l, ts)| ts.iter().map(|&t| propagate_analytic(ChainParams::new(*l), t)).collect())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let worst = max(cases.iter().zip(&analytic).flat_map(|((l, ts), us)| {
        let h = hamiltonian(*l);
        ts.iter().zip(us).map(move |(&t, u)| dist(u, &expm(&h, t)))
    }));
    r.line(
        "1",
        "oracle equivalence",
        worst <= 1e-10 && elapsed < 1.0,
        format!("max ‖U − expm‖ = {worst:.2e} over 6×50 points, {elapsed:.3} s"),
    );
}

fn commuting_split(r: &mut Report) {
    let mut comm: f64 = 0.0;
    let mut square: f64 = 0.0;
    let mut built: f64 = 0.0;
    for &l in &LAMBDAS {
        let p = ChainParams::new(l);
        let (cm, dm) = (build_c(p), build_d(p));
        built = built.max(dist(&cm, &part_c(l))).max(dist(&dm, &part_d(l)));
        comm = comm.max(dist(&mul(&cm, &dm), &mul(&dm, &cm)));
        let k2 = ComplexMatrix::identity(8).scale_real(p.k() * p.k());
        square = square.max(dist(&mul(&cm, &cm), &k2)).max(dist(&mul(&dm, &dm), &k2));
    }
    r.line(
        "2",
        "commuting split",
        comm <= 1e-12 && square <= 1e-12 && built <= 1e-12,
        format!("max ‖[C,D]‖ = {comm:.2e}, max ‖C²−k²I‖,‖D²−k²I‖ = {square:.2e}, C and D vs Pauli sums {built:.2e}"),
    );
}

fn periodicity(r: &mut Report) {
    let id = ComplexMatrix::identity(8);
    let worst = max(LAMBDAS.iter().map(|&l| {
        let p = ChainParams::new(l);
        dist(&propagate_analytic(p, PI / p.k()), &id)
    }));
    r.line("3", "periodicity", worst <= 1e-10, format!("max ‖U(π/k) − I‖ = {worst:.2e}"));
}

fn transfer_time_argmax(r: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for l in [0.0, 1.5, 4.0] {
        let p = ChainParams::new(l);
        let found = target_argmax(p, Axis::X).unwrap();
        let formula = transfer_times(p).t_3to1;
        worst = worst.max(((found - formula) / formula).abs());
        details.push(format!("λ={l}: t/t0={:.6}", found / T0));
    }
    let zero = target_argmax(ChainParams::new(0.0), Axis::X).unwrap() / T0;
    r.line(
        "4",
        "transfer time = fidelity argmax",
        worst <= 1e-6 && (zero - 1.0).abs() <= 1e-6,
        format!("max relative gap {worst:.2e}; {}", details.join(", ")),
    );
}

fn threshold(r: &mut Report) {
    let star = find_speedup_threshold();
    r.line("5", "speed-up threshold", (star - 2.71199).abs() <= 1e-4, format!("λ* = {star:.6}"));
}

fn s13_oracle() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(8);
    for i in 0..8 {
        let (q1, q2, q3) = (i >> 2 & 1, i >> 1 & 1, i & 1);
        s.set(q3 << 2 | q2 << 1 | q1, i, c(1.0, 0.0));
    }
    s
}

fn transfer_propagators(r: &mut Report) {
    let mut closed_forms: f64 = 0.0;
    for &l in &LAMBDAS {
        let p = ChainParams::new(l);
        let tt = transfer_times(p);
        for dir in [Direction::OneToThree, Direction::ThreeToOne] {
            closed_forms = closed_forms.max(dist(&transfer_propagator(p, dir), &expm(&hamiltonian(l), tt.get(dir))));
        }
    }
    // at λ = 0, S13† U is diagonal with entries ±φ
    let s13 = s13_oracle();
    let mut s13_gap = dist(&swap_13(), &s13);
    for dir in [Direction::OneToThree, Direction::ThreeToOne] {
        let u = transfer_propagator(ChainParams::new(0.0), dir);
        let m = mul(&s13.adjoint(), &u);
        let phase = m.get(0, 0);
        let mut signs = ComplexMatrix::zeros(8);
        for i in 0..8 {
            let ratio = m.get(i, i) / phase;
            signs.set(i, i, c(ratio.re.signum(), 0.0));
        }
        s13_gap = s13_gap.max(phase_dist(&u, &mul(&s13, &signs)));
    }
    r.line(
        "6",
        "transfer propagators",
        closed_forms <= 1e-10 && s13_gap <= 1e-10,
        format!("max closed-form gap {closed_forms:.2e}; λ=0 vs S13·diag(±1) {s13_gap:.2e}"),
    );
}

fn transfer_algebra(r: &mut Report) {
    let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
    let mut worst: f64 = 0.0;
    let mut signs_ok = true;
    for l in [1.5, 2.0, 4.0] {
        let p = ChainParams::new(l);
        let table = conditional_transfer_table(p, alpha, beta).unwrap();
        let u = expm(&hamiltonian(l), transfer_times(p).t_1to3);
        for (s, row) in table.iter().enumerate() {
            let mut psi = vec![c(0.0, 0.0); 8];
            psi[s] = alpha;
            psi[4 + s] = beta;
            let out = u.apply(&psi).unwrap();
            // density block on sites 1, 2 after tracing out site 3
            for i in 0..4 {
                for j in 0..4 {
                    let b: Complex64 = (0..2).map(|m| out[2 * i + m] * out[2 * j + m].conj()).sum();
                    worst = worst.max((row.block.get(i, j) - b).norm());
                }
            }
            let expected_sign = if s == 0 || s == 3 { -1.0 } else { 1.0 };
            signs_ok &= row.coherence_sign(alpha, beta) == expected_sign;
        }
        let l2 = l * l;
        let den = (l2 + 4.0).powi(2);
        let (b2, a2) = (16.0 * l2 / den, (l2 - 4.0).powi(2) / den);
        let mid = &table[1].block;
        worst = worst.max((mid.get(1, 1) - b2).norm()).max((mid.get(2, 2) - a2).norm());
        let mid = &table[2].block;
        worst = worst.max((mid.get(1, 1) - a2).norm()).max((mid.get(2, 2) - b2).norm());
    }
    r.line(
        "7",
        "transfer algebra",
        worst <= 1e-10 && signs_ok,
        format!("max block gap {worst:.2e}; coherence signs {}", if signs_ok { "as expected" } else { "wrong" }),
    );
}

fn trace_expansions(r: &mut Report) {
    let mut rho1: f64 = 0.0;
    let mut norm: f64 = 0.0;
    let mut rho3: f64 = 0.0;
    let mut closed3: f64 = 0.0;
    let z3 = string("IIZ");
    for l in [-2.0, 0.0, 1.5, 4.0] {
        let p = ChainParams::new(l);
        let grid = linspace(0.0, 2.0 * PI / p.k(), 100);
        let report = overlap_trace(p, Axis::X, &grid).unwrap();
        for row in &report.trace {
            let (a, b, f) = closed(l, row.t);
            rho1 = rho1.max((row.c_source - a).abs()).max((row.c_middle + b).abs()).max((row.c_target + f).abs());
            norm = norm.max((row.c_source.powi(2) + row.c_middle.powi(2) + row.c_target.powi(2) - 1.0).abs());
        }
        let h = hamiltonian(l);
        let state = InitialState::deviation(Axis::Z, 3).unwrap();
        for &t in grid.iter().step_by(10) {
            let u = expm(&h, t);
            let brute = mul(&mul(&u, &z3), &u.adjoint());
            let terms = pauli_decompose(&evolve_deviation(p, &state, t).unwrap());
            for term in &terms {
                rho3 = rho3.max((term.coefficient - coefficient(&brute, &term.name())).norm());
            }
            let (a, b, f) = closed(l, t);
            let nine = [
                ("IIZ", a * a),
                ("IXY", -a * b),
                ("YZY", a * f),
                ("IYX", b * a),
                ("IZI", b * b),
                ("YXI", b * f),
                ("XZX", f * a),
                ("XYI", -f * b),
                ("ZII", f * f),
            ];
            let listed: f64 = nine.iter().map(|(n, v)| (coefficient(&brute, n).re - v).abs()).fold(0.0, f64::max);
            let rest = terms
                .iter()
                .filter(|term| !nine.iter().any(|(n, _)| *n == term.name()))
                .map(|term| term.coefficient.norm())
                .fold(0.0, f64::max);
            closed3 = closed3.max(listed).max(rest);
        }
    }
    r.line(
        "8",
        "trace expansions",
        rho1 <= 1e-10 && norm <= 1e-10 && rho3 <= 1e-10 && closed3 <= 1e-10,
        format!(
            "ρ1 closed-form gap {rho1:.2e}; |Σc²−1| {norm:.2e}; ρ3 vs brute force {rho3:.2e}; nine-term closed form {closed3:.2e}"
        ),
    );
}

fn compiler(r: &mut Report) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for l in [0.0, 1.5, 4.0] {
        let p = ChainParams::new(l);
        let (h, cm, dm) = (hamiltonian(l), part_c(l), part_d(l));
        for t in [transfer_times(p).t_3to1, 0.2, 0.7] {
            for sign in [SignVariant::Plus, SignVariant::Minus] {
                let cases = [
                    (compile_uc(p, t, sign).unwrap(), expm(&cm, t)),
                    (compile_ud(p, t, sign).unwrap(), expm(&dm, t)),
                    (compile_transfer(p, t, sign).unwrap(), expm(&h, t)),
                ];
                for (seq, target) in &cases {
                    worst = worst.max(phase_dist(&simulate_sequence(seq).unwrap(), target));
                    count += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    r.line(
        "9",
        "compiler replay",
        worst <= 1e-9 && elapsed < 5.0,
        format!("max phase-aligned gap {worst:.2e} over {count} sequences, {elapsed:.3} s"),
    );
}

fn bell(r: &mut Report) {
    let mut flip: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    let mut phase_gap: f64 = 0.0;
    for l in [-2.0, 0.0, 1.5, 2.0, 4.0] {
        let p = ChainParams::new(l);
        let u = expm(&hamiltonian(l), transfer_times(p).t_1to3);
        let phi = c(l * l - 4.0, 4.0 * l) / (l * l + 4.0);
        modulus = modulus.max((phi.norm() - 1.0).abs());
        for record in bell_transfer(p) {
            let mut psi = vec![c(0.0, 0.0); 8];
            psi[..4].copy_from_slice(&record.input.amplitudes());
            let out = u.apply(&psi).unwrap();
            let expected_output = match record.input {
                BellLabel::PhiPlus => BellLabel::PhiMinus,
                BellLabel::PhiMinus => BellLabel::PhiPlus,
                other => other,
            };
            let target = expected_output.amplitudes();
            let overlap: Complex64 = (0..4).map(|i| target[i].conj() * out[2 * i]).sum();
            match record.input {
                BellLabel::PhiPlus | BellLabel::PhiMinus => {
                    flip = flip.max((overlap - 1.0).norm()).max((record.phase - 1.0).norm());
                    assert_eq!(record.output, expected_output);
                }
                BellLabel::PsiPlus => {
                    phase_gap = phase_gap.max((overlap - phi).norm()).max((record.phase - phi).norm());
                }
                BellLabel::PsiMinus => {
                    phase_gap = phase_gap.max((overlap + phi.conj()).norm());
                }
            }
        }
    }
    r.line(
        "10",
        "Bell transfer",
        flip <= 1e-12 && modulus <= 1e-12 && phase_gap <= 1e-12,
        format!("Φ± flip gap {flip:.2e}; ||φ|−1| {modulus:.2e}; phase gap {phase_gap:.2e}"),
    );
}

fn duration(r: &mut Report) {
    let p = ChainParams::new(1.5);
    let t = transfer_times(p).t_3to1;
    let nmr = NmrParams::default();
    let uc = estimate_duration(&compile_uc(p, t, SignVariant::Plus).unwrap(), &nmr).unwrap().total_seconds;
    let ud = estimate_duration(&compile_ud(p, t, SignVariant::Plus).unwrap(), &nmr).unwrap().total_seconds;
    let (duc, dud) = ((uc - 0.340) / 0.340, (ud - 0.420) / 0.420);
    let cfg = DurationConfig::default();
    r.soft(
        "11",
        "duration estimate (not gating)",
        duc.abs() <= 0.3 && dud.abs() <= 0.3,
        format!(
            "U_C {:.0} ms ({:+.0}% vs 340), U_D {:.0} ms ({:+.0}% vs 420); {} delay segments and {} refocusing pulses per zz evolution, shaped pulses {}",
            uc * 1e3,
            duc * 100.0,
            ud * 1e3,
            dud * 100.0,
            cfg.delay_multiplicity,
            cfg.refocus_pulses_per_evolution,
            if cfg.shaped_pulses { "charged" } else { "free" },
        ),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    println!("acceptance criteria");
    oracle_equivalence(&mut r);
    commuting_split(&mut r);
    periodicity(&mut r);
    transfer_time_argmax(&mut r);
    threshold(&mut r);
    transfer_propagators(&mut r);
    transfer_algebra(&mut r);
    trace_expansions(&mut r);
    compiler(&mut r);
    bell(&mut r);
    duration(&mut r);
    if r.failures == 0 {
        println!("all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} gating criteria failed", r.failures);
        ExitCode::FAILURE
    }
}
