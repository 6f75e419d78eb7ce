use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use xy3::pulse::{
    compile_with_exchange, estimate_duration_with, verify_replay, write_sequence, DurationConfig, DurationEstimate,
    PulseSequence, SignVariant, Target,
};
use xy3::spin::PauliString;
use xy3::transfer::{overlap_trace, target_argmax};
use xy3::{find_speedup_threshold, transfer_times, Axis, ChainParams, NmrParams, TransferTimes, T0};

use crate::config::RunConfig;

/// Replay tolerance for compiled sequences.
pub const REPLAY_TOL: f64 = 1e-9;

const PEAK_TOL: f64 = 1e-9;

/// Twelve significant digits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimesRow {
    pub lambda: f64,
    pub t_1to3_over_t0: f64,
    pub t_3to1_over_t0: f64,
    pub period_over_t0: f64,
    pub t_1to3: f64,
    pub t_3to1: f64,
    pub period: f64,
    /// `sweep` for requested λ, `threshold` for the λ* row.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimesTable {
    pub t0: f64,
    pub rows: Vec<TimesRow>,
}

pub const TIMES_HEADER: &str = "lambda,t_1to3_over_t0,t_3to1_over_t0,period_over_t0,t_1to3,t_3to1,period,kind";

impl TimesTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{TIMES_HEADER}\n");
        for r in &self.rows {
            let cols = [r.lambda, r.t_1to3_over_t0, r.t_3to1_over_t0, r.period_over_t0, r.t_1to3, r.t_3to1, r.period];
            let cols: Vec<String> = cols.iter().map(|x| num(*x)).collect();
            writeln!(out, "{},{}", cols.join(","), r.kind).unwrap();
        }
        out
    }
}

fn times_row(lambda: f64, kind: &str) -> TimesRow {
    let tt: TransferTimes = transfer_times(ChainParams::new(lambda));
    TimesRow {
        lambda,
        t_1to3_over_t0: tt.t_1to3 / T0,
        t_3to1_over_t0: tt.t_3to1 / T0,
        period_over_t0: tt.period / T0,
        t_1to3: tt.t_1to3,
        t_3to1: tt.t_3to1,
        period: tt.period,
        kind: kind.to_string(),
    }
}

pub fn cmd_times(cfg: &RunConfig) -> TimesTable {
    let mut rows: Vec<TimesRow> = cfg.lambdas.iter().map(|&l| times_row(l, "sweep")).collect();
    if cfg.threshold {
        rows.push(times_row(find_speedup_threshold(), "threshold"));
    }
    TimesTable { t0: T0, rows }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceCsvRow {
    pub t_over_t0: f64,
    pub t: f64,
    pub c_source: f64,
    pub c_middle: f64,
    pub c_target: f64,
    /// Local maximum of `|c_target|` on the grid.
    pub argmax: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSeries {
    pub lambda: f64,
    pub times: TransferTimes,
    pub source: String,
    pub middle: String,
    pub target: String,
    /// Refined maximizer of `|c_target|` over one period.
    pub t_argmax: f64,
    pub t_argmax_over_t0: f64,
    pub rows: Vec<TraceCsvRow>,
    pub final_pauli_expansion: Vec<PauliString>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceArtifact {
    pub t0: f64,
    pub axis: Axis,
    pub series: Vec<TraceSeries>,
}

pub const TRACE_HEADER: &str = "lambda,t_over_t0,t,c_source,c_middle,c_target,argmax";

impl TraceArtifact {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{TRACE_HEADER}\n");
        for s in &self.series {
            for r in &s.rows {
                let cols = [s.lambda, r.t_over_t0, r.t, r.c_source, r.c_middle, r.c_target];
                let cols: Vec<String> = cols.iter().map(|x| num(*x)).collect();
                writeln!(out, "{},{}", cols.join(","), u8::from(r.argmax)).unwrap();
            }
        }
        out
    }
}

/// `steps` points from 0 to `t_max·t0`, endpoints included.
pub fn time_grid(t_max_over_t0: f64, steps: usize) -> Vec<f64> {
    let end = t_max_over_t0 * T0;
    (0..steps).map(|i| end * i as f64 / (steps - 1) as f64).collect()
}

pub fn cmd_trace(cfg: &RunConfig) -> Result<TraceArtifact> {
    let axis: Axis = cfg.axis.into();
    let grid = time_grid(cfg.t_max, cfg.steps);
    let mut series = Vec::new();
    for &lambda in &cfg.lambdas {
        let p = ChainParams::new(lambda);
        let report = overlap_trace(p, axis, &grid)?;
        let t_argmax = target_argmax(p, axis)?;
        let peak_value = overlap_trace(p, axis, &[t_argmax])?.trace[0].c_target.abs();
        let mut peaks = report.target_peaks();
        // an endpoint counts when it reaches the refined maximum
        for row in [report.trace.first(), report.trace.last()].into_iter().flatten() {
            if (row.c_target.abs() - peak_value).abs() < PEAK_TOL && !peaks.contains(&row.t) {
                peaks.push(row.t);
            }
        }
        let rows = report
            .trace
            .iter()
            .map(|r| TraceCsvRow {
                t_over_t0: r.t / T0,
                t: r.t,
                c_source: r.c_source,
                c_middle: r.c_middle,
                c_target: r.c_target,
                argmax: peaks.contains(&r.t),
            })
            .collect();
        series.push(TraceSeries {
            lambda,
            times: report.times,
            source: report.source,
            middle: report.middle,
            target: report.target,
            t_argmax,
            t_argmax_over_t0: t_argmax / T0,
            rows,
            final_pauli_expansion: report.final_pauli_expansion,
        });
    }
    Ok(TraceArtifact { t0: T0, axis, series })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompiledSequence {
    pub target: Target,
    pub sign: SignVariant,
    pub op_count: usize,
    /// Numbered steps present in the sequence.
    pub step_count: usize,
    pub omitted_steps: Vec<u8>,
    pub replay_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<PulseSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileEntry {
    pub lambda: f64,
    pub t: f64,
    pub t_over_t0: f64,
    pub sequences: Vec<CompiledSequence>,
    pub duration_uc: Option<DurationEstimate>,
    pub duration_ud: Option<DurationEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileReport {
    pub duration_config: DurationConfig,
    pub replay_tolerance: f64,
    pub entries: Vec<CompileEntry>,
    pub passed: bool,
}

fn load_nmr(cfg: &RunConfig) -> Result<NmrParams> {
    match &cfg.nmr_params_path {
        Some(path) => NmrParams::from_json_file(path).with_context(|| format!("loading NMR parameters from {}", path.display())),
        None => Ok(NmrParams::default()),
    }
}

fn lambda_tag(lambda: f64) -> String {
    format!("{lambda}").replace('-', "m")
}

/// Compiles U_C, U_D and their fused concatenation for every λ and sign.
/// With an output directory, sequence files and `report.json` are written
/// there; otherwise the sequences are embedded in the returned report.
pub fn cmd_compile(cfg: &RunConfig) -> Result<CompileReport> {
    let nmr = load_nmr(cfg)?;
    let dcfg = DurationConfig { shaped_pulses: cfg.shaped_pulses, ..DurationConfig::default() };
    let out_dir = cfg.output_path.as_deref();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    let mut entries = Vec::new();
    let mut passed = true;
    for &lambda in &cfg.lambdas {
        if lambda < 0.0 && !cfg.exchange_symmetry {
            return Err(xy3::Error::NegativeLambda(lambda).into());
        }
        let p = ChainParams::new(lambda);
        let t = cfg.time.unwrap_or_else(|| transfer_times(p).t_3to1);
        let mut sequences = Vec::new();
        for sign in cfg.sign.variants() {
            for target in [Target::UC, Target::UD, Target::Transfer] {
                let seq = compile_with_exchange(target, p, t, sign)?;
                let replay_distance = verify_replay(&seq)?;
                passed &= replay_distance <= REPLAY_TOL;
                let file = match out_dir {
                    Some(dir) => Some(write_sequence_file(dir, cfg, &seq, lambda)?),
                    None => None,
                };
                sequences.push(CompiledSequence {
                    target,
                    sign,
                    op_count: seq.ops.len(),
                    step_count: seq.steps.len(),
                    omitted_steps: seq.omitted_steps.clone(),
                    replay_distance,
                    sequence: if out_dir.is_none() { Some(seq) } else { None },
                    file,
                });
            }
        }
        let (duration_uc, duration_ud, duration_note) = if lambda >= 0.0 {
            let sign = cfg.sign.variants()[0];
            let uc = compile_with_exchange(Target::UC, p, t, sign)?;
            let ud = compile_with_exchange(Target::UD, p, t, sign)?;
            (Some(estimate_duration_with(&uc, &nmr, &dcfg)?), Some(estimate_duration_with(&ud, &nmr, &dcfg)?), None)
        } else {
            (None, None, Some("delay closed forms assume λ ≥ 0; no estimate for exchange-compiled sequences".into()))
        };
        entries.push(CompileEntry { lambda, t, t_over_t0: t / T0, sequences, duration_uc, duration_ud, duration_note });
    }
    let report = CompileReport { duration_config: dcfg, replay_tolerance: REPLAY_TOL, entries, passed };
    if let Some(dir) = out_dir {
        let path = dir.join("report.json");
        fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

fn write_sequence_file(dir: &Path, cfg: &RunConfig, seq: &PulseSequence, lambda: f64) -> Result<String> {
    let stem = format!("{}_{}_lambda{}", seq.target, seq.sign_variant, lambda_tag(lambda));
    let (name, body) = match cfg.format {
        crate::config::Format::Csv => (format!("{stem}.seq"), write_sequence(seq)),
        crate::config::Format::Json => (format!("{stem}.json"), seq.to_json()? + "\n"),
    };
    let path = dir.join(&name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(name)
}
