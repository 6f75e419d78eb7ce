use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use xy3::pulse::SignVariant;
use xy3::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Transfer times and period against λ.
    Times,
    /// Pauli-coefficient traces of a transferred deviation operator.
    Trace,
    /// Pulse sequences for U_C and U_D with replay check and duration estimate.
    Compile,
    /// Run every numerical invariant and report distances.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignChoice {
    Plus,
    Minus,
    Both,
}

impl SignChoice {
    pub fn variants(self) -> Vec<SignVariant> {
        match self {
            SignChoice::Plus => vec![SignVariant::Plus],
            SignChoice::Minus => vec![SignVariant::Minus],
            SignChoice::Both => vec![SignVariant::Plus, SignVariant::Minus],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Three-qubit XY chain with three-spin interaction: transfer times, traces,
/// NMR pulse compilation and verification.
#[derive(Debug, Parser)]
#[command(name = "xy3", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Three-spin coupling; repeat the flag or separate values by commas.
    #[arg(long = "lambda", allow_hyphen_values = true, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// End of the time grid in units of t0 = π/(2√2).
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub t_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "x")]
    pub axis: AxisArg,
    #[arg(long, value_enum, default_value = "both")]
    pub sign: SignChoice,
    /// JSON file overriding the TCE spectrometer parameters.
    #[arg(long)]
    pub nmr_params: Option<PathBuf>,
    /// Output file (a directory for compile); standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// times: append the row for the speed-up threshold λ*.
    #[arg(long)]
    pub threshold: bool,
    /// compile: allow λ < 0 by compiling the site-exchanged sequence.
    #[arg(long)]
    pub exchange_symmetry: bool,
    /// compile: leave shaped selective π pulses out of the duration estimate.
    #[arg(long)]
    pub no_shaped_pulses: bool,
    /// compile: chain time to compile for instead of the 3→1 transfer time.
    #[arg(long, allow_negative_numbers = true)]
    pub time: Option<f64>,
}

/// λ values swept by `verify` when none are given.
pub const DEFAULT_VERIFY_LAMBDAS: [f64; 5] = [-2.0, 0.0, 1.5, 2.71199, 4.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub lambdas: Vec<f64>,
    pub t_max: f64,
    pub steps: usize,
    pub axis: AxisArg,
    pub sign: SignChoice,
    pub nmr_params_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub threshold: bool,
    pub exchange_symmetry: bool,
    pub shaped_pulses: bool,
    pub time: Option<f64>,
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self, String> {
        let lambdas = if args.lambda.is_empty() && args.command == Command::Verify {
            DEFAULT_VERIFY_LAMBDAS.to_vec()
        } else {
            args.lambda
        };
        let cfg = RunConfig {
            command: args.command,
            lambdas,
            t_max: args.t_max,
            steps: args.steps,
            axis: args.axis,
            sign: args.sign,
            nmr_params_path: args.nmr_params,
            output_path: args.out,
            format: args.format,
            threshold: args.threshold,
            exchange_symmetry: args.exchange_symmetry,
            shaped_pulses: !args.no_shaped_pulses,
            time: args.time,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.steps < 2 {
            return Err(format!("--steps must be at least 2, got {}", self.steps));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(format!("--t-max must be positive, got {}", self.t_max));
        }
        if self.lambdas.is_empty() && !(self.command == Command::Times && self.threshold) {
            return Err("at least one --lambda is required".into());
        }
        if let Some(bad) = self.lambdas.iter().find(|l| !l.is_finite()) {
            return Err(format!("--lambda {bad} is not a finite number"));
        }
        if self.command == Command::Compile && !self.exchange_symmetry {
            if let Some(&l) = self.lambdas.iter().find(|l| **l < 0.0) {
                return Err(format!("{} (pass --exchange-symmetry)", xy3::Error::NegativeLambda(l)));
            }
        }
        if let Some(t) = self.time {
            if !(t.is_finite() && t >= 0.0) {
                return Err(format!("--time must be finite and nonnegative, got {t}"));
            }
        }
        Ok(())
    }

    /// A configuration with defaults for everything but the command and λ list.
    pub fn new(command: Command, lambdas: Vec<f64>) -> Self {
        RunConfig {
            command,
            lambdas,
            t_max: 2.0,
            steps: 201,
            axis: AxisArg::X,
            sign: SignChoice::Both,
            nmr_params_path: None,
            output_path: None,
            format: Format::Csv,
            threshold: false,
            exchange_symmetry: false,
            shaped_pulses: true,
            time: None,
        }
    }
}
