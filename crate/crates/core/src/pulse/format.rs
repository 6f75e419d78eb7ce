//! Line-oriented text form of a [`PulseSequence`].
//!
//! ```text
//! # target uc
//! # sign plus
//! # lambda 1.5
//! # t 0.7
//! # omitted 2,4
//! # step 1
//! ROT 3 x 1.5707963267948966
//! ZZ 12 -1.5707963267948966 link
//! ZZZ 0.7853981633974483
//! ZROT 1 0.5
//! DELAY 0.0224 4x d1
//! ```
//!
//! Angles are in radians and written in shortest round-trip form.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{CoupledPair, CouplingRole, PulseOp, PulseSequence, RotationAxis, SignVariant, SiteSet, Target};
use crate::error::{Error, Result};

pub fn write_sequence(seq: &PulseSequence) -> String {
    let mut out = String::new();
    let omitted: Vec<String> = seq.omitted_steps.iter().map(|s| s.to_string()).collect();
    writeln!(out, "# target {}", seq.target).unwrap();
    writeln!(out, "# sign {}", seq.sign_variant).unwrap();
    writeln!(out, "# lambda {}", seq.lambda).unwrap();
    writeln!(out, "# t {}", seq.t).unwrap();
    if !omitted.is_empty() {
        writeln!(out, "# omitted {}", omitted.join(",")).unwrap();
    }
    let mut current = None;
    for (i, op) in seq.ops.iter().enumerate() {
        let step = seq.step_of(i);
        if step != current {
            match step {
                Some(s) => writeln!(out, "# step {s}").unwrap(),
                None => writeln!(out, "# step -").unwrap(),
            }
            current = step;
        }
        match op {
            PulseOp::HardRotation { targets, axis, angle } => writeln!(out, "ROT {targets} {axis} {angle}"),
            PulseOp::ZRotation { site, angle } => writeln!(out, "ZROT {site} {angle}"),
            PulseOp::ZZEvolution { pair, angle, role } => match role {
                Some(r) => writeln!(out, "ZZ {} {angle} {}", pair.label(), r.label()),
                None => writeln!(out, "ZZ {} {angle}", pair.label()),
            },
            PulseOp::ZZZEvolution { angle } => writeln!(out, "ZZZ {angle}"),
            PulseOp::Delay { seconds, note } if note.is_empty() => writeln!(out, "DELAY {seconds}"),
            PulseOp::Delay { seconds, note } => writeln!(out, "DELAY {seconds} {note}"),
        }
        .unwrap();
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    token.parse().map_err(|_| parse_err(line, format!("bad {what} '{token}'")))
}

fn parse_op(line: usize, text: &str) -> Result<PulseOp> {
    let mut tokens = text.split_whitespace();
    let keyword = tokens.next().expect("nonempty line");
    let op = match keyword {
        "ROT" => {
            let targets: SiteSet = field(line, tokens.next(), "target sites")?;
            let axis: RotationAxis = field(line, tokens.next(), "axis")?;
            PulseOp::HardRotation { targets, axis, angle: field(line, tokens.next(), "angle")? }
        }
        "ZROT" => PulseOp::ZRotation { site: field(line, tokens.next(), "site")?, angle: field(line, tokens.next(), "angle")? },
        "ZZ" => {
            let pair: CoupledPair = field(line, tokens.next(), "pair")?;
            let angle = field(line, tokens.next(), "angle")?;
            let role = match tokens.next() {
                Some(r) => Some(r.parse::<CouplingRole>().map_err(|e| parse_err(line, e.to_string()))?),
                None => None,
            };
            PulseOp::ZZEvolution { pair, angle, role }
        }
        "ZZZ" => PulseOp::ZZZEvolution { angle: field(line, tokens.next(), "angle")? },
        "DELAY" => {
            let seconds = field(line, tokens.next(), "seconds")?;
            let rest = text.trim_start()["DELAY".len()..].trim_start();
            let note = rest.split_once(char::is_whitespace).map(|(_, n)| n.trim()).unwrap_or("");
            return finish(line, PulseOp::Delay { seconds, note: note.to_string() });
        }
        other => return Err(parse_err(line, format!("unknown op '{other}'"))),
    };
    if let Some(extra) = tokens.next() {
        return Err(parse_err(line, format!("unexpected trailing token '{extra}'")));
    }
    finish(line, op)
}

fn finish(line: usize, op: PulseOp) -> Result<PulseOp> {
    op.validate().map_err(|e| parse_err(line, e.to_string()))?;
    Ok(op)
}

/// Parses [`write_sequence`] output. Header comments are optional; unknown
/// comments and blank lines are ignored.
pub fn parse_sequence(text: &str) -> Result<PulseSequence> {
    let mut seq = PulseSequence::new(Target::Rotation, SignVariant::Plus, 0.0, 0.0);
    let mut current: Option<u8> = None;
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            let (Some(key), value) = (parts.next(), parts.next()) else { continue };
            match key {
                "target" => seq.target = field(line, value, "target")?,
                "sign" => seq.sign_variant = field(line, value, "sign variant")?,
                "lambda" => seq.lambda = field(line, value, "lambda")?,
                "t" => seq.t = field(line, value, "t")?,
                "omitted" => {
                    let list = value.ok_or_else(|| parse_err(line, "missing omitted steps"))?;
                    seq.omitted_steps = list
                        .split(',')
                        .map(|s| s.parse().map_err(|_| parse_err(line, format!("bad step '{s}'"))))
                        .collect::<Result<_>>()?;
                }
                "step" => {
                    current = match value {
                        Some("-") => None,
                        v => Some(field(line, v, "step number")?),
                    }
                }
                _ => {}
            }
            continue;
        }
        seq.ops.push(parse_op(line, trimmed)?);
        labels.push(current);
    }
    for (i, label) in labels.iter().enumerate() {
        let Some(step) = *label else { continue };
        match seq.steps.last_mut() {
            Some(last) if last.step == step && last.start + last.len == i => last.len += 1,
            _ => seq.steps.push(super::StepSpan { step, start: i, len: 1 }),
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{compile_transfer, compile_uc, lower_sequence};
    use crate::spin::ChainParams;
    use proptest::prelude::*;

    #[test]
    fn compiled_sequence_round_trips() {
        let seq = compile_transfer(ChainParams::new(1.5), 0.707, SignVariant::Minus).unwrap();
        let seq = lower_sequence(&seq).unwrap();
        let text = write_sequence(&seq);
        assert_eq!(parse_sequence(&text).unwrap(), seq);
        let json = seq.to_json().unwrap();
        assert_eq!(PulseSequence::from_json(&json).unwrap(), seq);
    }

    #[test]
    fn header_and_ops_layout() {
        let seq = compile_uc(ChainParams::new(0.0), 0.5, SignVariant::Plus).unwrap();
        let text = write_sequence(&seq);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# target uc");
        assert!(text.contains("# omitted 2,4"));
        assert!(text.contains("\nZZZ "));
        assert!(text.contains("\nZZ 12 "));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "ROT 1 x 0.5\nZZ 13 0.1\n";
        match parse_sequence(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_sequence("FOO 1").is_err());
        assert!(parse_sequence("ZROT 4 0.1").is_err());
        assert!(parse_sequence("ZZZ nan").is_err());
        assert!(parse_sequence("ZZZ 0.1 0.2").is_err());
        assert!(parse_sequence("ROT 1,3 z 0.1").is_err());
    }

    #[test]
    fn delay_notes_keep_spaces() {
        let seq = parse_sequence("DELAY 0.01 4x d1 J12 link\n").unwrap();
        assert_eq!(seq.ops[0], PulseOp::Delay { seconds: 0.01, note: "4x d1 J12 link".into() });
    }

    fn angle() -> impl Strategy<Value = f64> {
        -10.0f64..10.0
    }

    fn op_strategy() -> impl Strategy<Value = PulseOp> {
        let sites = prop_oneof![Just(vec![1u8]), Just(vec![2]), Just(vec![3]), Just(vec![1, 3]), Just(vec![1, 2, 3])];
        let axis = prop_oneof![
            Just(RotationAxis::PlusX),
            Just(RotationAxis::MinusX),
            Just(RotationAxis::PlusY),
            Just(RotationAxis::MinusY)
        ];
        let pair = prop_oneof![Just(CoupledPair::OneTwo), Just(CoupledPair::TwoThree)];
        let role = prop_oneof![
            Just(None),
            Just(Some(CouplingRole::ZzzLink)),
            Just(Some(CouplingRole::ZzzCore)),
            Just(Some(CouplingRole::Tilt)),
            Just(Some(CouplingRole::Central))
        ];
        prop_oneof![
            (sites, axis, angle()).prop_map(|(s, axis, angle)| PulseOp::HardRotation {
                targets: SiteSet::new(&s).unwrap(),
                axis,
                angle
            }),
            (1u8..=3, angle()).prop_map(|(site, angle)| PulseOp::ZRotation { site, angle }),
            (pair, angle(), role).prop_map(|(pair, angle, role)| PulseOp::ZZEvolution { pair, angle, role }),
            angle().prop_map(|angle| PulseOp::ZZZEvolution { angle }),
            (0.0f64..1.0, "([a-z0-9]{1,6}( [a-z0-9]{1,6}){0,2})?")
                .prop_map(|(seconds, note)| PulseOp::Delay { seconds, note }),
        ]
    }

    proptest! {
        #[test]
        fn text_round_trip(ops in proptest::collection::vec(op_strategy(), 0..40), lambda in 0.0f64..5.0, t in 0.0f64..3.0) {
            let mut seq = PulseSequence::new(Target::UC, SignVariant::Minus, t, lambda);
            seq.ops = ops;
            let back = parse_sequence(&write_sequence(&seq)).unwrap();
            prop_assert_eq!(back, seq);
        }
    }
}
