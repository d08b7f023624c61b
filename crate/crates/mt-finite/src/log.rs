//! Execution logs: the full resampling history of one solver run.
//!
//! Text export (line-oriented, consumed by the stats and witness commands):
//!
//! ```text
//! init 0=1 1=0 2=1
//! resample 1 4 before 0,0,0,0 after 1,0,1,0 bits 4
//! resample 2 3 before 0,1,0,0 after 0,0,1,1 bits 4
//! ```
//!
//! One `init` line with `var=value` pairs in index order, then one
//! `resample` line per record: step, event id, the forbidden tuple found,
//! the freshly drawn tuple, and how many tape bits the redraw consumed.

use std::fmt::Write as _;

use lll_core::types::{EventId, FiniteInstance, Value, VarId};

use crate::assignment::Assignment;
use crate::error::MtError;

/// One resampling step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleRecord {
    /// 1-based step number.
    pub step: u64,
    pub event: EventId,
    /// The event's local tuple before the redraw; always forbidden.
    pub values_before: Vec<Value>,
    /// The tuple after redrawing each variable in increasing index order.
    pub values_after: Vec<Value>,
    /// Tape bits the redraw consumed.
    pub bits_consumed: u64,
}

/// The complete history of one run: the initial sample, every resample, and
/// the final assignment. Replaying `records` over `initial_values`
/// reproduces `final_values` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionLog {
    pub initial_values: Assignment,
    pub records: Vec<ResampleRecord>,
    pub final_values: Assignment,
    /// Bits consumed by the initial sample. Internal bookkeeping for the
    /// fresh-randomness invariant; not part of the text export.
    pub initial_bits: u64,
}

impl ExecutionLog {
    /// Total bits consumed by the resample records (excluding the initial
    /// sample).
    pub fn resample_bits(&self) -> u64 {
        self.records.iter().map(|r| r.bits_consumed).sum()
    }

    /// How many times `event` was resampled.
    pub fn count_for(&self, event: EventId) -> u64 {
        self.records.iter().filter(|r| r.event == event).count() as u64
    }

    /// Apply the records to `initial_values`, validating each step: the
    /// event must exist, its current tuple must equal `values_before`, and
    /// that tuple must be forbidden. Returns the resulting assignment, which
    /// equals `final_values` for every log the solver produces.
    pub fn replay(&self, instance: &FiniteInstance) -> Result<Assignment, MtError> {
        let mut state = self.initial_values.clone();
        for record in &self.records {
            let event = instance.event(record.event).ok_or_else(|| {
                MtError::Replay(format!("step {}: unknown event {}", record.step, record.event))
            })?;
            let current = state.local_tuple(&event.vars).ok_or_else(|| {
                MtError::Replay(format!(
                    "step {}: event {} has unassigned variables",
                    record.step, record.event
                ))
            })?;
            if current != record.values_before {
                return Err(MtError::Replay(format!(
                    "step {}: state {:?} does not match recorded before-tuple {:?}",
                    record.step, current, record.values_before
                )));
            }
            if !event.is_forbidden(&record.values_before) {
                return Err(MtError::Replay(format!(
                    "step {}: before-tuple {:?} is not forbidden for event {}",
                    record.step, record.values_before, record.event
                )));
            }
            for (&var, &value) in event.vars.iter().zip(&record.values_after) {
                state.set(var, value);
            }
        }
        Ok(state)
    }

    /// Render the log in its text form.
    pub fn export(&self) -> String {
        let mut out = String::new();
        out.push_str("init");
        for (&var, &value) in &self.initial_values.values {
            let _ = write!(out, " {var}={value}");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "resample {} {} before ", r.step, r.event);
            push_tuple(&mut out, &r.values_before);
            out.push_str(" after ");
            push_tuple(&mut out, &r.values_after);
            let _ = writeln!(out, " bits {}", r.bits_consumed);
        }
        out
    }
}

fn push_tuple(out: &mut String, tuple: &[Value]) {
    for (i, v) in tuple.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
}

fn parse_tuple(tok: &str, line: usize) -> Result<Vec<Value>, MtError> {
    tok.split(',')
        .map(|s| {
            s.parse::<Value>().map_err(|_| MtError::LogParse {
                line,
                msg: format!("bad tuple entry '{s}'"),
            })
        })
        .collect()
}

/// Parse a log from its text form and replay it against `instance` to
/// reconstruct and validate the final assignment. (`initial_bits` is not
/// part of the text form and is restored as 0.)
pub fn parse_log(text: &str, instance: &FiniteInstance) -> Result<ExecutionLog, MtError> {
    let mut initial = Assignment::new();
    let mut records = Vec::new();
    let mut saw_init = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next().expect("non-empty line") {
            "init" => {
                if saw_init {
                    return Err(MtError::LogParse {
                        line: lineno,
                        msg: "duplicate init line".into(),
                    });
                }
                saw_init = true;
                for pair in tokens {
                    let (var, value) = pair.split_once('=').ok_or_else(|| MtError::LogParse {
                        line: lineno,
                        msg: format!("bad assignment '{pair}'"),
                    })?;
                    let var: VarId = var.parse().map_err(|_| MtError::LogParse {
                        line: lineno,
                        msg: format!("bad variable index '{var}'"),
                    })?;
                    let value: Value = value.parse().map_err(|_| MtError::LogParse {
                        line: lineno,
                        msg: format!("bad value '{value}'"),
                    })?;
                    initial.set(var, value);
                }
            }
            "resample" => {
                let fields: Vec<&str> = tokens.collect();
                if fields.len() != 8
                    || fields[2] != "before"
                    || fields[4] != "after"
                    || fields[6] != "bits"
                {
                    return Err(MtError::LogParse {
                        line: lineno,
                        msg: "expected 'resample <step> <event> before <tuple> after <tuple> bits <n>'"
                            .into(),
                    });
                }
                let step: u64 = fields[0].parse().map_err(|_| MtError::LogParse {
                    line: lineno,
                    msg: format!("bad step '{}'", fields[0]),
                })?;
                if step != records.len() as u64 + 1 {
                    return Err(MtError::LogParse {
                        line: lineno,
                        msg: format!("step {step} out of sequence"),
                    });
                }
                let event: EventId = fields[1].parse().map_err(|_| MtError::LogParse {
                    line: lineno,
                    msg: format!("bad event id '{}'", fields[1]),
                })?;
                let bits: u64 = fields[7].parse().map_err(|_| MtError::LogParse {
                    line: lineno,
                    msg: format!("bad bit count '{}'", fields[7]),
                })?;
                records.push(ResampleRecord {
                    step,
                    event,
                    values_before: parse_tuple(fields[3], lineno)?,
                    values_after: parse_tuple(fields[5], lineno)?,
                    bits_consumed: bits,
                });
            }
            other => {
                return Err(MtError::LogParse {
                    line: lineno,
                    msg: format!("unknown keyword '{other}'"),
                });
            }
        }
    }
    if !saw_init {
        return Err(MtError::LogParse {
            line: 0,
            msg: "missing init line".into(),
        });
    }
    let log = ExecutionLog {
        initial_values: initial,
        records,
        final_values: Assignment::new(),
        initial_bits: 0,
    };
    let final_values = log.replay(instance)?;
    Ok(ExecutionLog {
        final_values,
        ..log
    })
}
