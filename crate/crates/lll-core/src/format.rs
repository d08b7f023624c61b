//! Plain-text instance format.
//!
//! ```text
//! # comments and blank lines are ignored
//! vars <count>
//! var <index> <range-size> <p0> <p1> ...
//! event <id> vars <i0> <i1> ... x <weight>
//! forbid <v0> <v1> ...
//! epsilon <num/den>
//! ```
//!
//! Probabilities and weights are exact rationals written `num/den` (or a bare
//! integer). Each `forbid` line attaches one forbidden tuple to the most
//! recent `event` line, listing values in the order of that event's
//! variables. The `epsilon` line is required and comes last.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::CoreError;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::types::{Event, EventId, FiniteInstance, Value, VarId, VariableSpec};

struct PendingEvent {
    id: EventId,
    vars: Vec<VarId>,
    weight: Rational,
    forbidden: Vec<Vec<Value>>,
}

/// Parse an instance from its text form. Errors carry the 1-based line
/// number of the offending line.
pub fn parse_instance(text: &str) -> Result<FiniteInstance, CoreError> {
    let mut var_count: Option<u64> = None;
    let mut variables: Vec<Option<VariableSpec>> = Vec::new();
    let mut events: Vec<PendingEvent> = Vec::new();
    let mut epsilon: Option<Rational> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if epsilon.is_some() {
            return Err(CoreError::parse(lineno, "content after epsilon line"));
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("non-empty line has a first token");
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "vars" => {
                if var_count.is_some() {
                    return Err(CoreError::parse(lineno, "duplicate vars line"));
                }
                let count = parse_u64(&rest, 0, lineno, "variable count")?;
                expect_len(&rest, 1, lineno)?;
                variables = vec![None; count as usize];
                var_count = Some(count);
            }
            "var" => {
                let count =
                    var_count.ok_or(CoreError::parse(lineno, "var line before vars line"))?;
                let index = parse_u64(&rest, 0, lineno, "variable index")?;
                let range = parse_u64(&rest, 1, lineno, "range size")?;
                if index >= count {
                    return Err(CoreError::parse(
                        lineno,
                        format!("variable index {index} out of range (vars {count})"),
                    ));
                }
                expect_len(&rest, 2 + range as usize, lineno)?;
                let distribution = rest[2..]
                    .iter()
                    .map(|tok| {
                        parse_rational(tok).ok_or_else(|| {
                            CoreError::parse(lineno, format!("bad probability '{tok}'"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let spec = VariableSpec::new(index, distribution)
                    .map_err(|e| CoreError::parse(lineno, e.to_string()))?;
                let slot = &mut variables[index as usize];
                if slot.is_some() {
                    return Err(CoreError::parse(
                        lineno,
                        format!("duplicate var line for variable {index}"),
                    ));
                }
                *slot = Some(spec);
            }
            "event" => {
                let id = parse_u64(&rest, 0, lineno, "event id")?;
                if rest.get(1) != Some(&"vars") {
                    return Err(CoreError::parse(lineno, "expected 'vars' after event id"));
                }
                let x_pos = rest
                    .iter()
                    .position(|&tok| tok == "x")
                    .ok_or(CoreError::parse(lineno, "event line missing 'x <weight>'"))?;
                if x_pos + 2 != rest.len() {
                    return Err(CoreError::parse(
                        lineno,
                        "expected exactly one token after 'x'",
                    ));
                }
                let vars = rest[2..x_pos]
                    .iter()
                    .map(|tok| {
                        tok.parse::<VarId>().map_err(|_| {
                            CoreError::parse(lineno, format!("bad variable index '{tok}'"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if vars.is_empty() {
                    return Err(CoreError::parse(lineno, "event has no variables"));
                }
                let weight = parse_rational(rest[x_pos + 1]).ok_or_else(|| {
                    CoreError::parse(lineno, format!("bad weight '{}'", rest[x_pos + 1]))
                })?;
                events.push(PendingEvent {
                    id,
                    vars,
                    weight,
                    forbidden: Vec::new(),
                });
            }
            "forbid" => {
                let event = events
                    .last_mut()
                    .ok_or(CoreError::parse(lineno, "forbid line before any event"))?;
                expect_len(&rest, event.vars.len(), lineno)?;
                let tuple = rest
                    .iter()
                    .map(|tok| {
                        tok.parse::<Value>().map_err(|_| {
                            CoreError::parse(lineno, format!("bad value '{tok}'"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                event.forbidden.push(tuple);
            }
            "epsilon" => {
                expect_len(&rest, 1, lineno)?;
                let eps = parse_rational(rest[0]).ok_or_else(|| {
                    CoreError::parse(lineno, format!("bad epsilon '{}'", rest[0]))
                })?;
                epsilon = Some(eps);
            }
            other => {
                return Err(CoreError::parse(
                    lineno,
                    format!("unknown keyword '{other}'"),
                ));
            }
        }
    }

    let count = var_count.ok_or(CoreError::parse(0, "missing vars line"))?;
    let epsilon = epsilon.ok_or(CoreError::parse(0, "missing epsilon line"))?;
    let variables = variables
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.ok_or_else(|| CoreError::parse(0, format!("variable {i} never declared")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(variables.len() as u64, count);

    let mut weights = BTreeMap::new();
    let mut built = Vec::with_capacity(events.len());
    for pending in events {
        weights.insert(pending.id, pending.weight);
        built.push(Event::new(pending.id, pending.vars, pending.forbidden)?);
    }
    FiniteInstance::new(variables, built, weights, epsilon)
}

/// Render an instance in the text format; `parse_instance` reads it back
/// verbatim.
pub fn render_instance(instance: &FiniteInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", instance.variables.len());
    for spec in &instance.variables {
        let _ = write!(out, "var {} {}", spec.index, spec.range_size);
        for p in &spec.distribution {
            let _ = write!(out, " {}", format_rational(p));
        }
        out.push('\n');
    }
    for event in &instance.events {
        let _ = write!(out, "event {} vars", event.id);
        for &v in &event.vars {
            let _ = write!(out, " {v}");
        }
        let weight = instance
            .weights
            .get(&event.id)
            .expect("validated instances have a weight per event");
        let _ = writeln!(out, " x {}", format_rational(weight));
        for tuple in &event.forbidden {
            let _ = write!(out, "forbid");
            for &v in tuple {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
    }
    let _ = writeln!(out, "epsilon {}", format_rational(&instance.epsilon));
    out
}

fn expect_len(rest: &[&str], want: usize, lineno: usize) -> Result<(), CoreError> {
    if rest.len() != want {
        return Err(CoreError::parse(
            lineno,
            format!("expected {want} fields, found {}", rest.len()),
        ));
    }
    Ok(())
}

fn parse_u64(rest: &[&str], pos: usize, lineno: usize, what: &str) -> Result<u64, CoreError> {
    let tok = rest
        .get(pos)
        .ok_or_else(|| CoreError::parse(lineno, format!("missing {what}")))?;
    tok.parse::<u64>()
        .map_err(|_| CoreError::parse(lineno, format!("bad {what} '{tok}'")))
}
