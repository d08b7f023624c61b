//! Shared fixtures for the command-line tests: canonical instances, file
//! writing, and a binary runner.

// Shared by both integration-test targets; each uses a different subset.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Output;

use lll_core::format::render_instance;
use lll_core::rational::rat;
use lll_core::types::{Event, FiniteInstance, VariableSpec};
use lll_core::Rational;

/// Twenty 4-clauses forbidding all-zeros, clause k on variables
/// 3k..=3k+3, so consecutive clauses overlap in exactly one variable;
/// weights 1/4, slack 1/10.
pub fn chain_cnf() -> FiniteInstance {
    let events: Vec<Event> = (0..20)
        .map(|k| Event::new(k, (3 * k..=3 * k + 3).collect(), vec![vec![0, 0, 0, 0]]).unwrap())
        .collect();
    let weights: BTreeMap<_, _> = (0..20).map(|k| (k, rat(1, 4))).collect();
    FiniteInstance::new(
        (0..=60).map(VariableSpec::uniform_bit).collect(),
        events,
        weights,
        rat(1, 10),
    )
    .unwrap()
}

/// Three 3-clauses forbidding all-zeros arranged in a triangle (events on
/// variables {0,1,2}, {2,3,4}, {4,5,0}), so every event has exactly two
/// neighbors. With x = 1/2 the condition holds with equality at slack 0
/// and fails at slack 1/10.
pub fn triangle_m3(epsilon: Rational) -> FiniteInstance {
    let layout: [[u64; 3]; 3] = [[0, 1, 2], [2, 3, 4], [0, 4, 5]];
    let events: Vec<Event> = layout
        .iter()
        .enumerate()
        .map(|(id, vars)| Event::new(id as u64, vars.to_vec(), vec![vec![0, 0, 0]]).unwrap())
        .collect();
    let weights: BTreeMap<_, _> = (0..3).map(|k| (k, rat(1, 2))).collect();
    FiniteInstance::new(
        (0..6).map(VariableSpec::uniform_bit).collect(),
        events,
        weights,
        epsilon,
    )
    .unwrap()
}

/// One central 4-clause with four satellite 4-clauses, each sharing one
/// variable with the center and nothing with each other, all x = 1/4:
/// the center's bound is (1-eps) * (1/4) * (3/4)^4.
pub fn star_m4(epsilon: Rational) -> FiniteInstance {
    let layout: [[u64; 4]; 5] = [
        [0, 1, 2, 3],
        [0, 4, 5, 6],
        [1, 7, 8, 9],
        [2, 10, 11, 12],
        [3, 13, 14, 15],
    ];
    let events: Vec<Event> = layout
        .iter()
        .enumerate()
        .map(|(id, vars)| Event::new(id as u64, vars.to_vec(), vec![vec![0; 4]]).unwrap())
        .collect();
    let weights: BTreeMap<_, _> = (0..5).map(|k| (k, rat(1, 4))).collect();
    FiniteInstance::new(
        (0..16).map(VariableSpec::uniform_bit).collect(),
        events,
        weights,
        epsilon,
    )
    .unwrap()
}

/// Three pairwise clauses forbidding (0,0) on variables {k, k+1} with
/// x = 1/2: the middle clause has two neighbors, so its bound is
/// 1/2 * (1/2)^2 = 1/8 < 1/4 and even the bare condition fails.
pub fn failing_pair_chain() -> FiniteInstance {
    let events: Vec<Event> = (0..3)
        .map(|k| Event::new(k, vec![k, k + 1], vec![vec![0, 0]]).unwrap())
        .collect();
    let weights: BTreeMap<_, _> = (0..3).map(|k| (k, rat(1, 2))).collect();
    FiniteInstance::new(
        (0..4).map(VariableSpec::uniform_bit).collect(),
        events,
        weights,
        rat(0, 1),
    )
    .unwrap()
}

/// One uniform bit whose single event forbids the value 1.
pub fn single_bit_forbid_one() -> FiniteInstance {
    let event = Event::new(0, vec![0], vec![vec![1]]).unwrap();
    FiniteInstance::new(
        vec![VariableSpec::uniform_bit(0)],
        vec![event],
        BTreeMap::from([(0, rat(1, 2))]),
        rat(0, 1),
    )
    .unwrap()
}

pub fn write_instance(dir: &Path, name: &str, instance: &FiniteInstance) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, render_instance(instance)).unwrap();
    path
}

/// Run the binary with the given arguments and return its output.
pub fn run_lll(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_lll"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal termination")
}

pub fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

pub fn stderr_str(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

/// Non-comment report lines.
pub fn body_lines(stdout: &str) -> Vec<String> {
    stdout
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}
