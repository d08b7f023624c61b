//! Command-line front end for the resampling engine: condition checking,
//! finite solving, staged runs, computable-prefix extraction, pattern
//! avoidance, and statistics reports.
//!
//! Exit codes: 0 success, 1 condition failure, 2 budget exhaustion,
//! 3 extraction threshold failure, 64 usage or parse error, 70 internal
//! invariant breach. Every command is deterministic given its full flag
//! set, and every report starts with `#` header lines spelling out the
//! defaults in effect.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use lll_core::format::parse_instance;
use lll_core::rational::format_rational;
use lll_core::types::{FiniteInstance, Value, VarId};
use lll_core::{build_dependency_graph, check_lll, CoreError};

use mt_finite::{
    priority_ordering, resample_stats, solve_finite, theoretical_bound, ExecutionLog, MtError,
    RandomTape,
};

use infinite_engine::{
    extract_computable_prefix, run_stages, stabilization_bound, verify_prefix, EffectiveInstance,
    EngineError, ExtractionMode, FiniteAsEffective,
};

use applications::{
    avoid_patterns_2d, avoid_substrings, builtin_pattern_set, builtin_word_set,
    parse_pattern_set_2d, parse_word_set, substring_cnf, AppError, SubstringFamily,
};

use num_rational::BigRational as Rational;
use num_traits::Zero;

#[derive(Parser)]
#[command(
    name = "lll",
    about = "Constructive local-lemma engine: solve, stage, extract, avoid",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the per-event condition Pr[A] <= (1-eps) x(A) prod (1-x(B))
    /// of an instance file; exit 0 iff every event passes.
    Check {
        /// Instance file (see the library's plain-text format).
        file: PathBuf,
        /// Check the bare condition with the (1-eps) factor dropped.
        #[arg(long)]
        no_slack: bool,
    },
    /// Sample and resample a finite instance until every event holds.
    Solve {
        /// Instance file.
        file: PathBuf,
        /// Random-tape seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Resample budget; exceeding it exits with code 2.
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        /// Write the execution log to this file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run stages 0..=UPTO of the staged engine and print one
    /// `prefix <stage> <values...>` line per stage.
    Stages {
        #[command(flatten)]
        source: FamilySource,
        /// Last stage to run.
        #[arg(long)]
        upto: u64,
        /// Random-tape seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Extract a computable prefix for variables 0..=LENGTH and verify it.
    Extract {
        #[command(flatten)]
        source: FamilySource,
        /// Largest extracted variable (the prefix has LENGTH + 1 values).
        #[arg(long)]
        length: u64,
        /// Extraction mode.
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Tape bits enumerated in exact mode.
        #[arg(long, default_value_t = 24)]
        depth: u64,
        /// Independent runs voted in monte-carlo mode.
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
        /// Stages allowed past LENGTH for the freeze certificate in
        /// certified mode.
        #[arg(long, default_value_t = 2000)]
        max_extra: u64,
        /// Random-tape seed (monte-carlo replica i uses seed + i).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a word (1d) or block (2d) avoiding every forbidden pattern at
    /// or above the derived size threshold.
    Avoid {
        /// Dimension of the forbidden family.
        #[arg(long, value_enum)]
        family: Dim,
        /// Built-in set name or description file. 1d built-ins: zero-runs,
        /// periodic; 2d: zero-rects. Defaults to zero-runs / zero-rects.
        #[arg(long)]
        set: Option<String>,
        /// Word length (1d only).
        #[arg(long)]
        length: Option<u64>,
        /// Block radius: the output square has side 2*RADIUS+1 (2d only).
        #[arg(long)]
        radius: Option<u64>,
        /// Extraction mode (1d only; 2d always runs staged).
        #[arg(long, value_enum, default_value_t = ModeArg::Certified)]
        mode: ModeArg,
        /// Tape bits enumerated in exact mode.
        #[arg(long, default_value_t = 24)]
        depth: u64,
        /// Independent runs voted in monte-carlo mode.
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
        /// Stages allowed past the word end in certified mode.
        #[arg(long, default_value_t = 2000)]
        max_extra: u64,
        /// Random-tape seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seeded resample statistics as CSV: per-event means against the
    /// x/(1-x) bound, stage lengths, and stabilization checks.
    Stats {
        /// Instance file.
        #[arg(long)]
        instance: PathBuf,
        /// Number of independent runs; run i uses seed SEED_BASE + i.
        #[arg(long, default_value_t = 200)]
        runs: u64,
        /// Base seed for the per-run derivation.
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        /// Per-run resample budget.
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
    },
}

/// Where stages/extract get their effective instance from.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct FamilySource {
    /// Finite instance file, staged through its priority ordering.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// One-dimensional forbidden-word family: a built-in name (zero-runs,
    /// periodic) or a word-list file.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Enumerate all tapes of --depth bits; certified masses.
    Exact,
    /// Vote among --replicas seeded runs; empirical only.
    Mc,
    /// One staged run until a freeze certificate closes; certified.
    Certified,
}

impl ModeArg {
    fn to_mode(self, depth: u64, replicas: u64, max_extra: u64) -> ExtractionMode {
        match self {
            ModeArg::Exact => ExtractionMode::exact(depth),
            ModeArg::Mc => ExtractionMode::monte_carlo(replicas),
            ModeArg::Certified => ExtractionMode::certified(max_extra),
        }
    }

    fn describe(self, depth: u64, replicas: u64, max_extra: u64) -> String {
        match self {
            ModeArg::Exact => format!("exact (depth = {depth})"),
            ModeArg::Mc => {
                format!("monte-carlo (replicas = {replicas}, margin = 1/20, stab-eps = 1/10)")
            }
            ModeArg::Certified => format!("certified (max-extra = {max_extra})"),
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Dim {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

/// Failure with the exit code the contract assigns to it.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 64,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: 70,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<MtError> for CliError {
    fn from(e: MtError) -> Self {
        match e {
            MtError::Core(c) => c.into(),
            MtError::ConditionFailed(report) => {
                let mut message = String::from("condition check failed:\n");
                for row in report.failing() {
                    message.push_str(&format!(
                        "  event {}: lhs {} > rhs {}\n",
                        row.event,
                        format_rational(&row.lhs),
                        format_rational(&row.rhs)
                    ));
                }
                CliError {
                    code: 1,
                    message: message.trim_end().to_string(),
                }
            }
            MtError::BudgetExhausted(log) => CliError {
                code: 2,
                message: format!("budget exhausted after {} resamples", log.records.len()),
            },
            MtError::LogParse { .. } | MtError::Invalid(_) => CliError::usage(e.to_string()),
            other => CliError::internal(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Core(c) => c.into(),
            EngineError::Mt(m) => m.into(),
            EngineError::StageBudgetExhausted { stage, budget } => CliError {
                code: 2,
                message: format!("stage {stage} exhausted its budget of {budget} resamples"),
            },
            EngineError::CertificateNotClosed { stages_run } => CliError {
                code: 2,
                message: format!(
                    "freeze certificate did not close within {stages_run} stages; raise --max-extra"
                ),
            },
            EngineError::ThresholdFailure { position, achieved } => {
                let mut message =
                    format!("extraction failed at position {position}: no value passed the threshold\n");
                for (value, mass) in &achieved {
                    message.push_str(&format!(
                        "  value {value}: achieved {}\n",
                        format_rational(mass)
                    ));
                }
                CliError {
                    code: 3,
                    message: message.trim_end().to_string(),
                }
            }
            EngineError::Inconsistent(msg) => CliError::internal(msg),
            other => CliError::usage(other.to_string()),
        }
    }
}

impl From<AppError> for CliError {
    fn from(e: AppError) -> Self {
        match e {
            AppError::Core(c) => c.into(),
            AppError::Engine(en) => en.into(),
            AppError::Invalid(msg) if msg.starts_with("internal error") => {
                CliError::internal(msg)
            }
            other => CliError::usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

/// Restore the default SIGPIPE disposition so a closed pipe (for example
/// `lll stats ... | head`) terminates the process quietly instead of
/// panicking inside println.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(64);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Check { file, no_slack } => cmd_check(&file, no_slack),
        Command::Solve {
            file,
            seed,
            max_steps,
            log,
        } => cmd_solve(&file, seed, max_steps, log.as_deref()),
        Command::Stages { source, upto, seed } => cmd_stages(&source, upto, seed),
        Command::Extract {
            source,
            length,
            mode,
            depth,
            replicas,
            max_extra,
            seed,
        } => cmd_extract(&source, length, mode, depth, replicas, max_extra, seed),
        Command::Avoid {
            family,
            set,
            length,
            radius,
            mode,
            depth,
            replicas,
            max_extra,
            seed,
        } => cmd_avoid(family, set, length, radius, mode, depth, replicas, max_extra, seed),
        Command::Stats {
            instance,
            runs,
            seed_base,
            max_steps,
        } => cmd_stats(&instance, runs, seed_base, max_steps),
    }
}

fn read_instance(path: &Path) -> Result<FiniteInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(parse_instance(&text)?)
}

/// An effective instance loaded from either source flag.
enum Loaded {
    Finite(Box<FiniteAsEffective>),
    Words(Box<SubstringFamily>),
}

impl Loaded {
    fn as_dyn(&self) -> &dyn EffectiveInstance {
        match self {
            Loaded::Finite(f) => f.as_ref(),
            Loaded::Words(w) => w.as_ref(),
        }
    }
}

fn load_family(source: &FamilySource) -> Result<(Loaded, String), CliError> {
    if let Some(path) = &source.instance {
        let instance = read_instance(path)?;
        return Ok((
            Loaded::Finite(Box::new(FiniteAsEffective::new(instance))),
            format!("instance = {}", path.display()),
        ));
    }
    let spec = source
        .family
        .as_deref()
        .expect("clap enforces exactly one source");
    let set = load_word_set(spec)?;
    let describe = format!("family = words ({})", set.describe());
    let family = substring_cnf(set, &Rational::new(1.into(), 10.into()))?;
    Ok((Loaded::Words(Box::new(family)), describe))
}

fn load_word_set(spec: &str) -> Result<Arc<dyn applications::WordSet>, CliError> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        Ok(parse_word_set(&text)?)
    } else {
        Ok(builtin_word_set(spec)?)
    }
}

fn values_line(values: &[Value]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn compact_word(values: &[Value]) -> String {
    values.iter().map(|v| v.to_string()).collect()
}

fn cmd_check(file: &Path, no_slack: bool) -> Result<ExitCode, CliError> {
    let instance = read_instance(file)?;
    let graph = build_dependency_graph(&instance);
    let report = check_lll(&instance, &graph, !no_slack)?;
    println!("# instance = {}", file.display());
    if no_slack {
        println!("# slack = ignored (bare condition, --no-slack)");
    } else {
        println!(
            "# slack = applied (epsilon = {})",
            format_rational(&instance.epsilon)
        );
    }
    println!("# columns: event lhs rhs slack verdict");
    for row in &report.rows {
        println!(
            "event {} lhs {} rhs {} slack {} {}",
            row.event,
            format_rational(&row.lhs),
            format_rational(&row.rhs),
            format_rational(&row.slack),
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    let passing = report.rows.iter().filter(|r| r.pass).count();
    println!(
        "overall {} ({passing}/{} events)",
        if report.pass { "pass" } else { "FAIL" },
        report.rows.len()
    );
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_solve(
    file: &Path,
    seed: u64,
    max_steps: u64,
    log_path: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let instance = read_instance(file)?;
    let ordering = priority_ordering(&instance);
    let mut tape = RandomTape::new(seed);
    let (assignment, log) = solve_finite(&instance, &ordering, &mut tape, max_steps)?;
    println!("# instance = {}", file.display());
    println!("# seed = {seed} (default 0)");
    println!("# max-steps = {max_steps} (default 100000)");
    match log_path {
        Some(path) => println!("# log = {}", path.display()),
        None => println!("# log = none (pass --log FILE to keep it)"),
    }
    let values: Vec<Value> = (0..instance.variables.len() as VarId)
        .map(|v| assignment.get(v).expect("solved assignments are total"))
        .collect();
    println!("assignment {}", values_line(&values));
    println!("resamples {}", log.records.len());
    println!("bits {}", log.initial_bits + log.resample_bits());
    if let Some(path) = log_path {
        std::fs::write(path, log.export())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stages(source: &FamilySource, upto: u64, seed: u64) -> Result<ExitCode, CliError> {
    let (loaded, describe) = load_family(source)?;
    println!("# {describe}");
    println!("# upto = {upto}");
    println!("# seed = {seed} (default 0)");
    println!("# columns: prefix <stage> <values 0..=stage>");
    let (_runner, snapshots) = run_stages(loaded.as_dyn(), RandomTape::new(seed), upto)?;
    for snapshot in &snapshots {
        println!("prefix {} {}", snapshot.stage, values_line(&snapshot.values));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_extract(
    source: &FamilySource,
    length: u64,
    mode: ModeArg,
    depth: u64,
    replicas: u64,
    max_extra: u64,
    seed: u64,
) -> Result<ExitCode, CliError> {
    let (loaded, describe) = load_family(source)?;
    println!("# {describe}");
    println!("# length = {length} (variables 0..={length})");
    println!("# mode = {}", mode.describe(depth, replicas, max_extra));
    println!("# seed = {seed} (default 0; monte-carlo replica i uses seed + i)");
    let extraction = mode.to_mode(depth, replicas, max_extra);
    let prefix = extract_computable_prefix(loaded.as_dyn(), length, &extraction, seed)?;
    println!("prefix {}", values_line(&prefix.values));
    println!("mode {}", prefix.mode);
    println!("confidence {}", format_rational(&prefix.confidence));
    let report = verify_prefix(loaded.as_dyn(), &prefix.values);
    println!(
        "verify checked {} violations {}",
        report.events_checked,
        report.violations.len()
    );
    if !report.pass() {
        return Err(CliError::internal(format!(
            "extracted prefix violates events {:?}",
            report.violations
        )));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_avoid(
    family: Dim,
    set: Option<String>,
    length: Option<u64>,
    radius: Option<u64>,
    mode: ModeArg,
    depth: u64,
    replicas: u64,
    max_extra: u64,
    seed: u64,
) -> Result<ExitCode, CliError> {
    match family {
        Dim::OneD => {
            let length = length
                .ok_or_else(|| CliError::usage("--length is required with --family 1d"))?;
            if radius.is_some() {
                return Err(CliError::usage("--radius only applies to --family 2d"));
            }
            let spec = set.as_deref().unwrap_or("zero-runs");
            let words = load_word_set(spec)?;
            println!("# family = 1d");
            println!("# set = {} (default zero-runs)", words.describe());
            println!("# length = {length}");
            println!("# mode = {}", mode.describe(depth, replicas, max_extra));
            println!("# seed = {seed} (default 0)");
            let extraction = mode.to_mode(depth, replicas, max_extra);
            let outcome = avoid_substrings(words, length, &extraction, seed)?;
            println!("word {}", compact_word(&outcome.word));
            println!("threshold {}", outcome.threshold);
            println!("mode {}", outcome.mode);
            println!("confidence {}", format_rational(&outcome.confidence));
        }
        Dim::TwoD => {
            let radius = radius
                .ok_or_else(|| CliError::usage("--radius is required with --family 2d"))?;
            if length.is_some() {
                return Err(CliError::usage("--length only applies to --family 1d"));
            }
            let spec = set.as_deref().unwrap_or("zero-rects");
            let patterns = if Path::new(spec).is_file() {
                let text = std::fs::read_to_string(spec)?;
                parse_pattern_set_2d(&text)?
            } else {
                builtin_pattern_set(spec)?
            };
            println!("# family = 2d");
            println!("# set = {} (default zero-rects)", patterns.describe());
            println!("# radius = {radius} (side = {})", 2 * radius + 1);
            println!("# mode = staged (2d always runs the staged engine)");
            println!("# seed = {seed} (default 0)");
            let outcome = avoid_patterns_2d(patterns, radius, seed)?;
            println!("block {0}x{0}", 2 * radius + 1);
            for row in &outcome.block {
                println!("{}", compact_word(row));
            }
            println!("threshold {}", outcome.threshold);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Step at which the variable last changed value, or 0 when it never did.
fn last_change_step(instance: &FiniteInstance, log: &ExecutionLog, var: VarId) -> u64 {
    let mut last = 0;
    for record in &log.records {
        let event = instance
            .event(record.event)
            .expect("log events exist in the instance");
        if let Some(idx) = event.vars.iter().position(|&v| v == var) {
            if record.values_before[idx] != record.values_after[idx] {
                last = record.step;
            }
        }
    }
    last
}

fn cmd_stats(
    instance_path: &Path,
    runs: u64,
    seed_base: u64,
    max_steps: u64,
) -> Result<ExitCode, CliError> {
    if runs == 0 {
        return Err(CliError::usage("--runs must be positive"));
    }
    let instance = read_instance(instance_path)?;
    let ordering = priority_ordering(&instance);
    let mut logs = Vec::with_capacity(runs as usize);
    for i in 0..runs {
        let mut tape = RandomTape::new(seed_base + i);
        let (_, log) = solve_finite(&instance, &ordering, &mut tape, max_steps)?;
        logs.push(log);
    }

    println!("# instance = {}", instance_path.display());
    println!("# runs = {runs} (default 200); run i uses seed {seed_base} + i (seed-base default 0)");
    println!("# max-steps = {max_steps} (default 100000)");
    println!("# resamples: per-event empirical mean vs the x/(1-x) bound; pass means mean <= bound + half_width99");
    println!("# stages: mean resamples spent inside each stage of the staged engine, same seeds");
    println!("# stabilization: computed step bound for each tracked variable at the instance slack, and the fraction of runs whose variable changed after that step");
    println!("section,key,metric,value");

    let stats = resample_stats(&instance, &logs).map_err(CliError::from)?;
    for row in &stats {
        let x = instance
            .weights
            .get(&row.event)
            .expect("every event carries a weight");
        let bound = theoretical_bound(x);
        let bound_f = rational_to_f64(&bound);
        println!("resamples,event:{},mean,{:.6}", row.event, row.mean);
        println!(
            "resamples,event:{},half_width99,{:.6}",
            row.event, row.half_width
        );
        println!(
            "resamples,event:{},bound,{}",
            row.event,
            format_rational(&bound)
        );
        println!(
            "resamples,event:{},pass,{}",
            row.event,
            row.mean <= bound_f + row.half_width
        );
    }

    let effective = FiniteAsEffective::new(instance.clone());
    let max_var = instance.variables.len() as VarId - 1;
    let mut stage_totals = vec![0u64; instance.variables.len()];
    for i in 0..runs {
        let (_, snapshots) = run_stages(&effective, RandomTape::new(seed_base + i), max_var)?;
        let mut previous = 0;
        for snapshot in &snapshots {
            stage_totals[snapshot.stage as usize] += snapshot.steps_elapsed - previous;
            previous = snapshot.steps_elapsed;
        }
    }
    for (stage, total) in stage_totals.iter().enumerate() {
        println!(
            "stages,stage:{stage},mean_length,{:.6}",
            *total as f64 / runs as f64
        );
    }

    if instance.epsilon.is_zero() {
        println!("stabilization,all,skipped,zero-slack-instance");
    } else {
        let tracked = max_var.min(3);
        for var in 0..=tracked {
            let bound = stabilization_bound(&effective, var, &instance.epsilon)?;
            let late = logs
                .iter()
                .filter(|log| last_change_step(&instance, log, var) > bound.steps)
                .count();
            println!("stabilization,var:{var},bound_steps,{}", bound.steps);
            println!(
                "stabilization,var:{var},change_after_freq,{:.6}",
                late as f64 / runs as f64
            );
            println!(
                "stabilization,var:{var},target,{}",
                format_rational(&instance.epsilon)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("report rationals fit in f64")
}
