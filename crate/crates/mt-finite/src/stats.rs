//! Empirical resample statistics across many seeded runs.

use lll_core::types::{EventId, FiniteInstance};
use lll_core::Rational;
use num_traits::One;

use crate::error::MtError;
use crate::log::ExecutionLog;

/// Two-sided 99% normal quantile (z with Phi(z) = 0.995).
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Per-event empirical resample summary. Counts are exact; the mean and
/// half-width are floating point for display only.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStats {
    pub event: EventId,
    /// Number of logs the event was averaged over.
    pub runs: u64,
    /// Total resamples of the event across all logs.
    pub total: u64,
    /// Mean resamples per run.
    pub mean: f64,
    /// 99% confidence half-width under the normal approximation
    /// (`Z99 * s / sqrt(runs)` with `s` the sample standard deviation).
    pub half_width: f64,
}

/// The theoretical expected-resample bound `x / (1 - x)`.
pub fn theoretical_bound(x: &Rational) -> Rational {
    x / (Rational::one() - x)
}

/// Mean resample count and confidence half-width per event of `instance`,
/// over logs from independent seeds. Events never resampled get a zero row.
pub fn resample_stats(
    instance: &FiniteInstance,
    logs: &[ExecutionLog],
) -> Result<Vec<EventStats>, MtError> {
    if logs.is_empty() {
        return Err(MtError::EmptyLogs);
    }
    let runs = logs.len() as u64;
    let mut out = Vec::with_capacity(instance.events.len());
    for event in &instance.events {
        let counts: Vec<u64> = logs.iter().map(|log| log.count_for(event.id)).collect();
        let total: u64 = counts.iter().sum();
        let mean = total as f64 / runs as f64;
        let half_width = if runs > 1 {
            let variance = counts
                .iter()
                .map(|&c| {
                    let d = c as f64 - mean;
                    d * d
                })
                .sum::<f64>()
                / (runs - 1) as f64;
            Z99 * (variance / runs as f64).sqrt()
        } else {
            0.0
        };
        out.push(EventStats {
            event: event.id,
            runs,
            total,
            mean,
            half_width,
        });
    }
    Ok(out)
}
