//! Scalar summaries of a trace.

use ffr_inertia::Trace;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScenarioError};

/// Window after onset over which the initial RoCoF is averaged, seconds.
pub const INITIAL_WINDOW: f64 = 0.1;
/// Trailing fraction of the run averaged for the steady state.
pub const STEADY_FRACTION: f64 = 0.1;
/// `|dω/dt|` below which the final sample counts as settled, p.u./s.
pub const SETTLED_ROCOF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    /// Mean RoCoF over the first 100 ms after onset, p.u./s.
    pub initial_rocof: f64,
    /// Minimum post-onset frequency deviation, p.u.
    pub nadir: f64,
    pub nadir_time: f64,
    /// Mean deviation over the final 10 % of the run, p.u.
    pub steady_state_omega: f64,
    pub settled: bool,
}

impl SummaryMetrics {
    /// Computed from sample times and series only, so a trace read back from
    /// CSV yields the same metrics as the original.
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        let post = trace.post_onset();
        if post.is_empty() {
            return Err(ScenarioError::invalid(
                "trace",
                "no samples at or after the imbalance onset",
            ));
        }
        let t = &trace.sample_times;
        let omega = &trace.omega;
        let on = post.start;
        let last = trace.len() - 1;

        let window_end = post
            .clone()
            .find(|&k| t[k] - t[on] >= INITIAL_WINDOW * (1.0 - 1e-9))
            .unwrap_or(last);
        let initial_rocof = if window_end > on {
            (omega[window_end] - omega[on]) / (t[window_end] - t[on])
        } else {
            trace.rocof[on]
        };

        let (nadir_index, nadir) = post
            .clone()
            .map(|k| (k, omega[k]))
            .fold((on, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });

        let span = t[last] - t[0];
        let from = t[last] - STEADY_FRACTION * span * (1.0 + 1e-9);
        let tail: Vec<f64> = (0..=last).filter(|&k| t[k] >= from).map(|k| omega[k]).collect();
        let steady_state_omega = tail.iter().sum::<f64>() / tail.len() as f64;

        Ok(Self {
            initial_rocof,
            nadir,
            nadir_time: t[nadir_index],
            steady_state_omega,
            settled: trace.rocof[last].abs() < SETTLED_ROCOF,
        })
    }
}
