//! Rolling-window evaluation: the time evolution of h(2), Δh and (via
//! [`crate::liquidity`]) ILLIQ.
//!
//! Windows are labelled by their END time — the date the estimate refers
//! to — so a trace aligns naturally with a lookback measure ending on the
//! same day. Windows run in parallel and are assembled in timestamp order,
//! making the trace independent of the worker-thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mfdfa::{self, MfdfaConfig};
use crate::spectrum;
use crate::timeseries::ReturnSeries;

pub const DEFAULT_WINDOW_SECS: u64 = 365 * 86_400;
pub const DEFAULT_STEP_SECS: u64 = 86_400;
pub const DEFAULT_MIN_COVERAGE: f64 = 0.9;

/// Window geometry for a rolling run. Both durations must be whole
/// multiples of the series' sampling period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingConfig {
    pub window_secs: u64,
    pub step_secs: u64,
    /// Minimum fraction of non-gap-filled samples a window must contain.
    pub min_coverage: f64,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            window_secs: DEFAULT_WINDOW_SECS,
            step_secs: DEFAULT_STEP_SECS,
            min_coverage: DEFAULT_MIN_COVERAGE,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_secs == 0 || self.step_secs == 0 {
            return Err(Error::config("window and step must be positive"));
        }
        if self.step_secs > self.window_secs {
            return Err(Error::config("step must not exceed the window"));
        }
        if self.min_coverage <= 0.0 || self.min_coverage > 1.0 || self.min_coverage.is_nan() {
            return Err(Error::config("min_coverage must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Time-indexed estimates, one slot per window end; `None` marks a window
/// that was skipped (reason recorded in `skipped`).
#[derive(Debug, Clone, PartialEq)]
pub struct RollingTrace {
    pub timestamps: Vec<i64>,
    pub h2: Vec<Option<f64>>,
    pub delta_h: Vec<Option<f64>>,
    pub illiq: Vec<Option<f64>>,
    pub skipped: Vec<(i64, String)>,
}

impl RollingTrace {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Run the full MF-DFA pipeline over every window of `returns`.
///
/// `mf.q_grid` must contain q = 2 (the trace's h(2) point). Windows that
/// fail the coverage threshold or an MF-DFA precondition are skipped with
/// a reason rather than failing the run.
pub fn rolling_spectrum(
    returns: &ReturnSeries,
    cfg: &RollingConfig,
    mf: &MfdfaConfig,
) -> Result<RollingTrace> {
    cfg.validate()?;
    mf.validate()?;
    if !mf.q_grid.iter().any(|&q| (q - 2.0).abs() <= 1e-9) {
        return Err(Error::config("rolling trace needs q = 2 on the q grid"));
    }
    let dt = returns.dt;
    if dt == 0 {
        return Err(Error::config("return series has zero sampling period"));
    }
    if !cfg.window_secs.is_multiple_of(dt) || !cfg.step_secs.is_multiple_of(dt) {
        return Err(Error::config(format!(
            "window ({}s) and step ({}s) must be whole multiples of dt = {dt}s",
            cfg.window_secs, cfg.step_secs
        )));
    }
    let window = (cfg.window_secs / dt) as usize;
    let step = (cfg.step_secs / dt) as usize;
    if window < 2 {
        return Err(Error::config("window shorter than two samples"));
    }
    let n = returns.len();
    if n < window {
        return Err(Error::data(format!(
            "series of {n} samples is shorter than one {window}-sample window"
        )));
    }

    let n_windows = (n - window) / step + 1;
    type WindowOutcome = (i64, std::result::Result<(f64, f64), String>);
    let results: Vec<WindowOutcome> = (0..n_windows)
        .into_par_iter()
        .map(|k| {
            let lo = k * step;
            let hi = lo + window;
            let end_ts = returns.start + (hi as i64 - 1) * dt as i64;

            let fill_count = returns.filled[lo..hi].iter().filter(|&&f| f).count();
            let coverage = 1.0 - fill_count as f64 / window as f64;
            if coverage < cfg.min_coverage {
                return (
                    end_ts,
                    Err(format!(
                        "coverage {coverage:.3} below minimum {:.3}",
                        cfg.min_coverage
                    )),
                );
            }

            let slice = ReturnSeries {
                start: returns.start + lo as i64 * dt as i64,
                dt,
                returns: returns.returns[lo..hi].to_vec(),
                filled: returns.filled[lo..hi].to_vec(),
                source_meta: String::new(),
            };
            let out = mfdfa::analyze(&slice, mf)
                .and_then(|run| spectrum::fit_spectrum(&run.surface))
                .map(|spec| {
                    let h2 = spec.h2().expect("q = 2 checked on entry");
                    (h2, spec.delta_h)
                })
                .map_err(|e| e.to_string());
            (end_ts, out)
        })
        .collect();

    let mut trace = RollingTrace {
        timestamps: Vec::with_capacity(n_windows),
        h2: Vec::with_capacity(n_windows),
        delta_h: Vec::with_capacity(n_windows),
        illiq: vec![None; n_windows],
        skipped: Vec::new(),
    };
    for (ts, outcome) in results {
        trace.timestamps.push(ts);
        match outcome {
            Ok((h2, dh)) => {
                trace.h2.push(Some(h2));
                trace.delta_h.push(Some(dh));
            }
            Err(reason) => {
                trace.h2.push(None);
                trace.delta_h.push(None);
                trace.skipped.push((ts, reason));
            }
        }
    }
    Ok(trace)
}

/// One row of an aligned table: the traces' values at a shared timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTable {
    pub timestamps: Vec<i64>,
    /// Column label and values, one entry per retained timestamp.
    pub columns: Vec<(String, Vec<f64>)>,
    /// Timestamps seen in any input but not retained.
    pub dropped: usize,
}

/// Inner-join traces on their timestamps.
///
/// Each trace contributes its h2 and delta_h columns (and illiq, when it
/// carries any); a row survives only if every contributed column has a
/// value there. Traces must share the same step.
pub fn align_traces(traces: &[RollingTrace]) -> Result<AlignedTable> {
    if traces.is_empty() {
        return Err(Error::config("align: no traces supplied"));
    }
    let mut step: Option<i64> = None;
    for t in traces {
        if t.timestamps.len() >= 2 {
            let s = t.timestamps[1] - t.timestamps[0];
            match step {
                None => step = Some(s),
                Some(prev) if prev != s => {
                    return Err(Error::config(format!(
                        "align: mismatched steps {prev}s vs {s}s"
                    )))
                }
                _ => {}
            }
        }
    }

    // Candidate rows: timestamps present in every trace.
    let mut shared: Vec<i64> = traces[0].timestamps.clone();
    for t in &traces[1..] {
        let set: std::collections::HashSet<i64> = t.timestamps.iter().copied().collect();
        shared.retain(|ts| set.contains(ts));
    }

    let mut union: std::collections::HashSet<i64> = std::collections::HashSet::new();
    for t in traces {
        union.extend(t.timestamps.iter().copied());
    }

    struct Contributed<'a> {
        label: String,
        trace: &'a RollingTrace,
        kind: usize, // 0 = h2, 1 = delta_h, 2 = illiq
    }
    let mut cols: Vec<Contributed> = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        cols.push(Contributed {
            label: format!("h2_{i}"),
            trace: t,
            kind: 0,
        });
        cols.push(Contributed {
            label: format!("delta_h_{i}"),
            trace: t,
            kind: 1,
        });
        if t.illiq.iter().any(|v| v.is_some()) {
            cols.push(Contributed {
                label: format!("illiq_{i}"),
                trace: t,
                kind: 2,
            });
        }
    }

    let value_at = |c: &Contributed, ts: i64| -> Option<f64> {
        let idx = c.trace.timestamps.iter().position(|&t| t == ts)?;
        match c.kind {
            0 => c.trace.h2[idx],
            1 => c.trace.delta_h[idx],
            _ => c.trace.illiq[idx],
        }
    };

    let mut timestamps = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); cols.len()];
    for &ts in &shared {
        let row: Option<Vec<f64>> = cols.iter().map(|c| value_at(c, ts)).collect();
        if let Some(row) = row {
            timestamps.push(ts);
            for (slot, v) in values.iter_mut().zip(row) {
                slot.push(v);
            }
        }
    }

    if timestamps.is_empty() {
        log::warn!("align: no overlapping rows across {} traces", traces.len());
    }
    let dropped = union.len() - timestamps.len();
    Ok(AlignedTable {
        timestamps,
        columns: cols
            .into_iter()
            .map(|c| c.label)
            .zip(values)
            .collect(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn small_mfdfa_config(window: usize) -> MfdfaConfig {
        let scales = mfdfa::log_spaced_scales(8, window / 4, 10).unwrap();
        MfdfaConfig::new(1, scales, vec![-5.0, -2.0, 0.0, 2.0, 5.0], 1e-30).unwrap()
    }

    fn daily_cfg(window_days: u64, step_days: u64) -> RollingConfig {
        RollingConfig {
            window_secs: window_days * 86_400,
            step_secs: step_days * 86_400,
            min_coverage: 0.9,
        }
    }

    #[test]
    fn exactly_one_window_gives_one_point() {
        let series = synth::gen_gaussian(365, 5).unwrap();
        let trace =
            rolling_spectrum(&series, &daily_cfg(365, 1), &small_mfdfa_config(365)).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(trace.h2[0].is_some());
        // End label is the last sample's time.
        assert_eq!(trace.timestamps[0], series.start + 364 * 86_400);
    }

    #[test]
    fn shorter_than_window_is_fatal() {
        let series = synth::gen_gaussian(100, 5).unwrap();
        assert!(matches!(
            rolling_spectrum(&series, &daily_cfg(365, 1), &small_mfdfa_config(365)),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn window_value_matches_standalone_run() {
        let series = synth::gen_gaussian(500, 9).unwrap();
        let mf = small_mfdfa_config(365);
        let trace = rolling_spectrum(&series, &daily_cfg(365, 10), &mf).unwrap();

        // Recompute the third window by hand and compare bit-exactly.
        let k = 2;
        let lo = k * 10;
        let standalone = ReturnSeries::from_values(
            series.start + lo as i64 * 86_400,
            86_400,
            series.returns[lo..lo + 365].to_vec(),
            String::new(),
        );
        let run = mfdfa::analyze(&standalone, &mf).unwrap();
        let spec = spectrum::fit_spectrum(&run.surface).unwrap();
        assert_eq!(trace.h2[k], Some(spec.h2().unwrap()));
        assert_eq!(trace.delta_h[k], Some(spec.delta_h));
    }

    #[test]
    fn half_step_refinement_agrees_at_shared_timestamps() {
        let series = synth::gen_gaussian(450, 13).unwrap();
        let mf = small_mfdfa_config(365);
        let coarse = rolling_spectrum(&series, &daily_cfg(365, 4), &mf).unwrap();
        let fine = rolling_spectrum(&series, &daily_cfg(365, 2), &mf).unwrap();
        for (i, &ts) in coarse.timestamps.iter().enumerate() {
            let j = fine.timestamps.iter().position(|&t| t == ts).unwrap();
            assert_eq!(coarse.h2[i], fine.h2[j]);
            assert_eq!(coarse.delta_h[i], fine.delta_h[j]);
        }
    }

    #[test]
    fn low_coverage_windows_are_skipped_with_reason() {
        let mut series = synth::gen_gaussian(400, 21).unwrap();
        for i in 0..300 {
            series.filled[i] = true;
        }
        let trace =
            rolling_spectrum(&series, &daily_cfg(365, 5), &small_mfdfa_config(365)).unwrap();
        assert!(!trace.skipped.is_empty());
        assert!(trace.skipped[0].1.contains("coverage"));
        assert!(trace.h2[0].is_none());
    }

    #[test]
    fn misaligned_step_is_config_error() {
        let series = synth::gen_gaussian(400, 3).unwrap();
        let cfg = RollingConfig {
            window_secs: 365 * 86_400,
            step_secs: 86_400 / 2,
            min_coverage: 0.9,
        };
        assert!(matches!(
            rolling_spectrum(&series, &cfg, &small_mfdfa_config(365)),
            Err(Error::Config(_))
        ));
    }

    fn toy_trace(timestamps: Vec<i64>, h2: Vec<Option<f64>>) -> RollingTrace {
        let n = timestamps.len();
        RollingTrace {
            timestamps,
            delta_h: h2.clone(),
            h2,
            illiq: vec![None; n],
            skipped: vec![],
        }
    }

    #[test]
    fn align_identity_join_preserves_rows() {
        let a = toy_trace(vec![0, 10, 20], vec![Some(0.5), Some(0.6), Some(0.7)]);
        let b = toy_trace(vec![0, 10, 20], vec![Some(0.1), Some(0.2), Some(0.3)]);
        let table = align_traces(&[a, b]).unwrap();
        assert_eq!(table.timestamps, vec![0, 10, 20]);
        assert_eq!(table.columns.len(), 4);
        assert_eq!(table.dropped, 0);
    }

    #[test]
    fn align_disjoint_timestamps_is_empty() {
        let a = toy_trace(vec![0, 10], vec![Some(0.5), Some(0.6)]);
        let b = toy_trace(vec![5, 15], vec![Some(0.1), Some(0.2)]);
        let table = align_traces(&[a, b]).unwrap();
        assert!(table.timestamps.is_empty());
        assert_eq!(table.dropped, 4);
    }

    #[test]
    fn align_drops_rows_with_missing_values() {
        let a = toy_trace(
            vec![0, 10, 20, 30, 40],
            vec![Some(0.5), None, None, None, Some(0.9)],
        );
        let b = toy_trace(
            vec![0, 10, 20, 30, 40],
            vec![Some(0.1), Some(0.2), Some(0.3), Some(0.4), Some(0.5)],
        );
        let table = align_traces(&[a, b]).unwrap();
        assert_eq!(table.timestamps, vec![0, 40]);
        assert_eq!(table.dropped, 3);
    }

    #[test]
    fn align_mismatched_steps_is_fatal() {
        let a = toy_trace(vec![0, 10], vec![Some(0.5), Some(0.6)]);
        let b = toy_trace(vec![0, 20], vec![Some(0.1), Some(0.2)]);
        assert!(matches!(align_traces(&[a, b]), Err(Error::Config(_))));
    }
}
