//! Cross-module integration: rolling traces over synthetic series with
//! known generators, and estimator symmetry checks.

use mfdfa_core::mfdfa::{log_spaced_scales, MfdfaConfig};
use mfdfa_core::rolling::{rolling_spectrum, RollingConfig};
use mfdfa_core::timeseries::ReturnSeries;
use mfdfa_core::{analyze, fit_spectrum, synth};

fn hourly_mfdfa_config(window_samples: usize) -> MfdfaConfig {
    let scales = log_spaced_scales(16, window_samples / 4, 20).unwrap();
    let q_grid: Vec<f64> = (0..21).map(|k| -10.0 + k as f64).collect();
    MfdfaConfig::new(3, scales, q_grid, 1e-30).unwrap()
}

#[test]
fn gaussian_rolling_trace_stays_in_band() {
    // Three years of daily i.i.d. Gaussian returns: every windowed h(2)
    // stays in [0.40, 0.60] and the trace shows no drift. A 365-sample
    // window estimates h(2) with a standard error near 0.05, so the
    // per-window band is checked on a fixed seed.
    let series = synth::gen_gaussian(3 * 365, 2012).unwrap();
    let cfg = RollingConfig {
        window_secs: 365 * 86_400,
        step_secs: 86_400,
        min_coverage: 0.9,
    };
    let mf = MfdfaConfig {
        poly_order: 3,
        scales: log_spaced_scales(16, 365 / 4, 15).unwrap(),
        q_grid: vec![-2.0, 0.0, 2.0],
        variance_floor: 1e-30,
    };
    let trace = rolling_spectrum(&series, &cfg, &mf).unwrap();
    assert_eq!(trace.len(), 2 * 365 + 1);
    assert!(trace.skipped.is_empty());

    let h2: Vec<f64> = trace.h2.iter().map(|v| v.unwrap()).collect();
    for (i, &h) in h2.iter().enumerate() {
        assert!((0.40..=0.60).contains(&h), "window {i}: h(2) = {h}");
    }
    // No trend: first- and second-half means agree to well within the band.
    let half = h2.len() / 2;
    let m1 = h2[..half].iter().sum::<f64>() / half as f64;
    let m2 = h2[half..].iter().sum::<f64>() / (h2.len() - half) as f64;
    assert!((m1 - m2).abs() < 0.05, "drift: {m1:.3} vs {m2:.3}");
}

#[test]
fn regime_change_shows_in_rolling_trace() {
    // One year of anti-persistent noise (H = 0.3), one persistent year
    // (H = 0.7), one anti-persistent year again, sampled hourly. The
    // windowed h(2) must rise and fall with the regimes, and the extreme
    // windows must sit close to their generating H.
    let year = 365 * 24;
    let seed = 7;
    let low1 = synth::gen_fgn(year, 0.3, seed).unwrap();
    let high = synth::gen_fgn(year, 0.7, seed + 1).unwrap();
    let low2 = synth::gen_fgn(year, 0.3, seed + 2).unwrap();
    let mut returns = Vec::with_capacity(3 * year);
    returns.extend_from_slice(&low1.returns);
    returns.extend_from_slice(&high.returns);
    returns.extend_from_slice(&low2.returns);
    let series = ReturnSeries::from_values(0, 3600, returns, "regime concat".into());

    let cfg = RollingConfig {
        window_secs: 365 * 86_400,
        step_secs: 7 * 86_400,
        min_coverage: 0.9,
    };
    let trace = rolling_spectrum(&series, &cfg, &hourly_mfdfa_config(year)).unwrap();
    assert!(trace.skipped.is_empty());
    let h2: Vec<f64> = trace.h2.iter().map(|v| v.unwrap()).collect();

    // Pure windows: the first window sits inside regime 1, the window
    // ending at the second regime boundary covers regime 2 exactly, the
    // last window covers regime 3.
    let first = h2[0];
    let peak = h2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let last = *h2.last().unwrap();
    assert!((first - 0.3).abs() <= 0.08, "first window h(2) = {first}");
    assert!((peak - 0.7).abs() <= 0.08, "peak h(2) = {peak}");
    assert!((last - 0.3).abs() <= 0.08, "last window h(2) = {last}");

    // Rise-then-fall shape: the peak lies strictly between the ends.
    let peak_idx = h2
        .iter()
        .position(|&h| h == peak)
        .expect("peak exists");
    assert!(peak_idx > 0 && peak_idx < h2.len() - 1);
    assert!(peak > first + 0.2 && peak > last + 0.2);
}

#[test]
fn time_reversal_moves_h_less_than_its_stderr() {
    // Reversing a stationary series changes only which end contributes the
    // leftover segments; the fitted slopes must move by less than their
    // own uncertainty.
    for seed in [3, 17, 90] {
        let series = synth::gen_fgn(4096, 0.6, seed).unwrap();
        let reversed = ReturnSeries::from_values(
            series.start,
            series.dt,
            series.returns.iter().rev().copied().collect(),
            "reversed".into(),
        );
        let cfg = hourly_mfdfa_config(4096);
        let fwd = fit_spectrum(&analyze(&series, &cfg).unwrap().surface).unwrap();
        let rev = fit_spectrum(&analyze(&reversed, &cfg).unwrap().surface).unwrap();
        for i in 0..fwd.q_grid.len() {
            let diff = (fwd.h[i] - rev.h[i]).abs();
            let tol = fwd.stderr[i].max(rev.stderr[i]);
            assert!(
                diff < tol,
                "seed {seed} q {}: |Δh| = {diff:.2e} vs stderr {tol:.2e}",
                fwd.q_grid[i]
            );
        }
    }
}

#[test]
fn white_noise_spectrum_is_flat_near_half() {
    for seed in [1, 2] {
        let series = synth::gen_gaussian(16384, seed).unwrap();
        let cfg = MfdfaConfig::default_for_length(series.len()).unwrap();
        let spec = fit_spectrum(&analyze(&series, &cfg).unwrap().surface).unwrap();
        let h2 = spec.h2().unwrap();
        assert!((0.45..=0.55).contains(&h2), "seed {seed}: h(2) = {h2}");
    }
}
