//! Multifractal detrended fluctuation analysis (MF-DFA).
//!
//! The analysis proceeds in four steps:
//!
//! 1. Build the profile `Y(i)`, the cumulative sum of mean-subtracted
//!    returns.
//! 2. Split the profile into `N_s = floor(N/s)` non-overlapping segments of
//!    length `s`. Because a remainder may be left at the end, the split is
//!    repeated from the far end of the profile, giving `2*N_s` segments in
//!    total.
//! 3. In every segment fit a least-squares polynomial of order `m` in the
//!    local index and take the mean squared residual `F²(ν, s)` as the
//!    detrended variance of that segment.
//! 4. Aggregate the segment variances into the q-th order fluctuation
//!    function `F_q(s) = ((1/2N_s) Σ_ν (F²(ν,s))^(q/2))^(1/q)`, with the
//!    logarithmic-average limit at `q = 0`.
//!
//! `F_q(s)` over a grid of scales is the [`FluctuationSurface`]; its
//! per-`q` log-log slopes (fitted in [`crate::spectrum`]) are the
//! generalized Hurst exponents `h(q)`.
//!
//! Two numerical guards keep the surface finite at the extreme moments
//! (`|q| = 25` is routine here): segment variances are floored at a
//! configurable `variance_floor` so a locally perfect fit cannot produce a
//! zero, and the q-th moments are accumulated in log space with a max
//! shift, since `(F²)^(q/2)` overflows `f64` long before `q` reaches 25.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::timeseries::ReturnSeries;

pub const DEFAULT_POLY_ORDER: usize = 3;
pub const DEFAULT_MIN_SCALE: usize = 16;
pub const DEFAULT_SCALE_COUNT: usize = 20;
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-30;
pub const DEFAULT_Q_MIN: f64 = -25.0;
pub const DEFAULT_Q_MAX: f64 = 25.0;
pub const DEFAULT_Q_STEP: f64 = 0.5;

/// Parameters of one MF-DFA run.
#[derive(Debug, Clone, PartialEq)]
pub struct MfdfaConfig {
    /// Detrending polynomial order `m >= 1`.
    pub poly_order: usize,
    /// Strictly increasing segment lengths; the smallest must be at least
    /// `poly_order + 2` so every fit is over-determined.
    pub scales: Vec<usize>,
    /// Moment orders; 0 is allowed and handled by the log-average limit.
    pub q_grid: Vec<f64>,
    /// Lower clamp for segment variances, must be positive.
    pub variance_floor: f64,
}

impl MfdfaConfig {
    pub fn new(
        poly_order: usize,
        scales: Vec<usize>,
        q_grid: Vec<f64>,
        variance_floor: f64,
    ) -> Result<Self> {
        let cfg = MfdfaConfig {
            poly_order,
            scales,
            q_grid,
            variance_floor,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cubic detrending, ~20 log-spaced scales in `[16, n/4]` and the
    /// standard q grid from -25 to 25 in steps of 0.5.
    pub fn default_for_length(n: usize) -> Result<Self> {
        let scales = log_spaced_scales(DEFAULT_MIN_SCALE, n / 4, DEFAULT_SCALE_COUNT)?;
        MfdfaConfig::new(
            DEFAULT_POLY_ORDER,
            scales,
            default_q_grid(),
            DEFAULT_VARIANCE_FLOOR,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.poly_order < 1 {
            return Err(Error::config("poly_order must be at least 1"));
        }
        if self.scales.is_empty() {
            return Err(Error::config("scale grid is empty"));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("scales must be strictly increasing"));
        }
        if self.scales[0] < self.poly_order + 2 {
            return Err(Error::config(format!(
                "smallest scale {} must be >= poly_order + 2 = {}",
                self.scales[0],
                self.poly_order + 2
            )));
        }
        if self.q_grid.is_empty() {
            return Err(Error::config("q grid is empty"));
        }
        if self.q_grid.iter().any(|q| !q.is_finite()) {
            return Err(Error::config("q grid contains a non-finite value"));
        }
        if self.variance_floor <= 0.0 || !self.variance_floor.is_finite() {
            return Err(Error::config("variance_floor must be positive and finite"));
        }
        Ok(())
    }
}

/// `-25, -24.5, ..., 25` — includes 0 exactly.
pub fn default_q_grid() -> Vec<f64> {
    let steps = ((DEFAULT_Q_MAX - DEFAULT_Q_MIN) / DEFAULT_Q_STEP).round() as usize;
    (0..=steps)
        .map(|k| DEFAULT_Q_MIN + k as f64 * DEFAULT_Q_STEP)
        .collect()
}

/// `count` logarithmically spaced integers in `[s_min, s_max]`, deduplicated.
pub fn log_spaced_scales(s_min: usize, s_max: usize, count: usize) -> Result<Vec<usize>> {
    if s_min < 2 || count == 0 {
        return Err(Error::config("scale grid needs s_min >= 2 and count >= 1"));
    }
    if s_max < s_min {
        return Err(Error::data(format!(
            "series too short for scale grid: s_max {s_max} < s_min {s_min}"
        )));
    }
    if count == 1 || s_max == s_min {
        return Ok(vec![s_min]);
    }
    let (lo, hi) = ((s_min as f64).ln(), (s_max as f64).ln());
    let mut scales: Vec<usize> = (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            (lo + t * (hi - lo)).exp().round() as usize
        })
        .collect();
    scales.dedup();
    Ok(scales)
}

/// The profile: cumulative sum of mean-subtracted returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub values: Vec<f64>,
    pub source_mean: f64,
}

pub fn build_profile(returns: &ReturnSeries) -> Result<Profile> {
    let r = &returns.returns;
    if r.len() < 2 {
        return Err(Error::data(format!(
            "profile needs at least 2 returns, got {}",
            r.len()
        )));
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::data("returns contain a non-finite value"));
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let mut acc = 0.0;
    let values = r
        .iter()
        .map(|&x| {
            acc += x - mean;
            acc
        })
        .collect();
    Ok(Profile {
        values,
        source_mean: mean,
    })
}

/// Segment index ranges at scale `s`: `floor(n/s)` forward segments from the
/// start, then the same number taken backwards from the end (so a remainder
/// shorter than `s` is never wasted on either side).
pub fn segment_ranges(n: usize, s: usize) -> Vec<std::ops::Range<usize>> {
    let n_s = n / s;
    let mut ranges = Vec::with_capacity(2 * n_s);
    for v in 0..n_s {
        ranges.push(v * s..(v + 1) * s);
    }
    for v in 1..=n_s {
        ranges.push(n - v * s..n - (v - 1) * s);
    }
    ranges
}

/// Least-squares polynomial fit over a fixed segment length.
///
/// The local index is centered and scaled to `[-1, 1]` before the design
/// matrix is built, and the solve goes through a thin QR decomposition;
/// both are needed to keep cubic fits well-conditioned on segments
/// thousands of points long. The factorization depends only on `(len,
/// order)`, so one fitter serves every segment of a scale.
pub struct PolyFitter {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    len: usize,
}

impl PolyFitter {
    pub fn new(len: usize, order: usize) -> Result<Self> {
        if len < order + 1 {
            return Err(Error::config(format!(
                "segment of length {len} cannot support an order-{order} fit"
            )));
        }
        let design = DMatrix::from_fn(len, order + 1, |i, j| {
            scaled_index(i, len).powi(j as i32)
        });
        let (q, r) = design.qr().unpack();
        Ok(PolyFitter { q, r, len })
    }

    /// Mean squared residual of the best order-`m` fit.
    pub fn residual_mean_square(&self, segment: &[f64]) -> f64 {
        debug_assert_eq!(segment.len(), self.len);
        let y = DVector::from_column_slice(segment);
        let coeffs_q = self.q.tr_mul(&y);
        let fitted = &self.q * &coeffs_q;
        let mut rss = 0.0;
        for i in 0..self.len {
            let d = segment[i] - fitted[i];
            rss += d * d;
        }
        rss / self.len as f64
    }

    /// Coefficients in the scaled basis, constant term first.
    pub fn coefficients(&self, segment: &[f64]) -> Result<Vec<f64>> {
        debug_assert_eq!(segment.len(), self.len);
        let y = DVector::from_column_slice(segment);
        let rhs = self.q.tr_mul(&y);
        let coeffs = self
            .r
            .solve_upper_triangular(&rhs)
            .ok_or_else(|| Error::data("degenerate polynomial fit basis"))?;
        Ok(coeffs.iter().copied().collect())
    }
}

/// Local index `i` of a length-`len` segment mapped to `[-1, 1]`.
fn scaled_index(i: usize, len: usize) -> f64 {
    if len <= 1 {
        0.0
    } else {
        (2.0 * i as f64 - (len - 1) as f64) / (len - 1) as f64
    }
}

/// A fitted local trend: coefficients (scaled basis, constant first) and
/// the fitted values at each local index.
#[derive(Debug, Clone)]
pub struct LocalPolyFit {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
}

impl LocalPolyFit {
    pub fn residuals(&self, segment: &[f64]) -> Vec<f64> {
        segment
            .iter()
            .zip(&self.fitted)
            .map(|(y, f)| y - f)
            .collect()
    }
}

/// Fit an order-`m` least-squares polynomial to one segment.
pub fn fit_local_polynomial(segment: &[f64], poly_order: usize) -> Result<LocalPolyFit> {
    let fitter = PolyFitter::new(segment.len(), poly_order)?;
    let coefficients = fitter.coefficients(segment)?;
    let fitted = (0..segment.len())
        .map(|i| {
            let x = scaled_index(i, segment.len());
            // Horner evaluation, highest order first.
            coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
        })
        .collect();
    Ok(LocalPolyFit {
        coefficients,
        fitted,
    })
}

/// Detrended segment variances `F²(ν, s)` at one scale: `2*floor(N/s)`
/// values, each floored at `variance_floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentVariances {
    pub scale: usize,
    pub values: Vec<f64>,
    pub n_floored: usize,
}

pub fn segment_variances(
    profile: &Profile,
    scale: usize,
    poly_order: usize,
    variance_floor: f64,
) -> Result<SegmentVariances> {
    if scale < poly_order + 2 {
        return Err(Error::config(format!(
            "scale {scale} below poly_order + 2 = {}",
            poly_order + 2
        )));
    }
    if variance_floor <= 0.0 || !variance_floor.is_finite() {
        return Err(Error::config("variance_floor must be positive"));
    }
    let n = profile.values.len();
    if n < 2 * scale {
        return Err(Error::data(format!(
            "scale {scale} rejected: profile length {n} < 2s"
        )));
    }

    let fitter = PolyFitter::new(scale, poly_order)?;
    let mut values = Vec::with_capacity(2 * (n / scale));
    let mut n_floored = 0usize;
    for range in segment_ranges(n, scale) {
        let f2 = fitter.residual_mean_square(&profile.values[range]);
        if f2 < variance_floor {
            values.push(variance_floor);
            n_floored += 1;
        } else {
            values.push(f2);
        }
    }
    Ok(SegmentVariances {
        scale,
        values,
        n_floored,
    })
}

/// `F_q(s)` over the full (q, scale) grid; every entry finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSurface {
    pub scales: Vec<usize>,
    pub q_grid: Vec<f64>,
    /// Indexed `values[q_index][scale_index]`.
    pub values: Vec<Vec<f64>>,
}

impl FluctuationSurface {
    pub fn at(&self, q_index: usize, scale_index: usize) -> f64 {
        self.values[q_index][scale_index]
    }
}

/// Aggregate per-scale segment variances into the q-th order fluctuation
/// function.
///
/// For `q != 0` the generalized mean is accumulated in log space with a max
/// shift; for `q = 0` the logarithmic average
/// `F_0(s) = exp((1/4N_s) Σ ln F²)` is used, which is the analytic limit of
/// the general formula and keeps the surface continuous across the grid.
pub fn fluctuation(seg_vars: &[SegmentVariances], q_grid: &[f64]) -> Result<FluctuationSurface> {
    if seg_vars.is_empty() {
        return Err(Error::data("no segment variances supplied"));
    }
    if seg_vars.windows(2).any(|w| w[1].scale <= w[0].scale) {
        return Err(Error::config("segment variances must come in increasing scale order"));
    }
    for sv in seg_vars {
        if sv.values.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::data(format!(
                "scale {}: zero or non-finite segment variance reached the fluctuation step",
                sv.scale
            )));
        }
    }
    if q_grid.is_empty() || q_grid.iter().any(|q| !q.is_finite()) {
        return Err(Error::config("q grid must be non-empty and finite"));
    }

    let log_f2: Vec<Vec<f64>> = seg_vars
        .iter()
        .map(|sv| sv.values.iter().map(|v| v.ln()).collect())
        .collect();

    let mut values = vec![vec![0.0; seg_vars.len()]; q_grid.len()];
    for (qi, &q) in q_grid.iter().enumerate() {
        for (si, logs) in log_f2.iter().enumerate() {
            let two_ns = logs.len() as f64;
            let ln_f = if q == 0.0 {
                // (1/(4 N_s)) Σ ln F² == half the mean of ln F².
                0.5 * logs.iter().sum::<f64>() / two_ns
            } else {
                let half_q = 0.5 * q;
                let shift = logs
                    .iter()
                    .map(|&l| half_q * l)
                    .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = logs.iter().map(|&l| (half_q * l - shift).exp()).sum();
                (shift + sum.ln() - two_ns.ln()) / q
            };
            values[qi][si] = ln_f.exp();
        }
    }

    Ok(FluctuationSurface {
        scales: seg_vars.iter().map(|sv| sv.scale).collect(),
        q_grid: q_grid.to_vec(),
        values,
    })
}

/// A scale dropped from the analysis, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleRejection {
    pub scale: usize,
    pub reason: String,
}

/// Full MF-DFA output: the surface plus per-run diagnostics.
#[derive(Debug, Clone)]
pub struct MfdfaAnalysis {
    pub surface: FluctuationSurface,
    pub rejected_scales: Vec<ScaleRejection>,
    /// Total segment variances clamped to the floor, summed over scales.
    pub n_floored: usize,
}

/// Run steps 1-4 on a return series.
///
/// Scales larger than `N/4` are dropped (with a diagnostic) rather than
/// failing the run: below four segments per direction the variance of the
/// generalized mean makes the point worthless. Per-scale work runs in
/// parallel; results are assembled in scale order, so the output does not
/// depend on the number of worker threads.
pub fn analyze(returns: &ReturnSeries, config: &MfdfaConfig) -> Result<MfdfaAnalysis> {
    config.validate()?;
    let profile = build_profile(returns)?;
    let n = profile.values.len();

    let mut usable = Vec::new();
    let mut rejected_scales = Vec::new();
    for &s in &config.scales {
        if s * 4 <= n {
            usable.push(s);
        } else {
            rejected_scales.push(ScaleRejection {
                scale: s,
                reason: format!("scale {s} exceeds N/4 for series length {n}"),
            });
        }
    }
    if usable.is_empty() {
        return Err(Error::data(format!(
            "no usable scales: series length {n} supports none of the configured grid"
        )));
    }

    let seg_vars: Vec<SegmentVariances> = usable
        .par_iter()
        .map(|&s| segment_variances(&profile, s, config.poly_order, config.variance_floor))
        .collect::<Result<_>>()?;

    let n_floored = seg_vars.iter().map(|sv| sv.n_floored).sum();
    let surface = fluctuation(&seg_vars, &config.q_grid)?;

    Ok(MfdfaAnalysis {
        surface,
        rejected_scales,
        n_floored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::ReturnSeries;

    fn series(values: Vec<f64>) -> ReturnSeries {
        ReturnSeries::from_values(0, 3600, values, "test".into())
    }

    #[test]
    fn profile_hand_sums() {
        let p = build_profile(&series(vec![1.0, -1.0])).unwrap();
        assert_eq!(p.values, vec![1.0, 0.0]);
        assert_eq!(p.source_mean, 0.0);

        let p = build_profile(&series(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(p.source_mean, 2.0);
        assert_eq!(p.values, vec![-1.0, -1.0, 0.0]);
    }

    #[test]
    fn profile_of_constant_series_is_zero() {
        for c in [0.4, -3.0, 1e6] {
            let p = build_profile(&series(vec![c; 5])).unwrap();
            assert!(p.values.iter().all(|&y| y.abs() < 1e-9));
        }
    }

    #[test]
    fn profile_needs_two_points() {
        assert!(build_profile(&series(vec![1.0])).is_err());
    }

    #[test]
    fn profile_ends_at_zero() {
        // The deviations from the mean sum to zero, so the last profile
        // value vanishes up to accumulated rounding.
        let values: Vec<f64> = (0..5000)
            .map(|i| 3.0 * ((i as f64) * 0.37).sin() + 0.1)
            .collect();
        let max_r = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = values.len();
        let p = build_profile(&series(values)).unwrap();
        assert!(p.values[n - 1].abs() <= 1e-9 * n as f64 * max_r);
    }

    #[test]
    fn segment_ranges_cover_both_ends() {
        // N = 10, s = 3: three forward segments over 0..9, three backward
        // over 1..10.
        let ranges = segment_ranges(10, 3);
        assert_eq!(ranges.len(), 6);
        assert_eq!(ranges[0], 0..3);
        assert_eq!(ranges[1], 3..6);
        assert_eq!(ranges[2], 6..9);
        assert_eq!(ranges[3], 7..10);
        assert_eq!(ranges[4], 4..7);
        assert_eq!(ranges[5], 1..4);
    }

    #[test]
    fn segment_count_is_twice_floor_n_over_s() {
        for n in [10usize, 64, 100, 1023] {
            for s in [3usize, 5, 16, 31] {
                assert_eq!(segment_ranges(n, s).len(), 2 * (n / s));
            }
        }
    }

    #[test]
    fn mean_detrending_hand_value() {
        // Y = [1,2,3,4], s = 2, m = 0: segment [1,2] has mean 1.5 and
        // mean squared residual 0.25.
        let profile = Profile {
            values: vec![1.0, 2.0, 3.0, 4.0],
            source_mean: 0.0,
        };
        let sv = segment_variances(&profile, 2, 0, 1e-30).unwrap();
        assert_eq!(sv.values.len(), 4);
        assert!((sv.values[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cubic_segment_is_annihilated_and_floored() {
        let n = 32;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64;
                0.5 + 1.5 * x - 0.02 * x * x + 0.001 * x * x * x
            })
            .collect();
        let profile = Profile {
            values,
            source_mean: 0.0,
        };
        // The fit annihilates the cubic; the residual noise sits at the
        // rounding level, far below this floor.
        let sv = segment_variances(&profile, 8, 3, 1e-12).unwrap();
        assert_eq!(sv.n_floored, sv.values.len());
        assert!(sv.values.iter().all(|&v| v == 1e-12));
    }

    #[test]
    fn scale_too_large_is_rejected() {
        let profile = Profile {
            values: vec![0.0; 10],
            source_mean: 0.0,
        };
        assert!(matches!(
            segment_variances(&profile, 6, 1, 1e-30),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn polyfit_reproduces_constant() {
        let fit = fit_local_polynomial(&[5.0; 5], 3).unwrap();
        for (f, r) in fit.fitted.iter().zip(fit.residuals(&[5.0; 5])) {
            assert!((f - 5.0).abs() < 1e-12);
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn polyfit_exact_line() {
        let seg: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = fit_local_polynomial(&seg, 1).unwrap();
        for r in fit.residuals(&seg) {
            assert!(r.abs() < 1e-10);
        }
    }

    #[test]
    fn polyfit_beats_perturbed_coefficients() {
        // Optimality oracle: the least-squares cubic must have an RSS no
        // larger than any perturbation of its own coefficients.
        let seg: Vec<f64> = (0..40)
            .map(|i| ((i * 2654435761usize) % 1000) as f64 / 250.0 - 2.0)
            .collect();
        let fit = fit_local_polynomial(&seg, 3).unwrap();
        let rss = |coeffs: &[f64]| -> f64 {
            (0..seg.len())
                .map(|i| {
                    let x = scaled_index(i, seg.len());
                    let f = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
                    (seg[i] - f) * (seg[i] - f)
                })
                .sum()
        };
        let best = rss(&fit.coefficients);
        for k in 0..4 {
            for delta in [-0.37, -0.01, 0.01, 0.37] {
                let mut perturbed = fit.coefficients.clone();
                perturbed[k] += delta;
                assert!(
                    rss(&perturbed) >= best - 1e-9,
                    "perturbing c[{k}] by {delta} beat the fit"
                );
            }
        }
    }

    #[test]
    fn polyfit_residuals_orthogonal_to_basis() {
        let seg: Vec<f64> = (0..64)
            .map(|i| (i as f64 * 0.37).sin() + 0.01 * i as f64)
            .collect();
        let fit = fit_local_polynomial(&seg, 3).unwrap();
        let res = fit.residuals(&seg);
        let norm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
        for j in 0..=3 {
            let col: Vec<f64> = (0..seg.len())
                .map(|i| scaled_index(i, seg.len()).powi(j))
                .collect();
            let col_norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
            let dot: f64 = res.iter().zip(&col).map(|(r, c)| r * c).sum();
            assert!(
                dot.abs() <= 1e-8 * norm * col_norm,
                "residuals not orthogonal to basis power {j}"
            );
        }
    }

    #[test]
    fn polyfit_rejects_underdetermined_segment() {
        assert!(matches!(
            fit_local_polynomial(&[1.0, 2.0], 3),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fluctuation_of_constant_variances_is_sqrt_c() {
        let sv = SegmentVariances {
            scale: 8,
            values: vec![4.0; 10],
            n_floored: 0,
        };
        let surface = fluctuation(&[sv], &[-25.0, -2.0, 0.0, 2.0, 25.0]).unwrap();
        for qi in 0..5 {
            assert!(
                (surface.at(qi, 0) - 2.0).abs() < 1e-12,
                "q index {qi}: {}",
                surface.at(qi, 0)
            );
        }
    }

    #[test]
    fn fluctuation_q2_is_rms() {
        let values = vec![1.0, 2.0, 3.0, 4.0];
        let rms = (values.iter().sum::<f64>() / 4.0).sqrt();
        let sv = SegmentVariances {
            scale: 8,
            values,
            n_floored: 0,
        };
        let surface = fluctuation(&[sv], &[2.0]).unwrap();
        assert!((surface.at(0, 0) - rms).abs() < 1e-14);
    }

    #[test]
    fn fluctuation_negative_q_hand_value() {
        // F² = [1, 4], q = -2: (0.5 * (1 + 1/4))^(-1/2) = sqrt(8/5).
        let sv = SegmentVariances {
            scale: 8,
            values: vec![1.0, 4.0],
            n_floored: 0,
        };
        let surface = fluctuation(&[sv], &[-2.0]).unwrap();
        assert!((surface.at(0, 0) - 1.2649110640673518).abs() < 1e-14);
    }

    #[test]
    fn fluctuation_rejects_zero_variance() {
        let sv = SegmentVariances {
            scale: 8,
            values: vec![1.0, 0.0],
            n_floored: 0,
        };
        assert!(matches!(fluctuation(&[sv], &[2.0]), Err(Error::Data(_))));
    }

    #[test]
    fn extreme_q_does_not_overflow() {
        // Variance magnitudes that would overflow (F²)^(q/2) at |q| = 25 in
        // linear space.
        let sv = SegmentVariances {
            scale: 8,
            values: vec![1e-20, 1e-10, 1.0, 1e10, 1e20],
            n_floored: 0,
        };
        let surface = fluctuation(&[sv], &[-25.0, 25.0]).unwrap();
        assert!(surface.at(0, 0).is_finite() && surface.at(0, 0) > 0.0);
        assert!(surface.at(1, 0).is_finite() && surface.at(1, 0) > 0.0);
        // At q = 25 the largest variance dominates: F ~ (1e20)^(1/2) scaled
        // by the segment count factor; ordering is what matters here.
        assert!(surface.at(1, 0) > surface.at(0, 0));
    }

    #[test]
    fn default_config_shapes() {
        let cfg = MfdfaConfig::default_for_length(16384).unwrap();
        assert_eq!(cfg.poly_order, 3);
        assert_eq!(cfg.q_grid.len(), 101);
        assert!(cfg.q_grid.contains(&0.0));
        assert!(cfg.q_grid.contains(&2.0));
        assert_eq!(cfg.q_grid[0], -25.0);
        assert_eq!(*cfg.q_grid.last().unwrap(), 25.0);
        assert_eq!(cfg.scales[0], 16);
        assert_eq!(*cfg.scales.last().unwrap(), 4096);
        assert!(cfg.scales.len() >= 18 && cfg.scales.len() <= 20);
    }

    #[test]
    fn config_rejects_bad_grids() {
        assert!(MfdfaConfig::new(3, vec![16, 16], default_q_grid(), 1e-30).is_err());
        assert!(MfdfaConfig::new(3, vec![4, 16], default_q_grid(), 1e-30).is_err());
        assert!(MfdfaConfig::new(0, vec![16], default_q_grid(), 1e-30).is_err());
        assert!(MfdfaConfig::new(3, vec![16, 32], vec![f64::NAN], 1e-30).is_err());
        assert!(MfdfaConfig::new(3, vec![16, 32], vec![2.0], 0.0).is_err());
    }

    #[test]
    fn analyze_drops_oversized_scales_with_diagnostics() {
        let returns: Vec<f64> = (0..256).map(|i| (i as f64 * 0.7).sin()).collect();
        let cfg = MfdfaConfig::new(
            1,
            vec![8, 16, 32, 64, 128],
            vec![-2.0, 0.0, 2.0],
            1e-30,
        )
        .unwrap();
        let run = analyze(&series(returns), &cfg).unwrap();
        assert_eq!(run.surface.scales, vec![8, 16, 32, 64]);
        assert_eq!(run.rejected_scales.len(), 1);
        assert_eq!(run.rejected_scales[0].scale, 128);
    }

    #[test]
    fn analyze_fails_when_no_scale_fits() {
        let cfg = MfdfaConfig::new(1, vec![64], vec![2.0], 1e-30).unwrap();
        let returns: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        assert!(matches!(
            analyze(&series(returns), &cfg),
            Err(Error::Data(_))
        ));
    }
}
