//! Scaling-law fit: generalized Hurst exponents h(q) and the multifractal
//! degree.
//!
//! For every moment order q the fluctuation function is assumed to scale as
//! `F_q(s) ~ s^h(q)`; h(q) is the slope of an unweighted ordinary
//! least-squares regression of `ln F_q(s)` on `ln s` over all stored
//! scales. The spread `Δh = h(q_min) - h(q_max)` measures the degree of
//! multifractality: zero for a monofractal series, growing as the moments
//! scale differently.

use crate::error::{Error, Result};
use crate::mfdfa::FluctuationSurface;

/// Half-width of the efficiency band around h(2) = 0.5 used by
/// [`classify_persistence`] unless the caller overrides it.
pub const DEFAULT_EFFICIENCY_BAND: f64 = 0.05;

/// Fitted generalized Hurst spectrum with per-q regression diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstSpectrum {
    pub q_grid: Vec<f64>,
    pub h: Vec<f64>,
    /// Standard error of each fitted slope.
    pub stderr: Vec<f64>,
    /// Coefficient of determination of each per-q regression.
    pub r2: Vec<f64>,
    /// `h(q_min) - h(q_max)` over the stored grid.
    pub delta_h: f64,
    /// Smallest and largest scale that entered the fit.
    pub scale_range_used: (usize, usize),
}

impl HurstSpectrum {
    /// Exact-match lookup of h at a grid point (tolerance 1e-9).
    pub fn h_at(&self, q: f64) -> Option<f64> {
        self.q_grid
            .iter()
            .position(|&x| (x - q).abs() <= 1e-9)
            .map(|i| self.h[i])
    }

    /// The classical Hurst exponent, if q = 2 is on the grid.
    pub fn h2(&self) -> Option<f64> {
        self.h_at(2.0)
    }
}

/// Fit `ln F_q(s)` against `ln s` for every q on the surface.
pub fn fit_spectrum(surface: &FluctuationSurface) -> Result<HurstSpectrum> {
    let k = surface.scales.len();
    if k < 5 {
        return Err(Error::data(format!(
            "spectrum fit needs at least 5 scales, got {k}"
        )));
    }
    if surface
        .values
        .iter()
        .flatten()
        .any(|&f| f <= 0.0 || !f.is_finite())
    {
        return Err(Error::data("fluctuation surface contains non-positive values"));
    }

    let log_s: Vec<f64> = surface.scales.iter().map(|&s| (s as f64).ln()).collect();
    let x_mean = log_s.iter().sum::<f64>() / k as f64;
    let sxx: f64 = log_s.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();

    let mut h = Vec::with_capacity(surface.q_grid.len());
    let mut stderr = Vec::with_capacity(surface.q_grid.len());
    let mut r2 = Vec::with_capacity(surface.q_grid.len());

    for row in &surface.values {
        let log_f: Vec<f64> = row.iter().map(|f| f.ln()).collect();
        let y_mean = log_f.iter().sum::<f64>() / k as f64;
        let sxy: f64 = log_s
            .iter()
            .zip(&log_f)
            .map(|(x, y)| (x - x_mean) * (y - y_mean))
            .sum();
        let slope = sxy / sxx;
        let intercept = y_mean - slope * x_mean;

        let sse: f64 = log_s
            .iter()
            .zip(&log_f)
            .map(|(x, y)| {
                let e = y - (intercept + slope * x);
                e * e
            })
            .sum();
        let sst: f64 = log_f.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();

        h.push(slope);
        stderr.push((sse / (k as f64 - 2.0) / sxx).sqrt());
        r2.push(if sst > 0.0 {
            (1.0 - sse / sst).clamp(0.0, 1.0)
        } else {
            // Flat row: the constant fit is exact.
            1.0
        });
    }

    let delta_h = delta_from(&surface.q_grid, &h);
    Ok(HurstSpectrum {
        q_grid: surface.q_grid.clone(),
        h,
        stderr,
        r2,
        delta_h,
        scale_range_used: (surface.scales[0], *surface.scales.last().unwrap()),
    })
}

/// `h` at the smallest grid q minus `h` at the largest.
pub fn multifractal_degree(spectrum: &HurstSpectrum) -> f64 {
    delta_from(&spectrum.q_grid, &spectrum.h)
}

fn delta_from(q_grid: &[f64], h: &[f64]) -> f64 {
    debug_assert_eq!(q_grid.len(), h.len());
    debug_assert!(!q_grid.is_empty());
    let mut i_min = 0;
    let mut i_max = 0;
    for (i, &q) in q_grid.iter().enumerate() {
        if q < q_grid[i_min] {
            i_min = i;
        }
        if q > q_grid[i_max] {
            i_max = i;
        }
    }
    h[i_min] - h[i_max]
}

/// Persistence classification of a series by its Hurst exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Persistence {
    /// h(2) below the efficiency band: increments mean-revert.
    AntiPersistent,
    /// h(2) within the band around 0.5.
    ConsistentWithEfficient,
    /// h(2) above the band: increments trend.
    Persistent,
}

impl std::fmt::Display for Persistence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Persistence::AntiPersistent => "anti-persistent",
            Persistence::ConsistentWithEfficient => "consistent-with-efficient",
            Persistence::Persistent => "persistent",
        };
        f.write_str(s)
    }
}

/// Classify h(2) against the band `0.5 ± band`.
pub fn classify_persistence(h2: f64, band: f64) -> Persistence {
    if h2 < 0.5 - band {
        Persistence::AntiPersistent
    } else if h2 > 0.5 + band {
        Persistence::Persistent
    } else {
        Persistence::ConsistentWithEfficient
    }
}
