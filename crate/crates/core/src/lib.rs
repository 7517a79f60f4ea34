//! Multifractal detrended fluctuation analysis for financial time series.
//!
//! The crate covers the full pipeline from raw exchange ticks to
//! figure-ready tables:
//!
//! - [`timeseries`]: tick ingestion, fixed-period resampling, log-returns
//!   and daily aggregates;
//! - [`mfdfa`]: profile, bidirectional segmentation, polynomial detrending
//!   and the q-th order fluctuation function;
//! - [`spectrum`]: the scaling fit h(q), the multifractal degree Δh and
//!   persistence classification;
//! - [`rolling`]: windowed evaluation producing time-evolution traces;
//! - [`liquidity`]: the Amihud illiquidity measure over rolling windows;
//! - [`synth`]: seeded generators with known fractal properties, used to
//!   validate the estimators;
//! - [`io`]: the CSV schemas shared by the library and the CLI.
//!
//! ```
//! use mfdfa_core::{analyze, fit_spectrum, synth, MfdfaConfig};
//!
//! // Persistent fractional Gaussian noise in, h(2) near 0.7 out.
//! let series = synth::gen_fgn(4096, 0.7, 7).unwrap();
//! let config = MfdfaConfig::default_for_length(series.len()).unwrap();
//! let run = analyze(&series, &config).unwrap();
//! let spectrum = fit_spectrum(&run.surface).unwrap();
//! assert!((spectrum.h2().unwrap() - 0.7).abs() < 0.1);
//! ```

pub mod error;
pub mod io;
pub mod liquidity;
pub mod mfdfa;
pub mod rolling;
pub mod spectrum;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
pub use mfdfa::{analyze, FluctuationSurface, MfdfaAnalysis, MfdfaConfig};
pub use rolling::{rolling_spectrum, RollingConfig, RollingTrace};
pub use spectrum::{classify_persistence, fit_spectrum, HurstSpectrum, Persistence};
pub use timeseries::{PriceSeries, ReturnSeries, TickRecord};
