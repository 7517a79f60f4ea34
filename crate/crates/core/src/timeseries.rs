//! Tick ingestion, fixed-period resampling and log-return construction.
//!
//! The raw input is exchange trade data in the Bitcoincharts dump layout:
//! `unix_timestamp,price,amount` with no header row. Ticks are resampled
//! onto a uniform grid of period `dt` (each bin keeps the price of its last
//! trade, empty bins carry the previous price forward) and turned into
//! natural-log returns, the input of the fluctuation analysis. Daily
//! aggregates (close, volume, daily return) feed the illiquidity measure.

use std::io::BufRead;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// One raw trade: unix timestamp (seconds, UTC), price in quote currency,
/// amount in base currency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub timestamp: i64,
    pub price: f64,
    pub amount: f64,
}

/// A row that failed to parse or violated a field invariant, with its
/// 1-based line number in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    pub line: usize,
    pub reason: String,
}

/// Outcome of [`ingest_ticks`]: accepted records (sorted by timestamp,
/// original order preserved among ties) plus per-row rejection diagnostics.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub ticks: Vec<TickRecord>,
    pub rejected: Vec<RejectedRow>,
    /// Non-blank data rows seen, accepted or not.
    pub total_rows: usize,
}

/// Parse a `unix_timestamp,price,amount` CSV stream (exchange dumps carry
/// no header row; one is tolerated and skipped).
///
/// Malformed rows and rows with non-positive price or negative amount are
/// rejected individually and reported with their line number. More than 1%
/// rejected rows is treated as a data-quality failure for the whole source.
pub fn ingest_ticks<R: BufRead>(reader: R) -> Result<IngestReport> {
    let mut ticks = Vec::new();
    let mut rejected = Vec::new();
    let mut total_rows = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if total_rows == 0 && ticks.is_empty() && rejected.is_empty() {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("timestamp") || lower.starts_with("unix_timestamp") {
                continue;
            }
        }
        total_rows += 1;
        match parse_tick_row(line) {
            Ok(tick) => ticks.push(tick),
            Err(reason) => rejected.push(RejectedRow {
                line: idx + 1,
                reason,
            }),
        }
    }

    if rejected.len() * 100 > total_rows {
        return Err(Error::data(format!(
            "{} of {} rows rejected (> 1%); refusing low-quality source",
            rejected.len(),
            total_rows
        )));
    }
    if total_rows == 0 {
        log::warn!("ingest: source contained no data rows");
    }

    // Stable sort keeps the original order of equal timestamps.
    ticks.sort_by_key(|t| t.timestamp);

    Ok(IngestReport {
        ticks,
        rejected,
        total_rows,
    })
}

fn parse_tick_row(line: &str) -> std::result::Result<TickRecord, String> {
    let mut fields = line.split(',');
    let ts = fields.next().ok_or("missing timestamp field")?;
    let price = fields.next().ok_or("missing price field")?;
    let amount = fields.next().ok_or("missing amount field")?;
    if fields.next().is_some() {
        return Err("more than three fields".to_string());
    }

    let timestamp: i64 = ts
        .trim()
        .parse()
        .map_err(|_| format!("bad timestamp {ts:?}"))?;
    let price: f64 = price
        .trim()
        .parse()
        .map_err(|_| format!("bad price {price:?}"))?;
    let amount: f64 = amount
        .trim()
        .parse()
        .map_err(|_| format!("bad amount {amount:?}"))?;

    if !price.is_finite() || price <= 0.0 {
        return Err(format!("non-positive price {price}"));
    }
    if !amount.is_finite() || amount < 0.0 {
        return Err(format!("negative amount {amount}"));
    }
    Ok(TickRecord {
        timestamp,
        price,
        amount,
    })
}

/// How to populate grid bins that contain no trades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Repeat the last known price (yields a zero return for the empty bin).
    #[default]
    CarryForward,
}

impl std::str::FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "carry-forward" => Ok(FillPolicy::CarryForward),
            other => Err(Error::config(format!(
                "unsupported fill policy {other:?} (supported: carry-forward)"
            ))),
        }
    }
}

/// Uniformly sampled prices: sample `n` sits at time `start + n * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub start: i64,
    /// Sampling period in seconds.
    pub dt: u64,
    pub prices: Vec<f64>,
    /// Per-sample gap marker: `true` where the bin had no trades and the
    /// price was synthesised by the fill policy.
    pub filled: Vec<bool>,
    pub n_filled: usize,
}

/// Bin sorted ticks onto a `dt`-second grid anchored at the first tick.
///
/// Each bin `[start + n*dt, start + (n+1)*dt)` takes the price of its last
/// tick; bins with no ticks are populated per `fill` and counted in
/// `n_filled`. There are no bins before the first tick.
pub fn resample(ticks: &[TickRecord], dt: u64, fill: FillPolicy) -> Result<PriceSeries> {
    if ticks.is_empty() {
        return Err(Error::data("resample: no ticks, every bin would be empty"));
    }
    if dt == 0 {
        return Err(Error::config("resample: dt must be positive"));
    }
    ensure_sorted(ticks)?;
    if let Some(bad) = ticks.iter().find(|t| t.price <= 0.0 || !t.price.is_finite()) {
        return Err(Error::data(format!(
            "resample: non-positive price {} at timestamp {}",
            bad.price, bad.timestamp
        )));
    }

    let FillPolicy::CarryForward = fill;
    let start = ticks[0].timestamp;
    let mut prices: Vec<f64> = Vec::new();
    let mut filled: Vec<bool> = Vec::new();
    let mut next_bin = 0u64;

    let mut i = 0;
    while i < ticks.len() {
        let bin = (ticks[i].timestamp - start) as u64 / dt;
        // Advance to the last tick sharing this bin.
        let mut j = i;
        while j + 1 < ticks.len() && (ticks[j + 1].timestamp - start) as u64 / dt == bin {
            j += 1;
        }
        while next_bin < bin {
            let carry = *prices.last().expect("bin 0 always holds the first tick");
            prices.push(carry);
            filled.push(true);
            next_bin += 1;
        }
        prices.push(ticks[j].price);
        filled.push(false);
        next_bin = bin + 1;
        i = j + 1;
    }

    let n_filled = filled.iter().filter(|&&f| f).count();
    Ok(PriceSeries {
        start,
        dt,
        prices,
        filled,
        n_filled,
    })
}

/// Log-returns at fixed sampling period, the input of the fluctuation
/// analysis. Return `n` sits at time `start + n * dt` and equals
/// `ln p(n+1) - ln p(n)` of the source prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub start: i64,
    /// Sampling period in seconds.
    pub dt: u64,
    pub returns: Vec<f64>,
    /// `true` where the return's closing bar was gap-filled upstream.
    pub filled: Vec<bool>,
    pub source_meta: String,
}

impl ReturnSeries {
    /// Series with no gap information (synthetic or file-loaded data).
    pub fn from_values(start: i64, dt: u64, returns: Vec<f64>, source_meta: String) -> Self {
        let filled = vec![false; returns.len()];
        ReturnSeries {
            start,
            dt,
            returns,
            filled,
            source_meta,
        }
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Natural-log returns of consecutive samples.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.prices.len() < 2 {
        return Err(Error::data(format!(
            "log_returns: need at least 2 prices, got {}",
            prices.prices.len()
        )));
    }
    if let Some(p) = prices.prices.iter().find(|p| **p <= 0.0 || !p.is_finite()) {
        return Err(Error::data(format!("log_returns: non-positive price {p}")));
    }

    let returns: Vec<f64> = prices
        .prices
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    // A return is synthetic when its closing bar was gap-filled.
    let filled = prices.filled[1..].to_vec();

    Ok(ReturnSeries {
        start: prices.start + prices.dt as i64,
        dt: prices.dt,
        returns,
        filled,
        source_meta: format!("log-returns of {} prices at dt={}s", prices.prices.len(), prices.dt),
    })
}

/// One UTC calendar day of trading: last price, summed volume and the
/// log-return against the previous aggregate's close.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyAggregate {
    pub day: NaiveDate,
    pub close: f64,
    /// Base-currency volume.
    pub volume: f64,
    /// `ln(close_t / close_{t-1})`; 0 by convention on the first day.
    pub daily_return: f64,
}

/// Collapse sorted ticks into per-UTC-day aggregates.
///
/// Days without ticks produce no aggregate; the next day's return then
/// bridges the gap. The first aggregate carries a zero return so the
/// sequence aligns one-to-one with trading days.
pub fn daily_aggregates(ticks: &[TickRecord]) -> Result<Vec<DailyAggregate>> {
    if ticks.is_empty() {
        return Err(Error::data("daily_aggregates: no ticks"));
    }
    ensure_sorted(ticks)?;

    let mut out: Vec<DailyAggregate> = Vec::new();
    let mut day_num = ticks[0].timestamp.div_euclid(86_400);
    let mut close = ticks[0].price;
    let mut volume = 0.0f64;

    let flush = |out: &mut Vec<DailyAggregate>, day_num: i64, close: f64, volume: f64| {
        let daily_return = match out.last() {
            Some(prev) => (close / prev.close).ln(),
            None => 0.0,
        };
        out.push(DailyAggregate {
            day: date_of_day_number(day_num),
            close,
            volume,
            daily_return,
        });
    };

    for tick in ticks {
        let d = tick.timestamp.div_euclid(86_400);
        if d != day_num {
            flush(&mut out, day_num, close, volume);
            day_num = d;
            volume = 0.0;
        }
        close = tick.price;
        volume += tick.amount;
    }
    flush(&mut out, day_num, close, volume);

    Ok(out)
}

fn date_of_day_number(day_num: i64) -> NaiveDate {
    chrono::DateTime::from_timestamp(day_num * 86_400, 0)
        .expect("day number within chrono range")
        .date_naive()
}

fn ensure_sorted(ticks: &[TickRecord]) -> Result<()> {
    if ticks.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(Error::data("ticks are not sorted by timestamp"));
    }
    Ok(())
}
