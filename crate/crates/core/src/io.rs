//! The CSV schemas shared by the library and the CLI.
//!
//! All tabular output carries a header row, RFC 3339 UTC timestamps and
//! floats printed with 17 significant digits so every value round-trips
//! exactly through text.

use std::io::{BufRead, Write};

use chrono::{DateTime, SecondsFormat};

use crate::error::{Error, Result};
use crate::liquidity::IlliqPoint;
use crate::mfdfa::FluctuationSurface;
use crate::rolling::{AlignedTable, RollingTrace};
use crate::spectrum::HurstSpectrum;
use crate::timeseries::TickRecord;

/// 17 significant digits: enough for exact f64 round-trips.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_timestamp(ts: i64) -> String {
    DateTime::from_timestamp(ts, 0)
        .expect("timestamp within RFC 3339 range")
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_timestamp(s: &str) -> Result<i64> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|dt| dt.timestamp())
        .map_err(|e| Error::data(format!("bad timestamp {s:?}: {e}")))
}

/// Write a uniformly sampled series as `timestamp,value` rows.
pub fn write_series<W: Write>(w: &mut W, start: i64, dt: u64, values: &[f64]) -> Result<()> {
    writeln!(w, "timestamp,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(
            w,
            "{},{}",
            format_timestamp(start + i as i64 * dt as i64),
            format_float(*v)
        )?;
    }
    Ok(())
}

/// Read a `timestamp,value` series, inferring the sampling period from the
/// row spacing (which must be uniform).
pub fn read_series<R: BufRead>(r: R) -> Result<(i64, u64, Vec<f64>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::data("series file is empty"))??;
    if header.trim() != "timestamp,value" {
        return Err(Error::data(format!(
            "expected header 'timestamp,value', got {:?}",
            header.trim()
        )));
    }

    let mut timestamps: Vec<i64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (ts, val) = line.split_once(',').ok_or_else(|| {
            Error::data(format!("line {}: expected two fields", idx + 2))
        })?;
        timestamps.push(parse_timestamp(ts)?);
        values.push(
            val.trim()
                .parse::<f64>()
                .map_err(|_| Error::data(format!("line {}: bad value {val:?}", idx + 2)))?,
        );
    }
    if values.len() < 2 {
        return Err(Error::data("series needs at least two rows"));
    }

    let dt = timestamps[1] - timestamps[0];
    if dt <= 0 {
        return Err(Error::data("series timestamps must be strictly increasing"));
    }
    for (i, pair) in timestamps.windows(2).enumerate() {
        if pair[1] - pair[0] != dt {
            return Err(Error::data(format!(
                "non-uniform sampling at row {}: spacing {}s, expected {}s",
                i + 3,
                pair[1] - pair[0],
                dt
            )));
        }
    }
    Ok((timestamps[0], dt as u64, values))
}

/// Ticks keep the ingest column layout (`timestamp,price,amount` in unix
/// seconds) so cleaned output stays re-ingestable; the parser skips the
/// header row.
pub fn write_ticks<W: Write>(w: &mut W, ticks: &[TickRecord]) -> Result<()> {
    writeln!(w, "timestamp,price,amount")?;
    for t in ticks {
        writeln!(
            w,
            "{},{},{}",
            t.timestamp,
            format_float(t.price),
            format_float(t.amount)
        )?;
    }
    Ok(())
}

pub fn write_surface<W: Write>(w: &mut W, surface: &FluctuationSurface) -> Result<()> {
    writeln!(w, "q,s,F")?;
    for (qi, &q) in surface.q_grid.iter().enumerate() {
        for (si, &s) in surface.scales.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                format_float(q),
                s,
                format_float(surface.at(qi, si))
            )?;
        }
    }
    Ok(())
}

pub fn write_spectrum<W: Write>(w: &mut W, spectrum: &HurstSpectrum) -> Result<()> {
    writeln!(w, "q,h,stderr,r2")?;
    for i in 0..spectrum.q_grid.len() {
        writeln!(
            w,
            "{},{},{},{}",
            format_float(spectrum.q_grid[i]),
            format_float(spectrum.h[i]),
            format_float(spectrum.stderr[i]),
            format_float(spectrum.r2[i])
        )?;
    }
    Ok(())
}

pub fn write_trace<W: Write>(w: &mut W, trace: &RollingTrace) -> Result<()> {
    writeln!(w, "timestamp,h2,delta_h,illiq")?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for i in 0..trace.len() {
        writeln!(
            w,
            "{},{},{},{}",
            format_timestamp(trace.timestamps[i]),
            opt(trace.h2[i]),
            opt(trace.delta_h[i]),
            opt(trace.illiq[i])
        )?;
    }
    Ok(())
}

pub fn write_illiq<W: Write>(w: &mut W, points: &[IlliqPoint]) -> Result<()> {
    writeln!(w, "timestamp,illiq,days_used,days_skipped")?;
    for p in points {
        let ts = p
            .window_end
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc()
            .timestamp();
        writeln!(
            w,
            "{},{},{},{}",
            format_timestamp(ts),
            format_float(p.illiq),
            p.days_used,
            p.days_skipped
        )?;
    }
    Ok(())
}

pub fn write_aligned<W: Write>(w: &mut W, table: &AlignedTable) -> Result<()> {
    let labels: Vec<&str> = table.columns.iter().map(|(l, _)| l.as_str()).collect();
    writeln!(w, "timestamp,{}", labels.join(","))?;
    for (i, &ts) in table.timestamps.iter().enumerate() {
        let row: Vec<String> = table
            .columns
            .iter()
            .map(|(_, vals)| format_float(vals[i]))
            .collect();
        writeln!(w, "{},{}", format_timestamp(ts), row.join(","))?;
    }
    Ok(())
}
