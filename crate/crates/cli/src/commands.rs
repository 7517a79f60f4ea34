//! Subcommand implementations. Every command reads its inputs fully (so
//! they can be digested into the run manifest), computes, and writes the
//! module's CSV/JSON schema; `-` means stdin or stdout.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use mfdfa_core::io as schema;
use mfdfa_core::liquidity;
use mfdfa_core::mfdfa::{self, MfdfaConfig};
use mfdfa_core::rolling::{self, RollingConfig};
use mfdfa_core::spectrum;
use mfdfa_core::synth::{GeneratorKind, GeneratorSpec};
use mfdfa_core::timeseries::{self, FillPolicy, PriceSeries, ReturnSeries, TickRecord};
use serde_json::json;

use crate::args;
use crate::config::Merger;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

/// The sampling periods used by the analysis this tool reproduces;
/// anything else needs `--allow-any-dt`.
const SUPPORTED_DT: [u64; 4] = [3_600, 21_600, 43_200, 86_400];

pub fn read_input(path: &str) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if path == "-" {
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::io(format!("reading stdin: {e}")))?;
    } else {
        buf = std::fs::read(path).map_err(|e| CliError::io(format!("reading {path}: {e}")))?;
    }
    Ok(buf)
}

pub fn write_output(path: &str, bytes: &[u8]) -> CliResult<()> {
    if path == "-" {
        use std::io::Write;
        std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(format!("writing stdout: {e}")))?;
    } else {
        std::fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {path}: {e}")))?;
    }
    Ok(())
}

fn dump_effective(
    dump_path: Option<&Path>,
    effective: &BTreeMap<String, String>,
) -> CliResult<()> {
    if let Some(path) = dump_path {
        std::fs::write(path, crate::config::render_config(effective))
            .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_ticks(bytes: &[u8], manifest: &mut Manifest) -> CliResult<Vec<TickRecord>> {
    let report = timeseries::ingest_ticks(bytes)?;
    for row in report.rejected.iter().take(10) {
        log::warn!("rejected row {}: {}", row.line, row.reason);
    }
    if report.rejected.len() > 10 {
        log::warn!("... and {} more rejected rows", report.rejected.len() - 10);
    }
    manifest.stat("rows_total", report.total_rows);
    manifest.stat("rows_rejected", report.rejected.len());
    Ok(report.ticks)
}

pub fn cmd_ingest(a: args::IngestArgs) -> CliResult<()> {
    let merger = Merger::new(a.common.file_config()?);
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;

    let mut manifest = Manifest::new("ingest");
    let bytes = read_input(&a.input)?;
    manifest.record_input(&a.input, &bytes);
    let ticks = load_ticks(&bytes, &mut manifest)?;
    manifest.stat("ticks", ticks.len());

    let mut out = Vec::new();
    schema::write_ticks(&mut out, &ticks)?;
    write_output(&a.output, &out)?;
    manifest.write(&a.output, &effective)
}

pub fn cmd_resample(a: args::ResampleArgs) -> CliResult<()> {
    let mut merger = Merger::new(a.common.file_config()?);
    let dt = merger.duration("dt", a.dt, 86_400)?;
    let fill = merger.string("fill", a.fill, "carry-forward")?;
    let allow_any_dt = merger.switch("allow-any-dt", a.allow_any_dt)?;
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;

    if !allow_any_dt && !SUPPORTED_DT.contains(&dt) {
        return Err(CliError::config(format!(
            "dt = {} is outside the supported set {{1h, 6h, 12h, 24h}}; pass --allow-any-dt to override",
            crate::config::render_duration(dt)
        )));
    }
    let fill: FillPolicy = fill.parse()?;

    let mut manifest = Manifest::new("resample");
    let bytes = read_input(&a.input)?;
    manifest.record_input(&a.input, &bytes);
    let ticks = load_ticks(&bytes, &mut manifest)?;
    let series = timeseries::resample(&ticks, dt, fill)?;
    manifest.stat("samples", series.prices.len());
    manifest.stat("gap_filled", series.n_filled);

    let mut out = Vec::new();
    schema::write_series(&mut out, series.start, series.dt, &series.prices)?;
    write_output(&a.output, &out)?;
    manifest.write(&a.output, &effective)
}

/// Shared MF-DFA parameter block for `mfdfa` and `rolling`.
struct MfdfaParams {
    poly_order: usize,
    explicit_scales: Option<Vec<usize>>,
    s_min: usize,
    s_max: Option<usize>,
    n_scales: usize,
    q_grid: Vec<f64>,
    variance_floor: f64,
}

impl MfdfaParams {
    fn merge(merger: &mut Merger, a: &args::MfdfaParamArgs) -> CliResult<Self> {
        let poly_order = merger.value("poly-order", a.poly_order, 3)?;
        let q_min = merger.value("q-min", a.q_min, -25.0)?;
        let q_max = merger.value("q-max", a.q_max, 25.0)?;
        let q_step = merger.value("q-step", a.q_step, 0.5)?;
        let s_min = merger.value("s-min", a.s_min, 16)?;
        let s_max = merger.optional("s-max", a.s_max)?;
        let n_scales = merger.value("n-scales", a.n_scales, 20)?;
        let variance_floor = merger.value("variance-floor", a.variance_floor, 1e-30)?;
        let scales_raw = merger.optional_string("scales", a.scales.clone());

        if q_step <= 0.0 || q_step.is_nan() || q_max < q_min {
            return Err(CliError::config("q grid needs q-min <= q-max and q-step > 0"));
        }
        let steps = ((q_max - q_min) / q_step + 1e-9).floor() as usize;
        let q_grid: Vec<f64> = (0..=steps).map(|k| q_min + k as f64 * q_step).collect();
        if !q_grid.iter().any(|&q| (q - 2.0).abs() <= 1e-9) {
            return Err(CliError::config(
                "q grid must contain q = 2 (the summary's h2 and the persistence \
                 classification are read there)",
            ));
        }

        let explicit_scales = match scales_raw {
            Some(raw) => {
                let parsed: Result<Vec<usize>, _> =
                    raw.split(',').map(|t| t.trim().parse::<usize>()).collect();
                Some(parsed.map_err(|_| {
                    CliError::config(format!("bad scale list {raw:?}; expected comma-separated integers"))
                })?)
            }
            None => None,
        };

        Ok(MfdfaParams {
            poly_order,
            explicit_scales,
            s_min,
            s_max,
            n_scales,
            q_grid,
            variance_floor,
        })
    }

    fn config_for_length(&self, n: usize) -> CliResult<MfdfaConfig> {
        let scales = match &self.explicit_scales {
            Some(s) => s.clone(),
            None => {
                let s_max = self.s_max.unwrap_or(n / 4);
                mfdfa::log_spaced_scales(self.s_min, s_max, self.n_scales)?
            }
        };
        Ok(MfdfaConfig::new(
            self.poly_order,
            scales,
            self.q_grid.clone(),
            self.variance_floor,
        )?)
    }
}

/// Read a `timestamp,value` series and interpret it as returns, or as
/// prices to be converted when `prices` is set.
fn load_returns(bytes: &[u8], prices: bool, expect_dt: Option<u64>) -> CliResult<ReturnSeries> {
    let (start, dt, values) = schema::read_series(bytes)?;
    if let Some(expected) = expect_dt {
        if expected != dt {
            return Err(CliError::config(format!(
                "series is sampled at {} but --dt says {}",
                crate::config::render_duration(dt),
                crate::config::render_duration(expected)
            )));
        }
    }
    if prices {
        let n = values.len();
        let series = PriceSeries {
            start,
            dt,
            filled: vec![false; n],
            n_filled: 0,
            prices: values,
        };
        Ok(timeseries::log_returns(&series)?)
    } else {
        Ok(ReturnSeries::from_values(
            start,
            dt,
            values,
            "loaded series".into(),
        ))
    }
}

pub fn cmd_mfdfa(a: args::MfdfaArgs) -> CliResult<()> {
    let mut merger = Merger::new(a.common.file_config()?);
    let params = MfdfaParams::merge(&mut merger, &a.params)?;
    let prices = merger.switch("prices", a.prices)?;
    let expect_dt = merger.optional_duration("dt", a.dt)?;
    let band = merger.value("band", a.band, spectrum::DEFAULT_EFFICIENCY_BAND)?;
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;
    if band < 0.0 {
        return Err(CliError::config("band must be nonnegative"));
    }

    let mut manifest = Manifest::new("mfdfa");
    let bytes = read_input(&a.input)?;
    manifest.record_input(&a.input, &bytes);
    let returns = load_returns(&bytes, prices, expect_dt)?;
    let cfg = params.config_for_length(returns.len())?;

    let run = mfdfa::analyze(&returns, &cfg)?;
    let spec = spectrum::fit_spectrum(&run.surface)?;
    for r in &run.rejected_scales {
        log::warn!("{}", r.reason);
    }
    manifest.stat("samples", returns.len());
    manifest.stat("scales_used", run.surface.scales.len());
    manifest.stat("scales_rejected", run.rejected_scales.len());
    manifest.stat("variances_floored", run.n_floored);

    let mut out = Vec::new();
    schema::write_spectrum(&mut out, &spec)?;
    write_output(&a.output, &out)?;

    let h2 = spec.h2().expect("q grid is validated to contain 2");
    let summary = json!({
        "h2": h2,
        "delta_h": spec.delta_h,
        "classification": spectrum::classify_persistence(h2, band).to_string(),
        "scale_range_used": [spec.scale_range_used.0, spec.scale_range_used.1],
    });
    let summary_text = format!("{summary}\n");
    match (&a.summary, a.output.as_str()) {
        (Some(path), _) => write_output(path, summary_text.as_bytes())?,
        // Spectrum went to a file: the summary can have stdout.
        (None, out) if out != "-" => write_output("-", summary_text.as_bytes())?,
        (None, _) => log::info!("summary: {summary}"),
    }

    if let Some(surface_path) = &a.surface {
        let mut out = Vec::new();
        schema::write_surface(&mut out, &run.surface)?;
        write_output(surface_path, &out)?;
    }
    manifest.write(&a.output, &effective)
}

pub fn cmd_rolling(a: args::RollingArgs) -> CliResult<()> {
    let mut merger = Merger::new(a.common.file_config()?);
    let params = MfdfaParams::merge(&mut merger, &a.params)?;
    let prices = merger.switch("prices", a.prices)?;
    let expect_dt = merger.optional_duration("dt", a.dt)?;
    let window_secs = merger.duration("window", a.window, rolling::DEFAULT_WINDOW_SECS)?;
    let step_secs = merger.duration("step", a.step, rolling::DEFAULT_STEP_SECS)?;
    let min_coverage = merger.value("min-coverage", a.min_coverage, rolling::DEFAULT_MIN_COVERAGE)?;
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;

    let mut manifest = Manifest::new("rolling");
    let bytes = read_input(&a.input)?;
    manifest.record_input(&a.input, &bytes);
    let returns = load_returns(&bytes, prices, expect_dt)?;

    let cfg = RollingConfig {
        window_secs,
        step_secs,
        min_coverage,
    };
    if returns.dt == 0 || window_secs % returns.dt != 0 {
        return Err(CliError::config(format!(
            "window {} is not a whole number of samples at dt = {}",
            crate::config::render_duration(window_secs),
            crate::config::render_duration(returns.dt)
        )));
    }
    let window_samples = (window_secs / returns.dt) as usize;
    let mf = params.config_for_length(window_samples)?;

    let trace = rolling::rolling_spectrum(&returns, &cfg, &mf)?;
    for (ts, reason) in trace.skipped.iter().take(10) {
        log::warn!("window ending {} skipped: {reason}", schema::format_timestamp(*ts));
    }
    manifest.stat("windows", trace.len());
    manifest.stat("windows_skipped", trace.skipped.len());

    let mut out = Vec::new();
    schema::write_trace(&mut out, &trace)?;
    write_output(&a.output, &out)?;
    manifest.write(&a.output, &effective)
}

pub fn cmd_illiq(a: args::IlliqArgs) -> CliResult<()> {
    let mut merger = Merger::new(a.common.file_config()?);
    let window_days = merger.value("window-days", a.window_days, 365u32)?;
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;

    let mut manifest = Manifest::new("illiq");
    let bytes = read_input(&a.input)?;
    manifest.record_input(&a.input, &bytes);
    let ticks = load_ticks(&bytes, &mut manifest)?;
    let days = timeseries::daily_aggregates(&ticks)?;
    let (points, skipped) = liquidity::rolling_illiq(&days, window_days)?;
    for (day, reason) in skipped.iter().take(10) {
        log::warn!("window ending {day} skipped: {reason}");
    }
    manifest.stat("days", days.len());
    manifest.stat("points", points.len());
    manifest.stat("windows_skipped", skipped.len());

    let mut out = Vec::new();
    schema::write_illiq(&mut out, &points)?;
    write_output(&a.output, &out)?;
    manifest.write(&a.output, &effective)
}

pub fn cmd_synth(a: args::SynthArgs) -> CliResult<()> {
    let mut merger = Merger::new(a.common.file_config()?);
    let kind = merger.string("kind", a.kind, "gaussian")?;
    let n = merger.optional("n", a.n)?;
    let hurst = merger.optional("hurst", a.hurst)?;
    let param_a = merger.optional("param-a", a.param_a)?;
    let depth = merger.optional("depth", a.depth)?;
    let seed = merger.value("seed", a.seed, 0u64)?;
    let dt = merger.duration("dt", a.dt, 86_400)?;
    let start_raw = merger.string("start", a.start, "1970-01-01T00:00:00Z")?;
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;

    fn need<T>(opt: Option<T>, what: &str, kind: &str) -> CliResult<T> {
        opt.ok_or_else(|| CliError::config(format!("--{what} is required for kind {kind:?}")))
    }
    let generator = match kind.as_str() {
        "gaussian" | "gaussian-noise" => GeneratorKind::GaussianNoise {
            n: need(n, "n", &kind)?,
        },
        "fgn" => GeneratorKind::Fgn {
            n: need(n, "n", &kind)?,
            hurst: need(hurst, "hurst", &kind)?,
        },
        "cascade" | "binomial-cascade" => GeneratorKind::BinomialCascade {
            depth: need(depth, "depth", &kind)?,
            a: need(param_a, "param-a", &kind)?,
        },
        other => {
            return Err(CliError::config(format!(
                "unknown generator kind {other:?} (gaussian, fgn, cascade)"
            )))
        }
    };
    let spec = GeneratorSpec {
        kind: generator,
        seed,
        start: schema::parse_timestamp(&start_raw)?,
        dt,
    };
    let series = spec.generate()?;

    let mut manifest = Manifest::new("synth");
    manifest.stat("samples", series.len());
    let mut out = Vec::new();
    schema::write_series(&mut out, series.start, series.dt, &series.returns)?;
    write_output(&a.output, &out)?;
    manifest.write(&a.output, &effective)
}

/// A parsed `timestamp,...` table for the align join.
struct Table {
    labels: Vec<String>,
    timestamps: Vec<i64>,
    rows: Vec<Vec<Option<f64>>>,
}

fn read_table(bytes: &[u8], prefix: &str) -> CliResult<Table> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| CliError::data(format!("{prefix}: not valid UTF-8")))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::data(format!("{prefix}: empty table")))?;
    let mut cols = header.split(',');
    if cols.next().map(str::trim) != Some("timestamp") {
        return Err(CliError::data(format!(
            "{prefix}: first column must be 'timestamp'"
        )));
    }
    let labels: Vec<String> = cols.map(|c| format!("{prefix}_{}", c.trim())).collect();
    if labels.is_empty() {
        return Err(CliError::data(format!("{prefix}: no value columns")));
    }

    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let ts = fields
            .next()
            .ok_or_else(|| CliError::data(format!("{prefix} line {}: empty row", idx + 2)))?;
        timestamps.push(schema::parse_timestamp(ts)?);
        let row: Vec<Option<f64>> = fields
            .map(|f| {
                let f = f.trim();
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| {
                        CliError::data(format!("{prefix} line {}: bad value {f:?}", idx + 2))
                    })
                }
            })
            .collect::<CliResult<_>>()?;
        if row.len() != labels.len() {
            return Err(CliError::data(format!(
                "{prefix} line {}: {} fields, expected {}",
                idx + 2,
                row.len() + 1,
                labels.len() + 1
            )));
        }
        rows.push(row);
    }

    // A column that is empty everywhere (e.g. a trace's unfilled illiq
    // slot) carries nothing to join on; drop it instead of emptying the
    // result.
    let keep: Vec<usize> = (0..labels.len())
        .filter(|&c| rows.iter().any(|r| r[c].is_some()))
        .collect();
    if keep.len() != labels.len() {
        let labels = keep.iter().map(|&c| labels[c].clone()).collect();
        let rows = rows
            .iter()
            .map(|r| keep.iter().map(|&c| r[c]).collect())
            .collect();
        return Ok(Table {
            labels,
            timestamps,
            rows,
        });
    }
    Ok(Table {
        labels,
        timestamps,
        rows,
    })
}

pub fn cmd_align(a: args::AlignArgs) -> CliResult<()> {
    let merger = Merger::new(a.common.file_config()?);
    let effective = merger.finish()?;
    dump_effective(a.common.dump_config.as_deref(), &effective)?;
    if a.inputs.len() < 2 {
        return Err(CliError::config("align needs at least two --in tables"));
    }

    let mut manifest = Manifest::new("align");
    let mut tables = Vec::new();
    for (i, path) in a.inputs.iter().enumerate() {
        let bytes = read_input(path)?;
        manifest.record_input(path, &bytes);
        let stem = if path == "-" {
            format!("t{i}")
        } else {
            Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("t{i}"))
        };
        tables.push(read_table(&bytes, &stem)?);
    }

    // All tables must share one step. A table may have gaps (skipped
    // windows), so its step is the smallest positive spacing.
    let mut step: Option<i64> = None;
    for t in &tables {
        let table_step = t
            .timestamps
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&s| s > 0)
            .min();
        if let Some(s) = table_step {
            match step {
                None => step = Some(s),
                Some(prev) if prev != s => {
                    return Err(CliError::config(format!(
                        "align: mismatched steps {prev}s vs {s}s"
                    )))
                }
                _ => {}
            }
        }
    }

    let mut union: std::collections::HashSet<i64> = std::collections::HashSet::new();
    for t in &tables {
        union.extend(t.timestamps.iter().copied());
    }
    let mut shared = tables[0].timestamps.clone();
    for t in &tables[1..] {
        let set: std::collections::HashSet<i64> = t.timestamps.iter().copied().collect();
        shared.retain(|ts| set.contains(ts));
    }

    let mut out_rows: Vec<(i64, Vec<f64>)> = Vec::new();
    'rows: for &ts in &shared {
        let mut row = Vec::new();
        for t in &tables {
            let idx = t.timestamps.iter().position(|&x| x == ts).unwrap();
            for v in &t.rows[idx] {
                match v {
                    Some(v) => row.push(*v),
                    None => continue 'rows,
                }
            }
        }
        out_rows.push((ts, row));
    }
    let dropped = union.len() - out_rows.len();
    if out_rows.is_empty() {
        log::warn!("align: no overlapping complete rows");
    }
    manifest.stat("rows", out_rows.len());
    manifest.stat("rows_dropped", dropped);

    let mut out = String::new();
    let labels: Vec<&str> = tables
        .iter()
        .flat_map(|t| t.labels.iter().map(String::as_str))
        .collect();
    out.push_str(&format!("timestamp,{}\n", labels.join(",")));
    for (ts, row) in &out_rows {
        let vals: Vec<String> = row.iter().map(|v| schema::format_float(*v)).collect();
        out.push_str(&format!(
            "{},{}\n",
            schema::format_timestamp(*ts),
            vals.join(",")
        ));
    }
    write_output(&a.output, out.as_bytes())?;
    manifest.write(&a.output, &effective)
}
