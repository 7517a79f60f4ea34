//! Amihud illiquidity: mean absolute daily return per unit of dollar
//! volume, `ILLIQ = (1/D_T) Σ |R_t| / (p_t V_t)`, over a rolling window of
//! calendar days. Higher values mean a thinner market.

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};
use crate::timeseries::DailyAggregate;

/// ILLIQ for one window, with the day bookkeeping that went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct IlliqPoint {
    pub window_end: NaiveDate,
    /// Units: inverse quote currency.
    pub illiq: f64,
    /// Days that actually entered the average (`D_T`).
    pub days_used: u32,
    /// Window days without a usable aggregate (no trades, zero volume, or
    /// the series' first day whose return is conventional).
    pub days_skipped: u32,
}

/// Average `|R_t| / (p_t V_t)` over the usable days in
/// `(window_end - window_days, window_end]`.
///
/// Days with zero volume are skipped (never divided by) and counted, as is
/// the first aggregate of the series, whose return is 0 by convention
/// rather than observation. `days` is the full aggregate sequence the
/// window is cut from; ILLIQ is a mean, so the slice order does not
/// matter.
pub fn amihud_illiq(
    days: &[DailyAggregate],
    window_end: NaiveDate,
    window_days: u32,
) -> Result<IlliqPoint> {
    if window_days == 0 {
        return Err(Error::config("illiq window must be at least one day"));
    }
    if days.is_empty() {
        return Err(Error::data("illiq: no daily aggregates"));
    }
    let window_start = window_end
        .checked_sub_days(Days::new(window_days as u64 - 1))
        .ok_or_else(|| Error::config("illiq window underflows the calendar"))?;
    // The series' earliest day carries the conventional zero return, not a
    // measurement.
    let series_first = days.iter().map(|d| d.day).min();

    let mut sum = 0.0f64;
    let mut days_used = 0u32;
    for day in days {
        if day.day < window_start || day.day > window_end {
            continue;
        }
        let usable = day.volume.is_finite()
            && day.volume > 0.0
            && day.close.is_finite()
            && day.close > 0.0;
        if Some(day.day) == series_first || !usable {
            continue;
        }
        sum += day.daily_return.abs() / (day.close * day.volume);
        days_used += 1;
    }

    if days_used == 0 {
        return Err(Error::data(format!(
            "illiq window ending {window_end} has no usable days"
        )));
    }
    Ok(IlliqPoint {
        window_end,
        illiq: sum / days_used as f64,
        days_used,
        days_skipped: window_days - days_used,
    })
}

/// A window end that produced no estimate, with the reason.
pub type SkippedDay = (NaiveDate, String);

/// Daily-stepped ILLIQ trace: one point per window end from the first full
/// window to the last aggregate day. Windows with no usable days are
/// recorded in the skip list instead of failing the run.
pub fn rolling_illiq(
    days: &[DailyAggregate],
    window_days: u32,
) -> Result<(Vec<IlliqPoint>, Vec<SkippedDay>)> {
    if window_days == 0 {
        return Err(Error::config("illiq window must be at least one day"));
    }
    if days.is_empty() {
        return Err(Error::data("illiq: no daily aggregates"));
    }
    let first = days.first().unwrap().day;
    let last = days.last().unwrap().day;
    let mut end = first
        .checked_add_days(Days::new(window_days as u64 - 1))
        .ok_or_else(|| Error::config("illiq window overflows the calendar"))?;
    if end > last {
        return Err(Error::data(format!(
            "series spans {first}..{last}, shorter than one {window_days}-day window"
        )));
    }

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    while end <= last {
        match amihud_illiq(days, end, window_days) {
            Ok(p) => points.push(p),
            Err(e) => skipped.push((end, e.to_string())),
        }
        end = end.succ_opt().ok_or_else(|| Error::config("calendar overflow"))?;
    }
    Ok((points, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: &str, close: f64, volume: f64, daily_return: f64) -> DailyAggregate {
        DailyAggregate {
            day: d.parse().unwrap(),
            close,
            volume,
            daily_return,
        }
    }

    fn two_day_fixture() -> Vec<DailyAggregate> {
        vec![
            day("2020-01-01", 100.0, 5.0, 0.0),
            day("2020-01-02", 110.0, 10.0, (110.0f64 / 100.0).ln()),
        ]
    }

    #[test]
    fn single_day_hand_value() {
        let days = two_day_fixture();
        let p = amihud_illiq(&days, "2020-01-02".parse().unwrap(), 1).unwrap();
        // |ln 1.1| / (110 * 10), evaluated independently.
        let expected = 8.664561800393176e-05;
        assert!(
            ((p.illiq - expected) / expected).abs() < 1e-12,
            "illiq {}",
            p.illiq
        );
        assert_eq!(p.days_used, 1);
        assert_eq!(p.days_skipped, 0);
    }

    #[test]
    fn zero_returns_give_zero_illiq() {
        let days = vec![
            day("2020-01-01", 50.0, 1.0, 0.0),
            day("2020-01-02", 50.0, 2.0, 0.0),
            day("2020-01-03", 50.0, 3.0, 0.0),
        ];
        let p = amihud_illiq(&days, "2020-01-03".parse().unwrap(), 2).unwrap();
        assert_eq!(p.illiq, 0.0);
        assert_eq!(p.days_used, 2);
    }

    #[test]
    fn doubling_volume_halves_illiq_exactly() {
        let days: Vec<DailyAggregate> = (0..30)
            .map(|i| {
                day(
                    &format!("2020-01-{:02}", i + 1),
                    100.0 + i as f64,
                    3.0 + (i % 5) as f64,
                    0.01 * ((i % 7) as f64 - 3.0),
                )
            })
            .collect();
        let doubled: Vec<DailyAggregate> = days
            .iter()
            .map(|d| DailyAggregate {
                volume: 2.0 * d.volume,
                ..d.clone()
            })
            .collect();
        let end: NaiveDate = "2020-01-30".parse().unwrap();
        let a = amihud_illiq(&days, end, 20).unwrap();
        let b = amihud_illiq(&doubled, end, 20).unwrap();
        assert_eq!(b.illiq, a.illiq / 2.0);
    }

    #[test]
    fn price_rescaling_covariance() {
        // Scaling all prices by c leaves R_t alone and scales p*V by c.
        let days: Vec<DailyAggregate> = (0..10)
            .map(|i| {
                day(
                    &format!("2020-02-{:02}", i + 1),
                    20.0 + i as f64,
                    1.0 + i as f64,
                    0.005 * (i as f64 - 4.0),
                )
            })
            .collect();
        let c = 8.0;
        let scaled: Vec<DailyAggregate> = days
            .iter()
            .map(|d| DailyAggregate {
                close: c * d.close,
                ..d.clone()
            })
            .collect();
        let end: NaiveDate = "2020-02-10".parse().unwrap();
        let a = amihud_illiq(&days, end, 9).unwrap();
        let b = amihud_illiq(&scaled, end, 9).unwrap();
        assert!(((b.illiq - a.illiq / c) / a.illiq).abs() < 1e-15);
    }

    #[test]
    fn zero_volume_days_are_skipped_not_divided() {
        let days = vec![
            day("2020-01-01", 100.0, 5.0, 0.0),
            day("2020-01-02", 100.0, 0.0, 0.01),
            day("2020-01-03", 100.0, 4.0, 0.02),
        ];
        let p = amihud_illiq(&days, "2020-01-03".parse().unwrap(), 3).unwrap();
        assert!(p.illiq.is_finite());
        assert_eq!(p.days_used, 1);
        assert_eq!(p.days_skipped, 2);
    }

    #[test]
    fn permuting_days_leaves_illiq_unchanged() {
        let days: Vec<DailyAggregate> = (0..12)
            .map(|i| {
                day(
                    &format!("2020-04-{:02}", i + 1),
                    40.0 + i as f64,
                    2.0 + (i % 3) as f64,
                    0.004 * (i as f64 - 5.0),
                )
            })
            .collect();
        let mut shuffled = days.clone();
        shuffled.reverse();
        shuffled.swap(2, 7);
        let end: NaiveDate = "2020-04-12".parse().unwrap();
        let a = amihud_illiq(&days, end, 10).unwrap();
        let b = amihud_illiq(&shuffled, end, 10).unwrap();
        assert_eq!(a.days_used, b.days_used);
        assert!(((a.illiq - b.illiq) / a.illiq).abs() < 1e-14);
    }

    #[test]
    fn window_with_no_usable_days_errors() {
        let days = two_day_fixture();
        assert!(matches!(
            amihud_illiq(&days, "2021-06-01".parse().unwrap(), 5),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn increasing_one_abs_return_increases_illiq() {
        let mut days = two_day_fixture();
        days.push(day("2020-01-03", 100.0, 10.0, 0.01));
        let end: NaiveDate = "2020-01-03".parse().unwrap();
        let before = amihud_illiq(&days, end, 2).unwrap().illiq;
        days[2].daily_return = 0.05;
        let after = amihud_illiq(&days, end, 2).unwrap().illiq;
        assert!(after > before);
    }

    #[test]
    fn rolling_trace_covers_full_windows_only() {
        let days: Vec<DailyAggregate> = (0..10)
            .map(|i| day(&format!("2020-03-{:02}", i + 1), 10.0, 1.0, 0.01))
            .collect();
        let (points, skipped) = rolling_illiq(&days, 4).unwrap();
        assert!(skipped.is_empty());
        assert_eq!(points.len(), 7);
        assert_eq!(points[0].window_end, "2020-03-04".parse().unwrap());
        assert_eq!(points.last().unwrap().window_end, "2020-03-10".parse().unwrap());
    }

    #[test]
    fn rolling_requires_one_full_window() {
        let days = two_day_fixture();
        assert!(matches!(rolling_illiq(&days, 30), Err(Error::Data(_))));
    }
}
