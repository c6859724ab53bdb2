//! Hour-resolution time arithmetic shared by ingestion, feature
//! construction and forecasting.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A timestamp truncated to the hour. Wraps `NaiveDateTime` so that hour
/// arithmetic and formatting stay consistent across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HourStamp(NaiveDateTime);

impl HourStamp {
    pub fn new(dt: NaiveDateTime) -> Self {
        HourStamp(dt.with_minute(0).unwrap().with_second(0).unwrap().with_nanosecond(0).unwrap())
    }

    pub fn from_ymd_h(year: i32, month: u32, day: u32, hour: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, 0, 0))
            .map(HourStamp)
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date()
    }

    pub fn hour(&self) -> u32 {
        self.0.hour()
    }

    /// 1 = Monday ... 7 = Sunday.
    pub fn weekday_mon1(&self) -> u32 {
        self.0.weekday().number_from_monday()
    }

    pub fn quarter(&self) -> u32 {
        (self.0.month() - 1) / 3 + 1
    }

    pub fn plus_hours(&self, h: i64) -> Self {
        HourStamp(self.0 + Duration::hours(h))
    }

    /// Signed number of hours from `earlier` to `self`.
    pub fn hours_since(&self, earlier: &HourStamp) -> i64 {
        (self.0 - earlier.0).num_hours()
    }

    pub fn inner(&self) -> NaiveDateTime {
        self.0
    }
}

impl fmt::Display for HourStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%dT%H"))
    }
}

/// Accepted timestamp layouts; anything below hour resolution is truncated.
const TS_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

pub fn parse_hour(text: &str) -> Option<HourStamp> {
    let trimmed = text.trim();
    // bare hour form first: 2020-05-09T07
    if let Some((d, h)) = trimmed.split_once('T') {
        if h.len() <= 2 {
            if let (Ok(date), Ok(hour)) = (NaiveDate::parse_from_str(d, "%Y-%m-%d"), h.parse::<u32>()) {
                return date.and_hms_opt(hour, 0, 0).map(HourStamp);
            }
        }
    }
    for fmt in TS_FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(trimmed, fmt) {
            return Some(HourStamp::new(dt));
        }
    }
    None
}

pub fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()
}

/// Number of hours in the inclusive span `[first, last]`, or 0 when the
/// span is empty.
pub fn span_hours(first: HourStamp, last: HourStamp) -> usize {
    let h = last.hours_since(&first);
    if h < 0 {
        0
    } else {
        h as usize + 1
    }
}
