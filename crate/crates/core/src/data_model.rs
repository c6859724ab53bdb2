//! Ingestion and validation of the four raw inputs (events, weather,
//! epidemic counts, flu incidence) into aligned regional time series.
//!
//! All ingestion is pure given the input bytes: readers in, immutable
//! series out. Hours with no event rows are true zero counts, not
//! missing data; weather gaps are explicit and never silently zeroed.

use crate::timeline::{parse_date, parse_hour, span_hours, HourStamp};
use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation: {0}")]
    Validation(String),
    #[error("weather gap: all stations missing from {from} to {to} ({hours} hours)")]
    WeatherGap { from: HourStamp, to: HourStamp, hours: usize },
    #[error("no common time span across the provided series")]
    EmptyIntersection,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// The four supra-provincial coordination areas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionId {
    Plain,
    Metropolitan,
    Lakes,
    Alps,
}

impl RegionId {
    pub const ALL: [RegionId; 4] = [
        RegionId::Plain,
        RegionId::Metropolitan,
        RegionId::Lakes,
        RegionId::Alps,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RegionId::Plain => "Plain",
            RegionId::Metropolitan => "Metropolitan",
            RegionId::Lakes => "Lakes",
            RegionId::Alps => "Alps",
        }
    }

    pub fn parse(text: &str) -> Option<RegionId> {
        match text.trim().to_ascii_lowercase().as_str() {
            "plain" => Some(RegionId::Plain),
            "metropolitan" => Some(RegionId::Metropolitan),
            "lakes" => Some(RegionId::Lakes),
            "alps" => Some(RegionId::Alps),
            _ => None,
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One coordination area with its member provinces and call-share weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Region {
    pub id: RegionId,
    /// `(province code, call-share weight)`; weights sum to 1.
    pub provinces: Vec<(String, f64)>,
}

impl Region {
    pub fn new(id: RegionId, provinces: Vec<(String, f64)>) -> Result<Self, DataError> {
        if provinces.is_empty() {
            return Err(DataError::Validation(format!("region {id} has no provinces")));
        }
        let mut total = 0.0;
        for (code, w) in &provinces {
            if *w < 0.0 {
                return Err(DataError::Validation(format!(
                    "region {id}: negative weight {w} for province {code}"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(DataError::Validation(format!(
                "region {id}: province weights sum to {total}, expected 1"
            )));
        }
        Ok(Region { id, provinces })
    }

    pub fn weight_of(&self, province: &str) -> Option<f64> {
        self.provinces
            .iter()
            .find(|(code, _)| code == province)
            .map(|(_, w)| *w)
    }
}

/// All four regions, validated to partition the province set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSet {
    pub regions: Vec<Region>,
}

impl RegionSet {
    pub fn get(&self, id: RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }
}

/// Parses the region-weights config: `[RegionName]` section headers
/// followed by `province,weight` rows. When all four regions are present
/// the provinces must partition (no code in two regions).
pub fn load_region_weights<R: BufRead>(reader: R) -> Result<RegionSet, DataError> {
    let mut regions: Vec<(RegionId, Vec<(String, f64)>)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(name) = text.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let id = RegionId::parse(name).ok_or_else(|| DataError::Parse {
                line: lineno,
                msg: format!("unknown region '{name}'"),
            })?;
            if regions.iter().any(|(r, _)| *r == id) {
                return Err(DataError::Parse {
                    line: lineno,
                    msg: format!("duplicate region section '{name}'"),
                });
            }
            regions.push((id, Vec::new()));
            continue;
        }
        if text.eq_ignore_ascii_case("province,weight") {
            continue; // optional header
        }
        let (prov, w) = text.split_once(',').ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: "expected 'province,weight'".into(),
        })?;
        let weight: f64 = w.trim().parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad weight '{w}'"),
        })?;
        let current = regions.last_mut().ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: "weight row before any [Region] section".into(),
        })?;
        current.1.push((prov.trim().to_string(), weight));
    }

    let regions: Vec<Region> = regions
        .into_iter()
        .map(|(id, provs)| Region::new(id, provs))
        .collect::<Result<_, _>>()?;

    if regions.len() == 4 {
        let mut seen: BTreeMap<&str, RegionId> = BTreeMap::new();
        for r in &regions {
            for (code, _) in &r.provinces {
                if let Some(other) = seen.insert(code.as_str(), r.id) {
                    return Err(DataError::Validation(format!(
                        "province {code} appears in both {other} and {}",
                        r.id
                    )));
                }
            }
        }
    }
    Ok(RegionSet { regions })
}

/// Contiguous hourly event counts for one region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventSeries {
    pub region: RegionId,
    pub start: HourStamp,
    pub counts: Vec<u32>,
}

impl EventSeries {
    pub fn new(region: RegionId, start: HourStamp, counts: Vec<u32>) -> Result<Self, DataError> {
        if counts.is_empty() {
            return Err(DataError::Validation("event series must cover at least one hour".into()));
        }
        Ok(EventSeries { region, start, counts })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn end(&self) -> HourStamp {
        self.start.plus_hours(self.counts.len() as i64 - 1)
    }

    pub fn stamp_at(&self, idx: usize) -> HourStamp {
        self.start.plus_hours(idx as i64)
    }

    pub fn index_of(&self, ts: HourStamp) -> Option<usize> {
        let h = ts.hours_since(&self.start);
        if h < 0 || h as usize >= self.counts.len() {
            None
        } else {
            Some(h as usize)
        }
    }

    /// Sums counts per calendar day; only days fully inside the span are
    /// returned.
    pub fn daily_totals(&self) -> Vec<(NaiveDate, u32)> {
        let mut out = Vec::new();
        let mut idx = 0usize;
        // advance to the first midnight
        while idx < self.counts.len() && self.stamp_at(idx).hour() != 0 {
            idx += 1;
        }
        while idx + 24 <= self.counts.len() {
            let date = self.stamp_at(idx).date();
            let total: u32 = self.counts[idx..idx + 24].iter().sum();
            out.push((date, total));
            idx += 24;
        }
        out
    }
}

/// Reads `region,timestamp,count` rows, keeps those matching `region`,
/// sums duplicate hours and zero-fills the gaps in between.
pub fn ingest_events<R: BufRead>(reader: R, region: RegionId) -> Result<EventSeries, DataError> {
    let mut by_hour: BTreeMap<HourStamp, u64> = BTreeMap::new();
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(DataError::Validation("events file is empty".into())),
    };
    if !header.trim().eq_ignore_ascii_case("region,timestamp,count") {
        return Err(DataError::Parse {
            line: 1,
            msg: format!("expected header 'region,timestamp,count', found '{}'", header.trim()),
        });
    }

    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let mut parts = text.splitn(3, ',');
        let (reg, ts, cnt) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(DataError::Parse { line: lineno, msg: "expected 3 fields".into() })
            }
        };
        let row_region = RegionId::parse(reg).ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: format!("unknown region '{reg}'"),
        })?;
        if row_region != region {
            continue;
        }
        let stamp = parse_hour(ts).ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: format!("malformed timestamp '{ts}'"),
        })?;
        let count: i64 = cnt.trim().parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad count '{cnt}'"),
        })?;
        if count < 0 {
            return Err(DataError::Validation(format!(
                "line {lineno}: negative count {count}"
            )));
        }
        *by_hour.entry(stamp).or_insert(0) += count as u64;
    }

    let (&first, _) = by_hour
        .iter()
        .next()
        .ok_or_else(|| DataError::Validation(format!("no event rows for region {region}")))?;
    let (&last, _) = by_hour.iter().next_back().unwrap();
    let n = span_hours(first, last);
    let mut counts = vec![0u32; n];
    for (stamp, total) in by_hour {
        let idx = stamp.hours_since(&first) as usize;
        counts[idx] = u32::try_from(total).map_err(|_| {
            DataError::Validation(format!("count overflow at {stamp}: {total}"))
        })?;
    }
    EventSeries::new(region, first, counts)
}

/// Hourly observations from one weather station. Missing values are
/// explicit; timestamps are strictly increasing.
#[derive(Debug, Clone)]
pub struct WeatherSeries {
    pub station: String,
    pub province: String,
    pub hours: Vec<HourStamp>,
    pub temp_c: Vec<Option<f64>>,
    pub rain_mm: Vec<Option<f64>>,
    pub snow_mm: Vec<Option<f64>>,
}

impl WeatherSeries {
    fn validate(&self) -> Result<(), DataError> {
        for pair in self.hours.windows(2) {
            if pair[1] <= pair[0] {
                return Err(DataError::Validation(format!(
                    "station {}: timestamps not strictly increasing at {}",
                    self.station, pair[1]
                )));
            }
        }
        Ok(())
    }
}

fn parse_opt_f64(text: &str, lineno: usize, field: &str) -> Result<Option<f64>, DataError> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>().map(Some).map_err(|_| DataError::Parse {
        line: lineno,
        msg: format!("bad {field} value '{t}'"),
    })
}

/// Reads `station,province,timestamp,temp_c,rain_mm,snow_mm` rows into one
/// series per station. Empty numeric fields mean missing.
pub fn ingest_weather<R: BufRead>(reader: R) -> Result<Vec<WeatherSeries>, DataError> {
    let mut by_station: BTreeMap<String, WeatherSeries> = BTreeMap::new();
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(DataError::Validation("weather file is empty".into())),
    };
    if !header
        .trim()
        .eq_ignore_ascii_case("station,province,timestamp,temp_c,rain_mm,snow_mm")
    {
        return Err(DataError::Parse {
            line: 1,
            msg: "expected header 'station,province,timestamp,temp_c,rain_mm,snow_mm'".into(),
        });
    }
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim_end();
        if text.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 6 {
            return Err(DataError::Parse {
                line: lineno,
                msg: format!("expected 6 fields, found {}", parts.len()),
            });
        }
        let stamp = parse_hour(parts[2]).ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: format!("malformed timestamp '{}'", parts[2]),
        })?;
        let temp = parse_opt_f64(parts[3], lineno, "temp_c")?;
        let rain = parse_opt_f64(parts[4], lineno, "rain_mm")?;
        let snow = parse_opt_f64(parts[5], lineno, "snow_mm")?;
        let entry = by_station.entry(parts[0].trim().to_string()).or_insert_with(|| {
            WeatherSeries {
                station: parts[0].trim().to_string(),
                province: parts[1].trim().to_string(),
                hours: Vec::new(),
                temp_c: Vec::new(),
                rain_mm: Vec::new(),
                snow_mm: Vec::new(),
            }
        });
        entry.hours.push(stamp);
        entry.temp_c.push(temp);
        entry.rain_mm.push(rain);
        entry.snow_mm.push(snow);
    }
    let mut out: Vec<WeatherSeries> = by_station.into_values().collect();
    for s in &mut out {
        // rows may arrive unsorted; sort then enforce strict increase
        let mut order: Vec<usize> = (0..s.hours.len()).collect();
        order.sort_by_key(|&i| s.hours[i]);
        let reorder_f = |v: &Vec<Option<f64>>| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        s.temp_c = reorder_f(&s.temp_c);
        s.rain_mm = reorder_f(&s.rain_mm);
        s.snow_mm = reorder_f(&s.snow_mm);
        s.hours = order.iter().map(|&i| s.hours[i]).collect();
        s.validate()?;
    }
    Ok(out)
}

/// Daily region temperature with explicit missing days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyTemperature {
    pub start: NaiveDate,
    pub values: Vec<Option<f64>>,
}

impl DailyTemperature {
    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        let off = (date - self.start).num_days();
        if off < 0 || off as usize >= self.values.len() {
            None
        } else {
            self.values[off as usize]
        }
    }
}

/// Gaps up to this many consecutive hours are linearly interpolated per
/// station; anything longer stays missing and flags the day.
const MAX_INTERP_GAP_HOURS: usize = 6;

fn interpolate_short_gaps(values: &mut [Option<f64>]) {
    let n = values.len();
    let mut i = 0;
    while i < n {
        if values[i].is_some() {
            i += 1;
            continue;
        }
        let gap_start = i;
        while i < n && values[i].is_none() {
            i += 1;
        }
        let gap_len = i - gap_start;
        // only interior gaps, and only short ones
        if gap_start == 0 || i == n || gap_len > MAX_INTERP_GAP_HOURS {
            continue;
        }
        let left = values[gap_start - 1].unwrap();
        let right = values[i].unwrap();
        for (k, slot) in values[gap_start..i].iter_mut().enumerate() {
            let frac = (k + 1) as f64 / (gap_len + 1) as f64;
            *slot = Some(left + frac * (right - left));
        }
    }
}

/// Combines station temperatures into the region's daily series: hourly
/// call-share weighted average over provinces (weights renormalized over
/// the stations present each hour), then the mean over each day's present
/// hours. Days with no usable hour are flagged missing; a run of more
/// than 24 all-missing hours is a hard error.
pub fn aggregate_weather(
    stations: &[WeatherSeries],
    region: &Region,
) -> Result<DailyTemperature, DataError> {
    let relevant: Vec<&WeatherSeries> = stations
        .iter()
        .filter(|s| region.weight_of(&s.province).is_some_and(|w| w > 0.0))
        .collect();
    if relevant.is_empty() {
        return Err(DataError::Validation(format!(
            "no stations with positive weight for region {}",
            region.id
        )));
    }
    for (code, w) in &region.provinces {
        if *w > 0.0 && !relevant.iter().any(|s| &s.province == code) {
            return Err(DataError::Validation(format!(
                "province {code} (weight {w}) has no station data"
            )));
        }
    }

    let first = relevant.iter().map(|s| s.hours[0]).min().unwrap();
    let last = relevant.iter().map(|s| *s.hours.last().unwrap()).max().unwrap();
    let n_hours = span_hours(first, last);

    // dense per-station temperature grids with short gaps filled
    let mut grids: Vec<(f64, Vec<Option<f64>>)> = Vec::with_capacity(relevant.len());
    for s in &relevant {
        let mut grid = vec![None; n_hours];
        for (i, h) in s.hours.iter().enumerate() {
            grid[h.hours_since(&first) as usize] = s.temp_c[i];
        }
        interpolate_short_gaps(&mut grid);
        let per_station_weight = {
            let siblings = relevant.iter().filter(|o| o.province == s.province).count();
            region.weight_of(&s.province).unwrap() / siblings as f64
        };
        grids.push((per_station_weight, grid));
    }

    // hourly weighted means over whatever is present
    let mut hourly = vec![None; n_hours];
    for (t, slot) in hourly.iter_mut().enumerate() {
        let mut wsum = 0.0;
        let mut acc = 0.0;
        for (w, grid) in &grids {
            if let Some(v) = grid[t] {
                wsum += w;
                acc += w * v;
            }
        }
        if wsum > 0.0 {
            *slot = Some(acc / wsum);
        }
    }

    // hard error on long fully-missing runs
    let mut run_start = None;
    for (t, v) in hourly.iter().enumerate() {
        match (v, run_start) {
            (None, None) => run_start = Some(t),
            (Some(_), Some(s)) => {
                if t - s > 24 {
                    return Err(DataError::WeatherGap {
                        from: first.plus_hours(s as i64),
                        to: first.plus_hours(t as i64 - 1),
                        hours: t - s,
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        if n_hours - s > 24 {
            return Err(DataError::WeatherGap {
                from: first.plus_hours(s as i64),
                to: first.plus_hours(n_hours as i64 - 1),
                hours: n_hours - s,
            });
        }
    }

    // collapse to days
    let first_day = first.date();
    let last_day = last.date();
    let n_days = (last_day - first_day).num_days() as usize + 1;
    let mut values = vec![None; n_days];
    for (d, slot) in values.iter_mut().enumerate() {
        let day = first_day + Duration::days(d as i64);
        let mut acc = 0.0;
        let mut count = 0usize;
        for hour in 0..24u32 {
            let stamp = HourStamp::from_ymd_h(day.year(), day.month(), day.day(), hour).unwrap();
            let off = stamp.hours_since(&first);
            if off < 0 || off as usize >= n_hours {
                continue;
            }
            if let Some(v) = hourly[off as usize] {
                acc += v;
                count += 1;
            }
        }
        if count > 0 {
            *slot = Some(acc / count as f64);
        }
    }

    Ok(DailyTemperature { start: first_day, values })
}

/// Daily cumulative positives per province.
#[derive(Debug, Clone)]
pub struct CovidSeries {
    /// province -> (first date, cumulative positives per day)
    pub by_province: BTreeMap<String, (NaiveDate, Vec<u64>)>,
}

impl CovidSeries {
    pub fn first_date(&self) -> Option<NaiveDate> {
        self.by_province.values().map(|(d, _)| *d).min()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.by_province
            .values()
            .map(|(d, v)| *d + Duration::days(v.len() as i64 - 1))
            .max()
    }

    /// Region-level daily new positives: sum the member provinces'
    /// cumulative series, then difference with negative corrections
    /// clamped to zero.
    pub fn region_daily_incidence(&self, region: &Region) -> Option<(NaiveDate, Vec<f64>)> {
        let members: Vec<&(NaiveDate, Vec<u64>)> = region
            .provinces
            .iter()
            .filter_map(|(code, _)| self.by_province.get(code))
            .collect();
        if members.is_empty() {
            return None;
        }
        let start = members.iter().map(|(d, _)| *d).min().unwrap();
        let end = members
            .iter()
            .map(|(d, v)| *d + Duration::days(v.len() as i64 - 1))
            .max()
            .unwrap();
        let n = (end - start).num_days() as usize + 1;
        let mut cumulative = vec![0.0; n];
        for (d0, vals) in members {
            for (i, &v) in vals.iter().enumerate() {
                let off = (*d0 + Duration::days(i as i64) - start).num_days() as usize;
                cumulative[off] += v as f64;
            }
        }
        let mut incidence = vec![0.0; n];
        incidence[0] = cumulative[0].max(0.0);
        for i in 1..n {
            incidence[i] = (cumulative[i] - cumulative[i - 1]).max(0.0);
        }
        Some((start, incidence))
    }
}

/// Reads `date,province,total_positive` rows; dates must be contiguous
/// per province and counts non-negative.
pub fn ingest_covid<R: BufRead>(reader: R) -> Result<CovidSeries, DataError> {
    let mut rows: BTreeMap<String, BTreeMap<NaiveDate, u64>> = BTreeMap::new();
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(DataError::Validation("covid file is empty".into())),
    };
    if !header.trim().eq_ignore_ascii_case("date,province,total_positive") {
        return Err(DataError::Parse {
            line: 1,
            msg: "expected header 'date,province,total_positive'".into(),
        });
    }
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(DataError::Parse { line: lineno, msg: "expected 3 fields".into() });
        }
        let date = parse_date(parts[0]).ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: format!("malformed date '{}'", parts[0]),
        })?;
        let total: i64 = parts[2].trim().parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad total_positive '{}'", parts[2]),
        })?;
        if total < 0 {
            return Err(DataError::Validation(format!(
                "line {lineno}: negative total_positive {total}"
            )));
        }
        rows.entry(parts[1].trim().to_string())
            .or_default()
            .insert(date, total as u64);
    }
    let mut by_province = BTreeMap::new();
    for (prov, days) in rows {
        let first = *days.keys().next().unwrap();
        let last = *days.keys().next_back().unwrap();
        let n = (last - first).num_days() as usize + 1;
        if days.len() != n {
            return Err(DataError::Validation(format!(
                "province {prov}: dates not contiguous ({} of {n} days present)",
                days.len()
            )));
        }
        let vals = days.into_values().collect();
        by_province.insert(prov, (first, vals));
    }
    if by_province.is_empty() {
        return Err(DataError::Validation("covid file has no data rows".into()));
    }
    Ok(CovidSeries { by_province })
}

/// Weekly national flu incidence (cases per 1000).
#[derive(Debug, Clone)]
pub struct FluSeries {
    /// `((iso year, iso week), incidence)` sorted by week.
    pub weeks: Vec<((i32, u32), f64)>,
}

/// A week-to-week jump at least this large starts a new surveillance
/// season; smaller gaps are treated as holes and rejected.
const NEW_SEASON_GAP_WEEKS: i64 = 16;

fn iso_week_thursday(year: i32, week: u32) -> Option<NaiveDate> {
    NaiveDate::from_isoywd_opt(year, week, Weekday::Thu)
}

/// Reads `year,week,incidence` rows.
pub fn ingest_flu<R: BufRead>(reader: R) -> Result<FluSeries, DataError> {
    let mut weeks: BTreeMap<NaiveDate, ((i32, u32), f64)> = BTreeMap::new();
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(DataError::Validation("flu file is empty".into())),
    };
    if !header.trim().eq_ignore_ascii_case("year,week,incidence") {
        return Err(DataError::Parse {
            line: 1,
            msg: "expected header 'year,week,incidence'".into(),
        });
    }
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(DataError::Parse { line: lineno, msg: "expected 3 fields".into() });
        }
        let year: i32 = parts[0].trim().parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad year '{}'", parts[0]),
        })?;
        let week: u32 = parts[1].trim().parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad week '{}'", parts[1]),
        })?;
        let incidence: f64 = parts[2].trim().parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad incidence '{}'", parts[2]),
        })?;
        if incidence < 0.0 {
            return Err(DataError::Validation(format!(
                "line {lineno}: negative incidence {incidence}"
            )));
        }
        let thursday = iso_week_thursday(year, week).ok_or_else(|| DataError::Parse {
            line: lineno,
            msg: format!("invalid iso week {year}-W{week}"),
        })?;
        if weeks.insert(thursday, ((year, week), incidence)).is_some() {
            return Err(DataError::Validation(format!(
                "line {lineno}: duplicate week {year}-W{week}"
            )));
        }
    }
    if weeks.is_empty() {
        return Err(DataError::Validation("flu file has no data rows".into()));
    }
    Ok(FluSeries { weeks: weeks.into_values().collect() })
}

/// Daily flu incidence: weekly values anchored at each week's midpoint
/// (Thursday) and linearly interpolated inside a season, constant at the
/// season edges, zero off-season.
#[derive(Debug, Clone)]
pub struct DailyFlu {
    /// `(season first day, season last day, midpoints with values)`
    seasons: Vec<(NaiveDate, NaiveDate, Vec<(NaiveDate, f64)>)>,
}

impl DailyFlu {
    pub fn value_on(&self, date: NaiveDate) -> f64 {
        for (start, end, mids) in &self.seasons {
            if date < *start || date > *end {
                continue;
            }
            if date <= mids[0].0 {
                return mids[0].1;
            }
            let last = mids.last().unwrap();
            if date >= last.0 {
                return last.1;
            }
            for pair in mids.windows(2) {
                let (d0, v0) = pair[0];
                let (d1, v1) = pair[1];
                if date >= d0 && date <= d1 {
                    let frac = (date - d0).num_days() as f64 / (d1 - d0).num_days() as f64;
                    return v0 + frac * (v1 - v0);
                }
            }
        }
        0.0
    }
}

/// Splits the weekly records into seasons and prepares the daily carrier.
/// Weeks inside one season must be consecutive.
pub fn interpolate_flu(flu: &FluSeries) -> Result<DailyFlu, DataError> {
    if flu.weeks.len() < 2 {
        return Err(DataError::Validation(
            "flu interpolation needs at least two weeks".into(),
        ));
    }
    let mut seasons: Vec<Vec<(NaiveDate, f64)>> = Vec::new();
    let mut current: Vec<(NaiveDate, f64)> = Vec::new();
    for &((year, week), value) in &flu.weeks {
        let thursday = iso_week_thursday(year, week).unwrap();
        if let Some(&(prev, _)) = current.last() {
            let gap_weeks = (thursday - prev).num_days() / 7;
            if gap_weeks >= NEW_SEASON_GAP_WEEKS {
                seasons.push(std::mem::take(&mut current));
            } else if gap_weeks != 1 {
                return Err(DataError::Validation(format!(
                    "flu weeks not contiguous within season: {} then {}",
                    prev, thursday
                )));
            }
        }
        current.push((thursday, value));
    }
    if !current.is_empty() {
        seasons.push(current);
    }
    let seasons = seasons
        .into_iter()
        .map(|mids| {
            // season span runs Monday of the first week to Sunday of the last
            let start = mids.first().unwrap().0 - Duration::days(3);
            let end = mids.last().unwrap().0 + Duration::days(3);
            (start, end, mids)
        })
        .collect();
    Ok(DailyFlu { seasons })
}

/// Hourly coverage of one input source, for alignment checks.
#[derive(Debug, Clone)]
pub struct SourceSpan {
    pub name: String,
    pub first: HourStamp,
    pub last: HourStamp,
    /// human-readable missing ranges inside the span
    pub missing: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AlignmentReport {
    pub common_first: HourStamp,
    pub common_last: HourStamp,
    pub sources: Vec<SourceSpan>,
}

impl AlignmentReport {
    pub fn common_hours(&self) -> usize {
        span_hours(self.common_first, self.common_last)
    }
}

impl fmt::Display for AlignmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "common span: {} .. {} ({} hours)",
            self.common_first,
            self.common_last,
            self.common_hours()
        )?;
        for s in &self.sources {
            writeln!(f, "  {}: {} .. {}", s.name, s.first, s.last)?;
            for m in &s.missing {
                writeln!(f, "    missing: {m}")?;
            }
        }
        Ok(())
    }
}

/// Maximal common hourly span across the provided sources, with
/// per-source missing ranges listed for the report.
pub fn validate_alignment(sources: &[SourceSpan]) -> Result<AlignmentReport, DataError> {
    if sources.is_empty() {
        return Err(DataError::Validation("no series provided for alignment".into()));
    }
    let first = sources.iter().map(|s| s.first).max().unwrap();
    let last = sources.iter().map(|s| s.last).min().unwrap();
    if last < first {
        return Err(DataError::EmptyIntersection);
    }
    Ok(AlignmentReport { common_first: first, common_last: last, sources: sources.to_vec() })
}

pub fn span_of_events(e: &EventSeries) -> SourceSpan {
    SourceSpan {
        name: format!("events[{}]", e.region),
        first: e.start,
        last: e.end(),
        missing: Vec::new(),
    }
}

pub fn span_of_daily_temperature(t: &DailyTemperature) -> SourceSpan {
    let missing = t
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| (t.start + Duration::days(i as i64)).to_string())
        .collect();
    let last_day = t.start + Duration::days(t.values.len() as i64 - 1);
    SourceSpan {
        name: "temperature".into(),
        first: HourStamp::from_ymd_h(t.start.year(), t.start.month(), t.start.day(), 0).unwrap(),
        last: HourStamp::from_ymd_h(last_day.year(), last_day.month(), last_day.day(), 23).unwrap(),
        missing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn events_csv(body: &str) -> String {
        format!("region,timestamp,count\n{body}")
    }

    #[test]
    fn fills_gaps_with_zero() {
        let csv = events_csv("Plain,2020-05-09T00,3\nPlain,2020-05-09T02,1\n");
        let series = ingest_events(Cursor::new(csv), RegionId::Plain).unwrap();
        assert_eq!(series.counts, vec![3, 0, 1]);
        assert_eq!(series.start, HourStamp::from_ymd_h(2020, 5, 9, 0).unwrap());
    }

    #[test]
    fn sums_duplicate_hours() {
        let csv = events_csv("Plain,2020-05-09T07,2\nPlain,2020-05-09T07,5\n");
        let series = ingest_events(Cursor::new(csv), RegionId::Plain).unwrap();
        assert_eq!(series.counts, vec![7]);
    }

    #[test]
    fn unsorted_rows_and_other_regions() {
        let csv = events_csv("Alps,2020-05-09T00,9\nPlain,2020-05-09T01,1\nPlain,2020-05-09T00,2\n");
        let series = ingest_events(Cursor::new(csv), RegionId::Plain).unwrap();
        assert_eq!(series.counts, vec![2, 1]);
    }

    #[test]
    fn malformed_timestamp_names_line() {
        let csv = events_csv("Plain,2020-05-09T00,1\nPlain,not-a-time,2\n");
        let err = ingest_events(Cursor::new(csv), RegionId::Plain).unwrap_err();
        match err {
            DataError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn negative_count_rejected() {
        let csv = events_csv("Plain,2020-05-09T00,-1\n");
        assert!(matches!(
            ingest_events(Cursor::new(csv), RegionId::Plain),
            Err(DataError::Validation(_))
        ));
    }

    #[test]
    fn span_matches_independent_calendar_count() {
        // random-ish scattered rows over several years; expected length is
        // recomputed by stepping one hour at a time
        let mut body = String::new();
        let stamps = [
            (2015, 2, 3, 5),
            (2016, 7, 1, 0),
            (2017, 12, 31, 23),
            (2019, 6, 15, 12),
            (2021, 1, 9, 8),
        ];
        for (y, m, d, h) in stamps {
            body.push_str(&format!("Plain,{y:04}-{m:02}-{d:02}T{h:02},1\n"));
        }
        let series = ingest_events(Cursor::new(events_csv(&body)), RegionId::Plain).unwrap();

        let first = HourStamp::from_ymd_h(2015, 2, 3, 5).unwrap();
        let last = HourStamp::from_ymd_h(2021, 1, 9, 8).unwrap();
        let mut walked = 1usize;
        let mut cursor = first;
        while cursor < last {
            cursor = cursor.plus_hours(1);
            walked += 1;
        }
        assert_eq!(series.len(), walked);
    }

    #[test]
    fn gap_free_law_holds() {
        let csv = events_csv("Plain,2020-05-09T00,1\nPlain,2020-05-12T17,4\n");
        let series = ingest_events(Cursor::new(csv), RegionId::Plain).unwrap();
        assert_eq!(series.len(), span_hours(series.start, series.end()));
        assert_eq!(series.counts.iter().filter(|&&c| c > 0).count(), 2);
    }

    fn region(provs: &[(&str, f64)]) -> Region {
        Region::new(
            RegionId::Plain,
            provs.iter().map(|(c, w)| (c.to_string(), *w)).collect(),
        )
        .unwrap()
    }

    fn constant_station(name: &str, prov: &str, day: NaiveDate, temps: &[Option<f64>]) -> WeatherSeries {
        WeatherSeries {
            station: name.into(),
            province: prov.into(),
            hours: (0..temps.len())
                .map(|h| {
                    HourStamp::from_ymd_h(day.year(), day.month(), day.day(), 0)
                        .unwrap()
                        .plus_hours(h as i64)
                })
                .collect(),
            temp_c: temps.to_vec(),
            rain_mm: vec![None; temps.len()],
            snow_mm: vec![None; temps.len()],
        }
    }

    #[test]
    fn weighted_mean_of_two_provinces() {
        let day = NaiveDate::from_ymd_opt(2020, 5, 9).unwrap();
        let a = constant_station("sa", "PA", day, &vec![Some(20.0); 24]);
        let b = constant_station("sb", "PB", day, &vec![Some(16.0); 24]);
        let reg = region(&[("PA", 0.75), ("PB", 0.25)]);
        let daily = aggregate_weather(&[a, b], &reg).unwrap();
        assert!((daily.values[0].unwrap() - 19.0).abs() < 1e-12);
    }

    #[test]
    fn single_station_daily_mean() {
        let day = NaiveDate::from_ymd_opt(2020, 5, 9).unwrap();
        let temps: Vec<Option<f64>> = (0..24).map(|h| Some(h as f64)).collect();
        let s = constant_station("s", "PA", day, &temps);
        let reg = region(&[("PA", 1.0)]);
        let daily = aggregate_weather(&[s], &reg).unwrap();
        assert!((daily.values[0].unwrap() - 11.5).abs() < 1e-12);
    }

    #[test]
    fn missing_hours_match_brute_force() {
        let day = NaiveDate::from_ymd_opt(2020, 5, 9).unwrap();
        let mut temps_a: Vec<Option<f64>> = (0..24).map(|h| Some(10.0 + h as f64 * 0.3)).collect();
        // 3 missing hours, far apart so no interpolation bridges them all
        temps_a[2] = None;
        temps_a[11] = None;
        temps_a[19] = None;
        let temps_b: Vec<Option<f64>> = (0..24).map(|h| Some(8.0 + h as f64 * 0.1)).collect();
        let a = constant_station("sa", "PA", day, &temps_a);
        let b = constant_station("sb", "PB", day, &temps_b);
        let reg = region(&[("PA", 0.6), ("PB", 0.4)]);
        let daily = aggregate_weather(&[a.clone(), b.clone()], &reg).unwrap();

        // brute force: single missing hours get linearly interpolated, then
        // weighted per hour over present stations, then averaged over hours
        let mut expect = 0.0;
        let mut hours = 0.0;
        for h in 0..24usize {
            let va = match h {
                2 => Some((temps_a[1].unwrap() + temps_a[3].unwrap()) / 2.0),
                11 => Some((temps_a[10].unwrap() + temps_a[12].unwrap()) / 2.0),
                19 => Some((temps_a[18].unwrap() + temps_a[20].unwrap()) / 2.0),
                _ => temps_a[h],
            };
            let vb = temps_b[h];
            let v = match (va, vb) {
                (Some(x), Some(y)) => (0.6 * x + 0.4 * y) / 1.0,
                (None, Some(y)) => y,
                (Some(x), None) => x,
                (None, None) => continue,
            };
            expect += v;
            hours += 1.0;
        }
        expect /= hours;
        assert!((daily.values[0].unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn splitting_a_station_weight_changes_nothing() {
        let day = NaiveDate::from_ymd_opt(2020, 5, 9).unwrap();
        let temps: Vec<Option<f64>> = (0..48).map(|h| Some((h % 17) as f64)).collect();
        let other: Vec<Option<f64>> = (0..48).map(|h| Some(5.0 + (h % 5) as f64)).collect();

        let reg1 = region(&[("PA", 0.7), ("PB", 0.3)]);
        let one = aggregate_weather(
            &[
                constant_station("sa", "PA", day, &temps),
                constant_station("sb", "PB", day, &other),
            ],
            &reg1,
        )
        .unwrap();

        let reg2 = region(&[("PA1", 0.35), ("PA2", 0.35), ("PB", 0.3)]);
        let two = aggregate_weather(
            &[
                constant_station("sa1", "PA1", day, &temps),
                constant_station("sa2", "PA2", day, &temps),
                constant_station("sb", "PB", day, &other),
            ],
            &reg2,
        )
        .unwrap();

        for (x, y) in one.values.iter().zip(two.values.iter()) {
            assert!((x.unwrap() - y.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn long_all_missing_gap_is_hard_error() {
        let day = NaiveDate::from_ymd_opt(2020, 5, 9).unwrap();
        let mut temps: Vec<Option<f64>> = vec![Some(10.0); 72];
        for slot in temps.iter_mut().take(24 + 26).skip(24) {
            *slot = None; // 26 consecutive missing hours
        }
        let s = constant_station("s", "PA", day, &temps);
        let reg = region(&[("PA", 1.0)]);
        let err = aggregate_weather(&[s], &reg).unwrap_err();
        assert!(matches!(err, DataError::WeatherGap { hours: 26, .. }));
    }

    #[test]
    fn flu_midpoint_values_are_exact() {
        let flu = FluSeries {
            weeks: vec![((2020, 2), 2.0), ((2020, 3), 4.0), ((2020, 4), 1.0)],
        };
        let daily = interpolate_flu(&flu).unwrap();
        for ((y, w), v) in &flu.weeks {
            let thursday = iso_week_thursday(*y, *w).unwrap();
            assert!((daily.value_on(thursday) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn flu_interpolates_linearly_between_midpoints() {
        let flu = FluSeries { weeks: vec![((2020, 2), 2.0), ((2020, 3), 4.0)] };
        let daily = interpolate_flu(&flu).unwrap();
        let t0 = iso_week_thursday(2020, 2).unwrap();
        for k in 0..=7 {
            let expect = 2.0 + 2.0 * k as f64 / 7.0;
            assert!((daily.value_on(t0 + Duration::days(k)) - expect).abs() < 1e-12);
        }
        // the two days straddling the midpoint of the midpoints average to 3.0
        let a = daily.value_on(t0 + Duration::days(3));
        let b = daily.value_on(t0 + Duration::days(4));
        assert!(((a + b) / 2.0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn flu_constant_season_and_off_season() {
        let flu = FluSeries {
            weeks: vec![((2019, 50), 1.5), ((2019, 51), 1.5), ((2019, 52), 1.5)],
        };
        let daily = interpolate_flu(&flu).unwrap();
        let start = iso_week_thursday(2019, 50).unwrap() - Duration::days(3);
        let end = iso_week_thursday(2019, 52).unwrap() + Duration::days(3);
        let mut d = start;
        while d <= end {
            assert!((daily.value_on(d) - 1.5).abs() < 1e-12, "day {d}");
            d += Duration::days(1);
        }
        assert_eq!(daily.value_on(NaiveDate::from_ymd_opt(2020, 7, 1).unwrap()), 0.0);
    }

    #[test]
    fn flu_rejects_hole_within_season() {
        let flu = FluSeries { weeks: vec![((2020, 2), 2.0), ((2020, 4), 4.0)] };
        assert!(interpolate_flu(&flu).is_err());
    }

    #[test]
    fn flu_seasons_split_on_long_gap() {
        let flu = FluSeries {
            weeks: vec![((2019, 51), 1.0), ((2019, 52), 2.0), ((2020, 42), 3.0), ((2020, 43), 4.0)],
        };
        let daily = interpolate_flu(&flu).unwrap();
        // off-season day between the two seasons
        assert_eq!(daily.value_on(NaiveDate::from_ymd_opt(2020, 6, 1).unwrap()), 0.0);
        assert!(daily.value_on(iso_week_thursday(2020, 42).unwrap()) > 0.0);
    }

    #[test]
    fn covid_incidence_clamps_corrections() {
        let csv = "date,province,total_positive\n2020-03-01,PA,10\n2020-03-02,PA,8\n2020-03-03,PA,15\n";
        let covid = ingest_covid(Cursor::new(csv)).unwrap();
        let reg = region(&[("PA", 1.0)]);
        let (start, inc) = covid.region_daily_incidence(&reg).unwrap();
        assert_eq!(start, NaiveDate::from_ymd_opt(2020, 3, 1).unwrap());
        assert_eq!(inc, vec![10.0, 0.0, 7.0]);
    }

    #[test]
    fn covid_rejects_negative_and_gaps() {
        let neg = "date,province,total_positive\n2020-03-01,PA,-4\n";
        assert!(ingest_covid(Cursor::new(neg)).is_err());
        let gap = "date,province,total_positive\n2020-03-01,PA,1\n2020-03-03,PA,2\n";
        assert!(ingest_covid(Cursor::new(gap)).is_err());
    }

    #[test]
    fn alignment_intersects_spans() {
        let events = SourceSpan {
            name: "events".into(),
            first: HourStamp::from_ymd_h(2015, 1, 1, 0).unwrap(),
            last: HourStamp::from_ymd_h(2021, 5, 9, 23).unwrap(),
            missing: vec![],
        };
        let covid = SourceSpan {
            name: "covid".into(),
            first: HourStamp::from_ymd_h(2020, 2, 24, 0).unwrap(),
            last: HourStamp::from_ymd_h(2021, 5, 9, 23).unwrap(),
            missing: vec![],
        };
        let report = validate_alignment(&[events.clone(), covid]).unwrap();
        assert_eq!(report.common_first, HourStamp::from_ymd_h(2020, 2, 24, 0).unwrap());

        let identical = validate_alignment(&[events.clone(), events.clone()]).unwrap();
        assert_eq!(identical.common_first, events.first);
        assert_eq!(identical.common_last, events.last);
    }

    #[test]
    fn alignment_staggered_matches_brute_force() {
        let mk = |y: i32, m: u32, d: u32, y2: i32, m2: u32, d2: u32| SourceSpan {
            name: "s".into(),
            first: HourStamp::from_ymd_h(y, m, d, 0).unwrap(),
            last: HourStamp::from_ymd_h(y2, m2, d2, 23).unwrap(),
            missing: vec![],
        };
        let spans = [
            mk(2020, 1, 1, 2021, 3, 1),
            mk(2020, 2, 15, 2021, 5, 9),
            mk(2019, 12, 1, 2021, 1, 20),
        ];
        let report = validate_alignment(&spans).unwrap();

        // brute force: scan hours and keep those covered by all spans
        let mut t = spans[2].first;
        let mut first = None;
        let mut last = None;
        while t <= spans[1].last {
            if spans.iter().all(|s| s.first <= t && t <= s.last) {
                if first.is_none() {
                    first = Some(t);
                }
                last = Some(t);
            }
            t = t.plus_hours(1);
        }
        assert_eq!(report.common_first, first.unwrap());
        assert_eq!(report.common_last, last.unwrap());
    }

    #[test]
    fn alignment_empty_intersection_is_error() {
        let a = SourceSpan {
            name: "a".into(),
            first: HourStamp::from_ymd_h(2020, 1, 1, 0).unwrap(),
            last: HourStamp::from_ymd_h(2020, 1, 2, 0).unwrap(),
            missing: vec![],
        };
        let b = SourceSpan {
            name: "b".into(),
            first: HourStamp::from_ymd_h(2021, 1, 1, 0).unwrap(),
            last: HourStamp::from_ymd_h(2021, 1, 2, 0).unwrap(),
            missing: vec![],
        };
        assert!(matches!(validate_alignment(&[a, b]), Err(DataError::EmptyIntersection)));
    }

    #[test]
    fn region_weights_partition_check() {
        let good = "[Plain]\nPA,0.6\nPB,0.4\n[Metropolitan]\nMI,1.0\n[Lakes]\nCO,1.0\n[Alps]\nSO,1.0\n";
        let set = load_region_weights(Cursor::new(good)).unwrap();
        assert_eq!(set.regions.len(), 4);
        assert_eq!(set.get(RegionId::Plain).unwrap().provinces.len(), 2);

        let dup = "[Plain]\nPA,1.0\n[Metropolitan]\nPA,1.0\n[Lakes]\nCO,1.0\n[Alps]\nSO,1.0\n";
        assert!(load_region_weights(Cursor::new(dup)).is_err());

        let bad_sum = "[Plain]\nPA,0.5\nPB,0.4\n";
        assert!(load_region_weights(Cursor::new(bad_sum)).is_err());
    }

    #[test]
    fn daily_totals_skip_partial_days() {
        let start = HourStamp::from_ymd_h(2020, 5, 9, 5).unwrap();
        let counts: Vec<u32> = (0..72).map(|i| (i % 3) as u32).collect();
        let series = EventSeries::new(RegionId::Plain, start, counts.clone()).unwrap();
        let days = series.daily_totals();
        // first full day starts at hour 19 of counts (2020-05-10T00)
        assert_eq!(days.len(), 2);
        assert_eq!(days[0].0, NaiveDate::from_ymd_opt(2020, 5, 10).unwrap());
        let expect: u32 = counts[19..43].iter().sum();
        assert_eq!(days[0].1, expect);
    }
}
