//! Reading catchment series and static attributes from disk.
//!
//! Series live in one file per catchment and variable, `<id>_<variable>.csv`,
//! with a `date,value` header. Temperature is the mean of the `tmin` and
//! `tmax` files; precipitation is read from `prcp` and streamflow from
//! `streamflow`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::records::{CatchmentRecord, N_STATIC, STATIC_ATTRIBUTES};
use crate::engine::{extract_batch, Exclusion, FailurePolicy, FeatureConfig, FeatureRow, FeatureVector, SeriesTask};
use crate::error::DataError;
use crate::series::{TimeSeries, VariableKind, DAYS_PER_YEAR};

/// File suffixes of the four raw inputs per catchment.
pub const SERIES_FILES: [&str; 4] = ["tmin", "tmax", "prcp", "streamflow"];

const MISSING_TOKENS: [&str; 4] = ["", "NA", "NaN", "nan"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Drop every 29 February so each year has exactly 365 days.
    pub drop_leap_days: bool,
    /// Attribute file carries raw elevation, slope and area; apply log10 on load.
    pub log_transform_attributes: bool,
    pub period: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(1980, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2013, 12, 31).expect("valid date"),
            drop_leap_days: true,
            log_transform_attributes: false,
            period: DAYS_PER_YEAR,
        }
    }
}

impl IngestConfig {
    /// The calendar of the analysis window after the leap-day rule.
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.start
            .iter_days()
            .take_while(|d| *d <= self.end)
            .filter(|d| !(self.drop_leap_days && d.month() == 2 && d.day() == 29))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadedDataset {
    pub records: Vec<CatchmentRecord>,
    pub exclusions: Vec<Exclusion>,
}

/// Reads a `date,value` file. Missing tokens become NaN; malformed rows are errors.
pub fn read_series_file(path: &Path) -> Result<Vec<(NaiveDate, f64)>, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_series(&text, path)
}

fn parse_series(text: &str, path: &Path) -> Result<Vec<(NaiveDate, f64)>, DataError> {
    let parse_err = |line: usize, message: String| DataError::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case("date,value") => {}
        Some((_, h)) => return Err(parse_err(1, format!("expected header `date,value`, found `{h}`"))),
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (date, value) = line
            .split_once(',')
            .ok_or_else(|| parse_err(line_no, format!("expected two fields in `{line}`")))?;
        let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
            .map_err(|e| parse_err(line_no, format!("bad date `{}`: {e}", date.trim())))?;
        let value = value.trim();
        let value = if MISSING_TOKENS.contains(&value) {
            f64::NAN
        } else {
            value
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("bad value `{value}`")))?
        };
        out.push((date, value));
    }
    Ok(out)
}

/// Aligns observations to the window calendar; returns the first missing date on failure.
fn align(obs: &[(NaiveDate, f64)], dates: &[NaiveDate]) -> Result<Vec<f64>, NaiveDate> {
    let by_date: HashMap<NaiveDate, f64> = obs.iter().copied().collect();
    dates
        .iter()
        .map(|d| match by_date.get(d) {
            Some(v) if v.is_finite() => Ok(*v),
            _ => Err(*d),
        })
        .collect()
}

/// Static attributes keyed by catchment id; `None` marks an incomplete row.
pub type AttributeTable = BTreeMap<String, Result<[f64; N_STATIC], String>>;

/// Reads the attributes table (`;` or `,` delimited, detected from the header).
pub fn read_attributes(path: &Path, log_transform: bool) -> Result<AttributeTable, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_attributes(&text, path, log_transform)
}

fn parse_attributes(text: &str, path: &Path, log_transform: bool) -> Result<AttributeTable, DataError> {
    let header = text.lines().next().unwrap_or_default();
    let delimiter = if header.contains(';') { b';' } else { b',' };
    let mut rd = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rd
        .headers()
        .map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let position = |name: &str| headers.iter().position(|h| h.trim_start_matches('\u{feff}') == name);
    let id_col = position("catchment_id")
        .or_else(|| position("gauge_id"))
        .ok_or_else(|| DataError::UnknownAttribute("catchment_id".into()))?;

    let mut columns = [(0usize, false); N_STATIC];
    for (slot, name) in columns.iter_mut().zip(STATIC_ATTRIBUTES) {
        let raw = name.strip_prefix("log_");
        *slot = match (position(name), raw.and_then(|r| position(r))) {
            (_, Some(j)) if log_transform => (j, true),
            (Some(j), _) => (j, false),
            _ => return Err(DataError::UnknownAttribute(name.to_string())),
        };
    }

    let mut table = AttributeTable::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let id = rec.get(id_col).unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(DataError::Parse {
                path: path.to_path_buf(),
                line,
                message: "empty catchment id".into(),
            });
        }
        let mut values = [0.0; N_STATIC];
        let mut problem = None;
        for (k, &(j, take_log)) in columns.iter().enumerate() {
            let field = rec.get(j).unwrap_or_default();
            if MISSING_TOKENS.contains(&field) {
                problem.get_or_insert_with(|| format!("attribute `{}` missing", STATIC_ATTRIBUTES[k]));
                continue;
            }
            let v: f64 = field.parse().map_err(|_| DataError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("bad number `{field}` for `{}`", headers.get(j).unwrap_or_default()),
            })?;
            let v = if take_log { v.log10() } else { v };
            if !v.is_finite() {
                problem.get_or_insert_with(|| format!("attribute `{}` is not finite", STATIC_ATTRIBUTES[k]));
            }
            values[k] = v;
        }
        if table.contains_key(&id) {
            return Err(DataError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate catchment id `{id}`"),
            });
        }
        table.insert(id, problem.map_or(Ok(values), Err));
    }
    Ok(table)
}

fn series_path(dir: &Path, id: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{id}_{suffix}.csv"))
}

/// Builds the three analysis series for one catchment, or the reason it is incomplete.
fn catchment_series(
    dir: &Path,
    id: &str,
    config: &IngestConfig,
    dates: &[NaiveDate],
) -> Result<Result<[TimeSeries; 3], String>, DataError> {
    let mut raw = Vec::with_capacity(SERIES_FILES.len());
    for suffix in SERIES_FILES {
        let path = series_path(dir, id, suffix);
        if !path.is_file() {
            return Ok(Err(format!("missing series file {}", path.display())));
        }
        match align(&read_series_file(&path)?, dates) {
            Ok(v) => raw.push(v),
            Err(day) => return Ok(Err(format!("{suffix} series incomplete: no value for {day}"))),
        }
    }
    let streamflow = raw.pop().expect("four series");
    let prcp = raw.pop().expect("four series");
    let tmax = raw.pop().expect("four series");
    let tmin = raw.pop().expect("four series");
    let temperature = tmin.iter().zip(&tmax).map(|(a, b)| (a + b) / 2.0).collect();
    let make = |values, kind| TimeSeries::new(values, config.start, config.period, kind);
    Ok(Ok([
        make(temperature, VariableKind::Temperature),
        make(prcp, VariableKind::Precipitation),
        make(streamflow, VariableKind::Streamflow),
    ]))
}

/// Ids that have at least one series file in `dir`.
fn series_ids(dir: &Path) -> Result<BTreeSet<String>, DataError> {
    let mut ids = BTreeSet::new();
    for entry in fs::read_dir(dir).map_err(|e| DataError::io(dir, e))? {
        let entry = entry.map_err(|e| DataError::io(dir, e))?;
        let name = entry.file_name();
        let Some(stem) = name.to_str().and_then(|n| n.strip_suffix(".csv")) else {
            continue;
        };
        if let Some(id) = SERIES_FILES
            .iter()
            .find_map(|s| stem.strip_suffix(s).and_then(|p| p.strip_suffix('_')))
        {
            ids.insert(id.to_string());
        }
    }
    Ok(ids)
}

/// Loads every complete catchment, extracts its features and reports the rest.
///
/// Under [`FailurePolicy::Strict`] the first incomplete catchment or failed
/// extraction is an error; under `Drop` it becomes an exclusion.
pub fn load_dataset(
    series_dir: &Path,
    attributes_file: &Path,
    ingest: &IngestConfig,
    features: &FeatureConfig,
    policy: FailurePolicy,
    workers: usize,
) -> Result<LoadedDataset, DataError> {
    if !series_dir.is_dir() {
        return Err(DataError::io(
            series_dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "series directory not found"),
        ));
    }
    let attributes = read_attributes(attributes_file, ingest.log_transform_attributes)?;
    let dates = ingest.dates();
    let mut exclusions = Vec::new();
    let mut exclude = |id: &str, reason: String| -> Result<(), DataError> {
        if policy == FailurePolicy::Strict {
            return Err(DataError::IncompleteRecord {
                catchment: id.to_string(),
                reason,
            });
        }
        warn!("excluding catchment {id}: {reason}");
        exclusions.push(Exclusion {
            catchment_id: id.to_string(),
            variable: None,
            reason,
        });
        Ok(())
    };

    for id in series_ids(series_dir)? {
        if !attributes.contains_key(&id) {
            exclude(&id, "no row in attributes file".into())?;
        }
    }

    let mut statics = BTreeMap::new();
    let mut tasks = Vec::new();
    for (id, attrs) in &attributes {
        let values = match attrs {
            Ok(v) => *v,
            Err(reason) => {
                exclude(id, reason.clone())?;
                continue;
            }
        };
        match catchment_series(series_dir, id, ingest, &dates)? {
            Ok(series) => {
                statics.insert(id.clone(), values);
                tasks.extend(series.into_iter().map(|series| SeriesTask {
                    catchment_id: id.clone(),
                    series,
                }));
            }
            Err(reason) => exclude(id, reason)?,
        }
    }
    info!("extracting features for {} catchments", statics.len());

    let batch = extract_batch(&tasks, features, policy, workers).map_err(|e| {
        let first = e.failures.first().cloned();
        DataError::IncompleteRecord {
            catchment: first.as_ref().map_or_else(String::new, |f| f.catchment_id.clone()),
            reason: e.to_string(),
        }
    })?;
    let failed: BTreeSet<&str> = batch.exclusions.iter().map(|e| e.catchment_id.as_str()).collect();
    let mut by_id: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for row in &batch.rows {
        by_id.entry(row.catchment_id.as_str()).or_default().push(row);
    }

    let mut records = Vec::new();
    for (id, static_attributes) in &statics {
        if failed.contains(id.as_str()) {
            continue;
        }
        let rows = by_id.get(id.as_str()).map(Vec::as_slice).unwrap_or_default();
        let pick = |kind| rows.iter().find(|r| r.variable == kind).map(|r| r.features.clone());
        let (Some(temperature), Some(precipitation), Some(streamflow)) = (
            pick(VariableKind::Temperature),
            pick(VariableKind::Precipitation),
            pick(VariableKind::Streamflow),
        ) else {
            continue;
        };
        records.push(CatchmentRecord {
            catchment_id: id.clone(),
            static_attributes: *static_attributes,
            temperature,
            precipitation,
            streamflow,
        });
    }
    exclusions.extend(batch.exclusions);
    exclusions.sort();
    Ok(LoadedDataset { records, exclusions })
}

/// Rebuilds records from a saved feature table and an attributes table.
///
/// Catchments lacking attributes or any of the three feature rows are
/// returned as exclusions.
pub fn records_from_table(rows: &[FeatureRow], attributes: &AttributeTable) -> (Vec<CatchmentRecord>, Vec<Exclusion>) {
    let mut by_id: BTreeMap<&str, [Option<FeatureVector>; 3]> = BTreeMap::new();
    for row in rows {
        let slot = VariableKind::ALL.iter().position(|k| *k == row.variable).expect("known variable");
        by_id.entry(row.catchment_id.as_str()).or_default()[slot] = Some(row.features.clone());
    }
    let mut records = Vec::new();
    let mut exclusions = Vec::new();
    let mut exclude = |id: &str, reason: String| {
        exclusions.push(Exclusion {
            catchment_id: id.to_string(),
            variable: None,
            reason,
        })
    };
    for (id, features) in by_id {
        let attrs = match attributes.get(id) {
            Some(Ok(a)) => *a,
            Some(Err(reason)) => {
                exclude(id, reason.clone());
                continue;
            }
            None => {
                exclude(id, "no row in attributes file".into());
                continue;
            }
        };
        match features {
            [Some(t), Some(p), Some(q)] => records.push(CatchmentRecord {
                catchment_id: id.to_string(),
                static_attributes: attrs,
                temperature: t,
                precipitation: p,
                streamflow: q,
            }),
            _ => exclude(id, "feature table lacks one of the three variables".into()),
        }
    }
    exclusions.sort();
    (records, exclusions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_has_12410_days_without_leap_days() {
        let cfg = IngestConfig::default();
        let dates = cfg.dates();
        assert_eq!(dates.len(), 34 * 365);
        assert!(dates.iter().all(|d| !(d.month() == 2 && d.day() == 29)));
        let keep = IngestConfig {
            drop_leap_days: false,
            ..cfg
        };
        // 1980..2013 contains nine leap years.
        assert_eq!(keep.dates().len(), 34 * 365 + 9);
    }

    #[test]
    fn parse_series_handles_missing_and_reports_line() {
        let p = Path::new("x_prcp.csv");
        let s = parse_series("date,value\n2000-01-01,1.5\n2000-01-02,NA\n", p).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s[1].1.is_nan());
        match parse_series("date,value\n2000-01-01,1\n2000-13-01,2\n", p) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_series("day,q\n", p),
            Err(DataError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn align_detects_gaps() {
        let d = |m, day| NaiveDate::from_ymd_opt(2001, m, day).unwrap();
        let dates = vec![d(1, 1), d(1, 2), d(1, 3)];
        let obs = vec![(d(1, 3), 3.0), (d(1, 1), 1.0), (d(1, 2), 2.0), (d(1, 4), 4.0)];
        assert_eq!(align(&obs, &dates).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(align(&obs[..2], &dates), Err(d(1, 2)));
    }

    fn header(names: &[&str], sep: &str) -> String {
        let mut h = vec!["catchment_id"];
        h.extend(names);
        h.join(sep)
    }

    #[test]
    fn attributes_semicolon_and_extra_columns() {
        let mut names: Vec<&str> = STATIC_ATTRIBUTES.to_vec();
        names.push("p_mean");
        let row: Vec<String> = (0..names.len()).map(|i| i.to_string()).collect();
        let text = format!("{}\n01013500;{}\n", header(&names, ";"), row.join(";"));
        let table = parse_attributes(&text, Path::new("a.txt"), false).unwrap();
        let v = table["01013500"].as_ref().unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[18], 18.0);
    }

    #[test]
    fn attributes_missing_column_and_log_switch() {
        let names: Vec<&str> = STATIC_ATTRIBUTES[1..].to_vec();
        let row = vec!["1"; names.len()].join(",");
        let text = format!("{}\na,{row}\n", header(&names, ","));
        match parse_attributes(&text, Path::new("a.csv"), false) {
            Err(DataError::UnknownAttribute(n)) => assert_eq!(n, "log_elev_mean"),
            other => panic!("unexpected {other:?}"),
        }

        let mut raw: Vec<&str> = vec!["elev_mean", "slope_mean", "area_gages2"];
        raw.extend(&STATIC_ATTRIBUTES[3..]);
        let mut vals = vec!["1000", "10", "100"];
        vals.extend(vec!["0.5"; 16]);
        let text = format!("{}\nb,{}\n", header(&raw, ","), vals.join(","));
        let table = parse_attributes(&text, Path::new("a.csv"), true).unwrap();
        let v = table["b"].as_ref().unwrap();
        assert!((v[0] - 3.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12 && (v[2] - 2.0).abs() < 1e-12);
        assert_eq!(v[3], 0.5);
    }

    #[test]
    fn attributes_with_gap_are_marked_incomplete() {
        let row = {
            let mut r = vec!["1"; N_STATIC];
            r[4] = "NA";
            r.join(",")
        };
        let text = format!("{}\nc,{row}\n", header(&STATIC_ATTRIBUTES, ","));
        let table = parse_attributes(&text, Path::new("a.csv"), false).unwrap();
        assert!(table["c"].as_ref().unwrap_err().contains("lai_max"));
    }
}
