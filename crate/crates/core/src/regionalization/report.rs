//! Plain-text outputs of the analyses and their readers.
//!
//! Every writer emits numbers in shortest round-trip form, so reading a file
//! back and writing it again reproduces it byte for byte.

use std::io::{Read, Write};

use super::correlation::CorrelationMatrix;
use super::summary::FeatureSummary;
use super::validation::{EvaluationReport, PredictedObserved, TargetImportance};
use crate::engine::{csv_err, Exclusion};
use crate::error::DataError;
use crate::forest::ImportanceReport;
use crate::series::VariableKind;

/// Marker for correlations that are undefined because a column is constant.
pub const UNDEFINED: &str = "undefined";

fn check_header(rd: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), DataError> {
    let header = rd.headers().map_err(csv_err)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(DataError::Format(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn number(field: &str, line: usize) -> Result<f64, DataError> {
    field
        .parse()
        .map_err(|_| DataError::Format(format!("line {line}: bad number `{field}`")))
}

fn flush<W: Write>(mut wr: csv::Writer<W>) -> Result<(), DataError> {
    wr.flush().map_err(|e| DataError::Format(e.to_string()))
}

const CORRELATION_HEADER: [&str; 3] = ["predictor", "target", "rho"];

/// Long format, predictor-major: one `predictor,target,rho` row per cell.
pub fn write_correlations<W: Write>(m: &CorrelationMatrix, w: W) -> Result<(), DataError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CORRELATION_HEADER).map_err(csv_err)?;
    for (p, row) in m.predictors.iter().zip(&m.rho) {
        for (t, rho) in m.targets.iter().zip(row) {
            let rho = rho.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string());
            wr.write_record([p, t, &rho]).map_err(csv_err)?;
        }
    }
    flush(wr)
}

pub fn read_correlations<R: Read>(r: R) -> Result<CorrelationMatrix, DataError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &CORRELATION_HEADER)?;
    let mut m = CorrelationMatrix {
        predictors: Vec::new(),
        targets: Vec::new(),
        rho: Vec::new(),
    };
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let (p, t) = (&rec[0], &rec[1]);
        let rho = if &rec[2] == UNDEFINED { None } else { Some(number(&rec[2], line)?) };
        if m.predictors.last().map(String::as_str) != Some(p) {
            if m.predictors.iter().any(|x| x == p) {
                return Err(DataError::Format(format!("line {line}: rows of `{p}` are not contiguous")));
            }
            m.predictors.push(p.to_string());
            m.rho.push(Vec::new());
        }
        let row = m.rho.last_mut().expect("row pushed");
        if m.predictors.len() == 1 {
            m.targets.push(t.to_string());
        } else if m.targets.get(row.len()).map(String::as_str) != Some(t) {
            return Err(DataError::Format(format!("line {line}: unexpected target `{t}`")));
        }
        row.push(rho);
    }
    if m.rho.iter().any(|r| r.len() != m.targets.len()) {
        return Err(DataError::Format("correlation matrix is ragged".into()));
    }
    Ok(m)
}

const IMPORTANCE_HEADER: [&str; 4] = ["target", "predictor", "score", "rank"];

pub fn write_importance<W: Write>(reports: &[TargetImportance], w: W) -> Result<(), DataError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(IMPORTANCE_HEADER).map_err(csv_err)?;
    for t in reports {
        let r = &t.report;
        for ((name, score), rank) in r.names.iter().zip(&r.scores).zip(&r.ranks) {
            wr.write_record([&t.target, name, &score.to_string(), &rank.to_string()])
                .map_err(csv_err)?;
        }
    }
    flush(wr)
}

pub fn read_importance<R: Read>(r: R) -> Result<Vec<TargetImportance>, DataError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &IMPORTANCE_HEADER)?;
    let mut out: Vec<TargetImportance> = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let rank: usize = rec[3]
            .parse()
            .map_err(|_| DataError::Format(format!("line {line}: bad rank `{}`", &rec[3])))?;
        if out.last().map(|t| t.target.as_str()) != Some(&rec[0]) {
            out.push(TargetImportance {
                target: rec[0].to_string(),
                report: ImportanceReport {
                    names: Vec::new(),
                    scores: Vec::new(),
                    ranks: Vec::new(),
                },
            });
        }
        let r = &mut out.last_mut().expect("pushed").report;
        r.names.push(rec[1].to_string());
        r.scores.push(number(&rec[2], line)?);
        r.ranks.push(rank);
    }
    Ok(out)
}

pub fn write_evaluation<W: Write>(report: &EvaluationReport, mut w: W) -> Result<(), DataError> {
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| DataError::Format(e.to_string()))?;
    writeln!(w).map_err(|e| DataError::Format(e.to_string()))
}

/// Reads `evaluation.json`; predicted-vs-observed pairs live in their own file.
pub fn read_evaluation<R: Read>(r: R) -> Result<EvaluationReport, DataError> {
    let report: EvaluationReport = serde_json::from_reader(r).map_err(|e| DataError::Format(e.to_string()))?;
    let shape_ok = |m: usize| m == report.targets.len();
    let width = report.groups.len();
    if !shape_ok(report.rmse.len())
        || !shape_ok(report.ranks.len())
        || !shape_ok(report.relative_scores.len())
        || report
            .rmse
            .iter()
            .chain(&report.relative_scores)
            .any(|r| r.len() != width)
        || report.ranks.iter().any(|r| r.len() != width)
    {
        return Err(DataError::Format("evaluation matrices do not match targets × groups".into()));
    }
    Ok(report)
}

const PRED_OBS_HEADER: [&str; 4] = ["target", "catchment_id", "observed", "predicted"];

pub fn write_pred_vs_obs<W: Write>(pairs: &[PredictedObserved], w: W) -> Result<(), DataError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(PRED_OBS_HEADER).map_err(csv_err)?;
    for p in pairs {
        wr.write_record([
            &p.target,
            &p.catchment_id,
            &p.observed.to_string(),
            &p.predicted.to_string(),
        ])
        .map_err(csv_err)?;
    }
    flush(wr)
}

pub fn read_pred_vs_obs<R: Read>(r: R) -> Result<Vec<PredictedObserved>, DataError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &PRED_OBS_HEADER)?;
    rd.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_err)?;
            Ok(PredictedObserved {
                target: rec[0].to_string(),
                catchment_id: rec[1].to_string(),
                observed: number(&rec[2], i + 2)?,
                predicted: number(&rec[3], i + 2)?,
            })
        })
        .collect()
}

const SUMMARY_HEADER: [&str; 8] = ["variable", "feature", "min", "q1", "median", "q3", "max", "mean"];

pub fn write_summaries<W: Write>(rows: &[FeatureSummary], w: W) -> Result<(), DataError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in rows {
        let nums = [s.min, s.q1, s.median, s.q3, s.max, s.mean].map(|v| v.to_string());
        let mut rec = vec![s.variable.to_string(), s.feature.clone()];
        rec.extend(nums);
        wr.write_record(&rec).map_err(csv_err)?;
    }
    flush(wr)
}

pub fn read_summaries<R: Read>(r: R) -> Result<Vec<FeatureSummary>, DataError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &SUMMARY_HEADER)?;
    rd.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_err)?;
            let line = i + 2;
            let variable = VariableKind::parse(&rec[0])
                .ok_or_else(|| DataError::Format(format!("line {line}: unknown variable `{}`", &rec[0])))?;
            let n = |k: usize| number(&rec[k], line);
            Ok(FeatureSummary {
                variable,
                feature: rec[1].to_string(),
                min: n(2)?,
                q1: n(3)?,
                median: n(4)?,
                q3: n(5)?,
                max: n(6)?,
                mean: n(7)?,
            })
        })
        .collect()
}

const EXCLUSION_HEADER: [&str; 3] = ["catchment_id", "variable", "reason"];

/// The exclusion manifest; catchment-level exclusions leave `variable` empty.
pub fn write_exclusions<W: Write>(exclusions: &[Exclusion], w: W) -> Result<(), DataError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(EXCLUSION_HEADER).map_err(csv_err)?;
    for e in exclusions {
        let var = e.variable.map_or("", VariableKind::as_str);
        wr.write_record([e.catchment_id.as_str(), var, e.reason.as_str()])
            .map_err(csv_err)?;
    }
    flush(wr)
}

pub fn read_exclusions<R: Read>(r: R) -> Result<Vec<Exclusion>, DataError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &EXCLUSION_HEADER)?;
    rd.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_err)?;
            let variable = match &rec[1] {
                "" => None,
                v => Some(VariableKind::parse(v).ok_or_else(|| {
                    DataError::Format(format!("line {}: unknown variable `{v}`", i + 2))
                })?),
            };
            Ok(Exclusion {
                catchment_id: rec[0].to_string(),
                variable,
                reason: rec[2].to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regionalization::PredictorGroup;

    fn roundtrip<T, W, R>(value: &T, write: W, read: R) -> Vec<u8>
    where
        T: PartialEq + std::fmt::Debug,
        W: Fn(&T, &mut Vec<u8>) -> Result<(), DataError>,
        R: Fn(&[u8]) -> Result<T, DataError>,
    {
        let mut first = Vec::new();
        write(value, &mut first).unwrap();
        let back = read(&first).unwrap();
        assert_eq!(&back, value);
        let mut second = Vec::new();
        write(&back, &mut second).unwrap();
        assert_eq!(first, second);
        first
    }

    #[test]
    fn correlations_roundtrip_with_undefined() {
        let m = CorrelationMatrix {
            predictors: vec!["a".into(), "b".into()],
            targets: vec!["x".into(), "y".into(), "z".into()],
            rho: vec![vec![Some(0.1), None, Some(-1.0)], vec![Some(1.0 / 3.0), Some(0.0), None]],
        };
        let text = roundtrip(&m, |m, w| write_correlations(m, w), |b| read_correlations(b));
        let text = String::from_utf8(text).unwrap();
        assert!(text.starts_with("predictor,target,rho\na,x,0.1\na,y,undefined\n"));
    }

    #[test]
    fn importance_roundtrip() {
        let reports = vec![
            TargetImportance {
                target: "x_acf1".into(),
                report: ImportanceReport::new(vec!["p".into(), "q".into()], vec![0.25, -1e-3]),
            },
            TargetImportance {
                target: "peak".into(),
                report: ImportanceReport::new(vec!["p".into(), "q".into()], vec![0.0, 7.5]),
            },
        ];
        roundtrip(&reports, |r, w| write_importance(r, w), |b| read_importance(b));
    }

    #[test]
    fn evaluation_roundtrip() {
        let report = EvaluationReport {
            targets: vec!["x_acf1".into(), "peak".into()],
            groups: vec![PredictorGroup::S, PredictorGroup::STP],
            rmse: vec![vec![1.0, 0.83], vec![0.1 + 0.2, 0.5]],
            ranks: vec![vec![2, 1], vec![1, 2]],
            relative_scores: vec![vec![0.0, 17.000000000000004], vec![0.0, -66.0]],
            folds: vec![vec!["a".into()], vec!["b".into(), "c".into()]],
            seed: 42,
            n_trees: 200,
            predicted_vs_observed: Vec::new(),
        };
        roundtrip(&report, |r, w| write_evaluation(r, w), |b| read_evaluation(b));
        let mut bad = report.clone();
        bad.ranks[0].pop();
        let mut buf = Vec::new();
        write_evaluation(&bad, &mut buf).unwrap();
        assert!(read_evaluation(&buf[..]).is_err());
    }

    #[test]
    fn pred_obs_summaries_exclusions_roundtrip() {
        let pairs = vec![PredictedObserved {
            target: "spike".into(),
            catchment_id: "01013500".into(),
            observed: 1e-7,
            predicted: 2.5e-7,
        }];
        roundtrip(&pairs, |p, w| write_pred_vs_obs(p, w), |b| read_pred_vs_obs(b));

        let rows = vec![FeatureSummary {
            variable: VariableKind::Precipitation,
            feature: "entropy".into(),
            min: 0.1,
            q1: 0.2,
            median: 0.3,
            q3: 0.4,
            max: 0.5,
            mean: 0.31,
        }];
        roundtrip(&rows, |r, w| write_summaries(r, w), |b| read_summaries(b));

        let ex = vec![
            Exclusion {
                catchment_id: "a".into(),
                variable: None,
                reason: "missing series file, \"quoted\"".into(),
            },
            Exclusion {
                catchment_id: "b".into(),
                variable: Some(VariableKind::Streamflow),
                reason: "series has zero variance".into(),
            },
        ];
        roundtrip(&ex, |e, w| write_exclusions(e, w), |b| read_exclusions(b));
    }
}
