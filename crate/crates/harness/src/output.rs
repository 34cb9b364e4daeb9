//! File formats: trace CSV, iterate sidecar, summary, data and epoch tables.
//!
//! Every float is written with 17 significant digits and every file is
//! written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use strop_core::linops::Matrix;
use strop_core::problems::SpikedDataSpec;
use strop_core::trust_region::{IterationRecord, StepOutcome};

use crate::config::fmt_f64;
use crate::error::HarnessError;

pub const TRACE_HEADER: [&str; 13] = [
    "k",
    "sample_index",
    "grad_norm",
    "a",
    "r",
    "delta_before",
    "delta_after",
    "accepted",
    "pred_red",
    "actual_red",
    "feasibility",
    "stationarity",
    "obj_sample",
];

pub const EPOCH_HEADER: [&str; 4] = ["epoch", "method", "objective_total", "feasibility"];

const DATA_HEADER: [&str; 5] = ["d", "k", "n", "noise_sigma", "seed"];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
    file.write_all(bytes)
        .and_then(|_| file.sync_all())
        .map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>], flexible: bool) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .flexible(flexible)
        .from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One CSV row per record. `stationarity` holds `‖∇φ‖` on constrained runs
/// and the full gradient norm otherwise, on the iterations where it was
/// evaluated.
pub fn trace_row(rec: &IterationRecord) -> Vec<String> {
    vec![
        rec.k.to_string(),
        rec.sample_index().to_string(),
        fmt_f64(rec.grad_norm),
        cell(rec.a),
        cell(rec.r),
        fmt_f64(rec.delta_before),
        fmt_f64(rec.delta_after),
        u8::from(rec.accepted()).to_string(),
        cell(rec.pred_red),
        cell(rec.actual_red),
        cell(rec.feasibility),
        cell(rec.stationarity.or(rec.full_grad_norm)),
        fmt_f64(rec.obj_sample),
    ]
}

pub fn trace_bytes(trace: &[IterationRecord]) -> Vec<u8> {
    let rows: Vec<Vec<String>> = trace.iter().map(trace_row).collect();
    csv_bytes(&TRACE_HEADER, &rows, false)
}

fn open_csv(path: &Path, flexible: bool) -> Result<csv::Reader<fs::File>, HarnessError> {
    csv::ReaderBuilder::new()
        .flexible(flexible)
        .from_path(path)
        .map_err(|e| HarnessError::format(path, e.to_string()))
}

fn parse_cell<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    col: &str,
    s: &str,
) -> Result<T, HarnessError> {
    s.parse()
        .map_err(|_| HarnessError::format(path, format!("row {row}: bad `{col}` value `{s}`")))
}

fn parse_opt(path: &Path, row: usize, col: &str, s: &str) -> Result<Option<f64>, HarnessError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_cell(path, row, col, s).map(Some)
    }
}

/// Reads a trace back into records. Each record gets its first sample
/// index only; batch members come from the iterate sidecar. The
/// `stationarity` column is stored as `stationarity` when `penalized` and
/// as the full gradient norm otherwise.
pub fn read_trace(path: &Path, penalized: bool) -> Result<Vec<IterationRecord>, HarnessError> {
    let mut reader = open_csv(path, false)?;
    let header = reader
        .headers()
        .map_err(|e| HarnessError::format(path, e.to_string()))?;
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(HarnessError::format(
            path,
            format!("header must be `{}`", TRACE_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::format(path, e.to_string()))?;
        let col = |i: usize| &rec[i];
        let a = parse_opt(path, row, "a", col(3))?;
        let accepted: u8 = parse_cell(path, row, "accepted", col(7))?;
        let outcome = match (accepted, a) {
            (1, _) => StepOutcome::Accepted,
            (_, None) => StepOutcome::VanishedGradient,
            _ => StepOutcome::Rejected,
        };
        let stat = parse_opt(path, row, "stationarity", col(11))?;
        out.push(IterationRecord {
            k: parse_cell(path, row, "k", col(0))?,
            samples: vec![parse_cell(path, row, "sample_index", col(1))?],
            grad_norm: parse_cell(path, row, "grad_norm", col(2))?,
            a,
            r: parse_opt(path, row, "r", col(4))?,
            delta_before: parse_cell(path, row, "delta_before", col(5))?,
            delta_after: parse_cell(path, row, "delta_after", col(6))?,
            outcome,
            pred_red: parse_opt(path, row, "pred_red", col(8))?,
            actual_red: parse_opt(path, row, "actual_red", col(9))?,
            full_grad_norm: if penalized { None } else { stat },
            feasibility: parse_opt(path, row, "feasibility", col(10))?,
            stationarity: if penalized { stat } else { None },
            obj_sample: parse_cell(path, row, "obj_sample", col(12))?,
        });
    }
    Ok(out)
}

/// Stored iterates: `points[j]` is `x_k` before the step of trace row `j`,
/// with that step's batch in `samples[j]`; `final_x` is the last iterate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Iterates {
    pub samples: Vec<Vec<usize>>,
    pub points: Vec<Vec<f64>>,
    pub final_x: Option<Vec<f64>>,
}

/// Sidecar name next to a trace file.
pub fn iterates_path(trace: &Path) -> PathBuf {
    trace.with_file_name("iterates.csv")
}

/// Rows `k,samples,x_0,…`, samples space-separated; the final iterate has an
/// empty sample cell.
pub fn iterates_bytes(trace: &[IterationRecord], points: &[Vec<f64>], final_x: &[f64]) -> Vec<u8> {
    let dim = final_x.len();
    let mut header = vec!["k".to_owned(), "samples".to_owned()];
    header.extend((0..dim).map(|j| format!("x{j}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows: Vec<Vec<String>> = trace
        .iter()
        .zip(points)
        .map(|(rec, x)| {
            let samples: Vec<String> = rec.samples.iter().map(usize::to_string).collect();
            let mut row = vec![rec.k.to_string(), samples.join(" ")];
            row.extend(x.iter().map(|v| fmt_f64(*v)));
            row
        })
        .collect();
    let final_k = trace.last().map_or(0, |r| r.k + 1);
    let mut last = vec![final_k.to_string(), String::new()];
    last.extend(final_x.iter().map(|v| fmt_f64(*v)));
    rows.push(last);
    csv_bytes(&header_refs, &rows, false)
}

pub fn read_iterates(path: &Path) -> Result<Iterates, HarnessError> {
    let mut reader = open_csv(path, false)?;
    let mut out = Iterates::default();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::format(path, e.to_string()))?;
        let x = rec
            .iter()
            .skip(2)
            .map(|s| parse_cell(path, row, "x", s))
            .collect::<Result<Vec<f64>, _>>()?;
        if rec[1].is_empty() {
            out.final_x = Some(x);
        } else {
            let samples = rec[1]
                .split(' ')
                .map(|s| parse_cell(path, row, "samples", s))
                .collect::<Result<Vec<usize>, _>>()?;
            out.samples.push(samples);
            out.points.push(x);
        }
    }
    Ok(out)
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// One row of an epoch table.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub method: String,
    pub objective_total: f64,
    pub feasibility: Option<f64>,
}

pub fn epoch_bytes(rows: &[EpochRow]) -> Vec<u8> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.epoch.to_string(),
                r.method.clone(),
                fmt_f64(r.objective_total),
                cell(r.feasibility),
            ]
        })
        .collect();
    csv_bytes(&EPOCH_HEADER, &rows, false)
}

pub fn read_epoch_table(path: &Path) -> Result<Vec<EpochRow>, HarnessError> {
    let mut reader = open_csv(path, false)?;
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::format(path, e.to_string()))?;
        out.push(EpochRow {
            epoch: parse_cell(path, row, "epoch", &rec[0])?,
            method: rec[1].to_owned(),
            objective_total: parse_cell(path, row, "objective_total", &rec[2])?,
            feasibility: parse_opt(path, row, "feasibility", &rec[3])?,
        });
    }
    Ok(out)
}

/// Header row `d,k,n,noise_sigma,seed`, its values, then the `d x n` data
/// matrix one row per line (one column per sample).
pub fn data_bytes(spec: &SpikedDataSpec, data: &Matrix) -> Vec<u8> {
    let mut rows = vec![vec![
        spec.d.to_string(),
        spec.k.to_string(),
        spec.n.to_string(),
        fmt_f64(spec.noise_sigma),
        spec.seed.to_string(),
    ]];
    rows.extend((0..data.rows()).map(|i| data.row(i).iter().map(|v| fmt_f64(*v)).collect()));
    csv_bytes(&DATA_HEADER, &rows, true)
}

pub fn read_data_csv(path: &Path) -> Result<(SpikedDataSpec, Matrix), HarnessError> {
    let mut reader = open_csv(path, true)?;
    let mut records = reader.records();
    let bad = |reason: &str| HarnessError::format(path, reason.to_owned());
    let meta = records
        .next()
        .ok_or_else(|| bad("missing parameter row"))?
        .map_err(|e| HarnessError::format(path, e.to_string()))?;
    if meta.len() != DATA_HEADER.len() {
        return Err(bad("parameter row must have 5 fields"));
    }
    let spec = SpikedDataSpec {
        d: parse_cell(path, 0, "d", &meta[0])?,
        k: parse_cell(path, 0, "k", &meta[1])?,
        n: parse_cell(path, 0, "n", &meta[2])?,
        noise_sigma: parse_cell(path, 0, "noise_sigma", &meta[3])?,
        seed: parse_cell(path, 0, "seed", &meta[4])?,
    };
    let mut values = Vec::with_capacity(spec.d * spec.n);
    let mut rows = 0;
    for (row, rec) in records.enumerate() {
        let rec = rec.map_err(|e| HarnessError::format(path, e.to_string()))?;
        if rec.len() != spec.n {
            return Err(bad(&format!(
                "data row {row} has {} values, expected n={}",
                rec.len(),
                spec.n
            )));
        }
        for s in rec.iter() {
            values.push(parse_cell(path, row + 1, "data", s)?);
        }
        rows += 1;
    }
    if rows != spec.d {
        return Err(bad(&format!(
            "found {rows} data rows, expected d={}",
            spec.d
        )));
    }
    let matrix = Matrix::from_row_major(spec.d, spec.n, values).map_err(|e| bad(&e.to_string()))?;
    Ok((spec, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use strop_core::problems::spiked_data;

    fn record(k: usize, a: Option<f64>, outcome: StepOutcome) -> IterationRecord {
        IterationRecord {
            k,
            samples: vec![k % 3, 1],
            grad_norm: 0.5,
            a,
            r: a.map(|_| 0.75),
            delta_before: 1.0,
            delta_after: 2.0,
            outcome,
            pred_red: a.map(|_| 0.1),
            actual_red: a.map(|_| 0.075),
            full_grad_norm: (k == 0).then_some(0.25),
            feasibility: None,
            stationarity: None,
            obj_sample: 1.0 / 3.0,
        }
    }

    #[test]
    fn trace_round_trips_and_leaves_missing_cells_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = vec![
            record(0, Some(1.0), StepOutcome::Accepted),
            record(1, Some(0.3), StepOutcome::Rejected),
            record(2, None, StepOutcome::VanishedGradient),
        ];
        write_atomic(&path, &trace_bytes(&trace)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&TRACE_HEADER.join(",")));
        let vanished = text.lines().nth(3).unwrap();
        assert!(vanished.contains(",,,"), "{vanished}");
        let back = read_trace(&path, false).unwrap();
        assert_eq!(back.len(), 3);
        for (b, t) in back.iter().zip(&trace) {
            assert_eq!(b.outcome, t.outcome);
            assert_eq!(b.a, t.a);
            assert_eq!(b.obj_sample.to_bits(), t.obj_sample.to_bits());
            assert_eq!(b.full_grad_norm, t.full_grad_norm);
            assert_eq!(b.samples, vec![t.samples[0]]);
        }
    }

    #[test]
    fn iterates_keep_batches_and_final_point() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("iterates.csv");
        let trace = vec![
            record(0, Some(1.0), StepOutcome::Accepted),
            record(1, Some(1.0), StepOutcome::Accepted),
        ];
        let points = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        write_atomic(&path, &iterates_bytes(&trace, &points, &[0.5, 0.6])).unwrap();
        let back = read_iterates(&path).unwrap();
        assert_eq!(back.points, points);
        assert_eq!(back.samples, vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(back.final_x, Some(vec![0.5, 0.6]));
    }

    #[test]
    fn data_file_reloads_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let spec = SpikedDataSpec {
            d: 6,
            k: 2,
            n: 4,
            noise_sigma: 0.05,
            seed: 1,
        };
        let data = spiked_data(&spec).unwrap();
        write_atomic(&path, &data_bytes(&spec, &data)).unwrap();
        let first = fs::read_to_string(&path).unwrap();
        assert!(first.starts_with("d,k,n,noise_sigma,seed\n6,2,4,"));
        let (spec2, data2) = read_data_csv(&path).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(data2, data);
    }

    #[test]
    fn summary_is_key_value_lines() {
        let mut s = Summary::default();
        s.push("method", "str");
        s.push_f64("final_grad_norm", 0.5);
        assert_eq!(
            s.to_text(),
            "method=str\nfinal_grad_norm=5.0000000000000000e-1\n"
        );
        assert_eq!(s.get("method"), Some("str"));
    }
}
