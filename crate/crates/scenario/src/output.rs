//! CSV and JSON emission.
//!
//! Trace CSV header: `t,omega,rocof,ffr_power,droop_active` then one
//! `p_<id>` column per FFR. Values are written in Rust's shortest
//! round-trip decimal form, so reading a file back is lossless.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ffr_inertia::{InertiaEstimate, Trace};
use serde::Serialize;

use crate::error::{Result, ScenarioError};
use crate::runner::CaseStudy;

pub const TRACE_COLUMNS: [&str; 5] = ["t", "omega", "rocof", "ffr_power", "droop_active"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(ScenarioError::io(path))
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ScenarioError {
    let path = path.to_path_buf();
    move |source| ScenarioError::Csv { path, source }
}

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = TRACE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(trace.ffr_ids.iter().map(|id| format!("p_{id}")));
    w.write_record(&header)?;

    let mut row = Vec::with_capacity(header.len());
    for k in 0..trace.len() {
        row.clear();
        row.push(trace.sample_times[k].to_string());
        row.push(trace.omega[k].to_string());
        row.push(trace.rocof[k].to_string());
        row.push(trace.ffr_power[k].to_string());
        row.push(trace.droop_active[k].to_string());
        row.extend(trace.per_ffr_power.iter().map(|col| col[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    let file = create(path)?;
    write_trace(trace, file).map_err(csv_err(path))
}

/// Reads a trace written by [`emit_trace_csv`]. The onset is not stored in
/// the file and must be supplied.
pub fn read_trace_csv(path: &Path, onset_time: f64) -> Result<Trace> {
    let file = File::open(path).map_err(ScenarioError::io(path))?;
    let mut r = csv::Reader::from_reader(file);
    let bad = |message: String| ScenarioError::TraceFormat {
        path: path.to_path_buf(),
        message,
    };

    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.len() < TRACE_COLUMNS.len()
        || header.iter().zip(TRACE_COLUMNS).any(|(got, want)| got != want)
    {
        return Err(bad(format!(
            "header must start with `{}`",
            TRACE_COLUMNS.join(",")
        )));
    }
    let mut ffr_ids = Vec::new();
    for name in header.iter().skip(TRACE_COLUMNS.len()) {
        let id = name
            .strip_prefix("p_")
            .ok_or_else(|| bad(format!("unexpected column `{name}`")))?;
        ffr_ids.push(id.to_owned());
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let value = field
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: `{field}`: {e}", line + 2)))?;
            col.push(value);
        }
    }

    let per_ffr_power = columns.split_off(TRACE_COLUMNS.len());
    let mut it = columns.into_iter();
    let mut next = || it.next().expect("five fixed columns");
    let (sample_times, omega, rocof, ffr_power, droop_active) = (next(), next(), next(), next(), next());

    let n = sample_times.len();
    let time_step = if n > 1 {
        (sample_times[n - 1] - sample_times[0]) / (n - 1) as f64
    } else {
        0.0
    };
    let onset_index = sample_times
        .iter()
        .position(|&t| t >= onset_time - 0.5 * time_step);

    let trace = Trace {
        sample_times,
        omega,
        rocof,
        ffr_power,
        droop_active,
        ffr_ids,
        per_ffr_power,
        time_step,
        onset_time,
        onset_index,
    };
    trace.validate()?;
    Ok(trace)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| ScenarioError::io(path)(e.into()))?;
    writeln!(file).map_err(ScenarioError::io(path))?;
    file.flush().map_err(ScenarioError::io(path))
}

/// Every subcase on a shared time axis: `t`, then `omega_<subcase>` and
/// `ffr_power_<subcase>` per subcase.
pub fn write_merged_csv(study: &CaseStudy, path: &Path) -> Result<()> {
    let grid = &study.runs[0].trace.sample_times;
    if study.runs.iter().any(|r| &r.trace.sample_times != grid) {
        return Err(ScenarioError::Inconsistent("subcase time grids differ".into()));
    }
    let file = create(path)?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["t".to_string()];
    for r in &study.runs {
        header.push(format!("omega_{}", r.subcase));
        header.push(format!("ffr_power_{}", r.subcase));
    }
    w.write_record(&header).map_err(csv_err(path))?;
    for (k, t) in grid.iter().enumerate() {
        let mut row = vec![t.to_string()];
        for r in &study.runs {
            row.push(r.trace.omega[k].to_string());
            row.push(r.trace.ffr_power[k].to_string());
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(ScenarioError::io(path))
}

/// `t,delta_tj,valid` per sample.
pub fn write_estimate_csv(estimate: &InertiaEstimate, path: &Path) -> Result<()> {
    let file = create(path)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["t", "delta_tj", "valid"]).map_err(csv_err(path))?;
    for k in 0..estimate.sample_times.len() {
        w.write_record([
            estimate.sample_times[k].to_string(),
            estimate.delta_tj[k].to_string(),
            u8::from(estimate.valid_mask[k]).to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(ScenarioError::io(path))
}

/// Writes every case-study artifact into `dir`; returns the paths written.
pub fn write_case_study(study: &CaseStudy, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(ScenarioError::io(dir))?;
    let mut written = Vec::new();
    for run in &study.runs {
        let path = dir.join(format!("trace_{}.csv", run.subcase));
        emit_trace_csv(&run.trace, &path)?;
        written.push(path);
    }
    let merged = dir.join("case_study.csv");
    write_merged_csv(study, &merged)?;
    written.push(merged);
    let report = dir.join("report.json");
    write_json(&study.report, &report)?;
    written.push(report);
    Ok(written)
}
