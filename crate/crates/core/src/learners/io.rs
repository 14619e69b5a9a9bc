//! Delimited-text ingestion.
//!
//! Dataset files have columns `id, group, label, f1 .. fd`; score files have
//! `id, group, label, score`. Groups are `a`/`b`, labels `0`/`1`. Lines
//! starting with `#` are comments, and a first row whose group column reads
//! `group` is taken as a header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::GroupScores;
use crate::error::{Error, Result};
use crate::types::{Cell, Dataset, Group, Label, LabeledSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub group: Group,
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreTable {
    pub records: Vec<ScoreRecord>,
}

impl ScoreTable {
    pub fn group_scores(&self) -> Result<GroupScores> {
        GroupScores::from_scored(self.records.iter().map(|r| (Cell::new(r.label, r.group), r.score)))
    }

    /// The scores as a one-feature dataset, for use with an identity scorer.
    pub fn to_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.records.iter().map(|r| LabeledSample::new(vec![r.score], r.group, r.label)).collect())
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["id", "group", "label", "score"]).map_err(io)?;
        for r in &self.records {
            w.write_record([r.id.clone(), r.group.to_string(), r.label.to_string(), format!("{}", r.score)])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One parsed row: id, group, label and the remaining numeric columns.
struct Row {
    line: usize,
    id: String,
    group: Group,
    label: Label,
    values: Vec<f64>,
}

fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse { line, message: e.to_string() }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        // comments are skipped here rather than by the reader so that
        // reported line numbers count them
        if record.get(0).is_some_and(|f| f.starts_with('#')) || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        if first {
            first = false;
            if record.get(1).is_some_and(|g| g.eq_ignore_ascii_case("group")) {
                continue;
            }
        }
        if record.len() < 4 {
            return Err(Error::Parse { line, message: format!("expected at least 4 columns, found {}", record.len()) });
        }
        let group: Group = record[1]
            .parse()
            .map_err(|_| Error::InvalidGroupOrLabel { line, value: record[1].to_string() })?;
        let label: Label = record[2]
            .parse()
            .map_err(|_| Error::InvalidGroupOrLabel { line, value: record[2].to_string() })?;
        let mut values = Vec::with_capacity(record.len() - 3);
        for field in record.iter().skip(3) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("not a number: {field:?}") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("non-finite value {field:?}") });
            }
            values.push(v);
        }
        rows.push(Row { line, id: record[0].to_string(), group, label, values });
    }
    Ok(rows)
}

pub fn read_scores<R: Read>(input: R) -> Result<ScoreTable> {
    let rows = read_rows(input)?;
    let mut records = Vec::with_capacity(rows.len());
    for r in rows {
        if r.values.len() != 1 {
            return Err(Error::Parse {
                line: r.line,
                message: format!("row {:?}: expected one score column, found {}", r.id, r.values.len()),
            });
        }
        records.push(ScoreRecord { id: r.id, group: r.group, label: r.label, score: r.values[0] });
    }
    Ok(ScoreTable { records })
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreTable> {
    read_scores(File::open(path)?)
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let rows = read_rows(input)?;
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data rows".into() });
    }
    let dim = rows[0].values.len();
    let mut samples = Vec::with_capacity(rows.len());
    for r in rows {
        if r.values.len() != dim {
            return Err(Error::Parse {
                line: r.line,
                message: format!("row {:?} has {} features, expected {dim}", r.id, r.values.len()),
            });
        }
        samples.push(LabeledSample::new(r.values, r.group, r.label));
    }
    Dataset::new(samples)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(File::open(path)?)
}

pub fn write_dataset<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["id".to_string(), "group".into(), "label".into()];
    header.extend((1..=data.dim()).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(io)?;
    for (i, s) in data.samples().iter().enumerate() {
        let mut row = vec![i.to_string(), s.group.to_string(), s.label.to_string()];
        row.extend(s.features.iter().map(|x| format!("{x}")));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
