//! CSV and JSON output for sweep rows.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsl::Flags;
use crate::sweep::SweepRow;

pub const COLUMNS: [&str; 12] = [
    "gamma0",
    "lambda",
    "omega0",
    "tau",
    "ell",
    "lambda_tau",
    "tau_qsl",
    "delta_H_nats",
    "info_rate_exact",
    "bound_micro",
    "bound_micro_with_additive",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ReportError::Parse(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no rows to write")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Flat record with one field per output column. Missing values are NaN in
/// memory, `NaN` in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub gamma0: f64,
    pub lambda: f64,
    pub omega0: f64,
    pub tau: f64,
    #[serde(with = "nan_as_null")]
    pub ell: f64,
    #[serde(with = "nan_as_null")]
    pub lambda_tau: f64,
    #[serde(with = "nan_as_null")]
    pub tau_qsl: f64,
    #[serde(rename = "delta_H_nats", with = "nan_as_null")]
    pub delta_h_nats: f64,
    #[serde(with = "nan_as_null")]
    pub info_rate_exact: f64,
    #[serde(with = "nan_as_null")]
    pub bound_micro: f64,
    #[serde(with = "nan_as_null")]
    pub bound_micro_with_additive: f64,
    pub flags: String,
}

impl From<&SweepRow> for Record {
    fn from(row: &SweepRow) -> Self {
        Self {
            gamma0: row.gamma0,
            lambda: row.lambda,
            omega0: row.omega0,
            tau: row.tau,
            ell: row.ell,
            lambda_tau: row.lambda_tau,
            tau_qsl: row.tau_qsl,
            delta_h_nats: row.delta_h_nats,
            info_rate_exact: row.report.info_rate_exact,
            bound_micro: row.report.bound_micro,
            bound_micro_with_additive: row.report.bound_micro_with_additive,
            flags: row.flags().to_string(),
        }
    }
}

impl Record {
    fn numbers(&self) -> [f64; 11] {
        [
            self.gamma0,
            self.lambda,
            self.omega0,
            self.tau,
            self.ell,
            self.lambda_tau,
            self.tau_qsl,
            self.delta_h_nats,
            self.info_rate_exact,
            self.bound_micro,
            self.bound_micro_with_additive,
        ]
    }

    pub fn parsed_flags(&self) -> Result<Flags, ReportError> {
        Flags::parse(&self.flags)
            .ok_or_else(|| ReportError::Parse(format!("flags {:?}", self.flags)))
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        let mut fields: Vec<String> = r.numbers().iter().map(|&v| format_number(v)).collect();
        fields.push(r.flags.clone());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[Record], out: W) -> Result<(), ReportError> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>, ReportError> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(ReportError::Parse(format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let mut nums = [0.0; 11];
        for (i, slot) in nums.iter_mut().enumerate() {
            *slot = row[i]
                .parse()
                .map_err(|_| ReportError::Parse(format!("column {}: {:?}", COLUMNS[i], &row[i])))?;
        }
        let [gamma0, lambda, omega0, tau, ell, lambda_tau, tau_qsl, delta_h_nats, info_rate_exact, bound_micro, bound_micro_with_additive] =
            nums;
        records.push(Record {
            gamma0,
            lambda,
            omega0,
            tau,
            ell,
            lambda_tau,
            tau_qsl,
            delta_h_nats,
            info_rate_exact,
            bound_micro,
            bound_micro_with_additive,
            flags: row[11].to_string(),
        });
    }
    Ok(records)
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<Record>, ReportError> {
    Ok(serde_json::from_reader(input)?)
}

pub fn render(rows: &[SweepRow], format: Format) -> Result<Vec<u8>, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let records: Vec<Record> = rows.iter().map(Record::from).collect();
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&records, &mut buf)?,
        Format::Json => write_json(&records, &mut buf)?,
    }
    Ok(buf)
}

/// Writes `rows` to `path`. An empty slice is an error.
pub fn emit(rows: &[SweepRow], format: Format, path: &Path) -> Result<(), ReportError> {
    let bytes = render(rows, format)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}
