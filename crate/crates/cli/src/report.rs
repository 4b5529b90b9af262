//! Check records and their CSV / JSON serialization.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::Format;

pub const CSV_HEADER: [&str; 7] = ["check", "anchor", "value", "residual", "tolerance", "pass", "seconds"];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed report: {0}")]
    Malformed(String),
}

/// `{:.16e}`, 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        RawValue::from_string(format_float(*v))
            .map_err(S::Error::custom)?
            .serialize(s)
    } else {
        s.serialize_none()
    }
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub anchor: String,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub residual: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub tolerance: f64,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub seconds: f64,
}

impl Record {
    /// Field-wise equality treating NaN as equal to NaN.
    pub fn same(&self, other: &Record) -> bool {
        let f = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        self.check == other.check
            && self.anchor == other.anchor
            && f(self.value, other.value)
            && f(self.residual, other.residual)
            && f(self.tolerance, other.tolerance)
            && self.pass == other.pass
            && f(self.seconds, other.seconds)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
    /// Error messages from checks that could not be evaluated.
    pub notes: Vec<String>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn get(&self, check: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.check == check)
    }
}

pub fn write_csv<W: Write>(report: &Report, w: W) -> Result<(), ReportError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in &report.records {
        out.write_record([
            r.check.clone(),
            r.anchor.clone(),
            format_float(r.value),
            format_float(r.residual),
            format_float(r.tolerance),
            r.pass.to_string(),
            format_float(r.seconds),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Report, ReportError> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().ne(CSV_HEADER) {
        return Err(ReportError::Malformed("unexpected CSV header".into()));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let num = |i: usize| -> Result<f64, ReportError> {
            row[i]
                .parse()
                .map_err(|_| ReportError::Malformed(format!("bad number `{}`", &row[i])))
        };
        let pass = match &row[5] {
            "true" => true,
            "false" => false,
            other => return Err(ReportError::Malformed(format!("bad flag `{other}`"))),
        };
        records.push(Record {
            check: row[0].to_string(),
            anchor: row[1].to_string(),
            value: num(2)?,
            residual: num(3)?,
            tolerance: num(4)?,
            pass,
            seconds: num(6)?,
        });
    }
    Ok(Report {
        records,
        notes: Vec::new(),
    })
}

pub fn write_json<W: Write>(report: &Report, mut w: W) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut w, &report.records)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<Report, ReportError> {
    let records: Vec<Record> = serde_json::from_reader(r)?;
    Ok(Report {
        records,
        notes: Vec::new(),
    })
}

/// Writes the report to `path`, creating parent directories.
pub fn emit(report: &Report, format: Format, path: &Path) -> Result<(), ReportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(report, &mut buf)?,
        Format::Json => write_json(report, &mut buf)?,
    }
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> Record {
        Record {
            check: "gadget.cond1[lambda=0.3]".into(),
            anchor: "gadget-conditions".into(),
            value: 1.0 / 3.0,
            residual: 2.5e-17,
            tolerance: 1e-9,
            pass: true,
            seconds: 0.0,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&Report::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "check,anchor,value,residual,tolerance,pass,seconds\n"
        );
    }

    #[test]
    fn csv_round_trip() {
        let rep = Report {
            records: vec![record()],
            notes: vec![],
        };
        let mut buf = Vec::new();
        write_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("3.3333333333333331e-1"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rep);
    }

    #[test]
    fn json_round_trip() {
        let mut r2 = record();
        r2.value = f64::NAN;
        r2.pass = false;
        let rep = Report {
            records: vec![record(), r2],
            notes: vec![],
        };
        let mut buf = Vec::new();
        write_json(&rep, &mut buf).unwrap();
        let back = read_json(buf.as_slice()).unwrap();
        assert!(back.records.iter().zip(&rep.records).all(|(a, b)| a.same(b)));
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"value\": 3.3333333333333331e-1"));
    }
}
