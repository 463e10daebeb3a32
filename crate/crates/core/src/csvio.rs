//! CSV plumbing shared by every file format in the crate.

use std::fs;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use csv::{ReaderBuilder, StringRecord, WriterBuilder};
use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub(crate) const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

pub(crate) fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

/// Accepts RFC 3339 or a bare `YYYY-MM-DD HH:MM[:SS]` read as UTC.
pub(crate) fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    Err(format!("unparseable timestamp `{s}`"))
}

pub(crate) fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|_| format!("unparseable date `{s}`"))
}

pub(crate) fn schema_error(file: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        file: file.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn map_csv_error(file: &Path, headers: &StringRecord, err: csv::Error) -> Error {
    match err.kind() {
        csv::ErrorKind::Deserialize { pos, err: de } => {
            let column = de
                .field()
                .and_then(|i| headers.get(i as usize))
                .unwrap_or("?");
            let row = pos.as_ref().map_or(0, |p| p.line() as usize);
            schema_error(file, row, column, de.kind().to_string())
        }
        csv::ErrorKind::UnequalLengths {
            pos,
            expected_len,
            len,
        } => {
            let row = pos.as_ref().map_or(0, |p| p.line() as usize);
            schema_error(
                file,
                row,
                "*",
                format!("expected {expected_len} fields, found {len}"),
            )
        }
        _ => Error::Csv(err),
    }
}

/// A parsed record together with its file line number.
#[derive(Debug)]
pub(crate) struct Row<T> {
    pub line: usize,
    pub value: T,
}

/// Reads every record of a headed CSV; `#` lines are comments.
pub(crate) fn read_rows<T: DeserializeOwned>(
    label: &Path,
    input: impl Read,
    required: &[&str],
) -> Result<Vec<Row<T>>> {
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| map_csv_error(label, &StringRecord::new(), e))?
        .clone();
    for col in required {
        if !headers.iter().any(|h| h == *col) {
            return Err(schema_error(label, 1, col, "required column missing from header"));
        }
    }
    let mut out = Vec::new();
    let mut record = StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line() as usize);
                let value = record
                    .deserialize(Some(&headers))
                    .map_err(|e| map_csv_error(label, &headers, e))?;
                out.push(Row { line, value });
            }
            Err(e) => return Err(map_csv_error(label, &headers, e)),
        }
    }
    Ok(out)
}

pub(crate) fn read_file<T: DeserializeOwned>(path: &Path, required: &[&str]) -> Result<Vec<Row<T>>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows(path, std::io::BufReader::new(file), required)
}

/// Renders a table with optional `#` preamble lines.
pub(crate) fn render(preamble: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for line in preamble {
        buf.extend_from_slice(b"# ");
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
    }
    let mut w = WriterBuilder::new().from_writer(buf);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<buffer>", e.into_error()))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Deserialize)]
    struct Rec {
        a: f64,
        #[allow(dead_code)]
        b: String,
    }

    #[test]
    fn schema_errors_name_row_and_column() {
        let text = "# note\na,b\n1.0,x\nnope,y\n";
        let err = read_rows::<Rec>(Path::new("t.csv"), text.as_bytes(), &["a", "b"]).unwrap_err();
        match err {
            Error::Schema { row, column, .. } => {
                assert_eq!(column, "a");
                assert_eq!(row, 4);
            }
            other => panic!("unexpected {other}"),
        }
        let err = read_rows::<Rec>(Path::new("t.csv"), "a\n1\n".as_bytes(), &["a", "b"]).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
        let ok = read_rows::<Rec>(Path::new("t.csv"), text.as_bytes(), &["a"]);
        assert!(ok.is_err());
        let rows = read_rows::<Rec>(Path::new("t.csv"), "a,b\n2,z\n".as_bytes(), &[]).unwrap();
        assert_eq!(rows[0].value.a, 2.0);
    }

    #[test]
    fn timestamps_round_trip() {
        let t = parse_timestamp("2010-11-07T05:00:00Z").unwrap();
        assert_eq!(format_timestamp(&t), "2010-11-07T05:00:00Z");
        assert_eq!(parse_timestamp("2010-11-07 05:00").unwrap(), t);
        assert!(parse_timestamp("yesterday").is_err());
    }
}
