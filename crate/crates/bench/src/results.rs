//! The per-generation CSV written by [`crate::run_plan`].

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const COLUMNS: [&str; 11] = [
    "fingerprint",
    "seed",
    "generation",
    "igd",
    "hv_raw",
    "hv_normalized",
    "t_variation",
    "t_sort",
    "t_niche",
    "t_eval",
    "timed_out",
];

/// One generation of one run. Empty metric cells mean the metric was not
/// scheduled or does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub fingerprint: String,
    pub seed: u64,
    pub generation: usize,
    pub igd: Option<f64>,
    pub hv_raw: Option<f64>,
    pub hv_normalized: Option<f64>,
    pub t_variation: f64,
    pub t_sort: f64,
    pub t_niche: f64,
    pub t_eval: f64,
    pub timed_out: bool,
}

impl ResultRow {
    pub fn t_total(&self) -> f64 {
        self.t_variation + self.t_sort + self.t_niche + self.t_eval
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS).map_err(csv_io)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_io)?;
    }
    w.flush().map_err(|e| BenchError::io("<csv>", e))
}

/// Parses a result file. The header must match [`COLUMNS`] exactly.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| parse_error(1, e))?.clone();
    if !headers.iter().eq(COLUMNS) {
        return Err(BenchError::Parse {
            line: 1,
            message: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: ResultRow = record.deserialize(Some(&headers)).map_err(|e| parse_error(line, e))?;
        rows.push(row);
    }
    Ok(rows)
}

fn parse_error(line: u64, e: csv::Error) -> BenchError {
    BenchError::Parse {
        line,
        message: e.to_string(),
    }
}

fn csv_io(e: csv::Error) -> BenchError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => BenchError::io("<csv>", e),
        other => BenchError::Config(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(generation: usize) -> ResultRow {
        ResultRow {
            fingerprint: "ab12".into(),
            seed: 7,
            generation,
            igd: Some(0.125),
            hv_raw: None,
            hv_normalized: None,
            t_variation: 0.5,
            t_sort: 0.25,
            t_niche: 0.125,
            t_eval: 0.0625,
            timed_out: false,
        }
    }

    #[test]
    fn header_and_empty_cells() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row(1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "ab12,7,1,0.125,,,0.5,0.25,0.125,0.0625,false");
        assert_eq!(read_rows(text.as_bytes()).unwrap(), vec![row(1)]);
    }

    #[test]
    fn empty_file_still_has_header() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), COLUMNS.join(","));
    }

    #[test]
    fn malformed_row_reports_line() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row(1), row(2)]).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("ab12,7,three,,,,0,0,0,0,false\n");
        match read_rows(text.as_bytes()) {
            Err(BenchError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let short = format!("{}\nab12,7\n", COLUMNS.join(","));
        assert!(matches!(read_rows(short.as_bytes()), Err(BenchError::Parse { line: 2, .. })));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(matches!(read_rows("a,b\n1,2\n".as_bytes()), Err(BenchError::Parse { line: 1, .. })));
    }
}
