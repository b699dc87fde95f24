//! CSV emission and the matching readers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{LabError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabError::Parse {
                what: "table",
                detail: format!("no column `{name}`"),
            })
    }

    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse().map_err(|_| LabError::Parse {
                    what: "number",
                    detail: r[c].clone(),
                })
            })
            .collect()
    }

    pub fn str_column(&self, name: &str) -> Result<Vec<String>> {
        let c = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[c].clone()).collect())
    }
}

pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())?;
    }
    w.flush().map_err(LabError::io(path))?;
    Ok(())
}

/// Reads a CSV and checks its header.
pub fn read_table(path: &Path, header: &[&str]) -> Result<Table> {
    let file = File::open(path).map_err(LabError::io(path))?;
    let mut r = csv::Reader::from_reader(file);
    let got: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if got != header {
        return Err(LabError::Parse {
            what: "csv header",
            detail: format!("{} has {:?}, expected {:?}", path.display(), got, header),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok(Table { header: got, rows })
}

/// `key = value` lines.
pub fn write_kv(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}").map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

pub fn read_kv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once(" = ")
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| LabError::Parse {
                    what: "key = value line",
                    detail: l.to_string(),
                })
        })
        .collect()
}

/// JSON-like `{ "key": value, ... }` text for small reports.
pub fn write_json_like(path: &Path, pairs: &[(&str, f64)]) -> Result<()> {
    let body: Vec<String> = pairs
        .iter()
        .map(|(k, v)| format!("  \"{k}\": {}", fmt_f64(*v)))
        .collect();
    std::fs::write(path, format!("{{\n{}\n}}\n", body.join(",\n"))).map_err(LabError::io(path))
}

pub fn read_json_like(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
    text.lines()
        .map(str::trim)
        .filter(|l| l.starts_with('"'))
        .map(|l| {
            let l = l.trim_end_matches(',');
            let (k, v) = l.split_once(':').ok_or_else(|| LabError::Parse {
                what: "json-like line",
                detail: l.to_string(),
            })?;
            let v = v.trim().parse().map_err(|_| LabError::Parse {
                what: "number",
                detail: v.to_string(),
            })?;
            Ok((k.trim().trim_matches('"').to_string(), v))
        })
        .collect()
}
