//! CSV files with `# key = value` metadata lines ahead of a single header.

use crate::error::{CliError, CliResult};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Lossless text form of a double: 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

pub struct CsvBuilder {
    meta: Vec<(String, String)>,
    header: Vec<&'static str>,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvBuilder {
    pub fn new(header: &[&'static str]) -> Self {
        CsvBuilder {
            meta: Vec::new(),
            header: header.to_vec(),
            writer: csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new()),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta_num(self, key: &str, value: f64) -> Self {
        self.meta(key, num(value))
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len(), "row width must match the header");
        let fields: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => num(x),
                Cell::Int(i) => i.to_string(),
                Cell::Text(s) => s,
            })
            .collect();
        self.writer
            .write_record(&fields)
            .expect("writing to memory cannot fail");
    }

    pub fn finish(self) -> Vec<u8> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        let mut bytes = out.into_bytes();
        bytes.extend(self.writer.into_inner().expect("in-memory writer"));
        bytes
    }
}

/// A parsed CSV file with typed access by column name.
pub struct CsvFile {
    pub path: String,
    pub meta: BTreeMap<String, String>,
    header: Vec<String>,
    /// `(line number, fields)`.
    rows: Vec<(usize, Vec<String>)>,
}

impl CsvFile {
    pub fn parse(path: &Path, text: &str) -> CliResult<Self> {
        let mut meta = BTreeMap::new();
        let mut body_start = 0;
        let mut header_line = 0;
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if let Some(rest) = t.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                body_start += line.len() + 1;
            } else if t.is_empty() {
                body_start += line.len() + 1;
            } else {
                header_line = i + 1;
                break;
            }
        }
        let body = text.get(body_start.min(text.len())..).unwrap_or("");
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::input_at(path, format!("line {header_line}: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(CliError::input_at(path, "missing header line"));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize + header_line - 1).unwrap_or(header_line);
                CliError::input_at(path, format!("line {line}: {e}"))
            })?;
            let line = rec.position().map(|p| p.line() as usize + header_line - 1).unwrap_or(0);
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(CsvFile {
            path: path.display().to_string(),
            meta,
            header,
            rows,
        })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = crate::io::read_text(path)?;
        Self::parse(path, &text)
    }

    fn err(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::input(format!("{}: {msg}", self.path))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    fn index(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.err(format!("missing column `{name}` (have {})", self.header.join(","))))
    }

    fn cell(&self, row: usize, col: usize, name: &str) -> CliResult<&str> {
        let (line, fields) = &self.rows[row];
        fields
            .get(col)
            .map(String::as_str)
            .ok_or_else(|| self.err(format!("line {line}, column {} (`{name}`): missing field", col + 1)))
    }

    pub fn column_f64(&self, name: &str) -> CliResult<Vec<f64>> {
        let col = self.index(name)?;
        (0..self.rows.len())
            .map(|i| {
                let s = self.cell(i, col, name)?;
                s.parse::<f64>().map_err(|_| {
                    self.err(format!(
                        "line {}, column {} (`{name}`): `{s}` is not a number",
                        self.rows[i].0,
                        col + 1
                    ))
                })
            })
            .collect()
    }

    pub fn column_text(&self, name: &str) -> CliResult<Vec<String>> {
        let col = self.index(name)?;
        (0..self.rows.len())
            .map(|i| self.cell(i, col, name).map(str::to_string))
            .collect()
    }

    pub fn meta_str(&self, key: &str) -> CliResult<&str> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| self.err(format!("missing metadata `# {key} = ...`")))
    }

    pub fn meta_f64(&self, key: &str) -> CliResult<f64> {
        let s = self.meta_str(key)?;
        s.parse()
            .map_err(|_| self.err(format!("metadata `{key}`: `{s}` is not a number")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        for x in [std::f64::consts::PI, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn reads_back_what_it_writes() {
        let mut b = CsvBuilder::new(&["a", "b"]).meta("kind", "test").meta_num("x", 0.1);
        b.row(vec![1.5.into(), "y".into()]);
        b.row(vec![(-2.0).into(), "z".into()]);
        let text = String::from_utf8(b.finish()).unwrap();
        let f = CsvFile::parse(Path::new("mem.csv"), &text).unwrap();
        assert_eq!(f.meta_str("kind").unwrap(), "test");
        assert_eq!(f.meta_f64("x").unwrap(), 0.1);
        assert_eq!(f.column_f64("a").unwrap(), vec![1.5, -2.0]);
        assert_eq!(f.column_text("b").unwrap(), vec!["y", "z"]);
    }

    #[test]
    fn reports_line_and_column_of_bad_numbers() {
        let text = "# n = 1\nk,delta\n1,2\n3,oops\n";
        let f = CsvFile::parse(Path::new("d.csv"), text).unwrap();
        let e = f.column_f64("delta").unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("line 4, column 2"), "{}", e.message);
    }
}
