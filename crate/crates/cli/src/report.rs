//! Tabular reports: CSV rows plus a JSON summary, and the failure diff table.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

pub struct Report {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Indices of rows whose check failed.
    pub failed: Vec<usize>,
    pub extra: Map<String, Value>,
    /// Print rows as JSON objects instead of CSV.
    pub json_rows: bool,
}

impl Report {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Report { name: name.into(), header: header.to_vec(), rows: vec![], failed: vec![], extra: Map::new(), json_rows: false }
    }

    pub fn row(&mut self, cells: Vec<String>, ok: bool) {
        if !ok {
            self.failed.push(self.rows.len());
        }
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, v: Value) {
        self.extra.insert(key.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn summary(&self) -> Value {
        let mut m = Map::new();
        m.insert("report".into(), json!(self.name));
        m.insert("rows".into(), json!(self.rows.len()));
        m.insert("failed".into(), json!(self.failed.len()));
        m.insert("passed".into(), json!(self.passed()));
        m.extend(self.extra.clone());
        Value::Object(m)
    }

    fn write_rows<W: Write>(&self, mut w: W) -> io::Result<()> {
        if !self.json_rows {
            return self.write_csv(w);
        }
        let objs: Vec<Map<String, Value>> = self.rows.iter().map(|r| self.header.iter().zip(r).map(|(h, c)| (h.to_string(), json!(c))).collect()).collect();
        serde_json::to_writer_pretty(&mut w, &objs)?;
        writeln!(w)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()
    }

    /// Writes `<out>/<name>.csv` and `<out>/<name>.json`, or the CSV to `csv_path`
    /// when given, or the CSV to stdout.
    pub fn emit(&self, out: Option<&Path>, csv_path: Option<&Path>) -> io::Result<()> {
        let summary = serde_json::to_string_pretty(&self.summary())? + "\n";
        if let Some(path) = csv_path {
            self.write_rows(fs::File::create(path)?)?;
        }
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            if csv_path.is_none() {
                let ext = if self.json_rows { "rows.json" } else { "csv" };
                self.write_rows(fs::File::create(dir.join(format!("{}.{ext}", self.name)))?)?;
            }
            fs::write(dir.join(format!("{}.json", self.name)), &summary)?;
        }
        if out.is_none() && csv_path.is_none() {
            self.write_rows(io::stdout().lock())?;
        } else {
            print!("{summary}");
        }
        Ok(())
    }

    /// Aligned table of the failing rows.
    pub fn diff_table(&self) -> String {
        let rows: Vec<&Vec<String>> = self.failed.iter().map(|&i| &self.rows[i]).collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r.iter()) {
                *w = (*w).max(c.chars().count());
            }
        }
        let fmt = |cells: Vec<&str>| -> String { cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join(" | ").trim_end().to_string() };
        let mut s = format!("{} failing row(s) in {}\n", rows.len(), self.name);
        s += &fmt(self.header.clone());
        s.push('\n');
        s += &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-");
        s.push('\n');
        for r in rows {
            s += &fmt(r.iter().map(String::as_str).collect());
            s.push('\n');
        }
        s
    }
}
