use std::io::{Read, Write};

use crate::{Error, Result};

/// `# key: value` lines written ahead of the header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Metadata::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Shortest round-trip representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<W: Write>(mut w: W, meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    for (k, v) in &meta.entries {
        writeln!(w, "# {k}: {v}")?;
    }
    let mut out = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for r in rows {
        out.write_record(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: Metadata,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| r[c].parse().ok()).collect()
    }
}

pub fn read_csv<R: Read>(mut r: R) -> Result<CsvTable> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut meta = Metadata::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line[1..].trim().split_once(": ") {
            meta.entries.push((k.to_string(), v.to_string()));
        }
    }
    let mut rd = ::csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.map(|r| r.iter().map(String::from).collect())).collect::<std::result::Result<_, _>>().map_err(csv_err)?;
    Ok(CsvTable { meta, header, rows })
}

fn csv_err(e: ::csv::Error) -> Error {
    Error::Input(format!("csv: {e}"))
}
