//! Artifact writers. Every file starts with `# blowup <version> config=<sha256>`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::VERSION;

/// SHA-256 of the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn header_line(hash: &str) -> String {
    format!("# blowup {VERSION} config={hash}")
}

/// A CSV field: numbers use the shortest round-trip form.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

pub fn write_csv<I>(path: &Path, hash: &str, columns: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    let mut file = create(path)?;
    writeln!(file, "{}", header_line(hash)).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| Error::invalid(format!("csv {}: {e}", path.display()));
    w.write_record(columns).map_err(csv_err)?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::invalid(format!(
                "row of {} cells for {} columns in {}",
                row.len(),
                columns.len(),
                path.display()
            )));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty JSON whose first member is the header string. Bodies that are
/// not objects go under `data`.
pub fn write_json<T: Serialize>(path: &Path, hash: &str, body: &T) -> Result<()> {
    let mut out = serde_json::Map::new();
    out.insert("header".into(), header_line(hash).into());
    match serde_json::to_value(body)? {
        serde_json::Value::Object(m) => out.extend(m),
        other => {
            out.insert("data".into(), other);
        }
    }
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, &out)?;
    writeln!(file).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = create(path)?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Numeric table read back from a file written by [`write_csv`].
#[derive(Debug, Clone)]
pub struct Table {
    pub header: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::invalid(format!("no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|e| Error::io(path, e))?;
    if !header.starts_with("# blowup ") {
        return Err(Error::invalid(format!("{} lacks the artifact header", path.display())));
    }
    let mut r = csv::Reader::from_reader(reader);
    let bad = |e: String| Error::invalid(format!("{}: {e}", path.display()));
    let columns: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table {
        header: header.trim_end().to_string(),
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_bits() {
        let dir = std::env::temp_dir().join(format!("blowup-io-{}", std::process::id()));
        let path = dir.join("t.csv");
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 7.0];
        write_csv(&path, "abc", &["r", "u"], vals.iter().map(|&v| vec![v.into(), (v * 2.0).into()])).unwrap();
        let t = read_csv(&path).unwrap();
        assert_eq!(t.header, header_line("abc"));
        assert_eq!(t.column("r").unwrap(), vals.to_vec());
        assert!(t.column("z").is_err());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&("x", 1.0)).unwrap();
        assert_eq!(a, config_hash(&("x", 1.0)).unwrap());
        assert_ne!(a, config_hash(&("x", 2.0)).unwrap());
        assert_eq!(a.len(), 64);
    }
}
