use std::io::Write;
use std::path::{Path, PathBuf};

use hopfield::constraints::DELTA_CONVENTION;
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Output directory: `HOPFIELD_OUTPUT_DIR` when set, else the configured path.
pub fn output_dir(configured: &Path) -> PathBuf {
    std::env::var_os("HOPFIELD_OUTPUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| configured.to_path_buf())
}

pub struct Writer {
    pub dir: PathBuf,
    pub format: Format,
    pub hash: String,
}

impl Writer {
    fn comment(&self) -> String {
        format!(
            "# config_hash={} delta_convention={}",
            self.hash, DELTA_CONVENTION
        )
    }

    pub fn table(&self, stem: &str, t: &Table) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        match self.format {
            Format::Csv => {
                let path = self.dir.join(format!("{stem}.csv"));
                let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
                writeln!(f, "{}", self.comment())?;
                writeln!(f, "{}", t.header.join(","))?;
                for r in &t.rows {
                    let line: Vec<String> = r.iter().map(Cell::csv).collect();
                    writeln!(f, "{}", line.join(","))?;
                }
                f.flush()?;
                Ok(path)
            }
            Format::Json => {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| {
                        let mut o = Map::new();
                        for (h, c) in t.header.iter().zip(r) {
                            o.insert(h.to_string(), c.json());
                        }
                        Value::Object(o)
                    })
                    .collect();
                self.json(stem, &serde_json::json!({ "rows": rows }))
            }
        }
    }

    pub fn json(&self, stem: &str, body: &Value) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{stem}.json"));
        let doc = serde_json::json!({
            "config_hash": self.hash,
            "delta_convention": DELTA_CONVENTION,
            "report": body,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
