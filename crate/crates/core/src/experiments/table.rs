use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Real(x) => Some(x),
            _ => None,
        }
    }

    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(i) => write!(out, "{i}").unwrap(),
            // 17 significant digits.
            Cell::Real(x) if x.is_finite() => write!(out, "{x:.16e}").unwrap(),
            Cell::Real(x) => write!(out, "{x}").unwrap(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                write!(out, "\"{}\"", s.replace('"', "\"\"")).unwrap()
            }
            Cell::Text(s) => out.push_str(s),
            Cell::Missing => {}
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
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

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Real)
    }
}

/// A named result table with a fixed column schema and a metadata blob
/// (config snapshot, artifact version, seeds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub name: String,
    pub schema: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: serde_json::Value,
}

impl ResultTable {
    pub fn new(name: &str, schema: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            schema: schema.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::InvalidArgument(format!(
                "table '{}' expects {} columns, row has {}",
                self.name,
                self.schema.len(),
                row.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.schema.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(format!("{}.csv", self.name)), self.to_csv())?;
        let meta = serde_json::to_string_pretty(&self.metadata)?;
        std::fs::write(dir.join(format!("{}.meta.json", self.name)), meta + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_is_enforced() {
        let mut t = ResultTable::new("t", &["a", "b"]);
        assert!(t.push(vec![1usize.into()]).is_err());
        assert!(t.push(vec![1usize.into(), 0.5.into()]).is_ok());
    }

    #[test]
    fn csv_rendering() {
        let mut t = ResultTable::new("t", &["n", "x", "s", "m"]);
        t.push(vec![3usize.into(), 0.1.into(), "a,b".into(), Cell::Missing]).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv, "n,x,s,m\n3,1.0000000000000001e-1,\"a,b\",\n");
        let parsed: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(parsed, 0.1);
    }
}
