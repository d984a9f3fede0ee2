//! CSV and JSON artifacts. Both embed the resolved configuration and seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Num(f64),
    Bool(bool),
    Missing,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

/// 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::from(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

/// Report of one subcommand run.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub command: &'static str,
    pub pass: bool,
    pub summary: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Artifact {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self { command, pass: true, summary: Value::Object(Map::new()), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, cfg: &RunConfig, format: Format) -> Result<Vec<u8>, CliError> {
        let config = serde_json::to_value(cfg).map_err(|e| CliError::runtime(e.to_string()))?;
        match format {
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
                    .collect();
                let doc = json!({
                    "command": self.command,
                    "seed": cfg.seed,
                    "config": config,
                    "pass": self.pass,
                    "summary": self.summary,
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::runtime(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut out = Vec::new();
                let mut line = |k: &str, v: String| writeln!(out, "# {k}: {v}").expect("write to memory");
                line("command", self.command.to_string());
                line("seed", cfg.seed.to_string());
                line("config", config.to_string());
                line("summary", self.summary.to_string());
                line("pass", self.pass.to_string());
                let mut w = csv::Writer::from_writer(out);
                let io = |e: csv::Error| CliError::runtime(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::csv)).map_err(io)?;
                }
                w.into_inner().map_err(|e| CliError::runtime(e.to_string()))
            }
        }
    }

    /// Writes `<out>/<command>.<ext>` and returns the path.
    pub fn write(&self, cfg: &RunConfig, format: Format, out: &Path) -> Result<PathBuf, CliError> {
        let bytes = self.render(cfg, format)?;
        std::fs::create_dir_all(out).map_err(|e| CliError::usage(format!("cannot create {}: {e}", out.display())))?;
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let path = out.join(format!("{}.{ext}", self.command));
        std::fs::write(&path, bytes).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(1e3), "1.0000000000000000e3");
        assert_eq!(format_number(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_number(f64::NAN), "NaN");
        let x = std::f64::consts::PI;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut a = Artifact::new("demo", vec!["id", "x", "ok"]);
        a.push(vec!["a,b".into(), 1.5.into(), true.into()]);
        a.summary = json!({"k": 1});
        let text = String::from_utf8(a.render(&RunConfig::default(), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command: demo");
        assert_eq!(lines[1], "# seed: 0");
        assert!(lines[2].starts_with("# config: {"));
        assert_eq!(lines[5], "id,x,ok");
        assert_eq!(lines[6], "\"a,b\",1.5000000000000000e0,true");
    }

    #[test]
    fn json_embeds_config() {
        let a = Artifact::new("demo", vec!["x"]);
        let v: Value = serde_json::from_slice(&a.render(&RunConfig::default(), Format::Json).unwrap()).unwrap();
        assert_eq!(v["config"]["grid_size"], 48);
        assert_eq!(v["seed"], 0);
    }
}
