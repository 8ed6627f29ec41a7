//! Report rows and their CSV / JSON rendering.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

pub const CSV_HEADER: &str = "check_id,p,r,alpha,beta,a,N,seed,value,constant,margin,pass,runtime_ms";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub check_id: String,
    pub p: f64,
    pub r: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub a: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub value: f64,
    pub constant: Option<f64>,
    pub margin: f64,
    pub pass: bool,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}'")),
        }
    }
}

/// Rows plus optional structured attachments (certificates, bracketing evidence).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub extras: Map<String, Value>,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

impl ReportRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.check_id,
            float(self.p),
            float(self.r),
            opt_float(self.alpha),
            opt_float(self.beta),
            float(self.a),
            self.n,
            self.seed,
            float(self.value),
            opt_float(self.constant),
            float(self.margin),
            self.pass,
            self.runtime_ms
        )
    }
}

impl Report {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn attach(&mut self, key: &str, value: Value) {
        self.extras.insert(key.to_string(), value);
    }

    pub fn write<W: Write>(&self, format: Format, out: &mut W) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{CSV_HEADER}")?;
                for row in &self.rows {
                    writeln!(out, "{}", row.csv_line())?;
                }
            }
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("rows".into(), serde_json::to_value(&self.rows)?);
                for (k, v) in &self.extras {
                    obj.insert(k.clone(), v.clone());
                }
                serde_json::to_writer_pretty(&mut *out, &Value::Object(obj))?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}
