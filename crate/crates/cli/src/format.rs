use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

/// Twelve significant digits, positional for moderate exponents and
/// scientific otherwise. Trailing zeros are dropped.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if (-5..12).contains(&exp) {
        if exp >= 0 {
            let split = exp as usize + 1;
            let (int, frac) = digits.split_at(split);
            join_decimal(int, frac)
        } else {
            let frac = format!("{}{}", "0".repeat((-exp - 1) as usize), digits);
            join_decimal("0", &frac)
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        format!("{}e{exp}", join_decimal(lead, rest))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn join_decimal(int: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
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

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        obj.insert(c.clone(), v.json());
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Output of one command: a data table plus the parameters and summary
/// figures that go into the run record.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub parameters: Value,
    pub summary: Value,
    pub table: Table,
}

impl Report {
    pub fn new(command: &str, parameters: impl Serialize, summary: Value, table: Table) -> Self {
        Self {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
            summary,
            table,
        }
    }

    /// Self-describing record: tool version, command, resolved config,
    /// parameters and summary.
    pub fn run_record(&self, config: &RunConfig, with_data: bool) -> Value {
        let mut record = json!({
            "tool": "freqbell",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": config,
            "parameters": self.parameters,
            "summary": self.summary,
        });
        if with_data {
            record["data"] = self.table.to_json();
        }
        record
    }

    pub fn to_csv(&self, config: &RunConfig) -> String {
        let compact = |v: &Value| serde_json::to_string(v).expect("json");
        let mut out = format!("# freqbell {} {}\n", env!("CARGO_PKG_VERSION"), self.command);
        out.push_str(&format!("# config {}\n", compact(&serde_json::to_value(config).expect("json"))));
        out.push_str(&format!("# parameters {}\n", compact(&self.parameters)));
        out.push_str(&format!("# summary {}\n", compact(&self.summary)));
        out.push_str(&self.table.to_csv());
        out
    }
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(2.566494962149585), "2.56649496215");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(-0.178), "-0.178");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1e-20), "1e-20");
        assert_eq!(sig12(std::f64::consts::TAU), "6.28318530718");
        assert_eq!(sig12(0.000123456789012345), "0.000123456789012");
        assert_eq!(sig12(9.9999999999999), "10");
        assert_eq!(sig12(1800.0), "1800");
        assert_eq!(sig12(193.125e12), "1.93125e14");
    }
}
