//! Locale-independent CSV/JSON tables with 12 significant digits.

use serde_json::{Map, Value};

use crate::manifest::RunManifest;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{v:.digits$e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (digits as i32 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // round-trip through the printed digits so CSV and JSON agree
            Cell::Num(v) if v.is_finite() => sig(*v).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn header_line(manifest: &RunManifest) -> String {
    format!("# qmdisc {} manifest {}\n", manifest.version, manifest.manifest_checksum)
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, manifest: &RunManifest) -> String {
        let mut out = header_line(manifest);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(k, v)| (k.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn to_json(&self, manifest: &RunManifest) -> String {
        json_document(
            manifest,
            serde_json::json!({
                "columns": self.columns,
                "rows": self.rows_json(),
            }),
        )
    }
}

/// Wraps a payload with the version/checksum header fields.
pub fn json_document(manifest: &RunManifest, payload: Value) -> String {
    let mut doc = Map::new();
    doc.insert("tool".into(), Value::from("qmdisc"));
    doc.insert("version".into(), Value::from(manifest.version.clone()));
    doc.insert("manifest_checksum".into(), Value::from(manifest.manifest_checksum.clone()));
    doc.insert("command".into(), Value::from(manifest.command.clone()));
    doc.insert("result".into(), payload);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.6854101966249685), "0.685410196625");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(0.3), "0.3");
        assert_eq!(sig(0.30000000000000004), "0.3");
        assert_eq!(sig(-3.4641016151377544), "-3.46410161514");
        assert_eq!(sig(1.5e-7), "1.5e-7");
        assert_eq!(sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(f64::NAN), "nan");
        assert_eq!(sig(99.99999999999999), "100");
    }

    #[test]
    fn csv_has_header_comment() {
        let m = RunManifest::new("t", serde_json::json!({}), None);
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![0.5.into(), "x".into()]);
        let csv = t.to_csv(&m);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# qmdisc ") && lines[0].ends_with(&m.manifest_checksum));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "0.5,x");
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_nan_is_null() {
        let mut t = Table::new(&["v"]);
        t.push(vec![f64::NAN.into()]);
        assert_eq!(t.rows_json()[0]["v"], Value::Null);
    }
}
