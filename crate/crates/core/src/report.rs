//! Outcome of a bound check: fitted constants, per-point rows and verdict.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundCheckReport {
    pub name: String,
    pub constants: BTreeMap<String, f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub pass: bool,
    pub worst_point: Option<BTreeMap<String, f64>>,
    pub notes: Vec<String>,
}

impl BoundCheckReport {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        BoundCheckReport {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Marks row `i` as the worst point.
    pub fn set_worst(&mut self, i: usize) {
        if let Some(row) = self.rows.get(i) {
            self.worst_point = Some(
                self.columns
                    .iter()
                    .cloned()
                    .zip(row.iter().copied())
                    .collect(),
            );
        }
    }

    /// Rows as CSV with a header line; floats in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is serializable")
    }
}

/// Index of the largest value, ignoring NaN.
pub fn argmax(v: &[f64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_nan())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

pub fn argmin(v: &[f64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_nan())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_round_trip_floats() {
        let mut r = BoundCheckReport::new("x", &["a", "b"]);
        r.push(vec![0.1, 1.0 / 3.0]);
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "a,b\n0.1,0.3333333333333333\n");
        r.set_worst(0);
        assert_eq!(r.worst_point.unwrap()["b"], 1.0 / 3.0);
    }
}
