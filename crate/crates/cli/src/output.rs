//! Row-oriented output: JSON lines or CSV, in the order rows were produced.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

/// Bumped whenever a column is added, removed or renamed.
pub const SCHEMA: &str = "onsetqlab/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where an emitted number comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Computed from a simulation, an enumeration or sampled trials.
    Measured,
    /// A closed-form expression evaluated at the given parameters.
    Formula,
    /// The bound a claim asserts.
    ClaimBound,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Measured => "measured",
            Provenance::Formula => "formula",
            Provenance::ClaimBound => "claim-bound",
        }
    }
}

#[derive(Default)]
pub struct Rows {
    rows: Vec<Map<String, Value>>,
}

impl Rows {
    pub fn push(&mut self, row: Value) {
        let Value::Object(mut map) = row else {
            panic!("rows are JSON objects");
        };
        map.insert("schema".into(), Value::from(SCHEMA));
        self.rows.push(map);
    }

    /// A `quantity, value, provenance` row with the given context columns.
    pub fn quantity(
        &mut self,
        context: &Value,
        name: &str,
        value: impl Into<Value>,
        provenance: Provenance,
    ) {
        let mut row = context.as_object().cloned().unwrap_or_default();
        row.insert("quantity".into(), Value::from(name));
        row.insert("value".into(), value.into());
        row.insert("provenance".into(), Value::from(provenance.as_str()));
        self.push(Value::Object(row));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut out = Vec::new();
                for r in &self.rows {
                    serde_json::to_writer(&mut out, r)?;
                    out.push(b'\n');
                }
                Ok(out)
            }
            Format::Csv => {
                let columns: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.keys()).collect();
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&columns)?;
                for r in &self.rows {
                    w.write_record(columns.iter().map(|c| cell(r.get(*c))))?;
                }
                Ok(w.into_inner()?)
            }
        }
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        write_bytes(&self.render(format)?, out)
    }
}

pub fn write_bytes(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}
