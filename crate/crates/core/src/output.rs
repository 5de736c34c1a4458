//! Machine-readable tables.
//!
//! CSV files start with one `# `-prefixed line holding the metadata object as
//! JSON, followed by a header row and the data rows. JSON files are
//! `{"metadata": {..}, "rows": [..]}`. Floats are written in their shortest
//! round-trip form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
}

#[derive(Serialize)]
struct Table<'a, T> {
    metadata: &'a Metadata,
    rows: &'a [T],
}

pub fn write_table<T: Serialize>(out: &mut dyn Write, format: Format, meta: &Metadata, rows: &[T]) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &Table { metadata: meta, rows })?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "# {}", serde_json::to_string(meta)?)?;
            let mut w = csv::Writer::from_writer(&mut *out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes a bare JSON document (used for the fixed point-set, coloring and
/// theory schemas).
pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
