use serde::Serialize;

use super::OutputFormat;
use crate::error::{Error, Result};

/// Renders command output into an in-memory buffer.
pub(super) struct Emitter {
    format: OutputFormat,
    buf: Vec<u8>,
}

impl Emitter {
    pub fn new(format: OutputFormat) -> Self {
        Self {
            format,
            buf: Vec::new(),
        }
    }

    pub fn is_json(&self) -> bool {
        self.format == OutputFormat::Json
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(&mut self.buf, value)
            .map_err(|e| Error::Format(e.to_string()))?;
        self.buf.push(b'\n');
        Ok(())
    }

    pub fn rows<R: Serialize>(&mut self, rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(&mut self.buf);
        for row in rows {
            w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// The whole report as JSON, or `rows` as CSV.
    pub fn json_or_rows<T: Serialize, R: Serialize>(&mut self, report: &T, rows: &[R]) -> Result<()> {
        if self.is_json() {
            self.json(report)
        } else {
            self.rows(rows)
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}
