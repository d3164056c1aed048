//! CSV rendering and the run manifest.
//!
//! Values print with 17 significant digits so a shortest-roundtrip reader
//! recovers the exact f64; identical configs therefore produce byte-identical
//! files whatever the thread count.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

pub struct Table {
    pub header: String,
    pub lines: Vec<String>,
}

impl Table {
    pub fn new(header: &str) -> Self {
        Table { header: header.to_string(), lines: Vec::new() }
    }

    pub fn push_row(&mut self, values: &[f64]) {
        self.lines.push(fmt_row(values));
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(32 * (self.lines.len() + 1));
        out.push_str(&self.header);
        out.push('\n');
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

pub fn fmt_row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    cells.join(",")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub timestamp: String,
    pub config: &'a Config,
    pub outputs: Vec<OutputRecord>,
    pub warnings: &'a [String],
    pub results: &'a serde_json::Value,
}
