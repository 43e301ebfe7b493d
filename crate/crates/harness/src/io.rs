//! File readers that report `path:line` on malformed input.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use newsvendor_core::ambiguity::AmbiguitySet;
use newsvendor_core::SampleSet;
use serde::de::DeserializeOwned;

/// Parses a JSON document. Syntax errors carry the line and column; value
/// checks that fail after parsing carry no position, so only the file is named.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    serde_json::from_str(&text).map_err(|e| match e.line() {
        0 => anyhow!("{}: {e}", path.display()),
        line => anyhow!("{}:{line}:{}: {e}", path.display(), e.column()),
    })
}

/// Reads an ambiguity set in JSONL form.
pub fn read_ambiguity(path: &Path) -> Result<AmbiguitySet> {
    let file = fs::File::open(path).with_context(|| format!("{}: cannot read", path.display()))?;
    // member errors already name their line
    AmbiguitySet::read_jsonl(BufReader::new(file)).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Reads an N×T sample matrix: one observation per line, comma separated.
/// A first line that does not parse as numbers is taken as a header.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let file = fs::File::open(path).with_context(|| format!("{}: cannot read", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen_content = false;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.with_context(|| format!("{}:{lineno}: unreadable line", path.display()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = trimmed.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        bail!("{}:{lineno}: expected {} values, found {}", path.display(), first.len(), row.len());
                    }
                }
                if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                    bail!("{}:{lineno}: non-finite value {x}", path.display());
                }
                rows.push(row);
            }
            Err(_) if !seen_content => {}
            Err(e) => bail!("{}:{lineno}: {e}", path.display()),
        }
        seen_content = true;
    }
    if rows.is_empty() {
        bail!("{}: no sample rows", path.display());
    }
    SampleSet::from_rows(rows).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Writes samples with a `d1,…,dT` header.
pub fn write_samples<W: Write>(samples: &SampleSet, mut out: W) -> Result<()> {
    let header: Vec<String> = (1..=samples.horizon()).map(|t| format!("d{t}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in samples.rows() {
        let fields: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
