//! Metric inputs: plate CSVs, or two-column `group,value` files.

use std::path::Path;

use assayqc_core::hits::{load_plate_csv, Plate, PLATE_CSV_HEADER};
use assayqc_core::{Error, Result, SampleSet};

pub const GROUP_CSV_HEADER: [&str; 2] = ["group", "value"];

/// A labelled pair of control groups ready for metric computation.
#[derive(Debug)]
pub struct GroupPair {
    pub label: String,
    pub neg: SampleSet,
    pub pos: SampleSet,
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn header_fields(bytes: &[u8]) -> Vec<String> {
    let text = String::from_utf8_lossy(bytes);
    let first = text.lines().next().unwrap_or("");
    first
        .trim_start_matches('\u{feff}')
        .split(',')
        .map(|f| f.trim().to_ascii_lowercase())
        .collect()
}

/// Reads either schema, chosen by the header line. Plates yield one pair
/// each (their control groups); a group file yields a single pair.
pub fn load_metric_input(bytes: &[u8], min_controls: usize) -> Result<Vec<GroupPair>> {
    let header = header_fields(bytes);
    if header == PLATE_CSV_HEADER {
        return load_plate_csv(bytes)?
            .into_iter()
            .map(|p| {
                let (neg, pos) = p.controls(min_controls)?;
                Ok(GroupPair {
                    label: p.plate_id,
                    neg,
                    pos,
                })
            })
            .collect();
    }
    if header == GROUP_CSV_HEADER {
        return load_group_csv(bytes).map(|p| vec![p]);
    }
    Err(Error::MissingHeader {
        expected: format!("{} (plates) or {} (two groups)", PLATE_CSV_HEADER.join(","), GROUP_CSV_HEADER.join(",")),
        found: header.join(","),
    })
}

/// `group,value` rows with group `pos` or `neg` (case-insensitive).
pub fn load_group_csv(bytes: &[u8]) -> Result<GroupPair> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let (mut neg, mut pos) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let target = match record[0].to_ascii_lowercase().as_str() {
            "pos" => &mut pos,
            "neg" => &mut neg,
            other => {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("group must be pos or neg, got '{other}'"),
                })
            }
        };
        let v: f64 = record[1].parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("value '{}' is not a number", &record[1]),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                line,
                value: record[1].to_string(),
            });
        }
        target.push(v);
    }
    if neg.is_empty() || pos.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "group file needs both pos and neg rows (found {} pos, {} neg)",
            pos.len(),
            neg.len()
        )));
    }
    Ok(GroupPair {
        label: "pos vs neg".into(),
        neg: SampleSet::new("neg", neg)?,
        pos: SampleSet::new("pos", pos)?,
    })
}

pub fn select_plate<'a>(plates: &'a [Plate], id: Option<&str>, what: &str) -> Result<&'a Plate> {
    match id {
        Some(id) => plates
            .iter()
            .find(|p| p.plate_id == id)
            .ok_or_else(|| Error::InvalidParameter(format!("{what} plate '{id}' not found"))),
        None => plates
            .first()
            .ok_or_else(|| Error::InvalidParameter(format!("{what} file has no plates"))),
    }
}
