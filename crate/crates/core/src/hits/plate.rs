//! Plate data model and the `plate_id,row,col,role,value` CSV loader.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;

pub const PLATE_CSV_HEADER: [&str; 5] = ["plate_id", "row", "col", "role", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WellRole {
    PositiveControl,
    NegativeControl,
    Sample,
    Empty,
}

impl FromStr for WellRole {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pos" => Ok(WellRole::PositiveControl),
            "neg" => Ok(WellRole::NegativeControl),
            "sample" => Ok(WellRole::Sample),
            "empty" => Ok(WellRole::Empty),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WellAddress {
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub row: u32,
    pub col: u32,
    pub role: WellRole,
    pub value: Option<f64>,
}

impl Well {
    pub fn address(&self) -> WellAddress {
        WellAddress {
            row: self.row,
            col: self.col,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plate {
    pub plate_id: String,
    pub wells: Vec<Well>,
}

impl Plate {
    /// Builds a plate, checking address uniqueness and that every non-empty
    /// well has a finite value.
    pub fn new(plate_id: impl Into<String>, wells: Vec<Well>) -> Result<Self> {
        let plate_id = plate_id.into();
        let mut seen = HashSet::new();
        for w in &wells {
            if !seen.insert(w.address()) {
                return Err(Error::DuplicateWell {
                    line: 0,
                    plate: plate_id,
                    row: w.row,
                    col: w.col,
                });
            }
            match (w.role, w.value) {
                (WellRole::Empty, _) => {}
                (_, Some(v)) if v.is_finite() => {}
                (_, v) => {
                    return Err(Error::NonFiniteValue {
                        line: 0,
                        value: format!("{v:?}"),
                    })
                }
            }
        }
        Ok(Self { plate_id, wells })
    }

    pub fn values_with_role(&self, role: WellRole) -> Vec<f64> {
        self.wells
            .iter()
            .filter(|w| w.role == role)
            .filter_map(|w| w.value)
            .collect()
    }

    pub fn count(&self, role: WellRole) -> usize {
        self.wells.iter().filter(|w| w.role == role).count()
    }

    /// Negative and positive control groups; each needs at least `min_each`
    /// wells.
    pub fn controls(&self, min_each: usize) -> Result<(SampleSet, SampleSet)> {
        let neg = self.values_with_role(WellRole::NegativeControl);
        let pos = self.values_with_role(WellRole::PositiveControl);
        if neg.len() < min_each.max(1) || pos.len() < min_each.max(1) {
            return Err(Error::InsufficientControls {
                plate: self.plate_id.clone(),
                pos: pos.len(),
                neg: neg.len(),
                required: min_each.max(1),
            });
        }
        Ok((
            SampleSet::new(format!("{} neg", self.plate_id), neg)?,
            SampleSet::new(format!("{} pos", self.plate_id), pos)?,
        ))
    }

    pub fn samples(&self) -> impl Iterator<Item = (WellAddress, f64)> + '_ {
        self.wells
            .iter()
            .filter(|w| w.role == WellRole::Sample)
            .filter_map(|w| w.value.map(|v| (w.address(), v)))
    }
}

fn parse_position(field: &str, what: &str, line: u64) -> Result<u32> {
    let field = field.trim();
    let parsed = if !field.is_empty() && field.chars().all(|c| c.is_ascii_alphabetic()) && field.len() == 1 {
        // Letter rows as printed on plates: A = 1.
        Some(u32::from(field.to_ascii_uppercase().as_bytes()[0] - b'A') + 1)
    } else {
        field.parse::<u32>().ok()
    };
    match parsed {
        Some(v) if v >= 1 => Ok(v),
        _ => Err(Error::MalformedRow {
            line,
            reason: format!("{what} must be a positive integer, got '{field}'"),
        }),
    }
}

/// Reads plates from CSV. Plates are returned in order of first appearance.
///
/// Header (required): `plate_id,row,col,role,value`. Roles are `pos`, `neg`,
/// `sample` or `empty`, case-insensitive; `value` may be blank only for
/// `empty` wells. Rows may also be given as single letters (`A` = 1).
pub fn load_plate_csv<R: Read>(reader: R) -> Result<Vec<Plate>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let found: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if found != PLATE_CSV_HEADER {
        return Err(Error::MissingHeader {
            expected: PLATE_CSV_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut plates: Vec<(String, Vec<Well>, HashSet<WellAddress>)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != PLATE_CSV_HEADER.len() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let plate_id = record[0].to_string();
        if plate_id.is_empty() {
            return Err(Error::MalformedRow {
                line,
                reason: "empty plate_id".into(),
            });
        }
        let row = parse_position(&record[1], "row", line)?;
        let col = parse_position(&record[2], "col", line)?;
        let role: WellRole = record[3].parse().map_err(|_| Error::UnknownRole {
            line,
            role: record[3].to_string(),
        })?;
        let raw = &record[4];
        let value = if raw.is_empty() {
            if role != WellRole::Empty {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("missing value for role '{}'", &record[3]),
                });
            }
            None
        } else {
            let v: f64 = raw.parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("value '{raw}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    line,
                    value: raw.to_string(),
                });
            }
            Some(v)
        };

        let idx = match plates.iter().position(|(id, _, _)| *id == plate_id) {
            Some(i) => i,
            None => {
                plates.push((plate_id.clone(), Vec::new(), HashSet::new()));
                plates.len() - 1
            }
        };
        let (_, wells, seen) = &mut plates[idx];
        if !seen.insert(WellAddress { row, col }) {
            return Err(Error::DuplicateWell {
                line,
                plate: plate_id,
                row,
                col,
            });
        }
        wells.push(Well { row, col, role, value });
    }
    Ok(plates
        .into_iter()
        .map(|(plate_id, wells, _)| Plate { plate_id, wells })
        .collect())
}

pub fn load_plate_csv_path(path: impl AsRef<Path>) -> Result<Vec<Plate>> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    load_plate_csv(std::io::BufReader::new(file))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::MalformedRow {
            line,
            reason: e.to_string(),
        },
    }
}

/// Writes plates in the loader's CSV schema.
pub fn write_plate_csv<W: std::io::Write>(plates: &[Plate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(PLATE_CSV_HEADER).map_err(io)?;
    for p in plates {
        for well in &p.wells {
            let role = match well.role {
                WellRole::PositiveControl => "pos",
                WellRole::NegativeControl => "neg",
                WellRole::Sample => "sample",
                WellRole::Empty => "empty",
            };
            let value = well.value.map(|v| format!("{v:?}")).unwrap_or_default();
            w.write_record([
                p.plate_id.as_str(),
                &well.row.to_string(),
                &well.col.to_string(),
                role,
                &value,
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
