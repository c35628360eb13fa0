//! Serialization of results: JSON with 12-significant-digit floats, and
//! CSV tables built from the same values.

use assayqc_core::hits::{HitReport, ThresholdEvaluation};
use assayqc_core::report::{format_sig12, round_sig12};
use assayqc_core::simulation::figures::{Panel, TIDY_COLUMNS};
use assayqc_core::simulation::NullCalibrationTable;
use assayqc_core::{Error, MetricReport, Result};
use serde::Serialize;
use serde_json::Value;

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_sig12(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON, keys sorted, every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(format!("serializing JSON: {e}")))?;
    let mut text = serde_json::to_string_pretty(&round_floats(v)).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn num(x: f64) -> String {
    format_sig12(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn metrics_csv(reports: &[MetricReport]) -> Result<String> {
    let header = [
        "label",
        "n_neg",
        "n_pos",
        "bins",
        "snr",
        "sbr",
        "z_factor",
        "ssmd",
        "cnr",
        "ovl",
        "gcnr",
        "gssmd",
        "sign",
        "accept_z_factor",
        "accept_ssmd",
        "accept_gssmd",
    ];
    csv_text(
        &header,
        reports.iter().map(|r| {
            vec![
                r.label.clone(),
                r.n_neg.to_string(),
                r.n_pos.to_string(),
                r.bins.to_string(),
                opt(r.snr),
                opt(r.sbr),
                opt(r.z_factor),
                opt(r.ssmd),
                opt(r.cnr),
                num(r.ovl),
                num(r.gcnr),
                num(r.gssmd),
                r.sign.to_string(),
                r.accepted.z_factor.to_string(),
                r.accepted.ssmd.to_string(),
                r.accepted.gssmd.to_string(),
            ]
        }),
    )
}

pub fn panel_csv(panel: &Panel) -> Result<String> {
    csv_text(
        &TIDY_COLUMNS,
        panel.rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.panel.clone(),
                r.dist.to_string(),
                num(r.neg_scale),
                r.n.to_string(),
                opt(r.mu_diff),
                opt(r.outlier_fraction),
                opt(r.outlier_mean),
                opt(r.snr_db),
                r.metric.clone(),
                r.aggregate.clone(),
                num(r.value),
            ]
        }),
    )
}

pub fn calibration_csv(t: &NullCalibrationTable) -> Result<String> {
    let header = [
        "dist",
        "location",
        "scale",
        "seed",
        "n",
        "trials",
        "bins",
        "mean",
        "variance",
        "min",
        "max",
        "p95",
        "p99",
        "p999",
        "signed_mean",
        "signed_std_error",
    ];
    csv_text(
        &header,
        t.rows.iter().map(|r| {
            vec![
                t.dist.kind.to_string(),
                num(t.dist.location),
                num(t.dist.scale),
                t.seed.to_string(),
                r.n.to_string(),
                r.trials.to_string(),
                r.bins.to_string(),
                num(r.mean),
                num(r.variance),
                num(r.min),
                num(r.max),
                num(r.p95),
                num(r.p99),
                num(r.p999),
                num(r.signed_mean),
                num(r.signed_std_error),
            ]
        }),
    )
}

/// Hit wells of each report, one row per well.
pub fn hits_csv(reports: &[&HitReport], evaluation: Option<&ThresholdEvaluation>) -> Result<String> {
    let header = ["plate_id", "row", "col", "threshold", "direction", "accuracy", "type1_error"];
    let eval = |f: fn(&ThresholdEvaluation) -> f64| evaluation.map(|e| num(f(e))).unwrap_or_default();
    let mut rows = Vec::new();
    for r in reports {
        for a in &r.hits {
            rows.push(vec![
                r.plate_id.clone(),
                a.row.to_string(),
                a.col.to_string(),
                num(r.threshold),
                direction_name(r.direction).into(),
                eval(|e| e.accuracy),
                eval(|e| e.type1_error),
            ]);
        }
    }
    csv_text(&header, rows)
}

pub fn direction_name(d: assayqc_core::hits::Direction) -> &'static str {
    match d {
        assayqc_core::hits::Direction::PositiveIsHigher => "higher",
        assayqc_core::hits::Direction::PositiveIsLower => "lower",
    }
}
