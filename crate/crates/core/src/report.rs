//! Plot-ready exports of sweep results: JSON, long-format CSV, and the
//! compact trade-off table.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::convexity::RegionLabel;
use crate::error::{MvskError, Result};
use crate::moments::MomentModel;
use crate::projection::Domain;
use crate::sweep::SweepResult;

/// SHA-256 of the model's JSON export.
pub fn data_fingerprint(model: &MomentModel) -> Result<String> {
    let digest = Sha256::digest(model.to_json()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub s: u32,
    pub domain: Domain,
    pub sparse_k: Option<usize>,
    pub eta: Option<f64>,
    pub data_fingerprint: String,
    pub require_positive_mean_weight: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub lambda: [f64; 4],
    pub w: Option<Vec<f64>>,
    pub f: Option<[f64; 4]>,
    pub scaled: Option<[f64; 4]>,
    pub aggregate: Option<f64>,
    pub support_size: Option<usize>,
    pub region_label: RegionLabel,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    pub meta: SweepMeta,
    pub grid: Vec<[f64; 4]>,
    pub results: Vec<ResultRecord>,
}

pub fn records(sweep: &SweepResult) -> Vec<ResultRecord> {
    sweep
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let r = e.result();
            ResultRecord {
                lambda: e.point.lambda.as_array(),
                w: r.map(|r| r.w.clone()),
                f: r.map(|r| r.objectives.as_array()),
                scaled: sweep.scaled_values[i],
                aggregate: sweep.aggregate[i],
                support_size: r.map(|r| r.support_size()),
                region_label: e.region,
                converged: e.converged(),
                error: e.outcome.as_ref().err().cloned(),
            }
        })
        .collect()
}

pub fn sweep_file(sweep: &SweepResult, meta: SweepMeta) -> SweepFile {
    SweepFile {
        meta,
        grid: sweep.grid.points.iter().map(|p| p.lambda.as_array()).collect(),
        results: records(sweep),
    }
}

pub fn write_sweep_json<W: Write>(out: W, file: &SweepFile) -> Result<()> {
    serde_json::to_writer_pretty(out, file)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> MvskError {
    MvskError::Io(e.into())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn region_name(r: RegionLabel) -> &'static str {
    match r {
        RegionLabel::GlobalConvex => "global_convex",
        RegionLabel::DomainConvex => "domain_convex",
        RegionLabel::Unknown => "unknown",
    }
}

/// One row per grid point, keyed by `λ`.
pub fn write_results_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "lambda1",
        "lambda2",
        "lambda3",
        "lambda4",
        "f1",
        "f2",
        "f3",
        "f4",
        "scaled1",
        "scaled2",
        "scaled3",
        "scaled4",
        "aggregate",
        "support_size",
        "region",
        "converged",
        "error",
    ])
    .map_err(csv_error)?;
    for rec in records(sweep) {
        let mut row: Vec<String> = rec.lambda.iter().map(f64::to_string).collect();
        for i in 0..4 {
            row.push(opt(rec.f.map(|f| f[i])));
        }
        for i in 0..4 {
            row.push(opt(rec.scaled.map(|s| s[i])));
        }
        row.push(opt(rec.aggregate));
        row.push(opt(rec.support_size));
        row.push(region_name(rec.region_label).to_owned());
        row.push(rec.converged.to_string());
        row.push(rec.error.unwrap_or_default());
        wtr.write_record(&row).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Compact table for selected entries: `λ`, the four scaled values and the
/// support size, rounded to three decimals.
pub fn write_table_csv<W: Write>(out: W, sweep: &SweepResult, selection: &[usize]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "lambda",
        "f1_scaled",
        "f2_scaled",
        "f3_scaled",
        "f4_scaled",
        "support_size",
    ])
    .map_err(csv_error)?;
    for &i in selection {
        let entry = sweep
            .entries
            .get(i)
            .ok_or_else(|| MvskError::Domain(format!("no sweep entry {i}")))?;
        let (Some(scaled), Some(result)) = (sweep.scaled_values[i], entry.result()) else {
            continue;
        };
        let lambda = entry
            .point
            .lambda
            .as_array()
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(", ");
        let mut row = vec![format!("[{lambda}]")];
        row.extend(scaled.iter().map(|x| format!("{x:.3}")));
        row.push(result.support_size().to_string());
        wtr.write_record(&row).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(out: W, hist: &BTreeMap<usize, f64>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["support_size", "frequency"]).map_err(csv_error)?;
    for (k, v) in hist {
        wtr.write_record([k.to_string(), v.to_string()]).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub grid_points: usize,
    pub failures: usize,
    pub max_aggregate: Option<f64>,
    pub eta: f64,
    pub superior: Vec<(usize, f64)>,
    pub support_histogram: BTreeMap<usize, f64>,
    pub violations: Vec<(usize, usize)>,
}
