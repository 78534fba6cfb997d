use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use super::{BuildingAssignment, Consistency, ShareRow};
use crate::error::{Error, Result};
use crate::esm::KPI_HEADER;
use crate::geodata::Dataset;
use crate::optimizer::ArchiveEntry;

const KPI_COLUMNS: [&str; 3] = [KPI_HEADER[1], KPI_HEADER[2], KPI_HEADER[3]];

/// `config_id,gene_0..gene_{L-1},<three indicators>`; floats are written in
/// shortest round-trip form so a re-read archive is bit-identical.
pub fn write_archive_csv(entries: &[ArchiveEntry], path: &Path) -> Result<()> {
    let genes = entries.first().map_or(0, |e| e.genome.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["config_id".to_string()];
    header.extend((0..genes).map(|i| format!("gene_{i}")));
    header.extend(KPI_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for e in entries {
        let mut row = vec![e.config_id.to_string()];
        row.extend(e.genome.iter().chain(&e.objectives).map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_archive_csv(path: &Path) -> Result<Vec<ArchiveEntry>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    if header.get(0) != Some("config_id") {
        return Err(Error::Schema {
            file: path.display().to_string(),
            column: "config_id".into(),
        });
    }
    for c in KPI_COLUMNS {
        if !header.iter().any(|h| h == c) {
            return Err(Error::Schema {
                file: path.display().to_string(),
                column: c.into(),
            });
        }
    }
    let genes = header.len() - 1 - KPI_COLUMNS.len();
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(format!("row {}: bad number in column {}", line + 2, i + 1)))
        };
        let config_id = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(format!("row {}: bad config_id", line + 2)))?;
        out.push(ArchiveEntry {
            config_id,
            genome: (1..=genes).map(num).collect::<Result<_>>()?,
            objectives: (genes + 1..genes + 1 + KPI_COLUMNS.len())
                .map(num)
                .collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

pub fn write_kpi_csv(entries: &[ArchiveEntry], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(KPI_HEADER)?;
    for e in entries {
        let mut row = vec![e.config_id.to_string()];
        row.extend(e.objectives.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_assignment_geojson(dataset: &Dataset, assignments: &[BuildingAssignment], path: &Path) -> Result<()> {
    if assignments.len() != dataset.len() {
        return Err(Error::Argument("one assignment per building required".into()));
    }
    let features: Vec<Value> = dataset
        .buildings()
        .iter()
        .zip(assignments)
        .map(|(b, a)| {
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [b.x_m, b.y_m] },
                "properties": {
                    "id": b.id,
                    "technology": a.technology.as_str(),
                    "pv_fraction": a.pv_fraction,
                }
            })
        })
        .collect();
    let doc = json!({ "type": "FeatureCollection", "features": features });
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &doc)?;
    w.flush()?;
    Ok(())
}

pub fn write_shares_csv(rows: &[ShareRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["config_id", "share_gb", "share_hp", "share_hn"])?;
    for r in rows {
        w.write_record([
            r.config_id.to_string(),
            r.shares.gb.to_string(),
            r.shares.hp.to_string(),
            r.shares.hn.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRecord {
    pub filter: String,
    pub methods: String,
    pub consistency: Consistency,
}

pub fn write_consistency_csv(rows: &[ConsistencyRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "filter",
        "methods",
        "technology",
        "consistent_fraction",
        "random_baseline",
    ])?;
    for r in rows {
        w.write_record([
            r.filter.clone(),
            r.methods.clone(),
            r.consistency.technology.as_str().to_string(),
            r.consistency.consistent_fraction.to_string(),
            r.consistency.random_baseline.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
