use std::collections::HashMap;
use std::path::Path;

use crate::clustering::{Aggregation, Assignment, GroupingMethod, ScanRow};
use crate::error::{Error, Result};
use crate::features::{histogram, FeatureVector, FEATURE_NAMES};
use crate::geodata::Dataset;

pub fn write_features_csv(dataset: &Dataset, features: &[FeatureVector], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["id"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for (b, f) in dataset.buildings().iter().zip(features) {
        let mut row = vec![b.id.clone()];
        row.extend(f.to_array().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Binned counts of every feature, one row per bin.
pub fn write_histograms_csv(features: &[FeatureVector], bins: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["feature", "bin", "lower", "upper", "count"])?;
    for (k, name) in FEATURE_NAMES.iter().enumerate() {
        let values: Vec<f64> = features.iter().map(|f| f.to_array()[k]).collect();
        for (i, b) in histogram(&values, bins).iter().enumerate() {
            w.write_record([
                name.to_string(),
                i.to_string(),
                b.lower.to_string(),
                b.upper.to_string(),
                b.count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregation_csv(dataset: &Dataset, aggregation: &Aggregation, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "category", "group"])?;
    for (b, a) in dataset.buildings().iter().zip(aggregation.assignments()) {
        w.write_record([b.id.clone(), a.category.to_string(), a.group.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `id,category,group` and orders the assignments like the dataset.
pub fn read_aggregation_csv(path: &Path, dataset: &Dataset, method: GroupingMethod) -> Result<Aggregation> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Schema {
            file: path.display().to_string(),
            column: name.into(),
        })
    };
    let (ci, cc, cg) = (col("id")?, col("category")?, col("group")?);
    let mut by_id = HashMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<usize> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("row {}: expected a non-negative integer", line + 2),
            })
        };
        let a = Assignment {
            category: num(cc)?,
            group: num(cg)?,
        };
        by_id.insert(rec.get(ci).unwrap_or_default().to_string(), a);
    }
    let assignments = dataset
        .buildings()
        .iter()
        .map(|b| {
            by_id
                .get(&b.id)
                .copied()
                .ok_or_else(|| Error::Validation(format!("building {} has no entry in {}", b.id, path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Aggregation::from_assignments(method, assignments))
}

pub fn write_scan_csv(rows: &[ScanRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "k_reps", "k_groups", "variables", "avg_line_length_m"])?;
    for r in rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.k_reps.to_string(),
            r.k_groups.to_string(),
            r.variables.to_string(),
            r.avg_line_length_m.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{generate_synthetic, Layout};

    #[test]
    fn aggregation_round_trip() {
        let d = generate_synthetic(2, 12, Layout::Grid).unwrap();
        let agg = Aggregation::from_assignments(
            GroupingMethod::KModes,
            (0..12)
                .map(|i| Assignment {
                    category: i % 3,
                    group: i % 4,
                })
                .collect(),
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("aggregation.csv");
        write_aggregation_csv(&d, &agg, &p).unwrap();
        assert_eq!(read_aggregation_csv(&p, &d, GroupingMethod::KModes).unwrap(), agg);
    }
}
