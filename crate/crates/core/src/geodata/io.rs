use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{BuildingRecord, Dataset, RoofSegment};
use crate::error::{Error, Result};

pub const BUILDINGS_HEADER: [&str; 5] = ["id", "x_m", "y_m", "footprint_m2", "annual_heat_demand_kwh"];
pub const ROOFS_HEADER: [&str; 4] = ["building_id", "azimuth_deg", "tilt_deg", "area_m2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    GeoJson,
}

impl std::str::FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "geojson" | "json" => Ok(DataFormat::GeoJson),
            other => Err(Error::Argument(format!("unknown dataset format `{other}`"))),
        }
    }
}

/// Loads a dataset. For CSV, a `roofs.csv` next to the buildings file is picked
/// up when present.
pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    match format {
        DataFormat::Csv => {
            let roofs = path.with_file_name("roofs.csv");
            let roofs = roofs.exists().then_some(roofs);
            load_csv(path, roofs.as_deref())
        }
        DataFormat::GeoJson => load_geojson(path),
    }
}

fn column_indices(headers: &csv::StringRecord, required: &[&str], file: &Path) -> Result<Vec<usize>> {
    required
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Schema {
                    file: file.display().to_string(),
                    column: (*name).to_string(),
                })
        })
        .collect()
}

fn parse_f64(raw: &str, column: &str, row: usize, path: &Path) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        message: format!("row {row}: column `{column}` is not a number: `{raw}`"),
    })
}

pub fn load_csv(buildings_path: &Path, roofs_path: Option<&Path>) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(buildings_path)?;
    let idx = column_indices(reader.headers()?, &BUILDINGS_HEADER, buildings_path)?;

    let mut buildings = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(idx[i]).unwrap_or("");
        let num = |i: usize| parse_f64(field(i), BUILDINGS_HEADER[i], row + 1, buildings_path);
        buildings.push(BuildingRecord {
            id: field(0).trim().to_string(),
            x_m: num(1)?,
            y_m: num(2)?,
            footprint_m2: num(3)?,
            annual_heat_demand_kwh: num(4)?,
            roofs: Vec::new(),
        });
    }

    if let Some(roofs_path) = roofs_path {
        let by_id: HashMap<String, usize> = buildings.iter().enumerate().map(|(i, b)| (b.id.clone(), i)).collect();
        let mut reader = csv::Reader::from_path(roofs_path)?;
        let idx = column_indices(reader.headers()?, &ROOFS_HEADER, roofs_path)?;
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let field = |i: usize| record.get(idx[i]).unwrap_or("");
            let num = |i: usize| parse_f64(field(i), ROOFS_HEADER[i], row + 1, roofs_path);
            let id = field(0).trim();
            let &bi = by_id
                .get(id)
                .ok_or_else(|| Error::Validation(format!("roof row {} references unknown building {id}", row + 1)))?;
            buildings[bi].roofs.push(RoofSegment {
                azimuth_deg: num(1)?,
                tilt_deg: num(2)?,
                area_m2: num(3)?,
            });
        }
    }

    Dataset::new(buildings, format!("planar meters from {}", buildings_path.display()))
}

pub fn write_csv(dataset: &Dataset, buildings_path: &Path, roofs_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(buildings_path)?;
    w.write_record(BUILDINGS_HEADER)?;
    for b in dataset.buildings() {
        w.write_record([
            b.id.clone(),
            b.x_m.to_string(),
            b.y_m.to_string(),
            b.footprint_m2.to_string(),
            b.annual_heat_demand_kwh.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(roofs_path)?;
    w.write_record(ROOFS_HEADER)?;
    for b in dataset.buildings() {
        for r in &b.roofs {
            w.write_record([
                b.id.clone(),
                r.azimuth_deg.to_string(),
                r.tilt_deg.to_string(),
                r.area_m2.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn ring_area_centroid(ring: &[Value]) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = ring
        .iter()
        .map(|p| Some((p.get(0)?.as_f64()?, p.get(1)?.as_f64()?)))
        .collect::<Option<_>>()?;
    if pts.len() < 3 {
        return None;
    }
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..pts.len() {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[(i + 1) % pts.len()];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    let a = a / 2.0;
    if a == 0.0 {
        return None;
    }
    Some((a.abs(), cx / (6.0 * a), cy / (6.0 * a)))
}

/// Area-weighted centroid of a polygon; holes are subtracted.
fn polygon_centroid(rings: &[Value]) -> Option<(f64, f64, f64)> {
    let (mut area, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (i, ring) in rings.iter().enumerate() {
        let (a, cx, cy) = ring_area_centroid(ring.as_array()?)?;
        let sign = if i == 0 { 1.0 } else { -1.0 };
        area += sign * a;
        sx += sign * a * cx;
        sy += sign * a * cy;
    }
    (area > 0.0).then(|| (area, sx / area, sy / area))
}

fn geometry_centroid(geometry: &Value) -> Option<(f64, f64)> {
    let coords = geometry.get("coordinates")?;
    match geometry.get("type")?.as_str()? {
        "Point" => Some((coords.get(0)?.as_f64()?, coords.get(1)?.as_f64()?)),
        "Polygon" => polygon_centroid(coords.as_array()?).map(|(_, x, y)| (x, y)),
        "MultiPolygon" => {
            let (mut area, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for poly in coords.as_array()? {
                let (a, x, y) = polygon_centroid(poly.as_array()?)?;
                area += a;
                sx += a * x;
                sy += a * y;
            }
            (area > 0.0).then(|| (sx / area, sy / area))
        }
        _ => None,
    }
}

fn number_property(props: &Map<String, Value>, key: &str, file: &Path) -> Result<f64> {
    match props.get(key) {
        None | Some(Value::Null) => Err(Error::Schema {
            file: file.display().to_string(),
            column: key.to_string(),
        }),
        Some(v) => v.as_f64().ok_or_else(|| Error::Parse {
            path: file.to_path_buf(),
            message: format!("property `{key}` is not a number"),
        }),
    }
}

fn feature_id(feature: &Value, props: &Map<String, Value>) -> Option<String> {
    let raw = props.get("id").or_else(|| feature.get("id"))?;
    match raw {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn load_geojson(path: &Path) -> Result<Dataset> {
    let root: Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let schema = |column: &str| Error::Schema {
        file: path.display().to_string(),
        column: column.to_string(),
    };
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("features"))?;

    let mut buildings = Vec::with_capacity(features.len());
    for feature in features {
        let empty = Map::new();
        let props = feature.get("properties").and_then(Value::as_object).unwrap_or(&empty);
        let id = feature_id(feature, props).ok_or_else(|| schema("id"))?;
        let (x_m, y_m) = match feature.get("geometry").filter(|g| !g.is_null()) {
            Some(g) => geometry_centroid(g).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("feature {id}: unsupported or degenerate geometry"),
            })?,
            None => (
                number_property(props, "x_m", path)?,
                number_property(props, "y_m", path)?,
            ),
        };
        let roofs = match props.get("roofs") {
            None | Some(Value::Null) => Vec::new(),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("feature {id}: roofs: {e}"),
            })?,
        };
        buildings.push(BuildingRecord {
            id,
            x_m,
            y_m,
            footprint_m2: number_property(props, "footprint_m2", path)?,
            annual_heat_demand_kwh: number_property(props, "annual_heat_demand_kwh", path)?,
            roofs,
        });
    }
    let crs = root
        .get("crs")
        .map(|c| c.to_string())
        .unwrap_or_else(|| format!("planar meters from {}", path.display()));
    Dataset::new(buildings, crs)
}

/// Writes point features at the building positions; roofs are nested in the
/// properties.
pub fn write_geojson(dataset: &Dataset, path: &Path) -> Result<()> {
    let features: Vec<Value> = dataset
        .buildings()
        .iter()
        .map(|b| {
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [b.x_m, b.y_m] },
                "properties": {
                    "id": b.id,
                    "footprint_m2": b.footprint_m2,
                    "annual_heat_demand_kwh": b.annual_heat_demand_kwh,
                    "roofs": b.roofs,
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

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn minimal_csv_without_roofs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("buildings.csv");
        fs::write(
            &p,
            "id,x_m,y_m,footprint_m2,annual_heat_demand_kwh\na,0,0,100,15000\nb,10,5,80,9000\n",
        )
        .unwrap();
        let d = load_dataset(&p, DataFormat::Csv).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.buildings().iter().all(|b| b.roofs.is_empty()));
        assert_eq!(d.buildings()[1].footprint_m2, 80.0);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        fs::write(&p, "id,x_m,y_m,annual_heat_demand_kwh\na,0,0,1\n").unwrap();
        match load_csv(&p, None).unwrap_err() {
            Error::Schema { column, .. } => assert_eq!(column, "footprint_m2"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn zero_footprint_row_cites_id() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        fs::write(
            &p,
            "id,x_m,y_m,footprint_m2,annual_heat_demand_kwh\nok,0,0,10,1\nbad-7,0,0,0,1\n",
        )
        .unwrap();
        let err = load_csv(&p, None).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("bad-7"));
    }

    #[test]
    fn roofs_long_format_keyed_by_id() {
        let dir = tempfile::tempdir().unwrap();
        let b = dir.path().join("buildings.csv");
        let r = dir.path().join("roofs.csv");
        fs::write(
            &b,
            "id,x_m,y_m,footprint_m2,annual_heat_demand_kwh\na,0,0,100,1\nb,1,1,50,2\n",
        )
        .unwrap();
        fs::write(&r, "building_id,azimuth_deg,tilt_deg,area_m2\nb,180,30,20\nb,0,30,20\n").unwrap();
        let d = load_dataset(&b, DataFormat::Csv).unwrap();
        assert!(d.buildings()[0].roofs.is_empty());
        assert_eq!(d.buildings()[1].roofs.len(), 2);

        fs::write(&r, "building_id,azimuth_deg,tilt_deg,area_m2\nzz,180,30,20\n").unwrap();
        assert!(load_dataset(&b, DataFormat::Csv).is_err());
    }

    #[test]
    fn geojson_polygon_centroid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.geojson");
        fs::write(
            &p,
            r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "geometry":{"type":"Polygon","coordinates":[[[10,20],[11,20],[11,21],[10,21],[10,20]]]},
            "properties":{"id":"sq","footprint_m2":120,"annual_heat_demand_kwh":18000}}]}"#,
        )
        .unwrap();
        let d = load_geojson(&p).unwrap();
        let b = &d.buildings()[0];
        assert_eq!(b.id, "sq");
        assert!((b.x_m - 10.5).abs() < 1e-12 && (b.y_m - 20.5).abs() < 1e-12);
        assert_eq!(b.footprint_m2, 120.0);
        assert_eq!(b.annual_heat_demand_kwh, 18000.0);
        assert!(b.roofs.is_empty());
    }

    #[test]
    fn geojson_missing_property() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.geojson");
        fs::write(
            &p,
            r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "geometry":{"type":"Point","coordinates":[0,0]},
            "properties":{"id":"x","footprint_m2":120}}]}"#,
        )
        .unwrap();
        match load_geojson(&p).unwrap_err() {
            Error::Schema { column, .. } => assert_eq!(column, "annual_heat_demand_kwh"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn polygon_with_hole() {
        let outer = json!([[0, 0], [4, 0], [4, 4], [0, 4], [0, 0]]);
        let hole = json!([[0, 0], [2, 0], [2, 2], [0, 2], [0, 0]]);
        let (a, x, y) = polygon_centroid(&[outer, hole]).unwrap();
        assert!((a - 12.0).abs() < 1e-12);
        // (16*2 - 4*1) / 12
        assert!((x - 28.0 / 12.0).abs() < 1e-12);
        assert!((y - 28.0 / 12.0).abs() < 1e-12);
    }
}
