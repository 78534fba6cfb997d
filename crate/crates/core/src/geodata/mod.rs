//! Building stock ingestion, validation and synthetic generation.
//!
//! Coordinates are planar meters in an arbitrary pre-projected CRS. No geodesic
//! math is done anywhere downstream.

mod io;
mod synthetic;

pub use io::{load_csv, load_dataset, load_geojson, write_csv, write_geojson, DataFormat};
pub use synthetic::{generate_synthetic, Layout};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoofSegment {
    /// Degrees clockwise from north, in [0, 360).
    pub azimuth_deg: f64,
    /// Degrees from horizontal, in [0, 90].
    pub tilt_deg: f64,
    pub area_m2: f64,
}

impl RoofSegment {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..360.0).contains(&self.azimuth_deg) {
            return Err(Error::Validation(format!(
                "roof azimuth {} outside [0, 360)",
                self.azimuth_deg
            )));
        }
        if !(0.0..=90.0).contains(&self.tilt_deg) {
            return Err(Error::Validation(format!(
                "roof tilt {} outside [0, 90]",
                self.tilt_deg
            )));
        }
        if !(self.area_m2 > 0.0 && self.area_m2.is_finite()) {
            return Err(Error::Validation(format!(
                "roof area {} must be positive",
                self.area_m2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingRecord {
    pub id: String,
    pub x_m: f64,
    pub y_m: f64,
    pub footprint_m2: f64,
    pub annual_heat_demand_kwh: f64,
    /// May be empty, meaning zero solar potential.
    pub roofs: Vec<RoofSegment>,
}

impl BuildingRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_m.is_finite() && self.y_m.is_finite()) {
            return Err(Error::Validation(format!(
                "building {}: non-finite coordinates",
                self.id
            )));
        }
        if !(self.footprint_m2 > 0.0 && self.footprint_m2.is_finite()) {
            return Err(Error::Validation(format!(
                "building {}: footprint_m2 must be positive, got {}",
                self.id, self.footprint_m2
            )));
        }
        if !(self.annual_heat_demand_kwh >= 0.0 && self.annual_heat_demand_kwh.is_finite()) {
            return Err(Error::Validation(format!(
                "building {}: annual_heat_demand_kwh must be non-negative, got {}",
                self.id, self.annual_heat_demand_kwh
            )));
        }
        for roof in &self.roofs {
            roof.validate()
                .map_err(|e| Error::Validation(format!("building {}: {e}", self.id)))?;
        }
        Ok(())
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x_m, self.y_m)
    }
}

/// An immutable, validated collection of buildings.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    buildings: Vec<BuildingRecord>,
    crs_note: String,
}

impl Dataset {
    pub fn new(buildings: Vec<BuildingRecord>, crs_note: impl Into<String>) -> Result<Self> {
        if buildings.is_empty() {
            return Err(Error::Validation("dataset contains no buildings".into()));
        }
        let mut seen = HashSet::with_capacity(buildings.len());
        for b in &buildings {
            if !seen.insert(b.id.as_str()) {
                return Err(Error::Validation(format!("duplicate building id {}", b.id)));
            }
            b.validate()?;
        }
        Ok(Self {
            buildings,
            crs_note: crs_note.into(),
        })
    }

    pub fn buildings(&self) -> &[BuildingRecord] {
        &self.buildings
    }

    pub fn len(&self) -> usize {
        self.buildings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buildings.is_empty()
    }

    pub fn crs_note(&self) -> &str {
        &self.crs_note
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.buildings.iter().map(BuildingRecord::position).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn building(id: &str, footprint: f64) -> BuildingRecord {
        BuildingRecord {
            id: id.into(),
            x_m: 0.0,
            y_m: 0.0,
            footprint_m2: footprint,
            annual_heat_demand_kwh: 1000.0,
            roofs: vec![],
        }
    }

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(Dataset::new(vec![], "").is_err());
        let err = Dataset::new(vec![building("a", 1.0), building("a", 2.0)], "").unwrap_err();
        assert!(err.to_string().contains("duplicate building id a"));
    }

    #[test]
    fn rejects_non_positive_footprint_with_id() {
        let err = Dataset::new(vec![building("b7", 0.0)], "").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("b7"));
    }

    #[test]
    fn roof_ranges() {
        let ok = RoofSegment {
            azimuth_deg: 359.9,
            tilt_deg: 90.0,
            area_m2: 1.0,
        };
        assert!(ok.validate().is_ok());
        assert!(RoofSegment {
            azimuth_deg: 360.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(RoofSegment { tilt_deg: -1.0, ..ok }.validate().is_err());
        assert!(RoofSegment { area_m2: 0.0, ..ok }.validate().is_err());
    }
}
