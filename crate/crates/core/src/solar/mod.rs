//! Solar generation potential: transposition to roof planes and the
//! standard-roof linear-combination approximation.
//!
//! Every real roof is represented by weights `w_n` such that its year-averaged
//! power at a handful of anchor hours equals the weighted sum of the standard
//! roofs' year-averaged power at the same hours. Weights are obtained from a
//! square linear solve, so the anchor hours are matched exactly and all other
//! hours are approximated.

mod position;
mod transposition;
mod weather;

pub use position::{sun_position, SunPosition};
pub use transposition::{plane_of_array_series, PvSystem, Transposer};
pub use weather::{Site, WeatherSeries, DAYS_PER_YEAR, HOURS_PER_YEAR, WEATHER_HEADER};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodata::{BuildingRecord, Dataset, RoofSegment};

/// Anchor matrices with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION_NUMBER: f64 = 1e8;

/// Year-averaged power at each hour of the day.
pub type DayProfile = [f64; 24];

/// `⟨P⟩(h) = (1/365) Σ_d P(24 d + h)`.
pub fn day_hour_average(series: &[f64]) -> Result<DayProfile> {
    if series.len() != HOURS_PER_YEAR {
        return Err(Error::Argument(format!(
            "expected {HOURS_PER_YEAR} hourly values, got {}",
            series.len()
        )));
    }
    let mut avg = [0.0; 24];
    for day in series.chunks_exact(24) {
        for (a, p) in avg.iter_mut().zip(day) {
            *a += p;
        }
    }
    for a in &mut avg {
        *a /= DAYS_PER_YEAR as f64;
    }
    Ok(avg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub azimuth_deg: f64,
    pub tilt_deg: f64,
}

/// N standard roofs and N anchor hours, with the standard roofs' unit-area
/// power series and the factorised anchor matrix.
#[derive(Debug, Clone)]
pub struct StandardRoofSet {
    orientations: Vec<Orientation>,
    anchor_hours: Vec<usize>,
    series: Vec<Vec<f64>>,
    day_profiles: Vec<DayProfile>,
    matrix: DMatrix<f64>,
    condition: f64,
}

impl StandardRoofSet {
    /// Tilt 30° facing east, south and west; anchors at 09:00, 12:00 and 15:00.
    pub fn default_for(transposer: &Transposer<'_>) -> Result<Self> {
        Self::new(
            transposer,
            [90.0, 180.0, 270.0]
                .into_iter()
                .map(|azimuth_deg| Orientation {
                    azimuth_deg,
                    tilt_deg: 30.0,
                })
                .collect(),
            vec![9, 12, 15],
        )
    }

    pub fn new(transposer: &Transposer<'_>, orientations: Vec<Orientation>, anchor_hours: Vec<usize>) -> Result<Self> {
        if orientations.is_empty() || orientations.len() != anchor_hours.len() {
            return Err(Error::Argument(format!(
                "need as many anchor hours as standard roofs ({} vs {})",
                anchor_hours.len(),
                orientations.len()
            )));
        }
        if let Some(h) = anchor_hours.iter().find(|h| **h >= 24) {
            return Err(Error::Argument(format!("anchor hour {h} outside [0, 24)")));
        }
        let series = orientations
            .iter()
            .map(|o| transposer.power(o.azimuth_deg, o.tilt_deg))
            .collect::<Result<Vec<_>>>()?;
        let day_profiles = series.iter().map(|s| day_hour_average(s)).collect::<Result<Vec<_>>>()?;
        let n = orientations.len();
        let matrix = DMatrix::from_fn(n, n, |row, col| day_profiles[col][anchor_hours[row]]);
        let sv = matrix.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION_NUMBER) {
            return Err(Error::Numerical(format!(
                "standard-roof anchor matrix is singular or ill-conditioned (condition {condition:.3e}); \
                 choose different anchor hours or standard roofs"
            )));
        }
        Ok(Self {
            orientations,
            anchor_hours,
            series,
            day_profiles,
            matrix,
            condition,
        })
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn anchor_hours(&self) -> &[usize] {
        &self.anchor_hours
    }

    /// Unit-area power series of standard roof `n`, W/m².
    pub fn series(&self, n: usize) -> &[f64] {
        &self.series[n]
    }

    pub fn day_profile(&self, n: usize) -> &DayProfile {
        &self.day_profiles[n]
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Weights `w` with `Σ w_n ⟨P_n⟩(t_d) = ⟨P_roof⟩(t_d)` at every anchor hour.
    pub fn solve_weights(&self, roof_profile: &DayProfile) -> Result<Vec<f64>> {
        let rhs = DVector::from_iterator(self.len(), self.anchor_hours.iter().map(|&h| roof_profile[h]));
        let w = self
            .matrix
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("standard-roof anchor matrix is singular".into()))?;
        Ok(w.iter().copied().collect())
    }

    /// `Σ w_n P_n(t)`.
    pub fn combine_series(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; HOURS_PER_YEAR];
        for (w, s) in weights.iter().zip(&self.series) {
            for (o, p) in out.iter_mut().zip(s) {
                *o += w * p;
            }
        }
        out
    }

    /// `Σ w_n ⟨P_n⟩(h)`.
    pub fn combine_profile(&self, weights: &[f64]) -> DayProfile {
        let mut out = [0.0; 24];
        for (w, p) in weights.iter().zip(&self.day_profiles) {
            for (o, v) in out.iter_mut().zip(p) {
                *o += w * v;
            }
        }
        out
    }
}

/// Weights for one roof from its own power series.
pub fn solve_roof_weights(roof_series: &[f64], standard: &StandardRoofSet) -> Result<Vec<f64>> {
    standard.solve_weights(&day_hour_average(roof_series)?)
}

/// Roof-aggregated standard-roof weights of one building, in m² of standard
/// roof: `ω_n = Σ_roofs area · w_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingSolar {
    pub omega_m2: Vec<f64>,
}

impl BuildingSolar {
    pub fn from_roof_weights(roofs: &[RoofSegment], roof_weights: &[Vec<f64>], n_standard: usize) -> Self {
        let mut omega = vec![0.0; n_standard];
        for (roof, w) in roofs.iter().zip(roof_weights) {
            for (o, wn) in omega.iter_mut().zip(w) {
                *o += roof.area_m2 * wn;
            }
        }
        Self { omega_m2: omega }
    }

    pub fn compute(building: &BuildingRecord, transposer: &Transposer<'_>, standard: &StandardRoofSet) -> Result<Self> {
        let weights = building
            .roofs
            .iter()
            .map(|r| solve_roof_weights(&transposer.power(r.azimuth_deg, r.tilt_deg)?, standard))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_roof_weights(&building.roofs, &weights, standard.len()))
    }

    /// Reconstructed year-averaged day profile of the whole building, W.
    pub fn day_profile(&self, standard: &StandardRoofSet) -> DayProfile {
        standard.combine_profile(&self.omega_m2)
    }
}

/// `P_PV,b(t) = Σ ω_n,b P_n(t)` in W; zero for roofless buildings.
pub fn building_pv_potential(
    building: &BuildingRecord,
    roof_weights: &[Vec<f64>],
    standard: &StandardRoofSet,
) -> Vec<f64> {
    let agg = BuildingSolar::from_roof_weights(&building.roofs, roof_weights, standard.len());
    standard.combine_series(&agg.omega_m2)
}

/// Per-building weights for a whole dataset, computed in parallel.
pub fn dataset_solar(
    dataset: &Dataset,
    transposer: &Transposer<'_>,
    standard: &StandardRoofSet,
) -> Result<Vec<BuildingSolar>> {
    dataset
        .buildings()
        .par_iter()
        .map(|b| BuildingSolar::compute(b, transposer, standard))
        .collect()
}
