//! Footprint-specific energy indicators used to form building categories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::BuildingRecord;
use crate::solar::DayProfile;

/// Peak heat demand per MWh of annual demand for a single family house load
/// profile, kW/(MWh/a).
pub const PEAK_PER_MWH: f64 = 0.228;
pub const CONNECTION_COST_PER_KW: f64 = 13.4111;
pub const CONNECTION_COST_BASE: f64 = 13_976.0;

/// Hours of the day whose averaged PV power enters the features.
pub const FEATURE_HOURS: [usize; 3] = [9, 12, 15];

pub const FEATURE_NAMES: [&str; 5] = ["q_heat", "p9", "p12", "p15", "c_hnc"];

/// Estimated peak heat demand in kW for an annual demand in kWh.
pub fn peak_heat_demand(annual_kwh: f64) -> Result<f64> {
    if !(annual_kwh >= 0.0) {
        return Err(Error::Argument(format!(
            "annual heat demand must be non-negative, got {annual_kwh}"
        )));
    }
    Ok(PEAK_PER_MWH * annual_kwh / 1000.0)
}

/// Heat network connection cost in € for a peak heat demand in kW.
pub fn connection_cost(peak_kw: f64) -> Result<f64> {
    if !(peak_kw >= 0.0) {
        return Err(Error::Argument(format!(
            "peak power must be non-negative, got {peak_kw}"
        )));
    }
    Ok(CONNECTION_COST_PER_KW * peak_kw + CONNECTION_COST_BASE)
}

/// Energy indicators, all per m² of building footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// kWh/m²/a
    pub q_heat: f64,
    /// W/m², year-averaged PV power at 09:00
    pub p9: f64,
    pub p12: f64,
    pub p15: f64,
    /// €/m²
    pub c_hnc: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 5] {
        [self.q_heat, self.p9, self.p12, self.p15, self.c_hnc]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            q_heat: a[0],
            p9: a[1],
            p12: a[2],
            p15: a[3],
            c_hnc: a[4],
        }
    }
}

/// `pv_day_profile` is the building's reconstructed year-averaged PV power in W.
pub fn feature_vector(building: &BuildingRecord, pv_day_profile: &DayProfile) -> Result<FeatureVector> {
    let area = building.footprint_m2;
    if !(area > 0.0) {
        return Err(Error::Validation(format!(
            "building {}: footprint must be positive",
            building.id
        )));
    }
    let peak = peak_heat_demand(building.annual_heat_demand_kwh)?;
    let [h9, h12, h15] = FEATURE_HOURS;
    // Slightly negative values can come out of the linear reconstruction for
    // unusual roofs; power potential is floored at zero.
    Ok(FeatureVector {
        q_heat: building.annual_heat_demand_kwh / area,
        p9: pv_day_profile[h9].max(0.0) / area,
        p12: pv_day_profile[h12].max(0.0) / area,
        p15: pv_day_profile[h15].max(0.0) / area,
        c_hnc: connection_cost(peak)? / area,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Per-dimension min/max over a set of vectors.
pub fn fit_minmax<V: AsRef<[f64]>>(vectors: &[V]) -> Result<ScalerParams> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Argument("cannot fit a scaler on zero vectors".into()))?
        .as_ref();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for v in vectors {
        let v = v.as_ref();
        if v.len() != min.len() {
            return Err(Error::Argument("vectors have differing dimensions".into()));
        }
        for (i, x) in v.iter().enumerate() {
            min[i] = min[i].min(*x);
            max[i] = max[i].max(*x);
        }
    }
    Ok(ScalerParams { min, max })
}

/// `(x - min) / (max - min)`; a constant dimension maps to 0.
pub fn apply_minmax(vector: &[f64], params: &ScalerParams) -> Vec<f64> {
    vector
        .iter()
        .zip(params.min.iter().zip(&params.max))
        .map(|(x, (lo, hi))| {
            let span = hi - lo;
            if span > 0.0 {
                (x - lo) / span
            } else {
                0.0
            }
        })
        .collect()
}

pub fn normalize_all<V: AsRef<[f64]>>(vectors: &[V]) -> Result<(Vec<Vec<f64>>, ScalerParams)> {
    let params = fit_minmax(vectors)?;
    let out = vectors.iter().map(|v| apply_minmax(v.as_ref(), &params)).collect();
    Ok((out, params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width histogram over the value range; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: lo + i as f64 * width,
            upper: lo + (i + 1) as f64 * width,
            count,
        })
        .collect()
}
