//! Hourly demand profiles from annual energies and the diversity factor.

use chrono::{Datelike, Weekday};

use crate::error::{Error, Result};
use crate::solar::{WeatherSeries, HOURS_PER_YEAR};

/// Heating limit temperature, 17 °C.
pub const T_REF_K: f64 = 290.15;
/// Summer floor of the degree-day shape as a fraction of its maximum.
pub const BASE_FRACTION: f64 = 0.05;
pub const DEFAULT_ELECTRICITY_KWH: f64 = 2500.0;
/// Stated large-n limit of the diversity factor used to recover a single
/// building's peak from a standard load profile.
pub const Q_INF: f64 = 0.47;

/// Relative heat use per hour of day, with a pronounced morning start.
const HEAT_HOUR_FACTOR: [f64; 24] = [
    0.60, 0.58, 0.57, 0.58, 0.65, 0.90, 1.45, 1.60, 1.45, 1.25, 1.10, 1.05, //
    1.00, 0.98, 0.96, 0.98, 1.05, 1.15, 1.20, 1.15, 1.05, 0.95, 0.80, 0.68,
];

/// Household electricity per hour of day; morning and evening peaks, maximum at 19:00.
const ELECTRICITY_HOUR_FACTOR: [f64; 24] = [
    0.45, 0.38, 0.35, 0.34, 0.35, 0.45, 0.75, 1.05, 1.00, 0.85, 0.80, 0.85, //
    0.95, 0.90, 0.80, 0.78, 0.85, 1.05, 1.35, 1.50, 1.40, 1.15, 0.85, 0.60,
];
const WEEKDAY_FACTOR: f64 = 1.0;
const WEEKEND_FACTOR: f64 = 1.08;

fn normalized(mut shape: Vec<f64>) -> Vec<f64> {
    let total: f64 = shape.iter().sum();
    for v in &mut shape {
        *v /= total;
    }
    shape
}

fn scaled(shape: &[f64], annual_kwh: f64) -> Result<Vec<f64>> {
    if !(annual_kwh >= 0.0 && annual_kwh.is_finite()) {
        return Err(Error::Argument(format!(
            "annual energy must be non-negative, got {annual_kwh}"
        )));
    }
    Ok(shape.iter().map(|s| s * annual_kwh).collect())
}

/// Normalized hourly shapes, each summing to one over the year.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileShape {
    pub heat: Vec<f64>,
    pub electricity: Vec<f64>,
}

impl ProfileShape {
    pub fn new(weather: &WeatherSeries) -> Self {
        Self {
            heat: heat_shape(weather),
            electricity: electricity_shape(weather.year),
        }
    }

    /// Hourly heat demand in kW for an annual demand in kWh.
    pub fn heat_profile(&self, annual_kwh: f64) -> Result<Vec<f64>> {
        scaled(&self.heat, annual_kwh)
    }

    pub fn electricity_profile(&self, annual_kwh: f64) -> Result<Vec<f64>> {
        scaled(&self.electricity, annual_kwh)
    }

    pub fn heat_peak_per_kwh(&self) -> f64 {
        self.heat.iter().cloned().fold(0.0, f64::max)
    }
}

/// Degree-day shape times hour factor.
pub fn heat_shape(weather: &WeatherSeries) -> Vec<f64> {
    let days = weather.temp_k.len() / 24;
    let degree: Vec<f64> = (0..days)
        .map(|d| {
            let mean = weather.temp_k[24 * d..24 * d + 24].iter().sum::<f64>() / 24.0;
            (T_REF_K - mean).max(0.0)
        })
        .collect();
    let max = degree.iter().cloned().fold(0.0, f64::max);
    // A year without heating days still gets the hot-water floor.
    let base = if max > 0.0 { BASE_FRACTION * max } else { 1.0 };
    let shape = (0..days * 24)
        .map(|t| degree[t / 24].max(base) * HEAT_HOUR_FACTOR[t % 24])
        .collect();
    normalized(shape)
}

pub fn electricity_shape(year: i32) -> Vec<f64> {
    let jan1 = chrono::NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let shape = (0..HOURS_PER_YEAR)
        .map(|t| {
            let day = jan1 + chrono::Days::new((t / 24) as u64);
            let f = match day.weekday() {
                Weekday::Sat | Weekday::Sun => WEEKEND_FACTOR,
                _ => WEEKDAY_FACTOR,
            };
            f * ELECTRICITY_HOUR_FACTOR[t % 24]
        })
        .collect();
    normalized(shape)
}

pub fn heat_profile(weather: &WeatherSeries, annual_kwh: f64) -> Result<Vec<f64>> {
    scaled(&heat_shape(weather), annual_kwh)
}

pub fn electricity_profile(year: i32, annual_kwh: f64) -> Result<Vec<f64>> {
    scaled(&electricity_shape(year), annual_kwh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub const DIVERSITY: DiversityParams = DiversityParams {
    a: 0.450,
    b: 0.551,
    c: 53.8,
    d: 1.76,
};

/// Coincidence factor of the peak demand of `n` buildings.
pub fn diversity(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("diversity factor needs at least one building".into()));
    }
    let DiversityParams { a, b, c, d } = DIVERSITY;
    Ok((a + b / (1.0 + (n as f64 / c).powf(d))).min(1.0))
}

/// Peak of one building from the peak of its standard load profile.
pub fn building_peak(profile_peak_kw: f64, q_inf: f64) -> f64 {
    profile_peak_kw / q_inf
}

/// Coincident peak of `n` buildings sharing one profile peak.
pub fn group_peak(n: usize, profile_peak_kw: f64, q_inf: f64) -> Result<f64> {
    Ok(n as f64 * building_peak(profile_peak_kw, q_inf) * diversity(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solar::Site;
    use proptest::prelude::*;

    fn weather() -> WeatherSeries {
        WeatherSeries::clear_sky(Site::default(), 2015).unwrap()
    }

    #[test]
    fn diversity_values() {
        assert_eq!(diversity(1).unwrap(), 1.0);
        assert!((diversity(10).unwrap() - 0.974).abs() < 5e-4);
        assert!((diversity(200).unwrap() - 0.500).abs() < 5e-4);
        assert!(diversity(0).is_err());
    }

    #[test]
    fn group_peak_examples() {
        assert_eq!(group_peak(1, 4.7, Q_INF).unwrap(), 4.7 / Q_INF);
        let g = group_peak(53, 2.0, Q_INF).unwrap();
        let div = 0.450 + 0.551 / (1.0 + (53.0f64 / 53.8).powf(1.76));
        assert!((g - 53.0 * 2.0 / Q_INF * div).abs() < 1e-12);
        let big = group_peak(1_000_000, 1.0, Q_INF).unwrap() / 1e6;
        assert!((big - 0.45 / Q_INF).abs() < 1e-3);
    }

    #[test]
    fn profiles_integrate_to_annual() {
        let w = weather();
        assert!(heat_profile(&w, 0.0).unwrap().iter().all(|v| *v == 0.0));
        let h = heat_profile(&w, 18_000.0).unwrap();
        assert_eq!(h.len(), HOURS_PER_YEAR);
        assert!((h.iter().sum::<f64>() - 18_000.0).abs() < 18_000.0 * 1e-9);
        assert!(h.iter().all(|v| *v >= 0.0));
        let e = electricity_profile(2015, 2500.0).unwrap();
        assert!((e.iter().sum::<f64>() - 2500.0).abs() < 2500.0 * 1e-9);
        assert!(electricity_profile(2015, 0.0).unwrap().iter().all(|v| *v == 0.0));
        assert!(heat_profile(&w, -1.0).is_err());
    }

    #[test]
    fn winter_dominates_summer() {
        let h = heat_profile(&weather(), 10_000.0).unwrap();
        let week = |start_day: usize| h[start_day * 24..(start_day + 7) * 24].iter().sum::<f64>();
        assert!(week(7) > 3.0 * week(190));
    }

    #[test]
    fn electricity_peak_at_seven_pm() {
        let e = electricity_shape(2015);
        let argmax = (0..e.len()).max_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap();
        assert_eq!(argmax % 24, 19);
    }

    #[test]
    fn heat_peak_in_the_morning() {
        let h = heat_shape(&weather());
        let argmax = (0..h.len()).max_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap();
        assert_eq!(argmax % 24, 7);
    }

    proptest! {
        #[test]
        fn diversity_monotone(n in 1usize..5000) {
            let a = diversity(n).unwrap();
            let b = diversity(n + 1).unwrap();
            prop_assert!(b <= a);
            prop_assert!(b > DIVERSITY.a && a <= 1.0);
            let pa = group_peak(n, 1.0, Q_INF).unwrap() / n as f64;
            let pb = group_peak(n + 1, 1.0, Q_INF).unwrap() / (n + 1) as f64;
            prop_assert!(pb <= pa);
        }
    }
}
