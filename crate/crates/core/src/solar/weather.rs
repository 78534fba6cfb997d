use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::position::sun_position;
use crate::error::{Error, Result};

pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS_PER_YEAR: usize = 365;

pub const WEATHER_HEADER: [&str; 5] = ["timestamp", "temp_k", "ghi", "dni", "dhi"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Fixed offset of the series' clock from UTC; no daylight saving shifts.
    pub utc_offset_h: f64,
}

impl Default for Site {
    /// Bremen, central European standard time.
    fn default() -> Self {
        Self {
            latitude_deg: 53.08,
            longitude_deg: 8.80,
            utc_offset_h: 1.0,
        }
    }
}

/// One non-leap year of hourly weather in consistent local standard time.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub site: Site,
    pub year: i32,
    pub temp_k: Vec<f64>,
    pub ghi_w_m2: Vec<f64>,
    pub dni_w_m2: Vec<f64>,
    pub dhi_w_m2: Vec<f64>,
}

/// Closure tolerance between GHI and DHI + DNI·cos(zenith).
const CLOSURE_ABS_W_M2: f64 = 50.0;
const CLOSURE_REL: f64 = 0.15;

impl WeatherSeries {
    pub fn new(
        site: Site,
        year: i32,
        temp_k: Vec<f64>,
        ghi_w_m2: Vec<f64>,
        dni_w_m2: Vec<f64>,
        dhi_w_m2: Vec<f64>,
    ) -> Result<Self> {
        if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
            return Err(Error::Validation(format!(
                "weather year {year} is a leap year; expected 8760 hours"
            )));
        }
        for (name, v) in [
            ("temp_k", &temp_k),
            ("ghi", &ghi_w_m2),
            ("dni", &dni_w_m2),
            ("dhi", &dhi_w_m2),
        ] {
            if v.len() != HOURS_PER_YEAR {
                return Err(Error::Validation(format!(
                    "weather column {name} has {} steps, expected {HOURS_PER_YEAR}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "weather column {name} has non-finite values"
                )));
            }
        }
        if let Some(x) = [&ghi_w_m2, &dni_w_m2, &dhi_w_m2]
            .iter()
            .flat_map(|v| v.iter())
            .find(|x| **x < 0.0)
        {
            return Err(Error::Validation(format!("negative irradiance {x}")));
        }
        if temp_k.iter().any(|t| *t <= 0.0) {
            return Err(Error::Validation("temperatures must be in kelvin".into()));
        }
        let w = Self {
            site,
            year,
            temp_k,
            ghi_w_m2,
            dni_w_m2,
            dhi_w_m2,
        };
        if let Some((step, residual)) = w.worst_closure_violation() {
            return Err(Error::Validation(format!(
                "hour {step}: GHI differs from DHI + DNI·cos(zenith) by {residual:.1} W/m²"
            )));
        }
        Ok(w)
    }

    pub fn timestamp(&self, step: usize) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(self.year, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
            + chrono::Duration::hours(step as i64)
    }

    pub fn len(&self) -> usize {
        self.temp_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temp_k.is_empty()
    }

    fn worst_closure_violation(&self) -> Option<(usize, f64)> {
        (0..self.len())
            .filter_map(|t| {
                let ghi = self.ghi_w_m2[t];
                if ghi == 0.0 && self.dni_w_m2[t] == 0.0 && self.dhi_w_m2[t] == 0.0 {
                    return None;
                }
                let sun = sun_position(
                    self.timestamp(t),
                    self.site.utc_offset_h,
                    self.site.latitude_deg,
                    self.site.longitude_deg,
                );
                let cos_z = sun.zenith_deg.to_radians().cos().max(0.0);
                let residual = ghi - self.dhi_w_m2[t] - self.dni_w_m2[t] * cos_z;
                (residual.abs() > CLOSURE_ABS_W_M2.max(CLOSURE_REL * ghi)).then_some((t, residual))
            })
            .next()
    }

    /// Deterministic clear-sky year: Kasten–Young air mass, Meinel beam
    /// attenuation and the Liu–Jordan diffuse relation.
    pub fn clear_sky(site: Site, year: i32) -> Result<Self> {
        Self::synthetic(site, year, None)
    }

    /// Clear-sky year scaled by a seeded daily clearness index in [0.3, 1].
    pub fn cloudy(site: Site, year: i32, seed: u64) -> Result<Self> {
        Self::synthetic(site, year, Some(seed))
    }

    fn synthetic(site: Site, year: i32, clouds: Option<u64>) -> Result<Self> {
        let mut rng = clouds.map(ChaCha8Rng::seed_from_u64);
        let clearness: Vec<f64> = (0..DAYS_PER_YEAR)
            .map(|_| match rng.as_mut() {
                Some(r) => r.random_range(0.3..1.0),
                None => 1.0,
            })
            .collect();

        let start =
            NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(|| Error::Argument(format!("invalid year {year}")))?;
        let mut temp = Vec::with_capacity(HOURS_PER_YEAR);
        let mut ghi = Vec::with_capacity(HOURS_PER_YEAR);
        let mut dni = Vec::with_capacity(HOURS_PER_YEAR);
        let mut dhi = Vec::with_capacity(HOURS_PER_YEAR);
        for step in 0..HOURS_PER_YEAR {
            let ts = start.and_hms_opt(0, 0, 0).unwrap() + chrono::Duration::hours(step as i64);
            let doy = ts.ordinal() as f64;
            let hour = ts.hour() as f64;
            let seasonal = -(2.0 * std::f64::consts::PI * (doy - 20.0) / 365.0).cos();
            let diurnal = (2.0 * std::f64::consts::PI * (hour - 15.0) / 24.0).cos();
            temp.push(282.15 + 9.0 * seasonal + 4.0 * diurnal);

            let sun = sun_position(ts, site.utc_offset_h, site.latitude_deg, site.longitude_deg);
            let cos_z = sun.zenith_deg.to_radians().cos();
            if cos_z <= 0.0 {
                ghi.push(0.0);
                dni.push(0.0);
                dhi.push(0.0);
                continue;
            }
            let extra = 1367.0 * (1.0 + 0.033 * (2.0 * std::f64::consts::PI * doy / 365.0).cos());
            let air_mass = 1.0 / (cos_z + 0.50572 * (96.07995 - sun.zenith_deg).powf(-1.6364));
            let beam_transmittance = 0.7f64.powf(air_mass.powf(0.678));
            let beam = extra * beam_transmittance;
            let diffuse = (extra * cos_z * (0.271 - 0.294 * beam_transmittance)).max(0.0);

            let k = clearness[step / 24];
            let global = k * (beam * cos_z + diffuse);
            let beam = k * k * beam;
            dni.push(beam);
            dhi.push(global - beam * cos_z);
            ghi.push(global);
        }
        Self::new(site, year, temp, ghi, dni, dhi)
    }

    pub fn read_csv(path: &Path, site: Site) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let idx: Vec<usize> = WEATHER_HEADER
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h.trim() == *name)
                    .ok_or_else(|| Error::Schema {
                        file: path.display().to_string(),
                        column: (*name).to_string(),
                    })
            })
            .collect::<Result<_>>()?;

        let parse_err = |row: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            message: format!("row {row}: {msg}"),
        };
        let mut stamps = Vec::with_capacity(HOURS_PER_YEAR);
        let mut cols: [Vec<f64>; 4] = Default::default();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let raw_ts = rec.get(idx[0]).unwrap_or("").trim();
            let ts = parse_timestamp(raw_ts).ok_or_else(|| parse_err(row + 1, format!("bad timestamp `{raw_ts}`")))?;
            stamps.push(ts);
            for (c, col) in cols.iter_mut().enumerate() {
                let raw = rec.get(idx[c + 1]).unwrap_or("").trim();
                col.push(
                    raw.parse()
                        .map_err(|_| parse_err(row + 1, format!("column `{}` not a number", WEATHER_HEADER[c + 1])))?,
                );
            }
        }
        let first = *stamps
            .first()
            .ok_or_else(|| Error::Validation("weather file is empty".into()))?;
        if first.ordinal() != 1 || first.hour() != 0 {
            return Err(Error::Validation(format!(
                "weather must start at January 1st 00:00, got {first}"
            )));
        }
        for (i, pair) in stamps.windows(2).enumerate() {
            if pair[1] - pair[0] != chrono::Duration::hours(1) {
                return Err(Error::Validation(format!(
                    "weather rows {} and {} are not one hour apart",
                    i + 1,
                    i + 2
                )));
            }
        }
        let [temp, ghi, dni, dhi] = cols;
        Self::new(site, first.year(), temp, ghi, dni, dhi)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(WEATHER_HEADER)?;
        for t in 0..self.len() {
            w.write_record([
                self.timestamp(t).format("%Y-%m-%dT%H:%M:%S").to_string(),
                self.temp_k[t].to_string(),
                self.ghi_w_m2[t].to_string(),
                self.dni_w_m2[t].to_string(),
                self.dhi_w_m2[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Accepts RFC 3339 (offset is dropped; the series clock is assumed consistent)
/// or naive `YYYY-MM-DDTHH:MM[:SS]`.
fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.naive_local());
    }
    [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clear_sky_is_valid_and_closes() {
        let w = WeatherSeries::clear_sky(Site::default(), 2015).unwrap();
        assert_eq!(w.len(), HOURS_PER_YEAR);
        assert!(w.ghi_w_m2.iter().cloned().fold(0.0, f64::max) > 600.0);
        assert!(w.ghi_w_m2[0] == 0.0);
    }

    #[test]
    fn leap_year_rejected() {
        assert!(WeatherSeries::clear_sky(Site::default(), 2016).is_err());
    }

    #[test]
    fn wrong_length_rejected() {
        let v = vec![0.0; 10];
        let t = vec![280.0; 10];
        assert!(WeatherSeries::new(Site::default(), 2015, t, v.clone(), v.clone(), v).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let w = WeatherSeries::cloudy(Site::default(), 2015, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("weather.csv");
        w.write_csv(&p).unwrap();
        let r = WeatherSeries::read_csv(&p, Site::default()).unwrap();
        assert_eq!(w, r);
    }

    #[test]
    fn timestamps_accept_offsets() {
        let a = parse_timestamp("2015-01-01T05:00:00+01:00").unwrap();
        let b = parse_timestamp("2015-01-01 05:00").unwrap();
        assert_eq!(a, b);
    }
}
