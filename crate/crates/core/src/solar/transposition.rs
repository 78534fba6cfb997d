use super::position::sun_position;
use super::weather::WeatherSeries;
use crate::error::{Error, Result};

/// Fixed PV system assumptions for the isotropic transposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSystem {
    pub albedo: f64,
    /// Irradiance to electric power.
    pub efficiency: f64,
}

impl Default for PvSystem {
    fn default() -> Self {
        Self {
            albedo: 0.2,
            efficiency: 0.18,
        }
    }
}

/// Upper bound on the beam tilt factor cos(AOI)/cos(zenith) near sunrise and
/// sunset.
const MAX_BEAM_RATIO: f64 = 8.0;

/// Per-step sun geometry of a weather year, reused for every roof.
#[derive(Debug, Clone)]
pub struct Transposer<'a> {
    weather: &'a WeatherSeries,
    system: PvSystem,
    sun: Vec<(f64, f64, f64)>, // (cos zenith, sin zenith, azimuth rad)
}

impl<'a> Transposer<'a> {
    pub fn new(weather: &'a WeatherSeries, system: PvSystem) -> Self {
        let sun = (0..weather.len())
            .map(|t| {
                let p = sun_position(
                    weather.timestamp(t),
                    weather.site.utc_offset_h,
                    weather.site.latitude_deg,
                    weather.site.longitude_deg,
                );
                let z = p.zenith_deg.to_radians();
                (z.cos(), z.sin(), p.azimuth_deg.to_radians())
            })
            .collect();
        Self { weather, system, sun }
    }

    pub fn weather(&self) -> &WeatherSeries {
        self.weather
    }

    /// Plane-of-array irradiance in W/m² (isotropic sky, Liu–Jordan).
    pub fn irradiance(&self, azimuth_deg: f64, tilt_deg: f64) -> Result<Vec<f64>> {
        if !(0.0..360.0).contains(&azimuth_deg) || !(0.0..=90.0).contains(&tilt_deg) {
            return Err(Error::Argument(format!(
                "roof orientation out of range: azimuth {azimuth_deg}, tilt {tilt_deg}"
            )));
        }
        let tilt = tilt_deg.to_radians();
        let (cos_b, sin_b) = (tilt.cos(), tilt.sin());
        let surface_az = azimuth_deg.to_radians();
        let sky_view = (1.0 + cos_b) / 2.0;
        let ground_view = (1.0 - cos_b) / 2.0;
        let w = self.weather;
        Ok(self
            .sun
            .iter()
            .enumerate()
            .map(|(t, &(cos_z, sin_z, sun_az))| {
                let ghi = w.ghi_w_m2[t];
                let dhi = w.dhi_w_m2[t].min(ghi);
                let beam_h = ghi - dhi;
                let beam = if cos_z > 0.0 {
                    let cos_aoi = cos_z * cos_b + sin_z * sin_b * (sun_az - surface_az).cos();
                    beam_h * (cos_aoi.max(0.0) / cos_z).min(MAX_BEAM_RATIO)
                } else {
                    // sun geometrically below horizon: treat residual beam as sky diffuse
                    beam_h * sky_view
                };
                beam + dhi * sky_view + ghi * self.system.albedo * ground_view
            })
            .collect())
    }

    /// Unit-area PV power in W/m².
    pub fn power(&self, azimuth_deg: f64, tilt_deg: f64) -> Result<Vec<f64>> {
        let eff = self.system.efficiency;
        Ok(self
            .irradiance(azimuth_deg, tilt_deg)?
            .into_iter()
            .map(|g| g * eff)
            .collect())
    }
}

/// Unit-area PV power series for one orientation with the default system.
pub fn plane_of_array_series(weather: &WeatherSeries, azimuth_deg: f64, tilt_deg: f64) -> Result<Vec<f64>> {
    Transposer::new(weather, PvSystem::default()).power(azimuth_deg, tilt_deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solar::weather::{Site, HOURS_PER_YEAR};

    #[test]
    fn zero_irradiance_gives_zero() {
        let z = vec![0.0; HOURS_PER_YEAR];
        let w = WeatherSeries::new(
            Site::default(),
            2015,
            vec![280.0; HOURS_PER_YEAR],
            z.clone(),
            z.clone(),
            z,
        )
        .unwrap();
        let p = plane_of_array_series(&w, 180.0, 30.0).unwrap();
        assert!(p.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn horizontal_equals_ghi() {
        let w = WeatherSeries::cloudy(Site::default(), 2015, 9).unwrap();
        let p = plane_of_array_series(&w, 123.0, 0.0).unwrap();
        for (pt, g) in p.iter().zip(&w.ghi_w_m2) {
            assert!((pt - g * 0.18).abs() <= 1e-9 * (1.0 + g), "{pt} vs {g}");
        }
    }

    #[test]
    fn rejects_bad_angles() {
        let w = WeatherSeries::clear_sky(Site::default(), 2015).unwrap();
        assert!(plane_of_array_series(&w, 360.0, 30.0).is_err());
        assert!(plane_of_array_series(&w, 0.0, 91.0).is_err());
    }

    #[test]
    fn south_roof_solstice_peak_matches_hand_calculation() {
        let w = WeatherSeries::clear_sky(Site::default(), 2015).unwrap();
        let p = plane_of_array_series(&w, 180.0, 30.0).unwrap();
        // 21 June is day 171 (0-based); take the midday peak of that day.
        let day = 171;
        let peak = p[day * 24..day * 24 + 24].iter().cloned().fold(0.0, f64::max);

        // Hand isotropic transposition at solar noon: zenith = lat - decl,
        // AOI = |zenith - tilt|; irradiance components from the noon hour.
        let zenith = (53.08f64 - 23.44).to_radians();
        let aoi = (zenith - 30f64.to_radians()).abs();
        let noon = day * 24 + 12;
        let (ghi, dhi) = (w.ghi_w_m2[noon], w.dhi_w_m2[noon]);
        let dni = (ghi - dhi) / zenith.cos();
        let tilt = 30f64.to_radians();
        let poa = dni * aoi.cos() + dhi * (1.0 + tilt.cos()) / 2.0 + ghi * 0.2 * (1.0 - tilt.cos()) / 2.0;
        let hand = poa * 0.18;
        assert!((peak - hand).abs() / hand < 0.15, "peak {peak} hand {hand}");
    }
}
