//! Low-precision solar ephemeris (NOAA spreadsheet formulation, accurate to
//! roughly 0.01° in declination for years 1800–2100). Atmospheric refraction
//! is ignored.

use chrono::NaiveDateTime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunPosition {
    pub zenith_deg: f64,
    /// Degrees clockwise from north.
    pub azimuth_deg: f64,
}

fn julian_day(utc: NaiveDateTime) -> f64 {
    utc.and_utc().timestamp() as f64 / 86_400.0 + 2_440_587.5
}

/// Sun position for a local standard time with a fixed offset from UTC.
pub fn sun_position(local: NaiveDateTime, utc_offset_h: f64, latitude_deg: f64, longitude_deg: f64) -> SunPosition {
    let offset_s = (utc_offset_h * 3600.0).round() as i64;
    let utc = local - chrono::Duration::seconds(offset_s);
    let jc = (julian_day(utc) - 2_451_545.0) / 36_525.0;

    let mean_long = (280.46646 + jc * (36000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    let ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let m = mean_anom.to_radians();
    let center = m.sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + (2.0 * m).sin() * (0.019993 - 0.000101 * jc)
        + (3.0 * m).sin() * 0.000289;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = mean_long + center - 0.00569 - 0.00478 * omega.sin();
    let mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.00256 * omega.cos()).to_radians();
    let decl = (obliq.sin() * app_long.to_radians().sin()).asin();

    let y = (obliq / 2.0).tan().powi(2);
    let l0 = mean_long.to_radians();
    let eot_min = 4.0
        * (y * (2.0 * l0).sin() - 2.0 * ecc * m.sin() + 4.0 * ecc * y * m.sin() * (2.0 * l0).cos()
            - 0.5 * y * y * (4.0 * l0).sin()
            - 1.25 * ecc * ecc * (2.0 * m).sin())
        .to_degrees();

    let minutes = local.and_utc().timestamp().rem_euclid(86_400) as f64 / 60.0;
    let true_solar = (minutes + eot_min + 4.0 * longitude_deg - 60.0 * utc_offset_h).rem_euclid(1440.0);
    let hour_angle = if true_solar < 0.0 {
        true_solar / 4.0 + 180.0
    } else {
        true_solar / 4.0 - 180.0
    };

    let lat = latitude_deg.to_radians();
    let ha = hour_angle.to_radians();
    let cos_zen = (lat.sin() * decl.sin() + lat.cos() * decl.cos() * ha.cos()).clamp(-1.0, 1.0);
    let zen = cos_zen.acos();

    let denom = lat.cos() * zen.sin();
    let azimuth_deg = if denom.abs() < 1e-12 {
        if latitude_deg >= 0.0 {
            180.0
        } else {
            0.0
        }
    } else {
        let c = ((lat.sin() * cos_zen - decl.sin()) / denom).clamp(-1.0, 1.0);
        let a = c.acos().to_degrees();
        if hour_angle > 0.0 {
            (a + 180.0).rem_euclid(360.0)
        } else {
            (540.0 - a).rem_euclid(360.0)
        }
    };

    SunPosition {
        zenith_deg: zen.to_degrees(),
        azimuth_deg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn at(y: i32, mo: u32, d: u32, h: u32, mi: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, mo, d)
            .unwrap()
            .and_hms_opt(h, mi, 0)
            .unwrap()
    }

    #[test]
    fn equinox_noon_on_equator_is_near_zenith() {
        // Greenwich meridian, March equinox 2015 (20 March, ~22:45 UTC); noon
        // zenith should be within a degree of 0.
        let p = sun_position(at(2015, 3, 21, 12, 7), 0.0, 0.0, 0.0);
        assert!(p.zenith_deg < 1.0, "{p:?}");
    }

    #[test]
    fn summer_solstice_noon_elevation_bremen() {
        // Solar noon at 8.8° E, UTC+1 is close to 12:25 local standard time.
        let lat = 53.08;
        let p = sun_position(at(2015, 6, 21, 12, 25), 1.0, lat, 8.8);
        let expected = lat - 23.44;
        assert!((p.zenith_deg - expected).abs() < 0.5, "{p:?}");
        assert!((p.azimuth_deg - 180.0).abs() < 3.0, "{p:?}");
    }

    #[test]
    fn morning_sun_is_east() {
        let p = sun_position(at(2015, 6, 21, 7, 0), 1.0, 53.08, 8.8);
        assert!(p.azimuth_deg > 45.0 && p.azimuth_deg < 135.0, "{p:?}");
        let p = sun_position(at(2015, 6, 21, 18, 0), 1.0, 53.08, 8.8);
        assert!(p.azimuth_deg > 225.0 && p.azimuth_deg < 315.0, "{p:?}");
    }
}
