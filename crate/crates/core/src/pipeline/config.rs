//! Run configuration as a flat `key = value` text file.
//!
//! Blank lines and `#` comments are ignored. Recognised keys are the names
//! listed by [`RunConfig::pairs`]; list values are comma separated and ranges
//! are written `lo..hi` (inclusive).

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::clustering::{GroupingMethod, LloydParams, ScanConfig};
use crate::error::{Error, Result};
use crate::esm::{EsmParams, Tariffs};
use crate::geodata::Layout;
use crate::network::CohesionMode;
use crate::optimizer::NsgaParams;
use crate::solar::Site;

use super::{ClusterParams, FilterParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeatherSource {
    ClearSky,
    /// Clear sky scaled by seeded daily clearness.
    Cloudy,
}

impl WeatherSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeatherSource::ClearSky => "clear_sky",
            WeatherSource::Cloudy => "cloudy",
        }
    }
}

impl FromStr for WeatherSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clear_sky" => Ok(Self::ClearSky),
            "cloudy" => Ok(Self::Cloudy),
            other => Err(Error::Argument(format!("unknown weather source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Buildings file (CSV or GeoJSON); defaults to `buildings.csv` in `out`.
    pub dataset: Option<PathBuf>,
    /// Weather CSV; defaults to `weather.csv` in `out`, else synthetic.
    pub weather: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,

    pub n_buildings: usize,
    pub layout: Layout,
    pub weather_source: WeatherSource,
    pub site: Site,
    pub year: i32,
    pub histogram_bins: usize,

    pub k_reps: usize,
    pub k_groups: usize,
    pub methods: Vec<GroupingMethod>,
    pub min_cluster_size: usize,
    pub n_init: usize,
    pub max_iter: usize,
    pub cohesion: CohesionMode,
    pub reps_range: RangeInclusive<usize>,
    pub groups_range: RangeInclusive<usize>,

    pub generations: usize,
    pub population: usize,
    pub seed_known_solutions: bool,
    pub esm: EsmParams,

    pub cost_cap: f64,
    pub min_share: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            weather: None,
            out: PathBuf::from("out"),
            seed: 1,
            n_buildings: 859,
            layout: Layout::TwoDistricts,
            weather_source: WeatherSource::Cloudy,
            site: Site::default(),
            year: 2015,
            histogram_bins: 20,
            k_reps: 5,
            k_groups: 10,
            methods: vec![
                GroupingMethod::KMeansGeo,
                GroupingMethod::KMeansEnergy,
                GroupingMethod::KPrototypesHdbscan,
                GroupingMethod::KModes,
            ],
            min_cluster_size: 5,
            n_init: 10,
            max_iter: 300,
            cohesion: CohesionMode::PerBuilding,
            reps_range: 5..=10,
            groups_range: 5..=10,
            generations: 2000,
            population: 16,
            seed_known_solutions: true,
            esm: EsmParams::default(),
            cost_cap: 500.0,
            min_share: 0.33,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Argument(format!("invalid value `{value}` for `{key}`")))
}

fn parse_range(key: &str, value: &str) -> Result<RangeInclusive<usize>> {
    let (lo, hi) = value
        .split_once("..")
        .ok_or_else(|| Error::Argument(format!("`{key}` expects a range lo..hi, got `{value}`")))?;
    let (lo, hi) = (parse(key, lo.trim())?, parse(key, hi.trim())?);
    if lo == 0 || lo > hi {
        return Err(Error::Argument(format!("`{key}` must satisfy 1 <= lo <= hi")));
    }
    Ok(lo..=hi)
}

fn cohesion_str(c: CohesionMode) -> &'static str {
    match c {
        CohesionMode::PerBuilding => "per_building",
        CohesionMode::PerGroup => "per_group",
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let t = &mut self.esm.tariffs;
        match key.trim() {
            "dataset" => self.dataset = Some(PathBuf::from(v)),
            "weather" => self.weather = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seed = parse(key, v)?,
            "n_buildings" => self.n_buildings = parse(key, v)?,
            "layout" => self.layout = v.parse()?,
            "weather_source" => self.weather_source = v.parse()?,
            "latitude_deg" => self.site.latitude_deg = parse(key, v)?,
            "longitude_deg" => self.site.longitude_deg = parse(key, v)?,
            "utc_offset_h" => self.site.utc_offset_h = parse(key, v)?,
            "year" => self.year = parse(key, v)?,
            "histogram_bins" => self.histogram_bins = parse(key, v)?,
            "k_reps" => self.k_reps = parse(key, v)?,
            "k_groups" => self.k_groups = parse(key, v)?,
            "methods" => self.methods = v.split(',').map(|m| m.trim().parse()).collect::<Result<Vec<_>>>()?,
            "min_cluster_size" => self.min_cluster_size = parse(key, v)?,
            "n_init" => self.n_init = parse(key, v)?,
            "max_iter" => self.max_iter = parse(key, v)?,
            "cohesion" => self.cohesion = v.parse()?,
            "reps_range" => self.reps_range = parse_range(key, v)?,
            "groups_range" => self.groups_range = parse_range(key, v)?,
            "generations" => self.generations = parse(key, v)?,
            "population" => self.population = parse(key, v)?,
            "seed_known_solutions" => self.seed_known_solutions = parse(key, v)?,
            "c_el" => t.c_el = parse(key, v)?,
            "c_feedin" => t.c_feedin = parse(key, v)?,
            "c_gas" => t.c_gas = parse(key, v)?,
            "f_el" => t.f_el = parse(key, v)?,
            "f_gas" => t.f_gas = parse(key, v)?,
            "el_emission_scaling" => t.el_emission_scaling = parse(key, v)?,
            "central_cop" => t.central_cop = parse(key, v)?,
            "c_pf" => t.c_pf = parse(key, v)?,
            "t_flow_k" => t.t_flow_k = parse(key, v)?,
            "q_inf" => self.esm.q_inf = parse(key, v)?,
            "electricity_kwh" => self.esm.electricity_kwh = parse(key, v)?,
            "kwh_per_person" => self.esm.kwh_per_person = parse(key, v)?,
            "cost_cap" => self.cost_cap = parse(key, v)?,
            "min_share" => self.min_share = parse(key, v)?,
            other => return Err(Error::Argument(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse_str(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                message: format!("line {}: expected key = value", i + 1),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut c = Self::default();
        c.parse_str(&std::fs::read_to_string(path)?, path)?;
        Ok(c)
    }

    /// Range and consistency checks.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_buildings", self.n_buildings),
            ("k_reps", self.k_reps),
            ("k_groups", self.k_groups),
            ("n_init", self.n_init),
            ("max_iter", self.max_iter),
            ("histogram_bins", self.histogram_bins),
        ];
        if let Some((k, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Argument(format!("`{k}` must be at least 1")));
        }
        if self.min_cluster_size < 2 {
            return Err(Error::Argument("`min_cluster_size` must be at least 2".into()));
        }
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return Err(Error::Argument("`population` must be even and at least 4".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Argument("`methods` must name at least one method".into()));
        }
        if !(self.esm.q_inf > 0.0 && self.esm.q_inf <= 1.0) {
            return Err(Error::Argument("`q_inf` must lie in (0, 1]".into()));
        }
        if !(self.esm.kwh_per_person > 0.0) || !(self.esm.electricity_kwh >= 0.0) {
            return Err(Error::Argument(
                "`kwh_per_person` must be positive, `electricity_kwh` non-negative".into(),
            ));
        }
        if !(self.esm.tariffs.central_cop > 0.0) {
            return Err(Error::Argument("`central_cop` must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_share) {
            return Err(Error::Argument("`min_share` must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Every key with its effective value, sorted by key.
    pub fn pairs(&self) -> BTreeMap<&'static str, String> {
        let t = &self.esm.tariffs;
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let range = |r: &RangeInclusive<usize>| format!("{}..{}", r.start(), r.end());
        BTreeMap::from([
            ("dataset", path(&self.dataset)),
            ("weather", path(&self.weather)),
            ("out", self.out.display().to_string()),
            ("seed", self.seed.to_string()),
            ("n_buildings", self.n_buildings.to_string()),
            ("layout", self.layout.as_str().to_string()),
            ("weather_source", self.weather_source.as_str().to_string()),
            ("latitude_deg", self.site.latitude_deg.to_string()),
            ("longitude_deg", self.site.longitude_deg.to_string()),
            ("utc_offset_h", self.site.utc_offset_h.to_string()),
            ("year", self.year.to_string()),
            ("histogram_bins", self.histogram_bins.to_string()),
            ("k_reps", self.k_reps.to_string()),
            ("k_groups", self.k_groups.to_string()),
            (
                "methods",
                self.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
            ),
            ("min_cluster_size", self.min_cluster_size.to_string()),
            ("n_init", self.n_init.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("cohesion", cohesion_str(self.cohesion).to_string()),
            ("reps_range", range(&self.reps_range)),
            ("groups_range", range(&self.groups_range)),
            ("generations", self.generations.to_string()),
            ("population", self.population.to_string()),
            ("seed_known_solutions", self.seed_known_solutions.to_string()),
            ("c_el", t.c_el.to_string()),
            ("c_feedin", t.c_feedin.to_string()),
            ("c_gas", t.c_gas.to_string()),
            ("f_el", t.f_el.to_string()),
            ("f_gas", t.f_gas.to_string()),
            ("el_emission_scaling", t.el_emission_scaling.to_string()),
            ("central_cop", t.central_cop.to_string()),
            ("c_pf", t.c_pf.to_string()),
            ("t_flow_k", t.t_flow_k.to_string()),
            ("q_inf", self.esm.q_inf.to_string()),
            ("electricity_kwh", self.esm.electricity_kwh.to_string()),
            ("kwh_per_person", self.esm.kwh_per_person.to_string()),
            ("cost_cap", self.cost_cap.to_string()),
            ("min_share", self.min_share.to_string()),
        ])
    }

    pub fn lloyd(&self) -> LloydParams {
        LloydParams {
            n_init: self.n_init,
            max_iter: self.max_iter,
        }
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            k_reps: self.k_reps,
            k_groups: self.k_groups,
            seed: self.seed,
            min_cluster_size: self.min_cluster_size,
            lloyd: self.lloyd(),
        }
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            methods: self.methods.clone(),
            reps: self.reps_range.clone(),
            groups: self.groups_range.clone(),
            seed: self.seed,
            min_cluster_size: self.min_cluster_size,
            cohesion: self.cohesion,
            lloyd: self.lloyd(),
        }
    }

    pub fn nsga_params(&self) -> NsgaParams {
        NsgaParams {
            population_size: self.population,
            generations: self.generations,
            seed: self.seed,
            seed_known_solutions: self.seed_known_solutions,
            ..NsgaParams::default()
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            cost_cap_eur_per_pers: self.cost_cap,
            min_share: self.min_share,
        }
    }

    pub fn tariffs(&self) -> &Tariffs {
        &self.esm.tariffs
    }
}
