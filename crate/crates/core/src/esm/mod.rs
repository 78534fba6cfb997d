//! Energy system model over the compressed building stock.
//!
//! Every category is represented by one building whose hourly profiles are
//! scaled by the occupancy `N_{b,g}` of each `(category, group)` combo. A
//! genome holds `(q_hp, q_hn, q_pv)` per combo.

mod formulas;

pub use formulas::{
    building_balance, building_energy_cost, cop, heat_network_power, hn_connection_invest, hn_infrastructure_invest,
    hp_cop_series, hp_invest, pv_invest, round_decisions, Decision, Tariffs, Technology,
};

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::clustering::{Aggregation, Combo};
use crate::demand::{building_peak, diversity, ProfileShape, DEFAULT_ELECTRICITY_KWH, Q_INF};
use crate::error::{Error, Result};
use crate::geodata::Dataset;
use crate::network::mst_length;
use crate::solar::{BuildingSolar, StandardRoofSet, WeatherSeries};

pub const GENES_PER_COMBO: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsmParams {
    pub tariffs: Tariffs,
    pub q_inf: f64,
    pub electricity_kwh: f64,
    /// Annual heat demand per inhabitant used to count persons.
    pub kwh_per_person: f64,
}

impl Default for EsmParams {
    fn default() -> Self {
        Self {
            tariffs: Tariffs::default(),
            q_inf: Q_INF,
            electricity_kwh: DEFAULT_ELECTRICITY_KWH,
            kwh_per_person: 15_000.0,
        }
    }
}

pub fn persons(annual_heat_kwh: f64, kwh_per_person: f64) -> f64 {
    (annual_heat_kwh / kwh_per_person).round().max(1.0)
}

/// Rounded decisions of a `(q_hp, q_hn, q_pv)`-per-combo genome.
pub fn decode_genome(genome: &[f64]) -> Result<Vec<Decision>> {
    if !genome.len().is_multiple_of(GENES_PER_COMBO) {
        return Err(Error::Argument(format!(
            "genome length {} is not a multiple of {GENES_PER_COMBO}",
            genome.len()
        )));
    }
    if genome.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::Argument("genes must lie in [0, 1]".into()));
    }
    Ok(genome
        .chunks_exact(GENES_PER_COMBO)
        .map(|g| round_decisions(g[0], g[1], g[2]))
        .collect())
}

/// Global indicators; all per person, emissions in t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiTriple {
    pub energy_costs: f64,
    pub invest: f64,
    pub emissions: f64,
}

impl KpiTriple {
    pub fn to_array(&self) -> [f64; 3] {
        [self.energy_costs, self.invest, self.emissions]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            energy_costs: a[0],
            invest: a[1],
            emissions: a[2],
        }
    }
}

pub const KPI_HEADER: [&str; 4] = [
    "config_id",
    "energy_costs_2025_eur_per_pers",
    "invest_eur_per_pers_a",
    "emissions_t_per_pers",
];

/// Hourly profiles of one representative building, kW.
#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub heat_kw: Vec<f64>,
    pub eslp_kw: Vec<f64>,
    /// Full-roof PV potential.
    pub pv_kw: Vec<f64>,
    /// Heat peak of a single building (profile peak over the diversity limit).
    pub peak_kw: f64,
    pub pv_peak_kw: f64,
}

impl Representative {
    pub fn new(heat_kw: Vec<f64>, eslp_kw: Vec<f64>, pv_kw: Vec<f64>, q_inf: f64) -> Result<Self> {
        let n = heat_kw.len();
        if eslp_kw.len() != n || pv_kw.len() != n {
            return Err(Error::Argument("representative profiles differ in length".into()));
        }
        let peak = heat_kw.iter().cloned().fold(0.0, f64::max);
        let pv_peak_kw = pv_kw.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            heat_kw,
            eslp_kw,
            pv_kw,
            peak_kw: building_peak(peak, q_inf),
            pv_peak_kw,
        })
    }
}

/// Pre-person totals of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub energy_costs_eur: f64,
    pub invest_eur_a: f64,
    pub emissions_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub kpi: KpiTriple,
    pub totals: Totals,
    pub decisions: Vec<Decision>,
    pub hn_length_m: f64,
}

pub struct EnergySystemModel {
    reps: Vec<Representative>,
    combos: Vec<Combo>,
    counts: Vec<f64>,
    members: Vec<Vec<usize>>,
    positions: Vec<(f64, f64)>,
    cop: Vec<f64>,
    persons: f64,
    params: EsmParams,
    hn_lengths: Mutex<HashMap<Vec<u64>, f64>>,
}

impl EnergySystemModel {
    /// `reps` is indexed by category; `positions` by building.
    pub fn new(
        reps: Vec<Representative>,
        aggregation: &Aggregation,
        positions: Vec<(f64, f64)>,
        cop: Vec<f64>,
        persons: f64,
        params: EsmParams,
    ) -> Result<Self> {
        if positions.len() != aggregation.n_buildings() {
            return Err(Error::Argument("one position per aggregated building required".into()));
        }
        if !(persons > 0.0) {
            return Err(Error::Argument("person count must be positive".into()));
        }
        let steps = cop.len();
        if reps.iter().any(|r| r.heat_kw.len() != steps) {
            return Err(Error::Argument("profiles and COP series differ in length".into()));
        }
        let index = aggregation.combo_index();
        let mut members = vec![Vec::new(); aggregation.variables()];
        for (i, a) in aggregation.assignments().iter().enumerate() {
            if a.category >= reps.len() {
                return Err(Error::Argument(format!(
                    "no representative for category {}",
                    a.category
                )));
            }
            members[index[&a.combo()]].push(i);
        }
        Ok(Self {
            reps,
            combos: aggregation.combos().to_vec(),
            counts: aggregation
                .combos()
                .iter()
                .map(|c| aggregation.count(*c) as f64)
                .collect(),
            members,
            positions,
            cop,
            persons,
            params,
            hn_lengths: Mutex::new(HashMap::new()),
        })
    }

    /// Representatives from category means of demand and standard-roof weights.
    pub fn from_dataset(
        dataset: &Dataset,
        aggregation: &Aggregation,
        solar: &[BuildingSolar],
        standard: &StandardRoofSet,
        weather: &WeatherSeries,
        params: EsmParams,
    ) -> Result<Self> {
        if solar.len() != dataset.len() || aggregation.n_buildings() != dataset.len() {
            return Err(Error::Argument(
                "dataset, solar weights and aggregation differ in size".into(),
            ));
        }
        let shapes = ProfileShape::new(weather);
        let n_cat = aggregation
            .assignments()
            .iter()
            .map(|a| a.category + 1)
            .max()
            .unwrap_or(0);
        let mut demand = vec![0.0; n_cat];
        let mut omega = vec![vec![0.0; standard.len()]; n_cat];
        let mut size = vec![0usize; n_cat];
        for ((a, b), s) in aggregation.assignments().iter().zip(dataset.buildings()).zip(solar) {
            size[a.category] += 1;
            demand[a.category] += b.annual_heat_demand_kwh;
            for (o, w) in omega[a.category].iter_mut().zip(&s.omega_m2) {
                *o += w;
            }
        }
        let eslp = shapes.electricity_profile(params.electricity_kwh)?;
        let reps = (0..n_cat)
            .map(|c| {
                let n = size[c].max(1) as f64;
                let w: Vec<f64> = omega[c].iter().map(|o| o / n).collect();
                let pv_kw = standard.combine_series(&w).into_iter().map(|p| p / 1000.0).collect();
                Representative::new(shapes.heat_profile(demand[c] / n)?, eslp.clone(), pv_kw, params.q_inf)
            })
            .collect::<Result<Vec<_>>>()?;
        let persons = dataset
            .buildings()
            .iter()
            .map(|b| persons(b.annual_heat_demand_kwh, params.kwh_per_person))
            .sum();
        Self::new(
            reps,
            aggregation,
            dataset.positions(),
            hp_cop_series(&weather.temp_k, &params.tariffs)?,
            persons,
            params,
        )
    }

    pub fn genome_len(&self) -> usize {
        GENES_PER_COMBO * self.combos.len()
    }

    pub fn combos(&self) -> &[Combo] {
        &self.combos
    }

    pub fn persons(&self) -> f64 {
        self.persons
    }

    pub fn representatives(&self) -> &[Representative] {
        &self.reps
    }

    pub fn decisions(&self, genome: &[f64]) -> Result<Vec<Decision>> {
        if genome.len() != self.genome_len() {
            return Err(Error::Argument(format!(
                "genome has {} genes, expected {}",
                genome.len(),
                self.genome_len()
            )));
        }
        decode_genome(genome)
    }

    /// MST over all buildings of heat network combos, cached per selection.
    fn hn_length(&self, decisions: &[Decision]) -> f64 {
        let mut key = vec![0u64; decisions.len().div_ceil(64)];
        for (i, d) in decisions.iter().enumerate() {
            if d.technology == Technology::HN {
                key[i / 64] |= 1 << (i % 64);
            }
        }
        if let Some(l) = self.hn_lengths.lock().expect("cache lock").get(&key) {
            return *l;
        }
        let pts: Vec<(f64, f64)> = decisions
            .iter()
            .zip(&self.members)
            .filter(|(d, _)| d.technology == Technology::HN)
            .flat_map(|(_, m)| m.iter().map(|&i| self.positions[i]))
            .collect();
        let l = mst_length(&pts);
        self.hn_lengths.lock().expect("cache lock").insert(key, l);
        l
    }

    pub fn evaluate(&self, genome: &[f64]) -> Result<Evaluation> {
        let decisions = self.decisions(genome)?;
        let t = &self.params.tariffs;
        let steps = self.cop.len();
        let mut global_el = vec![0.0; steps];
        let mut gas_total = 0.0;
        let mut energy = 0.0;
        let mut invest = 0.0;
        let mut hn_count = 0.0;
        let mut hn_peak_sum = 0.0;

        for ((d, &(category, _)), &n) in decisions.iter().zip(&self.combos).zip(&self.counts) {
            let rep = &self.reps[category];
            let (d_hp, d_gb, d_hn) = (d.delta_hp(), d.delta_gb(), d.delta_hn());
            let (mut import, mut export, mut gas) = (0.0, 0.0, 0.0);
            for (s, global) in global_el.iter_mut().enumerate() {
                let heat = rep.heat_kw[s];
                let el = rep.eslp_kw[s] + d_hp * heat / self.cop[s] - d.q_pv * rep.pv_kw[s];
                if el > 0.0 {
                    import += el;
                } else {
                    export -= el;
                }
                gas += d_gb * heat;
                *global += n * (el + d_hn * heat / t.central_cop);
            }
            energy += n * (t.c_el * import - t.c_feedin * export + t.c_gas * gas);
            gas_total += n * gas;
            invest += n
                * (hp_invest(rep.peak_kw, d.q_hat_hp)
                    + hn_connection_invest(rep.peak_kw, d.q_hat_hn)
                    + pv_invest(rep.pv_peak_kw, d.q_pv));
            if d.technology == Technology::HN {
                hn_count += n;
                hn_peak_sum += n * rep.peak_kw;
                let hn_heat: f64 = rep.heat_kw.iter().sum();
                energy += t.c_el * n * hn_heat / t.central_cop;
            }
        }

        let mut hn_length_m = 0.0;
        if hn_count > 0.0 {
            hn_length_m = self.hn_length(&decisions);
            let peak = diversity(hn_count as usize)? * hn_peak_sum;
            invest += hn_infrastructure_invest(hn_length_m, peak);
        }

        let f_el = t.f_el * t.el_emission_scaling;
        let grams = f_el * global_el.iter().map(|p| p.max(0.0)).sum::<f64>() + t.f_gas * gas_total;
        let totals = Totals {
            energy_costs_eur: energy,
            invest_eur_a: invest,
            emissions_t: grams / 1e6,
        };
        if !(totals.energy_costs_eur.is_finite() && totals.invest_eur_a.is_finite() && totals.emissions_t.is_finite()) {
            return Err(Error::Numerical("non-finite indicator".into()));
        }
        Ok(Evaluation {
            kpi: KpiTriple {
                energy_costs: totals.energy_costs_eur / self.persons,
                invest: totals.invest_eur_a / self.persons,
                emissions: totals.emissions_t / self.persons,
            },
            totals,
            decisions,
            hn_length_m,
        })
    }

    pub fn kpis(&self, genome: &[f64]) -> Result<KpiTriple> {
        Ok(self.evaluate(genome)?.kpi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{Assignment, GroupingMethod};
    use proptest::prelude::*;

    const STEPS: usize = 8760;

    fn rep(heat: f64, eslp: f64, pv: f64) -> Representative {
        Representative::new(vec![heat; STEPS], vec![eslp; STEPS], vec![pv; STEPS], 1.0).unwrap()
    }

    fn model(assign: &[(usize, usize)], reps: Vec<Representative>, persons: f64) -> EnergySystemModel {
        let agg = Aggregation::from_assignments(
            GroupingMethod::KMeansGeo,
            assign
                .iter()
                .map(|&(category, group)| Assignment { category, group })
                .collect(),
        );
        let pos = (0..assign.len()).map(|i| (10.0 * i as f64, 0.0)).collect();
        EnergySystemModel::new(reps, &agg, pos, vec![3.0; STEPS], persons, EsmParams::default()).unwrap()
    }

    #[test]
    fn all_gas_has_zero_investment() {
        let m = model(
            &[(0, 0), (0, 1), (1, 0)],
            vec![rep(2.0, 0.3, 1.0), rep(1.0, 0.3, 0.5)],
            3.0,
        );
        let e = m.evaluate(&vec![0.0; m.genome_len()]).unwrap();
        assert_eq!(e.totals.invest_eur_a, 0.0);
        assert!(e.decisions.iter().all(|d| d.technology == Technology::GB));
    }

    #[test]
    fn constant_gas_emissions() {
        let m = model(&[(0, 0)], vec![rep(1.0, 0.0, 0.0)], 1.0);
        let e = m.evaluate(&[0.0, 0.0, 0.0]).unwrap();
        assert!((e.totals.emissions_t - 2.1024).abs() < 1e-9);
        assert!((e.totals.energy_costs_eur - 876.0).abs() < 1e-9);
    }

    #[test]
    fn heat_network_single_building() {
        let m = model(&[(0, 0)], vec![rep(8.0, 0.0, 0.0)], 1.0);
        let e = m.evaluate(&[0.0, 1.0, 0.0]).unwrap();
        // 1 kW central heat pump electricity all year
        assert!((e.totals.energy_costs_eur - 0.3 * 8760.0).abs() < 1e-9);
        assert_eq!(e.hn_length_m, 0.0);
        let expected = hn_connection_invest(8.0, 1.0) + hn_infrastructure_invest(0.0, 8.0);
        assert!((e.totals.invest_eur_a - expected).abs() < 1e-9);
    }

    #[test]
    fn heat_network_length_spans_connected_buildings() {
        let m = model(&[(0, 0), (0, 0), (0, 1)], vec![rep(1.0, 0.0, 0.0)], 3.0);
        let e = m.evaluate(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.hn_length_m, 10.0);
        let e = m.evaluate(&[0.0, 1.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e.hn_length_m, 20.0);
    }

    #[test]
    fn doubling_counts_doubles_totals() {
        let r = || vec![rep(2.0, 0.5, 1.5), rep(1.0, 0.4, 0.0)];
        let one = model(&[(0, 0), (1, 0)], r(), 1.0);
        let two = model(&[(0, 0), (0, 0), (1, 0), (1, 0)], r(), 1.0);
        let g = [1.0, 0.0, 0.7, 0.0, 0.0, 0.2];
        let a = one.evaluate(&g).unwrap().totals;
        let b = two.evaluate(&g).unwrap().totals;
        assert!((2.0 * a.energy_costs_eur - b.energy_costs_eur).abs() < 1e-9 * b.energy_costs_eur.abs());
        assert!((2.0 * a.invest_eur_a - b.invest_eur_a).abs() < 1e-9 * b.invest_eur_a);
        assert!((2.0 * a.emissions_t - b.emissions_t).abs() < 1e-9 * b.emissions_t);
    }

    #[test]
    fn rejects_bad_genomes() {
        let m = model(&[(0, 0)], vec![rep(1.0, 0.0, 0.0)], 1.0);
        assert!(m.evaluate(&[0.0, 0.0]).is_err());
        assert!(m.evaluate(&[0.0, 1.5, 0.0]).is_err());
    }

    #[test]
    fn persons_rule() {
        assert_eq!(persons(0.0, 15_000.0), 1.0);
        assert_eq!(persons(22_000.0, 15_000.0), 1.0);
        assert_eq!(persons(23_000.0, 15_000.0), 2.0);
    }

    proptest! {
        #[test]
        fn more_pv_never_raises_emissions(
            q_pv in 0.0f64..0.9,
            dq in 0.0f64..0.1,
            q_hp in 0.0f64..1.0,
            q_hn in 0.0f64..1.0,
        ) {
            let reps = vec![
                Representative::new(
                    (0..STEPS).map(|s| 1.0 + (s % 24) as f64 * 0.1).collect(),
                    vec![0.4; STEPS],
                    (0..STEPS).map(|s| if (8..17).contains(&(s % 24)) { 2.0 } else { 0.0 }).collect(),
                    0.47,
                ).unwrap(),
            ];
            let m = model(&[(0, 0), (0, 0)], reps, 1.0);
            let a = m.evaluate(&[q_hp, q_hn, q_pv]).unwrap();
            let b = m.evaluate(&[q_hp, q_hn, q_pv + dq]).unwrap();
            prop_assert!(b.totals.emissions_t <= a.totals.emissions_t + 1e-12);
            prop_assert!(a.totals.emissions_t >= 0.0);
        }
    }
}
