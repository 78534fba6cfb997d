//! Closed-form pieces of the energy system model: COP, decision rounding,
//! balances, energy costs and annualised investments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tariffs {
    /// €/kWh
    pub c_el: f64,
    pub c_feedin: f64,
    pub c_gas: f64,
    /// g/kWh
    pub f_el: f64,
    pub f_gas: f64,
    /// Share of the electricity emission factor attributed to the grid mix.
    pub el_emission_scaling: f64,
    pub central_cop: f64,
    /// Constant thermodynamic efficiency of the building heat pumps.
    pub c_pf: f64,
    /// Flow temperature, K.
    pub t_flow_k: f64,
}

impl Default for Tariffs {
    fn default() -> Self {
        Self {
            c_el: 0.30,
            c_feedin: 0.08,
            c_gas: 0.10,
            f_el: 260.0,
            f_gas: 240.0,
            el_emission_scaling: 0.25,
            central_cop: 8.0,
            c_pf: 0.45,
            t_flow_k: 328.15,
        }
    }
}

pub fn cop(source_k: f64, tariffs: &Tariffs) -> Result<f64> {
    let lift = tariffs.t_flow_k - source_k;
    if !(lift > 0.0) {
        return Err(Error::Model(format!(
            "source temperature {source_k} K does not lie below the flow temperature {} K",
            tariffs.t_flow_k
        )));
    }
    Ok(tariffs.c_pf * tariffs.t_flow_k / lift)
}

pub fn hp_cop_series(source_k: &[f64], tariffs: &Tariffs) -> Result<Vec<f64>> {
    source_k.iter().map(|t| cop(*t, tariffs)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technology {
    /// Heat network
    HN,
    /// Heat pump
    HP,
    /// Gas boiler
    GB,
}

impl Technology {
    pub const ALL: [Technology; 3] = [Technology::GB, Technology::HP, Technology::HN];

    pub fn as_str(&self) -> &'static str {
        match self {
            Technology::HN => "HN",
            Technology::HP => "HP",
            Technology::GB => "GB",
        }
    }
}

impl std::fmt::Display for Technology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rounded heat supply decision of one combo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub technology: Technology,
    /// `max(q, δ)` for heat pump and heat network; scales their investments.
    pub q_hat_hp: f64,
    pub q_hat_hn: f64,
    pub q_pv: f64,
}

impl Decision {
    pub fn delta_hp(&self) -> f64 {
        (self.technology == Technology::HP) as u8 as f64
    }

    pub fn delta_hn(&self) -> f64 {
        (self.technology == Technology::HN) as u8 as f64
    }

    pub fn delta_gb(&self) -> f64 {
        (self.technology == Technology::GB) as u8 as f64
    }
}

/// `δ = ⌊q + 0.5⌋`; if both options round up, the larger `q` wins and an exact
/// tie goes to the heat network.
pub fn round_decisions(q_hp: f64, q_hn: f64, q_pv: f64) -> Decision {
    let hp = (q_hp + 0.5).floor() >= 1.0;
    let hn = (q_hn + 0.5).floor() >= 1.0;
    let technology = match (hp, hn) {
        (true, true) if q_hp > q_hn => Technology::HP,
        (_, true) => Technology::HN,
        (true, false) => Technology::HP,
        (false, false) => Technology::GB,
    };
    let delta = |t| (technology == t) as u8 as f64;
    Decision {
        technology,
        q_hat_hp: q_hp.max(delta(Technology::HP)),
        q_hat_hn: q_hn.max(delta(Technology::HN)),
        q_pv,
    }
}

/// Electric and gas balance of one building, kW per step.
/// `pv_kw` is the full-roof potential; `heat_kw` the heat demand.
pub fn building_balance(
    decision: &Decision,
    heat_kw: &[f64],
    eslp_kw: &[f64],
    pv_kw: &[f64],
    cop: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let d_hp = decision.delta_hp();
    let d_gb = decision.delta_gb();
    let el = heat_kw
        .iter()
        .zip(eslp_kw)
        .zip(pv_kw)
        .zip(cop)
        .map(|(((h, e), p), c)| e + d_hp * h / c - decision.q_pv * p)
        .collect();
    let gas = heat_kw.iter().map(|h| d_gb * h).collect();
    (el, gas)
}

/// Electricity of the central heat pump for the summed connected heat demand.
pub fn heat_network_power(connected_heat_kw: &[f64], tariffs: &Tariffs) -> Vec<f64> {
    connected_heat_kw.iter().map(|h| h / tariffs.central_cop).collect()
}

/// Hourly energy cost in € over a year; import at `c_el`, export credited at
/// `c_feedin`, gas at `c_gas`.
pub fn building_energy_cost(p_el: &[f64], p_gas: &[f64], tariffs: &Tariffs) -> f64 {
    let (import, export) = p_el
        .iter()
        .fold((0.0, 0.0), |(i, e), p| if *p > 0.0 { (i + p, e) } else { (i, e - p) });
    tariffs.c_el * import - tariffs.c_feedin * export + tariffs.c_gas * p_gas.iter().sum::<f64>()
}

/// Annualised heat pump investment, €/a, for a peak of `peak_kw`.
pub fn hp_invest(peak_kw: f64, q_hat: f64) -> f64 {
    let (exp, coeff) = if peak_kw < 50.0 {
        (0.705, 3830.5)
    } else if peak_kw < 300.0 {
        (0.793, 3194.6)
    } else {
        (0.755, 1352.0)
    };
    q_hat * peak_kw.powf(exp) * coeff / 20.0
}

pub fn pv_invest(pv_peak_kw: f64, q_pv: f64) -> f64 {
    q_pv * pv_peak_kw * 1500.0 / 20.0
}

pub fn hn_connection_invest(peak_kw: f64, q_hat: f64) -> f64 {
    q_hat / 25.0 * (peak_kw * 13.4 + 13_976.0)
}

/// Pipe plus central heat pump, €/a.
pub fn hn_infrastructure_invest(length_m: f64, peak_kw: f64) -> f64 {
    if peak_kw <= 0.0 {
        return 0.0;
    }
    length_m * peak_kw.powf(0.2029) * 432.69 / 50.0 + hp_invest(peak_kw, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cop_values() {
        let t = Tariffs::default();
        assert!((cop(273.15, &t).unwrap() - 2.685).abs() < 1e-3);
        let six = 328.15 - 328.15 * 0.45 / 6.0;
        assert!((cop(six, &t).unwrap() - 6.0).abs() < 1e-9);
        assert!(matches!(cop(328.15, &t), Err(Error::Model(_))));
        let s = hp_cop_series(&[280.0; 5], &t).unwrap();
        assert!(s.iter().all(|c| *c == s[0]));
    }

    #[test]
    fn rounding_examples() {
        let d = round_decisions(0.2, 0.3, 0.0);
        assert_eq!(d.technology, Technology::GB);
        assert_eq!((d.q_hat_hp, d.q_hat_hn), (0.2, 0.3));
        let d = round_decisions(0.6, 0.1, 0.0);
        assert_eq!(d.technology, Technology::HP);
        assert_eq!(d.q_hat_hp, 1.0);
        let d = round_decisions(0.7, 0.9, 0.0);
        assert_eq!(d.technology, Technology::HN);
        assert_eq!(round_decisions(0.8, 0.8, 0.0).technology, Technology::HN);
        assert_eq!(round_decisions(0.5, 0.0, 0.0).technology, Technology::HP);
        assert_eq!(round_decisions(0.4999, 0.0, 0.0).technology, Technology::GB);
    }

    #[test]
    fn balance_examples() {
        let gas = round_decisions(0.0, 0.0, 0.0);
        let (el, g) = building_balance(&gas, &[3.0; 4], &[1.0; 4], &[0.0; 4], &[3.0; 4]);
        assert_eq!(el, vec![1.0; 4]);
        assert_eq!(g, vec![3.0; 4]);
        let hp = round_decisions(1.0, 0.0, 0.0);
        let (el, g) = building_balance(&hp, &[3.0; 4], &[1.0; 4], &[0.0; 4], &[3.0; 4]);
        assert_eq!(el, vec![2.0; 4]);
        assert_eq!(g, vec![0.0; 4]);
        let hp_pv = round_decisions(1.0, 0.0, 1.0);
        let (el, _) = building_balance(&hp_pv, &[3.0; 4], &[1.0; 4], &[1.0; 4], &[3.0; 4]);
        assert_eq!(el, vec![1.0; 4]);
        let hn = round_decisions(0.0, 1.0, 0.0);
        let (el, g) = building_balance(&hn, &[3.0; 4], &[1.0; 4], &[0.0; 4], &[3.0; 4]);
        assert_eq!(el, vec![1.0; 4]);
        assert_eq!(g, vec![0.0; 4]);
    }

    #[test]
    fn central_heat_pump() {
        let t = Tariffs::default();
        assert_eq!(heat_network_power(&[0.0; 3], &t), vec![0.0; 3]);
        assert_eq!(heat_network_power(&[8.0], &t), vec![1.0]);
        assert_eq!(heat_network_power(&[16.0], &t), vec![2.0]);
    }

    #[test]
    fn energy_cost_examples() {
        let t = Tariffs::default();
        let zero = vec![0.0; 8760];
        assert!((building_energy_cost(&vec![1.0; 8760], &zero, &t) - 2628.0).abs() < 1e-9);
        assert!((building_energy_cost(&vec![-1.0; 8760], &zero, &t) + 700.8).abs() < 1e-9);
        assert_eq!(building_energy_cost(&zero, &zero, &t), 0.0);
    }

    #[test]
    fn invest_examples() {
        assert!((hp_invest(10.0, 1.0) - 971.0).abs() < 0.1);
        assert_eq!(hp_invest(10.0, 0.0), 0.0);
        assert_eq!(hp_invest(50.0, 1.0), 50f64.powf(0.793) * 3194.6 / 20.0);
        assert_eq!(hp_invest(300.0, 1.0), 300f64.powf(0.755) * 1352.0 / 20.0);
        assert_eq!(pv_invest(5.0, 1.0), 375.0);
        assert_eq!(hn_infrastructure_invest(0.0, 0.0), 0.0);
        assert_eq!(hn_connection_invest(10.0, 0.0), 0.0);
        assert!((hn_connection_invest(0.0, 1.0) - 559.04).abs() < 1e-9);
    }
}
