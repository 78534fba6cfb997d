//! Post-processing of optimisation archives: solution filters, decompression
//! onto real buildings, technology shares and cross-method consistency.

mod io;

pub use io::{
    read_archive_csv, write_archive_csv, write_assignment_geojson, write_consistency_csv, write_kpi_csv,
    write_shares_csv, ConsistencyRecord,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::Aggregation;
use crate::error::{Error, Result};
use crate::esm::{decode_genome, KpiTriple, Technology};
use crate::optimizer::ArchiveEntry;

/// Technology and PV fraction of one real building.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingAssignment {
    pub technology: Technology,
    pub pv_fraction: f64,
}

/// Every building inherits the rounded decision of its combo.
pub fn decompress(genome: &[f64], aggregation: &Aggregation) -> Result<Vec<BuildingAssignment>> {
    let decisions = decode_genome(genome)?;
    if decisions.len() != aggregation.variables() {
        return Err(Error::Argument(format!(
            "configuration covers {} combos, aggregation has {}",
            decisions.len(),
            aggregation.variables()
        )));
    }
    let index = aggregation.combo_index();
    Ok(aggregation
        .assignments()
        .iter()
        .map(|a| {
            let d = &decisions[index[&a.combo()]];
            BuildingAssignment {
                technology: d.technology,
                pv_fraction: d.q_pv,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TechnologyCounts {
    pub gb: usize,
    pub hp: usize,
    pub hn: usize,
}

impl TechnologyCounts {
    pub fn from_assignments(assignments: &[BuildingAssignment]) -> Self {
        let mut c = Self::default();
        for a in assignments {
            c.add(a.technology, 1);
        }
        c
    }

    /// Counting on the compressed model: `Σ N_{b,g}` per technology.
    pub fn from_combos(genome: &[f64], aggregation: &Aggregation) -> Result<Self> {
        let decisions = decode_genome(genome)?;
        let mut c = Self::default();
        for (d, combo) in decisions.iter().zip(aggregation.combos()) {
            c.add(d.technology, aggregation.count(*combo));
        }
        Ok(c)
    }

    fn add(&mut self, t: Technology, n: usize) {
        match t {
            Technology::GB => self.gb += n,
            Technology::HP => self.hp += n,
            Technology::HN => self.hn += n,
        }
    }

    pub fn get(&self, t: Technology) -> usize {
        match t {
            Technology::GB => self.gb,
            Technology::HP => self.hp,
            Technology::HN => self.hn,
        }
    }

    pub fn total(&self) -> usize {
        self.gb + self.hp + self.hn
    }

    pub fn shares(&self) -> TechnologyShares {
        let n = self.total().max(1) as f64;
        TechnologyShares {
            gb: self.gb as f64 / n,
            hp: self.hp as f64 / n,
            hn: self.hn as f64 / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechnologyShares {
    pub gb: f64,
    pub hp: f64,
    pub hn: f64,
}

impl TechnologyShares {
    pub fn get(&self, t: Technology) -> f64 {
        match t {
            Technology::GB => self.gb,
            Technology::HP => self.hp,
            Technology::HN => self.hn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSelection {
    pub filter: String,
    pub config_id: usize,
    pub counts: TechnologyCounts,
    pub kpi: KpiTriple,
    pub genome: Vec<f64>,
}

fn kpi_of(entry: &ArchiveEntry) -> Result<KpiTriple> {
    match entry.objectives.as_slice() {
        [e, i, m] => Ok(KpiTriple::from_array([*e, *i, *m])),
        _ => Err(Error::Argument(format!(
            "configuration {} does not carry three indicators",
            entry.config_id
        ))),
    }
}

/// Lowest investment, then lowest emissions, then lowest id.
fn cheapest<'a>(candidates: impl Iterator<Item = &'a ArchiveEntry>) -> Option<&'a ArchiveEntry> {
    candidates.min_by(|a, b| {
        a.objectives[1]
            .total_cmp(&b.objectives[1])
            .then(a.objectives[2].total_cmp(&b.objectives[2]))
            .then(a.config_id.cmp(&b.config_id))
    })
}

fn selection(filter: String, entry: &ArchiveEntry, aggregation: &Aggregation) -> Result<SolutionSelection> {
    Ok(SolutionSelection {
        filter,
        config_id: entry.config_id,
        counts: TechnologyCounts::from_assignments(&decompress(&entry.genome, aggregation)?),
        kpi: kpi_of(entry)?,
        genome: entry.genome.clone(),
    })
}

/// Lowest investment among configurations whose energy costs stay below the
/// cap (€/person). `None` when no configuration qualifies.
pub fn select_low_invest_under_cost_cap(
    archive: &[ArchiveEntry],
    aggregation: &Aggregation,
    cap_eur_per_pers: f64,
) -> Result<Option<SolutionSelection>> {
    for e in archive {
        kpi_of(e)?;
    }
    cheapest(archive.iter().filter(|e| e.objectives[0] < cap_eur_per_pers))
        .map(|e| selection(format!("energy_costs<{cap_eur_per_pers}"), e, aggregation))
        .transpose()
}

/// Lowest investment among configurations in which both heat network and heat
/// pump supply at least `min_share` of the real buildings.
pub fn select_min_shares(
    archive: &[ArchiveEntry],
    aggregation: &Aggregation,
    min_share: f64,
) -> Result<Option<SolutionSelection>> {
    let shares: Vec<TechnologyShares> = archive
        .par_iter()
        .map(|e| {
            kpi_of(e)?;
            Ok(TechnologyCounts::from_assignments(&decompress(&e.genome, aggregation)?).shares())
        })
        .collect::<Result<_>>()?;
    cheapest(
        archive
            .iter()
            .zip(&shares)
            .filter(|(_, s)| s.hn >= min_share && s.hp >= min_share)
            .map(|(e, _)| e),
    )
    .map(|e| selection(format!("share_hn>={min_share},share_hp>={min_share}"), e, aggregation))
    .transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub config_id: usize,
    pub shares: TechnologyShares,
}

/// Global technology shares per archived configuration.
pub fn technology_share_triangle(archive: &[ArchiveEntry], aggregation: &Aggregation) -> Result<Vec<ShareRow>> {
    archive
        .par_iter()
        .map(|e| {
            Ok(ShareRow {
                config_id: e.config_id,
                shares: TechnologyCounts::from_assignments(&decompress(&e.genome, aggregation)?).shares(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub technology: Technology,
    /// Share of buildings assigned this technology by every method.
    pub consistent_fraction: f64,
    /// Expected fraction for independent random assignment with the same shares.
    pub random_baseline: f64,
}

/// One technology vector per method, all over the same buildings.
pub fn consistency(per_method: &[Vec<Technology>]) -> Result<Vec<Consistency>> {
    let n = per_method.first().map_or(0, Vec::len);
    if per_method.is_empty() || n == 0 || per_method.iter().any(|m| m.len() != n) {
        return Err(Error::Argument(
            "consistency needs at least one method and equally many buildings per method".into(),
        ));
    }
    Ok(Technology::ALL
        .iter()
        .map(|&t| {
            let consistent = (0..n).filter(|&i| per_method.iter().all(|m| m[i] == t)).count();
            let baseline = per_method
                .iter()
                .map(|m| m.iter().filter(|x| **x == t).count() as f64 / n as f64)
                .product();
            Consistency {
                technology: t,
                consistent_fraction: consistent as f64 / n as f64,
                random_baseline: baseline,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{Assignment, GroupingMethod};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn entry(id: usize, obj: [f64; 3], genome: Vec<f64>) -> ArchiveEntry {
        ArchiveEntry {
            config_id: id,
            genome,
            objectives: obj.to_vec(),
        }
    }

    /// combos (0,0) ×2 and (1,0) ×1
    fn agg() -> Aggregation {
        Aggregation::from_assignments(
            GroupingMethod::KMeansGeo,
            vec![
                Assignment { category: 0, group: 0 },
                Assignment { category: 1, group: 0 },
                Assignment { category: 0, group: 0 },
            ],
        )
    }

    #[test]
    fn cost_cap_filter() {
        let g = vec![0.0; 6];
        let arch = vec![
            entry(0, [400.0, 1000.0, 1.0], g.clone()),
            entry(1, [499.0, 800.0, 1.5], g.clone()),
            entry(2, [600.0, 100.0, 0.1], g.clone()),
        ];
        let s = select_low_invest_under_cost_cap(&arch, &agg(), 500.0).unwrap().unwrap();
        assert_eq!(s.config_id, 1);
        assert!(select_low_invest_under_cost_cap(&arch, &agg(), 300.0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn decompress_examples() {
        let a = agg();
        let gas = decompress(&[0.0; 6], &a).unwrap();
        assert!(gas.iter().all(|b| b.technology == Technology::GB));
        let hn_first = decompress(&[0.0, 1.0, 0.3, 0.0, 0.0, 0.0], &a).unwrap();
        let techs: Vec<Technology> = hn_first.iter().map(|b| b.technology).collect();
        assert_eq!(techs, vec![Technology::HN, Technology::GB, Technology::HN]);
        assert_eq!(hn_first[0].pv_fraction, 0.3);
        assert!(decompress(&[0.0; 3], &a).is_err());
    }

    #[test]
    fn two_counting_paths_agree() {
        let a = agg();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g: Vec<f64> = (0..6).map(|_| rng.random()).collect();
            let via_buildings = TechnologyCounts::from_assignments(&decompress(&g, &a).unwrap());
            assert_eq!(via_buildings, TechnologyCounts::from_combos(&g, &a).unwrap());
            let s = via_buildings.shares();
            assert!((s.gb + s.hp + s.hn - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn min_share_filter() {
        let a = agg();
        let all_gas = entry(0, [1.0, 0.0, 1.0], vec![0.0; 6]);
        assert!(select_min_shares(std::slice::from_ref(&all_gas), &a, 0.33)
            .unwrap()
            .is_none());
        // HN on the pair, HP on the single building: 2/3 and 1/3
        let mixed = entry(1, [1.0, 5.0, 1.0], vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let s = select_min_shares(&[all_gas, mixed], &a, 0.33).unwrap().unwrap();
        assert_eq!(s.config_id, 1);
        assert_eq!((s.counts.hn, s.counts.hp, s.counts.gb), (2, 1, 0));
    }

    #[test]
    fn share_triangle_rows_sum_to_one() {
        let a = agg();
        let arch = vec![
            entry(0, [1.0, 0.0, 1.0], vec![0.0; 6]),
            entry(1, [1.0, 1.0, 0.5], vec![1.0, 0.0, 0.0, 0.0, 0.9, 0.0]),
        ];
        let rows = technology_share_triangle(&arch, &a).unwrap();
        assert_eq!(
            (rows[0].shares.gb, rows[0].shares.hp, rows[0].shares.hn),
            (1.0, 0.0, 0.0)
        );
        for r in rows {
            assert!((r.shares.gb + r.shares.hp + r.shares.hn - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn consistency_examples() {
        use Technology::*;
        let m = vec![GB, GB, HP, HN];
        let same = consistency(&[m.clone(), m.clone()]).unwrap();
        for c in &same {
            let share = m.iter().filter(|t| **t == c.technology).count() as f64 / 4.0;
            assert_eq!(c.consistent_fraction, share);
            assert_eq!(c.random_baseline, share * share);
        }
        let other = vec![GB, HN, HP, GB];
        let hn = consistency(&[m, other])
            .unwrap()
            .into_iter()
            .find(|c| c.technology == HN)
            .unwrap();
        assert_eq!(hn.consistent_fraction, 0.0);
        assert!(consistency(&[]).is_err());
    }

    #[test]
    fn random_baseline_matches_monte_carlo() {
        use Technology::*;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let draw = |rng: &mut ChaCha8Rng| {
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    if u < 0.5 {
                        GB
                    } else if u < 0.8 {
                        HP
                    } else {
                        HN
                    }
                })
                .collect::<Vec<_>>()
        };
        let methods = vec![draw(&mut rng), draw(&mut rng), draw(&mut rng)];
        for c in consistency(&methods).unwrap() {
            let p = match c.technology {
                GB => 0.5f64,
                HP => 0.3,
                HN => 0.2,
            }
            .powi(3);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c.consistent_fraction - p).abs() < 3.0 * sigma, "{c:?}");
            assert!((c.random_baseline - p).abs() < 0.01);
        }
    }
}
