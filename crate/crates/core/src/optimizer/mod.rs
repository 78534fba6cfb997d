//! NSGA-II over box-bounded genomes in `[0, 1]` with an unbounded external
//! archive of every non-dominated evaluated point.

mod hypervolume;
mod sorting;

pub use hypervolume::{hypervolume, hypervolume_2d, hypervolume_3d};
pub use sorting::{crowding_distance, dominates, fronts, non_dominated_sort};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    /// Evaluation counter of the run that produced the point.
    pub config_id: usize,
    pub genome: Vec<f64>,
    pub objectives: Vec<f64>,
}

/// Mutually non-dominated points; a point whose objectives equal an archived
/// one is dropped, so the first occurrence is kept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<ArchiveEntry>) -> Self {
        let mut a = Self::new();
        for e in entries {
            a.insert(e);
        }
        a
    }

    /// Returns whether the point was added.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        let obj = &entry.objectives;
        if self
            .entries
            .iter()
            .any(|e| e.objectives == *obj || dominates(&e.objectives, obj))
        {
            return false;
        }
        self.entries.retain(|e| !dominates(obj, &e.objectives));
        self.entries.push(entry);
        true
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hypervolume(&self, reference: &[f64]) -> Result<f64> {
        let pts: Vec<&[f64]> = self.entries.iter().map(|e| e.objectives.as_slice()).collect();
        hypervolume(&pts, reference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsgaParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub seed: u64,
    /// Replace one random initial genome by the all-zero genome.
    pub seed_known_solutions: bool,
    pub log_every: usize,
}

impl Default for NsgaParams {
    fn default() -> Self {
        Self {
            population_size: 16,
            generations: 2000,
            crossover_prob: 0.9,
            eta_c: 15.0,
            eta_m: 20.0,
            seed: 0,
            seed_known_solutions: true,
            log_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub archive: Archive,
    pub evaluations: usize,
    /// Archive hypervolume after initialisation and after every generation,
    /// when a reference point was given.
    pub hypervolume_trace: Vec<f64>,
}

fn sbx(p1: &[f64], p2: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    let exp = 1.0 / (eta + 1.0);
    let spread = |u: f64, beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(exp)
        } else {
            (1.0 / (2.0 - u * alpha)).powf(exp)
        }
    };
    for i in 0..p1.len() {
        if rng.random::<f64>() > 0.5 {
            continue;
        }
        let u = rng.random::<f64>();
        let swap = rng.random::<f64>() <= 0.5;
        let (y1, y2) = (p1[i].min(p2[i]), p1[i].max(p2[i]));
        if y2 - y1 <= 1e-14 {
            continue;
        }
        let bq1 = spread(u, 1.0 + 2.0 * y1 / (y2 - y1));
        let bq2 = spread(u, 1.0 + 2.0 * (1.0 - y2) / (y2 - y1));
        let a = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(0.0, 1.0);
        let b = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(0.0, 1.0);
        if swap {
            (c1[i], c2[i]) = (b, a);
        } else {
            (c1[i], c2[i]) = (a, b);
        }
    }
    (c1, c2)
}

fn polynomial_mutation(genome: &mut [f64], eta: f64, rng: &mut ChaCha8Rng) {
    let rate = 1.0 / genome.len() as f64;
    let exp = 1.0 / (eta + 1.0);
    for y in genome.iter_mut() {
        if rng.random::<f64>() > rate {
            continue;
        }
        let r = rng.random::<f64>();
        let dq = if r < 0.5 {
            let xy = 1.0 - *y;
            (2.0 * r + (1.0 - 2.0 * r) * xy.powf(eta + 1.0)).powf(exp) - 1.0
        } else {
            let xy = *y;
            1.0 - (2.0 * (1.0 - r) + 2.0 * (r - 0.5) * xy.powf(eta + 1.0)).powf(exp)
        };
        *y = (*y + dq).clamp(0.0, 1.0);
    }
}

struct Population {
    genomes: Vec<Vec<f64>>,
    objectives: Vec<Vec<f64>>,
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

impl Population {
    fn better(&self, a: usize, b: usize) -> usize {
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal if self.crowding[b] > self.crowding[a] => b,
            std::cmp::Ordering::Equal => a,
        }
    }
}

fn rank_and_crowd(objectives: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let rank = non_dominated_sort(objectives);
    let mut crowding = vec![0.0; objectives.len()];
    for front in fronts(&rank) {
        let pts: Vec<&[f64]> = front.iter().map(|&i| objectives[i].as_slice()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            crowding[i] = d;
        }
    }
    (rank, crowding)
}

/// Elitist survival: whole fronts first, the last one by crowding distance.
fn survive(genomes: Vec<Vec<f64>>, objectives: Vec<Vec<f64>>, size: usize) -> Population {
    let rank = non_dominated_sort(&objectives);
    let mut chosen = Vec::with_capacity(size);
    for front in fronts(&rank) {
        if chosen.len() + front.len() <= size {
            chosen.extend(front);
        } else {
            let pts: Vec<&[f64]> = front.iter().map(|&i| objectives[i].as_slice()).collect();
            let cd = crowding_distance(&pts);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]));
            chosen.extend(order.into_iter().take(size - chosen.len()).map(|k| front[k]));
        }
        if chosen.len() == size {
            break;
        }
    }
    chosen.sort_unstable();
    let genomes: Vec<Vec<f64>> = chosen.iter().map(|&i| genomes[i].clone()).collect();
    let objectives: Vec<Vec<f64>> = chosen.iter().map(|&i| objectives[i].clone()).collect();
    let (rank, crowding) = rank_and_crowd(&objectives);
    Population {
        genomes,
        objectives,
        rank,
        crowding,
    }
}

fn evaluate_all<F>(evaluate: &F, genomes: &[Vec<f64>], n_obj: Option<usize>) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let objs: Vec<Vec<f64>> = genomes.par_iter().map(|g| evaluate(g)).collect::<Result<_>>()?;
    let m = n_obj.unwrap_or_else(|| objs.first().map_or(0, Vec::len));
    if m == 0 || objs.iter().any(|o| o.len() != m) {
        return Err(Error::Argument(
            "evaluator must return a fixed, non-zero number of objectives".into(),
        ));
    }
    if objs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("evaluator returned a non-finite objective".into()));
    }
    Ok(objs)
}

/// Runs NSGA-II and returns the archive of all non-dominated evaluated points.
/// Evaluations run in parallel; random numbers are drawn on the sequential
/// path only, so results do not depend on scheduling.
pub fn evolve<F>(evaluate: F, genome_len: usize, params: &NsgaParams, hv_reference: Option<&[f64]>) -> Result<RunResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if genome_len == 0 {
        return Err(Error::Argument(
            "genome must have at least one gene (zero combos)".into(),
        ));
    }
    let size = params.population_size;
    if size < 4 || !size.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "population size must be even and at least 4, got {size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut genomes: Vec<Vec<f64>> = (0..size)
        .map(|_| (0..genome_len).map(|_| rng.random::<f64>()).collect())
        .collect();
    if params.seed_known_solutions {
        let i = rng.random_range(0..size);
        genomes[i] = vec![0.0; genome_len];
    }

    let mut archive = Archive::new();
    let mut next_id = 0;
    let mut record = |archive: &mut Archive, genomes: &[Vec<f64>], objs: &[Vec<f64>]| {
        for (g, o) in genomes.iter().zip(objs) {
            archive.insert(ArchiveEntry {
                config_id: next_id,
                genome: g.clone(),
                objectives: o.clone(),
            });
            next_id += 1;
        }
    };

    let objectives = evaluate_all(&evaluate, &genomes, None)?;
    let n_obj = objectives[0].len();
    record(&mut archive, &genomes, &objectives);
    let mut trace = Vec::new();
    if let Some(r) = hv_reference {
        trace.push(archive.hypervolume(r)?);
    }
    let (rank, crowding) = rank_and_crowd(&objectives);
    let mut pop = Population {
        genomes,
        objectives,
        rank,
        crowding,
    };

    for gen in 1..=params.generations {
        let mut offspring = Vec::with_capacity(size);
        while offspring.len() < size {
            let pick = |rng: &mut ChaCha8Rng| {
                let a = rng.random_range(0..size);
                let b = rng.random_range(0..size);
                pop.better(a, b)
            };
            let p1 = pick(&mut rng);
            let p2 = pick(&mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < params.crossover_prob {
                sbx(&pop.genomes[p1], &pop.genomes[p2], params.eta_c, &mut rng)
            } else {
                (pop.genomes[p1].clone(), pop.genomes[p2].clone())
            };
            polynomial_mutation(&mut c1, params.eta_m, &mut rng);
            polynomial_mutation(&mut c2, params.eta_m, &mut rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        let off_obj = evaluate_all(&evaluate, &offspring, Some(n_obj))?;
        record(&mut archive, &offspring, &off_obj);
        if let Some(r) = hv_reference {
            trace.push(archive.hypervolume(r)?);
        }

        let mut all_g = std::mem::take(&mut pop.genomes);
        let mut all_o = std::mem::take(&mut pop.objectives);
        all_g.extend(offspring);
        all_o.extend(off_obj);
        pop = survive(all_g, all_o, size);

        if params.log_every > 0 && gen % params.log_every == 0 {
            log::info!("generation {gen}: archive holds {} points", archive.len());
        }
    }

    Ok(RunResult {
        archive,
        evaluations: next_id,
        hypervolume_trace: trace,
    })
}
