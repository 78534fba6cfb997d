//! Two-step building aggregation.
//!
//! Step 1 forms building categories (representative buildings) by k-means on
//! the normalised energy features. Step 2 forms geographical groups with one
//! of several methods; each building then belongs to exactly one
//! `(category, group)` combo and the optimisation carries one set of decision
//! variables per non-empty combo.

mod hdbscan;
mod lloyd;

pub use hdbscan::{hdbscan, NOISE};
pub use lloyd::{LloydParams, Partition};

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::normalize_all;
use crate::network::{group_cohesion, CohesionMode};
use crate::seed::derive_seed;
use lloyd::{fit, MixedData};

pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, params: LloydParams) -> Result<Partition> {
    fit(
        &MixedData {
            numeric: points,
            categorical: &[],
            gamma: 0.0,
        },
        k,
        seed,
        params,
    )
}

/// Matching dissimilarity, modes by per-attribute majority.
pub fn kmodes(categories: &[Vec<u32>], k: usize, seed: u64, params: LloydParams) -> Result<Partition> {
    fit(
        &MixedData {
            numeric: &[],
            categorical: categories,
            gamma: 1.0,
        },
        k,
        seed,
        params,
    )
}

/// Squared Euclidean on the numeric part plus `gamma` times the categorical
/// matching dissimilarity.
pub fn kprototypes(
    numeric: &[Vec<f64>],
    categorical: &[Vec<u32>],
    k: usize,
    gamma: f64,
    seed: u64,
    params: LloydParams,
) -> Result<Partition> {
    if numeric.len() != categorical.len() {
        return Err(Error::Argument(
            "numeric and categorical parts must describe the same points".into(),
        ));
    }
    fit(
        &MixedData {
            numeric,
            categorical,
            gamma,
        },
        k,
        seed,
        params,
    )
}

/// Half the mean standard deviation of the numeric attributes.
pub fn default_gamma(numeric: &[Vec<f64>]) -> f64 {
    let n = numeric.len();
    let d = numeric.first().map_or(0, Vec::len);
    if n == 0 || d == 0 {
        return 0.0;
    }
    let mut sd_sum = 0.0;
    for j in 0..d {
        let mean = numeric.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = numeric.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
        sd_sum += var.sqrt();
    }
    0.5 * sd_sum / d as f64
}

/// Building categories from step 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryModel {
    pub k: usize,
    pub labels: Vec<usize>,
    /// Plain mean of normalised features per category (the k-means centres).
    pub centers: Vec<Vec<f64>>,
    /// Footprint-weighted mean of normalised features per category.
    pub weighted_centers: Vec<Vec<f64>>,
    pub inertia: f64,
}

impl CategoryModel {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

/// k-means on the normalised energy features. `k_reps` is capped at the number
/// of buildings.
pub fn build_categories(
    features: &[Vec<f64>],
    footprints: &[f64],
    k_reps: usize,
    seed: u64,
    params: LloydParams,
) -> Result<CategoryModel> {
    if features.len() != footprints.len() {
        return Err(Error::Argument("one footprint per feature vector required".into()));
    }
    let k = k_reps.min(features.len());
    let part = kmeans(features, k, seed, params)?;
    let d = features.first().map_or(0, Vec::len);
    let mut wsum = vec![vec![0.0; d]; k];
    let mut asum = vec![0.0; k];
    for ((f, a), &l) in features.iter().zip(footprints).zip(&part.labels) {
        asum[l] += a;
        for (s, x) in wsum[l].iter_mut().zip(f) {
            *s += a * x;
        }
    }
    let weighted_centers = wsum
        .into_iter()
        .zip(&asum)
        .map(|(s, a)| s.into_iter().map(|x| x / a).collect())
        .collect();
    Ok(CategoryModel {
        k,
        labels: part.labels,
        centers: part.centers,
        weighted_centers,
        inertia: part.cost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingMethod {
    /// k-means on location only.
    KMeansGeo,
    /// k-means on location and the five energy features.
    KMeansEnergy,
    /// k-prototypes on location plus the category.
    KPrototypes,
    /// k-prototypes on location plus category and per-category HDBSCAN label.
    KPrototypesHdbscan,
    /// k-modes on category and per-category HDBSCAN label only.
    KModes,
}

impl GroupingMethod {
    pub const ALL: [GroupingMethod; 5] = [
        GroupingMethod::KMeansGeo,
        GroupingMethod::KMeansEnergy,
        GroupingMethod::KPrototypes,
        GroupingMethod::KPrototypesHdbscan,
        GroupingMethod::KModes,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GroupingMethod::KMeansGeo => "kmeans_geo",
            GroupingMethod::KMeansEnergy => "kmeans_energy",
            GroupingMethod::KPrototypes => "kprototypes",
            GroupingMethod::KPrototypesHdbscan => "kprototypes_hdbscan",
            GroupingMethod::KModes => "kmodes",
        }
    }

    fn ordinal(&self) -> u64 {
        Self::ALL.iter().position(|m| m == self).unwrap() as u64
    }
}

impl std::fmt::Display for GroupingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GroupingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown grouping method `{s}`")))
    }
}

/// A `(category, group)` pair.
pub type Combo = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub category: usize,
    pub group: usize,
}

impl Assignment {
    pub fn combo(&self) -> Combo {
        (self.category, self.group)
    }
}

/// Every building's category and group plus the occupancy counts `N_{b,g}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    method: GroupingMethod,
    assignments: Vec<Assignment>,
    counts: BTreeMap<Combo, usize>,
    combos: Vec<Combo>,
}

impl Aggregation {
    pub fn from_assignments(method: GroupingMethod, assignments: Vec<Assignment>) -> Self {
        let mut counts = BTreeMap::new();
        for a in &assignments {
            *counts.entry(a.combo()).or_insert(0) += 1;
        }
        let combos = counts.keys().copied().collect();
        Self {
            method,
            assignments,
            counts,
            combos,
        }
    }

    pub fn method(&self) -> GroupingMethod {
        self.method
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    /// Non-empty combos in ascending `(category, group)` order; this order
    /// defines the genome layout.
    pub fn combos(&self) -> &[Combo] {
        &self.combos
    }

    pub fn count(&self, combo: Combo) -> usize {
        self.counts.get(&combo).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<Combo, usize> {
        &self.counts
    }

    /// Number of decision combos, i.e. optimisation variables per technology.
    pub fn variables(&self) -> usize {
        self.combos.len()
    }

    pub fn n_buildings(&self) -> usize {
        self.assignments.len()
    }

    pub fn combo_index(&self) -> HashMap<Combo, usize> {
        self.combos.iter().enumerate().map(|(i, c)| (*c, i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupingParams {
    pub k_groups: usize,
    pub seed: u64,
    pub min_cluster_size: usize,
    /// k-prototypes categorical weight; `None` uses [`default_gamma`].
    pub gamma: Option<f64>,
    pub lloyd: LloydParams,
}

impl GroupingParams {
    pub fn new(k_groups: usize, seed: u64) -> Self {
        Self {
            k_groups,
            seed,
            min_cluster_size: 5,
            gamma: None,
            lloyd: LloydParams::default(),
        }
    }
}

/// Per-category HDBSCAN labels encoded as categorical codes that are unique
/// across categories; noise shares one code per category.
fn area_codes(positions: &[Vec<f64>], categories: &CategoryModel, min_cluster_size: usize) -> Result<Vec<u32>> {
    let mut codes = vec![0u32; positions.len()];
    let mut dict: BTreeMap<(usize, i32), u32> = BTreeMap::new();
    for c in 0..categories.k {
        let members: Vec<usize> = (0..positions.len()).filter(|&i| categories.labels[i] == c).collect();
        let pts: Vec<(f64, f64)> = members.iter().map(|&i| (positions[i][0], positions[i][1])).collect();
        let labels = hdbscan(&pts, min_cluster_size)?;
        for (&i, l) in members.iter().zip(labels) {
            let next = dict.len() as u32;
            codes[i] = *dict.entry((c, l)).or_insert(next);
        }
    }
    Ok(codes)
}

/// Step 2: geographical grouping. `features` are the normalised energy
/// features; positions are min-max normalised internally. `k_groups` is capped
/// at the number of buildings.
pub fn group_buildings(
    method: GroupingMethod,
    positions: &[(f64, f64)],
    features: &[Vec<f64>],
    categories: &CategoryModel,
    params: &GroupingParams,
) -> Result<Aggregation> {
    let n = positions.len();
    if features.len() != n || categories.labels.len() != n {
        return Err(Error::Argument(
            "positions, features and categories differ in length".into(),
        ));
    }
    if params.k_groups == 0 {
        return Err(Error::Argument("k_groups must be at least 1".into()));
    }
    let k = params.k_groups.min(n);
    let raw: Vec<Vec<f64>> = positions.iter().map(|p| vec![p.0, p.1]).collect();
    let (xy, _) = normalize_all(&raw)?;
    let cat = |i: usize| categories.labels[i] as u32;

    let groups = match method {
        GroupingMethod::KMeansGeo => kmeans(&xy, k, params.seed, params.lloyd)?.labels,
        GroupingMethod::KMeansEnergy => {
            let joint: Vec<Vec<f64>> = xy
                .iter()
                .zip(features)
                .map(|(p, f)| p.iter().chain(f).copied().collect())
                .collect();
            kmeans(&joint, k, params.seed, params.lloyd)?.labels
        }
        GroupingMethod::KPrototypes => {
            let cats: Vec<Vec<u32>> = (0..n).map(|i| vec![cat(i)]).collect();
            let gamma = params.gamma.unwrap_or_else(|| fallback_gamma(&xy));
            kprototypes(&xy, &cats, k, gamma, params.seed, params.lloyd)?.labels
        }
        GroupingMethod::KPrototypesHdbscan => {
            let areas = area_codes(&xy, categories, params.min_cluster_size)?;
            let cats: Vec<Vec<u32>> = (0..n).map(|i| vec![cat(i), areas[i]]).collect();
            let gamma = params.gamma.unwrap_or_else(|| fallback_gamma(&xy));
            kprototypes(&xy, &cats, k, gamma, params.seed, params.lloyd)?.labels
        }
        GroupingMethod::KModes => {
            let areas = area_codes(&xy, categories, params.min_cluster_size)?;
            let cats: Vec<Vec<u32>> = (0..n).map(|i| vec![cat(i), areas[i]]).collect();
            kmodes(&cats, k, params.seed, params.lloyd)?.labels
        }
    };

    Ok(Aggregation::from_assignments(
        method,
        categories
            .labels
            .iter()
            .zip(groups)
            .map(|(&category, group)| Assignment { category, group })
            .collect(),
    ))
}

fn fallback_gamma(numeric: &[Vec<f64>]) -> f64 {
    let g = default_gamma(numeric);
    if g > 0.0 {
        g
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub method: GroupingMethod,
    pub k_reps: usize,
    pub k_groups: usize,
    pub variables: usize,
    pub avg_line_length_m: f64,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub methods: Vec<GroupingMethod>,
    pub reps: RangeInclusive<usize>,
    pub groups: RangeInclusive<usize>,
    pub seed: u64,
    pub min_cluster_size: usize,
    pub cohesion: CohesionMode,
    pub lloyd: LloydParams,
}

/// Seed for the category model at a given `k_reps`, shared by all methods.
pub fn category_seed(seed: u64, k_reps: usize) -> u64 {
    derive_seed(seed, &[0xCA7, k_reps as u64])
}

/// Seed for one grouping job.
pub fn grouping_seed(seed: u64, method: GroupingMethod, k_reps: usize, k_groups: usize) -> u64 {
    derive_seed(seed, &[method.ordinal(), k_reps as u64, k_groups as u64])
}

/// Variables and cohesion over a grid of `(k_reps, k_groups)`; grid points run
/// in parallel with order-independent seeds.
pub fn scan(
    positions: &[(f64, f64)],
    features: &[Vec<f64>],
    footprints: &[f64],
    config: &ScanConfig,
) -> Result<Vec<ScanRow>> {
    let reps: Vec<usize> = config.reps.clone().collect();
    let models: Vec<CategoryModel> = reps
        .par_iter()
        .map(|&k| build_categories(features, footprints, k, category_seed(config.seed, k), config.lloyd))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (mi, &k_reps) in reps.iter().enumerate() {
        for &method in &config.methods {
            for k_groups in config.groups.clone() {
                jobs.push((mi, k_reps, method, k_groups));
            }
        }
    }
    jobs.par_iter()
        .map(|&(mi, k_reps, method, k_groups)| {
            let params = GroupingParams {
                k_groups,
                seed: grouping_seed(config.seed, method, k_reps, k_groups),
                min_cluster_size: config.min_cluster_size,
                gamma: None,
                lloyd: config.lloyd,
            };
            let agg = group_buildings(method, positions, features, &models[mi], &params)?;
            Ok(ScanRow {
                method,
                k_reps,
                k_groups,
                variables: agg.variables(),
                avg_line_length_m: group_cohesion(&agg, positions, config.cohesion),
            })
        })
        .collect()
}
