//! End-to-end workflow: compress the stock, optimise the compressed model and
//! map selected configurations back onto the buildings.

mod artifacts;
mod config;

pub use artifacts::{
    read_aggregation_csv, write_aggregation_csv, write_features_csv, write_histograms_csv, write_scan_csv,
};
pub use config::{RunConfig, WeatherSource};

use serde::Serialize;

use crate::analysis::{
    consistency, decompress, select_low_invest_under_cost_cap, select_min_shares, technology_share_triangle,
    BuildingAssignment, Consistency, ShareRow, SolutionSelection,
};
use crate::clustering::{
    build_categories, category_seed, group_buildings, grouping_seed, Aggregation, CategoryModel, GroupingMethod,
    GroupingParams, LloydParams,
};
use crate::error::{Error, Result};
use crate::esm::{EnergySystemModel, EsmParams};
use crate::features::{feature_vector, normalize_all, FeatureVector};
use crate::geodata::Dataset;
use crate::optimizer::{evolve, ArchiveEntry, NsgaParams, RunResult};
use crate::solar::{dataset_solar, BuildingSolar, PvSystem, StandardRoofSet, Transposer, WeatherSeries};

/// Dataset with its solar weights and energy features.
pub struct Prepared {
    pub dataset: Dataset,
    pub weather: WeatherSeries,
    pub standard: StandardRoofSet,
    pub solar: Vec<BuildingSolar>,
    pub features: Vec<FeatureVector>,
    pub features_norm: Vec<Vec<f64>>,
    pub positions: Vec<(f64, f64)>,
    pub footprints: Vec<f64>,
}

pub fn prepare(dataset: Dataset, weather: WeatherSeries) -> Result<Prepared> {
    let transposer = Transposer::new(&weather, PvSystem::default());
    let standard = StandardRoofSet::default_for(&transposer)?;
    let solar = dataset_solar(&dataset, &transposer, &standard)?;
    let features = dataset
        .buildings()
        .iter()
        .zip(&solar)
        .map(|(b, s)| feature_vector(b, &s.day_profile(&standard)))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<[f64; 5]> = features.iter().map(FeatureVector::to_array).collect();
    let (features_norm, _) = normalize_all(&raw)?;
    let positions = dataset.positions();
    let footprints = dataset.buildings().iter().map(|b| b.footprint_m2).collect();
    Ok(Prepared {
        dataset,
        weather,
        standard,
        solar,
        features,
        features_norm,
        positions,
        footprints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub k_reps: usize,
    pub k_groups: usize,
    pub seed: u64,
    pub min_cluster_size: usize,
    pub lloyd: LloydParams,
}

impl ClusterParams {
    pub fn new(k_reps: usize, k_groups: usize, seed: u64) -> Self {
        Self {
            k_reps,
            k_groups,
            seed,
            min_cluster_size: 5,
            lloyd: LloydParams::default(),
        }
    }
}

pub fn categorize(prepared: &Prepared, params: &ClusterParams) -> Result<CategoryModel> {
    build_categories(
        &prepared.features_norm,
        &prepared.footprints,
        params.k_reps,
        category_seed(params.seed, params.k_reps),
        params.lloyd,
    )
}

pub fn cluster(
    prepared: &Prepared,
    categories: &CategoryModel,
    method: GroupingMethod,
    params: &ClusterParams,
) -> Result<Aggregation> {
    let grouping = GroupingParams {
        k_groups: params.k_groups,
        seed: grouping_seed(params.seed, method, params.k_reps, params.k_groups),
        min_cluster_size: params.min_cluster_size,
        gamma: None,
        lloyd: params.lloyd,
    };
    group_buildings(
        method,
        &prepared.positions,
        &prepared.features_norm,
        categories,
        &grouping,
    )
}

pub fn energy_model(prepared: &Prepared, aggregation: &Aggregation, params: EsmParams) -> Result<EnergySystemModel> {
    EnergySystemModel::from_dataset(
        &prepared.dataset,
        aggregation,
        &prepared.solar,
        &prepared.standard,
        &prepared.weather,
        params,
    )
}

pub fn optimize(model: &EnergySystemModel, params: &NsgaParams) -> Result<RunResult> {
    evolve(
        |g| Ok(model.kpis(g)?.to_array().to_vec()),
        model.genome_len(),
        params,
        None,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Filter {
    CostCap,
    MinShare,
}

impl Filter {
    pub const ALL: [Filter; 2] = [Filter::CostCap, Filter::MinShare];

    pub fn as_str(&self) -> &'static str {
        match self {
            Filter::CostCap => "cost_cap",
            Filter::MinShare => "min_share",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub cost_cap_eur_per_pers: f64,
    pub min_share: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            cost_cap_eur_per_pers: 500.0,
            min_share: 0.33,
        }
    }
}

/// Selections and decompressed maps of one method's archive.
#[derive(Debug, Clone)]
pub struct MethodAnalysis {
    pub method: GroupingMethod,
    pub selections: Vec<(Filter, Option<SolutionSelection>)>,
    pub assignments: Vec<(Filter, Vec<BuildingAssignment>)>,
    pub shares: Vec<ShareRow>,
}

impl MethodAnalysis {
    pub fn selection(&self, filter: Filter) -> Option<&SolutionSelection> {
        self.selections
            .iter()
            .find(|(f, _)| *f == filter)
            .and_then(|(_, s)| s.as_ref())
    }

    pub fn assignment(&self, filter: Filter) -> Option<&[BuildingAssignment]> {
        self.assignments
            .iter()
            .find(|(f, _)| *f == filter)
            .map(|(_, a)| a.as_slice())
    }
}

pub fn analyze_method(
    method: GroupingMethod,
    archive: &[ArchiveEntry],
    aggregation: &Aggregation,
    filters: &FilterParams,
) -> Result<MethodAnalysis> {
    let mut selections = Vec::new();
    let mut assignments = Vec::new();
    for f in Filter::ALL {
        let sel = match f {
            Filter::CostCap => select_low_invest_under_cost_cap(archive, aggregation, filters.cost_cap_eur_per_pers)?,
            Filter::MinShare => select_min_shares(archive, aggregation, filters.min_share)?,
        };
        if let Some(s) = &sel {
            assignments.push((f, decompress(&s.genome, aggregation)?));
        }
        selections.push((f, sel));
    }
    Ok(MethodAnalysis {
        method,
        selections,
        assignments,
        shares: technology_share_triangle(archive, aggregation)?,
    })
}

/// Cross-method consistency per filter; filters some method left empty are skipped.
pub fn cross_method_consistency(analyses: &[MethodAnalysis]) -> Result<Vec<(Filter, Vec<Consistency>)>> {
    let mut out = Vec::new();
    for f in Filter::ALL {
        let maps: Option<Vec<Vec<_>>> = analyses
            .iter()
            .map(|a| a.assignment(f).map(|v| v.iter().map(|b| b.technology).collect()))
            .collect();
        if let Some(maps) = maps.filter(|m| !m.is_empty()) {
            out.push((f, consistency(&maps)?));
        }
    }
    Ok(out)
}

/// Result of compressing, optimising and analysing one grouping method.
pub struct MethodRun {
    pub method: GroupingMethod,
    pub aggregation: Aggregation,
    pub result: RunResult,
    pub analysis: MethodAnalysis,
}

/// The whole workflow for several methods sharing one category model.
pub fn run_methods(
    prepared: &Prepared,
    methods: &[GroupingMethod],
    cluster_params: &ClusterParams,
    esm: EsmParams,
    nsga: &NsgaParams,
    filters: &FilterParams,
) -> Result<Vec<MethodRun>> {
    if methods.is_empty() {
        return Err(Error::Argument("at least one grouping method required".into()));
    }
    let categories = categorize(prepared, cluster_params)?;
    methods
        .iter()
        .map(|&method| {
            let aggregation = cluster(prepared, &categories, method, cluster_params)?;
            let model = energy_model(prepared, &aggregation, esm)?;
            let result = optimize(&model, nsga)?;
            let analysis = analyze_method(method, result.archive.entries(), &aggregation, filters)?;
            log::info!(
                "{method}: {} variables, archive of {} configurations",
                aggregation.variables(),
                result.archive.len()
            );
            Ok(MethodRun {
                method,
                aggregation,
                result,
                analysis,
            })
        })
        .collect()
}
