use std::fs;
use std::path::{Path, PathBuf};

use heatagg_core::analysis::{
    read_archive_csv, write_archive_csv, write_assignment_geojson, write_consistency_csv, write_kpi_csv,
    write_shares_csv, ConsistencyRecord,
};
use heatagg_core::clustering::{scan, GroupingMethod};
use heatagg_core::esm::Technology;
use heatagg_core::geodata::{generate_synthetic, load_dataset, write_csv, DataFormat, Dataset};
use heatagg_core::network::{group_cohesion, shortest_single_combo_grid};
use heatagg_core::pipeline::{
    analyze_method, categorize, cluster, cross_method_consistency, energy_model, optimize, prepare,
    read_aggregation_csv, write_aggregation_csv, write_features_csv, write_histograms_csv, write_scan_csv, Filter,
    Prepared, RunConfig, WeatherSource,
};
use heatagg_core::solar::WeatherSeries;
use heatagg_core::{Error, Result};

use crate::manifest::Manifest;
use crate::Command;

pub fn run(name: &str, command: &Command, config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out)?;
    let mut manifest = Manifest::default();
    let outcome = match command {
        Command::Synth { .. } => synth(config, &mut manifest),
        Command::Features => features(config, &mut manifest),
        Command::Cluster => cluster_cmd(config, &mut manifest),
        Command::Scan => scan_cmd(config, &mut manifest),
        Command::Optimize => optimize_cmd(config, &mut manifest),
        Command::Analyze => analyze(config, &mut manifest),
    };
    // An empty filter still leaves complete artifacts behind, so the manifest
    // is written before the error is reported.
    if matches!(&outcome, Ok(()) | Err(Error::EmptyResult(_))) {
        let path = manifest.write(name, config)?;
        log::info!("wrote {}", path.display());
    }
    outcome
}

fn method_dir(config: &RunConfig, method: GroupingMethod) -> Result<PathBuf> {
    let dir = config.out.join(method.as_str());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn synthetic_weather(config: &RunConfig) -> Result<WeatherSeries> {
    match config.weather_source {
        WeatherSource::ClearSky => WeatherSeries::clear_sky(config.site, config.year),
        WeatherSource::Cloudy => WeatherSeries::cloudy(config.site, config.year, config.seed),
    }
}

fn load_buildings(config: &RunConfig, manifest: &mut Manifest) -> Result<Dataset> {
    let path = config
        .dataset
        .clone()
        .unwrap_or_else(|| config.out.join("buildings.csv"));
    if !path.exists() {
        return Err(Error::Validation(format!(
            "dataset {} not found; run `heatagg synth` or set `dataset`",
            path.display()
        )));
    }
    let is_json = matches!(path.extension().and_then(|e| e.to_str()), Some("geojson" | "json"));
    let format = if is_json { DataFormat::GeoJson } else { DataFormat::Csv };
    manifest.input(&path);
    let roofs = path.with_file_name("roofs.csv");
    if format == DataFormat::Csv && roofs.exists() {
        manifest.input(&roofs);
    }
    load_dataset(&path, format)
}

fn load_weather(config: &RunConfig, manifest: &mut Manifest) -> Result<WeatherSeries> {
    let path = match &config.weather {
        Some(p) => Some(p.clone()),
        None => Some(config.out.join("weather.csv")).filter(|p| p.exists()),
    };
    match path {
        Some(p) => {
            manifest.input(&p);
            WeatherSeries::read_csv(&p, config.site)
        }
        None => synthetic_weather(config),
    }
}

fn load_prepared(config: &RunConfig, manifest: &mut Manifest) -> Result<Prepared> {
    let dataset = load_buildings(config, manifest)?;
    let weather = load_weather(config, manifest)?;
    prepare(dataset, weather)
}

fn read_aggregation(
    config: &RunConfig,
    dataset: &Dataset,
    method: GroupingMethod,
    manifest: &mut Manifest,
) -> Result<heatagg_core::clustering::Aggregation> {
    let path = config.out.join(method.as_str()).join("aggregation.csv");
    if !path.exists() {
        return Err(Error::Validation(format!(
            "{} not found; run `heatagg cluster` first",
            path.display()
        )));
    }
    manifest.input(&path);
    read_aggregation_csv(&path, dataset, method)
}

fn synth(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let dataset = generate_synthetic(config.seed, config.n_buildings, config.layout)?;
    let buildings = config.out.join("buildings.csv");
    let roofs = config.out.join("roofs.csv");
    write_csv(&dataset, &buildings, &roofs)?;
    let weather = config.out.join("weather.csv");
    synthetic_weather(config)?.write_csv(&weather)?;
    for p in [&buildings, &roofs, &weather] {
        manifest.output(p);
    }
    log::info!("{} buildings ({})", dataset.len(), config.layout.as_str());
    Ok(())
}

fn features(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let prepared = load_prepared(config, manifest)?;
    let features = config.out.join("features.csv");
    let histograms = config.out.join("histograms.csv");
    write_features_csv(&prepared.dataset, &prepared.features, &features)?;
    write_histograms_csv(&prepared.features, config.histogram_bins, &histograms)?;
    manifest.output(&features);
    manifest.output(&histograms);
    Ok(())
}

fn cluster_cmd(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let prepared = load_prepared(config, manifest)?;
    let params = config.cluster_params();
    let categories = categorize(&prepared, &params)?;
    let summary = config.out.join("clusters.csv");
    let mut w = csv::Writer::from_path(&summary).map_err(Error::from)?;
    w.write_record([
        "method",
        "k_reps",
        "k_groups",
        "variables",
        "avg_line_length_m",
        "shortest_grid_m",
    ])
    .map_err(Error::from)?;
    for &method in &config.methods {
        let agg = cluster(&prepared, &categories, method, &params)?;
        let path = method_dir(config, method)?.join("aggregation.csv");
        write_aggregation_csv(&prepared.dataset, &agg, &path)?;
        manifest.output(&path);
        let cohesion = group_cohesion(&agg, &prepared.positions, config.cohesion);
        let shortest = shortest_single_combo_grid(&agg, &prepared.positions);
        log::info!("{method}: {} variables, {cohesion:.1} m per building", agg.variables());
        w.write_record([
            method.as_str().to_string(),
            params.k_reps.to_string(),
            params.k_groups.to_string(),
            agg.variables().to_string(),
            cohesion.to_string(),
            shortest.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(Error::from)?;
    }
    w.flush()?;
    manifest.output(&summary);
    Ok(())
}

fn scan_cmd(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let prepared = load_prepared(config, manifest)?;
    let rows = scan(
        &prepared.positions,
        &prepared.features_norm,
        &prepared.footprints,
        &config.scan_config(),
    )?;
    let path = config.out.join("scan.csv");
    write_scan_csv(&rows, &path)?;
    manifest.output(&path);
    Ok(())
}

fn optimize_cmd(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let prepared = load_prepared(config, manifest)?;
    let nsga = config.nsga_params();
    for &method in &config.methods {
        let agg = read_aggregation(config, &prepared.dataset, method, manifest)?;
        let model = energy_model(&prepared, &agg, config.esm)?;
        let result = optimize(&model, &nsga)?;
        log::info!(
            "{method}: {} evaluations, archive of {}",
            result.evaluations,
            result.archive.len()
        );
        let dir = method_dir(config, method)?;
        let archive = dir.join("archive.csv");
        let kpi = dir.join("kpi.csv");
        write_archive_csv(result.archive.entries(), &archive)?;
        write_kpi_csv(result.archive.entries(), &kpi)?;
        manifest.output(&archive);
        manifest.output(&kpi);
    }
    Ok(())
}

fn write_selections(
    path: &Path,
    rows: &[(
        GroupingMethod,
        Filter,
        Option<&heatagg_core::analysis::SolutionSelection>,
    )],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method",
        "filter",
        "config_id",
        "n_gb",
        "n_hp",
        "n_hn",
        "energy_costs_2025_eur_per_pers",
        "invest_eur_per_pers_a",
        "emissions_t_per_pers",
    ])?;
    for (method, filter, sel) in rows {
        let mut row = vec![method.as_str().to_string(), filter.as_str().to_string()];
        match sel {
            Some(s) => {
                row.push(s.config_id.to_string());
                row.extend([Technology::GB, Technology::HP, Technology::HN].map(|t| s.counts.get(t).to_string()));
                row.extend(s.kpi.to_array().map(|v| v.to_string()));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 7)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn analyze(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let dataset = load_buildings(config, manifest)?;
    let filters = config.filter_params();
    let mut analyses = Vec::new();
    for &method in &config.methods {
        let agg = read_aggregation(config, &dataset, method, manifest)?;
        let dir = method_dir(config, method)?;
        let archive_path = dir.join("archive.csv");
        if !archive_path.exists() {
            return Err(Error::Validation(format!(
                "{} not found; run `heatagg optimize` first",
                archive_path.display()
            )));
        }
        manifest.input(&archive_path);
        let archive = read_archive_csv(&archive_path)?;
        let analysis = analyze_method(method, &archive, &agg, &filters)?;

        let shares = dir.join("shares.csv");
        write_shares_csv(&analysis.shares, &shares)?;
        manifest.output(&shares);
        for (filter, assignment) in &analysis.assignments {
            let sel_dir = dir.join(format!("selection_{}", filter.as_str()));
            fs::create_dir_all(&sel_dir)?;
            let path = sel_dir.join("assignment.geojson");
            write_assignment_geojson(&dataset, assignment, &path)?;
            manifest.output(&path);
        }
        analyses.push(analysis);
    }

    let rows: Vec<_> = analyses
        .iter()
        .flat_map(|a| Filter::ALL.map(|f| (a.method, f, a.selection(f))))
        .collect();
    let selections = config.out.join("selections.csv");
    write_selections(&selections, &rows)?;
    manifest.output(&selections);

    let methods = config.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join("+");
    let records: Vec<ConsistencyRecord> = cross_method_consistency(&analyses)?
        .into_iter()
        .flat_map(|(f, cs)| {
            let methods = methods.clone();
            cs.into_iter().map(move |c| ConsistencyRecord {
                filter: f.as_str().to_string(),
                methods: methods.clone(),
                consistency: c,
            })
        })
        .collect();
    let consistency = config.out.join("consistency.csv");
    write_consistency_csv(&records, &consistency)?;
    manifest.output(&consistency);

    let empty: Vec<&str> = Filter::ALL
        .into_iter()
        .filter(|&f| analyses.iter().all(|a| a.selection(f).is_none()))
        .map(|f| f.as_str())
        .collect();
    if !empty.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no method has a configuration passing {}",
            empty.join(", ")
        )));
    }
    for (method, filter, sel) in &rows {
        if sel.is_none() {
            log::warn!("{method}: no configuration passes {}", filter.as_str());
        }
    }
    Ok(())
}
