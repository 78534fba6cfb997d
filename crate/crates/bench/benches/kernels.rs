use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use heatagg_core::clustering::{hdbscan, kmeans, GroupingMethod, LloydParams};
use heatagg_core::esm::EsmParams;
use heatagg_core::geodata::{generate_synthetic, Layout};
use heatagg_core::network::mst_length;
use heatagg_core::optimizer::non_dominated_sort;
use heatagg_core::pipeline::{categorize, cluster, energy_model, prepare, ClusterParams};
use heatagg_core::seed::splitmix64;
use heatagg_core::solar::{Site, WeatherSeries};

fn uniform(state: &mut u64) -> f64 {
    *state = splitmix64(*state);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn positions(n: usize) -> Vec<(f64, f64)> {
    generate_synthetic(1, n, Layout::TwoDistricts).unwrap().positions()
}

fn bench_mst(c: &mut Criterion) {
    let mut group = c.benchmark_group("mst");
    for n in [100, 430, 859] {
        let pts = positions(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| mst_length(black_box(pts)))
        });
    }
    group.finish();
}

fn bench_clustering(c: &mut Criterion) {
    let pts = positions(859);
    let xy: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
    c.bench_function("kmeans_859x2_k10", |b| {
        b.iter(|| kmeans(black_box(&xy), 10, 1, LloydParams::default()).unwrap())
    });
    c.bench_function("hdbscan_859", |b| b.iter(|| hdbscan(black_box(&pts), 5).unwrap()));
}

fn bench_evaluate(c: &mut Criterion) {
    let dataset = generate_synthetic(1, 859, Layout::TwoDistricts).unwrap();
    let weather = WeatherSeries::clear_sky(Site::default(), 2015).unwrap();
    let prepared = prepare(dataset, weather).unwrap();
    let params = ClusterParams::new(5, 10, 1);
    let categories = categorize(&prepared, &params).unwrap();
    let mut group = c.benchmark_group("esm_evaluate");
    for method in [GroupingMethod::KMeansGeo, GroupingMethod::KModes] {
        let agg = cluster(&prepared, &categories, method, &params).unwrap();
        let model = energy_model(&prepared, &agg, EsmParams::default()).unwrap();
        let mut s = 7;
        let genome: Vec<f64> = (0..model.genome_len()).map(|_| uniform(&mut s)).collect();
        group.bench_function(method.as_str(), |b| b.iter(|| model.kpis(black_box(&genome)).unwrap()));
    }
    group.finish();
}

fn bench_sort(c: &mut Criterion) {
    let mut group = c.benchmark_group("non_dominated_sort");
    for n in [32, 256, 1024] {
        let mut s = 3;
        let objs: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| uniform(&mut s)).collect()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &objs, |b, objs| {
            b.iter(|| non_dominated_sort(black_box(objs)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mst, bench_clustering, bench_evaluate, bench_sort);
criterion_main!(benches);
