use std::collections::{BTreeSet, HashMap};

use heatagg_core::clustering::{
    build_categories, hdbscan, kmeans, kmodes, kprototypes, scan, GroupingMethod, LloydParams, ScanConfig, NOISE,
};
use heatagg_core::geodata::{generate_synthetic, Layout};
use heatagg_core::network::CohesionMode;
use heatagg_core::pipeline::{categorize, cluster, prepare, ClusterParams, Prepared};
use heatagg_core::solar::{Site, WeatherSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn partition(labels: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups.into_values().collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn inertia(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut n = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        n[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| {
            let c: Vec<f64> = sums[l].iter().map(|s| s / n[l].max(1) as f64).collect();
            sq(p, &c)
        })
        .sum()
}

/// Mismatches against per-cluster majority modes.
fn matching_cost(rows: &[Vec<u32>], labels: &[usize], k: usize) -> f64 {
    let m = rows[0].len();
    let mut cost = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<u32>> = rows
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect();
        for j in 0..m {
            let mut counts: HashMap<u32, usize> = HashMap::new();
            for r in &members {
                *counts.entry(r[j]).or_default() += 1;
            }
            cost += (members.len() - counts.values().max().copied().unwrap_or(0)) as f64;
        }
    }
    cost
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

#[test]
fn kmeans_beats_random_labelings() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts = random_points(&mut rng, 100, 2);
    let p = kmeans(&pts, 5, 3, LloydParams::default()).unwrap();
    let best_random = (0..50)
        .map(|_| {
            let labels: Vec<usize> = (0..100).map(|_| rng.random_range(0..5)).collect();
            inertia(&pts, &labels, 5)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(p.cost <= best_random);
    assert!((p.cost - inertia(&pts, &p.labels, 5)).abs() < 1e-9);
}

#[test]
fn kmodes_identical_rows() {
    let rows = vec![vec![2u32, 7]; 6];
    let p = kmodes(&rows, 1, 1, LloydParams::default()).unwrap();
    assert_eq!(p.cost, 0.0);
    assert!(p.labels.iter().all(|&l| l == 0));
}

#[test]
fn kmodes_is_single_swap_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let rows: Vec<Vec<u32>> = (0..8)
            .map(|_| vec![rng.random_range(0..3), rng.random_range(0..3)])
            .collect();
        let p = kmodes(&rows, 2, trial, LloydParams::default()).unwrap();
        let cost = matching_cost(&rows, &p.labels, 2);
        assert_eq!(cost, p.cost, "trial {trial}");
        for i in 0..8 {
            let mut moved = p.labels.clone();
            moved[i] = 1 - moved[i];
            if moved.iter().all(|&l| l == moved[0]) {
                continue;
            }
            assert!(
                cost <= matching_cost(&rows, &moved, 2),
                "trial {trial}: moving {i} improves"
            );
        }
    }
}

#[test]
fn kprototypes_matches_exhaustive_two_partition() {
    let numeric = vec![
        vec![0.0, 0.0],
        vec![0.1, 0.0],
        vec![0.0, 0.2],
        vec![0.9, 1.0],
        vec![1.0, 0.8],
        vec![0.5, 0.5],
    ];
    let categorical: Vec<Vec<u32>> = [0, 0, 1, 1, 1, 0].iter().map(|&c| vec![c]).collect();
    let gamma = 0.3;
    let cost_of = |labels: &[usize]| inertia(&numeric, labels, 2) + gamma * matching_cost(&categorical, labels, 2);
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << 6) - 1 {
        let labels: Vec<usize> = (0..6).map(|i| ((mask >> i) & 1) as usize).collect();
        best = best.min(cost_of(&labels));
    }
    let p = kprototypes(&numeric, &categorical, 2, gamma, 1, LloydParams::default()).unwrap();
    assert!((p.cost - best).abs() < 1e-12, "{} vs {best}", p.cost);
    assert!((cost_of(&p.labels) - best).abs() < 1e-12);
}

#[test]
fn kprototypes_reductions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let numeric = random_points(&mut rng, 60, 3);
    let categorical: Vec<Vec<u32>> = (0..60)
        .map(|_| vec![rng.random_range(0..4), rng.random_range(0..3)])
        .collect();
    for seed in 0..5 {
        let a = kprototypes(&numeric, &categorical, 4, 0.0, seed, LloydParams::default()).unwrap();
        let b = kmeans(&numeric, 4, seed, LloydParams::default()).unwrap();
        assert_eq!(partition(&a.labels), partition(&b.labels));

        let flat = vec![vec![0.25, 0.5, 0.75]; 60];
        let c = kprototypes(&flat, &categorical, 4, 0.5, seed, LloydParams::default()).unwrap();
        let d = kmodes(&categorical, 4, seed, LloydParams::default()).unwrap();
        assert_eq!(partition(&c.labels), partition(&d.labels));
    }
}

#[test]
fn hdbscan_marks_far_outlier_as_noise() {
    let mut pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 0.0)).collect();
    pts.push((200.0, 150.0));
    let labels = hdbscan(&pts, 5).unwrap();
    assert_eq!(labels[20], NOISE);

    // With a second line the hierarchy splits; line ends may still fall out.
    pts.extend((0..20).map(|i| (i as f64, 60.0)));
    let labels = hdbscan(&pts, 5).unwrap();
    assert_eq!(labels[20], NOISE);
    assert!(labels.iter().filter(|&&l| l != NOISE).count() >= 30);
}

#[test]
fn category_centres_survive_duplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut feats = Vec::new();
    for c in 0..4 {
        for _ in 0..15 {
            feats.push(
                (0..5)
                    .map(|j| if j == c { 0.8 } else { 0.1 } + 0.05 * rng.random::<f64>())
                    .collect::<Vec<f64>>(),
            );
        }
    }
    let foot = vec![1.0; feats.len()];
    let a = build_categories(&feats, &foot, 4, 1, LloydParams::default()).unwrap();
    let doubled: Vec<Vec<f64>> = feats.iter().chain(&feats).cloned().collect();
    let b = build_categories(&doubled, &[foot.clone(), foot].concat(), 4, 1, LloydParams::default()).unwrap();
    let key = |cs: &[Vec<f64>]| {
        let mut v: Vec<Vec<i64>> = cs
            .iter()
            .map(|c| c.iter().map(|x| (x * 1e9).round() as i64).collect())
            .collect();
        v.sort();
        v
    };
    assert_eq!(key(&a.centers), key(&b.centers));
}

fn two_districts() -> Prepared {
    let d = generate_synthetic(1, 859, Layout::TwoDistricts).unwrap();
    prepare(d, WeatherSeries::clear_sky(Site::default(), 2015).unwrap()).unwrap()
}

fn district(p: &Prepared) -> Vec<usize> {
    p.dataset
        .buildings()
        .iter()
        .map(|b| usize::from(b.id.starts_with('B')))
        .collect()
}

#[test]
fn synthetic_structure_is_recovered() {
    let p = two_districts();
    let truth = district(&p);

    let params = ClusterParams::new(5, 2, 1);
    let cats = categorize(&p, &params).unwrap();
    let geo = cluster(&p, &cats, GroupingMethod::KMeansGeo, &params).unwrap();
    let groups: Vec<usize> = geo.assignments().iter().map(|a| a.group).collect();
    assert_eq!(partition(&groups), partition(&truth));

    // The few roofless outliers form their own population, so demand
    // categories agree with the districts up to them.
    let two = categorize(&p, &ClusterParams::new(2, 2, 1)).unwrap();
    let agree = two.labels.iter().zip(&truth).filter(|(l, t)| l == t).count();
    let agreement = agree.max(truth.len() - agree) as f64 / truth.len() as f64;
    assert!(agreement > 0.99, "{agreement}");
}

#[test]
fn scan_trade_off() {
    let p = two_districts();
    let config = ScanConfig {
        methods: GroupingMethod::ALL.to_vec(),
        reps: 5..=10,
        groups: 5..=10,
        seed: 1,
        min_cluster_size: 5,
        cohesion: CohesionMode::PerBuilding,
        lloyd: LloydParams::default(),
    };
    let rows = scan(&p.positions, &p.features_norm, &p.footprints, &config).unwrap();
    assert_eq!(rows.len(), 5 * 36);
    let mut by_point: HashMap<(usize, usize), Vec<_>> = HashMap::new();
    for r in &rows {
        by_point.entry((r.k_reps, r.k_groups)).or_default().push(r);
    }
    for ((kr, kg), rs) in &by_point {
        let kmodes = rs.iter().find(|r| r.method == GroupingMethod::KModes).unwrap();
        for r in rs {
            assert!(
                kmodes.variables <= r.variables,
                "({kr},{kg}) {} {}",
                r.method,
                r.variables
            );
        }
    }
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == GroupingMethod::KMeansGeo)
        .map(|r| r.variables as f64 / (r.k_reps * r.k_groups) as f64)
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    println!("kmeans_geo variables per (k_reps x k_groups): {lo:.3}..{hi:.3}");
    assert!(hi / lo < 2.0, "{lo} {hi}");
}
