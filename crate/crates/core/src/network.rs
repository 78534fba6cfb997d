//! Euclidean minimum spanning trees as a heat network length estimate.

use std::collections::{BTreeMap, BTreeSet};

use crate::clustering::{Aggregation, Combo};

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEstimate {
    pub total_length_m: f64,
    /// `(i, j, length)` with indices into the input point slice.
    pub edges: Vec<(usize, usize, f64)>,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Exact Euclidean MST over the complete graph (Prim, O(n²)).
pub fn mst(points: &[(f64, f64)]) -> NetworkEstimate {
    let n = points.len();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n <= 1 {
        return NetworkEstimate {
            total_length_m: 0.0,
            edges,
        };
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = dist(points[0], points[j]);
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < next_d) {
                next = j;
                next_d = best[j];
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, next_d));
        for j in 0..n {
            if !in_tree[j] {
                let d = dist(points[next], points[j]);
                if d < best[j] {
                    best[j] = d;
                    parent[j] = next;
                }
            }
        }
    }
    // Summed shortest first so the total does not depend on the start vertex.
    let mut lengths: Vec<f64> = edges.iter().map(|e| e.2).collect();
    lengths.sort_by(f64::total_cmp);
    NetworkEstimate {
        total_length_m: lengths.iter().sum(),
        edges,
    }
}

/// Total length of [`mst`].
pub fn mst_length(points: &[(f64, f64)]) -> f64 {
    mst(points).total_length_m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CohesionMode {
    /// `Σ_g mst_g / Σ_g |g|`
    #[default]
    PerBuilding,
    /// mean over groups of `mst_g / |g|`
    PerGroup,
}

impl std::str::FromStr for CohesionMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "per_building" => Ok(Self::PerBuilding),
            "per_group" => Ok(Self::PerGroup),
            other => Err(crate::Error::Argument(format!("unknown cohesion mode `{other}`"))),
        }
    }
}

/// Average single-group line length: the network length needed to connect
/// the buildings of one geographical group, averaged per building.
pub fn group_cohesion(aggregation: &Aggregation, positions: &[(f64, f64)], mode: CohesionMode) -> f64 {
    let mut groups: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for (a, p) in aggregation.assignments().iter().zip(positions) {
        groups.entry(a.group).or_default().push(*p);
    }
    if groups.is_empty() {
        return 0.0;
    }
    match mode {
        CohesionMode::PerBuilding => {
            let total: f64 = groups.values().map(|pts| mst_length(pts)).sum();
            total / positions.len() as f64
        }
        CohesionMode::PerGroup => {
            let sum: f64 = groups.values().map(|pts| mst_length(pts) / pts.len() as f64).sum();
            sum / groups.len() as f64
        }
    }
}

/// MST over all real buildings whose combo is selected.
pub fn grid_length_for_selection(
    selected: &BTreeSet<Combo>,
    aggregation: &Aggregation,
    positions: &[(f64, f64)],
) -> f64 {
    let pts: Vec<(f64, f64)> = aggregation
        .assignments()
        .iter()
        .zip(positions)
        .filter(|(a, _)| selected.contains(&a.combo()))
        .map(|(_, p)| *p)
        .collect();
    mst_length(&pts)
}

/// Shortest network obtainable by connecting exactly one combo with at least
/// two buildings. `None` when every combo holds a single building.
pub fn shortest_single_combo_grid(aggregation: &Aggregation, positions: &[(f64, f64)]) -> Option<f64> {
    let mut members: BTreeMap<Combo, Vec<(f64, f64)>> = BTreeMap::new();
    for (a, p) in aggregation.assignments().iter().zip(positions) {
        members.entry(a.combo()).or_default().push(*p);
    }
    members
        .values()
        .filter(|pts| pts.len() >= 2)
        .map(|pts| mst_length(pts))
        .min_by(f64::total_cmp)
}
