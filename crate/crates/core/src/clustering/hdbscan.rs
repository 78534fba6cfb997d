//! HDBSCAN on planar points: mutual reachability, single-linkage hierarchy,
//! condensed tree and excess-of-mass cluster selection. The root cluster is
//! never selected, so a structure without any split is all noise.

use crate::error::{Error, Result};

pub const NOISE: i32 = -1;

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Distance to the `min_samples`-th nearest neighbour, counting the point itself.
fn core_distances(points: &[(f64, f64)], min_samples: usize) -> Vec<f64> {
    let mut buf = Vec::with_capacity(points.len());
    points
        .iter()
        .map(|p| {
            buf.clear();
            buf.extend(points.iter().map(|q| dist(*p, *q)));
            let k = (min_samples - 1).min(buf.len() - 1);
            *buf.select_nth_unstable_by(k, f64::total_cmp).1
        })
        .collect()
}

/// Prim over the complete mutual-reachability graph; edges sorted ascending.
fn mutual_reachability_mst(points: &[(f64, f64)], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mr = |i: usize, j: usize| dist(points[i], points[j]).max(core[i]).max(core[j]);
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if !in_tree[j] {
                let d = mr(current, j);
                if d < best[j] {
                    best[j] = d;
                    parent[j] = current;
                }
            }
        }
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        current = next;
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    edges
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merges: node `n + i` joins `(left, right)` at `distance`.
struct Linkage {
    left: Vec<usize>,
    right: Vec<usize>,
    distance: Vec<f64>,
    size: Vec<usize>,
}

fn single_linkage(n: usize, edges: &[(usize, usize, f64)]) -> Linkage {
    // Union-find over 2n-1 nodes, each root carrying its linkage node id.
    let mut uf = UnionFind::new(2 * n - 1);
    let mut link = Linkage {
        left: Vec::with_capacity(n - 1),
        right: Vec::with_capacity(n - 1),
        distance: Vec::with_capacity(n - 1),
        size: Vec::with_capacity(n - 1),
    };
    for (k, &(a, b, d)) in edges.iter().enumerate() {
        let ra = uf.find(a);
        let rb = uf.find(b);
        let node = n + k;
        let size = uf.size[ra] + uf.size[rb];
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        uf.size[node] = size;
        link.left.push(ra);
        link.right.push(rb);
        link.distance.push(d);
        link.size.push(size);
    }
    link
}

#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

fn lambda_of(d: f64) -> f64 {
    1.0 / d.max(1e-12)
}

/// Condensed tree; cluster ids start at `n` (the root) and grow with depth.
fn condense(n: usize, link: &Linkage, min_cluster_size: usize) -> Vec<CondensedEdge> {
    let root = 2 * n - 2;
    let node_size = |x: usize| if x < n { 1 } else { link.size[x - n] };
    let children = |x: usize| (link.left[x - n], link.right[x - n]);

    let mut out = Vec::new();
    let mut next_label = n + 1;
    // (linkage node, cluster label it belongs to)
    let mut stack = vec![(root, n)];
    while let Some((node, cluster)) = stack.pop() {
        if node < n {
            continue;
        }
        let (l, r) = children(node);
        let lambda = lambda_of(link.distance[node - n]);
        let (ls, rs) = (node_size(l), node_size(r));
        match (ls >= min_cluster_size, rs >= min_cluster_size) {
            (true, true) => {
                for (child, size) in [(l, ls), (r, rs)] {
                    let label = next_label;
                    next_label += 1;
                    out.push(CondensedEdge {
                        parent: cluster,
                        child: label,
                        lambda,
                        size,
                    });
                    stack.push((child, label));
                }
            }
            (true, false) => {
                fall_out(r, cluster, lambda, n, link, &mut out);
                stack.push((l, cluster));
            }
            (false, true) => {
                fall_out(l, cluster, lambda, n, link, &mut out);
                stack.push((r, cluster));
            }
            (false, false) => {
                fall_out(l, cluster, lambda, n, link, &mut out);
                fall_out(r, cluster, lambda, n, link, &mut out);
            }
        }
    }
    out
}

fn fall_out(node: usize, cluster: usize, lambda: f64, n: usize, link: &Linkage, out: &mut Vec<CondensedEdge>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(CondensedEdge {
                parent: cluster,
                child: x,
                lambda,
                size: 1,
            });
        } else {
            stack.push(link.left[x - n]);
            stack.push(link.right[x - n]);
        }
    }
}

/// Cluster labels per point, `NOISE` (-1) for noise. Uses
/// `min_samples = min_cluster_size`.
pub fn hdbscan(points: &[(f64, f64)], min_cluster_size: usize) -> Result<Vec<i32>> {
    if min_cluster_size < 2 {
        return Err(Error::Argument("min_cluster_size must be at least 2".into()));
    }
    if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::Argument("points must be finite".into()));
    }
    let n = points.len();
    if n < min_cluster_size || n < 2 {
        return Ok(vec![NOISE; n]);
    }
    let core = core_distances(points, min_cluster_size);
    let edges = mutual_reachability_mst(points, &core);
    let link = single_linkage(n, &edges);
    let tree = condense(n, &link, min_cluster_size);

    let n_clusters = tree
        .iter()
        .filter(|e| e.child >= n)
        .map(|e| e.child - n + 1)
        .max()
        .unwrap_or(1);
    let idx = |c: usize| c - n;

    let mut birth = vec![0.0; n_clusters];
    let mut parent_of = vec![usize::MAX; n_clusters];
    let mut child_clusters: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[idx(e.child)] = e.lambda;
        parent_of[idx(e.child)] = e.parent;
        child_clusters[idx(e.parent)].push(e.child);
    }
    let mut stability = vec![0.0; n_clusters];
    for e in &tree {
        let p = idx(e.parent);
        stability[p] += (e.lambda - birth[p]) * e.size as f64;
    }

    // Excess of mass, children before parents; the root (index 0) is excluded.
    let mut selected = vec![false; n_clusters];
    for c in (1..n_clusters).rev() {
        let subtree: f64 = child_clusters[c].iter().map(|&ch| stability[idx(ch)]).sum();
        if child_clusters[c].is_empty() || stability[c] >= subtree {
            selected[c] = true;
            let mut stack = child_clusters[c].clone();
            while let Some(d) = stack.pop() {
                selected[idx(d)] = false;
                stack.extend(child_clusters[idx(d)].iter().copied());
            }
        } else {
            stability[c] = subtree;
        }
    }

    let mut label_of_cluster = vec![NOISE; n_clusters];
    let mut next = 0;
    for (c, s) in selected.iter().enumerate() {
        if *s {
            label_of_cluster[c] = next;
            next += 1;
        }
    }

    let mut labels = vec![NOISE; n];
    for e in tree.iter().filter(|e| e.child < n) {
        let mut c = e.parent;
        loop {
            let ci = idx(c);
            if selected[ci] {
                labels[e.child] = label_of_cluster[ci];
                break;
            }
            if parent_of[ci] == usize::MAX {
                break;
            }
            c = parent_of[ci];
        }
    }
    Ok(labels)
}
