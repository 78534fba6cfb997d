//! One Lloyd-style engine for k-means, k-modes and k-prototypes.
//!
//! The dissimilarity between a point and a prototype is
//! `‖x − c‖² + γ · #{j : a_j ≠ m_j}`; k-means has no categorical attributes,
//! k-modes no numeric ones. Sharing a single code path (seeding, tie-breaking,
//! empty-cluster repair, convergence and restarts) makes the reductions between
//! the three algorithms exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LloydParams {
    /// Independent k-means++ restarts; the lowest-cost run wins.
    pub n_init: usize,
    pub max_iter: usize,
}

impl Default for LloydParams {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub labels: Vec<usize>,
    /// Numeric prototype per cluster (empty vectors for pure k-modes).
    pub centers: Vec<Vec<f64>>,
    /// Categorical prototype per cluster (empty vectors for pure k-means).
    pub modes: Vec<Vec<u32>>,
    pub cost: f64,
    pub iterations: usize,
}

pub(crate) struct MixedData<'a> {
    pub numeric: &'a [Vec<f64>],
    pub categorical: &'a [Vec<u32>],
    pub gamma: f64,
}

impl MixedData<'_> {
    fn len(&self) -> usize {
        self.numeric.len().max(self.categorical.len())
    }

    fn num_dims(&self) -> usize {
        self.numeric.first().map_or(0, Vec::len)
    }

    fn cat_dims(&self) -> usize {
        self.categorical.first().map_or(0, Vec::len)
    }

    fn numeric_row(&self, i: usize) -> &[f64] {
        self.numeric.get(i).map_or(&[], Vec::as_slice)
    }

    fn categorical_row(&self, i: usize) -> &[u32] {
        self.categorical.get(i).map_or(&[], Vec::as_slice)
    }

    fn cost(&self, i: usize, center: &[f64], mode: &[u32]) -> f64 {
        let sq: f64 = self
            .numeric_row(i)
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let mismatches = self.categorical_row(i).iter().zip(mode).filter(|(a, b)| a != b).count();
        sq + self.gamma * mismatches as f64
    }

    fn validate(&self, k: usize) -> Result<()> {
        let n = self.len();
        if !self.numeric.is_empty() && !self.categorical.is_empty() && self.numeric.len() != self.categorical.len() {
            return Err(Error::Argument("numeric and categorical parts differ in length".into()));
        }
        if k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if k > n {
            return Err(Error::Argument(format!("k = {k} exceeds the number of points {n}")));
        }
        let d = self.num_dims();
        if self
            .numeric
            .iter()
            .any(|r| r.len() != d || r.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Argument("numeric rows must be finite and equally sized".into()));
        }
        let m = self.cat_dims();
        if self.categorical.iter().any(|r| r.len() != m) {
            return Err(Error::Argument("categorical rows must be equally sized".into()));
        }
        if d + m == 0 {
            return Err(Error::Argument("points have no attributes".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Argument(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

struct State {
    centers: Vec<Vec<f64>>,
    modes: Vec<Vec<u32>>,
}

impl State {
    fn set_to_point(&mut self, data: &MixedData<'_>, c: usize, i: usize) {
        self.centers[c] = data.numeric_row(i).to_vec();
        self.modes[c] = data.categorical_row(i).to_vec();
    }

    fn nearest(&self, data: &MixedData<'_>, i: usize) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for c in 0..self.centers.len() {
            let d = data.cost(i, &self.centers[c], &self.modes[c]);
            // strict `<` keeps the lowest index on ties
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }
}

fn seed_plus_plus(data: &MixedData<'_>, k: usize, rng: &mut ChaCha8Rng) -> State {
    let n = data.len();
    let mut state = State {
        centers: vec![Vec::new(); k],
        modes: vec![Vec::new(); k],
    };
    let first = rng.random_range(0..n);
    state.set_to_point(data, 0, first);
    let mut dist: Vec<f64> = (0..n)
        .map(|i| data.cost(i, &state.centers[0], &state.modes[0]))
        .collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last_positive = 0;
            for (i, d) in dist.iter().enumerate() {
                if *d > 0.0 {
                    last_positive = i;
                    acc += d;
                    if acc > r {
                        chosen = Some(i);
                        break;
                    }
                }
            }
            chosen.unwrap_or(last_positive)
        } else {
            rng.random_range(0..n)
        };
        state.set_to_point(data, c, pick);
        for (i, d) in dist.iter_mut().enumerate() {
            let nd = data.cost(i, &state.centers[c], &state.modes[c]);
            if nd < *d {
                *d = nd;
            }
        }
    }
    state
}

fn assign(data: &MixedData<'_>, state: &mut State, labels: &mut [usize]) {
    let k = state.centers.len();
    for (i, l) in labels.iter_mut().enumerate() {
        *l = state.nearest(data, i).0;
    }
    // Re-seed empty clusters at the point farthest from its prototype.
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] <= 1 {
                continue;
            }
            let d = data.cost(i, &state.centers[l], &state.modes[l]);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        if let Some(i) = far {
            sizes[labels[i]] -= 1;
            labels[i] = c;
            sizes[c] = 1;
            state.set_to_point(data, c, i);
        }
    }
}

fn update(data: &MixedData<'_>, state: &mut State, labels: &[usize]) {
    let k = state.centers.len();
    let d = data.num_dims();
    let m = data.cat_dims();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    let mut freq: Vec<Vec<std::collections::BTreeMap<u32, usize>>> = vec![vec![Default::default(); m]; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(data.numeric_row(i)) {
            *s += x;
        }
        for (f, a) in freq[l].iter_mut().zip(data.categorical_row(i)) {
            *f.entry(*a).or_default() += 1;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        state.centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        state.modes[c] = freq[c]
            .iter()
            .map(|f| {
                // majority; BTreeMap order makes the smallest code win ties
                let mut best = (0u32, 0usize);
                for (&v, &cnt) in f {
                    if cnt > best.1 {
                        best = (v, cnt);
                    }
                }
                best.0
            })
            .collect();
    }
}

fn run_once(data: &MixedData<'_>, k: usize, max_iter: usize, rng: &mut ChaCha8Rng) -> Partition {
    let n = data.len();
    let mut state = seed_plus_plus(data, k, rng);
    let mut labels = vec![0usize; n];
    assign(data, &mut state, &mut labels);
    let mut next = vec![0usize; n];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        update(data, &mut state, &labels);
        assign(data, &mut state, &mut next);
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
    }
    update(data, &mut state, &labels);
    let cost = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| data.cost(i, &state.centers[l], &state.modes[l]))
        .sum();
    Partition {
        labels,
        centers: state.centers,
        modes: state.modes,
        cost,
        iterations,
    }
}

pub(crate) fn fit(data: &MixedData<'_>, k: usize, seed: u64, params: LloydParams) -> Result<Partition> {
    data.validate(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Partition> = None;
    for _ in 0..params.n_init.max(1) {
        let p = run_once(data, k, params.max_iter.max(1), &mut rng);
        if best.as_ref().is_none_or(|b| p.cost < b.cost) {
            best = Some(p);
        }
    }
    Ok(best.expect("at least one restart"))
}
