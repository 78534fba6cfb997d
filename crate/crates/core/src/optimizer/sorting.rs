//! Pareto dominance, fast non-dominated sorting and crowding distance. All
//! objectives are minimised.

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Front index per point (0 = non-dominated).
pub fn non_dominated_sort<V: AsRef<[f64]>>(objectives: &[V]) -> Vec<usize> {
    let n = objectives.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (objectives[i].as_ref(), objectives[j].as_ref());
            if dominates(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut rank = vec![usize::MAX; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut r = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = r;
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        r += 1;
    }
    rank
}

/// Points grouped by front, ascending rank.
pub fn fronts(ranks: &[usize]) -> Vec<Vec<usize>> {
    let n_fronts = ranks.iter().map(|r| r + 1).max().unwrap_or(0);
    let mut out = vec![Vec::new(); n_fronts];
    for (i, &r) in ranks.iter().enumerate() {
        out[r].push(i);
    }
    out
}

/// Crowding distance of the points of one front; boundary points are infinite.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let val = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| val(a).total_cmp(&val(b)));
        let (lo, hi) = (val(order[0]), val(order[n - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            dist[order[w]] += (val(order[w + 1]) - val(order[w - 1])) / span;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let pts = [[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 3.0, 0.0]];
        assert_eq!(non_dominated_sort(&pts), vec![0, 1, 0]);
        assert_eq!(fronts(&[0, 1, 0]), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn identical_points_share_front_zero() {
        let pts = vec![[1.0, 2.0, 3.0]; 4];
        assert_eq!(non_dominated_sort(&pts), vec![0; 4]);
    }

    #[test]
    fn crowding_examples() {
        assert!(crowding_distance(&[[0.0, 1.0], [1.0, 0.0]])
            .iter()
            .all(|d| d.is_infinite()));
        let d = crowding_distance(&[[0.0, 2.0, 0.0], [1.0, 1.0, 0.0], [2.0, 0.0, 0.0]]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        // each varying objective contributes (2 - 0) / 2 = 1, the constant one 0
        assert_eq!(d[1], 2.0);
    }
}
