/// Maximum-weight bipartite matching. `weights[r][c]` is `None` for a
/// forbidden pair; pairs of non-positive weight are never worth matching.
/// Returns the matched column of every row.
pub fn max_weight_matching(weights: &[Vec<Option<f64>>]) -> Vec<Option<usize>> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let m = weights[0].len();
    // Each row also gets a private zero-weight idle column so that n <= cols.
    let cols = m + n;
    let cost = |r: usize, c: usize| -> f64 {
        if c < m {
            -weights[r][c].filter(|&w| w > 0.0).unwrap_or(0.0)
        } else {
            0.0
        }
    };
    let assignment = hungarian(n, cols, cost);
    assignment
        .into_iter()
        .enumerate()
        .map(|(r, c)| (c < m && weights[r][c].is_some_and(|w| w > 0.0)).then_some(c))
        .collect()
}

/// Value of a matching under `weights`.
pub fn matching_value(weights: &[Vec<Option<f64>>], matching: &[Option<usize>]) -> f64 {
    matching
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.and_then(|c| weights[r][c]))
        .sum()
}

/// Minimum-cost assignment of `n` rows into `m >= n` columns with potentials.
fn hungarian(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= m);
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row (1-based) matched to column j; p[0] is the row being inserted.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}
