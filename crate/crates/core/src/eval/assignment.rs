//! Minimum-cost rectangular assignment (Hungarian method with potentials).

/// Solves `min Σ cost[i][assign[i]]` over one-to-one assignments.
///
/// Every row is assigned when `rows <= cols`, every column otherwise. Returns
/// the column chosen for each row, `None` for rows left unassigned. Costs must
/// be finite. Runs in `O(min(r, c)^2 · max(r, c))`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    debug_assert!(cost.iter().all(|r| r.len() == cols));
    if rows <= cols {
        solve(rows, cols, |i, j| cost[i][j])
    } else {
        let by_col = solve(cols, rows, |i, j| cost[j][i]);
        let mut out = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        out
    }
}

// n <= m; returns the column of each of the n rows.
fn solve(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    // 1-based with index 0 as the virtual start column
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = Some(j - 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn total(cost: &[Vec<f64>], a: &[Option<usize>]) -> f64 {
        a.iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| cost[i][j]))
            .sum()
    }

    // every injective map from the smaller side into the larger one
    fn brute_min(cost: &[Vec<f64>]) -> f64 {
        fn rec(
            cost: &[Vec<f64>],
            i: usize,
            used: &mut Vec<bool>,
            acc: f64,
            best: &mut f64,
            skips: usize,
        ) {
            if i == cost.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    rec(cost, i + 1, used, acc + cost[i][j], best, skips);
                    used[j] = false;
                }
            }
            if skips > 0 {
                rec(cost, i + 1, used, acc, best, skips - 1);
            }
        }
        let (r, c) = (cost.len(), cost[0].len());
        let mut best = f64::INFINITY;
        rec(
            cost,
            0,
            &mut vec![false; c],
            0.0,
            &mut best,
            r.saturating_sub(c),
        );
        best
    }

    #[test]
    fn classic_3x3() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let a = min_cost_assignment(&cost);
        assert_eq!(total(&cost, &a), 5.0);
    }

    #[test]
    fn empty_and_rectangular() {
        assert!(min_cost_assignment(&[]).is_empty());
        assert_eq!(min_cost_assignment(&[vec![], vec![]]), vec![None, None]);
        let tall = vec![vec![5.0], vec![1.0], vec![3.0]];
        assert_eq!(min_cost_assignment(&tall), vec![None, Some(0), None]);
        let wide = vec![vec![5.0, 1.0, 3.0]];
        assert_eq!(min_cost_assignment(&wide), vec![Some(1)]);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let r = rng.random_range(1..=6);
            let c = rng.random_range(1..=6);
            let cost: Vec<Vec<f64>> = (0..r)
                .map(|_| {
                    (0..c)
                        .map(|_| rng.random_range(0.0..10.0f64).round())
                        .collect()
                })
                .collect();
            let a = min_cost_assignment(&cost);
            let assigned = a.iter().flatten().count();
            assert_eq!(assigned, r.min(c));
            let mut cols: Vec<_> = a.iter().flatten().collect();
            cols.sort();
            cols.dedup();
            assert_eq!(cols.len(), assigned);
            assert!(
                (total(&cost, &a) - brute_min(&cost)).abs() < 1e-9,
                "{cost:?}"
            );
        }
    }
}
