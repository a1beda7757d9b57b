//! Maximum-weight one-to-one assignment for rectangular weight matrices.
//!
//! The solver runs the O(n^3) Kuhn-Munkres algorithm on a square cost matrix
//! obtained by negating weights against their maximum and padding the short
//! side with zero-weight dummies. The optimal dual values it produces are
//! then used to restrict the matrix to its tight edges (zero reduced cost);
//! every perfect matching inside that subgraph is optimal, so a greedy pass
//! over it yields the lexicographically smallest optimal pair set without
//! disturbing the total weight.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("weight at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("weight matrix has an empty dimension")]
    EmptyMatrix,
}

/// An optimal matching: pairs sorted by row, with distinct rows and columns,
/// exactly `min(rows, cols)` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentResult {
    pairs: Vec<(usize, usize)>,
    total_weight: f64,
}

impl AssignmentResult {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

/// Finds a matching of size `min(rows, cols)` maximizing the summed weight
/// of `weights` (row-major, `rows * cols` entries). Ties between optimal
/// matchings are broken toward the lexicographically smallest sorted pair
/// list, so results are reproducible across runs and platforms.
pub fn solve_max_assignment(
    weights: &[f64],
    rows: usize,
    cols: usize,
) -> Result<AssignmentResult, AssignmentError> {
    if rows == 0 || cols == 0 {
        return Err(AssignmentError::EmptyMatrix);
    }
    assert_eq!(weights.len(), rows * cols, "weight matrix shape mismatch");
    for (k, w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(AssignmentError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
    }

    let dim = rows.max(cols);
    let top = weights.iter().fold(0.0_f64, |m, &w| m.max(w));
    let mut cost = vec![top; dim * dim];
    for i in 0..rows {
        for j in 0..cols {
            cost[i * dim + j] = top - weights[i * cols + j];
        }
    }

    let (col_row, u, v) = hungarian_min_square(&cost, dim);

    let scale = cost.iter().fold(1.0_f64, |m, &c| m.max(c.abs()));
    let eps = 1e-11 * scale;
    let mut row_col_km = vec![0_usize; dim];
    for (j, &i) in col_row.iter().enumerate() {
        row_col_km[i] = j;
    }
    // Tight edges plus the solver's own matching (the latter guards against
    // an edge drifting past eps through rounding in the dual updates).
    let adj: Vec<Vec<usize>> = (0..dim)
        .map(|i| {
            (0..dim)
                .filter(|&j| {
                    row_col_km[i] == j || cost[i * dim + j] - u[i] - v[j] <= eps
                })
                .collect()
        })
        .collect();

    let row_col = lex_min_perfect_matching(&adj, dim);

    let pairs: Vec<(usize, usize)> = (0..rows)
        .filter_map(|i| {
            let j = row_col[i];
            (j < cols).then_some((i, j))
        })
        .collect();
    debug_assert_eq!(pairs.len(), rows.min(cols));
    let total_weight = pairs.iter().map(|&(i, j)| weights[i * cols + j]).sum();
    Ok(AssignmentResult {
        pairs,
        total_weight,
    })
}

/// Kuhn-Munkres on a square min-cost matrix. Returns the matched row for
/// each column together with optimal row and column duals, for which every
/// reduced cost `cost[i][j] - u[i] - v[j]` is nonnegative and zero on the
/// matching.
fn hungarian_min_square(cost: &[f64], dim: usize) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    const FREE: usize = usize::MAX;
    let mut u = vec![0.0_f64; dim];
    let mut v = vec![0.0_f64; dim + 1];
    // col_row[j]: row matched to column j; index dim is a virtual column
    // holding the row currently looking for a match.
    let mut col_row = vec![FREE; dim + 1];
    let mut way = vec![0_usize; dim];

    for root in 0..dim {
        col_row[dim] = root;
        let mut j0 = dim;
        let mut minv = vec![f64::INFINITY; dim];
        let mut used = vec![false; dim + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 0..dim {
                if !used[j] {
                    let cur = cost[i0 * dim + j] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=dim {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == FREE {
                break;
            }
        }
        while j0 != dim {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
        }
    }
    col_row.truncate(dim);
    v.truncate(dim);
    (col_row, u, v)
}

/// Greedy lexicographically smallest perfect matching over ascending
/// adjacency lists. Each row takes the smallest column that still leaves the
/// remaining rows matchable; the graph is assumed to admit a perfect
/// matching.
fn lex_min_perfect_matching(adj: &[Vec<usize>], dim: usize) -> Vec<usize> {
    let mut row_col = vec![usize::MAX; dim];
    let mut used_cols = vec![false; dim];
    for i in 0..dim {
        for &j in &adj[i] {
            if used_cols[j] {
                continue;
            }
            used_cols[j] = true;
            if rows_matchable(adj, i + 1, &used_cols) {
                row_col[i] = j;
                break;
            }
            used_cols[j] = false;
        }
        assert_ne!(row_col[i], usize::MAX, "tight subgraph lost its matching");
    }
    row_col
}

fn rows_matchable(adj: &[Vec<usize>], from: usize, used_cols: &[bool]) -> bool {
    let dim = adj.len();
    let mut col_row = vec![usize::MAX; dim];
    let mut visited = vec![false; dim];
    for i in from..dim {
        visited.iter_mut().for_each(|x| *x = false);
        if !try_augment(adj, used_cols, i, &mut visited, &mut col_row) {
            return false;
        }
    }
    true
}

fn try_augment(
    adj: &[Vec<usize>],
    used_cols: &[bool],
    row: usize,
    visited: &mut [bool],
    col_row: &mut [usize],
) -> bool {
    for &j in &adj[row] {
        if used_cols[j] || visited[j] {
            continue;
        }
        visited[j] = true;
        if col_row[j] == usize::MAX || try_augment(adj, used_cols, col_row[j], visited, col_row) {
            col_row[j] = row;
            return true;
        }
    }
    false
}
