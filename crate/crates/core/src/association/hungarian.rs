//! Kuhn-Munkres with potentials, O(n^2 m) for an `n x m` matrix with `n <= m`.

use std::cmp::Ordering;
use std::ops::{Add, Sub};

/// Cost ordered first by `primary`, then by `secondary`.
///
/// The secondary term breaks exact ties between optimal assignments.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LexCost {
    primary: f64,
    secondary: i64,
}

impl LexCost {
    const ZERO: LexCost = LexCost {
        primary: 0.0,
        secondary: 0,
    };
    const INF: LexCost = LexCost {
        primary: f64::INFINITY,
        secondary: 0,
    };
}

impl Add for LexCost {
    type Output = LexCost;
    fn add(self, o: LexCost) -> LexCost {
        LexCost {
            primary: self.primary + o.primary,
            secondary: self.secondary + o.secondary,
        }
    }
}

impl Sub for LexCost {
    type Output = LexCost;
    fn sub(self, o: LexCost) -> LexCost {
        LexCost {
            primary: self.primary - o.primary,
            secondary: self.secondary - o.secondary,
        }
    }
}

impl PartialOrd for LexCost {
    fn partial_cmp(&self, o: &LexCost) -> Option<Ordering> {
        match self.primary.partial_cmp(&o.primary)? {
            Ordering::Equal => Some(self.secondary.cmp(&o.secondary)),
            ord => Some(ord),
        }
    }
}

/// Assignment of every row of `cost` (rows <= cols) minimizing total cost.
/// Returns `assigned[row] = col`.
fn solve(cost: &[Vec<LexCost>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    let m = cols;
    let mut u = vec![LexCost::ZERO; n + 1];
    let mut v = vec![LexCost::ZERO; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![LexCost::INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = LexCost::INF;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
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
    let mut assigned = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            assigned[p[j] - 1] = j - 1;
        }
    }
    assigned
}

/// Maximum-total-similarity one-to-one matching over a `rows x cols` matrix.
///
/// Among assignments with equal total, prefers pairing each row with the
/// column of the closest index (lowest row with lowest column), then lower
/// columns. Returns pairs sorted by row.
pub fn max_similarity_matching(sim: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = sim.len();
    let cols = sim.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let spread = rows.max(cols) as i64 + 1;
    let cost_of = |r: usize, c: usize| {
        let offset = r as i64 - c as i64;
        LexCost {
            primary: -sim[r][c],
            secondary: offset * offset * spread + c as i64,
        }
    };
    let mut pairs: Vec<(usize, usize)> = if rows <= cols {
        let cost: Vec<Vec<LexCost>> = (0..rows)
            .map(|r| (0..cols).map(|c| cost_of(r, c)).collect())
            .collect();
        solve(&cost, cols)
            .into_iter()
            .enumerate()
            .collect()
    } else {
        let cost: Vec<Vec<LexCost>> = (0..cols)
            .map(|c| (0..rows).map(|r| cost_of(r, c)).collect())
            .collect();
        solve(&cost, rows)
            .into_iter()
            .enumerate()
            .map(|(c, r)| (r, c))
            .collect()
    };
    pairs.sort_unstable();
    pairs
}
