//! Exact optimal transport on finite supports (transportation simplex).
//!
//! Balanced problem `min sum c_ij x_ij` s.t. row sums `a`, column sums `b`,
//! `x >= 0`. The basis is kept as a spanning tree over row and column nodes;
//! each pivot prices non-basic cells with the dual potentials and pushes flow
//! around the unique cycle closed by the entering cell.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Optimal plan and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    pub cost: T,
    /// `(row, col, mass)` for every positive entry.
    pub flows: Vec<(usize, usize, T)>,
}

/// Solves the balanced transportation problem.
///
/// `supply` and `demand` must be nonnegative with equal totals (up to a
/// relative `1e-9`); the residual is absorbed by the last positive demand.
pub fn solve_transport<T, C>(supply: &[T], demand: &[T], cost: C) -> Result<TransportPlan<T>>
where
    T: Real,
    C: Fn(usize, usize) -> T,
{
    if supply
        .iter()
        .chain(demand)
        .any(|&v| !(v >= T::zero()) || !v.is_finite())
    {
        return Err(Error::invalid(
            "transport masses must be finite and nonnegative",
        ));
    }
    let rows: Vec<usize> = (0..supply.len())
        .filter(|&i| supply[i] > T::zero())
        .collect();
    let cols: Vec<usize> = (0..demand.len())
        .filter(|&j| demand[j] > T::zero())
        .collect();
    let sa: T = rows.iter().map(|&i| supply[i]).sum();
    let sb: T = cols.iter().map(|&j| demand[j]).sum();
    let scale = sa.max(sb);
    if (sa - sb).abs() > T::lit(1e-9) * scale.max(T::one()) {
        return Err(Error::invalid(format!(
            "unbalanced transport: {sa} vs {sb}"
        )));
    }
    if rows.is_empty() || cols.is_empty() {
        return Ok(TransportPlan {
            cost: T::zero(),
            flows: Vec::new(),
        });
    }
    let a: Vec<T> = rows.iter().map(|&i| supply[i]).collect();
    let mut b: Vec<T> = cols.iter().map(|&j| demand[j]).collect();
    let last = b.len() - 1;
    b[last] = (b[last] + (sa - sb)).max(T::zero());
    let c: Vec<Vec<T>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| cost(i, j)).collect())
        .collect();

    let mut simplex = Simplex::north_west(&a, &b, c);
    simplex.optimise()?;
    let mut flows = Vec::new();
    let mut total = T::zero();
    for &(i, j) in &simplex.basis {
        let x = simplex.flow[i][j];
        if x > T::zero() {
            total = total + x * simplex.cost[i][j];
            flows.push((rows[i], cols[j], x));
        }
    }
    flows.sort_by_key(|&(i, j, _)| (i, j));
    Ok(TransportPlan { cost: total, flows })
}

/// 1-Wasserstein distance (Euclidean ground cost) between two weighted point sets.
pub fn wasserstein1<T: Real>(
    from: &[Vec<T>],
    from_mass: &[T],
    to: &[Vec<T>],
    to_mass: &[T],
) -> Result<T> {
    Ok(solve_transport(from_mass, to_mass, |i, j| linalg::dist(&from[i], &to[j]))?.cost)
}

struct Simplex<T> {
    m: usize,
    n: usize,
    cost: Vec<Vec<T>>,
    flow: Vec<Vec<T>>,
    is_basic: Vec<Vec<bool>>,
    basis: Vec<(usize, usize)>,
}

impl<T: Real> Simplex<T> {
    fn north_west(a: &[T], b: &[T], cost: Vec<Vec<T>>) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut flow = vec![vec![T::zero(); n]; m];
        let mut is_basic = vec![vec![false; n]; m];
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            let q = ra[i].min(rb[j]);
            flow[i][j] = q;
            is_basic[i][j] = true;
            basis.push((i, j));
            ra[i] = ra[i] - q;
            rb[j] = rb[j] - q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || ra[i] <= rb[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            m,
            n,
            cost,
            flow,
            is_basic,
            basis,
        }
    }

    /// Row nodes are `0..m`, column nodes `m..m+n`.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &(i, j) in &self.basis {
            adj[i].push(self.m + j);
            adj[self.m + j].push(i);
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<usize>]) -> (Vec<T>, Vec<T>) {
        let mut u = vec![T::zero(); self.m];
        let mut v = vec![T::zero(); self.n];
        let mut seen = vec![false; self.m + self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(node) = queue.pop_front() {
            for &next in &adj[node] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                if node < self.m {
                    let j = next - self.m;
                    v[j] = self.cost[node][j] - u[node];
                } else {
                    let j = node - self.m;
                    u[next] = self.cost[next][j] - v[j];
                }
                queue.push_back(next);
            }
        }
        (u, v)
    }

    /// Tree path from row node `i` to column node `m + j`, as basic cells.
    fn path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Vec<(usize, usize)> {
        let target = self.m + j;
        let mut parent = vec![usize::MAX; self.m + self.n];
        parent[i] = i;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &next in &adj[node] {
                if parent[next] == usize::MAX {
                    parent[next] = node;
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = target;
        while node != i {
            let prev = parent[node];
            let cell = if node >= self.m {
                (prev, node - self.m)
            } else {
                (node, prev - self.m)
            };
            cells.push(cell);
            node = prev;
        }
        cells.reverse();
        cells
    }

    fn optimise(&mut self) -> Result<()> {
        let cmax = self
            .cost
            .iter()
            .flatten()
            .fold(T::zero(), |acc, &c| acc.max(c.abs()));
        let tol = T::epsilon() * T::lit(1e3) * cmax.max(T::one());
        let max_iter = 50 * (self.m + self.n).pow(2) + 100;
        for iter in 0..max_iter {
            let adj = self.adjacency();
            let (u, v) = self.potentials(&adj);
            // Dantzig pricing, switching to Bland's first-improving rule if degenerate
            // pivots drag on.
            let bland = iter > max_iter / 2;
            let mut entering: Option<(usize, usize, T)> = None;
            'scan: for i in 0..self.m {
                for j in 0..self.n {
                    if self.is_basic[i][j] {
                        continue;
                    }
                    let rc = self.cost[i][j] - u[i] - v[j];
                    if rc < -tol && entering.is_none_or(|(_, _, best)| rc < best) {
                        entering = Some((i, j, rc));
                        if bland {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((ei, ej, _)) = entering else {
                return Ok(());
            };
            // Even positions along the path from row `ei` lose flow, odd ones gain.
            let path = self.path(&adj, ei, ej);
            let (mut theta, mut leave) = (T::infinity(), 0usize);
            for (k, &(i, j)) in path.iter().enumerate().step_by(2) {
                if self.flow[i][j] < theta {
                    theta = self.flow[i][j];
                    leave = k;
                }
            }
            for (k, &(i, j)) in path.iter().enumerate() {
                self.flow[i][j] = if k % 2 == 0 {
                    (self.flow[i][j] - theta).max(T::zero())
                } else {
                    self.flow[i][j] + theta
                };
            }
            let (li, lj) = path[leave];
            self.flow[li][lj] = T::zero();
            self.is_basic[li][lj] = false;
            self.is_basic[ei][ej] = true;
            self.flow[ei][ej] = theta;
            let pos = self
                .basis
                .iter()
                .position(|&cell| cell == (li, lj))
                .expect("leaving cell is basic");
            self.basis[pos] = (ei, ej);
        }
        Err(Error::invalid("transportation simplex did not converge"))
    }
}
