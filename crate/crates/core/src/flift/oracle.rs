//! Reference implementations of the Wasserstein lifting by enumeration.
//!
//! These are exponential and exist to cross-check the production paths on
//! small inputs (`--oracle` in the command-line tool).

use crate::error::{Error, Result};
use crate::quantale::QuantaleValue;
use crate::vrel::{Key, RelView};

use super::{EvaluationMap, FunctorValue};

/// Join of `ev(F(r)(t))` over every coupling `t ⊆ x1 × x2` whose
/// projections are exactly `x1` and `x2`.
pub fn pow_couplings<K, R>(
    ev: &EvaluationMap,
    r: &R,
    x1: &[K],
    x2: &[K],
    cap: usize,
) -> Result<QuantaleValue>
where
    K: Key,
    R: RelView<K> + ?Sized,
{
    let q = ev.quantale();
    let pairs: Vec<(usize, usize)> = (0..x1.len())
        .flat_map(|i| (0..x2.len()).map(move |j| (i, j)))
        .collect();
    if pairs.len() > cap.min(30) {
        return Err(Error::CapExceeded {
            what: "powerset couplings",
            needed: pairs.len(),
            cap,
        });
    }
    let values = pairs
        .iter()
        .map(|&(i, j)| r.get(&x1[i], &x2[j]))
        .collect::<Result<Vec<_>>>()?;
    let mut best = q.bottom();
    for mask in 0u32..(1u32 << pairs.len()) {
        let mut left = vec![false; x1.len()];
        let mut right = vec![false; x2.len()];
        let mut chosen = Vec::new();
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                left[i] = true;
                right[j] = true;
                chosen.push(values[bit]);
            }
        }
        if left.iter().all(|&b| b) && right.iter().all(|&b| b) {
            best = q.join2(best, ev.eval(&FunctorValue::Pow(chosen))?)?;
        }
    }
    Ok(best)
}

/// Minimum transport cost by enumerating the vertices of the transportation
/// polytope. Each vertex is supported on a spanning tree of the bipartite
/// graph of rows and columns, on which the plan is determined uniquely.
pub fn dist_extreme_points(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for plan in extreme_plans(supply, demand, cost)? {
        let c: f64 = plan.iter().map(|&((i, j), x)| x * cost[i][j]).sum();
        best = best.min(c);
    }
    Ok(best.max(0.0))
}

/// Least largest cost on the support of a coupling, over the vertices of
/// the transportation polytope. Every coupling's support contains the
/// support of some vertex, so vertices suffice.
pub fn dist_extreme_bottleneck(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for plan in extreme_plans(supply, demand, cost)? {
        let c = plan
            .iter()
            .filter(|&&(_, x)| x > 1e-12)
            .map(|&((i, j), _)| cost[i][j])
            .fold(0.0, f64::max);
        best = best.min(c);
    }
    Ok(best)
}

type Plan = Vec<((usize, usize), f64)>;

fn extreme_plans(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<Vec<Plan>> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 || cost.len() != m || cost.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("malformed transportation problem".into()));
    }
    let cells = m * n;
    if cells > 16 {
        return Err(Error::CapExceeded {
            what: "transport cells",
            needed: cells,
            cap: 16,
        });
    }
    let tree_size = m + n - 1;
    let mut plans = Vec::new();
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != tree_size {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| (b / n, b % n))
            .collect();
        if let Some(plan) = solve_tree(supply, demand, &chosen) {
            if plan.iter().all(|&(_, x)| x >= -1e-12) {
                plans.push(plan);
            }
        }
    }
    Ok(plans)
}

/// Peels leaves off a candidate tree; `None` if the cells contain a cycle.
fn solve_tree(
    supply: &[f64],
    demand: &[f64],
    cells: &[(usize, usize)],
) -> Option<Plan> {
    let (m, n) = (supply.len(), demand.len());
    let mut rest: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut alive = vec![true; cells.len()];
    let mut out = Vec::with_capacity(cells.len());
    for _ in 0..cells.len() {
        let mut degree = vec![0usize; m + n];
        for (k, &(i, j)) in cells.iter().enumerate() {
            if alive[k] {
                degree[i] += 1;
                degree[m + j] += 1;
            }
        }
        let leaf = cells.iter().enumerate().find_map(|(k, &(i, j))| {
            if !alive[k] {
                None
            } else if degree[i] == 1 {
                Some((k, i, m + j))
            } else if degree[m + j] == 1 {
                Some((k, m + j, i))
            } else {
                None
            }
        });
        let (k, leaf_node, other) = leaf?;
        let x = rest[leaf_node];
        rest[leaf_node] = 0.0;
        rest[other] -= x;
        alive[k] = false;
        out.push((cells[k], x));
    }
    // A spanning tree balances every node exactly.
    rest.iter().all(|r| r.abs() < 1e-9).then_some(out)
}
