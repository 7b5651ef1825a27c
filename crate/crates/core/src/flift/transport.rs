//! Exact solvers for the distribution liftings.
//!
//! Masses and costs are read as exact rationals (small-denominator
//! fractions where they fit) and the optimum is computed in exact
//! arithmetic, so degenerate instances cannot stall on rounding.
//! [`min_cost`] runs the transportation simplex (north-west corner start,
//! MODI potentials, Bland's rule). [`bottleneck`] finds the least threshold
//! under which a coupling exists, testing feasibility with a max-flow.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest denominator used when reading `f64` masses and costs.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

/// Optimal plan of a transportation problem.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportSolution {
    pub cost: f64,
    pub plan: Vec<Vec<f64>>,
    pub pivots: usize,
}

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> BigRational {
    assert!(x.is_finite(), "cannot rationalize {x}");
    let ax = x.abs();
    let whole = ax.floor();
    let target = ax - whole;
    let max_den = i128::from(max_den.max(1));
    // Convergents h/k of the continued fraction of the fractional part.
    let (mut h0, mut k0, mut h1, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut best = (0i128, 1i128);
    let mut rest = target;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den {
            // The best semiconvergent may beat the last convergent.
            let t = (max_den - k0) / k1;
            let (hs, ks) = (t * h1 + h0, t * k1 + k0);
            let err_s = (hs as f64 / ks as f64 - target).abs();
            let err_c = (h1 as f64 / k1 as f64 - target).abs();
            if t > 0 && err_s < err_c {
                best = (hs, ks);
            }
            break;
        }
        (h0, k0, h1, k1) = (h1, k1, h2, k2);
        best = (h1, k1);
        let r = rest - a;
        if r < 1e-12 {
            break;
        }
        rest = 1.0 / r;
    }
    let q = BigRational::from_integer(BigInt::from(whole as i128))
        + BigRational::new(BigInt::from(best.0), BigInt::from(best.1));
    if x < 0.0 {
        -q
    } else {
        q
    }
}

/// Exact rational for an input double: a small-denominator fraction when one
/// reproduces it to within `1e-12`, else its exact binary value.
pub fn exact(x: f64) -> BigRational {
    let q = rationalize(x, MAX_DENOMINATOR);
    if (to_f64(&q) - x).abs() <= 1e-12 * x.abs().max(1.0) {
        q
    } else {
        BigRational::from_float(x).expect("finite input")
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn check_instance(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<()> {
    if supply.is_empty() || demand.is_empty() {
        return Err(Error::Invalid("transportation problem with an empty side".into()));
    }
    if cost.len() != supply.len() || cost.iter().any(|row| row.len() != demand.len()) {
        return Err(Error::Invalid("cost matrix has the wrong shape".into()));
    }
    for &m in supply.iter().chain(demand) {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Invalid(format!("mass {m} must be positive")));
        }
    }
    for &c in cost.iter().flatten() {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Invalid(format!("cost {c} must be finite and nonnegative")));
        }
    }
    Ok(())
}

/// Rational masses scaled so that each side sums to exactly one.
fn exact_masses(ms: &[f64]) -> Vec<BigRational> {
    let raw: Vec<BigRational> = ms.iter().map(|&m| exact(m)).collect();
    let total = raw.iter().fold(BigRational::zero(), |acc, m| acc + m);
    raw.into_iter().map(|m| m / &total).collect()
}

/// Minimum expected cost over all couplings of `supply` and `demand`.
///
/// Both sides are rescaled to total mass one. Fails with
/// [`Error::CapExceeded`] after `max_pivots` pivots.
pub fn min_cost(
    supply: &[f64],
    demand: &[f64],
    cost: &[Vec<f64>],
    max_pivots: usize,
) -> Result<TransportSolution> {
    check_instance(supply, demand, cost)?;
    let (m, n) = (supply.len(), demand.len());
    let a = exact_masses(supply);
    let b = exact_masses(demand);
    let c: Vec<Vec<BigRational>> = cost
        .iter()
        .map(|row| row.iter().map(|&x| exact(x)).collect())
        .collect();

    let mut basic = vec![vec![false; n]; m];
    let mut x = vec![vec![BigRational::zero(); n]; m];
    north_west_corner(&a, &b, &mut basic, &mut x);

    let mut pivots = 0;
    loop {
        let (u, v) = potentials(&basic, &c);
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !basic[i][j] && (&c[i][j] - &u[i] - &v[j]).is_negative());
        let Some((ei, ej)) = entering else { break };
        if pivots == max_pivots {
            return Err(Error::CapExceeded {
                what: "transport pivots",
                needed: pivots + 1,
                cap: max_pivots,
            });
        }
        pivots += 1;

        let path = tree_path(&basic, ej, ei);
        // Cells along the path from column `ej` to row `ei` alternate in sign,
        // starting with a decrease.
        let minus: Vec<(usize, usize)> = path.iter().step_by(2).copied().collect();
        let plus: Vec<(usize, usize)> = path.iter().skip(1).step_by(2).copied().collect();
        let theta = minus
            .iter()
            .map(|&(i, j)| x[i][j].clone())
            .min()
            .expect("a cycle has a decreasing cell");
        let leaving = *minus
            .iter()
            .filter(|&&(i, j)| x[i][j] == theta)
            .min()
            .expect("the minimum is attained");
        for &(i, j) in &minus {
            x[i][j] -= &theta;
        }
        for &(i, j) in &plus {
            x[i][j] += &theta;
        }
        x[ei][ej] = theta;
        basic[ei][ej] = true;
        basic[leaving.0][leaving.1] = false;
        x[leaving.0][leaving.1] = BigRational::zero();
    }

    let plan: Vec<Vec<f64>> = x.iter().map(|row| row.iter().map(to_f64).collect()).collect();
    let total: f64 = plan
        .iter()
        .zip(cost)
        .flat_map(|(pr, cr)| pr.iter().zip(cr).map(|(p, c)| p * c))
        .sum();
    Ok(TransportSolution {
        cost: total.max(0.0),
        plan,
        pivots,
    })
}

fn north_west_corner(
    a: &[BigRational],
    b: &[BigRational],
    basic: &mut [Vec<bool>],
    x: &mut [Vec<BigRational>],
) {
    let (m, n) = (a.len(), b.len());
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let t = ra[i].clone().min(rb[j].clone());
        ra[i] -= &t;
        rb[j] -= &t;
        x[i][j] = t;
        basic[i][j] = true;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (ra[i].is_zero() && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
}

/// Dual potentials with `u[0] = 0` and `u[i] + v[j] = c[i][j]` on the basis.
fn potentials(basic: &[Vec<bool>], c: &[Vec<BigRational>]) -> (Vec<BigRational>, Vec<BigRational>) {
    let (m, n) = (basic.len(), basic[0].len());
    let mut u: Vec<Option<BigRational>> = vec![None; m];
    let mut v: Vec<Option<BigRational>> = vec![None; n];
    u[0] = Some(BigRational::zero());
    // Nodes 0..m are rows, m..m+n columns.
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        if node < m {
            let i = node;
            let ui = u[i].clone().expect("visited rows have potentials");
            for j in 0..n {
                if basic[i][j] && v[j].is_none() {
                    v[j] = Some(&c[i][j] - &ui);
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = node - m;
            let vj = v[j].clone().expect("visited columns have potentials");
            for i in 0..m {
                if basic[i][j] && u[i].is_none() {
                    u[i] = Some(&c[i][j] - &vj);
                    queue.push_back(i);
                }
            }
        }
    }
    let fill = |p: Vec<Option<BigRational>>| {
        p.into_iter()
            .map(|x| x.expect("the basis is a spanning tree"))
            .collect()
    };
    (fill(u), fill(v))
}

/// Basic cells on the tree path from column `col` to row `row`.
fn tree_path(basic: &[Vec<bool>], col: usize, row: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    let start = m + col;
    let mut parent: Vec<Option<usize>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == row {
            break;
        }
        let neighbours: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for nb in neighbours {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(node);
                queue.push_back(nb);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = row;
    while node != start {
        let p = parent[node].expect("row and column are connected in the basis");
        let cell = if node < m { (node, p - m) } else { (p, node - m) };
        cells.push(cell);
        node = p;
    }
    cells.reverse();
    cells
}

/// Least `θ` such that some coupling only uses cells with cost at most `θ`.
pub fn bottleneck(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    check_instance(supply, demand, cost)?;
    let a = exact_masses(supply);
    let b = exact_masses(demand);
    let mut thresholds: Vec<f64> = cost.iter().flatten().copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let (mut lo, mut hi) = (0, thresholds.len() - 1);
    // The largest threshold allows every cell, which is always feasible.
    while lo < hi {
        let mid = (lo + hi) / 2;
        if coupling_exists(&a, &b, cost, thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(thresholds[lo])
}

/// Whether the cells with cost at most `theta` carry a full coupling.
fn coupling_exists(a: &[BigRational], b: &[BigRational], cost: &[Vec<f64>], theta: f64) -> bool {
    let (m, n) = (a.len(), b.len());
    // Nodes: source, rows, columns, sink.
    let (src, sink) = (0, m + n + 1);
    let size = m + n + 2;
    let mut cap = vec![vec![BigRational::zero(); size]; size];
    let big = BigRational::from_integer(BigInt::from(2));
    for i in 0..m {
        cap[src][1 + i] = a[i].clone();
        for j in 0..n {
            if cost[i][j] <= theta {
                cap[1 + i][1 + m + j] = big.clone();
            }
        }
    }
    for j in 0..n {
        cap[1 + m + j][sink] = b[j].clone();
    }
    let mut flow = BigRational::zero();
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v].is_positive() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut push = big.clone();
        let mut v = sink;
        while v != src {
            let u = parent[v];
            push = push.min(cap[u][v].clone());
            v = u;
        }
        let mut v = sink;
        while v != src {
            let u = parent[v];
            cap[u][v] -= &push;
            cap[v][u] += &push;
            v = u;
        }
        flow += push;
    }
    flow == BigRational::one()
}
