//! Dense two-phase simplex over exact rationals with Bland's rule.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<BigRational>,
        value: BigRational,
    },
    Infeasible,
}

struct Tableau {
    /// Rows `[coefficients | rhs]`.
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.rows[0].len() - 1
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Minimizes `cost · x` over the columns in `allowed`.
    fn run(&mut self, cost: &[BigRational], allowed: usize) -> Result<()> {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut r = cost[j].clone();
                for (i, &bi) in self.basis.iter().enumerate() {
                    r -= &cost[bi] * &self.rows[i][j];
                }
                r.is_negative()
            });
            let Some(j) = entering else { return Ok(()) };
            let rhs = self.rhs();
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][rhs] / &self.rows[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Invalid("linear program is unbounded".into()));
            };
            if self.pivots == self.max_pivots {
                return Err(Error::CapExceeded {
                    what: "simplex pivots",
                    needed: self.pivots + 1,
                    cap: self.max_pivots,
                });
            }
            self.pivots += 1;
            self.pivot(r, j);
        }
    }
}

/// Minimizes `c · x` subject to `A x = b`, `x ≥ 0`.
pub(crate) fn minimize(
    a: &[Vec<BigRational>],
    b: &[BigRational],
    c: &[BigRational],
    max_pivots: usize,
) -> Result<LpOutcome> {
    let (m, n) = (a.len(), c.len());
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Invalid("linear program has inconsistent dimensions".into()));
    }
    // Artificial columns n..n+m, one per row, with nonnegative right-hand sides.
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<BigRational> = row
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        r.extend((0..m).map(|k| {
            if k == i {
                BigRational::from_integer(1.into())
            } else {
                BigRational::zero()
            }
        }));
        r.push(if flip { -bi.clone() } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        pivots: 0,
        max_pivots,
    };
    if m == 0 {
        return Ok(LpOutcome::Optimal {
            x: vec![BigRational::zero(); n],
            value: BigRational::zero(),
        });
    }
    let phase1: Vec<BigRational> = (0..n + m)
        .map(|j| BigRational::from_integer(i64::from(j >= n).into()))
        .collect();
    t.run(&phase1, n + m)?;
    let rhs = t.rhs();
    let infeasibility = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bi)| bi >= n)
        .fold(BigRational::zero(), |acc, (i, _)| acc + &t.rows[i][rhs]);
    if infeasibility.is_positive() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut phase2 = c.to_vec();
    phase2.extend((0..m).map(|_| BigRational::zero()));
    if !t.rows.is_empty() {
        t.run(&phase2, n)?;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &bi) in t.basis.iter().enumerate() {
        x[bi] = t.rows[i][rhs].clone();
    }
    let value = x
        .iter()
        .zip(c)
        .fold(BigRational::zero(), |acc, (xi, ci)| acc + xi * ci);
    Ok(LpOutcome::Optimal { x, value })
}
