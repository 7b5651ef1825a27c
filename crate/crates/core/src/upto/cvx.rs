//! Convex closure for relations between distributions.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::flift::transport::exact;
use crate::lp::{minimize, LpOutcome};
use crate::quantale::{Quantale, QuantaleId, QuantaleValue};
use crate::vrel::{RelView, VRel};

use super::{Relation, Technique};

const LP_PIVOTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvxResult {
    pub value: QuantaleValue,
    /// Set when components were dropped to respect the cap. The value is
    /// still an upper bound on the real distance of the closure.
    pub lower_confidence: bool,
}

/// `inf { Σ p_i · d(Δ_i, Θ_i) | Δ = Σ p_i Δ_i, Θ = Σ p_i Θ_i }` with the
/// components `(Δ_i, Θ_i)` restricted to explicit entries of `d` and pairs
/// of point-mass states.
///
/// State `i` of `d` stands for the distribution `dists[i]` over base points;
/// the query is given by two mass vectors over the same base points.
pub fn up_cvx(
    d: &VRel<usize>,
    dists: &[Vec<f64>],
    query: (&[f64], &[f64]),
    cap: usize,
) -> Result<CvxResult> {
    let q = d.quantale();
    if !q.id().is_real() {
        return Err(Error::QuantaleMismatch {
            expected: QuantaleId::UnitIntervalRev,
            found: q.id(),
        });
    }
    let points = query.0.len();
    if query.1.len() != points || dists.iter().any(|m| m.len() != points) {
        return Err(Error::CarrierMismatch(
            "distribution vectors must share the base points".into(),
        ));
    }
    let mut comps: Vec<(usize, usize, f64)> = d
        .entries()
        .filter(|(i, j, _)| **i < dists.len() && **j < dists.len())
        .map(|(i, j, v)| (*i, *j, q.to_real(v)))
        .collect();
    let is_point = |m: &Vec<f64>| m.iter().filter(|&&x| x > 0.0).count() == 1;
    let point_states: Vec<usize> = (0..dists.len()).filter(|&i| is_point(&dists[i])).collect();
    for &i in &point_states {
        for &j in &point_states {
            if !comps.iter().any(|c| c.0 == i && c.1 == j) {
                comps.push((i, j, q.to_real(d.get(&i, &j))));
            }
        }
    }
    comps.retain(|c| c.2.is_finite());
    comps.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let lower_confidence = comps.len() > cap;
    comps.truncate(cap);

    // One row per base point and side; one column per component.
    let mut a = vec![vec![BigRational::zero(); comps.len()]; 2 * points];
    for (k, &(i, j, _)) in comps.iter().enumerate() {
        for p in 0..points {
            a[p][k] = exact(dists[i][p]);
            a[points + p][k] = exact(dists[j][p]);
        }
    }
    let b: Vec<BigRational> = query.0.iter().chain(query.1).map(|&m| exact(m)).collect();
    let cost: Vec<BigRational> = comps.iter().map(|c| exact(c.2)).collect();
    let value = match minimize(&a, &b, &cost, LP_PIVOTS)? {
        LpOutcome::Infeasible => q.bottom(),
        LpOutcome::Optimal { x, .. } => {
            let total: f64 = x
                .iter()
                .zip(&comps)
                .map(|(w, c)| w.to_f64().unwrap_or(0.0) * c.2)
                .sum();
            q.from_real(total)?
        }
    };
    Ok(CvxResult {
        value,
        lower_confidence,
    })
}

/// Lazy convex closure over a fixed family of distribution states.
pub struct CvxView {
    rel: Arc<VRel<usize>>,
    dists: Arc<Vec<Vec<f64>>>,
    cap: usize,
}

impl RelView<usize> for CvxView {
    fn quantale(&self) -> Quantale {
        self.rel.quantale()
    }

    fn get(&self, x: &usize, y: &usize) -> Result<QuantaleValue> {
        let (Some(dx), Some(dy)) = (self.dists.get(*x), self.dists.get(*y)) else {
            return Ok(self.rel.get(x, y));
        };
        let v = up_cvx(&self.rel, &self.dists, (dx, dy), self.cap)?.value;
        self.quantale().join2(v, self.rel.get(x, y))
    }
}

impl Technique<usize> {
    /// Convex closure; state `i` denotes the distribution `dists[i]`.
    pub fn convex(dists: Vec<Vec<f64>>, cap: usize) -> Self {
        let dists = Arc::new(dists);
        Technique::new(
            "cvx",
            vec!["trace-metric settings only".into()],
            move |d| match d {
                Relation::Sparse(r) => Ok(Relation::View(Arc::new(CvxView {
                    rel: r.clone(),
                    dists: dists.clone(),
                    cap,
                }))),
                Relation::View(_) => Err(Error::Usage(
                    "cvx needs an explicit relation; apply it before lazy techniques".into(),
                )),
            },
        )
    }
}
