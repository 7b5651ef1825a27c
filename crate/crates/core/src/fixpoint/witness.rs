//! Up-to witnesses: sparse relations `d` with `d ≤ b(f(d))` certifying a
//! bound at one claimed pair.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantale::{Quantale, QuantaleId, QuantaleValue};
use crate::systems::{Nfa, SubsetState};
use crate::upto::{Relation, Technique};
use crate::vrel::{Key, RelView, VRel};

use super::MonotoneMap;

/// The pair a witness vouches for and the value it claims there.
#[derive(Clone, Debug, PartialEq)]
pub struct Claim<K> {
    pub left: K,
    pub right: K,
    pub bound: QuantaleValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness<K> {
    pub rel: VRel<K>,
    pub claim: Claim<K>,
    /// Discount recorded with the witness, if any.
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimJson {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub bound: serde_json::Value,
}

/// File format of witnesses over subset states, states given by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub quantale: QuantaleId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub claim: ClaimJson,
    pub entries: Vec<(Vec<String>, Vec<String>, serde_json::Value)>,
    pub default: serde_json::Value,
}

impl Witness<SubsetState> {
    /// `d({xi},{yj}) = c^(n − max(i, j))` on an automaton with states named
    /// `x0..xn`, `y0..yn`, claiming `c^n` at `({x0},{y0})`.
    pub fn fig1(nfa: &Nfa, n: usize, c: f64) -> Result<Self> {
        let q = Quantale::unit_interval();
        let mut rel = VRel::bottom(q);
        for i in 0..=n {
            for j in 0..=n {
                let xi = nfa.subset(&[format!("x{i}")])?;
                let yj = nfa.subset(&[format!("y{j}")])?;
                rel.set(xi, yj, q.from_real(c.powi((n - i.max(j)) as i32))?)?;
            }
        }
        Ok(Witness {
            rel,
            claim: Claim {
                left: nfa.subset(&["x0"])?,
                right: nfa.subset(&["y0"])?,
                bound: q.from_real(c.powi(n as i32))?,
            },
            c: Some(c),
        })
    }

    pub fn from_json(nfa: &Nfa, j: &WitnessJson) -> Result<Self> {
        let q = Quantale::new(j.quantale);
        if q.decode(&j.default)? != q.bottom() {
            return Err(Error::Invalid("witness default must be the quantale bottom".into()));
        }
        let mut rel = VRel::bottom(q);
        for (l, r, v) in &j.entries {
            rel.set(nfa.subset(l)?, nfa.subset(r)?, q.decode(v)?)?;
        }
        Ok(Witness {
            rel,
            claim: Claim {
                left: nfa.subset(&j.claim.left)?,
                right: nfa.subset(&j.claim.right)?,
                bound: q.decode(&j.claim.bound)?,
            },
            c: j.c,
        })
    }

    pub fn to_json(&self, nfa: &Nfa) -> WitnessJson {
        let q = self.rel.quantale();
        WitnessJson {
            quantale: q.id(),
            c: self.c,
            claim: ClaimJson {
                left: nfa.subset_names(&self.claim.left),
                right: nfa.subset_names(&self.claim.right),
                bound: q.encode(self.claim.bound),
            },
            entries: self
                .rel
                .entries()
                .map(|(l, r, v)| (nfa.subset_names(l), nfa.subset_names(r), q.encode(v)))
                .collect(),
            default: q.encode(q.bottom()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Failure<K> {
    /// The witness is below the claimed bound at the claim pair.
    ClaimAboveWitness { witness: QuantaleValue },
    /// `d(x, y) ≤ b(f(d))(x, y)` fails. `successor` is the dependency with
    /// the least `f(d)` value.
    NotPostFixpoint {
        left: K,
        right: K,
        witness: QuantaleValue,
        lifted: QuantaleValue,
        successor: Option<(K, K)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<K> {
    pub certified: bool,
    pub claim: Claim<K>,
    /// Pairs at which `d ≤ b(f(d))` was evaluated.
    pub pairs_checked: usize,
    /// Of those, pairs one step from the claim outside the support.
    pub frontier: usize,
    pub technique: String,
    pub failure: Option<Failure<K>>,
}

/// Checks `d ≤ b(f(d))` at the claim pair, on the support of `d` and at the
/// one-step successors of the claim pair.
///
/// Success certifies `νb(claim) ≥ bound` in quantale order. Techniques
/// without a compatibility basis are refused unless `allow_unsafe`.
pub fn check_witness<K, B>(
    w: &Witness<K>,
    b: &B,
    f: &Technique<K>,
    allow_unsafe: bool,
) -> Result<Verdict<K>>
where
    K: Key,
    B: MonotoneMap<K> + ?Sized,
{
    if !f.is_justified() && !allow_unsafe {
        return Err(Error::Usage(format!(
            "technique `{}` has no compatibility basis; pass --unsafe to use it anyway",
            f.name()
        )));
    }
    let q = b.quantale();
    if w.rel.quantale().id() != q.id() {
        return Err(Error::QuantaleMismatch {
            expected: q.id(),
            found: w.rel.quantale().id(),
        });
    }
    if w.rel.default_value() != q.bottom() || w.rel.diagonal_value().is_some() {
        return Err(Error::Invalid(
            "witness must be sparse with default ⊥ and no diagonal".into(),
        ));
    }
    let claim = w.claim.clone();
    let mut verdict = Verdict {
        certified: false,
        claim: claim.clone(),
        pairs_checked: 0,
        frontier: 0,
        technique: f.name().to_string(),
        failure: None,
    };
    let at_claim = w.rel.get(&claim.left, &claim.right);
    if !q.leq(claim.bound, at_claim)? {
        verdict.failure = Some(Failure::ClaimAboveWitness { witness: at_claim });
        return Ok(verdict);
    }

    let claim_pair = (claim.left.clone(), claim.right.clone());
    let support: BTreeSet<(K, K)> = w
        .rel
        .entries()
        .map(|(x, y, _)| (x.clone(), y.clone()))
        .collect();
    let mut order: Vec<(K, K)> = vec![claim_pair.clone()];
    order.extend(support.iter().filter(|p| **p != claim_pair).cloned());
    let mut frontier: Vec<(K, K)> = b
        .dependencies(&claim.left, &claim.right)
        .into_iter()
        .filter(|p| *p != claim_pair && !support.contains(p))
        .collect();
    frontier.sort();
    frontier.dedup();
    verdict.frontier = frontier.len();
    order.extend(frontier);

    let fd = f.apply(&Relation::Sparse(Arc::new(w.rel.clone())))?;
    for (x, y) in order {
        verdict.pairs_checked += 1;
        let lhs = w.rel.get(&x, &y);
        let rhs = b.eval_at(&fd, &x, &y)?;
        if !q.leq(lhs, rhs)? {
            let mut worst: Option<((K, K), QuantaleValue)> = None;
            for p in b.dependencies(&x, &y) {
                let v = fd.get(&p.0, &p.1)?;
                if worst.as_ref().is_none_or(|(_, wv)| !q.leq(*wv, v).unwrap_or(true)) {
                    worst = Some((p, v));
                }
            }
            verdict.failure = Some(Failure::NotPostFixpoint {
                left: x,
                right: y,
                witness: lhs,
                lifted: rhs,
                successor: worst.map(|(p, _)| p),
            });
            return Ok(verdict);
        }
    }
    verdict.certified = true;
    Ok(verdict)
}
