//! Contextual closure along an algebra, in general (by enumeration) and for
//! the union algebra on subset states (by thresholding).

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flift::{EvaluationMap, FunctorValue};
use crate::quantale::{Quantale, QuantaleId, QuantaleValue};
use crate::systems::SubsetState;
use crate::vrel::{Key, RelView, VRel};

use super::{Relation, Technique};

/// Sort key putting better (quantale-larger) values first.
fn rank(q: Quantale, v: QuantaleValue) -> f64 {
    match q.id() {
        QuantaleId::Bool2 => 1.0 - q.to_real(v),
        _ => q.to_real(v),
    }
}

/// Union-congruence closure of `d` queried at `(q1, q2)`, with singleton
/// diagonal pairs available at the unit.
///
/// Returns the best `r` such that the pairs `(A, B)` with `A ⊆ q1`,
/// `B ⊆ q2` and `d(A, B) ≥ r` cover `q1` and `q2`; the query pair itself
/// is always a candidate at `d(q1, q2)`. Two empty sets get `⊤`.
pub fn up_ctx_union(
    d: &VRel<SubsetState>,
    q1: &SubsetState,
    q2: &SubsetState,
) -> Result<QuantaleValue> {
    let q = d.quantale();
    if q1.is_empty() && q2.is_empty() {
        return Ok(q.top());
    }
    let mut cands: Vec<(QuantaleValue, &SubsetState, &SubsetState)> = d
        .entries()
        .filter(|(a, b, _)| a.is_subset(q1) && b.is_subset(q2))
        .map(|(a, b, v)| (v, a, b))
        .collect();
    let singles: Vec<SubsetState> = q1
        .intersection(q2)
        .iter()
        .map(|s| SubsetState::singleton(q1.capacity(), s))
        .collect();
    for s in &singles {
        cands.push((q.unit(), s, s));
    }
    cands.push((d.get(q1, q2), q1, q2));
    cands.sort_by(|a, b| rank(q, a.0).total_cmp(&rank(q, b.0)));

    let mut u1 = SubsetState::empty(q1.capacity());
    let mut u2 = u1.clone();
    for (v, a, b) in cands {
        u1.union_with(a);
        u2.union_with(b);
        if &u1 == q1 && &u2 == q2 {
            return Ok(v);
        }
    }
    Ok(q.bottom())
}

/// Lazy union-congruence closure of an explicit relation.
pub struct CtxUnionView(Arc<VRel<SubsetState>>);

impl RelView<SubsetState> for CtxUnionView {
    fn quantale(&self) -> Quantale {
        self.0.quantale()
    }

    fn get(&self, x: &SubsetState, y: &SubsetState) -> Result<QuantaleValue> {
        up_ctx_union(&self.0, x, y)
    }
}

impl Technique<SubsetState> {
    /// Union-congruence closure after reflexive closure on singletons.
    pub fn ctx_union() -> Self {
        Technique::new(
            "ctx-union",
            vec![
                "canonical powerset lifting".into(),
                "determinization is a bialgebra for the union algebra".into(),
            ],
            |d| match d {
                Relation::Sparse(r) => Ok(Relation::View(Arc::new(CtxUnionView(r.clone())))),
                Relation::View(_) => Err(Error::Usage(
                    "ctx-union needs an explicit relation; apply it before lazy techniques".into(),
                )),
            },
        )
    }
}

/// Dense cache of `d` on `left × right`, keyed by local indices with the
/// right side offset by `left.len()`.
struct LocalTable {
    quantale: Quantale,
    offset: usize,
    width: usize,
    values: Vec<QuantaleValue>,
}

impl RelView<usize> for LocalTable {
    fn quantale(&self) -> Quantale {
        self.quantale
    }

    fn get(&self, x: &usize, y: &usize) -> Result<QuantaleValue> {
        Ok(self.values[x * self.width + (y - self.offset)])
    }
}

/// Contextual closure along an algebra given by an explicit enumeration of
/// `(u, α(u))`: the join of the lifted distances between all `u1, u2` with
/// `α(u1) = x1` and `α(u2) = x2`.
pub fn up_ctx<K, R>(
    d: &R,
    ev: &EvaluationMap,
    algebra: &[(FunctorValue<K>, K)],
    x1: &K,
    x2: &K,
    cap: usize,
) -> Result<QuantaleValue>
where
    K: Key,
    R: RelView<K> + ?Sized,
{
    if algebra.len() > cap {
        return Err(Error::CapExceeded {
            what: "algebra enumeration (use the union-congruence closure instead)",
            needed: algebra.len(),
            cap,
        });
    }
    let q = ev.quantale();
    let pre1: Vec<&FunctorValue<K>> = algebra.iter().filter(|(_, x)| x == x1).map(|(u, _)| u).collect();
    let pre2: Vec<&FunctorValue<K>> = algebra.iter().filter(|(_, x)| x == x2).map(|(u, _)| u).collect();
    let index = |us: &[&FunctorValue<K>]| {
        let mut idx: HashMap<K, usize> = HashMap::new();
        let mut elems: Vec<K> = Vec::new();
        for u in us {
            for x in u.elements() {
                if !idx.contains_key(x) {
                    idx.insert(x.clone(), elems.len());
                    elems.push(x.clone());
                }
            }
        }
        (idx, elems)
    };
    let (idx1, left) = index(&pre1);
    let (idx2, right) = index(&pre2);
    let offset = left.len();
    let mut values = Vec::with_capacity(left.len() * right.len());
    for a in &left {
        for b in &right {
            values.push(d.get(a, b)?);
        }
    }
    let table = LocalTable {
        quantale: q,
        offset,
        width: right.len(),
        values,
    };
    let local1: Vec<FunctorValue<usize>> = pre1.iter().map(|u| u.map(|x| idx1[x])).collect();
    let local2: Vec<FunctorValue<usize>> =
        pre2.iter().map(|u| u.map(|x| offset + idx2[x])).collect();
    let mut best = q.bottom();
    for u1 in &local1 {
        for u2 in &local2 {
            best = q.join2(best, ev.wasserstein(&table, u1, u2)?)?;
        }
    }
    Ok(best)
}

/// The union algebra `P(P Q) → P Q` on all subsets of `width` states.
pub fn union_algebra(width: usize, cap: usize) -> Result<Vec<(FunctorValue<SubsetState>, SubsetState)>> {
    let subsets: Vec<SubsetState> = (0u64..1 << width)
        .map(|m| SubsetState::from_states(width, (0..width).filter(|i| m & (1 << i) != 0)))
        .collect();
    let count = 1usize.checked_shl(subsets.len() as u32).unwrap_or(usize::MAX);
    if subsets.len() >= usize::BITS as usize || count > cap {
        return Err(Error::CapExceeded {
            what: "union algebra elements",
            needed: count,
            cap,
        });
    }
    Ok((0..count)
        .map(|m| {
            let members: Vec<SubsetState> = (0..subsets.len())
                .filter(|i| m & (1 << i) != 0)
                .map(|i| subsets[i].clone())
                .collect();
            let joined = members
                .iter()
                .fold(SubsetState::empty(width), |acc, s| acc.union(s));
            (FunctorValue::pow(members), joined)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::QuantaleValue::Real;
    use crate::systems::gen_fig1;

    #[test]
    fn two_chain_decomposition() {
        let nfa = gen_fig1(3).unwrap();
        let c: f64 = 0.5;
        let mut d = VRel::bottom(Quantale::unit_interval());
        for i in 0..=3usize {
            for j in 0..=3usize {
                let xi = nfa.subset(&[format!("x{i}")]).unwrap();
                let yj = nfa.subset(&[format!("y{j}")]).unwrap();
                d.set(xi, yj, Real(c.powi(3 - i.max(j) as i32))).unwrap();
            }
        }
        let q1 = nfa.subset(&["x0", "x1"]).unwrap();
        let q2 = nfa.subset(&["y0"]).unwrap();
        assert_eq!(up_ctx_union(&d, &q1, &q2).unwrap(), Real(0.25));
        let empty = SubsetState::empty(nfa.num_states());
        assert_eq!(up_ctx_union(&d, &empty, &empty).unwrap(), Real(0.0));
        let x0 = nfa.subset(&["x0"]).unwrap();
        assert_eq!(up_ctx_union(&d, &x0, &q2).unwrap(), Real(0.125));
        // Nothing covers y1 on the right.
        let y01 = nfa.subset(&["y0", "y1", "x1"]).unwrap();
        assert_eq!(up_ctx_union(&d, &x0, &y01).unwrap(), Real(1.0));
    }

    #[test]
    fn singleton_diagonals_are_implicit() {
        let d = VRel::bottom(Quantale::unit_interval());
        let s = SubsetState::from_states(3, [0, 2]);
        assert_eq!(up_ctx_union(&d, &s, &s).unwrap(), Real(0.0));
        let t = SubsetState::from_states(3, [0, 1]);
        assert_eq!(up_ctx_union(&d, &s, &t).unwrap(), Real(1.0));
    }

    #[test]
    fn generic_closure_on_free_singletons_is_extensive() {
        let q = Quantale::unit_interval();
        let mut d = VRel::bottom(q);
        d.set(0usize, 1usize, Real(0.4)).unwrap();
        let ev = EvaluationMap::pow_canonical(q);
        let algebra: Vec<(FunctorValue<usize>, usize)> =
            (0..3).map(|x| (FunctorValue::pow([x]), x)).collect();
        assert_eq!(up_ctx(&d, &ev, &algebra, &0, &1, 100).unwrap(), Real(0.4));
        assert!(up_ctx(&d, &ev, &algebra, &0, &1, 2).is_err());
    }

    #[test]
    fn union_algebra_size() {
        assert_eq!(union_algebra(2, 100).unwrap().len(), 16);
        assert!(union_algebra(4, 1000).is_err());
    }
}
