//! The behaviour map `b = ξ* ∘ F̄` of a coalgebra, its greatest fixpoint by
//! Kleene iteration, and certification of up-to witnesses.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::flift::{EvaluationMap, FunctorValue};
use crate::quantale::{Quantale, QuantaleValue};
use crate::systems::Coalgebra;
use crate::vrel::{Key, RelView, VRel};

mod probe;
mod witness;

pub use probe::{compatibility_probe, sample_relation, ProbeCounterexample, ProbeReport};
pub use witness::{check_witness, Claim, ClaimJson, Failure, Verdict, Witness, WitnessJson};

/// A monotone map on relations, evaluated one pair at a time.
pub trait MonotoneMap<K: Key>: Send + Sync {
    fn quantale(&self) -> Quantale;

    /// `b(d)(x, y)`.
    fn eval_at(&self, d: &dyn RelView<K>, x: &K, y: &K) -> Result<QuantaleValue>;

    /// The pairs whose `d`-values `eval_at(d, x, y)` may read.
    fn dependencies(&self, x: &K, y: &K) -> Vec<(K, K)>;
}

/// `b(d)(x, y) = F̄d(ξ(x), ξ(y))` for a coalgebra `ξ` and the Wasserstein
/// lifting of an evaluation map.
pub struct BehaviourMap<C> {
    coalg: C,
    ev: EvaluationMap,
}

/// Builds `b` for `coalg`, checking that `ev` belongs to its functor.
pub fn build_b<C: Coalgebra>(coalg: C, ev: EvaluationMap) -> Result<BehaviourMap<C>> {
    if coalg.functor() != ev.functor() {
        return Err(Error::FunctorMismatch(format!(
            "coalgebra for {} paired with an evaluation map for {}",
            coalg.functor(),
            ev.functor()
        )));
    }
    Ok(BehaviourMap { coalg, ev })
}

impl<C: Coalgebra> BehaviourMap<C> {
    pub fn coalgebra(&self) -> &C {
        &self.coalg
    }

    pub fn evaluation_map(&self) -> &EvaluationMap {
        &self.ev
    }
}

impl<C: Coalgebra> MonotoneMap<C::State> for BehaviourMap<C> {
    fn quantale(&self) -> Quantale {
        self.ev.quantale()
    }

    fn eval_at(&self, d: &dyn RelView<C::State>, x: &C::State, y: &C::State) -> Result<QuantaleValue> {
        self.ev
            .wasserstein(d, &self.coalg.step(x), &self.coalg.step(y))
    }

    fn dependencies(&self, x: &C::State, y: &C::State) -> Vec<(C::State, C::State)> {
        match (self.coalg.step(x), self.coalg.step(y)) {
            (
                FunctorValue::Machine { accept: a1, succ: s1 },
                FunctorValue::Machine { accept: a2, succ: s2 },
            ) => {
                if a1 != a2 {
                    return Vec::new();
                }
                let mut out: Vec<_> = s1.into_iter().zip(s2).collect();
                out.dedup();
                out
            }
            (u1, u2) => {
                let mut out = Vec::new();
                for a in u1.elements() {
                    for b in u2.elements() {
                        out.push((a.clone(), b.clone()));
                    }
                }
                out.sort();
                out.dedup();
                out
            }
        }
    }
}

/// Pairs reachable from `start` along [`MonotoneMap::dependencies`], in
/// sorted order.
pub fn reachable_pairs<K, B>(b: &B, start: &[(K, K)], cap: usize) -> Result<Vec<(K, K)>>
where
    K: Key,
    B: MonotoneMap<K> + ?Sized,
{
    let mut seen: HashSet<(K, K)> = HashSet::new();
    let mut queue: VecDeque<(K, K)> = VecDeque::new();
    for p in start {
        if seen.insert(p.clone()) {
            queue.push_back(p.clone());
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for p in b.dependencies(&x, &y) {
            if !seen.contains(&p) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded {
                        what: "reachable state pairs",
                        needed: seen.len() + 1,
                        cap,
                    });
                }
                seen.insert(p.clone());
                queue.push_back(p);
            }
        }
    }
    let mut out: Vec<(K, K)> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfpOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GfpOptions {
    fn default() -> Self {
        GfpOptions {
            tol: 1e-9,
            max_iter: 100_000,
        }
    }
}

/// The last Kleene iterate on an enumerated set of pairs.
#[derive(Clone, Debug)]
pub struct GfpResult<K> {
    quantale: Quantale,
    pairs: Vec<(K, K)>,
    index: HashMap<(K, K), usize>,
    values: Vec<QuantaleValue>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest pointwise change in the final iteration.
    pub last_change: f64,
}

impl<K: Key> GfpResult<K> {
    pub fn get(&self, x: &K, y: &K) -> Option<QuantaleValue> {
        self.index.get(&(x.clone(), y.clone())).map(|&i| self.values[i])
    }

    pub fn pairs(&self) -> &[(K, K)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &K, QuantaleValue)> {
        self.pairs
            .iter()
            .zip(&self.values)
            .map(|((x, y), v)| (x, y, *v))
    }

    /// The iterate as a sparse relation with default `⊥` off the
    /// enumerated pairs.
    pub fn to_vrel(&self) -> Result<VRel<K>> {
        let mut r = VRel::bottom(self.quantale);
        for (x, y, v) in self.iter() {
            r.set(x.clone(), y.clone(), v)?;
        }
        Ok(r)
    }
}

impl<K: Key> RelView<K> for GfpResult<K> {
    fn quantale(&self) -> Quantale {
        self.quantale
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        GfpResult::get(self, x, y).ok_or_else(|| {
            Error::Usage(format!("pair ({x:?}, {y:?}) is outside the enumerated carrier"))
        })
    }
}

struct Table<'a, K> {
    quantale: Quantale,
    index: &'a HashMap<(K, K), usize>,
    values: &'a [QuantaleValue],
}

impl<K: Key> RelView<K> for Table<'_, K> {
    fn quantale(&self) -> Quantale {
        self.quantale
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        match self.index.get(&(x.clone(), y.clone())) {
            Some(&i) => Ok(self.values[i]),
            None => Err(Error::Usage(format!(
                "pair ({x:?}, {y:?}) is outside the enumerated carrier"
            ))),
        }
    }
}

/// Kleene iteration `d₀ = ⊤`, `d_{k+1} = b(d_k)` on `pairs`, which must be
/// closed under the dependencies of `b`.
pub fn gfp<K, B>(b: &B, pairs: Vec<(K, K)>, opts: GfpOptions) -> Result<GfpResult<K>>
where
    K: Key,
    B: MonotoneMap<K> + ?Sized,
{
    if !(opts.tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {} must be positive", opts.tol)));
    }
    let q = b.quantale();
    let mut index = HashMap::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        index.insert(p.clone(), i);
    }
    for (x, y) in &pairs {
        if let Some(p) = b.dependencies(x, y).into_iter().find(|p| !index.contains_key(p)) {
            return Err(Error::Usage(format!(
                "pair set is not closed: ({x:?}, {y:?}) depends on {p:?}; enumerate reachable pairs first"
            )));
        }
    }
    let mut values = vec![q.top(); pairs.len()];
    let mut iterations = 0;
    let mut converged = false;
    let mut last_change = 0.0;
    while iterations < opts.max_iter {
        let table = Table {
            quantale: q,
            index: &index,
            values: &values,
        };
        let next = pairs
            .iter()
            .map(|(x, y)| b.eval_at(&table, x, y))
            .collect::<Result<Vec<_>>>()?;
        let mut change: f64 = 0.0;
        for (a, n) in values.iter().zip(&next) {
            change = change.max(q.distance(*a, *n)?);
        }
        values = next;
        iterations += 1;
        last_change = change;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(GfpResult {
        quantale: q,
        pairs,
        index,
        values,
        iterations,
        converged,
        last_change,
    })
}
