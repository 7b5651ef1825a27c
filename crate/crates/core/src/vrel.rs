//! Quantale-valued predicates and relations on finite (or virtual) carriers.
//!
//! Relations are stored sparsely: an explicit `default` value covers every
//! pair that has no entry. A relation may also carry a `diagonal` value that
//! covers every pair `(x, x)` without an entry; this keeps reflexive closures
//! representable when the carrier is only known lazily (subset states of a
//! determinized automaton, for instance).
//!
//! Operations that have to enumerate the carrier take an explicit
//! [`Carrier`]. Everything else works on the sparse representation alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantale::{Quantale, QuantaleValue};

/// Requirements on carrier elements.
pub trait Key: Ord + Clone + Hash + Debug + Send + Sync + 'static {}

impl<T: Ord + Clone + Hash + Debug + Send + Sync + 'static> Key for T {}

/// A finite enumeration of carrier elements, with optional display labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Carrier<K = usize> {
    elems: Vec<K>,
    labels: Option<Vec<String>>,
}

impl Carrier<usize> {
    /// The carrier `{0, …, size-1}`.
    pub fn indexed(size: usize) -> Self {
        Carrier {
            elems: (0..size).collect(),
            labels: None,
        }
    }

    pub fn labelled(labels: Vec<String>) -> Self {
        Carrier {
            elems: (0..labels.len()).collect(),
            labels: Some(labels),
        }
    }
}

impl<K: Key> Carrier<K> {
    /// Builds a carrier from explicit elements; duplicates are dropped and
    /// first occurrences keep their position.
    pub fn from_elems(elems: Vec<K>) -> Self {
        let mut seen = BTreeSet::new();
        let elems = elems.into_iter().filter(|e| seen.insert(e.clone())).collect();
        Carrier {
            elems,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.elems.len() {
            return Err(Error::CarrierMismatch(format!(
                "{} labels for {} elements",
                labels.len(),
                self.elems.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[K] {
        &self.elems
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(i)).map(String::as_str)
    }

    /// All ordered pairs of elements.
    pub fn pairs(&self) -> impl Iterator<Item = (&K, &K)> + '_ {
        self.elems
            .iter()
            .flat_map(move |x| self.elems.iter().map(move |y| (x, y)))
    }
}

/// Read access to a relation, possibly computed on demand.
pub trait RelView<K>: Send + Sync {
    fn quantale(&self) -> Quantale;
    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue>;
}

/// A `V`-valued predicate `X → V`.
#[derive(Clone, Debug, PartialEq)]
pub struct VPred<K = usize> {
    quantale: Quantale,
    default: QuantaleValue,
    values: BTreeMap<K, QuantaleValue>,
}

impl<K: Key> VPred<K> {
    pub fn constant(quantale: Quantale, default: QuantaleValue) -> Result<Self> {
        quantale.check(default)?;
        Ok(VPred {
            quantale,
            default,
            values: BTreeMap::new(),
        })
    }

    pub fn from_fn<F>(quantale: Quantale, carrier: &Carrier<K>, mut f: F) -> Result<Self>
    where
        F: FnMut(&K) -> QuantaleValue,
    {
        let mut p = Self::constant(quantale, quantale.bottom())?;
        for x in carrier.elems() {
            p.set(x.clone(), f(x))?;
        }
        Ok(p)
    }

    pub fn quantale(&self) -> Quantale {
        self.quantale
    }

    pub fn default_value(&self) -> QuantaleValue {
        self.default
    }

    pub fn set(&mut self, x: K, v: QuantaleValue) -> Result<()> {
        self.quantale.check(v)?;
        if v == self.default {
            self.values.remove(&x);
        } else {
            self.values.insert(x, v);
        }
        Ok(())
    }

    pub fn get(&self, x: &K) -> QuantaleValue {
        self.values.get(x).copied().unwrap_or(self.default)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&K, QuantaleValue)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    /// Pointwise tensor `(p ⊗ q)(x) = p(x) ⊗ q(x)`.
    pub fn tensor(&self, other: &VPred<K>) -> Result<VPred<K>> {
        let q = self.quantale;
        let mut out = VPred::constant(q, q.tensor(self.default, other.default)?)?;
        let keys: BTreeSet<&K> = self.values.keys().chain(other.values.keys()).collect();
        for k in keys {
            out.set(k.clone(), q.tensor(self.get(k), other.get(k))?)?;
        }
        Ok(out)
    }

    pub fn leq_on(&self, other: &VPred<K>, carrier: &Carrier<K>) -> Result<bool> {
        for x in carrier.elems() {
            if !self.quantale.leq(self.get(x), other.get(x))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A `V`-valued relation `X × X → V`.
#[derive(Clone, Debug, PartialEq)]
pub struct VRel<K = usize> {
    quantale: Quantale,
    default: QuantaleValue,
    diagonal: Option<QuantaleValue>,
    entries: BTreeMap<(K, K), QuantaleValue>,
}

impl<K: Key> VRel<K> {
    pub fn constant(quantale: Quantale, default: QuantaleValue) -> Result<Self> {
        quantale.check(default)?;
        Ok(VRel {
            quantale,
            default,
            diagonal: None,
            entries: BTreeMap::new(),
        })
    }

    /// The constant `⊥` relation.
    pub fn bottom(quantale: Quantale) -> Self {
        VRel {
            quantale,
            default: quantale.bottom(),
            diagonal: None,
            entries: BTreeMap::new(),
        }
    }

    /// The diagonal relation: unit on `(x, x)`, `⊥` elsewhere. Valid for any
    /// carrier, including virtual ones.
    pub fn diagonal(quantale: Quantale) -> Self {
        VRel {
            quantale,
            default: quantale.bottom(),
            diagonal: Some(quantale.unit()),
            entries: BTreeMap::new(),
        }
    }

    pub fn from_fn<F>(quantale: Quantale, carrier: &Carrier<K>, mut f: F) -> Result<Self>
    where
        F: FnMut(&K, &K) -> QuantaleValue,
    {
        let mut r = Self::bottom(quantale);
        for (x, y) in carrier.pairs() {
            r.set(x.clone(), y.clone(), f(x, y))?;
        }
        Ok(r)
    }

    pub fn quantale(&self) -> Quantale {
        self.quantale
    }

    pub fn default_value(&self) -> QuantaleValue {
        self.default
    }

    pub fn diagonal_value(&self) -> Option<QuantaleValue> {
        self.diagonal
    }

    fn fallback(&self, x: &K, y: &K) -> QuantaleValue {
        match self.diagonal {
            Some(d) if x == y => d,
            _ => self.default,
        }
    }

    /// Overrides the value of every diagonal pair without an explicit entry.
    pub fn set_diagonal(&mut self, v: Option<QuantaleValue>) -> Result<()> {
        if let Some(v) = v {
            self.quantale.check(v)?;
        }
        self.diagonal = v;
        let fallback_diag = v.unwrap_or(self.default);
        self.entries
            .retain(|(x, y), val| !(x == y && *val == fallback_diag));
        Ok(())
    }

    pub fn set(&mut self, x: K, y: K, v: QuantaleValue) -> Result<()> {
        self.quantale.check(v)?;
        if v == self.fallback(&x, &y) {
            self.entries.remove(&(x, y));
        } else {
            self.entries.insert((x, y), v);
        }
        Ok(())
    }

    pub fn get(&self, x: &K, y: &K) -> QuantaleValue {
        self.entries
            .get(&(x.clone(), y.clone()))
            .copied()
            .unwrap_or_else(|| self.fallback(x, y))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&K, &K, QuantaleValue)> {
        self.entries.iter().map(|((x, y), v)| (x, y, *v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Elements mentioned by some explicit entry.
    pub fn support_elems(&self) -> BTreeSet<K> {
        let mut s = BTreeSet::new();
        for (x, y) in self.entries.keys() {
            s.insert(x.clone());
            s.insert(y.clone());
        }
        s
    }

    /// `r ∘ swap`.
    pub fn transpose(&self) -> VRel<K> {
        VRel {
            quantale: self.quantale,
            default: self.default,
            diagonal: self.diagonal,
            entries: self
                .entries
                .iter()
                .map(|((x, y), v)| ((y.clone(), x.clone()), *v))
                .collect(),
        }
    }

    /// Pointwise join.
    pub fn join(&self, other: &VRel<K>) -> Result<VRel<K>> {
        let q = self.quantale;
        let diagonal = match (self.diagonal, other.diagonal) {
            (None, None) => None,
            (a, b) => Some(q.join2(a.unwrap_or(self.default), b.unwrap_or(other.default))?),
        };
        let mut out = VRel {
            quantale: q,
            default: q.join2(self.default, other.default)?,
            diagonal,
            entries: BTreeMap::new(),
        };
        let keys: BTreeSet<&(K, K)> = self.entries.keys().chain(other.entries.keys()).collect();
        for (x, y) in keys {
            let v = q.join2(self.get(x, y), other.get(x, y))?;
            out.set(x.clone(), y.clone(), v)?;
        }
        Ok(out)
    }

    /// Applies `f` to every value (entries, default and diagonal).
    pub fn map_values<F>(&self, mut f: F) -> Result<VRel<K>>
    where
        F: FnMut(QuantaleValue) -> Result<QuantaleValue>,
    {
        let mut out = VRel::constant(self.quantale, f(self.default)?)?;
        if let Some(d) = self.diagonal {
            out.set_diagonal(Some(f(d)?))?;
        }
        for ((x, y), v) in &self.entries {
            out.set(x.clone(), y.clone(), f(*v)?)?;
        }
        Ok(out)
    }

    /// Pointwise order on an explicit carrier.
    pub fn leq_on(&self, other: &VRel<K>, carrier: &Carrier<K>) -> Result<bool> {
        for (x, y) in carrier.pairs() {
            if !self.quantale.leq(self.get(x, y), other.get(x, y))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn approx_eq_on(&self, other: &VRel<K>, carrier: &Carrier<K>) -> Result<bool> {
        Ok(self.leq_on(other, carrier)? && other.leq_on(self, carrier)?)
    }

    /// Pointwise order over an unbounded carrier: explicit entries of both
    /// sides are compared, and so are the default and diagonal values.
    pub fn leq_sparse(&self, other: &VRel<K>) -> Result<bool> {
        let q = self.quantale;
        if !q.leq(self.default, other.default)? {
            return Ok(false);
        }
        if !q.leq(
            self.diagonal.unwrap_or(self.default),
            other.diagonal.unwrap_or(other.default),
        )? {
            return Ok(false);
        }
        for (x, y) in self.entries.keys().chain(other.entries.keys()) {
            if !q.leq(self.get(x, y), other.get(x, y))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Relational composition `(p ⊙ q)(x, y) = ⋁_z p(x, z) ⊗ q(z, y)`,
    /// enumerating `z` over `carrier`.
    pub fn compose(&self, other: &VRel<K>, carrier: &Carrier<K>) -> Result<VRel<K>> {
        let q = self.quantale;
        let mut out = VRel::bottom(q);
        for x in carrier.elems() {
            for y in carrier.elems() {
                let mut acc = q.bottom();
                for z in carrier.elems() {
                    acc = q.join2(acc, q.tensor(self.get(x, z), other.get(z, y))?)?;
                }
                out.set(x.clone(), y.clone(), acc)?;
            }
        }
        Ok(out)
    }

    /// Composition of two relations whose default is `⊥`, without a carrier.
    /// Only explicit entries and diagonal values can contribute.
    pub fn compose_sparse(&self, other: &VRel<K>) -> Result<VRel<K>> {
        let q = self.quantale;
        let bot = q.bottom();
        if self.default != bot || other.default != bot {
            return Err(Error::Usage(
                "composing relations with a non-bottom default needs an explicit carrier".into(),
            ));
        }
        let mut acc: BTreeMap<(K, K), QuantaleValue> = BTreeMap::new();
        let mut push = |x: &K, y: &K, v: QuantaleValue| -> Result<()> {
            let slot = acc.entry((x.clone(), y.clone())).or_insert(bot);
            *slot = q.join2(*slot, v)?;
            Ok(())
        };
        let mut by_source: BTreeMap<&K, Vec<(&K, QuantaleValue)>> = BTreeMap::new();
        for ((z, y), v) in &other.entries {
            by_source.entry(z).or_default().push((y, *v));
        }
        for ((x, z), v) in &self.entries {
            if let Some(outs) = by_source.get(z) {
                for (y, w) in outs {
                    push(x, y, q.tensor(*v, *w)?)?;
                }
            }
            if other.diagonal.is_some() {
                push(x, z, q.tensor(*v, other.get(z, z))?)?;
            }
        }
        if self.diagonal.is_some() {
            for ((x, y), w) in &other.entries {
                push(x, y, q.tensor(self.get(x, x), *w)?)?;
            }
        }
        let diagonal = match (self.diagonal, other.diagonal) {
            (Some(a), Some(b)) => Some(q.tensor(a, b)?),
            _ => None,
        };
        let mut out = VRel::bottom(q);
        out.set_diagonal(diagonal)?;
        for ((x, y), v) in acc {
            let v = if x == y {
                q.join2(v, q.tensor(self.get(&x, &x), other.get(&x, &x))?)?
            } else {
                v
            };
            out.set(x, y, v)?;
        }
        Ok(out)
    }

    /// Least transitive relation above `self`, by iterating `d ∨ (d ⊙ d)`.
    ///
    /// Without a carrier the default must be `⊥`. Iteration stops once no
    /// value moves by more than the quantale tolerance, or after
    /// `|support|² + 1` rounds.
    pub fn transitive_closure(&self, carrier: Option<&Carrier<K>>) -> Result<VRel<K>> {
        let n = match carrier {
            Some(c) => c.size(),
            None => self.support_elems().len(),
        };
        let max_rounds = n * n + 1;
        let mut d = self.clone();
        for _ in 0..max_rounds {
            let sq = match carrier {
                Some(c) => d.compose(&d, c)?,
                None => d.compose_sparse(&d)?,
            };
            let next = d.join(&sq)?;
            let stable = match carrier {
                Some(c) => next.leq_on(&d, c)?,
                None => next.leq_sparse(&d)?,
            };
            d = next;
            if stable {
                break;
            }
        }
        Ok(d)
    }

    /// Dense view as a predicate on pairs (change of base `X ↦ X × X`).
    pub fn to_pred_on(&self, carrier: &Carrier<K>) -> Result<VPred<(K, K)>> {
        let mut p = VPred::constant(self.quantale, self.default)?;
        for (x, y) in carrier.pairs() {
            p.set((x.clone(), y.clone()), self.get(x, y))?;
        }
        Ok(p)
    }

    /// Inverse of [`VRel::to_pred_on`].
    pub fn from_pred(p: &VPred<(K, K)>) -> Result<VRel<K>> {
        let mut r = VRel::constant(p.quantale(), p.default_value())?;
        for ((x, y), v) in p.entries() {
            r.set(x.clone(), y.clone(), v)?;
        }
        Ok(r)
    }

    /// `Δ ≤ r` on the carrier.
    pub fn is_reflexive(&self, carrier: &Carrier<K>) -> Result<bool> {
        for x in carrier.elems() {
            if !self.quantale.leq(self.quantale.unit(), self.get(x, x))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `r ⊙ r ≤ r` on the carrier.
    pub fn is_transitive(&self, carrier: &Carrier<K>) -> Result<bool> {
        let q = self.quantale;
        for x in carrier.elems() {
            for z in carrier.elems() {
                let xz = self.get(x, z);
                if xz == q.bottom() {
                    continue;
                }
                for y in carrier.elems() {
                    if !q.leq(q.tensor(xz, self.get(z, y))?, self.get(x, y))? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `r = r ∘ swap` on the carrier.
    pub fn is_symmetric(&self, carrier: &Carrier<K>) -> Result<bool> {
        for (x, y) in carrier.pairs() {
            if !self.quantale.approx_eq(self.get(x, y), self.get(y, x))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<K: Key> RelView<K> for VRel<K> {
    fn quantale(&self) -> Quantale {
        self.quantale
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        Ok(VRel::get(self, x, y))
    }
}

/// A total map between index carriers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMap {
    codomain: usize,
    table: Vec<usize>,
}

impl FiniteMap {
    pub fn new(table: Vec<usize>, codomain: usize) -> Result<Self> {
        if let Some(&bad) = table.iter().find(|&&t| t >= codomain) {
            return Err(Error::CarrierMismatch(format!(
                "map entry {bad} outside codomain of size {codomain}"
            )));
        }
        Ok(FiniteMap { codomain, table })
    }

    pub fn identity(size: usize) -> Self {
        FiniteMap {
            codomain: size,
            table: (0..size).collect(),
        }
    }

    pub fn domain(&self) -> usize {
        self.table.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &FiniteMap) -> Result<FiniteMap> {
        if g.domain() != self.codomain {
            return Err(Error::CarrierMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.domain(),
                self.codomain,
                g.domain(),
                g.codomain
            )));
        }
        FiniteMap::new(self.table.iter().map(|&x| g.apply(x)).collect(), g.codomain)
    }

    fn preimages(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.codomain];
        for (x, &y) in self.table.iter().enumerate() {
            pre[y].push(x);
        }
        pre
    }
}

fn check_indices(r: &VRel<usize>, size: usize, what: &str) -> Result<()> {
    if let Some((x, y, _)) = r.entries().find(|(x, y, _)| **x >= size || **y >= size) {
        return Err(Error::CarrierMismatch(format!(
            "relation entry ({x}, {y}) outside the {what} of size {size}"
        )));
    }
    Ok(())
}

/// Reindexing `f*(r) = r ∘ (f × f)`.
pub fn reindex(f: &FiniteMap, r: &VRel<usize>) -> Result<VRel<usize>> {
    check_indices(r, f.codomain(), "codomain")?;
    let q = r.quantale();
    let mut out = VRel::constant(q, r.default_value())?;
    for x in 0..f.domain() {
        for y in 0..f.domain() {
            out.set(x, y, r.get(&f.apply(x), &f.apply(y)))?;
        }
    }
    Ok(out)
}

/// Direct image `Σ_f(r)(y, y') = ⋁ { r(x, x') | f(x) = y, f(x') = y' }`.
pub fn direct_image(f: &FiniteMap, r: &VRel<usize>) -> Result<VRel<usize>> {
    check_indices(r, f.domain(), "domain")?;
    let q = r.quantale();
    let pre = f.preimages();
    let mut out = VRel::bottom(q);
    for y in 0..f.codomain() {
        for y2 in 0..f.codomain() {
            let mut acc = q.bottom();
            for x in &pre[y] {
                for x2 in &pre[y2] {
                    acc = q.join2(acc, r.get(x, x2))?;
                }
            }
            out.set(y, y2, acc)?;
        }
    }
    Ok(out)
}

/// Checks `Σ_f(p) ≤ q ⟺ p ≤ f*(q)` for one instance.
pub fn adjunction_holds(f: &FiniteMap, p: &VRel<usize>, q: &VRel<usize>) -> Result<bool> {
    let left = direct_image(f, p)?.leq_on(q, &Carrier::indexed(f.codomain()))?;
    let right = p.leq_on(&reindex(f, q)?, &Carrier::indexed(f.domain()))?;
    Ok(left == right)
}

/// Wire format of an index relation: `{default, entries: [[i, j, v], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VRelJson {
    pub default: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<serde_json::Value>,
    pub entries: Vec<(usize, usize, serde_json::Value)>,
}

impl VRel<usize> {
    pub fn to_json(&self) -> VRelJson {
        let q = self.quantale;
        VRelJson {
            default: q.encode(self.default),
            diagonal: self.diagonal.map(|d| q.encode(d)),
            entries: self
                .entries()
                .map(|(x, y, v)| (*x, *y, q.encode(v)))
                .collect(),
        }
    }

    pub fn from_json(quantale: Quantale, j: &VRelJson) -> Result<Self> {
        let mut r = VRel::constant(quantale, quantale.decode(&j.default)?)?;
        if let Some(d) = &j.diagonal {
            r.set_diagonal(Some(quantale.decode(d)?))?;
        }
        for (x, y, v) in &j.entries {
            r.set(*x, *y, quantale.decode(v)?)?;
        }
        Ok(r)
    }
}
