//! Up-to techniques: monotone maps on relations used to relax coinductive
//! proof obligations from `d ≤ b(d)` to `d ≤ b(f(d))`.
//!
//! A technique maps a [`Relation`] to a [`Relation`]. Closures that stay
//! sparse (reflexive, symmetric, transitive, behavioural) return explicit
//! relations; closures whose support is unbounded (union congruence,
//! convexity) return lazy views answered per query.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quantale::{Quantale, QuantaleValue};
use crate::vrel::{Key, RelView, VRel};

mod ctx;
mod cvx;

pub use ctx::{up_ctx, up_ctx_union, union_algebra, CtxUnionView};
pub use cvx::{up_cvx, CvxResult, CvxView};

/// A relation as seen by techniques: explicit and sparse, or computed on
/// demand.
#[derive(Clone)]
pub enum Relation<K> {
    Sparse(Arc<VRel<K>>),
    View(Arc<dyn RelView<K>>),
}

impl<K: Key> Relation<K> {
    pub fn sparse(r: VRel<K>) -> Self {
        Relation::Sparse(Arc::new(r))
    }

    pub fn as_sparse(&self) -> Option<&VRel<K>> {
        match self {
            Relation::Sparse(r) => Some(r),
            Relation::View(_) => None,
        }
    }

    fn require_sparse(&self, what: &str) -> Result<&VRel<K>> {
        self.as_sparse().ok_or_else(|| {
            Error::Usage(format!(
                "{what} needs an explicit relation; apply it before lazy techniques"
            ))
        })
    }
}

impl<K: Key> RelView<K> for Relation<K> {
    fn quantale(&self) -> Quantale {
        match self {
            Relation::Sparse(r) => r.quantale(),
            Relation::View(v) => v.quantale(),
        }
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        match self {
            Relation::Sparse(r) => Ok(r.get(x, y)),
            Relation::View(v) => v.get(x, y),
        }
    }
}

impl<K: Key> fmt::Debug for Relation<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Sparse(r) => f.debug_tuple("Sparse").field(r).finish(),
            Relation::View(_) => f.write_str("View(..)"),
        }
    }
}

pub type TechniqueFn<K> = dyn Fn(&Relation<K>) -> Result<Relation<K>> + Send + Sync;

/// A named up-to technique with the conditions its soundness rests on.
///
/// An empty basis marks a technique as unjustified; witness checking
/// refuses it unless explicitly allowed.
#[derive(Clone)]
pub struct Technique<K> {
    name: String,
    basis: Vec<String>,
    op: Arc<TechniqueFn<K>>,
}

impl<K: Key> Technique<K> {
    pub fn new<F>(name: impl Into<String>, basis: Vec<String>, op: F) -> Self
    where
        F: Fn(&Relation<K>) -> Result<Relation<K>> + Send + Sync + 'static,
    {
        Technique {
            name: name.into(),
            basis,
            op: Arc::new(op),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn is_justified(&self) -> bool {
        !self.basis.is_empty()
    }

    pub fn apply(&self, d: &Relation<K>) -> Result<Relation<K>> {
        (self.op)(d)
    }

    pub fn identity() -> Self {
        Technique::new("id", vec!["identity is compatible".into()], |d| Ok(d.clone()))
    }

    pub fn reflexive() -> Self {
        Technique::new(
            "ref",
            vec!["lifting preserves reflexive relations".into()],
            |d| match d {
                Relation::Sparse(r) => Ok(Relation::sparse(up_ref(r)?)),
                Relation::View(_) => Ok(Relation::View(Arc::new(RefView(d.clone())))),
            },
        )
    }

    pub fn symmetric() -> Self {
        Technique::new(
            "sym",
            vec!["lifting preserves symmetric relations".into()],
            |d| match d {
                Relation::Sparse(r) => Ok(Relation::sparse(up_sym(r)?)),
                Relation::View(_) => Ok(Relation::View(Arc::new(SymView(d.clone())))),
            },
        )
    }

    pub fn transitive() -> Self {
        Technique::new(
            "trn",
            vec!["lifting is lax for relational composition".into()],
            |d| Ok(Relation::sparse(up_trn(d.require_sparse("trn")?)?)),
        )
    }

    /// `trn ∘ sym ∘ ref`.
    pub fn metric() -> Self {
        combine(
            vec![Self::reflexive(), Self::symmetric(), Self::transitive()],
            CombineMode::Compose,
        )
        .map(|t| t.renamed("mtr"))
        .expect("composition needs no side condition")
    }

    pub fn behavioural(partition: Partition<K>) -> Self {
        let partition = Arc::new(partition);
        Technique::new(
            "bhv",
            vec!["behavioural closure along the final map".into()],
            move |d| up_bhv_relation(d, &partition),
        )
    }

    /// Deliberately unsound: halves every real distance.
    pub fn shrink() -> Self {
        Technique::new("shrink", vec![], |d| {
            let q = d.quantale();
            if !q.id().is_real() {
                return Err(Error::QuantaleMismatch {
                    expected: crate::quantale::QuantaleId::UnitIntervalRev,
                    found: q.id(),
                });
            }
            Ok(Relation::View(Arc::new(ShrinkView(d.clone()))))
        })
    }

    fn renamed(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }
}

impl<K> fmt::Debug for Technique<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Technique")
            .field("name", &self.name)
            .field("basis", &self.basis)
            .finish()
    }
}

/// `d ∨ Δ`.
pub fn up_ref<K: Key>(d: &VRel<K>) -> Result<VRel<K>> {
    let q = d.quantale();
    let mut out = d.clone();
    // The unit is the top element in every supported quantale.
    out.set_diagonal(Some(q.unit()))?;
    let diag: Vec<K> = out
        .entries()
        .filter(|(x, y, _)| x == y)
        .map(|(x, _, _)| x.clone())
        .collect();
    for x in diag {
        out.set(x.clone(), x, q.unit())?;
    }
    Ok(out)
}

/// `d ∨ d∘swap`.
pub fn up_sym<K: Key>(d: &VRel<K>) -> Result<VRel<K>> {
    d.join(&d.transpose())
}

/// Least transitive relation above `d`; `d` must have default `⊥`.
pub fn up_trn<K: Key>(d: &VRel<K>) -> Result<VRel<K>> {
    if d.default_value() != d.quantale().bottom() {
        return Err(Error::Usage(
            "trn needs a relation with default ⊥ or an enumerated carrier".into(),
        ));
    }
    d.transitive_closure(None)
}

/// `trn(sym(ref(d)))`.
pub fn up_mtr<K: Key>(d: &VRel<K>) -> Result<VRel<K>> {
    up_trn(&up_sym(&up_ref(d)?)?)
}

/// Equivalence classes; elements outside every class are their own class.
#[derive(Clone, Debug)]
pub struct Partition<K> {
    classes: Vec<Vec<K>>,
    class_of: HashMap<K, usize>,
}

impl<K: Key> PartialEq for Partition<K> {
    fn eq(&self, other: &Self) -> bool {
        self.classes == other.classes
    }
}

impl<K: Key> Partition<K> {
    pub fn new(classes: Vec<Vec<K>>) -> Result<Self> {
        let mut class_of = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            for x in c {
                if class_of.insert(x.clone(), i).is_some() {
                    return Err(Error::CarrierMismatch(format!(
                        "{x:?} occurs in two partition classes"
                    )));
                }
            }
        }
        Ok(Partition { classes, class_of })
    }

    pub fn classes(&self) -> &[Vec<K>] {
        &self.classes
    }

    /// The class of `x`, as a slice or the singleton `x`.
    pub fn class<'a>(&'a self, x: &'a K) -> &'a [K] {
        match self.class_of.get(x) {
            Some(&i) => &self.classes[i],
            None => std::slice::from_ref(x),
        }
    }
}

/// `bhv(d)(x, y) = ⋁ { d(x', y') | x' ~ x, y' ~ y }`.
pub fn up_bhv<K: Key>(d: &VRel<K>, partition: &Partition<K>) -> Result<VRel<K>> {
    let q = d.quantale();
    if d.default_value() != q.bottom() {
        return Err(Error::Usage("bhv on explicit relations needs default ⊥".into()));
    }
    let mut out = d.clone();
    for (x1, y1, v) in d.entries() {
        for x in partition.class(x1) {
            for y in partition.class(y1) {
                let joined = q.join2(out.get(x, y), v)?;
                out.set(x.clone(), y.clone(), joined)?;
            }
        }
    }
    if let Some(dv) = d.diagonal_value() {
        for class in partition.classes() {
            for x in class {
                for y in class {
                    let joined = q.join2(out.get(x, y), dv)?;
                    out.set(x.clone(), y.clone(), joined)?;
                }
            }
        }
    }
    Ok(out)
}

fn up_bhv_relation<K: Key>(d: &Relation<K>, partition: &Arc<Partition<K>>) -> Result<Relation<K>> {
    match d {
        Relation::Sparse(r) if r.default_value() == r.quantale().bottom() => {
            Ok(Relation::sparse(up_bhv(r, partition)?))
        }
        _ => Ok(Relation::View(Arc::new(BhvView {
            inner: d.clone(),
            partition: partition.clone(),
        }))),
    }
}

struct RefView<K>(Relation<K>);

impl<K: Key> RelView<K> for RefView<K> {
    fn quantale(&self) -> Quantale {
        self.0.quantale()
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        if x == y {
            Ok(self.quantale().unit())
        } else {
            self.0.get(x, y)
        }
    }
}

struct SymView<K>(Relation<K>);

impl<K: Key> RelView<K> for SymView<K> {
    fn quantale(&self) -> Quantale {
        self.0.quantale()
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        self.quantale().join2(self.0.get(x, y)?, self.0.get(y, x)?)
    }
}

struct BhvView<K> {
    inner: Relation<K>,
    partition: Arc<Partition<K>>,
}

impl<K: Key> RelView<K> for BhvView<K> {
    fn quantale(&self) -> Quantale {
        self.inner.quantale()
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        let q = self.quantale();
        let mut acc = q.bottom();
        for x1 in self.partition.class(x) {
            for y1 in self.partition.class(y) {
                acc = q.join2(acc, self.inner.get(x1, y1)?)?;
            }
        }
        Ok(acc)
    }
}

struct ShrinkView<K>(Relation<K>);

impl<K: Key> RelView<K> for ShrinkView<K> {
    fn quantale(&self) -> Quantale {
        self.0.quantale()
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        let q = self.quantale();
        q.from_real(0.5 * q.to_real(self.0.get(x, y)?))
    }
}

struct JoinView<K>(Vec<Relation<K>>);

impl<K: Key> RelView<K> for JoinView<K> {
    fn quantale(&self) -> Quantale {
        self.0[0].quantale()
    }

    fn get(&self, x: &K, y: &K) -> Result<QuantaleValue> {
        let q = self.quantale();
        let mut acc = q.bottom();
        for r in &self.0 {
            acc = q.join2(acc, r.get(x, y)?)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineMode {
    /// Apply in list order: the first technique is applied first.
    Compose,
    /// Pointwise join of the results.
    Join,
    /// Pointwise relational composition of the results. Only sound when
    /// the lifting satisfies `F̄(p ⊙ q) ≥ F̄(p) ⊙ F̄(q)`, which the caller
    /// must declare.
    Chain { lax_composition: bool },
}

/// Combines techniques; the result is justified only if every part is.
pub fn combine<K: Key>(techniques: Vec<Technique<K>>, mode: CombineMode) -> Result<Technique<K>> {
    if techniques.is_empty() {
        return Ok(Technique::identity());
    }
    let names: Vec<&str> = techniques.iter().map(|t| t.name()).collect();
    let mut basis: Vec<String> = Vec::new();
    if techniques.iter().all(|t| t.is_justified()) {
        for t in &techniques {
            for b in t.basis() {
                if !basis.contains(b) {
                    basis.push(b.clone());
                }
            }
        }
    }
    let parts = Arc::new(techniques.clone());
    let tech = match mode {
        CombineMode::Compose => Technique::new(names.join(","), basis, move |d| {
            let mut cur = d.clone();
            for t in parts.iter() {
                cur = t.apply(&cur)?;
            }
            Ok(cur)
        }),
        CombineMode::Join => Technique::new(format!("join({})", names.join(",")), basis, move |d| {
            let results = parts.iter().map(|t| t.apply(d)).collect::<Result<Vec<_>>>()?;
            Ok(Relation::View(Arc::new(JoinView(results))))
        }),
        CombineMode::Chain { lax_composition } => {
            if !lax_composition {
                return Err(Error::Usage(
                    "chaining needs a lifting declared lax for relational composition".into(),
                ));
            }
            basis.push("lifting is lax for relational composition".into());
            basis.dedup();
            Technique::new(format!("chain({})", names.join(",")), basis, move |d| {
                let mut acc: Option<VRel<K>> = None;
                for t in parts.iter() {
                    let r = t.apply(d)?;
                    let r = r.require_sparse("chain")?.clone();
                    acc = Some(match acc {
                        None => r,
                        Some(a) => a.compose_sparse(&r)?,
                    });
                }
                Ok(Relation::sparse(acc.expect("at least one technique")))
            })
        }
    };
    Ok(tech)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::QuantaleValue::{Bool, Real};
    use crate::vrel::Carrier;

    fn unit() -> Quantale {
        Quantale::unit_interval()
    }

    fn chain3() -> VRel {
        let mut d = VRel::bottom(unit());
        d.set(0, 1, Real(0.2)).unwrap();
        d.set(1, 2, Real(0.3)).unwrap();
        d
    }

    #[test]
    fn trn_adds_composite() {
        let t = up_trn(&chain3()).unwrap();
        assert!((unit().to_real(t.get(&0, &2)) - 0.5).abs() < 1e-12);
        let mut b = VRel::bottom(Quantale::bool2());
        b.set(0, 1, Bool(true)).unwrap();
        b.set(1, 2, Bool(true)).unwrap();
        assert_eq!(up_trn(&b).unwrap().get(&0, &2), Bool(true));
        assert!(up_trn(&VRel::<usize>::constant(unit(), Real(0.5)).unwrap()).is_err());
    }

    #[test]
    fn mtr_fixes_pseudometrics() {
        let c = Carrier::indexed(3);
        let d = VRel::from_fn(unit(), &c, |x, y| {
            Real((*x as f64 - *y as f64).abs() * 0.25)
        })
        .unwrap();
        let m = up_mtr(&d).unwrap();
        assert!(m.approx_eq_on(&d, &c).unwrap());
        let via_combine = Technique::metric().apply(&Relation::sparse(d.clone())).unwrap();
        assert!(via_combine.as_sparse().unwrap().approx_eq_on(&d, &c).unwrap());
    }

    #[test]
    fn ref_overrides_explicit_diagonal_entries() {
        let mut d = chain3();
        d.set(1, 1, Real(0.7)).unwrap();
        let r = up_ref(&d).unwrap();
        assert_eq!(r.get(&1, &1), Real(0.0));
        assert_eq!(r.get(&5, &5), Real(0.0));
        assert_eq!(r.get(&0, &1), Real(0.2));
    }

    #[test]
    fn bhv_joins_over_fibres() {
        let q = unit();
        let mut d = VRel::bottom(q);
        d.set(1, 2, Real(0.3)).unwrap();
        let p = Partition::new(vec![vec![0, 1], vec![2]]).unwrap();
        let out = up_bhv(&d, &p).unwrap();
        assert_eq!(out.get(&0, &2), Real(0.3));
        assert_eq!(out.get(&2, &0), Real(1.0));
        let singletons = Partition::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(up_bhv(&d, &singletons).unwrap(), d);
        let view = up_bhv_relation(
            &Relation::View(Arc::new(d.clone())),
            &Arc::new(p.clone()),
        )
        .unwrap();
        assert_eq!(view.get(&0, &2).unwrap(), Real(0.3));
        assert!(Partition::new(vec![vec![0], vec![0, 1]]).is_err());
    }

    #[test]
    fn combinators() {
        let d = Relation::sparse(chain3());
        let with_id = combine(
            vec![Technique::reflexive(), Technique::identity()],
            CombineMode::Join,
        )
        .unwrap();
        assert_eq!(with_id.apply(&d).unwrap().get(&0, &0).unwrap(), Real(0.0));
        assert_eq!(with_id.apply(&d).unwrap().get(&0, &1).unwrap(), Real(0.2));

        assert!(combine(
            vec![Technique::<usize>::transitive(), Technique::transitive()],
            CombineMode::Chain {
                lax_composition: false
            }
        )
        .is_err());
        let chained = combine(
            vec![Technique::identity(), Technique::identity()],
            CombineMode::Chain {
                lax_composition: true,
            },
        )
        .unwrap();
        // One extra hop through the middle element.
        assert!(
            (unit().to_real(chained.apply(&d).unwrap().get(&0, &2).unwrap()) - 0.5).abs() < 1e-12
        );
        let unsafe_mix =
            combine(vec![Technique::reflexive(), Technique::shrink()], CombineMode::Compose)
                .unwrap();
        assert!(!unsafe_mix.is_justified());
        assert_eq!(unsafe_mix.name(), "ref,shrink");
        assert_eq!(
            unsafe_mix.apply(&d).unwrap().get(&0, &1).unwrap(),
            Real(0.1)
        );
    }
}
