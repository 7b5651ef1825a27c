//! Functor values, evaluation maps and the liftings they induce.
//!
//! A monotone evaluation map `ev: F V → V` gives a predicate lifting
//! `p ↦ ev ∘ F(p)`. The Wasserstein lifting of a relation `r` compares
//! `t1, t2 ∈ F X` by joining the lifted predicate value over all couplings
//! `t ∈ F(X × X)` whose projections are `t1` and `t2`. Each supported
//! functor has a production path for that join:
//!
//! | functor | evaluation map      | computed by                           |
//! |---------|---------------------|---------------------------------------|
//! | `Pow`   | canonical           | Hausdorff closed form                 |
//! | `Pow`   | anything else       | coupling enumeration (capped)         |
//! | Machine | any                 | the unique coupling, `⊥` on mismatch  |
//! | `Dist`  | expectation         | exact transportation simplex          |
//! | `Dist`  | canonical           | bottleneck thresholding + max-flow    |

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantale::{Quantale, QuantaleId, QuantaleValue};
use crate::vrel::{Key, RelView, VPred};

pub mod oracle;
pub mod transport;
pub(crate) mod wellbehaved;

pub use wellbehaved::{
    check_nat_lifting, check_wellbehaved, Condition, NatLiftingReport, Violation,
    WellBehavedOptions, WellBehavedReport,
};

/// Probability masses below this are dropped when building distributions.
pub const MASS_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctorId {
    /// Finite powerset.
    Pow,
    /// `2 × X^A` with the given alphabet size.
    Machine(usize),
    /// Finitely supported probability distributions.
    Dist,
}

impl fmt::Display for FunctorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorId::Pow => f.write_str("Pow"),
            FunctorId::Machine(a) => write!(f, "Machine({a})"),
            FunctorId::Dist => f.write_str("Dist"),
        }
    }
}

/// An element of `F X` for one of the supported functors.
///
/// The constructors on `K: Key` normalize (sorted, deduplicated, masses
/// merged). Values over quantale elements, which have no total order, are
/// built with [`FunctorValue::map`] and may repeat elements; every
/// evaluation map is insensitive to that.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctorValue<K> {
    Pow(Vec<K>),
    Machine { accept: bool, succ: Vec<K> },
    Dist(Vec<(K, f64)>),
}

impl<K> FunctorValue<K> {
    pub fn functor(&self) -> FunctorId {
        match self {
            FunctorValue::Pow(_) => FunctorId::Pow,
            FunctorValue::Machine { succ, .. } => FunctorId::Machine(succ.len()),
            FunctorValue::Dist(_) => FunctorId::Dist,
        }
    }

    /// `F(f)` without merging collided elements.
    pub fn map<L, F: FnMut(&K) -> L>(&self, mut f: F) -> FunctorValue<L> {
        match self {
            FunctorValue::Pow(xs) => FunctorValue::Pow(xs.iter().map(&mut f).collect()),
            FunctorValue::Machine { accept, succ } => FunctorValue::Machine {
                accept: *accept,
                succ: succ.iter().map(&mut f).collect(),
            },
            FunctorValue::Dist(ms) => {
                FunctorValue::Dist(ms.iter().map(|(x, m)| (f(x), *m)).collect())
            }
        }
    }

    /// Elements that occur in the value (successors, members or support).
    pub fn elements(&self) -> Vec<&K> {
        match self {
            FunctorValue::Pow(xs) => xs.iter().collect(),
            FunctorValue::Machine { succ, .. } => succ.iter().collect(),
            FunctorValue::Dist(ms) => ms.iter().map(|(x, _)| x).collect(),
        }
    }
}

impl<K: Key> FunctorValue<K> {
    pub fn pow<I: IntoIterator<Item = K>>(xs: I) -> Self {
        let mut v: Vec<K> = xs.into_iter().collect();
        v.sort();
        v.dedup();
        FunctorValue::Pow(v)
    }

    pub fn machine(accept: bool, succ: Vec<K>) -> Self {
        FunctorValue::Machine { accept, succ }
    }

    pub fn point(x: K) -> Self {
        FunctorValue::Dist(vec![(x, 1.0)])
    }

    /// A distribution: masses of equal points are added, masses below
    /// [`MASS_EPS`] are dropped and the rest renormalized. The total mass
    /// must be `1` within [`MASS_EPS`].
    pub fn dist<I: IntoIterator<Item = (K, f64)>>(masses: I) -> Result<Self> {
        let mut merged: BTreeMap<K, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (x, m) in masses {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Invalid(format!("bad probability mass {m}")));
            }
            total += m;
            *merged.entry(x).or_insert(0.0) += m;
        }
        if (total - 1.0).abs() > MASS_EPS {
            return Err(Error::NotNormalized(total));
        }
        merged.retain(|_, m| *m >= MASS_EPS);
        let kept: f64 = merged.values().sum();
        Ok(FunctorValue::Dist(
            merged.into_iter().map(|(x, m)| (x, m / kept)).collect(),
        ))
    }

    /// `F(f)` with normalization; distribution masses of collided points add.
    pub fn pushforward<L: Key, F: FnMut(&K) -> L>(&self, f: F) -> FunctorValue<L> {
        match self.map(f) {
            FunctorValue::Pow(xs) => FunctorValue::pow(xs),
            m @ FunctorValue::Machine { .. } => m,
            FunctorValue::Dist(ms) => {
                let mut merged: BTreeMap<L, f64> = BTreeMap::new();
                for (x, m) in ms {
                    *merged.entry(x).or_insert(0.0) += m;
                }
                FunctorValue::Dist(merged.into_iter().collect())
            }
        }
    }
}

/// The evaluation maps provided by the library.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EvalKind {
    /// `ev(u) = ⋀ u` on the powerset.
    PowCanonical,
    /// Existential modality on `P 2`: `1` iff some element is `1`.
    BoolDiamond,
    /// Expectation `Σ r · u(r)` of a distribution over `[0,1]`.
    DistExpectation,
    /// Canonical map on distributions: the meet of the support.
    DistCanonical,
    /// `c · max_a f(a)` on `2 × V^A`; the accept bit is ignored.
    MachineDiscount(f64),
    /// Canonical map on `2 × V^A`: the meet of the successor values.
    MachineCanonical,
}

impl EvalKind {
    fn functor_matches(&self, f: FunctorId) -> bool {
        matches!(
            (self, f),
            (EvalKind::PowCanonical | EvalKind::BoolDiamond, FunctorId::Pow)
                | (EvalKind::DistExpectation | EvalKind::DistCanonical, FunctorId::Dist)
                | (
                    EvalKind::MachineDiscount(_) | EvalKind::MachineCanonical,
                    FunctorId::Machine(_)
                )
        )
    }
}

/// Solver caps for liftings that enumerate or pivot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverLimits {
    /// Pivot budget of the transportation simplex.
    pub transport_max_pivots: usize,
    /// Largest `|t1| · |t2|` for which powerset couplings are enumerated.
    pub coupling_max_enum: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            transport_max_pivots: 100_000,
            coupling_max_enum: 12,
        }
    }
}

/// A monotone evaluation map `F V → V` for a fixed functor and quantale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaluationMap {
    functor: FunctorId,
    kind: EvalKind,
    quantale: Quantale,
    limits: SolverLimits,
}

impl EvaluationMap {
    pub fn new(functor: FunctorId, kind: EvalKind, quantale: Quantale) -> Result<Self> {
        if !kind.functor_matches(functor) {
            return Err(Error::FunctorMismatch(format!(
                "{kind:?} is not an evaluation map for {functor}"
            )));
        }
        if let FunctorId::Machine(0) = functor {
            return Err(Error::Invalid("machine functor needs a nonempty alphabet".into()));
        }
        let id = quantale.id();
        let ok = match kind {
            EvalKind::PowCanonical | EvalKind::MachineCanonical => true,
            EvalKind::DistExpectation | EvalKind::DistCanonical => {
                id == QuantaleId::UnitIntervalRev
            }
            EvalKind::MachineDiscount(c) => {
                if !(c > 0.0 && c < 1.0) {
                    return Err(Error::Invalid(format!("discount {c} must lie in (0,1)")));
                }
                id.is_real()
            }
            EvalKind::BoolDiamond => id == QuantaleId::Bool2,
        };
        if !ok {
            return Err(Error::Invalid(format!(
                "{kind:?} is not available over the {id} quantale"
            )));
        }
        Ok(EvaluationMap {
            functor,
            kind,
            quantale,
            limits: SolverLimits::default(),
        })
    }

    pub fn pow_canonical(quantale: Quantale) -> Self {
        Self::new(FunctorId::Pow, EvalKind::PowCanonical, quantale)
            .expect("canonical powerset map exists for every quantale")
    }

    pub fn machine_discount(quantale: Quantale, alphabet: usize, c: f64) -> Result<Self> {
        Self::new(FunctorId::Machine(alphabet), EvalKind::MachineDiscount(c), quantale)
    }

    pub fn machine_canonical(quantale: Quantale, alphabet: usize) -> Result<Self> {
        Self::new(FunctorId::Machine(alphabet), EvalKind::MachineCanonical, quantale)
    }

    pub fn with_limits(mut self, limits: SolverLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn functor(&self) -> FunctorId {
        self.functor
    }

    pub fn kind(&self) -> EvalKind {
        self.kind
    }

    pub fn quantale(&self) -> Quantale {
        self.quantale
    }

    pub fn limits(&self) -> SolverLimits {
        self.limits
    }

    fn check_functor<K>(&self, u: &FunctorValue<K>) -> Result<()> {
        if u.functor() != self.functor {
            return Err(Error::FunctorMismatch(format!(
                "value of {} given to an evaluation map for {}",
                u.functor(),
                self.functor
            )));
        }
        Ok(())
    }

    /// Evaluates an element of `F V`.
    pub fn eval(&self, u: &FunctorValue<QuantaleValue>) -> Result<QuantaleValue> {
        self.check_functor(u)?;
        let q = self.quantale;
        match (self.kind, u) {
            (EvalKind::PowCanonical, FunctorValue::Pow(xs)) => q.meet(xs.iter().copied()),
            (EvalKind::BoolDiamond, FunctorValue::Pow(xs)) => q.join(xs.iter().copied()),
            (EvalKind::DistExpectation, FunctorValue::Dist(ms)) => {
                let mut total_mass = 0.0;
                let mut e = 0.0;
                for (v, m) in ms {
                    e += q.to_real(q.check(*v)?) * m;
                    total_mass += m;
                }
                if (total_mass - 1.0).abs() > MASS_EPS {
                    return Err(Error::NotNormalized(total_mass));
                }
                q.from_real(e)
            }
            (EvalKind::DistCanonical, FunctorValue::Dist(ms)) => {
                q.meet(ms.iter().map(|(v, _)| *v))
            }
            (EvalKind::MachineDiscount(c), FunctorValue::Machine { succ, .. }) => {
                let mut worst = 0.0_f64;
                for v in succ {
                    worst = worst.max(q.to_real(q.check(*v)?));
                }
                q.from_real(c * worst)
            }
            (EvalKind::MachineCanonical, FunctorValue::Machine { succ, .. }) => {
                q.meet(succ.iter().copied())
            }
            _ => unreachable!("functor checked above"),
        }
    }

    /// Predicate lifting `ev ∘ F(p)` evaluated at `u`.
    pub fn lift_pred<K: Key>(&self, p: &VPred<K>, u: &FunctorValue<K>) -> Result<QuantaleValue> {
        if p.quantale() != self.quantale {
            return Err(Error::QuantaleMismatch {
                expected: self.quantale.id(),
                found: p.quantale().id(),
            });
        }
        self.eval(&u.map(|x| p.get(x)))
    }

    /// Wasserstein lifting of `r` evaluated at `(t1, t2)`.
    pub fn wasserstein<K, R>(
        &self,
        r: &R,
        t1: &FunctorValue<K>,
        t2: &FunctorValue<K>,
    ) -> Result<QuantaleValue>
    where
        K: Key,
        R: RelView<K> + ?Sized,
    {
        self.check_functor(t1)?;
        self.check_functor(t2)?;
        if r.quantale().id() != self.quantale.id() {
            return Err(Error::QuantaleMismatch {
                expected: self.quantale.id(),
                found: r.quantale().id(),
            });
        }
        let q = self.quantale;
        match (t1, t2) {
            (FunctorValue::Pow(x1), FunctorValue::Pow(x2)) => match self.kind {
                EvalKind::PowCanonical => hausdorff_closed_form(q, r, x1, x2),
                _ => oracle::pow_couplings(self, r, x1, x2, self.limits.coupling_max_enum),
            },
            (
                FunctorValue::Machine { accept: a1, succ: s1 },
                FunctorValue::Machine { accept: a2, succ: s2 },
            ) => {
                // Couplings must agree with both accept bits, so there are none
                // on a mismatch; otherwise the coupling is unique.
                if a1 != a2 {
                    return Ok(q.bottom());
                }
                let paired = s1
                    .iter()
                    .zip(s2)
                    .map(|(x, y)| r.get(x, y))
                    .collect::<Result<Vec<_>>>()?;
                self.eval(&FunctorValue::Machine {
                    accept: *a1,
                    succ: paired,
                })
            }
            (FunctorValue::Dist(m1), FunctorValue::Dist(m2)) => {
                let supply = normalized_masses(m1)?;
                let demand = normalized_masses(m2)?;
                let mut cost = vec![vec![0.0; m2.len()]; m1.len()];
                for (i, (x, _)) in m1.iter().enumerate() {
                    for (j, (y, _)) in m2.iter().enumerate() {
                        cost[i][j] = q.to_real(r.get(x, y)?);
                    }
                }
                let value = match self.kind {
                    EvalKind::DistExpectation => {
                        transport::min_cost(
                            &supply,
                            &demand,
                            &cost,
                            self.limits.transport_max_pivots,
                        )?
                        .cost
                    }
                    _ => transport::bottleneck(&supply, &demand, &cost)?,
                };
                q.from_real(value)
            }
            _ => Err(Error::FunctorMismatch("values of different functors".into())),
        }
    }
}

fn normalized_masses<K>(ms: &[(K, f64)]) -> Result<Vec<f64>> {
    let total: f64 = ms.iter().map(|(_, m)| m).sum();
    if (total - 1.0).abs() > MASS_EPS || ms.iter().any(|(_, m)| !(*m > 0.0)) {
        return Err(Error::NotNormalized(total));
    }
    Ok(ms.iter().map(|(_, m)| *m).collect())
}

/// The canonical evaluation `⋁{ r | u ∈ F(↑r) }`, specialized per functor.
///
/// For the powerset this is `⋀ u`; for machines the accept bit is
/// unconstrained, leaving the meet of the successor values; for
/// distributions it is the meet of the support.
pub fn canonical_eval(quantale: Quantale, u: &FunctorValue<QuantaleValue>) -> Result<QuantaleValue> {
    match u {
        FunctorValue::Pow(xs) => quantale.meet(xs.iter().copied()),
        FunctorValue::Machine { succ, .. } => quantale.meet(succ.iter().copied()),
        FunctorValue::Dist(ms) => quantale.meet(ms.iter().map(|(v, _)| *v)),
    }
}

/// Egli–Milner/Hausdorff form of the canonical powerset lifting, in
/// quantale terms: `(⋀_{x1} ⋁_{x2} r) ∧ (⋀_{x2} ⋁_{x1} r)`.
fn hausdorff_closed_form<K, R>(q: Quantale, r: &R, x1: &[K], x2: &[K]) -> Result<QuantaleValue>
where
    K: Key,
    R: RelView<K> + ?Sized,
{
    let mut acc = q.top();
    for a in x1 {
        let mut best = q.bottom();
        for b in x2 {
            best = q.join2(best, r.get(a, b)?)?;
        }
        acc = q.meet2(acc, best)?;
    }
    for b in x2 {
        let mut best = q.bottom();
        for a in x1 {
            best = q.join2(best, r.get(a, b)?)?;
        }
        acc = q.meet2(acc, best)?;
    }
    Ok(acc)
}

/// Hausdorff distance between two finite sets under a real-valued relation:
/// `max(sup_{x1} inf_{x2} r, sup_{x2} inf_{x1} r)`, with `0` for two empty
/// sets and the quantale bottom when exactly one side is empty.
pub fn hausdorff<K, R>(r: &R, x1: &[K], x2: &[K]) -> Result<QuantaleValue>
where
    K: Key,
    R: RelView<K> + ?Sized,
{
    let q = r.quantale();
    if !q.id().is_real() {
        return Err(Error::QuantaleMismatch {
            expected: QuantaleId::UnitIntervalRev,
            found: q.id(),
        });
    }
    hausdorff_closed_form(q, r, x1, x2)
}
