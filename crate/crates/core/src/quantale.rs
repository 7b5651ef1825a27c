//! Unital commutative quantales used as truth values.
//!
//! Three instances are supported:
//!
//! * [`QuantaleId::Bool2`]: the two-element Boolean algebra with `⊗ = ∧`.
//! * [`QuantaleId::UnitIntervalRev`]: `[0,1]` ordered by the *reversed*
//!   real order, with truncated addition `min(r + s, 1)` as tensor.
//! * [`QuantaleId::ExtNonNegRev`]: `[0,∞]` ordered by the reversed real
//!   order, with addition as tensor and an explicit infinity element.
//!
//! For the two real quantales the quantale join is the real infimum and the
//! top element is real `0`. Comparisons of real values use a tolerance `eps`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default comparison tolerance for real-valued quantales.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuantaleId {
    #[serde(rename = "bool2")]
    Bool2,
    #[serde(rename = "unit-rev")]
    UnitIntervalRev,
    #[serde(rename = "ext-rev")]
    ExtNonNegRev,
}

impl QuantaleId {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantaleId::Bool2 => "bool2",
            QuantaleId::UnitIntervalRev => "unit-rev",
            QuantaleId::ExtNonNegRev => "ext-rev",
        }
    }

    pub fn is_real(self) -> bool {
        !matches!(self, QuantaleId::Bool2)
    }
}

impl fmt::Display for QuantaleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuantaleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bool2" => Ok(QuantaleId::Bool2),
            "unit-rev" => Ok(QuantaleId::UnitIntervalRev),
            "ext-rev" => Ok(QuantaleId::ExtNonNegRev),
            other => Err(Error::Invalid(format!(
                "unknown quantale `{other}` (expected bool2, unit-rev or ext-rev)"
            ))),
        }
    }
}

/// An element of one of the supported quantales.
///
/// `Infinity` is only a member of [`QuantaleId::ExtNonNegRev`]; `Real`
/// payloads are always finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuantaleValue {
    Bool(bool),
    Real(f64),
    Infinity,
}

impl fmt::Display for QuantaleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantaleValue::Bool(b) => write!(f, "{}", u8::from(*b)),
            QuantaleValue::Real(r) => write!(f, "{r}"),
            QuantaleValue::Infinity => f.write_str("inf"),
        }
    }
}

/// A quantale instance together with its comparison tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantale {
    id: QuantaleId,
    eps: f64,
}

impl Quantale {
    pub fn new(id: QuantaleId) -> Self {
        Quantale {
            id,
            eps: DEFAULT_EPS,
        }
    }

    pub fn with_eps(id: QuantaleId, eps: f64) -> Self {
        Quantale { id, eps }
    }

    pub fn bool2() -> Self {
        Self::new(QuantaleId::Bool2)
    }

    pub fn unit_interval() -> Self {
        Self::new(QuantaleId::UnitIntervalRev)
    }

    pub fn ext_nonneg() -> Self {
        Self::new(QuantaleId::ExtNonNegRev)
    }

    pub fn id(&self) -> QuantaleId {
        self.id
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn bottom(&self) -> QuantaleValue {
        match self.id {
            QuantaleId::Bool2 => QuantaleValue::Bool(false),
            QuantaleId::UnitIntervalRev => QuantaleValue::Real(1.0),
            QuantaleId::ExtNonNegRev => QuantaleValue::Infinity,
        }
    }

    pub fn top(&self) -> QuantaleValue {
        match self.id {
            QuantaleId::Bool2 => QuantaleValue::Bool(true),
            _ => QuantaleValue::Real(0.0),
        }
    }

    /// The tensor unit. In all three instances it coincides with the top.
    pub fn unit(&self) -> QuantaleValue {
        self.top()
    }

    pub fn contains(&self, v: QuantaleValue) -> bool {
        match (self.id, v) {
            (QuantaleId::Bool2, QuantaleValue::Bool(_)) => true,
            (QuantaleId::UnitIntervalRev, QuantaleValue::Real(r)) => (0.0..=1.0).contains(&r),
            (QuantaleId::ExtNonNegRev, QuantaleValue::Real(r)) => r.is_finite() && r >= 0.0,
            (QuantaleId::ExtNonNegRev, QuantaleValue::Infinity) => true,
            _ => false,
        }
    }

    pub fn check(&self, v: QuantaleValue) -> Result<QuantaleValue> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(Error::NotInCarrier {
                quantale: self.id,
                value: v,
            })
        }
    }

    /// Builds an element from its real coordinate.
    ///
    /// For `Bool2` only `0` and `1` are accepted. Values that leave `[0,1]`
    /// by at most `eps` are clamped for the unit interval.
    pub fn from_real(&self, r: f64) -> Result<QuantaleValue> {
        let bad = || Error::NotInCarrier {
            quantale: self.id,
            value: QuantaleValue::Real(r),
        };
        if r.is_nan() {
            return Err(bad());
        }
        match self.id {
            QuantaleId::Bool2 => {
                if r == 0.0 {
                    Ok(QuantaleValue::Bool(false))
                } else if r == 1.0 {
                    Ok(QuantaleValue::Bool(true))
                } else {
                    Err(bad())
                }
            }
            QuantaleId::UnitIntervalRev => {
                if r < -self.eps || r > 1.0 + self.eps {
                    Err(bad())
                } else {
                    Ok(QuantaleValue::Real(r.clamp(0.0, 1.0)))
                }
            }
            QuantaleId::ExtNonNegRev => {
                if r == f64::INFINITY {
                    Ok(QuantaleValue::Infinity)
                } else if r < -self.eps {
                    Err(bad())
                } else {
                    Ok(QuantaleValue::Real(r.max(0.0)))
                }
            }
        }
    }

    /// Real coordinate of an element: `0/1` for booleans, `+∞` for infinity.
    ///
    /// For the reversed quantales a larger real means a smaller element.
    pub fn to_real(&self, v: QuantaleValue) -> f64 {
        match v {
            QuantaleValue::Bool(b) => f64::from(u8::from(b)),
            QuantaleValue::Real(r) => r,
            QuantaleValue::Infinity => f64::INFINITY,
        }
    }

    fn real(&self, v: QuantaleValue) -> Result<f64> {
        self.check(v).map(|v| self.to_real(v))
    }

    fn real_unchecked(&self, r: f64) -> QuantaleValue {
        match self.id {
            QuantaleId::Bool2 => QuantaleValue::Bool(r != 0.0),
            QuantaleId::UnitIntervalRev => QuantaleValue::Real(r.clamp(0.0, 1.0)),
            QuantaleId::ExtNonNegRev if r == f64::INFINITY => QuantaleValue::Infinity,
            QuantaleId::ExtNonNegRev => QuantaleValue::Real(r.max(0.0)),
        }
    }

    /// Least upper bound; the join of nothing is `⊥`.
    pub fn join<I>(&self, vs: I) -> Result<QuantaleValue>
    where
        I: IntoIterator<Item = QuantaleValue>,
    {
        let mut acc = self.bottom();
        for v in vs {
            acc = self.join2(acc, v)?;
        }
        Ok(acc)
    }

    /// Greatest lower bound; the meet of nothing is `⊤`.
    pub fn meet<I>(&self, vs: I) -> Result<QuantaleValue>
    where
        I: IntoIterator<Item = QuantaleValue>,
    {
        let mut acc = self.top();
        for v in vs {
            acc = self.meet2(acc, v)?;
        }
        Ok(acc)
    }

    pub fn join2(&self, a: QuantaleValue, b: QuantaleValue) -> Result<QuantaleValue> {
        let (x, y) = (self.real(a)?, self.real(b)?);
        Ok(match self.id {
            QuantaleId::Bool2 => self.real_unchecked(x.max(y)),
            _ => self.real_unchecked(x.min(y)),
        })
    }

    pub fn meet2(&self, a: QuantaleValue, b: QuantaleValue) -> Result<QuantaleValue> {
        let (x, y) = (self.real(a)?, self.real(b)?);
        Ok(match self.id {
            QuantaleId::Bool2 => self.real_unchecked(x.min(y)),
            _ => self.real_unchecked(x.max(y)),
        })
    }

    pub fn tensor(&self, a: QuantaleValue, b: QuantaleValue) -> Result<QuantaleValue> {
        let (x, y) = (self.real(a)?, self.real(b)?);
        Ok(match self.id {
            QuantaleId::Bool2 => self.real_unchecked(x.min(y)),
            QuantaleId::UnitIntervalRev => self.real_unchecked((x + y).min(1.0)),
            QuantaleId::ExtNonNegRev => self.real_unchecked(x + y),
        })
    }

    /// Right adjoint `[y, z]` of `- ⊗ y`: the greatest `x` with `x ⊗ y ≤ z`.
    pub fn residuate(&self, y: QuantaleValue, z: QuantaleValue) -> Result<QuantaleValue> {
        let (y, z) = (self.real(y)?, self.real(z)?);
        Ok(match self.id {
            QuantaleId::Bool2 => QuantaleValue::Bool(y == 0.0 || z == 1.0),
            QuantaleId::UnitIntervalRev => self.real_unchecked((z - y).max(0.0)),
            QuantaleId::ExtNonNegRev => {
                if y == f64::INFINITY {
                    // x + ∞ = ∞ lies below everything in the quantale order.
                    self.top()
                } else if z == f64::INFINITY {
                    QuantaleValue::Infinity
                } else {
                    self.real_unchecked((z - y).max(0.0))
                }
            }
        })
    }

    /// Quantale order `a ≤ b`, up to `eps` for real quantales.
    pub fn leq(&self, a: QuantaleValue, b: QuantaleValue) -> Result<bool> {
        let (x, y) = (self.real(a)?, self.real(b)?);
        Ok(match self.id {
            QuantaleId::Bool2 => x <= y,
            _ => {
                if x == f64::INFINITY {
                    true
                } else if y == f64::INFINITY {
                    false
                } else {
                    x + self.eps >= y
                }
            }
        })
    }

    pub fn approx_eq(&self, a: QuantaleValue, b: QuantaleValue) -> Result<bool> {
        Ok(self.leq(a, b)? && self.leq(b, a)?)
    }

    /// Size of the difference between two elements in real coordinates,
    /// used to measure convergence of fixpoint iteration.
    pub fn distance(&self, a: QuantaleValue, b: QuantaleValue) -> Result<f64> {
        let (x, y) = (self.real(a)?, self.real(b)?);
        if x == y {
            Ok(0.0)
        } else {
            Ok((x - y).abs())
        }
    }

    /// Finite approximation of the totally-below relation `u ≪ v`: for every
    /// supplied `W` with `v ≤ ⋁W` some `w ∈ W` satisfies `u ≤ w`.
    pub fn totally_below(
        &self,
        u: QuantaleValue,
        v: QuantaleValue,
        candidate_join_sets: &[Vec<QuantaleValue>],
    ) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        for w in candidate_join_sets {
            if self.leq(v, self.join(w.iter().copied())?)? {
                let mut found = false;
                for &x in w {
                    if self.leq(u, x)? {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// JSON encoding: numbers for finite values, `"inf"` for infinity.
    pub fn encode(&self, v: QuantaleValue) -> serde_json::Value {
        match v {
            QuantaleValue::Bool(b) => serde_json::Value::from(u8::from(b)),
            QuantaleValue::Real(r) => serde_json::Value::from(r),
            QuantaleValue::Infinity => serde_json::Value::from("inf"),
        }
    }

    pub fn decode(&self, j: &serde_json::Value) -> Result<QuantaleValue> {
        match j {
            serde_json::Value::Bool(b) if self.id == QuantaleId::Bool2 => {
                Ok(QuantaleValue::Bool(*b))
            }
            serde_json::Value::Number(n) => {
                let r = n
                    .as_f64()
                    .ok_or_else(|| Error::Invalid(format!("bad number {n}")))?;
                self.from_real(r)
            }
            serde_json::Value::String(s) if s == "inf" || s == "infinity" => {
                self.from_real(f64::INFINITY)
            }
            other => Err(Error::Invalid(format!(
                "cannot read {other} as a {} value",
                self.id
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use QuantaleValue::{Bool, Infinity, Real};

    fn unit() -> Quantale {
        Quantale::unit_interval()
    }

    #[test]
    fn join_is_real_min_on_reversed_interval() {
        assert_eq!(unit().join([Real(0.3), Real(0.5)]).unwrap(), Real(0.3));
    }

    #[test]
    fn empty_join_is_bottom() {
        for q in [Quantale::bool2(), unit(), Quantale::ext_nonneg()] {
            assert_eq!(q.join([]).unwrap(), q.bottom());
            assert_eq!(q.meet([]).unwrap(), q.top());
        }
        assert_eq!(unit().join([]).unwrap(), Real(1.0));
    }

    #[test]
    fn boolean_join() {
        let q = Quantale::bool2();
        assert_eq!(q.join([Bool(false), Bool(true)]).unwrap(), Bool(true));
    }

    #[test]
    fn truncated_addition() {
        assert_eq!(unit().tensor(Real(0.7), Real(0.6)).unwrap(), Real(1.0));
        assert_eq!(unit().tensor(Real(0.42), Real(0.0)).unwrap(), Real(0.42));
    }

    #[test]
    fn infinity_absorbs() {
        let q = Quantale::ext_nonneg();
        assert_eq!(q.tensor(Real(2.0), Infinity).unwrap(), Infinity);
    }

    #[test]
    fn truncated_subtraction() {
        let q = Quantale::ext_nonneg();
        assert_eq!(q.residuate(Real(3.0), Real(5.0)).unwrap(), Real(2.0));
        assert_eq!(q.residuate(Real(5.0), Real(3.0)).unwrap(), Real(0.0));
        assert_eq!(q.residuate(Infinity, Infinity).unwrap(), Real(0.0));
        assert_eq!(q.residuate(Real(1.0), Infinity).unwrap(), Infinity);
    }

    #[test]
    fn residuate_by_unit_is_identity() {
        for q in [Quantale::bool2(), unit(), Quantale::ext_nonneg()] {
            for z in [q.top(), q.bottom()] {
                assert_eq!(q.residuate(q.unit(), z).unwrap(), z);
            }
        }
        assert_eq!(unit().residuate(Real(0.0), Real(0.3)).unwrap(), Real(0.3));
    }

    #[test]
    fn residuate_matches_grid_scan() {
        // Oracle: scan x over a 0.001 grid and keep the greatest x (smallest
        // real) with x ⊗ 0.4 ≤ 0.9 in the quantale order.
        let q = unit();
        let (y, z) = (Real(0.4), Real(0.9));
        let mut best: Option<f64> = None;
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            let t = (x + 0.4_f64).min(1.0);
            if t + 1e-12 >= 0.9 {
                best = Some(best.map_or(x, |b: f64| b.min(x)));
            }
        }
        let expected = best.unwrap();
        assert!((expected - 0.5).abs() < 1e-12);
        match q.residuate(y, z).unwrap() {
            Real(r) => assert!((r - expected).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixed_values_are_rejected() {
        let q = unit();
        assert!(matches!(
            q.join([Real(0.2), Bool(true)]),
            Err(Error::NotInCarrier { .. })
        ));
        assert!(q.tensor(Infinity, Real(0.1)).is_err());
        assert!(Quantale::bool2().leq(Real(0.0), Bool(true)).is_err());
        assert!(q.check(Real(1.5)).is_err());
    }

    #[test]
    fn totally_below_examples() {
        let b = Quantale::bool2();
        let all = vec![vec![], vec![Bool(false)], vec![Bool(true)], vec![Bool(false), Bool(true)]];
        assert!(b.totally_below(Bool(true), Bool(true), &all).unwrap());

        let q = unit();
        let fam = vec![vec![Real(0.7)], vec![Real(0.6), Real(0.9)]];
        // 0.5 is a smaller distance than 0.6, hence a larger quantale element,
        // and {0.6, 0.9} covers 0.6 without reaching 0.5.
        assert!(!q.totally_below(Real(0.5), Real(0.6), &fam).unwrap());
        assert!(q.totally_below(Real(0.7), Real(0.6), &fam).unwrap());
        assert!(q.totally_below(q.bottom(), Real(0.2), &fam).unwrap());
    }

    #[test]
    fn parse_ids() {
        for id in [QuantaleId::Bool2, QuantaleId::UnitIntervalRev, QuantaleId::ExtNonNegRev] {
            assert_eq!(id.as_str().parse::<QuantaleId>().unwrap(), id);
        }
        assert!("reals".parse::<QuantaleId>().is_err());
    }

    #[test]
    fn json_codec() {
        let q = Quantale::ext_nonneg();
        for v in [Real(0.0), Real(2.5), Infinity] {
            assert_eq!(q.decode(&q.encode(v)).unwrap(), v);
        }
        let b = Quantale::bool2();
        assert_eq!(b.decode(&serde_json::json!(1)).unwrap(), Bool(true));
        assert_eq!(b.decode(&serde_json::json!(false)).unwrap(), Bool(false));
        assert!(b.decode(&serde_json::json!(0.5)).is_err());
    }
}
