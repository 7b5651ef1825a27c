//! Sampling checks for the conditions under which a lifting restricts to
//! `V`-categories, and for liftings of natural transformations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantale::{Quantale, QuantaleId, QuantaleValue};
use crate::vrel::{Carrier, VPred, VRel};

use super::{EvaluationMap, FunctorId, FunctorValue};

/// Functor values per carrier beyond which a random subset is used.
const MAX_VALUES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WellBehavedOptions {
    /// Random trials; ignored in exhaustive mode.
    pub samples: usize,
    pub max_carrier: usize,
    /// Enumerate all predicates and preorders instead of sampling (`Bool2`
    /// only, carriers up to three elements).
    pub exhaustive: bool,
    pub seed: u64,
}

impl Default for WellBehavedOptions {
    fn default() -> Self {
        WellBehavedOptions {
            samples: 200,
            max_carrier: 4,
            exhaustive: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// The lifted constant-unit predicate is at least the unit.
    Unit,
    /// `lift(p ⊗ q) ≥ lift(p) ⊗ lift(q)`.
    Tensor,
    Reflexive,
    Transitive,
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WellBehavedReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl WellBehavedReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, holds: bool, condition: Condition, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !holds {
            self.violations.push(Violation {
                condition,
                detail: detail(),
            });
        }
    }
}

/// Checks the unit and tensor conditions of the predicate lifting and that
/// the Wasserstein lifting preserves reflexivity, transitivity and symmetry
/// of sampled `V`-categories.
pub fn check_wellbehaved(ev: &EvaluationMap, opts: &WellBehavedOptions) -> Result<WellBehavedReport> {
    let q = ev.quantale();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = WellBehavedReport::default();
    if opts.exhaustive {
        if q.id() != QuantaleId::Bool2 || opts.max_carrier > 3 {
            return Err(Error::Invalid(
                "exhaustive mode needs Bool2 and carriers of at most 3 elements".into(),
            ));
        }
        let grid = [QuantaleValue::Bool(false), QuantaleValue::Bool(true)];
        for k in 1..=opts.max_carrier {
            let carrier = Carrier::indexed(k);
            let values = functor_values(ev.functor(), k, &mut rng);
            let preds = all_predicates(q, &carrier, &grid)?;
            check_unit(ev, &values, &mut report)?;
            for p in &preds {
                for r in &preds {
                    check_tensor(ev, p, r, &values, &mut report)?;
                }
            }
            for d in all_preorders(q, &carrier)? {
                let symmetric = d.is_symmetric(&carrier)?;
                check_vcat(ev, &d, symmetric, &values, &mut report)?;
            }
        }
        return Ok(report);
    }
    for _ in 0..opts.samples {
        let k = rng.gen_range(1..=opts.max_carrier.max(1));
        let carrier = Carrier::indexed(k);
        let values = functor_values(ev.functor(), k, &mut rng);
        check_unit(ev, &values, &mut report)?;
        let p = VPred::from_fn(q, &carrier, |_| random_value(q, &mut rng))?;
        let r = VPred::from_fn(q, &carrier, |_| random_value(q, &mut rng))?;
        check_tensor(ev, &p, &r, &values, &mut report)?;
        let symmetric = rng.gen_bool(0.5);
        let d = random_vcat(q, &carrier, symmetric, &mut rng)?;
        check_vcat(ev, &d, symmetric, &values, &mut report)?;
    }
    Ok(report)
}

fn check_unit(
    ev: &EvaluationMap,
    values: &[FunctorValue<usize>],
    report: &mut WellBehavedReport,
) -> Result<()> {
    let q = ev.quantale();
    let one = VPred::constant(q, q.unit())?;
    for u in values {
        let lifted = ev.lift_pred(&one, u)?;
        report.record(q.leq(q.unit(), lifted)?, Condition::Unit, || {
            format!("lift(1)({u:?}) = {lifted}")
        });
    }
    Ok(())
}

fn check_tensor(
    ev: &EvaluationMap,
    p: &VPred<usize>,
    r: &VPred<usize>,
    values: &[FunctorValue<usize>],
    report: &mut WellBehavedReport,
) -> Result<()> {
    let q = ev.quantale();
    let pr = p.tensor(r)?;
    for u in values {
        let lhs = q.tensor(ev.lift_pred(p, u)?, ev.lift_pred(r, u)?)?;
        let rhs = ev.lift_pred(&pr, u)?;
        report.record(q.leq(lhs, rhs)?, Condition::Tensor, || {
            format!("at {u:?}: lift(p)⊗lift(q) = {lhs} but lift(p⊗q) = {rhs}")
        });
    }
    Ok(())
}

fn check_vcat(
    ev: &EvaluationMap,
    d: &VRel<usize>,
    symmetric: bool,
    values: &[FunctorValue<usize>],
    report: &mut WellBehavedReport,
) -> Result<()> {
    let q = ev.quantale();
    let n = values.len();
    let mut lifted = vec![vec![q.bottom(); n]; n];
    for i in 0..n {
        for j in 0..n {
            lifted[i][j] = ev.wasserstein(d, &values[i], &values[j])?;
        }
    }
    for i in 0..n {
        report.record(q.leq(q.unit(), lifted[i][i])?, Condition::Reflexive, || {
            format!("lifted distance of {:?} to itself is {}", values[i], lifted[i][i])
        });
        for j in 0..n {
            if symmetric {
                let ok = q.approx_eq(lifted[i][j], lifted[j][i])?;
                report.record(ok, Condition::Symmetric, || {
                    format!("{:?} vs {:?}: {} and {}", values[i], values[j], lifted[i][j], lifted[j][i])
                });
            }
            for k in 0..n {
                let through = q.tensor(lifted[i][j], lifted[j][k])?;
                report.record(q.leq(through, lifted[i][k])?, Condition::Transitive, || {
                    format!(
                        "{:?} -> {:?} -> {:?}: {} ⊗ {} exceeds {}",
                        values[i], values[j], values[k], lifted[i][j], lifted[j][k], lifted[i][k]
                    )
                });
            }
        }
    }
    Ok(())
}

/// Elements of `F X` for `X = {0..k}`, subsampled to [`MAX_VALUES`].
fn functor_values(f: FunctorId, k: usize, rng: &mut ChaCha8Rng) -> Vec<FunctorValue<usize>> {
    let mut out: Vec<FunctorValue<usize>> = match f {
        FunctorId::Pow => (0u32..1 << k)
            .map(|mask| FunctorValue::pow((0..k).filter(|i| mask & (1 << i) != 0)))
            .collect(),
        FunctorId::Machine(a) => {
            let mut words: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..a {
                words = words
                    .into_iter()
                    .flat_map(|w| {
                        (0..k).map(move |x| {
                            let mut w = w.clone();
                            w.push(x);
                            w
                        })
                    })
                    .take(4 * MAX_VALUES)
                    .collect();
            }
            words
                .into_iter()
                .flat_map(|w| [false, true].map(|b| FunctorValue::machine(b, w.clone())))
                .collect()
        }
        FunctorId::Dist => quarter_grid(k)
            .into_iter()
            .map(|masses| {
                FunctorValue::Dist(
                    masses
                        .into_iter()
                        .enumerate()
                        .filter(|(_, m)| *m > 0)
                        .map(|(x, m)| (x, m as f64 / 4.0))
                        .collect(),
                )
            })
            .collect(),
    };
    if out.len() > MAX_VALUES {
        out.shuffle(rng);
        out.truncate(MAX_VALUES);
    }
    out
}

/// Mass vectors over `k` points in quarters.
fn quarter_grid(k: usize) -> Vec<Vec<u32>> {
    fn go(k: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == k - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for m in 0..=left {
            prefix.push(m);
            go(k, left - m, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(k, 4, &mut Vec::new(), &mut out);
    out
}

/// A random quantale element; endpoints are drawn with extra weight.
pub(crate) fn random_value(q: Quantale, rng: &mut impl Rng) -> QuantaleValue {
    match q.id() {
        QuantaleId::Bool2 => QuantaleValue::Bool(rng.gen_bool(0.5)),
        QuantaleId::UnitIntervalRev => {
            let r = match rng.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen_range(0.0..=1.0),
            };
            QuantaleValue::Real(r)
        }
        QuantaleId::ExtNonNegRev => match rng.gen_range(0..10) {
            0 => QuantaleValue::Real(0.0),
            1 => QuantaleValue::Infinity,
            _ => QuantaleValue::Real(rng.gen_range(0.0..=5.0)),
        },
    }
}

/// A random `V`-category: reflexive, transitively closed, optionally
/// symmetric.
pub(crate) fn random_vcat(
    q: Quantale,
    carrier: &Carrier,
    symmetric: bool,
    rng: &mut impl Rng,
) -> Result<VRel<usize>> {
    let mut d = VRel::from_fn(q, carrier, |_, _| random_value(q, rng))?;
    if symmetric {
        d = d.join(&d.transpose())?;
    }
    for &x in carrier.elems() {
        d.set(x, x, q.unit())?;
    }
    d.transitive_closure(Some(carrier))
}

fn all_predicates(q: Quantale, carrier: &Carrier, grid: &[QuantaleValue]) -> Result<Vec<VPred>> {
    let k = carrier.size();
    let total = grid.len().pow(k as u32);
    (0..total)
        .map(|code| {
            VPred::from_fn(q, carrier, |&x| {
                grid[(code / grid.len().pow(x as u32)) % grid.len()]
            })
        })
        .collect()
}

fn all_preorders(q: Quantale, carrier: &Carrier) -> Result<Vec<VRel>> {
    let k = carrier.size();
    let mut out = Vec::new();
    for mask in 0u32..1 << (k * k) {
        let d = VRel::from_fn(q, carrier, |&x, &y| QuantaleValue::Bool(mask & (1 << (x * k + y)) != 0))?;
        if d.is_reflexive(carrier)? && d.is_transitive(carrier)? {
            out.push(d);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NatLiftingReport {
    pub checked: usize,
    /// Index of the first sample with `ev_F(u) ≰ ev_G(ζ(u))`.
    pub counterexample: Option<usize>,
}

impl NatLiftingReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `ev_F(u) ≤ ev_G(ζ(u))` on every sample.
pub fn check_nat_lifting<U, W, EF, EG, Z>(
    q: Quantale,
    ev_f: EF,
    ev_g: EG,
    zeta: Z,
    samples: &[U],
) -> Result<NatLiftingReport>
where
    EF: Fn(&U) -> Result<QuantaleValue>,
    EG: Fn(&W) -> Result<QuantaleValue>,
    Z: Fn(&U) -> W,
{
    for (i, u) in samples.iter().enumerate() {
        if !q.leq(ev_f(u)?, ev_g(&zeta(u))?)? {
            return Ok(NatLiftingReport {
                checked: i + 1,
                counterexample: Some(i),
            });
        }
    }
    Ok(NatLiftingReport {
        checked: samples.len(),
        counterexample: None,
    })
}
