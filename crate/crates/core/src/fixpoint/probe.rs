//! Sampling test of the compatibility inequality `f ∘ b ≤ b ∘ f`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flift::wellbehaved::random_value;
use crate::quantale::{Quantale, QuantaleValue};
use crate::upto::{Relation, Technique};
use crate::vrel::{Key, RelView, VRel};

use super::MonotoneMap;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeCounterexample<K> {
    pub sample: usize,
    pub left: K,
    pub right: K,
    /// `f(b(d))(left, right)`.
    pub f_of_b: QuantaleValue,
    /// `b(f(d))(left, right)`.
    pub b_of_f: QuantaleValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<K> {
    pub samples: usize,
    pub comparisons: usize,
    pub counterexample: Option<ProbeCounterexample<K>>,
}

impl<K> ProbeReport<K> {
    pub fn compatible(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// A random relation with default `⊥` on `pairs`: a quarter of the pairs
/// stay `⊥`, the rest get random values.
pub fn sample_relation<K: Key>(q: Quantale, pairs: &[(K, K)], rng: &mut impl Rng) -> Result<VRel<K>> {
    let mut d = VRel::bottom(q);
    for (x, y) in pairs {
        if rng.gen_range(0..4) != 0 {
            d.set(x.clone(), y.clone(), random_value(q, rng))?;
        }
    }
    Ok(d)
}

/// Samples relations `d` on `carrier × carrier` and compares `f(b(d))` with
/// `b(f(d))` pointwise. The carrier must be closed under the dependencies
/// of `b`. A diagnostic, not a proof.
pub fn compatibility_probe<K, B>(
    b: &B,
    f: &Technique<K>,
    carrier: &[K],
    samples: usize,
    seed: u64,
) -> Result<ProbeReport<K>>
where
    K: Key,
    B: MonotoneMap<K> + ?Sized,
{
    let q = b.quantale();
    let members: HashSet<&K> = carrier.iter().collect();
    let pairs: Vec<(K, K)> = carrier
        .iter()
        .flat_map(|x| carrier.iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    for (x, y) in &pairs {
        for (u, v) in b.dependencies(x, y) {
            if !members.contains(&u) || !members.contains(&v) {
                return Err(Error::Usage(format!(
                    "carrier is not closed under successors: ({x:?}, {y:?}) reaches ({u:?}, {v:?})"
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        samples: 0,
        comparisons: 0,
        counterexample: None,
    };
    for sample in 0..samples {
        let d = sample_relation(q, &pairs, &mut rng)?;
        let mut bd = VRel::bottom(q);
        for (x, y) in &pairs {
            bd.set(x.clone(), y.clone(), b.eval_at(&d, x, y)?)?;
        }
        let fbd = f.apply(&Relation::Sparse(Arc::new(bd)))?;
        let fd = f.apply(&Relation::Sparse(Arc::new(d)))?;
        report.samples += 1;
        for (x, y) in &pairs {
            report.comparisons += 1;
            let lhs = fbd.get(x, y)?;
            let rhs = b.eval_at(&fd, x, y)?;
            if !q.leq(lhs, rhs)? {
                report.counterexample = Some(ProbeCounterexample {
                    sample,
                    left: x.clone(),
                    right: y.clone(),
                    f_of_b: lhs,
                    b_of_f: rhs,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}
