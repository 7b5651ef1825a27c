mod common;

use common::{all_subsets, matrix, raise, rel_of, subset};
use proptest::prelude::*;
use quantimetric::flift::EvaluationMap;
use quantimetric::systems::SubsetState;
use quantimetric::upto::{up_ctx, up_ctx_union, up_ref, union_algebra, Partition, Relation, Technique};
use quantimetric::{Quantale, QuantaleValue, RelView, VRel};

fn real(v: QuantaleValue) -> f64 {
    Quantale::unit_interval().to_real(v)
}

fn partition(classes: &[usize]) -> Partition<usize> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (x, &c) in classes.iter().enumerate() {
        groups[c].push(x);
    }
    groups.retain(|g| !g.is_empty());
    Partition::new(groups).unwrap()
}

fn techniques(classes: &[usize]) -> Vec<Technique<usize>> {
    vec![
        Technique::identity(),
        Technique::reflexive(),
        Technique::symmetric(),
        Technique::transitive(),
        Technique::metric(),
        Technique::behavioural(partition(classes)),
    ]
}

/// A sparse relation on the subsets of `width` states from per-pair values;
/// values at or above `0.9` stay at the default `⊥`.
fn subset_rel(width: usize, vals: &[f64]) -> VRel<SubsetState> {
    let subsets = all_subsets(width);
    let mut d = VRel::bottom(Quantale::unit_interval());
    let n = subsets.len();
    for (i, a) in subsets.iter().enumerate() {
        for (j, b) in subsets.iter().enumerate() {
            let v = vals[i * n + j];
            if v < 0.9 {
                d.set(a.clone(), b.clone(), QuantaleValue::Real(v)).unwrap();
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn techniques_are_extensive_and_monotone(
        (k, m, bump, classes) in (1usize..=4).prop_flat_map(|k| {
            (Just(k), matrix(k), matrix(k), prop::collection::vec(0..k, k))
        })
    ) {
        let d = Relation::sparse(rel_of(&m));
        let e = Relation::sparse(rel_of(&raise(&m, &bump)));
        for t in techniques(&classes) {
            let fd = t.apply(&d).unwrap();
            let fe = t.apply(&e).unwrap();
            for x in 0..k {
                for y in 0..k {
                    let (dv, fdv, fev) = (real(d.get(&x, &y).unwrap()), real(fd.get(&x, &y).unwrap()), real(fe.get(&x, &y).unwrap()));
                    prop_assert!(fdv <= dv + 1e-9, "{} not extensive at ({x},{y}): {dv} -> {fdv}", t.name());
                    prop_assert!(fev <= fdv + 1e-9, "{} not monotone at ({x},{y}): {fdv} vs {fev}", t.name());
                }
            }
        }
    }

    #[test]
    fn union_closure_matches_generic_closure_on_two_states(vals in prop::collection::vec(0.0..1.0f64, 16)) {
        check_union_closure(2, &vals, &all_subsets(2), &all_subsets(2))?;
    }

    #[test]
    fn union_closure_is_extensive_and_monotone(
        vals in prop::collection::vec(0.0..1.0f64, 64),
        bump in prop::collection::vec(0.0..1.0f64, 64),
    ) {
        let d = subset_rel(3, &vals);
        let raised: Vec<f64> = vals.iter().zip(&bump).map(|(a, b)| a.min(*b)).collect();
        let e = subset_rel(3, &raised);
        let subsets = all_subsets(3);
        for a in &subsets {
            for b in &subsets {
                let fd = real(up_ctx_union(&d, a, b).unwrap());
                let fe = real(up_ctx_union(&e, a, b).unwrap());
                prop_assert!(fd <= real(d.get(a, b)) + 1e-12);
                prop_assert!(fe <= fd + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn union_closure_matches_generic_closure_on_three_states(
        vals in prop::collection::vec(0.0..1.0f64, 64),
        queries in prop::collection::vec((0u32..8, 0u32..8), 3),
    ) {
        let left: Vec<SubsetState> = queries.iter().map(|&(a, _)| subset(3, a)).collect();
        let right: Vec<SubsetState> = queries.iter().map(|&(_, b)| subset(3, b)).collect();
        let d = subset_rel(3, &vals);
        let algebra = union_algebra(3, 1 << 8).unwrap();
        let ev = EvaluationMap::pow_canonical(Quantale::unit_interval());
        let refl = up_ref(&d).unwrap();
        for (a, b) in left.iter().zip(&right) {
            let fast = real(up_ctx_union(&d, a, b).unwrap());
            let slow = real(up_ctx(&refl, &ev, &algebra, a, b, 1 << 8).unwrap());
            prop_assert!((fast - slow).abs() <= 1e-12, "{a:?} {b:?}: {fast} vs {slow}");
        }
    }
}

fn check_union_closure(
    width: usize,
    vals: &[f64],
    left: &[SubsetState],
    right: &[SubsetState],
) -> Result<(), TestCaseError> {
    let d = subset_rel(width, vals);
    let algebra = union_algebra(width, 1 << 16).unwrap();
    let ev = EvaluationMap::pow_canonical(Quantale::unit_interval());
    let refl = up_ref(&d).unwrap();
    for a in left {
        for b in right {
            let fast = real(up_ctx_union(&d, a, b).unwrap());
            let slow = real(up_ctx(&refl, &ev, &algebra, a, b, 1 << 16).unwrap());
            prop_assert!((fast - slow).abs() <= 1e-12, "{a:?} {b:?}: {fast} vs {slow}");
        }
    }
    Ok(())
}
