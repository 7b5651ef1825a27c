#![allow(dead_code)]

use proptest::prelude::*;
use quantimetric::systems::{Nfa, SubsetState};
use quantimetric::{Carrier, Quantale, QuantaleValue, VRel};

/// Reals in `[0,1]` with the endpoints and quarter points over-represented.
pub fn unit_real() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        1 => Just(1.0),
        1 => (0u8..=4).prop_map(|k| f64::from(k) / 4.0),
        4 => 0.0..=1.0f64,
    ]
}

pub fn unit_value() -> impl Strategy<Value = QuantaleValue> {
    unit_real().prop_map(QuantaleValue::Real)
}

pub fn ext_value() -> impl Strategy<Value = QuantaleValue> {
    prop_oneof![
        1 => Just(QuantaleValue::Infinity),
        1 => Just(QuantaleValue::Real(0.0)),
        4 => (0.0..=20.0f64).prop_map(QuantaleValue::Real),
    ]
}

pub fn bool_value() -> impl Strategy<Value = QuantaleValue> {
    any::<bool>().prop_map(QuantaleValue::Bool)
}

/// A quantale paired with a strategy for its elements.
pub fn value_of(q: Quantale) -> BoxedStrategy<QuantaleValue> {
    match q.id() {
        quantimetric::QuantaleId::Bool2 => bool_value().boxed(),
        quantimetric::QuantaleId::UnitIntervalRev => unit_value().boxed(),
        quantimetric::QuantaleId::ExtNonNegRev => ext_value().boxed(),
    }
}

pub fn matrix(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(unit_real(), k), k)
}

pub fn rel_of(m: &[Vec<f64>]) -> VRel<usize> {
    VRel::from_fn(Quantale::unit_interval(), &Carrier::indexed(m.len()), |x, y| {
        QuantaleValue::Real(m[*x][*y])
    })
    .unwrap()
}

/// Pointwise join of two matrices in quantale order (the smaller real).
pub fn raise(m: &[Vec<f64>], by: &[Vec<f64>]) -> Vec<Vec<f64>> {
    m.iter()
        .zip(by)
        .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a.min(*b)).collect())
        .collect()
}

pub fn subset(width: usize, mask: u32) -> SubsetState {
    SubsetState::from_states(width, (0..width).filter(|i| mask & (1 << i) != 0))
}

pub fn all_subsets(width: usize) -> Vec<SubsetState> {
    (0u32..1 << width).map(|m| subset(width, m)).collect()
}

pub fn all_pairs(xs: &[SubsetState]) -> Vec<(SubsetState, SubsetState)> {
    xs.iter()
        .flat_map(|x| xs.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

/// An NFA over `states` states and `letters` letters: finals as a bitmask,
/// edges as one bitmask of targets per state and letter.
pub fn nfa(states: usize, letters: usize) -> impl Strategy<Value = Nfa> {
    let edges = prop::collection::vec(0u32..1 << states, states * letters);
    (0u32..1 << states, edges).prop_map(move |(finals, edges)| {
        let mut nfa = Nfa::with_sizes(states, letters).unwrap();
        for q in 0..states {
            if finals & (1 << q) != 0 {
                nfa.set_final(q).unwrap();
            }
            for a in 0..letters {
                for t in 0..states {
                    if edges[q * letters + a] & (1 << t) != 0 {
                        nfa.add_transition(q, a, t).unwrap();
                    }
                }
            }
        }
        nfa
    })
}

pub fn small_nfa(max_states: usize) -> impl Strategy<Value = Nfa> {
    (1..=max_states, 1usize..=2).prop_flat_map(|(s, l)| nfa(s, l))
}
