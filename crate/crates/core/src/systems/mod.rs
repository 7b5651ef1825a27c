//! Automata as coalgebras, on-the-fly determinization, the two-chain example
//! family and reference oracles for language distances.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::flift::{FunctorId, FunctorValue};
use crate::vrel::Key;

mod nfa;
mod oracle;
mod subset;

pub use nfa::{AutomatonJson, Nfa, TransitionJson};
pub use oracle::{lang_equiv, lang_equiv_partition, shortest_distinguishing_word, DEFAULT_NODE_CAP};
pub use subset::SubsetState;

/// A coalgebra `ξ: X → F X` with lazily enumerated states.
pub trait Coalgebra: Send + Sync {
    type State: Key;

    fn functor(&self) -> FunctorId;

    fn step(&self, x: &Self::State) -> FunctorValue<Self::State>;
}

/// The determinization of an NFA as a coalgebra for `2 × X^A` on subsets.
#[derive(Clone, Debug)]
pub struct DetCoalgebra {
    nfa: Arc<Nfa>,
}

impl DetCoalgebra {
    pub fn new(nfa: Arc<Nfa>) -> Self {
        DetCoalgebra { nfa }
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    pub fn alphabet_size(&self) -> usize {
        self.nfa.alphabet_size()
    }

    pub fn accepts(&self, s: &SubsetState) -> bool {
        s.intersects(self.nfa.finals())
    }

    pub fn succ(&self, s: &SubsetState, a: usize) -> SubsetState {
        let mut out = SubsetState::empty(self.nfa.num_states());
        for q in s.iter() {
            out.union_with(self.nfa.successors(q, a));
        }
        out
    }

    pub fn singleton(&self, q: usize) -> SubsetState {
        SubsetState::singleton(self.nfa.num_states(), q)
    }
}

/// Shorthand for [`DetCoalgebra::new`].
pub fn determinize(nfa: Arc<Nfa>) -> DetCoalgebra {
    DetCoalgebra::new(nfa)
}

impl Coalgebra for DetCoalgebra {
    type State = SubsetState;

    fn functor(&self) -> FunctorId {
        FunctorId::Machine(self.alphabet_size())
    }

    fn step(&self, s: &SubsetState) -> FunctorValue<SubsetState> {
        FunctorValue::Machine {
            accept: self.accepts(s),
            succ: (0..self.alphabet_size()).map(|a| self.succ(s, a)).collect(),
        }
    }
}

/// A complete deterministic automaton on states `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    accept: Vec<bool>,
    /// `delta[q][a]`
    delta: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn new(accept: Vec<bool>, delta: Vec<Vec<usize>>) -> Result<Self> {
        let n = accept.len();
        if delta.len() != n {
            return Err(Error::Invalid("one transition row per state required".into()));
        }
        let letters = delta.first().map_or(0, Vec::len);
        if n > 0 && letters == 0 {
            return Err(Error::Invalid("alphabet must be nonempty".into()));
        }
        for row in &delta {
            if row.len() != letters || row.iter().any(|&t| t >= n) {
                return Err(Error::Invalid("transition table is not total".into()));
            }
        }
        Ok(Dfa { accept, delta })
    }

    pub fn num_states(&self) -> usize {
        self.accept.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.delta.first().map_or(0, Vec::len)
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accept[q]
    }

    pub fn next(&self, q: usize, a: usize) -> usize {
        self.delta[q][a]
    }

    /// The same automaton read as an NFA with singleton transitions.
    pub fn to_nfa(&self) -> Nfa {
        let mut nfa = Nfa::with_sizes(self.num_states(), self.alphabet_size().max(1))
            .expect("sizes are valid");
        for q in 0..self.num_states() {
            if self.accept[q] {
                nfa.set_final(q).expect("state in range");
            }
            for a in 0..self.alphabet_size() {
                nfa.add_transition(q, a, self.delta[q][a]).expect("state in range");
            }
        }
        nfa
    }
}

impl Coalgebra for Dfa {
    type State = usize;

    fn functor(&self) -> FunctorId {
        FunctorId::Machine(self.alphabet_size())
    }

    fn step(&self, q: &usize) -> FunctorValue<usize> {
        FunctorValue::Machine {
            accept: self.accept[*q],
            succ: self.delta[*q].clone(),
        }
    }
}

/// The distributive law `P(2 × X^A) → 2 × (P X)^A`:
/// `M ↦ (⋁ b, [a ↦ {f(a) | (b, f) ∈ M}])`.
pub fn distributive_law<K: Clone>(m: &[(bool, Vec<K>)], alphabet: usize) -> (bool, Vec<Vec<K>>) {
    let accept = m.iter().any(|(b, _)| *b);
    let succ = (0..alphabet)
        .map(|a| m.iter().map(|(_, f)| f[a].clone()).collect())
        .collect();
    (accept, succ)
}

/// The two-chain automaton: `x0` loops on `a, b` and reaches `x1` on `a`,
/// `y0` loops on `a, b` and reaches `y1` on `b`, every other `xi`/`yi`
/// steps to its successor on both letters, and `xn`, `yn` are final.
///
/// States are named `x0..xn` followed by `y0..yn`; letters are `a, b`.
pub fn gen_fig1(n: usize) -> Result<Nfa> {
    if n < 1 {
        return Err(Error::Invalid("the chain length must be at least 1".into()));
    }
    let names = (0..=n)
        .map(|i| format!("x{i}"))
        .chain((0..=n).map(|i| format!("y{i}")))
        .collect();
    let mut nfa = Nfa::new(names, vec!["a".into(), "b".into()])?;
    let x = |i: usize| i;
    let y = |i: usize| n + 1 + i;
    for a in 0..2 {
        nfa.add_transition(x(0), a, x(0))?;
        nfa.add_transition(y(0), a, y(0))?;
        for i in 1..n {
            nfa.add_transition(x(i), a, x(i + 1))?;
            nfa.add_transition(y(i), a, y(i + 1))?;
        }
    }
    nfa.add_transition(x(0), 0, x(1))?;
    nfa.add_transition(y(0), 1, y(1))?;
    nfa.set_final(x(n))?;
    nfa.set_final(y(n))?;
    Ok(nfa)
}

/// A random NFA: each `(state, letter, target)` edge is present with
/// probability `density`, each state final with probability one half.
pub fn random_nfa(states: usize, letters: usize, density: f64, rng: &mut impl Rng) -> Nfa {
    let mut nfa = Nfa::with_sizes(states, letters).expect("sizes are valid");
    for q in 0..states {
        if rng.gen_bool(0.5) {
            nfa.set_final(q).expect("state in range");
        }
        for a in 0..letters {
            for t in 0..states {
                if rng.gen_bool(density) {
                    nfa.add_transition(q, a, t).expect("state in range");
                }
            }
        }
    }
    nfa
}

/// A random complete DFA with uniformly chosen targets.
pub fn random_dfa(states: usize, letters: usize, rng: &mut impl Rng) -> Dfa {
    let accept = (0..states).map(|_| rng.gen_bool(0.5)).collect();
    let delta = (0..states)
        .map(|_| (0..letters).map(|_| rng.gen_range(0..states)).collect())
        .collect();
    Dfa::new(accept, delta).expect("generated table is total")
}
