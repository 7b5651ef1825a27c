//! Nondeterministic automata and their JSON form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SubsetState;

/// Serialized automaton: states and letters by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonJson {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub finals: Vec<String>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: String,
    pub letter: String,
    pub to: Vec<String>,
}

/// A finite nondeterministic automaton without ε-transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    /// `delta[q][a]`
    delta: Vec<Vec<SubsetState>>,
    finals: SubsetState,
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut idx = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if idx.insert(n.clone(), i).is_some() {
            return Err(Error::Invalid(format!("duplicate {what} name {n:?}")));
        }
    }
    Ok(idx)
}

impl Nfa {
    /// An automaton with no transitions and no final states.
    pub fn new(states: Vec<String>, alphabet: Vec<String>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::Invalid("alphabet must be nonempty".into()));
        }
        index_names(&states, "state")?;
        index_names(&alphabet, "letter")?;
        let n = states.len();
        let delta = vec![vec![SubsetState::empty(n); alphabet.len()]; n];
        Ok(Nfa {
            finals: SubsetState::empty(n),
            states,
            alphabet,
            delta,
        })
    }

    /// States `q0, q1, …` over letters `a, b, …`.
    pub fn with_sizes(states: usize, letters: usize) -> Result<Self> {
        if letters > 26 {
            return Err(Error::Invalid("at most 26 generated letters".into()));
        }
        Self::new(
            (0..states).map(|i| format!("q{i}")).collect(),
            (0..letters)
                .map(|a| char::from(b'a' + a as u8).to_string())
                .collect(),
        )
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn finals(&self) -> &SubsetState {
        &self.finals
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals.contains(q)
    }

    pub fn successors(&self, q: usize, a: usize) -> &SubsetState {
        &self.delta[q][a]
    }

    fn check_state(&self, q: usize) -> Result<()> {
        if q >= self.states.len() {
            return Err(Error::Invalid(format!("state index {q} out of range")));
        }
        Ok(())
    }

    pub fn add_transition(&mut self, from: usize, letter: usize, to: usize) -> Result<()> {
        self.check_state(from)?;
        self.check_state(to)?;
        if letter >= self.alphabet.len() {
            return Err(Error::Invalid(format!("letter index {letter} out of range")));
        }
        self.delta[from][letter].insert(to);
        Ok(())
    }

    pub fn set_final(&mut self, q: usize) -> Result<()> {
        self.check_state(q)?;
        self.finals.insert(q);
        Ok(())
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Invalid(format!("unknown state {name:?}")))
    }

    /// The subset named by a list of state names.
    pub fn subset<S: AsRef<str>>(&self, names: &[S]) -> Result<SubsetState> {
        let mut s = SubsetState::empty(self.num_states());
        for n in names {
            s.insert(self.state_index(n.as_ref())?);
        }
        Ok(s)
    }

    pub fn subset_names(&self, s: &SubsetState) -> Vec<String> {
        s.iter().map(|q| self.states[q].clone()).collect()
    }

    /// `{a, b}` style rendering of a subset.
    pub fn format_subset(&self, s: &SubsetState) -> String {
        format!("{{{}}}", self.subset_names(s).join(","))
    }

    pub fn from_json(j: &AutomatonJson) -> Result<Self> {
        let mut nfa = Nfa::new(j.states.clone(), j.alphabet.clone())?;
        let states = index_names(&j.states, "state")?;
        let letters = index_names(&j.alphabet, "letter")?;
        let lookup = |m: &HashMap<String, usize>, n: &str, what: &str| {
            m.get(n)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("unknown {what} {n:?}")))
        };
        for f in &j.finals {
            nfa.set_final(lookup(&states, f, "state")?)?;
        }
        for t in &j.transitions {
            let from = lookup(&states, &t.from, "state")?;
            let a = lookup(&letters, &t.letter, "letter")?;
            for to in &t.to {
                nfa.add_transition(from, a, lookup(&states, to, "state")?)?;
            }
        }
        Ok(nfa)
    }

    /// Canonical JSON: one transition per nonempty `(state, letter)`.
    pub fn to_json(&self) -> AutomatonJson {
        let mut transitions = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (a, to) in row.iter().enumerate() {
                if !to.is_empty() {
                    transitions.push(TransitionJson {
                        from: self.states[q].clone(),
                        letter: self.alphabet[a].clone(),
                        to: self.subset_names(to),
                    });
                }
            }
        }
        AutomatonJson {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            finals: self.subset_names(&self.finals),
            transitions,
        }
    }
}
