//! Reference oracles on determinized automata: shortest distinguishing
//! words by breadth-first search and language equivalence by union-find.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};

use super::{DetCoalgebra, SubsetState};

/// Default bound on explored subset pairs.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Length of a shortest word accepted from exactly one of `s1`, `s2`, or
/// `None` when they accept the same language.
pub fn shortest_distinguishing_word(
    det: &DetCoalgebra,
    s1: &SubsetState,
    s2: &SubsetState,
    cap: usize,
) -> Result<Option<usize>> {
    let mut seen: HashSet<(SubsetState, SubsetState)> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((s1.clone(), s2.clone()));
    queue.push_back((s1.clone(), s2.clone(), 0usize));
    while let Some((a, b, depth)) = queue.pop_front() {
        if det.accepts(&a) != det.accepts(&b) {
            return Ok(Some(depth));
        }
        for l in 0..det.alphabet_size() {
            let next = (det.succ(&a, l), det.succ(&b, l));
            if !seen.contains(&next) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded {
                        what: "subset pairs",
                        needed: seen.len() + 1,
                        cap,
                    });
                }
                seen.insert(next.clone());
                queue.push_back((next.0, next.1, depth + 1));
            }
        }
    }
    Ok(None)
}

#[derive(Default)]
struct UnionFind {
    ids: HashMap<SubsetState, usize>,
    parent: Vec<usize>,
}

impl UnionFind {
    fn id(&mut self, s: &SubsetState) -> usize {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.ids.insert(s.clone(), i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
}

/// Language equivalence of two subsets, closing a relation under union-find
/// as in Hopcroft and Karp's algorithm.
pub fn lang_equiv(det: &DetCoalgebra, s1: &SubsetState, s2: &SubsetState, cap: usize) -> Result<bool> {
    let mut uf = UnionFind::default();
    let mut todo = vec![(s1.clone(), s2.clone())];
    while let Some((a, b)) = todo.pop() {
        let (ia, ib) = (uf.id(&a), uf.id(&b));
        let (ra, rb) = (uf.find(ia), uf.find(ib));
        if ra == rb {
            continue;
        }
        if det.accepts(&a) != det.accepts(&b) {
            return Ok(false);
        }
        uf.parent[ra] = rb;
        if uf.parent.len() > cap {
            return Err(Error::CapExceeded {
                what: "subset states",
                needed: uf.parent.len(),
                cap,
            });
        }
        for l in 0..det.alphabet_size() {
            todo.push((det.succ(&a, l), det.succ(&b, l)));
        }
    }
    Ok(true)
}

/// Classes of language-equivalent subsets among `states`, each class and
/// the list of classes sorted.
pub fn lang_equiv_partition(
    det: &DetCoalgebra,
    states: &[SubsetState],
    cap: usize,
) -> Result<Vec<Vec<SubsetState>>> {
    let mut classes: Vec<Vec<SubsetState>> = Vec::new();
    let mut sorted = states.to_vec();
    sorted.sort();
    sorted.dedup();
    'next: for s in sorted {
        for class in classes.iter_mut() {
            if lang_equiv(det, &class[0], &s, cap)? {
                class.push(s);
                continue 'next;
            }
        }
        classes.push(vec![s]);
    }
    classes.sort();
    Ok(classes)
}
