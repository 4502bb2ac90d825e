//! Programs: downward-closed sets of finite partial strings, represented by
//! a finite generator set kept maximal under refinement and deduplicated up
//! to isomorphism. The closure itself is never stored.

use crate::pstring::{EventId, Join, PartialString};
use crate::refine::refines;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("generator with {size} events exceeds the bound {max}")]
    BoundExceeded { size: usize, max: usize },
}

/// A program denoted by the downward closure of its generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    generators: Vec<PartialString>,
}

impl Program {
    /// The empty program 0 (no behaviour at all).
    pub fn zero() -> Self {
        Program {
            generators: Vec::new(),
        }
    }

    /// The identity program 1, generated by the empty partial string.
    pub fn one() -> Self {
        Program {
            generators: vec![PartialString::empty()],
        }
    }

    pub fn from_generators(gens: Vec<PartialString>) -> Self {
        Program {
            generators: normalize(gens),
        }
    }

    pub fn singleton(ps: PartialString) -> Self {
        Program {
            generators: vec![ps],
        }
    }

    pub fn generators(&self) -> &[PartialString] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// Pairwise composition of generators under `join`. Composing only the
    /// generators is sound because both joins are monotone in ⊑.
    pub fn compose(&self, other: &Program, join: Join) -> Program {
        let mut gens = Vec::with_capacity(self.generators.len() * other.generators.len());
        for x in &self.generators {
            for y in &other.generators {
                gens.push(x.join(y, join));
            }
        }
        Program::from_generators(gens)
    }

    /// Nondeterministic choice: generator union with subsumption pruning.
    pub fn union(&self, other: &Program) -> Program {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Program::from_generators(gens)
    }

    /// Program refinement self ⊆ other on the denoted closures: every
    /// generator of self refines some generator of other.
    pub fn refines(&self, other: &Program) -> bool {
        self.generators
            .iter()
            .all(|x| other.generators.iter().any(|y| refines(x, y)))
    }

    pub fn equivalent(&self, other: &Program) -> bool {
        self.refines(other) && other.refines(self)
    }

    /// Materialize the denoted downward closure up to isomorphism by adding
    /// one order-consistent edge at a time to each generator.
    pub fn enumerate_closure(&self, max_events: usize) -> Result<Vec<PartialString>, ClosureError> {
        for g in &self.generators {
            if g.len() > max_events {
                return Err(ClosureError::BoundExceeded {
                    size: g.len(),
                    max: max_events,
                });
            }
        }
        let mut seen = IsoSet::new();
        let mut queue: Vec<PartialString> = Vec::new();
        for g in &self.generators {
            if seen.insert(g.clone()) {
                queue.push(g.clone());
            }
        }
        while let Some(ps) = queue.pop() {
            for ext in order_extensions(&ps) {
                if seen.insert(ext.clone()) {
                    queue.push(ext);
                }
            }
        }
        Ok(seen.into_vec())
    }
}

/// All strings obtained from `ps` by adding a single new ordered pair.
fn order_extensions(ps: &PartialString) -> Vec<PartialString> {
    let n = ps.len();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || ps.le(u, v) || ps.le(v, u) {
                continue;
            }
            let mut edges: Vec<(EventId, EventId)> = ps.edges().to_vec();
            edges.push((u, v));
            out.push(PartialString::new(ps.labels().to_vec(), edges).expect("extension stays acyclic"));
        }
    }
    out
}

/// Drop generators subsumed by another one; keep one representative per
/// isomorphism class. The result is pairwise ⊑-incomparable.
fn normalize(gens: Vec<PartialString>) -> Vec<PartialString> {
    let mut kept: Vec<PartialString> = Vec::new();
    for g in gens {
        if kept.iter().any(|k| refines(&g, k)) {
            continue;
        }
        kept.retain(|k| !refines(k, &g));
        kept.push(g);
    }
    kept
}

/// Set of partial strings up to isomorphism, bucketed by a cheap invariant
/// key with `is_isomorphic` as the final arbiter.
#[derive(Default)]
pub struct IsoSet {
    buckets: HashMap<u64, Vec<PartialString>>,
    count: usize,
}

impl IsoSet {
    pub fn new() -> Self {
        IsoSet::default()
    }

    pub fn insert(&mut self, ps: PartialString) -> bool {
        let key = iso_key(&ps);
        let bucket = self.buckets.entry(key).or_default();
        if bucket.iter().any(|b| b.is_isomorphic(&ps)) {
            return false;
        }
        bucket.push(ps);
        self.count += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, ps: &PartialString) -> bool {
        match self.buckets.get(&iso_key(ps)) {
            Some(bucket) => bucket.iter().any(|b| b.is_isomorphic(ps)),
            None => false,
        }
    }

    pub fn into_vec(self) -> Vec<PartialString> {
        let mut out: Vec<PartialString> = self.buckets.into_values().flatten().collect();
        // Deterministic output order: by size, then order density, then labels.
        out.sort_by(|a, b| {
            (a.len(), a.order_pair_count())
                .cmp(&(b.len(), b.order_pair_count()))
                .then_with(|| format!("{a:?}").cmp(&format!("{b:?}")))
        });
        out
    }
}

/// Isomorphism-invariant fingerprint: sorted per-event profiles of
/// (label, |down|, |up|) plus the total order pair count.
fn iso_key(ps: &PartialString) -> u64 {
    let mut profile: Vec<(String, usize, usize)> = (0..ps.len())
        .map(|e| (ps.label(e).to_string(), ps.down_size(e), ps.up_size(e)))
        .collect();
    profile.sort();
    let mut h = DefaultHasher::new();
    ps.len().hash(&mut h);
    ps.order_pair_count().hash(&mut h);
    profile.hash(&mut h);
    h.finish()
}
