//! Finite partial strings: events, a total labelling, and a happens-before
//! partial order stored as an acyclic edge set with a cached
//! reflexive-transitive closure.

use crate::label::Label;
use std::fmt;
use thiserror::Error;

/// Events are small integers scoped to one partial string. Identity across
/// strings is only ever up to isomorphism.
pub type EventId = usize;

/// Which composition operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Join {
    Seq,
    Par,
}

impl fmt::Display for Join {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Join::Seq => write!(f, "seq"),
            Join::Par => write!(f, "par"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PsError {
    #[error("edge ({0}, {1}) references an event out of range")]
    EdgeOutOfRange(EventId, EventId),
    #[error("edge set is cyclic")]
    Cyclic,
}

/// Square bit matrix used for the closure relation.
#[derive(Clone, PartialEq, Eq, Hash)]
struct BitMatrix {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64).max(1);
        BitMatrix {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1 << (j % 64);
    }

    /// row(dst) |= row(src)
    fn or_row(&mut self, dst: usize, src: usize) {
        let w = self.words_per_row;
        let (d, s) = (dst * w, src * w);
        for k in 0..w {
            let v = self.bits[s + k];
            self.bits[d + k] |= v;
        }
    }

    fn row_count(&self, i: usize) -> usize {
        let w = self.words_per_row;
        self.bits[i * w..(i + 1) * w]
            .iter()
            .map(|x| x.count_ones() as usize)
            .sum()
    }
}

/// A finite partial string: a labelled set of events with a partial order.
///
/// Values are immutable once constructed; all operations are pure.
#[derive(Clone)]
pub struct PartialString {
    labels: Vec<Label>,
    edges: Vec<(EventId, EventId)>,
    closure: BitMatrix,
}

impl PartialString {
    /// Build from a total labelling and an acyclic edge set. The happens-before
    /// order is the reflexive-transitive closure of `edges`.
    pub fn new(labels: Vec<Label>, edges: Vec<(EventId, EventId)>) -> Result<Self, PsError> {
        let n = labels.len();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(PsError::EdgeOutOfRange(a, b));
            }
        }
        let order = topo_order(n, &edges).ok_or(PsError::Cyclic)?;

        let mut closure = BitMatrix::new(n);
        let mut succs: Vec<Vec<EventId>> = vec![Vec::new(); n];
        for &(a, b) in &edges {
            succs[a].push(b);
        }
        // Reverse topological order: each row already holds its successors'
        // closures when we get to it.
        for &v in order.iter().rev() {
            closure.set(v, v);
            for &w in &succs[v] {
                closure.or_row(v, w);
            }
        }
        Ok(PartialString {
            labels,
            edges,
            closure,
        })
    }

    /// The unique empty partial string.
    pub fn empty() -> Self {
        PartialString::new(Vec::new(), Vec::new()).unwrap()
    }

    pub fn singleton(label: Label) -> Self {
        PartialString::new(vec![label], Vec::new()).unwrap()
    }

    /// A totally ordered string of the given labels.
    pub fn chain(labels: Vec<Label>) -> Self {
        let edges = (1..labels.len()).map(|i| (i - 1, i)).collect();
        PartialString::new(labels, edges).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        0..self.len()
    }

    pub fn label(&self, e: EventId) -> &Label {
        &self.labels[e]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// The stored generating edge set (not necessarily reduced).
    pub fn edges(&self) -> &[(EventId, EventId)] {
        &self.edges
    }

    /// e ⪯ e' in the happens-before order (reflexive).
    #[inline]
    pub fn le(&self, a: EventId, b: EventId) -> bool {
        self.closure.get(a, b)
    }

    /// e ≺ e' strictly.
    #[inline]
    pub fn lt(&self, a: EventId, b: EventId) -> bool {
        a != b && self.closure.get(a, b)
    }

    pub fn comparable(&self, a: EventId, b: EventId) -> bool {
        self.le(a, b) || self.le(b, a)
    }

    /// Number of events below-or-equal `e`.
    pub fn down_size(&self, e: EventId) -> usize {
        (0..self.len()).filter(|&u| self.le(u, e)).count()
    }

    /// Number of events above-or-equal `e`.
    pub fn up_size(&self, e: EventId) -> usize {
        self.closure.row_count(e)
    }

    /// Count of ordered pairs (a, b) with a ⪯ b, including reflexive ones.
    pub fn order_pair_count(&self) -> usize {
        (0..self.len()).map(|i| self.closure.row_count(i)).sum()
    }

    /// Covering edges of the order: u ≺ v with no w strictly between.
    pub fn covering_edges(&self) -> Vec<(EventId, EventId)> {
        let n = self.len();
        let mut out = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if !self.lt(u, v) {
                    continue;
                }
                let covered = (0..n).any(|w| self.lt(u, w) && self.lt(w, v));
                if !covered {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Events of `self` in a topological order of the happens-before relation.
    pub fn topological_order(&self) -> Vec<EventId> {
        let mut order: Vec<EventId> = (0..self.len()).collect();
        order.sort_by_key(|&e| (self.down_size(e), e));
        order
    }

    fn maximal_events(&self) -> Vec<EventId> {
        (0..self.len())
            .filter(|&e| !(0..self.len()).any(|f| self.lt(e, f)))
            .collect()
    }

    fn minimal_events(&self) -> Vec<EventId> {
        (0..self.len())
            .filter(|&e| !(0..self.len()).any(|f| self.lt(f, e)))
            .collect()
    }

    fn compose(&self, other: &PartialString, join: Join) -> PartialString {
        let offset = self.len();
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
        if join == Join::Seq {
            // Maximal-to-minimal edges close to the full cross order.
            for a in self.maximal_events() {
                for b in other.minimal_events() {
                    edges.push((a, b + offset));
                }
            }
        }
        PartialString::new(labels, edges).expect("composition preserves acyclicity")
    }

    /// Sequential composition: every event of `self` happens before every
    /// event of `other`. The right operand's events are renumbered.
    pub fn seq(&self, other: &PartialString) -> PartialString {
        self.compose(other, Join::Seq)
    }

    /// Concurrent composition: disjoint union with no cross ordering.
    pub fn par(&self, other: &PartialString) -> PartialString {
        self.compose(other, Join::Par)
    }

    pub fn join(&self, other: &PartialString, join: Join) -> PartialString {
        self.compose(other, join)
    }

    /// n-fold self-composition; n = 0 yields the empty partial string.
    pub fn power(&self, n: usize, join: Join) -> PartialString {
        let mut acc = PartialString::empty();
        for _ in 0..n {
            acc = self.compose(&acc, join);
        }
        acc
    }

    /// All linear extensions, as event sequences.
    pub fn linearizations(&self) -> Vec<Vec<EventId>> {
        let n = self.len();
        let mut out = Vec::new();
        let mut placed = vec![false; n];
        let mut cur = Vec::with_capacity(n);
        fn rec(
            ps: &PartialString,
            placed: &mut [bool],
            cur: &mut Vec<EventId>,
            out: &mut Vec<Vec<EventId>>,
        ) {
            if cur.len() == placed.len() {
                out.push(cur.clone());
                return;
            }
            for e in 0..placed.len() {
                if placed[e] {
                    continue;
                }
                let ready = (0..placed.len()).all(|u| !ps.lt(u, e) || placed[u]);
                if ready {
                    placed[e] = true;
                    cur.push(e);
                    rec(ps, placed, cur, out);
                    cur.pop();
                    placed[e] = false;
                }
            }
        }
        rec(self, &mut placed, &mut cur, &mut out);
        out
    }

    /// True when the happens-before relation is a total order.
    pub fn is_total(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| (a + 1..n).all(|b| self.comparable(a, b)))
    }

    /// Mutual refinement; see the refine module for one-sided checks.
    pub fn is_isomorphic(&self, other: &PartialString) -> bool {
        crate::refine::refines(self, other) && crate::refine::refines(other, self)
    }
}

/// Structural equality: same labels and same happens-before closure. Two
/// strings that differ only in redundant stored edges compare equal.
impl PartialEq for PartialString {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.closure == other.closure
    }
}

impl Eq for PartialString {}

impl fmt::Debug for PartialString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialString{{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "e{i}:{l}")?;
        }
        write!(f, " |")?;
        for (a, b) in self.covering_edges() {
            write!(f, " e{a}<e{b}")?;
        }
        write!(f, "}}")
    }
}

/// Kahn topological sort over an explicit edge list; `None` on a cycle.
fn topo_order(n: usize, edges: &[(EventId, EventId)]) -> Option<Vec<EventId>> {
    let mut indeg = vec![0usize; n];
    let mut succs: Vec<Vec<EventId>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        indeg[b] += 1;
        succs[a].push(b);
    }
    let mut queue: Vec<EventId> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop() {
        order.push(v);
        for &w in &succs[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}
