//! Shared helpers for the integration suites: a deterministic generator for
//! random strings and programs, the running two-thread example, the algebraic
//! law checker, and an enumerator of partial-order shapes up to isomorphism.
#![allow(dead_code)]

use pomsets::label::{Label, LoadTag, StoreTag};
use pomsets::program::Program;
use pomsets::pstring::{EventId, Join, PartialString};

/// Small deterministic PRNG (xorshift64*), so suite runs are reproducible.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in 0..bound (bound > 0).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.next_u64() % 100 < percent
    }
}

pub fn opaque_pool() -> Vec<Label> {
    ["a", "b", "c"].iter().map(|t| Label::opaque(*t)).collect()
}

/// Random partial string with up to `max_events` events over the pool.
pub fn random_pstring(rng: &mut Rng, max_events: usize, pool: &[Label]) -> PartialString {
    let n = rng.below(max_events + 1);
    let labels: Vec<Label> = (0..n).map(|_| pool[rng.below(pool.len())].clone()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.chance(30) {
                edges.push((i, j));
            }
        }
    }
    PartialString::new(labels, edges).expect("forward edges are acyclic")
}

/// Random elementary program with at most `max_gens` generators.
pub fn random_program(
    rng: &mut Rng,
    max_gens: usize,
    max_events: usize,
    pool: &[Label],
) -> Program {
    let k = rng.below(max_gens + 1);
    Program::from_generators(
        (0..k)
            .map(|_| random_pstring(rng, max_events, pool))
            .collect(),
    )
}

/// The two-thread running example: acquire/release on b, plain accesses
/// on a, two program-order chains.
pub fn two_thread_string() -> PartialString {
    PartialString::new(
        vec![
            Label::load(LoadTag::Acquire, "r0", "b"),
            Label::load(LoadTag::None, "r1", "a"),
            Label::store(StoreTag::None, "a", true),
            Label::store(StoreTag::Release, "b", true),
        ],
        vec![(0, 1), (2, 3)],
    )
    .unwrap()
}

/// The same labels with the extra cross edge e0 ⪯ e3, forming an N.
pub fn n_shape_string() -> PartialString {
    PartialString::new(
        two_thread_string().labels().to_vec(),
        vec![(0, 1), (2, 3), (0, 3)],
    )
    .unwrap()
}

fn eq(a: &Program, b: &Program) -> bool {
    a.refines(b) && b.refines(a)
}

/// Check the full algebraic law set on concrete programs; the exchange
/// inequation additionally uses `u` and `v`. Returns the first failing law.
pub fn check_cka_laws(
    x: &Program,
    y: &Program,
    z: &Program,
    u: &Program,
    v: &Program,
) -> Result<(), &'static str> {
    let zero = Program::zero();
    let one = Program::one();
    if !eq(&x.union(&y.union(z)), &x.union(y).union(z)) {
        return Err("union associativity");
    }
    if !eq(&x.union(x), x) {
        return Err("union idempotence");
    }
    if !eq(&x.union(&zero), x) || !eq(&zero.union(x), x) {
        return Err("union unit");
    }
    if !eq(&x.union(y), &y.union(x)) {
        return Err("union commutativity");
    }
    if !eq(&x.compose(y, Join::Par), &y.compose(x, Join::Par)) {
        return Err("par commutativity");
    }
    for join in [Join::Seq, Join::Par] {
        if !eq(&x.compose(&one, join), x) || !eq(&one.compose(x, join), x) {
            return Err("composition unit");
        }
        if !x.compose(&zero, join).is_zero() || !zero.compose(x, join).is_zero() {
            return Err("composition annihilator");
        }
        if !eq(
            &x.compose(&y.union(z), join),
            &x.compose(y, join).union(&x.compose(z, join)),
        ) {
            return Err("left distributivity");
        }
        if !eq(
            &x.union(y).compose(z, join),
            &x.compose(z, join).union(&y.compose(z, join)),
        ) {
            return Err("right distributivity");
        }
        if !eq(
            &x.compose(&y.compose(z, join), join),
            &x.compose(y, join).compose(z, join),
        ) {
            return Err("composition associativity");
        }
    }
    // (U ∥ V) ; (X ∥ Y) ⊆ (U ; X) ∥ (V ; Y)
    let lhs = u.compose(v, Join::Par).compose(&x.compose(y, Join::Par), Join::Seq);
    let rhs = u.compose(x, Join::Seq).compose(&v.compose(y, Join::Seq), Join::Par);
    if !lhs.refines(&rhs) {
        return Err("exchange inclusion");
    }
    Ok(())
}

/// One representative per isomorphism class of partial orders on n points,
/// as lists of strict ordered pairs. Built by adding one covering pair at a
/// time and deduplicating with a canonical form (minimum over all
/// relabelings), which reaches every class because removing a covering pair
/// of any order leaves an order.
pub fn poset_shapes(n: usize) -> Vec<Vec<(EventId, EventId)>> {
    assert!(n <= 7, "canonical form is factorial in n");
    if n == 0 {
        return vec![Vec::new()];
    }
    let perms = permutations(n);
    let bit = |i: usize, j: usize| i * n + j;
    let canon = |mask: u64| -> u64 {
        perms
            .iter()
            .map(|p| {
                let mut m = 0u64;
                for i in 0..n {
                    for j in 0..n {
                        if mask >> bit(i, j) & 1 == 1 {
                            m |= 1 << bit(p[i], p[j]);
                        }
                    }
                }
                m
            })
            .min()
            .unwrap()
    };
    // Closure of mask ∪ {(a,b)} under transitivity.
    let close = |mask: u64, a: usize, b: usize| -> u64 {
        let mut m = mask | 1 << bit(a, b);
        loop {
            let mut next = m;
            for i in 0..n {
                for j in 0..n {
                    if next >> bit(i, j) & 1 == 1 {
                        for k in 0..n {
                            if next >> bit(j, k) & 1 == 1 {
                                next |= 1 << bit(i, k);
                            }
                        }
                    }
                }
            }
            if next == m {
                return m;
            }
            m = next;
        }
    };
    let mut seen = std::collections::HashSet::new();
    let mut reps: Vec<u64> = Vec::new();
    let mut queue = vec![0u64];
    seen.insert(0u64);
    while let Some(mask) = queue.pop() {
        reps.push(mask);
        for a in 0..n {
            for b in 0..n {
                if a == b || mask >> bit(a, b) & 1 == 1 || mask >> bit(b, a) & 1 == 1 {
                    continue;
                }
                let ext = close(mask, a, b);
                let key = canon(ext);
                if seen.insert(key) {
                    queue.push(key);
                }
            }
        }
    }
    reps.into_iter()
        .map(|mask| {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && mask >> bit(i, j) & 1 == 1 {
                        edges.push((i, j));
                    }
                }
            }
            edges
        })
        .collect()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let x = rest.remove(i);
            for mut p in rec(rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }
    rec((0..n).collect())
}

/// Every assignment of `options` values to `slots` positions, visited in
/// odometer order.
pub fn for_each_assignment(
    slots: usize,
    options: usize,
    mut f: impl FnMut(&[usize]),
) {
    let mut digits = vec![0usize; slots];
    if slots == 0 {
        f(&digits);
        return;
    }
    loop {
        f(&digits);
        let mut pos = 0;
        loop {
            if pos == slots {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < options {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
