//! Partial-string refinement x ⊑ y: search for a monotonic bijective
//! morphism f from y to x, either by label-filtered backtracking or through
//! a propositional encoding solved by a small built-in DPLL routine.

use crate::label::Label;
use crate::pstring::{EventId, PartialString};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Which decision routine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Backtrack,
    Sat,
}

/// A witness for x ⊑ y: a label-preserving, order-preserving bijection
/// from the events of y onto the events of x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    /// `map[e]` is the image in x of event `e` of y.
    pub map: Vec<EventId>,
}

impl Morphism {
    /// Validity check, useful as an independent oracle over returned witnesses.
    pub fn is_valid(&self, x: &PartialString, y: &PartialString) -> bool {
        if self.map.len() != y.len() || x.len() != y.len() {
            return false;
        }
        let mut seen = vec![false; x.len()];
        for (e, &img) in self.map.iter().enumerate() {
            if img >= x.len() || seen[img] {
                return false;
            }
            seen[img] = true;
            if y.label(e) != x.label(img) {
                return false;
            }
        }
        for e in 0..y.len() {
            for f in 0..y.len() {
                if y.le(e, f) && !x.le(self.map[e], self.map[f]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Decide x ⊑ y, returning a witness morphism when it holds.
pub fn find_morphism(x: &PartialString, y: &PartialString, method: Method) -> Option<Morphism> {
    if x.len() != y.len() || !label_multisets_match(x, y) {
        return None;
    }
    match method {
        Method::Backtrack => backtrack(x, y),
        Method::Sat => {
            let cnf = emit_cnf(x, y);
            cnf.solve().map(|model| cnf.extract_morphism(&model, y.len()))
        }
    }
}

/// x ⊑ y: x is at least as ordered as y with the same labelled events.
pub fn refines(x: &PartialString, y: &PartialString) -> bool {
    find_morphism(x, y, Method::Backtrack).is_some()
}

fn label_multisets_match(x: &PartialString, y: &PartialString) -> bool {
    let mut counts: BTreeMap<&Label, isize> = BTreeMap::new();
    for e in 0..x.len() {
        *counts.entry(x.label(e)).or_insert(0) += 1;
    }
    for e in 0..y.len() {
        *counts.entry(y.label(e)).or_insert(0) -= 1;
    }
    counts.values().all(|&c| c == 0)
}

/// Candidate targets in x for each event of y: equal label and compatible
/// down-set/up-set cardinalities (a morphism can only map into events with
/// at least as many predecessors and successors).
fn candidates(x: &PartialString, y: &PartialString) -> Vec<Vec<EventId>> {
    let x_down: Vec<usize> = (0..x.len()).map(|e| x.down_size(e)).collect();
    let x_up: Vec<usize> = (0..x.len()).map(|e| x.up_size(e)).collect();
    (0..y.len())
        .map(|e| {
            let (d, u) = (y.down_size(e), y.up_size(e));
            (0..x.len())
                .filter(|&a| y.label(e) == x.label(a) && d <= x_down[a] && u <= x_up[a])
                .collect()
        })
        .collect()
}

fn backtrack(x: &PartialString, y: &PartialString) -> Option<Morphism> {
    let n = y.len();
    if n == 0 {
        return Some(Morphism { map: Vec::new() });
    }
    let cand = candidates(x, y);
    if cand.iter().any(|c| c.is_empty()) {
        return None;
    }
    let order = y.topological_order();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; x.len()];

    fn assign(
        x: &PartialString,
        y: &PartialString,
        order: &[EventId],
        cand: &[Vec<EventId>],
        depth: usize,
        map: &mut [EventId],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let e = order[depth];
        for &a in &cand[e] {
            if used[a] {
                continue;
            }
            // Predecessors of e in y were assigned earlier (topological order),
            // so checking them keeps the partial map monotone.
            let ok = order[..depth]
                .iter()
                .all(|&p| !y.le(p, e) || x.le(map[p], a));
            if !ok {
                continue;
            }
            map[e] = a;
            used[a] = true;
            if assign(x, y, order, cand, depth + 1, map, used) {
                return true;
            }
            used[a] = false;
            map[e] = usize::MAX;
        }
        false
    }

    assign(x, y, &order, &cand, 0, &mut map, &mut used).then_some(Morphism { map })
}

/// Propositional encoding of the morphism search. One variable per
/// label-compatible pair (e ∈ E_y, a ∈ E_x); exactly-one clauses enforce
/// bijectivity, binary clauses forbid order violations. Satisfiable exactly
/// when x ⊑ y.
#[derive(Debug, Clone)]
pub struct CnfInstance {
    pub num_vars: usize,
    /// DIMACS-style clauses: positive/negative 1-based literals.
    pub clauses: Vec<Vec<i32>>,
    /// 0-based variable index -> (event of y, event of x).
    pub var_pairs: Vec<(EventId, EventId)>,
}

/// Build the propositional refinement instance for x ⊑ y.
pub fn emit_cnf(x: &PartialString, y: &PartialString) -> CnfInstance {
    let mut inst = CnfInstance {
        num_vars: 0,
        clauses: Vec::new(),
        var_pairs: Vec::new(),
    };
    if x.len() != y.len() {
        inst.clauses.push(Vec::new());
        return inst;
    }
    let cand = candidates(x, y);
    let mut var_of: BTreeMap<(EventId, EventId), i32> = BTreeMap::new();
    for (e, cs) in cand.iter().enumerate() {
        for &a in cs {
            inst.var_pairs.push((e, a));
            var_of.insert((e, a), inst.var_pairs.len() as i32);
        }
    }
    inst.num_vars = inst.var_pairs.len();

    // Exactly one image per source event.
    for (e, cs) in cand.iter().enumerate() {
        let lits: Vec<i32> = cs.iter().map(|&a| var_of[&(e, a)]).collect();
        inst.clauses.push(lits.clone());
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                inst.clauses.push(vec![-lits[i], -lits[j]]);
            }
        }
    }
    // At most one source per target event (with equal sizes and totality this
    // forces a bijection), plus at-least-one to fail fast on label gaps.
    for a in 0..x.len() {
        let lits: Vec<i32> = (0..y.len())
            .filter_map(|e| var_of.get(&(e, a)).copied())
            .collect();
        inst.clauses.push(lits.clone());
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                inst.clauses.push(vec![-lits[i], -lits[j]]);
            }
        }
    }
    // Monotonicity: e ≺ e' in y forbids images that are unordered in x.
    for e in 0..y.len() {
        for f in 0..y.len() {
            if e == f || !y.le(e, f) {
                continue;
            }
            for &a in &cand[e] {
                for &b in &cand[f] {
                    if !x.le(a, b) {
                        inst.clauses.push(vec![-var_of[&(e, a)], -var_of[&(f, b)]]);
                    }
                }
            }
        }
    }
    inst
}

impl CnfInstance {
    /// Decide satisfiability with unit propagation plus chronological
    /// backtracking; returns a model when satisfiable.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let mut assign: Vec<Option<bool>> = vec![None; self.num_vars];
        if self.clauses.iter().any(|c| c.is_empty()) {
            return None;
        }
        self.dpll(&mut assign)
            .then(|| assign.iter().map(|v| v.unwrap_or(false)).collect())
    }

    fn dpll(&self, assign: &mut Vec<Option<bool>>) -> bool {
        // Unit propagation to a fixed point.
        let mut trail: Vec<usize> = Vec::new();
        loop {
            let mut unit: Option<i32> = None;
            for clause in &self.clauses {
                let mut satisfied = false;
                let mut unassigned: Option<i32> = None;
                let mut count = 0;
                for &lit in clause {
                    let var = lit.unsigned_abs() as usize - 1;
                    match assign[var] {
                        Some(v) if v == (lit > 0) => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            unassigned = Some(lit);
                            count += 1;
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match count {
                    0 => {
                        for v in trail {
                            assign[v] = None;
                        }
                        return false;
                    }
                    1 => {
                        unit = unassigned;
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some(lit) => {
                    let var = lit.unsigned_abs() as usize - 1;
                    assign[var] = Some(lit > 0);
                    trail.push(var);
                }
                None => break,
            }
        }
        let next = (0..self.num_vars).find(|&v| assign[v].is_none());
        let result = match next {
            None => true,
            Some(v) => {
                let branch = |val: bool, assign: &mut Vec<Option<bool>>| {
                    assign[v] = Some(val);
                    let ok = self.dpll(assign);
                    if !ok {
                        assign[v] = None;
                    }
                    ok
                };
                branch(true, assign) || branch(false, assign)
            }
        };
        if !result {
            for v in trail {
                assign[v] = None;
            }
        }
        result
    }

    fn extract_morphism(&self, model: &[bool], n: usize) -> Morphism {
        let mut map = vec![usize::MAX; n];
        for (i, &(e, a)) in self.var_pairs.iter().enumerate() {
            if model[i] {
                map[e] = a;
            }
        }
        Morphism { map }
    }

    /// Standard DIMACS CNF serialization.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            let _ = writeln!(out, "0");
        }
        out
    }

    /// Sidecar map from DIMACS variable index to the (source, target) pair,
    /// using event names from the two strings.
    pub fn var_map_sidecar(&self) -> String {
        let mut out = String::new();
        for (i, (e, a)) in self.var_pairs.iter().enumerate() {
            let _ = writeln!(out, "map {} e{} e{}", i + 1, e, a);
        }
        out
    }
}
