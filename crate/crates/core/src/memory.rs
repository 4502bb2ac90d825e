//! Relaxed sequential consistency over partial strings: the per-address
//! ordering discipline on release/acquire events, the read-from axioms
//! (synchronizes-with, write-coherence, from-read), the read-consistency
//! lattice operations, and the equivalence check between the two views.

use crate::label::{Addr, Label, StoreTag};
use crate::program::{ClosureError, Program};
use crate::pstring::{EventId, PartialString};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("event e{0} is not a load")]
    NotALoad(EventId),
    #[error("read-from map is missing an entry for load e{0}")]
    MissingLoad(EventId),
    #[error("read-from map keys non-load event e{0}")]
    NonLoadKey(EventId),
    #[error("read-from target e{1} of load e{0} is not a store")]
    TargetNotStore(EventId, EventId),
    #[error("load e{0} and its read-from target e{1} access different locations")]
    AddressMismatch(EventId, EventId),
    #[error("load e{0} reads from bottom but stores on its location happen before it")]
    BottomWithEarlierStore(EventId),
    #[error("read-from map references event e{0} outside the string")]
    UnknownEvent(EventId),
}

/// Where a load reads from: an actual store event, or the implicit initial
/// value of its location (the bottom of the store lattice).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfTarget {
    Store(EventId),
    Initial,
}

/// Total read-from function on the loads of one partial string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RfMap {
    map: BTreeMap<EventId, RfTarget>,
}

impl RfMap {
    pub fn new() -> Self {
        RfMap::default()
    }

    pub fn insert(&mut self, load: EventId, target: RfTarget) {
        self.map.insert(load, target);
    }

    pub fn get(&self, load: EventId) -> Option<RfTarget> {
        self.map.get(&load).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventId, RfTarget)> + '_ {
        self.map.iter().map(|(&l, &t)| (l, t))
    }

    /// Well-formedness against a string: total on loads, keys are loads,
    /// targets are same-address stores, and bottom only where no store
    /// happens before the load.
    pub fn validate(&self, x: &PartialString) -> Result<(), MemoryError> {
        for (&e, &target) in &self.map {
            if e >= x.len() {
                return Err(MemoryError::UnknownEvent(e));
            }
            if !x.label(e).is_load() {
                return Err(MemoryError::NonLoadKey(e));
            }
            match target {
                RfTarget::Store(s) => {
                    if s >= x.len() {
                        return Err(MemoryError::UnknownEvent(s));
                    }
                    if !x.label(s).is_store() {
                        return Err(MemoryError::TargetNotStore(e, s));
                    }
                    if x.label(e).addr() != x.label(s).addr() {
                        return Err(MemoryError::AddressMismatch(e, s));
                    }
                }
                RfTarget::Initial => {
                    if !hb_stores(x, e)?.is_empty() {
                        return Err(MemoryError::BottomWithEarlierStore(e));
                    }
                }
            }
        }
        for e in 0..x.len() {
            if x.label(e).is_load() && !self.map.contains_key(&e) {
                return Err(MemoryError::MissingLoad(e));
            }
        }
        Ok(())
    }
}

/// Least upper bound of the stores happening before a load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbLub {
    /// No store happens before the load.
    Bottom,
    /// The set has a maximum.
    Store(EventId),
    /// Maximal elements are incomparable; no least upper bound in the set.
    Undefined,
}

/// One recorded axiom violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SynchronizesWith { load: EventId, store: EventId },
    WriteCoherence { a: EventId, b: EventId },
    FromRead { load: EventId, later: EventId },
    WeakReadConsistency { load: EventId },
    StrongReadConsistency { load: EventId },
    ScRelaxed { a: EventId, b: EventId },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::SynchronizesWith { .. } => "sw",
            Violation::WriteCoherence { .. } => "wc",
            Violation::FromRead { .. } => "fr",
            Violation::WeakReadConsistency { .. } => "weak-rc",
            Violation::StrongReadConsistency { .. } => "strong-rc",
            Violation::ScRelaxed { .. } => "sc-relaxed",
        }
    }

    pub fn events(&self) -> Vec<EventId> {
        match *self {
            Violation::SynchronizesWith { load, store } => vec![load, store],
            Violation::WriteCoherence { a, b } => vec![a, b],
            Violation::FromRead { load, later } => vec![load, later],
            Violation::WeakReadConsistency { load } => vec![load],
            Violation::StrongReadConsistency { load } => vec![load],
            Violation::ScRelaxed { a, b } => vec![a, b],
        }
    }
}

/// Axiom flags for one string under one read-from map. All of the read-from
/// axioms are evaluated on release/acquire events only; pairs that leave
/// that scope are listed in `unscoped_rf` rather than silently dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub sw: bool,
    pub wc: bool,
    pub fr: bool,
    pub weak_rc: bool,
    pub strong_rc: bool,
    pub sc_relaxed: bool,
    pub witnesses: Vec<Violation>,
    /// Acquire loads whose read-from target is a non-release store.
    pub unscoped_rf: Vec<(EventId, EventId)>,
}

impl AxiomReport {
    /// The three-axiom conjunction.
    pub fn axioms_hold(&self) -> bool {
        self.sw && self.wc && self.fr
    }
}

fn addresses(x: &PartialString) -> Vec<Addr> {
    let mut out: Vec<Addr> = Vec::new();
    for e in 0..x.len() {
        if let Some(a) = x.label(e).addr() {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
    }
    out
}

fn acquires_on(x: &PartialString, addr: &Addr) -> Vec<EventId> {
    (0..x.len())
        .filter(|&e| x.label(e).is_acquire() && x.label(e).addr() == Some(addr))
        .collect()
}

fn releases_on(x: &PartialString, addr: &Addr) -> Vec<EventId> {
    (0..x.len())
        .filter(|&e| x.label(e).is_release() && x.label(e).addr() == Some(addr))
        .collect()
}

/// Per address: releases totally ordered, and every acquire/release pair
/// comparable.
pub fn is_sc_relaxed(x: &PartialString) -> bool {
    sc_relaxed_witness(x).is_none()
}

fn sc_relaxed_witness(x: &PartialString) -> Option<(EventId, EventId)> {
    for addr in addresses(x) {
        let rels = releases_on(x, &addr);
        for (i, &a) in rels.iter().enumerate() {
            for &b in &rels[i + 1..] {
                if !x.comparable(a, b) {
                    return Some((a, b));
                }
            }
        }
        for &l in &acquires_on(x, &addr) {
            for &s in &rels {
                if !x.comparable(l, s) {
                    return Some((l, s));
                }
            }
        }
    }
    None
}

/// All stores on the load's location that happen before (or equal) it.
pub fn hb_stores(x: &PartialString, load: EventId) -> Result<Vec<EventId>, MemoryError> {
    if load >= x.len() {
        return Err(MemoryError::UnknownEvent(load));
    }
    if !x.label(load).is_load() {
        return Err(MemoryError::NotALoad(load));
    }
    let addr = x.label(load).addr().cloned();
    Ok((0..x.len())
        .filter(|&s| {
            x.label(s).is_store() && x.label(s).addr().cloned() == addr && x.le(s, load)
        })
        .collect())
}

fn lub_of(x: &PartialString, set: &[EventId]) -> HbLub {
    if set.is_empty() {
        return HbLub::Bottom;
    }
    match set.iter().find(|&&m| set.iter().all(|&s| x.le(s, m))) {
        Some(&m) => HbLub::Store(m),
        None => HbLub::Undefined,
    }
}

/// The maximum of `hb_stores` when it exists, bottom when the set is empty,
/// undefined when its maximal elements are incomparable.
pub fn lub_hb_stores(x: &PartialString, load: EventId) -> Result<HbLub, MemoryError> {
    Ok(lub_of(x, &hb_stores(x, load)?))
}

/// Releases on the load's location happening before it: the read-consistency
/// set restricted to the synchronizing scope.
fn hb_releases(x: &PartialString, load: EventId) -> Vec<EventId> {
    let addr = x.label(load).addr().cloned();
    (0..x.len())
        .filter(|&s| {
            x.label(s).is_release() && x.label(s).addr().cloned() == addr && x.le(s, load)
        })
        .collect()
}

/// Evaluate the weak-memory axioms of `x` under `rf`, scoped to
/// release/acquire events per address.
pub fn check_axioms(x: &PartialString, rf: &RfMap) -> Result<AxiomReport, MemoryError> {
    rf.validate(x)?;
    let mut report = AxiomReport {
        sw: true,
        wc: true,
        fr: true,
        weak_rc: true,
        strong_rc: true,
        sc_relaxed: true,
        witnesses: Vec::new(),
        unscoped_rf: Vec::new(),
    };

    if let Some((a, b)) = sc_relaxed_witness(x) {
        report.sc_relaxed = false;
        report.witnesses.push(Violation::ScRelaxed { a, b });
    }

    for addr in addresses(x) {
        let rels = releases_on(x, &addr);
        // Write coherence: releases on one location are totally ordered.
        for (i, &a) in rels.iter().enumerate() {
            for &b in &rels[i + 1..] {
                if !x.comparable(a, b) {
                    report.wc = false;
                    report.witnesses.push(Violation::WriteCoherence { a, b });
                }
            }
        }
        for &l in &acquires_on(x, &addr) {
            // A release target inside scope, the initial bottom, or a flagged
            // non-release target outside the release/acquire scope.
            let target = match rf.get(l).expect("validated totality") {
                RfTarget::Store(s) if x.label(s).is_release() => Some(s),
                RfTarget::Store(s) => {
                    report.unscoped_rf.push((l, s));
                    continue;
                }
                RfTarget::Initial => None,
            };
            // Synchronizes-with: the observed release happens before the load.
            if let Some(s) = target {
                if !x.le(s, l) {
                    report.sw = false;
                    report.witnesses.push(Violation::SynchronizesWith { load: l, store: s });
                }
            }
            // From-read: releases strictly after the observed store must also
            // be after the load. Reading bottom behaves as a store below
            // every release.
            for &s2 in &rels {
                let after_target = match target {
                    Some(s) => x.lt(s, s2),
                    None => true,
                };
                if after_target && !x.le(l, s2) {
                    report.fr = false;
                    report.witnesses.push(Violation::FromRead { load: l, later: s2 });
                }
            }
            // Read consistency against the lub of hb releases.
            let lub = lub_of(x, &hb_releases(x, l));
            let weak_ok = match (lub, target) {
                (HbLub::Undefined, _) => false,
                (_, None) => true,
                (HbLub::Bottom, Some(_)) => true,
                (HbLub::Store(m), Some(s)) => x.le(m, s),
            };
            if !weak_ok {
                report.weak_rc = false;
                report
                    .witnesses
                    .push(Violation::WeakReadConsistency { load: l });
            }
            let strong_ok = match (lub, target) {
                (HbLub::Bottom, None) => true,
                (HbLub::Store(m), Some(s)) => m == s,
                _ => false,
            };
            if !strong_ok {
                report.strong_rc = false;
                report
                    .witnesses
                    .push(Violation::StrongReadConsistency { load: l });
            }
        }
    }
    Ok(report)
}

/// Check that the two characterizations coincide on this string and map:
/// "SC-relaxed and every acquire reads the lub of its happens-before stores"
/// against "synchronizes-with, write-coherence and from-read all hold".
pub fn sc_relaxed_equivalence(x: &PartialString, rf: &RfMap) -> Result<bool, MemoryError> {
    let report = check_axioms(x, rf)?;
    let mut lhs = is_sc_relaxed(x);
    if lhs {
        for addr in addresses(x) {
            for l in acquires_on(x, &addr) {
                let lub = lub_hb_stores(x, l)?;
                let matches = match (lub, rf.get(l).expect("validated totality")) {
                    (HbLub::Store(m), RfTarget::Store(s)) => m == s,
                    (HbLub::Bottom, RfTarget::Initial) => true,
                    _ => false,
                };
                if !matches {
                    lhs = false;
                }
            }
        }
    }
    Ok(lhs == report.axioms_hold())
}

/// The members of the enumerated closure that satisfy the SC-relaxed
/// ordering discipline.
pub fn sc_relaxed_restrict(
    program: &Program,
    max_events: usize,
) -> Result<Vec<PartialString>, ClosureError> {
    Ok(program
        .enumerate_closure(max_events)?
        .into_iter()
        .filter(is_sc_relaxed_ref)
        .collect())
}

fn is_sc_relaxed_ref(x: &PartialString) -> bool {
    is_sc_relaxed(x)
}

/// Unordered pairs of non-synchronizing accesses to one location with at
/// least one store. Read-read pairs and pairs with a synchronizing member
/// are not races.
pub fn find_races(x: &PartialString) -> Vec<(EventId, EventId)> {
    let mut out = Vec::new();
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            let (la, lb) = (x.label(a), x.label(b));
            if !la.is_non_synchronizing() || !lb.is_non_synchronizing() {
                continue;
            }
            if la.addr() != lb.addr() || la.addr().is_none() {
                continue;
            }
            if !la.is_store() && !lb.is_store() {
                continue;
            }
            if !x.comparable(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Prepend one release store per used address, each ordered before every
/// original event, and remap event ids accordingly. Returns the new string
/// and the id of the initializer for each address.
pub fn add_initializers(x: &PartialString) -> (PartialString, BTreeMap<Addr, EventId>) {
    let addrs = addresses(x);
    let k = addrs.len();
    let mut labels: Vec<Label> = addrs
        .iter()
        .map(|a| Label::store(StoreTag::Release, a.0.clone(), false))
        .collect();
    labels.extend(x.labels().iter().cloned());
    let mut edges: Vec<(EventId, EventId)> = x
        .edges()
        .iter()
        .map(|&(a, b)| (a + k, b + k))
        .collect();
    for i in 0..k {
        for e in 0..x.len() {
            edges.push((i, e + k));
        }
    }
    let ps = PartialString::new(labels, edges).expect("initializers keep the order acyclic");
    let index = addrs
        .into_iter()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    (ps, index)
}

/// Optional lint: loads whose read-from target wrote a different bit than
/// the latest store that happens before them would have.
pub fn lint_value_mismatch(x: &PartialString, rf: &RfMap) -> Result<Vec<EventId>, MemoryError> {
    rf.validate(x)?;
    let mut out = Vec::new();
    for e in 0..x.len() {
        if !x.label(e).is_load() {
            continue;
        }
        if let (Some(RfTarget::Store(s)), Ok(HbLub::Store(m))) = (rf.get(e), lub_hb_stores(x, e)) {
            if s != m && x.label(s).store_bit() != x.label(m).store_bit() {
                out.push(e);
            }
        }
    }
    Ok(out)
}
