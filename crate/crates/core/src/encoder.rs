//! Partial-order constraint systems over a program-order skeleton of memory
//! accesses: the from-read instantiation with one boolean per read-from pair
//! (cubic in the number of same-address accesses) and the least-upper-bound
//! formulation with one integer selector per acquire (quadratic). Formulas
//! are emitted as quantifier-free linear integer arithmetic or plain text,
//! and small instances can be decided exactly by enumeration.

use crate::label::{Addr, Label};
use crate::pstring::{EventId, PartialString};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("event e{0} carries an opaque label; the encoder needs memory accesses")]
    OpaqueLabel(EventId),
    #[error("instance has {events} events, enumeration is capped at {max}")]
    TooLarge { events: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingKind {
    Cubic,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Smt2,
    Text,
}

/// Constraint families, used for tagging emitted assertions and for the
/// size census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Po,
    RfSome,
    Sw,
    Wc,
    Fr,
    Wrc,
    Bound,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::Po => "po",
            Tag::RfSome => "rf-some",
            Tag::Sw => "sw",
            Tag::Wc => "wc",
            Tag::Fr => "fr",
            Tag::Wrc => "wrc",
            Tag::Bound => "bound",
        }
    }
}

/// One constraint over clock variables (indexed by formula event), selector
/// variables and read-from booleans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// clk(lo) < clk(hi)
    Po { lo: usize, hi: usize },
    /// lo <= clk(var) <= hi
    BoundRange { var: usize, lo: i64, hi: i64 },
    /// clk(var) = value
    BoundPin { var: usize, value: i64 },
    /// exactly one of the read-from booleans holds
    RfSome { load: usize, vars: Vec<usize> },
    /// rf -> clk(store) < clk(load)
    SwCubic { rf: usize, store: usize, load: usize },
    /// clk(a) < clk(b) or clk(b) < clk(a)
    Wc { a: usize, b: usize },
    /// rf and clk(store) < clk(other) -> clk(load) < clk(other)
    Fr { rf: usize, store: usize, other: usize, load: usize },
    /// selector equals the clock of some same-address release
    SelSome { sel: usize, stores: Vec<usize> },
    /// sel < clk(load)
    SwQuad { sel: usize, load: usize },
    /// clk(other) < clk(load) -> clk(other) <= sel
    Wrc { other: usize, load: usize, sel: usize },
}

impl Constraint {
    pub fn tag(&self) -> Tag {
        match self {
            Constraint::Po { .. } => Tag::Po,
            Constraint::BoundRange { .. } | Constraint::BoundPin { .. } => Tag::Bound,
            Constraint::RfSome { .. } | Constraint::SelSome { .. } => Tag::RfSome,
            Constraint::SwCubic { .. } | Constraint::SwQuad { .. } => Tag::Sw,
            Constraint::Wc { .. } => Tag::Wc,
            Constraint::Fr { .. } => Tag::Fr,
            Constraint::Wrc { .. } => Tag::Wrc,
        }
    }

    fn eval(&self, ints: &[i64], bools: &[bool]) -> bool {
        match *self {
            Constraint::Po { lo, hi } => ints[lo] < ints[hi],
            Constraint::BoundRange { var, lo, hi } => lo <= ints[var] && ints[var] <= hi,
            Constraint::BoundPin { var, value } => ints[var] == value,
            Constraint::RfSome { ref vars, .. } => {
                vars.iter().filter(|&&v| bools[v]).count() == 1
            }
            Constraint::SwCubic { rf, store, load } => !bools[rf] || ints[store] < ints[load],
            Constraint::Wc { a, b } => ints[a] != ints[b],
            Constraint::Fr {
                rf,
                store,
                other,
                load,
            } => !(bools[rf] && ints[store] < ints[other]) || ints[load] < ints[other],
            Constraint::SelSome { sel, ref stores } => {
                stores.iter().any(|&s| ints[sel] == ints[s])
            }
            Constraint::SwQuad { sel, load } => ints[sel] < ints[load],
            Constraint::Wrc { other, load, sel } => {
                !(ints[other] < ints[load]) || ints[other] <= ints[sel]
            }
        }
    }
}

/// Synchronizing accesses of one memory location, as formula event indices.
/// Releases include the initializer when one is enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddrGroup {
    pub addr: Addr,
    pub acquires: Vec<usize>,
    pub releases: Vec<usize>,
}

/// A skeleton of memory accesses to encode. Program order is the skeleton's
/// happens-before relation.
#[derive(Debug, Clone)]
pub struct EncodingInput {
    skeleton: PartialString,
    with_init: bool,
}

impl EncodingInput {
    pub fn new(skeleton: &PartialString, with_init: bool) -> Result<Self, EncodeError> {
        for e in 0..skeleton.len() {
            if !skeleton.label(e).is_memory_access() {
                return Err(EncodeError::OpaqueLabel(e));
            }
        }
        Ok(EncodingInput {
            skeleton: skeleton.clone(),
            with_init,
        })
    }

    pub fn skeleton(&self) -> &PartialString {
        &self.skeleton
    }

    pub fn with_init(&self) -> bool {
        self.with_init
    }

    fn addresses(&self) -> Vec<Addr> {
        let mut out: Vec<Addr> = Vec::new();
        for e in 0..self.skeleton.len() {
            if let Some(a) = self.skeleton.label(e).addr() {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    /// Real events plus initializers.
    pub fn total_events(&self) -> usize {
        self.skeleton.len() + if self.with_init { self.addresses().len() } else { 0 }
    }
}

/// A constraint system plus enough structure to name its variables, count
/// its constraints and enumerate its models.
#[derive(Debug, Clone)]
pub struct Formula {
    pub kind: EncodingKind,
    /// Number of skeleton events; formula events n_real.. are initializers.
    pub n_real: usize,
    /// Address of each initializer event, in formula-event order.
    pub init_addrs: Vec<Addr>,
    /// Labels of the real events, for emission comments.
    pub event_labels: Vec<Label>,
    /// Clock variables: one per formula event (real then initializers).
    /// Selector variables, when present, follow the clocks.
    pub int_var_count: usize,
    /// (acquire event, selector int variable) pairs, quadratic only.
    pub selectors: Vec<(usize, usize)>,
    /// Read-from booleans as (load event, store event), cubic only.
    pub bool_vars: Vec<(usize, usize)>,
    pub constraints: Vec<Constraint>,
    pub groups: Vec<AddrGroup>,
    /// Program-order covering edges actually encoded.
    pub covering: Vec<(usize, usize)>,
}

/// An integer/boolean assignment satisfying a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub ints: Vec<i64>,
    pub bools: Vec<bool>,
}

struct Layout {
    n_real: usize,
    init_addrs: Vec<Addr>,
    groups: Vec<AddrGroup>,
    covering: Vec<(usize, usize)>,
}

fn layout(input: &EncodingInput) -> Layout {
    let ps = &input.skeleton;
    let n_real = ps.len();
    let addrs = input.addresses();
    let init_addrs: Vec<Addr> = if input.with_init { addrs.clone() } else { Vec::new() };
    let init_of = |addr: &Addr| -> Option<usize> {
        init_addrs.iter().position(|a| a == addr).map(|i| n_real + i)
    };
    let groups = addrs
        .iter()
        .map(|addr| {
            let acquires = (0..n_real)
                .filter(|&e| ps.label(e).is_acquire() && ps.label(e).addr() == Some(addr))
                .collect();
            let mut releases: Vec<usize> = Vec::new();
            if let Some(i) = init_of(addr) {
                releases.push(i);
            }
            releases.extend(
                (0..n_real)
                    .filter(|&e| ps.label(e).is_release() && ps.label(e).addr() == Some(addr)),
            );
            AddrGroup {
                addr: addr.clone(),
                acquires,
                releases,
            }
        })
        .collect();
    Layout {
        n_real,
        init_addrs,
        groups,
        covering: ps.covering_edges(),
    }
}

fn base_formula(input: &EncodingInput, kind: EncodingKind) -> Formula {
    let Layout {
        n_real,
        init_addrs,
        groups,
        covering,
    } = layout(input);
    let n_total = n_real + init_addrs.len();
    let mut f = Formula {
        kind,
        n_real,
        init_addrs,
        event_labels: input.skeleton.labels().to_vec(),
        int_var_count: n_total,
        selectors: Vec::new(),
        bool_vars: Vec::new(),
        constraints: Vec::new(),
        groups,
        covering,
    };
    // Clock domains: initializers are pinned to 0, real events live in
    // [1, total]. Strictness is asserted only where order is required, so
    // unrelated events may share a clock.
    for e in 0..n_real {
        f.constraints.push(Constraint::BoundRange {
            var: e,
            lo: 1,
            hi: n_total as i64,
        });
    }
    for i in 0..f.init_addrs.len() {
        f.constraints.push(Constraint::BoundPin {
            var: n_real + i,
            value: 0,
        });
    }
    for &(u, v) in &f.covering {
        f.constraints.push(Constraint::Po { lo: u, hi: v });
    }
    f
}

/// The reference formulation: one boolean per same-address (acquire, release)
/// pair, with the from-read axiom instantiated over every release pair.
pub fn encode_cubic(input: &EncodingInput) -> Formula {
    let mut f = base_formula(input, EncodingKind::Cubic);
    let groups = f.groups.clone();
    // Read-from booleans, in (acquire, release) order.
    let mut var_of: Vec<Vec<usize>> = Vec::new();
    for g in &groups {
        for &l in &g.acquires {
            let vars: Vec<usize> = g
                .releases
                .iter()
                .map(|&s| {
                    f.bool_vars.push((l, s));
                    f.bool_vars.len() - 1
                })
                .collect();
            var_of.push(vars.clone());
            f.constraints.push(Constraint::RfSome { load: l, vars });
        }
    }
    let mut idx = 0;
    for g in &groups {
        for &l in &g.acquires {
            for (k, &s) in g.releases.iter().enumerate() {
                f.constraints.push(Constraint::SwCubic {
                    rf: var_of[idx][k],
                    store: s,
                    load: l,
                });
            }
            idx += 1;
        }
    }
    for g in &groups {
        for (i, &a) in g.releases.iter().enumerate() {
            for &b in &g.releases[i + 1..] {
                f.constraints.push(Constraint::Wc { a, b });
            }
        }
    }
    let mut idx = 0;
    for g in &groups {
        for &l in &g.acquires {
            for (k, &s) in g.releases.iter().enumerate() {
                for &other in &g.releases {
                    if other == s {
                        continue;
                    }
                    f.constraints.push(Constraint::Fr {
                        rf: var_of[idx][k],
                        store: s,
                        other,
                        load: l,
                    });
                }
            }
            idx += 1;
        }
    }
    f
}

/// The least-upper-bound formulation: one integer selector per acquire,
/// equated to the clock of the observed release; the from-read triples are
/// replaced by one constraint per (acquire, release) pair.
pub fn encode_quadratic(input: &EncodingInput) -> Formula {
    let mut f = base_formula(input, EncodingKind::Quadratic);
    let groups = f.groups.clone();
    let mut sel_of: Vec<usize> = Vec::new();
    for g in &groups {
        for &l in &g.acquires {
            let sel = f.int_var_count;
            f.int_var_count += 1;
            f.selectors.push((l, sel));
            sel_of.push(sel);
            f.constraints.push(Constraint::SelSome {
                sel,
                stores: g.releases.clone(),
            });
        }
    }
    let mut idx = 0;
    for g in &groups {
        for &l in &g.acquires {
            f.constraints.push(Constraint::SwQuad {
                sel: sel_of[idx],
                load: l,
            });
            idx += 1;
        }
    }
    for g in &groups {
        for (i, &a) in g.releases.iter().enumerate() {
            for &b in &g.releases[i + 1..] {
                f.constraints.push(Constraint::Wc { a, b });
            }
        }
    }
    let mut idx = 0;
    for g in &groups {
        for &l in &g.acquires {
            for &other in &g.releases {
                f.constraints.push(Constraint::Wrc {
                    other,
                    load: l,
                    sel: sel_of[idx],
                });
            }
            idx += 1;
        }
    }
    f
}

/// Per-tag constraint counts next to the closed-form predictions implied by
/// the per-address acquire/release census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub po: usize,
    pub rf_some: usize,
    pub sw: usize,
    pub wc: usize,
    pub fr: usize,
    pub wrc: usize,
    pub bound: usize,
    pub predicted_fr: usize,
    pub predicted_wrc: usize,
    pub predicted_wc: usize,
    pub predicted_sw: usize,
    pub predicted_rf_some: usize,
    pub predicted_po: usize,
}

pub fn count_constraints(f: &Formula) -> Census {
    let count = |tag: Tag| f.constraints.iter().filter(|c| c.tag() == tag).count();
    let mut predicted_fr = 0;
    let mut predicted_wrc = 0;
    let mut predicted_wc = 0;
    let mut acquires = 0;
    for g in &f.groups {
        let (a, r) = (g.acquires.len(), g.releases.len());
        predicted_fr += a * r * r.saturating_sub(1);
        predicted_wrc += a * r;
        predicted_wc += r * r.saturating_sub(1) / 2;
        acquires += a;
    }
    let predicted_sw = match f.kind {
        EncodingKind::Cubic => predicted_wrc,
        EncodingKind::Quadratic => acquires,
    };
    Census {
        po: count(Tag::Po),
        rf_some: count(Tag::RfSome),
        sw: count(Tag::Sw),
        wc: count(Tag::Wc),
        fr: count(Tag::Fr),
        wrc: count(Tag::Wrc),
        bound: count(Tag::Bound),
        predicted_fr,
        predicted_wrc,
        predicted_wc,
        predicted_sw,
        predicted_rf_some: acquires,
        predicted_po: f.covering.len(),
    }
}

impl Formula {
    pub fn eval(&self, ints: &[i64], bools: &[bool]) -> bool {
        self.constraints.iter().all(|c| c.eval(ints, bools))
    }

    pub fn event_name(&self, ev: usize) -> String {
        if ev < self.n_real {
            format!("e{ev}")
        } else {
            format!("init_{}", self.init_addrs[ev - self.n_real].0)
        }
    }

    fn int_var_name(&self, v: usize) -> String {
        let n_total = self.n_real + self.init_addrs.len();
        if v < n_total {
            format!("clk_{}", self.event_name(v))
        } else {
            let (ev, _) = self.selectors[v - n_total];
            format!("w_{}", self.event_name(ev))
        }
    }

    fn bool_var_name(&self, b: usize) -> String {
        let (l, s) = self.bool_vars[b];
        format!("rf_{}_{}", self.event_name(l), self.event_name(s))
    }
}

/// Exhaustive satisfiability for small formulas: enumerate read-from (or
/// selector) choices and per-address release orders; each combination leaves
/// a pure conjunction of order atoms whose consistency is a graph check.
/// Every model induces such a combination, so coverage is complete. Found
/// assignments are re-checked against the constraint list before being
/// returned.
pub fn solve_by_enumeration(f: &Formula) -> Option<Model> {
    let n_total = f.n_real + f.init_addrs.len();
    // Choice sets: one per acquire, in constraint order.
    enum ChoiceSet {
        Rf { vars: Vec<usize> },
        Sel { sel: usize, stores: Vec<usize> },
    }
    let mut choice_sets: Vec<ChoiceSet> = Vec::new();
    for c in &f.constraints {
        match c {
            Constraint::RfSome { vars, .. } => choice_sets.push(ChoiceSet::Rf { vars: vars.clone() }),
            Constraint::SelSome { sel, stores } => choice_sets.push(ChoiceSet::Sel {
                sel: *sel,
                stores: stores.clone(),
            }),
            _ => {}
        }
    }
    // An acquire without candidates makes the formula unsatisfiable.
    let empty_choice = choice_sets.iter().any(|cs| match cs {
        ChoiceSet::Rf { vars } => vars.is_empty(),
        ChoiceSet::Sel { stores, .. } => stores.is_empty(),
    });
    if empty_choice {
        return None;
    }
    // Release orders per address; initializers are pinned to clock 0, so only
    // orders with the initializer first can be consistent.
    let group_orders: Vec<Vec<Vec<usize>>> = f
        .groups
        .iter()
        .map(|g| {
            let mut head: Vec<usize> = Vec::new();
            let mut rest: Vec<usize> = Vec::new();
            for &r in &g.releases {
                if r >= f.n_real {
                    head.push(r);
                } else {
                    rest.push(r);
                }
            }
            permutations(&rest)
                .into_iter()
                .map(|p| {
                    let mut o = head.clone();
                    o.extend(p);
                    o
                })
                .collect()
        })
        .collect();

    let mut lens: Vec<usize> = choice_sets
        .iter()
        .map(|cs| match cs {
            ChoiceSet::Rf { vars } => vars.len(),
            ChoiceSet::Sel { stores, .. } => stores.len(),
        })
        .collect();
    lens.extend(group_orders.iter().map(|o| o.len()));
    let mut digits = vec![0usize; lens.len()];

    loop {
        // Resolve this combination.
        let mut bools = vec![false; f.bool_vars.len()];
        let mut sel_target: Vec<(usize, usize)> = Vec::new();
        let mut chosen_store: Vec<usize> = Vec::new();
        for (i, cs) in choice_sets.iter().enumerate() {
            match cs {
                ChoiceSet::Rf { vars } => {
                    let v = vars[digits[i]];
                    bools[v] = true;
                    chosen_store.push(f.bool_vars[v].1);
                }
                ChoiceSet::Sel { sel, stores } => {
                    let s = stores[digits[i]];
                    sel_target.push((*sel, s));
                    chosen_store.push(s);
                }
            }
        }
        let orders: Vec<&Vec<usize>> = group_orders
            .iter()
            .enumerate()
            .map(|(gi, o)| &o[digits[choice_sets.len() + gi]])
            .collect();

        if let Some(model) = try_combination(f, n_total, &bools, &sel_target, &orders) {
            return Some(model);
        }

        // Odometer step.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return None;
            }
            digits[pos] += 1;
            if digits[pos] < lens[pos] {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Check one (read-from, release-order) combination: derive the residual
/// order atoms, test consistency, and build an explicit model when possible.
fn try_combination(
    f: &Formula,
    n_total: usize,
    bools: &[bool],
    sel_target: &[(usize, usize)],
    orders: &[&Vec<usize>],
) -> Option<Model> {
    let sel_of = |sel: usize| -> usize {
        sel_target
            .iter()
            .find(|&&(s, _)| s == sel)
            .map(|&(_, t)| t)
            .expect("selector has a chosen target")
    };
    // Position of each release in its chosen order.
    let mut pos = vec![usize::MAX; n_total];
    for order in orders {
        for (i, &r) in order.iter().enumerate() {
            pos[r] = i;
        }
    }
    // Edge weights: 0 = non-strict, 1 = strict. usize::MAX = absent.
    let mut adj = vec![vec![u8::MAX; n_total]; n_total];
    let add = |a: usize, b: usize, strict: u8, adj: &mut Vec<Vec<u8>>| {
        if adj[a][b] == u8::MAX || adj[a][b] < strict {
            adj[a][b] = strict;
        }
    };
    // Initializers sit strictly below every real event.
    for i in f.n_real..n_total {
        for e in 0..f.n_real {
            add(i, e, 1, &mut adj);
        }
    }
    // Chosen release order, as a strict chain.
    for order in orders {
        for w in order.windows(2) {
            add(w[0], w[1], 1, &mut adj);
        }
    }
    for c in &f.constraints {
        match *c {
            Constraint::Po { lo, hi } => add(lo, hi, 1, &mut adj),
            Constraint::SwCubic { rf, store, load } => {
                if bools[rf] {
                    add(store, load, 1, &mut adj);
                }
            }
            Constraint::Fr {
                rf,
                store,
                other,
                load,
            } => {
                if bools[rf] && pos[store] < pos[other] {
                    add(load, other, 1, &mut adj);
                }
            }
            Constraint::SwQuad { sel, load } => add(sel_of(sel), load, 1, &mut adj),
            Constraint::Wrc { other, load, sel } if pos[other] > pos[sel_of(sel)] => {
                add(load, other, 0, &mut adj);
            }
            _ => {}
        }
    }
    // Reachability with strictness: a cycle through a strict edge is
    // inconsistent; a non-strict cycle just forces equal clocks.
    let mut reach = vec![vec![0u8; n_total]; n_total]; // 0 none, 1 weak, 2 strict
    for a in 0..n_total {
        for b in 0..n_total {
            if adj[a][b] != u8::MAX {
                reach[a][b] = adj[a][b] + 1;
            }
        }
    }
    for k in 0..n_total {
        for a in 0..n_total {
            if reach[a][k] == 0 {
                continue;
            }
            for b in 0..n_total {
                if reach[k][b] == 0 {
                    continue;
                }
                let through = reach[a][k].max(reach[k][b]);
                if through > reach[a][b] {
                    reach[a][b] = through;
                }
            }
        }
    }
    if (0..n_total).any(|v| reach[v][v] == 2) {
        return None;
    }
    // Longest-path levels: initializers at 0, real events from 1.
    let mut lvl = vec![0i64; n_total];
    for l in lvl.iter_mut().take(f.n_real) {
        *l = 1;
    }
    for _ in 0..=n_total {
        for a in 0..n_total {
            for b in 0..n_total {
                if adj[a][b] != u8::MAX {
                    let need = lvl[a] + adj[a][b] as i64;
                    if lvl[b] < need {
                        lvl[b] = need;
                    }
                }
            }
        }
    }
    let mut ints = vec![0i64; f.int_var_count];
    ints[..n_total].copy_from_slice(&lvl);
    for &(sel, target) in sel_target {
        ints[sel] = lvl[target];
    }
    let model = Model {
        ints,
        bools: bools.to_vec(),
    };
    f.eval(&model.ints, &model.bools).then_some(model)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest: Vec<usize> = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

const ENUMERATION_CAP: usize = 9;

/// Decide both encodings of the input by enumeration and report whether
/// they agree on satisfiability.
pub fn equisat_check(input: &EncodingInput) -> Result<bool, EncodeError> {
    let events = input.total_events();
    if events > ENUMERATION_CAP {
        return Err(EncodeError::TooLarge {
            events,
            max: ENUMERATION_CAP,
        });
    }
    let sat_cubic = solve_by_enumeration(&encode_cubic(input)).is_some();
    let sat_quadratic = solve_by_enumeration(&encode_quadratic(input)).is_some();
    Ok(sat_cubic == sat_quadratic)
}

/// Serialize a formula. Emission is a pure function of the formula, so
/// repeated calls produce byte-identical output.
pub fn emit(f: &Formula, format: EmitFormat) -> String {
    match format {
        EmitFormat::Smt2 => emit_smt2(f),
        EmitFormat::Text => emit_text(f),
    }
}

fn smt2_exactly_one(names: &[String]) -> String {
    match names.len() {
        0 => "false".to_string(),
        1 => names[0].clone(),
        _ => {
            let mut s = String::from("(and (or");
            for n in names {
                let _ = write!(s, " {n}");
            }
            s.push(')');
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    let _ = write!(s, " (or (not {}) (not {}))", names[i], names[j]);
                }
            }
            s.push(')');
            s
        }
    }
}

fn emit_smt2(f: &Formula) -> String {
    let n_total = f.n_real + f.init_addrs.len();
    let mut out = String::new();
    let kind = match f.kind {
        EncodingKind::Cubic => "cubic",
        EncodingKind::Quadratic => "quadratic",
    };
    let _ = writeln!(out, "; partial-order encoding: {kind}");
    let _ = writeln!(
        out,
        "; events: {} real, {} initializer(s)",
        f.n_real,
        f.init_addrs.len()
    );
    for (e, l) in f.event_labels.iter().enumerate() {
        let _ = writeln!(out, "; e{e}: {l}");
    }
    for a in &f.init_addrs {
        let _ = writeln!(out, "; init_{}: [{}]_release:=0", a.0, a.0);
    }
    let _ = writeln!(out, "(set-logic QF_LIA)");
    for v in 0..n_total {
        let _ = writeln!(out, "(declare-const {} Int)", f.int_var_name(v));
    }
    for v in n_total..f.int_var_count {
        let _ = writeln!(out, "(declare-const {} Int)", f.int_var_name(v));
    }
    for b in 0..f.bool_vars.len() {
        let _ = writeln!(out, "(declare-const {} Bool)", f.bool_var_name(b));
    }
    for c in &f.constraints {
        let _ = writeln!(out, "; tag={}", c.tag().name());
        let body = match c {
            Constraint::Po { lo, hi } => {
                format!("(< {} {})", f.int_var_name(*lo), f.int_var_name(*hi))
            }
            Constraint::BoundRange { var, lo, hi } => {
                let v = f.int_var_name(*var);
                format!("(and (<= {lo} {v}) (<= {v} {hi}))")
            }
            Constraint::BoundPin { var, value } => {
                format!("(= {} {})", f.int_var_name(*var), value)
            }
            Constraint::RfSome { vars, .. } => {
                let names: Vec<String> =
                    vars.iter().map(|&v| f.bool_var_name(v)).collect();
                smt2_exactly_one(&names)
            }
            Constraint::SwCubic { rf, store, load } => format!(
                "(=> {} (< {} {}))",
                f.bool_var_name(*rf),
                f.int_var_name(*store),
                f.int_var_name(*load)
            ),
            Constraint::Wc { a, b } => {
                let (a, b) = (f.int_var_name(*a), f.int_var_name(*b));
                format!("(or (< {a} {b}) (< {b} {a}))")
            }
            Constraint::Fr {
                rf,
                store,
                other,
                load,
            } => format!(
                "(=> (and {} (< {} {})) (< {} {}))",
                f.bool_var_name(*rf),
                f.int_var_name(*store),
                f.int_var_name(*other),
                f.int_var_name(*load),
                f.int_var_name(*other)
            ),
            Constraint::SelSome { sel, stores } => {
                let w = f.int_var_name(*sel);
                match stores.len() {
                    0 => "false".to_string(),
                    1 => format!("(= {w} {})", f.int_var_name(stores[0])),
                    _ => {
                        let mut s = String::from("(or");
                        for &st in stores {
                            let _ = write!(s, " (= {w} {})", f.int_var_name(st));
                        }
                        s.push(')');
                        s
                    }
                }
            }
            Constraint::SwQuad { sel, load } => format!(
                "(< {} {})",
                f.int_var_name(*sel),
                f.int_var_name(*load)
            ),
            Constraint::Wrc { other, load, sel } => {
                let o = f.int_var_name(*other);
                format!(
                    "(=> (< {o} {}) (<= {o} {}))",
                    f.int_var_name(*load),
                    f.int_var_name(*sel)
                )
            }
        };
        let _ = writeln!(out, "(assert {body})");
    }
    let _ = writeln!(out, "(check-sat)");
    out
}

fn emit_text(f: &Formula) -> String {
    let kind = match f.kind {
        EncodingKind::Cubic => "cubic",
        EncodingKind::Quadratic => "quadratic",
    };
    let mut out = String::new();
    let _ = writeln!(out, "encoding: {kind}");
    let _ = writeln!(
        out,
        "events: {} real, {} initializer(s)",
        f.n_real,
        f.init_addrs.len()
    );
    for (e, l) in f.event_labels.iter().enumerate() {
        let _ = writeln!(out, "event e{e}: {l}");
    }
    for a in &f.init_addrs {
        let _ = writeln!(out, "event init_{}: [{}]_release:=0", a.0, a.0);
    }
    for c in &f.constraints {
        let tag = c.tag().name();
        let line = match c {
            Constraint::Po { lo, hi } => {
                format!("{} < {}", f.int_var_name(*lo), f.int_var_name(*hi))
            }
            Constraint::BoundRange { var, lo, hi } => {
                format!("{lo} <= {} <= {hi}", f.int_var_name(*var))
            }
            Constraint::BoundPin { var, value } => {
                format!("{} = {value}", f.int_var_name(*var))
            }
            Constraint::RfSome { vars, .. } => {
                let names: Vec<String> = vars.iter().map(|&v| f.bool_var_name(v)).collect();
                format!("exactly-one {{{}}}", names.join(", "))
            }
            Constraint::SwCubic { rf, store, load } => format!(
                "{} -> {} < {}",
                f.bool_var_name(*rf),
                f.int_var_name(*store),
                f.int_var_name(*load)
            ),
            Constraint::Wc { a, b } => format!(
                "{} < {} or {} < {}",
                f.int_var_name(*a),
                f.int_var_name(*b),
                f.int_var_name(*b),
                f.int_var_name(*a)
            ),
            Constraint::Fr {
                rf,
                store,
                other,
                load,
            } => format!(
                "{} and {} < {} -> {} < {}",
                f.bool_var_name(*rf),
                f.int_var_name(*store),
                f.int_var_name(*other),
                f.int_var_name(*load),
                f.int_var_name(*other)
            ),
            Constraint::SelSome { sel, stores } => {
                let names: Vec<String> = stores
                    .iter()
                    .map(|&s| format!("{} = {}", f.int_var_name(*sel), f.int_var_name(s)))
                    .collect();
                if names.is_empty() {
                    "false".to_string()
                } else {
                    names.join(" or ")
                }
            }
            Constraint::SwQuad { sel, load } => format!(
                "{} < {}",
                f.int_var_name(*sel),
                f.int_var_name(*load)
            ),
            Constraint::Wrc { other, load, sel } => format!(
                "{} < {} -> {} <= {}",
                f.int_var_name(*other),
                f.int_var_name(*load),
                f.int_var_name(*other),
                f.int_var_name(*sel)
            ),
        };
        let _ = writeln!(out, "[{tag}] {line}");
    }
    out
}
