//! Büchi automata over symbolic letters: generalized and degeneralized
//! forms, emptiness with lasso witnesses, lasso-word membership, and
//! products with observation-labeled automata.
//!
//! Letters are sets of atomic propositions ([`PropSet`]). Edges carry a
//! symbolic [`EdgeLabel`] `(required, forbidden)`: a letter matches when it
//! contains every required proposition and no forbidden one. This keeps
//! automata small and lets a single edge match the many concrete letters a
//! team of robots can produce.

mod translate;

pub use translate::translate;

use crate::ltl::{LassoWord, PropSet, Props};
use serde_json::json;
use std::collections::{HashMap, VecDeque};

/// Symbolic constraint on a letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EdgeLabel {
    pub required: PropSet,
    pub forbidden: PropSet,
}

impl EdgeLabel {
    /// The unconstrained label, matching every letter.
    pub fn tt() -> Self {
        Self::default()
    }

    pub fn new(required: PropSet, forbidden: PropSet) -> Self {
        let label = Self {
            required,
            forbidden,
        };
        assert!(
            label.is_consistent(),
            "edge label requires and forbids the same proposition"
        );
        label
    }

    pub fn is_consistent(&self) -> bool {
        self.required.is_disjoint_from(self.forbidden)
    }

    pub fn matches(&self, letter: PropSet) -> bool {
        self.required.is_subset_of(letter) && self.forbidden.is_disjoint_from(letter)
    }

    /// The smallest letter matching this label.
    pub fn minimal_letter(&self) -> PropSet {
        self.required
    }

    pub fn render(&self, props: &Props) -> String {
        let mut parts = Vec::new();
        for p in self.required.iter() {
            parts.push(props.name(p).to_string());
        }
        for p in self.forbidden.iter() {
            parts.push(format!("!{}", props.name(p)));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" & ")
        }
    }
}

/// Generalized Büchi automaton: a run is accepting when it visits every
/// acceptance set infinitely often. No acceptance sets means every infinite
/// run is accepting.
#[derive(Debug, Clone)]
pub struct GeneralizedBuchi {
    pub names: Vec<String>,
    /// Sorted initial states.
    pub initial: Vec<usize>,
    /// Outgoing edges per state.
    pub edges: Vec<Vec<(EdgeLabel, usize)>>,
    /// Acceptance sets, each a sorted state list.
    pub acceptance: Vec<Vec<usize>>,
}

impl GeneralizedBuchi {
    pub fn new(n: usize) -> Self {
        Self {
            names: (0..n).map(|i| format!("q{i}")).collect(),
            initial: Vec::new(),
            edges: vec![Vec::new(); n],
            acceptance: Vec::new(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn add_edge(&mut self, from: usize, label: EdgeLabel, to: usize) {
        assert!(label.is_consistent());
        self.edges[from].push((label, to));
    }

    /// A lasso accepted by the automaton, if any.
    pub fn find_accepting_lasso(&self) -> Option<LassoWitness> {
        let adj = targets_of(&self.edges);
        let raw = find_state_lasso(&adj, &self.initial, &self.acceptance)?;
        Some(attach_letters(raw, &self.edges))
    }

    pub fn is_empty(&self) -> bool {
        self.find_accepting_lasso().is_none()
    }

    /// Whether the automaton accepts the given ultimately periodic word.
    pub fn accepts_lasso(&self, word: &LassoWord) -> bool {
        accepts(&self.initial, &self.edges, &self.acceptance, word)
    }

    pub fn to_dot(&self, props: &Props) -> String {
        automaton_dot(
            &self.names,
            &self.initial,
            &self.edges,
            &self.acceptance,
            props,
        )
    }

    pub fn to_json(&self, props: &Props) -> serde_json::Value {
        automaton_json("generalized-buchi", &self.names, &self.initial, &self.edges, props)
            .tap_insert("acceptance", json!(self.acceptance))
    }
}

/// Büchi automaton with a single acceptance set.
#[derive(Debug, Clone)]
pub struct DegeneralizedBuchi {
    pub names: Vec<String>,
    pub initial: Vec<usize>,
    pub edges: Vec<Vec<(EdgeLabel, usize)>>,
    /// Sorted accepting states.
    pub accepting: Vec<usize>,
    /// For automata produced by [`degeneralize`]: the (state, counter) pair
    /// behind each state. Empty for hand-built automata.
    pub origin: Vec<(usize, usize)>,
}

impl DegeneralizedBuchi {
    pub fn new(n: usize) -> Self {
        Self {
            names: (0..n).map(|i| format!("q{i}")).collect(),
            initial: Vec::new(),
            edges: vec![Vec::new(); n],
            accepting: Vec::new(),
            origin: Vec::new(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn add_edge(&mut self, from: usize, label: EdgeLabel, to: usize) {
        assert!(label.is_consistent());
        self.edges[from].push((label, to));
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.binary_search(&q).is_ok()
    }

    pub fn find_accepting_lasso(&self) -> Option<LassoWitness> {
        let adj = targets_of(&self.edges);
        let acc = [self.accepting.clone()];
        let raw = find_state_lasso(&adj, &self.initial, &acc)?;
        Some(attach_letters(raw, &self.edges))
    }

    pub fn is_empty(&self) -> bool {
        self.find_accepting_lasso().is_none()
    }

    pub fn accepts_lasso(&self, word: &LassoWord) -> bool {
        let acc = [self.accepting.clone()];
        accepts(&self.initial, &self.edges, &acc, word)
    }

    pub fn to_dot(&self, props: &Props) -> String {
        let acc = [self.accepting.clone()];
        automaton_dot(&self.names, &self.initial, &self.edges, &acc, props)
    }

    pub fn to_json(&self, props: &Props) -> serde_json::Value {
        automaton_json("buchi", &self.names, &self.initial, &self.edges, props)
            .tap_insert("accepting", json!(self.accepting))
    }
}

trait TapInsert {
    fn tap_insert(self, key: &str, value: serde_json::Value) -> serde_json::Value;
}

impl TapInsert for serde_json::Value {
    fn tap_insert(mut self, key: &str, value: serde_json::Value) -> serde_json::Value {
        self.as_object_mut()
            .expect("automaton json is an object")
            .insert(key.to_string(), value);
        self
    }
}

/// Counter construction: states are (state, i) pairs; the counter advances
/// past set `i` when the source state belongs to acceptance set `i`, and a
/// run is accepting when it returns to counter 0 through set 0 infinitely
/// often. With no acceptance sets the automaton is copied with every state
/// accepting.
pub fn degeneralize(g: &GeneralizedBuchi) -> DegeneralizedBuchi {
    let k = g.acceptance.len();
    if k == 0 {
        let mut out = DegeneralizedBuchi {
            names: g.names.clone(),
            initial: g.initial.clone(),
            edges: g.edges.clone(),
            accepting: (0..g.state_count()).collect(),
            origin: (0..g.state_count()).map(|q| (q, 0)).collect(),
        };
        out.initial.sort_unstable();
        return out;
    }
    let in_set = |q: usize, i: usize| g.acceptance[i].binary_search(&q).is_ok();

    let mut pairs = PairInterner::default();
    let mut initial: Vec<usize> = g.initial.iter().map(|&q0| pairs.intern((q0, 0))).collect();
    let mut edges: Vec<Vec<(EdgeLabel, usize)>> = Vec::new();
    while let Some((from, (q, i))) = pairs.pop() {
        let ni = if in_set(q, i) { (i + 1) % k } else { i };
        let out: Vec<(EdgeLabel, usize)> = g.edges[q]
            .iter()
            .map(|&(label, to)| (label, pairs.intern((to, ni))))
            .collect();
        if edges.len() <= from {
            edges.resize(from + 1, Vec::new());
        }
        edges[from] = out;
    }
    let origin = pairs.seen;
    edges.resize(origin.len(), Vec::new());

    let names = origin
        .iter()
        .map(|&(q, i)| format!("{}.{}", g.names[q], i + 1))
        .collect();
    let mut accepting: Vec<usize> = origin
        .iter()
        .enumerate()
        .filter(|&(_, &(q, i))| i == 0 && in_set(q, 0))
        .map(|(id, _)| id)
        .collect();
    accepting.sort_unstable();
    initial.sort_unstable();
    initial.dedup();

    DegeneralizedBuchi {
        names,
        initial,
        edges,
        accepting,
        origin,
    }
}

/// Automaton whose states emit observations; edges carry costs instead of
/// letters. Transition systems and their team products take this shape, as
/// does any Büchi automaton reinterpreted with per-state output.
#[derive(Debug, Clone)]
pub struct ObservedAutomaton {
    pub names: Vec<String>,
    pub initial: Vec<usize>,
    /// Observation emitted by each state.
    pub obs: Vec<PropSet>,
    /// Outgoing (cost, target) edges per state.
    pub edges: Vec<Vec<(u64, usize)>>,
    /// Acceptance sets; empty means every run is accepting.
    pub acceptance: Vec<Vec<usize>>,
}

impl ObservedAutomaton {
    pub fn new(n: usize) -> Self {
        Self {
            names: (0..n).map(|i| format!("s{i}")).collect(),
            initial: Vec::new(),
            obs: vec![PropSet::empty(); n],
            edges: vec![Vec::new(); n],
            acceptance: Vec::new(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn to_dot(&self, props: &Props) -> String {
        let mut out = String::from("digraph observed {\n  rankdir=LR;\n  node [shape=circle];\n");
        for (i, name) in self.names.iter().enumerate() {
            let obs = if self.obs[i].is_empty() {
                String::new()
            } else {
                format!("\\n{}", self.obs[i].display(props))
            };
            out.push_str(&format!("  {i} [label=\"{name}{obs}\"];\n"));
        }
        for &i in &self.initial {
            out.push_str(&format!("  init{i} [shape=point]; init{i} -> {i};\n"));
        }
        for (from, outs) in self.edges.iter().enumerate() {
            for &(w, to) in outs {
                out.push_str(&format!("  {from} -> {to} [label=\"{w}\"];\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Counter construction for observation-labeled automata, mirroring
/// [`degeneralize`]: states are (state, counter) pairs, the counter advances
/// past set `i` when the source state belongs to acceptance set `i`, and the
/// single remaining set is counter 0 within set 0. Acceptance sets must be
/// sorted. The second return value maps each new state back to the original
/// one. Automata with at most one set are returned unchanged.
pub fn degeneralize_observed(a: &ObservedAutomaton) -> (ObservedAutomaton, Vec<usize>) {
    let k = a.acceptance.len();
    if k <= 1 {
        return (a.clone(), (0..a.state_count()).collect());
    }
    let in_set = |s: usize, i: usize| a.acceptance[i].binary_search(&s).is_ok();

    let mut pairs = PairInterner::default();
    let mut initial: Vec<usize> = a.initial.iter().map(|&s0| pairs.intern((s0, 0))).collect();
    let mut edges: Vec<Vec<(u64, usize)>> = Vec::new();
    while let Some((from, (s, i))) = pairs.pop() {
        let ni = if in_set(s, i) { (i + 1) % k } else { i };
        let out: Vec<(u64, usize)> = a.edges[s]
            .iter()
            .map(|&(w, to)| (w, pairs.intern((to, ni))))
            .collect();
        if edges.len() <= from {
            edges.resize(from + 1, Vec::new());
        }
        edges[from] = out;
    }
    let origin = pairs.seen;
    edges.resize(origin.len(), Vec::new());

    let names = origin
        .iter()
        .map(|&(s, i)| format!("{}.{}", a.names[s], i + 1))
        .collect();
    let obs = origin.iter().map(|&(s, _)| a.obs[s]).collect();
    let mut accepting: Vec<usize> = origin
        .iter()
        .enumerate()
        .filter(|&(_, &(s, i))| i == 0 && in_set(s, 0))
        .map(|(id, _)| id)
        .collect();
    accepting.sort_unstable();
    initial.sort_unstable();
    initial.dedup();

    let out = ObservedAutomaton {
        names,
        initial,
        obs,
        edges,
        acceptance: vec![accepting],
    };
    let map = origin.into_iter().map(|(s, _)| s).collect();
    (out, map)
}

/// How acceptance is combined in [`product_with_observed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    /// Every acceptance set of either factor is lifted to the product, so
    /// the product accepts exactly the intersection of the two languages.
    Intersection,
    /// A single product set: pairs whose components are simultaneously
    /// accepting. Sound only up to factors with at most one set each; both
    /// factors must be degeneralized first, and even then the conjunction
    /// is stricter than language intersection.
    SingleSet,
}

/// Product of an observation-labeled automaton with a Büchi automaton. The
/// *source* observation drives the Büchi component: a joint step exists when
/// the observed automaton moves `s -> s'` and the Büchi automaton has an
/// edge `q -> q'` matching the observation of `s`. Costs carry over from the
/// observed factor.
#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    pub names: Vec<String>,
    /// (observed state, büchi state) behind each product state.
    pub pairs: Vec<(usize, usize)>,
    pub obs: Vec<PropSet>,
    pub initial: Vec<usize>,
    pub edges: Vec<Vec<(u64, usize)>>,
    pub acceptance: Vec<Vec<usize>>,
}

impl ProductAutomaton {
    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn find_accepting_lasso(&self) -> Option<StateLasso> {
        let adj = targets_of_weighted(&self.edges);
        find_state_lasso(&adj, &self.initial, &self.acceptance)
    }

    pub fn is_empty(&self) -> bool {
        self.find_accepting_lasso().is_none()
    }
}

pub fn product_with_observed(
    a: &ObservedAutomaton,
    b: &DegeneralizedBuchi,
    mode: ProductMode,
) -> ProductAutomaton {
    if mode == ProductMode::SingleSet {
        assert!(
            a.acceptance.len() <= 1,
            "single-set product requires a degeneralized observed factor"
        );
    }
    let mut interner = PairInterner::default();
    let mut initial = Vec::new();
    for &s0 in &a.initial {
        for &q0 in &b.initial {
            initial.push(interner.intern((s0, q0)));
        }
    }
    initial.sort_unstable();
    initial.dedup();

    let mut edges: Vec<Vec<(u64, usize)>> = Vec::new();
    while let Some((from, (s, q))) = interner.pop() {
        let letter = a.obs[s];
        let mut out = Vec::new();
        for &(w, s2) in &a.edges[s] {
            for &(label, q2) in &b.edges[q] {
                if label.matches(letter) {
                    let tid = interner.intern((s2, q2));
                    out.push((w, tid));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        if edges.len() <= from {
            edges.resize(from + 1, Vec::new());
        }
        edges[from] = out;
    }
    let pairs = interner.seen;
    edges.resize(pairs.len(), Vec::new());

    let lift = |member: &dyn Fn(usize, usize) -> bool| -> Vec<usize> {
        pairs
            .iter()
            .enumerate()
            .filter(|&(_, &(s, q))| member(s, q))
            .map(|(id, _)| id)
            .collect()
    };
    let in_sorted = |set: &[usize], x: usize| set.binary_search(&x).is_ok();

    let acceptance = match mode {
        ProductMode::Intersection => {
            let mut sets = Vec::new();
            for fa in &a.acceptance {
                sets.push(lift(&|s, _| in_sorted(fa, s)));
            }
            sets.push(lift(&|_, q| in_sorted(&b.accepting, q)));
            sets
        }
        ProductMode::SingleSet => {
            let fa = a.acceptance.first();
            vec![lift(&|s, q| {
                fa.map_or(true, |f| in_sorted(f, s)) && in_sorted(&b.accepting, q)
            })]
        }
    };

    let names = pairs
        .iter()
        .map(|&(s, q)| format!("({},{})", a.names[s], b.names[q]))
        .collect();
    let obs = pairs.iter().map(|&(s, _)| a.obs[s]).collect();

    ProductAutomaton {
        names,
        pairs,
        obs,
        initial,
        edges,
        acceptance,
    }
}

/// Work-queue interner for pair-indexed state spaces built on the fly.
#[derive(Default)]
struct PairInterner {
    index: HashMap<(usize, usize), usize>,
    seen: Vec<(usize, usize)>,
    queue: VecDeque<(usize, usize)>,
}

impl PairInterner {
    fn intern(&mut self, pair: (usize, usize)) -> usize {
        if let Some(&id) = self.index.get(&pair) {
            return id;
        }
        let id = self.seen.len();
        self.index.insert(pair, id);
        self.seen.push(pair);
        self.queue.push_back(pair);
        id
    }

    fn pop(&mut self) -> Option<(usize, (usize, usize))> {
        let pair = self.queue.pop_front()?;
        Some((self.index[&pair], pair))
    }
}

/// An eventually periodic run through an automaton: `stem` then `cycle`
/// repeated forever, with an edge from the last cycle state back to the
/// first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// A [`StateLasso`] together with one matching letter per step.
#[derive(Debug, Clone)]
pub struct LassoWitness {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
    pub stem_letters: Vec<PropSet>,
    pub cycle_letters: Vec<PropSet>,
}

impl LassoWitness {
    pub fn word(&self) -> LassoWord {
        LassoWord::new(self.stem_letters.clone(), self.cycle_letters.clone())
    }
}

fn targets_of(edges: &[Vec<(EdgeLabel, usize)>]) -> Vec<Vec<usize>> {
    edges
        .iter()
        .map(|outs| {
            let mut t: Vec<usize> = outs.iter().map(|&(_, to)| to).collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect()
}

fn targets_of_weighted(edges: &[Vec<(u64, usize)>]) -> Vec<Vec<usize>> {
    edges
        .iter()
        .map(|outs| {
            let mut t: Vec<usize> = outs.iter().map(|&(_, to)| to).collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect()
}

/// Picks, for each step of a state lasso, the lexicographically smallest
/// matching edge label and uses its minimal letter.
fn attach_letters(raw: StateLasso, edges: &[Vec<(EdgeLabel, usize)>]) -> LassoWitness {
    let letter = |from: usize, to: usize| -> PropSet {
        edges[from]
            .iter()
            .filter(|&&(_, t)| t == to)
            .map(|&(label, _)| label)
            .min()
            .expect("witness step follows an existing edge")
            .minimal_letter()
    };
    let mut stem_letters = Vec::with_capacity(raw.stem.len());
    for i in 0..raw.stem.len() {
        let next = if i + 1 < raw.stem.len() {
            raw.stem[i + 1]
        } else {
            raw.cycle[0]
        };
        stem_letters.push(letter(raw.stem[i], next));
    }
    let mut cycle_letters = Vec::with_capacity(raw.cycle.len());
    for i in 0..raw.cycle.len() {
        let next = raw.cycle[(i + 1) % raw.cycle.len()];
        cycle_letters.push(letter(raw.cycle[i], next));
    }
    LassoWitness {
        stem: raw.stem,
        cycle: raw.cycle,
        stem_letters,
        cycle_letters,
    }
}

/// Membership of an ultimately periodic word: the automaton is run in
/// lockstep with the word's positions and the resulting finite product is
/// checked for an accepting lasso.
fn accepts(
    initial: &[usize],
    edges: &[Vec<(EdgeLabel, usize)>],
    acceptance: &[Vec<usize>],
    word: &LassoWord,
) -> bool {
    let positions = word.len();
    let id = |q: usize, pos: usize| q * positions + pos;
    let n = edges.len() * positions;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..edges.len() {
        for pos in 0..positions {
            let letter = word.letter(pos);
            let npos = word.next_pos(pos);
            let outs = &mut adj[id(q, pos)];
            for &(label, q2) in &edges[q] {
                if label.matches(letter) {
                    outs.push(id(q2, npos));
                }
            }
            outs.sort_unstable();
            outs.dedup();
        }
    }
    let init: Vec<usize> = initial.iter().map(|&q| id(q, 0)).collect();
    let acc: Vec<Vec<usize>> = acceptance
        .iter()
        .map(|set| {
            let mut lifted = Vec::with_capacity(set.len() * positions);
            for &q in set {
                for pos in 0..positions {
                    lifted.push(id(q, pos));
                }
            }
            lifted.sort_unstable();
            lifted
        })
        .collect();
    find_state_lasso(&adj, &init, &acc).is_some()
}

/// Core emptiness check: finds a reachable non-trivial strongly connected
/// component intersecting every acceptance set and extracts a concrete
/// stem and cycle from it. Deterministic for a fixed input.
fn find_state_lasso(
    adj: &[Vec<usize>],
    initial: &[usize],
    acceptance: &[Vec<usize>],
) -> Option<StateLasso> {
    let n = adj.len();
    if n == 0 || initial.is_empty() {
        return None;
    }

    // Reachable set.
    let mut reach = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in initial {
        if !reach[q] {
            reach[q] = true;
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &t in &adj[q] {
            if !reach[t] {
                reach[t] = true;
                queue.push_back(t);
            }
        }
    }

    let comp = tarjan_scc(adj, &reach);
    let n_comp = comp.iter().filter_map(|c| *c).max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    for q in 0..n {
        if let Some(c) = comp[q] {
            members[c].push(q);
        }
    }

    // Qualifying component with the smallest minimal state id.
    let mut chosen: Option<&Vec<usize>> = None;
    'components: for scc in &members {
        let non_trivial =
            scc.len() > 1 || (scc.len() == 1 && adj[scc[0]].binary_search(&scc[0]).is_ok());
        if !non_trivial {
            continue;
        }
        for set in acceptance {
            if !scc.iter().any(|&q| set.binary_search(&q).is_ok()) {
                continue 'components;
            }
        }
        match chosen {
            Some(best) if best[0] <= scc[0] => {}
            _ => chosen = Some(scc),
        }
    }
    let scc = chosen?;
    let in_scc = |q: usize| comp[q].is_some() && members[comp[q].unwrap()][0] == scc[0];

    // Stem: shortest path from an initial state to the component.
    let entry_path = bfs_path(adj, initial, &|q| in_scc(q), &|_| true)
        .expect("qualifying component is reachable");
    let entry = *entry_path.last().unwrap();
    let stem = entry_path[..entry_path.len() - 1].to_vec();

    // Cycle: visit one representative per acceptance set, then close.
    let mut walk = vec![entry];
    let mut current = entry;
    for set in acceptance {
        let rep = *scc
            .iter()
            .find(|&&q| set.binary_search(&q).is_ok())
            .expect("component intersects every acceptance set");
        if rep != current {
            let path = bfs_path(adj, &[current], &|q| q == rep, &|q| in_scc(q))
                .expect("component is strongly connected");
            walk.extend_from_slice(&path[1..]);
            current = rep;
        }
    }
    if current != entry {
        let path = bfs_path(adj, &[current], &|q| q == entry, &|q| in_scc(q))
            .expect("component is strongly connected");
        walk.extend_from_slice(&path[1..]);
    } else if walk.len() == 1 {
        // No representative forced a move; take the shortest non-empty loop.
        let mut best: Option<Vec<usize>> = None;
        for &t in &adj[entry] {
            if !in_scc(t) {
                continue;
            }
            let back = if t == entry {
                vec![t]
            } else {
                match bfs_path(adj, &[t], &|q| q == entry, &|q| in_scc(q)) {
                    Some(p) => p,
                    None => continue,
                }
            };
            if best.as_ref().map_or(true, |b| back.len() < b.len()) {
                best = Some(back);
            }
        }
        let back = best.expect("non-trivial component has a loop");
        walk.extend_from_slice(&back);
    }
    debug_assert_eq!(*walk.last().unwrap(), entry);
    walk.pop();

    Some(StateLasso {
        stem,
        cycle: walk,
    })
}

/// Iterative Tarjan over the states marked reachable; returns the component
/// index of each reachable state, in reverse topological completion order.
fn tarjan_scc(adj: &[Vec<usize>], reach: &[bool]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut index: Vec<Option<u32>> = vec![None; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp: Vec<Option<usize>> = vec![None; n];
    let mut next_index = 0u32;
    let mut n_comp = 0usize;

    for root in 0..n {
        if !reach[root] || index[root].is_some() {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if *child == 0 {
                index[v] = Some(next_index);
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if !reach[w] {
                    continue;
                }
                match index[w] {
                    None => call.push((w, 0)),
                    Some(wi) => {
                        if on_stack[w] {
                            low[v] = low[v].min(wi);
                        }
                    }
                }
            } else {
                if low[v] == index[v].unwrap() {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = Some(n_comp);
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
                call.pop();
                if let Some(&mut (u, _)) = call.last_mut() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    comp
}

/// Shortest path from any source to a goal state, restricted to permitted
/// states; returns the full state sequence including both endpoints.
fn bfs_path(
    adj: &[Vec<usize>],
    sources: &[usize],
    goal: &dyn Fn(usize) -> bool,
    permitted: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if permitted(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(q) = queue.pop_front() {
        if goal(q) {
            let mut path = vec![q];
            let mut cur = q;
            while let Some(p) = parent[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for &t in &adj[q] {
            if permitted(t) && !seen[t] {
                seen[t] = true;
                parent[t] = Some(q);
                queue.push_back(t);
            }
        }
    }
    None
}

fn automaton_dot(
    names: &[String],
    initial: &[usize],
    edges: &[Vec<(EdgeLabel, usize)>],
    acceptance: &[Vec<usize>],
    props: &Props,
) -> String {
    let mut out = String::from("digraph buchi {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (i, name) in names.iter().enumerate() {
        let memberships: Vec<String> = acceptance
            .iter()
            .enumerate()
            .filter(|(_, set)| set.binary_search(&i).is_ok())
            .map(|(k, _)| format!("F{}", k + 1))
            .collect();
        let shape = if memberships.is_empty() {
            ""
        } else {
            ", shape=doublecircle"
        };
        let suffix = if memberships.is_empty() {
            String::new()
        } else {
            format!("\\n{}", memberships.join(","))
        };
        out.push_str(&format!("  {i} [label=\"{name}{suffix}\"{shape}];\n"));
    }
    for &i in initial {
        out.push_str(&format!("  init{i} [shape=point]; init{i} -> {i};\n"));
    }
    for (from, outs) in edges.iter().enumerate() {
        for &(label, to) in outs {
            out.push_str(&format!(
                "  {from} -> {to} [label=\"{}\"];\n",
                label.render(props)
            ));
        }
    }
    out.push_str("}\n");
    out
}

fn automaton_json(
    kind: &str,
    names: &[String],
    initial: &[usize],
    edges: &[Vec<(EdgeLabel, usize)>],
    props: &Props,
) -> serde_json::Value {
    let set_names = |s: PropSet| -> Vec<String> {
        s.iter().map(|p| props.name(p).to_string()).collect()
    };
    let mut edge_list = Vec::new();
    for (from, outs) in edges.iter().enumerate() {
        for &(label, to) in outs {
            edge_list.push(json!({
                "from": from,
                "to": to,
                "required": set_names(label.required),
                "forbidden": set_names(label.forbidden),
            }));
        }
    }
    json!({
        "type": kind,
        "states": names,
        "initial": initial,
        "edges": edge_list,
    })
}
