//! Optimal prefix-suffix run search for the robot team.
//!
//! The planner searches the product of the weighted team system with the
//! Büchi automaton of the mission formula for an accepting lasso that
//! minimizes the number of cell transitions over the prefix plus one suffix
//! iteration. The search is a Dijkstra pass from the initial product state
//! followed by a minimum-weight accepting cycle computation, with
//! branch-and-bound pruning on the best total found so far.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::TeamProduct;
use crate::buchi::DegeneralizedBuchi;
use crate::env::{CellId, Partition};
use crate::ltl::{LassoWord, PropSet};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no satisfying run exists for this formula and team")]
    Unsatisfiable,
    #[error("run references unknown cell {0:?}")]
    UnknownCell(String),
    #[error("run JSON is malformed: {0}")]
    Malformed(String),
    #[error("run tuple at step {step} has {got} cells, expected {want}")]
    ArityMismatch { step: usize, got: usize, want: usize },
    #[error("run step {0} moves robot {1} between non-adjacent cells")]
    NonAdjacentStep(usize, usize),
    #[error("run has an empty suffix")]
    EmptySuffix,
    #[error("consecutive duplicate tuple at step {0} (suffix longer than 1)")]
    DuplicateTuple(usize),
}

/// A team run in prefix-suffix form. Indices follow the 1-based convention:
/// `R(1)..R(k-1)` is the prefix, `R(k)..R(l)` the infinitely repeated suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamRun {
    pub prefix: Vec<Vec<CellId>>,
    pub suffix: Vec<Vec<CellId>>,
}

impl TeamRun {
    pub fn n(&self) -> usize {
        self.suffix.first().map_or(0, Vec::len)
    }

    /// First suffix index `k` (1-based).
    pub fn k(&self) -> usize {
        self.prefix.len() + 1
    }

    /// Last index `l` (1-based).
    pub fn l(&self) -> usize {
        self.prefix.len() + self.suffix.len()
    }

    /// Tuple at 1-based index `j`; indices beyond `l` wrap into `{k..l}`.
    pub fn tuple(&self, j: usize) -> &[CellId] {
        assert!(j >= 1, "run indices are 1-based");
        let (k, l) = (self.k(), self.l());
        let j = if j <= l { j } else { (j - k) % self.suffix.len() + k };
        if j < k {
            &self.prefix[j - 1]
        } else {
            &self.suffix[j - k]
        }
    }

    /// The induced word: one letter per run index, the suffix repeating.
    pub fn word(&self, obs: impl Fn(&[CellId]) -> PropSet) -> LassoWord {
        LassoWord::new(
            self.prefix.iter().map(|t| obs(t)).collect(),
            self.suffix.iter().map(|t| obs(t)).collect(),
        )
    }

    /// Movement cost of the prefix plus one suffix iteration, including the
    /// wrap transition back to the suffix head.
    pub fn cost(&self) -> u64 {
        let mut total = 0u64;
        for j in 1..self.l() {
            total += TeamProduct::weight(self.tuple(j), self.tuple(j + 1)) as u64;
        }
        total += TeamProduct::weight(self.tuple(self.l()), self.tuple(self.k())) as u64;
        total
    }

    /// Structural validation against a partition: arity, adjacency of every
    /// step including the suffix wrap, and stutter-freedom.
    pub fn validate(&self, p: &Partition) -> Result<(), PlanError> {
        if self.suffix.is_empty() {
            return Err(PlanError::EmptySuffix);
        }
        let n = self.n();
        let l = self.l();
        for j in 1..=l {
            if self.tuple(j).len() != n {
                return Err(PlanError::ArityMismatch {
                    step: j,
                    got: self.tuple(j).len(),
                    want: n,
                });
            }
        }
        let step_ok = |a: CellId, b: CellId| a == b || p.are_adjacent(a, b);
        for j in 1..=l {
            let next = if j < l { j + 1 } else { self.k() };
            let (a, b) = (self.tuple(j), self.tuple(next));
            for r in 0..n {
                if !step_ok(a[r], b[r]) {
                    return Err(PlanError::NonAdjacentStep(j, r + 1));
                }
            }
            let wrap_self_loop = j == l && self.suffix.len() == 1;
            if a == b && !wrap_self_loop {
                return Err(PlanError::DuplicateTuple(j));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, p: &Partition) -> String {
        let name = |t: &Vec<CellId>| -> Vec<&str> { t.iter().map(|c| p.cell_name(*c)).collect() };
        let doc = RunDoc {
            prefix: self.prefix.iter().map(&name).map(|v| v.iter().map(|s| s.to_string()).collect()).collect(),
            suffix: self.suffix.iter().map(&name).map(|v| v.iter().map(|s| s.to_string()).collect()).collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("run serializes");
        out.push('\n');
        out
    }

    pub fn from_json(p: &Partition, json: &str) -> Result<TeamRun, PlanError> {
        let doc: RunDoc =
            serde_json::from_str(json).map_err(|e| PlanError::Malformed(e.to_string()))?;
        let conv = |rows: Vec<Vec<String>>| -> Result<Vec<Vec<CellId>>, PlanError> {
            rows.into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|name| p.cell_id(&name).ok_or(PlanError::UnknownCell(name)))
                        .collect()
                })
                .collect()
        };
        let run = TeamRun {
            prefix: conv(doc.prefix)?,
            suffix: conv(doc.suffix)?,
        };
        run.validate(p)?;
        Ok(run)
    }
}

#[derive(Serialize, Deserialize)]
struct RunDoc {
    prefix: Vec<Vec<String>>,
    suffix: Vec<Vec<String>>,
}

/// Collapse a raw tuple lasso into a stutter-free [`TeamRun`]: consecutive
/// duplicates merge, seam duplicates between stem and cycle (and across the
/// cycle wrap) are dropped, and an all-duplicate cycle becomes a length-1
/// suffix.
pub fn collapse_run(stem: &[Vec<CellId>], cycle: &[Vec<CellId>]) -> TeamRun {
    assert!(!cycle.is_empty(), "raw lasso needs a nonempty cycle");
    let mut suffix: Vec<Vec<CellId>> = Vec::new();
    for t in cycle {
        if suffix.last() != Some(t) {
            suffix.push(t.clone());
        }
    }
    while suffix.len() > 1 && suffix.last() == suffix.first() {
        suffix.pop();
    }
    let mut prefix: Vec<Vec<CellId>> = Vec::new();
    for t in stem {
        if prefix.last() != Some(t) {
            prefix.push(t.clone());
        }
    }
    while prefix.last().is_some() && prefix.last() == suffix.first() {
        prefix.pop();
    }
    TeamRun { prefix, suffix }
}

/// Search the team-times-Büchi product for a minimum-cost accepting lasso.
///
/// Product states pair a cell tuple with the Büchi state reached before
/// consuming that tuple's observation; an edge moves the team one step and
/// lets the automaton read the current observation. Cost is the Dijkstra
/// distance from the initial state plus a minimum-weight cycle through an
/// accepting state, tie-broken by hop count and then discovery order.
pub fn search_run(team: &TeamProduct, b: &DegeneralizedBuchi) -> Result<TeamRun, PlanError> {
    let graph = ProductGraph::explore(team, b);
    let (dist0, parent0) = graph.dijkstra_multi(&graph.initials);

    // accepting states sorted by stem distance so branch-and-bound prunes early
    let mut accepting: Vec<usize> = (0..graph.nodes.len())
        .filter(|&v| b.accepting.contains(&graph.nodes[v].1) && dist0[v].is_some())
        .collect();
    accepting.sort_by_key(|&v| dist0[v]);

    let mut best: Option<(u64, usize, Vec<usize>)> = None; // (total, f, cycle nodes)
    for &f in &accepting {
        let stem_cost = dist0[f].unwrap().0;
        if let Some((total, _, _)) = &best {
            if stem_cost >= *total {
                break;
            }
        }
        let budget = best.as_ref().map(|(t, _, _)| t.saturating_sub(stem_cost));
        if let Some((cyc_cost, cycle)) = graph.min_cycle_through(f, budget) {
            let total = stem_cost + cyc_cost;
            let better = match &best {
                None => true,
                Some((t, _, _)) => total < *t,
            };
            if better {
                best = Some((total, f, cycle));
            }
        }
    }

    let (_, f, cycle) = best.ok_or(PlanError::Unsatisfiable)?;
    let mut stem_nodes = Vec::new();
    let mut at = f;
    while let Some(p) = parent0[at] {
        stem_nodes.push(p);
        at = p;
    }
    stem_nodes.reverse();

    let stem: Vec<Vec<CellId>> = stem_nodes.iter().map(|&v| graph.nodes[v].0.clone()).collect();
    let cyc: Vec<Vec<CellId>> = cycle.iter().map(|&v| graph.nodes[v].0.clone()).collect();
    Ok(collapse_run(&stem, &cyc))
}

/// Reachable product of the lazy team system and a degeneralized Büchi
/// automaton, materialized as an adjacency list.
struct ProductGraph {
    nodes: Vec<(Vec<CellId>, usize)>,
    edges: Vec<Vec<(usize, u32)>>,
    initials: Vec<usize>,
}

impl ProductGraph {
    fn explore(team: &TeamProduct, b: &DegeneralizedBuchi) -> ProductGraph {
        let mut index: HashMap<(Vec<CellId>, usize), usize> = HashMap::new();
        let mut nodes: Vec<(Vec<CellId>, usize)> = Vec::new();
        let mut edges: Vec<Vec<(usize, u32)>> = Vec::new();
        let mut queue = std::collections::VecDeque::new();

        let mut initials = Vec::new();
        for &q0 in &b.initial {
            let start = (team.initial(), q0);
            if index.contains_key(&start) {
                continue;
            }
            let id = nodes.len();
            index.insert(start.clone(), id);
            nodes.push(start);
            edges.push(Vec::new());
            queue.push_back(id);
            initials.push(id);
        }

        while let Some(v) = queue.pop_front() {
            let (tuple, q) = nodes[v].clone();
            let obs = team.observation(&tuple);
            let moves: Arc<Vec<(Vec<CellId>, u32)>> = team.successors(&tuple);
            let mut out = Vec::new();
            for (label, q2) in &b.edges[q] {
                if !label.matches(obs) {
                    continue;
                }
                for (next, w) in moves.iter() {
                    let key = (next.clone(), *q2);
                    let id = match index.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = nodes.len();
                            index.insert(key.clone(), id);
                            nodes.push(key);
                            edges.push(Vec::new());
                            queue.push_back(id);
                            id
                        }
                    };
                    out.push((id, *w));
                }
            }
            out.sort();
            out.dedup();
            edges[v] = out;
        }
        ProductGraph {
            nodes,
            edges,
            initials,
        }
    }

    /// Dijkstra with (cost, hops) lexicographic distances and parent tracking.
    fn dijkstra_multi(&self, sources: &[usize]) -> (Vec<Option<(u64, u32)>>, Vec<Option<usize>>) {
        let mut dist: Vec<Option<(u64, u32)>> = vec![None; self.nodes.len()];
        let mut parent: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &source in sources {
            dist[source] = Some((0, 0));
            heap.push(Reverse(((0u64, 0u32), source)));
        }
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v] != Some(d) {
                continue;
            }
            for &(to, w) in &self.edges[v] {
                let cand = (d.0 + w as u64, d.1 + 1);
                if dist[to].map_or(true, |cur| cand < cur) {
                    dist[to] = Some(cand);
                    parent[to] = Some(v);
                    heap.push(Reverse((cand, to)));
                }
            }
        }
        (dist, parent)
    }

    /// Minimum-weight cycle through `f` (at least one edge), optionally
    /// bounded by a cost budget for pruning. Returns the cycle node sequence
    /// starting at `f`.
    fn min_cycle_through(&self, f: usize, budget: Option<u64>) -> Option<(u64, Vec<usize>)> {
        // shortest paths from f, then close the loop over edges back into f
        let mut dist: Vec<Option<(u64, u32)>> = vec![None; self.nodes.len()];
        let mut parent: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[f] = Some((0, 0));
        heap.push(Reverse(((0u64, 0u32), f)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v] != Some(d) {
                continue;
            }
            if let Some(b) = budget {
                if d.0 > b {
                    continue;
                }
            }
            for &(to, w) in &self.edges[v] {
                let cand = (d.0 + w as u64, d.1 + 1);
                if dist[to].map_or(true, |cur| cand < cur) {
                    dist[to] = Some(cand);
                    parent[to] = Some(v);
                    heap.push(Reverse((cand, to)));
                }
            }
        }
        let mut best: Option<(u64, u32, usize)> = None; // (cost, hops, closing node)
        for v in 0..self.nodes.len() {
            let Some((dv, hv)) = dist[v] else { continue };
            for &(to, w) in &self.edges[v] {
                if to != f {
                    continue;
                }
                let cand = (dv + w as u64, hv + 1, v);
                let better = match best {
                    None => true,
                    Some((c, h, u)) => (cand.0, cand.1, cand.2) < (c, h, u),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let (cost, _, closer) = best?;
        if let Some(b) = budget {
            if cost > b {
                return None;
            }
        }
        let mut cycle = Vec::new();
        let mut at = closer;
        while at != f {
            cycle.push(at);
            at = parent[at].expect("cycle nodes have parents");
        }
        cycle.push(f);
        cycle.reverse();
        Some((cost, cycle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::build_robot_ts;
    use crate::buchi::{degeneralize, translate};
    use crate::env::load_partition;
    use crate::ltl::{eval_lasso, parse_formula};

    fn line3() -> crate::env::Environment {
        // three cells in a line, regions at both ends
        let json = r#"{
            "cells": [
                { "id": "c1", "vertices": [[0,0],[1,0],[1,1],[0,1]] },
                { "id": "c2", "vertices": [[1,0],[2,0],[2,1],[1,1]] },
                { "id": "c3", "vertices": [[2,0],[3,0],[3,1],[2,1]] }
            ],
            "regions": { "left": ["c1"], "right": ["c3"] },
            "robots": [ { "id": 1, "cell": "c1" }, { "id": 2, "cell": "c2" } ]
        }"#;
        load_partition(json).unwrap()
    }

    fn team_for(env: &crate::env::Environment) -> TeamProduct {
        let adj = env.partition.adjacency();
        let systems = env
            .starts
            .iter()
            .map(|s| build_robot_ts(&env.partition, &adj, s.cell).unwrap())
            .collect();
        TeamProduct::new(systems).unwrap()
    }

    fn plan(env: &crate::env::Environment, formula: &str) -> Result<TeamRun, PlanError> {
        let team = team_for(env);
        let f = parse_formula(formula).unwrap();
        let gba = translate(&f.to_nnf(), env.partition.props());
        let dba = degeneralize(&gba);
        search_run(&team, &dba)
    }

    #[test]
    fn collapse_merges_duplicates_and_seams() {
        let a = vec![0usize];
        let b = vec![1usize];
        let x = vec![2usize];
        let y = vec![3usize];
        // prefix a a b -> a b
        let r = collapse_run(&[a.clone(), a.clone(), b.clone()], &[x.clone(), y.clone()]);
        assert_eq!(r.prefix, vec![a.clone(), b.clone()]);
        // suffix [x x x] -> [x]
        let r = collapse_run(&[a.clone()], &[x.clone(), x.clone(), x.clone()]);
        assert_eq!(r.suffix, vec![x.clone()]);
        // cycle wrap duplicate [x y x] -> [x y]
        let r = collapse_run(&[], &[x.clone(), y.clone(), x.clone()]);
        assert_eq!(r.suffix, vec![x.clone(), y.clone()]);
        // stem tail equal to cycle head is dropped
        let r = collapse_run(&[a.clone(), x.clone()], &[x.clone(), y.clone()]);
        assert_eq!(r.prefix, vec![a.clone()]);
        assert_eq!(r.suffix, vec![x.clone(), y.clone()]);
    }

    #[test]
    fn trivially_true_formula_plans_a_parked_run() {
        let env = line3();
        let run = plan(&env, "true").unwrap();
        assert!(run.prefix.is_empty());
        assert_eq!(run.suffix.len(), 1);
        assert_eq!(run.suffix[0], vec![0, 1]);
        assert_eq!(run.cost(), 0);
    }

    #[test]
    fn unsatisfiable_mission_is_reported() {
        let env = line3();
        // one tuple cannot be in both singleton regions with one robot pinned
        let err = plan(&env, "G left && G right").unwrap_err();
        assert!(matches!(err, PlanError::Unsatisfiable));
    }

    #[test]
    fn surveillance_run_is_accepted_by_both_oracles() {
        let env = line3();
        let formula = "G F (left && right)";
        let run = plan(&env, formula).unwrap();
        run.validate(&env.partition).unwrap();

        let team = team_for(&env);
        let word = run.word(|t| team.observation(t));
        let f = parse_formula(formula).unwrap();
        assert!(eval_lasso(&f, &word, env.partition.props()));

        let gba = translate(&f.to_nnf(), env.partition.props());
        assert!(gba.accepts_lasso(&word));
    }

    #[test]
    fn planner_cost_matches_hop_bounded_oracle_on_line() {
        // robots start at c1 and c2; both end regions must hold together
        // infinitely often, so robot 2 must reach c3 (1 move) and robot 1
        // stay at c1: optimal cost 1.
        let env = line3();
        let run = plan(&env, "G F (left && right)").unwrap();
        assert_eq!(run.cost(), 1);
    }

    #[test]
    fn run_json_round_trips() {
        let env = line3();
        let run = plan(&env, "G F (left && right)").unwrap();
        let json = run.to_json(&env.partition);
        let back = TeamRun::from_json(&env.partition, &json).unwrap();
        assert_eq!(run, back);
    }

    #[test]
    fn run_validation_rejects_teleports_and_stutters() {
        let env = line3();
        let p = &env.partition;
        let c1 = p.cell_id("c1").unwrap();
        let c3 = p.cell_id("c3").unwrap();
        let teleport = TeamRun {
            prefix: vec![vec![c1, c1]],
            suffix: vec![vec![c3, c1]],
        };
        assert!(matches!(
            teleport.validate(p),
            Err(PlanError::NonAdjacentStep(1, 1))
        ));
        let stutter = TeamRun {
            prefix: vec![],
            suffix: vec![vec![c1, c1], vec![c1, c1]],
        };
        assert!(matches!(
            stutter.validate(p),
            Err(PlanError::DuplicateTuple(_))
        ));
    }

    #[test]
    fn corridor_fixture_run_is_the_planner_optimum() {
        let dir = format!("{}/../../fixtures", env!("CARGO_MANIFEST_DIR"));
        let envj = std::fs::read_to_string(format!("{dir}/corridor_env.json")).unwrap();
        let runj = std::fs::read_to_string(format!("{dir}/corridor_run.json")).unwrap();
        let formula = std::fs::read_to_string(format!("{dir}/corridor_formula.ltl")).unwrap();
        let env = load_partition(&envj).unwrap();
        let fixture = TeamRun::from_json(&env.partition, &runj).unwrap();

        let run = plan(&env, formula.trim()).unwrap();
        assert_eq!(run.cost(), 9);
        assert_eq!(run, fixture, "fixture must stay the unique optimum");
    }

    #[test]
    #[ignore = "expensive: full case-study product search; run with --ignored --release"]
    fn case_study_search_is_no_worse_than_the_reference_run() {
        let dir = format!("{}/../../fixtures", env!("CARGO_MANIFEST_DIR"));
        let envj = std::fs::read_to_string(format!("{dir}/case_study_env.json")).unwrap();
        let runj = std::fs::read_to_string(format!("{dir}/case_study_run.json")).unwrap();
        let formula = std::fs::read_to_string(format!("{dir}/case_study_formula.ltl")).unwrap();
        let env = load_partition(&envj).unwrap();
        let reference = TeamRun::from_json(&env.partition, &runj).unwrap();
        assert_eq!(reference.cost(), 31);

        let run = plan(&env, formula.trim()).unwrap();
        assert!(run.cost() <= reference.cost());
    }
}
