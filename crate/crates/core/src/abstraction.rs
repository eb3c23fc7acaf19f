//! Per-robot motion abstractions and the weighted synchronous team product.
//!
//! Each robot moving through the partitioned workspace is abstracted as a
//! finite transition system over cells: a self-loop in every state plus a
//! transition between every pair of adjacent cells. All robots share the same
//! cell domain; only their initial cells differ. The team is the synchronous
//! product of the individual systems, where a transition's weight counts how
//! many robots change cell.
//!
//! The team product is built lazily: successor tuples are enumerated on
//! demand and memoized behind a mutex, so planner queries never materialize
//! the full |C|^n state space.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::env::{CellId, Partition};
use crate::ltl::{PropSet, Props};

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("start cell id {0} is out of range (partition has {1} cells)")]
    StartNotACell(usize, usize),
    #[error("team product needs at least one robot system")]
    NoSystems,
    #[error("robot systems disagree on the cell domain ({0} cells vs {1})")]
    MismatchedDomains(usize, usize),
}

/// Finite abstraction of one robot: cells as states, a self-loop everywhere,
/// and a transition for every adjacent cell pair.
#[derive(Debug, Clone)]
pub struct RobotTs {
    cell_names: Vec<String>,
    props: Props,
    initial: CellId,
    neighbors: Vec<Vec<CellId>>,
    obs: Vec<PropSet>,
}

impl RobotTs {
    pub fn state_count(&self) -> usize {
        self.cell_names.len()
    }

    pub fn initial(&self) -> CellId {
        self.initial
    }

    pub fn cell_name(&self, c: CellId) -> &str {
        &self.cell_names[c]
    }

    pub fn props(&self) -> &Props {
        &self.props
    }

    /// Distinct-state transitions out of `c` (the self-loop is implicit).
    pub fn neighbors(&self, c: CellId) -> &[CellId] {
        &self.neighbors[c]
    }

    /// Observation of a cell: the region containing it, or the empty set.
    pub fn observation(&self, c: CellId) -> PropSet {
        self.obs[c]
    }

    /// Every move available from `c`: staying put plus each neighbor.
    pub fn moves(&self, c: CellId) -> impl Iterator<Item = CellId> + '_ {
        std::iter::once(c).chain(self.neighbors[c].iter().copied())
    }

    /// DOT rendering with the observation printed beside each state.
    pub fn to_dot(&self, title: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph \"{title}\" {{\n"));
        out.push_str("  rankdir=LR;\n  node [shape=ellipse];\n");
        for (i, name) in self.cell_names.iter().enumerate() {
            let obs = self.obs[i];
            let label = if obs.is_empty() {
                name.clone()
            } else {
                format!("{}\\n{}", name, obs.display(&self.props))
            };
            let init = if i == self.initial {
                ", penwidth=2"
            } else {
                ""
            };
            out.push_str(&format!("  {i} [label=\"{label}\"{init}];\n"));
        }
        for i in 0..self.cell_names.len() {
            out.push_str(&format!("  {i} -> {i};\n"));
            for n in &self.neighbors[i] {
                if *n > i {
                    out.push_str(&format!("  {i} -> {n} [dir=none];\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Build the abstraction of one robot from the partition, its adjacency
/// relation, and the robot's start cell.
pub fn build_robot_ts(
    p: &Partition,
    adj: &[(CellId, CellId)],
    start: CellId,
) -> Result<RobotTs, AbstractionError> {
    let n = p.cell_count();
    if start >= n {
        return Err(AbstractionError::StartNotACell(start, n));
    }
    let mut neighbors = vec![Vec::new(); n];
    for &(a, b) in adj {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for list in &mut neighbors {
        list.sort();
        list.dedup();
    }
    Ok(RobotTs {
        cell_names: p.cells().iter().map(|c| c.name.clone()).collect(),
        props: p.props().clone(),
        initial: start,
        neighbors,
        obs: (0..n).map(|i| p.observation(i)).collect(),
    })
}

/// Lazy synchronous product of the robot systems. States are cell tuples;
/// a tuple transition exists iff every component is a stay or an adjacency
/// move, and its weight is the number of components that change.
pub struct TeamProduct {
    systems: Vec<RobotTs>,
    cache: Mutex<HashMap<Vec<CellId>, Arc<Vec<(Vec<CellId>, u32)>>>>,
}

impl TeamProduct {
    pub fn new(systems: Vec<RobotTs>) -> Result<Self, AbstractionError> {
        let first = systems.first().ok_or(AbstractionError::NoSystems)?;
        let domain = first.state_count();
        for s in &systems[1..] {
            if s.state_count() != domain {
                return Err(AbstractionError::MismatchedDomains(domain, s.state_count()));
            }
        }
        Ok(TeamProduct {
            systems,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn robot_count(&self) -> usize {
        self.systems.len()
    }

    pub fn systems(&self) -> &[RobotTs] {
        &self.systems
    }

    pub fn initial(&self) -> Vec<CellId> {
        self.systems.iter().map(|s| s.initial()).collect()
    }

    /// Team observation: union of component observations.
    pub fn observation(&self, state: &[CellId]) -> PropSet {
        let mut set = PropSet::empty();
        for (s, &c) in self.systems.iter().zip(state) {
            set = set.union(s.observation(c));
        }
        set
    }

    /// Hamming weight between two tuples.
    pub fn weight(a: &[CellId], b: &[CellId]) -> u32 {
        a.iter().zip(b).filter(|(x, y)| x != y).count() as u32
    }

    /// All successor tuples of `state` with weights, memoized. Includes the
    /// all-stay transition at weight 0.
    pub fn successors(&self, state: &[CellId]) -> Arc<Vec<(Vec<CellId>, u32)>> {
        if let Some(hit) = self.cache.lock().unwrap().get(state) {
            return Arc::clone(hit);
        }
        let computed = Arc::new(self.enumerate(state));
        self.cache
            .lock()
            .unwrap()
            .entry(state.to_vec())
            .or_insert_with(|| Arc::clone(&computed))
            .clone()
    }

    fn enumerate(&self, state: &[CellId]) -> Vec<(Vec<CellId>, u32)> {
        let per_robot: Vec<Vec<CellId>> = self
            .systems
            .iter()
            .zip(state)
            .map(|(s, &c)| s.moves(c).collect())
            .collect();
        let mut out = Vec::new();
        let mut tuple = vec![0; state.len()];
        fn rec(
            per_robot: &[Vec<CellId>],
            i: usize,
            tuple: &mut Vec<CellId>,
            state: &[CellId],
            out: &mut Vec<(Vec<CellId>, u32)>,
        ) {
            if i == per_robot.len() {
                out.push((tuple.clone(), TeamProduct::weight(state, tuple)));
                return;
            }
            for &c in &per_robot[i] {
                tuple[i] = c;
                rec(per_robot, i + 1, tuple, state, out);
            }
        }
        rec(&per_robot, 0, &mut tuple, state, &mut out);
        out
    }
}
