//! Partitioned planar environments: loading, validation, adjacency, and
//! robot placement.
//!
//! An environment file describes a set of convex polygonal cells that
//! partition a workspace, a labeling of some cells with named regions of
//! interest, and the robots' starting cells or coordinates:
//!
//! ```json
//! {
//!   "cells": [{ "id": "c1", "vertices": [[0,0],[1,0],[1,1]] }, ...],
//!   "regions": { "pi1": ["c31"], "pi2": ["c6"] },
//!   "robots": [{ "id": 1, "position": [0.2, 3.4] }, { "id": 2, "cell": "c4" }]
//! }
//! ```
//!
//! Two cells are adjacent when they share a full edge: edge sharing must be
//! exact (equal endpoint pairs). Collinear edges of distinct cells that
//! overlap over a positive length without being equal are rejected at load
//! time, so downstream adjacency queries never see partial facets.
//!
//! All geometric comparisons use a relative tolerance of `1e-9` times the
//! partition's bounding-box diagonal.

use crate::geom::{
    convex_contains, convex_interiors_intersect, is_strictly_convex_ccw, signed_area, Point,
    Segment,
};
use crate::ltl::{PropId, PropSet, Props};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Index of a cell within a [`Partition`].
pub type CellId = usize;

/// 1-based robot identifier as given in the environment file.
pub type RobotId = u32;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("malformed environment file: {0}")]
    Schema(String),
    #[error("environment has no cells")]
    Empty,
    #[error("duplicate cell id {0:?}")]
    DuplicateCellId(String),
    #[error("cell {0:?} is not a strictly convex simple polygon")]
    NonConvexCell(String),
    #[error("cells {0:?} and {1:?} overlap")]
    OverlappingCells(String, String),
    #[error("cells {0:?} and {1:?} share a partial edge; facets must match exactly")]
    PartialEdgeShare(String, String),
    #[error("region {region:?} references unknown cell {cell:?}")]
    UnknownRegionCell { region: String, cell: String },
    #[error("cell {cell:?} is assigned to both regions {first:?} and {second:?}")]
    CellInTwoRegions {
        cell: String,
        first: String,
        second: String,
    },
    #[error("duplicate robot id {0}")]
    DuplicateRobotId(RobotId),
    #[error("robot {0} must specify exactly one of \"position\" or \"cell\"")]
    RobotPlacement(RobotId),
    #[error("robot {robot} starts in unknown cell {cell:?}")]
    UnknownRobotCell { robot: RobotId, cell: String },
    #[error("robot {robot} position ({x}, {y}) lies outside every cell")]
    PositionOutside { robot: RobotId, x: f64, y: f64 },
    #[error("environment must contain at least one robot")]
    NoRobots,
    #[error("point ({x}, {y}) lies outside every cell")]
    LocateOutside { x: f64, y: f64 },
}

#[derive(Debug, Clone, Deserialize)]
struct EnvFile {
    cells: Vec<CellFile>,
    #[serde(default)]
    regions: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    robots: Vec<RobotFile>,
}

#[derive(Debug, Clone, Deserialize)]
struct CellFile {
    id: String,
    vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
struct RobotFile {
    id: RobotId,
    #[serde(default)]
    position: Option<[f64; 2]>,
    #[serde(default)]
    cell: Option<String>,
}

/// A validated convex cell.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub name: String,
    /// Counter-clockwise vertices.
    pub vertices: Vec<Point>,
}

impl Cell {
    fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        Point::new(
            self.vertices.iter().map(|p| p.x).sum::<f64>() / n,
            self.vertices.iter().map(|p| p.y).sum::<f64>() / n,
        )
    }
}

/// A validated partition: cells, region labeling, and the full-edge
/// adjacency relation.
#[derive(Debug, Clone)]
pub struct Partition {
    cells: Vec<Cell>,
    by_name: HashMap<String, CellId>,
    /// Region table; region names double as the atomic propositions.
    props: Props,
    /// Region of each cell, if any.
    region_of: Vec<Option<PropId>>,
    /// Sorted neighbor lists, symmetric and irreflexive.
    neighbors: Vec<Vec<CellId>>,
    eps: f64,
}

impl Partition {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id]
    }

    pub fn cell_name(&self, id: CellId) -> &str {
        &self.cells[id].name
    }

    pub fn cell_id(&self, name: &str) -> Option<CellId> {
        self.by_name.get(name).copied()
    }

    /// Region proposition table (one proposition per region name).
    pub fn props(&self) -> &Props {
        &self.props
    }

    /// The region a cell belongs to, if any.
    pub fn region_of(&self, id: CellId) -> Option<PropId> {
        self.region_of[id]
    }

    /// Observation of a single cell as a letter: the singleton of its region,
    /// or the empty set.
    pub fn observation(&self, id: CellId) -> PropSet {
        self.region_of[id].map(PropSet::singleton).unwrap_or_default()
    }

    /// Cells adjacent to `id`, sorted ascending.
    pub fn neighbors(&self, id: CellId) -> &[CellId] {
        &self.neighbors[id]
    }

    pub fn are_adjacent(&self, a: CellId, b: CellId) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// The full adjacency relation as sorted (a, b) pairs with a < b.
    pub fn adjacency(&self) -> Vec<(CellId, CellId)> {
        let mut pairs = Vec::new();
        for (a, list) in self.neighbors.iter().enumerate() {
            for &b in list {
                if a < b {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Geometric tolerance used during validation and location queries.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The cell containing `p`. Points on shared boundaries resolve to the
    /// smallest cell id (natural order), so the result is deterministic.
    pub fn locate(&self, p: Point) -> Result<CellId, EnvError> {
        let mut hits: Vec<CellId> = (0..self.cells.len())
            .filter(|&i| convex_contains(&self.cells[i].vertices, p, self.eps))
            .collect();
        if hits.is_empty() {
            return Err(EnvError::LocateOutside { x: p.x, y: p.y });
        }
        hits.sort_by(|&a, &b| natural_cmp(&self.cells[a].name, &self.cells[b].name));
        Ok(hits[0])
    }
}

/// A robot's resolved start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RobotStart {
    pub robot: RobotId,
    pub cell: CellId,
}

/// A fully validated environment: partition plus robot placements, sorted by
/// robot id.
#[derive(Debug, Clone)]
pub struct Environment {
    pub partition: Partition,
    pub starts: Vec<RobotStart>,
}

impl Environment {
    pub fn robot_count(&self) -> usize {
        self.starts.len()
    }

    /// Start cells in robot-id order.
    pub fn start_cells(&self) -> Vec<CellId> {
        self.starts.iter().map(|s| s.cell).collect()
    }
}

/// Parses and validates an environment file.
pub fn load_partition(json: &str) -> Result<Environment, EnvError> {
    let file: EnvFile = serde_json::from_str(json).map_err(|e| EnvError::Schema(e.to_string()))?;
    if file.cells.is_empty() {
        return Err(EnvError::Empty);
    }

    // Bounding box for the relative tolerance.
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in &file.cells {
        for &[x, y] in &c.vertices {
            lo.x = lo.x.min(x);
            lo.y = lo.y.min(y);
            hi.x = hi.x.max(x);
            hi.y = hi.y.max(y);
        }
    }
    let eps = 1e-9 * lo.dist(hi).max(f64::MIN_POSITIVE);

    // Cells: uniqueness, convexity, CCW normalization.
    let mut cells = Vec::with_capacity(file.cells.len());
    let mut by_name = HashMap::new();
    for c in &file.cells {
        if by_name.contains_key(&c.id) {
            return Err(EnvError::DuplicateCellId(c.id.clone()));
        }
        let mut vertices: Vec<Point> = c.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
        if vertices.len() >= 3 && signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if !is_strictly_convex_ccw(&vertices, eps) {
            return Err(EnvError::NonConvexCell(c.id.clone()));
        }
        by_name.insert(c.id.clone(), cells.len());
        cells.push(Cell {
            name: c.id.clone(),
            vertices,
        });
    }

    // Pairwise interior disjointness and facet exactness; adjacency falls out.
    let n = cells.len();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&cells[i], &cells[j]);
            check_disjoint(a, b, eps)?;
            let mut shared_full = false;
            for ea in a.edges() {
                for eb in b.edges() {
                    if !ea.collinear_with(&eb, eps) {
                        continue;
                    }
                    let overlap = ea.collinear_overlap_len(&eb);
                    if overlap <= eps {
                        continue;
                    }
                    if ea.same_endpoints(&eb, eps) {
                        shared_full = true;
                    } else {
                        return Err(EnvError::PartialEdgeShare(a.name.clone(), b.name.clone()));
                    }
                }
            }
            if shared_full {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }

    // Regions: known cells, one region per cell. Region names are interned
    // in file (alphabetical, via BTreeMap) order.
    let mut props = Props::new();
    let mut region_of: Vec<Option<PropId>> = vec![None; n];
    for (region, members) in &file.regions {
        let pid = props.intern(region);
        for cell_name in members {
            let id = *by_name
                .get(cell_name)
                .ok_or_else(|| EnvError::UnknownRegionCell {
                    region: region.clone(),
                    cell: cell_name.clone(),
                })?;
            if let Some(prev) = region_of[id] {
                return Err(EnvError::CellInTwoRegions {
                    cell: cell_name.clone(),
                    first: props.name(prev).to_string(),
                    second: region.clone(),
                });
            }
            region_of[id] = Some(pid);
        }
    }

    let partition = Partition {
        cells,
        by_name,
        props,
        region_of,
        neighbors,
        eps,
    };

    // Robots.
    if file.robots.is_empty() {
        return Err(EnvError::NoRobots);
    }
    let mut starts = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in &file.robots {
        if !seen.insert(r.id) {
            return Err(EnvError::DuplicateRobotId(r.id));
        }
        let cell = match (r.position, &r.cell) {
            (Some([x, y]), None) => partition
                .locate(Point::new(x, y))
                .map_err(|_| EnvError::PositionOutside { robot: r.id, x, y })?,
            (None, Some(name)) => {
                partition
                    .cell_id(name)
                    .ok_or_else(|| EnvError::UnknownRobotCell {
                        robot: r.id,
                        cell: name.clone(),
                    })?
            }
            _ => return Err(EnvError::RobotPlacement(r.id)),
        };
        starts.push(RobotStart { robot: r.id, cell });
    }
    starts.sort_by_key(|s| s.robot);

    Ok(Environment { partition, starts })
}

fn check_disjoint(a: &Cell, b: &Cell, eps: f64) -> Result<(), EnvError> {
    if convex_interiors_intersect(&a.vertices, &b.vertices, eps) {
        return Err(EnvError::OverlappingCells(a.name.clone(), b.name.clone()));
    }
    Ok(())
}

/// Natural comparison: digit runs compare numerically, so `c2 < c10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (ab, bb) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < ab.len() && j < bb.len() {
        if ab[i].is_ascii_digit() && bb[j].is_ascii_digit() {
            let si = i;
            while i < ab.len() && ab[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < bb.len() && bb[j].is_ascii_digit() {
                j += 1;
            }
            let na: u128 = a[si..i].parse().unwrap_or(u128::MAX);
            let nb: u128 = b[sj..j].parse().unwrap_or(u128::MAX);
            match na.cmp(&nb) {
                Ordering::Equal => {}
                ord => return ord,
            }
        } else {
            match ab[i].cmp(&bb[j]) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                ord => return ord,
            }
        }
    }
    (ab.len() - i).cmp(&(bb.len() - j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str, x: f64, y: f64) -> String {
        format!(
            r#"{{ "id": "{id}", "vertices": [[{x},{y}],[{x1},{y}],[{x1},{y1}],[{x},{y1}]] }}"#,
            x1 = x + 1.0,
            y1 = y + 1.0
        )
    }

    fn env_json(cells: &[String], regions: &str, robots: &str) -> String {
        format!(
            r#"{{ "cells": [{}], "regions": {regions}, "robots": {robots} }}"#,
            cells.join(",")
        )
    }

    #[test]
    fn two_squares_share_a_full_edge() {
        let json = env_json(
            &[square("c1", 0.0, 0.0), square("c2", 1.0, 0.0)],
            r#"{ "pi1": ["c2"] }"#,
            r#"[{ "id": 1, "cell": "c1" }]"#,
        );
        let env = load_partition(&json).unwrap();
        let p = &env.partition;
        let (a, b) = (p.cell_id("c1").unwrap(), p.cell_id("c2").unwrap());
        assert!(p.are_adjacent(a, b));
        assert_eq!(p.neighbors(a), &[b]);
        assert_eq!(p.observation(b), PropSet::singleton(0));
        assert_eq!(p.observation(a), PropSet::empty());
        assert_eq!(env.start_cells(), vec![a]);
    }

    #[test]
    fn corner_touch_is_not_adjacency() {
        let json = env_json(
            &[square("c1", 0.0, 0.0), square("c2", 1.0, 1.0)],
            "{}",
            r#"[{ "id": 1, "cell": "c1" }]"#,
        );
        let env = load_partition(&json).unwrap();
        let p = &env.partition;
        assert!(!p.are_adjacent(0, 1));
    }

    #[test]
    fn partial_edge_share_is_rejected() {
        // c2 is a 2-wide cell whose bottom edge covers c1's top edge plus more.
        let json = format!(
            r#"{{ "cells": [
                {},
                {{ "id": "c2", "vertices": [[0,1],[2,1],[2,2],[0,2]] }}
            ], "regions": {{}}, "robots": [{{ "id": 1, "cell": "c1" }}] }}"#,
            square("c1", 0.0, 0.0)
        );
        assert!(matches!(
            load_partition(&json),
            Err(EnvError::PartialEdgeShare(_, _))
        ));
    }

    #[test]
    fn overlapping_cells_are_rejected() {
        let json = env_json(
            &[square("c1", 0.0, 0.0), square("c2", 0.5, 0.0)],
            "{}",
            r#"[{ "id": 1, "cell": "c1" }]"#,
        );
        assert!(matches!(
            load_partition(&json),
            Err(EnvError::OverlappingCells(_, _))
        ));
        // Identical cells are also overlap.
        let json = env_json(
            &[square("c1", 0.0, 0.0), square("c2", 0.0, 0.0)],
            "{}",
            r#"[{ "id": 1, "cell": "c1" }]"#,
        );
        assert!(matches!(
            load_partition(&json),
            Err(EnvError::OverlappingCells(_, _))
        ));
    }

    #[test]
    fn non_convex_cell_rejected() {
        let json = r#"{ "cells": [
            { "id": "c1", "vertices": [[0,0],[2,0],[1,0.5],[2,2],[0,2]] }
        ], "regions": {}, "robots": [{ "id": 1, "cell": "c1" }] }"#;
        assert!(matches!(
            load_partition(json),
            Err(EnvError::NonConvexCell(_))
        ));
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let json = r#"{ "cells": [
            { "id": "c1", "vertices": [[0,0],[0,1],[1,1],[1,0]] }
        ], "regions": {}, "robots": [{ "id": 1, "cell": "c1" }] }"#;
        let env = load_partition(json).unwrap();
        assert!(signed_area(&env.partition.cell(0).vertices) > 0.0);
    }

    #[test]
    fn region_validation() {
        let cells = [square("c1", 0.0, 0.0), square("c2", 1.0, 0.0)];
        let bad_ref = env_json(&cells, r#"{ "pi1": ["c9"] }"#, r#"[{ "id": 1, "cell": "c1" }]"#);
        assert!(matches!(
            load_partition(&bad_ref),
            Err(EnvError::UnknownRegionCell { .. })
        ));
        let two_regions = env_json(
            &cells,
            r#"{ "pi1": ["c1"], "pi2": ["c1"] }"#,
            r#"[{ "id": 1, "cell": "c1" }]"#,
        );
        assert!(matches!(
            load_partition(&two_regions),
            Err(EnvError::CellInTwoRegions { .. })
        ));
    }

    #[test]
    fn robot_placement_forms() {
        let cells = [square("c1", 0.0, 0.0), square("c2", 1.0, 0.0)];
        let json = env_json(
            &cells,
            "{}",
            r#"[{ "id": 2, "cell": "c2" }, { "id": 1, "position": [0.5, 0.5] }]"#,
        );
        let env = load_partition(&json).unwrap();
        // Sorted by robot id.
        assert_eq!(env.starts[0].robot, 1);
        assert_eq!(env.starts[0].cell, 0);
        assert_eq!(env.starts[1].robot, 2);
        assert_eq!(env.starts[1].cell, 1);

        let both = env_json(
            &cells,
            "{}",
            r#"[{ "id": 1, "cell": "c1", "position": [0.5, 0.5] }]"#,
        );
        assert!(matches!(
            load_partition(&both),
            Err(EnvError::RobotPlacement(1))
        ));
        let neither = env_json(&cells, "{}", r#"[{ "id": 1 }]"#);
        assert!(matches!(
            load_partition(&neither),
            Err(EnvError::RobotPlacement(1))
        ));
        let outside = env_json(&cells, "{}", r#"[{ "id": 1, "position": [9.0, 9.0] }]"#);
        assert!(matches!(
            load_partition(&outside),
            Err(EnvError::PositionOutside { .. })
        ));
    }

    #[test]
    fn locate_tie_breaks_on_natural_id_order() {
        // Point on the shared edge of c2/c10 resolves to c2.
        let json = env_json(
            &[square("c10", 0.0, 0.0), square("c2", 1.0, 0.0)],
            "{}",
            r#"[{ "id": 1, "cell": "c2" }]"#,
        );
        let env = load_partition(&json).unwrap();
        let p = &env.partition;
        let hit = p.locate(Point::new(1.0, 0.5)).unwrap();
        assert_eq!(p.cell_name(hit), "c2");
        assert!(matches!(
            p.locate(Point::new(5.0, 5.0)),
            Err(EnvError::LocateOutside { .. })
        ));
    }

    #[test]
    fn natural_order() {
        assert_eq!(natural_cmp("c2", "c10"), Ordering::Less);
        assert_eq!(natural_cmp("c10", "c10"), Ordering::Equal);
        assert_eq!(natural_cmp("c10", "c2"), Ordering::Greater);
        assert_eq!(natural_cmp("a2b", "a2c"), Ordering::Less);
        assert_eq!(natural_cmp("x", "x1"), Ordering::Less);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let json = env_json(
            &[square("c1", 0.0, 0.0), square("c1", 1.0, 0.0)],
            "{}",
            r#"[{ "id": 1, "cell": "c1" }]"#,
        );
        assert!(matches!(
            load_partition(&json),
            Err(EnvError::DuplicateCellId(_))
        ));
        let json = env_json(
            &[square("c1", 0.0, 0.0)],
            "{}",
            r#"[{ "id": 1, "cell": "c1" }, { "id": 1, "cell": "c1" }]"#,
        );
        assert!(matches!(
            load_partition(&json),
            Err(EnvError::DuplicateRobotId(1))
        ));
    }
}
