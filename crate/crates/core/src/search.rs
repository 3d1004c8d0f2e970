//! Recursive midpoint search, cycle closure through a virtual return edge,
//! and condensation of answered paths into a next-hop table.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{Cell, CellId, Chain, ChainComplex, Filtration};
use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;
use crate::graph::Graph;
use crate::homology::betti_numbers;

#[derive(Clone, Debug)]
pub struct NavigationTask {
    pub graph: ChainComplex,
    pub source: CellId,
    pub target: CellId,
    pub rng_seed: u64,
}

impl NavigationTask {
    pub fn new(graph: ChainComplex, source: CellId, target: CellId, rng_seed: u64) -> Result<Self> {
        for v in [source, target] {
            if graph.cell(v).is_none_or(|c| c.dim != 0) {
                return Err(Error::UnknownVertex(v));
            }
        }
        Ok(Self { graph, source, target, rng_seed })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vertices: Vec<CellId>,
    pub edges: Vec<CellId>,
    pub expansions: u64,
}

impl Trajectory {
    pub fn trivial(v: CellId) -> Self {
        Self { vertices: vec![v], edges: Vec::new(), expansions: 0 }
    }

    pub fn source(&self) -> CellId {
        self.vertices[0]
    }

    pub fn target(&self) -> CellId {
        *self.vertices.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Removes every loop by cutting back to the first visit of a repeated
    /// vertex.
    pub fn loop_erased(&self) -> Trajectory {
        let mut vertices: Vec<CellId> = Vec::with_capacity(self.vertices.len());
        let mut edges: Vec<CellId> = Vec::with_capacity(self.edges.len());
        for (i, &v) in self.vertices.iter().enumerate() {
            if let Some(pos) = vertices.iter().position(|&w| w == v) {
                vertices.truncate(pos + 1);
                edges.truncate(pos);
            } else {
                if i > 0 {
                    edges.push(self.edges[i - 1]);
                }
                vertices.push(v);
            }
        }
        Trajectory { vertices, edges, expansions: self.expansions }
    }

    /// Checks that consecutive vertices are joined by the listed edges.
    pub fn validate(&self, complex: &ChainComplex) -> Result<()> {
        if self.vertices.is_empty() || self.vertices.len() != self.edges.len() + 1 {
            return Err(Error::ShapeMismatch("a trajectory needs one more vertex than edges".into()));
        }
        for (i, &e) in self.edges.iter().enumerate() {
            let (u, v) = (self.vertices[i], self.vertices[i + 1]);
            let ok = complex.cell(e).is_some_and(|c| {
                let b = &c.boundary;
                c.dim == 1 && b.len() == 2 && ((b[0] == u && b[1] == v) || (b[0] == v && b[1] == u))
            });
            if !ok {
                return Err(Error::NotAdjacent(u, v));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub max_depth: usize,
    pub max_live_midpoints: usize,
}

/// `ceil(log2 k) + 1`, the deepest the recursion may go.
pub fn depth_bound(k: usize) -> usize {
    let mut d = 0;
    while (1usize << d) < k {
        d += 1;
    }
    d + 1
}

struct Savitch<'a> {
    g: &'a Graph,
    path: Vec<usize>,
    stats: SearchStats,
    live: usize,
}

impl Savitch<'_> {
    /// Appends the vertices after `u` of a walk `u -> v` of length at most `k`.
    fn reach(&mut self, u: usize, v: usize, k: usize, depth: usize) -> bool {
        self.stats.expansions += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if u == v {
            return true;
        }
        if k <= 1 {
            if k == 1 && self.g.adjacent(u, v) {
                self.path.push(v);
                return true;
            }
            return false;
        }
        let (lo, hi) = (k.div_ceil(2), k / 2);
        let mark = self.path.len();
        self.live += 1;
        self.stats.max_live_midpoints = self.stats.max_live_midpoints.max(self.live);
        for m in 0..self.g.vertex_count() {
            if self.reach(u, m, lo, depth + 1) && self.reach(m, v, hi, depth + 1) {
                self.live -= 1;
                return true;
            }
            self.path.truncate(mark);
        }
        self.live -= 1;
        false
    }
}

/// Savitch reachability on dense indices of `g`. The walk found is the first
/// one in ascending midpoint order, not necessarily a shortest one.
pub fn savitch_reach(g: &Graph, s: CellId, t: CellId, k: usize) -> Result<(Option<Trajectory>, SearchStats)> {
    let (u, v) = (g.index_of(s)?, g.index_of(t)?);
    let mut run = Savitch { g, path: vec![u], stats: SearchStats::default(), live: 0 };
    let found = run.reach(u, v, k, 1);
    let traj = if found {
        let edges = g.walk_edges(&run.path)?;
        Some(Trajectory {
            vertices: run.path.iter().map(|&i| g.id_of(i)).collect(),
            edges,
            expansions: run.stats.expansions,
        })
    } else {
        None
    };
    Ok((traj, run.stats))
}

pub fn savitch_search(task: &NavigationTask, k: usize) -> Option<Trajectory> {
    let g = Graph::from_complex(&task.graph);
    savitch_reach(&g, task.source, task.target, k).ok().and_then(|(t, _)| t)
}

/// The base complex plus the virtual return edges added by closures.
#[derive(Clone, Debug, PartialEq)]
pub struct ExploredComplex {
    base: ChainComplex,
    complex: ChainComplex,
    virtual_edges: BTreeMap<(CellId, CellId), CellId>,
}

impl ExploredComplex {
    pub fn new(base: ChainComplex) -> Self {
        Self { complex: base.clone(), base, virtual_edges: BTreeMap::new() }
    }

    pub fn base(&self) -> &ChainComplex {
        &self.base
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn filtration(&self) -> Filtration {
        Filtration::new(self.complex.clone())
    }

    pub fn virtual_edge(&self, s: CellId, t: CellId) -> Option<CellId> {
        self.virtual_edges.get(&(s.min(t), s.max(t))).copied()
    }

    pub fn is_virtual(&self, e: CellId) -> bool {
        self.virtual_edges.values().any(|&v| v == e)
    }

    pub fn virtual_count(&self) -> usize {
        self.virtual_edges.len()
    }

    /// Adds cells to the underlying complex (e.g. filling faces).
    pub fn attach(&mut self, cells: impl IntoIterator<Item = Cell>) -> Result<()> {
        self.complex = self.complex.with_cells(cells)?;
        Ok(())
    }

    fn ensure_virtual(&mut self, s: CellId, t: CellId) -> Result<(CellId, bool)> {
        if let Some(e) = self.virtual_edge(s, t) {
            return Ok((e, false));
        }
        let birth = |v: CellId| self.complex.cell(v).map(|c| c.birth).ok_or(Error::UnknownVertex(v));
        let id = self.complex.next_id();
        let cell = Cell::new(id, 1, vec![s.min(t), s.max(t)]).born(birth(s)?.max(birth(t)?));
        self.complex = self.complex.with_cells([cell])?;
        self.virtual_edges.insert((s.min(t), s.max(t)), id);
        Ok((id, true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub chain: Chain,
    pub virtual_edge: Option<CellId>,
    /// Whether the virtual edge was created by this call.
    pub added: bool,
    pub b1_before: usize,
    pub b1_after: usize,
}

impl Closure {
    /// True when closing created a new independent cycle.
    pub fn raised_b1(&self) -> bool {
        self.b1_after > self.b1_before
    }
}

fn b1(complex: &ChainComplex) -> usize {
    betti_numbers(complex).get(1).copied().unwrap_or(0)
}

/// Closes a trajectory with a virtual return edge `(target, source)`.
///
/// A walk that already returns to its start needs no return edge; if its
/// chain cancels to zero the zero chain comes back.
pub fn close_cycle(traj: &Trajectory, explored: &mut ExploredComplex) -> Result<Closure> {
    traj.validate(explored.complex())?;
    let b1_before = b1(explored.complex());
    let walk = Chain::from_cells(1, traj.edges.iter().copied());
    let (s, t) = (traj.source(), traj.target());
    if s == t {
        return Ok(Closure { chain: walk, virtual_edge: None, added: false, b1_before, b1_after: b1_before });
    }
    let (e, added) = explored.ensure_virtual(s, t)?;
    let b1_after = if added { b1(explored.complex()) } else { b1_before };
    Ok(Closure { chain: walk.add(&Chain::from_cells(1, [e])), virtual_edge: Some(e), added, b1_before, b1_after })
}

/// Memoized next hops: `(source, target) -> (edge, next vertex)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ScaffoldDocument", try_from = "ScaffoldDocument")]
pub struct ScaffoldTable {
    next_hop: BTreeMap<(CellId, CellId), (CellId, CellId)>,
    closed_classes: BTreeSet<Gf2Vec>,
}

#[derive(Serialize, Deserialize)]
struct ScaffoldDocument {
    /// `[source, target, edge, next]`
    next_hop: Vec<[CellId; 4]>,
    closed_classes: Vec<Gf2Vec>,
}

impl From<ScaffoldTable> for ScaffoldDocument {
    fn from(t: ScaffoldTable) -> Self {
        ScaffoldDocument {
            next_hop: t.next_hop.into_iter().map(|((s, g), (e, n))| [s, g, e, n]).collect(),
            closed_classes: t.closed_classes.into_iter().collect(),
        }
    }
}

impl TryFrom<ScaffoldDocument> for ScaffoldTable {
    type Error = Error;

    fn try_from(d: ScaffoldDocument) -> Result<Self> {
        let table = ScaffoldTable {
            next_hop: d.next_hop.into_iter().map(|[s, g, e, n]| ((s, g), (e, n))).collect(),
            closed_classes: d.closed_classes.into_iter().collect(),
        };
        if table.has_loop() {
            return Err(Error::CycleConflict);
        }
        Ok(table)
    }
}

impl ScaffoldTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.next_hop.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next_hop.is_empty()
    }

    pub fn next_hop(&self, s: CellId, t: CellId) -> Option<(CellId, CellId)> {
        self.next_hop.get(&(s, t)).copied()
    }

    pub fn contains(&self, s: CellId, t: CellId) -> bool {
        s == t || self.next_hop.contains_key(&(s, t))
    }

    pub fn keys(&self) -> impl Iterator<Item = (CellId, CellId)> + '_ {
        self.next_hop.keys().copied()
    }

    pub fn closed_classes(&self) -> &BTreeSet<Gf2Vec> {
        &self.closed_classes
    }

    fn walk_terminates(&self, s: CellId, t: CellId) -> bool {
        let mut cur = s;
        let mut seen = BTreeSet::new();
        while cur != t {
            if !seen.insert(cur) {
                return false;
            }
            match self.next_hop.get(&(cur, t)) {
                Some(&(_, n)) => cur = n,
                None => return true,
            }
        }
        true
    }

    fn has_loop(&self) -> bool {
        self.next_hop.keys().any(|&(s, t)| !self.walk_terminates(s, t))
    }

    /// Loop-erases `traj` and writes a next hop for every suffix pair
    /// `(v_i, target)`. Newer paths overwrite older hops; the table is left
    /// untouched if the result would contain a loop.
    pub fn condense(&mut self, traj: &Trajectory, class_vec: Option<&Gf2Vec>) -> Result<()> {
        let path = traj.loop_erased();
        let t = path.target();
        let mut updated = self.next_hop.clone();
        for i in 0..path.edges.len() {
            updated.insert((path.vertices[i], t), (path.edges[i], path.vertices[i + 1]));
        }
        let check = ScaffoldTable { next_hop: updated, closed_classes: BTreeSet::new() };
        if path.vertices.iter().any(|&v| !check.walk_terminates(v, t)) {
            return Err(Error::CycleConflict);
        }
        self.next_hop = check.next_hop;
        if let Some(c) = class_vec.filter(|c| !c.is_zero()) {
            self.closed_classes.insert(c.clone());
        }
        Ok(())
    }
}

pub fn condense_to_scaffold(
    scaffold: &ScaffoldTable,
    traj: &Trajectory,
    class_vec: Option<&Gf2Vec>,
) -> Result<ScaffoldTable> {
    let mut out = scaffold.clone();
    out.condense(traj, class_vec)?;
    Ok(out)
}

/// Follows memoized hops; each hop is one expansion.
pub fn dp_lookup(scaffold: &ScaffoldTable, source: CellId, target: CellId) -> Option<Trajectory> {
    let mut traj = Trajectory::trivial(source);
    let mut cur = source;
    while cur != target {
        let (e, next) = scaffold.next_hop(cur, target)?;
        traj.edges.push(e);
        traj.vertices.push(next);
        traj.expansions += 1;
        cur = next;
        if traj.edges.len() > scaffold.len() {
            return None;
        }
    }
    Some(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::grid_graph;
    use crate::homology::homology_basis;

    fn task(g: ChainComplex, s: CellId, t: CellId) -> NavigationTask {
        NavigationTask::new(g, s, t, 0).unwrap()
    }

    #[test]
    fn path_graph_search() {
        let t = savitch_search(&task(fixtures::path_graph(4), 0, 3), 4).unwrap();
        assert_eq!(t.vertices, vec![0, 1, 2, 3]);
        assert_eq!(t.edges, vec![4, 5, 6]);
        assert!(savitch_search(&task(fixtures::path_graph(4), 0, 3), 2).is_none());
    }

    #[test]
    fn trivial_query_is_one_expansion() {
        let t = savitch_search(&task(fixtures::path_graph(4), 2, 2), 3).unwrap();
        assert_eq!(t.vertices, vec![2]);
        assert!(t.edges.is_empty());
        assert_eq!(t.expansions, 1);
    }

    #[test]
    fn unreachable_stays_within_depth() {
        let g = crate::graph::parse_edge_list("0 1\n1 2\n3 4\n").unwrap();
        let view = Graph::from_complex(&g);
        let (t, stats) = savitch_reach(&view, 0, 4, 5).unwrap();
        assert!(t.is_none());
        assert!(stats.max_depth <= depth_bound(5));
        assert!(stats.max_live_midpoints < stats.max_depth);
        assert_eq!(NavigationTask::new(g, 0, 99, 0).unwrap_err(), Error::UnknownVertex(99));
    }

    #[test]
    fn depth_bounds() {
        assert_eq!(depth_bound(1), 1);
        assert_eq!(depth_bound(2), 2);
        assert_eq!(depth_bound(4), 3);
        assert_eq!(depth_bound(5), 4);
        assert_eq!(depth_bound(64), 7);
    }

    #[test]
    fn grid_corner_to_corner() {
        let view = Graph::from_complex(&grid_graph(4));
        let (t, stats) = savitch_reach(&view, 0, 15, 16).unwrap();
        let t = t.unwrap();
        assert_eq!(t.target(), 15);
        t.validate(&grid_graph(4)).unwrap();
        assert!(t.len() <= 16);
        assert!(stats.max_depth <= depth_bound(16));
    }

    #[test]
    fn triangle_walk_closes_to_new_cycle() {
        let mut ex = ExploredComplex::new(fixtures::path_graph(3));
        let walk = Trajectory { vertices: vec![0, 1, 2], edges: vec![3, 4], expansions: 0 };
        let c = close_cycle(&walk, &mut ex).unwrap();
        assert!(c.added && c.raised_b1());
        assert_eq!((c.b1_before, c.b1_after), (0, 1));
        assert!(crate::complex::is_cycle(&c.chain, ex.complex()).unwrap());
        let basis = homology_basis(ex.complex(), 1).unwrap();
        assert!(!basis.coordinates(&c.chain).unwrap().a.is_zero());
        // closing the same pair again reuses the edge
        let again = close_cycle(&walk, &mut ex).unwrap();
        assert!(!again.added);
        assert_eq!(again.chain, c.chain);
        assert_eq!(ex.virtual_count(), 1);
    }

    #[test]
    fn backtracking_closes_to_zero() {
        let mut ex = ExploredComplex::new(fixtures::path_graph(3));
        let walk = Trajectory { vertices: vec![0, 1, 0], edges: vec![3, 3], expansions: 0 };
        let c = close_cycle(&walk, &mut ex).unwrap();
        assert!(c.chain.is_zero());
        assert_eq!(ex.virtual_count(), 0);
    }

    #[test]
    fn walk_over_filled_region_is_trivial() {
        let mut ex = ExploredComplex::new(fixtures::filled_triangle());
        let walk = Trajectory { vertices: vec![0, 1, 2], edges: vec![3, 4], expansions: 0 };
        let c = close_cycle(&walk, &mut ex).unwrap();
        let basis = homology_basis(ex.complex(), 1).unwrap();
        // the closure is homologous to the virtual edge plus e02, a new loop;
        // the filled triangle itself contributes nothing
        let filled = Chain::from_cells(1, [3, 4, 5]);
        assert!(basis.coordinates(&filled).unwrap().a.is_zero());
        let around = Trajectory { vertices: vec![0, 1, 2, 0], edges: vec![3, 4, 5], expansions: 0 };
        let c2 = close_cycle(&around, &mut ex).unwrap();
        assert!(basis.coordinates(&c2.chain).unwrap().a.is_zero());
        assert!(!basis.coordinates(&c.chain).unwrap().a.is_zero());
    }

    #[test]
    fn scaffold_memoization() {
        let mut table = ScaffoldTable::new();
        let t = Trajectory { vertices: vec![0, 1, 2, 3], edges: vec![4, 5, 6], expansions: 0 };
        table.condense(&t, None).unwrap();
        assert_eq!(table.len(), 3);
        let hop = dp_lookup(&table, 1, 3).unwrap();
        assert_eq!(hop.vertices, vec![1, 2, 3]);
        assert_eq!(hop.expansions, 2);
        let before = table.clone();
        table.condense(&t, None).unwrap();
        assert_eq!(table, before);
        assert!(dp_lookup(&table, 0, 2).is_none());
        assert_eq!(dp_lookup(&table, 2, 2).unwrap().expansions, 0);
    }

    #[test]
    fn shared_suffix_written_once() {
        let a = Trajectory { vertices: vec![0, 1, 2, 3], edges: vec![10, 11, 12], expansions: 0 };
        let b = Trajectory { vertices: vec![5, 2, 3], edges: vec![13, 12], expansions: 0 };
        let t1 = condense_to_scaffold(&ScaffoldTable::new(), &a, None).unwrap();
        let t2 = condense_to_scaffold(&t1, &b, None).unwrap();
        let added: Vec<_> = t2.keys().filter(|k| !t1.contains(k.0, k.1)).collect();
        assert_eq!(added, vec![(5, 3)]);
        assert_eq!(t2.next_hop(2, 3), t1.next_hop(2, 3));
    }

    #[test]
    fn classes_recorded_when_nonzero() {
        let t = Trajectory { vertices: vec![0, 1], edges: vec![2], expansions: 0 };
        let mut table = ScaffoldTable::new();
        table.condense(&t, Some(&Gf2Vec::zeros(2))).unwrap();
        assert!(table.closed_classes().is_empty());
        table.condense(&t, Some(&Gf2Vec::unit(2, 1))).unwrap();
        assert_eq!(table.closed_classes().len(), 1);
    }

    #[test]
    fn scaffold_json_roundtrip() {
        let mut table = ScaffoldTable::new();
        let t = Trajectory { vertices: vec![0, 1, 2], edges: vec![4, 5], expansions: 0 };
        table.condense(&t, Some(&Gf2Vec::unit(1, 0))).unwrap();
        let json = serde_json::to_string(&table).unwrap();
        assert_eq!(json, r#"{"next_hop":[[0,2,4,1],[1,2,5,2]],"closed_classes":[[1]]}"#);
        let back: ScaffoldTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, table);
        let looped = r#"{"next_hop":[[0,2,4,1],[1,2,4,0]],"closed_classes":[]}"#;
        assert!(serde_json::from_str::<ScaffoldTable>(looped).is_err());
    }

    #[test]
    fn loop_erasure() {
        let t = Trajectory { vertices: vec![2, 1, 2, 3], edges: vec![5, 5, 6], expansions: 7 };
        let e = t.loop_erased();
        assert_eq!(e.vertices, vec![2, 3]);
        assert_eq!(e.edges, vec![6]);
        assert_eq!(e.expansions, 7);
    }
}
