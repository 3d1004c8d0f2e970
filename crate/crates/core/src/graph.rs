//! Dense adjacency view of a complex's 1-skeleton, graph inputs and the
//! seeded graph families used by experiments.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{build_complex, parse_complex, Cell, CellId, ChainComplex};
use crate::error::{Error, Result};

/// Vertices are stored densely in ascending id order. Self-loops and cells of
/// dimension above one are ignored.
#[derive(Clone, Debug)]
pub struct Graph {
    ids: Vec<CellId>,
    index: HashMap<CellId, usize>,
    neighbors: Vec<Vec<usize>>,
    adj: Vec<Vec<u64>>,
    edge: HashMap<(usize, usize), CellId>,
    edge_count: usize,
}

impl Graph {
    pub fn from_complex(complex: &ChainComplex) -> Self {
        let ids: Vec<CellId> = complex.cells_of_dim(0).to_vec();
        let index: HashMap<CellId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let words = n.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; n];
        let mut edge = HashMap::new();
        let mut edge_count = 0;
        for &e in complex.cells_of_dim(1) {
            let b = &complex.cell(e).unwrap().boundary;
            if b.len() != 2 {
                continue;
            }
            edge_count += 1;
            let (u, v) = (index[&b[0]], index[&b[1]]);
            adj[u][v / 64] |= 1 << (v % 64);
            adj[v][u / 64] |= 1 << (u % 64);
            // ids ascend, so the first edge seen per pair is the lowest
            edge.entry((u.min(v), u.max(v))).or_insert(e);
        }
        let neighbors = (0..n).map(|u| (0..n).filter(|&v| adj[u][v / 64] >> (v % 64) & 1 == 1).collect()).collect();
        Self { ids, index, neighbors, adj, edge, edge_count }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertex_ids(&self) -> &[CellId] {
        &self.ids
    }

    pub fn index_of(&self, id: CellId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownVertex(id))
    }

    pub fn id_of(&self, i: usize) -> CellId {
        self.ids[i]
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v / 64] >> (v % 64) & 1 == 1
    }

    /// Neighbors of a dense index, ascending.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[u]
    }

    /// Lowest-id edge between two dense indices.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<CellId> {
        self.edge.get(&(u.min(v), u.max(v))).copied()
    }

    /// Edge ids along a walk of dense indices.
    pub fn walk_edges(&self, walk: &[usize]) -> Result<Vec<CellId>> {
        walk.windows(2)
            .map(|w| self.edge_between(w[0], w[1]).ok_or(Error::NotAdjacent(self.ids[w[0]], self.ids[w[1]])))
            .collect()
    }

    /// Hop distances from `s`, `None` where unreachable.
    pub fn bfs_distances(&self, s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.ids.len()];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &w in &self.neighbors[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Component label per dense index; labels follow the lowest index of
    /// each component.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.ids.len()];
        for s in 0..self.ids.len() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.neighbors[u] {
                    if label[w] == usize::MAX {
                        label[w] = s;
                        stack.push(w);
                    }
                }
            }
        }
        label
    }

    /// A shortest path between two vertex ids, as vertex ids.
    pub fn shortest_path(&self, s: CellId, t: CellId) -> Result<Option<Vec<CellId>>> {
        let (s, t) = (self.index_of(s)?, self.index_of(t)?);
        let mut parent = vec![usize::MAX; self.ids.len()];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &w in &self.neighbors[u] {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if parent[t] == usize::MAX {
            return Ok(None);
        }
        let mut path = vec![t];
        while *path.last().unwrap() != s {
            path.push(parent[*path.last().unwrap()]);
        }
        path.reverse();
        Ok(Some(path.into_iter().map(|i| self.ids[i]).collect()))
    }

    /// Double-sweep lower bound on the diameter of the component of the
    /// lowest vertex.
    pub fn diameter_estimate(&self) -> usize {
        if self.ids.is_empty() {
            return 0;
        }
        let far = |s: usize| {
            self.bfs_distances(s)
                .iter()
                .enumerate()
                .filter_map(|(i, d)| d.map(|d| (d, i)))
                .max_by_key(|&(d, i)| (d, std::cmp::Reverse(i)))
                .unwrap()
        };
        let (_, a) = far(0);
        far(a).0
    }
}

/// Plain edge list: one `u v` pair per line, `#` starts a comment. Vertex
/// ids are the labels; edge ids follow the largest label in line order.
pub fn parse_edge_list(text: &str) -> Result<ChainComplex> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<CellId>().map_err(|_| Error::Parse(format!("line {}: {s:?} is not a vertex id", lineno + 1)))
        };
        if fields.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected \"u v\"", lineno + 1)));
        }
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(Error::Parse(format!("line {}: self-loop at {u}", lineno + 1)));
        }
        pairs.push((u, v));
    }
    let vertices: std::collections::BTreeSet<CellId> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let first_edge = vertices.last().map_or(0, |m| m + 1);
    let mut cells: Vec<Cell> = vertices.into_iter().map(Cell::vertex).collect();
    for (i, (u, v)) in pairs.into_iter().enumerate() {
        cells.push(Cell::new(first_edge + i, 1, vec![u, v]));
    }
    build_complex(cells)
}

/// Reads either a complex document (JSON) or an edge list.
pub fn parse_graph(text: &str) -> Result<ChainComplex> {
    if text.trim_start().starts_with('{') {
        parse_complex(text)
    } else {
        parse_edge_list(text)
    }
}

/// `n x n` grid: vertex `r*n + c`; for each vertex in order its right edge,
/// then its down edge, numbered from `n^2`.
pub fn grid_graph(n: usize) -> ChainComplex {
    let mut cells: Vec<Cell> = (0..n * n).map(Cell::vertex).collect();
    let mut next = n * n;
    for r in 0..n {
        for c in 0..n {
            let v = r * n + c;
            if c + 1 < n {
                cells.push(Cell::new(next, 1, vec![v, v + 1]));
                next += 1;
            }
            if r + 1 < n {
                cells.push(Cell::new(next, 1, vec![v, v + n]));
                next += 1;
            }
        }
    }
    build_complex(cells).unwrap()
}

/// Erdos-Renyi `G(n, p)`; pairs `i < j` are drawn in lexicographic order.
pub fn gnp_graph(n: usize, p: f64, seed: u64) -> ChainComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<Cell> = (0..n).map(Cell::vertex).collect();
    let mut next = n;
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                cells.push(Cell::new(next, 1, vec![i, j]));
                next += 1;
            }
        }
    }
    build_complex(cells).unwrap()
}

/// Cycle on `n` vertices plus `chords` distinct random chords.
pub fn ring_with_chords(n: usize, chords: usize, seed: u64) -> ChainComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<Cell> = (0..n).map(Cell::vertex).collect();
    let mut used = std::collections::BTreeSet::new();
    for i in 0..n {
        let (u, v) = (i, (i + 1) % n);
        used.insert((u.min(v), u.max(v)));
        cells.push(Cell::new(n + i, 1, vec![u, v]));
    }
    let possible = n * n.saturating_sub(1) / 2 - used.len();
    let mut next = 2 * n;
    for _ in 0..chords.min(possible) {
        loop {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && used.insert((u.min(v), u.max(v))) {
                cells.push(Cell::new(next, 1, vec![u.min(v), u.max(v)]));
                next += 1;
                break;
            }
        }
    }
    build_complex(cells).unwrap()
}

/// Graph family selector used by experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    Grid { n: usize },
    Gnp { n: usize, p: f64 },
    RingChords { n: usize, chords: usize },
    File { path: String },
}

impl GraphSpec {
    /// Builds the graph; random families draw from `seed`.
    pub fn build(&self, seed: u64) -> Result<ChainComplex> {
        match *self {
            GraphSpec::Grid { n } if n >= 1 => Ok(grid_graph(n)),
            GraphSpec::Gnp { n, p } if n >= 1 && (0.0..=1.0).contains(&p) => Ok(gnp_graph(n, p, seed)),
            GraphSpec::RingChords { n, chords } if n >= 3 => Ok(ring_with_chords(n, chords, seed)),
            GraphSpec::File { ref path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::ConfigInvalid(format!("cannot read graph file {path}: {e}")))?;
                parse_graph(&text)
            }
            ref other => Err(Error::ConfigInvalid(format!("invalid graph parameters {other:?}"))),
        }
    }
}
