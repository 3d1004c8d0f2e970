//! Seeded random inputs: simplicial complexes, filtrations, sheaves and
//! connected graphs with a chosen cycle.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex::{build_complex, Cell, CellId, Chain, ChainComplex};
use crate::gf2::{Gf2Matrix, Gf2Vec};
use crate::sheaf::CellularSheaf;

/// Downward closure of a set of simplices, as a complex. Cells are numbered
/// by dimension, then lexicographically by vertex set.
pub fn simplicial_complex(simplices: &BTreeSet<Vec<usize>>) -> ChainComplex {
    let mut all: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for s in simplices {
        let n = s.len();
        for mask in 1u32..(1 << n) {
            let face: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            all.insert((face.len() - 1, face));
        }
    }
    let ids: BTreeMap<&Vec<usize>, CellId> = all.iter().enumerate().map(|(i, (_, f))| (f, i)).collect();
    let cells = all
        .iter()
        .map(|(dim, f)| {
            let boundary = if *dim == 0 {
                Vec::new()
            } else {
                (0..f.len())
                    .map(|skip| {
                        let facet: Vec<usize> =
                            f.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                        ids[&facet]
                    })
                    .collect()
            };
            Cell::new(ids[f], *dim, boundary)
        })
        .collect();
    build_complex(cells).expect("closures of simplices are valid complexes")
}

fn closure_size(simplices: &BTreeSet<Vec<usize>>) -> usize {
    let mut faces = BTreeSet::new();
    for s in simplices {
        for mask in 1u32..(1 << s.len()) {
            faces.insert((0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect::<Vec<_>>());
        }
    }
    faces.len()
}

fn random_simplex(rng: &mut impl Rng, n: usize, max_dim: usize) -> Vec<usize> {
    let size = rng.gen_range(1..=max_dim.min(n - 1)) + 1;
    let mut verts: Vec<usize> = (0..n).collect();
    verts.shuffle(rng);
    let mut s = verts[..size].to_vec();
    s.sort_unstable();
    s
}

/// Random simplicial complex with at most `max_cells` cells, dimension at
/// most `max_dim` (capped at 3), containing at least one triangle.
pub fn random_complex(rng: &mut impl Rng, max_cells: usize, max_dim: usize) -> ChainComplex {
    assert!(max_cells >= 7 && max_dim >= 2);
    let max_dim = max_dim.min(3);
    let n = rng.gen_range(3..=8);
    let mut tri: Vec<usize> = (0..n).collect();
    tri.shuffle(rng);
    let mut first = tri[..3].to_vec();
    first.sort_unstable();
    let mut simplices = BTreeSet::from([first]);
    let attempts = rng.gen_range(1..=12);
    for _ in 0..attempts {
        let s = random_simplex(rng, n, max_dim);
        let mut trial = simplices.clone();
        trial.insert(s);
        if closure_size(&trial) <= max_cells {
            simplices = trial;
        }
    }
    simplicial_complex(&simplices)
}

/// Drops one face from the boundary of the first cell of dimension at least
/// two, which breaks the boundary law.
pub fn mutate(complex: &ChainComplex) -> Option<ChainComplex> {
    let target = complex.cells().iter().find(|c| c.dim >= 2)?;
    let cells = complex
        .cells()
        .iter()
        .map(|c| if c.id == target.id { Cell { boundary: c.boundary[1..].to_vec(), ..c.clone() } } else { c.clone() })
        .collect();
    build_complex(cells).ok()
}

/// Assigns integer births in `0..levels` that respect the face order.
pub fn random_filtration(rng: &mut impl Rng, complex: &ChainComplex, levels: u32) -> ChainComplex {
    let mut births: BTreeMap<CellId, f64> = BTreeMap::new();
    let mut cells = Vec::with_capacity(complex.len());
    let top = complex.max_dim().unwrap_or(0);
    for d in 0..=top {
        for &id in complex.cells_of_dim(d) {
            let c = complex.cell(id).unwrap();
            let floor = c.boundary.iter().map(|f| births[f]).fold(0.0, f64::max);
            let birth = floor.max(rng.gen_range(0..levels) as f64);
            births.insert(id, birth);
            cells.push(c.clone().born(birth));
        }
    }
    build_complex(cells).unwrap()
}

/// Random multigraph-free graph on `n` vertices with roughly `p` edge density.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> ChainComplex {
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

/// Random connected graph: a random spanning tree plus `extra` chords.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, extra: usize) -> ChainComplex {
    let mut cells: Vec<Cell> = (0..n).map(Cell::vertex).collect();
    let mut used = BTreeSet::new();
    let mut next = n;
    for v in 1..n {
        let u = rng.gen_range(0..v);
        used.insert((u, v));
        cells.push(Cell::new(next, 1, vec![u, v]));
        next += 1;
    }
    let possible = n * (n - 1) / 2 - used.len();
    for _ in 0..extra.min(possible) {
        loop {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && used.insert((a.min(b), a.max(b))) {
                cells.push(Cell::new(next, 1, vec![a.min(b), a.max(b)]));
                next += 1;
                break;
            }
        }
    }
    build_complex(cells).unwrap()
}

/// The fundamental cycle of edge `e` with respect to the breadth-first
/// spanning forest grown from each component's lowest vertex; `None` if `e`
/// is a forest edge.
pub fn fundamental_cycle(graph: &ChainComplex, e: CellId) -> Option<Chain> {
    let mut adj: BTreeMap<CellId, Vec<(CellId, CellId)>> = BTreeMap::new();
    for &id in graph.cells_of_dim(1) {
        let b = &graph.cell(id).unwrap().boundary;
        if b.len() == 2 {
            adj.entry(b[0]).or_default().push((b[1], id));
            adj.entry(b[1]).or_default().push((b[0], id));
        }
    }
    let mut parent: BTreeMap<CellId, (CellId, CellId)> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for &root in graph.cells_of_dim(0) {
        if !seen.insert(root) {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, id) in adj.get(&u).map(|v| v.as_slice()).unwrap_or(&[]) {
                if seen.insert(w) {
                    parent.insert(w, (u, id));
                    queue.push_back(w);
                }
            }
        }
    }
    if parent.values().any(|&(_, id)| id == e) {
        return None;
    }
    let b = &graph.cell(e)?.boundary;
    let to_root = |mut v: CellId| {
        let mut edges = Vec::new();
        while let Some(&(p, id)) = parent.get(&v) {
            edges.push(id);
            v = p;
        }
        edges
    };
    let edges = to_root(b[0]).into_iter().chain(to_root(b[1])).chain([e]);
    Some(Chain::from_cells(1, edges))
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Gf2Matrix {
    let rows: Vec<Gf2Vec> =
        (0..rows).map(|_| Gf2Vec::from_bools(&(0..cols).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>())).collect();
    Gf2Matrix::from_rows(rows, cols).unwrap()
}

/// Random sheaf over a random graph whose total cochain dimension
/// `sum of stalk dims over all cells` is at most `max_total`.
pub fn random_sheaf(rng: &mut impl Rng, max_total: usize) -> CellularSheaf {
    loop {
        let n = rng.gen_range(1..=5);
        let base = random_graph(rng, n, 0.5);
        let stalks: BTreeMap<CellId, usize> = base.cells().iter().map(|c| (c.id, rng.gen_range(0..=2))).collect();
        if stalks.values().sum::<usize>() > max_total {
            continue;
        }
        let mut restrictions = BTreeMap::new();
        for &e in base.cells_of_dim(1) {
            for &v in &base.cell(e).unwrap().boundary {
                restrictions.insert((v, e), random_matrix(rng, stalks[&e], stalks[&v]));
            }
        }
        return CellularSheaf::new(base, stalks, restrictions).unwrap();
    }
}
