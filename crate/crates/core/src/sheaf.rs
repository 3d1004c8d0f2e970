//! Cellular sheaves of GF(2) vector spaces over graphs.
//!
//! Coboundary on an edge `e = (u, v)` is `R(u,e) x_u + R(v,e) x_v`; over GF(2)
//! there is no orientation sign to track.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{build_complex, Cell, CellId, Chain, ChainComplex, ComplexDocument, Filtration};
use crate::error::{Error, Result};
use crate::gf2::{Gf2Matrix, Gf2Vec};
use crate::homology::persists;

/// Vertex id to stalk vector.
pub type Assignment = BTreeMap<CellId, Gf2Vec>;

#[derive(Clone, Debug)]
pub struct CellularSheaf {
    base: ChainComplex,
    stalks: BTreeMap<CellId, usize>,
    restrictions: BTreeMap<(CellId, CellId), Gf2Matrix>,
}

impl CellularSheaf {
    /// Validates a sheaf: the base must be a graph whose edges have two
    /// distinct endpoints, every cell needs a stalk, and every incidence a
    /// restriction of shape `stalk(edge) x stalk(vertex)`.
    pub fn new(
        base: ChainComplex,
        stalks: BTreeMap<CellId, usize>,
        restrictions: BTreeMap<(CellId, CellId), Gf2Matrix>,
    ) -> Result<Self> {
        if base.max_dim().unwrap_or(0) > 1 {
            return Err(Error::InvalidBase("sheaf base must be a graph (dim <= 1)".into()));
        }
        for c in base.cells() {
            if !stalks.contains_key(&c.id) {
                return Err(Error::ShapeMismatch(format!("cell {} has no stalk", c.id)));
            }
        }
        if let Some(id) = stalks.keys().find(|id| base.cell(**id).is_none()) {
            return Err(Error::InvalidBase(format!("stalk given for unknown cell {id}")));
        }
        for &e in base.cells_of_dim(1) {
            let ends = &base.cell(e).unwrap().boundary;
            if ends.len() != 2 {
                return Err(Error::InvalidBase(format!("edge {e} does not join two distinct vertices")));
            }
            for &v in ends {
                let m = restrictions.get(&(v, e)).ok_or(Error::MissingRestriction { vertex: v, edge: e })?;
                if m.nrows() != stalks[&e] || m.ncols() != stalks[&v] {
                    return Err(Error::ShapeMismatch(format!(
                        "restriction ({v}, {e}) is {}x{}, expected {}x{}",
                        m.nrows(),
                        m.ncols(),
                        stalks[&e],
                        stalks[&v]
                    )));
                }
            }
        }
        for &(v, e) in restrictions.keys() {
            let incident = base.cell(e).is_some_and(|c| c.dim == 1 && c.boundary.contains(&v));
            if !incident {
                return Err(Error::InvalidBase(format!("restriction ({v}, {e}) is not an incidence")));
            }
        }
        Ok(Self { base, stalks, restrictions })
    }

    /// The sheaf with stalk `GF(2)^rank` everywhere and identity restrictions.
    pub fn constant(base: ChainComplex, rank: usize) -> Result<Self> {
        let stalks = base.cells().iter().map(|c| (c.id, rank)).collect();
        let mut restrictions = BTreeMap::new();
        for &e in base.cells_of_dim(1) {
            for &v in &base.cell(e).unwrap().boundary {
                restrictions.insert((v, e), Gf2Matrix::identity(rank));
            }
        }
        Self::new(base, stalks, restrictions)
    }

    pub fn base(&self) -> &ChainComplex {
        &self.base
    }

    pub fn stalk_dim(&self, id: CellId) -> usize {
        self.stalks.get(&id).copied().unwrap_or(0)
    }

    pub fn restriction(&self, vertex: CellId, edge: CellId) -> Option<&Gf2Matrix> {
        self.restrictions.get(&(vertex, edge))
    }

    fn endpoints(&self, e: CellId) -> (CellId, CellId) {
        let b = &self.base.cell(e).unwrap().boundary;
        (b[0], b[1])
    }

    /// Total dimension of the 0-cochains and 1-cochains.
    pub fn cochain_dims(&self) -> (usize, usize) {
        let sum = |d: usize| self.base.cells_of_dim(d).iter().map(|&c| self.stalk_dim(c)).sum();
        (sum(0), sum(1))
    }

    /// Value of `delta x` on a single edge.
    fn edge_value(&self, e: CellId, x: &Assignment) -> Result<Gf2Vec> {
        let (u, v) = self.endpoints(e);
        let mut out = Gf2Vec::zeros(self.stalk_dim(e));
        for w in [u, v] {
            let xw = x.get(&w).ok_or(Error::MissingAssignment(w))?;
            let r = self.restrictions.get(&(w, e)).ok_or(Error::MissingRestriction { vertex: w, edge: e })?;
            if xw.len() != r.ncols() {
                return Err(Error::ShapeMismatch(format!("value at vertex {w} has length {}", xw.len())));
            }
            out.xor_assign(&r.mul_vec(xw));
        }
        Ok(out)
    }

    /// The coboundary matrix: rows are edge-stalk coordinates, columns are
    /// vertex-stalk coordinates, both in ascending cell id order.
    pub fn coboundary_matrix(&self) -> Gf2Matrix {
        let (c0, c1) = self.cochain_dims();
        let mut offset = BTreeMap::new();
        let mut acc = 0;
        for &v in self.base.cells_of_dim(0) {
            offset.insert(v, acc);
            acc += self.stalk_dim(v);
        }
        let mut m = Gf2Matrix::zeros(c1, c0);
        let mut row = 0;
        for &e in self.base.cells_of_dim(1) {
            let (u, v) = self.endpoints(e);
            for w in [u, v] {
                let r = &self.restrictions[&(w, e)];
                for i in 0..r.nrows() {
                    for j in 0..r.ncols() {
                        if r.get(i, j) {
                            let (rr, cc) = (row + i, offset[&w] + j);
                            let cur = m.get(rr, cc);
                            m.set(rr, cc, !cur);
                        }
                    }
                }
            }
            row += self.stalk_dim(e);
        }
        m
    }
}

pub fn coboundary(sheaf: &CellularSheaf, x: &Assignment) -> Result<BTreeMap<CellId, Gf2Vec>> {
    for &v in sheaf.base.cells_of_dim(0) {
        if !x.contains_key(&v) {
            return Err(Error::MissingAssignment(v));
        }
    }
    sheaf.base.cells_of_dim(1).iter().map(|&e| Ok((e, sheaf.edge_value(e, x)?))).collect()
}

/// `(h0, h1) = (dim ker delta, dim C^1 - rank delta)`.
pub fn sheaf_cohomology(sheaf: &CellularSheaf) -> (usize, usize) {
    let (c0, c1) = sheaf.cochain_dims();
    let rank = sheaf.coboundary_matrix().rank();
    (c0 - rank, c1 - rank)
}

/// Values on a set of vertices; the domain is exactly the set of keys.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocalSection {
    pub values: Assignment,
}

impl LocalSection {
    pub fn new(values: Assignment) -> Self {
        Self { values }
    }

    pub fn domain(&self) -> BTreeSet<CellId> {
        self.values.keys().copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingResult {
    pub gluable: bool,
    pub global_section: Option<Assignment>,
    /// Independent disagreement components of the whole family: one per
    /// vertex where sections conflict plus one per violated edge. Zero iff
    /// the family glues.
    pub obstruction_dim: usize,
    /// Indices of the gluable subfamily left after greedy removal.
    pub kept: Vec<usize>,
}

struct Disagreement {
    assignment: Assignment,
    conflicts: Vec<CellId>,
    violated: Vec<CellId>,
}

fn disagreement(sheaf: &CellularSheaf, locals: &[LocalSection], family: &[usize]) -> Disagreement {
    let mut assignment = Assignment::new();
    let mut conflicts = BTreeSet::new();
    for &i in family {
        for (v, x) in &locals[i].values {
            match assignment.get(v) {
                Some(prev) if prev != x => {
                    conflicts.insert(*v);
                }
                Some(_) => {}
                None => {
                    assignment.insert(*v, x.clone());
                }
            }
        }
    }
    let violated = sheaf
        .base
        .cells_of_dim(1)
        .iter()
        .copied()
        .filter(|&e| {
            let (u, v) = sheaf.endpoints(e);
            // an edge at a conflicting vertex is already accounted for
            assignment.contains_key(&u)
                && assignment.contains_key(&v)
                && !conflicts.contains(&u)
                && !conflicts.contains(&v)
                && sheaf.edge_value(e, &assignment).is_ok_and(|d| !d.is_zero())
        })
        .collect();
    Disagreement { assignment, conflicts: conflicts.into_iter().collect(), violated }
}

/// Glues local sections into a global one when they agree on overlaps and
/// the induced assignment has zero coboundary.
///
/// When they do not glue, sections are removed one at a time, always the one
/// touching the most conflicts and violated edges (lowest index on ties),
/// until the remainder is compatible. This is a greedy approximation of the
/// maximal gluable subfamily.
pub fn glue_sections(sheaf: &CellularSheaf, locals: &[LocalSection]) -> Result<GluingResult> {
    for s in locals {
        for (v, x) in &s.values {
            match sheaf.base.cell(*v) {
                Some(c) if c.dim == 0 => {}
                _ => return Err(Error::UnknownVertex(*v)),
            }
            if x.len() != sheaf.stalk_dim(*v) {
                return Err(Error::ShapeMismatch(format!("section value at vertex {v} has length {}", x.len())));
            }
        }
    }
    let covered: BTreeSet<CellId> = locals.iter().flat_map(|s| s.values.keys().copied()).collect();
    if let Some(&v) = sheaf.base.cells_of_dim(0).iter().find(|v| !covered.contains(v)) {
        return Err(Error::CoverageGap(v));
    }

    let all: Vec<usize> = (0..locals.len()).collect();
    let full = disagreement(sheaf, locals, &all);
    let obstruction_dim = full.conflicts.len() + full.violated.len();
    if obstruction_dim == 0 {
        return Ok(GluingResult {
            gluable: true,
            global_section: Some(full.assignment),
            obstruction_dim: 0,
            kept: all,
        });
    }

    let mut kept = all;
    loop {
        let d = disagreement(sheaf, locals, &kept);
        if d.conflicts.is_empty() && d.violated.is_empty() {
            break;
        }
        let score = |i: usize| {
            let dom = &locals[i].values;
            let edges = d
                .violated
                .iter()
                .filter(|&&e| {
                    let (u, v) = sheaf.endpoints(e);
                    dom.contains_key(&u) || dom.contains_key(&v)
                })
                .count();
            edges + d.conflicts.iter().filter(|v| dom.contains_key(v)).count()
        };
        let (pos, _) = kept
            .iter()
            .enumerate()
            .fold((0, 0), |best, (pos, &i)| if score(i) > best.1 { (pos, score(i)) } else { best });
        kept.remove(pos);
    }
    Ok(GluingResult { gluable: false, global_section: None, obstruction_dim, kept })
}

/// Lowest-id edge joining `u` and `v` in `complex`.
fn edge_between(complex: &ChainComplex, u: CellId, v: CellId) -> Option<CellId> {
    complex.cells_of_dim(1).iter().copied().find(|&e| {
        let b = &complex.cell(e).unwrap().boundary;
        b.len() == 2 && ((b[0] == u && b[1] == v) || (b[0] == v && b[1] == u))
    })
}

/// Recurrence check on a vertex trajectory. Consecutive vertices are joined
/// by their lowest-id edge in the prefix complex at the band's lower end.
pub fn content_recurrence(trajectory: &[CellId], filtration: &Filtration, band: (f64, f64)) -> Result<bool> {
    if band.0 > band.1 {
        return Err(Error::BandEmpty { lo: band.0, hi: band.1 });
    }
    let prefix = filtration.prefix_at(band.0);
    let mut edges = Vec::with_capacity(trajectory.len());
    for w in trajectory.windows(2) {
        for &v in w {
            if prefix.local_index(v, 0).is_err() {
                return Err(Error::UnknownVertex(v));
            }
        }
        edges.push(edge_between(&prefix, w[0], w[1]).ok_or(Error::NotAdjacent(w[0], w[1]))?);
    }
    content_recurrence_walk(trajectory, &edges, filtration, band)
}

/// Recurrence check on an explicit walk (`edges[i]` joins `vertices[i]` and
/// `vertices[i+1]`). The walk is cut at the first return to its start; the
/// loop's edge chain must then persist across the band.
pub fn content_recurrence_walk(
    vertices: &[CellId],
    edges: &[CellId],
    filtration: &Filtration,
    band: (f64, f64),
) -> Result<bool> {
    if band.0 > band.1 {
        return Err(Error::BandEmpty { lo: band.0, hi: band.1 });
    }
    if vertices.len() != edges.len() + 1 {
        return Err(Error::ShapeMismatch("a walk needs one more vertex than edges".into()));
    }
    let prefix = filtration.prefix_at(band.0);
    for (i, &e) in edges.iter().enumerate() {
        let (u, v) = (vertices[i], vertices[i + 1]);
        let ok = prefix.cell(e).is_some_and(|c| {
            c.dim == 1 && {
                let b = &c.boundary;
                (b.len() == 2 && ((b[0] == u && b[1] == v) || (b[0] == v && b[1] == u))) || (b.is_empty() && u == v)
            }
        });
        if !ok {
            return Err(Error::NotAdjacent(u, v));
        }
    }
    let start = *vertices.first().ok_or(Error::NotClosed)?;
    let ret = vertices.iter().skip(1).position(|&v| v == start).ok_or(Error::NotClosed)? + 1;
    let chain = Chain::from_cells(1, edges[..ret].iter().copied());
    persists(&chain, filtration, band)
}

/// Conjunction of context gluing and content recurrence.
pub fn admissible(
    trajectory: &[CellId],
    sheaf: &CellularSheaf,
    locals: &[LocalSection],
    filtration: &Filtration,
    band: (f64, f64),
) -> Result<bool> {
    let glued = glue_sections(sheaf, locals)?.gluable;
    let recurrent = content_recurrence(trajectory, filtration, band)?;
    Ok(glued && recurrent)
}

pub fn effective_edges(psi_edges: &BTreeSet<CellId>, phi_edges: &BTreeSet<CellId>) -> BTreeSet<CellId> {
    psi_edges.intersection(phi_edges).copied().collect()
}

/// `{"stalks":{"id":dim},"restrictions":[{"vertex":v,"edge":e,"matrix":[[bits]]}]}`
/// with an optional `"base"` complex document. Without a base, the graph is
/// read off the restrictions: every edge must be listed with two vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SheafDocument {
    pub stalks: BTreeMap<String, usize>,
    pub restrictions: Vec<RestrictionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ComplexDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictionEntry {
    pub vertex: CellId,
    pub edge: CellId,
    pub matrix: Vec<Vec<u8>>,
}

fn parse_id(s: &str) -> Result<CellId> {
    s.parse().map_err(|_| Error::Parse(format!("stalk key {s:?} is not a cell id")))
}

impl SheafDocument {
    pub fn into_sheaf(self) -> Result<CellularSheaf> {
        let stalks: BTreeMap<CellId, usize> =
            self.stalks.iter().map(|(k, &d)| Ok((parse_id(k)?, d))).collect::<Result<_>>()?;
        let mut restrictions = BTreeMap::new();
        for r in &self.restrictions {
            let cols = stalks.get(&r.vertex).copied().unwrap_or(0);
            let rows = r
                .matrix
                .iter()
                .map(|row| {
                    if row.iter().any(|&b| b > 1) {
                        return Err(Error::Parse("restriction entries must be 0 or 1".into()));
                    }
                    Ok(Gf2Vec::from_bools(&row.iter().map(|&b| b == 1).collect::<Vec<_>>()))
                })
                .collect::<Result<Vec<_>>>()?;
            let m = Gf2Matrix::from_rows(rows, cols).ok_or_else(|| {
                Error::ShapeMismatch(format!("restriction ({}, {}) rows must have {cols} entries", r.vertex, r.edge))
            })?;
            if restrictions.insert((r.vertex, r.edge), m).is_some() {
                return Err(Error::Parse(format!("restriction ({}, {}) listed twice", r.vertex, r.edge)));
            }
        }
        let base = match self.base {
            Some(doc) => doc.into_complex()?,
            None => infer_base(&stalks, &self.restrictions)?,
        };
        CellularSheaf::new(base, stalks, restrictions)
    }
}

fn infer_base(stalks: &BTreeMap<CellId, usize>, restrictions: &[RestrictionEntry]) -> Result<ChainComplex> {
    let mut edges: BTreeMap<CellId, Vec<CellId>> = BTreeMap::new();
    for r in restrictions {
        edges.entry(r.edge).or_default().push(r.vertex);
    }
    let mut cells: Vec<Cell> = stalks.keys().filter(|id| !edges.contains_key(id)).map(|&id| Cell::vertex(id)).collect();
    for (e, vs) in edges {
        if vs.len() != 2 {
            return Err(Error::InvalidBase(format!("edge {e} must be listed with exactly two vertices")));
        }
        cells.push(Cell::new(e, 1, vs));
    }
    build_complex(cells)
}

pub fn parse_sheaf(json: &str) -> Result<CellularSheaf> {
    serde_json::from_str::<SheafDocument>(json)?.into_sheaf()
}

pub fn parse_sections(json: &str) -> Result<Vec<LocalSection>> {
    Ok(serde_json::from_str(json)?)
}
