//! Cellular chain complexes over GF(2).
//!
//! Cells carry explicit boundary lists, so parallel edges, loops and
//! non-simplicial 2-cells (squares, bigons) are all representable. A boundary
//! list is read mod 2: an id listed twice cancels.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;

pub type CellId = usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub dim: usize,
    #[serde(default)]
    pub boundary: Vec<CellId>,
    #[serde(default)]
    pub birth: f64,
}

impl Cell {
    pub fn new(id: CellId, dim: usize, boundary: Vec<CellId>) -> Self {
        Self { id, dim, boundary, birth: 0.0 }
    }

    pub fn vertex(id: CellId) -> Self {
        Self::new(id, 0, Vec::new())
    }

    pub fn born(mut self, birth: f64) -> Self {
        self.birth = birth;
        self
    }
}

/// A GF(2) chain: the set of cells of one dimension carrying coefficient 1.
///
/// The support is kept sorted and duplicate-free, so structural equality is
/// chain equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chain {
    pub dim: usize,
    cells: Vec<CellId>,
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Self { dim, cells: Vec::new() }
    }

    /// Sums the given cells mod 2.
    pub fn from_cells(dim: usize, cells: impl IntoIterator<Item = CellId>) -> Self {
        let mut v: Vec<CellId> = cells.into_iter().collect();
        v.sort_unstable();
        let mut out = Vec::with_capacity(v.len());
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j < v.len() && v[j] == v[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(v[i]);
            }
            i = j;
        }
        Self { dim, cells: out }
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, id: CellId) -> bool {
        self.cells.binary_search(&id).is_ok()
    }

    /// GF(2) sum (symmetric difference of supports).
    pub fn add(&self, other: &Chain) -> Chain {
        assert_eq!(self.dim, other.dim, "adding chains of different dimension");
        let (a, b) = (&self.cells, &other.cells);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Chain { dim: self.dim, cells: out }
    }
}

/// A validated, immutable cellular complex.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainComplex {
    cells: Vec<Cell>,
    position: HashMap<CellId, usize>,
    by_dim: Vec<Vec<CellId>>,
    local: HashMap<CellId, usize>,
}

/// Validates `cells` and builds the complex.
///
/// Boundary lists are normalized mod 2. Fails on the first violated
/// invariant rather than repairing the input.
pub fn build_complex(cells: Vec<Cell>) -> Result<ChainComplex> {
    let mut position = HashMap::with_capacity(cells.len());
    let mut cells = cells;
    cells.sort_by_key(|c| c.id);
    for (i, c) in cells.iter().enumerate() {
        if position.insert(c.id, i).is_some() {
            return Err(Error::DuplicateCell(c.id));
        }
        if !c.birth.is_finite() || c.birth < 0.0 {
            return Err(Error::InvalidBirth { cell: c.id, birth: c.birth });
        }
    }
    for c in &cells {
        for &f in &c.boundary {
            let face = match position.get(&f) {
                Some(&p) => &cells[p],
                None => return Err(Error::DanglingBoundary { cell: c.id, missing: f }),
            };
            if c.dim == 0 || face.dim + 1 != c.dim {
                return Err(Error::DimensionMismatch { cell: c.id, dim: c.dim, face: f, face_dim: face.dim });
            }
            if c.birth < face.birth {
                return Err(Error::FiltrationViolation { cell: c.id, birth: c.birth, face: f, face_birth: face.birth });
            }
        }
    }
    for c in &mut cells {
        c.boundary = Chain::from_cells(c.dim.saturating_sub(1), c.boundary.drain(..)).cells;
    }
    let max_dim = cells.iter().map(|c| c.dim).max();
    let mut by_dim = vec![Vec::new(); max_dim.map_or(0, |d| d + 1)];
    let mut local = HashMap::with_capacity(cells.len());
    for c in &cells {
        local.insert(c.id, by_dim[c.dim].len());
        by_dim[c.dim].push(c.id);
    }
    Ok(ChainComplex { cells, position, by_dim, local })
}

impl ChainComplex {
    pub fn empty() -> Self {
        build_complex(Vec::new()).expect("empty complex is valid")
    }

    /// Highest cell dimension, or `None` for the empty complex.
    pub fn max_dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// All cells in ascending id order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.position.get(&id).map(|&p| &self.cells[p])
    }

    /// Ids of the `dim`-cells in ascending order.
    pub fn cells_of_dim(&self, dim: usize) -> &[CellId] {
        self.by_dim.get(dim).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, dim: usize) -> usize {
        self.cells_of_dim(dim).len()
    }

    pub fn next_id(&self) -> CellId {
        self.cells.last().map_or(0, |c| c.id + 1)
    }

    /// Position of a `dim`-cell among the `dim`-cells.
    pub fn local_index(&self, id: CellId, dim: usize) -> Result<usize> {
        match (self.cell(id), self.local.get(&id)) {
            (Some(c), Some(&i)) if c.dim == dim => Ok(i),
            _ => Err(Error::IndexOutOfRange { cell: id, dim }),
        }
    }

    pub fn to_vec(&self, chain: &Chain) -> Result<Gf2Vec> {
        let mut v = Gf2Vec::zeros(self.count(chain.dim));
        for &id in chain.cells() {
            v.set(self.local_index(id, chain.dim)?, true);
        }
        Ok(v)
    }

    pub fn from_vec(&self, dim: usize, v: &Gf2Vec) -> Chain {
        let ids = self.cells_of_dim(dim);
        Chain { dim, cells: v.iter_ones().map(|i| ids[i]).collect() }
    }

    /// Column of the boundary matrix for a cell, over the `dim-1` cells.
    pub(crate) fn boundary_column(&self, id: CellId) -> Gf2Vec {
        let c = self.cell(id).expect("cell exists");
        let dim = c.dim.saturating_sub(1);
        let mut v = Gf2Vec::zeros(if c.dim == 0 { 0 } else { self.count(dim) });
        for &f in &c.boundary {
            v.flip(self.local[&f]);
        }
        v
    }

    /// Boundary matrix of dimension `dim` as a list of columns.
    pub(crate) fn boundary_columns(&self, dim: usize) -> Vec<Gf2Vec> {
        if dim == 0 {
            return Vec::new();
        }
        self.cells_of_dim(dim).iter().map(|&id| self.boundary_column(id)).collect()
    }

    /// Returns a complex with `extra` cells appended, validated from scratch.
    pub fn with_cells(&self, extra: impl IntoIterator<Item = Cell>) -> Result<ChainComplex> {
        let mut cells = self.cells.clone();
        cells.extend(extra);
        build_complex(cells)
    }

    pub fn to_document(&self) -> ComplexDocument {
        ComplexDocument { version: COMPLEX_FORMAT_VERSION, cells: self.cells.clone() }
    }
}

/// Boundary of a chain: the GF(2) sum of the boundaries of its cells.
///
/// The boundary of a 0-chain is the empty chain.
pub fn boundary(c: &Chain, complex: &ChainComplex) -> Result<Chain> {
    if c.dim == 0 {
        for &id in c.cells() {
            complex.local_index(id, 0)?;
        }
        return Ok(Chain::zero(0));
    }
    let mut faces = Vec::new();
    for &id in c.cells() {
        complex.local_index(id, c.dim)?;
        faces.extend_from_slice(&complex.cell(id).expect("indexed").boundary);
    }
    Ok(Chain::from_cells(c.dim - 1, faces))
}

pub fn is_cycle(c: &Chain, complex: &ChainComplex) -> Result<bool> {
    Ok(boundary(c, complex)?.is_zero())
}

/// True iff the boundary of the boundary of every cell of dimension >= 2 vanishes.
pub fn verify_d2(complex: &ChainComplex) -> bool {
    complex.cells().iter().filter(|c| c.dim >= 2).all(|c| {
        let b = Chain::from_cells(c.dim - 1, c.boundary.iter().copied());
        boundary(&b, complex).map(|bb| bb.is_zero()).unwrap_or(false)
    })
}

/// A complex together with its cells in filtration order `(birth, dim, id)`.
#[derive(Clone, Debug)]
pub struct Filtration {
    complex: ChainComplex,
    order: Vec<CellId>,
}

impl Filtration {
    pub fn new(complex: ChainComplex) -> Self {
        let mut order: Vec<&Cell> = complex.cells().iter().collect();
        order.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.dim.cmp(&b.dim)).then(a.id.cmp(&b.id)));
        let order = order.into_iter().map(|c| c.id).collect();
        Self { complex, order }
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn order(&self) -> &[CellId] {
        &self.order
    }

    /// Distinct birth values in increasing order.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.order.iter().map(|&id| self.complex.cell(id).unwrap().birth).collect();
        v.dedup();
        v
    }

    /// The subcomplex of cells born at or before `t`.
    pub fn prefix_at(&self, t: f64) -> ChainComplex {
        let cells = self.complex.cells().iter().filter(|c| c.birth <= t).cloned().collect();
        build_complex(cells).expect("filtration prefixes of a valid complex are valid")
    }

    /// The subcomplex made of the first `n` cells in filtration order.
    pub fn prefix_len(&self, n: usize) -> Result<ChainComplex> {
        let cells =
            self.order[..n.min(self.order.len())].iter().map(|&id| self.complex.cell(id).unwrap().clone()).collect();
        build_complex(cells)
    }
}

pub const COMPLEX_FORMAT_VERSION: u32 = 1;

/// On-disk form: `{"version":1,"cells":[{"id":..,"dim":..,"boundary":[..],"birth":..}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexDocument {
    pub version: u32,
    pub cells: Vec<Cell>,
}

impl ComplexDocument {
    pub fn into_complex(self) -> Result<ChainComplex> {
        if self.version != COMPLEX_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        build_complex(self.cells)
    }
}

pub fn parse_complex(json: &str) -> Result<ChainComplex> {
    serde_json::from_str::<ComplexDocument>(json)?.into_complex()
}

pub fn complex_to_json(complex: &ChainComplex) -> String {
    serde_json::to_string(&complex.to_document()).expect("complex serializes")
}

/// Cell counts per dimension, keyed by dimension.
pub fn cell_counts(complex: &ChainComplex) -> BTreeMap<usize, usize> {
    (0..complex.max_dim().map_or(0, |d| d + 1)).map(|d| (d, complex.count(d))).collect()
}
