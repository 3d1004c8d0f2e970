//! Betti numbers, cycle/boundary bases, homology coordinates and
//! persistence barcodes over GF(2).

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::complex::{Chain, ChainComplex, Filtration};
use crate::error::{Error, Result};
use crate::gf2::{Echelon, Gf2Vec};

/// Rank of the boundary map out of dimension `dim`.
pub(crate) fn boundary_rank(complex: &ChainComplex, dim: usize) -> usize {
    let mut e = Echelon::new();
    complex.boundary_columns(dim).into_iter().filter(|col| e.insert(col.clone(), Gf2Vec::zeros(0)).is_ok()).count()
}

/// `b_k = dim ker d_k - rank d_{k+1}` for `k = 0..=max_dim`.
///
/// The empty complex has no Betti numbers.
pub fn betti_numbers(complex: &ChainComplex) -> Vec<usize> {
    let Some(max_dim) = complex.max_dim() else {
        return Vec::new();
    };
    let ranks: Vec<usize> = (0..=max_dim + 1).map(|d| boundary_rank(complex, d)).collect();
    (0..=max_dim).map(|k| complex.count(k) - ranks[k] - ranks[k + 1]).collect()
}

/// Bases for `Z_k`, `B_k` and a set of homology representatives in one
/// dimension.
///
/// `z_basis` and `b_basis` are kept in echelon form keyed by lowest cell id;
/// `reps` are the `z_basis` members that extend `b_basis` to a basis of `Z_k`,
/// taken in `z_basis` order.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    pub dim: usize,
    pub z_basis: Vec<Chain>,
    pub b_basis: Vec<Chain>,
    pub reps: Vec<Chain>,
    complex: ChainComplex,
    solver: Echelon,
}

impl Serialize for HomologyBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let ids = |v: &Vec<Chain>| v.iter().map(|c| c.cells().to_vec()).collect::<Vec<_>>();
        let mut st = s.serialize_struct("HomologyBasis", 4)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("z_basis", &ids(&self.z_basis))?;
        st.serialize_field("b_basis", &ids(&self.b_basis))?;
        st.serialize_field("reps", &ids(&self.reps))?;
        st.end()
    }
}

/// The pieces of a cycle `c = sum a_k rep_k + residual` with `residual` in `B_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyCoords {
    pub a: Gf2Vec,
    pub boundary_residual: Chain,
}

pub fn homology_basis(complex: &ChainComplex, k: usize) -> Result<HomologyBasis> {
    let max_dim = complex.max_dim().unwrap_or(0);
    if k > max_dim && !complex.is_empty() {
        return Err(Error::DimensionOutOfRange { dim: k, max_dim });
    }
    let n = complex.count(k);

    // kernel of d_k: every dependent column yields one relation
    let mut cols = Echelon::new();
    let mut kernel = Echelon::new();
    let columns = if k == 0 { vec![Gf2Vec::zeros(0); n] } else { complex.boundary_columns(k) };
    for (j, col) in columns.into_iter().enumerate() {
        if let Err(rel) = cols.insert(col, Gf2Vec::unit(n, j)) {
            kernel.insert(rel, Gf2Vec::zeros(0)).expect("kernel relations from distinct columns are independent");
        }
    }
    let z_vecs: Vec<Gf2Vec> = kernel.vectors().cloned().collect();

    // image of d_{k+1}
    let mut image = Echelon::new();
    for col in complex.boundary_columns(k + 1) {
        let _ = image.insert(col, Gf2Vec::zeros(0));
    }
    let b_vecs: Vec<Gf2Vec> = image.vectors().cloned().collect();

    let m = b_vecs.len();
    let mut extend = Echelon::new();
    for b in &b_vecs {
        extend.insert(b.clone(), Gf2Vec::zeros(0)).expect("image basis is independent");
    }
    let rep_vecs: Vec<Gf2Vec> =
        z_vecs.iter().filter(|z| extend.insert((*z).clone(), Gf2Vec::zeros(0)).is_ok()).cloned().collect();

    let tags = m + rep_vecs.len();
    let mut solver = Echelon::new();
    for (i, v) in b_vecs.iter().chain(&rep_vecs).enumerate() {
        solver.insert(v.clone(), Gf2Vec::unit(tags, i)).expect("B plus reps is a basis of Z");
    }

    let to_chains = |vs: &[Gf2Vec]| vs.iter().map(|v| complex.from_vec(k, v)).collect::<Vec<_>>();
    Ok(HomologyBasis {
        dim: k,
        z_basis: to_chains(&z_vecs),
        b_basis: to_chains(&b_vecs),
        reps: to_chains(&rep_vecs),
        complex: complex.clone(),
        solver,
    })
}

impl HomologyBasis {
    pub fn betti(&self) -> usize {
        self.reps.len()
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    /// Solves `c = sum a_k rep_k + residual` exactly.
    ///
    /// A chain outside `Z_k` is rejected with `NotACycle`; chains that name
    /// cells outside the complex give `IndexOutOfRange`.
    pub fn coordinates(&self, c: &Chain) -> Result<HomologyCoords> {
        if c.dim != self.dim {
            return Err(Error::NotACycle);
        }
        let v = self.complex.to_vec(c)?;
        let m = self.b_basis.len();
        let (rest, tag) = self.solver.reduce(v, Gf2Vec::zeros(m + self.reps.len()));
        if !rest.is_zero() {
            return Err(Error::NotACycle);
        }
        let a = Gf2Vec::from_bools(&(m..m + self.reps.len()).map(|i| tag.get(i)).collect::<Vec<_>>());
        let residual = (0..m).filter(|&i| tag.get(i)).fold(Chain::zero(self.dim), |acc, i| acc.add(&self.b_basis[i]));
        Ok(HomologyCoords { a, boundary_residual: residual })
    }

    /// `sum a_k rep_k` for a coefficient vector over the representatives.
    pub fn combine(&self, a: &Gf2Vec) -> Chain {
        a.iter_ones().fold(Chain::zero(self.dim), |acc, i| acc.add(&self.reps[i]))
    }
}

impl HomologyCoords {
    pub fn reconstruct(&self, basis: &HomologyBasis) -> Chain {
        basis.combine(&self.a).add(&self.boundary_residual)
    }
}

/// True iff `c` is a cycle carrying a nonzero homology class.
pub fn is_nontrivial_cycle(c: &Chain, complex: &ChainComplex) -> Result<bool> {
    let basis = homology_basis(complex, c.dim)?;
    Ok(!basis.coordinates(c)?.a.is_zero())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub birth: f64,
    /// `None` for an essential class.
    pub death: Option<f64>,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && self.death.is_none_or(|d| t < d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Barcode {
    pub dim: usize,
    pub intervals: Vec<Interval>,
}

impl Serialize for Barcode {
    /// `{"dim":k,"intervals":[[b,d],...]}` with `d = null` for infinity.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, Option<f64>)> = self.intervals.iter().map(|i| (i.birth, i.death)).collect();
        let mut st = s.serialize_struct("Barcode", 2)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("intervals", &pairs)?;
        st.end()
    }
}

/// Persistence pairs from the standard column reduction (low = largest row
/// index in filtration order).
struct Reduction {
    /// `killer_of[i] = Some(j)` when column `j` kills the class born at `i`.
    killer_of: Vec<Option<usize>>,
    /// Columns whose reduced boundary is nonzero; they destroy a class.
    negative: Vec<bool>,
}

fn reduce_filtration(f: &Filtration) -> Reduction {
    let order = f.order();
    let n = order.len();
    let pos: std::collections::HashMap<usize, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut low_owner: Vec<Option<usize>> = vec![None; n];
    let mut columns: Vec<Gf2Vec> = Vec::with_capacity(n);
    let mut killer_of = vec![None; n];
    let mut negative = vec![false; n];
    for (j, &id) in order.iter().enumerate() {
        let cell = f.complex().cell(id).unwrap();
        let mut col = Gf2Vec::from_toggles(n, cell.boundary.iter().map(|b| pos[b]));
        while let Some(low) = col.highest_one() {
            match low_owner[low] {
                Some(owner) => col.xor_assign(&columns[owner]),
                None => {
                    low_owner[low] = Some(j);
                    killer_of[low] = Some(j);
                    negative[j] = true;
                    break;
                }
            }
        }
        columns.push(col);
    }
    Reduction { killer_of, negative }
}

/// Barcode in dimension `k`. Zero-length intervals are dropped; intervals
/// are sorted by birth, then death (essential classes last).
pub fn persistence_barcode(f: &Filtration, k: usize) -> Barcode {
    let red = reduce_filtration(f);
    let order = f.order();
    let birth = |i: usize| f.complex().cell(order[i]).unwrap().birth;
    let mut intervals = Vec::new();
    for (i, &id) in order.iter().enumerate() {
        if f.complex().cell(id).unwrap().dim != k || red.negative[i] {
            continue;
        }
        match red.killer_of[i] {
            Some(j) => {
                let (b, d) = (birth(i), birth(j));
                if b < d {
                    intervals.push(Interval { birth: b, death: Some(d) });
                }
            }
            None => intervals.push(Interval { birth: birth(i), death: None }),
        }
    }
    intervals.sort_by(|a, b| {
        a.birth.total_cmp(&b.birth).then_with(|| match (a.death, b.death) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        })
    });
    Barcode { dim: k, intervals }
}

/// True iff `c` is a nontrivial cycle in the prefix complexes at both ends of
/// the band. Once a class dies it stays dead, so the endpoints suffice.
pub fn persists(c: &Chain, f: &Filtration, band: (f64, f64)) -> Result<bool> {
    let (lo, hi) = band;
    if lo > hi {
        return Err(Error::BandEmpty { lo, hi });
    }
    let low = f.prefix_at(lo);
    let basis_lo = homology_basis(&low, c.dim).map_err(|_| Error::NotACycle)?;
    let alive_lo = !basis_lo.coordinates(c)?.a.is_zero();
    if !alive_lo {
        return Ok(false);
    }
    let high = f.prefix_at(hi);
    let basis_hi = homology_basis(&high, c.dim)?;
    Ok(!basis_hi.coordinates(c)?.a.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{boundary, Chain};
    use crate::fixtures::{self, THETA_EDGES, TRIANGLE_EDGES};

    fn ch(cells: &[usize]) -> Chain {
        Chain::from_cells(1, cells.iter().copied())
    }

    #[test]
    fn betti_of_fixtures() {
        assert_eq!(betti_numbers(&fixtures::hollow_triangle()), vec![1, 1]);
        assert_eq!(betti_numbers(&fixtures::filled_triangle()), vec![1, 0, 0]);
        assert_eq!(betti_numbers(&fixtures::sphere()), vec![1, 0, 1]);
        assert_eq!(betti_numbers(&fixtures::torus(2)), vec![1, 2, 1]);
        assert_eq!(betti_numbers(&fixtures::torus(3)), vec![1, 2, 1]);
        assert_eq!(betti_numbers(&fixtures::klein_bottle(3)), vec![1, 2, 1]);
        assert_eq!(betti_numbers(&fixtures::theta()), vec![1, 2]);
        assert!(betti_numbers(&crate::complex::ChainComplex::empty()).is_empty());
    }

    #[test]
    fn theta_bases() {
        let [a, b, c] = THETA_EDGES;
        let basis = homology_basis(&fixtures::theta(), 1).unwrap();
        assert_eq!(basis.z_basis, vec![ch(&[a, b]), ch(&[b, c])]);
        assert!(basis.b_basis.is_empty());
        assert_eq!(basis.reps, basis.z_basis);
        let coords = basis.coordinates(&ch(&[a, c])).unwrap();
        assert_eq!(coords.a, Gf2Vec::from_bools(&[true, true]));
        assert!(coords.boundary_residual.is_zero());
    }

    #[test]
    fn theta_with_face_coordinates() {
        let [a, b, c] = THETA_EDGES;
        let k = fixtures::theta_with_face();
        let basis = homology_basis(&k, 1).unwrap();
        assert_eq!(basis.b_basis, vec![ch(&[a, b])]);
        assert_eq!(basis.reps, vec![ch(&[b, c])]);
        let coords = basis.coordinates(&ch(&[a, c])).unwrap();
        assert_eq!(coords.a, Gf2Vec::from_bools(&[true]));
        assert_eq!(coords.boundary_residual, ch(&[a, b]));
        assert_eq!(coords.reconstruct(&basis), ch(&[a, c]));

        assert!(!is_nontrivial_cycle(&ch(&[a, b]), &k).unwrap());
        assert!(is_nontrivial_cycle(&ch(&[b, c]), &k).unwrap());
    }

    #[test]
    fn filled_triangle_has_no_reps() {
        let basis = homology_basis(&fixtures::filled_triangle(), 1).unwrap();
        let loop_ = ch(&TRIANGLE_EDGES);
        assert_eq!(basis.z_basis, vec![loop_.clone()]);
        assert_eq!(basis.b_basis, vec![loop_.clone()]);
        assert!(basis.reps.is_empty());
        assert!(!is_nontrivial_cycle(&loop_, &fixtures::filled_triangle()).unwrap());
        assert!(is_nontrivial_cycle(&loop_, &fixtures::hollow_triangle()).unwrap());
    }

    #[test]
    fn torus_reps_are_independent_cycles() {
        let k = fixtures::torus(2);
        let basis = homology_basis(&k, 1).unwrap();
        assert_eq!(basis.reps.len(), 2);
        for r in &basis.reps {
            assert!(boundary(r, &k).unwrap().is_zero());
            assert!(!basis.coordinates(r).unwrap().a.is_zero());
        }
        let sum = basis.reps[0].add(&basis.reps[1]);
        assert!(!basis.coordinates(&sum).unwrap().a.is_zero());
        assert_eq!(basis.z_basis.len() - basis.b_basis.len(), basis.reps.len());
    }

    #[test]
    fn coordinates_reject_open_chains() {
        let basis = homology_basis(&fixtures::hollow_triangle(), 1).unwrap();
        assert_eq!(basis.coordinates(&ch(&[TRIANGLE_EDGES[0]])), Err(Error::NotACycle));
    }

    #[test]
    fn boundaries_have_zero_class() {
        let k = fixtures::torus(2);
        let basis = homology_basis(&k, 1).unwrap();
        for &f in k.cells_of_dim(2) {
            let b = boundary(&Chain::from_cells(2, [f]), &k).unwrap();
            let coords = basis.coordinates(&b).unwrap();
            assert!(coords.a.is_zero());
            assert_eq!(coords.boundary_residual, b);
        }
    }

    #[test]
    fn triangle_barcodes() {
        let f = Filtration::new(fixtures::triangle_filtration());
        let b1 = persistence_barcode(&f, 1);
        assert_eq!(b1.intervals, vec![Interval { birth: 1.0, death: Some(2.0) }]);
        let b0 = persistence_barcode(&f, 0);
        assert_eq!(
            b0.intervals,
            vec![
                Interval { birth: 0.0, death: Some(1.0) },
                Interval { birth: 0.0, death: Some(1.0) },
                Interval { birth: 0.0, death: None },
            ]
        );
        assert_eq!(serde_json::to_string(&b1).unwrap(), r#"{"dim":1,"intervals":[[1.0,2.0]]}"#);
    }

    #[test]
    fn no_higher_cells_means_essential() {
        let f = Filtration::new(fixtures::theta());
        let b1 = persistence_barcode(&f, 1);
        assert_eq!(b1.intervals.len(), 2);
        assert!(b1.intervals.iter().all(|i| i.death.is_none()));
    }

    #[test]
    fn persistence_band() {
        let f = Filtration::new(fixtures::triangle_filtration());
        let loop_ = ch(&TRIANGLE_EDGES);
        assert!(persists(&loop_, &f, (1.0, 1.5)).unwrap());
        assert!(!persists(&loop_, &f, (1.0, 2.0)).unwrap());
        assert!(persists(&loop_, &f, (1.0, 1.0)).unwrap());
        assert!(!persists(&loop_, &f, (2.0, 2.0)).unwrap());
        assert!(matches!(persists(&loop_, &f, (2.0, 1.0)), Err(Error::BandEmpty { .. })));
        assert!(persists(&ch(&[TRIANGLE_EDGES[0]]), &f, (1.0, 1.0)).is_err());
    }
}
