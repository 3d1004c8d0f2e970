//! Memory traces as 1-cycles: backbone, contextual loops and boundary noise.
//!
//! A closed trace `c` is split against a deterministic homology basis as
//! `c = sigma + sum a_k rep_k + noise`, where `sigma` is the part of the class
//! shared by every trace in a bundle, `a` the trace-specific remainder and
//! `noise` a boundary. Consolidation drops the noise; semanticization
//! contracts a validated cycle to a single vertex of a new complex.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::complex::{build_complex, is_cycle, Cell, CellId, Chain, ChainComplex};
use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;
use crate::homology::{homology_basis, HomologyBasis};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryTrace {
    pub raw: Chain,
    pub sigma_coeffs: Gf2Vec,
    pub a_coeffs: Gf2Vec,
    pub noise: Chain,
}

impl MemoryTrace {
    /// Full class vector `sigma | a`.
    pub fn class(&self) -> Gf2Vec {
        let mut v = self.sigma_coeffs.clone();
        v.xor_assign(&self.a_coeffs);
        v
    }

    pub fn sigma_part(&self, basis: &HomologyBasis) -> Chain {
        basis.combine(&self.sigma_coeffs)
    }

    pub fn a_part(&self, basis: &HomologyBasis) -> Chain {
        basis.combine(&self.a_coeffs)
    }

    pub fn reconstruct(&self, basis: &HomologyBasis) -> Chain {
        self.sigma_part(basis).add(&self.a_part(basis)).add(&self.noise)
    }
}

#[derive(Clone, Debug)]
pub struct TraceBundle {
    pub traces: Vec<Chain>,
    pub basis: HomologyBasis,
    pub backbone: Gf2Vec,
}

impl Serialize for TraceBundle {
    /// `{"traces":[[ids],...],"backbone":[bits]}`.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let traces: Vec<&[CellId]> = self.traces.iter().map(|t| t.cells()).collect();
        let mut st = s.serialize_struct("TraceBundle", 2)?;
        st.serialize_field("traces", &traces)?;
        st.serialize_field("backbone", &self.backbone)?;
        st.end()
    }
}

/// A trace with its noise term removed: `ltm = sum class_k rep_k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, serde::Deserialize)]
pub struct ConsolidatedTrace {
    pub ltm: Chain,
    pub class: Gf2Vec,
}

/// Backbone of a bundle: the componentwise AND of the members' class vectors.
pub fn extract_backbone(traces: Vec<Chain>, basis: &HomologyBasis) -> Result<TraceBundle> {
    let mut classes = traces.iter().map(|t| basis.coordinates(t).map(|c| c.a));
    let first = classes.next().ok_or(Error::EmptyBundle)??;
    let backbone = classes.try_fold(first, |acc, a| a.map(|a| acc.and(&a)))?;
    Ok(TraceBundle { traces, basis: basis.clone(), backbone })
}

pub fn decompose_trace(c: &Chain, bundle: &TraceBundle) -> Result<MemoryTrace> {
    let coords = bundle.basis.coordinates(c)?;
    Ok(MemoryTrace {
        raw: c.clone(),
        sigma_coeffs: coords.a.and(&bundle.backbone),
        a_coeffs: coords.a.and_not(&bundle.backbone),
        noise: coords.boundary_residual,
    })
}

pub fn consolidate(t: &MemoryTrace, basis: &HomologyBasis) -> ConsolidatedTrace {
    let class = t.class();
    ConsolidatedTrace { ltm: basis.combine(&class), class }
}

/// Contracts the support of a nontrivial 1-cycle to one new vertex.
///
/// Every edge with both endpoints in the support is deleted (cycle edges,
/// chords, and the self-loops the contraction would create); edges with one
/// endpoint inside are re-attached to the new vertex. Higher cells keep their
/// remaining faces, which is the cellular quotient by the contracted
/// subgraph. The new vertex takes the next free id and the earliest birth of
/// the vertices it replaces.
pub fn semanticize(complex: &ChainComplex, cycle: &Chain) -> Result<ChainComplex> {
    if cycle.dim != 1 || !is_cycle(cycle, complex)? {
        return Err(Error::NotACycle);
    }
    let basis = homology_basis(complex, 1)?;
    if basis.coordinates(cycle)?.a.is_zero() {
        return Err(Error::TrivialCycle);
    }

    let support: BTreeSet<CellId> =
        cycle.cells().iter().flat_map(|&e| complex.cell(e).unwrap().boundary.iter().copied()).collect();
    let index: BTreeMap<CellId, usize> = support.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut uf = UnionFind::<usize>::new(support.len());
    for &e in cycle.cells() {
        if let [u, v] = complex.cell(e).unwrap().boundary[..] {
            uf.union(index[&u], index[&v]);
        }
    }
    let root = uf.find(0);
    if (0..support.len()).any(|i| uf.find(i) != root) {
        return Err(Error::DisconnectedSupport);
    }

    let hub = complex.next_id();
    let hub_birth = support.iter().map(|&v| complex.cell(v).unwrap().birth).fold(f64::INFINITY, f64::min);
    let mut removed: BTreeSet<CellId> = support.clone();
    let mut cells = Vec::with_capacity(complex.len());
    for c in complex.cells() {
        match c.dim {
            0 if support.contains(&c.id) => {}
            1 => {
                let inside = c.boundary.iter().filter(|v| support.contains(v)).count();
                if inside == 2 {
                    removed.insert(c.id);
                } else {
                    let boundary = c.boundary.iter().map(|&v| if support.contains(&v) { hub } else { v }).collect();
                    cells.push(Cell { boundary, ..c.clone() });
                }
            }
            _ => {
                let boundary = c.boundary.iter().copied().filter(|f| !removed.contains(f)).collect();
                cells.push(Cell { boundary, ..c.clone() });
            }
        }
    }
    cells.push(Cell::vertex(hub).born(hub_birth));
    build_complex(cells)
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, total: f64) -> f64 {
    counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * (1.0 / p).log2()
        })
        .sum()
}

/// Plug-in `H(X | Y)` in bits over the empirical pairs `(x, y)`.
pub fn conditional_entropy<X: Ord, Y: Ord>(pairs: &[(X, Y)]) -> f64 {
    let mut groups: BTreeMap<&Y, BTreeMap<&X, usize>> = BTreeMap::new();
    for (x, y) in pairs {
        *groups.entry(y).or_default().entry(x).or_default() += 1;
    }
    let total = pairs.len() as f64;
    groups
        .values()
        .map(|xs| {
            let n: usize = xs.values().sum();
            (n as f64 / total) * entropy_of_counts(xs.values(), n as f64)
        })
        .sum()
}

/// `U = H(psi | phi) + H(phi | psi)` in bits over `(psi, phi)` pairs.
pub fn joint_uncertainty<P: Ord, F: Ord>(pairs: &[(P, F)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyStore);
    }
    let flipped: Vec<(&F, &P)> = pairs.iter().map(|(p, f)| (f, p)).collect();
    Ok(conditional_entropy(pairs) + conditional_entropy(&flipped))
}
