//! Even/odd split of the Betti numbers and the quantities derived from it.

use serde::Serialize;

use crate::complex::ChainComplex;
use crate::homology::betti_numbers;

/// `dim_phi` sums the even Betti numbers (scaffold), `dim_psi` the odd ones
/// (flow).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityProfile {
    pub betti: Vec<usize>,
    pub dim_phi: usize,
    pub dim_psi: usize,
    pub chi: i64,
    pub capacity: usize,
    pub phi_topo: usize,
}

impl ParityProfile {
    pub fn from_betti(betti: Vec<usize>) -> Self {
        let dim_phi: usize = betti.iter().step_by(2).sum();
        let dim_psi: usize = betti.iter().skip(1).step_by(2).sum();
        let chi = dim_phi as i64 - dim_psi as i64;
        let capacity = dim_phi + dim_psi;
        let phi_topo = capacity - chi.unsigned_abs() as usize;
        Self { betti, dim_phi, dim_psi, chi, capacity, phi_topo }
    }
}

pub fn parity_profile(complex: &ChainComplex) -> ParityProfile {
    ParityProfile::from_betti(betti_numbers(complex))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EulerMethod {
    /// Alternating sum of cell counts.
    Cells,
    /// Alternating sum of Betti numbers.
    Betti,
}

pub fn euler_characteristic(complex: &ChainComplex, method: EulerMethod) -> i64 {
    let alternating = |xs: &mut dyn Iterator<Item = usize>| {
        xs.enumerate().map(|(k, x)| if k % 2 == 0 { x as i64 } else { -(x as i64) }).sum()
    };
    match method {
        EulerMethod::Cells => {
            let top = complex.max_dim().map_or(0, |d| d + 1);
            alternating(&mut (0..top).map(|k| complex.count(k)))
        }
        EulerMethod::Betti => alternating(&mut betti_numbers(complex).into_iter()),
    }
}
