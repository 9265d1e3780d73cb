//! Static two-body spin Hamiltonians
//! `H = 1/2 sum_{j != j'} [J1 XX + J2 YY + J3 ZZ]` over a coupling graph, and the
//! sublattice sign-flip gauge transformation.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::pauli::{Axis, PauliString, SpinOperator};

/// Dimensionless pair couplings `V_{jj'}` (symmetric, zero diagonal).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingGraph {
    n_sites: usize,
    couplings: Vec<f64>,
}

impl CouplingGraph {
    /// Unit-spaced chain with `V = |j - j'|^-power`.
    pub fn chain(n_sites: usize, power: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(FloquetError::InvalidGraph(
                "a chain needs at least one site".into(),
            ));
        }
        let mut couplings = vec![0.0; n_sites * n_sites];
        for j in 0..n_sites {
            for k in 0..n_sites {
                if j != k {
                    couplings[j * n_sites + k] = (j.abs_diff(k) as f64).powf(-power);
                }
            }
        }
        Ok(Self { n_sites, couplings })
    }

    pub fn nearest_neighbor(n_sites: usize) -> Result<Self> {
        let mut m = vec![vec![0.0; n_sites]; n_sites];
        for j in 1..n_sites {
            m[j - 1][j] = 1.0;
            m[j][j - 1] = 1.0;
        }
        Self::explicit(m)
    }

    pub fn explicit(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n_sites = matrix.len();
        if n_sites == 0 {
            return Err(FloquetError::InvalidGraph("empty coupling matrix".into()));
        }
        let mut couplings = Vec::with_capacity(n_sites * n_sites);
        for (j, row) in matrix.iter().enumerate() {
            if row.len() != n_sites {
                return Err(FloquetError::InvalidGraph(format!(
                    "row {j} has {} entries, expected {n_sites}",
                    row.len()
                )));
            }
            couplings.extend_from_slice(row);
        }
        let graph = Self { n_sites, couplings };
        for j in 0..n_sites {
            if graph.coupling(j, j) != 0.0 {
                return Err(FloquetError::InvalidGraph(format!(
                    "self-coupling on site {j}"
                )));
            }
            for k in 0..j {
                if graph.coupling(j, k) != graph.coupling(k, j) {
                    return Err(FloquetError::InvalidGraph(format!(
                        "coupling ({j},{k}) is not symmetric"
                    )));
                }
                if !graph.coupling(j, k).is_finite() {
                    return Err(FloquetError::InvalidGraph(format!(
                        "coupling ({j},{k}) is not finite"
                    )));
                }
            }
        }
        Ok(graph)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.couplings[j * self.n_sites + k]
    }

    /// Unordered pairs `j < k` with nonzero coupling.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_sites).flat_map(move |j| {
            ((j + 1)..self.n_sites).filter_map(move |k| {
                let v = self.coupling(j, k);
                (v != 0.0).then_some((j, k, v))
            })
        })
    }
}

/// Dipolar chain, `V_{jj'} = |j - j'|^-3`.
pub fn dipolar_couplings(n_sites: usize) -> Result<CouplingGraph> {
    if n_sites < 2 {
        return Err(FloquetError::InvalidGraph(format!(
            "dipolar chain needs at least 2 sites, got {n_sites}"
        )));
    }
    CouplingGraph::chain(n_sites, 3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Couplings {
    /// `J^a_{jj'} = scale_a * V_{jj'}`.
    Scaled([f64; 3]),
    /// Full per-axis matrices, row-major.
    Matrices([Vec<f64>; 3]),
}

/// XXZ parameters of a model with `J1 = J2 = j_perp V` and `J3 = j_z V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XxzParameters {
    pub j_perp: f64,
    pub j_z: f64,
}

impl XxzParameters {
    /// Anisotropy ratio `s = j_z / j_perp`.
    pub fn anisotropy(&self) -> f64 {
        self.j_z / self.j_perp
    }

    pub fn delta_j(&self) -> f64 {
        self.j_z - self.j_perp
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinModel {
    graph: CouplingGraph,
    couplings: Couplings,
}

impl SpinModel {
    pub fn xxz(graph: CouplingGraph, j_perp: f64, j_z: f64) -> Self {
        Self::from_axis_scales(graph, [j_perp, j_perp, j_z])
    }

    pub fn xy(graph: CouplingGraph, j_perp: f64) -> Self {
        Self::xxz(graph, j_perp, 0.0)
    }

    pub fn ising(graph: CouplingGraph, j_z: f64) -> Self {
        Self::xxz(graph, 0.0, j_z)
    }

    pub fn heisenberg(graph: CouplingGraph, j: f64) -> Self {
        Self::xxz(graph, j, j)
    }

    pub fn from_axis_scales(graph: CouplingGraph, scales: [f64; 3]) -> Self {
        Self {
            graph,
            couplings: Couplings::Scaled(scales),
        }
    }

    /// Arbitrary per-axis coupling matrices; each must be symmetric with zero diagonal.
    pub fn general(matrices: [Vec<Vec<f64>>; 3]) -> Result<Self> {
        let n = matrices[0].len();
        let mut flat: [Vec<f64>; 3] = Default::default();
        let mut support = vec![vec![0.0; n]; n];
        for (a, m) in matrices.into_iter().enumerate() {
            if m.len() != n {
                return Err(FloquetError::InvalidGraph(
                    "axis matrices differ in size".into(),
                ));
            }
            let g = CouplingGraph::explicit(m)?;
            for (j, row) in support.iter_mut().enumerate() {
                for (k, entry) in row.iter_mut().enumerate() {
                    if g.coupling(j, k) != 0.0 {
                        *entry = 1.0;
                    }
                }
            }
            flat[a] = g.couplings;
        }
        Ok(Self {
            graph: CouplingGraph::explicit(support)?,
            couplings: Couplings::Matrices(flat),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.graph.n_sites
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    /// `J^axis_{jk}`.
    pub fn coupling(&self, axis: Axis, j: usize, k: usize) -> f64 {
        match &self.couplings {
            Couplings::Scaled(scales) => scales[axis.index() - 1] * self.graph.coupling(j, k),
            Couplings::Matrices(m) => m[axis.index() - 1][j * self.graph.n_sites + k],
        }
    }

    pub fn xxz_parameters(&self) -> Option<XxzParameters> {
        match self.couplings {
            Couplings::Scaled([a, b, c]) if a == b => Some(XxzParameters { j_perp: a, j_z: c }),
            _ => None,
        }
    }

    /// The part of the model along `axes`, other couplings zeroed.
    pub fn restricted_to(&self, axes: &[Axis]) -> Self {
        let keep = |a: Axis| axes.contains(&a);
        let couplings = match &self.couplings {
            Couplings::Scaled(s) => Couplings::Scaled([
                if keep(Axis::X) { s[0] } else { 0.0 },
                if keep(Axis::Y) { s[1] } else { 0.0 },
                if keep(Axis::Z) { s[2] } else { 0.0 },
            ]),
            Couplings::Matrices(m) => {
                let pick = |a: Axis| {
                    if keep(a) {
                        m[a.index() - 1].clone()
                    } else {
                        vec![0.0; m[0].len()]
                    }
                };
                Couplings::Matrices([pick(Axis::X), pick(Axis::Y), pick(Axis::Z)])
            }
        };
        Self {
            graph: self.graph.clone(),
            couplings,
        }
    }

    /// `H_XY` part (x and y couplings).
    pub fn xy_part(&self) -> Self {
        self.restricted_to(&[Axis::X, Axis::Y])
    }

    /// `H_ZZ` part.
    pub fn zz_part(&self) -> Self {
        self.restricted_to(&[Axis::Z])
    }
}

/// Each unordered pair contributes its coupling once (the 1/2 cancels the double count).
pub fn build_hamiltonian(model: &SpinModel) -> SpinOperator {
    let n = model.n_sites();
    let mut h = SpinOperator::zero();
    for j in 0..n {
        for k in (j + 1)..n {
            for axis in Axis::ALL {
                let c = model.coupling(axis, j, k);
                if c != 0.0 {
                    h.add_term(
                        PauliString::pair((j, axis), (k, axis)),
                        Complex64::new(c, 0.0),
                    );
                }
            }
        }
    }
    h.canonicalize()
}

/// Conjugation by the product of `Z` over `sublattice`: flips the sign of every
/// `X` and `Y` factor on those sites.
pub fn bipartite_gauge_flip(h: &SpinOperator, sublattice: &BTreeSet<usize>) -> SpinOperator {
    SpinOperator::from_terms(h.iter().map(|(s, c)| {
        let sign = if s.count_xy_on(sublattice) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (s.clone(), c * sign)
    }))
}

/// Even or odd sites of a chain.
pub fn sublattice(n_sites: usize, parity: usize) -> BTreeSet<usize> {
    (0..n_sites).filter(|j| j % 2 == parity % 2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn dipolar_values() {
        assert_eq!(dipolar_couplings(2).unwrap().coupling(0, 1), 1.0);
        assert_eq!(dipolar_couplings(3).unwrap().coupling(0, 2), 0.125);
        let v = dipolar_couplings(4).unwrap().coupling(0, 3);
        assert!((v - 1.0 / 27.0).abs() < 1e-16);
        assert!(dipolar_couplings(1).is_err());
    }

    #[test]
    fn two_site_xy_model() {
        let h = build_hamiltonian(&SpinModel::xy(dipolar_couplings(2).unwrap(), 1.0));
        let expected = SpinOperator::from_terms([
            (ps("X0 X1"), Complex64::new(1.0, 0.0)),
            (ps("Y0 Y1"), Complex64::new(1.0, 0.0)),
        ]);
        assert_eq!(h, expected);
    }

    #[test]
    fn next_nearest_is_one_eighth() {
        let h = build_hamiltonian(&SpinModel::ising(dipolar_couplings(3).unwrap(), 2.0));
        let nn = h.coefficient(&ps("Z0 Z1")).re;
        let nnn = h.coefficient(&ps("Z0 Z2")).re;
        assert_eq!(nnn / nn, 0.125);
    }

    #[test]
    fn heisenberg_is_isotropic() {
        let h = build_hamiltonian(&SpinModel::heisenberg(dipolar_couplings(3).unwrap(), 0.7));
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let xx = h.coefficient(&PauliString::pair((a, Axis::X), (b, Axis::X)));
            let yy = h.coefficient(&PauliString::pair((a, Axis::Y), (b, Axis::Y)));
            let zz = h.coefficient(&PauliString::pair((a, Axis::Z), (b, Axis::Z)));
            assert_eq!(xx, yy);
            assert_eq!(yy, zz);
        }
    }

    #[test]
    fn xxz_splits_into_xy_plus_zz() {
        let m = SpinModel::xxz(dipolar_couplings(4).unwrap(), 0.8, -1.3);
        let sum = &build_hamiltonian(&m.xy_part()) + &build_hamiltonian(&m.zz_part());
        assert_eq!(sum, build_hamiltonian(&m));
    }

    #[test]
    fn gauge_flip_examples() {
        let g = CouplingGraph::nearest_neighbor(2).unwrap();
        let hxy = build_hamiltonian(&SpinModel::xy(g.clone(), 1.0));
        let flipped = bipartite_gauge_flip(&hxy, &BTreeSet::from([1]));
        assert_eq!(flipped, -&hxy);
        let hzz = build_hamiltonian(&SpinModel::ising(g, 1.0));
        assert_eq!(bipartite_gauge_flip(&hzz, &BTreeSet::from([0])), hzz);
    }

    #[test]
    fn explicit_graph_validation() {
        assert!(CouplingGraph::explicit(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(CouplingGraph::explicit(vec![vec![0.0, 1.0], vec![0.5, 0.0]]).is_err());
        assert!(CouplingGraph::explicit(vec![vec![0.0, 1.0]]).is_err());
        let g = CouplingGraph::explicit(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(g.pairs().collect::<Vec<_>>(), vec![(0, 1, 2.0)]);
    }

    #[test]
    fn general_matrices_model() {
        let z = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let x = vec![vec![0.0, 1.5], vec![1.5, 0.0]];
        let m = SpinModel::general([x, z.clone(), z]).unwrap();
        let h = build_hamiltonian(&m);
        assert_eq!(h.len(), 1);
        assert_eq!(h.coefficient(&ps("X0 X1")).re, 1.5);
        assert!(m.xxz_parameters().is_none());
    }
}
