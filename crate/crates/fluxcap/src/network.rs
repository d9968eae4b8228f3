//! Capacitance networks of coupled qubits.
//!
//! Each qubit contributes its three nodes to a block-structured Maxwell
//! capacitance matrix; a coupler of capacitance Cc between two qubits ties
//! their islands together. Inverting the full matrix dresses every qubit's
//! charging energy and generates the interaction: the cross blocks of the
//! inverse are nonzero only through chains passing island to island.

use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;

use crate::config::{DeviceConfig, Topology};
use crate::hamiltonian::node_capacitance_matrix;
use crate::spec::FluxQubitSpec;
use crate::units;
use crate::{Error, Result};

/// Index of the island within a qubit's node triple.
pub const ISLAND: usize = 1;

/// One coupler between the islands of sites `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplerEdge {
    pub a: usize,
    pub b: usize,
    pub cc_ff: f64,
}

/// A set of qubits and the couplers joining their islands, with the site
/// metric of the underlying topology.
#[derive(Debug, Clone)]
pub struct CouplerGraph {
    pub sites: Vec<FluxQubitSpec>,
    pub edges: Vec<CouplerEdge>,
    pub topology: Topology,
}

impl CouplerGraph {
    /// Two qubits joined by one coupler.
    pub fn pair(a: &FluxQubitSpec, b: &FluxQubitSpec, cc_ff: f64) -> Result<Self> {
        let g = CouplerGraph {
            sites: vec![a.clone(), b.clone()],
            edges: vec![CouplerEdge { a: 0, b: 1, cc_ff }],
            topology: Topology::Chain { n: 2 },
        };
        g.validate()?;
        Ok(g)
    }

    /// A homogeneous nearest-neighbor chain.
    pub fn chain(n: usize, template: &FluxQubitSpec, cc_ff: f64) -> Result<Self> {
        let topology = Topology::Chain { n };
        let g = CouplerGraph {
            sites: vec![template.clone(); n],
            edges: topology
                .edges()
                .into_iter()
                .map(|(a, b)| CouplerEdge { a, b, cc_ff })
                .collect(),
            topology,
        };
        g.validate()?;
        Ok(g)
    }

    /// A homogeneous n x n grid.
    pub fn grid(n: usize, template: &FluxQubitSpec, cc_ff: f64) -> Result<Self> {
        let topology = Topology::Grid { n };
        let g = CouplerGraph {
            sites: vec![template.clone(); n * n],
            edges: topology
                .edges()
                .into_iter()
                .map(|(a, b)| CouplerEdge { a, b, cc_ff })
                .collect(),
            topology,
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds the graph a config describes, patches included.
    pub fn from_config(cfg: &DeviceConfig) -> Result<Self> {
        cfg.validate()?;
        let sites = (0..cfg.site_count())
            .map(|l| cfg.spec_for_site(l))
            .collect::<Result<Vec<_>>>()?;
        let edges = cfg
            .topology
            .edges()
            .into_iter()
            .map(|(a, b)| CouplerEdge {
                a,
                b,
                cc_ff: cfg.cc_for_edge(a, b),
            })
            .collect();
        Ok(CouplerGraph {
            sites,
            edges,
            topology: cfg.topology,
        })
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Site distance in the topology metric.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.topology.distance(a, b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::model("coupler graph has no sites"));
        }
        if self.sites.len() != self.topology.site_count() {
            return Err(Error::model(format!(
                "{} sites do not fill the topology's {}",
                self.sites.len(),
                self.topology.site_count()
            )));
        }
        for (l, s) in self.sites.iter().enumerate() {
            s.clone().validated().map_err(|e| {
                Error::model(format!("site {l}: {e}"))
            })?;
        }
        for e in &self.edges {
            if e.a >= self.sites.len() || e.b >= self.sites.len() || e.a == e.b {
                return Err(Error::model(format!(
                    "coupler ({}, {}) does not join two distinct sites",
                    e.a, e.b
                )));
            }
            if !(e.cc_ff >= 0.0) || !e.cc_ff.is_finite() {
                return Err(Error::model(format!(
                    "coupler ({}, {}) has invalid capacitance {}",
                    e.a, e.b, e.cc_ff
                )));
            }
        }
        Ok(())
    }

    /// Full Maxwell capacitance matrix, 3 nodes per site, in fF.
    pub fn capacitance_matrix(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let n = 3 * self.sites.len();
        let mut c = DMatrix::zeros(n, n);
        for (l, spec) in self.sites.iter().enumerate() {
            let block = node_capacitance_matrix(spec)?;
            for i in 0..3 {
                for j in 0..3 {
                    c[(3 * l + i, 3 * l + j)] = block[(i, j)];
                }
            }
        }
        for e in &self.edges {
            let ia = 3 * e.a + ISLAND;
            let ib = 3 * e.b + ISLAND;
            c[(ia, ia)] += e.cc_ff;
            c[(ib, ib)] += e.cc_ff;
            c[(ia, ib)] -= e.cc_ff;
            c[(ib, ia)] -= e.cc_ff;
        }
        Ok(c)
    }

    /// Charging-energy matrix e^2/2 C^-1 of the whole network, in GHz.
    pub fn charging_matrix(&self) -> Result<DMatrix<f64>> {
        let c = self.capacitance_matrix()?;
        let chol = nalgebra::linalg::Cholesky::new(c).ok_or_else(|| {
            Error::model("network capacitance matrix is not positive definite".to_string())
        })?;
        Ok(chol.inverse() * units::charging_energy_scale())
    }

    /// Diagonal 3x3 block of a network matrix for one site.
    pub fn block(m: &DMatrix<f64>, l: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| m[(3 * l + i, 3 * l + j)])
    }

    /// Off-diagonal 3x3 block (rows of site `l`, columns of site `m`).
    pub fn cross_block(m: &DMatrix<f64>, l: usize, mm: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| m[(3 * l + i, 3 * mm + j)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig5_spec() -> FluxQubitSpec {
        FluxQubitSpec {
            cg_ff: 0.077,
            ..Default::default()
        }
    }

    #[test]
    fn pair_matrix_adds_coupler_on_island_diagonals() {
        let spec = fig5_spec();
        let g = CouplerGraph::pair(&spec, &spec, 0.077).unwrap();
        let c = g.capacitance_matrix().unwrap();
        let single = node_capacitance_matrix(&spec).unwrap();
        assert_eq!(c.nrows(), 6);
        // Island diagonals gain Cc, islands get -Cc between them.
        assert_relative_eq!(c[(1, 1)], single[(1, 1)] + 0.077, max_relative = 1e-12);
        assert_relative_eq!(c[(4, 4)], single[(1, 1)] + 0.077, max_relative = 1e-12);
        assert_relative_eq!(c[(1, 4)], -0.077, max_relative = 1e-12);
        // Non-island cross entries stay zero.
        assert_eq!(c[(0, 3)], 0.0);
        assert_eq!(c[(2, 5)], 0.0);
        assert_eq!(c, c.transpose());
    }

    #[test]
    fn charging_matrix_is_the_scaled_inverse() {
        let g = CouplerGraph::pair(&fig5_spec(), &fig5_spec(), 0.077).unwrap();
        let c = g.capacitance_matrix().unwrap();
        let ec = g.charging_matrix().unwrap();
        let eye = c * ec / units::charging_energy_scale();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(eye[(i, j)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pair_cross_block_is_rank_one() {
        // The inverse couples the qubits only through the island-island
        // chain, which makes the cross block an outer product.
        let g = CouplerGraph::pair(&fig5_spec(), &fig5_spec(), 0.077).unwrap();
        let ec = g.charging_matrix().unwrap();
        let cross = CouplerGraph::cross_block(&ec, 0, 1);
        let scale = cross.abs().max();
        assert!(scale > 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        if i < k && j < l {
                            let minor = cross[(i, j)] * cross[(k, l)] - cross[(i, l)] * cross[(k, j)];
                            assert!(
                                minor.abs() <= 1e-12 * scale * scale,
                                "2x2 minor ({i},{j},{k},{l}) = {minor:e}"
                            );
                        }
                    }
                }
            }
        }
        // Island-island entry dominates the block.
        assert!(cross[(ISLAND, ISLAND)].abs() >= cross.abs().max() * 0.99);
    }

    #[test]
    fn zero_coupler_decouples_the_blocks() {
        let g = CouplerGraph::pair(&fig5_spec(), &fig5_spec(), 0.0).unwrap();
        let ec = g.charging_matrix().unwrap();
        let cross = CouplerGraph::cross_block(&ec, 0, 1);
        assert_eq!(cross.abs().max(), 0.0);
        // Diagonal blocks match the standalone qubit inverse.
        let own = crate::hamiltonian::charging_matrix(
            &node_capacitance_matrix(&fig5_spec()).unwrap(),
        )
        .unwrap();
        let block = CouplerGraph::block(&ec, 0);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(block[(i, j)], own[(i, j)], max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn from_config_applies_patches() {
        let doc = r#"{
            "topology": { "kind": "chain", "n": 3 },
            "qubit": { "cg_ff": 0.077 },
            "cc_ff": 0.1,
            "coupler_overrides": [ { "a": 1, "b": 2, "cc_ff": 0.05 } ]
        }"#;
        let cfg = crate::config::parse_device_config(doc).unwrap();
        let g = CouplerGraph::from_config(&cfg).unwrap();
        assert_eq!(g.site_count(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.edges[0].cc_ff, 0.1);
        assert_eq!(g.edges[1].cc_ff, 0.05);
        assert_eq!(g.distance(0, 2), 2);
    }

    #[test]
    fn grid_graph_has_manhattan_metric() {
        let g = CouplerGraph::grid(3, &fig5_spec(), 0.05).unwrap();
        assert_eq!(g.site_count(), 9);
        assert_eq!(g.edges.len(), 12);
        assert_eq!(g.distance(0, 8), 4);
    }
}
