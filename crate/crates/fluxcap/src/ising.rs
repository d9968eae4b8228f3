//! Effective Ising (ZZ) couplings of capacitively coupled qubits.
//!
//! Dressing first: each qubit is re-solved with the diagonal block of the
//! full inverse-capacitance matrix, so the network's loading is inside the
//! single-qubit states. What remains of the kinetic energy is the exact
//! cross term
//!
//!   H_cross = 8 sum_ij Ec_cross[i][j] (n_i - ng_i)(n_j - ng_j)
//!
//! between the node charges of the two qubits. Projecting its diagonal onto
//! the dressed two-level product basis gives the sigma_z sigma_z coefficient
//!
//!   g = 2 sum_ij Ec_cross[i][j] D1[i] D2[j],
//!
//! with D[i] the ground-minus-excited charge expectation of node i. An
//! independent oracle diagonalizes the joint low-energy block (M states per
//! qubit, full off-diagonal cross matrix elements included) and reads g from
//! the eigenvalue combination (E_gg + E_ee - E_ge - E_eg)/4.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::Topology;
use crate::network::{CouplerGraph, ISLAND};
use crate::spec::FluxQubitSpec;
use crate::spectrum::{QubitSolver, QubitSpectrum};
use crate::{Error, Result};

/// Couplings weaker than this (GHz) are dropped from effective models.
pub const COUPLING_PRUNE_GHZ: f64 = 1e-12;

/// How far a spec's flux may sit from the sweet spot before coupling
/// extraction refuses to run.
const HALF_FLUX_TOL: f64 = 1e-9;

/// ZZ coupling of one pair, with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCoupling {
    /// Projected coupling from the full 3x3 cross block.
    pub g_ghz: f64,
    /// Same projection keeping only the island-island entry.
    pub g_island_ghz: f64,
    /// Per-qubit sigma_z coefficients (2 c1, 2 c2) of the projected
    /// diagonal, i.e. dressed splittings shifted by the interaction.
    pub delta_ghz: [f64; 2],
    /// Dressed E01 of each qubit before the cross term.
    pub dressed_e01_ghz: [f64; 2],
    /// Oracle value from joint diagonalization, when requested.
    pub g_oracle_ghz: Option<f64>,
}

/// Options for [`pair_coupling`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PairCouplingOptions {
    /// Number of dressed states per qubit for the joint-diagonalization
    /// oracle; `None` skips it.
    pub oracle_states: Option<usize>,
}

fn require_half_flux(spec: &FluxQubitSpec) -> Result<()> {
    if (spec.f - 0.5).abs() > HALF_FLUX_TOL {
        return Err(Error::domain(format!(
            "coupling extraction runs at the half-flux sweet spot, got f = {}",
            spec.f
        )));
    }
    Ok(())
}

/// Ground-minus-excited charge expectation per node.
fn charge_contrast(s: &QubitSpectrum) -> [f64; 3] {
    let mut d = [0.0; 3];
    for (i, di) in d.iter_mut().enumerate() {
        *di = (s.charge_moment(i, 0, 0) - s.charge_moment(i, 1, 1)).re;
    }
    d
}

/// ZZ coupling of two qubits joined by a coupler of `cc_ff`.
pub fn pair_coupling(
    solver: &QubitSolver,
    a: &FluxQubitSpec,
    b: &FluxQubitSpec,
    cc_ff: f64,
    opts: &PairCouplingOptions,
) -> Result<PairCoupling> {
    let a = a.clone().validated()?;
    let b = b.clone().validated()?;
    require_half_flux(&a)?;
    require_half_flux(&b)?;
    let graph = CouplerGraph::pair(&a, &b, cc_ff)?;
    let ec = graph.charging_matrix()?;
    let cross = CouplerGraph::cross_block(&ec, 0, 1);

    let k = opts.oracle_states.unwrap_or(2).max(2);
    let s1 = solver.solve_dressed(&a, &CouplerGraph::block(&ec, 0), k)?;
    let s2 = solver.solve_dressed(&b, &CouplerGraph::block(&ec, 1), k)?;

    let d1 = charge_contrast(&s1);
    let d2 = charge_contrast(&s2);
    let mut g = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            g += 2.0 * cross[(i, j)] * d1[i] * d2[j];
        }
    }
    let g_island = 2.0 * cross[(ISLAND, ISLAND)] * d1[ISLAND] * d2[ISLAND];

    // Diagonal projection h_vw = E_v + E_w + 8 sum Ec m_v[i] m_w[j] and its
    // Pauli coefficients.
    let ng1 = [0.0, a.offset_charge(), 0.0];
    let ng2 = [0.0, b.offset_charge(), 0.0];
    let moment = |s: &QubitSpectrum, ng: &[f64; 3], v: usize| -> [f64; 3] {
        [
            s.charge_moment(0, v, v).re - ng[0],
            s.charge_moment(1, v, v).re - ng[1],
            s.charge_moment(2, v, v).re - ng[2],
        ]
    };
    let m1 = [moment(&s1, &ng1, 0), moment(&s1, &ng1, 1)];
    let m2 = [moment(&s2, &ng2, 0), moment(&s2, &ng2, 1)];
    let mut h = [[0.0f64; 2]; 2];
    for (v, hv) in h.iter_mut().enumerate() {
        for (w, hvw) in hv.iter_mut().enumerate() {
            let mut cross_e = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    cross_e += 8.0 * cross[(i, j)] * m1[v][i] * m2[w][j];
                }
            }
            *hvw = s1.energies_ghz[v] + s2.energies_ghz[w] + cross_e;
        }
    }
    let c1 = 0.25 * (h[1][0] + h[1][1] - h[0][0] - h[0][1]);
    let c2 = 0.25 * (h[0][1] + h[1][1] - h[0][0] - h[1][0]);

    let g_oracle = match opts.oracle_states {
        Some(m) => Some(joint_oracle_g(&s1, &s2, &ng1, &ng2, &cross, m)?),
        None => None,
    };

    Ok(PairCoupling {
        g_ghz: g,
        g_island_ghz: g_island,
        delta_ghz: [2.0 * c1, 2.0 * c2],
        dressed_e01_ghz: [s1.e01(), s2.e01()],
        g_oracle_ghz: g_oracle,
    })
}

/// Exact low-energy coupling: diagonalize the joint M^2-dimensional block
/// with full cross matrix elements, label eigenstates by product-state
/// overlap, and combine the four labelled energies.
fn joint_oracle_g(
    s1: &QubitSpectrum,
    s2: &QubitSpectrum,
    ng1: &[f64; 3],
    ng2: &[f64; 3],
    cross: &nalgebra::Matrix3<f64>,
    m: usize,
) -> Result<f64> {
    if m < 2 || m > s1.energies_ghz.len() || m > s2.energies_ghz.len() {
        return Err(Error::domain(format!(
            "oracle needs 2 <= M <= solved states, got M = {m}"
        )));
    }
    if m > 12 {
        return Err(Error::domain(format!("oracle block M = {m} too large")));
    }
    // Charge matrix elements <v|n_i - ng_i|w> per qubit.
    let moments = |s: &QubitSpectrum, ng: &[f64; 3]| -> Vec<[[Complex64; 3]; 1]> {
        // indexed [v*m + w][0][i]
        let mut out = Vec::with_capacity(m * m);
        for v in 0..m {
            for w in 0..m {
                let mut row = [[Complex64::ZERO; 3]; 1];
                for i in 0..3 {
                    let mut e = s.charge_moment(i, v, w);
                    if v == w {
                        e -= Complex64::new(ng[i], 0.0);
                    }
                    row[0][i] = e;
                }
                out.push(row);
            }
        }
        out
    };
    let n1 = moments(s1, ng1);
    let n2 = moments(s2, ng2);

    let dim = m * m;
    let mut hmat = DMatrix::from_element(dim, dim, Complex64::ZERO);
    for v1 in 0..m {
        for w1 in 0..m {
            let r = v1 * m + w1;
            for v2 in 0..m {
                for w2 in 0..m {
                    let c = v2 * m + w2;
                    let mut e = Complex64::ZERO;
                    if v1 == v2 && w1 == w2 {
                        e += Complex64::new(
                            s1.energies_ghz[v1] + s2.energies_ghz[w1],
                            0.0,
                        );
                    }
                    for i in 0..3 {
                        for j in 0..3 {
                            e += 8.0
                                * cross[(i, j)]
                                * n1[v1 * m + v2][0][i]
                                * n2[w1 * m + w2][0][j];
                        }
                    }
                    hmat[(r, c)] = e;
                }
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(hmat);

    // Label the four computational states by largest product overlap, each
    // eigenvector used at most once so split degenerate mixtures (the ge/eg
    // resonance of identical qubits) are consumed pairwise.
    let labels = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(4 * dim);
    for (li, &(v, w)) in labels.iter().enumerate() {
        let row = v * m + w;
        for col in 0..dim {
            candidates.push((eig.eigenvectors[(row, col)].norm_sqr(), li, col));
        }
    }
    candidates.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut label_energy = [f64::NAN; 4];
    let mut label_done = [false; 4];
    let mut col_used = vec![false; dim];
    for (_, li, col) in candidates {
        if label_done[li] || col_used[col] {
            continue;
        }
        label_done[li] = true;
        col_used[col] = true;
        label_energy[li] = eig.eigenvalues[col];
    }
    let [e_gg, e_ge, e_eg, e_ee] = label_energy;
    Ok(0.25 * (e_gg + e_ee - e_ge - e_eg))
}

/// Couplings of centered representative pairs at every distance of a
/// homogeneous chain.
#[derive(Debug, Clone, Serialize)]
pub struct ChainCouplings {
    /// g at distance d sits at index d - 1.
    pub g_ghz: Vec<f64>,
    /// The representative (low, high) site pair used per distance.
    pub pairs: Vec<(usize, usize)>,
    /// g(2)/g(1).
    pub ratio: f64,
}

/// Representative couplings g(1..n-1) of an `n`-site chain and their decay
/// ratio R = g(2)/g(1). Pairs are centered so edge effects stay symmetric.
pub fn chain_couplings(
    solver: &QubitSolver,
    n: usize,
    template: &FluxQubitSpec,
    cc_ff: f64,
) -> Result<ChainCouplings> {
    if n < 3 {
        return Err(Error::domain(format!(
            "chain coupling analysis needs n >= 3 sites, got {n}"
        )));
    }
    let template = template.clone().validated()?;
    require_half_flux(&template)?;
    let graph = CouplerGraph::chain(n, &template, cc_ff)?;
    let ec = graph.charging_matrix()?;

    let mut g_by_distance = Vec::with_capacity(n - 1);
    let mut pairs = Vec::with_capacity(n - 1);
    for d in 1..n {
        let lo = (n - 1 - d) / 2;
        let hi = lo + d;
        let sl = solver.solve_dressed(&template, &CouplerGraph::block(&ec, lo), 2)?;
        let sh = solver.solve_dressed(&template, &CouplerGraph::block(&ec, hi), 2)?;
        let dl = charge_contrast(&sl);
        let dh = charge_contrast(&sh);
        let cross = CouplerGraph::cross_block(&ec, lo, hi);
        let mut g = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                g += 2.0 * cross[(i, j)] * dl[i] * dh[j];
            }
        }
        g_by_distance.push(g);
        pairs.push((lo, hi));
    }
    let g1 = g_by_distance[0];
    if g1.abs() < COUPLING_PRUNE_GHZ {
        return Err(Error::RatioUndefined { g1 });
    }
    let ratio = g_by_distance[1] / g1;
    Ok(ChainCouplings {
        g_ghz: g_by_distance,
        pairs,
        ratio,
    })
}

/// One coupled pair of an effective model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingPair {
    pub i: usize,
    pub j: usize,
    pub distance: usize,
    pub g_ghz: f64,
}

/// Diagonal Ising description of a whole array: per-site splittings and
/// pairwise ZZ couplings, pruned below [`COUPLING_PRUNE_GHZ`].
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveIsingModel {
    pub topology: Topology,
    pub site_delta_ghz: Vec<f64>,
    pub pairs: Vec<IsingPair>,
}

impl EffectiveIsingModel {
    /// Synthetic model with g(d) = g1 R^(d-1) on every pair, for schedule
    /// studies decoupled from circuit solves.
    pub fn from_ratio(
        topology: Topology,
        delta_ghz: f64,
        g1_ghz: f64,
        ratio: f64,
    ) -> Result<Self> {
        if !g1_ghz.is_finite() || !ratio.is_finite() || ratio.abs() >= 1.0 {
            return Err(Error::domain(format!(
                "synthetic model needs finite g1 and |R| < 1, got g1 = {g1_ghz}, R = {ratio}"
            )));
        }
        let n = topology.site_count();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let d = topology.distance(i, j);
                let g = g1_ghz * ratio.powi(d as i32 - 1);
                if g.abs() >= COUPLING_PRUNE_GHZ {
                    pairs.push(IsingPair {
                        i,
                        j,
                        distance: d,
                        g_ghz: g,
                    });
                }
            }
        }
        Ok(EffectiveIsingModel {
            topology,
            site_delta_ghz: vec![delta_ghz; n],
            pairs,
        })
    }

    pub fn site_count(&self) -> usize {
        self.topology.site_count()
    }

    /// Coupling of an unordered pair; zero when pruned or absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.pairs
            .iter()
            .find(|p| (p.i, p.j) == (lo, hi))
            .map(|p| p.g_ghz)
            .unwrap_or(0.0)
    }

    /// Export document: site splittings and coupled pairs with 0-based
    /// indices.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct PairDoc {
            i: usize,
            j: usize,
            distance: usize,
            #[serde(rename = "g_GHz")]
            g_ghz: f64,
        }
        #[derive(Serialize)]
        struct ModelDoc {
            sites: Vec<f64>,
            pairs: Vec<PairDoc>,
        }
        let doc = ModelDoc {
            sites: self.site_delta_ghz.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| PairDoc {
                    i: p.i,
                    j: p.j,
                    distance: p.distance,
                    g_ghz: p.g_ghz,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }
}

/// Full effective model of a coupler graph: every site dressed and solved,
/// every pair projected.
pub fn effective_model(solver: &QubitSolver, graph: &CouplerGraph) -> Result<EffectiveIsingModel> {
    graph.validate()?;
    for s in &graph.sites {
        require_half_flux(s)?;
    }
    let ec = graph.charging_matrix()?;
    let n = graph.site_count();
    let mut spectra = Vec::with_capacity(n);
    for (l, spec) in graph.sites.iter().enumerate() {
        spectra.push(solver.solve_dressed(spec, &CouplerGraph::block(&ec, l), 2)?);
    }
    let contrasts: Vec<[f64; 3]> = spectra.iter().map(|s| charge_contrast(s)).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let cross = CouplerGraph::cross_block(&ec, i, j);
            let mut g = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    g += 2.0 * cross[(a, b)] * contrasts[i][a] * contrasts[j][b];
                }
            }
            if g.abs() >= COUPLING_PRUNE_GHZ {
                pairs.push(IsingPair {
                    i,
                    j,
                    distance: graph.distance(i, j),
                    g_ghz: g,
                });
            }
        }
    }
    Ok(EffectiveIsingModel {
        topology: graph.topology,
        site_delta_ghz: spectra.iter().map(|s| s.e01()).collect(),
        pairs,
    })
}
