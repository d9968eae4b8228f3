//! Charge-basis Hamiltonian of the four-junction loop.
//!
//! Three node phases survive after grounding one electrode: the two outer
//! nodes (a, c) and the gated island (b) between the small junctions. The
//! external flux is gauged onto the fourth junction by default, so the
//! Hamiltonian is
//!
//!   H = 4 sum_ij Ec_ij (n_i - ng_i)(n_j - ng_j)
//!     + sum_k Ej_k - Ej1 cos(phi_1) - Ej2 cos(phi_2) - Ej3 cos(phi_3)
//!     - Ej4 cos(phi_4)
//!
//! with Ec = e^2/2 C^-1 in GHz and the junction phase arguments tied to the
//! node phases by the loop constraint. Each cosine is a nearest-neighbor
//! shift stencil in charge space, so rows carry at most nine stored entries.

use nalgebra::Matrix3;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::basis::ChargeBasis;
use crate::operator::SparseHermitianOperator;
use crate::spec::FluxQubitSpec;
use crate::units;
use crate::{Error, Result};

/// Phase factors whose imaginary part is this small relative to their
/// magnitude are snapped onto the real axis. This keeps the half-flux sweet
/// spot, where sin(pi) only vanishes to rounding, on the real symmetric
/// solver path; the perturbation is far below every solver tolerance.
const PHASE_SNAP_TOL: f64 = 1e-12;

/// Distribution of the loop flux over the four junction phase offsets.
///
/// Offsets x1..x3 sit on junctions 1..3; junction 4 absorbs the remainder so
/// that x1 + x2 + x3 + x4 = -2 pi f always holds. The default puts the whole
/// flux on junction 4. Physical spectra cannot depend on the split, which
/// makes this a useful correctness probe.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxGauge {
    pub chi: [f64; 3],
}

impl FluxGauge {
    /// Spreads the flux evenly over all four junctions.
    pub fn uniform(f: f64) -> Self {
        let per = -TAU * f / 4.0;
        FluxGauge {
            chi: [per, per, per],
        }
    }
}

/// Maxwell capacitance matrix of the three active nodes, in fF.
///
/// Row order (a, b, c): node a joins junctions 1 and 2, the island b joins
/// junctions 2 and 3 plus its gate and any extra load, node c joins
/// junctions 3 and 4.
pub fn node_capacitance_matrix(spec: &FluxQubitSpec) -> Result<Matrix3<f64>> {
    let spec = spec.clone().validated()?;
    let jj = spec.junctions()?.jj;
    let (c1, c2, c3, c4) = (jj[0].c_ff, jj[1].c_ff, jj[2].c_ff, jj[3].c_ff);
    Ok(Matrix3::new(
        c1 + c2,
        -c2,
        0.0,
        -c2,
        c2 + c3 + spec.cg_ff + spec.island_load_ff,
        -c3,
        0.0,
        -c3,
        c3 + c4,
    ))
}

/// Charging-energy matrix e^2/2 C^-1 in GHz for a node capacitance matrix in
/// fF. Fails if the capacitance matrix is not positive definite.
pub fn charging_matrix(c_ff: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let chol = nalgebra::linalg::Cholesky::new(*c_ff).ok_or_else(|| {
        Error::model("node capacitance matrix is not positive definite".to_string())
    })?;
    Ok(chol.inverse() * units::charging_energy_scale())
}

/// Hamiltonian with the default gauge (all flux on junction 4).
pub fn build_hamiltonian(
    spec: &FluxQubitSpec,
    basis: &ChargeBasis,
) -> Result<SparseHermitianOperator> {
    build_hamiltonian_gauged(spec, basis, &FluxGauge::default())
}

/// Hamiltonian with an explicit flux gauge.
pub fn build_hamiltonian_gauged(
    spec: &FluxQubitSpec,
    basis: &ChargeBasis,
    gauge: &FluxGauge,
) -> Result<SparseHermitianOperator> {
    let ec = charging_matrix(&node_capacitance_matrix(spec)?)?;
    build_hamiltonian_dressed(spec, basis, &ec, gauge)
}

/// Hamiltonian with an externally supplied charging matrix, as when the
/// qubit is dressed by a surrounding capacitance network. The spec still
/// provides junction energies, flux and offset charge.
pub fn build_hamiltonian_dressed(
    spec: &FluxQubitSpec,
    basis: &ChargeBasis,
    ec_ghz: &Matrix3<f64>,
    gauge: &FluxGauge,
) -> Result<SparseHermitianOperator> {
    let spec = spec.clone().validated()?;
    let jj = spec.junctions()?.jj;
    let ng = [0.0, spec.offset_charge(), 0.0];

    // Junction stencils: charge shift applied by e^{i arg_k} and the gauge
    // offset that rides along. x4 keeps the loop sum at -2 pi f.
    let x4 = -TAU * spec.f - gauge.chi.iter().sum::<f64>();
    let stencils: [([i32; 3], f64, f64); 4] = [
        ([1, 0, 0], jj[0].ej_ghz, gauge.chi[0]),
        ([-1, 1, 0], jj[1].ej_ghz, gauge.chi[1]),
        ([0, -1, 1], jj[2].ej_ghz, gauge.chi[2]),
        ([0, 0, -1], jj[3].ej_ghz, x4),
    ];
    let ej_total: f64 = jj.iter().map(|j| j.ej_ghz).sum();

    let mut triplets: Vec<(usize, usize, Complex64)> =
        Vec::with_capacity(basis.dimension() * 9);
    for (idx, n) in basis.iter() {
        let dn = [
            n[0] as f64 - ng[0],
            n[1] as f64 - ng[1],
            n[2] as f64 - ng[2],
        ];
        let mut diag = ej_total;
        for i in 0..3 {
            for j in 0..3 {
                diag += 4.0 * ec_ghz[(i, j)] * dn[i] * dn[j];
            }
        }
        triplets.push((idx, idx, Complex64::new(diag, 0.0)));

        for (shift, ej, chi) in stencils {
            let target = [n[0] + shift[0], n[1] + shift[1], n[2] + shift[2]];
            // Shifts leaving the charge box are truncated away.
            let Some(tidx) = basis.index_of(target) else {
                continue;
            };
            let phase = snap_real(Complex64::from_polar(1.0, chi));
            let v = -0.5 * ej * phase;
            triplets.push((tidx, idx, v));
            triplets.push((idx, tidx, v.conj()));
        }
    }
    SparseHermitianOperator::from_triplets(basis.dimension(), triplets)
}

fn snap_real(v: Complex64) -> Complex64 {
    if v.im.abs() <= PHASE_SNAP_TOL * v.norm() {
        Complex64::new(v.re, 0.0)
    } else {
        v
    }
}
