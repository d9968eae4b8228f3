//! Qubit spectra, two-level reduction, and parameter sweeps.
//!
//! [`QubitSolver`] is the memoizing front door to the eigensolver: every
//! downstream quantity (couplings, error budgets, sweeps) funnels its solves
//! through one so that repeated work is cached and, when a store is
//! attached, persisted. The two-level reduction projects the circuit onto
//! the persistent-current frame defined at half flux, yielding the bias
//! epsilon and tunneling Delta with E01 = sqrt(eps^2 + Delta^2).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::ChargeBasis;
use crate::eigen::{converge_cutoff, lowest_eigenpairs, CutoffCertificate, EigenOptions};
use crate::hamiltonian::{build_hamiltonian_dressed, charging_matrix, node_capacitance_matrix, FluxGauge};
use crate::spec::FluxQubitSpec;
use crate::{Error, Result};

/// Half-width of the flux window around f = 1/2 where the two-level
/// reduction is meaningful.
pub const TWO_LEVEL_FLUX_WINDOW: f64 = 0.02;

/// Lowest part of one qubit's spectrum with its eigenvectors and the basis
/// they live in.
#[derive(Debug, Clone)]
pub struct QubitSpectrum {
    pub energies_ghz: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub basis: ChargeBasis,
}

impl QubitSpectrum {
    pub fn e01(&self) -> f64 {
        self.energies_ghz[1] - self.energies_ghz[0]
    }

    pub fn e12(&self) -> f64 {
        self.energies_ghz[2] - self.energies_ghz[1]
    }

    /// Matrix element <i| n_node |j> of one node's Cooper-pair number.
    pub fn charge_moment(&self, node: usize, i: usize, j: usize) -> Complex64 {
        assert!(node < 3);
        let si = &self.states[i];
        let sj = &self.states[j];
        let mut acc = Complex64::ZERO;
        for (idx, n) in self.basis.iter() {
            acc += si[idx].conj() * sj[idx] * (n[node] as f64);
        }
        acc
    }
}

/// Exact-bit fingerprint of one solve. Two solves with equal fingerprints
/// return identical results, which is what makes caching safe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolveKey {
    ej_bits: [u64; 4],
    ec_bits: [u64; 9],
    ng_bits: u64,
    f_bits: u64,
    gauge_bits: [u64; 3],
    nc: u32,
    k: usize,
}

impl SolveKey {
    /// Stable text form for persistent stores.
    pub fn fingerprint(&self) -> String {
        let mut s = String::with_capacity(300);
        s.push_str("solve-v1");
        for b in self.ej_bits {
            s.push_str(&format!(":{b:016x}"));
        }
        for b in self.ec_bits {
            s.push_str(&format!(":{b:016x}"));
        }
        s.push_str(&format!(":{:016x}", self.ng_bits));
        s.push_str(&format!(":{:016x}", self.f_bits));
        for b in self.gauge_bits {
            s.push_str(&format!(":{b:016x}"));
        }
        s.push_str(&format!(":nc={}:k={}", self.nc, self.k));
        s
    }
}

/// Flat, serializable form of a solved spectrum for persistent stores.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct StoredSpectrum {
    pub nc: u32,
    pub dim: usize,
    pub energies_ghz: Vec<f64>,
    /// Eigenvectors concatenated state by state, each amplitude as (re, im).
    pub amplitudes: Vec<f64>,
}

/// Persistent second-level cache, e.g. on disk. Implementations must return
/// exactly what was saved or nothing at all.
pub trait SpectrumStore: Send + Sync {
    fn load(&self, key: &str) -> Option<StoredSpectrum>;
    fn save(&self, key: &str, value: &StoredSpectrum);
}

/// Memoizing eigensolver front end at a fixed charge cutoff.
pub struct QubitSolver {
    nc: u32,
    eigen: EigenOptions,
    cache: Mutex<HashMap<SolveKey, Arc<QubitSpectrum>>>,
    store: Option<Arc<dyn SpectrumStore>>,
}

impl QubitSolver {
    pub fn new(nc: u32) -> Self {
        QubitSolver {
            nc,
            eigen: EigenOptions::default(),
            cache: Mutex::new(HashMap::new()),
            store: None,
        }
    }

    pub fn with_eigen_options(mut self, eigen: EigenOptions) -> Self {
        self.eigen = eigen;
        self
    }

    /// Runs the cutoff search for a spec and builds a solver pinned at the
    /// certified cutoff.
    pub fn with_converged_cutoff(
        spec: &FluxQubitSpec,
        k: usize,
        tol_ghz: f64,
        eigen: EigenOptions,
    ) -> Result<(Self, CutoffCertificate)> {
        let cert = converge_cutoff(spec, k, tol_ghz, &eigen)?;
        Ok((QubitSolver::new(cert.nc).with_eigen_options(eigen), cert))
    }

    /// Attaches a persistent store consulted before solving and fed after.
    pub fn set_store(&mut self, store: Arc<dyn SpectrumStore>) {
        self.store = Some(store);
    }

    pub fn cutoff(&self) -> u32 {
        self.nc
    }

    pub fn eigen_options(&self) -> &EigenOptions {
        &self.eigen
    }

    /// Lowest `k` eigenpairs of a standalone qubit.
    pub fn solve(&self, spec: &FluxQubitSpec, k: usize) -> Result<Arc<QubitSpectrum>> {
        let spec = spec.clone().validated()?;
        let ec = charging_matrix(&node_capacitance_matrix(&spec)?)?;
        self.solve_dressed(&spec, &ec, k)
    }

    /// Lowest `k` eigenpairs of a qubit whose charging matrix was dressed by
    /// a surrounding network.
    pub fn solve_dressed(
        &self,
        spec: &FluxQubitSpec,
        ec_ghz: &Matrix3<f64>,
        k: usize,
    ) -> Result<Arc<QubitSpectrum>> {
        let spec = spec.clone().validated()?;
        let gauge = FluxGauge::default();
        let key = SolveKey {
            ej_bits: {
                let jj = spec.junctions()?.jj;
                [
                    jj[0].ej_ghz.to_bits(),
                    jj[1].ej_ghz.to_bits(),
                    jj[2].ej_ghz.to_bits(),
                    jj[3].ej_ghz.to_bits(),
                ]
            },
            ec_bits: {
                let mut b = [0u64; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        b[3 * i + j] = ec_ghz[(i, j)].to_bits();
                    }
                }
                b
            },
            ng_bits: spec.offset_charge().to_bits(),
            f_bits: spec.f.to_bits(),
            gauge_bits: [
                gauge.chi[0].to_bits(),
                gauge.chi[1].to_bits(),
                gauge.chi[2].to_bits(),
            ],
            nc: self.nc,
            k,
        };
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let basis = ChargeBasis::new(self.nc)?;
        if let Some(store) = &self.store {
            if let Some(stored) = store.load(&key.fingerprint()) {
                if stored.nc == self.nc
                    && stored.dim == basis.dimension()
                    && stored.energies_ghz.len() == k
                    && stored.amplitudes.len() == 2 * k * basis.dimension()
                {
                    let spectrum = Arc::new(unpack_stored(&stored, basis));
                    self.cache.lock().unwrap().insert(key, spectrum.clone());
                    return Ok(spectrum);
                }
            }
        }
        let h = build_hamiltonian_dressed(&spec, &basis, ec_ghz, &gauge)?;
        let pairs = lowest_eigenpairs(&h, k, &self.eigen)?;
        let spectrum = Arc::new(QubitSpectrum {
            energies_ghz: pairs.iter().map(|p| p.value).collect(),
            states: pairs.into_iter().map(|p| p.vector).collect(),
            basis,
        });
        if let Some(store) = &self.store {
            store.save(&key.fingerprint(), &pack_stored(&spectrum));
        }
        self.cache.lock().unwrap().insert(key, spectrum.clone());
        Ok(spectrum)
    }
}

fn pack_stored(s: &QubitSpectrum) -> StoredSpectrum {
    let mut amplitudes = Vec::with_capacity(2 * s.states.len() * s.basis.dimension());
    for state in &s.states {
        for a in state {
            amplitudes.push(a.re);
            amplitudes.push(a.im);
        }
    }
    StoredSpectrum {
        nc: s.basis.cutoff(),
        dim: s.basis.dimension(),
        energies_ghz: s.energies_ghz.clone(),
        amplitudes,
    }
}

fn unpack_stored(s: &StoredSpectrum, basis: ChargeBasis) -> QubitSpectrum {
    let dim = s.dim;
    let states = s
        .energies_ghz
        .iter()
        .enumerate()
        .map(|(i, _)| {
            (0..dim)
                .map(|j| {
                    let at = 2 * (i * dim + j);
                    Complex64::new(s.amplitudes[at], s.amplitudes[at + 1])
                })
                .collect()
        })
        .collect();
    QubitSpectrum {
        energies_ghz: s.energies_ghz.clone(),
        states,
        basis,
    }
}

// --- Two-level reduction -------------------------------------------------

/// Bias and tunneling of the two-level reduction near half flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelParams {
    pub epsilon_ghz: f64,
    pub delta_ghz: f64,
    /// sqrt(eps^2 + Delta^2), the model's qubit splitting.
    pub e01_ghz: f64,
}

/// Energy gaps E01 and E12 of a spec.
pub fn energy_gaps(solver: &QubitSolver, spec: &FluxQubitSpec) -> Result<(f64, f64)> {
    let s = solver.solve(spec, 3)?;
    Ok((s.e01(), s.e12()))
}

/// Projects the circuit onto the persistent-current frame.
///
/// The frame states are the symmetric and antisymmetric combinations of the
/// two lowest half-flux eigenstates. Within them the Hamiltonian at flux f
/// reads (eps/2) sigma_z + (Delta/2) sigma_x up to an identity shift; the
/// sign of eps is pinned so that it decreases with increasing flux, matching
/// the circulating-current labelling. Only defined for
/// |f - 1/2| <= [`TWO_LEVEL_FLUX_WINDOW`].
pub fn two_level_params(solver: &QubitSolver, spec: &FluxQubitSpec) -> Result<TwoLevelParams> {
    let spec = spec.clone().validated()?;
    let detuning = spec.f - 0.5;
    if detuning.abs() > TWO_LEVEL_FLUX_WINDOW {
        return Err(Error::domain(format!(
            "two-level reduction is only defined within |f - 1/2| <= {TWO_LEVEL_FLUX_WINDOW}, got f = {}",
            spec.f
        )));
    }
    let frame = solver.solve(&spec.with_flux(0.5), 2)?;
    let ec = charging_matrix(&node_capacitance_matrix(&spec)?)?;
    let basis = frame.basis;
    let g0 = &frame.states[0];
    let e0 = &frame.states[1];

    let project = |f: f64| -> Result<(f64, f64)> {
        let h = build_hamiltonian_dressed(&spec.with_flux(f), &basis, &ec, &FluxGauge::default())?;
        // eps = <R|H|R> - <L|H|L> = -2 Re <g0|H|e0> for L,R = (g0 +- e0)/sqrt2;
        // Delta couples the frame states.
        let h_ge = h.matrix_element(g0, e0);
        let h_gg = h.matrix_element(g0, g0).re;
        let h_ee = h.matrix_element(e0, e0).re;
        let eps = -2.0 * h_ge.re;
        let lr = Complex64::new(0.5 * (h_ee - h_gg), 0.0) + Complex64::new(0.0, 1.0) * h_ge.im;
        let delta = 2.0 * lr.norm();
        Ok((eps, delta))
    };

    let (mut eps, delta) = project(spec.f)?;
    // Pin the global sign of eps: a small flux increase must lower it.
    let (probe_eps, _) = project(0.5 + 1e-3)?;
    if probe_eps > 0.0 {
        eps = -eps;
    }
    Ok(TwoLevelParams {
        epsilon_ghz: eps,
        delta_ghz: delta,
        e01_ghz: eps.hypot(delta),
    })
}

// --- Sweeps --------------------------------------------------------------

/// Which control knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    Flux,
    Voltage,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Flux => "f",
            SweepAxis::Voltage => "Ve_uV",
        }
    }

    pub fn apply(&self, template: &FluxQubitSpec, value: f64) -> FluxQubitSpec {
        match self {
            SweepAxis::Alpha => FluxQubitSpec {
                alpha: value,
                ..template.clone()
            },
            SweepAxis::Flux => template.with_flux(value),
            SweepAxis::Voltage => template.with_voltage(value),
        }
    }
}

/// One sweep row. Two-level fields are present only where the reduction is
/// defined.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub e01_ghz: f64,
    pub e12_ghz: f64,
    pub delta_ghz: Option<f64>,
    pub epsilon_ghz: Option<f64>,
}

/// Evaluates one sweep point; errors are per-point so a sweep can report
/// partial results.
pub fn sweep_point(
    solver: &QubitSolver,
    template: &FluxQubitSpec,
    axis: SweepAxis,
    value: f64,
) -> Result<SweepPoint> {
    let spec = axis.apply(template, value).validated()?;
    let (e01, e12) = energy_gaps(solver, &spec)?;
    let two_level = if (spec.f - 0.5).abs() <= TWO_LEVEL_FLUX_WINDOW {
        Some(two_level_params(solver, &spec)?)
    } else {
        None
    };
    Ok(SweepPoint {
        axis_value: value,
        e01_ghz: e01,
        e12_ghz: e12,
        delta_ghz: two_level.map(|t| t.delta_ghz),
        epsilon_ghz: two_level.map(|t| t.epsilon_ghz),
    })
}

/// Sweeps an axis over a grid, collecting per-point results.
pub fn sweep(
    solver: &QubitSolver,
    template: &FluxQubitSpec,
    axis: SweepAxis,
    values: &[f64],
) -> Vec<(f64, Result<SweepPoint>)> {
    values
        .iter()
        .map(|&v| (v, sweep_point(solver, template, axis, v)))
        .collect()
}

/// Central-difference sensitivity of E01 to gate voltage, with a Richardson
/// half-step check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEstimate {
    /// (E01(Ve+s) - E01(Ve-s)) / 2s at the requested step.
    pub ghz_per_uv: f64,
    /// Same stencil at half the step.
    pub refined_ghz_per_uv: f64,
    /// Set when the two stencils disagree by more than 5%.
    pub step_warning: bool,
}

/// dE01/dVe in GHz/uV at the spec's operating point.
pub fn de01_dve(solver: &QubitSolver, spec: &FluxQubitSpec, step_uv: f64) -> Result<SlopeEstimate> {
    if !(step_uv > 0.0) || !step_uv.is_finite() {
        return Err(Error::domain(format!(
            "finite-difference step must be positive, got {step_uv}"
        )));
    }
    let spec = spec.clone().validated()?;
    let gap = |ve: f64| -> Result<f64> {
        Ok(solver.solve(&spec.with_voltage(ve), 2)?.e01())
    };
    let stencil = |s: f64| -> Result<f64> {
        Ok((gap(spec.ve_uv + s)? - gap(spec.ve_uv - s)?) / (2.0 * s))
    };
    let coarse = stencil(step_uv)?;
    let refined = stencil(0.5 * step_uv)?;
    // Relative disagreement with an absolute floor so a flat region does not
    // trip the warning on round-off.
    let floor = 1e-12;
    let step_warning = (coarse - refined).abs() > 0.05 * refined.abs() + floor;
    Ok(SlopeEstimate {
        ghz_per_uv: coarse,
        refined_ghz_per_uv: refined,
        step_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quick_solver() -> QubitSolver {
        // nc = 5 keeps unit tests fast; absolute accuracy is exercised by
        // integration tests at the certified cutoff.
        QubitSolver::new(5)
    }

    #[test]
    fn solver_caches_by_exact_inputs() {
        let solver = quick_solver();
        let spec = FluxQubitSpec::default();
        let a = solver.solve(&spec, 3).unwrap();
        let b = solver.solve(&spec, 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = solver.solve(&spec.with_voltage(10.0), 3).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
    }

    #[test]
    fn two_level_at_half_flux_is_pure_tunneling() {
        let solver = quick_solver();
        let spec = FluxQubitSpec::default();
        let t = two_level_params(&solver, &spec).unwrap();
        let (e01, _) = energy_gaps(&solver, &spec).unwrap();
        assert!(t.epsilon_ghz.abs() < 1e-8, "eps = {}", t.epsilon_ghz);
        assert_relative_eq!(t.delta_ghz, e01, max_relative = 1e-9);
        assert_relative_eq!(t.e01_ghz, e01, max_relative = 1e-9);
    }

    #[test]
    fn two_level_epsilon_is_antisymmetric_and_decreasing() {
        let solver = quick_solver();
        let spec = FluxQubitSpec::default();
        let up = two_level_params(&solver, &spec.with_flux(0.502)).unwrap();
        let down = two_level_params(&solver, &spec.with_flux(0.498)).unwrap();
        assert!(up.epsilon_ghz < 0.0, "eps(f>1/2) = {}", up.epsilon_ghz);
        assert_relative_eq!(up.epsilon_ghz, -down.epsilon_ghz, epsilon = 1e-6);
        // Model splitting tracks the exact gap.
        let (e01, _) = energy_gaps(&solver, &spec.with_flux(0.502)).unwrap();
        assert_relative_eq!(up.e01_ghz, e01, max_relative = 0.01);
    }

    #[test]
    fn two_level_outside_window_is_a_domain_error() {
        let solver = quick_solver();
        let spec = FluxQubitSpec::default().with_flux(0.45);
        assert!(matches!(
            two_level_params(&solver, &spec),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sweep_reports_per_point_diagnostics() {
        let solver = quick_solver();
        let template = FluxQubitSpec::default();
        let rows = sweep(&solver, &template, SweepAxis::Alpha, &[0.2, 1.5]);
        assert!(rows[0].1.is_ok());
        assert!(rows[1].1.is_err());
        // Flux far from the window still yields gaps, no two-level fields.
        let rows = sweep(&solver, &template, SweepAxis::Flux, &[0.40]);
        let p = rows[0].1.as_ref().unwrap();
        assert!(p.delta_ghz.is_none());
        assert!(p.e01_ghz > 0.0);
    }

    #[test]
    fn voltage_slope_vanishes_at_zero_bias() {
        let solver = quick_solver();
        // E01 is even in the offset charge, so the slope at Ve = 0 is zero
        // up to solver noise and the Richardson check stays quiet.
        let spec = FluxQubitSpec {
            cg_ff: 0.077,
            ..Default::default()
        };
        let s = de01_dve(&solver, &spec, 10.0).unwrap();
        assert!(s.ghz_per_uv.abs() < 1e-9, "slope = {}", s.ghz_per_uv);
        assert!(!s.step_warning);
    }

    #[test]
    fn voltage_slope_is_finite_off_bias() {
        let solver = quick_solver();
        let spec = FluxQubitSpec {
            cg_ff: 0.077,
            ve_uv: 1500.0,
            ..Default::default()
        };
        let s = de01_dve(&solver, &spec, 20.0).unwrap();
        assert!(s.ghz_per_uv.abs() > 0.0);
        assert!(!s.step_warning, "coarse {} refined {}", s.ghz_per_uv, s.refined_ghz_per_uv);
    }

    #[test]
    fn stored_spectra_round_trip() {
        let solver = quick_solver();
        let spec = FluxQubitSpec::default();
        let s = solver.solve(&spec, 2).unwrap();
        let packed = pack_stored(&s);
        let back = unpack_stored(&packed, s.basis);
        assert_eq!(back.energies_ghz, s.energies_ghz);
        for (a, b) in back.states.iter().zip(s.states.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x, y);
            }
        }
    }
}
