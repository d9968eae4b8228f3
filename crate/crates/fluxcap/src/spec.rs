//! Single-qubit device description.
//!
//! The qubit is a superconducting loop of four Josephson junctions with a
//! voltage-gated island between the two smaller junctions. Two junctions are
//! large and identical; the other two are scaled down by `alpha` in both
//! Josephson energy and capacitance, so every junction shares the same
//! Ej*Ec product scale set by `ej1_ghz` and the ratio `r`.

use serde::{Deserialize, Serialize};

use crate::units;
use crate::{Error, Result};

/// Control and fabrication parameters of one qubit.
///
/// Energies in GHz, capacitances in fF, voltage in uV, flux in units of the
/// flux quantum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxQubitSpec {
    /// Josephson energy of the two large junctions.
    pub ej1_ghz: f64,
    /// Size ratio of the small junctions, in (0, 1].
    pub alpha: f64,
    /// Ej/Ec ratio of the large junctions.
    pub r: f64,
    /// Island gate capacitance.
    pub cg_ff: f64,
    /// External flux through the loop.
    pub f: f64,
    /// Island gate voltage.
    pub ve_uv: f64,
    /// Extra capacitance loading the island, e.g. from attached couplers
    /// that are not modelled explicitly.
    pub island_load_ff: f64,
}

impl Default for FluxQubitSpec {
    fn default() -> Self {
        FluxQubitSpec {
            ej1_ghz: 200.0,
            alpha: 0.2,
            r: 80.0,
            cg_ff: 0.16,
            f: 0.5,
            ve_uv: 0.0,
            island_load_ff: 0.0,
        }
    }
}

impl FluxQubitSpec {
    /// Checks the declared invariants and normalizes the flux into [0, 1).
    pub fn validated(mut self) -> Result<Self> {
        for (name, v) in [
            ("ej1_ghz", self.ej1_ghz),
            ("alpha", self.alpha),
            ("r", self.r),
            ("cg_ff", self.cg_ff),
            ("f", self.f),
            ("ve_uv", self.ve_uv),
            ("island_load_ff", self.island_load_ff),
        ] {
            if !v.is_finite() {
                return Err(Error::invariant(name, format!("must be finite, got {v}")));
            }
        }
        if !(self.ej1_ghz > 0.0) {
            return Err(Error::invariant(
                "ej1_ghz",
                format!("must be positive, got {}", self.ej1_ghz),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invariant(
                "alpha",
                format!("must lie in (0, 1], got {}", self.alpha),
            ));
        }
        if !(self.r > 0.0) {
            return Err(Error::invariant(
                "r",
                format!("must be positive, got {}", self.r),
            ));
        }
        if self.cg_ff < 0.0 {
            return Err(Error::invariant(
                "cg_ff",
                format!("must be non-negative, got {}", self.cg_ff),
            ));
        }
        if self.island_load_ff < 0.0 {
            return Err(Error::invariant(
                "island_load_ff",
                format!("must be non-negative, got {}", self.island_load_ff),
            ));
        }
        self.f = self.f.rem_euclid(1.0);
        Ok(self)
    }

    /// Same spec at a different flux.
    pub fn with_flux(&self, f: f64) -> Self {
        FluxQubitSpec {
            f: f.rem_euclid(1.0),
            ..self.clone()
        }
    }

    /// Same spec at a different gate voltage.
    pub fn with_voltage(&self, ve_uv: f64) -> Self {
        FluxQubitSpec {
            ve_uv,
            ..self.clone()
        }
    }

    /// Island offset charge n_g = Cg*Ve/2e in Cooper-pair units.
    pub fn offset_charge(&self) -> f64 {
        units::offset_charge(self.cg_ff, self.ve_uv)
    }

    /// Gate voltage in uV that would place `n_g` Cooper pairs of offset
    /// charge on the island. `n_g = 0.5` is the charge-degeneracy point
    /// where the voltage-activated coupling peaks.
    pub fn voltage_for_offset_charge(&self, n_g: f64) -> Result<f64> {
        units::voltage_for_offset_charge(self.cg_ff, n_g)
    }

    /// The four junctions implied by the spec.
    pub fn junctions(&self) -> Result<JunctionSet> {
        JunctionSet::from_spec(self)
    }
}

/// One Josephson junction: tunneling energy and self-capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub ej_ghz: f64,
    pub c_ff: f64,
}

/// The four junctions around the loop, ordered so that 1 and 4 are the large
/// pair and 2 and 3 (on either side of the island) are the alpha-scaled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionSet {
    pub jj: [Junction; 4],
}

impl JunctionSet {
    /// Derives junction energies and capacitances from a spec.
    ///
    /// The large-junction capacitance follows from Ec1 = Ej1/r; the small
    /// junctions scale both Ej and C by alpha, which scales their own
    /// Ej/Ec ratio by alpha^2.
    pub fn from_spec(spec: &FluxQubitSpec) -> Result<Self> {
        let spec = spec.clone().validated()?;
        let ec1 = spec.ej1_ghz / spec.r;
        let c1 = units::capacitance_for_charging_energy(ec1)?;
        let large = Junction {
            ej_ghz: spec.ej1_ghz,
            c_ff: c1,
        };
        let small = Junction {
            ej_ghz: spec.alpha * spec.ej1_ghz,
            c_ff: spec.alpha * c1,
        };
        Ok(JunctionSet {
            jj: [large, small, small, large],
        })
    }
}
